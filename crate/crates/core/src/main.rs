use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lmap::bcjr::{bcjr_bidirectional, bcjr_forward, bcjr_tailbiting, BackwardBoundary};
use lmap::channel::{ChannelParams, SnrConvention, SseFrame};
use lmap::code_model::{CodeKind, CodeSpec, Termination};
use lmap::engine::{Decoder, Mode};
use lmap::sim::{
    count_ops, parse_snr_list, run_ber, run_equivalence, run_timing, DecoderKind, Precision, SimConfig, SimMode,
    TimingReport, BENCH_CODES,
};
use lmap::synth::{synthesize, DecoderSpec};
use lmap::{Dd, Error, Result};

/// LMAP decoder synthesis, decoding and simulation.
#[derive(Parser)]
#[command(name = "lmap", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the synthesized decoder structure.
    Synth {
        #[command(flatten)]
        code: CodeArgs,
        /// Write the spec here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode one frame read from a file (`-` for stdin).
    Decode(DecodeArgs),
    /// BER/BLER versus SNR.
    Ber(SimArgs),
    /// LMAP against BCJR on identical frames.
    Equiv(SimArgs),
    /// Timing and per-step operation counts.
    Bench(BenchArgs),
}

#[derive(Args, Clone, Default)]
struct CodeArgs {
    /// Octal generator pair, e.g. `7,5`.
    #[arg(long)]
    code: Option<String>,
    /// Recursive systematic code (default).
    #[arg(long, conflicts_with = "nsc")]
    rsc: bool,
    /// Non-systematic feedforward code.
    #[arg(long)]
    nsc: bool,
    /// Tail-biting termination (NSC only).
    #[arg(long)]
    tb: bool,
}

impl CodeArgs {
    fn spec(&self) -> Result<Option<CodeSpec>> {
        let Some(text) = &self.code else { return Ok(None) };
        let kind = if self.nsc { CodeKind::Nsc } else { CodeKind::Rsc };
        let term = if self.tb { Termination::TailBiting } else { Termination::ZeroTail };
        CodeSpec::from_octal_pair(text, kind, term).map(Some)
    }

    fn required(&self) -> Result<CodeSpec> {
        self.spec()?
            .ok_or_else(|| Error::Config("--code is required".into()))
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Load a decoder spec file instead of synthesizing.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Whitespace-separated pairs, c1 then c2.
    #[arg(long, default_value = "-")]
    input: String,
    /// Input holds channel outputs; converted with the noise level of `--snr`.
    #[arg(long, requires = "snr")]
    received: bool,
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value = "ebn0")]
    convention: String,
    /// forward | bidir | tb
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, default_value = "lmap")]
    decoder: String,
    /// free | zero
    #[arg(long, default_value = "free")]
    boundary: String,
    #[arg(long, default_value_t = 5)]
    passes: usize,
    /// f64 | dd
    #[arg(long, default_value = "f64")]
    precision: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// `key=value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `start:step:stop`, a comma list or one value (dB).
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    len: Option<usize>,
    /// Frame cap per SNR point (exact count for `equiv`).
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    min_block_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to `LMAP_THREADS` or all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// forward | bidir | tb
    #[arg(long)]
    mode: Option<String>,
    /// lmap | bcjr | both
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    passes: Option<usize>,
    /// ebn0 | esn0
    #[arg(long)]
    convention: Option<String>,
    #[arg(long)]
    precision: Option<String>,
    /// Write `na` in the timing column so output is reproducible.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SimArgs {
    fn config(&self, defaults: impl FnOnce(&mut SimConfig)) -> Result<SimConfig> {
        let placeholder: CodeSpec = "rsc:7,5".parse()?;
        let mut c = SimConfig::new(placeholder);
        defaults(&mut c);
        let mut have_code = false;
        if let Some(p) = &self.config {
            let text = fs::read_to_string(p)?;
            have_code = text.lines().any(|l| l.trim_start().starts_with("code"));
            c.apply_text(&text)?;
        }
        if let Some(code) = self.code.spec()? {
            c.code = code;
            have_code = true;
        }
        if !have_code {
            return Err(Error::Config("--code is required (or code= in --config)".into()));
        }
        if let Some(v) = &self.snr {
            c.snr_list = parse_snr_list(v)?;
        }
        let opt = |c: &mut SimConfig, key: &str, v: Option<String>| v.map_or(Ok(()), |v| c.set(key, &v));
        opt(&mut c, "len", self.len.map(|v| v.to_string()))?;
        opt(&mut c, "max_frames", self.frames.map(|v| v.to_string()))?;
        opt(&mut c, "min_bit_errors", self.min_errors.map(|v| v.to_string()))?;
        opt(&mut c, "min_block_errors", self.min_block_errors.map(|v| v.to_string()))?;
        opt(&mut c, "seed", self.seed.map(|v| v.to_string()))?;
        opt(&mut c, "threads", self.threads.map(|v| v.to_string()))?;
        opt(&mut c, "decoder", self.decoder.clone())?;
        opt(&mut c, "boundary", self.boundary.clone())?;
        opt(&mut c, "passes", self.passes.map(|v| v.to_string()))?;
        opt(&mut c, "convention", self.convention.clone())?;
        opt(&mut c, "precision", self.precision.clone())?;
        opt(&mut c, "mode", self.mode.clone())?;
        if self.mode.is_none() {
            let tb = c.code.termination == Termination::TailBiting;
            if tb {
                c.mode = SimMode::TailBiting;
            } else if c.mode == SimMode::TailBiting {
                c.mode = SimMode::Bidirectional;
            }
        }
        if self.no_timing {
            c.record_timing = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 200)]
    frames: u64,
    #[arg(long, default_value_t = 128)]
    len: usize,
    #[arg(long, default_value_t = 3.0)]
    snr: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_input(path: &str) -> Result<String> {
    let mut s = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut s)?;
    } else {
        s = fs::read_to_string(path)?;
    }
    Ok(s)
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("not a number: {t:?}")))
        })
        .collect()
}

fn decode(a: &DecodeArgs) -> Result<()> {
    let (code, spec) = match &a.spec {
        Some(p) => {
            let spec = DecoderSpec::parse(&fs::read_to_string(p)?)?;
            let code = match a.code.spec()? {
                Some(c) => c,
                None => spec.code.clone(),
            };
            (code, Some(spec))
        }
        None => (a.code.required()?, None),
    };
    let values = parse_values(&read_input(&a.input)?)?;
    let frame = if a.received {
        let conv: SnrConvention = a.convention.parse()?;
        let sigma = ChannelParams::new(a.snr.unwrap_or_default(), 0.5, conv, 0)?.sigma;
        SseFrame::from_received(&values, sigma)?
    } else {
        SseFrame::from_interleaved(&values)?
    };
    let mode = match &a.mode {
        Some(m) => m.parse()?,
        None if code.termination == Termination::TailBiting => SimMode::TailBiting,
        None => SimMode::Bidirectional,
    };
    if (mode == SimMode::TailBiting) != (code.termination == Termination::TailBiting) {
        return Err(Error::Config("--mode tb goes with --tb codes".into()));
    }
    let boundary: BackwardBoundary = a.boundary.parse()?;
    let precision: Precision = a.precision.parse()?;
    let llr = match a.decoder.parse::<DecoderKind>()? {
        DecoderKind::Lmap => {
            let spec = match spec {
                Some(s) => s,
                None => synthesize(&code)?,
            };
            let d = Decoder::new(spec);
            match (mode, precision) {
                (SimMode::TailBiting, Precision::F64) => d.decode_tailbiting::<f64>(&frame, a.passes)?,
                (SimMode::TailBiting, Precision::DoubleDouble) => d.decode_tailbiting::<Dd>(&frame, a.passes)?,
                (m, p) => {
                    let m = if m == SimMode::Forward { Mode::ForwardOnly } else { Mode::Bidirectional };
                    match p {
                        Precision::F64 => d.decode::<f64>(&frame, m, boundary)?,
                        Precision::DoubleDouble => d.decode::<Dd>(&frame, m, boundary)?,
                    }
                }
            }
        }
        DecoderKind::Bcjr => {
            let t = code.build_trellis();
            match mode {
                SimMode::Forward => bcjr_forward::<f64>(&t, &frame).1,
                SimMode::Bidirectional => bcjr_bidirectional::<f64>(&t, &frame, boundary),
                SimMode::TailBiting => bcjr_tailbiting::<f64>(&t, &frame, a.passes)?,
            }
        }
        DecoderKind::Both => return Err(Error::Config("decode takes --decoder lmap or bcjr".into())),
    };
    let mut text = String::new();
    for v in llr {
        text.push_str(&format!("{v}\n"));
    }
    emit(&a.out, &text)
}

fn bench(a: &BenchArgs) -> Result<()> {
    let codes: Vec<CodeSpec> = match a.code.spec()? {
        Some(c) => vec![c],
        None => BENCH_CODES
            .iter()
            .map(|c| CodeSpec::from_octal_pair(c, CodeKind::Rsc, Termination::ZeroTail))
            .collect::<Result<_>>()?,
    };
    let mut text = format!("{},lmap_mult_per_step,bcjr_mult_per_step\n", TimingReport::CSV_HEADER);
    for code in codes {
        let mut c = SimConfig::new(code.clone());
        c.frame_len = a.len;
        c.max_frames = a.frames;
        c.snr_list = vec![a.snr];
        c.master_seed = a.seed;
        c.threads = 1;
        let t = run_timing(&c)?;
        let ops = count_ops(&code, a.len, a.snr, a.seed)?;
        text.push_str(&format!("{},{:.2},{:.2}\n", t.csv_row(), ops.lmap_mults(), ops.bcjr_mults()));
    }
    emit(&a.out, &text)
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Synth { code, out } => emit(&out, &synthesize(&code.required()?)?.format()),
        Cmd::Decode(a) => decode(&a),
        Cmd::Ber(a) => {
            let cfg = a.config(|_| {})?;
            let r = run_ber(&cfg)?;
            let text = if a.json {
                serde_json::to_string_pretty(&r).map_err(|e| Error::Config(e.to_string()))? + "\n"
            } else {
                r.to_csv()
            };
            emit(&a.out, &text)
        }
        Cmd::Equiv(a) => {
            let cfg = a.config(|c| {
                c.decoder = DecoderKind::Both;
                c.frame_len = 128;
                c.max_frames = 200;
                c.snr_list = vec![0.0, 2.0, 4.0];
                c.precision = Precision::DoubleDouble;
                c.boundary = BackwardBoundary::ZeroState;
            })?;
            let r = run_equivalence(&cfg)?;
            if a.json {
                let text = serde_json::to_string_pretty(&r).map_err(|e| Error::Config(e.to_string()))? + "\n";
                emit(&a.out, &text)?;
            } else if a.out.is_some() {
                emit(&a.out, &r.to_csv())?;
            }
            println!(
                "{} frames={} max_abs_dev={:.3e} sign_disagreements={}",
                cfg.code,
                r.frames(),
                r.max_abs_dev(),
                r.sign_disagreements()
            );
            Ok(())
        }
        Cmd::Bench(a) => bench(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
