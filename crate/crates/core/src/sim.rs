//! Monte Carlo BER/BLER runs, equivalence sweeps, timing and op counts.
//!
//! Frames are simulated in fixed-size batches. A batch is decoded in
//! parallel, then its results are folded in frame order and the stopping
//! rule is checked after every frame, so the outcome does not depend on the
//! number of worker threads.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bcjr::{bcjr_bidirectional, bcjr_forward, bcjr_tailbiting, BackwardBoundary};
use crate::channel::{frame_seed, simulate_frame, ChannelParams, SimFrame, SnrConvention, SseFrame};
use crate::code_model::{CodeKind, CodeSpec, Termination, Trellis};
use crate::engine::{Decoder, Mode};
use crate::error::{Error, Result};
use crate::real::{take_op_counts, Counted, Dd, OpCounts, Real};
use crate::synth::synthesize;

/// Frames per parallel batch.
pub const BATCH: usize = 64;

/// RSC codes used for complexity and timing tables, `m = 2..=8`.
pub const BENCH_CODES: [&str; 7] = ["7,5", "13,15", "23,25", "45,67", "103,147", "211,345", "561,573"];

pub const CSV_HEADER: &str = "snr_db,frames,bits,bit_errors,ber,block_errors,bler,ms_per_frame";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    Lmap,
    Bcjr,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    Forward,
    Bidirectional,
    TailBiting,
}

/// Arithmetic used by the LMAP engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F64,
    DoubleDouble,
}

macro_rules! from_str_enum {
    ($t:ty, $what:literal, $($s:literal => $v:expr),+ $(,)?) => {
        impl std::str::FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)+
                    _ => Err(Error::Config(format!(concat!("unknown ", $what, " {:?}"), s))),
                }
            }
        }
    };
}

from_str_enum!(DecoderKind, "decoder", "lmap" => DecoderKind::Lmap, "bcjr" => DecoderKind::Bcjr, "both" => DecoderKind::Both);
from_str_enum!(SimMode, "mode", "forward" => SimMode::Forward, "fwd" => SimMode::Forward,
    "bidir" => SimMode::Bidirectional, "bidirectional" => SimMode::Bidirectional,
    "tailbiting" => SimMode::TailBiting, "tb" => SimMode::TailBiting);
from_str_enum!(Precision, "precision", "f64" => Precision::F64, "dd" => Precision::DoubleDouble);

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub frame_len: usize,
    pub snr_list: Vec<f64>,
    pub convention: SnrConvention,
    pub decoder: DecoderKind,
    pub mode: SimMode,
    pub boundary: BackwardBoundary,
    pub tb_passes: usize,
    pub min_bit_errors: u64,
    pub min_block_errors: u64,
    pub max_frames: u64,
    pub master_seed: u64,
    pub threads: usize,
    pub precision: Precision,
    /// When false the CSV timing column reads `na`, making output reproducible.
    pub record_timing: bool,
}

impl SimConfig {
    pub fn new(code: CodeSpec) -> Self {
        let mode = if code.termination == Termination::TailBiting {
            SimMode::TailBiting
        } else {
            SimMode::Bidirectional
        };
        Self {
            code,
            frame_len: 64,
            snr_list: vec![3.0],
            convention: SnrConvention::EbN0,
            decoder: DecoderKind::Lmap,
            mode,
            boundary: BackwardBoundary::Free,
            tb_passes: 5,
            min_bit_errors: 3000,
            min_block_errors: 0,
            max_frames: 1_000_000,
            master_seed: 1,
            threads: default_threads(),
            precision: Precision::F64,
            record_timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len == 0 {
            return Err(Error::Config("frame length must be at least 1".into()));
        }
        if self.min_bit_errors == 0 {
            return Err(Error::Config("min_bit_errors must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.snr_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        let tb = self.code.termination == Termination::TailBiting;
        if tb != (self.mode == SimMode::TailBiting) {
            return Err(Error::Config("tail-biting mode requires a tail-biting code and vice versa".into()));
        }
        if tb && self.frame_len < self.code.m {
            return Err(Error::Config(format!("tail-biting frames need L >= m = {}", self.code.m)));
        }
        if self.mode == SimMode::TailBiting && self.tb_passes == 0 {
            return Err(Error::Config("tb_passes must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies `key=value` lines (blank lines and `#` comments ignored).
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {line:?}")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str| v.parse::<u64>().map_err(|_| Error::Config(format!("{key}: not an integer: {v:?}")));
        match key {
            "code" => self.code = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "len" | "frame_len" => self.frame_len = int(value)? as usize,
            "snr" => self.snr_list = parse_snr_list(value)?,
            "convention" => self.convention = value.parse()?,
            "decoder" => self.decoder = value.parse()?,
            "mode" => self.mode = value.parse()?,
            "boundary" => self.boundary = value.parse()?,
            "passes" | "tb_passes" => self.tb_passes = int(value)? as usize,
            "min_bit_errors" => self.min_bit_errors = int(value)?,
            "min_block_errors" => self.min_block_errors = int(value)?,
            "max_frames" | "frames" => self.max_frames = int(value)?,
            "seed" => self.master_seed = int(value)?,
            "threads" => self.threads = int(value)? as usize,
            "precision" => self.precision = value.parse()?,
            "timing" => {
                self.record_timing = match value {
                    "1" | "true" | "yes" => true,
                    "0" | "false" | "no" => false,
                    _ => return Err(Error::Config(format!("timing: expected a boolean, got {value:?}"))),
                }
            }
            _ => return Err(Error::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }
}

/// `LMAP_THREADS`, else the machine's parallelism.
pub fn default_threads() -> usize {
    std::env::var("LMAP_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// `"0:1:6"` (inclusive range), `"0,2,4"` or a single value.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad SNR list {s:?}"));
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, d, b) = (num(start)?, num(step)?, num(stop)?);
            if !(d > 0.0) || b < a {
                return Err(bad());
            }
            let n = ((b - a) / d + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + d * i as f64).collect())
        }
        [one] => one.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointResult {
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub block_errors: u64,
    pub bler: f64,
    pub ms_per_frame: Option<f64>,
    /// Largest LMAP/BCJR LLR gap when both decoders ran.
    pub max_llr_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct SimResult {
    pub points: Vec<PointResult>,
}

impl SimResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for p in &self.points {
            let ms = p.ms_per_frame.map_or("na".to_string(), |v| format!("{v:.6}"));
            let _ = writeln!(
                s,
                "{},{},{},{},{:.6e},{},{:.6e},{}",
                p.snr_db, p.frames, p.bits, p.bit_errors, p.ber, p.block_errors, p.bler, ms
            );
        }
        s
    }
}

/// A decoder ready to run frames of one configuration.
pub struct FrameDecoder {
    code: CodeSpec,
    trellis: Trellis,
    lmap: Option<Decoder>,
    mode: SimMode,
    boundary: BackwardBoundary,
    passes: usize,
    precision: Precision,
}

impl FrameDecoder {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let lmap = match cfg.decoder {
            DecoderKind::Bcjr => None,
            _ => Some(Decoder::new(synthesize(&cfg.code)?)),
        };
        Ok(Self {
            code: cfg.code.clone(),
            trellis: cfg.code.build_trellis(),
            lmap,
            mode: cfg.mode,
            boundary: cfg.boundary,
            passes: cfg.tb_passes,
            precision: cfg.precision,
        })
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn lmap(&self, frame: &SseFrame) -> Result<Vec<f64>> {
        let d = self
            .lmap
            .as_ref()
            .ok_or_else(|| Error::Config("LMAP decoder not configured".into()))?;
        match self.precision {
            Precision::F64 => self.lmap_with::<f64>(d, frame),
            Precision::DoubleDouble => self.lmap_with::<Dd>(d, frame),
        }
    }

    fn lmap_with<R: Real>(&self, d: &Decoder, frame: &SseFrame) -> Result<Vec<f64>> {
        match self.mode {
            SimMode::Forward => d.decode::<R>(frame, Mode::ForwardOnly, self.boundary),
            SimMode::Bidirectional => d.decode::<R>(frame, Mode::Bidirectional, self.boundary),
            SimMode::TailBiting => d.decode_tailbiting::<R>(frame, self.passes),
        }
    }

    pub fn bcjr(&self, frame: &SseFrame) -> Result<Vec<f64>> {
        let t = &self.trellis;
        match self.mode {
            SimMode::Forward => Ok(bcjr_forward::<f64>(t, frame).1),
            SimMode::Bidirectional => Ok(bcjr_bidirectional::<f64>(t, frame, self.boundary)),
            SimMode::TailBiting => bcjr_tailbiting::<f64>(t, frame, self.passes),
        }
    }
}

/// Largest and summed absolute LLR gap plus sign disagreements.
pub fn compare_llrs(a: &[f64], b: &[f64]) -> Result<(f64, f64, u64)> {
    if a.len() != b.len() {
        return Err(Error::Config(format!("LLR frames differ in length ({} vs {})", a.len(), b.len())));
    }
    let mut worst = 0.0f64;
    let mut sum = 0.0;
    let mut signs = 0;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).abs();
        worst = worst.max(d);
        sum += d;
        signs += u64::from((*x < 0.0) != (*y < 0.0));
    }
    Ok((worst, sum, signs))
}

fn point_seed(master: u64, point: usize) -> u64 {
    frame_seed(master, 0x9000_0000 + point as u64)
}

fn sigma_for(cfg: &SimConfig, snr: f64) -> Result<f64> {
    Ok(ChannelParams::new(snr, 0.5, cfg.convention, 0)?.sigma)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

struct FrameOutcome {
    bit_errors: u64,
    nanos: u128,
    deviation: Option<f64>,
}

fn run_frame(dec: &FrameDecoder, cfg: &SimConfig, sigma: f64, seed: u64) -> Result<FrameOutcome> {
    let SimFrame { info, sse, .. } = simulate_frame(&dec.code, &dec.trellis, cfg.frame_len, sigma, seed)?;
    let start = Instant::now();
    let (llr, deviation) = match cfg.decoder {
        DecoderKind::Lmap => (dec.lmap(&sse)?, None),
        DecoderKind::Bcjr => (dec.bcjr(&sse)?, None),
        DecoderKind::Both => {
            let a = dec.lmap(&sse)?;
            let b = dec.bcjr(&sse)?;
            let (w, _, _) = compare_llrs(&a, &b)?;
            (a, Some(w))
        }
    };
    let nanos = start.elapsed().as_nanos();
    // Sign rule: LLR >= 0 decides 0.
    let bit_errors = llr.iter().zip(&info).filter(|(l, &b)| u8::from(**l < 0.0) != b).count() as u64;
    Ok(FrameOutcome {
        bit_errors,
        nanos,
        deviation,
    })
}

/// Simulates each SNR point until enough errors are seen or `max_frames` is hit.
pub fn run_ber(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let dec = FrameDecoder::new(cfg)?;
    let pool = pool(cfg.threads)?;
    let mut out = SimResult::default();
    for (pi, &snr) in cfg.snr_list.iter().enumerate() {
        let sigma = sigma_for(cfg, snr)?;
        let seed = point_seed(cfg.master_seed, pi);
        let mut p = PointResult {
            snr_db: snr,
            frames: 0,
            bits: 0,
            bit_errors: 0,
            ber: 0.0,
            block_errors: 0,
            bler: 0.0,
            ms_per_frame: None,
            max_llr_deviation: None,
        };
        let mut nanos = 0u128;
        let done = |p: &PointResult| {
            p.frames >= cfg.max_frames
                || (p.bit_errors >= cfg.min_bit_errors && p.block_errors >= cfg.min_block_errors)
        };
        'outer: while !done(&p) {
            let first = p.frames;
            let count = (cfg.max_frames - first).min(BATCH as u64);
            let batch: Vec<Result<FrameOutcome>> = pool.install(|| {
                (first..first + count)
                    .into_par_iter()
                    .map(|f| run_frame(&dec, cfg, sigma, frame_seed(seed, f)))
                    .collect()
            });
            for r in batch {
                let r = r?;
                p.frames += 1;
                p.bits += cfg.frame_len as u64;
                p.bit_errors += r.bit_errors;
                p.block_errors += u64::from(r.bit_errors > 0);
                nanos += r.nanos;
                if let Some(d) = r.deviation {
                    p.max_llr_deviation = Some(p.max_llr_deviation.unwrap_or(0.0).max(d));
                }
                if done(&p) {
                    break 'outer;
                }
            }
        }
        if p.frames > 0 {
            p.ber = p.bit_errors as f64 / p.bits as f64;
            p.bler = p.block_errors as f64 / p.frames as f64;
            if cfg.record_timing {
                p.ms_per_frame = Some(nanos as f64 / 1e6 / p.frames as f64);
            }
        }
        out.points.push(p);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub max_abs_dev: f64,
    pub mean_abs_dev: f64,
    pub sign_disagreements: u64,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct EquivReport {
    pub points: Vec<EquivPoint>,
}

impl EquivReport {
    pub fn max_abs_dev(&self) -> f64 {
        self.points.iter().map(|p| p.max_abs_dev).fold(0.0, f64::max)
    }

    pub fn sign_disagreements(&self) -> u64 {
        self.points.iter().map(|p| p.sign_disagreements).sum()
    }

    pub fn frames(&self) -> u64 {
        self.points.iter().map(|p| p.frames).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("snr_db,frames,max_abs_dev,mean_abs_dev,sign_disagreements\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{:.6e},{:.6e},{}",
                p.snr_db, p.frames, p.max_abs_dev, p.mean_abs_dev, p.sign_disagreements
            );
        }
        s
    }
}

/// Runs LMAP and BCJR on the same `max_frames` frames per SNR point.
pub fn run_equivalence(cfg: &SimConfig) -> Result<EquivReport> {
    cfg.validate()?;
    if cfg.decoder != DecoderKind::Both {
        return Err(Error::Config("equivalence needs decoder=both".into()));
    }
    let dec = FrameDecoder::new(cfg)?;
    let pool = pool(cfg.threads)?;
    let mut report = EquivReport::default();
    for (pi, &snr) in cfg.snr_list.iter().enumerate() {
        let sigma = sigma_for(cfg, snr)?;
        let seed = point_seed(cfg.master_seed, pi);
        let per_frame: Vec<Result<(f64, f64, u64)>> = pool.install(|| {
            (0..cfg.max_frames)
                .into_par_iter()
                .map(|f| {
                    let sim = simulate_frame(&dec.code, &dec.trellis, cfg.frame_len, sigma, frame_seed(seed, f))?;
                    compare_llrs(&dec.lmap(&sim.sse)?, &dec.bcjr(&sim.sse)?)
                })
                .collect()
        });
        let mut p = EquivPoint {
            snr_db: snr,
            frames: cfg.max_frames,
            max_abs_dev: 0.0,
            mean_abs_dev: 0.0,
            sign_disagreements: 0,
        };
        let mut sum = 0.0;
        for r in per_frame {
            let (w, s, d) = r?;
            p.max_abs_dev = p.max_abs_dev.max(w);
            sum += s;
            p.sign_disagreements += d;
        }
        let n = cfg.max_frames * cfg.frame_len as u64;
        p.mean_abs_dev = if n > 0 { sum / n as f64 } else { 0.0 };
        report.points.push(p);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingReport {
    pub code: String,
    pub m: usize,
    pub frames: u64,
    pub lmap_ms: f64,
    pub bcjr_ms: f64,
}

impl TimingReport {
    pub fn speedup(&self) -> f64 {
        self.bcjr_ms / self.lmap_ms
    }

    pub const CSV_HEADER: &'static str = "code,m,frames,lmap_ms_per_frame,bcjr_ms_per_frame,speedup";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.3}",
            self.code,
            self.m,
            self.frames,
            self.lmap_ms,
            self.bcjr_ms,
            self.speedup()
        )
    }
}

/// Wall-clock ms/frame of both decoders on one thread, after a warm-up.
/// Uses the first SNR point and `max_frames` timed frames.
pub fn run_timing(cfg: &SimConfig) -> Result<TimingReport> {
    cfg.validate()?;
    if cfg.max_frames < 2 {
        return Err(Error::Config("timing needs at least 2 frames (one is spent on warm-up)".into()));
    }
    let mut c = cfg.clone();
    c.decoder = DecoderKind::Both;
    let dec = FrameDecoder::new(&c)?;
    let snr = *cfg
        .snr_list
        .first()
        .ok_or_else(|| Error::Config("no SNR point".into()))?;
    let sigma = sigma_for(cfg, snr)?;
    let frames: Vec<SseFrame> = (0..cfg.max_frames)
        .map(|f| simulate_frame(&dec.code, &dec.trellis, cfg.frame_len, sigma, frame_seed(cfg.master_seed, f)).map(|s| s.sse))
        .collect::<Result<_>>()?;
    let warm = (frames.len() / 10).max(1);
    for f in &frames[..warm] {
        std::hint::black_box(dec.lmap(f)?);
        std::hint::black_box(dec.bcjr(f)?);
    }
    let timed = &frames[warm..];
    let time = |run: &dyn Fn(&SseFrame) -> Result<Vec<f64>>| -> Result<f64> {
        let t = Instant::now();
        for f in timed {
            std::hint::black_box(run(f)?);
        }
        Ok(t.elapsed().as_secs_f64() * 1e3 / timed.len() as f64)
    };
    let lmap_ms = time(&|f| dec.lmap(f))?;
    let bcjr_ms = time(&|f| dec.bcjr(f))?;
    Ok(TimingReport {
        code: cfg.code.to_string(),
        m: cfg.code.m,
        frames: timed.len() as u64,
        lmap_ms,
        bcjr_ms,
    })
}

/// Per-step operation counts of one bidirectional decode by each decoder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OpReport {
    pub m: usize,
    pub lmap: [f64; 4],
    pub bcjr: [f64; 4],
}

impl OpReport {
    pub const CSV_HEADER: &'static str =
        "m,lmap_add,lmap_mult,lmap_div,lmap_access,bcjr_add,bcjr_mult,bcjr_div,bcjr_access";

    pub fn csv_row(&self) -> String {
        let f = |v: &[f64; 4]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(",");
        format!("{},{},{}", self.m, f(&self.lmap), f(&self.bcjr))
    }

    /// Multiplications and divisions per step.
    pub fn lmap_mults(&self) -> f64 {
        self.lmap[1] + self.lmap[2]
    }

    pub fn bcjr_mults(&self) -> f64 {
        self.bcjr[1] + self.bcjr[2]
    }
}

/// Counts arithmetic of both decoders on one random frame.
pub fn count_ops(code: &CodeSpec, frame_len: usize, snr_db: f64, seed: u64) -> Result<OpReport> {
    if code.kind != CodeKind::Rsc {
        return Err(Error::Config("operation counts are reported for RSC codes".into()));
    }
    let dec = Decoder::new(synthesize(code)?);
    let t = code.build_trellis();
    let sigma = ChannelParams::ebn0(snr_db, seed)?.sigma;
    let sim = simulate_frame(code, &t, frame_len, sigma, seed)?;
    take_op_counts();
    dec.decode::<Counted>(&sim.sse, Mode::Bidirectional, BackwardBoundary::ZeroState)?;
    let lmap: OpCounts = take_op_counts();
    bcjr_bidirectional::<Counted>(&t, &sim.sse, BackwardBoundary::ZeroState);
    let bcjr = take_op_counts();
    Ok(OpReport {
        m: code.m,
        lmap: lmap.per_step(frame_len),
        bcjr: bcjr.per_step(frame_len),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(code: &str) -> SimConfig {
        let mut c = SimConfig::new(code.parse().unwrap());
        c.threads = 2;
        c.record_timing = false;
        c
    }

    #[test]
    fn snr_lists() {
        assert_eq!(parse_snr_list("0:1:3").unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(parse_snr_list("0,2.5").unwrap(), vec![0.0, 2.5]);
        assert_eq!(parse_snr_list("4").unwrap(), vec![4.0]);
        assert!(parse_snr_list("1:0:3").is_err());
        assert!(parse_snr_list("x").is_err());
    }

    #[test]
    fn zero_frames_give_empty_rows() {
        let mut c = cfg("rsc:7,5");
        c.max_frames = 0;
        let r = run_ber(&c).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.points[0].frames, 0);
        assert_eq!(r.points[0].bits, 0);
    }

    #[test]
    fn csv_shape() {
        let mut c = cfg("rsc:7,5");
        c.snr_list = vec![0.0, 1.0];
        c.min_bit_errors = 50;
        let csv = run_ber(&c).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",na"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn accounting_and_thread_independence() {
        let mut c = cfg("rsc:13,15");
        c.min_bit_errors = 200;
        c.snr_list = vec![1.0];
        let a = run_ber(&c).unwrap();
        c.threads = 1;
        let b = run_ber(&c).unwrap();
        assert_eq!(a, b);
        let p = &a.points[0];
        assert_eq!(p.bits, p.frames * c.frame_len as u64);
        assert!(p.bit_errors >= 200);
        assert_eq!(p.ber, p.bit_errors as f64 / p.bits as f64);
    }

    #[test]
    fn config_text_and_validation() {
        let mut c = cfg("rsc:7,5");
        c.apply_text("# comment\ncode=nsc:171,133:tb\nmode=tb\nlen=32\nsnr=0:2:4\npasses=3\n").unwrap();
        assert_eq!(c.snr_list, vec![0.0, 2.0, 4.0]);
        assert_eq!(c.tb_passes, 3);
        c.validate().unwrap();
        c.mode = SimMode::Bidirectional;
        assert!(c.validate().is_err());
        assert!(c.apply_text("bogus=1").is_err());
        assert!(c.apply_text("len").is_err());
    }

    #[test]
    fn equivalence_small() {
        let mut c = cfg("rsc:7,5");
        c.decoder = DecoderKind::Both;
        c.boundary = BackwardBoundary::ZeroState;
        c.precision = Precision::DoubleDouble;
        c.frame_len = 64;
        c.max_frames = 20;
        c.snr_list = vec![0.0, 4.0];
        let r = run_equivalence(&c).unwrap();
        assert!(r.max_abs_dev() < 1e-6);
        assert_eq!(r.sign_disagreements(), 0);
        c.decoder = DecoderKind::Lmap;
        assert!(run_equivalence(&c).is_err());
        assert!(compare_llrs(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn timing_needs_warmup() {
        let mut c = cfg("rsc:7,5");
        c.max_frames = 1;
        assert!(run_timing(&c).is_err());
        c.max_frames = 20;
        let t = run_timing(&c).unwrap();
        assert!(t.lmap_ms > 0.0 && t.bcjr_ms > 0.0);
    }

    #[test]
    fn op_counts_are_linear_in_states() {
        let r2 = count_ops(&"rsc:7,5".parse().unwrap(), 32, 2.0, 1).unwrap();
        let r3 = count_ops(&"rsc:13,15".parse().unwrap(), 32, 2.0, 1).unwrap();
        assert!(r2.lmap_mults() < r2.bcjr_mults());
        assert!(r3.lmap_mults() < r3.bcjr_mults());
        assert!(r3.lmap_mults() > r2.lmap_mults());
    }
}
