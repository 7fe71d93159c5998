//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `harness = false`. Failing criteria are reported but only turn
//! the exit status red when `LMAP_ACCEPT_STRICT=1` is set. `LMAP_ACCEPT_QUICK=1`
//! skips the long Monte Carlo points (BER, TB-CC BLER, timing).

use std::time::Instant;

use lmap::bcjr::{bcjr_bidirectional, exhaustive_posterior, BackwardBoundary};
use lmap::channel::{frame_seed, simulate_frame, ChannelParams, SnrConvention, SseFrame};
use lmap::code_model::{CodeKind, CodeSpec, Termination};
use lmap::engine::{Decoder, Mode, RegisterBank};
use lmap::gf2poly::Gf2Poly;
use lmap::label::{format_labels, Label};
use lmap::sim::{
    count_ops, run_ber, run_equivalence, run_timing, DecoderKind, Precision, SimConfig, SimMode, BENCH_CODES,
};
use lmap::synth::{bank_deviation, synthesize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Report {
    failures: Vec<String>,
    quick: bool,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        println!("{} {id} {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(id.to_string());
        }
    }

    fn skip(&self, id: &str, why: &str) {
        println!("SKIP {id} {why}");
    }
}

fn rsc(pair: &str) -> CodeSpec {
    CodeSpec::from_octal_pair(pair, CodeKind::Rsc, Termination::ZeroTail).unwrap()
}

fn nsc_tb(pair: &str) -> CodeSpec {
    CodeSpec::from_octal_pair(pair, CodeKind::Nsc, Termination::TailBiting).unwrap()
}

fn threads() -> usize {
    lmap::sim::default_threads()
}

fn is_primitive(a: &Gf2Poly) -> bool {
    lmap::synth::complementary(a, a.degree().unwrap()).is_ok()
}

/// RSCs with `m <= 3` and a primitive parity numerator, every feedback.
fn small_codes() -> Vec<CodeSpec> {
    let mut out = Vec::new();
    for m in 1..=3usize {
        for a in (1u64 << m)..(1u64 << (m + 1)) {
            let a = Gf2Poly::from_bits(a);
            if !a.coeff(0) || !is_primitive(&a) {
                continue;
            }
            for q in (1u64 << m)..(1u64 << (m + 1)) {
                let q = Gf2Poly::from_bits(q);
                if q.coeff(0) {
                    out.push(CodeSpec::rsc(a.clone(), q).unwrap());
                }
            }
        }
    }
    out
}

fn c1_oracle(r: &mut Report) {
    let t0 = Instant::now();
    let codes = small_codes();
    let mut worst = 0.0f64;
    let mut frames = 0;
    for (ci, code) in codes.iter().enumerate() {
        let t = code.build_trellis();
        let sigma = ChannelParams::ebn0(2.0, 0).unwrap().sigma;
        for f in 0..200u64 {
            let len = 1 + (f as usize % 10);
            let sim = simulate_frame(code, &t, len, sigma, frame_seed(ci as u64 + 11, f)).unwrap();
            for boundary in [BackwardBoundary::Free, BackwardBoundary::ZeroState] {
                let got = bcjr_bidirectional::<f64>(&t, &sim.sse, boundary);
                let want = exhaustive_posterior(code, &sim.sse, boundary).unwrap();
                for (g, w) in got.iter().zip(&want) {
                    worst = worst.max((g - w).abs() / w.abs().max(1.0));
                }
            }
            frames += 1;
        }
    }
    r.line(
        "C1",
        worst <= 1e-9,
        format!(
            "BCJR vs exhaustive: {} codes (m<=3), {frames} frames, L=1..10, 2 dB, both boundaries: max rel dev {worst:.2e} (tol 1e-9) [{:.1}s]",
            codes.len(),
            t0.elapsed().as_secs_f64()
        ),
    );
}

fn equiv_cfg(code: &str, mode: SimMode, precision: Precision) -> SimConfig {
    let mut c = SimConfig::new(rsc(code));
    c.decoder = DecoderKind::Both;
    c.mode = mode;
    c.frame_len = 128;
    c.max_frames = 200;
    c.snr_list = vec![0.0, 2.0, 4.0];
    c.boundary = BackwardBoundary::ZeroState;
    c.precision = precision;
    c.master_seed = 2;
    c.threads = threads();
    c
}

fn c2_equivalence(r: &mut Report) {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut signs = 0;
    let mut worst_f64 = 0.0f64;
    let mut signs_f64 = 0;
    let mut parts = Vec::new();
    for code in ["7,5", "13,15", "23,25"] {
        for mode in [SimMode::Bidirectional, SimMode::Forward] {
            let rep = run_equivalence(&equiv_cfg(code, mode, Precision::DoubleDouble)).unwrap();
            worst = worst.max(rep.max_abs_dev());
            signs += rep.sign_disagreements();
            parts.push(format!("{code}/{mode:?}={:.1e}", rep.max_abs_dev()));
            let rep = run_equivalence(&equiv_cfg(code, mode, Precision::F64)).unwrap();
            worst_f64 = worst_f64.max(rep.max_abs_dev());
            signs_f64 += rep.sign_disagreements();
        }
    }
    r.line(
        "C2",
        worst <= 1e-6 && signs == 0,
        format!(
            "LMAP vs BCJR (double-double registers), 200 frames, L=128, SNR 0/2/4 dB, bidirectional and forward-only: max abs dev {worst:.2e} (tol 1e-6), sign disagreements {signs} [{}]; plain f64 registers: max abs dev {worst_f64:.2e}, sign disagreements {signs_f64} [{:.1}s]",
            parts.join(" "),
            t0.elapsed().as_secs_f64()
        ),
    );
}

fn c3_wht(r: &mut Report) {
    let mut worst = 0.0f64;
    for code in ["7,5", "13,15", "23,25"] {
        let spec = synthesize(&rsc(code)).unwrap();
        worst = worst.max(bank_deviation(&spec, 20, 32, 2.0, 3).unwrap());
    }
    r.line(
        "C3",
        worst <= 1e-9,
        format!("register banks vs WHT of trellis metrics, 20 frames, L=32, every step, both directions: max dev {worst:.2e} (tol 1e-9)"),
    );
}

fn labels(v: &[&[usize]]) -> Vec<Label> {
    v.iter().map(|x| Label::from_indices(x)).collect()
}

fn c4_fixtures(r: &mut Report, c3_passed: bool) {
    let s = synthesize(&rsc("7,5")).unwrap();
    let d = &s.forward;
    let ok75 = d.labels_i == labels(&[&[2], &[1, 2], &[1]])
        && d.labels_j == labels(&[&[2], &[1]])
        && d.sur == Label::from_indices(&[1, 2])
        && d.d_s == 0
        && d.d_f1 == Gf2Poly::from_exponents(&[2, 0])
        && d.d_f2 == Gf2Poly::from_exponents(&[3, 2, 1, 0]);
    let s13 = synthesize(&rsc("13,15")).unwrap();
    let e = &s13.forward;
    let ok13 = e.labels_i_prime == labels(&[&[1, 2], &[2, 3], &[1, 2, 3], &[1, 3], &[1], &[2], &[3]])
        && e.labels_i == labels(&[&[2, 3], &[1, 2, 3], &[1, 3], &[1], &[2], &[3], &[1, 2]]);
    r.line(
        "C4",
        ok75 && ok13 && c3_passed,
        format!(
            "(7,5): I={} J={} S={} ds={} df1={} df2={}; (13,15): I'={} I={} J={} S={} (J/S accepted via C3: {})",
            format_labels(&d.labels_i),
            format_labels(&d.labels_j),
            d.sur,
            d.d_s,
            d.d_f1,
            d.d_f2,
            format_labels(&e.labels_i_prime),
            format_labels(&e.labels_i),
            format_labels(&e.labels_j),
            e.sur,
            if c3_passed { "yes" } else { "no" }
        ),
    );
}

fn ber_point(code: &str, mode: SimMode, conv: SnrConvention) -> (f64, u64, u64) {
    let mut c = SimConfig::new(rsc(code));
    c.mode = mode;
    c.frame_len = 64;
    c.snr_list = vec![3.0];
    c.convention = conv;
    c.min_bit_errors = 3000;
    c.max_frames = 10_000_000;
    c.master_seed = 5;
    c.threads = threads();
    c.record_timing = false;
    let p = &run_ber(&c).unwrap().points[0];
    (p.ber, p.bit_errors, p.frames)
}

fn c5_ber(r: &mut Report) {
    if r.quick {
        r.skip("C5", "(quick mode)");
        return;
    }
    let t0 = Instant::now();
    let cases = [
        ("7,5", SimMode::Bidirectional, 5.07e-3, 0.30),
        ("7,5", SimMode::Forward, 3.27e-2, 0.30),
        ("561,573", SimMode::Bidirectional, 1.85e-3, 0.50),
    ];
    let mut all = true;
    let mut parts = Vec::new();
    for (code, mode, target, tol) in cases {
        let (ber, errs, frames) = ber_point(code, mode, SnrConvention::EbN0);
        let ok = (ber / target - 1.0).abs() <= tol;
        let mut part = format!(
            "{code}/{mode:?}: BER {ber:.3e} vs {target:.2e} ±{:.0}% ({errs} errors, {frames} frames) {}",
            tol * 100.0,
            if ok { "ok" } else { "out of band" }
        );
        if !ok {
            let (b2, _, _) = ber_point(code, mode, SnrConvention::EsN0);
            let ok2 = (b2 / target - 1.0).abs() <= tol;
            part.push_str(&format!("; Es/N0 gives {b2:.3e} ({})", if ok2 { "in band" } else { "out of band" }));
        }
        all &= ok;
        parts.push(part);
    }
    r.line(
        "C5",
        all,
        format!("Eb/N0, L=64, 3 dB, free end state: {} [{:.1}s]", parts.join("; "), t0.elapsed().as_secs_f64()),
    );
}

fn c6_tailbiting(r: &mut Report) {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut signs = 0;
    for code in ["7,5", "171,133"] {
        let mut c = SimConfig::new(nsc_tb(code));
        c.decoder = DecoderKind::Both;
        c.mode = SimMode::TailBiting;
        c.tb_passes = 5;
        c.frame_len = 64;
        c.max_frames = 50;
        c.snr_list = vec![2.0];
        c.precision = Precision::DoubleDouble;
        c.master_seed = 6;
        c.threads = threads();
        let rep = run_equivalence(&c).unwrap();
        worst = worst.max(rep.max_abs_dev());
        signs += rep.sign_disagreements();
    }
    r.line(
        "C6a",
        worst <= 1e-4 && signs == 0,
        format!("tail-biting LMAP vs cyclic BCJR, 5 passes, NSC (7,5) and (171,133), L=64, 50 frames, 2 dB: max abs dev {worst:.2e} (tol 1e-4), sign disagreements {signs}"),
    );
    if r.quick {
        r.skip("C6b", "(quick mode)");
        return;
    }
    let mut c = SimConfig::new(nsc_tb("51303,73171"));
    c.mode = SimMode::TailBiting;
    c.tb_passes = 5;
    c.frame_len = 64;
    c.snr_list = vec![2.0];
    c.min_bit_errors = 1;
    c.min_block_errors = 200;
    c.max_frames = 10_000_000;
    c.master_seed = 7;
    c.threads = threads();
    c.record_timing = false;
    let p = run_ber(&c).unwrap().points[0].clone();
    let target = 6.4e-3;
    r.line(
        "C6b",
        (p.bler / target - 1.0).abs() <= 0.5 && p.block_errors >= 200,
        format!(
            "TB-CC (51303,73171) L=64 2 dB: BLER {:.3e} vs {target:.1e} ±50% ({} block errors, {} frames) [{:.1}s]",
            p.bler,
            p.block_errors,
            p.frames,
            t0.elapsed().as_secs_f64()
        ),
    );
}

fn c7_complexity(r: &mut Report) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut below = true;
    let mut rows = Vec::new();
    for code in BENCH_CODES {
        let ops = count_ops(&rsc(code), 64, 2.0, 9).unwrap();
        let n = (1u64 << ops.m) as f64;
        below &= ops.lmap_mults() < ops.bcjr_mults();
        xs.push(n);
        ys.push(ops.lmap_mults());
        rows.push(format!("m={}:{:.0}/{:.0}", ops.m, ops.lmap_mults(), ops.bcjr_mults()));
    }
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let resid = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| ((slope * x + icpt) - y).abs() / y)
        .fold(0.0, f64::max);
    r.line(
        "C7a",
        below && slope <= 26.0 && resid <= 0.05,
        format!(
            "multiplications+divisions per step LMAP/BCJR [{}]: LMAP fit {slope:.2}N{icpt:+.1} (slope tol 26, max rel residual {resid:.1e}), LMAP below BCJR for all m: {below}",
            rows.join(" ")
        ),
    );
    if r.quick {
        r.skip("C7b", "(quick mode)");
        return;
    }
    let mut c = SimConfig::new(rsc("561,573"));
    c.frame_len = 64;
    c.max_frames = 300;
    c.snr_list = vec![3.0];
    c.threads = 1;
    let t = run_timing(&c).unwrap();
    r.line(
        "C7b",
        t.speedup() >= 10.0,
        format!(
            "wall clock m=8, L=64, {} frames: LMAP {:.4} ms/frame, BCJR {:.4} ms/frame, speedup {:.2}x (target >= 10x)",
            t.frames,
            t.lmap_ms,
            t.bcjr_ms,
            t.speedup()
        ),
    );
}

fn c8_determinism(r: &mut Report) {
    let mut c = SimConfig::new(rsc("13,15"));
    c.snr_list = vec![0.0, 1.0, 2.0, 3.0];
    c.min_bit_errors = 500;
    c.frame_len = 100;
    c.record_timing = false;
    c.master_seed = 8;
    c.threads = 1;
    let one = run_ber(&c).unwrap().to_csv();
    c.threads = 8;
    let eight = run_ber(&c).unwrap().to_csv();
    r.line(
        "C8a",
        one == eight,
        format!("BER CSV with 1 and 8 threads byte-identical: {} ({} bytes)", one == eight, one.len()),
    );
}

fn near_unit(rng: &mut ChaCha8Rng) -> f64 {
    let mag = 1.0 - 10f64.powf(-rng.random_range(1.0..12.0));
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn c8_fuzz(r: &mut Report) {
    let decoders: Vec<(Decoder, bool)> = ["rsc:7,5", "rsc:13,15", "rsc:23,25", "nsc:7,5:tb", "nsc:171,133:tb"]
        .iter()
        .map(|c| {
            let spec: CodeSpec = c.parse().unwrap();
            let tb = spec.termination == Termination::TailBiting;
            (Decoder::new(synthesize(&spec).unwrap()), tb)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad_llr = 0;
    let mut bad_norm = 0;
    let mut errors = 0;
    let mut min_norm = f64::INFINITY;
    let frames = 10_000;
    for f in 0..frames {
        let (dec, tb) = &decoders[f % decoders.len()];
        let len = rng.random_range(dec.m().max(1)..=48);
        let frame = SseFrame::new((0..len).map(|_| [near_unit(&mut rng), near_unit(&mut rng)]).collect());
        let m = dec.m();
        let fill = if *tb { 0.0 } else { 1.0 };
        let mut fb = RegisterBank::<f64>::filled(m, fill);
        let mut bb = RegisterBank::<f64>::filled(m, fill);
        for k in 0..len {
            let (next, lam) = dec.forward_step(&fb, frame.sym[k]);
            let (prev, rho) = dec.backward_step(&bb, frame.sym[len - 1 - k]);
            for v in [lam, rho] {
                min_norm = min_norm.min(v);
                bad_norm += usize::from(!(v > 0.0) || !v.is_finite());
            }
            fb = next;
            bb = prev;
        }
        let runs = if *tb {
            vec![dec.decode_tailbiting::<f64>(&frame, 5)]
        } else {
            vec![
                dec.decode::<f64>(&frame, Mode::Bidirectional, BackwardBoundary::Free),
                dec.decode::<f64>(&frame, Mode::Bidirectional, BackwardBoundary::ZeroState),
                dec.decode::<f64>(&frame, Mode::ForwardOnly, BackwardBoundary::Free),
            ]
        };
        for run in runs {
            match run {
                Ok(llr) => bad_llr += llr.iter().filter(|x| !x.is_finite()).count(),
                Err(_) => errors += 1,
            }
        }
    }
    r.line(
        "C8b",
        bad_llr == 0 && bad_norm == 0 && errors == 0,
        format!("fuzz {frames} frames, SSEs within 1e-1..1e-12 of ±1, 5 codes: non-finite LLRs {bad_llr}, non-positive lambda/rho {bad_norm} (min {min_norm:.2e}), decode errors {errors}"),
    );
}

fn main() {
    let quick = std::env::var("LMAP_ACCEPT_QUICK").is_ok_and(|v| v == "1");
    let strict = std::env::var("LMAP_ACCEPT_STRICT").is_ok_and(|v| v == "1");
    // `cargo test -- --list` probes every target.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let mut r = Report { failures: Vec::new(), quick };
    c1_oracle(&mut r);
    c2_equivalence(&mut r);
    c3_wht(&mut r);
    let c3_ok = !r.failures.iter().any(|f| f == "C3");
    c4_fixtures(&mut r, c3_ok);
    c5_ber(&mut r);
    c6_tailbiting(&mut r);
    c7_complexity(&mut r);
    c8_determinism(&mut r);
    c8_fuzz(&mut r);
    if r.failures.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failing criteria: {}", r.failures.join(", "));
        if strict {
            std::process::exit(1);
        }
    }
}
