//! The LMAP decoding engine.
//!
//! A register bank holds one soft estimate per nonempty memory label; the
//! implicit `∅` entry is 1. Each step feeds every register from two sources:
//! its predecessor on the `I` cycle (second dual encoder, weighted by
//! `x̂_{c2}^{e2}`) and its predecessor on the `J` chain (first dual encoder,
//! weighted by `x̂_{c1} x̂_{c2}^{e1}`; the head of the chain reads `∅`, the
//! self-updating register reads itself). Adding both and dividing by the
//! value that lands on `∅` gives the synchronized bank.

use std::fmt;

use crate::bcjr::{llr_from_ratio, BackwardBoundary, LLR_CLAMP};
use crate::channel::{clamp_sse, SseFrame, SSE_EPS};
use crate::code_model::CodeKind;
use crate::error::{Error, Result};
use crate::gf2poly::Rate1Dual;
use crate::label::{all_labels, Label};
use crate::real::Real;
use crate::synth::{DecoderSpec, DualStructure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    ForwardOnly,
    Bidirectional,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" | "fwd" => Ok(Self::ForwardOnly),
            "bidir" | "bidirectional" => Ok(Self::Bidirectional),
            _ => Err(Error::Config(format!("unknown mode {s:?} (forward|bidir)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// `(a + b) / (1 + ab)`, clamped.
pub fn combine_c(a: f64, b: f64) -> f64 {
    clamp_sse((a + b) / (1.0 + a * b))
}

/// Register values indexed by label mask; entry 0 is the constant `∅` register.
#[derive(Clone, Debug, PartialEq)]
pub struct RegisterBank<R> {
    pub values: Vec<R>,
}

impl<R: Real> RegisterBank<R> {
    /// All registers at `fill` (1: known zero state, 0: no information).
    pub fn filled(m: usize, fill: f64) -> Self {
        let mut values = vec![R::from_f64(fill); 1 << m];
        values[0] = R::one();
        Self { values }
    }

    pub fn get(&self, l: Label) -> f64 {
        self.values[l.mask()].to_f64()
    }
}

/// Per-step diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub k: usize,
    pub direction: Direction,
    /// `λ_k` (forward) or `ρ_k` (backward).
    pub norm: f64,
    /// First dual encoder's contribution per label, before combining.
    pub raw_df1: Vec<f64>,
    /// Second dual encoder's contribution per label, before combining.
    pub raw_df2: Vec<f64>,
}

impl fmt::Display for StepTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.direction {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        };
        write!(f, "{d} k={} norm={:.17e}", self.k, self.norm)?;
        for (i, (a, b)) in self.raw_df1.iter().zip(&self.raw_df2).enumerate().skip(1) {
            write!(f, " {}:{a:.17e}/{b:.17e}", Label(i as u32))?;
        }
        Ok(())
    }
}

/// `μ_k`, `δ_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutputTerms {
    pub mu: f64,
    pub delta: f64,
}

/// Wiring of one destination register: I-cycle source, J-chain source and
/// whether each link carries an extra `x̂_{c2}` factor.
#[derive(Clone, Copy, Debug, Default)]
struct Wire {
    src2: u32,
    src1: u32,
    pow2: bool,
    pow1: bool,
}

/// Register wiring of one dual-encoder pair, indexed by destination label.
#[derive(Clone, Debug)]
struct Plan {
    wires: Vec<Wire>,
}

impl Plan {
    fn new(d: &DualStructure) -> Self {
        let n = d.states();
        let mut w = vec![Wire::default(); n];
        // Second dual encoder: the cycle I_1 -> ... -> I_{N-1} -> I_1; the
        // wrap-around link carries no channel factor. ∅ maps to itself.
        for j in 1..n - 1 {
            let dst = d.i_at(j + 1).mask();
            w[dst].src2 = d.i_at(j).0;
            w[dst].pow2 = d.e2(j) == 1;
        }
        w[d.i_at(1).mask()].src2 = d.i_at(n - 1).0;
        // First dual encoder: the chain ∅ -> J_1 -> ... -> J_{N-2} -> ∅ plus
        // the self-updating register.
        for i in 0..=n - 2 {
            let dst = d.j_ext(i + 1).mask();
            w[dst].src1 = d.j_ext(i).0;
            w[dst].pow1 = d.e1(i) == 1;
        }
        let s = d.sur.mask();
        w[s].src1 = d.sur.0;
        w[s].pow1 = d.d_s == 1;
        Plan { wires: w }
    }

    /// One synchronized step; returns the normaliser.
    #[inline]
    fn step<R: Real>(&self, f: &[R], out: &mut [R], t: R, u: R) -> R {
        let tu = t * u;
        for (o, w) in out.iter_mut().zip(&self.wires) {
            let a = f[w.src2 as usize];
            let a = if w.pow2 { u * a } else { a };
            let b = f[w.src1 as usize];
            let b = if w.pow1 { tu * b } else { t * b };
            *o = a + b;
        }
        R::note_access(3 * f.len());
        let norm = out[0];
        let inv = R::one() / norm;
        out[0] = R::one();
        for x in out[1..].iter_mut() {
            *x = (*x * inv).clamp_unit();
        }
        norm
    }

    fn raw<R: Real>(&self, f: &[R], t: f64, u: f64) -> (Vec<f64>, Vec<f64>) {
        let mut r1 = Vec::with_capacity(f.len());
        let mut r2 = Vec::with_capacity(f.len());
        for w in &self.wires {
            let a = f[w.src2 as usize].to_f64();
            r2.push(if w.pow2 { u * a } else { a });
            let b = f[w.src1 as usize].to_f64();
            r1.push(if w.pow1 { t * u * b } else { t * b });
        }
        (r1, r2)
    }
}

/// Terms of `μ` and `δ`: `x̂_{c2}^pow · F[f] · B[b]`.
#[derive(Clone, Debug)]
struct OutputPlan {
    mu: Vec<(u32, u32, bool)>,
    delta: Vec<(u32, u32, bool)>,
}

impl OutputPlan {
    fn new(d: &DualStructure, rev: &[u32]) -> Self {
        let n = d.states();
        let b = |l: Label| rev[l.mask()];
        let mut mu = Vec::with_capacity(n);
        for i in 0..=n - 2 {
            mu.push((d.j_ext(i).0, b(d.j_ext(i + 1)), d.e1(i) == 1));
        }
        mu.push((d.sur.0, b(d.sur), d.d_s == 1));
        let mut delta = Vec::with_capacity(n - 1);
        for j in 1..n - 1 {
            delta.push((d.i_at(j).0, b(d.i_at(j + 1)), d.e2(j) == 1));
        }
        delta.push((d.i_at(n - 1).0, b(d.i_at(1)), false));
        Self { mu, delta }
    }

    fn eval<R: Real>(terms: &[(u32, u32, bool)], f: &[R], bk: &[R], u: R) -> R {
        let mut acc = R::zero();
        for &(fi, bi, p) in terms {
            let v = f[fi as usize] * bk[bi as usize];
            acc = acc + if p { u * v } else { v };
        }
        R::note_access(2 * terms.len());
        acc
    }
}

/// A synthesized decoder compiled for repeated use.
#[derive(Clone, Debug)]
pub struct Decoder {
    pub spec: DecoderSpec,
    fplan: Plan,
    bplan: Plan,
    out: OutputPlan,
    /// Forward label mask -> backward-structure mask (an involution).
    rev: Vec<u32>,
}

impl Decoder {
    pub fn new(spec: DecoderSpec) -> Self {
        let m = spec.m();
        let rev: Vec<u32> = (0..1usize << m).map(|l| Label(l as u32).reversed(m).0).collect();
        Self {
            fplan: Plan::new(&spec.forward),
            bplan: Plan::new(&spec.backward),
            out: OutputPlan::new(&spec.forward, &rev),
            rev,
            spec,
        }
    }

    pub fn m(&self) -> usize {
        self.spec.m()
    }

    /// `(t, u)`: soft estimates of the decoder's first and second inputs.
    #[inline]
    fn inputs(&self, x: [f64; 2]) -> (f64, f64) {
        if self.spec.swap_streams {
            (x[1], x[0])
        } else {
            (x[0], x[1])
        }
    }

    fn fill(known_start: bool) -> f64 {
        if known_start {
            1.0
        } else {
            0.0
        }
    }

    pub fn forward_step<R: Real>(&self, bank: &RegisterBank<R>, x: [f64; 2]) -> (RegisterBank<R>, R) {
        let (t, u) = self.inputs(x);
        let mut out = vec![R::zero(); bank.values.len()];
        let norm = self.fplan.step(&bank.values, &mut out, R::from_f64(t), R::from_f64(u));
        (RegisterBank { values: out }, norm)
    }

    /// Consumes symbol `x` into a backward bank (forward label coordinates).
    pub fn backward_step<R: Real>(&self, bank: &RegisterBank<R>, x: [f64; 2]) -> (RegisterBank<R>, R) {
        let (t, u) = self.inputs(x);
        let inner = self.to_backward_coords(bank);
        let mut out = vec![R::zero(); inner.len()];
        let norm = self.bplan.step(&inner, &mut out, R::from_f64(t), R::from_f64(u));
        (RegisterBank { values: self.to_backward_coords_vec(&out) }, norm)
    }

    fn to_backward_coords<R: Real>(&self, bank: &RegisterBank<R>) -> Vec<R> {
        self.to_backward_coords_vec(&bank.values)
    }

    fn to_backward_coords_vec<R: Real>(&self, v: &[R]) -> Vec<R> {
        self.rev.iter().map(|&r| v[r as usize]).collect()
    }

    /// Forward banks before each symbol, `F_0 ..= F_L`.
    pub fn forward_banks<R: Real>(&self, frame: &SseFrame, known_start: bool) -> Vec<RegisterBank<R>> {
        let m = self.m();
        let init = RegisterBank::<R>::filled(m, Self::fill(known_start)).values;
        self.forward_sweep(frame, init)
            .into_iter()
            .map(|values| RegisterBank { values })
            .collect()
    }

    /// Backward banks `B_0 ..= B_L` in forward label coordinates; `B_k`
    /// summarises symbols `k..L`.
    pub fn backward_banks<R: Real>(&self, frame: &SseFrame, zero_end: bool) -> Vec<RegisterBank<R>> {
        let m = self.m();
        let init = RegisterBank::<R>::filled(m, Self::fill(zero_end)).values;
        self.backward_sweep(frame, init)
            .into_iter()
            .map(|v| RegisterBank {
                values: self.to_backward_coords_vec(&v),
            })
            .collect()
    }

    fn forward_sweep<R: Real>(&self, frame: &SseFrame, init: Vec<R>) -> Vec<Vec<R>> {
        let mut banks = Vec::with_capacity(frame.len() + 1);
        banks.push(init);
        for &x in &frame.sym {
            let (t, u) = self.inputs(x);
            let mut next = vec![R::zero(); banks[0].len()];
            self.fplan.step(banks.last().unwrap(), &mut next, R::from_f64(t), R::from_f64(u));
            banks.push(next);
        }
        banks
    }

    /// Backward banks in the reversed structure's own coordinates, indexed by
    /// forward time (`out[k]` summarises symbols `k..L`).
    fn backward_sweep<R: Real>(&self, frame: &SseFrame, init: Vec<R>) -> Vec<Vec<R>> {
        let l = frame.len();
        let mut banks = vec![Vec::new(); l + 1];
        banks[l] = init;
        for k in (0..l).rev() {
            let (t, u) = self.inputs(frame.sym[k]);
            let mut cur = vec![R::zero(); banks[l].len()];
            self.bplan.step(&banks[k + 1], &mut cur, R::from_f64(t), R::from_f64(u));
            banks[k] = cur;
        }
        banks
    }

    /// Filtered soft estimate of the information bit at this step.
    pub fn forward_output(&self, bank: &RegisterBank<f64>, x: [f64; 2]) -> f64 {
        match self.spec.code.kind {
            CodeKind::Rsc => {
                let (t, u) = self.inputs(x);
                combine_c(t, u * bank.get(self.spec.forward.u_f()))
            }
            CodeKind::Nsc => {
                let (next, _) = self.forward_step(bank, x);
                clamp_sse(next.get(Label::single(1)))
            }
        }
    }

    fn forward_llr_rsc<R: Real>(&self, f: &[R], x: [f64; 2]) -> f64 {
        let (t, u) = self.inputs(x);
        let (t, u) = (R::from_f64(t), R::from_f64(u));
        let one = R::one();
        let z = u * f[self.spec.forward.u_f().mask()];
        R::note_access(1);
        llr_from_ratio((one + t) * (one + z), (one - t) * (one - z))
    }

    /// `μ`, `δ` for RSC output at step `k`: `f` is the forward bank before the
    /// symbol, `b` the backward bank after it (reversed-structure coordinates).
    fn terms<R: Real>(&self, f: &[R], b: &[R], u: R) -> (R, R) {
        let mu = OutputPlan::eval(&self.out.mu, f, b, u);
        let delta = R::one() + OutputPlan::eval(&self.out.delta, f, b, u);
        (mu, delta)
    }

    pub fn output_terms<R: Real>(&self, fbank: &RegisterBank<R>, bbank: &RegisterBank<R>, x: [f64; 2]) -> OutputTerms {
        let (_, u) = self.inputs(x);
        let b = self.to_backward_coords(bbank);
        let (mu, delta) = self.terms(&fbank.values, &b, R::from_f64(u));
        OutputTerms {
            mu: mu.to_f64(),
            delta: delta.to_f64(),
        }
    }

    fn rsc_llr<R: Real>(&self, f: &[R], b: &[R], x: [f64; 2]) -> Result<f64> {
        let (t, u) = self.inputs(x);
        let (mu, delta) = self.terms(f, b, R::from_f64(u));
        // Rounding may leave `delta ± mu` slightly negative at high SNR; the
        // ratio then saturates, or reads 0 when both sides cancelled.
        if delta.to_f64().is_nan() || mu.to_f64().is_nan() {
            return Err(Error::Numerical(format!(
                "output terms undefined: mu = {:e}, delta = {:e}",
                mu.to_f64(),
                delta.to_f64()
            )));
        }
        let t = R::from_f64(t);
        let one = R::one();
        Ok(llr_from_ratio((one + t) * (delta + mu), (one - t) * (delta - mu)))
    }

    /// Bidirectional LLR from forward bank `F_k` and backward bank `B_{k+1}`.
    pub fn bidirectional_llr<R: Real>(&self, fbank: &RegisterBank<R>, bbank: &RegisterBank<R>, x: [f64; 2]) -> Result<f64> {
        match self.spec.code.kind {
            CodeKind::Rsc => self.rsc_llr(&fbank.values, &self.to_backward_coords(bbank), x),
            CodeKind::Nsc => {
                let (next, _) = self.forward_step(fbank, x);
                Ok(self.nsc_llr(&next.values, &self.to_backward_coords(bbank)))
            }
        }
    }

    /// NSC input bit `b_k` is memory 1 after the step:
    /// `LLR = ln Σ F[L](B[L] + B[L△{1}]) / Σ F[L](B[L] - B[L△{1}])`
    /// with `F = F_{k+1}`, `B = B_{k+1}`.
    fn nsc_llr<R: Real>(&self, f_next: &[R], b: &[R]) -> f64 {
        let mut num = R::zero();
        let mut den = R::zero();
        for l in 0..f_next.len() {
            let bl = b[self.rev[l] as usize];
            let bx = b[self.rev[l ^ 1] as usize];
            num = num + f_next[l] * (bl + bx);
            den = den + f_next[l] * (bl - bx);
        }
        R::note_access(3 * f_next.len());
        llr_from_ratio(num, den)
    }

    /// Decodes a zero-tail frame. `boundary` sets the backward start: the
    /// all-ones bank for [`BackwardBoundary::ZeroState`], all zeros for
    /// [`BackwardBoundary::Free`].
    pub fn decode<R: Real>(&self, frame: &SseFrame, mode: Mode, boundary: BackwardBoundary) -> Result<Vec<f64>> {
        if frame.is_empty() {
            return Err(Error::InvalidInput("empty frame".into()));
        }
        let m = self.m();
        let fwd = self.forward_sweep::<R>(frame, RegisterBank::filled(m, 1.0).values);
        match mode {
            Mode::ForwardOnly => Ok(self.forward_llrs(frame, &fwd)),
            Mode::Bidirectional => {
                let fill = match boundary {
                    BackwardBoundary::ZeroState => 1.0,
                    BackwardBoundary::Free => 0.0,
                };
                let bwd = self.backward_sweep::<R>(frame, RegisterBank::filled(m, fill).values);
                self.combine(frame, &fwd, &bwd)
            }
        }
    }

    fn forward_llrs<R: Real>(&self, frame: &SseFrame, fwd: &[Vec<R>]) -> Vec<f64> {
        frame
            .sym
            .iter()
            .enumerate()
            .map(|(k, &x)| match self.spec.code.kind {
                CodeKind::Rsc => self.forward_llr_rsc(&fwd[k], x),
                CodeKind::Nsc => {
                    let p = fwd[k + 1][1];
                    let one = R::one();
                    llr_from_ratio(one + p, one - p)
                }
            })
            .collect()
    }

    fn combine<R: Real>(&self, frame: &SseFrame, fwd: &[Vec<R>], bwd: &[Vec<R>]) -> Result<Vec<f64>> {
        frame
            .sym
            .iter()
            .enumerate()
            .map(|(k, &x)| match self.spec.code.kind {
                CodeKind::Rsc => self.rsc_llr(&fwd[k], &bwd[k + 1], x),
                CodeKind::Nsc => Ok(self.nsc_llr(&fwd[k + 1], &bwd[k + 1])),
            })
            .collect()
    }

    /// Tail-biting decoding: registers start at 0 and each direction sweeps
    /// the frame `passes` times cyclically; LLRs come from the final sweep.
    pub fn decode_tailbiting<R: Real>(&self, frame: &SseFrame, passes: usize) -> Result<Vec<f64>> {
        if passes == 0 {
            return Err(Error::Config("tail-biting needs at least one pass".into()));
        }
        if frame.is_empty() {
            return Err(Error::InvalidInput("empty frame".into()));
        }
        let m = self.m();
        let mut init = RegisterBank::<R>::filled(m, 0.0).values;
        let mut fwd = Vec::new();
        for _ in 0..passes {
            fwd = self.forward_sweep(frame, init);
            init = fwd.last().unwrap().clone();
        }
        let mut init = RegisterBank::<R>::filled(m, 0.0).values;
        let mut bwd = Vec::new();
        for _ in 0..passes {
            bwd = self.backward_sweep(frame, init);
            init = bwd[0].clone();
        }
        self.combine(frame, &fwd, &bwd)
    }

    /// Forward sweep with per-step traces.
    pub fn trace_forward(&self, frame: &SseFrame) -> Vec<StepTrace> {
        let m = self.m();
        let mut bank = RegisterBank::<f64>::filled(m, 1.0);
        let mut out = Vec::with_capacity(frame.len());
        for (k, &x) in frame.sym.iter().enumerate() {
            let (t, u) = self.inputs(x);
            let (raw_df1, raw_df2) = self.fplan.raw(&bank.values, t, u);
            let (next, norm) = self.forward_step(&bank, x);
            out.push(StepTrace {
                k,
                direction: Direction::Forward,
                norm,
                raw_df1,
                raw_df2,
            });
            bank = next;
        }
        out
    }

    /// Backward sweep with per-step traces (reversed-structure coordinates).
    pub fn trace_backward(&self, frame: &SseFrame) -> Vec<StepTrace> {
        let m = self.m();
        let mut bank = RegisterBank::<f64>::filled(m, 1.0).values;
        let mut out = Vec::with_capacity(frame.len());
        for k in (0..frame.len()).rev() {
            let (t, u) = self.inputs(frame.sym[k]);
            let (raw_df1, raw_df2) = self.bplan.raw(&bank, t, u);
            let mut next = vec![0.0; bank.len()];
            let norm = self.bplan.step(&bank, &mut next, t, u);
            out.push(StepTrace {
                k,
                direction: Direction::Backward,
                norm,
                raw_df1,
                raw_df2,
            });
            bank = next;
        }
        out
    }
}

/// Runs the rate-1 dual encoder over soft estimates of the code bits.
///
/// The dual of `q/a` with `a z = x^e + 1` is a ring of `e` registers; the
/// link into register `j` multiplies by the input when `q z` has a tap at
/// `x^(e-j)`, and the output is the input times the last register. Backward
/// decoding runs the reversed code's dual on the time-reversed sequence.
pub fn rate1_siso(dual: &Rate1Dual, x: &[f64], direction: Direction) -> Vec<f64> {
    match direction {
        Direction::Forward => rate1_run(&dual.forward.num, dual.forward.den.degree().unwrap_or(0), x.iter().copied()),
        Direction::Backward => {
            let mut v = rate1_run(&dual.backward.num, dual.backward.den.degree().unwrap_or(0), x.iter().rev().copied());
            v.reverse();
            v
        }
    }
}

fn rate1_run(num: &crate::gf2poly::Gf2Poly, e: usize, x: impl Iterator<Item = f64>) -> Vec<f64> {
    if e == 0 {
        return x.collect();
    }
    let taps: Vec<bool> = (0..e).map(|j| j > 0 && num.coeff(e - j)).collect();
    let mut r = vec![1.0; e];
    x.map(|xk| {
        let out = xk * r[e - 1];
        let wrap = r[e - 1];
        for j in (1..e).rev() {
            r[j] = if taps[j] { r[j - 1] * xk } else { r[j - 1] };
        }
        r[0] = wrap;
        out
    })
    .collect()
}

/// Forward-structure labels in register order for display.
pub fn bank_labels(m: usize) -> Vec<Label> {
    all_labels(m).collect()
}

/// True when a value is a usable soft estimate.
pub fn in_unit_range(x: f64) -> bool {
    x.is_finite() && x.abs() <= 1.0 + SSE_EPS
}

/// True when an LLR is finite and within the clamp.
pub fn llr_ok(l: f64) -> bool {
    l.is_finite() && l.abs() <= LLR_CLAMP
}
