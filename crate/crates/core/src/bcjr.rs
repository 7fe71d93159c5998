//! Reference MAP decoding in the probability domain, an exhaustive oracle,
//! and the Walsh-Hadamard map from state metrics to label coordinates.

use crate::channel::SseFrame;
use crate::code_model::{CodeSpec, Termination, Trellis};
use crate::error::{Error, Result};
use crate::label::bitrev;
use crate::real::Real;

/// LLR magnitude cap.
pub const LLR_CLAMP: f64 = 80.0;

/// Largest frame [`exhaustive_posterior`] will enumerate.
pub const EXHAUSTIVE_MAX_LEN: usize = 20;

/// What the backward recursion assumes about the state after the last symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BackwardBoundary {
    /// Uniform over states.
    #[default]
    Free,
    /// Point mass on state 0.
    ZeroState,
}

impl std::str::FromStr for BackwardBoundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" | "uniform" => Ok(Self::Free),
            "zero" | "zero-state" => Ok(Self::ZeroState),
            _ => Err(Error::Config(format!("unknown boundary {s:?} (free|zero)"))),
        }
    }
}

/// `alpha[k]` is the state distribution before symbol `k` (length `L + 1`);
/// `beta[k]` the normalised likelihood of symbols `k..L` given the state at `k`.
#[derive(Clone, Debug)]
pub struct StateMetrics<R> {
    pub alpha: Vec<Vec<R>>,
    pub beta: Vec<Vec<R>>,
}

/// `ln(num / den)`, clamped; 0 when neither side is positive.
pub fn llr_from_ratio<R: Real>(num: R, den: R) -> f64 {
    let n = num.to_f64();
    let d = den.to_f64();
    let l = if d <= 0.0 && n <= 0.0 {
        0.0
    } else if d <= 0.0 {
        LLR_CLAMP
    } else if n <= 0.0 {
        -LLR_CLAMP
    } else {
        (num / den).to_f64().ln()
    };
    if l.is_nan() {
        0.0
    } else {
        l.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// Branch probabilities `p(c1) p(c2)` indexed by `c1 << 1 | c2`.
fn branch_table<R: Real>(x: [f64; 2]) -> [R; 4] {
    let half = R::from_f64(0.5);
    let one = R::one();
    let t = R::from_f64(x[0]);
    let u = R::from_f64(x[1]);
    let p1 = [half * (one + t), half * (one - t)];
    let p2 = [half * (one + u), half * (one - u)];
    [p1[0] * p2[0], p1[0] * p2[1], p1[1] * p2[0], p1[1] * p2[1]]
}

fn normalize<R: Real>(v: &mut [R]) {
    let sum = v.iter().fold(R::zero(), |a, &b| a + b);
    let inv = R::one() / sum;
    for x in v.iter_mut() {
        *x = *x * inv;
    }
}

fn point_mass<R: Real>(n: usize) -> Vec<R> {
    let mut v = vec![R::zero(); n];
    v[0] = R::one();
    v
}

fn uniform<R: Real>(n: usize) -> Vec<R> {
    vec![R::from_f64(1.0 / n as f64); n]
}

fn alpha_step<R: Real>(t: &Trellis, alpha: &[R], g: &[R; 4], out: &mut [R]) {
    out.iter_mut().for_each(|x| *x = R::zero());
    for (s, &a) in alpha.iter().enumerate() {
        for b in 0..2 {
            let n = t.next_state[s][b] as usize;
            out[n] = out[n] + a * g[t.out_bits[s][b] as usize];
        }
    }
    normalize(out);
}

fn beta_step<R: Real>(t: &Trellis, beta_next: &[R], g: &[R; 4], out: &mut [R]) {
    for (s, o) in out.iter_mut().enumerate() {
        let e0 = g[t.out_bits[s][0] as usize] * beta_next[t.next_state[s][0] as usize];
        let e1 = g[t.out_bits[s][1] as usize] * beta_next[t.next_state[s][1] as usize];
        *o = e0 + e1;
    }
    normalize(out);
}

fn forward_pass<R: Real>(t: &Trellis, frame: &SseFrame, init: Vec<R>) -> Vec<Vec<R>> {
    let n = t.states();
    let mut alpha = Vec::with_capacity(frame.len() + 1);
    alpha.push(init);
    for x in &frame.sym {
        let g = branch_table::<R>(*x);
        let mut next = vec![R::zero(); n];
        alpha_step(t, alpha.last().unwrap(), &g, &mut next);
        alpha.push(next);
    }
    alpha
}

fn backward_pass<R: Real>(t: &Trellis, frame: &SseFrame, last: Vec<R>) -> Vec<Vec<R>> {
    let n = t.states();
    let l = frame.len();
    let mut beta = vec![Vec::new(); l + 1];
    beta[l] = last;
    for k in (0..l).rev() {
        let g = branch_table::<R>(frame.sym[k]);
        let mut cur = vec![R::zero(); n];
        beta_step(t, &beta[k + 1], &g, &mut cur);
        beta[k] = cur;
    }
    beta
}

/// Filtered output: the LLR of the input bit at `k` given symbols `0..=k`.
fn forward_llrs<R: Real>(t: &Trellis, frame: &SseFrame, alpha: &[Vec<R>]) -> Vec<f64> {
    frame
        .sym
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let g = branch_table::<R>(*x);
            let mut num = [R::zero(); 2];
            for (s, &a) in alpha[k].iter().enumerate() {
                for b in 0..2 {
                    num[b] = num[b] + a * g[t.out_bits[s][b] as usize];
                }
            }
            llr_from_ratio(num[0], num[1])
        })
        .collect()
}

fn app_llrs<R: Real>(t: &Trellis, frame: &SseFrame, m: &StateMetrics<R>) -> Vec<f64> {
    frame
        .sym
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let g = branch_table::<R>(*x);
            let alpha = &m.alpha[k];
            let beta = &m.beta[k + 1];
            let mut num = [R::zero(); 2];
            for (s, &a) in alpha.iter().enumerate() {
                for b in 0..2 {
                    let n = t.next_state[s][b] as usize;
                    num[b] = num[b] + a * g[t.out_bits[s][b] as usize] * beta[n];
                }
            }
            llr_from_ratio(num[0], num[1])
        })
        .collect()
}

/// Forward recursion from state 0 and the filtered LLRs.
pub fn bcjr_forward<R: Real>(t: &Trellis, frame: &SseFrame) -> (Vec<Vec<R>>, Vec<f64>) {
    let alpha = forward_pass(t, frame, point_mass(t.states()));
    let llr = forward_llrs(t, frame, &alpha);
    (alpha, llr)
}

pub fn bcjr_metrics<R: Real>(t: &Trellis, frame: &SseFrame, boundary: BackwardBoundary) -> StateMetrics<R> {
    let n = t.states();
    let alpha = forward_pass(t, frame, point_mass(n));
    let last = match boundary {
        BackwardBoundary::Free => uniform(n),
        BackwardBoundary::ZeroState => point_mass(n),
    };
    let beta = backward_pass(t, frame, last);
    StateMetrics { alpha, beta }
}

/// A posteriori LLRs of the input bits (positive favours 0).
pub fn bcjr_bidirectional<R: Real>(t: &Trellis, frame: &SseFrame, boundary: BackwardBoundary) -> Vec<f64> {
    let m = bcjr_metrics::<R>(t, frame, boundary);
    app_llrs(t, frame, &m)
}

/// Cyclic metrics for tail-biting frames.
///
/// Both recursions start uniform and sweep the frame `passes` times, each pass
/// starting from where the previous one ended. The returned metrics are those
/// of the final pass; `alpha[L]` and `beta[0]` are the values carried around
/// the wrap.
pub fn bcjr_tailbiting_metrics<R: Real>(t: &Trellis, frame: &SseFrame, passes: usize) -> StateMetrics<R> {
    let n = t.states();
    let passes = passes.max(1);
    let mut a0 = uniform::<R>(n);
    let mut alpha = Vec::new();
    for _ in 0..passes {
        alpha = forward_pass(t, frame, a0);
        a0 = alpha.last().unwrap().clone();
    }
    let mut bl = uniform::<R>(n);
    let mut beta = Vec::new();
    for _ in 0..passes {
        beta = backward_pass(t, frame, bl);
        bl = beta[0].clone();
    }
    StateMetrics { alpha, beta }
}

pub fn bcjr_tailbiting<R: Real>(t: &Trellis, frame: &SseFrame, passes: usize) -> Result<Vec<f64>> {
    if passes == 0 {
        return Err(Error::Config("tail-biting needs at least one pass".into()));
    }
    let m = bcjr_tailbiting_metrics::<R>(t, frame, passes);
    Ok(app_llrs(t, frame, &m))
}

/// Brute-force bit posteriors over every message of length `L`.
///
/// Zero-tail codes start in state 0; with [`BackwardBoundary::ZeroState`]
/// only messages ending in state 0 count. Tail-biting codes enumerate the
/// circular codewords.
pub fn exhaustive_posterior(code: &CodeSpec, frame: &SseFrame, boundary: BackwardBoundary) -> Result<Vec<f64>> {
    let l = frame.len();
    if l == 0 || l > EXHAUSTIVE_MAX_LEN {
        return Err(Error::InvalidInput(format!(
            "exhaustive posterior needs 1 <= L <= {EXHAUSTIVE_MAX_LEN}, got {l}"
        )));
    }
    let t = code.build_trellis();
    let p: Vec<[[f64; 2]; 2]> = frame
        .sym
        .iter()
        .map(|x| [[(1.0 + x[0]) / 2.0, (1.0 - x[0]) / 2.0], [(1.0 + x[1]) / 2.0, (1.0 - x[1]) / 2.0]])
        .collect();
    let mut num = vec![[0.0f64; 2]; l];
    let mut info = vec![0u8; l];
    for msg in 0u64..(1 << l) {
        for (k, b) in info.iter_mut().enumerate() {
            *b = (msg >> k & 1) as u8;
        }
        let start = code.start_state(&info)?;
        let mut s = start;
        let mut w = 1.0;
        for k in 0..l {
            let (n, c1, c2) = t.step(s, info[k]);
            w *= p[k][0][c1 as usize] * p[k][1][c2 as usize];
            s = n;
        }
        if code.termination == Termination::ZeroTail && boundary == BackwardBoundary::ZeroState && s != 0 {
            continue;
        }
        for k in 0..l {
            num[k][info[k] as usize] += w;
        }
    }
    Ok(num.iter().map(|v| llr_from_ratio(v[0], v[1])).collect())
}

/// In-place unnormalised Walsh-Hadamard transform.
pub fn fwht<R: Real>(v: &mut [R]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Label coordinates of a normalised state vector: entry `L` (by label mask)
/// is `sum_s metric(s) (-1)^(XOR of the memories in L)`. Entry 0 is the total
/// mass.
pub fn wht_labels<R: Real>(metrics: &[R], m: usize) -> Vec<R> {
    let mut w = metrics.to_vec();
    fwht(&mut w);
    (0..w.len()).map(|l| w[bitrev(l, m)]).collect()
}

/// Inverse of [`wht_labels`].
pub fn inverse_wht_labels<R: Real>(labels: &[R], m: usize) -> Vec<R> {
    let n = labels.len();
    let mut w: Vec<R> = (0..n).map(|s| labels[bitrev(s, m)]).collect();
    fwht(&mut w);
    let inv = R::from_f64(1.0 / n as f64);
    w.into_iter().map(|x| x * inv).collect()
}
