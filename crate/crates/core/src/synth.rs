//! Offline construction of the LMAP decoder structure.
//!
//! For a code with primitive feedforward polynomial `a` the decoder is fixed
//! by two dual-encoder polynomials and three label orders:
//!
//! * `d_f2 = z_f q`, `d_f1 = d_f2 / (1 + x)` with `z_f = (x^(N-1) + 1) / a`;
//! * `I`, the cyclic register order of the second dual encoder, generated by
//!   the label synthesizer and rotated so that `U_f` comes last;
//! * `J`, the chain order of the first dual encoder (running XORs of `I`);
//! * `S`, the one label of `I` missing from `J`, which updates from itself.
//!
//! Backward decoding reuses the same construction on the coefficient-reversed
//! code; its labels are read back through `j -> m + 1 - j`.

use std::fmt::Write as _;

use crate::bcjr::{bcjr_metrics, wht_labels, BackwardBoundary};
use crate::channel::{frame_seed, simulate_frame, ChannelParams};
use crate::code_model::{CodeKind, CodeSpec, Termination};
use crate::engine::Decoder;
use crate::error::{Error, Result};
use crate::gf2poly::Gf2Poly;
use crate::label::{all_labels, format_labels, parse_labels, Label};

/// `(x^(N-1) + 1) / a`, provided the division is exact.
pub fn complementary(a: &Gf2Poly, m: usize) -> Result<Gf2Poly> {
    let n1 = (1usize << m) - 1;
    let (z, r) = Gf2Poly::binomial(n1).divmod(a)?;
    if !r.is_zero() {
        return Err(Error::NotPrimitive(format!("{a} does not divide x^{n1} + 1")));
    }
    Ok(z)
}

/// `(d_f1, d_f2)`.
pub fn decoder_polys(a: &Gf2Poly, q: &Gf2Poly, m: usize) -> Result<(Gf2Poly, Gf2Poly)> {
    let z = complementary(a, m)?;
    let d2 = z.mul(q);
    let (d1, r) = d2.divmod(&Gf2Poly::from_bits(0b11))?;
    if !r.is_zero() {
        return Err(Error::Synthesis(format!("(1 + x) does not divide d_f2 = {d2}")));
    }
    Ok((d1, d2))
}

/// The label synthesizer: the feedback register of `1/a` run on labels, with
/// symmetric difference in place of XOR.
///
/// Returns `I'`: the final content of register `m` followed by the emitted
/// labels, newest first (so the sequence ends with the initial `{m}`).
pub fn rls(a: &Gf2Poly, m: usize) -> Result<Vec<Label>> {
    if m == 0 || a.degree() != Some(m) {
        return Err(Error::Synthesis(format!("{a} is not of degree {m}")));
    }
    let n = 1usize << m;
    let mut regs: Vec<Label> = (1..=m).map(Label::single).collect();
    let mut emitted = Vec::with_capacity(n - 2);
    for _ in 0..n - 2 {
        let out = regs[m - 1];
        let fb = (1..m)
            .filter(|&i| a.coeff(i))
            .fold(out, |acc, i| acc.sdo(regs[i - 1]));
        regs.rotate_right(1);
        regs[0] = fb;
        emitted.push(out);
    }
    let mut seq = Vec::with_capacity(n - 1);
    seq.push(regs[m - 1]);
    seq.extend(emitted.iter().rev());
    let mut seen = vec![false; n];
    for l in &seq {
        if l.is_empty() || seen[l.mask()] {
            return Err(Error::NotPrimitive(format!("label synthesizer repeats {l} for {a}")));
        }
        seen[l.mask()] = true;
    }
    Ok(seq)
}

/// Memories `1..m-1` where `a` and `q` differ.
pub fn u_f(a: &Gf2Poly, q: &Gf2Poly) -> Result<Label> {
    let m = a
        .degree()
        .ok_or_else(|| Error::InvalidCode("zero polynomial".into()))?;
    let l = Label::from_indices(&(1..m).filter(|&i| a.coeff(i) != q.coeff(i)).collect::<Vec<_>>());
    if l.is_empty() {
        return Err(Error::EmptyUf);
    }
    Ok(l)
}

/// Rotates `iprime` so that `uf` is last.
pub fn rotate_to_uf(iprime: &[Label], uf: Label) -> Result<Vec<Label>> {
    let pos = iprime
        .iter()
        .position(|&l| l == uf)
        .ok_or_else(|| Error::Synthesis(format!("U_f = {uf} not among the synthesized labels")))?;
    let mut v = iprime.to_vec();
    v.rotate_left(pos + 1);
    Ok(v)
}

/// `J_i = I_1 △ ... △ I_i` for `i = 1..len(I)-1`.
pub fn derive_j(labels_i: &[Label]) -> Result<Vec<Label>> {
    if labels_i.len() < 2 {
        return Err(Error::Synthesis("need at least two labels in I".into()));
    }
    let mut acc = Label::EMPTY;
    let j: Vec<Label> = labels_i[..labels_i.len() - 1]
        .iter()
        .map(|&l| {
            acc = acc.sdo(l);
            acc
        })
        .collect();
    if j[0] != labels_i[0] || j.last() != labels_i.last() {
        return Err(Error::Synthesis(format!(
            "J = {} does not share its ends with I = {}",
            format_labels(&j),
            format_labels(labels_i)
        )));
    }
    Ok(j)
}

/// The self-updating register and its exponent: `d_s = 0` iff memory 1 is in `S`.
pub fn sur_and_ds(labels_i: &[Label], labels_j: &[Label]) -> Result<(Label, u8)> {
    let missing: Vec<Label> = labels_i.iter().copied().filter(|l| !labels_j.contains(l)).collect();
    match missing.as_slice() {
        [s] => Ok((*s, u8::from(!s.contains(1)))),
        _ => Err(Error::Synthesis(format!(
            "expected exactly one label of I outside J, found {}",
            format_labels(&missing)
        ))),
    }
}

/// One direction's decoder structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualStructure {
    pub a: Gf2Poly,
    pub q: Gf2Poly,
    pub m: usize,
    pub d_f1: Gf2Poly,
    pub d_f2: Gf2Poly,
    pub labels_i_prime: Vec<Label>,
    pub labels_i: Vec<Label>,
    pub labels_j: Vec<Label>,
    pub sur: Label,
    pub d_s: u8,
}

impl DualStructure {
    pub fn build(a: &Gf2Poly, q: &Gf2Poly) -> Result<Self> {
        let m = a
            .degree()
            .ok_or_else(|| Error::InvalidCode("zero polynomial".into()))?;
        let n = 1u64 << m;
        let (_, order) = a.mcp()?;
        if order != n - 1 {
            return Err(Error::NotPrimitive(format!("{a} has order {order}, not {}", n - 1)));
        }
        let (d_f1, d_f2) = decoder_polys(a, q, m)?;
        let iprime = rls(a, m)?;
        let uf = u_f(a, q)?;
        let labels_i = rotate_to_uf(&iprime, uf)?;
        let labels_j = derive_j(&labels_i)?;
        let (sur, d_s) = sur_and_ds(&labels_i, &labels_j)?;
        let s = Self {
            a: a.clone(),
            q: q.clone(),
            m,
            d_f1,
            d_f2,
            labels_i_prime: iprime,
            labels_i,
            labels_j,
            sur,
            d_s,
        };
        s.check()?;
        Ok(s)
    }

    pub fn states(&self) -> usize {
        1 << self.m
    }

    pub fn u_f(&self) -> Label {
        *self.labels_i.last().unwrap()
    }

    /// `J_i` for `i = 0..=N-1`, with both ends `∅`.
    pub fn j_ext(&self, i: usize) -> Label {
        if i == 0 || i > self.labels_j.len() {
            Label::EMPTY
        } else {
            self.labels_j[i - 1]
        }
    }

    /// `I_j`, 1-based.
    pub fn i_at(&self, j: usize) -> Label {
        self.labels_i[j - 1]
    }

    /// Exponent of `x̂_{c2}` on the chain link `J_i -> J_{i+1}`, `i = 0..=N-2`.
    /// The chain is read from the high-order end of `d_f1`.
    pub fn e1(&self, i: usize) -> u8 {
        let n = self.states();
        u8::from(self.d_f1.coeff(n - 2 - i))
    }

    /// Exponent of `x̂_{c2}` on the cycle link `I_j -> I_{j+1}`, `j = 1..=N-2`.
    pub fn e2(&self, j: usize) -> u8 {
        let n = self.states();
        u8::from(self.d_f2.coeff(n - 1 - j))
    }

    /// Structural consistency of the stored fields.
    pub fn check(&self) -> Result<()> {
        let n = self.states();
        let fail = |msg: String| Err(Error::Synthesis(msg));
        if self.labels_i.len() != n - 1 || self.labels_j.len() != n - 2 {
            return fail(format!("I/J lengths {}/{} for N = {n}", self.labels_i.len(), self.labels_j.len()));
        }
        let mut seen = vec![false; n];
        for l in &self.labels_i {
            if l.is_empty() || l.mask() >= n || seen[l.mask()] {
                return fail(format!("I is not a permutation of the nonempty labels: {}", format_labels(&self.labels_i)));
            }
            seen[l.mask()] = true;
        }
        if derive_j(&self.labels_i)? != self.labels_j {
            return fail("J is not the running XOR of I".into());
        }
        if sur_and_ds(&self.labels_i, &self.labels_j)? != (self.sur, self.d_s) {
            return fail("S or d_s inconsistent with I and J".into());
        }
        if self.labels_i.last() != Some(&u_f(&self.a, &self.q)?) {
            return fail("U_f is not the last element of I".into());
        }
        let two = Gf2Poly::from_bits(0b11);
        if self.d_f1.mul(&two) != self.d_f2
            || self.d_f1.degree() != Some(n - 2)
            || self.d_f2.degree() != Some(n - 1)
            || !self.d_f1.coeff(0)
            || !self.d_f2.coeff(0)
        {
            return fail(format!("decoder polynomials inconsistent: d_f1 = {}, d_f2 = {}", self.d_f1, self.d_f2));
        }
        // Taps agree with where memory 1 enters the register labels.
        for i in 0..=n - 2 {
            if self.e1(i) != u8::from(!self.j_ext(i + 1).contains(1)) {
                return fail(format!("d_f1 tap {i} disagrees with chain label {}", self.j_ext(i + 1)));
            }
        }
        for j in 1..=n - 2 {
            if self.e2(j) != u8::from(self.i_at(j + 1).contains(1)) {
                return fail(format!("d_f2 tap {j} disagrees with cycle label {}", self.i_at(j + 1)));
            }
        }
        Ok(())
    }
}

/// Full decoder description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoderSpec {
    pub code: CodeSpec,
    /// NSC only: the code's `c1` generator plays the primitive role, so the
    /// decoder reads `c2` as its first input.
    pub swap_streams: bool,
    pub forward: DualStructure,
    /// Structure of the reversed code; label `j` here is memory `m + 1 - j`.
    pub backward: DualStructure,
}

impl DecoderSpec {
    pub fn m(&self) -> usize {
        self.code.m
    }

    pub fn states(&self) -> usize {
        self.code.states()
    }

    /// Backward-structure label to forward coordinates.
    pub fn label_reversal(&self, l: Label) -> Label {
        l.reversed(self.code.m)
    }

    pub fn format(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "code={}", self.code);
        let _ = writeln!(s, "swap={}", u8::from(self.swap_streams));
        for (p, d) in [("", &self.forward), ("b_", &self.backward)] {
            let _ = writeln!(s, "{p}a={}", d.a.to_octal());
            let _ = writeln!(s, "{p}q={}", d.q.to_octal());
            let _ = writeln!(s, "{p}dfs1={}", d.d_f1.to_octal());
            let _ = writeln!(s, "{p}dfs2={}", d.d_f2.to_octal());
            let _ = writeln!(s, "{p}ds={}", d.d_s);
            let _ = writeln!(s, "{p}Ip={}", format_labels(&d.labels_i_prime));
            let _ = writeln!(s, "{p}I={}", format_labels(&d.labels_i));
            let _ = writeln!(s, "{p}J={}", format_labels(&d.labels_j));
            let _ = writeln!(s, "{p}S={}", d.sur);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = std::collections::HashMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got {line:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            kv.get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::InvalidInput(format!("decoder spec lacks {k:?}")))
        };
        let code: CodeSpec = get("code")?.parse()?;
        let swap_streams = match get("swap")? {
            "0" => false,
            "1" => true,
            v => return Err(Error::InvalidInput(format!("swap must be 0 or 1, got {v:?}"))),
        };
        let dual = |p: &str| -> Result<DualStructure> {
            let poly = |k: &str| get(&format!("{p}{k}")).and_then(Gf2Poly::parse_octal);
            let a = poly("a")?;
            let m = a
                .degree()
                .ok_or_else(|| Error::InvalidInput("zero a polynomial".into()))?;
            let d_s = match get(&format!("{p}ds"))? {
                "0" => 0,
                "1" => 1,
                v => return Err(Error::InvalidInput(format!("ds must be 0 or 1, got {v:?}"))),
            };
            let d = DualStructure {
                q: poly("q")?,
                m,
                d_f1: poly("dfs1")?,
                d_f2: poly("dfs2")?,
                labels_i_prime: parse_labels(get(&format!("{p}Ip"))?)?,
                labels_i: parse_labels(get(&format!("{p}I"))?)?,
                labels_j: parse_labels(get(&format!("{p}J"))?)?,
                sur: get(&format!("{p}S"))?.parse()?,
                d_s,
                a,
            };
            d.check()?;
            Ok(d)
        };
        let spec = DecoderSpec {
            forward: dual("")?,
            backward: dual("b_")?,
            code,
            swap_streams,
        };
        spec.check_roles()?;
        Ok(spec)
    }

    fn check_roles(&self) -> Result<()> {
        let (a, q) = roles(&self.code, self.swap_streams);
        let m = self.code.m;
        if self.forward.a != *a || self.forward.q != *q {
            return Err(Error::InvalidInput("forward structure does not belong to the code".into()));
        }
        if self.backward.a != a.reverse(m)? || self.backward.q != q.reverse(m)? {
            return Err(Error::InvalidInput("backward structure is not the reversed code's".into()));
        }
        Ok(())
    }
}

/// `(a, q)` as seen by the decoder.
fn roles(code: &CodeSpec, swap: bool) -> (&Gf2Poly, &Gf2Poly) {
    if swap {
        (&code.poly_q, &code.poly_a)
    } else {
        (&code.poly_a, &code.poly_q)
    }
}

fn is_primitive(p: &Gf2Poly) -> bool {
    match (p.degree(), p.mcp()) {
        (Some(m), Ok((_, e))) => m < 64 && e == (1u64 << m) - 1,
        _ => false,
    }
}

/// Builds the decoder without the oracle check.
pub fn synthesize_unchecked(code: &CodeSpec) -> Result<DecoderSpec> {
    let swap_streams = match code.kind {
        CodeKind::Rsc => false,
        CodeKind::Nsc => !is_primitive(&code.poly_a) && is_primitive(&code.poly_q),
    };
    let (a, q) = roles(code, swap_streams);
    let m = code.m;
    let forward = DualStructure::build(a, q)?;
    let backward = DualStructure::build(&a.reverse(m)?, &q.reverse(m)?)?;
    Ok(DecoderSpec {
        code: code.clone(),
        swap_streams,
        forward,
        backward,
    })
}

pub const SELF_CHECK_FRAMES: u64 = 20;
pub const SELF_CHECK_LEN: usize = 32;
pub const SELF_CHECK_SNR_DB: f64 = 2.0;
pub const SELF_CHECK_TOL: f64 = 1e-9;

/// Builds the decoder and rejects it unless every forward and backward
/// register bank tracks the label transform of the trellis metrics.
pub fn synthesize(code: &CodeSpec) -> Result<DecoderSpec> {
    let spec = synthesize_unchecked(code)?;
    let dev = bank_deviation(&spec, SELF_CHECK_FRAMES, SELF_CHECK_LEN, SELF_CHECK_SNR_DB, 0x5eed)?;
    if !(dev <= SELF_CHECK_TOL) {
        return Err(Error::Synthesis(format!(
            "register banks deviate from the trellis oracle by {dev:e} for {}",
            spec.code
        )));
    }
    Ok(spec)
}

/// Largest `|bank - wht_labels(metric)|` over random frames, both directions,
/// with the backward recursion started on state 0.
pub fn bank_deviation(spec: &DecoderSpec, frames: u64, len: usize, snr_db: f64, seed: u64) -> Result<f64> {
    let code = spec.code.clone().with_termination(Termination::ZeroTail)?;
    let trellis = code.build_trellis();
    let dec = Decoder::new(spec.clone());
    let sigma = ChannelParams::ebn0(snr_db, seed)?.sigma;
    let m = spec.m();
    let mut worst = 0.0f64;
    for f in 0..frames {
        let sim = simulate_frame(&code, &trellis, len, sigma, frame_seed(seed, f))?;
        let metrics = bcjr_metrics::<f64>(&trellis, &sim.sse, BackwardBoundary::ZeroState);
        let fb = dec.forward_banks::<f64>(&sim.sse, true);
        let bb = dec.backward_banks::<f64>(&sim.sse, true);
        for k in 0..=len {
            let wa = wht_labels(&metrics.alpha[k], m);
            let wb = wht_labels(&metrics.beta[k], m);
            for l in all_labels(m) {
                worst = worst.max((fb[k].get(l) - wa[l.mask()]).abs());
                worst = worst.max((bb[k].get(l) - wb[l.mask()] / wb[0]).abs());
            }
        }
    }
    Ok(worst)
}
