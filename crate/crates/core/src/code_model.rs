//! Rate-1/2 convolutional codes: definition, trellis, encoder, BPSK.
//!
//! State index `s = sum_i M_i 2^(m-i)`, so `M_1` (the newest memory) is the
//! most significant bit. Codeword bits are emitted `c1` then `c2` per step.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf2poly::Gf2Poly;

/// Largest memory order accepted.
pub const MAX_MEMORY: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeKind {
    /// `(1, a/q)`: `c1 = b`, `c2 = (a/q) b`.
    Rsc,
    /// `(q, a)` feedforward: `c1 = q b`, `c2 = a b`.
    Nsc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    ZeroTail,
    TailBiting,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub kind: CodeKind,
    /// Generator of `c2` (parity numerator for RSC).
    pub poly_a: Gf2Poly,
    /// Feedback polynomial for RSC, generator of `c1` for NSC.
    pub poly_q: Gf2Poly,
    pub m: usize,
    pub termination: Termination,
}

impl CodeSpec {
    /// `(1, a/q)` recursive systematic code.
    pub fn rsc(a: Gf2Poly, q: Gf2Poly) -> Result<Self> {
        Self::build(CodeKind::Rsc, a, q, Termination::ZeroTail)
    }

    /// Feedforward code with `c1 = g1 b`, `c2 = g2 b`.
    pub fn nsc(g1: Gf2Poly, g2: Gf2Poly, termination: Termination) -> Result<Self> {
        Self::build(CodeKind::Nsc, g2, g1, termination)
    }

    /// Parses `"7,5"` as RSC `(1, 7/5)` or NSC `(7, 5)`.
    pub fn from_octal_pair(text: &str, kind: CodeKind, termination: Termination) -> Result<Self> {
        let (x, y) = text
            .split_once(',')
            .ok_or_else(|| Error::InvalidCode(format!("expected two octal polynomials, got {text:?}")))?;
        let x = Gf2Poly::parse_octal(x.trim())?;
        let y = Gf2Poly::parse_octal(y.trim())?;
        match kind {
            CodeKind::Rsc => {
                if termination == Termination::TailBiting {
                    return Err(Error::InvalidCode("tail-biting is only provided for NSC codes".into()));
                }
                Self::rsc(x, y)
            }
            CodeKind::Nsc => Self::nsc(x, y, termination),
        }
    }

    fn build(kind: CodeKind, a: Gf2Poly, q: Gf2Poly, termination: Termination) -> Result<Self> {
        let m = a
            .degree()
            .ok_or_else(|| Error::InvalidCode("zero generator polynomial".into()))?;
        if q.degree() != Some(m) {
            return Err(Error::InvalidCode(format!(
                "generators must share degree m: {a} has degree {m}, {q} does not"
            )));
        }
        if !a.coeff(0) || !q.coeff(0) {
            return Err(Error::InvalidCode(format!("generators need constant term 1 ({a}, {q})")));
        }
        if m == 0 || m > MAX_MEMORY {
            return Err(Error::InvalidCode(format!("memory order {m} outside 1..={MAX_MEMORY}")));
        }
        if kind == CodeKind::Rsc && termination == Termination::TailBiting {
            return Err(Error::InvalidCode("tail-biting is only provided for NSC codes".into()));
        }
        Ok(Self {
            kind,
            poly_a: a,
            poly_q: q,
            m,
            termination,
        })
    }

    pub fn with_termination(mut self, termination: Termination) -> Result<Self> {
        if self.kind == CodeKind::Rsc && termination == Termination::TailBiting {
            return Err(Error::InvalidCode("tail-biting is only provided for NSC codes".into()));
        }
        self.termination = termination;
        Ok(self)
    }

    pub fn states(&self) -> usize {
        1 << self.m
    }

    /// Octal text of the code in its conventional order.
    pub fn octal_pair(&self) -> String {
        match self.kind {
            CodeKind::Rsc => format!("{},{}", self.poly_a.to_octal(), self.poly_q.to_octal()),
            CodeKind::Nsc => format!("{},{}", self.poly_q.to_octal(), self.poly_a.to_octal()),
        }
    }

    /// Taps `1..=m` of a polynomial packed into state-index bit positions.
    fn state_taps(&self, p: &Gf2Poly) -> usize {
        (1..=self.m)
            .filter(|&i| p.coeff(i))
            .fold(0, |acc, i| acc | 1 << (self.m - i))
    }

    pub fn build_trellis(&self) -> Trellis {
        let m = self.m;
        let n = self.states();
        let ta = self.state_taps(&self.poly_a);
        let tq = self.state_taps(&self.poly_q);
        let par = |x: usize| (x.count_ones() & 1) as u8;
        let mut next_state = vec![[0u32; 2]; n];
        let mut out_bits = vec![[0u8; 2]; n];
        for s in 0..n {
            for b in 0..2u8 {
                let (reg_in, c1, c2) = match self.kind {
                    CodeKind::Rsc => {
                        let u = b ^ par(s & tq);
                        (u, b, u ^ par(s & ta))
                    }
                    CodeKind::Nsc => (b, b ^ par(s & tq), b ^ par(s & ta)),
                };
                next_state[s][b as usize] = (((reg_in as usize) << (m - 1)) | (s >> 1)) as u32;
                out_bits[s][b as usize] = c1 << 1 | c2;
            }
        }
        Trellis {
            m,
            next_state,
            out_bits,
        }
    }

    /// Encodes `info`; the result interleaves `c1, c2` per step (length `2L`).
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        self.encode_with(&self.build_trellis(), info)
    }

    pub fn encode_with(&self, trellis: &Trellis, info: &[u8]) -> Result<Vec<u8>> {
        if info.is_empty() {
            return Err(Error::InvalidInput("empty message".into()));
        }
        let start = self.start_state(info)?;
        let mut s = start;
        let mut out = Vec::with_capacity(2 * info.len());
        for &b in info {
            let (n, c1, c2) = trellis.step(s, b);
            out.push(c1);
            out.push(c2);
            s = n;
        }
        debug_assert!(self.termination != Termination::TailBiting || s == start);
        Ok(out)
    }

    /// Initial state: 0, or for tail-biting the state left by the last `m`
    /// message bits.
    pub fn start_state(&self, info: &[u8]) -> Result<usize> {
        match self.termination {
            Termination::ZeroTail => Ok(0),
            Termination::TailBiting => {
                let l = info.len();
                if l < self.m {
                    return Err(Error::InvalidInput(format!(
                        "tail-biting needs L >= m ({l} < {})",
                        self.m
                    )));
                }
                Ok((1..=self.m).fold(0, |s, i| s | ((info[l - i] & 1) as usize) << (self.m - i)))
            }
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CodeKind::Rsc => write!(f, "rsc:{}", self.octal_pair()),
            CodeKind::Nsc => write!(f, "nsc:{}", self.octal_pair()),
        }?;
        if self.termination == Termination::TailBiting {
            write!(f, ":tb")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for CodeSpec {
    type Err = Error;

    /// Inverse of `Display`: `rsc:7,5`, `nsc:171,133:tb`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = match parts.next() {
            Some("rsc") => CodeKind::Rsc,
            Some("nsc") => CodeKind::Nsc,
            _ => return Err(Error::InvalidCode(format!("code {s:?} must start with rsc: or nsc:"))),
        };
        let pair = parts
            .next()
            .ok_or_else(|| Error::InvalidCode(format!("code {s:?} lacks polynomials")))?;
        let term = match parts.next() {
            None => Termination::ZeroTail,
            Some("tb") => Termination::TailBiting,
            Some(t) => return Err(Error::InvalidCode(format!("unknown termination {t:?}"))),
        };
        Self::from_octal_pair(pair, kind, term)
    }
}

/// Transition and output tables.
#[derive(Clone, Debug)]
pub struct Trellis {
    pub m: usize,
    pub next_state: Vec<[u32; 2]>,
    /// `c1 << 1 | c2` per state and input.
    pub out_bits: Vec<[u8; 2]>,
}

impl Trellis {
    pub fn states(&self) -> usize {
        self.next_state.len()
    }

    /// `(next state, c1, c2)`.
    #[inline]
    pub fn step(&self, s: usize, b: u8) -> (usize, u8, u8) {
        let o = self.out_bits[s][b as usize];
        (self.next_state[s][b as usize] as usize, o >> 1, o & 1)
    }
}

/// `0 -> +1`, `1 -> -1`.
pub fn bpsk(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rsc(a: &str, q: &str) -> CodeSpec {
        CodeSpec::rsc(Gf2Poly::parse_octal(a).unwrap(), Gf2Poly::parse_octal(q).unwrap()).unwrap()
    }

    fn nsc_tb(g1: &str, g2: &str) -> CodeSpec {
        CodeSpec::nsc(
            Gf2Poly::parse_octal(g1).unwrap(),
            Gf2Poly::parse_octal(g2).unwrap(),
            Termination::TailBiting,
        )
        .unwrap()
    }

    #[test]
    fn figure_trellis_edges() {
        let t = rsc("7", "5").build_trellis();
        assert_eq!(t.step(0b00, 1), (0b10, 1, 1));
        assert_eq!(t.step(0b10, 0), (0b01, 0, 1));
        assert_eq!(t.step(0, 0), (0, 0, 0));
    }

    #[test]
    fn encode_impulse() {
        // Walk of the (1,7/5) trellis: 00 -1/11-> 10 -0/01-> 01 -0/00-> 10 -0/01-> 01.
        let c = rsc("7", "5").encode(&[1, 0, 0, 0]).unwrap();
        assert_eq!(c, vec![1, 1, 0, 1, 0, 0, 0, 1]);
        assert_eq!(rsc("13", "15").encode(&[0; 9]).unwrap(), vec![0; 18]);
    }

    #[test]
    fn trellis_degree_two_everywhere() {
        for code in [rsc("7", "5"), rsc("23", "35"), nsc_tb("171", "133")] {
            let t = code.build_trellis();
            let mut indeg = vec![0; t.states()];
            for s in 0..t.states() {
                for b in 0..2 {
                    indeg[t.step(s, b).0] += 1;
                }
                if code.kind == CodeKind::Rsc {
                    assert_eq!(t.step(s, 0).1, 0);
                    assert_eq!(t.step(s, 1).1, 1);
                }
            }
            assert!(indeg.iter().all(|&d| d == 2));
        }
    }

    #[test]
    fn all_states_reachable_within_m_steps() {
        for code in [rsc("7", "5"), rsc("13", "15"), rsc("23", "25"), rsc("561", "573")] {
            let t = code.build_trellis();
            let mut seen = vec![false; t.states()];
            let mut frontier = vec![0usize];
            seen[0] = true;
            for _ in 0..code.m {
                let mut next = Vec::new();
                for &s in &frontier {
                    for b in 0..2 {
                        let n = t.step(s, b).0;
                        if !seen[n] {
                            seen[n] = true;
                        }
                        next.push(n);
                    }
                }
                next.sort_unstable();
                next.dedup();
                frontier = next;
            }
            assert!(seen.iter().all(|&x| x));
        }
    }

    #[test]
    fn tail_biting_is_circular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for code in [nsc_tb("7", "5"), nsc_tb("171", "133"), nsc_tb("51303", "73171")] {
            let t = code.build_trellis();
            for _ in 0..1000 {
                let l = rng.random_range(code.m..3 * code.m + 5);
                let info: Vec<u8> = (0..l).map(|_| rng.random_range(0..2)).collect();
                let s0 = code.start_state(&info).unwrap();
                let end = info.iter().fold(s0, |s, &b| t.step(s, b).0);
                assert_eq!(end, s0);
            }
        }
    }

    #[test]
    fn tail_biting_rejects_short_messages() {
        assert!(nsc_tb("171", "133").encode(&[1, 0, 1]).is_err());
        assert!(CodeSpec::from_octal_pair("7,5", CodeKind::Rsc, Termination::TailBiting).is_err());
    }

    #[test]
    fn validation() {
        let p = |s| Gf2Poly::parse_octal(s).unwrap();
        assert!(CodeSpec::rsc(p("7"), p("13")).is_err());
        assert!(CodeSpec::rsc(p("6"), p("5")).is_err());
        assert!(CodeSpec::rsc(p("0"), p("5")).is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in ["rsc:7,5", "nsc:171,133:tb", "nsc:7,5"] {
            let c: CodeSpec = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        let c: CodeSpec = "nsc:171,133".parse().unwrap();
        assert_eq!(c.poly_q.to_octal(), "171");
    }

    #[test]
    fn bpsk_mapping() {
        assert_eq!(bpsk(&[0, 1, 0]), vec![1.0, -1.0, 1.0]);
    }

    proptest! {
        #[test]
        fn zero_tail_encoding_is_linear(
            x in proptest::collection::vec(0u8..2, 1..40),
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<u8> = (0..x.len()).map(|_| rng.random_range(0..2)).collect();
            for code in [rsc("7", "5"), rsc("23", "35")] {
                let s: Vec<u8> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();
                let cx = code.encode(&x).unwrap();
                let cy = code.encode(&y).unwrap();
                let cs = code.encode(&s).unwrap();
                let sum: Vec<u8> = cx.iter().zip(&cy).map(|(a, b)| a ^ b).collect();
                prop_assert_eq!(cs, sum);
            }
        }
    }
}
