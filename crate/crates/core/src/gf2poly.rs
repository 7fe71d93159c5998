//! Polynomials over GF(2).
//!
//! Coefficients are packed into 64-bit words with bit `i` holding the
//! coefficient of `x^i`. The word vector is kept trimmed so that equality is
//! structural and the zero polynomial has no words at all.

use std::fmt;

use crate::error::{Error, Result};

/// Largest exponent tried by [`Gf2Poly::mcp`].
pub const MCP_ORDER_CAP: u64 = 1 << 20;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_bits(1)
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut p = Self::zero();
        p.set_coeff(k, true);
        p
    }

    /// `x^k + 1`.
    pub fn binomial(k: usize) -> Self {
        let mut p = Self::monomial(k);
        p.words[0] ^= 1;
        p.trim();
        p
    }

    pub fn from_bits(bits: u64) -> Self {
        let mut p = Self { words: vec![bits] };
        p.trim();
        p
    }

    pub fn from_exponents(exps: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exps {
            let c = p.coeff(e);
            p.set_coeff(e, !c);
        }
        p
    }

    /// Parses an octal string; the octal value's bit `i` becomes the
    /// coefficient of `x^i` (so `"7"` is `x^2 + x + 1`).
    pub fn parse_octal(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse(text.to_string()));
        }
        let mut p = Self::zero();
        for ch in text.chars() {
            let digit = ch.to_digit(8).ok_or_else(|| Error::Parse(text.to_string()))?;
            p = p.shl(3);
            if digit != 0 {
                if p.words.is_empty() {
                    p.words.push(0);
                }
                p.words[0] |= u64::from(digit);
            }
        }
        p.trim();
        Ok(p)
    }

    pub fn to_octal(&self) -> String {
        let Some(deg) = self.degree() else {
            return "0".to_string();
        };
        let digits = deg / 3 + 1;
        (0..digits)
            .rev()
            .map(|d| {
                let v = (0..3).fold(0u32, |acc, b| acc | (u32::from(self.coeff(3 * d + b)) << b));
                char::from_digit(v, 8).unwrap()
            })
            .collect()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub fn set_coeff(&mut self, i: usize, value: bool) {
        let w = i / 64;
        if value {
            if self.words.len() <= w {
                self.words.resize(w + 1, 0);
            }
            self.words[w] |= 1 << (i % 64);
        } else if w < self.words.len() {
            self.words[w] &= !(1 << (i % 64));
            self.trim();
        }
    }

    /// Coefficients `c_0..=c_len-1` as booleans.
    pub fn coeffs(&self, len: usize) -> Vec<bool> {
        (0..len).map(|i| self.coeff(i)).collect()
    }

    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Value at `x = 1` over GF(2).
    pub fn eval_at_one(&self) -> bool {
        self.weight() % 2 == 1
    }

    pub fn add(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(&short.words) {
            *w ^= s;
        }
        let mut p = Self { words };
        p.trim();
        p
    }

    /// Multiplication by `x^k`.
    pub fn shl(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let (ws, bs) = (k / 64, k % 64);
        let mut words = vec![0u64; self.words.len() + ws + 1];
        for (i, &w) in self.words.iter().enumerate() {
            words[i + ws] |= w << bs;
            if bs != 0 {
                words[i + ws + 1] |= w >> (64 - bs);
            }
        }
        let mut p = Self { words };
        p.trim();
        p
    }

    /// Carry-less product.
    pub fn mul(&self, other: &Self) -> Self {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Self::zero();
        };
        // Iterate over the sparser operand's set bits.
        let (sparse, dense) = if self.weight() <= other.weight() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = vec![0u64; (da + db) / 64 + 2];
        for i in sparse.set_bits() {
            let (ws, bs) = (i / 64, i % 64);
            for (j, &w) in dense.words.iter().enumerate() {
                acc[j + ws] ^= w << bs;
                if bs != 0 {
                    acc[j + ws + 1] ^= w >> (64 - bs);
                }
            }
        }
        let mut p = Self { words: acc };
        p.trim();
        p
    }

    /// Long division: `self = divisor * quotient + remainder`.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or(Error::ZeroDivisor)?;
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let shift = dr - dd;
            quot.set_coeff(shift, true);
            rem.xor_shifted(divisor, shift);
        }
        Ok((quot, rem))
    }

    /// Minimum complementary polynomial: the smallest `e >= 1` with
    /// `self | x^e + 1`, returned as `((x^e + 1) / self, e)`.
    pub fn mcp(&self) -> Result<(Self, u64)> {
        let deg = self.degree().ok_or(Error::ZeroDivisor)?;
        if !self.coeff(0) {
            return Err(Error::ZeroConstantTerm);
        }
        if deg == 0 {
            // a = 1 divides x + 1.
            return Ok((Self::binomial(1), 1));
        }
        // Walk r = x^e mod a until it returns to 1.
        let one = Self::one();
        let mut r = Self::one();
        for e in 1..=MCP_ORDER_CAP {
            r = r.shl(1);
            if r.coeff(deg) {
                r.xor_shifted(self, 0);
            }
            if r == one {
                let (z, rem) = Self::binomial(e as usize).divmod(self)?;
                debug_assert!(rem.is_zero());
                return Ok((z, e));
            }
        }
        Err(Error::OrderCapExceeded(MCP_ORDER_CAP))
    }

    /// Coefficient mirror `i -> width - i`.
    pub fn reverse(&self, width: usize) -> Result<Self> {
        if let Some(d) = self.degree() {
            if d > width {
                return Err(Error::DegreeExceedsWidth { degree: d, width });
            }
        }
        let mut p = Self::zero();
        for i in self.set_bits() {
            p.set_coeff(width - i, true);
        }
        Ok(p)
    }

    pub fn set_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    fn xor_shifted(&mut self, other: &Self, k: usize) {
        let (ws, bs) = (k / 64, k % 64);
        let need = other.words.len() + ws + 1;
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i + ws] ^= w << bs;
            if bs != 0 {
                self.words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
        self.trim();
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(deg) = self.degree() else {
            return write!(f, "0");
        };
        let mut first = true;
        for i in (0..=deg).rev().filter(|&i| self.coeff(i)) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "1")?,
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

/// A rate-1 generator or dual-encoder transfer function `num / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRatio {
    pub num: Gf2Poly,
    pub den: Gf2Poly,
}

/// Dual-encoder polynomials of a rate-1 code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rate1Dual {
    /// Memory order `n` of the original code.
    pub n: usize,
    /// `q_f z_f / (x^e + 1)`.
    pub forward: PolyRatio,
    /// `q_b z_b / (x^e + 1)`, built from the coefficient-reversed code.
    pub backward: PolyRatio,
}

/// Dual polynomials for the rate-1 code `g_f = a_f / q_f`.
pub fn rate1_dual_polys(a_f: &Gf2Poly, q_f: &Gf2Poly) -> Result<Rate1Dual> {
    let n = a_f.degree().ok_or(Error::ZeroDivisor)?;
    if q_f.degree() != Some(n) || !a_f.coeff(0) || !q_f.coeff(0) {
        return Err(Error::InvalidCode(format!(
            "rate-1 dual needs degree-{n} a_f, q_f with unit constant terms (got {a_f}, {q_f})"
        )));
    }
    let dual = |a: &Gf2Poly, q: &Gf2Poly| -> Result<PolyRatio> {
        let (z, e) = a.mcp()?;
        Ok(PolyRatio {
            num: q.mul(&z),
            den: Gf2Poly::binomial(e as usize),
        })
    };
    let a_b = a_f.reverse(n)?;
    let q_b = q_f.reverse(n)?;
    Ok(Rate1Dual {
        n,
        forward: dual(a_f, q_f)?,
        backward: dual(&a_b, &q_b)?,
    })
}
