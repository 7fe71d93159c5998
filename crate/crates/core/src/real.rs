//! Scalar types the decoders are generic over.
//!
//! [`f64`] is the production type. [`Dd`] is a double-double (about 106
//! significant bits) used when LLRs must be certified far out in the tails,
//! where register values sit within `1e-16` of `±1` and `f64` cancels.
//! [`Counted`] is an `f64` that tallies its arithmetic for complexity reports.

use std::cell::Cell;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Records `n` register reads or writes. Only [`Counted`] keeps track.
    #[inline(always)]
    fn note_access(_n: usize) {}

    fn clamp_unit(self) -> Self {
        if self > Self::one() {
            Self::one()
        } else if self < -Self::one() {
            -Self::one()
        } else {
            self
        }
    }
}

impl Real for f64 {
    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline(always)]
    fn clamp_unit(self) -> Self {
        self.clamp(-1.0, 1.0)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for Dd {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        // Long division: three f64 quotient digits.
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Dd::new(q3)
    }
}

impl Real for Dd {
    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        Dd::new(x)
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Operation tallies accumulated by [`Counted`] on the current thread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub additions: u64,
    pub multiplications: u64,
    pub divisions: u64,
    pub accesses: u64,
}

impl OpCounts {
    pub fn per_step(&self, steps: usize) -> [f64; 4] {
        let s = steps.max(1) as f64;
        [
            self.additions as f64 / s,
            self.multiplications as f64 / s,
            self.divisions as f64 / s,
            self.accesses as f64 / s,
        ]
    }
}

thread_local! {
    static COUNTS: Cell<OpCounts> = const { Cell::new(OpCounts { additions: 0, multiplications: 0, divisions: 0, accesses: 0 }) };
}

fn bump(f: impl FnOnce(&mut OpCounts)) {
    COUNTS.with(|c| {
        let mut v = c.get();
        f(&mut v);
        c.set(v);
    });
}

/// Resets the current thread's counters and returns their previous values.
pub fn take_op_counts() -> OpCounts {
    COUNTS.with(|c| c.replace(OpCounts::default()))
}

/// `f64` that counts every arithmetic operation it takes part in.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Counted(pub f64);

impl Add for Counted {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        bump(|c| c.additions += 1);
        Counted(self.0 + o.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Counted {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        bump(|c| c.additions += 1);
        Counted(self.0 - o.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Counted {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        bump(|c| c.multiplications += 1);
        Counted(self.0 * o.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Counted {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        bump(|c| c.divisions += 1);
        Counted(self.0 / o.0)
    }
}

impl Neg for Counted {
    type Output = Self;
    fn neg(self) -> Self {
        Counted(-self.0)
    }
}

impl Real for Counted {
    fn from_f64(x: f64) -> Self {
        Counted(x)
    }
    fn to_f64(self) -> f64 {
        self.0
    }
    fn note_access(n: usize) {
        bump(|c| c.accesses += n as u64);
    }
}
