//! Scalar types the certification routines are generic over.
//!
//! Every bound in this crate is stated in terms of a unit roundoff `u`: the
//! forward-error factor `γ_k = k·u / (1 − k·u)` is what turns a computed value
//! into a rigorous enclosure. Binary floating point types supply their `u`;
//! exact rationals have `u = 0`, so the same generic code doubles as an exact
//! reference path.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Arithmetic the evaluation and geometry code needs.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// True when arithmetic is exact (no rounding at all).
    const EXACT: bool;

    /// Largest integer magnitude representable without rounding.
    const MAX_EXACT_INT: i128;

    /// Unit roundoff for round-to-nearest; zero for exact types.
    fn unit_roundoff() -> Self;

    /// Least representable value strictly greater than `self` (identity when exact).
    fn next_up(self) -> Self;

    /// Greatest representable value strictly less than `self` (identity when exact).
    fn next_down(self) -> Self;

    /// Converts an integer, rounding to nearest if it is not representable.
    fn from_int(n: i128) -> Self;

    /// Converts a double, rounding to nearest if it is not representable.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite(&self) -> bool;

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MAX_EXACT_INT: i128 = 1 << 53;

    fn unit_roundoff() -> Self {
        f64::EPSILON / 2.0
    }
    fn next_up(self) -> Self {
        f64::next_up(self)
    }
    fn next_down(self) -> Self {
        f64::next_down(self)
    }
    fn from_int(n: i128) -> Self {
        n as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    const MAX_EXACT_INT: i128 = 1 << 24;

    fn unit_roundoff() -> Self {
        f32::EPSILON / 2.0
    }
    fn next_up(self) -> Self {
        f32::next_up(self)
    }
    fn next_down(self) -> Self {
        f32::next_down(self)
    }
    fn from_int(n: i128) -> Self {
        n as f32
    }
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn is_finite(&self) -> bool {
        f32::is_finite(*self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const MAX_EXACT_INT: i128 = i128::MAX;

    fn unit_roundoff() -> Self {
        Self::zero()
    }
    fn next_up(self) -> Self {
        self
    }
    fn next_down(self) -> Self {
        self
    }
    fn from_int(n: i128) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    /// Panics on non-finite input.
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite double")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_finite(&self) -> bool {
        true
    }
}

/// `γ_k = k·u/(1 − k·u)`, rounded upward. Zero for exact scalars.
///
/// Returns +∞ when `k·u ≥ 1/2`, where the bound is no longer meaningful.
pub fn gamma<S: Scalar>(k: usize) -> S {
    if S::EXACT {
        return S::zero();
    }
    let ku = (S::from_int(k as i128) * S::unit_roundoff()).next_up();
    let half = S::one() / (S::one() + S::one());
    if ku >= half {
        return S::from_f64(f64::INFINITY);
    }
    let denom = (S::one() - ku.clone()).next_down();
    (ku / denom).next_up()
}

/// `a · b` rounded upward; both operands must be nonnegative.
pub fn mul_up<S: Scalar>(a: S, b: S) -> S {
    (a * b).next_up()
}

/// `a + b` rounded upward.
pub fn add_up<S: Scalar>(a: S, b: S) -> S {
    (a + b).next_up()
}

/// `a − b` rounded downward.
pub fn sub_down<S: Scalar>(a: S, b: S) -> S {
    (a - b).next_down()
}

/// Upper bound on a positive quantity whose computed value `x` carries at
/// most `ops` rounding errors of relative size `u` each.
///
/// With `x̂ = x(1+θ)`, `|θ| ≤ γ_ops`, the exact value satisfies
/// `x ≤ x̂/(1−γ) ≤ x̂(1+2γ)` whenever `γ ≤ 1/2`.
pub fn inflate<S: Scalar>(x: S, ops: usize) -> S {
    if S::EXACT {
        return x;
    }
    let two = S::one() + S::one();
    let factor = (S::one() + two * gamma::<S>(ops)).next_up();
    mul_up(x, factor).next_up()
}

/// Lower bound on a positive quantity whose computed value carries at most
/// `ops` relative rounding errors: `x ≥ x̂/(1+γ) ≥ x̂(1−γ)`.
pub fn deflate<S: Scalar>(x: S, ops: usize) -> S {
    if S::EXACT {
        return x;
    }
    let factor = (S::one() - gamma::<S>(ops)).next_down();
    (x * factor).next_down().next_down()
}

/// `x^e` for `x ≥ 0` by repeated multiplication, returned with the number of
/// roundings it incurred (at most `e − 1`).
pub fn pow_counted<S: Scalar>(x: &S, e: usize) -> (S, usize) {
    let mut acc = S::one();
    for _ in 0..e {
        acc = acc * x.clone();
    }
    (acc, e.saturating_sub(1))
}

/// Exact rational conversion of a double; `None` for non-finite values.
pub fn rational_of(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Convenience for `S::one()` of the right type in generic code.
pub fn one<S: Scalar>() -> S {
    <S as One>::one()
}
