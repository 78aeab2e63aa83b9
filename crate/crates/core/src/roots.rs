//! Existence and localization of double zeros.
//!
//! A tuple `(P, n, a, b)` with `n = deg P` is *good* for height `h` when
//!
//! * `P(a) > h·a^{n+1}/(1−a)` and `P(b) > h·b^{n+1}/(1−b)`,
//! * `P > 0` on `[a, b]`, and
//! * `P(x) < h·x^{n+1}/(1−x)` for some `x ∈ (a, b)`.
//!
//! Subtracting `h·x^m` for the least admissible `m` keeps the tuple good, and
//! the limit of that process is a class member with initial part `P` and a
//! double zero in `(a, b)`. With a critical point `y` of `P` and a lower bound
//! `C″` on `P″`, the zero lies within `η` of `y`.
//!
//! Endpoint and dip conditions are decided in exact rational arithmetic.
//! Positivity on an interval is certified by bisection in double precision
//! with explicit error bounds, falling back to exact arithmetic on cells where
//! rounding error is what prevents a decision.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{add_up, gamma, inflate, mul_up, Scalar};
use crate::series::{eval_poly, falling_factorial, tail_sup, SignedPolynomial};

/// Bisection depth after which a positivity check gives up.
pub const MAX_BISECTION_DEPTH: usize = 60;

/// Grid size of the dip-witness search.
const DIP_GRID: usize = 10_000;

/// Bisection steps taken past the spacing of doubles when bracketing a
/// critical point; keeps every bracket point a sum of two doubles.
const FINE_STEPS: usize = 50;

/// A certified good tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodTuple {
    pub poly: SignedPolynomial,
    /// Degree of `poly`; the tail starts at `n + 1`.
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub height: i64,
    /// A point of `(a, b)` where `P(x) < h·x^{n+1}/(1−x)`, held exactly as
    /// the unevaluated sum `witness_x + witness_lo`.
    pub witness_x: f64,
    /// Low part of the witness; zero unless the dip is narrower than the
    /// spacing of doubles.
    #[serde(default)]
    pub witness_lo: f64,
    /// Certified lower bound for `min P` on `[a, b]`.
    pub positivity_margin: f64,
    /// `P(a)(1−a)/(h·a^{n+1})`, which must exceed 1.
    pub ratio_a: f64,
    /// `P(b)(1−b)/(h·b^{n+1})`, which must exceed 1.
    pub ratio_b: f64,
    /// The same ratio at the witness, which must be below 1.
    pub dip_ratio: f64,
}

/// Which goodness condition failed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GoodError {
    #[error("P is not certified positive near x = {x} (proven nonpositive: {proven})")]
    NotPositive { x: f64, proven: bool },
    #[error("endpoint condition fails at {endpoint} (ratio {ratio})")]
    EndpointFail { endpoint: Endpoint, ratio: f64 },
    #[error("no point of (a, b) certifies the dip condition")]
    NoDipWitness,
    #[error(transparent)]
    Invalid(#[from] Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    A,
    B,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Endpoint::A => "a",
            Endpoint::B => "b",
        })
    }
}

/// Output of [`localize_double_root`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootLocalization {
    /// Certified bracket of the critical point: `P′(y_lo) < 0 < P′(y_hi)`.
    pub y_lo: f64,
    pub y_hi: f64,
    /// Certified lower bound for `P″` on `[a, b]`.
    pub c2: f64,
    /// `sup_{x≤b} Σ_{k>n} k·x^{k−1} / C″`, rounded up.
    pub eta: f64,
    /// `(1+(1−b)(n+1))·b^{n+1}/(C″(1−b)²)`, the published closed form, for
    /// comparison only.
    pub eta_published: f64,
    /// Some class member with initial part `P` has a double zero in here.
    pub lo: f64,
    pub hi: f64,
}

impl RootLocalization {
    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        lo <= self.lo && self.hi <= hi
    }
}

/// Why localization could not be carried out.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocalizeError {
    #[error("P′ has no certified sign change on [a, b]")]
    NoSignChange,
    #[error("no positive lower bound for P″ on [a, b] could be certified")]
    NonPositiveSecondDerivative,
    #[error("hypothesis fails: {0}")]
    HypothesisFail(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

fn rat(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x}")))
}

fn rat_to_f64(x: &BigRational) -> f64 {
    ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

/// Exact `P⁽ʲ⁾(x)`. Dyadic points, which include every double, go through
/// integer Horner with a single reduction at the end.
fn exact_eval(p: &SignedPolynomial, order: usize, x: &BigRational) -> BigRational {
    let den = x.denom();
    let e = den.bits().saturating_sub(1);
    if den.trailing_zeros() != Some(e) {
        return eval_poly(p, order, x).value;
    }
    let deg = p.degree();
    if order > deg {
        return BigRational::zero();
    }
    let e = e as usize;
    let mut acc = BigInt::zero();
    for i in (order..=deg).rev() {
        acc *= x.numer();
        let c = p.coeffs()[i];
        if c != 0 {
            let ff: BigInt = ((i - order + 1)..=i).map(|k| BigInt::from(k as u64)).product();
            acc += (BigInt::from(c) * ff) << (e * (deg - i));
        }
    }
    BigRational::new(acc, BigInt::one() << (e * (deg - order)))
}

/// Exact `h·x^{n+1}/(1−x)`.
fn exact_tail(x: &BigRational, n: usize, h: i64) -> BigRational {
    let k = n as u32 + 1;
    let pw = BigRational::new_raw(x.numer().pow(k), x.denom().pow(k));
    pw * BigRational::from_integer(h.into()) / (BigRational::one() - x)
}

/// Splits a dyadic into `hi + lo` with both parts doubles, if possible.
fn split_double(x: &BigRational) -> Option<(f64, f64)> {
    let hi = rat_to_f64(x);
    let rest = x - BigRational::from_float(hi)?;
    let lo = rat_to_f64(&rest);
    (BigRational::from_float(lo)? == rest).then_some((hi, lo))
}

/// `P(x)(1−x)/(h·x^{n+1})` in double precision, for searching only.
fn dip_ratio_f64(p: &SignedPolynomial, x: f64, h: i64) -> f64 {
    let n = p.degree();
    eval_poly(p, 0, &x).value * (1.0 - x) / (h as f64 * x.powi(n as i32 + 1))
}

/// Upper bound for `sup_{0≤x≤b} |P⁽ʲ⁾(x)|` via `Σ (i)ⱼ|aᵢ|b^{i−j}`.
fn abs_derivative_bound(p: &SignedPolynomial, order: usize, b: f64) -> f64 {
    let mut sum = 0.0;
    let mut terms = 0;
    for (i, &c) in p.coeffs().iter().enumerate() {
        if c == 0 || i < order {
            continue;
        }
        let ff = falling_factorial(i as u64, order).expect("small falling factorial") as f64;
        sum += (c.abs() as f64) * ff * b.powi((i - order) as i32);
        terms += 1;
    }
    // powi, the products and the summation each contribute roundings
    inflate(sum, 2 * p.degree() + 2 * terms + 4)
}

/// Certified lower bound of `P⁽ʲ⁾` on `[u, v]` from a Taylor expansion at `u`,
/// or `None` if the evaluation is too inaccurate to be useful.
struct Local<S> {
    lower: S,
    /// Certified upper bound of `P⁽ʲ⁾(u)`.
    upper_at_u: S,
}

fn local_lower<S: Scalar>(
    p: &SignedPolynomial,
    order: usize,
    u: &S,
    w: &S,
    m1: &S,
    m2: &S,
) -> Local<S> {
    let v0 = eval_poly(p, order, u);
    let v1 = eval_poly(p, order + 1, u);
    let two = S::one() + S::one();
    let p0 = v0.lower();
    let d1 = v1.lower().min_of(S::zero());
    // first order: P(u) − sup|P′|·w
    let first = p0.clone() - mul_up(m1.clone(), w.clone());
    // second order: P(u) + min(0, P′(u))·w − sup|P″|·w²/2
    let quad = mul_up(mul_up(m2.clone(), w.clone()), w.clone()) / two;
    let second = p0.clone() + d1.clone() * w.clone() - quad.clone();
    let best = first.clone().max_of(second.clone());
    // three roundings in the combination; guard by γ₆ times the magnitudes
    let mag = add_up(
        add_up(p0.abs(), mul_up(m1.clone(), w.clone())),
        add_up((d1 * w.clone()).abs(), quad),
    );
    let guard = mul_up(gamma::<S>(6), mag);
    Local {
        lower: (best - guard).next_down(),
        upper_at_u: v0.upper(),
    }
}

/// Outcome of a positivity proof.
#[derive(Debug, Clone, PartialEq)]
pub enum Positivity {
    /// `P⁽ʲ⁾ − offset > 0` on the whole interval; carries a certified lower
    /// bound of `P⁽ʲ⁾ − offset`.
    Certified(f64),
    /// Failed at this point; `proven` when the value there is certainly ≤ 0.
    Failed { x: f64, proven: bool },
}

/// Proves `P⁽ʲ⁾(x) > offset` for all `x ∈ [a, b]` by adaptive bisection.
///
/// A cell `[u, v]` is accepted when a first- or second-order Taylor bound at
/// `u` stays above `offset`; cells that double precision cannot decide are
/// retried in exact arithmetic before being split further.
pub fn prove_lower_bound(
    p: &SignedPolynomial,
    order: usize,
    a: f64,
    b: f64,
    offset: f64,
) -> Result<Positivity> {
    if !(a.is_finite() && b.is_finite() && 0.0 < a && a < b && b < 1.0) {
        return Err(Error::Domain(format!("need 0 < a < b < 1, got ({a}, {b})")));
    }
    let shifted = shift_constant(p, order, offset)?;
    let m1 = abs_derivative_bound(p, order + 1, b);
    let m2 = abs_derivative_bound(p, order + 2, b);
    // cheap exact look at the endpoints first; a nonpositive endpoint is
    // a proven failure and saves bisecting towards it
    for x in [a, b] {
        if !(exact_eval(p, order, &rat(x)?) - rat(offset)?).is_positive() {
            return Ok(Positivity::Failed { x, proven: true });
        }
    }
    let mut margin = f64::INFINITY;
    let mut stack = vec![(a, b, 0usize)];
    while let Some((u, v, depth)) = stack.pop() {
        let w = (v - u).next_up();
        let loc = shifted.local_lower(u, w, m1, m2);
        if loc.lower > 0.0 {
            margin = margin.min(loc.lower);
            continue;
        }
        if loc.upper_at_u <= 0.0 {
            return Ok(Positivity::Failed { x: u, proven: true });
        }
        // rounding error may be what blocks the decision; retry exactly
        let exact = shifted.local_lower_exact(u, v, m1, m2)?;
        if let Some(l) = exact {
            margin = margin.min(l);
            continue;
        }
        let mid = u + (v - u) / 2.0;
        if depth >= MAX_BISECTION_DEPTH || !(u < mid && mid < v) {
            return Ok(Positivity::Failed { x: u, proven: false });
        }
        // push right first so the left half is examined first
        stack.push((mid, v, depth + 1));
        stack.push((u, mid, depth + 1));
    }
    Ok(Positivity::Certified(margin))
}

/// `P⁽ʲ⁾ − offset`, evaluated without rebuilding the polynomial.
struct Shifted<'a> {
    p: &'a SignedPolynomial,
    order: usize,
    offset: f64,
}

fn shift_constant(p: &SignedPolynomial, order: usize, offset: f64) -> Result<Shifted<'_>> {
    if !offset.is_finite() {
        return Err(Error::Domain("offset must be finite".into()));
    }
    Ok(Shifted { p, order, offset })
}

impl Shifted<'_> {
    fn local_lower(&self, u: f64, w: f64, m1: f64, m2: f64) -> Local<f64> {
        let l = local_lower(self.p, self.order, &u, &w, &m1, &m2);
        Local {
            lower: (l.lower - self.offset).next_down(),
            upper_at_u: (l.upper_at_u - self.offset).next_up(),
        }
    }

    /// Exact version of the same Taylor bounds; `Some(lower bound)` on success.
    fn local_lower_exact(&self, u: f64, v: f64, m1: f64, m2: f64) -> Result<Option<f64>> {
        let (ur, vr) = (rat(u)?, rat(v)?);
        let w = &vr - &ur;
        let off = rat(self.offset)?;
        let p0 = exact_eval(self.p, self.order, &ur) - off;
        let d1 = exact_eval(self.p, self.order + 1, &ur).min(BigRational::zero());
        let two = BigRational::from_integer(2.into());
        let first = &p0 - rat(m1)? * &w;
        let second = &p0 + d1 * &w - rat(m2)? * &w * &w / two;
        let best = first.max(second);
        if best.is_positive() {
            // round the certified bound down
            let f = rat_to_f64(&best);
            let f = if rat(f)? > best { f.next_down() } else { f };
            Ok(Some(f.max(0.0)))
        } else {
            Ok(None)
        }
    }
}

fn check_range(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && 0.5 < a && a < b && b < 1.0) {
        return Err(Error::Domain(format!("need 0.5 < a < b < 1, got ({a}, {b})")));
    }
    Ok(())
}

/// Exact `P(x)(1−x)/(h·x^{n+1})`, returned alongside whether it exceeds 1.
fn exact_ratio(p: &SignedPolynomial, x: f64, h: i64) -> Result<(Ordering, f64)> {
    Ok(exact_ratio_at(p, &rat(x)?, h))
}

fn exact_ratio_at(p: &SignedPolynomial, x: &BigRational, h: i64) -> (Ordering, f64) {
    let lhs = exact_eval(p, 0, x);
    let rhs = exact_tail(x, p.degree(), h);
    let ratio = rat_to_f64(&(&lhs / &rhs));
    (lhs.cmp(&rhs), ratio)
}

/// Verifies that `(P, deg P, a, b)` is good for height `h`.
pub fn check_good(
    p: &SignedPolynomial,
    a: f64,
    b: f64,
    h: i64,
) -> std::result::Result<GoodTuple, GoodError> {
    check_range(a, b)?;
    if h < 1 || p.coeffs()[1..].iter().any(|c| c.abs() > h) {
        return Err(Error::Domain(format!("coefficients exceed height {h}")).into());
    }
    let (ord_a, ratio_a) = exact_ratio(p, a, h)?;
    if ord_a != Ordering::Greater {
        return Err(GoodError::EndpointFail {
            endpoint: Endpoint::A,
            ratio: ratio_a,
        });
    }
    let (ord_b, ratio_b) = exact_ratio(p, b, h)?;
    if ord_b != Ordering::Greater {
        return Err(GoodError::EndpointFail {
            endpoint: Endpoint::B,
            ratio: ratio_b,
        });
    }
    let positivity_margin = match prove_positive(p, a, b)? {
        Positivity::Certified(m) => m,
        Positivity::Failed { x, proven } => return Err(GoodError::NotPositive { x, proven }),
    };
    let (witness_x, witness_lo, dip_ratio) =
        find_dip(p, a, b, h)?.ok_or(GoodError::NoDipWitness)?;
    Ok(GoodTuple {
        poly: p.clone(),
        n: p.degree(),
        a,
        b,
        height: h,
        witness_x,
        witness_lo,
        positivity_margin,
        ratio_a,
        ratio_b,
        dip_ratio,
    })
}

/// Grid search plus golden-section refinement for a point certifying the
/// dip condition; the returned ratio is exact (rounded to double).
fn find_dip(p: &SignedPolynomial, a: f64, b: f64, h: i64) -> Result<Option<(f64, f64, f64)>> {
    let step = (b - a) / DIP_GRID as f64;
    let mut samples: Vec<(f64, f64)> = (1..DIP_GRID)
        .map(|i| {
            let x = a + i as f64 * step;
            (dip_ratio_f64(p, x, h), x)
        })
        .collect();
    samples.sort_by(|l, r| l.0.total_cmp(&r.0).then(l.1.total_cmp(&r.1)));
    let mut candidates = Vec::new();
    if let Some(&(_, x0)) = samples.first() {
        let lo = (x0 - step).max(a);
        let hi = (x0 + step).min(b);
        candidates.push(golden_min(|x| dip_ratio_f64(p, x, h), lo, hi));
    }
    candidates.extend(samples.iter().take(8).map(|s| s.1));
    for x in candidates {
        if !(a < x && x < b) {
            continue;
        }
        let (ord, ratio) = exact_ratio(p, x, h)?;
        if ord == Ordering::Less {
            return Ok(Some((x, 0.0, ratio)));
        }
    }
    // when P is tiny the double ratio is noise; the minimum of P sits at
    // the critical point, which exact sign bisection still resolves
    if let Some((lo, hi)) = fine_bracket(p, a, b)? {
        let (ar, br) = (rat(a)?, rat(b)?);
        for x in [lo, hi] {
            if !(ar < x && x < br) {
                continue;
            }
            let Some((xh, xl)) = split_double(&x) else { continue };
            let (ord, ratio) = exact_ratio_at(p, &x, h);
            if ord == Ordering::Less {
                return Ok(Some((xh, xl, ratio)));
            }
        }
    }
    Ok(None)
}

/// Proves `P > 0` on `[a, b]`.
///
/// When `P″ > 0` can be certified the minimum is bounded exactly through
/// the critical point: with `P′(y_lo) < 0 < P′(y_hi)` and `P` convex,
/// `min P ≥ min(P(y_hi), P(y_lo) + P′(y_lo)(y_hi − y_lo))`. This stays
/// decisive when `min P` is far below double precision. Otherwise falls back
/// to [`prove_lower_bound`].
pub fn prove_positive(p: &SignedPolynomial, a: f64, b: f64) -> Result<Positivity> {
    if !(a.is_finite() && b.is_finite() && 0.0 < a && a < b && b < 1.0) {
        return Err(Error::Domain(format!("need 0 < a < b < 1, got ({a}, {b})")));
    }
    let (ar, br) = (rat(a)?, rat(b)?);
    let (pa, pb) = (exact_eval(p, 0, &ar), exact_eval(p, 0, &br));
    if !pa.is_positive() {
        return Ok(Positivity::Failed { x: a, proven: true });
    }
    if !pb.is_positive() {
        return Ok(Positivity::Failed { x: b, proven: true });
    }
    if !matches!(prove_lower_bound(p, 2, a, b, 0.0)?, Positivity::Certified(_)) {
        return prove_lower_bound(p, 0, a, b, 0.0);
    }
    let (sa, sb) = (derivative_sign(p, a)?, derivative_sign(p, b)?);
    let bound = if sa != Some(Ordering::Less) {
        pa
    } else if sb != Some(Ordering::Greater) {
        pb
    } else {
        let Some((lor, hir)) = fine_bracket(p, a, b)? else {
            return prove_lower_bound(p, 0, a, b, 0.0);
        };
        let plo = exact_eval(p, 0, &lor);
        let tangent = &plo + exact_eval(p, 1, &lor) * (&hir - &lor);
        let bound = tangent.min(exact_eval(p, 0, &hir));
        if !bound.is_positive() {
            return Ok(Positivity::Failed {
                x: rat_to_f64(&lor),
                proven: !plo.is_positive(),
            });
        }
        bound
    };
    let f = rat_to_f64(&bound);
    let f = if rat(f)? > bound { f.next_down() } else { f };
    Ok(Positivity::Certified(f.max(0.0)))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    (lo + hi) / 2.0
}

/// One step of the extension process: `Q = P − h·x^m` with the least
/// `m ≥ n+1` for which `Q` is certified positive on `[a, b]`; the result is
/// re-verified as a good tuple.
pub fn extend_step(g: &GoodTuple) -> std::result::Result<GoodTuple, GoodError> {
    let max_m = g.n + 1 + 400;
    let mut last = None;
    for m in g.n + 1..=max_m {
        let q = g.poly.with_term(m, -g.height);
        match prove_positive(&q, g.a, g.b)? {
            Positivity::Certified(_) => return check_good(&q, g.a, g.b, g.height),
            Positivity::Failed { x, proven } => last = Some(GoodError::NotPositive { x, proven }),
        }
    }
    Err(last.unwrap_or(GoodError::NoDipWitness))
}

/// Searches one-coefficient extensions of `prefix` (in ascending coefficient
/// order, shortest first) for a polynomial that is good on `(a, b)`.
pub fn find_good_extension(
    prefix: &SignedPolynomial,
    allowed: &[i64],
    a: f64,
    b: f64,
    h: i64,
    max_extra: usize,
) -> Result<Option<GoodTuple>> {
    check_range(a, b)?;
    let mut layer = vec![prefix.clone()];
    for extra in 0..=max_extra {
        for q in &layer {
            let last = *q.coeffs().last().expect("nonempty");
            if extra > 0 && last == 0 {
                continue;
            }
            // cheap screen before the rigorous check
            if dip_ratio_f64(q, a, h) <= 1.0 || dip_ratio_f64(q, b, h) <= 1.0 {
                continue;
            }
            match check_good(q, a, b, h) {
                Ok(t) => return Ok(Some(t)),
                Err(GoodError::Invalid(e)) => return Err(e),
                Err(_) => {}
            }
        }
        if extra == max_extra {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|q| allowed.iter().map(move |&c| q.extended(c)))
            .collect();
    }
    Ok(None)
}

/// Brackets the critical point of `P` and bounds the distance from it to a
/// double zero of some class member with initial part `P`.
///
/// `c2` is a lower bound for `P″` to certify; `None` picks the largest bound
/// of the form `0.999ᵗ·min(grid)` that can be certified.
pub fn localize_double_root(
    g: &GoodTuple,
    c2: Option<f64>,
) -> std::result::Result<RootLocalization, LocalizeError> {
    let (a, b, n) = (g.a, g.b, g.n);
    if b > 0.68 {
        return Err(LocalizeError::HypothesisFail(format!("b = {b} exceeds 0.68")));
    }
    if n <= 10 {
        return Err(LocalizeError::HypothesisFail(format!("degree {n} is not above 10")));
    }
    if g.height != 1 {
        return Err(LocalizeError::HypothesisFail(format!(
            "height {} (localization is stated for height 1)",
            g.height
        )));
    }
    let p = &g.poly;
    let c2 = certify_second_derivative(p, a, b, c2)?;
    let (y_lo, y_hi) = bracket_critical_point(p, a, b)?;
    let tail: f64 = tail_sup(1, n, &b, 1)?;
    let eta = (tail / c2).next_up();
    let eta_published = (1.0 + (1.0 - b) * (n as f64 + 1.0)) * b.powi(n as i32 + 1)
        / (c2 * (1.0 - b) * (1.0 - b));
    let lo = (y_lo - eta).next_down().max(a);
    let hi = (y_hi + eta).next_up().min(b);
    Ok(RootLocalization {
        y_lo,
        y_hi,
        c2,
        eta,
        eta_published,
        lo,
        hi,
    })
}

fn certify_second_derivative(
    p: &SignedPolynomial,
    a: f64,
    b: f64,
    target: Option<f64>,
) -> std::result::Result<f64, LocalizeError> {
    if let Some(c) = target {
        return match prove_lower_bound(p, 2, a, b, c)? {
            Positivity::Certified(_) if c > 0.0 => Ok(c),
            _ => Err(LocalizeError::NonPositiveSecondDerivative),
        };
    }
    let grid_min = (0..=1000)
        .map(|i| eval_poly(p, 2, &(a + (b - a) * i as f64 / 1000.0)).value)
        .fold(f64::INFINITY, f64::min);
    if grid_min <= 0.0 {
        return Err(LocalizeError::NonPositiveSecondDerivative);
    }
    let mut c = grid_min * 0.999;
    for _ in 0..40 {
        if let Positivity::Certified(_) = prove_lower_bound(p, 2, a, b, c)? {
            return Ok(c);
        }
        c *= 0.9;
    }
    Err(LocalizeError::NonPositiveSecondDerivative)
}

/// Sign of `P′(x)` if certain.
fn derivative_sign(p: &SignedPolynomial, x: f64) -> Result<Option<Ordering>> {
    let e = eval_poly(p, 1, &x);
    if e.lower() > 0.0 {
        return Ok(Some(Ordering::Greater));
    }
    if e.upper() < 0.0 {
        return Ok(Some(Ordering::Less));
    }
    let exact = exact_eval(p, 1, &rat(x)?);
    Ok(Some(exact.cmp(&BigRational::zero())))
}

fn bracket_critical_point(
    p: &SignedPolynomial,
    a: f64,
    b: f64,
) -> std::result::Result<(f64, f64), LocalizeError> {
    if derivative_sign(p, a)? != Some(Ordering::Less)
        || derivative_sign(p, b)? != Some(Ordering::Greater)
    {
        return Err(LocalizeError::NoSignChange);
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = lo + (hi - lo) / 2.0;
        if !(lo < mid && mid < hi) {
            break;
        }
        match derivative_sign(p, mid)? {
            Some(Ordering::Less) => lo = mid,
            Some(Ordering::Greater) => hi = mid,
            _ => return Ok((mid.next_down(), mid.next_up())),
        }
    }
    Ok((lo, hi))
}

/// Continues [`bracket_critical_point`] in exact dyadic arithmetic for
/// [`FINE_STEPS`] further halvings; `None` without a certified sign change.
fn fine_bracket(
    p: &SignedPolynomial,
    a: f64,
    b: f64,
) -> Result<Option<(BigRational, BigRational)>> {
    let (lo, hi) = match bracket_critical_point(p, a, b) {
        Ok(br) => br,
        Err(LocalizeError::Invalid(e)) => return Err(e),
        Err(_) => return Ok(None),
    };
    let (mut lo, mut hi) = (rat(lo)?, rat(hi)?);
    let two = BigRational::from_integer(2.into());
    for _ in 0..FINE_STEPS {
        let mid = (&lo + &hi) / &two;
        match exact_eval(p, 1, &mid).cmp(&BigRational::zero()) {
            Ordering::Less => lo = mid,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return Ok(Some((mid.clone(), mid))),
        }
    }
    Ok(Some((lo, hi)))
}

/// `(1+1/k)^{−k/2}·(k+1)^{−1/2}`: a lower bound for `|α₁⋯α_k|` over zeros in
/// the unit disk (with multiplicity) of series with coefficients in `[−1, 1]`.
pub fn min_root_product(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let kf = k as f64;
    Ok((1.0 + 1.0 / kf).powf(-kf / 2.0) / (kf + 1.0).sqrt())
}

/// `λ^k ≥ 1/2`, decided exactly. Then `λ` is a zero of multiplicity `k` of
/// some series in the `{−1, 0, 1}` class.
pub fn trivial_membership(lambda: f64, k: u32) -> Result<bool> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("need 0 < λ < 1, got {lambda}")));
    }
    let l = rat(lambda)?;
    let mut pw = BigRational::one();
    for _ in 0..k {
        pw = pw * &l;
    }
    Ok(pw * BigRational::from_integer(2.into()) >= BigRational::one())
}
