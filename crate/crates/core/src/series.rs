//! Coefficient classes, signed polynomials and rigorous bounds for power
//! series `1 + Σ aₙxⁿ` with coefficients drawn from a finite integer set.
//!
//! Every evaluation comes with a forward-error bound (`fp_slack`), and the
//! tail/derivative suprema are rounded upward, so comparisons built on them
//! are one-sided certificates rather than estimates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{gamma, inflate, mul_up, Scalar};

/// Largest derivative order the closed-form bounds accept.
pub const MAX_ORDER: usize = 20;

/// Allowed coefficients beyond the constant term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoefficientSet {
    allowed: Vec<i64>,
    height: i64,
}

impl CoefficientSet {
    pub fn new(values: &[i64]) -> Result<Self> {
        let mut allowed = values.to_vec();
        allowed.sort_unstable();
        allowed.dedup();
        if !allowed.contains(&0) {
            return Err(Error::InvalidCoefficientSet("must contain 0".into()));
        }
        if allowed.len() < 2 {
            return Err(Error::InvalidCoefficientSet(
                "needs a nonzero coefficient".into(),
            ));
        }
        let height = allowed.iter().map(|c| c.abs()).max().unwrap_or(0);
        Ok(Self { allowed, height })
    }

    /// `{−1, 0, 1}`.
    pub fn unit() -> Self {
        Self::new(&[-1, 0, 1]).expect("valid set")
    }

    /// `{−2, −1, 0, 1, 2}`.
    pub fn double() -> Self {
        Self::new(&[-2, -1, 0, 1, 2]).expect("valid set")
    }

    /// Parses the short names used on the command line and in certificates.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "b1" => Ok(Self::unit()),
            "b2" => Ok(Self::double()),
            other => Err(Error::InvalidCoefficientSet(format!(
                "unknown set {other:?} (expected b1 or b2)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        if *self == Self::unit() {
            "b1".into()
        } else if *self == Self::double() {
            "b2".into()
        } else {
            let parts: Vec<String> = self.allowed.iter().map(|c| c.to_string()).collect();
            format!("{{{}}}", parts.join(","))
        }
    }

    /// Allowed values in ascending order; this is the branching order of the
    /// exclusion search.
    pub fn allowed(&self) -> &[i64] {
        &self.allowed
    }

    pub fn height(&self) -> i64 {
        self.height
    }

    pub fn contains(&self, c: i64) -> bool {
        self.allowed.binary_search(&c).is_ok()
    }
}

impl Serialize for CoefficientSet {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.allowed.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        CoefficientSet::new(&v).map_err(serde::de::Error::custom)
    }
}

/// Polynomial `a₀ + a₁x + … + aₙxⁿ` with `a₀ = 1`: the initial part of a
/// series in the class. The degree is syntactic (trailing zeros count).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPolynomial {
    coeffs: Vec<i64>,
}

impl SignedPolynomial {
    /// The constant polynomial `1`.
    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// Builds a polynomial whose coefficients after the constant term lie in `set`.
    pub fn new(coeffs: Vec<i64>, set: &CoefficientSet) -> Result<Self> {
        let p = Self::from_coeffs(coeffs)?;
        p.check_in(set)?;
        Ok(p)
    }

    /// Builds a polynomial without checking membership in a coefficient set.
    pub fn from_coeffs(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.first() != Some(&1) {
            return Err(Error::MissingLeadingOne);
        }
        Ok(Self { coeffs })
    }

    pub fn check_in(&self, set: &CoefficientSet) -> Result<()> {
        for (index, &value) in self.coeffs.iter().enumerate().skip(1) {
            if !set.contains(value) {
                return Err(Error::CoefficientOutsideSet { value, index });
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Largest `|aᵢ|` over the whole polynomial.
    pub fn height(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or(1)
    }

    /// `P(x) + c·x^{n+1}`.
    pub fn extended(&self, c: i64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.push(c);
        Self { coeffs }
    }

    /// `P(x) + c·x^m`, padding with zeros as needed.
    pub fn with_term(&self, m: usize, c: i64) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() <= m {
            coeffs.resize(m + 1, 0);
        }
        coeffs[m] += c;
        Self { coeffs }
    }

    /// The initial part of degree `n` (`n` must not exceed the degree).
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            coeffs: self.coeffs[..=n.min(self.degree())].to_vec(),
        }
    }

    /// True if `self` is an initial part of `other`.
    pub fn is_prefix_of(&self, other: &SignedPolynomial) -> bool {
        other.coeffs.starts_with(&self.coeffs)
    }

    /// Parses and validates against `set`.
    pub fn parse(text: &str, set: &CoefficientSet) -> Result<Self> {
        let p: Self = text.parse()?;
        p.check_in(set)?;
        Ok(p)
    }

    /// Coefficients of the `order`-th derivative with an upper bound on the
    /// roundings their conversion to `S` costs.
    fn derivative_coeffs<S: Scalar>(&self, order: usize) -> (Vec<S>, usize) {
        let mut extra = 0;
        let coeffs = (order..=self.degree())
            .map(|k| {
                let a = self.coeffs[k] as i128;
                match falling_factorial(k as u64, order).and_then(|f| f.checked_mul(a)) {
                    Some(c) if c.abs() <= S::MAX_EXACT_INT => S::from_int(c),
                    Some(c) => {
                        extra = extra.max(1);
                        S::from_int(c)
                    }
                    None => {
                        extra = extra.max(order + 1);
                        let mut acc = S::from_int(a);
                        for t in 0..order {
                            acc = acc * S::from_int((k - t) as i128);
                        }
                        acc
                    }
                }
            })
            .collect();
        (coeffs, extra)
    }
}

impl FromStr for SignedPolynomial {
    type Err = Error;

    /// Accepts the symbol alphabet (`0`–`9`, and `o` or `ō` for −1) or a
    /// comma-separated integer list, optionally in parentheses.
    fn from_str(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let inner = trimmed
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(trimmed);
        let coeffs = if inner.contains(',') {
            inner
                .split(',')
                .enumerate()
                .map(|(position, tok)| {
                    let tok = tok.trim().replace('\u{2212}', "-");
                    tok.parse::<i64>().map_err(|_| Error::InvalidSymbol {
                        symbol: tok.clone(),
                        position,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            let mut out = Vec::new();
            let mut chars = inner.chars().peekable();
            while let Some(ch) = chars.next() {
                let position = out.len();
                let value = match ch {
                    'o' | '\u{014D}' => {
                        // decomposed form: 'o' followed by a combining macron
                        if chars.peek() == Some(&'\u{0304}') {
                            chars.next();
                        }
                        -1
                    }
                    d if d.is_ascii_digit() => d.to_digit(10).unwrap() as i64,
                    c if c.is_whitespace() => continue,
                    other => {
                        return Err(Error::InvalidSymbol {
                            symbol: other.to_string(),
                            position,
                        })
                    }
                };
                out.push(value);
            }
            out
        };
        Self::from_coeffs(coeffs)
    }
}

impl fmt::Display for SignedPolynomial {
    /// Symbol form when every coefficient is a digit or −1, otherwise a
    /// comma-separated list. Both forms parse back to the same polynomial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.iter().all(|&c| (-1..=9).contains(&c)) {
            for &c in &self.coeffs {
                if c == -1 {
                    f.write_str("o")?;
                } else {
                    write!(f, "{c}")?;
                }
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl Serialize for SignedPolynomial {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `k!/(k−i)!`, or `None` on overflow. Zero when `i > k`.
pub fn falling_factorial(k: u64, i: usize) -> Option<i128> {
    if i as u64 > k {
        return Some(0);
    }
    let mut acc: i128 = 1;
    for t in 0..i as u64 {
        acc = acc.checked_mul((k - t) as i128)?;
    }
    Some(acc)
}

fn binomial(n: u64, r: u64) -> Option<i128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: i128 = 1;
    for t in 0..r {
        acc = acc.checked_mul((n - t) as i128)? / (t as i128 + 1);
    }
    Some(acc)
}

/// A computed value together with a bound on its distance from the exact one.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult<S> {
    pub value: S,
    pub fp_slack: S,
}

impl<S: Scalar> EvalResult<S> {
    /// Certified lower bound on the exact value.
    pub fn lower(&self) -> S {
        (self.value.clone() - self.fp_slack.clone()).next_down()
    }

    /// Certified upper bound on the exact value.
    pub fn upper(&self) -> S {
        (self.value.clone() + self.fp_slack.clone()).next_up()
    }
}

/// Horner evaluation of `P⁽ⁱ⁾(x)`.
///
/// The slack is `γ_{2m}·Σ|cₖ||x|ᵏ` for the derivative's coefficients `cₖ`
/// (degree `m`), with the absolute sum itself bounded from above, plus any
/// roundings spent converting coefficients too large to represent exactly.
pub fn eval_poly<S: Scalar>(p: &SignedPolynomial, order: usize, x: &S) -> EvalResult<S> {
    if order > p.degree() {
        return EvalResult {
            value: S::zero(),
            fp_slack: S::zero(),
        };
    }
    let (coeffs, extra) = p.derivative_coeffs::<S>(order);
    let m = coeffs.len() - 1;
    let ax = x.abs();
    let mut value = coeffs[m].clone();
    let mut abs = coeffs[m].abs();
    for c in coeffs[..m].iter().rev() {
        value = value * x.clone() + c.clone();
        abs = abs * ax.clone() + c.abs();
    }
    let ops = 2 * m + extra;
    let fp_slack = if ops == 0 || S::EXACT {
        S::zero()
    } else {
        mul_up(gamma::<S>(ops), inflate(abs, ops))
    };
    EvalResult { value, fp_slack }
}

fn check_radius<S: Scalar>(b: &S) -> Result<()> {
    if !b.is_finite() || *b <= S::zero() || *b >= S::one() {
        return Err(Error::Domain(format!("need 0 < b < 1, got {b}")));
    }
    Ok(())
}

fn check_order(i: usize) -> Result<()> {
    if i > MAX_ORDER {
        return Err(Error::Domain(format!(
            "derivative order {i} exceeds {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// Upper bound on `sup_{0<x≤b} |f⁽ⁱ⁾(x) − P⁽ⁱ⁾(x)|` over all class members
/// `f` extending a degree-`m` prefix `P`, for coefficients of height `h`.
///
/// Exact value: `h·Σ_{k>m} k!/(k−i)!·b^{k−i}`. It is evaluated through the
/// all-positive identity
/// `Σ_{k≥N} (k)ᵢ b^{k−i} = i!·Σ_{l} C(N, i−l)·b^{N−i+l}/(1−b)^{l+1}`
/// (`N = max(m+1, i)`, since terms below `i` vanish) so nothing cancels,
/// then rounded upward.
pub fn tail_sup<S: Scalar>(i: usize, m: usize, b: &S, h: i64) -> Result<S> {
    check_radius(b)?;
    check_order(i)?;
    let n = (m as u64 + 1).max(i as u64);
    let one_minus = S::one() - b.clone();
    let first_l = i.saturating_sub(n as usize);
    let mut sum = S::zero();
    let mut ops = 0usize;
    for l in first_l..=i {
        let c = binomial(n, (i - l) as u64).expect("small binomial");
        if c == 0 {
            continue;
        }
        let exp = n as usize + l - i;
        let (num, r1) = crate::scalar::pow_counted(b, exp);
        let (den, r2) = crate::scalar::pow_counted(&one_minus, l + 1);
        sum = sum + S::from_int(c) * num / den;
        ops = ops.max(r1 + r2 + 4);
    }
    let scale = S::from_int(h as i128 * falling_factorial(i as u64, i).expect("i! fits"));
    // one more rounding for 1 − b, one per summand, one for the scale
    Ok(inflate(sum * scale, ops + i + 4))
}

/// Upper bound `h·i!/(1−b)^{i+1}` on `sup_{0≤x≤b} |f⁽ⁱ⁾(x)|` over the class.
pub fn deriv_sup<S: Scalar>(i: usize, b: &S, h: i64) -> Result<S> {
    check_radius(b)?;
    check_order(i)?;
    let one_minus = S::one() - b.clone();
    let (den, r) = crate::scalar::pow_counted(&one_minus, i + 1);
    let num = S::from_int(h as i128 * falling_factorial(i as u64, i).expect("i! fits"));
    Ok(inflate(num / den, r + 3))
}

/// Which constant multiplies the interval width in the exclusion inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivBound {
    /// `h·i!/(1−b)^{i+1}`, a valid bound for the whole class.
    Class,
    /// `h/(i·(1−b)^{i+1})`, the smaller constant used in the published
    /// tables. It is not a valid supremum for `i ≥ 2`; kept for regression
    /// against those tables only.
    Published,
}

impl DerivBound {
    pub fn sup<S: Scalar>(self, i: usize, b: &S, h: i64) -> Result<S> {
        match self {
            DerivBound::Class => deriv_sup(i, b, h),
            DerivBound::Published => {
                check_radius(b)?;
                check_order(i)?;
                let one_minus = S::one() - b.clone();
                let (den, r) = crate::scalar::pow_counted(&one_minus, i + 1);
                let num = S::from_int(h as i128);
                let den = den * S::from_int(i.max(1) as i128);
                Ok(inflate(num / den, r + 4))
            }
        }
    }
}

/// How the floating-point error of the left-hand sides is accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FpModel {
    /// Computed forward-error bound for the evaluation scheme actually used.
    Horner,
    /// Flat `10⁻¹⁴` added to the `b⁻ⁿ`-scaled inequalities, as in the
    /// published implementation.
    Flat14,
}

impl FpModel {
    pub fn name(self) -> &'static str {
        match self {
            FpModel::Horner => "horner",
            FpModel::Flat14 => "flat14",
        }
    }
}

impl FromStr for FpModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "horner" => Ok(FpModel::Horner),
            "flat14" => Ok(FpModel::Flat14),
            other => Err(Error::Domain(format!("unknown fp model {other:?}"))),
        }
    }
}

impl FromStr for DerivBound {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "class" => Ok(DerivBound::Class),
            "published" => Ok(DerivBound::Published),
            other => Err(Error::Domain(format!("unknown derivative bound {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Signed;

    #[test]
    fn constant_polynomial_is_exact() {
        let r = eval_poly(&SignedPolynomial::one(), 0, &0.9f64);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.fp_slack, 0.0);
    }

    #[test]
    fn small_polynomial_value() {
        let p = SignedPolynomial::from_coeffs(vec![1, -2, -2]).unwrap();
        let r = eval_poly(&p, 0, &0.5f64);
        assert_eq!(r.value, -0.5);
        assert!(r.fp_slack >= 0.0 && r.fp_slack < 1e-14);
    }

    #[test]
    fn derivative_beyond_degree_is_zero() {
        let p = SignedPolynomial::from_coeffs(vec![1, 1]).unwrap();
        let r = eval_poly(&p, 2, &0.3f64);
        assert_eq!((r.value, r.fp_slack), (0.0, 0.0));
    }

    #[test]
    fn first_derivative() {
        // 1 + x − x³ → 1 − 3x²
        let p = SignedPolynomial::from_coeffs(vec![1, 1, 0, -1]).unwrap();
        let r = eval_poly(&p, 1, &0.5f64);
        assert!((r.value - 0.25).abs() <= r.fp_slack + 1e-300);
    }

    #[test]
    fn tail_geometric() {
        let t: f64 = tail_sup(0, 3, &0.5, 1).unwrap();
        assert!(t >= 0.125 && t < 0.125 * (1.0 + 1e-13));
    }

    #[test]
    fn tail_first_derivative() {
        let t: f64 = tail_sup(1, 1, &0.5, 1).unwrap();
        assert!(t >= 3.0 && t < 3.0 * (1.0 + 1e-13));
    }

    #[test]
    fn tail_exact_in_rationals() {
        let half = BigRational::new(1.into(), 2.into());
        let t = tail_sup(1, 1, &half, 1).unwrap();
        assert_eq!(t, BigRational::from_integer(3.into()));
        let t = tail_sup(2, 0, &half, 1).unwrap();
        // Σ_{k≥1} k(k−1)/2^{k−2} = 2/(1/2)³ = 16
        assert_eq!(t, BigRational::from_integer(16.into()));
    }

    #[test]
    fn tail_when_prefix_shorter_than_order() {
        // i=3, m=1: Σ_{k≥2} (k)₃ b^{k−3} is the full third-derivative sum
        let b = 0.4f64;
        let t: f64 = tail_sup(3, 1, &b, 1).unwrap();
        let want = 6.0 / (1.0 - b).powi(4);
        assert!((t - want).abs() < 1e-12 * want && t >= want * (1.0 - 1e-15));
    }

    #[test]
    fn deriv_sup_values() {
        let d: f64 = deriv_sup(1, &0.5, 1).unwrap();
        assert!((d - 4.0).abs() < 1e-14 && d >= 4.0);
        let d: f64 = deriv_sup(2, &0.5, 1).unwrap();
        assert!((d - 16.0).abs() < 1e-13 && d >= 16.0);
    }

    #[test]
    fn radius_out_of_range_is_rejected() {
        assert!(tail_sup(0, 3, &1.0f64, 1).is_err());
        assert!(deriv_sup(1, &1.5f64, 1).is_err());
        assert!(tail_sup(0, 3, &0.0f64, 1).is_err());
    }

    #[test]
    fn published_constant() {
        let d: f64 = DerivBound::Published.sup(2, &0.5, 1).unwrap();
        // 1/(2·(1/2)³) = 4
        assert!((d - 4.0).abs() < 1e-13);
        let c: f64 = DerivBound::Class.sup(1, &0.5, 1).unwrap();
        let p: f64 = DerivBound::Published.sup(1, &0.5, 1).unwrap();
        assert!(c >= 4.0 && p >= 4.0);
        assert!((c - p).abs() < 1e-13);
    }

    #[test]
    fn parse_symbols() {
        let p: SignedPolynomial = "1ooo1".parse().unwrap();
        assert_eq!(p.coeffs(), &[1, -1, -1, -1, 1]);
        assert_eq!(p.to_string(), "1ooo1");
        let p: SignedPolynomial = "1".parse().unwrap();
        assert_eq!(p.degree(), 0);
        let p: SignedPolynomial = "1\u{014D}0".parse().unwrap();
        assert_eq!(p.coeffs(), &[1, -1, 0]);
        let p: SignedPolynomial = "1o\u{0304}0".parse().unwrap();
        assert_eq!(p.coeffs(), &[1, -1, 0]);
    }

    #[test]
    fn parse_comma_list() {
        let text = "(1, \u{2212}2, -1, 1, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 2, 1, 1, 2, -2, -2, -1, -2, 2, -1)";
        let p = SignedPolynomial::parse(text, &CoefficientSet::double()).unwrap();
        assert_eq!(p.degree(), 26);
        let back: SignedPolynomial = p.to_string().parse().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            "1x0".parse::<SignedPolynomial>(),
            Err(Error::InvalidSymbol { position: 1, .. })
        ));
        assert_eq!(
            "0o1".parse::<SignedPolynomial>(),
            Err(Error::MissingLeadingOne)
        );
        assert_eq!(
            SignedPolynomial::parse("1o2", &CoefficientSet::unit()),
            Err(Error::CoefficientOutsideSet { value: 2, index: 2 })
        );
        assert_eq!("".parse::<SignedPolynomial>(), Err(Error::MissingLeadingOne));
    }

    #[test]
    fn coefficient_sets() {
        assert_eq!(CoefficientSet::unit().height(), 1);
        assert_eq!(CoefficientSet::double().height(), 2);
        assert!(CoefficientSet::new(&[1, 2]).is_err());
        assert!(CoefficientSet::new(&[0]).is_err());
        assert_eq!(CoefficientSet::by_name("b2").unwrap().name(), "b2");
        assert!(CoefficientSet::by_name("b3").is_err());
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling_factorial(5, 2), Some(20));
        assert_eq!(falling_factorial(1, 2), Some(0));
        assert_eq!(falling_factorial(7, 0), Some(1));
        assert_eq!(binomial(6, 2), Some(15));
    }

    #[test]
    fn f32_slack_is_honest() {
        let p: SignedPolynomial = "1ooo1011011011101111".parse().unwrap();
        let x = 0.66f32;
        let r = eval_poly(&p, 1, &x);
        let exact = eval_poly(&p, 1, &BigRational::from_float(x).unwrap()).value;
        let err = (BigRational::from_float(r.value).unwrap() - exact).abs();
        assert!(err <= BigRational::from_float(r.fp_slack).unwrap());
    }
}
