//! Branch-and-bound exclusion of multiple zeros on an interval.
//!
//! If a class member `f` has a zero of multiplicity `k` at `r ∈ (a,b)`, then
//! its degree-`n` initial part `P` satisfies, for every `0 ≤ i < k`,
//!
//! ```text
//! |P⁽ⁱ⁾(b)| ≤ |P⁽ⁱ⁾(r) − f⁽ⁱ⁾(r)| + (b − r)·sup|P⁽ⁱ⁺¹⁾|
//!          < tail_sup(i, n, b, h) + (b − a)·deriv_sup(i + 1, b, h).
//! ```
//!
//! A prefix violating one of these inequalities cannot be the start of such
//! an `f`. The search walks the tree of one-coefficient extensions depth
//! first and reports `Excluded` when every branch dies before the depth
//! limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{add_up, gamma, mul_up, Scalar};
use crate::series::{
    eval_poly, falling_factorial, tail_sup, CoefficientSet, DerivBound, FpModel,
    SignedPolynomial, MAX_ORDER,
};

/// Flat slack of the compatibility floating-point model, in `b⁻ⁿ`-scaled units.
pub const FLAT_SLACK: f64 = 1e-14;

/// Knobs shared by every exclusion inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestSettings {
    pub fp_model: FpModel,
    pub deriv_bound: DerivBound,
}

impl Default for TestSettings {
    fn default() -> Self {
        Self {
            fp_model: FpModel::Horner,
            deriv_bound: DerivBound::Class,
        }
    }
}

/// One cell of an exclusion search.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionQuery<S> {
    pub a: S,
    pub b: S,
    pub multiplicity: usize,
    pub set: CoefficientSet,
    pub depth: usize,
}

impl<S: Scalar> ExclusionQuery<S> {
    pub fn new(a: S, b: S, multiplicity: usize, set: CoefficientSet, depth: usize) -> Result<Self> {
        let q = Self {
            a,
            b,
            multiplicity,
            set,
            depth,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        validate_interval(&self.a, &self.b)?;
        if self.multiplicity == 0 || self.multiplicity >= MAX_ORDER {
            return Err(Error::Domain(format!(
                "multiplicity must be in 1..{MAX_ORDER}, got {}",
                self.multiplicity
            )));
        }
        Ok(())
    }
}

pub(crate) fn validate_interval<S: Scalar>(a: &S, b: &S) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && *a > S::zero() && a < b && *b < S::one()) {
        return Err(Error::Domain(format!("need 0 < a < b < 1, got ({a}, {b})")));
    }
    Ok(())
}

/// Result of [`prune`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "witness", rename_all = "lowercase")]
pub enum PruneOutcome {
    /// No class member has a zero of the requested multiplicity in the cell.
    Excluded,
    /// This prefix passed every test down to the depth limit.
    Survivor(SignedPolynomial),
}

impl PruneOutcome {
    pub fn is_excluded(&self) -> bool {
        matches!(self, PruneOutcome::Excluded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PruneLimits {
    /// Maximum number of tree nodes expanded before aborting.
    pub max_nodes: u64,
}

impl Default for PruneLimits {
    fn default() -> Self {
        Self {
            max_nodes: 2_000_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReport {
    pub outcome: PruneOutcome,
    pub nodes: u64,
}

fn width_up<S: Scalar>(a: &S, b: &S) -> S {
    (b.clone() - a.clone()).next_up()
}

/// Right-hand side `tail_sup(i,n,b,h) + (b−a)·D(i+1)` without fp slack.
fn threshold<S: Scalar>(
    i: usize,
    n: usize,
    a: &S,
    b: &S,
    h: i64,
    bound: DerivBound,
) -> Result<S> {
    let tail = tail_sup(i, n, b, h)?;
    let d = bound.sup(i + 1, b, h)?;
    Ok(add_up(tail, mul_up(width_up(a, b), d)))
}

fn flat_slack<S: Scalar>(b: &S, n: usize) -> S {
    let mut p = S::from_f64(FLAT_SLACK);
    for _ in 0..n {
        p = p * b.clone();
    }
    p
}

/// The `k` inequalities for a single prefix, evaluated by Horner's rule.
///
/// Returns `true` (pass) when every inequality holds, so the prefix may
/// still extend to a series with a multiplicity-`k` zero in `(a, b)`.
/// `false` certifies that no such extension exists.
pub fn exclusion_tests<S: Scalar>(
    p: &SignedPolynomial,
    a: &S,
    b: &S,
    multiplicity: usize,
    set: &CoefficientSet,
    settings: TestSettings,
) -> Result<bool> {
    validate_interval(a, b)?;
    let n = p.degree();
    let h = set.height();
    for i in 0..multiplicity {
        let ev = eval_poly(p, i, b);
        let slack = match settings.fp_model {
            FpModel::Horner => ev.fp_slack.clone(),
            FpModel::Flat14 => flat_slack(b, n),
        };
        let rhs = add_up(threshold(i, n, a, b, h, settings.deriv_bound)?, slack);
        if ev.value.abs() >= rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Depth-first exclusion search below `prefix`.
///
/// Children are tried in ascending coefficient order (for `{−1,0,1}`:
/// −1, 0, 1), which fixes the reported survivor. Evaluation is incremental:
/// each node adds one term `c·(m)ⱼ·b^{m−j}` to the running value of each
/// derivative, and the fp slack is `γ_{2n+2}` times the running absolute sum,
/// which dominates the rounding of that summation order.
pub fn prune<S: Scalar>(
    query: &ExclusionQuery<S>,
    prefix: &SignedPolynomial,
    settings: TestSettings,
    limits: PruneLimits,
) -> Result<PruneReport> {
    query.validate()?;
    prefix.check_in(&query.set)?;
    let mut engine = Engine::new(query, prefix, settings, limits)?;
    let survived = engine.search(0, prefix.degree())?;
    let outcome = if survived {
        let mut coeffs = prefix.coeffs().to_vec();
        coeffs.extend_from_slice(&engine.path);
        PruneOutcome::Survivor(SignedPolynomial::from_coeffs(coeffs)?)
    } else {
        PruneOutcome::Excluded
    };
    Ok(PruneReport {
        outcome,
        nodes: engine.nodes,
    })
}

struct Engine<'a, S> {
    k: usize,
    depth: usize,
    base: usize,
    allowed: &'a [i64],
    /// `term[m*k + j] = fl((m)ⱼ · b^{m−j})`
    term: Vec<S>,
    /// thresholds indexed by `(n − base)*k + j`
    rhs: Vec<S>,
    /// slack multiplier per degree (`Horner`) or absolute slack (`Flat14`)
    slack: Vec<S>,
    flat: bool,
    vals: Vec<S>,
    abs: Vec<S>,
    path: Vec<i64>,
    nodes: u64,
    max_nodes: u64,
}

impl<'a, S: Scalar> Engine<'a, S> {
    fn new(
        q: &'a ExclusionQuery<S>,
        prefix: &SignedPolynomial,
        settings: TestSettings,
        limits: PruneLimits,
    ) -> Result<Self> {
        let k = q.multiplicity;
        let base = prefix.degree();
        let top = base + q.depth;
        let h = q.set.height();

        let mut pw = Vec::with_capacity(top + 1);
        pw.push(S::one());
        for t in 1..=top {
            let prev: S = pw[t - 1].clone();
            pw.push(prev * q.b.clone());
        }
        let mut term = Vec::with_capacity((top + 1) * k);
        for m in 0..=top {
            for j in 0..k {
                let ff = falling_factorial(m as u64, j).expect("small falling factorial");
                if ff == 0 {
                    term.push(S::zero());
                } else {
                    term.push(S::from_int(ff) * pw[m - j].clone());
                }
            }
        }
        let mut rhs = Vec::with_capacity((q.depth + 1) * k);
        let mut slack = Vec::with_capacity(q.depth + 1);
        let flat = settings.fp_model == FpModel::Flat14;
        for n in base..=top {
            for j in 0..k {
                rhs.push(threshold(j, n, &q.a, &q.b, h, settings.deriv_bound)?);
            }
            slack.push(if flat {
                flat_slack(&q.b, n)
            } else {
                let g = gamma::<S>(2 * n + 2);
                let two = S::one() + S::one();
                mul_up(g.clone(), (S::one() + two * g).next_up())
            });
        }

        let mut vals = vec![S::zero(); (q.depth + 1) * k];
        let mut abs = vec![S::zero(); (q.depth + 1) * k];
        for (m, &c) in prefix.coeffs().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let cs = S::from_int(c as i128);
            for j in 0..k {
                let t = term[m * k + j].clone();
                vals[j] = vals[j].clone() + cs.clone() * t.clone();
                abs[j] = abs[j].clone() + cs.abs() * t;
            }
        }

        Ok(Self {
            k,
            depth: q.depth,
            base,
            allowed: q.set.allowed(),
            term,
            rhs,
            slack,
            flat,
            vals,
            abs,
            path: Vec::with_capacity(q.depth),
            nodes: 0,
            max_nodes: limits.max_nodes,
        })
    }

    fn passes(&self, level: usize, n: usize) -> bool {
        let row = n - self.base;
        for j in 0..self.k {
            let idx = level * self.k + j;
            let slack = if self.flat {
                self.slack[row].clone()
            } else {
                mul_up(self.slack[row].clone(), self.abs[idx].clone())
            };
            let bound = add_up(self.rhs[row * self.k + j].clone(), slack);
            if self.vals[idx].abs() >= bound {
                return false;
            }
        }
        true
    }

    fn search(&mut self, level: usize, n: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::ResourceLimit { nodes: self.nodes });
        }
        if !self.passes(level, n) {
            return Ok(false);
        }
        if level == self.depth {
            return Ok(true);
        }
        let m = n + 1;
        let k = self.k;
        for ci in 0..self.allowed.len() {
            let c = self.allowed[ci];
            let (cur, next) = (level * k, (level + 1) * k);
            for j in 0..k {
                if c == 0 {
                    self.vals[next + j] = self.vals[cur + j].clone();
                    self.abs[next + j] = self.abs[cur + j].clone();
                } else {
                    let t = self.term[m * k + j].clone();
                    let cs = S::from_int(c as i128);
                    self.vals[next + j] = self.vals[cur + j].clone() + cs.clone() * t.clone();
                    self.abs[next + j] = self.abs[cur + j].clone() + cs.abs() * t;
                }
            }
            self.path.push(c);
            if self.search(level + 1, m)? {
                return Ok(true);
            }
            self.path.pop();
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn unit_query(a: f64, b: f64, k: usize, depth: usize) -> ExclusionQuery<f64> {
        ExclusionQuery::new(a, b, k, CoefficientSet::unit(), depth).unwrap()
    }

    #[test]
    fn constant_prefix_survives_near_alpha2() {
        let set = CoefficientSet::unit();
        let pass = exclusion_tests(
            &SignedPolynomial::one(),
            &0.668,
            &0.6681,
            2,
            &set,
            TestSettings::default(),
        )
        .unwrap();
        assert!(pass);
    }

    #[test]
    fn one_plus_x_is_excluded() {
        let set = CoefficientSet::unit();
        let p: SignedPolynomial = "11".parse().unwrap();
        let pass =
            exclusion_tests(&p, &0.66, &0.661, 1, &set, TestSettings::default()).unwrap();
        assert!(!pass);
    }

    #[test]
    fn depth_zero_returns_the_prefix() {
        let q = unit_query(0.668, 0.6681, 2, 0);
        let r = prune(&q, &SignedPolynomial::one(), TestSettings::default(), PruneLimits::default())
            .unwrap();
        assert_eq!(r.outcome, PruneOutcome::Survivor(SignedPolynomial::one()));
    }

    #[test]
    fn trivial_region_never_excluded() {
        let q = unit_query(0.9, 0.91, 2, 10);
        let r = prune(&q, &SignedPolynomial::one(), TestSettings::default(), PruneLimits::default())
            .unwrap();
        match r.outcome {
            PruneOutcome::Survivor(p) => assert_eq!(p.degree(), 10),
            PruneOutcome::Excluded => panic!("excluded a cell inside the trivial region"),
        }
    }

    #[test]
    fn small_radius_is_excluded_quickly() {
        // below 1/2 no series in the class has a zero at all
        let q = unit_query(0.3, 0.31, 1, 20);
        let r = prune(&q, &SignedPolynomial::one(), TestSettings::default(), PruneLimits::default())
            .unwrap();
        assert!(r.outcome.is_excluded());
    }

    #[test]
    fn node_limit_aborts() {
        let q = unit_query(0.66, 0.6601, 2, 30);
        let err = prune(
            &q,
            &SignedPolynomial::one(),
            TestSettings::default(),
            PruneLimits { max_nodes: 100 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(ExclusionQuery::new(0.6, 0.5, 2, CoefficientSet::unit(), 3).is_err());
        assert!(ExclusionQuery::new(0.6, 1.0, 2, CoefficientSet::unit(), 3).is_err());
        assert!(ExclusionQuery::new(0.5, 0.6, 0, CoefficientSet::unit(), 3).is_err());
        let q = unit_query(0.5, 0.6, 1, 3);
        let bad = SignedPolynomial::from_coeffs(vec![1, 2]).unwrap();
        assert!(prune(&q, &bad, TestSettings::default(), PruneLimits::default()).is_err());
    }

    #[test]
    fn exact_and_float_agree_on_a_small_cell() {
        let set = CoefficientSet::unit();
        let (a, b) = (0.6684, 0.6686);
        let qf = ExclusionQuery::new(a, b, 2, set.clone(), 8).unwrap();
        let qr = ExclusionQuery::new(
            BigRational::from_float(a).unwrap(),
            BigRational::from_float(b).unwrap(),
            2,
            set,
            8,
        )
        .unwrap();
        let s = TestSettings::default();
        let rf = prune(&qf, &SignedPolynomial::one(), s, PruneLimits::default()).unwrap();
        let rr = prune(&qr, &SignedPolynomial::one(), s, PruneLimits::default()).unwrap();
        assert_eq!(rf.outcome, rr.outcome);
    }
}
