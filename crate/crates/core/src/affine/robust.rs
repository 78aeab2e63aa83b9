//! How far the linear part may move before the covering breaks, and the
//! parameter-space consequences.
//!
//! For `‖T′ − T‖ < η` the chain bounds `S = (T′)^{−j}Tʲ` and the offset `d`
//! of `(T′_u)^{−1}T_u`, and checks that they move `V` by less than the
//! distance from `V` to the complement of `U`. Every constant is recomputed
//! from the matrices; each inequality carries an additive guard.

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use super::linalg::{Mat2, Vec2};
use crate::error::{Error, Result};

/// Additive guard on every chain inequality.
pub const CHAIN_GUARD: f64 = 1e-12;

/// The perturbation radius the interior results are stated for.
pub const INTERIOR_ETA: f64 = 4e-6;

/// Inputs of [`robustness_eta`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainInput {
    pub t: Mat2<f64>,
    pub b: Vec2<f64>,
    pub p: Vec2<f64>,
    pub q: Vec2<f64>,
    pub scale: f64,
    pub j: u32,
}

impl Default for ChainInput {
    fn default() -> Self {
        let s = super::cover::CoveringSetup::default();
        Self {
            t: s.t,
            b: s.b,
            p: s.p,
            q: s.q,
            scale: s.scale,
            j: s.word_len as u32,
        }
    }
}

/// Each field is an upper bound for the quantity it names (the margin is a
/// lower bound).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessChain {
    pub eta: f64,
    /// `‖T‖ + η ≥ max(‖T‖, ‖T′‖)`.
    pub r_max: f64,
    /// `‖(T′)ʲ − Tʲ‖ ≤ j·r_max^{j−1}·η`.
    pub norm_r: f64,
    pub norm_tinv_j: f64,
    /// `‖T^{−j}‖/(1 − ‖T^{−j}‖‖R‖)`.
    pub norm_tpinv_j: f64,
    pub norm_s_minus_i: f64,
    pub norm_d: f64,
    /// `scale·max(‖p‖, ‖q‖)`, the largest norm of a point of `V`.
    pub rho_v: f64,
    pub delta: f64,
    pub delta_prime: f64,
    /// `((1 − scale)/2)/‖M⁻¹‖ ≤ dist(V, ℝ² ∖ U)`.
    pub margin: f64,
    pub verdict: bool,
}

/// Where the chain stopped making sense.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainBreak {
    #[error("‖T^(-j)‖·‖R‖ ≥ 1: the perturbed power may be singular")]
    Inverse,
    #[error("invalid input: {0}")]
    Input(String),
}

fn up(x: f64) -> f64 {
    // each step below has a handful of roundings; a relative 1e-14 bump
    // dominates them, and the guard covers the rest
    x * (1.0 + 1e-14) + f64::MIN_POSITIVE
}

/// Computes the chain for radius `eta`.
pub fn robustness_eta(input: &ChainInput, eta: f64) -> std::result::Result<RobustnessChain, ChainBreak> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(ChainBreak::Input(format!("eta must be positive, got {eta}")));
    }
    if input.j == 0 || !(0.0 < input.scale && input.scale < 1.0) {
        return Err(ChainBreak::Input("need j ≥ 1 and 0 < scale < 1".into()));
    }
    let j = input.j;
    let tinv = input
        .t
        .inverse()
        .ok_or_else(|| ChainBreak::Input("T is singular".into()))?;
    let minv = Mat2::from_columns(&input.p, &input.q)
        .inverse()
        .ok_or_else(|| ChainBreak::Input("p and q are parallel".into()))?;

    let r_max = up(input.t.norm_inf() + eta);
    let norm_r = up(j as f64 * r_max.powi(j as i32 - 1) * eta);
    let norm_tinv_j = up(tinv.pow(j).norm_inf());
    let prod = up(norm_tinv_j * norm_r);
    if prod + CHAIN_GUARD >= 1.0 {
        return Err(ChainBreak::Inverse);
    }
    let norm_tpinv_j = up(norm_tinv_j / (1.0 - prod - CHAIN_GUARD));
    let norm_s_minus_i = up(norm_tpinv_j * norm_r);
    let sum: f64 = (1..j).map(|i| i as f64 * r_max.powi(i as i32 - 1)).sum();
    let norm_d = up(norm_tpinv_j * up(sum) * eta * input.b.norm_inf());
    let rho_v = up(input.scale * input.p.norm_inf().max(input.q.norm_inf()));
    let delta = up(norm_s_minus_i * rho_v);
    let delta_prime = up(delta + norm_d);
    let margin = ((1.0 - input.scale) / 2.0) / up(minv.norm_inf()) * (1.0 - 1e-14);
    let verdict = delta_prime + CHAIN_GUARD <= margin;
    Ok(RobustnessChain {
        eta,
        r_max,
        norm_r,
        norm_tinv_j,
        norm_tpinv_j,
        norm_s_minus_i,
        norm_d,
        rho_v,
        delta,
        delta_prime,
        margin,
        verdict,
    })
}

/// Largest `η` (to relative precision `2⁻⁴⁰`) for which the chain passes.
pub fn max_passing_eta(input: &ChainInput) -> Result<f64> {
    let passes = |eta: f64| matches!(robustness_eta(input, eta), Ok(c) if c.verdict);
    let mut lo = 1e-12;
    if !passes(lo) {
        return Err(Error::Domain("the chain fails even for tiny eta".into()));
    }
    let mut hi = 1.0;
    while passes(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Ok(lo);
        }
    }
    for _ in 0..200 {
        let mid = lo + (hi - lo) / 2.0;
        if !(lo < mid && mid < hi) || (hi - lo) <= lo * 2f64.powi(-40) {
            break;
        }
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Why the determinant criterion does not apply.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrivialError {
    #[error("matrix {index} is not contractive (spectral radius {radius})")]
    NotContractive { index: usize, radius: f64 },
}

fn exact_det(m: &Mat2<f64>) -> BigRational {
    let r = |x: f64| BigRational::from_float(x).expect("finite entry");
    r(m.a) * r(m.d) - r(m.b) * r(m.c)
}

/// `|det T₁| + |det T₂| ≥ 1`, decided exactly on the given entries. Then the
/// attractor of `{T₁x, T₂x + b}` is connected for every `b`.
pub fn trivial_connected(t1: &Mat2<f64>, t2: &Mat2<f64>) -> std::result::Result<bool, TrivialError> {
    for (index, m) in [t1, t2].into_iter().enumerate() {
        let radius = m.spectral_radius();
        if !(radius < 1.0) {
            return Err(TrivialError::NotContractive { index: index + 1, radius });
        }
    }
    Ok(exact_det(t1).abs() + exact_det(t2).abs() >= BigRational::one())
}

/// Which matrix family an interior test uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InteriorKind {
    /// `[[γ, 0.7], [0, λ]]`, `γ ≠ λ`: diagonalizable with real eigenvalues.
    Diag { gamma: f64, lambda: f64 },
    /// `[[ρ, 0.7], [−ε, ρ]]` with `ε = im²/0.7`: eigenvalues `ρ ± i·im`.
    Rotation { rho: f64, im: f64 },
    /// `[[λ, 0.7], [0, λ]]`: a Jordan block.
    Jordan { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorReport {
    pub matrix: Mat2<f64>,
    /// Upper bound for `‖M − T‖`.
    pub distance: f64,
    pub eta: f64,
    pub inside: bool,
}

/// Builds the matrix for `kind` and tests `‖M − T‖ < η`.
pub fn locus_interior_test(kind: InteriorKind, eta: f64) -> Result<InteriorReport> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let matrix = match kind {
        InteriorKind::Diag { gamma, lambda } => {
            if gamma == lambda {
                return Err(Error::Domain("diagonal case needs γ ≠ λ".into()));
            }
            Mat2::new(gamma, 0.7, 0.0, lambda)
        }
        InteriorKind::Rotation { rho, im } => {
            if !(im > 0.0) {
                return Err(Error::Domain("rotation case needs Im λ > 0".into()));
            }
            Mat2::new(rho, 0.7, -(im * im / 0.7), rho)
        }
        InteriorKind::Jordan { lambda } => Mat2::new(lambda, 0.7, 0.0, lambda),
    };
    let t = Mat2::new(s, 0.7, 0.0, s);
    // the rounding of 2^{-1/2}, of ε and of the subtractions are all below 1e-15
    let distance = (matrix - t).norm_inf() + 1e-15;
    Ok(InteriorReport {
        matrix,
        distance,
        eta,
        inside: distance < eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_passes_at_published_eta() {
        let c = robustness_eta(&ChainInput::default(), 4e-6).unwrap();
        assert!(c.verdict);
        assert!((c.norm_tinv_j - (2f64.powf(2.5) + 28.0)).abs() < 1e-9);
        assert!(c.delta_prime < 5e3 * 4e-6);
    }

    #[test]
    fn chain_fails_for_large_eta() {
        let r = robustness_eta(&ChainInput::default(), 1e-2);
        assert!(!matches!(r, Ok(c) if c.verdict));
    }

    #[test]
    fn search_exceeds_published_eta() {
        let eta = max_passing_eta(&ChainInput::default()).unwrap();
        assert!(eta >= 4e-6);
        assert!(robustness_eta(&ChainInput::default(), eta).unwrap().verdict);
        assert!(!robustness_eta(&ChainInput::default(), eta * 1.001).map(|c| c.verdict).unwrap_or(false));
    }

    #[test]
    fn determinant_criterion() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d = Mat2::diag(s, s);
        assert!(trivial_connected(&d, &d).unwrap());
        let h = Mat2::diag(0.5, 0.5);
        assert!(!trivial_connected(&h, &h).unwrap());
        let t = Mat2::new(s, 0.7, 0.0, s);
        assert!(trivial_connected(&t, &t).unwrap());
        assert!(trivial_connected(&Mat2::diag(1.5, 0.1), &h).is_err());
    }

    #[test]
    fn interior_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let j = locus_interior_test(InteriorKind::Jordan { lambda: s + 3e-6 }, INTERIOR_ETA).unwrap();
        assert!(j.inside);
        let r = 0.74 * 3.0 * INTERIOR_ETA / 4.0;
        let rot = InteriorKind::Rotation {
            rho: s + r * 0.6,
            im: r * 0.8,
        };
        assert!(locus_interior_test(rot, INTERIOR_ETA).unwrap().inside);
        assert!(locus_interior_test(InteriorKind::Diag { gamma: 0.7, lambda: 0.7 }, INTERIOR_ETA).is_err());
    }
}
