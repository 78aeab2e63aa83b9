//! Brute-force counterparts of the fast routines, used by the `properties`
//! experiment. They share nothing with the searches they check beyond the
//! per-prefix inequality.

use rand::Rng;

use crate::affine::{AffineMap2, Mat2, Parallelogram, Vec2};
use crate::error::Result;
use crate::prune::{exclusion_tests, TestSettings};
use crate::series::{CoefficientSet, SignedPolynomial};

/// First degree-`depth` prefix (in lexicographic search order) all of whose
/// truncations pass the exclusion inequalities, found by full enumeration.
pub fn enumerate_survivor(
    a: f64,
    b: f64,
    k: usize,
    set: &CoefficientSet,
    depth: usize,
    settings: TestSettings,
) -> Result<Option<SignedPolynomial>> {
    let allowed = set.allowed();
    let total = allowed.len().checked_pow(depth as u32).expect("enumeration too large");
    for index in 0..total {
        let mut coeffs = vec![1i64];
        let mut rest = index;
        let mut digits = vec![0usize; depth];
        for d in digits.iter_mut().rev() {
            *d = rest % allowed.len();
            rest /= allowed.len();
        }
        coeffs.extend(digits.iter().map(|&d| allowed[d]));
        let full = SignedPolynomial::from_coeffs(coeffs)?;
        let mut ok = true;
        for n in 0..=depth {
            if !exclusion_tests(&full.truncated(n), &a, &b, k, set, settings)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(full));
        }
    }
    Ok(None)
}

/// `(T + u₁b)∘⋯∘(T + u_jb)` by composing the maps one at a time.
pub fn naive_compose(word: &[i64], t: &Mat2<f64>, b: &Vec2<f64>) -> AffineMap2 {
    let mut acc = AffineMap2 {
        linear: Mat2::identity(),
        translation: Vec2::zero(),
    };
    for &u in word {
        let step = AffineMap2 {
            linear: *t,
            translation: b.scale(u as f64),
        };
        acc = acc.compose(&step);
    }
    acc
}

/// A point of `par`, uniform by rejection from its bounding box.
pub fn sample_in<R: Rng>(par: &Parallelogram, rng: &mut R) -> Vec2<f64> {
    let v = par.vertices();
    let (x0, x1) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.x), h.max(p.x)));
    let (y0, y1) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.y), h.max(p.y)));
    loop {
        let p = Vec2::new(rng.gen_range(x0..=x1), rng.gen_range(y0..=y1));
        if par.coordinates(&p).norm_1() <= par.r {
            return p;
        }
    }
}
