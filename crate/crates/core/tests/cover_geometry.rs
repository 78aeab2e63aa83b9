use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zeroset::affine::{
    compose_affine, cover_check, robustness_eta, verify_covering_lemma, ChainInput, CoverFailure,
    CoveringSetup, Mat2, Parallelogram, Vec2,
};

// Independent plane oracles on plain arrays.

type M = [[f64; 2]; 2];

fn mat(m: &Mat2<f64>) -> M {
    [[m.a, m.b], [m.c, m.d]]
}

fn mul(x: &M, y: &M) -> M {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    r
}

fn apply(m: &M, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn inv(m: &M) -> M {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn pow(m: &M, e: u32) -> M {
    (0..e).fold([[1.0, 0.0], [0.0, 1.0]], |acc, _| mul(&acc, m))
}

fn norm(m: &M) -> f64 {
    (m[0][0].abs() + m[0][1].abs()).max(m[1][0].abs() + m[1][1].abs())
}

fn sub(x: &M, y: &M) -> M {
    [[x[0][0] - y[0][0], x[0][1] - y[0][1]], [x[1][0] - y[1][0], x[1][1] - y[1][1]]]
}

fn vnorm(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// `‖M⁻¹(v − c)‖₁ / r`, by Cramer's rule.
fn level(par: &Parallelogram, v: &Vec2<f64>) -> f64 {
    let m = mat(&par.m);
    let w = apply(&inv(&m), [v.x - par.center.x, v.y - par.center.y]);
    (w[0].abs() + w[1].abs()) / par.r
}

fn sample_in<R: Rng>(par: &Parallelogram, rng: &mut R) -> Vec2<f64> {
    // uniform in the coordinate diamond, mapped forward
    loop {
        let (s, t) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if f64::abs(s) + f64::abs(t) <= 1.0 {
            let w = apply(&mat(&par.m), [s * par.r, t * par.r]);
            return Vec2::new(par.center.x + w[0], par.center.y + w[1]);
        }
    }
}

fn random_par<R: Rng>(rng: &mut R, spread: f64) -> Parallelogram {
    loop {
        let m: Mat2<f64> = Mat2::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if m.det().abs() < 0.2 {
            continue;
        }
        let c = Vec2::new(rng.gen_range(-spread..spread), rng.gen_range(-spread..spread));
        return Parallelogram::new(c, m, rng.gen_range(0.3..1.5)).unwrap();
    }
}

#[test]
fn outer_is_not_covered_by_inner_alone() {
    let s = CoveringSetup::default();
    let u = s.outer().unwrap();
    let v = s.inner().unwrap();
    let cert = cover_check(&u, std::slice::from_ref(&v), 3).unwrap();
    assert!(!cert.covered);
    let w = cert.uncovered.unwrap();
    // the witness cell reaches outside V
    let worst = w.cell.vertices().iter().map(|p| level(&v, p)).fold(0.0, f64::max);
    assert!(worst > 1.0, "{worst}");
}

#[test]
fn self_cover_at_depth_zero() {
    let s = CoveringSetup::default();
    let v = s.inner().unwrap();
    let cert = cover_check(&v, &[v.scaled(1.0 + 1e-9).unwrap()], 0).unwrap();
    assert!(cert.covered && cert.leaf_count == 1);
}

#[test]
fn lemma_family_covers_outer() {
    let lemma = verify_covering_lemma(&CoveringSetup::default(), 9).unwrap();
    assert!(lemma.holds());
    assert_eq!(lemma.cover.family_size, 243);
    let c = lemma.anchor_coordinates;
    assert!(c.x.abs() + c.y.abs() < 0.95);
}

#[test]
fn shrunk_family_fails() {
    let s = CoveringSetup::default();
    let small = s.inner().unwrap().scaled(0.5).unwrap();
    let family = s.family_of(&small).unwrap();
    let cert = cover_check(&s.outer().unwrap(), &family, 9).unwrap();
    assert!(!cert.covered);
    // a cell that meets no member carries a point no member contains
    let w = cert.uncovered.unwrap();
    if w.reason == CoverFailure::NoCandidates {
        assert!(family.iter().all(|m| level(m, &w.cell.center) > 1.0));
    }
}

#[test]
fn shallow_depth_is_never_wrong() {
    let s = CoveringSetup::default();
    let family = s.family_of(&s.inner().unwrap()).unwrap();
    let u = s.outer().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for depth in 0..=2 {
        let cert = cover_check(&u, &family, depth).unwrap();
        if cert.covered {
            for _ in 0..20_000 {
                let x = sample_in(&u, &mut rng);
                assert!(family.iter().any(|m| level(m, &x) <= 1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn random_coverings_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut certified = 0;
    for _ in 0..40 {
        let target = random_par(&mut rng, 0.2);
        let family: Vec<_> = (0..rng.gen_range(2..7)).map(|_| random_par(&mut rng, 1.0)).collect();
        let cert = cover_check(&target, &family, 6).unwrap();
        if !cert.covered {
            continue;
        }
        certified += 1;
        for _ in 0..5_000 {
            let x = sample_in(&target, &mut rng);
            assert!(family.iter().any(|m| level(m, &x) <= 1.0 + 1e-12));
        }
    }
    assert!(certified > 0);
}

#[test]
fn operator_norm_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let m: Mat2<f64> = Mat2::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        let n = m.norm_inf();
        assert_eq!(n, norm(&mat(&m)));
        for _ in 0..100 {
            let v = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let w = apply(&mat(&m), v);
            assert!(vnorm(w) <= n * vnorm(v) * (1.0 + 1e-15));
        }
        // attained at a sign vector
        let signs = [[1.0, 1.0], [1.0, -1.0]];
        let best = signs.iter().map(|s| vnorm(apply(&mat(&m), *s))).fold(0.0, f64::max);
        assert!((best - n).abs() <= 1e-12 * n);
    }
}

#[test]
fn chain_bounds_dominate_actual_perturbations() {
    let input = ChainInput::default();
    let t = mat(&input.t);
    let j = input.j;
    let b = [input.b.x, input.b.y];
    let words = CoveringSetup::default().words();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let eta = rng.gen_range(1e-7..5e-6);
        let chain = robustness_eta(&input, eta).unwrap();
        // ‖T′ − T‖ < η: each row gets |Δ| summing below η
        let mut tp = t;
        for row in tp.iter_mut() {
            let split: f64 = rng.gen_range(0.0..1.0);
            let mag = eta * rng.gen_range(0.0..0.999);
            row[0] += mag * split * if rng.gen() { 1.0 } else { -1.0 };
            row[1] += mag * (1.0 - split) * if rng.gen() { 1.0 } else { -1.0 };
        }
        assert!(norm(&sub(&tp, &t)) < eta);
        let (tj, tpj) = (pow(&t, j), pow(&tp, j));
        let r = sub(&tpj, &tj);
        let tol = 1e-13;
        assert!(norm(&t).max(norm(&tp)) <= chain.r_max + tol);
        assert!(norm(&r) <= chain.norm_r + tol);
        assert!(norm(&inv(&tj)) <= chain.norm_tinv_j + 1e-9);
        let tpinv = inv(&tpj);
        assert!(norm(&tpinv) <= chain.norm_tpinv_j + 1e-9);
        let s = mul(&tpinv, &tj);
        let s_minus_i = sub(&s, &[[1.0, 0.0], [0.0, 1.0]]);
        assert!(norm(&s_minus_i) <= chain.norm_s_minus_i + tol);
        // (T′_u)⁻¹T_u x = S x + d_u with d_u = (T′)^{−j}(c_u − c′_u)
        let verts = CoveringSetup::default().inner().unwrap().vertices();
        let outer = CoveringSetup::default().outer().unwrap();
        for u in &words {
            let (mut c, mut cp) = ([0.0; 2], [0.0; 2]);
            for (i, &ui) in u.iter().enumerate() {
                let (x, y) = (apply(&pow(&t, i as u32), b), apply(&pow(&tp, i as u32), b));
                for k in 0..2 {
                    c[k] += ui as f64 * x[k];
                    cp[k] += ui as f64 * y[k];
                }
            }
            let d = apply(&tpinv, [c[0] - cp[0], c[1] - cp[1]]);
            assert!(vnorm(d) <= chain.norm_d + tol);
            for v in &verts {
                let sv = apply(&s, [v.x, v.y]);
                let moved = [sv[0] + d[0] - v.x, sv[1] + d[1] - v.y];
                assert!(vnorm(moved) <= chain.delta_prime + tol);
                let image = Vec2::new(sv[0] + d[0], sv[1] + d[1]);
                assert!(level(&outer, &image) < 1.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_composition_matches_naive(
        word in prop::collection::vec(-1i64..=1, 1..8),
        x in -3.0f64..3.0,
        y in -3.0f64..3.0,
    ) {
        let s = CoveringSetup::default();
        let f = compose_affine(&word, &s.t, &s.b);
        // (T + u₁b)∘⋯∘(T + u_jb) applied right to left
        let t = mat(&s.t);
        let mut p = [x, y];
        for &u in word.iter().rev() {
            let q = apply(&t, p);
            p = [q[0] + u as f64 * s.b.x, q[1] + u as f64 * s.b.y];
        }
        let got = f.apply(&Vec2::new(x, y));
        prop_assert!((got.x - p[0]).abs() < 1e-12 && (got.y - p[1]).abs() < 1e-12);
    }

    #[test]
    fn verdict_is_monotone_in_eta(e1 in 1e-8f64..1e-4, e2 in 1e-8f64..1e-4) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let input = ChainInput::default();
        let pass = |e: f64| matches!(robustness_eta(&input, e), Ok(c) if c.verdict);
        prop_assert!(!pass(hi) || pass(lo));
    }
}

#[test]
fn first_letter_translation_is_b() {
    let s = CoveringSetup::default();
    let f = compose_affine(&[1, 0, 0, 0, 0], &s.t, &s.b);
    assert_eq!(f.translation, s.b);
    let z = compose_affine(&[0; 5], &s.t, &s.b);
    assert_eq!(z.translation, Vec2::zero());
    assert!(norm(&sub(&mat(&z.linear), &pow(&mat(&s.t), 5))) < 1e-14);
}
