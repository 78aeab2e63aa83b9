//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's evaluation or bound routines: values
//! come from plain power sums, tails from long explicit sums, exact values
//! from rationals.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `(k)ᵢ = k(k−1)⋯(k−i+1)`.
pub fn falling(k: usize, i: usize) -> f64 {
    (0..i).map(|t| (k as f64) - t as f64).product()
}

/// `P⁽ⁱ⁾(x)` as a plain sum of terms.
pub fn deriv_value(coeffs: &[i64], i: usize, x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(i)
        .map(|(k, &c)| c as f64 * falling(k, i) * x.powi((k - i) as i32))
        .sum()
}

/// `h·Σ_{k>n} (k)ᵢ x^{k−i}` by explicit summation until terms vanish.
pub fn tail_sum(i: usize, n: usize, x: f64, h: i64) -> f64 {
    let mut s = 0.0;
    let mut k = n + 1;
    loop {
        if k < i {
            k += 1;
            continue;
        }
        let t = falling(k, i) * x.powi((k - i) as i32);
        s += t;
        if t < 1e-30 * s.max(1e-300) || k > n + 200_000 {
            break;
        }
        k += 1;
    }
    h as f64 * s
}

/// `h·i!/(1−x)^{i+1}`.
pub fn class_sup(i: usize, x: f64, h: i64) -> f64 {
    h as f64 * falling(i, i) / (1.0 - x).powi(i as i32 + 1)
}

pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

/// Exact `P⁽ⁱ⁾(x)` at a double.
pub fn exact_deriv_value(coeffs: &[i64], i: usize, x: f64) -> BigRational {
    exact_deriv_at(coeffs, i, &exact(x))
}

/// Exact `P⁽ⁱ⁾(x)` at a rational, by explicit powers.
pub fn exact_deriv_at(coeffs: &[i64], i: usize, x: &BigRational) -> BigRational {
    let mut pw = BigRational::one();
    let mut powers = Vec::with_capacity(coeffs.len());
    for _ in 0..coeffs.len() {
        powers.push(pw.clone());
        pw = pw * x;
    }
    let mut s = BigRational::zero();
    for (k, &c) in coeffs.iter().enumerate().skip(i) {
        let ff: i64 = (0..i).map(|t| (k - t) as i64).product();
        s += BigRational::from_integer(BigInt::from(c * ff)) * &powers[k - i];
    }
    s
}

/// Sign of `P(x) − h·x^{n+1}/(1−x)` with `n = deg P`, exactly.
pub fn dip_sign(coeffs: &[i64], h: i64, x: &BigRational) -> std::cmp::Ordering {
    let n = coeffs.len() - 1;
    let mut pw = BigRational::one();
    for _ in 0..=n {
        pw = pw * x;
    }
    let tail = pw * BigRational::from_integer(BigInt::from(h)) / (BigRational::one() - x);
    exact_deriv_at(coeffs, 0, x).cmp(&tail)
}

/// What the enumeration oracle concluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Oracle {
    /// First surviving degree-`d` coefficient vector in lexicographic order.
    Survivor(Vec<i64>),
    Excluded,
    /// Some inequality was within rounding distance of its threshold.
    Ambiguous,
}

/// Full enumeration of degree-`depth` prefixes, keeping those whose every
/// truncation passes the `k` exclusion inequalities at `b`.
pub fn enumerate(a: f64, b: f64, k: usize, allowed: &[i64], depth: usize) -> Oracle {
    let h = allowed.iter().map(|c| c.abs()).max().unwrap();
    let w = b - a;
    let thresholds: Vec<Vec<f64>> = (0..=depth)
        .map(|n| (0..k).map(|i| tail_sum(i, n, b, h) + w * class_sup(i + 1, b, h)).collect())
        .collect();
    let total = allowed.len().pow(depth as u32);
    let mut ambiguous = false;
    for index in 0..total {
        let mut coeffs = vec![1i64; depth + 1];
        let mut rest = index;
        for slot in coeffs[1..].iter_mut().rev() {
            *slot = allowed[rest % allowed.len()];
            rest /= allowed.len();
        }
        let mut pass = true;
        'outer: for n in 0..=depth {
            for i in 0..k {
                let v = deriv_value(&coeffs[..=n], i, b).abs();
                let t = thresholds[n][i];
                let scale = coeffs[..=n]
                    .iter()
                    .enumerate()
                    .skip(i)
                    .map(|(m, c)| (c.abs() as f64) * falling(m, i) * b.powi((m - i) as i32))
                    .sum::<f64>()
                    .max(t);
                if (v - t).abs() <= 1e-9 * scale {
                    ambiguous = true;
                }
                if v >= t {
                    pass = false;
                    break 'outer;
                }
            }
        }
        if pass {
            return if ambiguous { Oracle::Ambiguous } else { Oracle::Survivor(coeffs) };
        }
    }
    if ambiguous {
        Oracle::Ambiguous
    } else {
        Oracle::Excluded
    }
}
