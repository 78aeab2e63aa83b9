//! Coarse membership grid for the diagonal connectedness locus.
//!
//! A point `(γ, λ)` belongs to the locus when some series `f` with
//! coefficients in `{−1, 0, 1}` and constant term 1 vanishes at both `γ`
//! and `λ`. A prefix `P` of degree `n` cannot extend to such an `f` once
//! `|P(γ)|` or `|P(λ)|` exceeds the tail bound at that point, so exhausting
//! every branch by depth `d` certifies the point outside. Points with
//! `γλ ≥ 1/2` are inside by the determinant criterion.
//!
//! Labels refer to pixel centers.

use std::fmt::Write as _;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{add_up, gamma, inflate, mul_up};
use crate::scan::with_pool;
use crate::series::tail_sup;

/// Default per-point node budget; hitting it yields `Unknown`.
pub const DEFAULT_NODE_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    /// Certified outside the locus.
    Excluded,
    /// Certified inside (`γλ ≥ 1/2`).
    Trivial,
    /// Neither certificate was found at this depth.
    Unknown,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Excluded => "excluded",
            Label::Trivial => "trivial",
            Label::Unknown => "unknown",
        }
    }

    /// Gray level in the rendered image: inside dark, outside light.
    pub fn gray(self) -> u8 {
        match self {
            Label::Excluded => 255,
            Label::Unknown => 128,
            Label::Trivial => 0,
        }
    }
}

/// `γλ ≥ 1/2`, decided exactly on the given doubles.
pub fn trivially_inside(gamma: f64, lambda: f64) -> bool {
    let (Some(g), Some(l)) = (BigRational::from_float(gamma), BigRational::from_float(lambda)) else {
        return false;
    };
    g * l * BigRational::from_integer(2.into()) >= BigRational::from_integer(1.into())
}

/// One inequality of the search: `|P⁽ⁱ⁾(x)|` against the tail bound.
struct Channel {
    /// `term[m] = fl((m)ᵢ·x^{m−i})`
    term: Vec<f64>,
    /// `rhs[n] = tail_sup(i, n, x, 1)`
    rhs: Vec<f64>,
}

impl Channel {
    fn new(x: f64, order: usize, depth: usize) -> Result<Self> {
        let mut pw = Vec::with_capacity(depth + 1);
        let mut acc = 1.0;
        for _ in 0..=depth {
            pw.push(acc);
            acc *= x;
        }
        let term = (0..=depth)
            .map(|m| match (m, order) {
                (_, 0) => pw[m],
                (0, _) => 0.0,
                _ => m as f64 * pw[m - 1],
            })
            .collect();
        let rhs = (0..=depth)
            .map(|n| tail_sup(order, n, &x, 1))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { term, rhs })
    }

    /// The prefix cannot reach a zero here. Each term carries at most `n + 1`
    /// roundings and the running sum another `n + 1`, so `γ_{2n+4}·Σ|terms|`
    /// bounds the error.
    fn rules_out(&self, n: usize, value: f64, abs: f64) -> bool {
        let slack = mul_up(gamma::<f64>(2 * n + 4), inflate(abs, 2 * n + 4));
        value.abs() > add_up(self.rhs[n], slack)
    }
}

struct Search<'a> {
    channels: &'a [Channel],
    depth: usize,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    /// `Some(true)` if some branch survives to `depth`; `None` past the budget.
    fn run(&mut self, n: usize, state: &[(f64, f64)]) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return None;
        }
        if self
            .channels
            .iter()
            .zip(state)
            .any(|(ch, &(v, a))| ch.rules_out(n, v, a))
        {
            return Some(false);
        }
        if n == self.depth {
            return Some(true);
        }
        let m = n + 1;
        for c in [-1.0f64, 0.0, 1.0] {
            let next: Vec<(f64, f64)> = self
                .channels
                .iter()
                .zip(state)
                .map(|(ch, &(v, a))| (v + c * ch.term[m], a + c.abs() * ch.term[m]))
                .collect();
            if self.run(m, &next)? {
                return Some(true);
            }
        }
        Some(false)
    }
}

/// Labels a single point; the second value is the work spent.
///
/// Off the diagonal a prefix must stay compatible with zeros at both
/// points. On the diagonal the two maps degenerate to a Jordan block and
/// the condition becomes a double zero, so `P` and `P′` are tested at the
/// common point.
pub fn classify_point(gamma: f64, lambda: f64, depth: usize, node_limit: u64) -> Result<(Label, u64)> {
    for v in [gamma, lambda] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("coordinates must lie in (0,1), got {v}")));
        }
    }
    if trivially_inside(gamma, lambda) {
        return Ok((Label::Trivial, 0));
    }
    let channels = if gamma == lambda {
        vec![Channel::new(gamma, 0, depth)?, Channel::new(gamma, 1, depth)?]
    } else {
        vec![Channel::new(gamma, 0, depth)?, Channel::new(lambda, 0, depth)?]
    };
    let mut s = Search {
        channels: &channels,
        depth,
        nodes: 0,
        limit: node_limit,
    };
    // the constant term contributes 1 to P and nothing to P′
    let start = if gamma == lambda {
        [(1.0, 1.0), (0.0, 0.0)]
    } else {
        [(1.0, 1.0), (1.0, 1.0)]
    };
    let label = match s.run(0, &start) {
        Some(false) => Label::Excluded,
        _ => Label::Unknown,
    };
    Ok((label, s.nodes))
}

/// What to render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusConfig {
    /// `(γ_min, γ_max)`, horizontal axis.
    pub gamma: (f64, f64),
    /// `(λ_min, λ_max)`, vertical axis.
    pub lambda: (f64, f64),
    pub width: usize,
    pub height: usize,
    pub depth: usize,
    pub node_limit: u64,
}

impl LocusConfig {
    pub fn new(gamma: (f64, f64), lambda: (f64, f64), width: usize, height: usize, depth: usize) -> Self {
        Self {
            gamma,
            lambda,
            width,
            height,
            depth,
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (lo, hi) in [self.gamma, self.lambda] {
            if !(0.0 < lo && lo < hi && hi < 1.0) {
                return Err(Error::Domain(format!("region side ({lo}, {hi}) must lie in (0,1)")));
            }
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Domain("resolution must be positive".into()));
        }
        Ok(())
    }

    /// Center of pixel `(col, row)`; row 0 is the top (largest `λ`).
    pub fn center(&self, col: usize, row: usize) -> (f64, f64) {
        let (g0, g1) = self.gamma;
        let (l0, l1) = self.lambda;
        let g = g0 + (col as f64 + 0.5) * ((g1 - g0) / self.width as f64);
        let l = l1 - (row as f64 + 0.5) * ((l1 - l0) / self.height as f64);
        (g, l)
    }
}

/// Labels in row-major order, top row first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusGrid {
    pub config: LocusConfig,
    pub labels: Vec<Label>,
    pub excluded: u64,
    pub trivial: u64,
    pub unknown: u64,
    pub nodes: u64,
}

impl LocusGrid {
    pub fn label(&self, col: usize, row: usize) -> Label {
        self.labels[row * self.config.width + col]
    }

    /// Plain (ASCII) portable graymap.
    pub fn to_pgm(&self) -> String {
        let w = self.config.width;
        let mut s = format!("P2\n{} {}\n255\n", w, self.config.height);
        for row in self.labels.chunks(w) {
            let line: Vec<String> = row.iter().map(|l| l.gray().to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// One line per pixel: `col,row,gamma,lambda,label`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("col,row,gamma,lambda,label\n");
        for row in 0..self.config.height {
            for col in 0..self.config.width {
                let (g, l) = self.config.center(col, row);
                let _ = writeln!(s, "{col},{row},{g},{l},{}", self.label(col, row).name());
            }
        }
        s
    }
}

/// Labels every pixel. The result does not depend on `threads`.
pub fn render_locus_2d(cfg: &LocusConfig, threads: Option<usize>) -> Result<LocusGrid> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.height)
        .flat_map(|r| (0..cfg.width).map(move |c| (c, r)))
        .collect();
    let out: Vec<(Label, u64)> = with_pool(threads, || {
        cells
            .par_iter()
            .map(|&(c, r)| {
                let (g, l) = cfg.center(c, r);
                classify_point(g, l, cfg.depth, cfg.node_limit)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let count = |k: Label| out.iter().filter(|(l, _)| *l == k).count() as u64;
    Ok(LocusGrid {
        config: cfg.clone(),
        excluded: count(Label::Excluded),
        trivial: count(Label::Trivial),
        unknown: count(Label::Unknown),
        nodes: out.iter().map(|(_, n)| n).sum(),
        labels: out.into_iter().map(|(l, _)| l).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_pixels() {
        assert_eq!(classify_point(0.8, 0.7, 20, DEFAULT_NODE_LIMIT).unwrap().0, Label::Trivial);
        assert_eq!(classify_point(0.55, 0.55, 20, DEFAULT_NODE_LIMIT).unwrap().0, Label::Excluded);
        assert_eq!(classify_point(0.6685, 0.6685, 16, DEFAULT_NODE_LIMIT).unwrap().0, Label::Unknown);
    }

    #[test]
    fn off_diagonal_point_is_excluded() {
        assert_eq!(classify_point(0.52, 0.6, 20, DEFAULT_NODE_LIMIT).unwrap().0, Label::Excluded);
        // symmetric in the two coordinates
        assert_eq!(classify_point(0.6, 0.52, 20, DEFAULT_NODE_LIMIT).unwrap().0, Label::Excluded);
    }

    #[test]
    fn trivial_boundary_is_exact() {
        assert!(trivially_inside(0.5, 1.0 - f64::EPSILON / 2.0) == false);
        assert!(trivially_inside(0.8, 0.625));
        assert!(!trivially_inside(0.8, 0.6249999999));
    }

    #[test]
    fn image_formats() {
        let cfg = LocusConfig::new((0.5, 0.9), (0.5, 0.9), 4, 3, 10);
        let g = render_locus_2d(&cfg, Some(2)).unwrap();
        let pgm = g.to_pgm();
        assert!(pgm.starts_with("P2\n4 3\n255\n"));
        assert_eq!(pgm.lines().count(), 3 + 3);
        assert_eq!(g.to_csv().lines().count(), 1 + 12);
        assert_eq!(g.excluded + g.trivial + g.unknown, 12);
        // top right corner is deep inside the trivial region
        assert_eq!(g.label(3, 0), Label::Trivial);
    }
}
