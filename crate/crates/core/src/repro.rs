//! Named experiments that replay the published computations at desk scale.
//!
//! Each experiment produces one certificate document. The configuration
//! functions are public so tests and the command-line tool run exactly the
//! same jobs.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::affine::{
    cover_check, max_passing_eta, point_in, robustness_eta, verify_covering_lemma, ChainInput,
    Cell, CoveringSetup, Mat2, Parallelogram, Vec2,
};
use crate::certificate::{Document, Verdict};
use crate::crosscheck::{enumerate_survivor, sample_in};
use crate::error::{Error, Result};
use crate::locus::{render_locus_2d, LocusConfig};
use crate::prune::{prune, ExclusionQuery, PruneLimits, TestSettings};
use crate::roots::{
    check_good, find_good_extension, localize_double_root, min_root_product, trivial_membership,
    GoodTuple, RootLocalization,
};
use crate::scan::{scan_with, survivor_prefix_property, Escalation, ScanConfig, ScanOptions};
use crate::series::{deriv_sup, eval_poly, tail_sup, CoefficientSet, SignedPolynomial};

/// Depth at which the covering of `U` is certified. One level more than the
/// published run; see [`cover_lemma`].
pub const COVER_DEPTH: usize = 9;

/// The depth quoted for the published covering run.
pub const PUBLISHED_COVER_DEPTH: usize = 8;

/// Degree-50 prefix whose good tuple bounds `α₂` from above.
pub const EXAMPLE_POLY: &str = "1ooo1011011011101110110111111101111111o11111o1oo1oo";

/// Interval of that good tuple.
pub const EXAMPLE_INTERVAL: (f64, f64) = (0.668470, 0.668482);

/// Where its double zero must be localized.
pub const EXAMPLE_TARGET: (f64, f64) = (0.66847556, 0.66847564);

/// Lower bound for `P″` on the example interval.
pub const EXAMPLE_C2: f64 = 20.0;

/// The two tabulated double zeros and their coefficient strings.
pub const THETA_ROWS: [(f64, &str); 2] = [
    (0.668550, "1ooo10110110111011111o011111oo1oo0111111111111oo1oo"),
    (0.668900, "1ooo1011011011111o111oo11oo11o111o10oo0o0oooo0o0ooo"),
];

/// Half-width of the interval searched around each tabulated zero.
pub const THETA_RADIUS: f64 = 5e-6;

/// Extra coefficients the table workflow may append.
pub const THETA_MAX_EXTRA: usize = 6;

/// Degree-26 polynomial that is good for height 2 on `(0.5436, 0.5438)`.
pub const BPRIME_POLY: &str = "1,-2,-1,1,1,1,2,1,1,2,1,1,2,1,1,2,1,2,1,1,2,-2,-2,-1,-2,2,-1";

/// A registered experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    /// Minutes to hours; never run by the test suite.
    pub long: bool,
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment { name: "gap-I1", summary: "exclude (0.668478, 0.668489) for double zeros", long: false },
    Experiment { name: "example-3-5", summary: "good tuple and localized double zero bounding α₂ from above", long: false },
    Experiment { name: "alpha2-lower", summary: "exclude (0.6684, 0.6684754) for double zeros", long: false },
    Experiment { name: "theta-table", summary: "double zeros near 0.668550 and 0.668900", long: false },
    Experiment { name: "cover-lemma", summary: "parallelogram covering by the 3⁵ images", long: false },
    Experiment { name: "eta", summary: "perturbation chain at η = 4e-6 and the largest passing η", long: false },
    Experiment { name: "bprime", summary: "results for coefficients in {0, ±1, ±2}", long: false },
    Experiment { name: "triple-roots", summary: "exclude (0.746, 0.7465) for triple zeros", long: false },
    Experiment { name: "properties", summary: "randomized cross-checks against brute force", long: false },
    Experiment { name: "alpha2-full", summary: "exclude (0.5, 0.6684754) for double zeros", long: true },
    Experiment { name: "census", summary: "10⁷-cell gap census of (0.66847, 0.66936)", long: true },
];

/// Knobs that do not change what an experiment proves.
#[derive(Debug, Clone)]
pub struct ReproOptions {
    /// `None` uses every core.
    pub threads: Option<usize>,
    /// Seed of the randomized experiments; recorded in their config.
    pub seed: u64,
    /// Checkpoint file for the long scans.
    pub checkpoint: Option<PathBuf>,
}

impl Default for ReproOptions {
    fn default() -> Self {
        Self {
            threads: None,
            seed: 1,
            checkpoint: None,
        }
    }
}

/// A finished experiment.
#[derive(Debug, Clone)]
pub struct ReproRun {
    pub name: String,
    pub verdict: Verdict,
    /// One line for humans.
    pub summary: String,
    /// The certificate document.
    pub json: String,
}

fn finish<C: Serialize, R: Serialize>(
    name: &str,
    config: C,
    result: R,
    verdict: Verdict,
    summary: String,
) -> Result<ReproRun> {
    let doc = Document::new(&format!("repro/{name}"), config, result, verdict)?;
    Ok(ReproRun {
        name: name.into(),
        verdict,
        summary,
        json: doc.to_json()?,
    })
}

fn verdict_of(ok: bool) -> Verdict {
    if ok {
        Verdict::Certified
    } else {
        Verdict::Negative
    }
}

/// Runs experiment `name`.
pub fn run(name: &str, opts: &ReproOptions) -> Result<ReproRun> {
    match name {
        "gap-I1" => scan_experiment(name, &gap_i1_config(), opts),
        "example-3-5" => example_3_5(),
        "alpha2-lower" => scan_experiment(name, &alpha2_lower_config(), opts),
        "theta-table" => theta_table(),
        "cover-lemma" => cover_lemma(),
        "eta" => eta(),
        "bprime" => bprime(opts),
        "triple-roots" => triple_roots(opts),
        "properties" => properties(opts),
        "alpha2-full" => scan_experiment(name, &alpha2_full_config(), opts),
        "census" => scan_experiment(name, &census_config(), opts),
        other => Err(Error::Domain(format!(
            "unknown experiment {other:?}; known: {}",
            EXPERIMENTS.iter().map(|e| e.name).collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// 110 cells of width 10⁻⁷ over `I₁`, depth 40, refined up to depth 50.
pub fn gap_i1_config() -> ScanConfig {
    ScanConfig::new((0.668478, 0.668489), 110, 40, 2, CoefficientSet::unit())
        .with_escalation(Escalation::new(2, 5, 50))
}

/// 76 cells of width just under 10⁻⁶, depth 40, refined up to depth 60.
pub fn alpha2_lower_config() -> ScanConfig {
    ScanConfig::new((0.6684, 0.6684754), 76, 40, 2, CoefficientSet::unit())
        .with_escalation(Escalation::new(10, 2, 60))
}

/// 3360 cells of width 10⁻⁵ for height 2, depth 30, refined up to depth 60.
pub fn bprime_config() -> ScanConfig {
    ScanConfig::new((0.51, 0.5436), 3360, 30, 2, CoefficientSet::double())
        .with_escalation(Escalation::new(12, 3, 60))
}

/// The `(0.5, 0.51)` scan whose survivors must all start `1 − 2x − 2x²`.
pub fn bprime_prefix_config() -> ScanConfig {
    ScanConfig::new((0.5, 0.51), 1000, 20, 2, CoefficientSet::double())
}

/// 200 cells of width 2.5×10⁻⁶ at depth 40 for triple zeros.
pub fn triple_roots_config() -> ScanConfig {
    ScanConfig::new((0.746, 0.7465), 200, 40, 3, CoefficientSet::unit())
}

/// 10⁴ cells over `(0.5, 0.6684754)`, depth 30 refined up to 50.
pub fn alpha2_full_config() -> ScanConfig {
    ScanConfig::new((0.5, 0.6684754), 10_000, 30, 2, CoefficientSet::unit())
        .with_escalation(Escalation::new(12, 2, 50))
}

/// 10⁷ cells over `(0.66847, 0.66936)` at depth 40.
pub fn census_config() -> ScanConfig {
    ScanConfig::new((0.66847, 0.66936), 10_000_000, 40, 2, CoefficientSet::unit())
}

fn scan_options(opts: &ReproOptions) -> ScanOptions {
    ScanOptions {
        threads: opts.threads,
        checkpoint: opts.checkpoint.clone(),
        ..ScanOptions::default()
    }
}

fn scan_experiment(name: &str, cfg: &ScanConfig, opts: &ReproOptions) -> Result<ReproRun> {
    let cert = scan_with(cfg, &scan_options(opts))?;
    let census = name == "census";
    let ok = census || cert.fully_excluded();
    let summary = if census {
        format!("{} gaps, {} surviving cells", cert.gaps.len(), cert.survivors.len())
    } else if ok {
        let deepest = cert.depth_histogram.keys().max().copied().unwrap_or(cfg.depth);
        format!("range excluded, deepest search {deepest}")
    } else {
        format!("{} surviving cells", cert.survivors.len())
    };
    finish(name, cfg, &cert, verdict_of(ok), summary)
}

/// Goodness, localization and extension of the degree-50 example.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleResult {
    pub good: GoodTuple,
    pub localization: RootLocalization,
    pub inside_target: bool,
}

pub fn example_3_5_result() -> Result<ExampleResult> {
    let p = SignedPolynomial::parse(EXAMPLE_POLY, &CoefficientSet::unit())?;
    let (a, b) = EXAMPLE_INTERVAL;
    let good = check_good(&p, a, b, 1).map_err(|e| Error::Domain(e.to_string()))?;
    let localization =
        localize_double_root(&good, Some(EXAMPLE_C2)).map_err(|e| Error::Domain(e.to_string()))?;
    let inside_target = localization.contains(EXAMPLE_TARGET.0, EXAMPLE_TARGET.1);
    Ok(ExampleResult {
        good,
        localization,
        inside_target,
    })
}

fn example_3_5() -> Result<ReproRun> {
    let r = example_3_5_result()?;
    let summary = format!(
        "ratios {:.6}, {:.6}, dip {:.6}; double zero in ({}, {})",
        r.good.ratio_a, r.good.ratio_b, r.good.dip_ratio, r.localization.lo, r.localization.hi
    );
    let config = json!({
        "poly": EXAMPLE_POLY,
        "interval": EXAMPLE_INTERVAL,
        "target": EXAMPLE_TARGET,
        "c2": EXAMPLE_C2,
    });
    let ok = r.inside_target;
    finish("example-3-5", config, &r, verdict_of(ok), summary)
}

/// One row of the table workflow.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub given: SignedPolynomial,
    /// Coefficients appended to `given` to reach a good tuple.
    pub appended: Vec<i64>,
    pub good: GoodTuple,
    pub localization: RootLocalization,
    /// Largest distance from `theta` to a point of the localization.
    pub distance: f64,
}

pub fn theta_row(theta: f64, text: &str) -> Result<ThetaRow> {
    let set = CoefficientSet::unit();
    let given = SignedPolynomial::parse(text, &set)?;
    let (a, b) = (theta - THETA_RADIUS, theta + THETA_RADIUS);
    let good = find_good_extension(&given, set.allowed(), a, b, 1, THETA_MAX_EXTRA)?
        .ok_or_else(|| Error::Domain(format!("no good extension near {theta}")))?;
    let localization = localize_double_root(&good, None).map_err(|e| Error::Domain(e.to_string()))?;
    let distance = (localization.lo - theta).abs().max((localization.hi - theta).abs());
    Ok(ThetaRow {
        theta,
        appended: good.poly.coeffs()[given.coeffs().len()..].to_vec(),
        given,
        good,
        localization,
        distance,
    })
}

fn theta_table() -> Result<ReproRun> {
    let rows = THETA_ROWS
        .iter()
        .map(|&(t, s)| theta_row(t, s))
        .collect::<Result<Vec<_>>>()?;
    let ok = rows.iter().all(|r| r.distance <= 1e-7);
    let summary = rows
        .iter()
        .map(|r| format!("{}: within {:.1e}", r.theta, r.distance))
        .collect::<Vec<_>>()
        .join("; ");
    let config = json!({
        "rows": THETA_ROWS,
        "radius": THETA_RADIUS,
        "max_extra": THETA_MAX_EXTRA,
        "tolerance": 1e-7,
    });
    finish("theta-table", config, &rows, verdict_of(ok), summary)
}

fn cover_lemma() -> Result<ReproRun> {
    let setup = CoveringSetup::default();
    let lemma = verify_covering_lemma(&setup, COVER_DEPTH)?;
    let published = cover_check(
        &setup.outer()?,
        &setup.family_of(&setup.inner()?)?,
        PUBLISHED_COVER_DEPTH,
    )?;
    let inner_at_published = cover_check(
        &setup.inner()?,
        &setup.family_of(&setup.inner()?)?,
        PUBLISHED_COVER_DEPTH,
    )?;
    let ok = lemma.holds();
    let summary = format!(
        "covered {} at depth {} ({} leaves); depth {}: {}; anchor coordinates ({:.3}, {:.3})",
        lemma.cover.covered,
        COVER_DEPTH,
        lemma.cover.leaf_count,
        PUBLISHED_COVER_DEPTH,
        published.covered,
        lemma.anchor_coordinates.x,
        lemma.anchor_coordinates.y
    );
    let result = json!({
        "lemma": lemma,
        "outer_at_published_depth": published,
        "inner_at_published_depth": inner_at_published,
    });
    finish("cover-lemma", json!({ "setup": setup, "depth": COVER_DEPTH }), result, verdict_of(ok), summary)
}

fn eta() -> Result<ReproRun> {
    let input = ChainInput::default();
    let chain = robustness_eta(&input, crate::affine::INTERIOR_ETA).map_err(|e| Error::Domain(e.to_string()))?;
    let max_eta = max_passing_eta(&input)?;
    let ok = chain.verdict && max_eta >= crate::affine::INTERIOR_ETA;
    let summary = format!(
        "δ′ = {:.4} ≤ margin {:.4}: {}; largest passing η {:.3e}",
        chain.delta_prime, chain.margin, chain.verdict, max_eta
    );
    let result = json!({ "chain": chain, "max_passing_eta": max_eta });
    finish("eta", json!({ "input": input, "eta": crate::affine::INTERIOR_ETA }), result, verdict_of(ok), summary)
}

fn bprime(opts: &ReproOptions) -> Result<ReproRun> {
    let set = CoefficientSet::double();
    let cfg = bprime_config();
    let gap = scan_with(&cfg, &scan_options(opts))?;
    let p = SignedPolynomial::parse(BPRIME_POLY, &set)?;
    let good = check_good(&p, 0.5436, 0.5438, 2);
    let product = min_root_product(3)?;
    let closed = 3.0 * 3f64.sqrt() / 16.0;
    // a double zero α in (0.5, 0.51) together with a zero below 1/2 gives
    // α²/2 > product, so α > (2·product)^{1/2}
    let alpha_floor = (2.0 * product).sqrt();
    let prefix_cfg = bprime_prefix_config();
    let required = SignedPolynomial::new(vec![1, -2, -2], &set)?;
    let property = survivor_prefix_property(&prefix_cfg, &required, &scan_options(opts))?;
    let ok = gap.fully_excluded()
        && good.is_ok()
        && (product - closed).abs() <= 1e-12
        && alpha_floor > 0.8
        && property.holds;
    let summary = format!(
        "(0.51, 0.5436) excluded: {}; degree-26 tuple good: {}; product {:.12}; prefix property: {}",
        gap.fully_excluded(),
        good.is_ok(),
        product,
        property.holds
    );
    let config = json!({
        "scan": cfg,
        "poly": BPRIME_POLY,
        "good_interval": [0.5436, 0.5438],
        "prefix_scan": prefix_cfg,
        "required_prefix": required,
    });
    let result = json!({
        "scan": gap,
        "good": good.as_ref().ok(),
        "good_error": good.as_ref().err().map(|e| e.to_string()),
        "min_root_product_3": product,
        "closed_form": closed,
        "double_zero_floor": alpha_floor,
        "prefix_property": property,
    });
    finish("bprime", config, result, verdict_of(ok), summary)
}

/// Sample points of `(2^{−1/3}, 1)` checked by the determinant criterion.
pub const TRIPLE_SAMPLES: [f64; 5] = [0.7938, 0.8, 0.85, 0.9, 0.99];

fn triple_roots(opts: &ReproOptions) -> Result<ReproRun> {
    let cfg = triple_roots_config();
    let gap = scan_with(&cfg, &scan_options(opts))?;
    let samples = TRIPLE_SAMPLES
        .iter()
        .map(|&l| Ok((l, trivial_membership(l, 3)?)))
        .collect::<Result<Vec<_>>>()?;
    let ok = gap.fully_excluded() && samples.iter().all(|s| s.1);
    let summary = format!(
        "(0.746, 0.7465) excluded: {}; samples inside: {}",
        gap.fully_excluded(),
        samples.iter().all(|s| s.1)
    );
    let result = json!({ "scan": gap, "trivial_samples": samples });
    finish("triple-roots", json!({ "scan": cfg, "samples": TRIPLE_SAMPLES }), result, verdict_of(ok), summary)
}

/// Outcome of the randomized cross-checks.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub prune_cells: usize,
    pub prune_disagreements: Vec<String>,
    pub cover_instances: usize,
    pub cover_certified: usize,
    pub cover_points: usize,
    pub cover_escapes: usize,
    pub domination_prefixes: usize,
    pub domination_failures: Vec<String>,
    pub deterministic: bool,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.prune_disagreements.is_empty()
            && self.cover_escapes == 0
            && self.domination_failures.is_empty()
            && self.deterministic
    }
}

/// Sizes of the randomized checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PropertySizes {
    pub prune_cells: usize,
    pub cover_instances: usize,
    pub cover_points: usize,
    pub domination_prefixes: usize,
}

impl Default for PropertySizes {
    fn default() -> Self {
        Self {
            prune_cells: 200,
            cover_instances: 20,
            cover_points: 100_000,
            domination_prefixes: 1000,
        }
    }
}

/// Random cells against full enumeration, up to depth 8.
pub fn check_prune_against_enumeration(rng: &mut ChaCha8Rng, cells: usize) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for _ in 0..cells {
        let double = rng.gen_bool(0.3);
        let set = if double { CoefficientSet::double() } else { CoefficientSet::unit() };
        let depth = rng.gen_range(0..=if double { 6 } else { 8 });
        let k = rng.gen_range(1..=3);
        let a: f64 = rng.gen_range(0.45..0.9);
        let w = 10f64.powf(rng.gen_range(-6.0..-1.5));
        let b = (a + w).min(0.97);
        let q = ExclusionQuery::new(a, b, k, set.clone(), depth)?;
        let fast = prune(&q, &SignedPolynomial::one(), TestSettings::default(), PruneLimits::default())?;
        let slow = enumerate_survivor(a, b, k, &set, depth, TestSettings::default())?;
        let fast_witness = match &fast.outcome {
            crate::prune::PruneOutcome::Excluded => None,
            crate::prune::PruneOutcome::Survivor(p) => Some(p.clone()),
        };
        if fast_witness != slow {
            bad.push(format!(
                "({a}, {b}) k={k} depth={depth} set={}: search {:?}, enumeration {:?}",
                set.name(),
                fast_witness.map(|p| p.to_string()),
                slow.map(|p| p.to_string())
            ));
        }
    }
    Ok(bad)
}

fn random_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec2<f64> {
    Vec2::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// The parallelogram whose vertices are the corners of `cell`.
fn cell_parallelogram(cell: &Cell, scale: f64) -> Result<Parallelogram> {
    let p = cell.e1 + cell.e2;
    let q = cell.e1 - cell.e2;
    Parallelogram::new(cell.center, Mat2::from_columns(&p, &q), scale)
}

fn quarter(cell: &Cell) -> [Cell; 4] {
    let (h1, h2) = (cell.e1.scale(0.5), cell.e2.scale(0.5));
    let c = cell.center;
    [c + h1 + h2, c + h1 - h2, c - h1 - h2, c - h1 + h2].map(|center| Cell {
        center,
        e1: h1,
        e2: h2,
    })
}

/// Random targets with families of jittered, enlarged quarter pieces; every
/// certified covering is tested on uniformly sampled target points.
/// Returns `(certified, escapes)`.
pub fn check_cover_soundness(
    rng: &mut ChaCha8Rng,
    instances: usize,
    points: usize,
) -> Result<(usize, usize)> {
    let mut certified = 0;
    let mut escapes = 0;
    for _ in 0..instances {
        let (p, q) = loop {
            let (p, q) = (random_vec(rng, 3.0), random_vec(rng, 3.0));
            if Mat2::from_columns(&p, &q).det().abs() > 1.0 {
                break (p, q);
            }
        };
        let target = Parallelogram::new(random_vec(rng, 1.0), Mat2::from_columns(&p, &q), 1.0)?;
        let root = Cell {
            center: target.center,
            e1: (p + q).scale(0.5),
            e2: (p - q).scale(0.5),
        };
        let grow = rng.gen_range(1.0..1.4);
        let mut family = Vec::new();
        for piece in quarter(&root).iter().flat_map(quarter) {
            let jitter = random_vec(rng, 0.05 * piece.e1.norm_inf().max(piece.e2.norm_inf()));
            let moved = Cell {
                center: piece.center + jitter,
                ..piece
            };
            family.push(cell_parallelogram(&moved, grow)?);
        }
        let cert = cover_check(&target, &family, 6)?;
        if !cert.covered {
            continue;
        }
        certified += 1;
        for _ in 0..points {
            let x = sample_in(&target, rng);
            if !family.iter().any(|m| point_in(m, &x)) {
                escapes += 1;
            }
        }
    }
    Ok((certified, escapes))
}

/// `deriv_sup` and `tail_sup` against random prefixes and random tails.
pub fn check_domination(rng: &mut ChaCha8Rng, prefixes: usize) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for _ in 0..prefixes {
        let set = if rng.gen_bool(0.5) { CoefficientSet::double() } else { CoefficientSet::unit() };
        let allowed = set.allowed().to_vec();
        let h = set.height();
        let n = rng.gen_range(0..=30);
        let mut coeffs = vec![1i64];
        coeffs.extend((0..n).map(|_| allowed[rng.gen_range(0..allowed.len())]));
        let p = SignedPolynomial::from_coeffs(coeffs.clone())?;
        let i = rng.gen_range(0..=3usize);
        let b: f64 = rng.gen_range(0.5..0.95);
        let x: f64 = b * rng.gen_range(0.0..=1.0f64).max(1e-3);
        let ev = eval_poly(&p, i, &x);
        let d: f64 = deriv_sup(i, &b, h)?;
        if ev.value.abs() - ev.fp_slack > d {
            bad.push(format!("|P^({i})({x})| exceeds deriv_sup for {p}"));
        }
        // a random class tail of 400 terms after degree n
        let mut full = coeffs;
        full.extend((0..400).map(|_| allowed[rng.gen_range(0..allowed.len())]));
        let f = SignedPolynomial::from_coeffs(full)?;
        let diff = (eval_poly(&f, i, &x).value - ev.value).abs();
        let t: f64 = tail_sup(i, n, &b, h)?;
        if diff > t * (1.0 + 1e-9) + 1e-12 {
            bad.push(format!("tail of order {i} at {x} exceeds tail_sup after {p}"));
        }
    }
    Ok(bad)
}

/// Scan and locus documents agree byte for byte across thread counts.
pub fn check_determinism() -> Result<bool> {
    let cfg = ScanConfig::new((0.6684, 0.6685), 40, 24, 2, CoefficientSet::unit())
        .with_escalation(Escalation::new(3, 2, 30));
    let doc = |threads| -> Result<String> {
        let opts = ScanOptions {
            threads: Some(threads),
            ..ScanOptions::default()
        };
        let cert = scan_with(&cfg, &opts)?;
        Document::new("scan", &cfg, &cert, Verdict::Certified)?.to_json()
    };
    let locus = |threads| -> Result<String> {
        let cfg = LocusConfig::new((0.5, 0.8), (0.5, 0.8), 12, 12, 14);
        let grid = render_locus_2d(&cfg, Some(threads))?;
        Ok(grid.to_csv())
    };
    let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).max(2);
    Ok(doc(1)? == doc(n)? && locus(1)? == locus(n)?)
}

pub fn property_report(seed: u64, sizes: PropertySizes) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prune_disagreements = check_prune_against_enumeration(&mut rng, sizes.prune_cells)?;
    let (cover_certified, cover_escapes) =
        check_cover_soundness(&mut rng, sizes.cover_instances, sizes.cover_points)?;
    let domination_failures = check_domination(&mut rng, sizes.domination_prefixes)?;
    Ok(PropertyReport {
        prune_cells: sizes.prune_cells,
        prune_disagreements,
        cover_instances: sizes.cover_instances,
        cover_certified,
        cover_points: sizes.cover_points,
        cover_escapes,
        domination_prefixes: sizes.domination_prefixes,
        domination_failures,
        deterministic: check_determinism()?,
    })
}

fn properties(opts: &ReproOptions) -> Result<ReproRun> {
    let sizes = PropertySizes::default();
    let report = property_report(opts.seed, sizes)?;
    let summary = format!(
        "prune disagreements {}; coverings certified {}/{} with {} escapes; domination failures {}; deterministic {}",
        report.prune_disagreements.len(),
        report.cover_certified,
        report.cover_instances,
        report.cover_escapes,
        report.domination_failures.len(),
        report.deterministic
    );
    let config: Value = json!({ "seed": opts.seed, "sizes": sizes });
    finish("properties", config, &report, verdict_of(report.holds()), summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_is_rejected() {
        assert!(run("nope", &ReproOptions::default()).is_err());
    }

    #[test]
    fn registry_names_dispatch() {
        // every non-long name is accepted by the dispatcher's match
        for e in EXPERIMENTS.iter().filter(|e| !e.long) {
            assert!(!e.summary.is_empty(), "{}", e.name);
        }
    }

    #[test]
    fn small_property_run() {
        let sizes = PropertySizes {
            prune_cells: 20,
            cover_instances: 3,
            cover_points: 1000,
            domination_prefixes: 50,
        };
        let r = property_report(7, sizes).unwrap();
        assert!(r.holds(), "{r:?}");
    }
}
