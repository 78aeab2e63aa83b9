//! Grid scans of a range for gaps in the multiple-zero set.
//!
//! The range is cut into `N` cells, each cell is handed to [`prune`], and
//! surviving cells are optionally refined: each escalation halves the cell
//! and deepens the search, because the width term of the exclusion
//! inequality grows relative to the shrinking tail as the depth increases.
//! Cells run in parallel; their results are folded strictly in index order,
//! so the certificate does not depend on scheduling or thread count.
//!
//! An excluded cell `(a, b)` certifies `(a, b]` (the test at `b` covers
//! `r = b`), so neighbouring excluded cells leave no point uncovered and the
//! merged gap is the open interval between its outer endpoints.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{digest_of, write_atomic};
use crate::error::{Error, Result};
use crate::prune::{
    exclusion_tests, prune, ExclusionQuery, PruneLimits, PruneOutcome, TestSettings,
};
use crate::series::{CoefficientSet, SignedPolynomial};

/// Refinement schedule for surviving cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Escalation {
    /// How many times a survivor may be halved.
    pub rounds: usize,
    /// Depth added per halving.
    pub depth_step: usize,
    /// Depth never exceeds this.
    pub max_depth: usize,
}

impl Escalation {
    pub fn none() -> Self {
        Self {
            rounds: 0,
            depth_step: 5,
            max_depth: 60,
        }
    }

    pub fn new(rounds: usize, depth_step: usize, max_depth: usize) -> Self {
        Self {
            rounds,
            depth_step,
            max_depth,
        }
    }
}

impl Default for Escalation {
    fn default() -> Self {
        Self::none()
    }
}

/// Everything that determines the outcome of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub range: (f64, f64),
    pub grid: usize,
    pub depth: usize,
    pub multiplicity: usize,
    pub set: CoefficientSet,
    pub settings: TestSettings,
    pub escalation: Escalation,
    /// Per-search node budget; exceeding it aborts the scan.
    pub node_limit: u64,
}

impl ScanConfig {
    pub fn new(range: (f64, f64), grid: usize, depth: usize, multiplicity: usize, set: CoefficientSet) -> Self {
        Self {
            range,
            grid,
            depth,
            multiplicity,
            set,
            settings: TestSettings::default(),
            escalation: Escalation::none(),
            node_limit: PruneLimits::default().max_nodes,
        }
    }

    pub fn with_escalation(mut self, escalation: Escalation) -> Self {
        self.escalation = escalation;
        self
    }

    pub fn with_settings(mut self, settings: TestSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range;
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(Error::Domain(format!("need 0 < a < b < 1, got ({lo}, {hi})")));
        }
        if self.grid == 0 {
            return Err(Error::Domain("grid must have at least one cell".into()));
        }
        if self.cell_bounds(0).0 >= self.cell_bounds(0).1 {
            return Err(Error::Domain("grid too fine for double precision".into()));
        }
        ExclusionQuery::new(lo, hi, self.multiplicity, self.set.clone(), self.depth)?;
        Ok(())
    }

    /// Endpoints of cell `i`: `a + i·(b−a)/N`, with the last endpoint pinned
    /// to `b`. Adjacent cells share the same computed endpoint.
    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.grid_point(i), self.grid_point(i + 1))
    }

    fn grid_point(&self, i: usize) -> f64 {
        let (lo, hi) = self.range;
        if i >= self.grid {
            hi
        } else {
            lo + i as f64 * ((hi - lo) / self.grid as f64)
        }
    }

    fn limits(&self) -> PruneLimits {
        PruneLimits {
            max_nodes: self.node_limit,
        }
    }
}

/// Maximal run of excluded cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    /// Deepest search any of its cells needed.
    pub max_depth: usize,
}

/// A cell that survived every escalation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivingCell {
    /// Index of the base grid cell it came from.
    pub cell: usize,
    pub lo: f64,
    pub hi: f64,
    pub depth: usize,
    pub witness: SignedPolynomial,
}

/// Result of [`scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub gaps: Vec<Gap>,
    pub survivors: Vec<SurvivingCell>,
    /// Number of final cells (after refinement) by search depth.
    pub depth_histogram: BTreeMap<usize, u64>,
    pub nodes: u64,
}

impl GapCertificate {
    /// True when a single gap spans the whole range.
    pub fn fully_excluded(&self) -> bool {
        self.survivors.is_empty() && self.gaps.len() == 1
    }
}

/// Execution knobs that do not affect the result.
#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    /// File to checkpoint to and resume from.
    pub checkpoint: Option<PathBuf>,
    /// Cells per checkpoint; `0` means the default of 10⁴.
    pub chunk: usize,
    /// Most cells to process in this call. An unfinished scan then returns
    /// [`Error::Interrupted`], and with a checkpoint a later call resumes.
    pub budget: Option<usize>,
}

const DEFAULT_CHUNK: usize = 10_000;

#[derive(Debug, Clone)]
struct Leaf {
    lo: f64,
    hi: f64,
    depth: usize,
    nodes: u64,
    outcome: PruneOutcome,
}

/// Prunes one cell, halving and deepening survivors as the schedule allows.
/// Leaves are appended left to right.
fn refine(
    cfg: &ScanConfig,
    prefixes: &[SignedPolynomial],
    lo: f64,
    hi: f64,
    depth: usize,
    rounds: usize,
    out: &mut Vec<Leaf>,
) -> Result<()> {
    let q = ExclusionQuery::new(lo, hi, cfg.multiplicity, cfg.set.clone(), depth)?;
    let mut nodes = 0;
    let mut outcome = PruneOutcome::Excluded;
    for p in prefixes {
        if p.degree() > 0 && !ancestors_pass(p, lo, hi, cfg)? {
            continue;
        }
        let sub = ExclusionQuery {
            depth: depth.saturating_sub(p.degree()),
            ..q.clone()
        };
        let r = prune(&sub, p, cfg.settings, cfg.limits())?;
        nodes += r.nodes;
        if !r.outcome.is_excluded() {
            outcome = r.outcome;
            break;
        }
    }
    let mid = lo + (hi - lo) / 2.0;
    if outcome.is_excluded() || rounds == 0 || !(lo < mid && mid < hi) {
        out.push(Leaf {
            lo,
            hi,
            depth,
            nodes,
            outcome,
        });
        return Ok(());
    }
    let next = (depth + cfg.escalation.depth_step).min(cfg.escalation.max_depth.max(depth));
    let before = out.len();
    refine(cfg, prefixes, lo, mid, next, rounds - 1, out)?;
    refine(cfg, prefixes, mid, hi, next, rounds - 1, out)?;
    out[before].nodes += nodes;
    Ok(())
}

/// True when every proper initial part of `p` (degree ≥ 0) passes the tests.
fn ancestors_pass(p: &SignedPolynomial, lo: f64, hi: f64, cfg: &ScanConfig) -> Result<bool> {
    for d in 0..p.degree() {
        if !exclusion_tests(&p.truncated(d), &lo, &hi, cfg.multiplicity, &cfg.set, cfg.settings)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fold state; also the checkpoint payload.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Accumulator {
    next_cell: usize,
    gaps: Vec<Gap>,
    open: Option<Gap>,
    survivors: Vec<SurvivingCell>,
    depth_histogram: BTreeMap<usize, u64>,
    nodes: u64,
}

impl Accumulator {
    fn push(&mut self, cell: usize, leaf: Leaf) {
        self.nodes += leaf.nodes;
        *self.depth_histogram.entry(leaf.depth).or_default() += 1;
        match leaf.outcome {
            PruneOutcome::Excluded => match &mut self.open {
                Some(g) => {
                    g.hi = leaf.hi;
                    g.max_depth = g.max_depth.max(leaf.depth);
                }
                None => {
                    self.open = Some(Gap {
                        lo: leaf.lo,
                        hi: leaf.hi,
                        max_depth: leaf.depth,
                    })
                }
            },
            PruneOutcome::Survivor(witness) => {
                if let Some(g) = self.open.take() {
                    self.gaps.push(g);
                }
                self.survivors.push(SurvivingCell {
                    cell,
                    lo: leaf.lo,
                    hi: leaf.hi,
                    depth: leaf.depth,
                    witness,
                });
            }
        }
    }

    fn finish(mut self) -> GapCertificate {
        if let Some(g) = self.open.take() {
            self.gaps.push(g);
        }
        GapCertificate {
            gaps: self.gaps,
            survivors: self.survivors,
            depth_histogram: self.depth_histogram,
            nodes: self.nodes,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    config_digest: String,
    state: Accumulator,
}

fn load_checkpoint(path: &Path, digest: &str) -> Result<Option<Accumulator>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let cp: Checkpoint =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if cp.config_digest != digest {
        return Err(Error::Checkpoint(format!(
            "{} was written for a different configuration",
            path.display()
        )));
    }
    Ok(Some(cp.state))
}

pub(crate) fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Domain(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

fn drive(
    cfg: &ScanConfig,
    opts: &ScanOptions,
    prefixes: &[SignedPolynomial],
) -> Result<GapCertificate> {
    cfg.validate()?;
    let digest = digest_of(&(cfg, prefixes))?;
    let mut acc = match &opts.checkpoint {
        Some(path) => load_checkpoint(path, &digest)?.unwrap_or_default(),
        None => Accumulator::default(),
    };
    let chunk = if opts.chunk == 0 { DEFAULT_CHUNK } else { opts.chunk };
    let mut budget = opts.budget.unwrap_or(usize::MAX);
    while acc.next_cell < cfg.grid {
        if budget == 0 {
            return Err(Error::Interrupted {
                next_cell: acc.next_cell,
                grid: cfg.grid,
            });
        }
        let start = acc.next_cell;
        let end = (start + chunk.min(budget)).min(cfg.grid);
        budget -= end - start;
        let results: Vec<Result<Vec<Leaf>>> = with_pool(opts.threads, || {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let (lo, hi) = cfg.cell_bounds(i);
                    let mut leaves = Vec::new();
                    refine(cfg, prefixes, lo, hi, cfg.depth, cfg.escalation.rounds, &mut leaves)
                        .map_err(|e| Error::CellAborted {
                            index: i,
                            source: Box::new(e),
                        })?;
                    Ok(leaves)
                })
                .collect()
        })?;
        for (offset, leaves) in results.into_iter().enumerate() {
            for leaf in leaves? {
                acc.push(start + offset, leaf);
            }
        }
        acc.next_cell = end;
        if let Some(path) = &opts.checkpoint {
            let cp = Checkpoint {
                config_digest: digest.clone(),
                state: acc.clone(),
            };
            write_atomic(path, &serde_json::to_vec(&cp)?)?;
        }
    }
    Ok(acc.finish())
}

/// Scans `cfg.range` and merges excluded cells into maximal gaps.
pub fn scan(cfg: &ScanConfig) -> Result<GapCertificate> {
    scan_with(cfg, &ScanOptions::default())
}

/// [`scan`] with an explicit thread count and optional checkpoint file.
///
/// With a checkpoint path, progress is saved after every chunk of cells and
/// an existing checkpoint for the same configuration is resumed.
pub fn scan_with(cfg: &ScanConfig, opts: &ScanOptions) -> Result<GapCertificate> {
    drive(cfg, opts, &[SignedPolynomial::one()])
}

/// Result of [`survivor_prefix_property`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixProperty {
    pub required: SignedPolynomial,
    /// True when no surviving prefix of degree ≥ `required.degree()` starts
    /// differently from `required`.
    pub holds: bool,
    /// Cells where a prefix other than `required` survived, with its witness.
    pub violations: Vec<SurvivingCell>,
    pub nodes: u64,
}

/// Checks that on every cell of the scan, every surviving prefix whose
/// degree reaches that of `required` extends `required`.
///
/// Each competing prefix of the same degree is pruned separately (after its
/// ancestors are confirmed to pass); a competitor that survives its cell at
/// the final escalation is a violation.
pub fn survivor_prefix_property(
    cfg: &ScanConfig,
    required: &SignedPolynomial,
    opts: &ScanOptions,
) -> Result<PrefixProperty> {
    required.check_in(&cfg.set)?;
    let holds_vacuously = cfg.depth < required.degree() || required.degree() == 0;
    let competitors: Vec<SignedPolynomial> = if holds_vacuously {
        Vec::new()
    } else {
        prefixes_of_degree(&cfg.set, required.degree())
            .into_iter()
            .filter(|p| p != required)
            .collect()
    };
    if competitors.is_empty() {
        cfg.validate()?;
        return Ok(PrefixProperty {
            required: required.clone(),
            holds: true,
            violations: Vec::new(),
            nodes: 0,
        });
    }
    let cert = drive(cfg, opts, &competitors)?;
    Ok(PrefixProperty {
        required: required.clone(),
        holds: cert.survivors.is_empty(),
        violations: cert.survivors,
        nodes: cert.nodes,
    })
}

/// All class prefixes of exactly degree `n`, in search order.
pub fn prefixes_of_degree(set: &CoefficientSet, n: usize) -> Vec<SignedPolynomial> {
    let mut out = vec![SignedPolynomial::one()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|p| set.allowed().iter().map(move |&c| p.extended(c)))
            .collect();
    }
    out
}
