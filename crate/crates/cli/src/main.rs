//! `zeroset`: runs certification jobs and writes certificate documents.
//!
//! Exit status: 0 certified, 1 negative, 2 inconclusive, 3 usage error,
//! 4 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zeroset::affine::{
    locus_interior_test, max_passing_eta, robustness_eta, trivial_connected, verify_covering_lemma,
    ChainInput, CoveringSetup, InteriorKind, Mat2,
};
use zeroset::certificate::{write_atomic, Document, Verdict};
use zeroset::error::Error;
use zeroset::locus::{render_locus_2d, LocusConfig};
use zeroset::prune::{prune, ExclusionQuery, PruneLimits, PruneOutcome, TestSettings};
use zeroset::repro::{self, ReproOptions, COVER_DEPTH, EXPERIMENTS};
use zeroset::roots::{check_good, localize_double_root, GoodError};
use zeroset::scan::{scan_with, Escalation, ScanConfig, ScanOptions};
use zeroset::series::{CoefficientSet, DerivBound, FpModel, SignedPolynomial};

/// Directory for certificates when `--out` is not given.
const OUT_DIR_ENV: &str = "ZEROSET_OUT_DIR";

const EXIT_USAGE: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "zeroset", version, about = "Certified zero sets of restricted power series and covering proofs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Certificate path; defaults to $ZEROSET_OUT_DIR/<job>.json, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Exec {
    /// Worker threads (default: all cores). Does not affect the output.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SetName {
    B1,
    B2,
}

impl SetName {
    fn set(self) -> CoefficientSet {
        match self {
            SetName::B1 => CoefficientSet::unit(),
            SetName::B2 => CoefficientSet::double(),
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FpName {
    Horner,
    Flat14,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BoundName {
    Class,
    Published,
}

#[derive(Args, Debug, Clone)]
struct Inequalities {
    /// Multiplicity of the zeros excluded.
    #[arg(long = "mult", default_value_t = 2)]
    mult: usize,
    #[arg(long, value_enum, default_value = "b1")]
    set: SetName,
    #[arg(long = "fp-model", value_enum, default_value = "horner")]
    fp_model: FpName,
    /// Constant multiplying the interval width.
    #[arg(long = "deriv-bound", value_enum, default_value = "class")]
    deriv_bound: BoundName,
}

impl Inequalities {
    fn settings(&self) -> TestSettings {
        TestSettings {
            fp_model: match self.fp_model {
                FpName::Horner => FpModel::Horner,
                FpName::Flat14 => FpModel::Flat14,
            },
            deriv_bound: match self.deriv_bound {
                BoundName::Class => DerivBound::Class,
                BoundName::Published => DerivBound::Published,
            },
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KindName {
    Diag,
    Jordan,
    Rotation,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grid scan for gaps free of multiple zeros.
    Scan {
        /// Range as `a,b`.
        #[arg(long, value_parser = pair)]
        range: (f64, f64),
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        ineq: Inequalities,
        /// Refinement of survivors as `rounds,step,max_depth`.
        #[arg(long, value_parser = triple)]
        escalate: Option<(usize, usize, usize)>,
        /// Per-search node budget.
        #[arg(long = "node-limit")]
        node_limit: Option<u64>,
        /// Resume from and save progress to this file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Stop after this many grid cells (exit 2); resume with the same
        /// checkpoint.
        #[arg(long = "max-cells")]
        max_cells: Option<usize>,
        #[command(flatten)]
        exec: Exec,
        #[command(flatten)]
        output: Output,
    },
    /// Exclusion search on a single interval.
    Prune {
        #[arg(long, value_parser = pair)]
        range: (f64, f64),
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        ineq: Inequalities,
        /// Starting prefix (default `1`).
        #[arg(long, default_value = "1")]
        prefix: String,
        #[arg(long = "node-limit")]
        node_limit: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Checks that a polynomial forms a good tuple on `[a, b]`.
    GoodCheck {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 1)]
        height: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Localizes the double zero forced by a good tuple.
    Localize {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Lower bound for P″ to certify (default: chosen automatically).
        #[arg(long)]
        c2: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Verifies the parallelogram covering.
    CoverVerify {
        #[arg(long, default_value_t = COVER_DEPTH)]
        depth: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Perturbation chain for the covering.
    Robustness {
        #[arg(long, default_value_t = 4e-6)]
        eta: f64,
        /// Also search for the largest passing η.
        #[arg(long)]
        search: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Interior test for the connectedness loci.
    Interior {
        #[arg(long, value_enum)]
        kind: KindName,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        /// Imaginary part of the eigenvalue (rotation case).
        #[arg(long)]
        im: Option<f64>,
        #[arg(long, default_value_t = 4e-6)]
        eta: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Determinant criterion for connectedness.
    Trivial {
        /// Row-major entries `a,b,c,d`.
        #[arg(long, value_parser = matrix)]
        t1: Mat2<f64>,
        #[arg(long, value_parser = matrix)]
        t2: Mat2<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Membership grid of the diagonal locus (P2 graymap plus CSV).
    LocusRender {
        #[arg(long, value_parser = pair, default_value = "0.5,0.9")]
        gamma: (f64, f64),
        #[arg(long, value_parser = pair, default_value = "0.5,0.9")]
        lambda: (f64, f64),
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Image path; defaults to the certificate path with `.pgm`.
        #[arg(long)]
        pgm: Option<PathBuf>,
        /// Label table; defaults to the certificate path with `.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        exec: Exec,
        #[command(flatten)]
        output: Output,
    },
    /// Replays a named experiment.
    Repro {
        /// Experiment name; `--list` shows them.
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        exec: Exec,
        #[command(flatten)]
        output: Output,
    },
}

fn numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|t| f64::from_str(t.trim()).map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn pair(s: &str) -> Result<(f64, f64), String> {
    let v = numbers(s, 2)?;
    Ok((v[0], v[1]))
}

fn triple(s: &str) -> Result<(usize, usize, usize), String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match v.as_slice() {
        [r] => Ok((*r, 5, 60)),
        [r, s] => Ok((*r, *s, 60)),
        [r, s, m] => Ok((*r, *s, *m)),
        _ => Err("expected rounds[,step[,max_depth]]".into()),
    }
}

fn matrix(s: &str) -> Result<Mat2<f64>, String> {
    let v = numbers(s, 4)?;
    Ok(Mat2::new(v[0], v[1], v[2], v[3]))
}

/// A job's outcome before it is written.
struct Finished {
    kind: &'static str,
    verdict: Verdict,
    summary: String,
    json: String,
}

fn document(kind: &'static str, config: Value, result: Value, verdict: Verdict, summary: String) -> Result<Finished, Error> {
    let json = Document::new(kind, config, result, verdict)?.to_json()?;
    Ok(Finished {
        kind,
        verdict,
        summary,
        json,
    })
}

fn verdict_of(ok: bool) -> Verdict {
    if ok {
        Verdict::Certified
    } else {
        Verdict::Negative
    }
}

fn parse_poly(text: &str, set: &CoefficientSet) -> Result<SignedPolynomial, Error> {
    SignedPolynomial::parse(text, set)
}

fn destination(output: &Output, kind: &str) -> Option<PathBuf> {
    output.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| Path::new(&d).join(format!("{}.json", kind.replace('/', "-"))))
    })
}

fn run(command: Command) -> Result<(Finished, Output), Error> {
    Ok(match command {
        Command::Scan {
            range,
            grid,
            depth,
            ineq,
            escalate,
            node_limit,
            checkpoint,
            max_cells,
            exec,
            output,
        } => {
            let mut cfg = ScanConfig::new(range, grid, depth, ineq.mult, ineq.set.set()).with_settings(ineq.settings());
            if let Some((r, s, m)) = escalate {
                cfg = cfg.with_escalation(Escalation::new(r, s, m));
            }
            if let Some(n) = node_limit {
                cfg.node_limit = n;
            }
            let opts = ScanOptions {
                threads: exec.threads,
                checkpoint,
                chunk: 0,
                budget: max_cells,
            };
            let cert = scan_with(&cfg, &opts)?;
            let ok = cert.fully_excluded();
            let summary = format!("{} gaps, {} surviving cells", cert.gaps.len(), cert.survivors.len());
            let f = document("scan", json!(cfg), json!(cert), verdict_of(ok), summary)?;
            (f, output)
        }
        Command::Prune {
            range,
            depth,
            ineq,
            prefix,
            node_limit,
            output,
        } => {
            let set = ineq.set.set();
            let prefix = parse_poly(&prefix, &set)?;
            let q = ExclusionQuery::new(range.0, range.1, ineq.mult, set, depth)?;
            let mut limits = PruneLimits::default();
            if let Some(n) = node_limit {
                limits.max_nodes = n;
            }
            let report = prune(&q, &prefix, ineq.settings(), limits)?;
            let (ok, summary) = match &report.outcome {
                PruneOutcome::Excluded => (true, format!("excluded after {} nodes", report.nodes)),
                PruneOutcome::Survivor(p) => (false, format!("survivor {p}")),
            };
            let config = json!({
                "range": range,
                "depth": depth,
                "multiplicity": ineq.mult,
                "set": q.set,
                "settings": ineq.settings(),
                "prefix": prefix,
                "node_limit": limits.max_nodes,
            });
            let f = document("prune", config, json!(report), verdict_of(ok), summary)?;
            (f, output)
        }
        Command::GoodCheck { poly, a, b, height, output } => {
            let set = if height >= 2 { CoefficientSet::double() } else { CoefficientSet::unit() };
            let p = parse_poly(&poly, &set)?;
            let config = json!({ "poly": p, "a": a, "b": b, "height": height });
            let f = match check_good(&p, a, b, height) {
                Ok(g) => {
                    let s = format!("good: ratios {}, {}; dip {} at {}", g.ratio_a, g.ratio_b, g.dip_ratio, g.witness_x);
                    document("good-check", config, json!(g), Verdict::Certified, s)?
                }
                Err(GoodError::Invalid(e)) => return Err(e),
                Err(e) => {
                    let inconclusive = matches!(e, GoodError::NotPositive { proven: false, .. });
                    let v = if inconclusive { Verdict::Inconclusive } else { Verdict::Negative };
                    document("good-check", config, json!({ "failure": e.to_string() }), v, e.to_string())?
                }
            };
            (f, output)
        }
        Command::Localize { poly, a, b, c2, output } => {
            let p = parse_poly(&poly, &CoefficientSet::unit())?;
            let config = json!({ "poly": p, "a": a, "b": b, "c2": c2 });
            let f = match check_good(&p, a, b, 1) {
                Err(GoodError::Invalid(e)) => return Err(e),
                Err(e) => document("localize", config, json!({ "failure": e.to_string() }), Verdict::Negative, e.to_string())?,
                Ok(g) => match localize_double_root(&g, c2) {
                    Ok(l) => {
                        let s = format!("double zero in ({}, {})", l.lo, l.hi);
                        document("localize", config, json!({ "good": g, "localization": l }), Verdict::Certified, s)?
                    }
                    Err(e) => document("localize", config, json!({ "good": g, "failure": e.to_string() }), Verdict::Negative, e.to_string())?,
                },
            };
            (f, output)
        }
        Command::CoverVerify { depth, output } => {
            let setup = CoveringSetup::default();
            let lemma = verify_covering_lemma(&setup, depth)?;
            let s = format!(
                "covered {} at depth {} ({} leaves, {} nodes)",
                lemma.cover.covered, depth, lemma.cover.leaf_count, lemma.cover.nodes
            );
            let v = if lemma.holds() {
                Verdict::Certified
            } else if !lemma.anchor_in_inner {
                Verdict::Negative
            } else {
                // a deeper run may still succeed
                Verdict::Inconclusive
            };
            let f = document("cover-verify", json!({ "setup": setup, "depth": depth }), json!(lemma), v, s)?;
            (f, output)
        }
        Command::Robustness { eta, search, output } => {
            let input = ChainInput::default();
            let config = json!({ "input": input, "eta": eta, "search": search });
            let max = if search { Some(max_passing_eta(&input)?) } else { None };
            let f = match robustness_eta(&input, eta) {
                Ok(chain) => {
                    let s = format!("δ′ = {} vs margin {}: {}", chain.delta_prime, chain.margin, chain.verdict);
                    let v = verdict_of(chain.verdict);
                    document("robustness", config, json!({ "chain": chain, "max_passing_eta": max }), v, s)?
                }
                Err(e) => document(
                    "robustness",
                    config,
                    json!({ "chain_break": e.to_string(), "max_passing_eta": max }),
                    Verdict::Negative,
                    e.to_string(),
                )?,
            };
            (f, output)
        }
        Command::Interior {
            kind,
            gamma,
            lambda,
            rho,
            im,
            eta,
            output,
        } => {
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Domain(format!("--{name} is required for this kind")));
            let k = match kind {
                KindName::Diag => InteriorKind::Diag {
                    gamma: need(gamma, "gamma")?,
                    lambda: need(lambda, "lambda")?,
                },
                KindName::Jordan => InteriorKind::Jordan { lambda: need(lambda, "lambda")? },
                KindName::Rotation => InteriorKind::Rotation {
                    rho: need(rho, "rho")?,
                    im: need(im, "im")?,
                },
            };
            let r = locus_interior_test(k, eta)?;
            let s = format!("‖M − T‖ ≤ {} {} η = {}", r.distance, if r.inside { "<" } else { "≥" }, eta);
            let f = document("interior", json!({ "kind": k, "eta": eta }), json!(r), verdict_of(r.inside), s)?;
            (f, output)
        }
        Command::Trivial { t1, t2, output } => {
            let config = json!({ "t1": t1, "t2": t2 });
            let f = match trivial_connected(&t1, &t2) {
                Ok(ok) => document(
                    "trivial",
                    config,
                    json!({ "connected": ok, "det1": t1.det(), "det2": t2.det() }),
                    verdict_of(ok),
                    format!("|det T1| + |det T2| ≥ 1: {ok}"),
                )?,
                Err(e) => return Err(Error::Domain(e.to_string())),
            };
            (f, output)
        }
        Command::LocusRender {
            gamma,
            lambda,
            width,
            height,
            depth,
            pgm,
            csv,
            exec,
            output,
        } => {
            let cfg = LocusConfig::new(gamma, lambda, width, height, depth);
            let grid = render_locus_2d(&cfg, exec.threads)?;
            let base = destination(&output, "locus-render");
            let side = |explicit: Option<PathBuf>, ext: &str| {
                explicit.or_else(|| base.as_ref().map(|b| b.with_extension(ext)))
            };
            let (pgm, csv) = (side(pgm, "pgm"), side(csv, "csv"));
            if let Some(p) = &pgm {
                write_atomic(p, grid.to_pgm().as_bytes())?;
            }
            if let Some(p) = &csv {
                write_atomic(p, grid.to_csv().as_bytes())?;
            }
            let s = format!(
                "{} excluded, {} trivial, {} unknown",
                grid.excluded, grid.trivial, grid.unknown
            );
            let result = json!({
                "excluded": grid.excluded,
                "trivial": grid.trivial,
                "unknown": grid.unknown,
                "nodes": grid.nodes,
                "pgm": pgm,
                "csv": csv,
            });
            // labels are certified either way; unknown pixels are simply undecided
            let f = document("locus-render", json!(cfg), result, Verdict::Certified, s)?;
            (f, output)
        }
        Command::Repro {
            name,
            list,
            seed,
            checkpoint,
            exec,
            output,
        } => {
            if list {
                for e in EXPERIMENTS {
                    println!("{:<14} {}{}", e.name, e.summary, if e.long { " (long)" } else { "" });
                }
                std::process::exit(0);
            }
            let name = name.expect("clap enforces a name");
            let opts = ReproOptions {
                threads: exec.threads,
                seed,
                checkpoint,
            };
            let r = repro::run(&name, &opts)?;
            let kind: &'static str = EXPERIMENTS
                .iter()
                .find(|e| e.name == name)
                .map(|e| e.name)
                .unwrap_or("repro");
            let f = Finished {
                kind,
                verdict: r.verdict,
                summary: r.summary,
                json: r.json,
            };
            (f, output)
        }
    })
}

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Certified => 0,
        Verdict::Negative => 1,
        Verdict::Inconclusive => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok((f, output)) => {
            let dest = destination(&output, f.kind);
            match &dest {
                Some(path) => {
                    if let Err(e) = write_atomic(path, f.json.as_bytes()) {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_INTERNAL);
                    }
                    eprintln!("{}: {}", f.kind, f.summary);
                    eprintln!("certificate written to {}", path.display());
                }
                None => {
                    print!("{}", f.json);
                    eprintln!("{}: {}", f.kind, f.summary);
                }
            }
            ExitCode::from(exit_code(f.verdict))
        }
        Err(e) if e.is_resource_limit() => {
            eprintln!("inconclusive: {e}");
            ExitCode::from(exit_code(Verdict::Inconclusive))
        }
        Err(e @ (Error::Io(_) | Error::Checkpoint(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INTERNAL)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
