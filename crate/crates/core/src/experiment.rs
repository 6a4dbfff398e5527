//! Desk-scale experiment driver: run the pipeline on a point file, extract
//! k-SLC for a list of k, compare against the exact oracle when it fits,
//! and collect a JSON report plus curve rows.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::hamming::{self, hamming_mst};
use crate::io::{load_csv, normalize_zscore};
use crate::oracle::{exact_mst, DENSE_CAP};
use crate::slc::{approximate_mst, k_slc_from_mst, verify_per_edge_guarantee};
use crate::{Error, Metric, MpcConfig, MpcTrace, PointSet, Result, Seed, SlcParams, SpanningTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input_path: Option<PathBuf>,
    pub metric: Metric,
    pub eta: f64,
    pub k_list: Vec<usize>,
    pub repetitions: Option<usize>,
    pub space_s: Option<usize>,
    pub seed: u64,
    pub normalize: bool,
    pub output_path: Option<PathBuf>,
    /// Pipeline runs timed; the median is reported.
    pub timing_runs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input_path: None,
            metric: Metric::L2,
            eta: 0.5,
            k_list: vec![2],
            repetitions: None,
            space_s: None,
            seed: 0,
            normalize: false,
            output_path: None,
            timing_runs: 3,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> SlcParams {
        let mut p = SlcParams::new(self.eta, Seed(self.seed));
        p.repetitions = self.repetitions;
        p.mpc = self.space_s.map(|s| MpcConfig {
            space_s: s,
            ..MpcConfig::default()
        });
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRow {
    pub k: usize,
    /// `None` for `k = 1`, where no inter-cluster distance exists.
    pub approx_objective: Option<f64>,
    pub oracle_objective: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSummary {
    pub max_ratio: f64,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub space_s: usize,
    pub rounds: usize,
    pub level_rounds: usize,
    pub graph_rounds: usize,
    pub max_machines: usize,
    pub max_words: usize,
    pub msg_words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub approx_ms: f64,
    pub oracle_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub n: usize,
    pub dim: usize,
    pub eps: Option<f64>,
    pub levels: Option<usize>,
    pub repetitions: Option<usize>,
    pub sparsifier_edges: Option<usize>,
    pub per_k: Vec<KRow>,
    /// Per-index comparison with the exact tree, when the oracle ran.
    pub edges: Option<EdgeSummary>,
    pub trace: TraceSummary,
    pub timings: Timings,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `k,approx_objective,oracle_objective,ratio`; missing values are empty.
    pub fn write_curve_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "approx_objective", "oracle_objective", "ratio"])
            .map_err(|e| Error::Io(e.into()))?;
        let cell = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
        for r in &self.per_k {
            w.write_record([r.k.to_string(), cell(r.approx_objective), cell(r.oracle_objective), cell(r.ratio)])
                .map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Loads `cfg.input_path` and runs [`run_on_points`].
pub fn run_experiment(cfg: &RunConfig) -> Result<Report> {
    let path = cfg
        .input_path
        .as_ref()
        .ok_or_else(|| Error::input("run needs an input path"))?;
    let ps = load_csv(path, cfg.metric).map_err(|e| e.context("io"))?;
    run_on_points(&ps, cfg)
}

struct Built {
    tree: SpanningTree,
    trace: MpcTrace,
    level_rounds: usize,
    space_s: usize,
    eps: Option<f64>,
    levels: Option<usize>,
    repetitions: Option<usize>,
    sparsifier_edges: Option<usize>,
}

fn build(ps: &PointSet, cfg: &RunConfig) -> Result<Built> {
    if ps.metric() == Metric::L0 {
        let mpc = cfg
            .params()
            .mpc
            .unwrap_or_else(|| hamming::default_config(ps.len(), ps.dim()));
        let (tree, trace) = hamming_mst(ps, &mpc).map_err(|e| e.context("hamming"))?;
        return Ok(Built {
            tree,
            trace,
            level_rounds: 0,
            space_s: mpc.space_s,
            eps: None,
            levels: None,
            repetitions: None,
            sparsifier_edges: None,
        });
    }
    let run = approximate_mst(ps, &cfg.params()).map_err(|e| e.context("slc"))?;
    Ok(Built {
        trace: run.trace(),
        level_rounds: run.level_trace.rounds(),
        space_s: run.mpc.space_s,
        eps: Some(run.eps),
        levels: Some(run.partition.levels),
        repetitions: Some(run.repetitions),
        sparsifier_edges: Some(run.sparsifier_edges),
        tree: run.tree,
    })
}

/// Runs the pipeline (Hamming MST for `l0`) on `ps`, normalizing first
/// when the config asks for it.
pub fn run_on_points(ps: &PointSet, cfg: &RunConfig) -> Result<Report> {
    let normalized;
    let ps = if cfg.normalize {
        normalized = normalize_zscore(ps).map_err(|e| e.context("io"))?;
        &normalized
    } else {
        ps
    };
    let n = ps.len();
    if let Some(&k) = cfg.k_list.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::input(format!("k = {k} outside 1..={n}")));
    }

    let mut times = Vec::new();
    let mut built = None;
    for _ in 0..cfg.timing_runs.max(1) {
        let start = Instant::now();
        let b = build(ps, cfg)?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        built.get_or_insert(b);
    }
    let built = built.expect("at least one run");
    times.sort_by(f64::total_cmp);
    let approx_ms = times[times.len() / 2];

    let (exact, oracle_ms) = if n <= DENSE_CAP {
        let start = Instant::now();
        let t = exact_mst(ps).map_err(|e| e.context("oracle"))?;
        (Some(t), Some(start.elapsed().as_secs_f64() * 1e3))
    } else {
        (None, None)
    };

    let mut ks = cfg.k_list.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut per_k = Vec::with_capacity(ks.len());
    for k in ks {
        let approx = k_slc_from_mst(&built.tree, k, n)?.objective;
        let oracle = match &exact {
            Some(t) => k_slc_from_mst(t, k, n)?.objective,
            None => None,
        };
        let ratio = match (approx, oracle) {
            (Some(a), Some(o)) if o > 0.0 => Some(a / o),
            (Some(a), Some(o)) if a == o => Some(1.0),
            _ => None,
        };
        per_k.push(KRow {
            k,
            approx_objective: approx,
            oracle_objective: oracle,
            ratio,
        });
    }

    let edges = match &exact {
        Some(t) => {
            let r = verify_per_edge_guarantee(&built.tree, t, cfg.eta)?;
            Some(EdgeSummary {
                max_ratio: r.max_ratio,
                lower_violations: r.lower_violations.len(),
                upper_violations: r.upper_violations.len(),
                within_bound: r.holds(),
            })
        }
        None => None,
    };

    let trace = TraceSummary {
        space_s: built.space_s,
        rounds: built.trace.rounds(),
        level_rounds: built.level_rounds,
        graph_rounds: built.trace.rounds() - built.level_rounds,
        max_machines: built.trace.max_machines(),
        max_words: built.trace.max_words(),
        msg_words: built.trace.total_msg_words(),
    };
    Ok(Report {
        config: cfg.clone(),
        n,
        dim: ps.dim(),
        eps: built.eps,
        levels: built.levels,
        repetitions: built.repetitions,
        sparsifier_edges: built.sparsifier_edges,
        per_k,
        edges,
        trace,
        timings: Timings { approx_ms, oracle_ms },
    })
}

/// Path of the curve CSV written next to a report.
pub fn curve_path(report_path: &Path) -> PathBuf {
    report_path.with_extension("curve.csv")
}
