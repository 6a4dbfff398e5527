use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mpc_slc::experiment::{curve_path, run_experiment, RunConfig};
use mpc_slc::hamming::{default_config, hamming_mst};
use mpc_slc::hardness::{gen_cycle_vectors, gen_edge_vectors, gen_hamming_points, jl_project, GraphInstance, JlParams, DEFAULT_C_JL};
use mpc_slc::io::{load_csv, normalize_zscore, write_csv_to, write_sparse};
use mpc_slc::oracle::exact_mst;
use mpc_slc::{approximate_mst, verify_per_edge_guarantee, Metric, MpcTrace, Result, Seed};

#[derive(Parser)]
#[command(name = "slc", version, about = "Single-linkage clustering on a simulated MPC runtime")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "l2")]
    metric: Metric,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    space_s: Option<usize>,
    #[arg(long)]
    normalize: bool,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            input_path: Some(self.input.clone()),
            metric: self.metric,
            eta: self.eta,
            repetitions: self.repetitions,
            space_s: self.space_s,
            seed: self.seed,
            normalize: self.normalize,
            ..RunConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline and write a JSON report plus a k-curve CSV.
    Run {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cluster counts.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        k: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        timing_runs: usize,
    },
    /// Write a hardness instance.
    GenHardness {
        #[arg(long)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "l2")]
        metric: Metric,
        /// Use two disjoint cycles as the source graph for connectivity and
        /// hamming instances.
        #[arg(long)]
        disconnected: bool,
        /// Project to `⌈8 ln n / eps²⌉` dimensions.
        #[arg(long)]
        jl_eps: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "dense")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the approximate tree with the exact one; exit 1 on any
    /// per-index violation.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Write the round trace as JSON lines.
    TraceDump {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cycle,
    Twocycles,
    Connectivity,
    Hamming,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dense,
    Sparse,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn load(common: &Common) -> Result<mpc_slc::PointSet> {
    let ps = load_csv(&common.input, common.metric).map_err(|e| e.context("io"))?;
    if common.normalize {
        normalize_zscore(&ps)
    } else {
        Ok(ps)
    }
}

fn tree_and_trace(common: &Common) -> Result<(mpc_slc::PointSet, mpc_slc::SpanningTree, MpcTrace)> {
    let ps = load(common)?;
    let params = common.config().params();
    if ps.metric() == Metric::L0 {
        let (t, trace) = hamming_mst(&ps, &params.mpc.unwrap_or_else(|| default_config(ps.len(), ps.dim())))?;
        return Ok((ps, t, trace));
    }
    let run = approximate_mst(&ps, &params)?;
    let trace = run.trace();
    Ok((ps, run.tree, trace))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            common,
            k,
            out,
            timing_runs,
        } => {
            let cfg = RunConfig {
                k_list: k,
                output_path: out.clone(),
                timing_runs,
                ..common.config()
            };
            let report = run_experiment(&cfg)?;
            let mut w = output(&out)?;
            writeln!(w, "{}", report.to_json()?)?;
            w.flush()?;
            if let Some(p) = &out {
                report.write_curve_csv(File::create(curve_path(p))?)?;
            }
            if let Some(e) = &report.edges {
                if !e.within_bound {
                    log::warn!(
                        "per-index bound violated: {} lower, {} upper, max ratio {}",
                        e.lower_violations,
                        e.upper_violations,
                        e.max_ratio
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GenHardness {
            kind,
            n,
            metric,
            disconnected,
            jl_eps,
            seed,
            format,
            out,
        } => {
            let graph = match (kind, disconnected) {
                (Kind::Cycle, _) => GraphInstance::one_cycle(n)?,
                (Kind::Twocycles, _) | (_, true) => GraphInstance::two_cycles(n)?,
                _ => GraphInstance::one_cycle(n)?,
            };
            let mut w = output(&out)?;
            if let Kind::Hamming = kind {
                write_csv_to(&mut w, &gen_hamming_points(&graph)?)?;
                w.flush()?;
                return Ok(ExitCode::SUCCESS);
            }
            let inst = match kind {
                Kind::Connectivity => gen_edge_vectors(&graph, metric)?,
                _ => gen_cycle_vectors(&graph, None, metric)?,
            };
            match (jl_eps, format) {
                (Some(eps), _) => {
                    let p = JlParams::for_points(inst.points.len(), eps, DEFAULT_C_JL, Seed(seed))?;
                    write_csv_to(&mut w, &jl_project(&inst.points, &p)?)?;
                }
                (None, Format::Sparse) => write_sparse(&mut w, &inst.points)?,
                (None, Format::Dense) => write_csv_to(&mut w, &inst.to_point_set()?)?,
            }
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common } => {
            let (ps, tree, _) = tree_and_trace(&common)?;
            let exact = exact_mst(&ps).map_err(|e| e.context("oracle"))?;
            let r = verify_per_edge_guarantee(&tree, &exact, common.eta)?;
            println!(
                "edges={} lower_violations={} upper_violations={} max_ratio={}",
                r.pairs.len(),
                r.lower_violations.len(),
                r.upper_violations.len(),
                r.max_ratio
            );
            Ok(if r.holds() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::TraceDump { common, out } => {
            let (_, _, trace) = tree_and_trace(&common)?;
            let mut w = output(&out)?;
            trace.write_jsonl(&mut w)?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
