//! Approximate MST and k-SLC on a random point cloud, checked against the
//! exact tree.
//!
//! cargo run --release --example approximate_mst -- [n] [metric] [eta] [repetitions]

use std::time::Instant;

use mpc_slc::oracle::exact_mst;
use mpc_slc::{approximate_mst, k_slc_from_mst, verify_per_edge_guarantee, Metric, PointSet, Seed, SlcParams};
use rand::Rng;

fn main() -> mpc_slc::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let metric: Metric = args.get(2).map_or(Ok(Metric::L2), |s| s.parse())?;
    let eta: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let repetitions: Option<usize> = args.get(4).and_then(|s| s.parse().ok());

    let mut rng = Seed(1).stream("example/points");
    let rows = (0..n).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
    let ps = PointSet::new(rows, metric)?;

    let start = Instant::now();
    let mut params = SlcParams::new(eta, Seed(42));
    params.repetitions = repetitions;
    let run = approximate_mst(&ps, &params)?;
    let approx_time = start.elapsed();
    println!(
        "n={n} metric={metric} eta={eta} eps={:.5} levels={} repetitions={} union_edges={}",
        run.eps, run.partition.levels, run.repetitions, run.sparsifier_edges
    );
    let trace = run.trace();
    println!(
        "rounds={} (levels {}, boruvka {}) max_machines={} max_words={} space_s={}",
        trace.rounds(),
        run.level_trace.rounds(),
        run.boruvka_trace.rounds(),
        trace.max_machines(),
        trace.max_words(),
        run.mpc.space_s
    );
    println!("approx tree weight {:.6} in {:.2?}", run.tree.total_weight(), approx_time);

    for k in [2, 5, 10] {
        let c = k_slc_from_mst(&run.tree, k, n)?;
        println!("k={k:>2} objective={}", c.objective_string());
    }

    if n <= 20_000 {
        let start = Instant::now();
        let exact = exact_mst(&ps)?;
        let oracle_time = start.elapsed();
        let report = verify_per_edge_guarantee(&run.tree, &exact, eta)?;
        println!(
            "exact weight {:.6} in {:.2?}; max per-index ratio {:.6}; violations lower={} upper={}",
            exact.total_weight(),
            oracle_time,
            report.max_ratio,
            report.lower_violations.len(),
            report.upper_violations.len()
        );
    }
    Ok(())
}
