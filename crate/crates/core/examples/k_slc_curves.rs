//! Approximation quality of the k-SLC objective as k and η vary. The
//! constants `c1`, `c2` are lowered so that ε is large enough for the
//! approximate tree to differ from the exact one.
//!
//! cargo run --release --example k_slc_curves -- [n] [c]

use mpc_slc::oracle::exact_mst;
use mpc_slc::{approximate_mst, k_slc_from_mst, verify_per_edge_guarantee, Metric, PointSet, Seed, SlcParams};
use rand::Rng;

fn main() -> mpc_slc::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let c: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.01);

    // Gaussian blobs so that small k has a meaningful answer.
    let mut rng = Seed(8).stream("example/curves");
    let centers: Vec<[f64; 2]> = (0..6).map(|_| [rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0]).collect();
    let rows = (0..n)
        .map(|i| {
            let c = centers[i % centers.len()];
            vec![c[0] + rng.random::<f64>() - 0.5, c[1] + rng.random::<f64>() - 0.5]
        })
        .collect();
    let ps = PointSet::new(rows, Metric::L2)?;
    let exact = exact_mst(&ps)?;

    println!("eta      eps  max_edge_ratio  total_ratio  k=2    k=6    k=20   k=100");
    for eta in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let mut params = SlcParams::new(eta, Seed(4));
        params.c1 = c;
        params.c2 = c;
        let run = approximate_mst(&ps, &params)?;
        let report = verify_per_edge_guarantee(&run.tree, &exact, eta)?;
        let mut ratios = Vec::new();
        for k in [2, 6, 20, 100] {
            let a = k_slc_from_mst(&run.tree, k, n)?.objective.unwrap_or(0.0);
            let e = k_slc_from_mst(&exact, k, n)?.objective.unwrap_or(0.0);
            ratios.push(format!("{:.4}", a / e));
        }
        println!(
            "{eta:<5} {:>7.4}  {:>14.4}  {:>11.4}  {}",
            run.eps,
            report.max_ratio,
            run.tree.total_weight() / exact.total_weight(),
            ratios.join(" ")
        );
    }
    Ok(())
}
