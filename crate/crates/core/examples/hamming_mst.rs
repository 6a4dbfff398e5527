//! Exact Hamming MST through mask-projected sorting, compared with Kruskal,
//! plus the `d = 2` shortcut.
//!
//! cargo run --release --example hamming_mst -- [n] [d] [alphabet]

use std::time::Instant;

use mpc_slc::hamming::{default_config, hamming_k_slc, hamming_mst, hamming_mst_2d};
use mpc_slc::oracle::kruskal_mst;
use mpc_slc::{Metric, PointSet, Seed};
use rand::Rng;

fn main() -> mpc_slc::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let d: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let q: i64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);

    let mut rng = Seed(3).stream("example/hamming");
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0..q) as f64).collect())
        .collect();
    let ps = PointSet::new(rows, Metric::L0)?;
    let cfg = default_config(n, d);

    let start = Instant::now();
    let (tree, trace) = hamming_mst(&ps, &cfg)?;
    println!(
        "n={n} d={d} alphabet={q}: weight {} in {:.2?}, {} rounds, max_words {} of {}",
        tree.total_weight(),
        start.elapsed(),
        trace.rounds(),
        trace.max_words(),
        cfg.space_s
    );
    let mut hist = vec![0usize; d + 1];
    for e in tree.edges() {
        hist[e.w as usize] += 1;
    }
    println!("edges by weight: {hist:?}");

    let exact = kruskal_mst(&ps)?;
    println!("matches Kruskal: {}", exact.sorted_weights() == tree.sorted_weights());

    for k in [2, 4] {
        println!("k={k} objective={}", hamming_k_slc(&ps, k, &cfg)?.objective_string());
    }

    let flat = PointSet::new(ps.iter().map(|p| p[..2].to_vec()).collect(), Metric::L0)?;
    let fast = hamming_mst_2d(&flat, &cfg)?;
    let (general, _) = hamming_mst(&flat, &cfg)?;
    println!(
        "first two coordinates: distinct={} components={} weight={} (general path {})",
        fast.distinct_points,
        fast.components,
        fast.weight,
        general.total_weight()
    );
    Ok(())
}
