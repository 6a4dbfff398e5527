//! The simulated machine model on its own: job packing, a distributed sort
//! and Borůvka, each with its round trace.
//!
//! cargo run --release --example mpc_primitives -- [space_s]

use mpc_slc::mpc::{boruvka_mst, connected_components, distributed_sort, graph_round_bound, run_level, Job};
use mpc_slc::{Edge, MpcConfig, Seed, WeightedEdgeList};
use rand::Rng;

fn main() -> mpc_slc::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let s: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1 << 16);
    let cfg = MpcConfig::new(s, 0.25, None)?;
    let mut rng = Seed(9).stream("example/mpc");

    let jobs: Vec<Job<u64>> = (0..500)
        .map(|i| {
            let w = rng.random_range(1..s / 8);
            Job {
                input_words: w,
                work_words: w,
                payload: i,
            }
        })
        .collect();
    let total: usize = jobs.iter().map(|j| j.input_words).sum();
    let level = run_level(&jobs, &cfg, |&p| p * p, |_| 1)?;
    println!(
        "run_level: {} jobs, {total} input words on {} machines (bound {}), max {} words",
        jobs.len(),
        level.stats.machines,
        3 * total / s + 1,
        level.stats.max_words
    );

    let items: Vec<(u64, usize)> = (0..200_000).map(|i| (rng.random::<u64>(), i)).collect();
    let (sorted, trace) = distributed_sort(items, &cfg, |_| 2)?;
    let ordered = sorted.windows(2).all(|w| w[0].0 <= w[1].0);
    println!(
        "sort: {} items in {} rounds, sorted={ordered}, max {} words on {} machines",
        sorted.len(),
        trace.rounds(),
        trace.max_words(),
        trace.max_machines()
    );

    let n = 5000;
    let edges: Vec<Edge> = (0..4 * n)
        .map(|_| Edge::new(rng.random_range(0..n), rng.random_range(0..n), rng.random::<f64>()))
        .filter(|e| e.u != e.v)
        .collect();
    let g = WeightedEdgeList::new(n, edges)?;
    let big = MpcConfig::new(s.max(n + 8 * g.len()), 0.25, None)?;
    let (forest, trace) = boruvka_mst(&g, &big)?;
    println!(
        "boruvka: {} edges -> forest of {} edges, {} components, {} rounds (bound {})",
        g.len(),
        forest.edges().len(),
        forest.components(),
        trace.rounds(),
        graph_round_bound(n)
    );
    let (labels, trace) = connected_components(&g, &big)?;
    let comps = labels.iter().enumerate().filter(|&(i, &l)| i == l).count();
    println!("connectivity: {comps} components in {} rounds", trace.rounds());
    trace.write_jsonl(std::io::stdout().lock())?;
    Ok(())
}
