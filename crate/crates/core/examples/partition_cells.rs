//! Samples shifted hierarchical grids and measures cell diameters and how
//! often a fixed pair is separated at each level.
//!
//! cargo run --release --example partition_cells -- [metric] [trials]

use mpc_slc::partition::{default_levels, PartitionParams};
use mpc_slc::{sample_partition, Metric, PointSet, Seed};
use rand::Rng;

fn main() -> mpc_slc::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let metric: Metric = args.get(1).map_or(Ok(Metric::L2), |s| s.parse())?;
    let trials: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);

    let mut rng = Seed(5).stream("example/partition");
    let rows = (0..200).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
    let ps = PointSet::new(rows, metric)?;
    let params = PartitionParams::fit(&ps, 2.0, default_levels(ps.len(), 2.0))?;
    println!(
        "metric={metric} levels={} root side={} gamma={:.3} b={}",
        params.levels, params.bbox_side, params.gamma, params.b_cut
    );

    let (x, y) = (0, 1);
    let rho = ps.dist(x, y);
    let mut cuts = vec![0usize; params.levels + 1];
    let mut widest = vec![0.0f64; params.levels + 1];
    for t in 0..trials {
        let part = sample_partition(&ps, &params, Seed(t as u64))?;
        for level in 0..=params.levels {
            if part.cell_id(ps.point(x), level)? != part.cell_id(ps.point(y), level)? {
                cuts[level] += 1;
            }
            for members in part.cells_at_level(&ps, level)?.values() {
                for (a, &i) in members.iter().enumerate() {
                    for &j in &members[a + 1..] {
                        widest[level] = widest[level].max(ps.dist(i, j));
                    }
                }
            }
        }
    }
    println!("pair distance {rho:.4}");
    println!("level  diameter_bound  widest_cell  cut_freq  cut_bound");
    for level in 0..=params.levels {
        let delta = params.level_diameter(level, params.bbox_side);
        println!(
            "{level:>5}  {delta:>14.5}  {:>11.5}  {:>8.4}  {:>9.4}",
            widest[level],
            cuts[level] as f64 / trials as f64,
            (params.b_cut * rho / delta).min(1.0)
        );
    }
    Ok(())
}
