//! Cycle, connectivity and Hamming instances built from one cycle versus
//! two cycles: pairwise distance values, 2-SLC objectives and a JL
//! projection of the cycle vectors.
//!
//! cargo run --release --example hardness_gaps -- [n] [jl_eps]

use mpc_slc::hamming::{default_config, hamming_k_slc};
use mpc_slc::hardness::{
    gen_cycle_vectors, gen_edge_vectors, gen_hamming_points, jl_project, GraphInstance, JlParams,
    SparseInstance, DEFAULT_C_JL,
};
use mpc_slc::oracle::exact_mst;
use mpc_slc::{k_slc_from_mst, sparse_distance, Metric, PointSet, Result, Seed};

fn distinct_distances(ps: &PointSet) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let d = ps.dist(i, j);
            if !out.iter().any(|&v| (v - d).abs() < 1e-9) {
                out.push(d);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn two_slc(ps: &PointSet) -> Result<f64> {
    let tree = exact_mst(ps)?;
    Ok(k_slc_from_mst(&tree, 2, ps.len())?.objective.unwrap_or(0.0))
}

fn report(name: &str, connected: &SparseInstance, split: &SparseInstance) -> Result<()> {
    let (a, b) = (connected.to_point_set()?, split.to_point_set()?);
    let (oa, ob) = (two_slc(&a)?, two_slc(&b)?);
    println!(
        "{name:<22} distances {:?}  2-SLC connected {oa:.6} disconnected {ob:.6} ratio {:.6}",
        distinct_distances(&a),
        ob / oa
    );
    Ok(())
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let jl_eps: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let one = GraphInstance::one_cycle(n)?;
    let two = GraphInstance::two_cycles(n)?;

    for metric in [Metric::L2, Metric::L1] {
        report(
            &format!("cycle {metric}"),
            &gen_cycle_vectors(&one, None, metric)?,
            &gen_cycle_vectors(&two, None, metric)?,
        )?;
        report(
            &format!("connectivity {metric}"),
            &gen_edge_vectors(&one, metric)?,
            &gen_edge_vectors(&two, metric)?,
        )?;
    }

    let cfg = default_config(3 * n, 2);
    let h1 = hamming_k_slc(&gen_hamming_points(&one)?, 2, &cfg)?;
    let h2 = hamming_k_slc(&gen_hamming_points(&two)?, 2, &cfg)?;
    println!(
        "hamming                2-SLC connected {} disconnected {}",
        h1.objective_string(),
        h2.objective_string()
    );

    let small = gen_cycle_vectors(&GraphInstance::one_cycle(64)?, None, Metric::L2)?;
    let p = JlParams::for_points(small.points.len(), jl_eps, DEFAULT_C_JL, Seed(11))?;
    let projected = jl_project(&small.points, &p)?;
    let mut worst: f64 = 0.0;
    for i in 0..small.points.len() {
        for j in i + 1..small.points.len() {
            let before = sparse_distance(&small.points[i], &small.points[j], Metric::L2)?;
            worst = worst.max((projected.dist(i, j) / before - 1.0).abs());
        }
    }
    println!(
        "JL n=64 eps={jl_eps}: {} dimensions, worst relative distortion {worst:.4}",
        p.target_dim
    );
    Ok(())
}
