//! A logical MPC machine model. Machines are bookkeeping only: each
//! primitive records, round by round, how many machines it used, the largest
//! number of words resident on one machine, and the words sent. Local work
//! runs on the rayon pool.
//!
//! One word is one number or one id; an edge costs 3 words.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{DisjointSets, Edge, SpanningTree, WeightedEdgeList};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcConfig {
    /// Words of local space per machine.
    pub space_s: usize,
    /// Exponent `α` in `s = n^α`, used when deriving grid parameters.
    pub alpha_exp: f64,
    pub max_machines: Option<usize>,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            space_s: 1 << 20,
            alpha_exp: 0.25,
            max_machines: None,
        }
    }
}

impl MpcConfig {
    pub fn new(space_s: usize, alpha_exp: f64, max_machines: Option<usize>) -> Result<Self> {
        let cfg = MpcConfig {
            space_s,
            alpha_exp,
            max_machines,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// A configuration with room for a root cell holding all `n` points of
    /// dimension `dim`.
    pub fn sized_for(n: usize, dim: usize) -> Self {
        MpcConfig {
            space_s: (8 * n * (dim + 2)).max(4096),
            ..MpcConfig::default()
        }
    }

    /// Grows `space_s` so the Borůvka coordinator fits a graph on `n`
    /// vertices with `edges` edges: `n` label words plus up to two 4-word
    /// candidates per edge.
    pub fn with_graph_room(self, n: usize, edges: usize) -> Self {
        MpcConfig {
            space_s: self.space_s.max(3 * n).max(n + 8 * edges),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.space_s < 16 {
            return Err(Error::input(format!("space_s must be at least 16, got {}", self.space_s)));
        }
        if !(self.alpha_exp > 0.0 && self.alpha_exp < 0.5) {
            return Err(Error::input(format!(
                "alpha_exp must lie in (0, 0.5), got {}",
                self.alpha_exp
            )));
        }
        if self.max_machines == Some(0) {
            return Err(Error::input("max_machines must be positive"));
        }
        Ok(())
    }
}

/// What one synchronous round cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub machines: usize,
    pub max_words: usize,
    pub msg_words: usize,
    /// Words of job input placed in this round (only set by `run_level`).
    #[serde(skip)]
    pub input_words: usize,
    #[serde(skip)]
    pub op: &'static str,
}

impl RoundStats {
    fn new(op: &'static str, machines: usize, max_words: usize, msg_words: usize) -> Self {
        RoundStats {
            machines,
            max_words,
            msg_words,
            input_words: 0,
            op,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MpcTrace {
    per_round: Vec<RoundStats>,
}

#[derive(Serialize)]
struct TraceLine {
    round: usize,
    machines: usize,
    max_words: usize,
    msg_words: usize,
}

impl MpcTrace {
    pub fn new() -> Self {
        MpcTrace::default()
    }

    pub fn rounds(&self) -> usize {
        self.per_round.len()
    }

    pub fn per_round(&self) -> &[RoundStats] {
        &self.per_round
    }

    /// Appends a round after checking it against `cfg`.
    pub fn push(&mut self, stats: RoundStats, cfg: &MpcConfig) -> Result<()> {
        check_round(&stats, cfg)?;
        self.per_round.push(stats);
        Ok(())
    }

    /// Appends the rounds of a computation that ran after this one.
    pub fn append(&mut self, other: MpcTrace) {
        self.per_round.extend(other.per_round);
    }

    /// Merges traces of computations that ran side by side on disjoint
    /// machines: round `i` of the result uses the machines of every round
    /// `i` combined.
    pub fn parallel(traces: impl IntoIterator<Item = MpcTrace>) -> MpcTrace {
        let mut out: Vec<RoundStats> = Vec::new();
        for t in traces {
            for (i, r) in t.per_round.into_iter().enumerate() {
                if i < out.len() {
                    let o = &mut out[i];
                    o.machines += r.machines;
                    o.max_words = o.max_words.max(r.max_words);
                    o.msg_words += r.msg_words;
                    o.input_words += r.input_words;
                } else {
                    out.push(r);
                }
            }
        }
        MpcTrace { per_round: out }
    }

    /// Rounds whose op label equals `op`.
    pub fn rounds_of(&self, op: &str) -> usize {
        self.per_round.iter().filter(|r| r.op == op).count()
    }

    pub fn max_machines(&self) -> usize {
        self.per_round.iter().map(|r| r.machines).max().unwrap_or(0)
    }

    pub fn max_words(&self) -> usize {
        self.per_round.iter().map(|r| r.max_words).max().unwrap_or(0)
    }

    pub fn total_msg_words(&self) -> usize {
        self.per_round.iter().map(|r| r.msg_words).sum()
    }

    /// Re-checks every round against `cfg`.
    pub fn check(&self, cfg: &MpcConfig) -> Result<()> {
        self.per_round.iter().try_for_each(|r| check_round(r, cfg))
    }

    /// One JSON object per round: `{round, machines, max_words, msg_words}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, r) in self.per_round.iter().enumerate() {
            let line = TraceLine {
                round: i,
                machines: r.machines,
                max_words: r.max_words,
                msg_words: r.msg_words,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn check_round(r: &RoundStats, cfg: &MpcConfig) -> Result<()> {
    if r.max_words > cfg.space_s {
        return Err(Error::capacity(format!(
            "{} round needs {} words on one machine, space_s is {}",
            r.op, r.max_words, cfg.space_s
        )));
    }
    if let Some(m) = cfg.max_machines {
        if r.machines > m {
            return Err(Error::capacity(format!(
                "{} round needs {} machines, max_machines is {m}",
                r.op, r.machines
            )));
        }
    }
    Ok(())
}

/// A unit of work for [`run_level`]: `input_words` must be stored on the
/// machine, and running it needs `work_words` of scratch space.
#[derive(Debug, Clone)]
pub struct Job<T> {
    pub input_words: usize,
    pub work_words: usize,
    pub payload: T,
}

#[derive(Debug, Clone)]
pub struct LevelRun<O> {
    /// Outputs in job order.
    pub outputs: Vec<O>,
    /// Machine index of every job.
    pub assignment: Vec<usize>,
    pub stats: RoundStats,
}

/// Greedy first-fit placement: a job goes to the lowest-numbered machine
/// with at least `2s/3` space still free, and a new machine is opened only
/// when none has.
pub fn assign_jobs(sizes: &[(usize, usize)], cfg: &MpcConfig) -> Result<(Vec<usize>, Vec<usize>)> {
    let s = cfg.space_s;
    let mut stored: Vec<usize> = Vec::new();
    let mut open: std::collections::BTreeSet<usize> = Default::default();
    let mut assignment = Vec::with_capacity(sizes.len());
    for (j, &(input, work)) in sizes.iter().enumerate() {
        if 3 * input.max(work) > s {
            return Err(Error::capacity(format!(
                "job {j} needs {} words, more than s/3 = {}",
                input.max(work),
                s / 3
            )));
        }
        let m = match open.iter().next() {
            Some(&m) => m,
            None => {
                stored.push(0);
                open.insert(stored.len() - 1);
                stored.len() - 1
            }
        };
        stored[m] += input;
        if 3 * stored[m] > s {
            open.remove(&m);
        }
        assignment.push(m);
    }
    Ok((assignment, stored))
}

/// Runs independent jobs in one round. Each machine holds the inputs of its
/// jobs plus the largest scratch space of any of them; outputs count as the
/// round's messages.
pub fn run_level<T, O, F, W>(jobs: &[Job<T>], cfg: &MpcConfig, exec: F, output_words: W) -> Result<LevelRun<O>>
where
    T: Sync,
    O: Send,
    F: Fn(&T) -> O + Sync,
    W: Fn(&O) -> usize,
{
    let sizes: Vec<(usize, usize)> = jobs.iter().map(|j| (j.input_words, j.work_words)).collect();
    let (assignment, stored) = assign_jobs(&sizes, cfg)?;
    let machines = stored.len();
    let total_input: usize = sizes.iter().map(|s| s.0).sum();
    if machines > 0 && machines * cfg.space_s > 3 * total_input + cfg.space_s {
        return Err(Error::capacity(format!(
            "{machines} machines exceed 3S/s + 1 for S = {total_input}"
        )));
    }
    let mut work = vec![0usize; machines];
    for (j, &m) in assignment.iter().enumerate() {
        work[m] = work[m].max(sizes[j].1);
    }
    let max_words = (0..machines).map(|m| stored[m] + work[m]).max().unwrap_or(0);
    let outputs: Vec<O> = jobs.par_iter().map(|j| exec(&j.payload)).collect();
    let msg_words = outputs.iter().map(output_words).sum();
    let mut stats = RoundStats::new("level", machines, max_words, msg_words);
    stats.input_words = total_input;
    check_round(&stats, cfg)?;
    Ok(LevelRun {
        outputs,
        assignment,
        stats,
    })
}

/// Stable sort by key with parallel sorting by regular sampling: local
/// sorts and sampling, splitter selection on one machine, bucket exchange,
/// and local merges. `words` gives the size of one item.
pub fn distributed_sort<K, P, W>(items: Vec<(K, P)>, cfg: &MpcConfig, words: W) -> Result<(Vec<(K, P)>, MpcTrace)>
where
    K: Ord + Clone + Send + Sync,
    P: Send + Sync,
    W: Fn(&(K, P)) -> usize + Sync,
{
    let mut trace = MpcTrace::new();
    // Each item also carries its original position, which makes the order
    // total and the sort stable.
    let sizes: Vec<usize> = items.par_iter().map(|it| words(it) + 1).collect();
    let total: usize = sizes.iter().sum();
    let mut tagged: Vec<((K, usize), P)> = items
        .into_iter()
        .enumerate()
        .map(|(i, (k, p))| ((k, i), p))
        .collect();
    let untag = |v: Vec<((K, usize), P)>| v.into_iter().map(|((k, _), p)| (k, p)).collect();

    let cap = cfg.space_s / 4;
    if total <= cap || tagged.len() <= 1 {
        tagged.par_sort_by(|a, b| a.0.cmp(&b.0));
        trace.push(RoundStats::new("sort", 1, total, 0), cfg)?;
        return Ok((untag(tagged), trace));
    }

    let mut bounds = vec![0usize];
    let mut acc = 0;
    for (i, &w) in sizes.iter().enumerate() {
        if 4 * w > cfg.space_s {
            return Err(Error::capacity(format!("sort item {i} needs {w} words")));
        }
        if acc + w > cap {
            bounds.push(i);
            acc = 0;
        }
        acc += w;
    }
    bounds.push(sizes.len());
    let m = bounds.len() - 1;
    let chunk_words: Vec<usize> = bounds.windows(2).map(|b| sizes[b[0]..b[1]].iter().sum()).collect();
    let max_sample_words = sizes.iter().copied().max().unwrap_or(1);

    let mut chunks: Vec<Vec<((K, usize), P)>> = Vec::with_capacity(m);
    let mut rest = tagged;
    for b in bounds.windows(2).rev() {
        chunks.push(rest.split_off(b[0]));
    }
    chunks.reverse();

    // Round 1: local sort and regular sampling, samples to machine 0.
    chunks.par_iter_mut().for_each(|c| c.sort_by(|a, b| a.0.cmp(&b.0)));
    let samples: Vec<(K, usize)> = chunks
        .iter()
        .flat_map(|c| (1..m).map(move |j| c[j * c.len() / m].0.clone()))
        .collect();
    let sample_words = samples.len() * max_sample_words;
    let r1_max = chunk_words.iter().copied().max().unwrap_or(0).max(chunk_words[0] + sample_words);
    trace.push(RoundStats::new("sort", m, r1_max, sample_words), cfg)?;

    // Round 2: machine 0 picks m - 1 splitters and broadcasts them.
    let mut samples = samples;
    samples.sort();
    let splitters: Vec<(K, usize)> = (1..m)
        .map(|i| samples[(i * samples.len() / m).min(samples.len() - 1)].clone())
        .collect();
    let splitter_words = splitters.len() * max_sample_words;
    let r2_max = chunk_words.iter().map(|w| w + splitter_words).max().unwrap_or(0);
    trace.push(
        RoundStats::new("sort", m, r2_max.max(chunk_words[0] + sample_words), splitter_words * (m - 1)),
        cfg,
    )?;

    // Round 3: every machine cuts its run at the splitters and ships the
    // pieces; bucket i collects keys in [splitter i-1, splitter i).
    let pieces: Vec<Vec<Vec<((K, usize), P)>>> = chunks
        .into_par_iter()
        .map(|mut c| {
            let mut out = Vec::with_capacity(m);
            for sp in splitters.iter().rev() {
                let cut = c.partition_point(|x| &x.0 < sp);
                out.push(c.split_off(cut));
            }
            out.push(c);
            out.reverse();
            out
        })
        .collect();
    let mut buckets: Vec<Vec<Vec<((K, usize), P)>>> = (0..m).map(|_| Vec::with_capacity(m)).collect();
    for per_machine in pieces {
        for (b, piece) in per_machine.into_iter().enumerate() {
            buckets[b].push(piece);
        }
    }
    let bucket_words: Vec<usize> = buckets
        .iter()
        .map(|runs| runs.iter().flatten().map(|x| sizes[x.0 .1]).sum())
        .collect();
    let r3_max = chunk_words
        .iter()
        .chain(bucket_words.iter())
        .copied()
        .max()
        .unwrap_or(0);
    trace.push(RoundStats::new("sort", m, r3_max, total), cfg)?;

    // Round 4: merge the received sorted runs.
    let merged: Vec<Vec<((K, usize), P)>> = buckets
        .into_par_iter()
        .map(|runs| {
            let mut all: Vec<_> = runs.into_iter().flatten().collect();
            all.sort_by(|a, b| a.0.cmp(&b.0));
            all
        })
        .collect();
    let r4_max = bucket_words.iter().copied().max().unwrap_or(0);
    trace.push(RoundStats::new("sort", m, r4_max, 0), cfg)?;

    Ok((untag(merged.into_iter().flatten().collect()), trace))
}

/// Minimum spanning forest by Borůvka phases. Edges are spread over edge
/// machines; a coordinator machine holds the component label of every
/// vertex. Each phase takes two rounds: edge machines send their lightest
/// outgoing edge per component to the coordinator, then the coordinator
/// hooks components and sends back new labels. A final round finds no
/// outgoing edge. Ties break by `(weight, u, v)`.
pub fn boruvka_mst(g: &WeightedEdgeList, cfg: &MpcConfig) -> Result<(SpanningTree, MpcTrace)> {
    let (forest, _, trace) = boruvka_engine(g.n_vertices(), g.edges(), cfg, "boruvka")?;
    Ok((SpanningTree::new(g.n_vertices(), forest)?, trace))
}

/// Component labels (minimum vertex id per component); weights are ignored.
pub fn connected_components(g: &WeightedEdgeList, cfg: &MpcConfig) -> Result<(Vec<usize>, MpcTrace)> {
    let unit: Vec<Edge> = g.edges().iter().map(|e| Edge { w: 0.0, ..*e }).collect();
    let (_, labels, trace) = boruvka_engine(g.n_vertices(), &unit, cfg, "connectivity")?;
    Ok((labels, trace))
}

struct EdgeMachine {
    edges: Vec<Edge>,
    vertices: usize,
}

impl EdgeMachine {
    fn words(&self) -> usize {
        3 * self.edges.len() + 2 * self.vertices
    }

    fn recount(&mut self) {
        let mut vs: Vec<usize> = self.edges.iter().flat_map(|e| [e.u, e.v]).collect();
        vs.sort_unstable();
        vs.dedup();
        self.vertices = vs.len();
    }
}

fn boruvka_engine(
    n: usize,
    edges: &[Edge],
    cfg: &MpcConfig,
    op: &'static str,
) -> Result<(Vec<Edge>, Vec<usize>, MpcTrace)> {
    let mut trace = MpcTrace::new();
    if 3 * n > cfg.space_s {
        return Err(Error::capacity(format!(
            "coordinator needs {n} label words, more than s/3 = {}",
            cfg.space_s / 3
        )));
    }
    let per_machine = (cfg.space_s / 14).max(1);
    let mut machines: Vec<EdgeMachine> = edges
        .chunks(per_machine)
        .map(|c| {
            let mut m = EdgeMachine {
                edges: c.to_vec(),
                vertices: 0,
            };
            m.recount();
            m
        })
        .collect();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut forest: Vec<Edge> = Vec::new();
    let better = |a: &Edge, b: &Edge| a.order(b).is_lt();

    loop {
        // Round A: lightest outgoing edge per component on every machine.
        let cands: Vec<Vec<(usize, Edge)>> = machines
            .par_iter_mut()
            .map(|m| {
                m.edges.retain(|e| labels[e.u] != labels[e.v]);
                m.recount();
                let mut best: std::collections::HashMap<usize, Edge> = Default::default();
                for e in &m.edges {
                    for c in [labels[e.u], labels[e.v]] {
                        best.entry(c)
                            .and_modify(|b| {
                                if better(e, b) {
                                    *b = *e
                                }
                            })
                            .or_insert(*e);
                    }
                }
                let mut out: Vec<(usize, Edge)> = best.into_iter().collect();
                out.sort_by_key(|x| x.0);
                out
            })
            .collect();
        let msg: usize = cands.iter().map(|c| 4 * c.len()).sum();
        let edge_max = machines.iter().map(|m| m.words()).max().unwrap_or(0);
        trace.push(
            RoundStats::new(op, machines.len() + 1, edge_max.max(n + msg), msg),
            cfg,
        )?;
        if msg == 0 {
            break;
        }

        // Coordinator: global lightest edge per component, then hooking.
        let mut best: std::collections::HashMap<usize, Edge> = Default::default();
        for (c, e) in cands.into_iter().flatten() {
            best.entry(c)
                .and_modify(|b| {
                    if better(&e, b) {
                        *b = e
                    }
                })
                .or_insert(e);
        }
        let mut chosen: Vec<Edge> = best.into_values().collect();
        chosen.sort_by(|a, b| a.order(b));
        chosen.dedup_by(|a, b| a.u == b.u && a.v == b.v);
        let mut dsu = DisjointSets::new(n);
        for e in chosen {
            if dsu.union(labels[e.u], labels[e.v]) {
                forest.push(e);
            }
        }
        let mut min_of = vec![usize::MAX; n];
        for l in 0..n {
            if labels[l] == l {
                let r = dsu.find(l);
                min_of[r] = min_of[r].min(l);
            }
        }
        for v in 0..n {
            labels[v] = min_of[dsu.find(labels[v])];
        }

        // Round B: label updates for the vertices each machine holds.
        let msg: usize = machines.iter().map(|m| 2 * m.vertices).sum();
        trace.push(
            RoundStats::new(op, machines.len() + 1, edge_max.max(n), msg),
            cfg,
        )?;
    }
    forest.sort_by(|a, b| a.order(b));
    Ok((forest, labels, trace))
}

/// `2·ceil(log2 n) + 2`, the round budget of the graph primitives.
pub fn graph_round_bound(n: usize) -> usize {
    let lg = if n <= 1 { 0 } else { (usize::BITS - (n - 1).leading_zeros()) as usize };
    2 * lg + 2
}
