//! Multilevel graph bisection: coarsen by randomized heavy-edge matching,
//! bisect the small graph by greedy region growing to half the total node
//! weight, then project labels back level by level with boundary-refinement
//! sweeps. Sees only the topology — no geometric features — which makes it
//! the baseline the geometry-aware backends are compared against.

use crate::error::{Error, Result};
use crate::graph::{component_count, fix_partition, Graph, Partition};
use crate::rng::stream_indexed;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct MultilevelConfig {
    /// Coarsening stops once the graph has at most this many nodes.
    pub coarsen_target: usize,
    /// Boundary-refinement passes per level during projection.
    pub refine_sweeps: usize,
    pub seed: u64,
}

impl Default for MultilevelConfig {
    fn default() -> Self {
        MultilevelConfig {
            coarsen_target: 20,
            refine_sweeps: 10,
            seed: 0,
        }
    }
}

impl MultilevelConfig {
    pub fn with_seed(seed: u64) -> Self {
        MultilevelConfig {
            seed,
            ..MultilevelConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.coarsen_target < 2 {
            return Err(Error::InvalidConfig(
                "multilevel coarsen_target must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// Weighted graph used internally across coarsening levels. Node weights
/// count the fine nodes collapsed into each coarse node; edge weights count
/// collapsed fine edges.
struct Level {
    adjacency: Vec<Vec<(usize, u64)>>,
    node_weight: Vec<u64>,
    /// Fine-level node → this level's node (composed across levels).
    projection: Vec<usize>,
}

impl Level {
    fn node_count(&self) -> usize {
        self.node_weight.len()
    }

    fn total_weight(&self) -> u64 {
        self.node_weight.iter().sum()
    }
}

/// Bisects a connected graph. The result is post-processed by
/// `fix_partition`, so both classes are nonempty and internally connected;
/// balance near half the nodes is targeted by construction, not guaranteed.
pub fn multilevel_bisect(g: &Graph, cfg: &MultilevelConfig) -> Result<Partition> {
    cfg.validate()?;
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "bisection needs at least 2 nodes, got {n}"
        )));
    }
    let comps = component_count(g);
    if comps != 1 {
        return Err(Error::DisconnectedGraph { components: comps });
    }

    let mut levels = vec![finest_level(g)];
    let mut round = 0u64;
    while levels.last().expect("nonempty").node_count() > cfg.coarsen_target {
        let coarse = coarsen(levels.last().expect("nonempty"), cfg.seed, round);
        round += 1;
        let prev_n = levels.last().expect("nonempty").node_count();
        if coarse.node_count() as f64 > 0.95 * prev_n as f64 {
            // Matching stalled (e.g. star graphs); further rounds won't help.
            break;
        }
        levels.push(coarse);
    }

    let coarsest = levels.last().expect("nonempty");
    let coarse_labels = initial_bisection(coarsest, cfg.seed);
    // Track labels on the original nodes; every level's `projection` maps
    // original node → node at that level, so each level's view is a gather
    // and each refinement a scatter back.
    let mut labels: Vec<usize> = coarsest.projection.iter().map(|&c| coarse_labels[c]).collect();
    for level in levels.iter().rev() {
        let mut at_level = vec![0usize; level.node_count()];
        for (orig, &v) in level.projection.iter().enumerate() {
            at_level[v] = labels[orig];
        }
        refine(level, &mut at_level, cfg.refine_sweeps);
        for (orig, &v) in level.projection.iter().enumerate() {
            labels[orig] = at_level[v];
        }
    }
    let p = Partition::bisection(labels)?;
    fix_partition(g, &p)
}

fn finest_level(g: &Graph) -> Level {
    let n = g.node_count();
    let adjacency = (0..n)
        .map(|i| g.neighbors(i).iter().map(|&j| (j, 1u64)).collect())
        .collect();
    Level {
        adjacency,
        node_weight: vec![1; n],
        projection: (0..n).collect(),
    }
}

/// One round of randomized heavy-edge matching. Unmatched nodes survive as
/// singletons; matched pairs collapse, summing node and edge weights.
fn coarsen(level: &Level, seed: u64, round: u64) -> Level {
    let n = level.node_count();
    let mut rng = stream_indexed(seed, "multilevel-match", round);
    let mut visit: Vec<usize> = (0..n).collect();
    visit.shuffle(&mut rng);

    let mut mate = vec![usize::MAX; n];
    for &v in &visit {
        if mate[v] != usize::MAX {
            continue;
        }
        // Heaviest incident edge to an unmatched neighbor; ties toward the
        // smallest id for determinism.
        let mut best: Option<(u64, usize)> = None;
        for &(w, ew) in &level.adjacency[v] {
            if mate[w] != usize::MAX {
                continue;
            }
            let better = match best {
                None => true,
                Some((bw, bid)) => ew > bw || (ew == bw && w < bid),
            };
            if better {
                best = Some((ew, w));
            }
        }
        match best {
            Some((_, w)) => {
                mate[v] = w;
                mate[w] = v;
            }
            None => mate[v] = v,
        }
    }

    // Coarse ids in visit order, one per matched pair or singleton.
    let mut coarse_of = vec![usize::MAX; n];
    let mut next = 0;
    for &v in &visit {
        if coarse_of[v] != usize::MAX {
            continue;
        }
        coarse_of[v] = next;
        coarse_of[mate[v]] = next;
        next += 1;
    }

    let mut node_weight = vec![0u64; next];
    for v in 0..n {
        node_weight[coarse_of[v]] += level.node_weight[v];
    }
    let mut edge_acc: Vec<std::collections::BTreeMap<usize, u64>> = vec![Default::default(); next];
    for v in 0..n {
        let cv = coarse_of[v];
        for &(w, ew) in &level.adjacency[v] {
            let cw = coarse_of[w];
            if cv != cw {
                *edge_acc[cv].entry(cw).or_insert(0) += ew;
            }
        }
    }
    let adjacency = edge_acc
        .into_iter()
        .map(|m| m.into_iter().collect())
        .collect();
    let projection = level.projection.iter().map(|&v| coarse_of[v]).collect();
    Level {
        adjacency,
        node_weight,
        projection,
    }
}

/// Greedy region growing on the coarsest graph: from a random start, absorb
/// the unassigned node with the strongest connection to the growing side
/// until it holds at least half the total weight. Best of several attempts
/// by (cut weight, balance distance).
fn initial_bisection(level: &Level, seed: u64) -> Vec<usize> {
    const ATTEMPTS: u64 = 8;
    let n = level.node_count();
    let total = level.total_weight();
    let mut best: Option<(u64, u64, Vec<usize>)> = None;
    for attempt in 0..ATTEMPTS {
        let mut rng = stream_indexed(seed, "multilevel-grow", attempt);
        let labels = grow_once(level, rng.random_range(0..n));
        let cut = cut_weight(level, &labels);
        let w0: u64 = (0..n)
            .filter(|&v| labels[v] == 0)
            .map(|v| level.node_weight[v])
            .sum();
        let imbalance = w0.abs_diff(total - w0);
        if best
            .as_ref()
            .is_none_or(|&(bc, bi, _)| (cut, imbalance) < (bc, bi))
        {
            best = Some((cut, imbalance, labels));
        }
    }
    best.expect("at least one attempt").2
}

fn grow_once(level: &Level, start: usize) -> Vec<usize> {
    let n = level.node_count();
    let total = level.total_weight();
    let mut labels = vec![1usize; n];
    let mut connection = vec![0u64; n];
    let mut grown = 0u64;

    let absorb = |v: usize,
                      labels: &mut Vec<usize>,
                      connection: &mut Vec<u64>,
                      grown: &mut u64| {
        labels[v] = 0;
        *grown += level.node_weight[v];
        for &(w, ew) in &level.adjacency[v] {
            if labels[w] == 1 {
                connection[w] += ew;
            }
        }
    };
    absorb(start, &mut labels, &mut connection, &mut grown);
    while 2 * grown < total {
        // Strongest-connected unassigned node; ties toward the smallest id.
        let mut pick: Option<(u64, usize)> = None;
        for v in 0..n {
            if labels[v] == 0 {
                continue;
            }
            let better = match pick {
                None => connection[v] > 0,
                Some((bc, bid)) => {
                    connection[v] > bc || (connection[v] == bc && connection[v] > 0 && v < bid)
                }
            };
            if better {
                pick = Some((connection[v], v));
            }
        }
        match pick {
            Some((_, v)) => absorb(v, &mut labels, &mut connection, &mut grown),
            // Connected graphs always expose a frontier before the loop ends.
            None => break,
        }
    }
    labels
}

fn cut_weight(level: &Level, labels: &[usize]) -> u64 {
    let mut acc = 0u64;
    for v in 0..level.node_count() {
        for &(w, ew) in &level.adjacency[v] {
            if v < w && labels[v] != labels[w] {
                acc += ew;
            }
        }
    }
    acc
}

/// Boundary refinement: flip a node when that strictly lowers the cut weight
/// and does not empty a class. Nodes are scanned in id order; sweeps stop
/// early once a full pass makes no change.
fn refine(level: &Level, labels: &mut [usize], sweeps: usize) {
    let n = level.node_count();
    let mut class_nodes = [0usize; 2];
    for &l in labels.iter() {
        class_nodes[l] += 1;
    }
    for _ in 0..sweeps {
        let mut changed = false;
        for v in 0..n {
            let own = labels[v];
            if class_nodes[own] <= 1 {
                continue;
            }
            let mut same = 0u64;
            let mut cross = 0u64;
            for &(w, ew) in &level.adjacency[v] {
                if labels[w] == own {
                    same += ew;
                } else {
                    cross += ew;
                }
            }
            if cross > same {
                labels[v] = 1 - own;
                class_nodes[own] -= 1;
                class_nodes[1 - own] += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}
