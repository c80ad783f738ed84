//! Graph data structure and partition-quality functionals: cut, volume,
//! normalized cut, their expectations over probabilistic partitions,
//! connected components, bisection validity, and partition fixing.

use crate::error::{Error, Result};
use ndarray::Array2;

/// Undirected, unweighted, self-loop-free graph in compressed adjacency form.
/// Neighbor lists are stored symmetrically and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
}

impl Graph {
    /// Builds a graph from undirected edges. Edges may appear in any order
    /// and orientation; duplicates are collapsed. Self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut directed = Vec::with_capacity(edges.len() * 2);
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidConfig(format!("self-loop at node {a}")));
            }
            for &v in &[a, b] {
                if v >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "graph node",
                        index: v,
                        len: n,
                    });
                }
            }
            directed.push((a, b));
            directed.push((b, a));
        }
        directed.sort_unstable();
        directed.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in &directed {
            offsets[a + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let adjacency = directed.into_iter().map(|(_, b)| b).collect();
        Ok(Graph { offsets, adjacency })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Each undirected edge once, as (i, j) with i < j, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .copied()
                .filter(move |&j| i < j)
                .map(move |j| (i, j))
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        n == 0 || component_count(self) == 1
    }
}

/// Hard assignment of each node to one of `num_parts` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    labels: Vec<usize>,
    num_parts: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, num_parts: usize) -> Result<Partition> {
        if num_parts == 0 {
            return Err(Error::InvalidPartition("zero parts".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_parts) {
            return Err(Error::InvalidPartition(format!(
                "label {bad} out of range for {num_parts} parts"
            )));
        }
        Ok(Partition { labels, num_parts })
    }

    /// Two-class partition.
    pub fn bisection(labels: Vec<usize>) -> Result<Partition> {
        Partition::new(labels, 2)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Nodes of class `k`, in increasing id order.
    pub fn part(&self, k: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == k)
            .collect()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_parts];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    fn set_label(&mut self, i: usize, l: usize) {
        debug_assert!(l < self.num_parts);
        self.labels[i] = l;
    }
}

/// Row-stochastic matrix of class-membership probabilities, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbPartition {
    probs: Array2<f64>,
}

impl ProbPartition {
    /// Validates entries in [0, 1] and row sums equal to 1 within 1e-9.
    pub fn new(probs: Array2<f64>) -> Result<ProbPartition> {
        if probs.ncols() == 0 {
            return Err(Error::InvalidPartition("zero classes".into()));
        }
        for (i, row) in probs.rows().into_iter().enumerate() {
            let mut sum = 0.0;
            for &v in row.iter() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidPartition(format!(
                        "probability {v} at row {i} outside [0, 1]"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidPartition(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(ProbPartition { probs })
    }

    /// One-hot lift of a hard partition.
    pub fn from_labels(p: &Partition) -> ProbPartition {
        let mut probs = Array2::zeros((p.len(), p.num_parts()));
        for (i, &l) in p.labels().iter().enumerate() {
            probs[[i, l]] = 1.0;
        }
        ProbPartition { probs }
    }

    pub fn num_nodes(&self) -> usize {
        self.probs.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.probs.ncols()
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    /// Hard labels by per-row argmax; ties resolve to the lowest class id.
    pub fn harden(&self) -> Partition {
        let labels = self
            .probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (k, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = k;
                    }
                }
                best
            })
            .collect();
        Partition {
            labels,
            num_parts: self.probs.ncols(),
        }
    }
}

fn check_partition_len(g: &Graph, p: &Partition) -> Result<()> {
    if p.len() != g.node_count() {
        return Err(Error::ShapeMismatch(format!(
            "partition over {} nodes applied to graph with {}",
            p.len(),
            g.node_count()
        )));
    }
    Ok(())
}

/// Number of edges whose endpoints carry different labels (two-class only).
pub fn cut(g: &Graph, p: &Partition) -> Result<usize> {
    check_partition_len(g, p)?;
    if p.num_parts() != 2 {
        return Err(Error::InvalidPartition(format!(
            "cut is defined for 2 parts, got {}; use multiway_cut",
            p.num_parts()
        )));
    }
    Ok(g.edges().filter(|&(i, j)| p.label(i) != p.label(j)).count())
}

/// (1/2)·Σ_k cut(S_k, S_k^C); equals `cut` for two classes.
pub fn multiway_cut(g: &Graph, p: &Partition) -> Result<f64> {
    check_partition_len(g, p)?;
    // Each crossing edge is seen from both of its endpoint classes.
    let crossing = g.edges().filter(|&(i, j)| p.label(i) != p.label(j)).count();
    Ok(crossing as f64)
}

/// Total degree of a node set.
pub fn volume(g: &Graph, nodes: &[usize]) -> f64 {
    nodes.iter().map(|&i| g.degree(i) as f64).sum()
}

/// Σ_k cut(S_k, S_k^C) / vol(S_k): crossing edges normalized by class volume.
pub fn normalized_cut(g: &Graph, p: &Partition) -> Result<f64> {
    check_partition_len(g, p)?;
    let m = p.num_parts();
    let mut cut_k = vec![0.0f64; m];
    let mut vol_k = vec![0.0f64; m];
    for (i, &l) in p.labels().iter().enumerate() {
        vol_k[l] += g.degree(i) as f64;
    }
    for (i, j) in g.edges() {
        if p.label(i) != p.label(j) {
            cut_k[p.label(i)] += 1.0;
            cut_k[p.label(j)] += 1.0;
        }
    }
    let mut total = 0.0;
    for k in 0..m {
        if vol_k[k] == 0.0 {
            return Err(Error::ZeroVolume { class: k });
        }
        total += cut_k[k] / vol_k[k];
    }
    Ok(total)
}

fn check_prob_len(g: &Graph, y: &ProbPartition) -> Result<()> {
    if y.num_nodes() != g.node_count() {
        return Err(Error::ShapeMismatch(format!(
            "probability matrix over {} nodes applied to graph with {}",
            y.num_nodes(),
            g.node_count()
        )));
    }
    Ok(())
}

/// Expected number of ordered crossing pairs for class `k`:
/// Σ_i Σ_{j ∈ N(i)} Y_{ik}·(1 − Y_{jk}).
pub fn expected_cut(g: &Graph, y: &ProbPartition, k: usize) -> Result<f64> {
    check_prob_len(g, y)?;
    if k >= y.num_classes() {
        return Err(Error::IndexOutOfRange {
            what: "class",
            index: k,
            len: y.num_classes(),
        });
    }
    let probs = y.probs();
    let mut total = 0.0;
    for i in 0..g.node_count() {
        let yi = probs[[i, k]];
        for &j in g.neighbors(i) {
            total += yi * (1.0 - probs[[j, k]]);
        }
    }
    Ok(total)
}

/// Expected normalized cut: Σ_k expected_cut_k / Γ_k with Γ_k = Σ_i Y_{ik}·D_i.
/// A class with zero expected volume is an error (evaluation stays honest;
/// the training loss guards Γ with a small ε instead).
pub fn expected_normalized_cut(g: &Graph, y: &ProbPartition) -> Result<f64> {
    check_prob_len(g, y)?;
    let probs = y.probs();
    let m = y.num_classes();
    let mut total = 0.0;
    for k in 0..m {
        let mut gamma = 0.0;
        for i in 0..g.node_count() {
            gamma += probs[[i, k]] * g.degree(i) as f64;
        }
        if gamma == 0.0 {
            return Err(Error::ZeroVolume { class: k });
        }
        total += expected_cut(g, y, k)? / gamma;
    }
    Ok(total)
}

/// Component id per node. Ids are assigned in order of first appearance, so
/// node 0 is always in component 0.
pub fn connected_components(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Number of connected components.
pub fn component_count(g: &Graph) -> usize {
    connected_components(g).iter().max().map_or(0, |&m| m + 1)
}

/// Why a two-class partition fails to be a valid bisection, if it does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BisectionCheck {
    Valid,
    EmptyClass { class: usize },
    DisconnectedClass { class: usize, components: usize },
}

impl BisectionCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, BisectionCheck::Valid)
    }
}

/// Diagnoses a two-class partition: valid iff both classes are nonempty and
/// each induces a connected subgraph.
pub fn check_bisection(g: &Graph, p: &Partition) -> BisectionCheck {
    debug_assert_eq!(p.num_parts(), 2);
    debug_assert_eq!(p.len(), g.node_count());
    for class in 0..2 {
        let nodes = p.part(class);
        if nodes.is_empty() {
            return BisectionCheck::EmptyClass { class };
        }
        let comps = class_component_count(g, p, class);
        if comps > 1 {
            return BisectionCheck::DisconnectedClass {
                class,
                components: comps,
            };
        }
    }
    BisectionCheck::Valid
}

pub fn is_valid_bisection(g: &Graph, p: &Partition) -> bool {
    check_bisection(g, p).is_valid()
}

/// Connected components among nodes of one class only, without building the
/// induced subgraph. Returns (component id per node of the class, count);
/// nodes of the other class get usize::MAX.
fn class_components(g: &Graph, p: &Partition, class: usize) -> (Vec<usize>, usize) {
    let n = g.node_count();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if p.label(start) != class || comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if p.label(w) == class && comp[w] == usize::MAX {
                    comp[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    (comp, next)
}

fn class_component_count(g: &Graph, p: &Partition, class: usize) -> usize {
    class_components(g, p, class).1
}

/// Repairs a two-class partition into a valid bisection on a connected graph.
///
/// Per sweep and per class: the largest connected component keeps its label
/// (ties broken toward the component containing the smallest node id); every
/// smaller component is wholly reassigned to the class holding the majority
/// of its external neighbors, with ties going to the opposite class. Sweeps
/// repeat until the partition is valid or a sweep changes nothing; any
/// remaining stragglers are then merged into their majority-neighbor class
/// unconditionally.
pub fn fix_partition(g: &Graph, p: &Partition) -> Result<Partition> {
    check_partition_len(g, p)?;
    if p.num_parts() != 2 {
        return Err(Error::InvalidPartition(format!(
            "fixing is defined for 2 parts, got {}",
            p.num_parts()
        )));
    }
    let comps = component_count(g);
    if comps != 1 {
        return Err(Error::DisconnectedGraph { components: comps });
    }
    let sizes = p.part_sizes();
    if let Some(class) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidPartition(format!(
            "class {class} is empty; fixing requires both classes nonempty"
        )));
    }

    let mut current = p.clone();
    // Each productive sweep reduces the number of same-class components, so
    // node count bounds the sweeps needed; the +2 margin is defensive.
    let max_sweeps = g.node_count() + 2;
    for _ in 0..max_sweeps {
        if is_valid_bisection(g, &current) {
            return Ok(current);
        }
        let changed = fix_sweep(g, &mut current, false);
        if !changed {
            fix_sweep(g, &mut current, true);
            break;
        }
    }
    if is_valid_bisection(g, &current) {
        Ok(current)
    } else {
        Err(Error::InvalidPartition(
            "fixing did not converge to a valid bisection".into(),
        ))
    }
}

/// One fixing sweep; returns whether any label changed. With `unconditional`
/// the majority class is applied even when it equals the component's own
/// class (the final merge of stragglers).
fn fix_sweep(g: &Graph, current: &mut Partition, unconditional: bool) -> bool {
    let mut changed = false;
    for class in 0..2 {
        let (comp, count) = class_components(g, current, class);
        if count <= 1 {
            continue;
        }
        // Pick the survivor: largest component, ties toward smallest node id.
        let mut comp_sizes = vec![0usize; count];
        let mut comp_min_node = vec![usize::MAX; count];
        for (node, &c) in comp.iter().enumerate() {
            if c == usize::MAX {
                continue;
            }
            comp_sizes[c] += 1;
            comp_min_node[c] = comp_min_node[c].min(node);
        }
        let survivor = (0..count)
            .max_by(|&a, &b| {
                comp_sizes[a]
                    .cmp(&comp_sizes[b])
                    .then(comp_min_node[b].cmp(&comp_min_node[a]))
            })
            .expect("count > 1");
        for c in 0..count {
            if c == survivor {
                continue;
            }
            let members: Vec<usize> = (0..g.node_count()).filter(|&v| comp[v] == c).collect();
            let mut votes = [0usize; 2];
            for &v in &members {
                for &w in g.neighbors(v) {
                    if comp[w] != c {
                        votes[current.label(w)] += 1;
                    }
                }
            }
            let target = match votes[0].cmp(&votes[1]) {
                std::cmp::Ordering::Greater => 0,
                std::cmp::Ordering::Less => 1,
                std::cmp::Ordering::Equal => 1 - class,
            };
            if target != class || unconditional {
                if target != class {
                    changed = true;
                }
                for &v in &members {
                    current.set_label(v, target);
                }
            }
        }
    }
    changed
}

/// Subgraph induced by `nodes`, with the new→old index map. Node k of the
/// subgraph corresponds to `nodes[k]` (after sorting and deduplication).
pub fn induced_subgraph(g: &Graph, nodes: &[usize]) -> Result<(Graph, Vec<usize>)> {
    if nodes.is_empty() {
        return Err(Error::InvalidConfig(
            "induced subgraph of an empty node set".into(),
        ));
    }
    let mut selected: Vec<usize> = nodes.to_vec();
    selected.sort_unstable();
    selected.dedup();
    if let Some(&bad) = selected.iter().find(|&&v| v >= g.node_count()) {
        return Err(Error::IndexOutOfRange {
            what: "graph node",
            index: bad,
            len: g.node_count(),
        });
    }
    let mut old_to_new = vec![usize::MAX; g.node_count()];
    for (new, &old) in selected.iter().enumerate() {
        old_to_new[old] = new;
    }
    let mut edges = Vec::new();
    for (new, &old) in selected.iter().enumerate() {
        for &nb in g.neighbors(old) {
            let nb_new = old_to_new[nb];
            if nb_new != usize::MAX && new < nb_new {
                edges.push((new, nb_new));
            }
        }
    }
    let sub = Graph::from_edges(selected.len(), &edges)?;
    Ok((sub, selected))
}
