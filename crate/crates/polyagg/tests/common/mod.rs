//! Helpers shared between integration-test binaries. Each binary compiles
//! its own copy, so not every item is used everywhere.
#![allow(dead_code)]

use ndarray::Array2;
use polyagg::geometry::Point;
use polyagg::gnn::{graph_gradient, graph_loss, GnnModel};
use polyagg::graph::{Graph, ProbPartition};
use polyagg::mesh::FeatureMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

/// Random connected graph: a random spanning tree plus extra random edges.
pub fn random_connected_graph(rng: &mut ChaCha12Rng, n: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort();
    edges.dedup();
    Graph::from_edges(n, &edges).unwrap()
}

/// Random soft assignment with strictly positive rows summing to one.
pub fn random_assignment(rng: &mut ChaCha12Rng, n: usize, classes: usize) -> ProbPartition {
    let mut y = Array2::zeros((n, classes));
    for i in 0..n {
        let mut sum = 0.0;
        for k in 0..classes {
            let v: f64 = rng.random_range(0.05..1.0);
            y[[i, k]] = v;
            sum += v;
        }
        for k in 0..classes {
            y[[i, k]] /= sum;
        }
    }
    ProbPartition::new(y).unwrap()
}

/// Textbook double sum: Σ_k [Σ_i Σ_j A_ij·Y_ik·(1−Y_jk)] / [Σ_i D_i·Y_ik],
/// written against the adjacency matrix rather than neighbor lists.
pub fn encut_oracle(g: &Graph, y: &ProbPartition) -> f64 {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for (i, j) in g.edges() {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    let probs = y.probs();
    let mut total = 0.0;
    for k in 0..y.num_classes() {
        let mut cut = 0.0;
        let mut volume = 0.0;
        for i in 0..n {
            for j in 0..n {
                if adj[i][j] {
                    cut += probs[[i, k]] * (1.0 - probs[[j, k]]);
                }
            }
            volume += probs[[i, k]] * g.degree(i) as f64;
        }
        total += cut / volume;
    }
    total
}

/// Random training instance: connected graph plus positive-area features.
pub fn random_instance(rng: &mut ChaCha12Rng, n: usize) -> (Graph, FeatureMatrix) {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    for _ in 0..n / 2 {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort();
    edges.dedup();
    let g = Graph::from_edges(n, &edges).unwrap();

    let areas: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..0.2)).collect();
    let centers: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect();
    let x = FeatureMatrix::from_parts(&areas, &centers).unwrap();
    (g, x)
}

pub const FD_STEP: f64 = 1e-6;
pub const FD_REL_TOL: f64 = 1e-4;
/// Coordinates whose gradient magnitude sits below this floor are compared
/// absolutely (at floor·tolerance); a relative criterion is meaningless
/// against the finite-difference noise floor there.
pub const FD_REL_FLOOR: f64 = 1e-3;

/// The parameter arrays in [`GnnModel::flatten`] order, as mutable slices:
/// per conv layer w_self then w_neigh, then per dense layer weight then
/// bias. Lets the sweep perturb one coordinate without rewriting all 27k.
pub fn segment_mut(m: &mut GnnModel, seg: usize) -> &mut [f64] {
    let conv_segments = 2 * m.convs.len();
    if seg < conv_segments {
        let arr = if seg % 2 == 0 {
            &mut m.convs[seg / 2].w_self
        } else {
            &mut m.convs[seg / 2].w_neigh
        };
        arr.as_slice_mut().expect("standard layout")
    } else {
        let d = seg - conv_segments;
        if d % 2 == 0 {
            m.dense[d / 2].weight.as_slice_mut().expect("standard layout")
        } else {
            m.dense[d / 2].bias.as_slice_mut().expect("standard layout")
        }
    }
}

pub fn fd_relative_error(fd: f64, analytic: f64) -> f64 {
    (fd - analytic).abs() / analytic.abs().max(fd.abs()).max(FD_REL_FLOOR)
}

/// Central-difference sweep over every parameter of one instance; returns
/// the worst relative error. A mismatch between the sweep order and the
/// flatten order cannot pass silently — it would pair finite differences
/// with the wrong analytic coordinate and fail the comparison.
pub fn gradcheck_instance(instance: usize, g: &Graph, x: &FeatureMatrix, model: &GnnModel) -> f64 {
    let (_, grad) = graph_gradient(model, g, x).unwrap();
    let analytic = grad.flatten();
    let theta = model.flatten();

    let mut worst_rel = 0.0f64;
    let mut probe = model.clone();
    let segments = 2 * model.convs.len() + 2 * model.dense.len();
    let mut flat_idx = 0;
    for seg in 0..segments {
        let len = segment_mut(&mut probe, seg).len();
        for k in 0..len {
            let base = theta[flat_idx];
            segment_mut(&mut probe, seg)[k] = base + FD_STEP;
            let f_plus = graph_loss(&probe, g, x).unwrap();
            segment_mut(&mut probe, seg)[k] = base - FD_STEP;
            let f_minus = graph_loss(&probe, g, x).unwrap();
            segment_mut(&mut probe, seg)[k] = base;

            let fd = (f_plus - f_minus) / (2.0 * FD_STEP);
            let rel = fd_relative_error(fd, analytic[flat_idx]);
            worst_rel = worst_rel.max(rel);
            assert!(
                rel < FD_REL_TOL,
                "instance {instance}, parameter {flat_idx}: analytic {} vs fd {fd} (rel {rel:.2e})",
                analytic[flat_idx]
            );
            flat_idx += 1;
        }
    }
    assert_eq!(flat_idx, theta.len(), "sweep missed parameters");
    worst_rel
}
