//! Trainable graph-network bisection backend.
//!
//! A small message-passing network maps per-element geometry (area and
//! barycenter) to two-class membership probabilities. The pipeline is an
//! input normalization stage, four graph-convolution layers of width 64, a
//! three-layer dense classifier narrowing 64 → 32 → 8 → 2, and a row-wise
//! softmax. Training (see [`train`]) minimizes the expected normalized cut
//! of the soft assignment, so the network needs no labelled partitions.
//!
//! All activations are `tanh`, keeping hidden features inside [−1, 1] — the
//! same interval the normalization stage maps the inputs to.

pub mod dataset;
pub mod io;
pub mod train;

pub use dataset::{build_dataset, DatasetSpec};
pub use io::{load_model, save_model, MODEL_MAGIC};
pub use train::{
    graph_gradient, graph_loss, mean_loss, train, AdamState, EpochRecord, TrainConfig, TrainItem,
    TrainOutcome,
};

use crate::error::{Error, Result};
use crate::graph::{Graph, ProbPartition};
use crate::mesh::FeatureMatrix;
use crate::rng::stream;
use ndarray::{Array1, Array2, Axis};
use rand::Rng;

/// Input features per node: area, barycenter x, barycenter y.
pub const FEATURE_WIDTH: usize = FeatureMatrix::WIDTH;
/// Output width of every graph-convolution layer.
pub const CONV_WIDTH: usize = 64;
/// Number of graph-convolution layers.
pub const CONV_LAYERS: usize = 4;
/// Output widths of the dense classifier layers; the last is the class count.
pub const DENSE_WIDTHS: [usize; 3] = [32, 8, 2];

/// Graph-convolution layer: combines each node's own features with the mean
/// of its neighbors' through two linear maps (no bias),
/// `out = tanh(H · w_self + mean(H) · w_neigh)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SageLayer {
    /// Shape (in, out); multiplies the node's own features.
    pub w_self: Array2<f64>,
    /// Shape (in, out); multiplies the neighborhood mean.
    pub w_neigh: Array2<f64>,
}

impl SageLayer {
    /// Neighborhood mean and activated output for input rows `h`.
    pub(crate) fn apply(&self, g: &Graph, h: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let mean = neighbor_mean(g, h);
        let mut pre = h.dot(&self.w_self);
        pre += &mean.dot(&self.w_neigh);
        pre.mapv_inplace(f64::tanh);
        (mean, pre)
    }
}

/// Affine layer `h · weight + bias`, optionally squashed through `tanh`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// Shape (in, out).
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub(crate) fn apply(&self, h: &Array2<f64>, squash: bool) -> Array2<f64> {
        let mut out = h.dot(&self.weight);
        out += &self.bias;
        if squash {
            out.mapv_inplace(f64::tanh);
        }
        out
    }
}

/// The full network. The architecture is fixed; only the parameters vary.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnModel {
    pub convs: Vec<SageLayer>,
    pub dense: Vec<DenseLayer>,
}

/// Per-layer intermediates of one forward pass, kept for backpropagation.
pub(crate) struct Trace {
    /// Input rows of each conv layer (the first is the normalized features).
    pub conv_in: Vec<Array2<f64>>,
    /// Neighborhood means consumed by each conv layer.
    pub conv_mean: Vec<Array2<f64>>,
    /// Activated outputs of each conv layer.
    pub conv_out: Vec<Array2<f64>>,
    /// Post-activation outputs of each dense layer; the last holds logits.
    pub dense_out: Vec<Array2<f64>>,
    /// Softmax class probabilities.
    pub y: Array2<f64>,
}

impl GnnModel {
    /// Fresh model with uniform Glorot-initialized weights and zero biases.
    pub fn new(seed: u64) -> GnnModel {
        let mut rng = stream(seed, "init");
        let mut glorot = |rows: usize, cols: usize| {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound))
        };
        let mut convs = Vec::with_capacity(CONV_LAYERS);
        let mut width = FEATURE_WIDTH;
        for _ in 0..CONV_LAYERS {
            convs.push(SageLayer {
                w_self: glorot(width, CONV_WIDTH),
                w_neigh: glorot(width, CONV_WIDTH),
            });
            width = CONV_WIDTH;
        }
        let mut dense = Vec::with_capacity(DENSE_WIDTHS.len());
        for &out in &DENSE_WIDTHS {
            dense.push(DenseLayer {
                weight: glorot(width, out),
                bias: Array1::zeros(out),
            });
            width = out;
        }
        GnnModel { convs, dense }
    }

    /// Model of the default architecture with every parameter zero. Doubles
    /// as the gradient accumulator shape.
    pub fn zeroed() -> GnnModel {
        let mut convs = Vec::with_capacity(CONV_LAYERS);
        let mut width = FEATURE_WIDTH;
        for _ in 0..CONV_LAYERS {
            convs.push(SageLayer {
                w_self: Array2::zeros((width, CONV_WIDTH)),
                w_neigh: Array2::zeros((width, CONV_WIDTH)),
            });
            width = CONV_WIDTH;
        }
        let mut dense = Vec::with_capacity(DENSE_WIDTHS.len());
        for &out in &DENSE_WIDTHS {
            dense.push(DenseLayer {
                weight: Array2::zeros((width, out)),
                bias: Array1::zeros(out),
            });
            width = out;
        }
        GnnModel { convs, dense }
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.conv_param_count()
            + self
                .dense
                .iter()
                .map(|d| d.weight.len() + d.bias.len())
                .sum::<usize>()
    }

    /// Parameters in the graph-convolution layers alone.
    pub fn conv_param_count(&self) -> usize {
        self.convs
            .iter()
            .map(|c| c.w_self.len() + c.w_neigh.len())
            .sum()
    }

    /// All parameters as one vector: conv layers in order (w_self then
    /// w_neigh, row-major), then dense layers (weight row-major, then bias).
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for c in &self.convs {
            flat.extend(c.w_self.iter());
            flat.extend(c.w_neigh.iter());
        }
        for d in &self.dense {
            flat.extend(d.weight.iter());
            flat.extend(d.bias.iter());
        }
        flat
    }

    /// Overwrites every parameter from a [`flatten`](Self::flatten)-ordered
    /// vector.
    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut it = flat.iter();
        for c in &mut self.convs {
            for w in c.w_self.iter_mut().chain(c.w_neigh.iter_mut()) {
                *w = *it.next().expect("length checked");
            }
        }
        for d in &mut self.dense {
            for w in d.weight.iter_mut().chain(d.bias.iter_mut()) {
                *w = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// Sum of squared parameters (the regularization term is a multiple of
    /// this).
    pub fn squared_norm(&self) -> f64 {
        let mut acc = 0.0;
        for c in &self.convs {
            acc += c.w_self.iter().map(|w| w * w).sum::<f64>();
            acc += c.w_neigh.iter().map(|w| w * w).sum::<f64>();
        }
        for d in &self.dense {
            acc += d.weight.iter().map(|w| w * w).sum::<f64>();
            acc += d.bias.iter().map(|w| w * w).sum::<f64>();
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.convs
            .iter()
            .all(|c| c.w_self.iter().all(|w| w.is_finite()) && c.w_neigh.iter().all(|w| w.is_finite()))
            && self
                .dense
                .iter()
                .all(|d| d.weight.iter().all(|w| w.is_finite()) && d.bias.iter().all(|w| w.is_finite()))
    }

    /// Adds another model's parameters element-wise (gradient accumulation).
    pub(crate) fn accumulate(&mut self, other: &GnnModel) {
        for (a, b) in self.convs.iter_mut().zip(&other.convs) {
            a.w_self += &b.w_self;
            a.w_neigh += &b.w_neigh;
        }
        for (a, b) in self.dense.iter_mut().zip(&other.dense) {
            a.weight += &b.weight;
            a.bias += &b.bias;
        }
    }

    /// Class-membership probabilities for every node.
    pub fn forward(&self, g: &Graph, x: &FeatureMatrix) -> Result<ProbPartition> {
        ProbPartition::new(self.forward_soft(g, x)?)
    }

    /// Forward pass returning the raw N×2 softmax matrix.
    pub(crate) fn forward_soft(&self, g: &Graph, x: &FeatureMatrix) -> Result<Array2<f64>> {
        self.check_input(g, x)?;
        let mut h = normalize_input(x);
        for c in &self.convs {
            h = c.apply(g, &h).1;
        }
        let last = self.dense.len() - 1;
        for (l, d) in self.dense.iter().enumerate() {
            h = d.apply(&h, l < last);
        }
        Ok(softmax_rows(&h))
    }

    /// Forward pass keeping every intermediate needed by backpropagation.
    pub(crate) fn forward_trace(&self, g: &Graph, x: &FeatureMatrix) -> Result<Trace> {
        self.check_input(g, x)?;
        let mut conv_in = Vec::with_capacity(CONV_LAYERS);
        let mut conv_mean = Vec::with_capacity(CONV_LAYERS);
        let mut conv_out = Vec::with_capacity(CONV_LAYERS);
        let mut h = normalize_input(x);
        for c in &self.convs {
            let (mean, out) = c.apply(g, &h);
            conv_in.push(h);
            conv_mean.push(mean);
            h = out.clone();
            conv_out.push(out);
        }
        let last = self.dense.len() - 1;
        let mut dense_out = Vec::with_capacity(self.dense.len());
        for (l, d) in self.dense.iter().enumerate() {
            h = d.apply(&h, l < last);
            dense_out.push(h.clone());
        }
        let y = softmax_rows(dense_out.last().expect("dense layers"));
        Ok(Trace {
            conv_in,
            conv_mean,
            conv_out,
            dense_out,
            y,
        })
    }

    fn check_input(&self, g: &Graph, x: &FeatureMatrix) -> Result<()> {
        if x.len() != g.node_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows for a graph with {} nodes",
                x.len(),
                g.node_count()
            )));
        }
        Ok(())
    }
}

/// Normalizes raw element features into the network's input ranges: areas
/// divided by their maximum (→ (0,1]), barycenter columns centered at their
/// mean and divided by the largest absolute value (→ [−1,1]). When the raw
/// barycenter cloud is taller than wide, it is first rotated a quarter turn,
/// (x, y) → (y, −x), so the long axis always lies along x. A column with no
/// spread maps to zero.
pub fn normalize_input(x: &FeatureMatrix) -> Array2<f64> {
    let a = x.as_array();
    let n = a.nrows();
    let mut out = Array2::zeros((n, FeatureMatrix::WIDTH));
    if n == 0 {
        return out;
    }

    let max_area = a
        .column(FeatureMatrix::AREA)
        .iter()
        .fold(0.0f64, |m, &v| m.max(v));
    if max_area > 0.0 {
        for i in 0..n {
            out[[i, FeatureMatrix::AREA]] = a[[i, FeatureMatrix::AREA]] / max_area;
        }
    }

    let extent = |col: usize| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            lo = lo.min(a[[i, col]]);
            hi = hi.max(a[[i, col]]);
        }
        hi - lo
    };
    let rotate = extent(FeatureMatrix::BARY_Y) > extent(FeatureMatrix::BARY_X);
    let raw = |i: usize| {
        let bx = a[[i, FeatureMatrix::BARY_X]];
        let by = a[[i, FeatureMatrix::BARY_Y]];
        if rotate {
            (by, -bx)
        } else {
            (bx, by)
        }
    };

    for (col, pick) in [
        (FeatureMatrix::BARY_X, 0usize),
        (FeatureMatrix::BARY_Y, 1usize),
    ] {
        let component = |i: usize| {
            let (rx, ry) = raw(i);
            if pick == 0 {
                rx
            } else {
                ry
            }
        };
        let mean = (0..n).map(component).sum::<f64>() / n as f64;
        let max_abs = (0..n)
            .map(|i| (component(i) - mean).abs())
            .fold(0.0f64, f64::max);
        if max_abs > 0.0 {
            for i in 0..n {
                out[[i, col]] = (component(i) - mean) / max_abs;
            }
        }
    }
    out
}

/// Mean of each node's neighbor rows; nodes without neighbors get zeros.
fn neighbor_mean(g: &Graph, h: &Array2<f64>) -> Array2<f64> {
    let mut m = Array2::zeros(h.raw_dim());
    for i in 0..g.node_count() {
        let ns = g.neighbors(i);
        if ns.is_empty() {
            continue;
        }
        let mut row = m.row_mut(i);
        for &j in ns {
            row += &h.row(j);
        }
        let inv = 1.0 / ns.len() as f64;
        row.mapv_inplace(|v| v * inv);
    }
    m
}

/// Adjoint of [`neighbor_mean`] as a linear operator: each input row `i` is
/// scattered, scaled by `1/deg(i)`, onto the rows of `i`'s neighbors.
pub(crate) fn neighbor_mean_adjoint(g: &Graph, v: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(v.raw_dim());
    for i in 0..g.node_count() {
        let ns = g.neighbors(i);
        if ns.is_empty() {
            continue;
        }
        let inv = 1.0 / ns.len() as f64;
        for &j in ns {
            out.row_mut(j).scaled_add(inv, &v.row(i));
        }
    }
    out
}

/// Row-wise softmax, computed with max-subtraction so large logits cannot
/// overflow.
pub(crate) fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut y = z.clone();
    for mut row in y.axis_iter_mut(Axis(0)) {
        let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    y
}
