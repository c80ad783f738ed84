//! Loss, reverse-mode gradients, and the optimization loop.
//!
//! The loss is the expected normalized cut of the soft assignment: for each
//! class k, the expected number of cut edges divided by the expected volume,
//! summed over both classes. Class volumes are guarded by a small ε so the
//! loss stays differentiable when a class's probability mass vanishes.
//! Minimizing it pushes the network toward balanced, few-crossing splits
//! without ever seeing a labelled partition.

use super::{neighbor_mean_adjoint, GnnModel};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mesh::{FeatureMatrix, PolyMesh};
use crate::rng::stream_indexed;
use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;

/// Guard added to expected class volumes in the loss denominator.
pub const LOSS_EPS: f64 = 1e-12;

/// One training instance: an element graph and its node features.
#[derive(Debug, Clone)]
pub struct TrainItem {
    pub graph: Graph,
    pub features: FeatureMatrix,
}

impl TrainItem {
    pub fn from_mesh(mesh: &PolyMesh) -> Result<TrainItem> {
        Ok(TrainItem {
            graph: mesh.connectivity_graph(),
            features: mesh.extract_features()?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2_coeff: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-5,
            l2_coeff: 1e-5,
            batch_size: 4,
            epochs: 300,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !self.l2_coeff.is_finite() || self.l2_coeff < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "l2 coefficient must be finite and non-negative, got {}",
                self.l2_coeff
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mean train/validation loss of one epoch (data term only, per graph).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Result of a training run: the final parameters, the checkpoint with the
/// lowest validation loss, and the loss history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub final_model: GnnModel,
    pub best_model: GnnModel,
    /// Epoch index of `best_model`; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
    /// Mean validation loss of the untouched input model.
    pub initial_val_loss: f64,
    pub history: Vec<EpochRecord>,
}

/// Expected normalized cut of the soft assignment `y` on `g`, guarded by
/// [`LOSS_EPS`] in the denominators.
pub(crate) fn soft_cut_value(g: &Graph, y: &Array2<f64>) -> f64 {
    let (loss, _) = soft_cut_terms(g, y, false);
    loss
}

/// The loss together with its gradient with respect to `y`.
fn soft_cut_with_grad(g: &Graph, y: &Array2<f64>) -> (f64, Array2<f64>) {
    let (loss, dy) = soft_cut_terms(g, y, true);
    (loss, dy.expect("gradient requested"))
}

fn soft_cut_terms(g: &Graph, y: &Array2<f64>, want_grad: bool) -> (f64, Option<Array2<f64>>) {
    let n = g.node_count();
    let classes = y.ncols();
    let mut loss = 0.0;
    let mut dy = want_grad.then(|| Array2::zeros(y.raw_dim()));
    for k in 0..classes {
        // Row sums of y over neighborhoods, expected crossings, and the
        // expected class volume.
        let mut neigh_sum = vec![0.0f64; n];
        let mut crossings = 0.0;
        let mut volume = 0.0;
        for i in 0..n {
            let deg = g.degree(i) as f64;
            let mut s = 0.0;
            for &j in g.neighbors(i) {
                s += y[[j, k]];
            }
            neigh_sum[i] = s;
            crossings += y[[i, k]] * (deg - s);
            volume += deg * y[[i, k]];
        }
        let guarded = volume + LOSS_EPS;
        loss += crossings / guarded;
        if let Some(dy) = dy.as_mut() {
            let inv_sq = 1.0 / (guarded * guarded);
            for i in 0..n {
                let deg = g.degree(i) as f64;
                dy[[i, k]] =
                    ((deg - 2.0 * neigh_sum[i]) * guarded - crossings * deg) * inv_sq;
            }
        }
    }
    (loss, dy)
}

/// Loss of one instance (data term only, no regularization).
pub fn graph_loss(model: &GnnModel, g: &Graph, x: &FeatureMatrix) -> Result<f64> {
    Ok(soft_cut_value(g, &model.forward_soft(g, x)?))
}

/// Loss and parameter gradient of one instance (data term only). The
/// regularization term's gradient, `2·l2·θ`, is added once per batch by the
/// training loop.
pub fn graph_gradient(model: &GnnModel, g: &Graph, x: &FeatureMatrix) -> Result<(f64, GnnModel)> {
    let t = model.forward_trace(g, x)?;
    let (loss, dy) = soft_cut_with_grad(g, &t.y);

    // Softmax: dz_i = y_i ⊙ (dy_i − <dy_i, y_i>) per row.
    let mut dh = Array2::zeros(t.y.raw_dim());
    for i in 0..t.y.nrows() {
        let mut inner = 0.0;
        for j in 0..t.y.ncols() {
            inner += dy[[i, j]] * t.y[[i, j]];
        }
        for j in 0..t.y.ncols() {
            dh[[i, j]] = t.y[[i, j]] * (dy[[i, j]] - inner);
        }
    }

    let mut grad = GnnModel::zeroed();
    let last = model.dense.len() - 1;
    for l in (0..model.dense.len()).rev() {
        // The last layer is affine; earlier ones squash through tanh, whose
        // derivative is recovered from the stored output.
        let dpre = if l == last {
            dh
        } else {
            let out = &t.dense_out[l];
            let mut d = dh;
            d.zip_mut_with(out, |g, &o| *g *= 1.0 - o * o);
            d
        };
        let input = if l == 0 {
            t.conv_out.last().expect("conv layers")
        } else {
            &t.dense_out[l - 1]
        };
        grad.dense[l].weight = input.t().dot(&dpre);
        grad.dense[l].bias = dpre.sum_axis(Axis(0));
        dh = dpre.dot(&model.dense[l].weight.t());
    }

    for l in (0..model.convs.len()).rev() {
        let mut dpre = dh;
        dpre.zip_mut_with(&t.conv_out[l], |g, &o| *g *= 1.0 - o * o);
        grad.convs[l].w_self = t.conv_in[l].t().dot(&dpre);
        grad.convs[l].w_neigh = t.conv_mean[l].t().dot(&dpre);
        if l > 0 {
            dh = dpre.dot(&model.convs[l].w_self.t());
            dh += &neighbor_mean_adjoint(g, &dpre.dot(&model.convs[l].w_neigh.t()));
        } else {
            dh = Array2::zeros((0, 0));
        }
    }

    Ok((loss, grad))
}

/// First/second-moment optimizer state over the flattened parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(param_count: usize) -> AdamState {
        AdamState {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One update with bias-corrected moment estimates.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Mean data loss over a set of instances.
pub fn mean_loss(model: &GnnModel, items: &[TrainItem]) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::InvalidConfig(
            "loss over an empty instance set".into(),
        ));
    }
    let mut acc = 0.0;
    for item in items {
        acc += graph_loss(model, &item.graph, &item.features)?;
    }
    Ok(acc / items.len() as f64)
}

/// Trains `model` by mini-batch gradient descent with the Adam update rule.
///
/// The batch objective is the sum of per-graph losses plus
/// `l2_coeff · ‖θ‖²` once per batch. Instances are reshuffled every epoch
/// from the config seed, so a run is reproducible end to end. Mean per-graph
/// train and validation losses are recorded each epoch; the returned outcome
/// carries both the final parameters and the best-validation checkpoint. A
/// non-finite loss aborts with a diagnostic naming the epoch and batch.
pub fn train(
    model: GnnModel,
    train_items: &[TrainItem],
    val_items: &[TrainItem],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_items.is_empty() {
        return Err(Error::InvalidConfig("training set is empty".into()));
    }
    if val_items.is_empty() {
        return Err(Error::InvalidConfig("validation set is empty".into()));
    }
    for (idx, item) in train_items.iter().chain(val_items).enumerate() {
        if item.features.len() != item.graph.node_count() {
            return Err(Error::ShapeMismatch(format!(
                "instance {idx}: {} feature rows for {} nodes",
                item.features.len(),
                item.graph.node_count()
            )));
        }
    }

    let initial_val_loss = mean_loss(&model, val_items)?;
    let mut model = model;
    let mut params = model.flatten();
    let mut adam = AdamState::new(params.len());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, GnnModel)> = None;

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..train_items.len()).collect();
        order.shuffle(&mut stream_indexed(cfg.seed, "train-shuffle", epoch as u64));

        let mut epoch_loss = 0.0;
        for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut batch_grad = GnnModel::zeroed();
            let mut batch_loss = 0.0;
            for &i in batch {
                let item = &train_items[i];
                let (loss, grad) = graph_gradient(&model, &item.graph, &item.features)?;
                batch_loss += loss;
                batch_grad.accumulate(&grad);
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("training loss at epoch {epoch}, batch {batch_idx}"),
                });
            }
            epoch_loss += batch_loss;

            let mut grads = batch_grad.flatten();
            if cfg.l2_coeff > 0.0 {
                for (g, p) in grads.iter_mut().zip(&params) {
                    *g += 2.0 * cfg.l2_coeff * p;
                }
            }
            adam.step(&mut params, &grads, cfg.learning_rate);
            model.assign_flat(&params)?;
        }

        let val_loss = mean_loss(&model, val_items)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFinite {
                context: format!("validation loss after epoch {epoch}"),
            });
        }
        history.push(EpochRecord {
            train_loss: epoch_loss / train_items.len() as f64,
            val_loss,
        });
        if best.as_ref().is_none_or(|(b, _, _)| val_loss < *b) {
            best = Some((val_loss, epoch, model.clone()));
        }
    }

    let (best_epoch, best_model) = match best {
        Some((_, e, m)) => (Some(e), m),
        None => (None, model.clone()),
    };
    Ok(TrainOutcome {
        final_model: model,
        best_model,
        best_epoch,
        initial_val_loss,
        history,
    })
}
