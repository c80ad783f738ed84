//! Model serialization: a JSON container with a format magic, an
//! architecture descriptor, and per-layer parameter arrays in row-major
//! order with declared shapes. Floating-point values round-trip bit-exactly.

use super::{DenseLayer, GnnModel, SageLayer, CONV_LAYERS, DENSE_WIDTHS};
use crate::error::{Error, Result};
use crate::write_atomic;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_MAGIC: &str = "polyagg-gnn v1";
const ARCHITECTURE: &str = "norm + 4x conv(64, tanh) + dense(32, tanh) + dense(8, tanh) + dense(2) + softmax";

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    shape: [usize; 2],
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ConvRepr {
    w_self: MatrixRepr,
    w_neigh: MatrixRepr,
}

#[derive(Serialize, Deserialize)]
struct DenseRepr {
    weight: MatrixRepr,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    architecture: String,
    convs: Vec<ConvRepr>,
    dense: Vec<DenseRepr>,
}

fn to_repr(m: &Array2<f64>) -> MatrixRepr {
    MatrixRepr {
        shape: [m.nrows(), m.ncols()],
        data: m.iter().copied().collect(),
    }
}

fn from_repr(r: MatrixRepr, what: &str) -> Result<Array2<f64>> {
    let [rows, cols] = r.shape;
    if r.data.len() != rows * cols {
        return Err(Error::ModelFormat(format!(
            "{what}: shape {rows}x{cols} declares {} values, found {}",
            rows * cols,
            r.data.len()
        )));
    }
    if r.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::ModelFormat(format!("{what}: non-finite parameter")));
    }
    Array2::from_shape_vec((rows, cols), r.data)
        .map_err(|e| Error::ModelFormat(format!("{what}: {e}")))
}

/// Writes the model to `path` atomically.
pub fn save_model(model: &GnnModel, path: &Path) -> Result<()> {
    if !model.is_finite() {
        return Err(Error::NonFinite {
            context: "model parameters before save".into(),
        });
    }
    let file = ModelFile {
        format: MODEL_MAGIC.to_string(),
        architecture: ARCHITECTURE.to_string(),
        convs: model
            .convs
            .iter()
            .map(|c| ConvRepr {
                w_self: to_repr(&c.w_self),
                w_neigh: to_repr(&c.w_neigh),
            })
            .collect(),
        dense: model
            .dense
            .iter()
            .map(|d| DenseRepr {
                weight: to_repr(&d.weight),
                bias: d.bias.to_vec(),
            })
            .collect(),
    };
    let bytes = serde_json::to_vec(&file)
        .map_err(|e| Error::ModelFormat(format!("encoding model: {e}")))?;
    write_atomic(path, &bytes)
}

/// Loads a model saved by [`save_model`], validating the format magic and
/// that every layer has the architecture's exact shape.
pub fn load_model(path: &Path) -> Result<GnnModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    if file.format != MODEL_MAGIC {
        return Err(Error::ModelFormat(format!(
            "unsupported format {:?}, expected {MODEL_MAGIC:?}",
            file.format
        )));
    }
    if file.convs.len() != CONV_LAYERS || file.dense.len() != DENSE_WIDTHS.len() {
        return Err(Error::ModelFormat(format!(
            "expected {CONV_LAYERS} conv and {} dense layers, found {} and {}",
            DENSE_WIDTHS.len(),
            file.convs.len(),
            file.dense.len()
        )));
    }

    let reference = GnnModel::zeroed();
    let mut convs = Vec::with_capacity(CONV_LAYERS);
    for (l, c) in file.convs.into_iter().enumerate() {
        let w_self = from_repr(c.w_self, &format!("conv layer {l} w_self"))?;
        let w_neigh = from_repr(c.w_neigh, &format!("conv layer {l} w_neigh"))?;
        let want = reference.convs[l].w_self.dim();
        if w_self.dim() != want || w_neigh.dim() != want {
            return Err(Error::ModelFormat(format!(
                "conv layer {l}: expected shape {want:?}, found {:?} and {:?}",
                w_self.dim(),
                w_neigh.dim()
            )));
        }
        convs.push(SageLayer { w_self, w_neigh });
    }
    let mut dense = Vec::with_capacity(DENSE_WIDTHS.len());
    for (l, d) in file.dense.into_iter().enumerate() {
        let weight = from_repr(d.weight, &format!("dense layer {l} weight"))?;
        let want = reference.dense[l].weight.dim();
        if weight.dim() != want {
            return Err(Error::ModelFormat(format!(
                "dense layer {l}: expected shape {want:?}, found {:?}",
                weight.dim()
            )));
        }
        if d.bias.len() != want.1 {
            return Err(Error::ModelFormat(format!(
                "dense layer {l}: expected {} bias values, found {}",
                want.1,
                d.bias.len()
            )));
        }
        if d.bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::ModelFormat(format!(
                "dense layer {l}: non-finite bias"
            )));
        }
        dense.push(DenseLayer {
            weight,
            bias: Array1::from_vec(d.bias),
        });
    }
    Ok(GnnModel { convs, dense })
}
