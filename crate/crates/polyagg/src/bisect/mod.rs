//! Bisection backends. Each backend splits a connected element graph in two;
//! the agglomeration driver applies one recursively until every submesh is
//! small enough. Backends differ in what they look at: k-means clusters the
//! element barycenters, the multilevel method works on the graph alone, and
//! the trained network combines both through learned features.

mod kmeans;
mod multilevel;

pub use kmeans::{kmeans_bisect, KMeansConfig};
pub use multilevel::{multilevel_bisect, MultilevelConfig};

use crate::error::Result;
use crate::gnn::GnnModel;
use crate::graph::{Graph, ProbPartition};
use crate::mesh::FeatureMatrix;

/// A bisection backend. Implementations return soft class memberships; hard
/// backends lift their labels to one-hot rows. Callers harden and repair the
/// result as needed.
pub trait BisectionModel {
    fn name(&self) -> &str;

    /// Splits the graph in two. `features` carries per-node geometry (area,
    /// barycenter, interface width) aligned with the graph's node ids.
    fn bisect(&self, g: &Graph, features: &FeatureMatrix) -> Result<ProbPartition>;
}

/// Barycenter k-means backend.
#[derive(Debug, Clone, Default)]
pub struct KMeansBisector {
    pub config: KMeansConfig,
}

impl KMeansBisector {
    pub fn new(config: KMeansConfig) -> Self {
        KMeansBisector { config }
    }
}

impl BisectionModel for KMeansBisector {
    fn name(&self) -> &str {
        "kmeans"
    }

    fn bisect(&self, _g: &Graph, features: &FeatureMatrix) -> Result<ProbPartition> {
        let p = kmeans_bisect(&features.barycenters(), &self.config)?;
        Ok(ProbPartition::from_labels(&p))
    }
}

/// Topology-only multilevel backend.
#[derive(Debug, Clone, Default)]
pub struct MultilevelBisector {
    pub config: MultilevelConfig,
}

impl MultilevelBisector {
    pub fn new(config: MultilevelConfig) -> Self {
        MultilevelBisector { config }
    }
}

impl BisectionModel for MultilevelBisector {
    fn name(&self) -> &str {
        "multilevel"
    }

    fn bisect(&self, g: &Graph, _features: &FeatureMatrix) -> Result<ProbPartition> {
        let p = multilevel_bisect(g, &self.config)?;
        Ok(ProbPartition::from_labels(&p))
    }
}

/// Trained-network backend.
#[derive(Debug, Clone)]
pub struct GnnBisector {
    pub model: GnnModel,
}

impl GnnBisector {
    pub fn new(model: GnnModel) -> Self {
        GnnBisector { model }
    }
}

impl BisectionModel for GnnBisector {
    fn name(&self) -> &str {
        "gnn"
    }

    fn bisect(&self, g: &Graph, features: &FeatureMatrix) -> Result<ProbPartition> {
        self.model.forward(g, features)
    }
}
