//! Seeded construction of training corpora from the mesh generators.

use super::train::TrainItem;
use crate::error::{Error, Result};
use crate::mesh::{generate_mesh, MeshKind};
use crate::rng::stream;
use rand::Rng;

/// Sizes and seed of a generated train/validation corpus. Counts are per
/// mesh kind, so the defaults give 800 training and 200 validation meshes.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub train_per_type: usize,
    pub val_per_type: usize,
    /// Inclusive grid-side range for the square and triangle generators.
    pub grid_sizes: (usize, usize),
    /// Inclusive seed-count range for the Voronoi generator.
    pub voronoi_sizes: (usize, usize),
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            train_per_type: 200,
            val_per_type: 50,
            grid_sizes: (8, 16),
            voronoi_sizes: (50, 200),
            seed: 0,
        }
    }
}

impl DatasetSpec {
    fn validate(&self) -> Result<()> {
        let (glo, ghi) = self.grid_sizes;
        let (vlo, vhi) = self.voronoi_sizes;
        if glo < 2 || glo > ghi {
            return Err(Error::InvalidConfig(format!(
                "grid size range ({glo}, {ghi}) must be ordered with lower bound >= 2"
            )));
        }
        if vlo < 4 || vlo > vhi {
            return Err(Error::InvalidConfig(format!(
                "voronoi size range ({vlo}, {vhi}) must be ordered with lower bound >= 4"
            )));
        }
        Ok(())
    }
}

/// Generates the training and validation sets described by `spec`. Mesh
/// sizes are sampled uniformly from the per-kind ranges; everything is
/// reproducible from the spec's seed.
pub fn build_dataset(spec: &DatasetSpec) -> Result<(Vec<TrainItem>, Vec<TrainItem>)> {
    spec.validate()?;
    let mut rng = stream(spec.seed, "dataset");
    let mut sets = Vec::with_capacity(2);
    for count in [spec.train_per_type, spec.val_per_type] {
        let mut items = Vec::with_capacity(count * MeshKind::ALL.len());
        for kind in MeshKind::ALL {
            let (lo, hi) = match kind {
                MeshKind::Voronoi => spec.voronoi_sizes,
                _ => spec.grid_sizes,
            };
            for _ in 0..count {
                let size = rng.random_range(lo..=hi);
                let mesh_seed = rng.random::<u64>();
                let mesh = generate_mesh(kind, size, mesh_seed)?;
                items.push(TrainItem::from_mesh(&mesh)?);
            }
        }
        sets.push(items);
    }
    let val = sets.pop().expect("two sets");
    let train = sets.pop().expect("two sets");
    Ok((train, val))
}
