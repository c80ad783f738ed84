//! Agglomeration of 2D polygonal meshes by recursive graph bisection.
//!
//! The crate models a mesh as a graph (one node per element, one edge per
//! shared geometric edge) and coarsens it by recursively bisecting that graph
//! until every agglomerate fits a target diameter. Three interchangeable
//! bisection backends are provided: a trainable graph neural network that
//! minimizes the expected normalized cut, k-means over element barycenters,
//! and a multilevel (matching + refinement) baseline that only sees topology.
//! Quality of the resulting coarse meshes is measured by uniformity-factor
//! and circle-ratio statistics, and a small harness benchmarks bisection
//! runtimes across mesh sizes.

pub mod agglomerate;
pub mod bisect;
pub mod error;
pub mod geometry;
pub mod gnn;
pub mod graph;
pub mod mesh;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

/// Writes `bytes` to `path` atomically: the content goes to a temporary file
/// in the same directory, which then replaces `path` by rename, so readers
/// never observe a half-written file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let stem = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    let tmp = dir.join(format!(
        ".{stem}.{}-{}.tmp",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
