//! Mesh-set manifests: the JSON index `generate` writes next to its mesh
//! files and `train` consumes to locate a corpus.
//!
//! Mesh paths in a manifest are stored relative to the manifest's own
//! directory, so a generated directory can be moved or copied wholesale.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use polyagg::mesh::{load_mesh, PolyMesh};
use polyagg::{write_atomic, Error, Result};
use serde::{Deserialize, Serialize};

/// Format tag required in the `format` field of every manifest.
pub const MANIFEST_FORMAT: &str = "polyagg-manifest v1";

/// File name `generate` uses for the manifest inside its output directory.
pub const MANIFEST_FILE: &str = "manifest.json";

/// One generated mesh: its file (relative to the manifest), the generator
/// kind, the size parameter `n`, and the per-mesh seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub kind: String,
    pub n: usize,
    pub seed: u64,
}

/// Index of a generated mesh set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub meshes: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(meshes: Vec<ManifestEntry>) -> Manifest {
        Manifest {
            format: MANIFEST_FORMAT.into(),
            meshes,
        }
    }

    /// Parses the manifest at `path`, checking its format tag.
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                message: format!(
                    "unsupported manifest format {:?}; expected {MANIFEST_FORMAT:?}",
                    manifest.format
                ),
            });
        }
        Ok(manifest)
    }

    /// Serializes the manifest to `path` atomically.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("cannot encode manifest: {e}")))?;
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    /// Loads every mesh the manifest lists, resolving entries relative to
    /// the manifest's directory.
    pub fn load_meshes(&self, manifest_path: &Path) -> Result<Vec<Arc<PolyMesh>>> {
        let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        self.meshes
            .iter()
            .map(|entry| Ok(Arc::new(load_mesh(resolve_entry(base, &entry.file))?)))
            .collect()
    }
}

fn resolve_entry(base: &Path, file: &str) -> PathBuf {
    let path = Path::new(file);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyagg::mesh::{generate_mesh, save_mesh, MeshKind};

    fn sample() -> Manifest {
        Manifest::new(vec![ManifestEntry {
            file: "squares-0000.txt".into(),
            kind: "squares".into(),
            n: 4,
            seed: 99,
        }])
    }

    #[test]
    fn manifests_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let manifest = sample();
        manifest.save(&path).unwrap();
        assert_eq!(Manifest::load(&path).unwrap(), manifest);
    }

    #[test]
    fn meshes_resolve_relative_to_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = generate_mesh(MeshKind::Squares, 4, 99).unwrap();
        save_mesh(&mesh, dir.path().join("squares-0000.txt")).unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        sample().save(&path).unwrap();

        let meshes = Manifest::load(&path).unwrap().load_meshes(&path).unwrap();
        assert_eq!(meshes.len(), 1);
        assert_eq!(meshes[0].cell_count(), 16);
    }

    #[test]
    fn malformed_json_reports_path_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{\n  \"format\": \"polyagg-manifest v1\",\n  oops\n}\n").unwrap();
        match Manifest::load(&path).unwrap_err() {
            Error::Parse { path: p, line, .. } => {
                assert!(p.contains("broken.json"));
                assert_eq!(line, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_format_tags_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("old.json");
        std::fs::write(&path, "{\"format\": \"polyagg-manifest v0\", \"meshes\": []}").unwrap();
        let err = Manifest::load(&path).unwrap_err();
        assert!(err.to_string().contains("polyagg-manifest v0"));
    }

    #[test]
    fn missing_files_surface_an_io_error_with_the_path() {
        let err = Manifest::load(Path::new("/nonexistent/manifest.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/manifest.json"));
    }
}
