//! Structural invariants of agglomerations and hierarchies across every
//! mesh kind and bisection backend.

use polyagg::agglomerate::{
    agglomerate, build_hierarchy, load_agglomeration, save_agglomeration, submesh_diameter,
    AgglomeratedMesh,
};
use polyagg::bisect::{BisectionModel, GnnBisector, KMeansBisector, MultilevelBisector};
use polyagg::gnn::GnnModel;
use polyagg::mesh::{generate_mesh, MeshKind, PolyMesh};
use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::Arc;

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("polyagg-integ-{}-{name}", std::process::id()))
}

fn backends() -> Vec<(&'static str, Box<dyn BisectionModel>)> {
    vec![
        ("kmeans", Box::new(KMeansBisector::default())),
        ("multilevel", Box::new(MultilevelBisector::default())),
        ("gnn", Box::new(GnnBisector::new(GnnModel::new(11)))),
    ]
}

fn test_meshes() -> Vec<(MeshKind, Arc<PolyMesh>)> {
    MeshKind::ALL
        .into_iter()
        .map(|kind| {
            let n = if kind == MeshKind::Voronoi { 90 } else { 9 };
            (kind, Arc::new(generate_mesh(kind, n, 13).unwrap()))
        })
        .collect()
}

/// Partition of unity: every fine cell belongs to exactly one coarse cell,
/// and the coarse ids are dense.
fn assert_partition_of_unity(agg: &AgglomeratedMesh) {
    let n = agg.fine().cell_count();
    assert_eq!(agg.assignment().len(), n);
    let mut seen = vec![false; agg.cell_count()];
    for &a in agg.assignment() {
        assert!(a < agg.cell_count());
        seen[a] = true;
    }
    assert!(seen.iter().all(|&s| s), "unused coarse id");

    let mut from_cells = vec![usize::MAX; n];
    for (cid, cell) in agg.cells().iter().enumerate() {
        assert!(!cell.fine_cells.is_empty());
        for &f in &cell.fine_cells {
            assert_eq!(from_cells[f], usize::MAX, "fine cell {f} in two coarse cells");
            from_cells[f] = cid;
        }
    }
    assert_eq!(from_cells, agg.assignment());
}

fn assert_area_conservation(agg: &AgglomeratedMesh) {
    for cell in agg.cells() {
        let fine_sum: f64 = cell
            .fine_cells
            .iter()
            .map(|&f| agg.fine().element_area(f).unwrap())
            .sum();
        assert!(
            (cell.area - fine_sum).abs() <= 1e-10 * fine_sum.max(1.0),
            "coarse area {} vs fine sum {fine_sum}",
            cell.area
        );
    }
}

#[test]
fn every_kind_and_backend_yields_a_sound_agglomeration() {
    for (kind, mesh) in test_meshes() {
        let h0 = mesh.mesh_size().unwrap();
        let target = 3.0 * h0;
        for (name, model) in backends() {
            let agg = agglomerate(mesh.clone(), target, model.as_ref()).unwrap();
            assert!(agg.cell_count() > 1, "{}/{name}: degenerate result", kind.name());
            assert_partition_of_unity(&agg);
            assert_area_conservation(&agg);
            for cell in agg.cells() {
                assert!(
                    cell.diameter <= target,
                    "{}/{name}: diameter {} above target {target}",
                    kind.name(),
                    cell.diameter
                );
                assert!(cell.diameter > 0.0 && cell.area > 0.0);
                assert!(!cell.boundary.is_empty());
            }
            let ufs: Vec<f64> = agg.cells().iter().map(|c| c.diameter / agg.mesh_size()).collect();
            assert!(ufs.iter().all(|&u| u > 0.0 && u <= 1.0));
            assert_eq!(ufs.iter().cloned().fold(0.0, f64::max), 1.0);
        }
    }
}

#[test]
fn agglomeration_is_deterministic_per_backend() {
    let mesh = Arc::new(generate_mesh(MeshKind::Voronoi, 70, 3).unwrap());
    let h0 = mesh.mesh_size().unwrap();
    for (name, model) in backends() {
        let a = agglomerate(mesh.clone(), 3.0 * h0, model.as_ref()).unwrap();
        let b = agglomerate(mesh.clone(), 3.0 * h0, model.as_ref()).unwrap();
        assert_eq!(a.assignment(), b.assignment(), "{name}");
    }
}

#[test]
fn coarse_cells_stay_connected_in_the_fine_graph() {
    let mesh = Arc::new(generate_mesh(MeshKind::RandomTriangles, 10, 4).unwrap());
    let graph = mesh.connectivity_graph();
    let h0 = mesh.mesh_size().unwrap();
    for (name, model) in backends() {
        let agg = agglomerate(mesh.clone(), 4.0 * h0, model.as_ref()).unwrap();
        for cell in agg.cells() {
            // Breadth-first search inside the member set must reach all of it.
            let members: HashSet<usize> = cell.fine_cells.iter().copied().collect();
            let start = cell.fine_cells[0];
            let mut seen = HashSet::from([start]);
            let mut queue = vec![start];
            while let Some(i) = queue.pop() {
                for &j in graph.neighbors(i) {
                    if members.contains(&j) && seen.insert(j) {
                        queue.push(j);
                    }
                }
            }
            assert_eq!(seen.len(), members.len(), "{name}: disconnected coarse cell");
        }
    }
}

#[test]
fn hierarchies_are_nested_across_backends() {
    let mesh = Arc::new(generate_mesh(MeshKind::Voronoi, 80, 21).unwrap());
    for (name, model) in backends() {
        let hierarchy = build_hierarchy(mesh.clone(), &[2.0, 4.0], model.as_ref()).unwrap();
        let levels = hierarchy.levels();
        assert_eq!(levels.len(), 3, "{name}");
        // Level 0 is the identity.
        assert!(levels[0].assignment().iter().enumerate().all(|(i, &a)| a == i));

        for pair in levels.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            assert!(next.cell_count() <= prev.cell_count());
            // Nested: all fine cells of one previous coarse cell map to the
            // same next-level cell.
            for cell in prev.cells() {
                let targets: HashSet<usize> = cell
                    .fine_cells
                    .iter()
                    .map(|&f| next.assignment()[f])
                    .collect();
                assert_eq!(targets.len(), 1, "{name}: previous cell split");
            }
        }
        for level in levels {
            assert_partition_of_unity(level);
            assert_area_conservation(level);
        }
    }
}

#[test]
fn deeper_levels_meet_their_own_targets() {
    let mesh = Arc::new(generate_mesh(MeshKind::Squares, 16, 0).unwrap());
    let h0 = mesh.mesh_size().unwrap();
    let model = KMeansBisector::default();
    let hierarchy = build_hierarchy(mesh, &[2.0, 4.0, 8.0], &model).unwrap();
    for (level, &factor) in hierarchy.levels()[1..].iter().zip(&[2.0, 4.0, 8.0]) {
        for cell in level.cells() {
            assert!(cell.diameter <= factor * h0 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn saved_hierarchies_reload_identically() {
    let mesh = Arc::new(generate_mesh(MeshKind::Triangles, 8, 2).unwrap());
    let model = KMeansBisector::default();
    let hierarchy = build_hierarchy(mesh.clone(), &[2.0, 4.0], &model).unwrap();
    let path = temp_path("hierarchy.json");
    save_agglomeration(&path, hierarchy.levels()).unwrap();
    let reloaded = load_agglomeration(&path, mesh.clone()).unwrap();
    std::fs::remove_file(&path).ok();

    assert_eq!(reloaded.len(), hierarchy.levels().len());
    for (orig, back) in hierarchy.levels().iter().zip(&reloaded) {
        assert_eq!(orig.assignment(), back.assignment());
        assert_eq!(orig.h_target().to_bits(), back.h_target().to_bits());
        assert_eq!(orig.cell_count(), back.cell_count());
    }
}

#[test]
fn submesh_diameter_agrees_with_coarse_cells() {
    let mesh = Arc::new(generate_mesh(MeshKind::Voronoi, 40, 6).unwrap());
    let h0 = mesh.mesh_size().unwrap();
    let agg = agglomerate(mesh.clone(), 3.0 * h0, &KMeansBisector::default()).unwrap();
    for cell in agg.cells() {
        let d = submesh_diameter(&mesh, &cell.fine_cells).unwrap();
        assert_eq!(d.to_bits(), cell.diameter.to_bits());
    }
}

#[test]
fn tiny_targets_keep_the_fine_mesh() {
    let mesh = Arc::new(generate_mesh(MeshKind::Squares, 6, 0).unwrap());
    let h0 = mesh.mesh_size().unwrap();
    let agg = agglomerate(mesh.clone(), h0, &KMeansBisector::default()).unwrap();
    assert_eq!(agg.cell_count(), mesh.cell_count());
}

#[test]
fn huge_targets_collapse_to_one_cell() {
    let mesh = Arc::new(generate_mesh(MeshKind::Voronoi, 30, 1).unwrap());
    let agg = agglomerate(mesh, 10.0, &MultilevelBisector::default()).unwrap();
    assert_eq!(agg.cell_count(), 1);
    assert!((agg.cells()[0].area - 1.0).abs() <= 1e-10);
}
