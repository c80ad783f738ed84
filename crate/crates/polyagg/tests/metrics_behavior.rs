//! Quality tables and the runtime benchmark exercised across backends.

use polyagg::bisect::{BisectionModel, GnnBisector, KMeansBisector, MultilevelBisector};
use polyagg::gnn::GnnModel;
use polyagg::metrics::{geometric_sizes, quality_table, runtime_bench};
use polyagg::mesh::{generate_mesh, MeshKind};
use std::sync::Arc;

#[test]
fn geometry_aware_bisection_is_rounder_on_square_grids() {
    let meshes = vec![Arc::new(generate_mesh(MeshKind::Squares, 16, 0).unwrap())];
    let sets = vec![("squares".to_string(), meshes)];
    let kmeans = KMeansBisector::default();
    let multilevel = MultilevelBisector::default();
    let methods: Vec<(&str, &dyn BisectionModel)> =
        vec![("kmeans", &kmeans), ("multilevel", &multilevel)];
    let table = quality_table(&sets, &methods, 4.0).unwrap();

    let km = table.cell("squares", "kmeans").unwrap();
    let ml = table.cell("squares", "multilevel").unwrap();
    assert!(
        km.cr.mean > ml.cr.mean,
        "kmeans CR {} should beat topology-only CR {}",
        km.cr.mean,
        ml.cr.mean
    );

    let ratios = table.relative_to("multilevel");
    let km_ratio = ratios.iter().find(|r| r.method == "kmeans").unwrap();
    assert!(km_ratio.cr_ratio > 1.0);
}

#[test]
fn quality_table_covers_all_combinations() {
    let sets: Vec<(String, Vec<Arc<_>>)> = vec![
        (
            "squares".to_string(),
            vec![Arc::new(generate_mesh(MeshKind::Squares, 8, 0).unwrap())],
        ),
        (
            "voronoi".to_string(),
            vec![
                Arc::new(generate_mesh(MeshKind::Voronoi, 60, 1).unwrap()),
                Arc::new(generate_mesh(MeshKind::Voronoi, 60, 2).unwrap()),
            ],
        ),
    ];
    let kmeans = KMeansBisector::default();
    let gnn = GnnBisector::new(GnnModel::new(5));
    let methods: Vec<(&str, &dyn BisectionModel)> = vec![("kmeans", &kmeans), ("gnn", &gnn)];
    let table = quality_table(&sets, &methods, 3.0).unwrap();

    assert_eq!(table.rows.len(), 4);
    for row in &table.rows {
        let cell = row.cell.as_ref().expect("populated cell");
        assert!(cell.uf.mean > 0.0 && cell.uf.mean <= 1.0);
        assert!(cell.cr.mean > 0.0 && cell.cr.mean < 1.0);
        assert!(cell.uf.min <= cell.uf.q1 && cell.uf.q1 <= cell.uf.median);
        assert!(cell.uf.median <= cell.uf.q3 && cell.uf.q3 <= cell.uf.max);
    }
    let csv = table.to_csv();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn runtime_bench_covers_methods_and_sizes() {
    let kmeans = KMeansBisector::default();
    let multilevel = MultilevelBisector::default();
    let gnn = GnnBisector::new(GnnModel::new(5));
    let methods: Vec<(&str, &dyn BisectionModel)> = vec![
        ("kmeans", &kmeans),
        ("multilevel", &multilevel),
        ("gnn", &gnn),
    ];
    let sizes = geometric_sizes(25, 100, 4).unwrap();
    let report = runtime_bench(&methods, &sizes, 2, 17).unwrap();
    assert_eq!(report.samples.len(), methods.len() * sizes.len());
    for sample in &report.samples {
        assert_eq!(sample.seconds.len(), 2);
        assert!(sample.seconds.iter().all(|&s| s > 0.0));
    }
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 1 + methods.len() * sizes.len() * 2);
}
