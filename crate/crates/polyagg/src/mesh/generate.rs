//! Synthetic mesh generators over the unit square (0,1)²: regular square
//! grids, regular triangle grids, triangle grids with perturbed interior
//! vertices, and clipped Voronoi diagrams of random seeds.

use crate::error::{Error, Result};
use crate::geometry::{clip_halfplane, Point};
use crate::mesh::PolyMesh;
use crate::rng::{stream, stream_indexed};
use rand::Rng;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// The four generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshKind {
    Squares,
    Triangles,
    RandomTriangles,
    Voronoi,
}

impl MeshKind {
    pub const ALL: [MeshKind; 4] = [
        MeshKind::Squares,
        MeshKind::Triangles,
        MeshKind::RandomTriangles,
        MeshKind::Voronoi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeshKind::Squares => "squares",
            MeshKind::Triangles => "triangles",
            MeshKind::RandomTriangles => "random-triangles",
            MeshKind::Voronoi => "voronoi",
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<MeshKind> {
        match s {
            "squares" => Ok(MeshKind::Squares),
            "triangles" => Ok(MeshKind::Triangles),
            "random-triangles" | "random_triangles" => Ok(MeshKind::RandomTriangles),
            "voronoi" => Ok(MeshKind::Voronoi),
            other => Err(Error::InvalidConfig(format!(
                "unknown mesh kind {other:?}; expected squares, triangles, random-triangles, or voronoi"
            ))),
        }
    }
}

/// Generates a mesh of the unit square. For the grid kinds `n` is the number
/// of cells per side (n ≥ 2); for `voronoi` it is the number of seeds (n ≥ 4)
/// and equals the number of cells. Deterministic in (kind, n, seed).
pub fn generate_mesh(kind: MeshKind, n: usize, seed: u64) -> Result<PolyMesh> {
    match kind {
        MeshKind::Squares => {
            check_resolution(kind, n, 2)?;
            square_grid(n)
        }
        MeshKind::Triangles => {
            check_resolution(kind, n, 2)?;
            triangle_grid(n, None)
        }
        MeshKind::RandomTriangles => {
            check_resolution(kind, n, 2)?;
            triangle_grid(n, Some(seed))
        }
        MeshKind::Voronoi => {
            check_resolution(kind, n, 4)?;
            voronoi_mesh(n, seed)
        }
    }
}

fn check_resolution(kind: MeshKind, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidConfig(format!(
            "{kind} generator needs n >= {min}, got {n}"
        )));
    }
    Ok(())
}

/// Grid vertices (n+1)×(n+1) over the unit square, row-major.
fn grid_vertices(n: usize) -> Vec<Point> {
    let h = 1.0 / n as f64;
    let mut verts = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            verts.push(Point::new(i as f64 * h, j as f64 * h));
        }
    }
    verts
}

fn square_grid(n: usize) -> Result<PolyMesh> {
    let verts = grid_vertices(n);
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    PolyMesh::new(verts, cells)
}

/// Regular triangle grid: each grid square is split along its up-diagonal.
/// With `perturb_seed` set, interior vertices are jittered by uniform noise
/// of magnitude below 0.25·(1/n) per coordinate; the bound keeps every
/// triangle positively oriented, so no cell can invert.
fn triangle_grid(n: usize, perturb_seed: Option<u64>) -> Result<PolyMesh> {
    let mut verts = grid_vertices(n);
    if let Some(seed) = perturb_seed {
        let mut rng = stream(seed, "random-triangles");
        let bound = 0.25 / n as f64;
        for j in 1..n {
            for i in 1..n {
                let v = &mut verts[j * (n + 1) + i];
                v.x += rng.random_range(-bound..bound);
                v.y += rng.random_range(-bound..bound);
            }
        }
    }
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            cells.push(vec![v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    PolyMesh::new(verts, cells)
}

const VORONOI_RETRIES: u64 = 32;
const SNAP_TOL: f64 = 1e-9;

fn voronoi_mesh(n: usize, seed: u64) -> Result<PolyMesh> {
    let mut last_err = String::new();
    for attempt in 0..VORONOI_RETRIES {
        let mut rng = stream_indexed(seed, "voronoi", attempt);
        let seeds: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
            .collect();
        match voronoi_attempt(&seeds) {
            Ok(mesh) => return Ok(mesh),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::GenerationFailed(format!(
        "voronoi generator exhausted {VORONOI_RETRIES} attempts (last error: {last_err})"
    )))
}

fn voronoi_attempt(seeds: &[Point]) -> Result<PolyMesh> {
    let n = seeds.len();
    let mut polygons = Vec::with_capacity(n);
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for (s_idx, &s) in seeds.iter().enumerate() {
        order.clear();
        order.extend((0..n).filter(|&t| t != s_idx));
        order.sort_unstable_by(|&a, &b| {
            seeds[a]
                .dist2(s)
                .total_cmp(&seeds[b].dist2(s))
                .then(a.cmp(&b))
        });
        let mut poly = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        for &t_idx in order.iter() {
            let t = seeds[t_idx];
            if t.dist2(s) < 1e-24 {
                return Err(Error::GenerationFailed(format!(
                    "coincident seeds {s_idx} and {t_idx}"
                )));
            }
            // A seed farther than twice the current cell radius cannot cut
            // the cell; seeds are distance-sorted, so stop at the first one.
            let radius2 = poly.iter().map(|v| v.dist2(s)).fold(0.0, f64::max);
            if t.dist2(s) > 4.0 * radius2 {
                break;
            }
            // Keep the side closer to s: 2·p·(t−s) − (|t|²−|s|²) ≤ 0.
            let d = t - s;
            let c = t.dot(t) - s.dot(s);
            poly = clip_halfplane(&poly, |p| 2.0 * p.dot(d) - c);
            if poly.len() < 3 {
                return Err(Error::GenerationFailed(format!(
                    "cell of seed {s_idx} collapsed during clipping"
                )));
            }
        }
        polygons.push(poly);
    }

    // Weld near-identical vertices across cells so shared edges become shared
    // vertex-index pairs. Genuine duplicates differ only by accumulated
    // floating-point error (≪ the tolerance); if distinct vertices ever fall
    // within tolerance of each other the resulting degenerate loop fails mesh
    // validation and the caller retries with fresh seeds.
    let mut verts: Vec<Point> = Vec::new();
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Point| ((p.x / SNAP_TOL).floor() as i64, (p.y / SNAP_TOL).floor() as i64);
    let mut canon = |p: Point, verts: &mut Vec<Point>| -> usize {
        let (kx, ky) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = buckets.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        if verts[id].dist(p) <= SNAP_TOL {
                            return id;
                        }
                    }
                }
            }
        }
        verts.push(p);
        buckets.entry((kx, ky)).or_default().push(verts.len() - 1);
        verts.len() - 1
    };

    let mut cells = Vec::with_capacity(n);
    for poly in &polygons {
        let mut loop_ids: Vec<usize> = poly.iter().map(|&p| canon(p, &mut verts)).collect();
        loop_ids.dedup();
        while loop_ids.len() > 1 && loop_ids.first() == loop_ids.last() {
            loop_ids.pop();
        }
        if loop_ids.len() < 3 {
            return Err(Error::GenerationFailed(
                "cell degenerated to fewer than 3 distinct vertices".into(),
            ));
        }
        cells.push(loop_ids);
    }

    let mesh = PolyMesh::new(verts, cells)?;
    if !mesh.connectivity_graph().is_connected() {
        return Err(Error::GenerationFailed(
            "snapped mesh is not edge-connected".into(),
        ));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn squares_4_gives_16_uniform_cells() {
        let m = generate_mesh(MeshKind::Squares, 4, 0).unwrap();
        assert_eq!(m.cell_count(), 16);
        for i in 0..16 {
            assert_relative_eq!(m.element_area(i).unwrap(), 1.0 / 16.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn triangles_4_gives_32_uniform_cells() {
        let m = generate_mesh(MeshKind::Triangles, 4, 0).unwrap();
        assert_eq!(m.cell_count(), 32);
        for i in 0..32 {
            assert_relative_eq!(m.element_area(i).unwrap(), 1.0 / 32.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn voronoi_cell_count_matches_seed_count() {
        let m = generate_mesh(MeshKind::Voronoi, 50, 3).unwrap();
        assert_eq!(m.cell_count(), 50);
        let total: f64 = (0..50).map(|i| m.element_area(i).unwrap()).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn perturbed_triangles_keep_boundary_fixed() {
        let m = generate_mesh(MeshKind::RandomTriangles, 8, 11).unwrap();
        let (min, max) = m.bbox();
        assert_eq!((min.x, min.y), (0.0, 0.0));
        assert_eq!((max.x, max.y), (1.0, 1.0));
        // Interior vertices should actually move.
        let reg = generate_mesh(MeshKind::Triangles, 8, 11).unwrap();
        assert_ne!(m.vertices(), reg.vertices());
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in MeshKind::ALL {
            let a = generate_mesh(kind, 6, 42).unwrap();
            let b = generate_mesh(kind, 6, 42).unwrap();
            assert_eq!(a, b, "{kind} not reproducible");
        }
    }

    #[test]
    fn resolution_preconditions() {
        assert!(generate_mesh(MeshKind::Squares, 1, 0).is_err());
        assert!(generate_mesh(MeshKind::Voronoi, 3, 0).is_err());
        assert!(generate_mesh(MeshKind::Voronoi, 4, 0).is_ok());
    }

    #[test]
    fn kind_round_trips_through_strings() {
        for kind in MeshKind::ALL {
            assert_eq!(kind.name().parse::<MeshKind>().unwrap(), kind);
        }
        assert!("hexes".parse::<MeshKind>().is_err());
    }
}
