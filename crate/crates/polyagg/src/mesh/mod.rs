//! Polygonal mesh data model: element geometry (area, barycenter, diameter),
//! extraction of the element-connectivity graph and of per-element feature
//! rows, plus synthetic generators and file I/O in the submodules.

mod generate;
mod io;

pub use generate::{generate_mesh, MeshKind};
pub use io::{load_mesh, save_mesh};

use crate::error::{Error, Result};
use crate::geometry::{
    point_set_diameter, polygon_centroid, polygon_signed_area, Point,
};
use crate::graph::Graph;
use ndarray::Array2;

/// A 2D mesh of simple polygons: shared vertices plus one counter-clockwise
/// vertex-index loop per cell. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    bbox: (Point, Point),
}

impl PolyMesh {
    /// Validates and builds a mesh. Every cell must have at least 3 vertices,
    /// all indices in range, no repeated index within a loop, and positive
    /// (counter-clockwise) signed area.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<PolyMesh> {
        for (v, p) in vertices.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidMesh(format!("vertex {v} is not finite")));
            }
        }
        let mut seen = vec![usize::MAX; vertices.len()];
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} has {} vertices, need at least 3",
                    cell.len()
                )));
            }
            for &idx in cell {
                if idx >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "cell {c} references vertex {idx}, but only {} exist",
                        vertices.len()
                    )));
                }
                if seen[idx] == c {
                    return Err(Error::InvalidMesh(format!(
                        "cell {c} repeats vertex {idx}"
                    )));
                }
                seen[idx] = c;
            }
            let pts: Vec<Point> = cell.iter().map(|&i| vertices[i]).collect();
            let area = polygon_signed_area(&pts);
            if area <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} is not counter-clockwise (signed area {area})"
                )));
            }
        }
        let bbox = bounding_box(&vertices);
        Ok(PolyMesh {
            vertices,
            cells,
            bbox,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> Result<&[usize]> {
        self.cells
            .get(i)
            .map(|c| c.as_slice())
            .ok_or(Error::IndexOutOfRange {
                what: "cell",
                index: i,
                len: self.cells.len(),
            })
    }

    /// Axis-aligned bounding box as (min corner, max corner).
    pub fn bbox(&self) -> (Point, Point) {
        self.bbox
    }

    /// The cell's vertex coordinates in loop order.
    pub fn cell_points(&self, i: usize) -> Result<Vec<Point>> {
        Ok(self.cell(i)?.iter().map(|&v| self.vertices[v]).collect())
    }

    /// Shoelace area of cell `i` (positive by the CCW invariant).
    pub fn element_area(&self, i: usize) -> Result<f64> {
        Ok(polygon_signed_area(&self.cell_points(i)?))
    }

    /// Area-weighted centroid of cell `i`.
    pub fn element_barycenter(&self, i: usize) -> Result<Point> {
        let pts = self.cell_points(i)?;
        polygon_centroid(&pts).ok_or_else(|| {
            Error::DegenerateGeometry(format!("cell {i} is too flat for a barycenter"))
        })
    }

    /// Maximum pairwise vertex distance of cell `i`; for polygons this equals
    /// the supremum-based diameter of the region.
    pub fn element_diameter(&self, i: usize) -> Result<f64> {
        Ok(point_set_diameter(&self.cell_points(i)?))
    }

    /// Mesh size h: the largest element diameter.
    pub fn mesh_size(&self) -> Result<f64> {
        if self.cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        let mut h = 0.0f64;
        for i in 0..self.cells.len() {
            h = h.max(self.element_diameter(i)?);
        }
        Ok(h)
    }

    /// Element-connectivity graph: node i per cell i, an edge wherever two
    /// cells share at least one geometric edge. Edges are detected by exact
    /// matching of unordered vertex-index pairs, so meshes with hanging nodes
    /// (an edge split on one side only) are not supported.
    pub fn connectivity_graph(&self) -> Graph {
        let pair_cells = self.edge_incidence();
        let mut edges = Vec::new();
        for (_, cells) in pair_cells {
            for a in 0..cells.len() {
                for b in (a + 1)..cells.len() {
                    edges.push((cells[a], cells[b]));
                }
            }
        }
        Graph::from_edges(self.cell_count(), &edges)
            .expect("cell indices are in range by construction")
    }

    /// For every geometric edge (unordered vertex-index pair), the cells
    /// incident to it, sorted by the pair.
    pub(crate) fn edge_incidence(&self) -> Vec<((usize, usize), Vec<usize>)> {
        let mut map: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
            std::collections::BTreeMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            let k = cell.len();
            for e in 0..k {
                let a = cell[e];
                let b = cell[(e + 1) % k];
                let key = (a.min(b), a.max(b));
                map.entry(key).or_default().push(c);
            }
        }
        map.into_iter().collect()
    }

    /// N×3 feature matrix [area | barycenter_x | barycenter_y], un-normalized.
    pub fn extract_features(&self) -> Result<FeatureMatrix> {
        let n = self.cell_count();
        let mut data = Array2::zeros((n, 3));
        for i in 0..n {
            let a = self.element_area(i)?;
            let b = self.element_barycenter(i)?;
            data[[i, 0]] = a;
            data[[i, 1]] = b.x;
            data[[i, 2]] = b.y;
        }
        FeatureMatrix::new(data)
    }
}

fn bounding_box(vertices: &[Point]) -> (Point, Point) {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in vertices {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    (min, max)
}

/// Per-element feature rows: [area, barycenter_x, barycenter_y].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Array2<f64>,
}

impl FeatureMatrix {
    pub const AREA: usize = 0;
    pub const BARY_X: usize = 1;
    pub const BARY_Y: usize = 2;
    pub const WIDTH: usize = 3;

    /// Validates shape (N×3) and strictly positive areas.
    pub fn new(data: Array2<f64>) -> Result<FeatureMatrix> {
        if data.ncols() != Self::WIDTH {
            return Err(Error::ShapeMismatch(format!(
                "feature matrix must have {} columns, got {}",
                Self::WIDTH,
                data.ncols()
            )));
        }
        for (i, row) in data.rows().into_iter().enumerate() {
            if row[Self::AREA] <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "feature row {i} has non-positive area {}",
                    row[Self::AREA]
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("feature row {i}"),
                });
            }
        }
        Ok(FeatureMatrix { data })
    }

    /// Builds the matrix from per-element areas and barycenters.
    pub fn from_parts(areas: &[f64], barycenters: &[Point]) -> Result<FeatureMatrix> {
        if areas.len() != barycenters.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} areas vs {} barycenters",
                areas.len(),
                barycenters.len()
            )));
        }
        let mut data = Array2::zeros((areas.len(), Self::WIDTH));
        for i in 0..areas.len() {
            data[[i, Self::AREA]] = areas[i];
            data[[i, Self::BARY_X]] = barycenters[i].x;
            data[[i, Self::BARY_Y]] = barycenters[i].y;
        }
        FeatureMatrix::new(data)
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn area(&self, i: usize) -> f64 {
        self.data[[i, Self::AREA]]
    }

    pub fn barycenter(&self, i: usize) -> Point {
        Point::new(self.data[[i, Self::BARY_X]], self.data[[i, Self::BARY_Y]])
    }

    pub fn barycenters(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.barycenter(i)).collect()
    }

    /// Sub-matrix with the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut data = Array2::zeros((rows.len(), Self::WIDTH));
        for (new, &old) in rows.iter().enumerate() {
            for c in 0..Self::WIDTH {
                data[[new, c]] = self.data[[old, c]];
            }
        }
        FeatureMatrix { data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_unit_square() -> PolyMesh {
        PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap()
    }

    /// Two unit squares sharing one edge, side by side.
    fn two_square_strip() -> PolyMesh {
        PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(1.0, 1.0),
                Point::new(2.0, 1.0),
            ],
            vec![vec![0, 1, 4, 3], vec![1, 2, 5, 4]],
        )
        .unwrap()
    }

    #[test]
    fn area_of_unit_square_cell() {
        assert_eq!(single_unit_square().element_area(0).unwrap(), 1.0);
    }

    #[test]
    fn area_of_right_triangle_cell() {
        let m = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert_eq!(m.element_area(0).unwrap(), 0.5);
    }

    #[test]
    fn area_of_regular_hexagon_cell() {
        let verts: Vec<Point> = (0..6)
            .map(|k| {
                let th = std::f64::consts::PI / 3.0 * k as f64;
                Point::new(th.cos(), th.sin())
            })
            .collect();
        let m = PolyMesh::new(verts, vec![vec![0, 1, 2, 3, 4, 5]]).unwrap();
        assert_relative_eq!(
            m.element_area(0).unwrap(),
            1.5 * 3.0f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn barycenter_examples() {
        let c = single_unit_square().element_barycenter(0).unwrap();
        assert_eq!((c.x, c.y), (0.5, 0.5));

        let tri = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let c = tri.element_barycenter(0).unwrap();
        assert_relative_eq!(c.x, 1.0 / 3.0, max_relative = 1e-15);

        let l = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(2.0, 1.0),
                Point::new(1.0, 1.0),
                Point::new(1.0, 2.0),
                Point::new(0.0, 2.0),
            ],
            vec![vec![0, 1, 2, 3, 4, 5]],
        )
        .unwrap();
        let c = l.element_barycenter(0).unwrap();
        assert_relative_eq!(c.x, 5.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(c.y, 5.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn diameter_examples() {
        assert_relative_eq!(
            single_unit_square().element_diameter(0).unwrap(),
            2.0f64.sqrt()
        );
        let thin = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 0.01),
                Point::new(0.0, 0.01),
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        assert_relative_eq!(thin.element_diameter(0).unwrap(), 1.0001f64.sqrt());
    }

    #[test]
    fn mesh_size_is_max_diameter() {
        // Unit square next to a 2×2 square.
        let m = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
                Point::new(3.0, 0.0),
                Point::new(3.0, 2.0),
                Point::new(1.0, 2.0),
            ],
            vec![vec![0, 1, 2, 3], vec![1, 4, 5, 6]],
        )
        .unwrap();
        assert_relative_eq!(m.mesh_size().unwrap(), 8.0f64.sqrt());
    }

    #[test]
    fn mesh_size_single_triangle() {
        let m = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(3.0, 0.0),
                Point::new(0.0, 4.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert_eq!(m.mesh_size().unwrap(), 5.0);
    }

    #[test]
    fn connectivity_of_edge_sharing_squares() {
        let g = two_square_strip().connectivity_graph();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn corner_contact_is_not_adjacency() {
        // Two squares touching only at one vertex.
        let m = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
                Point::new(2.0, 1.0),
                Point::new(2.0, 2.0),
                Point::new(1.0, 2.0),
            ],
            vec![vec![0, 1, 2, 3], vec![2, 4, 5, 6]],
        )
        .unwrap();
        assert_eq!(m.connectivity_graph().edge_count(), 0);
    }

    #[test]
    fn features_of_unit_square() {
        let f = single_unit_square().extract_features().unwrap();
        assert_eq!(f.as_array().row(0).to_vec(), vec![1.0, 0.5, 0.5]);
    }

    #[test]
    fn features_of_strip() {
        let f = two_square_strip().extract_features().unwrap();
        assert_eq!(f.as_array().row(0).to_vec(), vec![1.0, 0.5, 0.5]);
        assert_eq!(f.as_array().row(1).to_vec(), vec![1.0, 1.5, 0.5]);
    }

    #[test]
    fn rejects_clockwise_cell() {
        let r = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            vec![vec![3, 2, 1, 0]],
        );
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_out_of_range_index() {
        let r = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 7]],
        );
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_repeated_vertex_in_loop() {
        let r = PolyMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2, 1]],
        );
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_degenerate_two_vertex_cell() {
        let r = PolyMesh::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![vec![0, 1]],
        );
        assert!(r.is_err());
    }

    #[test]
    fn feature_matrix_rejects_non_positive_area() {
        let data = ndarray::array![[0.0, 0.5, 0.5]];
        assert!(FeatureMatrix::new(data).is_err());
    }

    #[test]
    fn select_rows_reorders() {
        let f = two_square_strip().extract_features().unwrap();
        let sel = f.select_rows(&[1, 0]);
        assert_eq!(sel.barycenter(0).x, 1.5);
        assert_eq!(sel.barycenter(1).x, 0.5);
    }
}
