//! Boundary extraction for unions of mesh cells.
//!
//! A coarse cell is a union of fine cells; its boundary is recovered from
//! the fine cells' directed edges. Every member cell contributes its edges
//! counterclockwise, so an edge interior to the union appears once in each
//! direction and cancels, while boundary edges survive unpaired. The
//! survivors chain into closed loops with the union's interior on the left:
//! outer contours counterclockwise, hole contours clockwise.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::PolyMesh;
use std::collections::{HashMap, HashSet};

/// Closed boundary loops of the union of `cells`, as vertex-id cycles
/// (the closing edge back to the first vertex is implicit). Loops are
/// rotated to start at their smallest vertex id and sorted, so equal unions
/// produce identical output.
pub fn boundary_loops(mesh: &PolyMesh, cells: &[usize]) -> Result<Vec<Vec<usize>>> {
    let mut directed = HashSet::new();
    for &c in cells {
        let vs = mesh.cell(c)?;
        for k in 0..vs.len() {
            let a = vs[k];
            let b = vs[(k + 1) % vs.len()];
            if !directed.insert((a, b)) {
                return Err(Error::InvalidMesh(format!(
                    "directed edge ({a}, {b}) appears twice; cells overlap"
                )));
            }
        }
    }

    let mut boundary: Vec<(usize, usize)> = directed
        .iter()
        .filter(|&&(a, b)| !directed.contains(&(b, a)))
        .copied()
        .collect();
    boundary.sort_unstable();

    let mut outgoing: HashMap<usize, Vec<usize>> = HashMap::new();
    for (idx, &(a, _)) in boundary.iter().enumerate() {
        outgoing.entry(a).or_default().push(idx);
    }

    let mut used = vec![false; boundary.len()];
    let mut loops = Vec::new();
    for start in 0..boundary.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = boundary[start];
        let mut cycle = vec![first.0];
        let mut prev = first;
        while prev.1 != first.0 {
            cycle.push(prev.1);
            let next_idx = pick_next(mesh, &boundary, &outgoing, &used, prev)?;
            used[next_idx] = true;
            prev = boundary[next_idx];
        }
        let min_pos = cycle
            .iter()
            .enumerate()
            .min_by_key(|&(_, &v)| v)
            .map(|(i, _)| i)
            .expect("nonempty cycle");
        cycle.rotate_left(min_pos);
        loops.push(cycle);
    }
    loops.sort();
    Ok(loops)
}

/// Chooses the unused boundary edge leaving `prev`'s head that turns most
/// counterclockwise relative to `prev`'s direction. At ordinary vertices
/// there is exactly one choice; at pinch vertices the sharpest left turn
/// keeps each contour simple instead of producing figure-eight cycles.
fn pick_next(
    mesh: &PolyMesh,
    boundary: &[(usize, usize)],
    outgoing: &HashMap<usize, Vec<usize>>,
    used: &[bool],
    prev: (usize, usize),
) -> Result<usize> {
    let candidates = outgoing.get(&prev.1).map(Vec::as_slice).unwrap_or(&[]);
    let dir = mesh.vertex(prev.1) - mesh.vertex(prev.0);
    let mut best: Option<(f64, usize)> = None;
    for &idx in candidates {
        if used[idx] {
            continue;
        }
        let (b, c) = boundary[idx];
        let out = mesh.vertex(c) - mesh.vertex(b);
        let turn = dir.cross(out).atan2(dir.dot(out));
        let better = match best {
            None => true,
            Some((bt, bi)) => {
                turn > bt || (turn == bt && boundary[idx].1 < boundary[bi].1)
            }
        };
        if better {
            best = Some((turn, idx));
        }
    }
    best.map(|(_, idx)| idx).ok_or_else(|| {
        Error::InvalidMesh(format!(
            "boundary does not chain: no continuation at vertex {}",
            prev.1
        ))
    })
}

/// Vertex-id loops materialized as point polygons.
pub fn loops_as_points(mesh: &PolyMesh, loops: &[Vec<usize>]) -> Vec<Vec<Point>> {
    loops
        .iter()
        .map(|l| l.iter().map(|&v| mesh.vertex(v)).collect())
        .collect()
}

/// Total edge length over all loops: the perimeter of the union (hole
/// contours included, as they bound the region too).
pub fn loops_perimeter(mesh: &PolyMesh, loops: &[Vec<usize>]) -> f64 {
    loops
        .iter()
        .map(|l| {
            (0..l.len())
                .map(|k| mesh.vertex(l[k]).dist(mesh.vertex(l[(k + 1) % l.len()])))
                .sum::<f64>()
        })
        .sum()
}

/// Signed area enclosed by the loops; hole contours run clockwise and
/// subtract, so the sum is the area of the union region.
pub fn loops_area(mesh: &PolyMesh, loops: &[Vec<usize>]) -> f64 {
    loops
        .iter()
        .map(|l| {
            let mut acc = 0.0;
            for k in 0..l.len() {
                let p = mesh.vertex(l[k]);
                let q = mesh.vertex(l[(k + 1) % l.len()]);
                acc += p.cross(q);
            }
            acc / 2.0
        })
        .sum()
}
