//! Mesh agglomeration by recursive bisection.
//!
//! A submesh whose union has diameter at most the target size becomes one
//! coarse cell; anything larger is bisected (through a pluggable
//! [`BisectionModel`] with deterministic fallbacks), locally adjusted to
//! shorten the coarse interface, and the two sides are agglomerated
//! recursively. Coarse cells are therefore unions of fine cells: connected,
//! area-conserving, and — when levels are built on top of each other — nested
//! across the whole hierarchy.

pub mod boundary;

use crate::bisect::{kmeans_bisect, BisectionModel, KMeansConfig};
use crate::error::{Error, Result};
use crate::geometry::{point_set_diameter, Point};
use crate::graph::{
    check_bisection, component_count, fix_partition, induced_subgraph, is_valid_bisection,
    BisectionCheck, Graph, Partition,
};
use crate::mesh::{FeatureMatrix, PolyMesh};
use crate::write_atomic;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

/// One coarse cell: a connected union of fine cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseCell {
    /// Member fine-cell ids, in increasing order.
    pub fine_cells: Vec<usize>,
    /// Closed boundary loops of the union (outer contours counterclockwise,
    /// hole contours clockwise), as vertex-id cycles.
    pub boundary: Vec<Vec<usize>>,
    /// Diameter of the union (max pairwise vertex distance).
    pub diameter: f64,
    /// Area of the union.
    pub area: f64,
}

/// A fine mesh together with a total, onto assignment of its cells to
/// connected coarse cells.
#[derive(Debug, Clone)]
pub struct AgglomeratedMesh {
    fine: Arc<PolyMesh>,
    assignment: Vec<usize>,
    cells: Vec<CoarseCell>,
    h_target: f64,
}

impl AgglomeratedMesh {
    /// Builds the coarse cells for `assignment` and validates the result:
    /// the assignment must cover every fine cell, use every coarse id in
    /// 0..C, keep each coarse cell connected in the fine connectivity graph,
    /// and conserve area (boundary-loop area vs. summed fine areas, relative
    /// 1e-10).
    pub fn from_assignment(
        mesh: impl Into<Arc<PolyMesh>>,
        assignment: Vec<usize>,
        h_target: f64,
    ) -> Result<AgglomeratedMesh> {
        let fine = mesh.into();
        check_h_target(h_target)?;
        let n = fine.cell_count();
        if assignment.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "assignment covers {} cells, mesh has {n}",
                assignment.len()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidPartition(
                "cannot agglomerate a mesh with no cells".into(),
            ));
        }
        if let Some(&bad) = assignment.iter().find(|&&a| a >= n) {
            return Err(Error::InvalidPartition(format!(
                "coarse id {bad} out of range for {n} fine cells"
            )));
        }
        let num_coarse = assignment.iter().max().copied().expect("n > 0") + 1;

        let mut members: Vec<Vec<usize>> = vec![Vec::new(); num_coarse];
        for (cell, &a) in assignment.iter().enumerate() {
            members[a].push(cell);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(Error::InvalidPartition(format!(
                "coarse id {empty} is unused; ids must cover 0..{num_coarse}"
            )));
        }
        check_coarse_connectivity(&fine.connectivity_graph(), &assignment, num_coarse)?;

        let mut cells = Vec::with_capacity(num_coarse);
        for (id, set) in members.into_iter().enumerate() {
            let loops = boundary::boundary_loops(&fine, &set)?;
            let area = boundary::loops_area(&fine, &loops);
            let fine_sum: f64 = set
                .iter()
                .map(|&c| fine.element_area(c))
                .sum::<Result<f64>>()?;
            if (area - fine_sum).abs() > 1e-10 * fine_sum {
                return Err(Error::InvalidMesh(format!(
                    "coarse cell {id}: boundary area {area} vs fine-area sum {fine_sum}"
                )));
            }
            let diameter = submesh_diameter(&fine, &set)?;
            cells.push(CoarseCell {
                fine_cells: set,
                boundary: loops,
                diameter,
                area,
            });
        }
        Ok(AgglomeratedMesh {
            fine,
            assignment,
            cells,
            h_target,
        })
    }

    /// The trivial agglomeration: every fine cell is its own coarse cell.
    /// The recorded target size is the fine mesh size h₀.
    pub fn identity(mesh: impl Into<Arc<PolyMesh>>) -> Result<AgglomeratedMesh> {
        let fine = mesh.into();
        let h0 = fine.mesh_size()?;
        let assignment = (0..fine.cell_count()).collect();
        AgglomeratedMesh::from_assignment(fine, assignment, h0)
    }

    pub fn fine(&self) -> &Arc<PolyMesh> {
        &self.fine
    }

    /// Coarse-cell id of each fine cell.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cells(&self) -> &[CoarseCell] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Target size the agglomeration was built for.
    pub fn h_target(&self) -> f64 {
        self.h_target
    }

    /// Coarse mesh size: the largest coarse-cell diameter.
    pub fn mesh_size(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.diameter)
            .fold(0.0, f64::max)
    }

    /// Per-coarse-cell features (area and area-weighted barycenter), the
    /// inputs for agglomerating this level again.
    pub fn coarse_features(&self) -> Result<FeatureMatrix> {
        let fine_features = self.fine.extract_features()?;
        let mut areas = vec![0.0; self.cells.len()];
        let mut centers = vec![Point::new(0.0, 0.0); self.cells.len()];
        for (cell, &a) in self.assignment.iter().enumerate() {
            let w = fine_features.area(cell);
            let b = fine_features.barycenter(cell);
            areas[a] += w;
            centers[a] = centers[a] + b * w;
        }
        for (c, &a) in centers.iter_mut().zip(&areas) {
            *c = *c * (1.0 / a);
        }
        FeatureMatrix::from_parts(&areas, &centers)
    }
}

/// Agglomeration levels from fine to coarsest. Level 0 is the identity
/// agglomeration of the fine mesh; every later level is built by
/// agglomerating the previous level's coarse cells, so each of its cells is
/// a union of previous-level cells.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<AgglomeratedMesh>,
}

impl Hierarchy {
    pub fn levels(&self) -> &[AgglomeratedMesh] {
        &self.levels
    }

    /// Target size of each level, fine to coarsest.
    pub fn target_sizes(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.h_target()).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_agglomeration(path, &self.levels)
    }

    /// Loads levels written by [`Hierarchy::save`] and re-validates
    /// nestedness between every adjacent pair.
    pub fn load(path: impl AsRef<Path>, mesh: impl Into<Arc<PolyMesh>>) -> Result<Hierarchy> {
        let levels = load_agglomeration(path, mesh)?;
        if levels.is_empty() {
            return Err(Error::InvalidPartition(
                "hierarchy file contains no levels".into(),
            ));
        }
        for pair in levels.windows(2) {
            check_nested(&pair[0], &pair[1])?;
        }
        Ok(Hierarchy { levels })
    }
}

/// Agglomerates `mesh` into coarse cells of diameter at most `h_target`.
///
/// Submeshes already within the target become single coarse cells; larger
/// ones are bisected via `model` (with [`bisect_with_fallback`]'s repair
/// chain), adjusted to shorten the interface, and recursed on both sides. A
/// single fine cell larger than the target stays a singleton coarse cell.
pub fn agglomerate(
    mesh: impl Into<Arc<PolyMesh>>,
    h_target: f64,
    model: &dyn BisectionModel,
) -> Result<AgglomeratedMesh> {
    let mesh = mesh.into();
    check_h_target(h_target)?;
    let ctx = EntityContext::from_mesh(&mesh)?;
    agglomerate_entities(mesh, &ctx, h_target, model)
}

/// Builds the nested hierarchy for target sizes `factors[k]·h₀` (h₀ being
/// the fine mesh size). Level 0 is always the identity agglomeration; a
/// factor of exactly 1 maps to it. Each later level agglomerates the
/// previous level's coarse cells, so nestedness holds by construction (and
/// is re-checked). Factors must be ≥ 1 and strictly increasing.
pub fn build_hierarchy(
    mesh: impl Into<Arc<PolyMesh>>,
    factors: &[f64],
    model: &dyn BisectionModel,
) -> Result<Hierarchy> {
    let mesh = mesh.into();
    for pair in factors.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidConfig(format!(
                "hierarchy factors must be strictly increasing, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    if let Some(&bad) = factors.iter().find(|&&f| !(f >= 1.0) || !f.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "hierarchy factor {bad} must be a finite value ≥ 1"
        )));
    }
    let h0 = mesh.mesh_size()?;
    let mut levels = vec![AgglomeratedMesh::identity(mesh.clone())?];
    for &factor in factors {
        if factor == 1.0 {
            continue;
        }
        let prev = levels.last().expect("identity level present");
        let ctx = EntityContext::from_level(&mesh, prev)?;
        let next = agglomerate_entities(mesh.clone(), &ctx, factor * h0, model)?;
        check_nested(prev, &next)?;
        levels.push(next);
    }
    Ok(Hierarchy { levels })
}

/// Diameter of the union of `cells`: the maximum pairwise distance over all
/// their vertices.
pub fn submesh_diameter(mesh: &PolyMesh, cells: &[usize]) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::InvalidConfig(
            "submesh diameter of an empty cell set".into(),
        ));
    }
    let mut vertex_ids = Vec::new();
    for &c in cells {
        vertex_ids.extend_from_slice(mesh.cell(c)?);
    }
    vertex_ids.sort_unstable();
    vertex_ids.dedup();
    let points: Vec<Point> = vertex_ids.iter().map(|&v| mesh.vertex(v)).collect();
    Ok(point_set_diameter(&points))
}

/// Bisects a connected graph through `model`, repairing or replacing the
/// result until it is a valid bisection.
///
/// A hardened model output with two nonempty but disconnected classes is
/// repaired by [`fix_partition`]. If the model errors out or leaves a class
/// empty, deterministic fallbacks take over in order: k-means on the
/// barycenters, then a median split along the longest coordinate axis of the
/// barycenters. Valid model output passes through unchanged.
pub fn bisect_with_fallback(
    g: &Graph,
    x: &FeatureMatrix,
    model: &dyn BisectionModel,
) -> Result<Partition> {
    if g.node_count() < 2 {
        return Err(Error::InvalidConfig(format!(
            "bisection requires at least 2 nodes, got {}",
            g.node_count()
        )));
    }
    if x.len() != g.node_count() {
        return Err(Error::ShapeMismatch(format!(
            "{} feature rows for {} nodes",
            x.len(),
            g.node_count()
        )));
    }
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph {
            components: component_count(g),
        });
    }

    match model.bisect(g, x) {
        Ok(y) => {
            if let Some(p) = repair(g, y.harden()) {
                return Ok(p);
            }
            log::warn!(
                "bisection backend '{}' returned an empty class; falling back to k-means",
                model.name()
            );
        }
        Err(e) => {
            log::warn!(
                "bisection backend '{}' failed ({e}); falling back to k-means",
                model.name()
            );
        }
    }

    match kmeans_bisect(&x.barycenters(), &KMeansConfig::with_seed(FALLBACK_SEED)) {
        Ok(p) => {
            if let Some(p) = repair(g, p) {
                return Ok(p);
            }
            log::warn!("k-means fallback left a class empty; falling back to median split");
        }
        Err(e) => {
            log::warn!("k-means fallback failed ({e}); falling back to median split");
        }
    }

    repair(g, median_split(x)).ok_or_else(|| {
        Error::InvalidPartition("median-split fallback produced no valid bisection".into())
    })
}

/// Greedy interface smoothing: flips interface cells whose label change
/// strictly reduces the total geometric interface length while keeping the
/// bisection valid. Runs at most 3 sweeps, each visiting candidates in
/// decreasing order of the improvement estimated at sweep start, and stops
/// early once a sweep flips nothing.
///
/// `edge_lengths` maps each graph edge — keyed `(min, max)` — to the
/// geometric length of the interface the two cells share.
pub fn adjust_partition(
    g: &Graph,
    p: &Partition,
    edge_lengths: &HashMap<(usize, usize), f64>,
) -> Result<Partition> {
    if !is_valid_bisection(g, p) {
        return Err(Error::InvalidPartition(
            "interface adjustment requires a valid bisection".into(),
        ));
    }
    let n = g.node_count();
    let mut labels = p.labels().to_vec();
    let mut current = p.clone();

    let gain = |labels: &[usize], i: usize| -> Result<f64> {
        let mut cross = 0.0;
        let mut same = 0.0;
        for &j in g.neighbors(i) {
            let key = (i.min(j), i.max(j));
            let len = edge_lengths.get(&key).copied().ok_or_else(|| {
                Error::InvalidConfig(format!("no interface length for edge {key:?}"))
            })?;
            if labels[j] == labels[i] {
                same += len;
            } else {
                cross += len;
            }
        }
        Ok(cross - same)
    };

    for _ in 0..ADJUST_SWEEPS {
        let mut candidates = Vec::new();
        for i in 0..n {
            let gn = gain(&labels, i)?;
            if gn > 0.0 {
                candidates.push((gn, i));
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        let mut flipped = false;
        for &(_, i) in &candidates {
            if gain(&labels, i)? <= 0.0 {
                continue;
            }
            let own = labels[i];
            labels[i] = 1 - own;
            let trial = Partition::bisection(labels.clone())?;
            if is_valid_bisection(g, &trial) {
                current = trial;
                flipped = true;
            } else {
                labels[i] = own;
            }
        }
        if !flipped {
            break;
        }
    }
    Ok(current)
}

/// Writes agglomeration levels as JSON: per level its target size and the
/// fine-cell → coarse-cell assignment.
pub fn save_agglomeration(path: impl AsRef<Path>, levels: &[AgglomeratedMesh]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidConfig(
            "refusing to write an agglomeration file with no levels".into(),
        ));
    }
    let file = AgglomerationFile {
        version: FILE_VERSION,
        levels: levels
            .iter()
            .map(|l| LevelRecord {
                h_target: l.h_target(),
                assignment: l.assignment().to_vec(),
            })
            .collect(),
    };
    let bytes = serde_json::to_vec_pretty(&file)
        .map_err(|e| Error::InvalidConfig(format!("encoding agglomeration: {e}")))?;
    write_atomic(path, &bytes)
}

/// Reads levels written by [`save_agglomeration`] back against their fine
/// mesh, re-deriving and re-validating every coarse cell.
pub fn load_agglomeration(
    path: impl AsRef<Path>,
    mesh: impl Into<Arc<PolyMesh>>,
) -> Result<Vec<AgglomeratedMesh>> {
    let path = path.as_ref();
    let mesh = mesh.into();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: AgglomerationFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if file.version != FILE_VERSION {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("unsupported version {}, expected {FILE_VERSION}", file.version),
        });
    }
    file.levels
        .into_iter()
        .map(|l| AgglomeratedMesh::from_assignment(mesh.clone(), l.assignment, l.h_target))
        .collect()
}

const FILE_VERSION: u32 = 1;
/// Sweep cap for [`adjust_partition`].
const ADJUST_SWEEPS: usize = 3;
/// Seed for the deterministic k-means fallback inside [`bisect_with_fallback`].
const FALLBACK_SEED: u64 = 0;

#[derive(Serialize, Deserialize)]
struct AgglomerationFile {
    version: u32,
    levels: Vec<LevelRecord>,
}

#[derive(Serialize, Deserialize)]
struct LevelRecord {
    h_target: f64,
    assignment: Vec<usize>,
}

/// The unit the recursion works on: fine cells at the bottom level, coarse
/// cells of the previous level when building hierarchies. Carries the
/// adjacency graph, bisection features, pairwise shared interface lengths,
/// and each entity's fine-cell set.
struct EntityContext {
    graph: Graph,
    features: FeatureMatrix,
    shared: HashMap<(usize, usize), f64>,
    entity_cells: Vec<Vec<usize>>,
}

impl EntityContext {
    fn from_mesh(mesh: &PolyMesh) -> Result<EntityContext> {
        let n = mesh.cell_count();
        Ok(EntityContext {
            graph: mesh.connectivity_graph(),
            features: mesh.extract_features()?,
            shared: shared_lengths(mesh, None),
            entity_cells: (0..n).map(|c| vec![c]).collect(),
        })
    }

    fn from_level(mesh: &PolyMesh, prev: &AgglomeratedMesh) -> Result<EntityContext> {
        let shared = shared_lengths(mesh, Some(prev.assignment()));
        let edges: Vec<(usize, usize)> = shared.keys().copied().collect();
        Ok(EntityContext {
            graph: Graph::from_edges(prev.cell_count(), &edges)?,
            features: prev.coarse_features()?,
            shared,
            entity_cells: prev.cells().iter().map(|c| c.fine_cells.clone()).collect(),
        })
    }

    fn entity_count(&self) -> usize {
        self.entity_cells.len()
    }

    /// Fine cells of an entity subset, for diameter checks and output.
    fn fine_cells_of(&self, subset: &[usize]) -> Vec<usize> {
        subset
            .iter()
            .flat_map(|&e| self.entity_cells[e].iter().copied())
            .collect()
    }
}

/// Geometric length shared by each adjacent pair. With `groups` set, pairs
/// are group ids (fine pairs within one group drop out); otherwise they are
/// the fine cells themselves.
fn shared_lengths(mesh: &PolyMesh, groups: Option<&[usize]>) -> HashMap<(usize, usize), f64> {
    let mut shared: HashMap<(usize, usize), f64> = HashMap::new();
    for ((va, vb), cells) in mesh.edge_incidence() {
        let len = mesh.vertex(va).dist(mesh.vertex(vb));
        for i in 0..cells.len() {
            for j in (i + 1)..cells.len() {
                let (a, b) = match groups {
                    Some(g) => (g[cells[i]], g[cells[j]]),
                    None => (cells[i], cells[j]),
                };
                if a != b {
                    *shared.entry((a.min(b), a.max(b))).or_insert(0.0) += len;
                }
            }
        }
    }
    shared
}

fn agglomerate_entities(
    mesh: Arc<PolyMesh>,
    ctx: &EntityContext,
    h_target: f64,
    model: &dyn BisectionModel,
) -> Result<AgglomeratedMesh> {
    if !ctx.graph.is_connected() {
        return Err(Error::DisconnectedGraph {
            components: component_count(&ctx.graph),
        });
    }
    let mut assignment = vec![usize::MAX; mesh.cell_count()];
    let mut next_id = 0;
    let all: Vec<usize> = (0..ctx.entity_count()).collect();
    let max_depth = ceil_log2(ctx.entity_count()) + DEPTH_MARGIN;
    recurse(
        &mesh,
        ctx,
        &all,
        h_target,
        model,
        &mut assignment,
        &mut next_id,
        0,
        max_depth,
    )?;
    AgglomeratedMesh::from_assignment(mesh, assignment, h_target)
}

/// Headroom over the balanced-recursion depth ⌈log₂ N⌉ before the depth
/// check trips; generous enough for the imbalance real models produce.
const DEPTH_MARGIN: usize = 10;

#[allow(clippy::too_many_arguments)]
fn recurse(
    mesh: &PolyMesh,
    ctx: &EntityContext,
    subset: &[usize],
    h_target: f64,
    model: &dyn BisectionModel,
    assignment: &mut [usize],
    next_id: &mut usize,
    depth: usize,
    max_depth: usize,
) -> Result<()> {
    debug_assert!(
        depth <= max_depth,
        "recursion depth {depth} exceeds ⌈log₂ N⌉ + {DEPTH_MARGIN}; bisections are degenerate"
    );
    let fine_cells = ctx.fine_cells_of(subset);
    if subset.len() == 1 || submesh_diameter(mesh, &fine_cells)? <= h_target {
        let id = *next_id;
        *next_id += 1;
        for c in fine_cells {
            assignment[c] = id;
        }
        return Ok(());
    }

    let (sub_graph, back) = induced_subgraph(&ctx.graph, subset)?;
    let sub_features = ctx.features.select_rows(&back);
    let raw = bisect_with_fallback(&sub_graph, &sub_features, model)?;
    let lengths = local_lengths(&sub_graph, &back, &ctx.shared)?;
    let adjusted = adjust_partition(&sub_graph, &raw, &lengths)?;

    for class in 0..2 {
        let side: Vec<usize> = adjusted.part(class).iter().map(|&k| back[k]).collect();
        recurse(
            mesh,
            ctx,
            &side,
            h_target,
            model,
            assignment,
            next_id,
            depth + 1,
            max_depth,
        )?;
    }
    Ok(())
}

/// Shared-length map of an induced subgraph, re-keyed to subgraph ids.
fn local_lengths(
    sub_graph: &Graph,
    back: &[usize],
    shared: &HashMap<(usize, usize), f64>,
) -> Result<HashMap<(usize, usize), f64>> {
    let mut local = HashMap::new();
    for (i, j) in sub_graph.edges() {
        let (a, b) = (back[i], back[j]);
        let len = shared
            .get(&(a.min(b), a.max(b)))
            .copied()
            .ok_or_else(|| {
                Error::InvalidMesh(format!(
                    "adjacent entities {a} and {b} share no geometric edge"
                ))
            })?;
        local.insert((i.min(j), i.max(j)), len);
    }
    Ok(local)
}

/// Ok(Some) = valid bisection (fixed if repairable); Ok(None) = a class is
/// empty or repair failed, so the caller should try the next fallback.
fn repair(g: &Graph, p: Partition) -> Option<Partition> {
    match check_bisection(g, &p) {
        BisectionCheck::Valid => Some(p),
        BisectionCheck::EmptyClass { .. } => None,
        BisectionCheck::DisconnectedClass { .. } => match fix_partition(g, &p) {
            Ok(fixed) => Some(fixed),
            Err(e) => {
                log::warn!("partition fixing failed ({e})");
                None
            }
        },
    }
}

/// Splits at the median of the longest coordinate axis of the barycenters:
/// the lower half (ties by id) becomes class 0. Always yields two nonempty
/// classes for n ≥ 2.
fn median_split(x: &FeatureMatrix) -> Partition {
    let points = x.barycenters();
    let n = points.len();
    let (min_x, max_x) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.x), hi.max(p.x))
        });
    let (min_y, max_y) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.y), hi.max(p.y))
        });
    let along_x = (max_x - min_x) >= (max_y - min_y);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = if along_x {
            (points[a].x, points[b].x)
        } else {
            (points[a].y, points[b].y)
        };
        ka.total_cmp(&kb).then(a.cmp(&b))
    });
    let mut labels = vec![0; n];
    for &i in &order[n.div_ceil(2)..] {
        labels[i] = 1;
    }
    Partition::bisection(labels).expect("labels are 0/1")
}

/// One BFS over the fine graph, checking that every coarse cell induces
/// exactly one connected region.
fn check_coarse_connectivity(
    fine_graph: &Graph,
    assignment: &[usize],
    num_coarse: usize,
) -> Result<()> {
    let n = fine_graph.node_count();
    let mut seen = vec![false; n];
    let mut regions = vec![0usize; num_coarse];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let label = assignment[start];
        regions[label] += 1;
        if regions[label] > 1 {
            return Err(Error::InvalidPartition(format!(
                "coarse cell {label} is disconnected in the fine graph"
            )));
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in fine_graph.neighbors(v) {
                if !seen[w] && assignment[w] == label {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    Ok(())
}

/// Every coarse cell of `next` must be a union of `prev`'s coarse cells,
/// i.e. each `prev` cell maps into exactly one `next` cell.
fn check_nested(prev: &AgglomeratedMesh, next: &AgglomeratedMesh) -> Result<()> {
    for (id, cell) in prev.cells().iter().enumerate() {
        let target = next.assignment()[cell.fine_cells[0]];
        if cell
            .fine_cells
            .iter()
            .any(|&c| next.assignment()[c] != target)
        {
            return Err(Error::InvalidPartition(format!(
                "levels are not nested: cell {id} is split across coarser cells"
            )));
        }
    }
    Ok(())
}

fn check_h_target(h_target: f64) -> Result<()> {
    if !h_target.is_finite() || h_target <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "target size must be positive and finite, got {h_target}"
        )));
    }
    Ok(())
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}
