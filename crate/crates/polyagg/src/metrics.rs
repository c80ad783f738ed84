//! Mesh quality metrics and the runtime benchmark harness.
//!
//! Quality is measured per element by the uniformity factor (diameter over
//! mesh size) and the circle ratio (inscribed radius over half the
//! diameter), summarized per mesh and method into comparison tables, and by
//! wall-clock timings of single bisection calls across mesh sizes.

use crate::agglomerate::boundary::loops_as_points;
use crate::agglomerate::{agglomerate, AgglomeratedMesh};
use crate::bisect::BisectionModel;
use crate::error::{Error, Result};
use crate::geometry::{distance_to_loops, point_in_loops, Point};
use crate::mesh::{generate_mesh, MeshKind, PolyMesh};
use crate::rng::stream_indexed;
use rand::Rng;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

/// Five-number summary plus the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    /// Summarizes a nonempty sample; quartiles interpolate linearly between
    /// order statistics.
    pub fn of(values: &[f64]) -> Result<Summary> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("summary of an empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "summary input".into(),
            });
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Summary {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Quantile of a sorted sample at fraction `q`, linearly interpolated
/// between the two nearest order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Uniformity factor of every coarse cell: its diameter over the coarse
/// mesh size, so values lie in (0, 1] and the largest cell scores exactly 1.
pub fn uniformity_factors(agg: &AgglomeratedMesh) -> Vec<f64> {
    let h = agg.mesh_size();
    agg.cells().iter().map(|c| c.diameter / h).collect()
}

/// Uniformity factor of every fine element of a plain mesh.
pub fn mesh_uniformity_factors(mesh: &PolyMesh) -> Result<Vec<f64>> {
    let h = mesh.mesh_size()?;
    (0..mesh.cell_count())
        .map(|i| Ok(mesh.element_diameter(i)? / h))
        .collect()
}

/// Initial sampling resolution per bounding-box axis.
const GRID_RES: usize = 64;
/// Resolution ceiling while hunting for a first interior point.
const MAX_GRID_RES: usize = 512;
/// Local refinement rounds after the global scan.
const REFINE_ROUNDS: usize = 3;
/// Lattice points per axis in each refinement window. The window spans ±2
/// grid steps, so every round shrinks the step by 8× and three rounds bring
/// the position error to ~1/512 of the initial spacing — comfortably inside
/// the 1e-3 relative target for the radius.
const REFINE_POINTS: usize = 33;

/// Radius want of the largest circle inscribed in the region bounded by
/// `loops` (outer contours counterclockwise, holes clockwise): maximizes the
/// distance to the boundary over interior points of a bounding-box lattice,
/// then refines around the best point with shrinking local windows.
///
/// The lattice starts at 64×64 and doubles (up to 512×512) until an interior
/// point is found; a region with no interior at that resolution is an error.
pub fn inscribed_radius(loops: &[Vec<Point>]) -> Result<f64> {
    if loops.is_empty() || loops.iter().any(|l| l.len() < 3) {
        return Err(Error::DegenerateGeometry(
            "inscribed radius needs closed loops of at least 3 vertices".into(),
        ));
    }
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in loops.iter().flatten() {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    if !(hi.x > lo.x && hi.y > lo.y) {
        return Err(Error::DegenerateGeometry(
            "boundary loops span an empty bounding box".into(),
        ));
    }

    let mut res = GRID_RES;
    let (mut best_p, mut best_d) = loop {
        if let Some(found) = grid_scan(loops, lo, hi, res) {
            break found;
        }
        res *= 2;
        if res > MAX_GRID_RES {
            return Err(Error::DegenerateGeometry(format!(
                "no interior point found up to a {MAX_GRID_RES}×{MAX_GRID_RES} scan"
            )));
        }
    };

    let mut step = ((hi.x - lo.x) / res as f64).max((hi.y - lo.y) / res as f64);
    for _ in 0..REFINE_ROUNDS {
        let window = 2.0 * step;
        let local = window * 2.0 / (REFINE_POINTS - 1) as f64;
        let corner = Point::new(best_p.x - window, best_p.y - window);
        for i in 0..REFINE_POINTS {
            for j in 0..REFINE_POINTS {
                let p = Point::new(corner.x + local * i as f64, corner.y + local * j as f64);
                if point_in_loops(p, loops) {
                    let d = distance_to_loops(p, loops);
                    if d > best_d {
                        best_d = d;
                        best_p = p;
                    }
                }
            }
        }
        step /= 8.0;
    }
    Ok(best_d)
}

/// Best interior lattice point of an `res`×`res` scan over the bounding
/// box, or None when no lattice point lies strictly inside.
fn grid_scan(loops: &[Vec<Point>], lo: Point, hi: Point, res: usize) -> Option<(Point, f64)> {
    let dx = (hi.x - lo.x) / res as f64;
    let dy = (hi.y - lo.y) / res as f64;
    let mut best: Option<(Point, f64)> = None;
    for i in 0..res {
        for j in 0..res {
            let p = Point::new(
                lo.x + (i as f64 + 0.5) * dx,
                lo.y + (j as f64 + 0.5) * dy,
            );
            if !point_in_loops(p, loops) {
                continue;
            }
            let d = distance_to_loops(p, loops);
            if d > 0.0 && best.is_none_or(|(_, bd)| d > bd) {
                best = Some((p, d));
            }
        }
    }
    best
}

/// Circle ratio of a region: inscribed radius over half the diameter. The
/// half-diameter stands in for the circumscribed radius, so a square scores
/// 1/√2 ≈ 0.7071 and values stay in (0, 1].
pub fn circle_ratio(loops: &[Vec<Point>], diameter: f64) -> Result<f64> {
    if !(diameter > 0.0) || !diameter.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "circle ratio needs a positive diameter, got {diameter}"
        )));
    }
    Ok(inscribed_radius(loops)? / (diameter / 2.0))
}

/// Circle ratio of every coarse cell of an agglomerated mesh.
pub fn circle_ratios(agg: &AgglomeratedMesh) -> Result<Vec<f64>> {
    agg.cells()
        .iter()
        .map(|c| circle_ratio(&loops_as_points(agg.fine(), &c.boundary), c.diameter))
        .collect()
}

/// Pooled quality statistics of one (mesh kind, method) combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityCell {
    pub uf: Summary,
    pub cr: Summary,
}

/// One table row; `cell` is None when the method produced no usable
/// agglomeration for the kind.
#[derive(Debug, Clone)]
pub struct QualityRow {
    pub mesh_kind: String,
    pub method: String,
    pub cell: Option<QualityCell>,
}

/// Quality comparison across mesh kinds and bisection methods.
#[derive(Debug, Clone)]
pub struct QualityTable {
    pub rows: Vec<QualityRow>,
}

/// Mean quality relative to a baseline method on the same mesh kind.
#[derive(Debug, Clone)]
pub struct RatioRow {
    pub mesh_kind: String,
    pub method: String,
    pub uf_ratio: f64,
    pub cr_ratio: f64,
}

impl QualityTable {
    pub fn cell(&self, mesh_kind: &str, method: &str) -> Option<&QualityCell> {
        self.rows
            .iter()
            .find(|r| r.mesh_kind == mesh_kind && r.method == method)
            .and_then(|r| r.cell.as_ref())
    }

    /// Mean UF and CR of every populated row divided by the baseline
    /// method's means on the same mesh kind. The baseline's own rows come
    /// out as exactly 1; rows without a populated baseline are skipped.
    pub fn relative_to(&self, baseline: &str) -> Vec<RatioRow> {
        self.rows
            .iter()
            .filter_map(|row| {
                let cell = row.cell.as_ref()?;
                let base = self.cell(&row.mesh_kind, baseline)?;
                Some(RatioRow {
                    mesh_kind: row.mesh_kind.clone(),
                    method: row.method.clone(),
                    uf_ratio: cell.uf.mean / base.uf.mean,
                    cr_ratio: cell.cr.mean / base.cr.mean,
                })
            })
            .collect()
    }

    /// CSV rendering; missing cells leave their numeric columns empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "mesh_kind,method,uf_mean,cr_mean,uf_q1,uf_median,uf_q3,cr_q1,cr_median,cr_q3\n",
        );
        for row in &self.rows {
            match &row.cell {
                Some(c) => writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    row.mesh_kind,
                    row.method,
                    c.uf.mean,
                    c.cr.mean,
                    c.uf.q1,
                    c.uf.median,
                    c.uf.q3,
                    c.cr.q1,
                    c.cr.median,
                    c.cr.q3
                ),
                None => writeln!(out, "{},{},,,,,,,,", row.mesh_kind, row.method),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }
}

/// Agglomerates every mesh of every kind with every method at
/// `h_factor`·h₀ (h₀ measured per mesh) and pools the per-coarse-cell UF
/// and CR values into one table cell per (kind, method).
///
/// A failing (mesh, method) combination is logged and skipped; a cell with
/// no surviving mesh is recorded as missing rather than aborting the table.
pub fn quality_table(
    mesh_sets: &[(String, Vec<Arc<PolyMesh>>)],
    methods: &[(&str, &dyn BisectionModel)],
    h_factor: f64,
) -> Result<QualityTable> {
    if !(h_factor > 0.0) || !h_factor.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "target-size factor must be positive and finite, got {h_factor}"
        )));
    }
    let mut rows = Vec::new();
    for (kind, meshes) in mesh_sets {
        for &(method, model) in methods {
            let mut ufs = Vec::new();
            let mut crs = Vec::new();
            for mesh in meshes {
                match evaluate_quality(mesh, model, h_factor) {
                    Ok((uf, cr)) => {
                        ufs.extend(uf);
                        crs.extend(cr);
                    }
                    Err(e) => log::warn!("{kind}/{method}: skipping one mesh: {e}"),
                }
            }
            let cell = if ufs.is_empty() {
                None
            } else {
                Some(QualityCell {
                    uf: Summary::of(&ufs)?,
                    cr: Summary::of(&crs)?,
                })
            };
            rows.push(QualityRow {
                mesh_kind: kind.clone(),
                method: method.to_string(),
                cell,
            });
        }
    }
    Ok(QualityTable { rows })
}

fn evaluate_quality(
    mesh: &Arc<PolyMesh>,
    model: &dyn BisectionModel,
    h_factor: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let h0 = mesh.mesh_size()?;
    let agg = agglomerate(mesh.clone(), h_factor * h0, model)?;
    let uf = uniformity_factors(&agg);
    let cr = circle_ratios(&agg)?;
    Ok((uf, cr))
}

/// Timings of one (method, mesh size) combination.
#[derive(Debug, Clone)]
pub struct RuntimeSample {
    pub method: String,
    pub n_elements: usize,
    /// Wall-clock seconds of each repeated bisection call.
    pub seconds: Vec<f64>,
}

impl RuntimeSample {
    pub fn mean(&self) -> f64 {
        self.seconds.iter().sum::<f64>() / self.seconds.len() as f64
    }

    /// Sample standard deviation; zero for fewer than two samples.
    pub fn std_dev(&self) -> f64 {
        let n = self.seconds.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let var = self
            .seconds
            .iter()
            .map(|s| (s - mean) * (s - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        var.sqrt()
    }

    pub fn median(&self) -> f64 {
        let mut sorted = self.seconds.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    }
}

/// Benchmark timings across methods and mesh sizes.
#[derive(Debug, Clone)]
pub struct RuntimeReport {
    pub samples: Vec<RuntimeSample>,
}

impl RuntimeReport {
    /// One CSV row per individual timing, ready for log-scale plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,n_elements,sample_idx,seconds\n");
        for sample in &self.samples {
            for (idx, sec) in sample.seconds.iter().enumerate() {
                writeln!(out, "{},{},{idx},{sec}", sample.method, sample.n_elements)
                    .expect("writing to a String cannot fail");
            }
        }
        out
    }

    pub fn sample(&self, method: &str, n_elements: usize) -> Option<&RuntimeSample> {
        self.samples
            .iter()
            .find(|s| s.method == method && s.n_elements == n_elements)
    }
}

/// Times single bisection calls on random Voronoi meshes of the requested
/// sizes: per (method, size), one untimed warmup call and then
/// `samples_per_mesh` timed repetitions on an identical input. The mesh
/// sequence is a pure function of `seed`. Medians below 1µs are logged as
/// unreliable for the system timer.
pub fn runtime_bench(
    methods: &[(&str, &dyn BisectionModel)],
    sizes: &[usize],
    samples_per_mesh: usize,
    seed: u64,
) -> Result<RuntimeReport> {
    if methods.is_empty() || sizes.is_empty() || samples_per_mesh == 0 {
        return Err(Error::InvalidConfig(
            "benchmark needs at least one method, one size, and one sample".into(),
        ));
    }
    let mut inputs = Vec::with_capacity(sizes.len());
    for (idx, &n) in sizes.iter().enumerate() {
        let mesh_seed = stream_indexed(seed, "bench-mesh", idx as u64).random::<u64>();
        let mesh = generate_mesh(MeshKind::Voronoi, n, mesh_seed)?;
        let graph = mesh.connectivity_graph();
        let features = mesh.extract_features()?;
        inputs.push((mesh.cell_count(), graph, features));
    }

    let mut samples = Vec::with_capacity(methods.len() * sizes.len());
    for &(method, model) in methods {
        for (n_elements, graph, features) in &inputs {
            model.bisect(graph, features)?;
            let mut seconds = Vec::with_capacity(samples_per_mesh);
            for _ in 0..samples_per_mesh {
                let start = Instant::now();
                let partition = model.bisect(graph, features)?;
                seconds.push(start.elapsed().as_secs_f64());
                std::hint::black_box(partition);
            }
            let sample = RuntimeSample {
                method: method.to_string(),
                n_elements: *n_elements,
                seconds,
            };
            if sample.median() < 1e-6 {
                log::warn!(
                    "{method} at n={n_elements}: median {:.1e}s is below timer resolution",
                    sample.median()
                );
            }
            samples.push(sample);
        }
    }
    Ok(RuntimeReport { samples })
}

/// `count` geometrically spaced integer sizes from `lo` to `hi` inclusive,
/// forced strictly increasing after rounding.
pub fn geometric_sizes(lo: usize, hi: usize, count: usize) -> Result<Vec<usize>> {
    if lo == 0 || hi < lo || count == 0 {
        return Err(Error::InvalidConfig(format!(
            "invalid geometric range {lo}..{hi} with {count} points"
        )));
    }
    if count == 1 {
        if lo != hi {
            return Err(Error::InvalidConfig(
                "a single geometric point needs lo == hi".into(),
            ));
        }
        return Ok(vec![lo]);
    }
    let log_step = ((hi as f64) / (lo as f64)).ln() / (count - 1) as f64;
    let mut sizes = Vec::with_capacity(count);
    for k in 0..count {
        let raw = if k == count - 1 {
            hi as f64
        } else {
            lo as f64 * (log_step * k as f64).exp()
        };
        let v = raw.round() as usize;
        let v = match sizes.last() {
            Some(&prev) if v <= prev => prev + 1,
            _ => v,
        };
        sizes.push(v);
    }
    Ok(sizes)
}
