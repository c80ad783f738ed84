//! Two-cluster k-means over element barycenters: k-means++ style seeding
//! (first center uniform, second proportional to squared distance), Lloyd
//! iterations to stable assignments, best of several restarts by
//! within-cluster sum of squares.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::Partition;
use crate::rng::stream_indexed;
use rand::Rng;

/// Tuning knobs for the two-cluster k-means. The cluster count is fixed at 2:
/// larger splits are obtained by recursive bisection, not by raising k.
#[derive(Debug, Clone)]
pub struct KMeansConfig {
    /// Cap on Lloyd iterations per restart.
    pub max_iters: usize,
    /// Centroid-movement threshold below which a restart stops early.
    pub tol: f64,
    /// Independent seedings; the labeling with the lowest within-cluster
    /// sum of squares wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            max_iters: 100,
            tol: 1e-9,
            restarts: 8,
            seed: 0,
        }
    }
}

impl KMeansConfig {
    pub fn with_seed(seed: u64) -> Self {
        KMeansConfig {
            seed,
            ..KMeansConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("k-means max_iters must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig("k-means tol must be >= 0".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("k-means restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Splits the points into two clusters. All-coincident point sets cannot be
/// separated geometrically; they get an arbitrary balanced split and a
/// warning instead of an error.
pub fn kmeans_bisect(points: &[Point], cfg: &KMeansConfig) -> Result<Partition> {
    cfg.validate()?;
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "k-means bisection needs at least 2 points, got {n}"
        )));
    }

    let spread = points
        .iter()
        .map(|p| p.dist2(points[0]))
        .fold(0.0, f64::max);
    if spread == 0.0 {
        log::warn!("k-means input: all {n} points coincide; using a balanced index split");
        let labels = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        return Partition::bisection(labels);
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..cfg.restarts {
        let mut rng = stream_indexed(cfg.seed, "kmeans", restart as u64);
        let (labels, inertia) = lloyd_run(points, cfg, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    let (_, labels) = best.expect("restarts >= 1");
    Partition::bisection(labels)
}

fn lloyd_run(
    points: &[Point],
    cfg: &KMeansConfig,
    rng: &mut impl Rng,
) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut centers = seed_centers(points, rng);
    let mut labels = vec![0usize; n];
    for _ in 0..cfg.max_iters {
        let changed = assign(points, &centers, &mut labels);
        repair_empty_cluster(points, &centers, &mut labels);
        let moved = update_centers(points, &labels, &mut centers);
        if !changed || moved <= cfg.tol {
            break;
        }
    }
    // One final assignment so labels match the final centers.
    assign(points, &centers, &mut labels);
    repair_empty_cluster(points, &centers, &mut labels);
    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| p.dist2(centers[l]))
        .sum();
    (labels, inertia)
}

/// k-means++ seeding for k = 2.
fn seed_centers(points: &[Point], rng: &mut impl Rng) -> [Point; 2] {
    let n = points.len();
    let first = points[rng.random_range(0..n)];
    let weights: Vec<f64> = points.iter().map(|p| p.dist2(first)).collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        // All points coincide with the first draw; any distinct index works
        // (the caller already handled fully coincident inputs).
        let second = points
            .iter()
            .find(|p| p.dist2(first) > 0.0)
            .copied()
            .unwrap_or(first);
        return [first, second];
    }
    let mut u = rng.random_range(0.0..total);
    for (p, w) in points.iter().zip(&weights) {
        if u < *w {
            return [first, *p];
        }
        u -= w;
    }
    [first, *points.last().expect("nonempty")]
}

/// Nearest-center assignment; ties go to cluster 0. Returns whether any
/// label changed.
fn assign(points: &[Point], centers: &[Point; 2], labels: &mut [usize]) -> bool {
    let mut changed = false;
    for (i, p) in points.iter().enumerate() {
        let l = usize::from(p.dist2(centers[1]) < p.dist2(centers[0]));
        if labels[i] != l {
            labels[i] = l;
            changed = true;
        }
    }
    changed
}

/// If a cluster lost all members, move the point farthest from the other
/// cluster's center into it.
fn repair_empty_cluster(points: &[Point], centers: &[Point; 2], labels: &mut [usize]) {
    let mut counts = [0usize; 2];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for empty in 0..2 {
        if counts[empty] > 0 {
            continue;
        }
        let donor = 1 - empty;
        let far = (0..points.len())
            .filter(|&i| labels[i] == donor)
            .max_by(|&a, &b| {
                points[a]
                    .dist2(centers[donor])
                    .total_cmp(&points[b].dist2(centers[donor]))
            })
            .expect("donor cluster holds every point");
        labels[far] = empty;
        counts[empty] += 1;
        counts[donor] -= 1;
    }
}

/// Recomputes centroids; returns the largest center movement.
fn update_centers(points: &[Point], labels: &[usize], centers: &mut [Point; 2]) -> f64 {
    let mut sums = [Point::new(0.0, 0.0); 2];
    let mut counts = [0usize; 2];
    for (p, &l) in points.iter().zip(labels) {
        sums[l] = sums[l] + *p;
        counts[l] += 1;
    }
    let mut moved = 0.0f64;
    for k in 0..2 {
        if counts[k] > 0 {
            let new = sums[k] * (1.0 / counts[k] as f64);
            moved = moved.max(new.dist(centers[k]));
            centers[k] = new;
        }
    }
    moved
}
