//! Cluster-center augmentation: k-means over the training features, then one
//! virtual example per cluster carrying the mean features and mean labels.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Cluster index of every training instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    assignment: Vec<usize>,
    num_clusters: usize,
}

impl ClusterAssignment {
    /// Validates that every index is in `[0, c)` and every cluster is non-empty.
    pub fn new(assignment: Vec<usize>, num_clusters: usize) -> Result<Self> {
        let sizes = cluster_sizes(&assignment, num_clusters)?;
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Validation(format!("cluster {j} is empty")));
        }
        Ok(ClusterAssignment {
            assignment,
            num_clusters,
        })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        cluster_sizes(&self.assignment, self.num_clusters).expect("validated on construction")
    }
}

fn cluster_sizes(assignment: &[usize], c: usize) -> Result<Vec<usize>> {
    let mut sizes = vec![0; c];
    for (i, &a) in assignment.iter().enumerate() {
        if a >= c {
            return Err(Error::Validation(format!("instance {i} assigned to cluster {a} >= {c}")));
        }
        sizes[a] += 1;
    }
    Ok(sizes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iter: usize,
    pub tol: f64,
    /// Independent k-means++ starts; the run with the lowest inertia wins.
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            restarts: 1,
        }
    }
}

/// Result of one Lloyd run, with the within-cluster sum of squares after each
/// assignment step.
#[derive(Debug, Clone)]
pub struct KMeansRun {
    pub assignment: ClusterAssignment,
    pub centers: Array2<f64>,
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

impl KMeansRun {
    pub fn inertia(&self) -> f64 {
        *self.inertia_trace.last().expect("at least one assignment step")
    }
}

/// k-means with k-means++ seeding and Lloyd iterations.
pub fn kmeans(
    features: ArrayView2<'_, f64>,
    c: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterAssignment> {
    let config = KMeansConfig {
        max_iter,
        tol,
        restarts: 1,
    };
    Ok(kmeans_with(features, c, seed, &config)?.assignment)
}

pub fn kmeans_with(
    features: ArrayView2<'_, f64>,
    c: usize,
    seed: u64,
    config: &KMeansConfig,
) -> Result<KMeansRun> {
    check_inputs(features, c)?;
    if !(config.tol > 0.0) {
        return Err(Error::Config(format!("k-means tolerance {} must be > 0", config.tol)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansRun> = None;
    for _ in 0..config.restarts.max(1) {
        let init = kmeans_plus_plus(features, c, &mut rng);
        let run = lloyd(features, init, config.max_iter, config.tol)?;
        if best.as_ref().is_none_or(|b| run.inertia() < b.inertia()) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

fn check_inputs(features: ArrayView2<'_, f64>, c: usize) -> Result<()> {
    let n = features.nrows();
    if c == 0 || c > n {
        return Err(Error::Config(format!("cluster count {c} must be in 1..={n}")));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite feature value passed to k-means".into()));
    }
    Ok(())
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding. Falls back to uniform sampling among unchosen rows when
/// every remaining point coincides with a chosen center.
fn kmeans_plus_plus(features: ArrayView2<'_, f64>, c: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = features.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| sq_dist(features.row(i), features.row(chosen[0])))
        .collect();
    while chosen.len() < c {
        let next = match WeightedIndex::new(&nearest) {
            Ok(dist) => dist.sample(rng),
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(features.row(i), features.row(next)));
        }
    }
    features.select(Axis(0), &chosen)
}

/// Nearest center per row; ties go to the lowest center index.
fn assign(features: ArrayView2<'_, f64>, centers: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
    (0..features.nrows())
        .into_par_iter()
        .map(|i| {
            let x = features.row(i);
            let mut best = (0, f64::INFINITY);
            for (j, center) in centers.rows().into_iter().enumerate() {
                let d = sq_dist(x, center);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .unzip()
}

/// Moves the point farthest from its own center into each empty cluster,
/// drawing only from clusters that keep at least one member.
fn repair_empty(assignment: &mut [usize], dists: &mut [f64], centers: &mut Array2<f64>, features: ArrayView2<'_, f64>) {
    let c = centers.nrows();
    let mut sizes = vec![0usize; c];
    for &a in assignment.iter() {
        sizes[a] += 1;
    }
    for empty in 0..c {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..assignment.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .fold(None, |acc: Option<usize>, i| match acc {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            })
            .expect("c <= n guarantees a cluster with two or more members");
        sizes[assignment[donor]] -= 1;
        assignment[donor] = empty;
        sizes[empty] = 1;
        dists[donor] = 0.0;
        centers.row_mut(empty).assign(&features.row(donor));
    }
}

fn means(features: ArrayView2<'_, f64>, assignment: &[usize], c: usize) -> Array2<f64> {
    let mut sums = Array2::<f64>::zeros((c, features.ncols()));
    let mut counts = vec![0usize; c];
    for (row, &a) in features.rows().into_iter().zip(assignment) {
        sums.row_mut(a).scaled_add(1.0, &row);
        counts[a] += 1;
    }
    for (mut row, &k) in sums.rows_mut().into_iter().zip(&counts) {
        row.mapv_inplace(|v| v / k as f64);
    }
    sums
}

/// Lloyd iterations from explicit initial centers.
pub fn lloyd(
    features: ArrayView2<'_, f64>,
    initial_centers: Array2<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansRun> {
    let c = initial_centers.nrows();
    check_inputs(features, c)?;
    if initial_centers.ncols() != features.ncols() {
        return Err(Error::Validation("initial centers have the wrong width".into()));
    }
    let mut centers = initial_centers;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut assignment;
    loop {
        let (mut a, mut d) = assign(features, &centers);
        repair_empty(&mut a, &mut d, &mut centers, features);
        trace.push(d.iter().sum());
        assignment = a;
        if iterations == max_iter.max(1) {
            break;
        }
        iterations += 1;
        let updated = means(features, &assignment, c);
        let shift = updated
            .rows()
            .into_iter()
            .zip(centers.rows())
            .map(|(u, v)| sq_dist(u, v).sqrt())
            .fold(0.0, f64::max);
        centers = updated;
        if shift < tol {
            // Final assignment against the converged centers.
            let (mut a, mut d) = assign(features, &centers);
            repair_empty(&mut a, &mut d, &mut centers, features);
            trace.push(d.iter().sum());
            assignment = a;
            break;
        }
    }
    let centers = means(features, &assignment, c);
    Ok(KMeansRun {
        assignment: ClusterAssignment::new(assignment, c)?,
        centers,
        inertia_trace: trace,
        iterations,
    })
}

/// Virtual examples: cluster centers `Z` (c x d) and soft labels `T` (c x q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Augmentation {
    pub centers: Array2<f64>,
    pub soft_labels: Array2<f64>,
    pub assignment: ClusterAssignment,
}

impl Augmentation {
    pub fn num_clusters(&self) -> usize {
        self.assignment.num_clusters()
    }
}

pub fn make_virtual_examples(data: &Dataset, assignment: &ClusterAssignment) -> Result<Augmentation> {
    if assignment.len() != data.num_examples() {
        return Err(Error::Validation(format!(
            "assignment covers {} instances, dataset has {}",
            assignment.len(),
            data.num_examples()
        )));
    }
    let c = assignment.num_clusters();
    let a = assignment.as_slice();
    Ok(Augmentation {
        centers: means(data.features().view(), a, c),
        soft_labels: means(data.labels_f64().view(), a, c),
        assignment: assignment.clone(),
    })
}

/// `Ẑ`: row i is the center of the cluster holding instance i.
pub fn expand_centers(aug: &Augmentation) -> Array2<f64> {
    aug.centers.select(Axis(0), aug.assignment.as_slice())
}

/// Cluster sizes as weights `|Z_j| / n`.
pub fn cluster_weights(aug: &Augmentation) -> Array1<f64> {
    let n = aug.assignment.len() as f64;
    aug.assignment.sizes().into_iter().map(|s| s as f64 / n).collect()
}
