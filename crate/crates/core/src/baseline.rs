//! Weighted k-nearest-neighbour localization and the evaluation metrics
//! shared by every localizer.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::scene::{FingerprintRecord, Point, N_CLASSES};

pub const DEFAULT_K: usize = 5;
/// Added to neighbour distances before inverting them.
pub const DISTANCE_FLOOR: f64 = 1e-12;
/// Left-closed horizontal-distance buckets in metres.
pub const BUCKET_EDGES: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbEntry {
    pub position: Point,
    pub direction_class: usize,
    /// Flattened angle-delay map.
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FingerprintDatabase {
    pub entries: Vec<DbEntry>,
}

impl FingerprintDatabase {
    pub fn from_records(records: &[FingerprintRecord]) -> Result<Self> {
        let entries: Vec<DbEntry> = records
            .iter()
            .map(|r| DbEntry {
                position: r.position,
                direction_class: r.direction_class,
                features: r.inputs.x_ad.iter().copied().collect(),
            })
            .collect();
        let db = Self { entries };
        db.check()?;
        Ok(db)
    }

    fn check(&self) -> Result<()> {
        if let Some(first) = self.entries.first() {
            let n = first.features.len();
            if let Some(bad) = self.entries.iter().find(|e| e.features.len() != n) {
                return Err(Error::Shape { expected: vec![n], found: vec![bad.features.len()] });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    InverseDistance,
    Uniform,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The `k` nearest entries as `(index, distance)`, ordered by distance then
/// index.
pub fn nearest_neighbors(db: &FingerprintDatabase, query: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
    if db.is_empty() {
        return Err(param("fingerprint database is empty"));
    }
    if k == 0 || k > db.len() {
        return Err(param(format!("k must lie in 1..={}, got {k}", db.len())));
    }
    let mut d: Vec<(usize, f64)> = Vec::with_capacity(db.len());
    for (i, e) in db.entries.iter().enumerate() {
        if e.features.len() != query.len() {
            return Err(Error::Shape { expected: vec![e.features.len()], found: vec![query.len()] });
        }
        d.push((i, euclidean(&e.features, query)));
    }
    d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    d.truncate(k);
    Ok(d)
}

pub fn wknn_locate(db: &FingerprintDatabase, query: &[f64], k: usize, weighting: Weighting) -> Result<Point> {
    let nn = nearest_neighbors(db, query, k)?;
    let mut acc = [0.0; 3];
    let mut wsum = 0.0;
    for (i, dist) in nn {
        let w = match weighting {
            Weighting::InverseDistance => 1.0 / (dist + DISTANCE_FLOOR),
            Weighting::Uniform => 1.0,
        };
        let p = db.entries[i].position;
        for (a, x) in acc.iter_mut().zip(p) {
            *a += w * x;
        }
        wsum += w;
    }
    Ok(acc.map(|a| a / wsum))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub lo_m: f64,
    /// `None` for the open-ended overflow bucket.
    pub hi_m: Option<f64>,
    pub count: usize,
    pub mean_error: Option<f64>,
}

impl Bucket {
    pub fn label(&self) -> String {
        match self.hi_m {
            Some(hi) => format!("{}-{}", self.lo_m, hi),
            None => format!(">={}", self.lo_m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean_error: f64,
    pub errors: Vec<f64>,
    /// `(error, cumulative fraction)` at every sorted sample.
    pub cdf_points: Vec<(f64, f64)>,
    pub range_buckets: Vec<Bucket>,
}

fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Index into [`BUCKET_EDGES`] buckets; `4` is the overflow bucket.
pub fn bucket_of(horizontal_m: f64) -> usize {
    BUCKET_EDGES[1..].iter().position(|&hi| horizontal_m < hi).unwrap_or(BUCKET_EDGES.len() - 1)
}

pub fn eval_localization(estimates: &[Point], truths: &[Point], bs_position: Point) -> Result<EvalReport> {
    if estimates.len() != truths.len() {
        return Err(param(format!("{} estimates for {} truths", estimates.len(), truths.len())));
    }
    if truths.is_empty() {
        return Err(param("nothing to evaluate"));
    }
    let errors: Vec<f64> = estimates.iter().zip(truths).map(|(e, t)| distance(*e, *t)).collect();
    let n = errors.len();
    let mean_error = errors.iter().sum::<f64>() / n as f64;
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let cdf_points = sorted.iter().enumerate().map(|(i, &e)| (e, (i + 1) as f64 / n as f64)).collect();

    let mut sums = [0.0; BUCKET_EDGES.len()];
    let mut counts = [0usize; BUCKET_EDGES.len()];
    for (t, e) in truths.iter().zip(&errors) {
        let h = ((t[0] - bs_position[0]).powi(2) + (t[1] - bs_position[1]).powi(2)).sqrt();
        let b = bucket_of(h);
        sums[b] += e;
        counts[b] += 1;
    }
    let range_buckets = (0..BUCKET_EDGES.len())
        .map(|b| Bucket {
            lo_m: BUCKET_EDGES[b],
            hi_m: BUCKET_EDGES.get(b + 1).copied(),
            count: counts[b],
            mean_error: (counts[b] > 0).then(|| sums[b] / counts[b] as f64),
        })
        .collect();
    Ok(EvalReport { mean_error, errors, cdf_points, range_buckets })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationReport {
    /// `confusion[truth][pred]` counts.
    pub confusion: Vec<Vec<u64>>,
    /// Per-class recall; `None` for classes absent from the truth.
    pub recall: Vec<Option<f64>>,
    pub accuracy: f64,
    pub n_errors: usize,
    /// Share of errors landing on a neighbouring class (mod 16).
    pub adjacency_share: f64,
}

pub fn eval_orientation(pred: &[usize], truth: &[usize]) -> Result<OrientationReport> {
    if pred.len() != truth.len() {
        return Err(param(format!("{} predictions for {} labels", pred.len(), truth.len())));
    }
    if truth.is_empty() {
        return Err(param("nothing to evaluate"));
    }
    if let Some(c) = pred.iter().chain(truth).find(|&&c| c >= N_CLASSES) {
        return Err(Error::Range(format!("class {c} outside 0..{N_CLASSES}")));
    }
    let mut confusion = vec![vec![0u64; N_CLASSES]; N_CLASSES];
    let mut adjacent = 0usize;
    let mut wrong = 0usize;
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[t][p] += 1;
        if p != t {
            wrong += 1;
            let d = (p + N_CLASSES - t) % N_CLASSES;
            if d == 1 || d == N_CLASSES - 1 {
                adjacent += 1;
            }
        }
    }
    let recall = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let n: u64 = row.iter().sum();
            (n > 0).then(|| row[i] as f64 / n as f64)
        })
        .collect();
    Ok(OrientationReport {
        accuracy: (truth.len() - wrong) as f64 / truth.len() as f64,
        confusion,
        recall,
        n_errors: wrong,
        adjacency_share: if wrong > 0 { adjacent as f64 / wrong as f64 } else { 0.0 },
    })
}
