//! CrowdTruth worker and unit quality metrics for closed single-choice tasks.
//!
//! Every annotation is a one-hot vector over the scale. Scores start at 1 and
//! are refreshed together each iteration from the previous iteration's values:
//!
//! * `UQS(u)`: WQS-weighted agreement over all worker pairs on unit `u`,
//!   pair weight `WQS(i) * WQS(j)`.
//! * `WWA(i)`: agreement of `i` with every co-worker on every shared unit,
//!   weighted by `WQS(j) * UQS(u)`.
//! * `WUA(i)`: cosine between `i`'s vector and the summed vectors of the other
//!   workers on each unit, weighted by `UQS(u)`.
//! * `WQS(i) = WWA(i) * WUA(i)`.
//!
//! Each weighted sum is divided by the sum of its weights, so every score
//! stays in `[0, 1]`. UQS is refreshed first and WWA/WUA use the new UQS.

use crate::annotation::AnnotationMatrix;
use crate::error::{Error, Result};
use crate::sweep::{Method, ScoreTable};

#[derive(Debug, Clone, PartialEq)]
pub struct CrowdTruthConfig {
    /// Stop once no score moves by more than this in one iteration.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CrowdTruthConfig {
    fn default() -> Self {
        CrowdTruthConfig {
            tolerance: 1e-6,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrowdTruthState {
    pub workers: Vec<String>,
    pub units: Vec<String>,
    pub wqs: Vec<f64>,
    pub wwa: Vec<f64>,
    pub wua: Vec<f64>,
    pub uqs: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    /// Largest absolute score change in the last iteration.
    pub last_change: f64,
}

impl CrowdTruthState {
    fn initial(matrix: &AnnotationMatrix) -> Self {
        let w = matrix.n_annotators();
        let u = matrix.n_items();
        CrowdTruthState {
            workers: matrix.annotators().to_vec(),
            units: matrix.items().to_vec(),
            wqs: vec![1.0; w],
            wwa: vec![1.0; w],
            wua: vec![1.0; w],
            uqs: vec![1.0; u],
            iterations_run: 0,
            converged: false,
            last_change: f64::INFINITY,
        }
    }

    pub fn wqs_of(&self, worker: &str) -> Option<f64> {
        let i = self.workers.iter().position(|w| w == worker)?;
        Some(self.wqs[i])
    }

    /// Largest absolute difference between the scores of two states.
    pub fn max_change(&self, other: &CrowdTruthState) -> f64 {
        let diff = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        diff(&self.wqs, &other.wqs)
            .max(diff(&self.wwa, &other.wwa))
            .max(diff(&self.wua, &other.wua))
            .max(diff(&self.uqs, &other.uqs))
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// One-hot annotation vector of `worker` on `unit`.
pub fn worker_vector(matrix: &AnnotationMatrix, worker: &str, unit: &str) -> Result<Vec<f64>> {
    let i = matrix
        .item_position(unit)
        .ok_or_else(|| Error::UnknownItem(unit.to_string()))?;
    let j = matrix
        .annotator_position(worker)
        .ok_or_else(|| Error::UnknownAnnotator(worker.to_string()))?;
    let k = matrix.label_index_at(i, j).ok_or_else(|| Error::MissingCell {
        worker: worker.to_string(),
        unit: unit.to_string(),
    })?;
    let mut v = vec![0.0; matrix.scale().len()];
    v[k] = 1.0;
    Ok(v)
}

/// Sum of the worker vectors on `unit`, leaving out `excluding` if given.
pub fn unit_vector(matrix: &AnnotationMatrix, unit: &str, excluding: Option<&str>) -> Result<Vec<f64>> {
    let i = matrix
        .item_position(unit)
        .ok_or_else(|| Error::UnknownItem(unit.to_string()))?;
    let skip = match excluding {
        Some(w) => Some(
            matrix
                .annotator_position(w)
                .ok_or_else(|| Error::UnknownAnnotator(w.to_string()))?,
        ),
        None => None,
    };
    let counts = matrix.item_counts(i, |j| Some(j) != skip);
    Ok(counts.into_iter().map(|c| c as f64).collect())
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// One synchronous update of all scores from `prev`.
pub fn crowdtruth_step(matrix: &AnnotationMatrix, prev: &CrowdTruthState) -> CrowdTruthState {
    let k = matrix.scale().len();
    let n_workers = matrix.n_annotators();
    let n_units = matrix.n_items();

    // WQS mass per label on each unit, from the previous iteration
    let mut label_mass = vec![vec![0.0; k]; n_units];
    let mut label_sq = vec![vec![0.0; k]; n_units];
    let mut label_count = vec![vec![0u64; k]; n_units];
    for (u, ((mass, sq), count)) in label_mass
        .iter_mut()
        .zip(label_sq.iter_mut())
        .zip(label_count.iter_mut())
        .enumerate()
    {
        for (j, a) in matrix.item_cells(u) {
            let w = prev.wqs[j];
            mass[a] += w;
            sq[a] += w * w;
            count[a] += 1;
        }
    }

    // UQS: sum over unordered pairs of w_i w_j [same label] / sum of w_i w_j
    let uqs: Vec<f64> = (0..n_units)
        .map(|u| {
            let total: f64 = label_mass[u].iter().sum();
            let total_sq: f64 = label_sq[u].iter().sum();
            let all_pairs = (total * total - total_sq) / 2.0;
            let same_pairs: f64 = label_mass[u]
                .iter()
                .zip(&label_sq[u])
                .map(|(m, s)| (m * m - s) / 2.0)
                .sum();
            ratio(same_pairs, all_pairs)
        })
        .collect();

    let mut wwa_num = vec![0.0; n_workers];
    let mut wwa_den = vec![0.0; n_workers];
    let mut wua_num = vec![0.0; n_workers];
    let mut wua_den = vec![0.0; n_workers];
    for u in 0..n_units {
        let total_mass: f64 = label_mass[u].iter().sum();
        let counts = &label_count[u];
        let norm_sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
        for (i, a) in matrix.item_cells(u) {
            let own = prev.wqs[i];
            wwa_num[i] += (label_mass[u][a] - own) * uqs[u];
            wwa_den[i] += (total_mass - own) * uqs[u];

            // cosine of e_a with (counts - e_a)
            let c = counts[a] as f64;
            let others_norm = (norm_sq - c * c + (c - 1.0) * (c - 1.0)).sqrt();
            let sim = if others_norm > 0.0 { (c - 1.0) / others_norm } else { 0.0 };
            wua_num[i] += sim * uqs[u];
            wua_den[i] += uqs[u];
        }
    }
    let wwa: Vec<f64> = (0..n_workers).map(|i| ratio(wwa_num[i], wwa_den[i])).collect();
    let wua: Vec<f64> = (0..n_workers).map(|i| ratio(wua_num[i], wua_den[i])).collect();
    let wqs: Vec<f64> = wwa.iter().zip(&wua).map(|(a, b)| a * b).collect();

    let mut next = CrowdTruthState {
        workers: prev.workers.clone(),
        units: prev.units.clone(),
        wqs,
        wwa,
        wua,
        uqs,
        iterations_run: prev.iterations_run + 1,
        converged: false,
        last_change: 0.0,
    };
    next.last_change = next.max_change(prev);
    next
}

/// Iterates [`crowdtruth_step`] from all-ones until no score changes by more
/// than `config.tolerance`, or `config.max_iterations` is reached (then
/// `converged` is false).
pub fn crowdtruth_fit(matrix: &AnnotationMatrix, config: &CrowdTruthConfig) -> Result<CrowdTruthState> {
    if config.tolerance.is_nan() || config.tolerance <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if config.max_iterations == 0 {
        return Err(Error::InvalidArgument(
            "max_iterations must be at least 1".into(),
        ));
    }
    for (u, unit) in matrix.items().iter().enumerate() {
        if matrix.item_cells(u).count() < 2 {
            return Err(Error::Precondition(format!(
                "unit `{unit}` has fewer than 2 workers"
            )));
        }
    }
    for (j, w) in matrix.annotators().iter().enumerate() {
        if matrix.annotator_cells(j).next().is_none() {
            return Err(Error::Precondition(format!("worker `{w}` has no units")));
        }
    }
    let mut state = CrowdTruthState::initial(matrix);
    while state.iterations_run < config.max_iterations {
        state = crowdtruth_step(matrix, &state);
        if state.last_change <= config.tolerance {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}

/// WQS as the reliability score.
pub fn crowdtruth_scores(state: &CrowdTruthState) -> ScoreTable {
    ScoreTable::from_scores(
        Method::CrowdTruth,
        state
            .workers
            .iter()
            .cloned()
            .zip(state.wqs.iter().map(|&w| Some(w))),
    )
}
