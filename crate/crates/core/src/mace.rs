//! Multi-Annotator Competence Estimation.
//!
//! Generative model, per item `i` and annotator `j`:
//!
//! * the true label `T_i` is uniform over the K scale values;
//! * a spam indicator `S_ij` is 1 with probability `1 - θ_j`;
//! * if `S_ij = 0` the annotator reports `T_i`, otherwise it draws a label
//!   from its spam strategy `ζ_j`.
//!
//! Only the labels are observed. [`mace_fit`] maximizes the marginal
//! likelihood with EM from several random starting points and keeps the best
//! restart. The competence `θ_j` is the annotator's reliability score.
//!
//! Marginalizing `S_ij` gives the per-cell likelihood
//! `P(a | t) = θ_j [a = t] + (1 - θ_j) ζ_j(a)`, and the posterior
//! probability that an observed label `a` was not spam collapses to
//! `q_i(a) θ_j / (θ_j + (1 - θ_j) ζ_j(a))`, where `q_i` is the posterior
//! over `T_i`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::annotation::{AnnotationMatrix, AnnotatorRoster, LabelDistribution, LabelScale};
use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::sweep::{Method, ScoreTable};

#[derive(Debug, Clone, PartialEq)]
pub struct MaceConfig {
    pub restarts: usize,
    pub em_iterations: usize,
    /// Pseudo-count added to every M-step count. `None` means `0.1 / K`.
    pub smoothing: Option<f64>,
    pub seed: u64,
}

impl Default for MaceConfig {
    fn default() -> Self {
        MaceConfig {
            restarts: 50,
            em_iterations: 50,
            smoothing: None,
            seed: 0,
        }
    }
}

impl MaceConfig {
    pub fn with_seed(seed: u64) -> Self {
        MaceConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn smoothing_for(&self, k: usize) -> f64 {
        self.smoothing.unwrap_or(0.1 / k as f64)
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.em_iterations == 0 {
            return Err(Error::InvalidArgument(
                "em_iterations must be at least 1".into(),
            ));
        }
        if let Some(s) = self.smoothing {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "smoothing must be a non-negative number, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Annotator parameters, indexed by annotator position in the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MaceParams {
    pub competence: Vec<f64>,
    /// One probability vector over scale indices per annotator.
    pub spam_strategy: Vec<Vec<f64>>,
}

impl MaceParams {
    fn random<R: Rng>(n_annotators: usize, k: usize, rng: &mut R) -> Self {
        let competence = (0..n_annotators).map(|_| rng.gen_range(0.5..1.0)).collect();
        let spam_strategy = (0..n_annotators)
            .map(|_| {
                let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(f64::EPSILON..1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / total).collect()
            })
            .collect();
        MaceParams {
            competence,
            spam_strategy,
        }
    }

    fn cell_likelihood(&self, j: usize, label: usize, truth: usize) -> f64 {
        let theta = self.competence[j];
        let hit = if label == truth { theta } else { 0.0 };
        hit + (1.0 - theta) * self.spam_strategy[j][label]
    }
}

/// Result of the E-step under fixed parameters.
struct Expectations {
    log_likelihood: f64,
    posteriors: Vec<Vec<f64>>,
    non_spam: Vec<f64>,
    spam_labels: Vec<Vec<f64>>,
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn e_step(matrix: &AnnotationMatrix, params: &MaceParams) -> Expectations {
    let k = matrix.scale().len();
    let n_ann = matrix.n_annotators();
    let log_prior = -(k as f64).ln();
    let mut log_likelihood = 0.0;
    let mut posteriors = Vec::with_capacity(matrix.n_items());
    let mut non_spam = vec![0.0; n_ann];
    let mut spam_labels = vec![vec![0.0; k]; n_ann];
    let mut log_w = vec![0.0; k];
    for i in 0..matrix.n_items() {
        log_w.iter_mut().for_each(|w| *w = log_prior);
        for (j, a) in matrix.item_cells(i) {
            for (t, w) in log_w.iter_mut().enumerate() {
                *w += params.cell_likelihood(j, a, t).ln();
            }
        }
        let lse = log_sum_exp(&log_w);
        log_likelihood += lse;
        let q: Vec<f64> = log_w.iter().map(|w| (w - lse).exp()).collect();
        for (j, a) in matrix.item_cells(i) {
            let theta = params.competence[j];
            let denom = theta + (1.0 - theta) * params.spam_strategy[j][a];
            let honest = if denom > 0.0 { q[a] * theta / denom } else { 0.0 };
            non_spam[j] += honest;
            spam_labels[j][a] += 1.0 - honest;
        }
        posteriors.push(q);
    }
    Expectations {
        log_likelihood,
        posteriors,
        non_spam,
        spam_labels,
    }
}

fn m_step(matrix: &AnnotationMatrix, e: &Expectations, prev: &MaceParams, smoothing: f64) -> MaceParams {
    let k = matrix.scale().len();
    let competence = (0..matrix.n_annotators())
        .map(|j| {
            let n = matrix.annotator_cells(j).count() as f64;
            (e.non_spam[j] + smoothing) / (n + 2.0 * smoothing)
        })
        .collect();
    let spam_strategy = e
        .spam_labels
        .iter()
        .zip(&prev.spam_strategy)
        .map(|(counts, old)| {
            let total: f64 = counts.iter().sum::<f64>() + smoothing * k as f64;
            if total > 0.0 {
                counts.iter().map(|c| (c + smoothing) / total).collect()
            } else {
                old.clone()
            }
        })
        .collect();
    MaceParams {
        competence,
        spam_strategy,
    }
}

/// One EM update: E-step under `params`, then a smoothed M-step.
pub fn em_step(matrix: &AnnotationMatrix, params: &MaceParams, smoothing: f64) -> MaceParams {
    m_step(matrix, &e_step(matrix, params), params, smoothing)
}

/// Posterior over the true label of every item, indexed like the scale.
pub fn label_posteriors(matrix: &AnnotationMatrix, params: &MaceParams) -> Vec<Vec<f64>> {
    e_step(matrix, params).posteriors
}

/// Marginal log-likelihood of the observed labels under `params`
/// (true labels and spam indicators summed out).
pub fn marginal_log_likelihood(matrix: &AnnotationMatrix, params: &MaceParams) -> f64 {
    e_step(matrix, params).log_likelihood
}

/// Log-density of the smoothing pseudo-counts read as Beta/Dirichlet priors,
/// up to a constant. EM with smoothing ascends
/// `log_likelihood + log_prior`.
pub fn log_prior(params: &MaceParams, smoothing: f64) -> f64 {
    if smoothing == 0.0 {
        return 0.0;
    }
    let theta: f64 = params
        .competence
        .iter()
        .map(|&t| t.ln() + (1.0 - t).ln())
        .sum();
    let zeta: f64 = params
        .spam_strategy
        .iter()
        .flat_map(|z| z.iter())
        .map(|p| p.ln())
        .sum();
    smoothing * (theta + zeta)
}

/// A fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct MaceFit {
    annotators: Vec<String>,
    items: Vec<String>,
    params: MaceParams,
    posterior_labels: Vec<LabelDistribution>,
    log_likelihood_trace: Vec<f64>,
    objective_trace: Vec<f64>,
    best_restart: usize,
}

impl MaceFit {
    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn params(&self) -> &MaceParams {
        &self.params
    }

    /// θ per annotator, in matrix annotator order.
    pub fn competence(&self) -> &[f64] {
        &self.params.competence
    }

    pub fn competence_of(&self, annotator: &str) -> Option<f64> {
        let j = self.annotators.iter().position(|a| a == annotator)?;
        Some(self.params.competence[j])
    }

    /// ζ per annotator, over scale indices.
    pub fn spam_strategy(&self) -> &[Vec<f64>] {
        &self.params.spam_strategy
    }

    /// Posterior over the true label of each item, in matrix item order.
    pub fn posterior_labels(&self) -> &[LabelDistribution] {
        &self.posterior_labels
    }

    /// Marginal log-likelihood of the winning restart: the initial value,
    /// then one entry per EM iteration.
    pub fn log_likelihood_trace(&self) -> &[f64] {
        &self.log_likelihood_trace
    }

    /// `log_likelihood + log_prior` along the winning restart.
    pub fn objective_trace(&self) -> &[f64] {
        &self.objective_trace
    }

    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihood_trace.last().expect("trace is never empty")
    }

    pub fn best_restart(&self) -> usize {
        self.best_restart
    }

    /// Estimated true label value per item (argmax posterior, smaller value on ties).
    pub fn estimated_labels(&self) -> Vec<i64> {
        self.posterior_labels.iter().map(|d| d.argmax_value()).collect()
    }
}

struct RestartRun {
    params: MaceParams,
    ll_trace: Vec<f64>,
    objective_trace: Vec<f64>,
}

fn run_restart(matrix: &AnnotationMatrix, config: &MaceConfig, restart: usize) -> RestartRun {
    let k = matrix.scale().len();
    let smoothing = config.smoothing_for(k);
    let mut rng = rng_for(config.seed, &["mace-restart", &restart.to_string()]);
    let mut params = MaceParams::random(matrix.n_annotators(), k, &mut rng);
    let mut ll_trace = Vec::with_capacity(config.em_iterations + 1);
    let mut objective_trace = Vec::with_capacity(config.em_iterations + 1);
    let mut e = e_step(matrix, &params);
    for _ in 0..config.em_iterations {
        ll_trace.push(e.log_likelihood);
        objective_trace.push(e.log_likelihood + log_prior(&params, smoothing));
        params = m_step(matrix, &e, &params, smoothing);
        e = e_step(matrix, &params);
    }
    ll_trace.push(e.log_likelihood);
    objective_trace.push(e.log_likelihood + log_prior(&params, smoothing));
    RestartRun {
        params,
        ll_trace,
        objective_trace,
    }
}

fn check_fit_input(matrix: &AnnotationMatrix) -> Result<()> {
    if matrix.scale().len() < 2 {
        return Err(Error::InvalidScale("MACE needs at least 2 labels".into()));
    }
    if matrix.n_cells() == 0 {
        return Err(Error::EmptyMatrix);
    }
    for (j, a) in matrix.annotators().iter().enumerate() {
        if matrix.annotator_cells(j).next().is_none() {
            return Err(Error::Precondition(format!(
                "annotator `{a}` has no annotations"
            )));
        }
    }
    Ok(())
}

/// Fits the model with `config.restarts` seeded random restarts and returns
/// the restart with the highest final log-likelihood (lowest index on ties).
/// Restarts run in parallel; the result does not depend on scheduling.
pub fn mace_fit(matrix: &AnnotationMatrix, config: &MaceConfig) -> Result<MaceFit> {
    config.validate()?;
    check_fit_input(matrix)?;
    let runs: Vec<RestartRun> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(matrix, config, r))
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate().skip(1) {
        if run.ll_trace.last() > runs[best].ll_trace.last() {
            best = r;
        }
    }
    let run = runs.into_iter().nth(best).expect("at least one restart");
    let e = e_step(matrix, &run.params);
    let scale: &LabelScale = matrix.scale();
    let posterior_labels = e
        .posteriors
        .iter()
        .map(|q| LabelDistribution::from_weights(scale.clone(), q))
        .collect::<Result<Vec<_>>>()?;
    Ok(MaceFit {
        annotators: matrix.annotators().to_vec(),
        items: matrix.items().to_vec(),
        params: run.params,
        posterior_labels,
        log_likelihood_trace: run.ll_trace,
        objective_trace: run.objective_trace,
        best_restart: best,
    })
}

/// Competence θ as the reliability score; lower means more spam-like.
pub fn mace_scores(fit: &MaceFit) -> ScoreTable {
    ScoreTable::from_scores(
        Method::Mace,
        fit.annotators
            .iter()
            .cloned()
            .zip(fit.params.competence.iter().map(|&t| Some(t))),
    )
}

/// Mean distance of each annotator's labels to the estimated true labels,
/// min-max normalized across annotators.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceDiagnostic {
    pub raw: BTreeMap<String, f64>,
    pub normalized: BTreeMap<String, f64>,
    /// Mean normalized distance of gold spammers (`None` if there are none).
    pub spam_mean: Option<f64>,
    pub non_spam_mean: Option<f64>,
    /// All raw distances were equal; normalized distances are reported as 0.
    pub degenerate: bool,
}

pub fn mace_distance_diagnostic(
    fit: &MaceFit,
    matrix: &AnnotationMatrix,
    roster: &AnnotatorRoster,
) -> Result<DistanceDiagnostic> {
    roster.validate_against(matrix)?;
    if fit.items != matrix.items() || fit.annotators != matrix.annotators() {
        return Err(Error::InvalidArgument(
            "fit was produced from a different matrix".into(),
        ));
    }
    let truth = fit.estimated_labels();
    let mut raw = BTreeMap::new();
    for (j, a) in matrix.annotators().iter().enumerate() {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (i, k) in matrix.annotator_cells(j) {
            sum += (matrix.scale().value(k) - truth[i]).abs() as f64;
            n += 1;
        }
        if n == 0 {
            return Err(Error::Precondition(format!(
                "annotator `{a}` has no annotations"
            )));
        }
        raw.insert(a.clone(), sum / n as f64);
    }
    let min = raw.values().copied().fold(f64::INFINITY, f64::min);
    let max = raw.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = max - min <= 0.0;
    let normalized: BTreeMap<String, f64> = raw
        .iter()
        .map(|(a, &d)| {
            let v = if degenerate { 0.0 } else { (d - min) / (max - min) };
            (a.clone(), v)
        })
        .collect();
    let group_mean = |spam: bool| {
        let vals: Vec<f64> = normalized
            .iter()
            .filter(|(a, _)| roster.is_spam(a) == Some(spam))
            .map(|(_, &v)| v)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    Ok(DistanceDiagnostic {
        spam_mean: group_mean(true),
        non_spam_mean: group_mean(false),
        raw,
        normalized,
        degenerate,
    })
}
