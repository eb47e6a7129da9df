//! Annotator scoring, removal of the k lowest-scoring annotators, and the
//! k-sweep experiment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::Rng;
use rayon::prelude::*;

use crate::agreement::{mean_pairwise_kappa, KappaOptions, KappaWeighting};
use crate::annotation::{AnnotationMatrix, AnnotatorRoster};
use crate::crowdtruth::{crowdtruth_fit, crowdtruth_scores, CrowdTruthConfig};
use crate::error::{Error, Result};
use crate::mace::{mace_fit, mace_scores, MaceConfig};
use crate::metrics::{evaluate, MetricRow};
use crate::seed::{derive_seed, rng_for};

/// Reliability scoring method. Ordered by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    CrowdTruth,
    Kappa,
    Mace,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::CrowdTruth, Method::Kappa, Method::Mace, Method::Random];

    pub fn name(self) -> &'static str {
        match self {
            Method::CrowdTruth => "crowdtruth",
            Method::Kappa => "kappa",
            Method::Mace => "mace",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method `{s}` (expected mace, crowdtruth, kappa or random)"
                ))
            })
    }
}

/// Per-annotator reliability scores from one method. A missing score ranks
/// below every real score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    method: Method,
    scores: BTreeMap<String, Option<f64>>,
}

impl ScoreTable {
    /// Non-finite scores are stored as missing.
    pub fn from_scores<I>(method: Method, scores: I) -> Self
    where
        I: IntoIterator<Item = (String, Option<f64>)>,
    {
        let scores = scores
            .into_iter()
            .map(|(a, s)| {
                let s = s.filter(|v| {
                    let ok = v.is_finite();
                    if !ok {
                        warn!("{method}: non-finite score for `{a}` treated as missing");
                    }
                    ok
                });
                (a, s)
            })
            .collect();
        ScoreTable { method, scores }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, annotator: &str) -> Option<f64> {
        self.scores.get(annotator).copied().flatten()
    }

    /// `(annotator, score)` in annotator id order.
    pub fn scores(&self) -> impl Iterator<Item = (&str, Option<f64>)> {
        self.scores.iter().map(|(a, s)| (a.as_str(), *s))
    }

    /// Annotator ids from most to least spam-like: missing scores first,
    /// then ascending score, ties by id.
    pub fn ranked_ids(&self) -> Vec<String> {
        let mut ids: Vec<(&String, Option<f64>)> =
            self.scores.iter().map(|(a, s)| (a, *s)).collect();
        ids.sort_by(|(a, x), (b, y)| {
            let key = |s: &Option<f64>| s.unwrap_or(f64::NEG_INFINITY);
            x.is_some()
                .cmp(&y.is_some())
                .then(key(x).total_cmp(&key(y)))
                .then(a.cmp(b))
        });
        ids.into_iter().map(|(a, _)| a.clone()).collect()
    }
}

/// Independent uniform `[0, 1)` score per annotator, seeded per identifier.
pub fn random_scores(annotators: &[String], seed: u64) -> Result<ScoreTable> {
    if annotators.is_empty() {
        return Err(Error::Precondition("no annotators to score".into()));
    }
    Ok(ScoreTable::from_scores(
        Method::Random,
        annotators.iter().map(|a| {
            let s: f64 = rng_for(seed, &["random-score", a]).gen();
            (a.clone(), Some(s))
        }),
    ))
}

/// Removes the `k` lowest-ranked annotators (see [`ScoreTable::ranked_ids`]).
/// Annotators of the matrix absent from the table count as missing.
pub fn rank_and_remove(
    scores: &ScoreTable,
    k: usize,
    matrix: &AnnotationMatrix,
) -> Result<(BTreeSet<String>, AnnotationMatrix)> {
    let n = matrix.n_annotators();
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be below the annotator count {n}"
        )));
    }
    let full = ScoreTable::from_scores(
        scores.method(),
        matrix
            .annotators()
            .iter()
            .map(|a| (a.clone(), scores.score(a))),
    );
    let removed: BTreeSet<String> = full.ranked_ids().into_iter().take(k).collect();
    let filtered = matrix.retain_annotators(|a| !removed.contains(a));
    Ok((removed, filtered))
}

/// Settings for every scoring method. The MACE and random scorers draw their
/// seeds from `seed` and the method name, so `mace.seed` is ignored here.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoringConfig {
    pub seed: u64,
    pub mace: MaceConfig,
    pub crowdtruth: CrowdTruthConfig,
    pub kappa: KappaOptions,
}

/// Scores every annotator of `matrix` with `method`.
pub fn score_matrix(
    method: Method,
    matrix: &AnnotationMatrix,
    config: &ScoringConfig,
) -> Result<ScoreTable> {
    let seed = derive_seed(config.seed, method.name());
    match method {
        Method::Mace => {
            let cfg = MaceConfig {
                seed,
                ..config.mace.clone()
            };
            Ok(mace_scores(&mace_fit(matrix, &cfg)?))
        }
        Method::CrowdTruth => {
            let state = crowdtruth_fit(matrix, &config.crowdtruth)?;
            if !state.converged {
                warn!(
                    "CrowdTruth did not converge after {} iterations",
                    state.iterations_run
                );
            }
            Ok(crowdtruth_scores(&state))
        }
        Method::Kappa => mean_pairwise_kappa(matrix, config.kappa),
        Method::Random => random_scores(matrix.annotators(), seed),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub k: usize,
    pub frac_removed: f64,
    pub metrics: MetricRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Sorted by (method, k).
    pub rows: Vec<SweepRow>,
    /// Methods whose scoring failed, with the error message.
    pub errors: Vec<(Method, String)>,
    pub kappa_weighting: KappaWeighting,
}

impl SweepReport {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn row(&self, method: Method, k: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.method == method && r.k == k)
    }
}

fn sweep_method(
    method: Method,
    matrix: &AnnotationMatrix,
    roster: &AnnotatorRoster,
    k_max: usize,
    config: &ScoringConfig,
) -> Result<Vec<SweepRow>> {
    let scores = score_matrix(method, matrix, config)?;
    let n = matrix.n_annotators() as f64;
    (0..=k_max)
        .map(|k| {
            let (removed, filtered) = rank_and_remove(&scores, k, matrix)?;
            Ok(SweepRow {
                method,
                k,
                frac_removed: k as f64 / n,
                metrics: evaluate(matrix, &filtered, &removed, roster)?,
            })
        })
        .collect()
}

/// For each method, scores the full matrix once and evaluates removal of the
/// k lowest-scoring annotators for `k = 0..=k_max`. A method that fails is
/// left out of the rows and recorded in `errors`.
pub fn sweep(
    matrix: &AnnotationMatrix,
    roster: &AnnotatorRoster,
    methods: &[Method],
    k_max: usize,
    config: &ScoringConfig,
) -> Result<SweepReport> {
    roster.validate_against(matrix)?;
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods given".into()));
    }
    if k_max >= matrix.n_annotators() {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} must be below the annotator count {}",
            matrix.n_annotators()
        )));
    }
    let methods: Vec<Method> = methods.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let results: Vec<(Method, Result<Vec<SweepRow>>)> = methods
        .par_iter()
        .map(|&m| (m, sweep_method(m, matrix, roster, k_max, config)))
        .collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (m, result) in results {
        match result {
            Ok(r) => rows.extend(r),
            Err(e) => {
                warn!("{m}: scoring failed: {e}");
                errors.push((m, e.to_string()));
            }
        }
    }
    Ok(SweepReport {
        rows,
        errors,
        kappa_weighting: config.kappa.weighting,
    })
}

/// One point of the annotator-entropy vs score scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRow {
    pub method: Method,
    pub annotator_id: String,
    pub is_spam: bool,
    pub annotator_entropy: f64,
    pub score: Option<f64>,
}

/// One row per (table, annotator): gold spam flag, entropy of the annotator's
/// own labels, and the method's score.
pub fn scatter_rows(
    matrix: &AnnotationMatrix,
    roster: &AnnotatorRoster,
    tables: &[ScoreTable],
) -> Result<Vec<ScatterRow>> {
    roster.validate_against(matrix)?;
    let entropies = matrix
        .annotators()
        .iter()
        .map(|a| Ok((a.clone(), matrix.annotator_entropy(a)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(tables.len() * entropies.len());
    for t in tables {
        for (a, h) in &entropies {
            rows.push(ScatterRow {
                method: t.method(),
                annotator_id: a.clone(),
                is_spam: roster.is_spam(a) == Some(true),
                annotator_entropy: *h,
                score: t.score(a),
            });
        }
    }
    Ok(rows)
}
