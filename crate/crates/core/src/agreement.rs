//! Cohen's kappa and mean pairwise kappa scoring.

use std::fmt;
use std::str::FromStr;

use crate::annotation::{AnnotationMatrix, LabelScale};
use crate::error::{Error, Result};
use crate::sweep::{Method, ScoreTable};

/// Agreement weights between label indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum KappaWeighting {
    /// Exact match only.
    #[default]
    None,
    /// `1 - |i - j| / (K - 1)`
    Linear,
    /// `1 - (i - j)^2 / (K - 1)^2`
    Quadratic,
}

impl KappaWeighting {
    pub fn name(self) -> &'static str {
        match self {
            KappaWeighting::None => "none",
            KappaWeighting::Linear => "linear",
            KappaWeighting::Quadratic => "quadratic",
        }
    }

    fn weight(self, i: usize, j: usize, k: usize) -> f64 {
        let d = i.abs_diff(j) as f64;
        let span = (k - 1) as f64;
        match self {
            KappaWeighting::None => f64::from(u8::from(i == j)),
            KappaWeighting::Linear => 1.0 - d / span,
            KappaWeighting::Quadratic => 1.0 - (d * d) / (span * span),
        }
    }
}

impl fmt::Display for KappaWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KappaWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(KappaWeighting::None),
            "linear" => Ok(KappaWeighting::Linear),
            "quadratic" => Ok(KappaWeighting::Quadratic),
            other => Err(Error::InvalidArgument(format!(
                "unknown kappa weighting `{other}` (expected none, linear or quadratic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KappaOptions {
    pub weighting: KappaWeighting,
}

/// Below this, `1 - p_e` is treated as zero and kappa is reported as 0.
const DEGENERATE_MARGINALS: f64 = 1e-12;

/// Kappa from a K × K confusion table of paired label indices.
pub(crate) fn kappa_from_confusion(confusion: &[u64], k: usize, weighting: KappaWeighting) -> f64 {
    let n: u64 = confusion.iter().sum();
    let n = n as f64;
    let mut row = vec![0.0; k];
    let mut col = vec![0.0; k];
    for x in 0..k {
        for y in 0..k {
            let c = confusion[x * k + y] as f64;
            row[x] += c;
            col[y] += c;
        }
    }
    let mut observed = 0.0;
    let mut expected = 0.0;
    for x in 0..k {
        for y in 0..k {
            let w = weighting.weight(x, y, k);
            observed += w * confusion[x * k + y] as f64 / n;
            expected += w * (row[x] / n) * (col[y] / n);
        }
    }
    if 1.0 - expected < DEGENERATE_MARGINALS {
        return 0.0;
    }
    (observed - expected) / (1.0 - expected)
}

/// Cohen's kappa between two aligned label sequences.
///
/// Two raters whose marginals leave no room for chance correction
/// (`p_e = 1`, e.g. both constant on the same label) get kappa 0.
pub fn cohens_kappa(
    a: &[i64],
    b: &[i64],
    scale: &LabelScale,
    options: KappaOptions,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::Precondition("kappa needs at least one paired label".into()));
    }
    let k = scale.len();
    let index = |v: i64| {
        scale.index_of(v).ok_or_else(|| Error::LabelOutOfScale {
            label: v,
            scale: scale.to_string(),
        })
    };
    let mut confusion = vec![0u64; k * k];
    for (&x, &y) in a.iter().zip(b) {
        confusion[index(x)? * k + index(y)?] += 1;
    }
    Ok(kappa_from_confusion(&confusion, k, options.weighting))
}

/// Scores each annotator by the mean of its kappa with every other annotator
/// it shares at least one item with. Annotators sharing items with nobody get
/// a missing score.
pub fn mean_pairwise_kappa(matrix: &AnnotationMatrix, options: KappaOptions) -> Result<ScoreTable> {
    let n = matrix.n_annotators();
    if n < 2 {
        return Err(Error::Precondition(
            "mean pairwise kappa needs at least 2 annotators".into(),
        ));
    }
    let k = matrix.scale().len();
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    let mut confusion = vec![0u64; k * k];
    for a in 0..n {
        for b in (a + 1)..n {
            confusion.iter_mut().for_each(|c| *c = 0);
            let mut shared = 0;
            for i in 0..matrix.n_items() {
                if let (Some(x), Some(y)) = (matrix.label_index_at(i, a), matrix.label_index_at(i, b)) {
                    confusion[x * k + y] += 1;
                    shared += 1;
                }
            }
            if shared == 0 {
                continue;
            }
            let kappa = kappa_from_confusion(&confusion, k, options.weighting);
            sums[a] += kappa;
            sums[b] += kappa;
            counts[a] += 1;
            counts[b] += 1;
        }
    }
    let scores = matrix
        .annotators()
        .iter()
        .enumerate()
        .map(|(j, id)| {
            let score = (counts[j] > 0).then(|| sums[j] / counts[j] as f64);
            (id.clone(), score)
        });
    Ok(ScoreTable::from_scores(Method::Kappa, scores))
}
