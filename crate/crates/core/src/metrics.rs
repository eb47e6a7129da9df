//! Accuracy and label-variation metrics for a filtered annotation matrix.
//!
//! All per-item quantities are averaged over items in the matrix's canonical
//! item order. Entropy and KL-divergence are in bits.

use std::collections::BTreeSet;

use log::warn;

use crate::annotation::{entropy_bits, AnnotationMatrix, AnnotatorRoster};
use crate::error::{Error, Result};

/// Additive smoothing applied to every scale value before computing KL.
pub const KL_SMOOTHING: f64 = 0.5;

/// One evaluation of a filtered dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub accuracy: f64,
    pub stddev: f64,
    pub mean_entropy: f64,
    pub mae: f64,
    pub kl: f64,
}

/// Fraction of roster annotators classified correctly when `removed` is the
/// predicted spam set.
pub fn spam_accuracy(removed: &BTreeSet<String>, roster: &AnnotatorRoster) -> Result<f64> {
    if roster.is_empty() {
        return Err(Error::EmptyRoster);
    }
    if let Some(a) = removed.iter().find(|a| roster.is_spam(a).is_none()) {
        return Err(Error::UnknownAnnotator(a.clone()));
    }
    let correct = roster
        .iter()
        .filter(|(a, spam)| removed.contains(*a) == *spam)
        .count();
    Ok(correct as f64 / roster.len() as f64)
}

/// Population standard deviation of all label values.
pub fn dataset_stddev(matrix: &AnnotationMatrix) -> Result<f64> {
    let values: Vec<f64> = matrix.records().map(|r| r.label as f64).collect();
    if values.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt())
}

/// Mean over items of the entropy of each item's label distribution.
pub fn mean_instance_entropy(matrix: &AnnotationMatrix) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for i in 0..matrix.n_items() {
        let counts = matrix.item_counts(i, |_| true);
        let sum: u64 = counts.iter().sum();
        if sum == 0 {
            warn!("item `{}` has no labels; skipped", matrix.items()[i]);
            continue;
        }
        let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / sum as f64).collect();
        total += entropy_bits(&probs);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(total / n as f64)
}

/// `D_KL(p || q)` in bits. Terms with `p = 0` contribute nothing.
pub fn kl_divergence_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).log2())
        .sum()
}

fn smoothed(counts: &[u64], alpha: f64) -> Vec<f64> {
    let total = counts.iter().sum::<u64>() as f64 + alpha * counts.len() as f64;
    counts.iter().map(|&c| (c as f64 + alpha) / total).collect()
}

fn mean_label(matrix: &AnnotationMatrix, counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let sum: f64 = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * matrix.scale().value(k) as f64)
        .sum();
    sum / n as f64
}

/// Pairs of (reference counts, filtered counts) per item of `original`,
/// skipping items that are empty on either side.
fn paired_counts(
    filtered: &AnnotationMatrix,
    reference: &BTreeSet<String>,
    original: &AnnotationMatrix,
) -> Vec<(Vec<u64>, Vec<u64>)> {
    let mut out = Vec::with_capacity(original.n_items());
    for (i, item) in original.items().iter().enumerate() {
        let ref_counts = original.item_counts(i, |j| reference.contains(&original.annotators()[j]));
        if ref_counts.iter().all(|&c| c == 0) {
            warn!("item `{item}` has no reference labels; skipped");
            continue;
        }
        let Some(fi) = filtered.item_position(item) else {
            warn!("item `{item}` is empty after filtering; skipped");
            continue;
        };
        let filt_counts = filtered.item_counts(fi, |_| true);
        if filt_counts.iter().all(|&c| c == 0) {
            warn!("item `{item}` is empty after filtering; skipped");
            continue;
        }
        out.push((ref_counts, filt_counts));
    }
    out
}

/// Mean over items of `|mean label (filtered) - mean label (reference)|`.
pub fn mae_vs_reference(
    filtered: &AnnotationMatrix,
    reference: &BTreeSet<String>,
    original: &AnnotationMatrix,
) -> Result<f64> {
    let pairs = paired_counts(filtered, reference, original);
    if pairs.is_empty() {
        return Err(Error::Precondition("no items to compare".into()));
    }
    let total: f64 = pairs
        .iter()
        .map(|(r, f)| (mean_label(filtered, f) - mean_label(original, r)).abs())
        .sum();
    Ok(total / pairs.len() as f64)
}

/// Mean over items of `D_KL(P_reference || P_filtered)` with
/// [`KL_SMOOTHING`] added to every label count on both sides.
pub fn mean_kl_vs_reference(
    filtered: &AnnotationMatrix,
    reference: &BTreeSet<String>,
    original: &AnnotationMatrix,
) -> Result<f64> {
    let pairs = paired_counts(filtered, reference, original);
    if pairs.is_empty() {
        return Err(Error::Precondition("no items to compare".into()));
    }
    let total: f64 = pairs
        .iter()
        .map(|(r, f)| kl_divergence_bits(&smoothed(r, KL_SMOOTHING), &smoothed(f, KL_SMOOTHING)))
        .sum();
    Ok(total / pairs.len() as f64)
}

/// All five metrics for one filtered view. The reference population is the
/// gold non-spam annotators of `original`.
pub fn evaluate(
    original: &AnnotationMatrix,
    filtered: &AnnotationMatrix,
    removed: &BTreeSet<String>,
    roster: &AnnotatorRoster,
) -> Result<MetricRow> {
    let reference = roster.non_spammers();
    Ok(MetricRow {
        accuracy: spam_accuracy(removed, roster)?,
        stddev: dataset_stddev(filtered)?,
        mean_entropy: mean_instance_entropy(filtered)?,
        mae: mae_vs_reference(filtered, &reference, original)?,
        kl: mean_kl_vs_reference(filtered, &reference, original)?,
    })
}
