//! Synthetic spam: overwrite the labels of gold spammers in place.

use log::warn;
use rand::Rng;

use crate::annotation::{AnnotationMatrix, AnnotatorRoster};
use crate::error::Result;
use crate::seed::rng_for;

/// Every gold-spammer cell becomes an independent uniform draw over the
/// scale. Each draw is seeded from `(seed, item, annotator)`.
pub fn synth_random(
    matrix: &AnnotationMatrix,
    roster: &AnnotatorRoster,
    seed: u64,
) -> Result<AnnotationMatrix> {
    roster.validate_against(matrix)?;
    if roster.spam_count() == 0 {
        warn!("roster has no spammers; matrix left unchanged");
        return Ok(matrix.clone());
    }
    let k = matrix.scale().len();
    Ok(matrix.map_labels(|item, annotator, label| {
        if roster.is_spam(annotator) == Some(true) {
            rng_for(seed, &["synth-random", item, annotator]).gen_range(0..k)
        } else {
            label
        }
    }))
}

/// Every gold-spammer cell becomes the mode of the input matrix.
pub fn synth_fixed(matrix: &AnnotationMatrix, roster: &AnnotatorRoster) -> Result<AnnotationMatrix> {
    roster.validate_against(matrix)?;
    if roster.spam_count() == 0 {
        warn!("roster has no spammers; matrix left unchanged");
        return Ok(matrix.clone());
    }
    let mode = matrix.dataset_mode()?;
    let mode_index = matrix
        .scale()
        .index_of(mode)
        .expect("mode is a scale value");
    Ok(matrix.map_labels(|_, annotator, label| {
        if roster.is_spam(annotator) == Some(true) {
            mode_index
        } else {
            label
        }
    }))
}
