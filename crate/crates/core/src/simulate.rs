//! Synthetic annotation populations for experiments.
//!
//! Both generators produce complete matrices (every annotator labels every
//! item) and a roster whose first `n_spam` annotators, by id order, are gold
//! spammers. Spammers are generated like everyone else; use
//! [`synth_random`](crate::synth_random) or [`synth_fixed`](crate::synth_fixed)
//! to give them spam behavior.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::annotation::{AnnotationMatrix, AnnotationRecord, AnnotatorRoster, LabelScale};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub n_items: usize,
    pub n_annotators: usize,
    pub n_spam: usize,
    /// Scale is `1..=k`.
    pub k: usize,
    /// Lower bound of the per-annotator probability of following the item
    /// distribution (varied populations only).
    pub reliability_floor: f64,
    pub seed: u64,
}

impl PopulationSpec {
    fn check(&self) -> Result<LabelScale> {
        if self.n_spam > self.n_annotators
            || self.n_items == 0
            || self.n_annotators < 2
            || !(0.0..=1.0).contains(&self.reliability_floor)
        {
            return Err(Error::InvalidArgument(format!("bad population spec {self:?}")));
        }
        LabelScale::range(1, self.k as i64)
    }

    fn annotator_id(&self, j: usize) -> String {
        let width = (self.n_annotators - 1).to_string().len().max(3);
        format!("w{j:0width$}")
    }

    fn item_id(&self, i: usize) -> String {
        let width = (self.n_items - 1).to_string().len().max(3);
        format!("q{i:0width$}")
    }

    fn build(
        &self,
        scale: LabelScale,
        mut label: impl FnMut(usize, usize) -> usize,
    ) -> Result<(AnnotationMatrix, AnnotatorRoster)> {
        let mut records = Vec::with_capacity(self.n_items * self.n_annotators);
        for i in 0..self.n_items {
            for j in 0..self.n_annotators {
                let k = label(i, j);
                records.push(AnnotationRecord::new(
                    self.item_id(i),
                    self.annotator_id(j),
                    scale.value(k),
                ));
            }
        }
        let matrix = AnnotationMatrix::from_records(scale, records)?;
        let roster = AnnotatorRoster::from_entries(
            (0..self.n_annotators).map(|j| (self.annotator_id(j), j < self.n_spam)),
        )?;
        Ok((matrix, roster))
    }
}

/// Items with their own label distributions and modes spread over the whole
/// scale. Each item puts between 45% and 80% of its mass on its mode and
/// spreads the rest evenly. Each annotator follows the item distribution
/// with a personal probability drawn from `[reliability_floor, 1)` and
/// otherwise answers uniformly at random. A low floor yields genuine
/// annotators that look close to random.
pub fn varied_population(spec: &PopulationSpec) -> Result<(AnnotationMatrix, AnnotatorRoster)> {
    let scale = spec.check()?;
    let k = spec.k;
    let mut rng = rng_for(spec.seed, &["varied-population"]);
    let items: Vec<WeightedIndex<f64>> = (0..spec.n_items)
        .map(|i| {
            let mode = i % k;
            let peak = rng.gen_range(0.45..0.8);
            let weights: Vec<f64> = (0..k)
                .map(|t| if t == mode { peak } else { (1.0 - peak) / (k - 1) as f64 })
                .collect();
            WeightedIndex::new(weights).expect("positive weights")
        })
        .collect();
    let floor = spec.reliability_floor;
    let reliability: Vec<f64> = (0..spec.n_annotators)
        .map(|_| floor + (1.0 - floor) * rng.gen::<f64>())
        .collect();
    spec.build(scale, |i, j| {
        if rng.gen::<f64>() < reliability[j] {
            items[i].sample(&mut rng)
        } else {
            rng.gen_range(0..k)
        }
    })
}

/// Survey-like data: every item's labels follow a discretized normal
/// distribution around the same central value, so the whole dataset has one
/// dominant mode. Item means jitter slightly around the center.
pub fn single_mode_population(
    spec: &PopulationSpec,
) -> Result<(AnnotationMatrix, AnnotatorRoster)> {
    let scale = spec.check()?;
    let k = spec.k;
    let center = (k - 1) as f64 / 2.0;
    let sd = (k as f64 / 4.0).max(0.6);
    let mut rng = rng_for(spec.seed, &["single-mode-population"]);
    let items: Vec<WeightedIndex<f64>> = (0..spec.n_items)
        .map(|_| {
            let mean = center + rng.gen_range(-0.3..0.3);
            let weights: Vec<f64> = (0..k)
                .map(|t| {
                    let z = (t as f64 - mean) / sd;
                    (-0.5 * z * z).exp()
                })
                .collect();
            WeightedIndex::new(weights).expect("positive weights")
        })
        .collect();
    spec.build(scale, |i, _| items[i].sample(&mut rng))
}
