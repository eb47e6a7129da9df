//! Annotator reliability scoring for subjective labeling datasets, and tools
//! to measure what spam filtering does to label variation.
//!
//! Four scorers rank annotators: [MACE](mace) competence, [CrowdTruth](crowdtruth)
//! worker quality, [mean pairwise Cohen's kappa](agreement), and a seeded
//! [random](sweep::random_scores) baseline. Removing the `k` lowest-scoring
//! annotators and comparing the result with the gold non-spam population
//! ([`metrics`]) shows how accuracy at catching spammers trades off against
//! preserved disagreement. [`synth`] replaces gold spammers with random or
//! constant answers for controlled experiments, and [`simulate`] generates
//! populations to run them on.
//!
//! ```
//! use annofilter::{AnnotationMatrix, LabelScale, KappaOptions, mean_pairwise_kappa};
//!
//! let scale = LabelScale::range(1, 2)?;
//! let m = AnnotationMatrix::from_dense(
//!     scale,
//!     &[
//!         vec![Some(1), Some(1), Some(2)],
//!         vec![Some(2), Some(2), Some(1)],
//!     ],
//! )?;
//! let scores = mean_pairwise_kappa(&m, KappaOptions::default())?;
//! assert_eq!(scores.ranked_ids()[0], "a002");
//! # Ok::<(), annofilter::Error>(())
//! ```

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data-model.md")]
    mod data_model {}
    #[doc = include_str!("../../../book/src/mace.md")]
    mod mace {}
    #[doc = include_str!("../../../book/src/crowdtruth.md")]
    mod crowdtruth {}
    #[doc = include_str!("../../../book/src/kappa.md")]
    mod kappa {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

pub mod agreement;
pub mod annotation;
pub mod crowdtruth;
pub mod error;
pub mod io;
pub mod mace;
pub mod metrics;
pub mod seed;
pub mod simulate;
pub mod sweep;
pub mod synth;

pub use agreement::{cohens_kappa, mean_pairwise_kappa, KappaOptions, KappaWeighting};
pub use annotation::{
    entropy_bits, AnnotationMatrix, AnnotationRecord, AnnotatorRoster, LabelDistribution,
    LabelScale,
};
pub use crowdtruth::{crowdtruth_fit, crowdtruth_scores, CrowdTruthConfig, CrowdTruthState};
pub use error::{Error, Result};
pub use mace::{mace_distance_diagnostic, mace_fit, mace_scores, MaceConfig, MaceFit};
pub use metrics::MetricRow;
pub use sweep::{
    random_scores, rank_and_remove, score_matrix, sweep, Method, ScatterRow, ScoreTable,
    ScoringConfig, SweepReport, SweepRow,
};
pub use simulate::{single_mode_population, varied_population, PopulationSpec};
pub use synth::{synth_fixed, synth_random};
