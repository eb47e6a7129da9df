//! In-memory data model: label scales, the item × annotator label matrix,
//! gold spam rosters and per-item label distributions.
//!
//! Items and annotators are kept in lexicographic order of their identifiers,
//! so a matrix built from the same cells is identical regardless of the order
//! the cells arrived in. Labels are stored as indices into the [`LabelScale`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};

/// Ordered set of integer label values, e.g. `1..3` or `1..7`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelScale {
    values: Vec<i64>,
}

impl LabelScale {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidScale(format!(
                "need at least 2 values, got {}",
                values.len()
            )));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidScale(
                "values must be strictly increasing".into(),
            ));
        }
        if values.len() > u16::MAX as usize {
            return Err(Error::InvalidScale("too many values".into()));
        }
        Ok(LabelScale { values })
    }

    /// Contiguous scale `lo..=hi`.
    pub fn range(lo: i64, hi: i64) -> Result<Self> {
        if hi <= lo {
            return Err(Error::InvalidScale(format!("empty range {lo}..{hi}")));
        }
        Self::new((lo..=hi).collect())
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Cardinality K.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, value: i64) -> Option<usize> {
        self.values.binary_search(&value).ok()
    }

    pub fn value(&self, index: usize) -> i64 {
        self.values[index]
    }

    pub fn contains(&self, value: i64) -> bool {
        self.index_of(value).is_some()
    }

    fn is_contiguous(&self) -> bool {
        self.values.windows(2).all(|w| w[1] == w[0] + 1)
    }
}

impl fmt::Display for LabelScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_contiguous() {
            write!(f, "{}..{}", self.values[0], self.values[self.values.len() - 1])
        } else {
            let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
            write!(f, "{{{}}}", parts.join(","))
        }
    }
}

/// Parses `LO..HI` (inclusive on both ends).
impl FromStr for LabelScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| Error::InvalidScale(format!("expected LO..HI, got `{s}`")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidScale(format!("bad bound `{x}` in `{s}`")))
        };
        LabelScale::range(parse(lo)?, parse(hi)?)
    }
}

/// One observed label in long format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub item_id: String,
    pub annotator_id: String,
    pub label: i64,
}

impl AnnotationRecord {
    pub fn new(item_id: impl Into<String>, annotator_id: impl Into<String>, label: i64) -> Self {
        AnnotationRecord {
            item_id: item_id.into(),
            annotator_id: annotator_id.into(),
            label,
        }
    }
}

/// Item × annotator matrix of categorical labels. Cells may be missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationMatrix {
    scale: LabelScale,
    items: Vec<String>,
    annotators: Vec<String>,
    item_index: HashMap<String, usize>,
    annotator_index: HashMap<String, usize>,
    // item-major, label index into `scale`
    cells: Vec<Option<u16>>,
}

impl AnnotationMatrix {
    /// Builds a matrix from long-format records.
    ///
    /// Every label must belong to `scale` and each (item, annotator) pair may
    /// occur at most once.
    pub fn from_records<I>(scale: LabelScale, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = AnnotationRecord>,
    {
        let mut map: BTreeMap<(String, String), u16> = BTreeMap::new();
        for rec in records {
            let idx = scale.index_of(rec.label).ok_or_else(|| Error::LabelOutOfScale {
                label: rec.label,
                scale: scale.to_string(),
            })?;
            let key = (rec.item_id, rec.annotator_id);
            if map.contains_key(&key) {
                return Err(Error::DuplicateCell {
                    item: key.0,
                    annotator: key.1,
                });
            }
            map.insert(key, idx as u16);
        }
        if map.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let items: BTreeSet<&String> = map.keys().map(|(i, _)| i).collect();
        let annotators: BTreeSet<&String> = map.keys().map(|(_, a)| a).collect();
        let items: Vec<String> = items.into_iter().cloned().collect();
        let annotators: Vec<String> = annotators.into_iter().cloned().collect();
        let item_index = index_map(&items);
        let annotator_index = index_map(&annotators);
        let mut cells = vec![None; items.len() * annotators.len()];
        for ((item, annotator), label) in &map {
            let i = item_index[item];
            let j = annotator_index[annotator];
            cells[i * annotators.len() + j] = Some(*label);
        }
        Ok(AnnotationMatrix {
            scale,
            items,
            annotators,
            item_index,
            annotator_index,
            cells,
        })
    }

    /// Builds a matrix from a dense grid of label values (`None` = missing).
    /// Items are named `i000`, `i001`, ... and annotators `a000`, `a001`, ...
    pub fn from_dense(scale: LabelScale, rows: &[Vec<Option<i64>>]) -> Result<Self> {
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let item_digits = digits(rows.len());
        let ann_digits = digits(width);
        let mut records = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, label) in row.iter().enumerate() {
                if let Some(label) = label {
                    records.push(AnnotationRecord::new(
                        format!("i{i:0item_digits$}"),
                        format!("a{j:0ann_digits$}"),
                        *label,
                    ));
                }
            }
        }
        Self::from_records(scale, records)
    }

    pub fn scale(&self) -> &LabelScale {
        &self.scale
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_annotators(&self) -> usize {
        self.annotators.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn item_position(&self, item: &str) -> Option<usize> {
        self.item_index.get(item).copied()
    }

    pub fn annotator_position(&self, annotator: &str) -> Option<usize> {
        self.annotator_index.get(annotator).copied()
    }

    /// Label index (into the scale) of a cell, by positions.
    pub fn label_index_at(&self, item: usize, annotator: usize) -> Option<usize> {
        self.cells[item * self.annotators.len() + annotator].map(usize::from)
    }

    /// Label value of a cell, by positions.
    pub fn label_at(&self, item: usize, annotator: usize) -> Option<i64> {
        self.label_index_at(item, annotator)
            .map(|k| self.scale.value(k))
    }

    /// Label value of a cell, by identifiers.
    pub fn label(&self, item: &str, annotator: &str) -> Option<i64> {
        let i = self.item_position(item)?;
        let j = self.annotator_position(annotator)?;
        self.label_at(i, j)
    }

    /// `(annotator position, label index)` for every present cell of an item.
    pub fn item_cells(&self, item: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.annotators.len();
        self.cells[item * n..(item + 1) * n]
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.map(|k| (j, k as usize)))
    }

    /// `(item position, label index)` for every present cell of an annotator.
    pub fn annotator_cells(&self, annotator: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.annotators.len();
        (0..self.items.len())
            .filter_map(move |i| self.cells[i * n + annotator].map(|k| (i, k as usize)))
    }

    /// All cells in canonical (item, annotator) order.
    pub fn records(&self) -> impl Iterator<Item = AnnotationRecord> + '_ {
        (0..self.items.len()).flat_map(move |i| {
            self.item_cells(i).map(move |(j, k)| AnnotationRecord {
                item_id: self.items[i].clone(),
                annotator_id: self.annotators[j].clone(),
                label: self.scale.value(k),
            })
        })
    }

    /// Label counts per scale index for an item, restricted to annotators
    /// accepted by `keep`.
    pub fn item_counts(&self, item: usize, mut keep: impl FnMut(usize) -> bool) -> Vec<u64> {
        let mut counts = vec![0u64; self.scale.len()];
        for (j, k) in self.item_cells(item) {
            if keep(j) {
                counts[k] += 1;
            }
        }
        counts
    }

    /// Label distribution of `item` among the annotators in `subset`.
    pub fn item_distribution(
        &self,
        item: &str,
        subset: &BTreeSet<String>,
    ) -> Result<LabelDistribution> {
        let i = self
            .item_position(item)
            .ok_or_else(|| Error::UnknownItem(item.to_string()))?;
        let counts = self.item_counts(i, |j| subset.contains(&self.annotators[j]));
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::EmptyDistribution(item.to_string()));
        }
        LabelDistribution::from_counts(self.scale.clone(), &counts)
    }

    /// Most frequent label value over all cells; ties go to the smallest value.
    pub fn dataset_mode(&self) -> Result<i64> {
        let mut counts = vec![0u64; self.scale.len()];
        for k in self.cells.iter().flatten() {
            counts[*k as usize] += 1;
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::EmptyMatrix);
        }
        Ok(self.scale.value(argmax_first(&counts)))
    }

    /// Label counts over all of one annotator's cells.
    pub fn annotator_counts(&self, annotator: &str) -> Result<Vec<u64>> {
        let j = self
            .annotator_position(annotator)
            .ok_or_else(|| Error::UnknownAnnotator(annotator.to_string()))?;
        let mut counts = vec![0u64; self.scale.len()];
        for (_, k) in self.annotator_cells(j) {
            counts[k] += 1;
        }
        Ok(counts)
    }

    /// Shannon entropy (bits) of the annotator's own label histogram.
    pub fn annotator_entropy(&self, annotator: &str) -> Result<f64> {
        let counts = self.annotator_counts(annotator)?;
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::Precondition(format!(
                "annotator `{annotator}` has no annotations"
            )));
        }
        Ok(LabelDistribution::from_counts(self.scale.clone(), &counts)?.entropy_bits())
    }

    /// Copy of the matrix keeping only the annotators accepted by `keep`.
    /// Items left without any label are dropped.
    pub fn retain_annotators(&self, mut keep: impl FnMut(&str) -> bool) -> AnnotationMatrix {
        let kept: Vec<usize> = (0..self.annotators.len())
            .filter(|&j| keep(&self.annotators[j]))
            .collect();
        let n = self.annotators.len();
        let mut items = Vec::new();
        let mut cells = Vec::new();
        for (i, item) in self.items.iter().enumerate() {
            let row: Vec<Option<u16>> = kept.iter().map(|&j| self.cells[i * n + j]).collect();
            if row.iter().any(|c| c.is_some()) {
                items.push(item.clone());
                cells.extend(row);
            } else {
                warn!("item `{item}` has no labels left after filtering; dropped");
            }
        }
        let annotators: Vec<String> = kept.iter().map(|&j| self.annotators[j].clone()).collect();
        AnnotationMatrix {
            scale: self.scale.clone(),
            item_index: index_map(&items),
            annotator_index: index_map(&annotators),
            items,
            annotators,
            cells,
        }
    }

    /// Copy of the matrix with every present label passed through `f`, which
    /// receives `(item id, annotator id, label index)` and returns a new label
    /// index. Cell support is unchanged.
    pub(crate) fn map_labels(&self, mut f: impl FnMut(&str, &str, usize) -> usize) -> Self {
        let n = self.annotators.len();
        let mut out = self.clone();
        for (pos, cell) in out.cells.iter_mut().enumerate() {
            if let Some(k) = cell {
                let (i, j) = (pos / n, pos % n);
                let new = f(&self.items[i], &self.annotators[j], *k as usize);
                assert!(new < self.scale.len(), "label index out of scale");
                *k = new as u16;
            }
        }
        out
    }
}

fn index_map(ids: &[String]) -> HashMap<String, usize> {
    ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(3)
}

/// Index of the largest entry; the first one wins ties.
pub(crate) fn argmax_first<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Gold spam flags per annotator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatorRoster {
    entries: BTreeMap<String, bool>,
}

impl AnnotatorRoster {
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (id, spam) in entries {
            let id = id.into();
            if map.insert(id.clone(), spam).is_some() {
                return Err(Error::DuplicateAnnotator(id));
            }
        }
        Ok(AnnotatorRoster { entries: map })
    }

    pub fn is_spam(&self, annotator: &str) -> Option<bool> {
        self.entries.get(annotator).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn spam_count(&self) -> usize {
        self.entries.values().filter(|&&s| s).count()
    }

    pub fn spam_fraction(&self) -> f64 {
        self.spam_count() as f64 / self.len() as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn spammers(&self) -> BTreeSet<String> {
        self.iter().filter(|(_, s)| *s).map(|(a, _)| a.to_string()).collect()
    }

    pub fn non_spammers(&self) -> BTreeSet<String> {
        self.iter().filter(|(_, s)| !*s).map(|(a, _)| a.to_string()).collect()
    }

    /// Checks that the roster lists exactly the matrix's annotators.
    pub fn validate_against(&self, matrix: &AnnotationMatrix) -> Result<()> {
        if let Some(a) = matrix
            .annotators()
            .iter()
            .find(|a| !self.entries.contains_key(a.as_str()))
        {
            return Err(Error::RosterMismatch(format!(
                "annotator `{a}` is missing from the roster"
            )));
        }
        if self.len() != matrix.n_annotators() {
            let extra = self
                .entries
                .keys()
                .find(|a| matrix.annotator_position(a).is_none())
                .cloned()
                .unwrap_or_default();
            return Err(Error::RosterMismatch(format!(
                "roster annotator `{extra}` has no annotations"
            )));
        }
        Ok(())
    }
}

/// Normalized label histogram over a scale.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    scale: LabelScale,
    probabilities: Vec<f64>,
}

impl LabelDistribution {
    pub fn from_counts(scale: LabelScale, counts: &[u64]) -> Result<Self> {
        if counts.len() != scale.len() {
            return Err(Error::InvalidArgument(format!(
                "{} counts for a scale of {} values",
                counts.len(),
                scale.len()
            )));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("all counts are zero".into()));
        }
        let probabilities = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(LabelDistribution {
            scale,
            probabilities,
        })
    }

    /// Wraps non-negative weights, normalizing them to sum to one.
    pub fn from_weights(scale: LabelScale, weights: &[f64]) -> Result<Self> {
        if weights.len() != scale.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for a scale of {} values",
                weights.len(),
                scale.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("all weights are zero".into()));
        }
        Ok(LabelDistribution {
            scale,
            probabilities: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn scale(&self) -> &LabelScale {
        &self.scale
    }

    /// Scale value with the highest probability; ties go to the smaller value.
    pub fn argmax_value(&self) -> i64 {
        self.scale.value(argmax_first(&self.probabilities))
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Probability of a label value (0 for values outside the scale).
    pub fn probability(&self, value: i64) -> f64 {
        self.scale
            .index_of(value)
            .map_or(0.0, |k| self.probabilities[k])
    }

    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(&self.probabilities)
    }
}

/// Shannon entropy in bits; zero entries contribute nothing.
pub fn entropy_bits(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .fold(0.0, |h, &p| h - p * p.log2())
}
