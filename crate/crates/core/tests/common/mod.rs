//! Brute-force reference implementations and reusable checks.
//!
//! Everything here works on a flat list of raw cells with naive loops and
//! shares no code with the library beyond constructing inputs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use annofilter::mace::{marginal_log_likelihood, MaceParams};
use annofilter::{
    cohens_kappa, crowdtruth_fit, crowdtruth_scores, mace_fit, mace_scores, mean_pairwise_kappa,
    AnnotationMatrix, AnnotationRecord, CrowdTruthConfig, KappaOptions, LabelScale, MaceConfig,
};
use annofilter::crowdtruth::crowdtruth_step;
use annofilter::metrics::{dataset_stddev, mae_vs_reference, mean_instance_entropy, mean_kl_vs_reference};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

#[derive(Debug, Clone)]
pub struct Cell {
    pub item: String,
    pub annotator: String,
    pub value: i64,
}

#[derive(Debug, Clone)]
pub struct Case {
    pub k: i64,
    pub cells: Vec<Cell>,
    pub matrix: AnnotationMatrix,
}

/// Random sparse matrix, scale `1..=k`, every item and annotator with at
/// least one cell.
pub fn random_case(rng: &mut ChaCha8Rng, max_items: usize, max_annotators: usize, max_k: i64) -> Case {
    let n_items = rng.gen_range(1..=max_items);
    let n_ann = rng.gen_range(2..=max_annotators);
    let k = rng.gen_range(2..=max_k);
    let density = rng.gen_range(0.4..=1.0);
    let mut cells = Vec::new();
    for i in 0..n_items {
        for j in 0..n_ann {
            let forced = j == i % n_ann || i == j % n_items;
            if forced || rng.gen_bool(density) {
                cells.push(Cell {
                    item: format!("it{i}"),
                    annotator: format!("an{j}"),
                    value: rng.gen_range(1..=k),
                });
            }
        }
    }
    let matrix = matrix_of(k, &cells);
    Case { k, cells, matrix }
}

pub fn matrix_of(k: i64, cells: &[Cell]) -> AnnotationMatrix {
    AnnotationMatrix::from_records(
        LabelScale::range(1, k).unwrap(),
        cells
            .iter()
            .map(|c| AnnotationRecord::new(&c.item, &c.annotator, c.value)),
    )
    .unwrap()
}

fn items_of(cells: &[Cell]) -> BTreeSet<String> {
    cells.iter().map(|c| c.item.clone()).collect()
}

fn annotators_of(cells: &[Cell]) -> BTreeSet<String> {
    cells.iter().map(|c| c.annotator.clone()).collect()
}

pub fn naive_distribution(k: i64, cells: &[Cell], item: &str, who: &BTreeSet<String>) -> Option<Vec<f64>> {
    let values: Vec<i64> = cells
        .iter()
        .filter(|c| c.item == item && who.contains(&c.annotator))
        .map(|c| c.value)
        .collect();
    if values.is_empty() {
        return None;
    }
    Some(
        (1..=k)
            .map(|v| values.iter().filter(|&&x| x == v).count() as f64 / values.len() as f64)
            .collect(),
    )
}

pub fn naive_entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &x in p {
        if x > 0.0 {
            h -= x * x.log2();
        }
    }
    h
}

pub fn naive_mean_entropy(k: i64, cells: &[Cell]) -> f64 {
    let everyone = annotators_of(cells);
    let items = items_of(cells);
    let mut total = 0.0;
    for item in &items {
        total += naive_entropy(&naive_distribution(k, cells, item, &everyone).unwrap());
    }
    total / items.len() as f64
}

pub fn naive_stddev(cells: &[Cell]) -> f64 {
    let n = cells.len() as f64;
    let mut mean = 0.0;
    for c in cells {
        mean += c.value as f64;
    }
    mean /= n;
    let mut var = 0.0;
    for c in cells {
        var += (c.value as f64 - mean) * (c.value as f64 - mean);
    }
    (var / n).sqrt()
}

fn naive_mean(cells: &[Cell], item: &str, who: &BTreeSet<String>) -> Option<f64> {
    let xs: Vec<f64> = cells
        .iter()
        .filter(|c| c.item == item && who.contains(&c.annotator))
        .map(|c| c.value as f64)
        .collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Items where either side is empty are skipped; `None` if nothing is left.
pub fn naive_mae(cells: &[Cell], reference: &BTreeSet<String>, kept: &BTreeSet<String>) -> Option<f64> {
    let mut total = 0.0;
    let mut n = 0;
    for item in items_of(cells) {
        if let (Some(r), Some(f)) = (naive_mean(cells, &item, reference), naive_mean(cells, &item, kept)) {
            total += (f - r).abs();
            n += 1;
        }
    }
    (n > 0).then(|| total / n as f64)
}

pub fn naive_kl(k: i64, cells: &[Cell], reference: &BTreeSet<String>, kept: &BTreeSet<String>) -> Option<f64> {
    let smoothed = |who: &BTreeSet<String>, item: &str| -> Option<Vec<f64>> {
        let mut counts = vec![0.0; k as usize];
        let mut any = false;
        for c in cells {
            if c.item == item && who.contains(&c.annotator) {
                counts[(c.value - 1) as usize] += 1.0;
                any = true;
            }
        }
        if !any {
            return None;
        }
        let total: f64 = counts.iter().sum::<f64>() + 0.5 * k as f64;
        Some(counts.iter().map(|c| (c + 0.5) / total).collect())
    };
    let mut total = 0.0;
    let mut n = 0;
    for item in items_of(cells) {
        if let (Some(p), Some(q)) = (smoothed(reference, &item), smoothed(kept, &item)) {
            let mut d = 0.0;
            for t in 0..p.len() {
                d += p[t] * (p[t] / q[t]).log2();
            }
            total += d;
            n += 1;
        }
    }
    (n > 0).then(|| total / n as f64)
}

/// Unweighted kappa straight from the definition.
pub fn naive_kappa(a: &[i64], b: &[i64], k: i64) -> f64 {
    let n = a.len() as f64;
    let mut agree = 0.0;
    for t in 0..a.len() {
        if a[t] == b[t] {
            agree += 1.0;
        }
    }
    let p_o = agree / n;
    let mut p_e = 0.0;
    for v in 1..=k {
        let ca = a.iter().filter(|&&x| x == v).count() as f64;
        let cb = b.iter().filter(|&&x| x == v).count() as f64;
        p_e += (ca / n) * (cb / n);
    }
    if 1.0 - p_e < 1e-12 {
        0.0
    } else {
        (p_o - p_e) / (1.0 - p_e)
    }
}

pub fn naive_mean_pairwise_kappa(k: i64, cells: &[Cell]) -> BTreeMap<String, Option<f64>> {
    let lookup: BTreeMap<(String, String), i64> = cells
        .iter()
        .map(|c| ((c.annotator.clone(), c.item.clone()), c.value))
        .collect();
    let annotators = annotators_of(cells);
    let items = items_of(cells);
    let mut out = BTreeMap::new();
    for a in &annotators {
        let mut sum = 0.0;
        let mut n = 0;
        for b in &annotators {
            if a == b {
                continue;
            }
            let mut xa = Vec::new();
            let mut xb = Vec::new();
            for it in &items {
                if let (Some(&la), Some(&lb)) = (
                    lookup.get(&(a.clone(), it.clone())),
                    lookup.get(&(b.clone(), it.clone())),
                ) {
                    xa.push(la);
                    xb.push(lb);
                }
            }
            if !xa.is_empty() {
                sum += naive_kappa(&xa, &xb, k);
                n += 1;
            }
        }
        out.insert(a.clone(), (n > 0).then(|| sum / n as f64));
    }
    out
}

/// Sums the full joint over every true-label assignment and every spam
/// indicator configuration.
pub fn enumerated_log_likelihood(k: usize, cells: &[(usize, usize, usize)], n_items: usize, params: &MaceParams) -> f64 {
    let mut total = 0.0;
    for truth_code in 0..k.pow(n_items as u32) {
        let truth: Vec<usize> = (0..n_items).map(|i| truth_code / k.pow(i as u32) % k).collect();
        for spam_code in 0..(1usize << cells.len()) {
            let mut p = (1.0 / k as f64).powi(n_items as i32);
            for (c, &(i, j, a)) in cells.iter().enumerate() {
                let theta = params.competence[j];
                if spam_code >> c & 1 == 1 {
                    p *= (1.0 - theta) * params.spam_strategy[j][a];
                } else if a == truth[i] {
                    p *= theta;
                } else {
                    p = 0.0;
                }
            }
            total += p;
        }
    }
    total.ln()
}

pub fn random_params(rng: &mut ChaCha8Rng, n_annotators: usize, k: usize) -> MaceParams {
    MaceParams {
        competence: (0..n_annotators).map(|_| rng.gen_range(0.01..0.99)).collect(),
        spam_strategy: (0..n_annotators)
            .map(|_| {
                let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|x| x / s).collect()
            })
            .collect(),
    }
}

fn max_abs(worst: &mut f64, a: f64, b: f64) {
    *worst = worst.max((a - b).abs());
}

/// Library metrics against the naive versions on `n` random matrices.
pub fn check_metric_oracles(n: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for _ in 0..n {
        let case = random_case(&mut rng, 10, 8, 7);
        let (k, cells, m) = (case.k, &case.cells, &case.matrix);
        let everyone = annotators_of(cells);

        for item in items_of(cells) {
            let mut who = everyone.clone();
            who.retain(|_| rng.gen_bool(0.7));
            let got = m.item_distribution(&item, &who).ok().map(|d| d.probabilities().to_vec());
            let want = naive_distribution(k, cells, &item, &who);
            match (got, want) {
                (Some(g), Some(w)) => g.iter().zip(&w).for_each(|(x, y)| max_abs(&mut worst, *x, *y)),
                (None, None) => {}
                (g, w) => return Err(format!("item distribution presence differs: {g:?} vs {w:?}")),
            }
        }
        max_abs(&mut worst, mean_instance_entropy(m).unwrap(), naive_mean_entropy(k, cells));
        max_abs(&mut worst, dataset_stddev(m).unwrap(), naive_stddev(cells));

        let reference: BTreeSet<String> = everyone.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
        let kept: BTreeSet<String> = everyone.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
        if !reference.is_empty() && !kept.is_empty() {
            let filtered = m.retain_annotators(|a| kept.contains(a));
            let mae = mae_vs_reference(&filtered, &reference, m).ok();
            let kl = mean_kl_vs_reference(&filtered, &reference, m).ok();
            match (mae, naive_mae(cells, &reference, &kept)) {
                (Some(g), Some(w)) => max_abs(&mut worst, g, w),
                (None, None) => {}
                (g, w) => return Err(format!("mae presence differs: {g:?} vs {w:?}")),
            }
            match (kl, naive_kl(k, cells, &reference, &kept)) {
                (Some(g), Some(w)) => max_abs(&mut worst, g, w),
                (None, None) => {}
                (g, w) => return Err(format!("kl presence differs: {g:?} vs {w:?}")),
            }
        }

        let got = mean_pairwise_kappa(m, KappaOptions::default()).unwrap();
        for (a, want) in naive_mean_pairwise_kappa(k, cells) {
            match (got.score(&a), want) {
                (Some(g), Some(w)) => max_abs(&mut worst, g, w),
                (None, None) => {}
                (g, w) => return Err(format!("kappa presence differs for {a}: {g:?} vs {w:?}")),
            }
        }
        let len = rng.gen_range(1..=12);
        let a: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=k)).collect();
        let b: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=k)).collect();
        let scale = LabelScale::range(1, k).unwrap();
        max_abs(&mut worst, cohens_kappa(&a, &b, &scale, KappaOptions::default()).unwrap(), naive_kappa(&a, &b, k));
        compared += 1;
    }
    if worst <= 1e-9 {
        Ok(format!("{compared} matrices, max abs difference {worst:.1e}"))
    } else {
        Err(format!("max abs difference {worst:e} exceeds 1e-9"))
    }
}

pub fn check_kappa_golden() -> Check {
    let scale = LabelScale::range(1, 2).unwrap();
    let opts = KappaOptions::default();
    let cases: [(&[i64], &[i64], f64); 3] = [
        (&[1, 1, 2, 2], &[1, 1, 2, 2], 1.0),
        (&[1, 2, 1, 2], &[2, 1, 2, 1], -1.0),
        (&[1, 1, 1, 2], &[1, 1, 2, 2], 0.5),
    ];
    let mut got = Vec::new();
    for (a, b, want) in cases {
        let k = cohens_kappa(a, b, &scale, opts).map_err(|e| e.to_string())?;
        if k != want {
            return Err(format!("kappa({a:?}, {b:?}) = {k}, expected {want}"));
        }
        got.push(k);
    }
    Ok(format!("{got:?}"))
}

/// Every EM step must not lower the objective it ascends: the plain
/// marginal log-likelihood when smoothing is zero, and the log-likelihood
/// plus the smoothing log-prior otherwise.
pub fn check_mace_monotone(n: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_plain = 0.0f64;
    let mut worst_smoothed = 0.0f64;
    let mut restarts = 0;
    for c in 0..n {
        let case = random_case(&mut rng, 10, 8, 5);
        for r in 0..3u64 {
            let base = MaceConfig {
                restarts: 1,
                em_iterations: 50,
                smoothing: Some(0.0),
                seed: seed ^ (c as u64) << 8 ^ r,
            };
            let plain = mace_fit(&case.matrix, &base).map_err(|e| e.to_string())?;
            for w in plain.log_likelihood_trace().windows(2) {
                worst_plain = worst_plain.min(w[1] - w[0]);
            }
            let smoothed = mace_fit(&case.matrix, &MaceConfig { smoothing: None, ..base })
                .map_err(|e| e.to_string())?;
            for w in smoothed.objective_trace().windows(2) {
                worst_smoothed = worst_smoothed.min(w[1] - w[0]);
            }
            restarts += 2;
        }
    }
    if worst_plain >= -1e-8 && worst_smoothed >= -1e-8 {
        Ok(format!(
            "{n} matrices, {restarts} restarts; largest drop {:.1e} (log-likelihood, no smoothing), {:.1e} (penalized, default smoothing)",
            (-worst_plain).max(0.0),
            (-worst_smoothed).max(0.0)
        ))
    } else {
        Err(format!(
            "objective decreased: {worst_plain:e} (no smoothing), {worst_smoothed:e} (default smoothing)"
        ))
    }
}

pub fn check_mace_enumeration(n: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let case = random_case(&mut rng, 3, 3, 3);
        let m = &case.matrix;
        let k = m.scale().len();
        let params = random_params(&mut rng, m.n_annotators(), k);
        let mut cells = Vec::new();
        for i in 0..m.n_items() {
            for (j, a) in m.item_cells(i) {
                cells.push((i, j, a));
            }
        }
        let want = enumerated_log_likelihood(k, &cells, m.n_items(), &params);
        max_abs(&mut worst, marginal_log_likelihood(m, &params), want);
    }
    if worst <= 1e-10 {
        Ok(format!("{n} matrices, max abs difference {worst:.1e}"))
    } else {
        Err(format!("max abs difference {worst:e} exceeds 1e-10"))
    }
}

/// 9 annotators copying a planted truth and one answering uniformly at
/// random, 50 items, 3 labels.
pub fn planted_matrix(seed: u64) -> AnnotationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<Option<i64>>> = (0..50)
        .map(|_| {
            let t = rng.gen_range(1..=3);
            let mut row = vec![Some(t); 9];
            row.push(Some(rng.gen_range(1..=3)));
            row
        })
        .collect();
    AnnotationMatrix::from_dense(LabelScale::range(1, 3).unwrap(), &rows).unwrap()
}

pub fn check_mace_planted(seeds: u64) -> Check {
    let mut hits = 0;
    for seed in 0..seeds {
        let m = planted_matrix(seed);
        let fit = mace_fit(&m, &MaceConfig::with_seed(seed)).map_err(|e| e.to_string())?;
        let scores = mace_scores(&fit);
        let random = scores.score("a009").unwrap();
        if scores
            .scores()
            .filter(|(a, _)| *a != "a009")
            .all(|(_, s)| s.unwrap() > random)
        {
            hits += 1;
        }
    }
    if hits == seeds {
        Ok(format!("{hits}/{seeds} seeds"))
    } else {
        Err(format!("random annotator strictly lowest in only {hits}/{seeds} seeds"))
    }
}

/// Two binary units; A and B agree everywhere, C disagrees with both.
pub fn disagreeing_c() -> AnnotationMatrix {
    AnnotationMatrix::from_records(
        LabelScale::range(1, 2).unwrap(),
        [
            ("u1", "A", 1),
            ("u1", "B", 1),
            ("u1", "C", 2),
            ("u2", "A", 2),
            ("u2", "B", 2),
            ("u2", "C", 1),
        ]
        .map(|(u, w, l)| AnnotationRecord::new(u, w, l)),
    )
    .unwrap()
}

pub fn check_crowdtruth(n_random: usize, seed: u64) -> Check {
    let config = CrowdTruthConfig::default();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_residual = 0.0f64;
    for _ in 0..n_random {
        let case = random_case(&mut rng, 10, 8, 4);
        // Every unit needs two workers.
        let dense: Vec<Vec<Option<i64>>> = (0..case.matrix.n_items())
            .map(|i| (0..case.matrix.n_annotators()).map(|j| case.matrix.label_at(i, j).or(Some(1))).collect())
            .collect();
        let m = AnnotationMatrix::from_dense(case.matrix.scale().clone(), &dense).unwrap();
        let state = crowdtruth_fit(&m, &config).map_err(|e| e.to_string())?;
        if state.converged {
            worst_residual = worst_residual.max(crowdtruth_step(&m, &state).max_change(&state));
        }
        for w in 0..state.wqs.len() {
            if (state.wqs[w] - state.wwa[w] * state.wua[w]).abs() > 1e-12 {
                return Err(format!("WQS != WWA * WUA for worker {w}"));
            }
        }
        let in_unit = |x: &f64| (0.0..=1.0).contains(x);
        if !state.wqs.iter().chain(&state.wwa).chain(&state.wua).chain(&state.uqs).all(in_unit) {
            return Err("score outside [0, 1]".into());
        }
    }
    if worst_residual > config.tolerance {
        return Err(format!("fixed-point residual {worst_residual:e} above tolerance"));
    }

    let identical = AnnotationMatrix::from_dense(
        LabelScale::range(1, 3).unwrap(),
        &[vec![Some(1); 4], vec![Some(3); 4], vec![Some(2); 4]],
    )
    .unwrap();
    let state = crowdtruth_fit(&identical, &config).map_err(|e| e.to_string())?;
    if !(state.converged
        && state.iterations_run == 1
        && state.wqs.iter().chain(&state.uqs).all(|&x| x == 1.0))
    {
        return Err(format!("identical workers: {state:?}"));
    }

    let m = disagreeing_c();
    let first = crowdtruth_fit(&m, &CrowdTruthConfig { max_iterations: 1, ..config })
        .map_err(|e| e.to_string())?;
    let half_sqrt = 0.5_f64.sqrt();
    let expected_wqs = [0.5 * half_sqrt, 0.5 * half_sqrt, 0.0];
    let expected_wwa = [0.5, 0.5, 0.0];
    let expected_wua = [half_sqrt, half_sqrt, 0.0];
    let mut worst = 0.0f64;
    for w in 0..3 {
        max_abs(&mut worst, first.wqs[w], expected_wqs[w]);
        max_abs(&mut worst, first.wwa[w], expected_wwa[w]);
        max_abs(&mut worst, first.wua[w], expected_wua[w]);
    }
    for u in 0..2 {
        max_abs(&mut worst, first.uqs[u], 1.0 / 3.0);
    }
    if worst > 1e-9 {
        return Err(format!("first iteration off by {worst:e}: {first:?}"));
    }
    let full = crowdtruth_fit(&m, &config).map_err(|e| e.to_string())?;
    let ranked = crowdtruth_scores(&full).ranked_ids();
    if ranked[0] != "C" {
        return Err(format!("C not ranked lowest: {ranked:?}"));
    }
    Ok(format!(
        "{n_random} random fits, residual {worst_residual:.1e}; identical workers exact; C lowest, first iteration within {worst:.1e}"
    ))
}
