use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use annofilter::io::{parse_annotations, parse_roster, write_annotations, write_scatter, write_scores, write_sweep};
use annofilter::sweep::scatter_rows;
use annofilter::{
    score_matrix, synth_fixed, synth_random, AnnotationMatrix, AnnotatorRoster, CrowdTruthConfig,
    KappaOptions, MaceConfig, Method, ScoringConfig,
};
use anyhow::{Context, Result};
use log::{info, warn};

use crate::{InputArgs, MethodArgs, ScatterArgs, ScoreArgs, SweepArgs, SynthArgs, SynthMode};

fn load_matrix(io: &InputArgs) -> Result<AnnotationMatrix> {
    let file = File::open(&io.input).with_context(|| format!("opening {}", io.input.display()))?;
    parse_annotations(BufReader::new(file), io.scale.clone())
        .with_context(|| format!("reading {}", io.input.display()))
}

fn load_roster(path: &Path, matrix: &AnnotationMatrix) -> Result<AnnotatorRoster> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let roster =
        parse_roster(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    roster
        .validate_against(matrix)
        .with_context(|| format!("validating {}", path.display()))?;
    Ok(roster)
}

fn with_output<F>(io: &InputArgs, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> annofilter::Result<()>,
{
    match &io.output {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn scoring_config(args: &MethodArgs) -> ScoringConfig {
    ScoringConfig {
        seed: args.seed,
        mace: MaceConfig {
            restarts: args.mace_restarts,
            em_iterations: args.mace_iterations,
            ..MaceConfig::default()
        },
        crowdtruth: CrowdTruthConfig::default(),
        kappa: KappaOptions {
            weighting: args.kappa_weighting.into(),
        },
    }
}

fn dedup_methods(methods: &[Method]) -> Vec<Method> {
    let mut out: Vec<Method> = Vec::new();
    for &m in methods {
        if out.contains(&m) {
            warn!("method `{m}` listed more than once; using it once");
        } else {
            out.push(m);
        }
    }
    out
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let matrix = load_matrix(&args.io)?;
    let table = score_matrix(args.method, &matrix, &scoring_config(&args.methods))?;
    with_output(&args.io, |w| write_scores(&[table], w))
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let matrix = load_matrix(&args.io)?;
    let roster = load_roster(&args.roster, &matrix)?;
    let methods = dedup_methods(&args.methods);
    let config = scoring_config(&args.method_args);
    info!("kappa weighting: {}", config.kappa.weighting);
    let report = annofilter::sweep(&matrix, &roster, &methods, args.k_max, &config)?;
    for (m, e) in &report.errors {
        eprintln!("warning: {m} omitted: {e}");
    }
    with_output(&args.io, |w| write_sweep(&report, w))
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let matrix = load_matrix(&args.io)?;
    let roster = load_roster(&args.roster, &matrix)?;
    let out = match args.mode {
        SynthMode::Random => synth_random(&matrix, &roster, args.seed)?,
        SynthMode::Fixed => synth_fixed(&matrix, &roster)?,
    };
    with_output(&args.io, |w| write_annotations(&out, w))
}

pub fn scatter(args: ScatterArgs) -> Result<()> {
    let matrix = load_matrix(&args.io)?;
    let roster = load_roster(&args.roster, &matrix)?;
    let config = scoring_config(&args.method_args);
    let tables = dedup_methods(&args.methods)
        .into_iter()
        .map(|m| score_matrix(m, &matrix, &config))
        .collect::<annofilter::Result<Vec<_>>>()?;
    let rows = scatter_rows(&matrix, &roster, &tables)?;
    with_output(&args.io, |w| write_scatter(&rows, w))
}
