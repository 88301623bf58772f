//! Command-line surface: validate, eval-run, simulate, pareto, report.
//!
//! Exit codes: 0 success, 1 validation/processing failure, 2 usage error
//! (handled by the argument parser).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::evidence::{
    parse_mapping, parse_qrels, parse_review_json, parse_review_xml, parse_run, DataKind, Qrels,
    RunRanking, StudyPublicationMap,
};
use crate::experiments::{
    evaluate_run, gold_baseline, max_with_qrels_baseline, pareto_frontier, pareto_points,
    simulate_removals, Corpus, MeasureColumn, CorrelationReport, RunEvaluation, SimulationSpec,
    DEFAULT_CUTOFFS,
};
use crate::experiments::simulate::{DEFAULT_BASE_SEED, DEFAULT_N_SEEDS, DEFAULT_REMOVAL_COUNTS};
use crate::meta::{confidence_interval, PooledOutcome, ToleranceConfig};
use crate::report::{
    aggregates_csv, atomic_write, comparison_csv, correlations_csv, outcome_rows_csv, pareto_csv,
    pareto_json, render_box_svg, render_forest_svg, render_pareto_svg, run_evaluation_json,
    simulation_json, simulation_matrix_csv, simulation_seeds_csv, topics_csv, BoxPlotSeries,
    ForestRow,
};

#[derive(Parser)]
#[command(
    name = "outcome-eval",
    about = "Outcome-level evaluation of systematic-review screening runs",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse all inputs and report corpus statistics.
    Validate(ValidateArgs),
    /// Evaluate ranked runs at cutoffs; aspects, IR measures, comparisons.
    EvalRun(EvalRunArgs),
    /// Random-removal simulation over the corpus.
    Simulate(SimulateArgs),
    /// Pareto-frontier analysis over evaluated runs.
    Pareto(ParetoArgs),
    /// Pooled-outcome report with forest plots.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Abstract,
    Fulltext,
}

impl Level {
    fn qrels_file(self) -> &'static str {
        match self {
            Level::Abstract => "abstract.qrels",
            Level::Fulltext => "fulltext.qrels",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Directory of review files (.xml, .rm5 or .json).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Study/publication mapping CSV.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Qrels file, or a directory holding <level>.qrels.
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fulltext")]
    pub level: Level,
}

#[derive(Args)]
pub struct EvalRunArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub mapping: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    /// Run files; may be given several times.
    #[arg(long = "run", required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CUTOFFS.to_vec())]
    pub cutoffs: Vec<u32>,
    #[arg(long, value_enum, default_value = "fulltext")]
    pub level: Level,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Optional x-axis clamp for the box plot SVG.
    #[arg(long)]
    pub axis_clamp: Option<f64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub mapping: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_REMOVAL_COUNTS.to_vec())]
    pub removals: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_N_SEEDS)]
    pub seeds: usize,
    #[arg(long, default_value_t = DEFAULT_BASE_SEED)]
    pub base_seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args)]
pub struct ParetoArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub mapping: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(long = "run", required = true)]
    pub runs: Vec<PathBuf>,
    /// Evaluation cutoff in percent.
    #[arg(long, default_value_t = 5)]
    pub cutoff: u32,
    #[arg(long, value_enum, default_value = "fulltext")]
    pub level: Level,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::EvalRun(args) => cmd_eval_run(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Pareto(args) => cmd_pareto(args),
        Command::Report(args) => cmd_report(args),
    }
}

struct LoadedCorpus {
    corpus: Corpus,
    n_dichotomous: usize,
    n_continuous: usize,
    n_skipped: usize,
}

fn load_corpus(dir: &Path) -> Result<LoadedCorpus> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("xml") | Some("rm5") | Some("json")
            )
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Validation(format!(
            "no reviews found in {}",
            dir.display()
        )));
    }
    let mut reviews = Vec::new();
    for path in &paths {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let review = if path.extension().and_then(|e| e.to_str()) == Some("json") {
            parse_review_json(&bytes)
        } else {
            parse_review_xml(&bytes)
        }
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        reviews.push(review);
    }
    let mut n_dichotomous = 0;
    let mut n_continuous = 0;
    let mut n_skipped = 0;
    for review in &reviews {
        n_skipped += review.skipped_outcomes.len();
        for (_, outcome) in review.outcomes() {
            match outcome.data_kind {
                DataKind::Dichotomous => n_dichotomous += 1,
                DataKind::Continuous => n_continuous += 1,
            }
        }
    }
    Ok(LoadedCorpus {
        corpus: Corpus::new(reviews),
        n_dichotomous,
        n_continuous,
        n_skipped,
    })
}

fn load_mapping(path: &Path) -> Result<StudyPublicationMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let parsed = parse_mapping(&bytes)?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(parsed.map)
}

fn load_qrels(path: &Path, level: Level) -> Result<Qrels> {
    let path = if path.is_dir() {
        path.join(level.qrels_file())
    } else {
        path.to_path_buf()
    };
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    parse_qrels(&bytes)
}

fn load_runs(paths: &[PathBuf]) -> Result<Vec<RunRanking>> {
    paths
        .iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let mut run = parse_run(&bytes)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            if run.tag.is_empty() {
                run.tag = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("run")
                    .to_owned();
            }
            Ok(run)
        })
        .collect()
}

/// Topic document collections for baseline construction: judged
/// publications plus every mapped publication of the review.
fn collections(
    corpus: &Corpus,
    qrels: &Qrels,
    map: &StudyPublicationMap,
) -> BTreeMap<String, BTreeSet<String>> {
    corpus
        .reviews()
        .iter()
        .map(|review| {
            let topic = review.review_id.clone();
            let mut docs: BTreeSet<String> = qrels
                .judged_docs(&topic)
                .into_iter()
                .map(str::to_owned)
                .collect();
            docs.extend(
                map.publications_for_review(&topic)
                    .into_iter()
                    .map(str::to_owned),
            );
            (topic, docs)
        })
        .collect()
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn sanitize_tag(tag: &str) -> String {
    tag.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let loaded = load_corpus(&args.corpus)?;
    let corpus = &loaded.corpus;
    let n_outcomes = loaded.n_dichotomous + loaded.n_continuous;
    println!("reviews: {}", corpus.reviews().len());
    println!(
        "outcomes: {} (dichotomous {}, continuous {})",
        n_outcomes, loaded.n_dichotomous, loaded.n_continuous
    );
    println!("skipped outcomes (unsupported type): {}", loaded.n_skipped);
    println!(
        "excluded outcomes (original not estimable): {}",
        corpus.excluded_outcomes.len()
    );
    println!("evaluation universe: {} outcomes", corpus.n_outcomes());

    if let Some(mapping_path) = &args.mapping {
        let map = load_mapping(mapping_path)?;
        let mut total_studies = 0usize;
        let mut mapped_studies = 0usize;
        for review in corpus.reviews() {
            for study in review.study_ids() {
                total_studies += 1;
                if !map.publications_of(&review.review_id, study).is_empty() {
                    mapped_studies += 1;
                }
            }
        }
        let coverage = if total_studies > 0 {
            100.0 * mapped_studies as f64 / total_studies as f64
        } else {
            0.0
        };
        println!(
            "mapping coverage: {coverage:.1}% ({mapped_studies}/{total_studies} studies)"
        );

        if let Some(qrels_path) = &args.qrels {
            let qrels = load_qrels(qrels_path, args.level)?;
            let mut total_pubs = 0usize;
            let mut judged_pubs = 0usize;
            for review in corpus.reviews() {
                let judged = qrels.judged_docs(&review.review_id);
                for publication in map.publications_for_review(&review.review_id) {
                    total_pubs += 1;
                    if judged.contains(publication) {
                        judged_pubs += 1;
                    }
                }
            }
            let coverage = if total_pubs > 0 {
                100.0 * judged_pubs as f64 / total_pubs as f64
            } else {
                0.0
            };
            println!(
                "qrels coverage: {coverage:.1}% ({judged_pubs}/{total_pubs} mapped publications)"
            );
        }
    }
    Ok(())
}

fn cmd_eval_run(args: EvalRunArgs) -> Result<()> {
    for &cutoff in &args.cutoffs {
        if cutoff == 0 || cutoff > 100 {
            return Err(Error::Config(format!("cutoff {cutoff} outside (0,100]")));
        }
    }
    let loaded = load_corpus(&args.corpus)?;
    let corpus = &loaded.corpus;
    let map = load_mapping(&args.mapping)?;
    let qrels = load_qrels(&args.qrels, args.level)?;
    let runs = load_runs(&args.runs)?;
    ensure_out_dir(&args.out)?;

    let collections = collections(corpus, &qrels, &map);
    let gold = gold_baseline(corpus, &map, &collections);
    let max_qrels = max_with_qrels_baseline(&qrels, corpus, &collections);

    let mut evaluations: Vec<RunEvaluation> = Vec::new();
    let n_submitted = runs.len();
    for run in runs.iter().chain([&gold, &max_qrels]) {
        let eval = evaluate_run(run, corpus, &qrels, &map, &args.cutoffs);
        for warning in &eval.warnings {
            eprintln!("warning: [{}] {warning}", eval.run_tag);
        }
        evaluations.push(eval);
    }

    for eval in &evaluations {
        let tag = sanitize_tag(&eval.run_tag);
        match args.format {
            Format::Json => {
                atomic_write(&args.out.join(format!("{tag}.json")), &run_evaluation_json(eval))?;
            }
            Format::Csv | Format::Svg => {
                atomic_write(
                    &args.out.join(format!("{tag}-outcomes.csv")),
                    &outcome_rows_csv(eval),
                )?;
                atomic_write(
                    &args.out.join(format!("{tag}-aggregates.csv")),
                    &aggregates_csv(eval),
                )?;
                atomic_write(&args.out.join(format!("{tag}-topics.csv")), &topics_csv(eval))?;
            }
        }
    }

    let reference_cutoff = if args.cutoffs.contains(&30) {
        30
    } else {
        *args.cutoffs.last().expect("cutoffs are non-empty")
    };
    atomic_write(
        &args.out.join("runs-comparison.csv"),
        &comparison_csv(&evaluations, reference_cutoff),
    )?;

    // correlation columns over the submitted runs only
    if n_submitted >= 2 {
        let submitted = &evaluations[..n_submitted];
        let correlation_cutoff = if args.cutoffs.contains(&20) {
            20
        } else {
            reference_cutoff
        };
        let report = correlation_report(submitted, correlation_cutoff);
        atomic_write(&args.out.join("correlations.csv"), &correlations_csv(&report))?;
    }

    if args.format == Format::Svg {
        let series: Vec<BoxPlotSeries> = evaluations
            .iter()
            .filter_map(|eval| {
                let ce = eval.cutoff(reference_cutoff)?;
                Some(BoxPlotSeries {
                    run_tag: eval.run_tag.clone(),
                    values: ce.rows.iter().map(|r| r.report.mod_value).collect(),
                })
            })
            .collect();
        let title = format!("Relative difference per outcome at {reference_cutoff}% cutoff");
        atomic_write(
            &args.out.join("mod-boxplot.svg"),
            &render_box_svg(&title, &series, args.axis_clamp),
        )?;
    }

    println!(
        "evaluated {} runs (+2 baselines) over {} outcomes; reports in {}",
        n_submitted,
        corpus.n_outcomes(),
        args.out.display()
    );
    Ok(())
}

fn correlation_report(evals: &[RunEvaluation], cutoff: u32) -> CorrelationReport {
    let tags: Vec<String> = evals.iter().map(|e| e.run_tag.clone()).collect();
    let mods: Vec<f64> = evals
        .iter()
        .map(|e| e.cutoff(cutoff).map(|c| c.aggregate.mean_mod).unwrap_or(f64::NAN))
        .collect();
    let topic_mean = |eval: &RunEvaluation, f: &dyn Fn(&crate::ir::TopicEvaluation) -> f64| -> f64 {
        if eval.topics.is_empty() {
            return f64::NAN;
        }
        eval.topics.iter().map(f).sum::<f64>() / eval.topics.len() as f64
    };
    let mut columns = vec![MeasureColumn::new(
        "map",
        tags.clone(),
        evals.iter().map(|e| e.map_score).collect(),
        mods.clone(),
    )];
    for k in [5u32, 10, 20, 30, 50] {
        columns.push(MeasureColumn::new(
            format!("recall_{k}"),
            tags.clone(),
            evals
                .iter()
                .map(|e| topic_mean(e, &|t| t.recall_at.get(&k).copied().unwrap_or(f64::NAN)))
                .collect(),
            mods.clone(),
        ));
    }
    columns.push(MeasureColumn::new(
        "ndcg_20",
        tags.clone(),
        evals
            .iter()
            .map(|e| topic_mean(e, &|t| t.ndcg_at.get(&20).copied().unwrap_or(f64::NAN)))
            .collect(),
        mods.clone(),
    ));
    for r in [95u32, 100] {
        columns.push(MeasureColumn::new(
            format!("wss_{r}"),
            tags.clone(),
            evals
                .iter()
                .map(|e| topic_mean(e, &|t| t.wss.get(&r).copied().unwrap_or(f64::NAN)))
                .collect(),
            mods.clone(),
        ));
    }
    columns.push(MeasureColumn::new(
        "last_rel",
        tags.clone(),
        evals
            .iter()
            .map(|e| topic_mean(e, &|t| t.last_rel_rank.map(|r| r as f64).unwrap_or(f64::NAN)))
            .collect(),
        mods.clone(),
    ));
    columns.push(MeasureColumn::new(
        "aurc",
        tags,
        evals.iter().map(|e| topic_mean(e, &|t| t.aurc)).collect(),
        mods,
    ));
    CorrelationReport { cutoff, columns }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let loaded = load_corpus(&args.corpus)?;
    let map = load_mapping(&args.mapping)?;
    let spec = SimulationSpec {
        removal_counts: args.removals,
        n_seeds: args.seeds,
        base_seed: args.base_seed,
    };
    let table = simulate_removals(&loaded.corpus, &map, &spec)?;
    for review in &table.skipped_reviews {
        eprintln!("warning: review {review} has no mapped publications, skipped");
    }
    ensure_out_dir(&args.out)?;
    match args.format {
        Format::Json => {
            atomic_write(&args.out.join("simulation.json"), &simulation_json(&table))?;
        }
        Format::Csv | Format::Svg => {
            atomic_write(
                &args.out.join("simulation-means.csv"),
                &simulation_matrix_csv(&table),
            )?;
            atomic_write(
                &args.out.join("simulation-seeds.csv"),
                &simulation_seeds_csv(&table),
            )?;
        }
    }
    println!(
        "simulated {} removal counts x {} seeds over {} outcomes; reports in {}",
        table.removal_counts.len(),
        table.n_seeds,
        loaded.corpus.n_outcomes(),
        args.out.display()
    );
    Ok(())
}

fn cmd_pareto(args: ParetoArgs) -> Result<()> {
    if args.cutoff == 0 || args.cutoff > 100 {
        return Err(Error::Config(format!("cutoff {} outside (0,100]", args.cutoff)));
    }
    let loaded = load_corpus(&args.corpus)?;
    let corpus = &loaded.corpus;
    let map = load_mapping(&args.mapping)?;
    let qrels = load_qrels(&args.qrels, args.level)?;
    let runs = load_runs(&args.runs)?;
    ensure_out_dir(&args.out)?;

    let cutoffs = [args.cutoff];
    let evaluations: Vec<RunEvaluation> = runs
        .iter()
        .map(|run| evaluate_run(run, corpus, &qrels, &map, &cutoffs))
        .collect();
    let mut points = pareto_points(&evaluations, args.cutoff);
    // gold is the best achievable score by construction
    points.push(("gold".to_owned(), 0, 0.0));
    let flagged = pareto_frontier(&points);

    match args.format {
        Format::Json => atomic_write(&args.out.join("pareto.json"), &pareto_json(&flagged))?,
        Format::Csv | Format::Svg => {
            atomic_write(&args.out.join("pareto.csv"), &pareto_csv(&flagged))?
        }
    }
    atomic_write(&args.out.join("pareto.svg"), &render_pareto_svg(&flagged))?;
    let n_frontier = flagged.iter().filter(|p| !p.dominated).count();
    println!(
        "pareto: {} points, {} on the frontier; reports in {}",
        flagged.len(),
        n_frontier,
        args.out.display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let loaded = load_corpus(&args.corpus)?;
    let corpus = &loaded.corpus;
    ensure_out_dir(&args.out)?;
    let forest_dir = args.out.join("forest");
    ensure_out_dir(&forest_dir)?;

    let tol = ToleranceConfig::default();
    let mut csv = String::from(
        "review_id,comparison_id,outcome_id,measure,model,estimate,ci_low,ci_high,n_studies,q,tau2,i2,declared_estimate,declared_matches\n",
    );
    for gold in corpus.golds() {
        let outcome = corpus.outcome(gold);
        let pooled = &gold.original;
        let declared = outcome.original_estimate;
        let declared_matches = declared.map(|d| {
            (pooled.estimate - d).abs() <= (tol.rel_tol * d.abs()).max(tol.abs_tol)
        });
        csv.push_str(&format!(
            "{},{},{},{},{:?},{:.6},{:.6},{:.6},{},{:.6},{:.6},{:.6},{},{}\n",
            gold.key.review_id,
            gold.key.comparison_id,
            gold.key.outcome_id,
            outcome.effect_measure.label(),
            outcome.model,
            pooled.estimate,
            pooled.ci_low,
            pooled.ci_high,
            pooled.n_studies,
            pooled.q,
            pooled.tau2,
            pooled.i2,
            declared.map(|d| format!("{d:.6}")).unwrap_or_else(|| "NA".into()),
            declared_matches
                .map(|m| if m { "yes".into() } else { "MISMATCH".to_owned() })
                .unwrap_or_else(|| "NA".into()),
        ));

        let rows = forest_rows(outcome, pooled);
        let title = format!(
            "{} / {} / {} ({})",
            gold.key.review_id,
            gold.key.comparison_id,
            outcome.name,
            outcome.effect_measure.label()
        );
        let svg = render_forest_svg(&title, &rows, pooled);
        let file = format!(
            "{}-{}-{}.svg",
            sanitize_tag(&gold.key.review_id),
            sanitize_tag(&gold.key.comparison_id),
            sanitize_tag(&gold.key.outcome_id)
        );
        atomic_write(&forest_dir.join(file), &svg)?;
    }
    atomic_write(&args.out.join("pooled-outcomes.csv"), csv.as_bytes())?;
    println!(
        "wrote pooled-outcomes.csv and {} forest plots to {}",
        corpus.n_outcomes(),
        args.out.display()
    );
    Ok(())
}

fn forest_rows(outcome: &crate::evidence::Outcome, pooled: &PooledOutcome) -> Vec<ForestRow> {
    use crate::evidence::ArmData;
    use crate::meta::{study_effect_continuous, study_effect_dichotomous};
    outcome
        .rows()
        .map(|row| {
            let effect = match &row.data {
                ArmData::Dichotomous(arms) => {
                    study_effect_dichotomous(&row.study_id, arms, outcome.effect_measure)
                }
                ArmData::Continuous(arms) => {
                    study_effect_continuous(&row.study_id, arms, outcome.effect_measure)
                }
            };
            if effect.estimable {
                let (ci_low, ci_high) = confidence_interval(
                    effect.transformed_point,
                    effect.se,
                    outcome.ci_level,
                    effect.log_scale,
                );
                ForestRow {
                    study_id: row.study_id.clone(),
                    point: effect.point,
                    ci_low,
                    ci_high,
                    weight: pooled.weights.get(&row.study_id).copied(),
                    estimable: true,
                }
            } else {
                ForestRow {
                    study_id: row.study_id.clone(),
                    point: f64::NAN,
                    ci_low: f64::NAN,
                    ci_high: f64::NAN,
                    weight: None,
                    estimable: false,
                }
            }
        })
        .collect()
}
