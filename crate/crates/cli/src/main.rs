//! Command-line surface for the meta-analysis pipeline: create a review,
//! import references, enter 2x2 data, analyze, and render figures.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation/consistency error,
//! 3 I/O or parse error. Errors go to stderr as `error[<code>]: message`.

mod project;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use revmeta_core::{
    build_flow, default_domains, figure_filename, funnel_data, import_pending, parse_medline_bytes,
    references_from_records, render_forest, render_funnel, render_prisma, render_rob, set_judgment,
    summary_matrix, trim_and_fill, DataSource, Error, ExclusionReason, FigureSpec, FlowDiagram,
    JudgmentLevel, Measure, Method, Model, Outcome, Review, RobScheme,
};

use project::ProjectStore;

#[derive(Parser)]
#[command(
    name = "revmeta",
    version,
    about = "Meta-analysis of dichotomous outcomes: effect sizes, pooling, bias diagnostics, and review figures"
)]
struct Cli {
    /// Project file.
    #[arg(short, long, global = true, default_value = "review.json")]
    project: PathBuf,

    /// Output directory for figures.
    #[arg(
        short,
        long,
        global = true,
        env = "REVMETA_OUT_DIR",
        default_value = "."
    )]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a new review project.
    New {
        /// Review title.
        title: String,
    },
    /// Add a study to the review.
    AddStudy {
        /// Study identifier, conventionally "FirstAuthor Year".
        id: String,
        #[arg(long, value_enum, default_value = "published")]
        source: SourceArg,
        #[arg(long)]
        year: i32,
    },
    /// Import a MEDLINE (PubMed) export into the pending references.
    ImportRefs {
        /// MEDLINE text file.
        file: PathBuf,
    },
    /// Create or configure a comparison/outcome.
    Outcome(OutcomeArgs),
    /// Enter 2x2 counts for a study: events/total per group.
    SetData {
        study: String,
        events1: u32,
        total1: u32,
        events2: u32,
        total2: u32,
        #[arg(long)]
        comparison: Option<String>,
        #[arg(long)]
        outcome: Option<String>,
    },
    /// Run the configured analysis and print the result table.
    Analyze(AnalyzeArgs),
    /// Render the forest plot.
    Forest(SelectArgs),
    /// Render the funnel plot.
    Funnel {
        #[command(flatten)]
        select: SelectArgs,
        /// Run trim-and-fill and draw imputed studies as filled points.
        #[arg(long)]
        trim_fill: bool,
    },
    /// Set and validate PRISMA flow counts, then render the diagram.
    Prisma(PrismaArgs),
    /// Configure risk-of-bias domains/judgments and render the summary.
    Rob(RobArgs),
    /// Print a text summary of the whole review.
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Published,
    Unpublished,
    Both,
}

impl From<SourceArg> for DataSource {
    fn from(value: SourceArg) -> Self {
        match value {
            SourceArg::Published => DataSource::Published,
            SourceArg::Unpublished => DataSource::Unpublished,
            SourceArg::Both => DataSource::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mh,
    Iv,
    Peto,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Fixed,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Or,
    Rr,
    Rd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Cochrane7,
    Nos6,
}

#[derive(Args)]
struct OutcomeArgs {
    /// Comparison name (created if absent).
    #[arg(long, default_value = "Comparison 1")]
    comparison: String,
    /// Outcome name (created if absent).
    #[arg(long, default_value = "Outcome 1")]
    name: String,
    /// First group label (its events/total go first in set-data).
    #[arg(long, default_value = "Group 1")]
    group1: String,
    /// Second group label (control side).
    #[arg(long, default_value = "Group 2")]
    group2: String,
    /// Left axis end label of the forest plot.
    #[arg(long)]
    left: Option<String>,
    /// Right axis end label of the forest plot.
    #[arg(long)]
    right: Option<String>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    /// Confidence level, e.g. 0.95.
    #[arg(long)]
    ci: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    select: SelectArgs,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    /// Confidence level, e.g. 0.95.
    #[arg(long)]
    ci: Option<f64>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    comparison: Option<String>,
    #[arg(long)]
    outcome: Option<String>,
}

#[derive(Args)]
struct PrismaArgs {
    /// Records identified through database searching.
    #[arg(long)]
    identified_db: Option<u32>,
    /// Records identified through other sources.
    #[arg(long, default_value_t = 0)]
    identified_other: u32,
    /// Records after duplicates removed.
    #[arg(long)]
    after_dedup: Option<u32>,
    /// Records screened (defaults to after-dedup).
    #[arg(long)]
    screened: Option<u32>,
    /// Records excluded at screening.
    #[arg(long)]
    excluded_screening: Option<u32>,
    /// Full-text articles assessed for eligibility.
    #[arg(long)]
    fulltext_assessed: Option<u32>,
    /// Full-text exclusion reason as "reason=N"; repeatable.
    #[arg(long = "exclude", value_name = "REASON=N")]
    exclusions: Vec<String>,
    /// Studies in the qualitative synthesis.
    #[arg(long)]
    qualitative: Option<u32>,
    /// Studies in the quantitative synthesis (meta-analysis).
    #[arg(long)]
    quantitative: Option<u32>,
}

#[derive(Args)]
struct RobArgs {
    /// Install a domain scheme (replaces current domains).
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Record a judgment as "STUDY|DOMAIN|low|support text"; repeatable.
    #[arg(long = "judge", value_name = "STUDY|DOMAIN|LEVEL[|SUPPORT]")]
    judgments: Vec<String>,
    /// Deactivate a domain (kept, hidden from the matrix); repeatable.
    #[arg(long)]
    deactivate: Vec<String>,
    /// Reactivate a domain; repeatable.
    #[arg(long)]
    activate: Vec<String>,
    /// Move a domain up in the ordering; repeatable.
    #[arg(long)]
    move_up: Vec<String>,
    /// Move a domain down in the ordering; repeatable.
    #[arg(long)]
    move_down: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error[usage]: {e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_)
        | Error::Conflict(_)
        | Error::NotFound(_)
        | Error::Consistency(_)
        | Error::NoData(_)
        | Error::NonConvergence { .. } => 2,
        Error::Parse { .. } | Error::Version { .. } | Error::Io(_) => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let store = ProjectStore::new(cli.project.clone());
    match cli.command {
        Command::New { title } => {
            if cli.project.exists() {
                return Err(Error::Conflict(format!(
                    "project file {} already exists",
                    cli.project.display()
                )));
            }
            let review = Review::new(&title)?;
            review.save(&cli.project)?;
            println!("created {} (\"{}\")", cli.project.display(), review.title);
            Ok(())
        }
        Command::AddStudy { id, source, year } => {
            store.update(|review| {
                review.add_study(&id, source.into(), year)?;
                Ok(())
            })?;
            println!("added study {id}");
            Ok(())
        }
        Command::ImportRefs { file } => {
            let bytes = std::fs::read(&file)?;
            let parsed = parse_medline_bytes(&bytes);
            for w in &parsed.warnings {
                eprintln!("warning: line {}: {}", w.line, w.message);
            }
            let (refs, skipped) = references_from_records(&parsed.records);
            for s in &skipped {
                eprintln!("warning: {s}");
            }
            let found = parsed.records.len();
            let outcome = store.update(|review| Ok(import_pending(review, refs)))?;
            for s in &outcome.skipped {
                eprintln!("warning: {s}");
            }
            println!(
                "references found: {found}; added {} to Classification pending references",
                outcome.added
            );
            Ok(())
        }
        Command::Outcome(args) => {
            store.update(|review| {
                let comparison = review.ensure_comparison(&args.comparison);
                let outcome = match comparison.outcomes.iter_mut().find(|o| o.name == args.name) {
                    Some(existing) => existing,
                    None => {
                        comparison.outcomes.push(Outcome::new(
                            &args.name,
                            &args.group1,
                            &args.group2,
                        ));
                        comparison.outcomes.last_mut().unwrap()
                    }
                };
                outcome.group_labels = (args.group1.clone(), args.group2.clone());
                if let Some(left) = &args.left {
                    outcome.graph_labels.0 = left.clone();
                }
                if let Some(right) = &args.right {
                    outcome.graph_labels.1 = right.clone();
                }
                apply_settings(
                    &mut outcome.settings,
                    args.method,
                    args.model,
                    args.measure,
                    args.ci,
                )?;
                Ok(())
            })?;
            println!(
                "configured outcome `{}` in comparison `{}`",
                args.name, args.comparison
            );
            Ok(())
        }
        Command::SetData {
            study,
            events1,
            total1,
            events2,
            total2,
            comparison,
            outcome,
        } => {
            let table = revmeta_core::TwoByTwoTable::new(events1, total1, events2, total2)?;
            store.update(|review| {
                review.set_data(comparison.as_deref(), outcome.as_deref(), &study, table)
            })?;
            println!("{study}: {events1}/{total1} vs {events2}/{total2}");
            Ok(())
        }
        Command::Analyze(args) => {
            let review = store.read()?;
            let outcome = review.find_outcome(
                args.select.comparison.as_deref(),
                args.select.outcome.as_deref(),
            )?;
            let mut outcome = outcome.clone();
            apply_settings(
                &mut outcome.settings,
                args.method,
                args.model,
                args.measure,
                args.ci,
            )?;
            let result = outcome.analyze()?;
            print!("{}", report::analysis_table(&outcome, &result));
            Ok(())
        }
        Command::Forest(select) => {
            let review = store.read()?;
            let outcome =
                review.find_outcome(select.comparison.as_deref(), select.outcome.as_deref())?;
            let result = outcome.analyze()?;
            let svg = render_forest(&result, outcome, &FigureSpec::default());
            let path = write_figure(&cli.out_dir, &review, "forest", &svg)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Funnel { select, trim_fill } => {
            let review = store.read()?;
            let outcome =
                review.find_outcome(select.comparison.as_deref(), select.outcome.as_deref())?;
            let result = outcome.analyze()?;
            let data = funnel_data(&result);
            let imputed = if trim_fill {
                let estimates: Vec<revmeta_core::StudyEstimate> = result
                    .per_study
                    .iter()
                    .map(|s| revmeta_core::StudyEstimate {
                        id: s.id.clone(),
                        estimate: s.estimate,
                    })
                    .collect();
                let tf = trim_and_fill(&estimates, result.settings.ci_level)?;
                println!(
                    "trim-and-fill: imputed {} studies; adjusted {} = {}",
                    tf.imputed_count,
                    result.settings.measure.label(),
                    revmeta_core::format::fmt_fixed(tf.adjusted.pooled.point, 2)
                );
                tf.imputed_points
            } else {
                Vec::new()
            };
            let svg = render_funnel(&data, &imputed, &FigureSpec::default());
            let path = write_figure(&cli.out_dir, &review, "funnel", &svg)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Prisma(args) => {
            let review = store.read()?;
            let flow = if args.identified_db.is_some() {
                let flow = flow_from_args(&args)?;
                store.update(|review| {
                    review.flow = Some(flow.clone());
                    Ok(())
                })?;
                flow
            } else {
                review.flow.clone().ok_or_else(|| {
                    Error::NoData(
                        "no flow counts stored; pass --identified-db and related flags".into(),
                    )
                })?
            };
            let svg = render_prisma(&flow, &FigureSpec::default());
            let path = write_figure(&cli.out_dir, &review, "prisma", &svg)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Rob(args) => {
            let review = store.update(|review| {
                if let Some(scheme) = args.scheme {
                    let scheme = match scheme {
                        SchemeArg::Cochrane7 => RobScheme::Cochrane7,
                        SchemeArg::Nos6 => RobScheme::Nos6,
                    };
                    review.rob_domains = default_domains(scheme);
                }
                for spec in &args.judgments {
                    let (study, domain, level, support) = parse_judgment(spec)?;
                    set_judgment(review, &study, &domain, level, &support)?;
                }
                for id in &args.deactivate {
                    revmeta_core::deactivate_domain(review, id)?;
                }
                for id in &args.activate {
                    revmeta_core::activate_domain(review, id)?;
                }
                for id in &args.move_up {
                    revmeta_core::reorder_domain(review, id, revmeta_core::MoveDirection::Up)?;
                }
                for id in &args.move_down {
                    revmeta_core::reorder_domain(review, id, revmeta_core::MoveDirection::Down)?;
                }
                Ok(review.clone())
            })?;
            let matrix = summary_matrix(&review);
            let svg = render_rob(&matrix, &FigureSpec::default());
            let path = write_figure(&cli.out_dir, &review, "rob", &svg)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Report => {
            let review = store.read()?;
            print!("{}", report::review_summary(&review));
            Ok(())
        }
    }
}

fn apply_settings(
    settings: &mut revmeta_core::AnalysisSettings,
    method: Option<MethodArg>,
    model: Option<ModelArg>,
    measure: Option<MeasureArg>,
    ci: Option<f64>,
) -> Result<(), Error> {
    if let Some(m) = method {
        settings.method = match m {
            MethodArg::Mh => Method::MantelHaenszel,
            MethodArg::Iv => Method::InverseVariance,
            MethodArg::Peto => Method::Peto,
        };
    }
    if let Some(m) = model {
        settings.model = match m {
            ModelArg::Fixed => Model::Fixed,
            ModelArg::Random => Model::Random,
        };
    }
    if let Some(m) = measure {
        settings.measure = match m {
            MeasureArg::Or => Measure::OddsRatio,
            MeasureArg::Rr => Measure::RiskRatio,
            MeasureArg::Rd => Measure::RiskDifference,
        };
    }
    if let Some(level) = ci {
        settings.ci_level = level;
    }
    settings.validate()
}

fn parse_judgment(spec: &str) -> Result<(String, String, JudgmentLevel, String), Error> {
    let parts: Vec<&str> = spec.splitn(4, '|').collect();
    if parts.len() < 3 {
        return Err(Error::Validation(format!(
            "judgment `{spec}` must be STUDY|DOMAIN|LEVEL[|SUPPORT]"
        )));
    }
    let level = match parts[2].to_ascii_lowercase().as_str() {
        "low" => JudgmentLevel::Low,
        "unclear" => JudgmentLevel::Unclear,
        "high" => JudgmentLevel::High,
        other => {
            return Err(Error::Validation(format!(
                "judgment level `{other}` must be low, unclear or high"
            )))
        }
    };
    Ok((
        parts[0].to_string(),
        parts[1].to_string(),
        level,
        parts.get(3).unwrap_or(&"").to_string(),
    ))
}

fn flow_from_args(args: &PrismaArgs) -> Result<FlowDiagram, Error> {
    let missing =
        |name: &str| Error::Validation(format!("--{name} is required to set flow counts"));
    let identified_db = args.identified_db.ok_or_else(|| missing("identified-db"))?;
    let after_dedup = args.after_dedup.ok_or_else(|| missing("after-dedup"))?;
    let screened = args.screened.unwrap_or(after_dedup);
    let excluded_screening = args
        .excluded_screening
        .ok_or_else(|| missing("excluded-screening"))?;
    let fulltext_assessed = args
        .fulltext_assessed
        .unwrap_or_else(|| screened.saturating_sub(excluded_screening));
    let mut fulltext_excluded = Vec::new();
    for spec in &args.exclusions {
        let (reason, n) = spec
            .rsplit_once('=')
            .ok_or_else(|| Error::Validation(format!("exclusion `{spec}` must be REASON=N")))?;
        let n: u32 = n
            .parse()
            .map_err(|_| Error::Validation(format!("exclusion count `{n}` is not a number")))?;
        fulltext_excluded.push(ExclusionReason {
            reason: reason.to_string(),
            n,
        });
    }
    let excluded_total: u32 = fulltext_excluded.iter().map(|r| r.n).sum();
    let qualitative = args
        .qualitative
        .unwrap_or_else(|| fulltext_assessed.saturating_sub(excluded_total));
    let quantitative = args.quantitative.ok_or_else(|| missing("quantitative"))?;
    build_flow(FlowDiagram {
        identified_db,
        identified_other: args.identified_other,
        after_dedup,
        screened,
        excluded_screening,
        fulltext_assessed,
        fulltext_excluded,
        qualitative_included: qualitative,
        quantitative_included: quantitative,
    })
}

fn write_figure(
    out_dir: &PathBuf,
    review: &Review,
    figure: &str,
    svg: &str,
) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(figure_filename(&review.slug(), figure));
    std::fs::write(&path, svg)?;
    Ok(path)
}
