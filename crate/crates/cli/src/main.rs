//! `flowopt` command-line surface: run/resume studies, Pareto reports and
//! plot data, seed export/import, pruner ablations, benchmark simulation,
//! and front comparisons.
//!
//! Every command is a pure function of (config file, log files, flags);
//! nothing touches the network except a configured external evaluator.
//! Exit codes: 0 success, 1 usage error, 2 study failure, 3 storage
//! corruption.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use flowopt::harness::sim::SimBenchmarkSpec;
use flowopt::pareto::{front_shift, hypervolume, ObjectiveVector};
use flowopt::study::file::load_study_file;
use flowopt::study::{
    ablate_pruner, builtin_benchmark, load_study, resume, run_study, AblationReport, Study,
};
use flowopt::Error;

#[derive(Parser)]
#[command(name = "flowopt", version, about = "Multi-objective flow optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a new study from a TOML config file.
    Run {
        /// Study configuration (TOML).
        config: PathBuf,
    },
    /// Resume a persisted study log and continue to its trial budget.
    Resume {
        /// Study log path.
        log: PathBuf,
    },
    /// Print the trial table, front table, and summary metrics of a study.
    Report {
        /// Study log path.
        log: PathBuf,
        /// Baseline trial id for gain metrics. Defaults to trial 0 when it
        /// is a static seed.
        #[arg(long)]
        baseline: Option<u64>,
        /// Directory to write trials.csv and front.csv into.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Export front plot data (CSV) for a study.
    Pareto {
        /// Study log path.
        log: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export or import seed configuration lists.
    Seed {
        #[command(subcommand)]
        action: SeedAction,
    },
    /// Run paired pruner-on/off studies and report savings.
    AblatePruner {
        /// Study configuration (TOML); must use a builtin evaluator.
        config: PathBuf,
        /// Repetition seeds, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        reps: Vec<u64>,
        /// Output CSV path for the per-trial curves.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output JSON path for the full report.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Enumerate a builtin benchmark and print its true front.
    Simulate {
        /// Benchmark name: desk-1 or desk-2.
        benchmark: String,
        /// Output TSV path for the true front.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two studies' fronts (accuracy deltas and cost multipliers).
    Compare {
        /// Baseline study log.
        before: PathBuf,
        /// Study log to compare against the baseline, matched by trial id.
        after: PathBuf,
    },
    /// Export plot-data CSV files.
    Plotdata {
        #[command(subcommand)]
        kind: PlotKind,
    },
}

#[derive(Subcommand)]
enum SeedAction {
    /// Materialize a config's seed plan as flat JSON config records.
    Export {
        /// Study configuration (TOML).
        config: PathBuf,
        /// Output path (stdout when omitted); one JSON object per line.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a seed list against a config's search space.
    Import {
        /// Study configuration (TOML).
        config: PathBuf,
        /// Seed list (one JSON object per line).
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum PlotKind {
    /// Front scatter data: trial_id, accuracy, cost_usd, log10_cost,
    /// on_front, flow, llm.
    Front {
        log: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ablation curves from an `ablate-pruner --json` report.
    Ablation {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Three-arm seeding comparison: per-trial pareto_area for a
    /// random-seeded, static-seeded, and transfer-seeded study.
    SeedingComparison {
        #[arg(long)]
        random: PathBuf,
        #[arg(long = "static")]
        static_log: PathBuf,
        #[arg(long)]
        transfer: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes; everything else is a
            // usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Storage(_) => 3,
        Error::Config(_) | Error::UnknownParam(_) | Error::InvalidValue { .. } => 1,
        _ => 2,
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config } => {
            let cfg = load_study_file(&config)?;
            let study = run_study(cfg)?;
            print_summary(&study);
            Ok(())
        }
        Command::Resume { log } => {
            let study = resume(&log)?;
            print_summary(&study);
            Ok(())
        }
        Command::Report { log, baseline, csv } => {
            let study = load_study(&log)?;
            report::print_report(&study, baseline)?;
            if let Some(dir) = csv {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("trials.csv"), report::trials_csv(&study))?;
                std::fs::write(dir.join("front.csv"), report::front_csv(&study))?;
                println!("wrote {}/trials.csv and front.csv", dir.display());
            }
            Ok(())
        }
        Command::Pareto { log, out } => {
            let study = load_study(&log)?;
            emit(out, report::front_csv(&study))
        }
        Command::Seed { action } => seed(action),
        Command::AblatePruner {
            config,
            reps,
            out,
            json,
        } => {
            let cfg = load_study_file(&config)?;
            let rep = ablate_pruner(&cfg, &reps)?;
            println!(
                "median evaluation savings: {:.1}%",
                rep.median_eval_savings * 100.0
            );
            println!("median pareto-area ratio: {:.4}", rep.median_area_ratio);
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(&rep)?)?;
                println!("wrote {}", path.display());
            }
            if let Some(path) = out {
                std::fs::write(&path, ablation_csv(&rep))?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Simulate { benchmark, out } => simulate(&benchmark, out),
        Command::Compare { before, after } => compare(&before, &after),
        Command::Plotdata { kind } => plotdata(kind),
    }
}

fn emit(out: Option<PathBuf>, text: String) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(&path, text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn print_summary(study: &Study) {
    println!("study `{}`: {} trials", study.config.name, study.trials.len());
    println!(
        "  completed {}  pruned {}  failed {}",
        study.count_with_status(flowopt::harness::TrialStatus::Completed),
        study.count_with_status(flowopt::harness::TrialStatus::Pruned),
        study.count_with_status(flowopt::harness::TrialStatus::Failed),
    );
    println!(
        "  evaluations {}  total cost ${:.4}",
        study.total_evaluations(),
        study.total_cost()
    );
    println!("  front size {}", study.front.len());
    for w in &study.warnings {
        eprintln!("warning: {w}");
    }
}

fn seed(action: SeedAction) -> Result<(), Error> {
    match action {
        SeedAction::Export { config, out } => {
            let cfg = load_study_file(&config)?;
            let mut rng = flowopt::study::seed_plan_rng(cfg.seed);
            let seeds = cfg.seed_plan.materialize(&cfg.space, &mut rng);
            let mut text = String::new();
            for (flow, _) in &seeds {
                text.push_str(&flow.to_canonical_json());
                text.push('\n');
            }
            emit(out, text)
        }
        SeedAction::Import { config, file } => {
            let cfg = load_study_file(&config)?;
            let text = std::fs::read_to_string(&file)?;
            let mut n = 0usize;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let flow = flowopt::space::FlowConfig::from_json(line)
                    .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
                cfg.space
                    .validate_config(&flow)
                    .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
                n += 1;
            }
            println!("{n} seed configs valid for study `{}`", cfg.name);
            Ok(())
        }
    }
}

fn simulate(benchmark: &str, out: Option<PathBuf>) -> Result<(), Error> {
    let spec: SimBenchmarkSpec = builtin_benchmark(benchmark)?;
    let (front, all) = spec.true_front();
    let max_cost = all.iter().map(|(_, o)| o.cost).fold(0.0f64, f64::max);
    let hv = hypervolume(&front, &ObjectiveVector::new(0.0, max_cost * 1.01))?;
    println!(
        "benchmark {}: {} configs, true front {} entries, hypervolume {:.6}",
        spec.name,
        all.len(),
        front.len(),
        hv
    );
    let mut text = String::from("accuracy\tcost\tlatency\tconfig\n");
    for (flow, obj) in &all {
        if front.dominates_point(obj) {
            continue;
        }
        text.push_str(&format!(
            "{:.12}\t{:.12e}\t{:.9}\t{}\n",
            obj.accuracy,
            obj.cost,
            obj.latency.unwrap_or(0.0),
            flow.to_canonical_json()
        ));
    }
    match out {
        Some(path) => {
            std::fs::write(&path, text)?;
            println!("wrote {}", path.display());
        }
        None => {}
    }
    Ok(())
}

fn compare(before: &PathBuf, after: &PathBuf) -> Result<(), Error> {
    let before_study = load_study(before)?;
    let after_study = load_study(after)?;
    let after_points: Vec<(u64, ObjectiveVector)> = before_study
        .front
        .entries()
        .iter()
        .filter_map(|e| {
            after_study
                .trial(e.trial)
                .and_then(|t| t.objectives)
                .map(|o| (e.trial, o))
        })
        .collect();
    if after_points.is_empty() {
        return Err(Error::Config(
            "no front trial of the first study appears in the second".into(),
        ));
    }
    let shift = front_shift(&before_study.front, &after_points)?;
    println!("trial  accuracy-delta(pp)  cost-multiplier");
    for row in &shift.rows {
        println!(
            "{:>5}  {:>+17.2}  {:>15.2}",
            row.trial, row.accuracy_delta_pp, row.cost_multiplier
        );
    }
    println!(
        "mean   {:>+17.2}  {:>15.2}",
        shift.mean_accuracy_delta_pp, shift.mean_cost_multiplier
    );
    Ok(())
}

fn ablation_csv(report: &AblationReport) -> String {
    let mut text =
        String::from("rep_seed,arm,trial,cumulative_evaluations,cumulative_cost,pareto_area\n");
    for arm in report.pruner_on.iter().chain(&report.pruner_off) {
        let label = if arm.pruner_enabled { "pruner-on" } else { "pruner-off" };
        for p in &arm.curve {
            text.push_str(&format!(
                "{},{},{},{},{:.12e},{:.12}\n",
                arm.seed, label, p.trial, p.cumulative_evaluations, p.cumulative_cost, p.pareto_area
            ));
        }
    }
    text
}

fn plotdata(kind: PlotKind) -> Result<(), Error> {
    match kind {
        PlotKind::Front { log, out } => {
            let study = load_study(&log)?;
            emit(out, report::front_csv(&study))
        }
        PlotKind::Ablation { report, out } => {
            let text = std::fs::read_to_string(&report)?;
            let rep: AblationReport = serde_json::from_str(&text)?;
            emit(out, ablation_csv(&rep))
        }
        PlotKind::SeedingComparison {
            random,
            static_log,
            transfer,
            out,
        } => {
            let arms = [
                ("random", load_study(&random)?),
                ("static", load_study(&static_log)?),
                ("transfer", load_study(&transfer)?),
            ];
            emit(out, report::seeding_comparison_csv(&arms)?)
        }
    }
}
