//! Report tables and plot-data CSV for persisted studies.
//!
//! CSV headers are part of the interface:
//! - trials.csv: `trial_id,origin,status,accuracy,cost_usd,cost_per_100,
//!   latency_s,flow,llm,retriever,splitter,extras,on_front`
//! - front.csv: `trial_id,accuracy,cost_usd,log10_cost,on_front,flow,llm`
//!   (completed trials only, sorted by cost ascending)
//! - seeding-comparison.csv: `arm,trial,cumulative_evaluations,pareto_area`
//!
//! Costs are stored per call; printed tables show USD per 100 calls.

use flowopt::harness::TrialStatus;
use flowopt::pareto::{baseline_gains, hypervolume, pareto_area, ObjectiveVector, ParetoFront};
use flowopt::space::FlowConfig;
use flowopt::study::{Study, Trial, TrialOrigin};
use flowopt::{Error, Result};

/// One row of the study report.
pub struct ReportRow<'a> {
    pub trial: &'a Trial,
    pub on_front: bool,
}

fn lookup<'a>(config: &'a FlowConfig, names: &[&str]) -> &'a str {
    names
        .iter()
        .find_map(|n| config.get_str(n))
        .unwrap_or("-")
}

fn flow_of(config: &FlowConfig) -> &str {
    lookup(config, &["flow", "strategy"])
}

fn llm_of(config: &FlowConfig) -> &str {
    lookup(config, &["synth_llm", "llm"])
}

fn extras(config: &FlowConfig) -> String {
    let mut flags = Vec::new();
    for (name, tag) in [
        ("reranker_enabled", "rerank"),
        ("hyde_enabled", "hyde"),
        ("few_shot_enabled", "few-shot"),
    ] {
        if config.get_str(name) == Some("true") {
            flags.push(tag);
        }
    }
    if flags.is_empty() {
        "-".into()
    } else {
        flags.join("+")
    }
}

/// All trials as report rows, sorted by cost ascending (trials without
/// objectives sort last by id).
pub fn rows(study: &Study) -> Vec<ReportRow<'_>> {
    let mut rows: Vec<ReportRow> = study
        .trials
        .iter()
        .map(|trial| ReportRow {
            trial,
            on_front: study.front.contains_trial(trial.id),
        })
        .collect();
    rows.sort_by(|a, b| {
        match (a.trial.objectives, b.trial.objectives) {
            (Some(x), Some(y)) => x.cost.total_cmp(&y.cost),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.trial.id.cmp(&b.trial.id),
        }
    });
    rows
}

fn status_str(status: TrialStatus) -> &'static str {
    match status {
        TrialStatus::Running => "running",
        TrialStatus::Completed => "completed",
        TrialStatus::Pruned => "pruned",
        TrialStatus::Failed => "failed",
    }
}

fn origin_str(origin: TrialOrigin) -> &'static str {
    match origin {
        TrialOrigin::StaticSeed => "static-seed",
        TrialOrigin::RandomSeed => "random-seed",
        TrialOrigin::TransferSeed => "transfer-seed",
        TrialOrigin::Sampler => "sampler",
    }
}

/// Cost bounds over completed trials, for pareto_area.
fn cost_bounds(study: &Study) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in &study.trials {
        if t.status == TrialStatus::Completed {
            if let Some(o) = t.objectives {
                lo = lo.min(o.cost);
                hi = hi.max(o.cost);
            }
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// Prints the full trial table, the front table, and summary metrics.
/// The default baseline is trial 0 when it is a static seed.
pub fn print_report(study: &Study, baseline: Option<u64>) -> Result<()> {
    println!("study `{}` — {} trials", study.config.name, study.trials.len());
    println!();
    println!(
        "{:>5}  {:<13} {:<9} {:>8}  {:>12}  {:>9}  {:<10} {:<22} {:<14} {}",
        "trial", "origin", "status", "accuracy", "cost/100", "latency", "flow", "llm", "extras", "front"
    );
    for row in rows(study) {
        let t = row.trial;
        let (acc, cost100, lat) = match t.objectives {
            Some(o) => (
                format!("{:.4}", o.accuracy),
                format!("${:.4}", o.cost * 100.0),
                o.latency.map(|l| format!("{l:.2}s")).unwrap_or("-".into()),
            ),
            None => ("-".into(), "-".into(), "-".into()),
        };
        println!(
            "{:>5}  {:<13} {:<9} {:>8}  {:>12}  {:>9}  {:<10} {:<22} {:<14} {}",
            t.id,
            origin_str(t.origin),
            status_str(t.status),
            acc,
            cost100,
            lat,
            flow_of(&t.config),
            llm_of(&t.config),
            extras(&t.config),
            if row.on_front { "*" } else { "" }
        );
    }

    println!();
    println!("pareto front ({} entries):", study.front.len());
    for e in study.front.entries() {
        println!(
            "{:>5}  accuracy {:.4}  cost/100 ${:.4}",
            e.trial,
            e.objectives.accuracy,
            e.objectives.cost * 100.0
        );
    }

    println!();
    if let Some(bounds) = cost_bounds(study) {
        let max_cost = bounds.1;
        let hv = hypervolume(&study.front, &ObjectiveVector::new(0.0, max_cost * 1.01))?;
        println!("hypervolume (ref: 0 accuracy, 1.01×max cost): {hv:.6}");
        println!("pareto_area (observed cost bounds): {:.6}", pareto_area(&study.front, bounds)?);
    }

    let baseline_id = baseline.or_else(|| {
        study
            .trial(0)
            .filter(|t| t.origin == TrialOrigin::StaticSeed)
            .map(|t| t.id)
    });
    match baseline_id {
        Some(id) => {
            let t = study.trial(id).ok_or(Error::UnmatchedTrial(id))?;
            match t.objectives {
                Some(obj) => {
                    let gains = baseline_gains(&study.front, &obj)?;
                    println!(
                        "gains over baseline trial {id}: accuracy {:+.4}{}, cost reduction {}",
                        gains.accuracy_delta,
                        if gains.accuracy_delta_extrapolated {
                            " (extrapolated)"
                        } else {
                            ""
                        },
                        gains
                            .cost_reduction
                            .map(|r| format!("{:.1}%", r * 100.0))
                            .unwrap_or("n/a".into())
                    );
                }
                None => println!("baseline trial {id} has no objectives; gains skipped"),
            }
        }
        None => println!("no baseline trial (pass --baseline); gains skipped"),
    }

    let pruned: Vec<&Trial> = study
        .trials
        .iter()
        .filter(|t| t.status == TrialStatus::Pruned)
        .collect();
    let saved: u64 = pruned
        .iter()
        .map(|t| (study.config.questions as u64).saturating_sub(t.records.len() as u64))
        .sum();
    println!(
        "pruner: {} trials pruned, {} evaluations saved",
        pruned.len(),
        saved
    );
    Ok(())
}

/// Full trial table as CSV.
pub fn trials_csv(study: &Study) -> String {
    let mut text = String::from(
        "trial_id,origin,status,accuracy,cost_usd,cost_per_100,latency_s,flow,llm,retriever,splitter,extras,on_front\n",
    );
    for row in rows(study) {
        let t = row.trial;
        let (acc, cost, cost100, lat) = match t.objectives {
            Some(o) => (
                format!("{:.12}", o.accuracy),
                format!("{:.12e}", o.cost),
                format!("{:.12e}", o.cost * 100.0),
                o.latency.map(|l| format!("{l:.9}")).unwrap_or_default(),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            t.id,
            origin_str(t.origin),
            status_str(t.status),
            acc,
            cost,
            cost100,
            lat,
            flow_of(&t.config),
            llm_of(&t.config),
            lookup(&t.config, &["retriever"]),
            lookup(&t.config, &["splitter"]),
            extras(&t.config),
            row.on_front
        ));
    }
    text
}

/// Front plot data as CSV: completed trials only, cost ascending, with a
/// precomputed log10 cost column.
pub fn front_csv(study: &Study) -> String {
    let mut text = String::from("trial_id,accuracy,cost_usd,log10_cost,on_front,flow,llm\n");
    for row in rows(study) {
        let t = row.trial;
        if t.status != TrialStatus::Completed {
            continue;
        }
        let Some(o) = t.objectives else { continue };
        text.push_str(&format!(
            "{},{:.12},{:.12e},{:.12},{},{},{}\n",
            t.id,
            o.accuracy,
            o.cost,
            o.cost.log10(),
            row.on_front,
            flow_of(&t.config),
            llm_of(&t.config)
        ));
    }
    text
}

/// Three-arm seeding comparison over a shared cost window: per trial, the
/// cumulative pareto_area of each arm.
pub fn seeding_comparison_csv(arms: &[(&str, Study)]) -> Result<String> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, study) in arms {
        if let Some((a, b)) = cost_bounds(study) {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    if lo >= hi {
        return Err(Error::EmptyInput("no completed trials in any arm".into()));
    }
    let mut text = String::from("arm,trial,cumulative_evaluations,pareto_area\n");
    for (label, study) in arms {
        let mut trials: Vec<&Trial> = study.trials.iter().collect();
        trials.sort_by_key(|t| t.id);
        let mut front = ParetoFront::new();
        let mut evals = 0u64;
        for t in trials {
            evals += t.records.len() as u64;
            if t.status == TrialStatus::Completed {
                if let Some(o) = t.objectives {
                    front.insert(t.id, o);
                }
            }
            let area = pareto_area(&front, (lo, hi)).unwrap_or(0.0);
            text.push_str(&format!("{label},{},{evals},{area:.12}\n", t.id));
        }
    }
    Ok(text)
}
