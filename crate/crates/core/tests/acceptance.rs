//! Acceptance suite: ten end-to-end criteria covering Pareto math, pruner
//! arithmetic and savings, sampler efficacy, transfer seeding, search-space
//! cardinality, determinism and resume, report metrics, and the external
//! evaluator protocol. Each criterion prints one PASS line (visible with
//! `--nocapture`); a failed assertion is the FAIL case.
//!
//! Tolerances are pinned in each criterion and chosen once against
//! independent oracles (pairwise dominance scans, Monte-Carlo integration,
//! re-derived closed forms, exhaustive enumeration).

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use flowopt::harness::external::{ConnectionSettings, ExternalEvaluator};
use flowopt::harness::sim::{desk1, desk2, SimBenchmarkSpec, SimEvaluator};
use flowopt::harness::{Evaluator, SecondObjective, TrialStatus};
use flowopt::motpe::TpeConfig;
use flowopt::pareto::{
    baseline_gains, front_of, front_shift, hypervolume, ObjectiveVector, ParetoFront,
};
use flowopt::pruner::{confidence_corner, CostModel, PartialEvalStats, PrunerConfig};
use flowopt::seeding::SeedPlan;
use flowopt::space::default_space;
use flowopt::study::{
    ablate_pruner, resume, run_study, EvaluatorBinding, Study, StudyConfig, TrialOrigin,
};
use flowopt::Error;

fn ov(accuracy: f64, cost: f64) -> ObjectiveVector {
    ObjectiveVector::new(accuracy, cost)
}

/// Criterion 1 — Pareto correctness: front_of equals the O(n²) pairwise
/// dominance oracle on 1,000 randomized point sets (sizes up to 10^4), in
/// under 60 s.
#[test]
fn criterion_01_pareto_correctness() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACC0_0001);
    for case in 0..1000u64 {
        // Mostly small sets; every 100th case is the full 10^4.
        let n = if case % 100 == 99 {
            10_000
        } else {
            rng.random_range(1..=1_000)
        };
        let dup_pool = 1 + n / 3; // force ties and duplicates
        let points: Vec<(u64, ObjectiveVector)> = (0..n as u64)
            .map(|i| {
                let acc = (rng.random_range(0..=dup_pool) as f64) / dup_pool as f64;
                let cost = 10f64.powf(rng.random_range(-4.0..0.0));
                (i, ov(acc, cost))
            })
            .collect();
        let fast = front_of(&points);
        let oracle = flowopt::pareto::front_oracle(&points);
        let mut fast_ids: Vec<u64> = fast.entries().iter().map(|e| e.trial).collect();
        let mut oracle_ids: Vec<u64> = oracle.iter().map(|(id, _)| *id).collect();
        fast_ids.sort_unstable();
        oracle_ids.sort_unstable();
        assert_eq!(fast_ids, oracle_ids, "case {case} (n = {n})");
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 1 (pareto correctness): PASS ({elapsed:?})");
}

/// Criterion 2 — Hypervolume: matches a 10^6-sample Monte-Carlo estimate
/// within 3 standard errors on 100 random fronts, and exactly matches
/// hand-computed rectangle sums on 20 constructed staircases.
#[test]
fn criterion_02_hypervolume() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xACC0_0002);

    // Constructed staircases: the hypervolume of a 2D front against
    // reference (0 accuracy, c_ref) is the sum over cost-sorted entries of
    // (c_ref - cost_i) * (acc_i - acc_{i-1}).
    for case in 0..20 {
        let k = 1 + case % 7;
        let mut points = Vec::new();
        for i in 0..k {
            // Strictly increasing accuracy and cost: all nondominated.
            points.push((i as u64, ov(0.1 + 0.08 * i as f64, 0.5 + 0.25 * i as f64)));
        }
        let front = front_of(&points);
        let c_ref = 0.5 + 0.25 * k as f64 + 1.0;
        let mut expected = 0.0;
        let mut prev_acc = 0.0;
        for (_, p) in &points {
            expected += (c_ref - p.cost) * (p.accuracy - prev_acc);
            prev_acc = p.accuracy;
        }
        let hv = hypervolume(&front, &ov(0.0, c_ref)).unwrap();
        assert!(
            (hv - expected).abs() < 1e-12,
            "case {case}: {hv} vs {expected}"
        );
    }

    // Monte-Carlo cross-check on random fronts.
    for case in 0..100 {
        let n = rng.random_range(3..=200);
        let points: Vec<(u64, ObjectiveVector)> = (0..n as u64)
            .map(|i| (i, ov(rng.random_range(0.0..1.0), rng.random_range(0.01..2.0))))
            .collect();
        let front = front_of(&points);
        let c_ref = 2.5;
        let hv = hypervolume(&front, &ov(0.0, c_ref)).unwrap();

        // Dominated-region membership: accuracy of the cheapest front entry
        // at cost <= sample cost must exceed the sample accuracy. Entries
        // sorted by cost have ascending accuracy.
        let mut entries: Vec<(f64, f64)> = front
            .entries()
            .iter()
            .map(|e| (e.objectives.cost, e.objectives.accuracy))
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = 1.0 * c_ref;
        let samples = 1_000_000u64;
        let mut hits = 0u64;
        for _ in 0..samples {
            let a = rng.random_range(0.0..1.0);
            let c = rng.random_range(0.0..c_ref);
            let best = entries
                .partition_point(|(cost, _)| *cost <= c)
                .checked_sub(1)
                .map(|i| entries[i].1)
                .unwrap_or(-1.0);
            if best >= a {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        let estimate = p * total;
        let se = (p * (1.0 - p) / samples as f64).sqrt() * total;
        assert!(
            (hv - estimate).abs() <= 3.0 * se.max(1e-9),
            "case {case}: sweep {hv}, MC {estimate} ± {se}"
        );
    }
    println!("criterion 2 (hypervolume): PASS");
}

/// Criterion 3 — Pruner arithmetic: confidence_corner reproduces
/// independently recomputed values for 50 randomized stats vectors to 1e-12
/// relative error, including the z = 1.645 (90%) configuration.
#[test]
fn criterion_03_pruner_arithmetic() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xACC0_0003);
    for case in 0..50 {
        let n = rng.random_range(5..200u64);
        let mut stats = PartialEvalStats::new();
        let mut costs = Vec::new();
        let mut passes = 0u64;
        for _ in 0..n {
            let passed = rng.random_range(0.0..1.0) < 0.6;
            let cost = rng.random_range(0.001..1.0);
            costs.push(cost);
            if passed {
                passes += 1;
            }
            stats
                .update(&flowopt::harness::EvalRecord::success(
                    "q", passed, cost, cost * 2.0,
                ))
                .unwrap();
        }
        let cfg = PrunerConfig {
            z: if case % 2 == 0 {
                1.645
            } else {
                rng.random_range(0.5..3.0)
            },
            cost_model: if case % 3 == 0 {
                CostModel::Lognormal
            } else {
                CostModel::Normal
            },
            ..PrunerConfig::default()
        };
        let (c_low, a_high) = confidence_corner(&stats, &cfg).unwrap();

        // Independent recomputation from the documented closed forms.
        let nf = n as f64;
        let acc = passes as f64 / nf;
        let want_a = (acc + cfg.z * (acc * (1.0 - acc) / nf).sqrt()).min(1.0);
        let mut sorted = costs.clone();
        sorted.sort_by(f64::total_cmp);
        let p80 = sorted[((0.8 * nf).ceil() as usize).max(1) - 1];
        let mean = costs.iter().sum::<f64>() / nf;
        let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let want_c = match cfg.cost_model {
            CostModel::Normal => (p80 - cfg.z * var.sqrt() / nf.sqrt()).max(0.0),
            CostModel::Lognormal => {
                let logs: Vec<f64> = costs.iter().map(|c| c.ln()).collect();
                let lmean = logs.iter().sum::<f64>() / nf;
                let lvar = logs.iter().map(|l| (l - lmean).powi(2)).sum::<f64>() / (nf - 1.0);
                (lmean - cfg.z * lvar.sqrt() / nf.sqrt()).exp()
            }
        };
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
        assert!(rel(a_high, want_a) < 1e-12, "case {case} accuracy bound");
        assert!(rel(c_low, want_c) < 1e-12, "case {case} cost bound");
    }
    println!("criterion 3 (pruner arithmetic): PASS");
}

fn desk_config(
    spec: &SimBenchmarkSpec,
    benchmark: &str,
    storage: PathBuf,
    max_trials: u64,
    seed: u64,
    random_seeds: usize,
    pruner: Option<PrunerConfig>,
) -> StudyConfig {
    StudyConfig {
        name: format!("acc-{benchmark}-{seed}"),
        space: spec.space.clone(),
        objective: SecondObjective::Cost,
        seed_plan: SeedPlan {
            static_configs: vec![],
            random_count: random_seeds,
            transfer: vec![],
        },
        tpe: TpeConfig::default(),
        pruner,
        max_trials,
        parallelism: 4,
        seed,
        questions: 50,
        evaluator: EvaluatorBinding::Builtin {
            benchmark: benchmark.into(),
        },
        storage,
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Criterion 4 — Pruner safety and savings on desk-1 (300 trials, 10
/// repetition seeds): the pruner arm finishes with ≥30% fewer evaluations
/// and retains ≥95% of the no-pruner arm's final pareto_area (medians).
#[test]
fn criterion_04_pruner_savings() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let spec = desk1();
    let mut template = desk_config(
        &spec,
        "desk-1",
        dir.path().join("ablate.log"),
        300,
        0,
        20,
        Some(PrunerConfig::default()),
    );
    // A deeper question set makes the evaluation budget realistic (real
    // benchmarks run hundreds of QA pairs per trial); pruned trials still
    // stop within a few checks.
    template.questions = 100;
    let seeds: Vec<u64> = (1..=10).collect();
    let report = ablate_pruner(&template, &seeds).unwrap();
    let savings: Vec<f64> = report
        .pruner_on
        .iter()
        .zip(&report.pruner_off)
        .map(|(on, off)| 1.0 - on.total_evaluations as f64 / off.total_evaluations as f64)
        .collect();
    let ratios: Vec<f64> = report
        .pruner_on
        .iter()
        .zip(&report.pruner_off)
        .map(|(on, off)| on.final_pareto_area / off.final_pareto_area)
        .collect();
    let med_savings = median(savings);
    let med_ratio = median(ratios);
    let elapsed = started.elapsed();
    assert!(
        med_savings >= 0.30,
        "median evaluation savings {med_savings:.3} < 0.30"
    );
    assert!(
        med_ratio >= 0.95,
        "median pareto-area ratio {med_ratio:.4} < 0.95"
    );
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    println!(
        "criterion 4 (pruner savings): PASS (savings {:.1}%, area ratio {:.3}, {elapsed:?})",
        med_savings * 100.0,
        med_ratio
    );
}

fn true_hv(spec: &SimBenchmarkSpec) -> (f64, ObjectiveVector) {
    let (front, all) = spec.true_front();
    let max_cost = all.iter().map(|(_, o)| o.cost).fold(0.0f64, f64::max);
    let reference = ov(0.0, max_cost * 1.01);
    (hypervolume(&front, &reference).unwrap(), reference)
}

fn final_hv(study: &Study, reference: &ObjectiveVector) -> f64 {
    hypervolume(&study.front, reference).unwrap()
}

/// Criterion 5 — Sampler efficacy: on desk-1 and desk-2 (conditional
/// interactions), MO-TPE's median final hypervolume over 10 seeds strictly
/// exceeds pure random search at 200 trials and reaches ≥90% of the
/// enumerated true-front hypervolume.
#[test]
fn criterion_05_sampler_efficacy() {
    let dir = tempfile::tempdir().unwrap();
    for benchmark in ["desk-1", "desk-2"] {
        let spec = if benchmark == "desk-1" { desk1() } else { desk2() };
        let (true_volume, reference) = true_hv(&spec);
        let mut tpe_hv = Vec::new();
        let mut random_hv = Vec::new();
        for seed in 1..=10u64 {
            // Sampler arm: 50 random warmup trials, then 150 MO-TPE
            // proposals with a front-focused good set (gamma 0.10, a
            // standard TPE quantile). 200 questions per trial keeps the
            // per-trial accuracy noise small enough that both arms' fronts
            // reflect real config quality.
            let mut tpe_cfg = desk_config(
                &spec,
                benchmark,
                dir.path().join(format!("{benchmark}-tpe-{seed}.log")),
                200,
                seed,
                50,
                None,
            );
            tpe_cfg.tpe.gamma = 0.10;
            tpe_cfg.questions = 200;
            // Sequential execution: each proposal sees the full history,
            // so the comparison measures the sampler, not scheduling.
            tpe_cfg.parallelism = 1;
            let tpe = run_study(tpe_cfg).unwrap();
            // Pure random search: the seed plan spans the whole budget, so
            // the sampler is never consulted.
            let mut rand_cfg = desk_config(
                &spec,
                benchmark,
                dir.path().join(format!("{benchmark}-rand-{seed}.log")),
                200,
                seed,
                200,
                None,
            );
            rand_cfg.questions = 200;
            rand_cfg.parallelism = 1;
            let random = run_study(rand_cfg).unwrap();
            tpe_hv.push(final_hv(&tpe, &reference));
            random_hv.push(final_hv(&random, &reference));
        }
        let med_tpe = median(tpe_hv);
        let med_random = median(random_hv);
        assert!(
            med_tpe > med_random,
            "{benchmark}: MO-TPE median {med_tpe:.4} not above random {med_random:.4}"
        );
        assert!(
            med_tpe >= 0.90 * true_volume,
            "{benchmark}: MO-TPE median {med_tpe:.4} < 90% of true {true_volume:.4}"
        );
        println!(
            "criterion 5 ({benchmark}): PASS (tpe {med_tpe:.4}, random {med_random:.4}, true {true_volume:.4})"
        );
    }
    println!("criterion 5 (sampler efficacy): PASS");
}

/// First trial index at which the cumulative front reaches the threshold
/// hypervolume, or the budget when never reached.
fn trials_to_threshold(study: &Study, reference: &ObjectiveVector, threshold: f64) -> f64 {
    let mut trials: Vec<_> = study.trials.iter().collect();
    trials.sort_by_key(|t| t.id);
    let mut front = ParetoFront::new();
    for t in &trials {
        if t.status == TrialStatus::Completed {
            if let Some(o) = t.objectives {
                front.insert(t.id, o);
                if hypervolume(&front, reference).unwrap() >= threshold {
                    return t.id as f64 + 1.0;
                }
            }
        }
    }
    trials.len() as f64 + 1.0
}

/// Criterion 6 — Transfer seeding: with a prior desk-1 study available,
/// transfer-seeded studies reach 80% of the true-front hypervolume in
/// median fewer trials than random-seeded studies (10 repetitions).
#[test]
fn criterion_06_transfer_seeding() {
    let dir = tempfile::tempdir().unwrap();
    let spec = desk1();
    let (true_volume, reference) = true_hv(&spec);
    let threshold = 0.80 * true_volume;

    // One prior study, reused by every transfer repetition. It gets a
    // full search budget so its front is worth transferring.
    let prior_path = dir.path().join("prior.log");
    let mut prior_cfg = desk_config(&spec, "desk-1", prior_path.clone(), 300, 97, 50, None);
    prior_cfg.tpe.gamma = 0.10;
    prior_cfg.questions = 200;
    prior_cfg.parallelism = 1;
    run_study(prior_cfg).unwrap();

    let mut transfer_trials = Vec::new();
    let mut random_trials = Vec::new();
    for seed in 1..=10u64 {
        let transfer = flowopt::study::transfer_from_logs(
            &[prior_path.clone()],
            &spec.space,
            3,
            10,
            seed,
        )
        .unwrap();
        let mut cfg = desk_config(
            &spec,
            "desk-1",
            dir.path().join(format!("transfer-{seed}.log")),
            100,
            seed,
            10,
            None,
        );
        cfg.seed_plan.transfer = transfer;
        cfg.tpe.gamma = 0.10;
        cfg.questions = 200;
        cfg.parallelism = 1;
        let transfer_study = run_study(cfg).unwrap();

        // The random arm differs only in its seed plan: 20 random seeds
        // against the transfer arm's 10 transferred + 10 random.
        let mut rand_cfg = desk_config(
            &spec,
            "desk-1",
            dir.path().join(format!("random-{seed}.log")),
            100,
            seed,
            20,
            None,
        );
        rand_cfg.tpe.gamma = 0.10;
        rand_cfg.questions = 200;
        rand_cfg.parallelism = 1;
        let random_study = run_study(rand_cfg).unwrap();

        transfer_trials.push(trials_to_threshold(&transfer_study, &reference, threshold));
        random_trials.push(trials_to_threshold(&random_study, &reference, threshold));
    }
    let med_transfer = median(transfer_trials);
    let med_random = median(random_trials);
    assert!(
        med_transfer < med_random,
        "transfer median {med_transfer} trials not below random {med_random}"
    );
    println!(
        "criterion 6 (transfer seeding): PASS (transfer {med_transfer}, random {med_random} trials to 80%)"
    );
}

/// Criterion 7 — Cardinality: the shipped default space's cardinality_log10
/// lies in [20, 26]; exact enumeration on sub-spaces up to 10^6 configs.
#[test]
fn criterion_07_cardinality() {
    let space = default_space();
    let log10 = space.cardinality_log10();
    assert!(
        (20.0..=26.0).contains(&log10),
        "default space cardinality 10^{log10:.2} outside [10^20, 10^26]"
    );

    // Exact enumeration cross-checks on benchmark sub-spaces.
    for (spec, expected) in [(desk1(), 18_432usize), (desk2(), 8_640usize)] {
        let enumerated = spec.enumerate().len();
        assert_eq!(enumerated, expected, "{}", spec.name);
        let by_log = spec.space.cardinality_log10();
        assert!(
            (by_log - (expected as f64).log10()).abs() < 1e-9,
            "{}: log10 {} vs enumerated {}",
            spec.name,
            by_log,
            expected
        );
    }
    println!("criterion 7 (cardinality): PASS (default space 10^{log10:.2})");
}

fn strip_timestamps(log: &str) -> String {
    log.lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("ts");
            v.to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Criterion 8 — Determinism and resume: a P=1 fixed-seed run produces a
/// byte-identical log (timestamps excluded) across two runs; crash
/// injection at 10 random points followed by resume yields exactly
/// max_trials trials and the same final front as the uninterrupted run.
#[test]
fn criterion_08_determinism_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let spec = desk2();
    let make = |path: PathBuf| {
        let mut cfg = desk_config(&spec, "desk-2", path, 40, 11, 10, Some(PrunerConfig::default()));
        cfg.parallelism = 1;
        cfg
    };

    let a = dir.path().join("a.log");
    let b = dir.path().join("b.log");
    let full = run_study(make(a.clone())).unwrap();
    run_study(make(b.clone())).unwrap();
    let log_a = std::fs::read_to_string(&a).unwrap();
    let log_b = std::fs::read_to_string(&b).unwrap();
    assert_eq!(strip_timestamps(&log_a), strip_timestamps(&log_b));

    let mut rng = ChaCha12Rng::seed_from_u64(0xACC0_0008);
    let bytes = log_a.as_bytes();
    for round in 0..10 {
        // Crash anywhere after the study-meta record, including mid-line.
        let meta_end = log_a.find('\n').unwrap() + 1;
        let cut = rng.random_range(meta_end..bytes.len());
        let crash = dir.path().join(format!("crash-{round}.log"));
        std::fs::write(&crash, &bytes[..cut]).unwrap();
        let resumed = resume(&crash).unwrap();
        assert_eq!(resumed.trials.len(), 40, "round {round} (cut {cut})");
        assert_eq!(
            resumed.front.entries(),
            full.front.entries(),
            "round {round} (cut {cut})"
        );
    }
    println!("criterion 8 (determinism & resume): PASS");
}

/// Criterion 9 — Report metrics: baseline_gains reproduces (+0.06, 0.37) on
/// the constructed front, and front_shift reproduces the published
/// large-model row deltas and table means within rounding.
#[test]
fn criterion_09_report_metrics() {
    // Constructed front mirroring the reported 6%-accuracy / 37%-cost case.
    let front = front_of(&[(0, ov(0.66, 1.0)), (1, ov(0.60, 0.63))]);
    let gains = baseline_gains(&front, &ov(0.60, 1.0)).unwrap();
    assert!((gains.accuracy_delta - 0.06).abs() < 1e-12);
    assert!((gains.cost_reduction.unwrap() - 0.37).abs() < 1e-12);

    // Published rows: (small acc %, large acc %, small cost, large cost,
    // delta pp, multiplier).
    let rows = [
        (55.8, 67.6, 0.000197, 0.003214, 11.7, 16.3),
        (67.6, 73.5, 0.000392, 0.006585, 5.8, 16.7),
        (70.5, 85.2, 0.000740, 0.012132, 14.7, 16.3),
        (82.3, 85.2, 0.007168, 0.119495, 2.9, 16.6),
        (50.0, 90.6, 0.000118, 0.029929, 40.6, 253.6),
        (41.1, 71.4, 0.000099, 0.000506, 30.2, 5.1),
        (58.8, 73.5, 0.000257, 0.050662, 14.7, 197.1),
        (73.5, 91.1, 0.004549, 0.073003, 17.6, 16.0),
    ];
    let before: Vec<(u64, ObjectiveVector)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i as u64, ov(r.0 / 100.0, r.2)))
        .collect();
    let after: Vec<(u64, ObjectiveVector)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i as u64, ov(r.1 / 100.0, r.3)))
        .collect();
    // The published rows are mutually nondominated (cost-sorted accuracy is
    // strictly increasing), so the front keeps every one of them.
    let front = front_of(&before);
    assert_eq!(front.len(), rows.len());
    let shift = front_shift(&front, &after).unwrap();
    // Published values are rounded to one decimal place, and some rows are
    // off by a last-digit unit against their own columns (55.8 → 67.6 is
    // 11.8, printed 11.7), so allow 1.5 units in the last printed digit.
    for (row, published) in shift.rows.iter().zip(&rows) {
        assert!(
            (row.accuracy_delta_pp - published.4).abs() <= 0.15,
            "row {}: {} vs {}",
            row.trial,
            row.accuracy_delta_pp,
            published.4
        );
        assert!(
            (row.cost_multiplier - published.5).abs() / published.5 <= 0.05,
            "row {}: {} vs {}",
            row.trial,
            row.cost_multiplier,
            published.5
        );
    }
    assert!((shift.mean_accuracy_delta_pp - 17.3).abs() < 0.05);
    assert!((shift.mean_cost_multiplier - 67.0).abs() / 67.0 < 0.01);
    println!("criterion 9 (report metrics): PASS");
}

fn stub_settings(args: &[&str], timeout_ms: u64) -> ConnectionSettings {
    let mut command = vec![env!("CARGO_BIN_EXE_stub_evaluator").to_string()];
    command.extend(args.iter().map(|s| s.to_string()));
    ConnectionSettings {
        command,
        timeout: Duration::from_millis(timeout_ms),
        max_retries: 3,
        backoff_base: Duration::from_millis(10),
        seed: 1,
    }
}

/// Criterion 10 — Protocol robustness: conformance against the shipped stub
/// peer, covering golden responses, rate-limit retry, timeout, malformed
/// lines, and version mismatch.
#[test]
fn criterion_10_protocol_robustness() {
    let spec = desk1();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACC0_0010);
    let config = spec.space.sample_random(&mut rng);

    // Golden behavior: the stub answers with the desk-1 simulation, so its
    // records equal a local evaluation bit for bit.
    let external = ExternalEvaluator::connect(stub_settings(&[], 5_000)).unwrap();
    let local = SimEvaluator::new(spec.clone());
    for (trial, question) in [(3u64, "q0001"), (3, "q0002"), (9, "q0001")] {
        let got = external.evaluate(&config, trial, question);
        let want = local.evaluate(&config, trial, question);
        assert_eq!(got, want, "trial {trial} {question}");
    }
    drop(external);

    // Rate limits are retried with backoff until the peer recovers.
    let external = ExternalEvaluator::connect(stub_settings(&["--rate-limits", "2"], 5_000)).unwrap();
    let got = external.evaluate(&config, 1, "q0001");
    assert!(got.error.is_none(), "rate-limited call should recover");
    drop(external);

    // Timeouts surface as protocol-errored records, not hangs.
    let external =
        ExternalEvaluator::connect(stub_settings(&["--mode", "silent"], 300)).unwrap();
    let started = Instant::now();
    let got = external.evaluate(&config, 1, "q0001");
    assert!(got.error.is_some());
    assert!(started.elapsed() < Duration::from_secs(3));
    drop(external);

    // Malformed response lines surface as protocol errors.
    let external =
        ExternalEvaluator::connect(stub_settings(&["--mode", "malformed"], 2_000)).unwrap();
    let got = external.evaluate(&config, 1, "q0001");
    assert!(got.error.is_some());
    drop(external);

    // A peer speaking the wrong protocol version is rejected at handshake.
    let err = ExternalEvaluator::connect(stub_settings(&["--mode", "wrong-version"], 2_000));
    assert!(matches!(err, Err(Error::VersionMismatch(_))));

    println!("criterion 10 (protocol robustness): PASS");
}

/// Origins sanity used by the acceptance narrative: a budget equal to the
/// seed-plan size never consults the sampler.
#[test]
fn seeds_exhaust_budget_without_sampler() {
    let dir = tempfile::tempdir().unwrap();
    let spec = desk2();
    let cfg = desk_config(&spec, "desk-2", dir.path().join("s.log"), 6, 2, 6, None);
    let study = run_study(cfg).unwrap();
    assert!(study.trials.iter().all(|t| t.origin != TrialOrigin::Sampler));
}
