use approx::assert_relative_eq;
use entropic_anneal::anneal::{
    calibrate_k_safe, controller_decide, perturb_cost, run_annealing, write_jsonl,
    CalibrationSettings, ControllerConfig, CostProcess, Decision, Schedule, ScriptedCost,
    StaticCost,
};
use entropic_anneal::harness::{generate_task, SyntheticTask};
use entropic_anneal::io::cost_from_json;
use entropic_anneal::{CostMatrix, Error, SolveConfig};
use proptest::prelude::*;

fn config(k_safe: Option<f64>, schedule: Schedule) -> ControllerConfig {
    ControllerConfig {
        name: "test".into(),
        k_safe,
        schedule,
        epsilon_start: 1.0,
        epsilon_target: 0.01,
        max_steps: 400,
        max_consecutive_pauses: 200,
        hold_steps: 0,
    }
}

fn budget() -> SolveConfig {
    SolveConfig {
        max_iterations: 200,
        ..SolveConfig::default()
    }
}

/// Cost with zeros on `perm` and `margin` elsewhere.
fn permutation_cost(perm: &[usize], margin: f64) -> CostMatrix {
    let n = perm.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if perm[i] == j { 0.0 } else { margin })
                .collect()
        })
        .collect();
    CostMatrix::from_rows(&rows).unwrap()
}

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn decision_examples() {
    assert_eq!(controller_decide(0.04, 0.1, 0.5), Decision::Cool);
    assert_eq!(controller_decide(0.06, 0.1, 0.5), Decision::Pause);
    assert_eq!(controller_decide(0.05, 0.1, 0.5), Decision::Cool);
}

#[test]
fn perturbed_cost_matches_golden() {
    let c = CostMatrix::from_rows(&[
        vec![0.0, 1.0, 2.0],
        vec![1.0, 0.0, 1.0],
        vec![2.0, 1.0, 0.0],
    ])
    .unwrap();
    let golden = cost_from_json(&data("perturbed_cost.json")).unwrap();
    assert_eq!(perturb_cost(&c, 0.1, 42).unwrap(), golden);
    assert_ne!(perturb_cost(&c, 0.1, 43).unwrap(), golden);
    assert_eq!(perturb_cost(&c, 0.0, 42).unwrap(), c);
}

fn check_run_invariants(cfg: &ControllerConfig, process: &dyn CostProcess) {
    let run = run_annealing(process, cfg, &budget()).unwrap();
    let h = &run.history;
    for w in h.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(b.epsilon <= a.epsilon);
        if a.epsilon > cfg.epsilon_target {
            match a.decision {
                Decision::Pause => assert_eq!(a.epsilon.to_bits(), b.epsilon.to_bits()),
                Decision::Cool => assert!(b.epsilon < a.epsilon),
            }
        }
    }
    for s in h {
        let replay = match cfg.k_safe {
            Some(k) => controller_decide(s.drift, s.epsilon, k),
            None => Decision::Cool,
        };
        assert_eq!(replay, s.decision, "step {}", s.step);
        if let (Some(k), Decision::Cool) = (cfg.k_safe, s.decision) {
            assert!(s.drift <= k * s.epsilon);
        }
    }
    let again = run_annealing(process, cfg, &budget()).unwrap();
    assert_eq!(&again.history, h);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn runs_respect_controller_semantics(
        seed in 0u64..1000,
        k in 0.05f64..2.0,
        a in 0.0f64..3.0,
        alpha in 0.7f64..0.97,
    ) {
        let task = generate_task(5, 1.0, (a, 0.1), seed).unwrap();
        check_run_invariants(&config(Some(k), Schedule::Exponential { alpha }), &task);
        check_run_invariants(&config(None, Schedule::Exponential { alpha }), &task);
        check_run_invariants(&config(Some(k), Schedule::Quadratic { c: 0.5 }), &task);
    }

    #[test]
    fn decide_is_the_linear_law(drift in 0.0f64..10.0, eps in 1e-4f64..2.0, k in 1e-3f64..5.0) {
        let d = controller_decide(drift, eps, k);
        prop_assert_eq!(d == Decision::Cool, drift <= k * eps);
    }
}

#[test]
fn quadratic_steps_keep_delta_over_eps_squared_fixed() {
    let c = 0.5;
    let cfg = config(None, Schedule::Quadratic { c });
    let task = generate_task(4, 1.0, (0.0, 0.0), 1).unwrap();
    let run = run_annealing(&task, &cfg, &budget()).unwrap();
    let mut checked = 0;
    for w in run.history.windows(2) {
        let (e0, e1) = (w[0].epsilon, w[1].epsilon);
        if e1 > cfg.epsilon_target {
            assert_relative_eq!((e0 - e1) / (e0 * e0), c, max_relative = 1e-9);
            checked += 1;
        }
    }
    assert!(checked > 10);
}

#[test]
fn exponential_ratio_grows_by_the_temperature_ratio() {
    let alpha = 0.9;
    let cfg = config(None, Schedule::Exponential { alpha });
    let task = generate_task(4, 1.0, (0.0, 0.0), 1).unwrap();
    let run = run_annealing(&task, &cfg, &budget()).unwrap();
    let ratios: Vec<(f64, f64)> = run
        .history
        .windows(2)
        .filter(|w| w[1].epsilon > cfg.epsilon_target)
        .map(|w| {
            let (e0, e1) = (w[0].epsilon, w[1].epsilon);
            (e0, (e0 - e1) / (e0 * e0))
        })
        .collect();
    let (e_first, r_first) = ratios[0];
    let (e_last, r_last) = *ratios.last().unwrap();
    assert_relative_eq!(r_first, (1.0 - alpha) / e_first, max_relative = 1e-9);
    assert_relative_eq!(r_last / r_first, e_first / e_last, max_relative = 1e-9);
}

#[test]
fn static_cost_never_pauses_and_matches_the_raw_schedule() {
    let task = generate_task(6, 1.0, (0.0, 0.0), 4).unwrap();
    let process = StaticCost::with_reference(task.base_cost.clone(), task.planted.clone());
    let raw = run_annealing(
        &process,
        &config(None, Schedule::Exponential { alpha: 0.9 }),
        &budget(),
    )
    .unwrap();
    let eph = run_annealing(
        &process,
        &config(Some(0.5), Schedule::Exponential { alpha: 0.9 }),
        &budget(),
    )
    .unwrap();
    assert!(eph.history.iter().all(|s| s.decision == Decision::Cool));
    assert_eq!(eph.history.len(), raw.history.len());
    assert!(eph.reached_target);
}

#[test]
fn pauses_only_while_the_cost_is_moving() {
    let n = 5;
    let planted: Vec<usize> = (0..n).collect();
    let other: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let a = permutation_cost(&planted, 1.0);
    let b = permutation_cost(&other, 1.0);
    // the cost flips between two permutations for 8 steps, then settles
    let mut costs: Vec<CostMatrix> = (0..8)
        .map(|t| if t % 2 == 0 { a.clone() } else { b.clone() })
        .collect();
    costs.push(a.clone());
    let process = ScriptedCost {
        costs,
        reference: Some(planted),
    };
    let mut cfg = config(Some(0.5), Schedule::Exponential { alpha: 0.8 });
    cfg.epsilon_start = 0.3;
    let run = run_annealing(&process, &cfg, &SolveConfig::default()).unwrap();
    let h = &run.history;
    assert!(h[..8].iter().any(|s| s.decision == Decision::Pause));
    assert!(h[9..].iter().all(|s| s.decision == Decision::Cool));
    assert!(run.reached_target);
}

#[test]
fn stalled_controller_returns_its_history() {
    let n = 4;
    let planted: Vec<usize> = (0..n).collect();
    let other: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let costs: Vec<CostMatrix> = (0..100)
        .map(|t| permutation_cost(if t % 2 == 0 { &planted } else { &other }, 1.0))
        .collect();
    let process = ScriptedCost {
        costs,
        reference: None,
    };
    let mut cfg = config(Some(0.1), Schedule::Exponential { alpha: 0.8 });
    cfg.epsilon_start = 0.3;
    cfg.max_consecutive_pauses = 5;
    let fail = run_annealing(&process, &cfg, &SolveConfig::default()).unwrap_err();
    assert!(matches!(fail.error, Error::ControllerStalled { .. }));
    assert!(!fail.history.is_empty());
}

#[test]
fn calibration_finds_a_constructed_collapse() {
    let n = 5;
    let planted: Vec<usize> = (0..n).collect();
    let swaps: [Vec<usize>; 3] = [
        vec![1, 0, 2, 3, 4],
        vec![0, 2, 1, 3, 4],
        vec![0, 1, 2, 4, 3],
    ];
    let alpha = 0.8;
    let switch = 10;
    let procs: Vec<ScriptedCost> = swaps
        .iter()
        .map(|w| {
            let mut costs = vec![permutation_cost(&planted, 1.0); switch];
            costs.push(permutation_cost(w, 1.0));
            ScriptedCost {
                costs,
                reference: Some(planted.clone()),
            }
        })
        .collect();
    let refs: Vec<&dyn CostProcess> = procs.iter().map(|p| p as &dyn CostProcess).collect();
    let res = calibrate_k_safe(
        &refs,
        alpha,
        &SolveConfig::default(),
        &CalibrationSettings::default(),
    )
    .unwrap();
    let constructed = alpha.powi(switch as i32);
    assert!(res.collapse_epsilon <= constructed / alpha * (1.0 + 1e-12));
    assert!(res.collapse_epsilon >= constructed * alpha * (1.0 - 1e-12));
    assert!(res.trials.iter().all(|t| t.collapsed));
}

#[test]
fn static_proxies_are_inconclusive() {
    let procs: Vec<StaticCost> = (0..3)
        .map(|s| {
            let t = generate_task(5, 1.0, (0.0, 0.0), s).unwrap();
            StaticCost::with_reference(t.base_cost, t.planted)
        })
        .collect();
    let refs: Vec<&dyn CostProcess> = procs.iter().map(|p| p as &dyn CostProcess).collect();
    let err = calibrate_k_safe(&refs, 0.8, &budget(), &CalibrationSettings::default()).unwrap_err();
    assert!(matches!(err, Error::CalibrationInconclusive(_)));
}

#[test]
fn calibration_on_noisy_proxies_matches_golden() {
    let proxies: Vec<SyntheticTask> = (100..105)
        .map(|s| generate_task(8, 1.0, (1.0, 0.05), s).unwrap())
        .collect();
    let refs: Vec<&dyn CostProcess> = proxies.iter().map(|p| p as &dyn CostProcess).collect();
    let res = calibrate_k_safe(&refs, 0.8, &budget(), &CalibrationSettings::default()).unwrap();
    let golden: serde_json::Value = serde_json::from_str(&data("calibration.json")).unwrap();
    assert_eq!(serde_json::to_value(&res).unwrap(), golden);
    assert!((0.1..=2.0).contains(&res.k_safe_estimate));
}

#[test]
fn log_lines_carry_the_documented_keys() {
    let task = generate_task(4, 1.0, (0.5, 0.1), 2).unwrap();
    let run = run_annealing(
        &task,
        &config(Some(0.5), Schedule::Exponential { alpha: 0.8 }),
        &budget(),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_jsonl(&run.history, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), run.history.len());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in [
            "step",
            "epsilon",
            "drift",
            "decision",
            "entropy",
            "assignment_correct",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
