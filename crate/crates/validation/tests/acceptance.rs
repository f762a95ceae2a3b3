//! Acceptance gate. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.
//!
//! Set `TRIGGER_SIM_CHINA_SCENARIO` to a China scenario file with calibrated
//! parameters to also evaluate the China ordering check.

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use trigger_sim_cli::{cmd_compare, CompareArgs, ScenarioArgs, SweepOptions};
use trigger_sim_core::indicator::{mean, mean_diff, variation_rate, variation_rate_diff};
use trigger_sim_core::scenario::{chile_config, china_config, ParamValue};
use trigger_sim_core::tradeoff::{objective_lookup, outcome_peak, CurvePoint, IncomparableReason};
use trigger_sim_core::{
    dominance, evaluate_policy, simulate_closed_loop, simulate_open_loop, Aggregator, Alignment,
    Dynamics, DynamicsError, IndicatorSpec, ModelKind, ObservationKind, RampPair, Scenario,
    StateVec, TradeOffCurve, TriggerPolicy, Verdict,
};

const CHINA_ENV: &str = "TRIGGER_SIM_CHINA_SCENARIO";

type Criterion = fn() -> Result<String, String>;

struct Verdicts {
    failed: usize,
}

impl Verdicts {
    fn record(&mut self, name: &str, result: Result<String, String>) {
        match result {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                self.failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn compare(source: &str, indicators: &[&str], target: f64) -> Result<trigger_sim_cli::CompareReport, String> {
    cmd_compare(&CompareArgs {
        scenario: ScenarioArgs { scenario: source.into(), out: None },
        indicator: indicators.iter().map(|s| s.to_string()).collect(),
        target,
        sweep: SweepOptions { grid: None, parallel: None, chart: false },
        no_refine: false,
    })
    .map_err(|e| e.to_string())
}

fn pct_of(report: &trigger_sim_cli::CompareReport, id: &str) -> Result<(f64, f64), String> {
    match report.row(id).map(|r| &r.lookup) {
        Some(Ok(l)) => Ok((l.theta, l.compared())),
        Some(Err(e)) => Err(format!("{id}: {e}")),
        None => Err(format!("{id}: missing from report")),
    }
}

fn chile_table() -> Result<String, String> {
    let expected = [
        ("mean_icu", 36.0, 253.0),
        ("diff_icu", 29.0, 0.4),
        ("mean_active", 31.0, 87.0),
        ("diff_active", 26.0, 0.1),
    ];
    let start = Instant::now();
    let report = compare("bundled:chile", &[], 1200.0)?;
    let elapsed = start.elapsed();

    let mut found = Vec::new();
    let mut problems = Vec::new();
    let mut diagnostics = Vec::new();
    for (id, pct, theta) in expected {
        let (got_theta, got_pct) = pct_of(&report, id)?;
        found.push((id, got_pct));
        if (got_pct - pct).abs() > 5.0 {
            problems.push(format!("{id} {got_pct:.1}% (want {pct}±5)"));
        }
        let ok = (got_theta - theta).abs() <= 0.3 * theta;
        diagnostics.push(format!("{id} θ={got_theta:.4} (ref {theta}{})", if ok { "" } else { ", off" }));
    }
    let worst = found.iter().map(|f| f.1).fold(f64::NEG_INFINITY, f64::max);
    let mean_icu = found[0].1;
    if !(mean_icu == worst && found[1..].iter().all(|f| f.1 < mean_icu)) {
        problems.push("mean_icu is not ranked strictly worst".into());
    }
    if elapsed > Duration::from_secs(60) {
        problems.push(format!("runtime {elapsed:.1?} ≥ 60 s"));
    }
    let summary = format!("{elapsed:.2?}; thresholds: {}", diagnostics.join(", "));
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

fn china_structure() -> Result<String, String> {
    let config = china_config();
    let table = [
        ("S", 1_389_828_000.0),
        ("E", 14.0),
        ("I", 2.0),
        ("Iu", 1_555.0),
        ("HR", 2_035.0),
        ("HD", 270.0),
        ("Rd", 73_622.0),
        ("Ru", 90_346.0),
        ("D", 3_708.0),
    ];
    check(config.initial.len() == table.len(), || "unexpected initial-state keys".into())?;
    for (k, v) in table {
        check(config.initial.get(k) == Some(&v), || format!("initial {k} = {:?}, want {v}", config.initial.get(k)))?;
    }
    let err = match config.build() {
        Ok(_) => return Err("bundled China scenario validated without parameters".into()),
        Err(e) => e.to_string(),
    };
    check(err.contains("Ivorra et al. 2020") && err.contains("EXP_29M"), || {
        format!("validation message does not name the parameter source: {err}")
    })?;

    let Ok(path) = std::env::var(CHINA_ENV) else {
        return Ok(format!(
            "ICs exact, validation refuses missing parameters; ordering check NOT EVALUATED (set {CHINA_ENV})"
        ));
    };
    let report = compare(&path, &["mean_hospitalized", "mean_detected"], 7_000_000.0)?;
    let (_, hosp) = pct_of(&report, "mean_hospitalized")?;
    let (_, det) = pct_of(&report, "mean_detected")?;
    let detail = format!("mean_detected {det:.1}% vs mean_hospitalized {hosp:.1}%");
    check(det < hosp, || format!("{detail}: detected is not strictly better"))?;
    check((det - 31.0).abs() <= 8.0 && (hosp - 57.0).abs() <= 8.0, || {
        format!("{detail}: outside ±8 of 31/57")
    })?;
    Ok(detail)
}

/// Synthetic China rates used wherever the engine has to run on China.
fn china_with_fixture() -> Scenario {
    let mut c = china_config();
    let rates = [
        ("beta_E", 0.25),
        ("beta_I", 0.3),
        ("beta_Iu", 0.15),
        ("beta_HR", 0.02),
        ("beta_HD", 0.02),
        ("gamma_E", 0.2),
        ("gamma_I", 0.25),
        ("gamma_Iu", 0.1),
        ("gamma_HR", 0.07),
        ("gamma_HD", 0.1),
        ("phi_IHR", 0.15),
        ("phi_IHD", 0.02),
    ];
    for (k, v) in rates {
        c.params.insert(k.into(), ParamValue::Number(v));
    }
    c.build().expect("fixture China scenario")
}

fn random_controls(rng: &mut StdRng, days: usize, umax: f64) -> Vec<f64> {
    match rng.random_range(0..3) {
        0 => (0..days).map(|_| rng.random_range(0.0..=umax)).collect(),
        1 => {
            let mut us = Vec::with_capacity(days);
            while us.len() < days {
                let u = if rng.random_bool(0.5) { umax } else { 0.0 };
                let len = rng.random_range(1..60);
                us.extend(std::iter::repeat_n(u, len));
            }
            us.truncate(days);
            us
        }
        _ => {
            let mut us = Vec::with_capacity(days);
            while us.len() < days {
                let u = rng.random_range(0.0..=umax);
                let len = rng.random_range(1..120);
                us.extend(std::iter::repeat_n(u, len));
            }
            us.truncate(days);
            us
        }
    }
}

fn conservation() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let scenarios = [chile_config().build().map_err(|e| e.to_string())?, china_with_fixture()];
    let mut steps = 0usize;
    for s in &scenarios {
        let n = s.population();
        let d = s.x0.dim() - 1;
        let umax = s.model.control_max();
        for run in 0..1000 {
            let us = random_controls(&mut rng, s.horizon + 1, umax);
            let traj = simulate_open_loop(&s.model, &s.x0, 0, &us).map_err(|e| format!("{}: {e}", s.id))?;
            for (t, pair) in traj.states().windows(2).enumerate() {
                let (a, b) = (pair[0].values(), pair[1].values());
                check((pair[1].total() - n).abs() <= 1e-9 * n, || {
                    format!("{} run {run} day {}: total {} vs N {n}", s.id, t + 1, pair[1].total())
                })?;
                check(b[d] >= a[d] && b[0] <= a[0], || {
                    format!("{} run {run} day {}: D or S not monotone", s.id, t + 1)
                })?;
                steps += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("runtime {elapsed:.1?} ≥ 10 s"))?;
    Ok(format!("2×1000 sequences, {steps} daily steps checked in {elapsed:.2?}"))
}

fn high_transmission() -> Scenario {
    let mut c = chile_config();
    c.params.insert("beta_E".into(), ParamValue::Number(0.2));
    c.params.insert("beta_Im".into(), ParamValue::Number(0.2));
    c.params.insert("beta_I".into(), ParamValue::Number(0.6));
    c.build().expect("high-transmission Chile")
}

fn trigger_properties() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let bundled = chile_config().build().map_err(|e| e.to_string())?;
    let growing = high_transmission();
    let mut switches = 0;
    let mut weekly_cases = 0;
    for (label, s) in [("bundled", &bundled), ("high-transmission", &growing)] {
        let umax = s.model.control_max();
        for case in 0..200 {
            let ind = &s.indicators[rng.random_range(0..s.indicators.len())];
            let values = ind.domain.values();
            let (lo, hi) = (values[0], values[values.len() - 1]);
            let theta = rng.random_range(lo..=hi);
            let tau = [0, 7, 14][rng.random_range(0..3)];
            let weekly = rng.random_bool(0.5);
            let delta = if weekly {
                7 * rng.random_range(tau.max(7) / 7..=4)
            } else {
                rng.random_range(tau.max(1)..=28)
            };
            let spec = IndicatorSpec { tau, ..ind.spec.clone() };
            let mut policy = s.policy(&spec, theta);
            policy.ramps.min_interevent = delta;
            policy.alignment = if weekly { Alignment::Weekly } else { Alignment::Identity };
            let run = simulate_closed_loop(&s.model, &s.x0, &policy, s.t0, s.horizon)
                .map_err(|e| format!("{label} case {case}: {e}"))?;
            let times = &run.log.trigger_times;
            switches += times.len() - 1;
            let ctx = || format!("{label} case {case} ({} θ={theta} τ={tau} Δ={delta} weekly={weekly})", ind.id);
            check(times.windows(2).all(|w| w[1] - w[0] >= delta), || format!("{}: gap < Δ", ctx()))?;
            check(run.trajectory.controls().iter().all(|u| (0.0..=umax).contains(u)), || {
                format!("{}: control outside [0, {umax}]", ctx())
            })?;
            if weekly {
                weekly_cases += 1;
                check(times.iter().all(|t| t % 7 == 0), || format!("{}: unaligned trigger", ctx()))?;
            }
        }
    }
    Ok(format!("2×200 policies ({weekly_cases} weekly), {switches} switches checked"))
}

/// `x(t+1) = (1 - u) g x(t)`, controls up to `1 - delta_hat`.
struct Scalar {
    growth: f64,
    delta_hat: f64,
}

impl Dynamics for Scalar {
    fn kind(&self) -> ModelKind {
        ModelKind::Custom
    }
    fn labels(&self) -> &[&'static str] {
        &["x"]
    }
    fn control_max(&self) -> f64 {
        1.0 - self.delta_hat
    }
    fn step(&self, x: &StateVec, u: f64) -> Result<StateVec, DynamicsError> {
        self.check_control(u)?;
        Ok(StateVec::new(ModelKind::Custom, vec![(1.0 - u) * self.growth * x.values()[0]]))
    }
}

/// Day-by-day bang-bang written without the engine: the decision taken on
/// `x(t) > theta` is reached one day later, after the one-day ramp.
fn brute_force(x0: f64, g: f64, theta: f64, delta_hat: f64, horizon: usize) -> Vec<f64> {
    let umax = 1.0 - delta_hat;
    let decide = |x: f64| if x > theta { umax } else { 0.0 };
    let mut x = x0;
    let mut decision = decide(x0);
    let mut us = vec![decision];
    for _ in 1..=horizon {
        x *= (1.0 - us[us.len() - 1]) * g;
        us.push(decision);
        decision = decide(x);
    }
    us
}

fn oracle_equivalence() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let horizon = 120;
    let mut switched = 0;
    for case in 0..100 {
        let g = rng.random_range(0.5..2.5);
        let theta = rng.random_range(0.1..50.0);
        let x0 = rng.random_range(0.1..20.0);
        let delta_hat = rng.random_range(0.05..0.95);
        let model = Scalar { growth: g, delta_hat };
        let policy = TriggerPolicy {
            indicator: IndicatorSpec::new(ObservationKind::CustomLinear(vec![1.0]), Aggregator::Mean, 0),
            theta,
            u_ref: 1.0 - delta_hat,
            ramps: RampPair { min_interevent: 1, delta_hat },
            alignment: Alignment::Identity,
        };
        let run = simulate_closed_loop(&model, &StateVec::new(ModelKind::Custom, vec![x0]), &policy, 0, horizon)
            .map_err(|e| format!("case {case}: {e}"))?;
        let expected = brute_force(x0, g, theta, delta_hat, horizon);
        check(run.trajectory.controls() == expected.as_slice(), || {
            format!("case {case} (g={g}, θ={theta}, x0={x0}, δ̂={delta_hat}): control sequences differ")
        })?;
        if run.log.trigger_times.len() > 1 {
            switched += 1;
        }
    }
    Ok(format!("100 instances identical ({switched} with switches)"))
}

fn ulps(n: usize, m: f64) -> f64 {
    4.0 * (n as f64 + 1.0) * f64::EPSILON * m.max(1.0)
}

fn indicator_identities() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    for case in 0..1000 {
        let n = rng.random_range(1..=30);
        let obs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1e6)).collect();
        let explicit = obs.windows(2).map(|w| w[1] - w[0]).sum::<f64>() / n as f64;
        let m = obs.iter().cloned().fold(0.0, f64::max);
        check((mean_diff(&obs) - explicit).abs() <= ulps(n, m), || {
            format!("case {case}: telescoped {} vs explicit {explicit}", mean_diff(&obs))
        })?;

        let c = rng.random_range(-1e5..1e5);
        let shifted: Vec<f64> = obs.iter().map(|o| o + c).collect();
        let bound = ulps(n, m.max(c.abs()));
        check((mean(&shifted) - (mean(&obs) + c)).abs() <= bound, || format!("case {case}: mean shift"))?;
        check((mean_diff(&shifted) - mean_diff(&obs)).abs() <= bound, || format!("case {case}: mean_diff shift"))?;

        let s = rng.random_range(0.01..100.0);
        let pos: Vec<f64> = obs.iter().map(|o| o + 1.0).collect();
        let scaled: Vec<f64> = pos.iter().map(|o| s * o).collect();
        let bound = ulps(n, (m + 1.0) * s.max(1.0));
        check((mean(&scaled) - s * mean(&pos)).abs() <= bound, || format!("case {case}: mean scale"))?;
        check((mean_diff(&scaled) - s * mean_diff(&pos)).abs() <= bound, || format!("case {case}: mean_diff scale"))?;
        let (a, b) = (variation_rate(&scaled).unwrap(), variation_rate(&pos).unwrap());
        check((a - b).abs() <= 1e-12 * (1.0 + b.abs()), || format!("case {case}: variation rate scale"))?;
        let (a, b) = (variation_rate_diff(&scaled).unwrap(), variation_rate_diff(&pos).unwrap());
        check((a - b).abs() <= 1e-12 * (1.0 + b.abs()) * n as f64, || format!("case {case}: variation rate diff scale"))?;

        // Dyadic inputs leave no rounding: identities hold bit for bit.
        let len = 1 << rng.random_range(0..6);
        let ints: Vec<f64> = (0..len).map(|_| rng.random_range(1..1_000_000) as f64).collect();
        let ci = rng.random_range(-100_000..100_000) as f64;
        let si = 2f64.powi(rng.random_range(-8..8));
        let shifted: Vec<f64> = ints.iter().map(|o| o + ci).collect();
        let scaled: Vec<f64> = ints.iter().map(|o| si * o).collect();
        check(mean(&shifted) == mean(&ints) + ci && mean_diff(&shifted) == mean_diff(&ints), || {
            format!("case {case}: dyadic shift not exact")
        })?;
        check(
            mean(&scaled) == si * mean(&ints)
                && mean_diff(&scaled) == si * mean_diff(&ints)
                && variation_rate(&scaled).unwrap() == variation_rate(&ints).unwrap()
                && variation_rate_diff(&scaled).unwrap() == variation_rate_diff(&ints).unwrap(),
            || format!("case {case}: dyadic scaling not exact"),
        )?;
    }
    Ok("1000 windows: telescoping within rounding, shift/scale exact on dyadic inputs".into())
}

fn extremes() -> Result<String, String> {
    let chile = chile_config().build().map_err(|e| e.to_string())?;
    let china = china_with_fixture();
    let mut checked = 0;
    for s in [&chile, &china] {
        let obs = match &s.outcomes[0] {
            trigger_sim_core::OutcomeKind::Peak(obs) => obs.clone(),
            other => return Err(format!("{}: first outcome {other:?} is not a peak", s.id)),
        };
        let open = simulate_open_loop(&s.model, &s.x0, s.t0, &vec![0.0; s.horizon + 1 - s.t0])
            .map_err(|e| e.to_string())?;
        let peak = outcome_peak(&open, &obs).map_err(|e| e.to_string())?;
        for ind in &s.indicators {
            let free = evaluate_policy(s, &ind.spec, f64::INFINITY).map_err(|e| e.to_string())?;
            check(free.values[1] == 0.0 && free.values[0] == peak, || {
                format!("{}/{} θ=+∞: {free} (uncontrolled peak {peak})", s.id, ind.id)
            })?;
            let locked = evaluate_policy(s, &ind.spec, f64::NEG_INFINITY).map_err(|e| e.to_string())?;
            check(locked.values[1] == 100.0, || format!("{}/{} θ=−∞: {locked}", s.id, ind.id))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} indicators on chile and china (synthetic rates)"))
}

fn curve(id: &str, pts: &[(f64, f64)]) -> TradeOffCurve {
    TradeOffCurve {
        indicator_id: id.into(),
        scenario_id: "constructed".into(),
        tau: 14,
        min_interevent: 14,
        labels: vec!["peak".into(), "lockdown_pct".into()],
        points: pts
            .iter()
            .enumerate()
            .map(|(k, &(p1, p2))| CurvePoint { theta: k as f64, outcome: Ok(vec![p1, p2]) })
            .collect(),
    }
}

fn dominance_semantics() -> Result<String, String> {
    let a = curve("a", &[(100.0, 80.0), (200.0, 60.0), (300.0, 40.0), (400.0, 20.0)]);
    let better = curve("b", &[(100.0, 75.0), (200.0, 55.0), (300.0, 35.0), (400.0, 15.0)]);
    let crossing = curve("c", &[(100.0, 70.0), (200.0, 65.0), (300.0, 50.0), (400.0, 10.0)]);
    let targets = [[150.0], [250.0], [350.0], [450.0]];
    for (b, want) in [
        (&better, "b_dominates"),
        (&crossing, "crossing"),
        (&a, "incomparable-by-tie"),
    ] {
        let got = dominance(&a, b, &targets).verdict;
        check(got.to_string() == want, || format!("a vs {}: {got}, want {want}", b.indicator_id))?;
    }
    check(
        dominance(&a, &better, &[[50.0]]).verdict == Verdict::Incomparable(IncomparableReason::NoCommonTargets),
        || "targets below both curves should be incomparable".into(),
    )?;
    let l = objective_lookup(&a, &[250.0], None::<fn(f64) -> _>).map_err(|e| e.to_string())?;
    check(l.compared() == 60.0, || format!("lookup at 250: {}", l.compared()))?;
    Ok("b_dominates, crossing, incomparable-by-tie".into())
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("Chile table reproduction", chile_table),
        ("China structural reproduction", china_structure),
        ("Conservation suite", conservation),
        ("Trigger-mechanism property suite", trigger_properties),
        ("Oracle equivalence", oracle_equivalence),
        ("Indicator identities", indicator_identities),
        ("Extreme-threshold sanity", extremes),
        ("Dominance semantics", dominance_semantics),
    ];
    let mut v = Verdicts { failed: 0 };
    for (name, f) in criteria {
        v.record(name, f());
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - v.failed, v.failed);
    if v.failed > 0 {
        std::process::exit(1);
    }
}
