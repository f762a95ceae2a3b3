use proptest::prelude::*;
use trigger_sim_core::model::{chile_step, china_step_day};
use trigger_sim_core::scenario::chile_config;
use trigger_sim_core::{
    simulate_open_loop, ChileParams, ChileState, ChinaParams, ChinaState, Dynamics, DynamicsError,
    ModelSpec, StateVec,
};

fn chile_ic() -> ChileState {
    ChileState::from_array([6_671_557.0, 1_697.0, 1_723.0, 2_540.0, 421_948.0, 1_157.0, 433.0, 11_753.0])
}

fn china_ic() -> ChinaState {
    ChinaState::from_array([
        1_389_828_000.0,
        14.0,
        2.0,
        1_555.0,
        2_035.0,
        270.0,
        73_622.0,
        90_346.0,
        3_708.0,
    ])
}

/// Synthetic rates, only for exercising the integrator.
fn china_fixture() -> ChinaParams {
    ChinaParams {
        beta_e: 0.25,
        beta_i: 0.3,
        beta_iu: 0.15,
        beta_hr: 0.02,
        beta_hd: 0.02,
        gamma_e: 0.2,
        gamma_i: 0.25,
        gamma_iu: 0.1,
        gamma_hr: 0.07,
        gamma_hd: 0.1,
        phi_ihr: 0.15,
        phi_ihd: 0.02,
        delta_hat: 0.25,
        population: 1_389_999_552.0,
        substeps: 24,
    }
}

fn assert_close(found: &[f64], expected: &[f64], rel: f64) {
    assert_eq!(found.len(), expected.len());
    for (k, (f, e)) in found.iter().zip(expected).enumerate() {
        assert!((f - e).abs() <= rel * e.abs().max(1.0), "component {k}: {f} vs {e}");
    }
}

#[test]
fn chile_thirty_days_uncontrolled() {
    let p = ChileParams::metropolitan_region();
    let model = ModelSpec::Chile(p);
    let traj = simulate_open_loop(&model, &chile_ic().into(), 0, &[0.0; 30]).unwrap();
    // Independent script, same eight rows iterated 30 times.
    let expected = [
        6669455.551651256,
        26.581505068380363,
        68.77161293984845,
        102.99119194461751,
        430363.53907558403,
        257.3484777705687,
        150.31388666212055,
        12382.90259877329,
    ];
    assert_close(traj.states()[30].values(), &expected, 1e-10);

    let icu: Vec<f64> = traj.states().iter().map(|x| x.values()[6]).collect();
    let mean15 = icu[..15].iter().sum::<f64>() / 15.0;
    assert!((mean15 - 395.6360769095922).abs() < 1e-9);
    assert_eq!(icu.iter().cloned().fold(f64::MIN, f64::max), 433.0);
}

#[test]
fn china_day_is_24_hourly_euler_steps() {
    let p = china_fixture();
    let day1 = china_step_day(&china_ic(), 0.0, &p).unwrap();
    let expected = [
        1389827692.9725437,
        291.5671400869829,
        28.77186208641234,
        1408.8989189072972,
        1897.622891679604,
        244.30737408102388,
        73759.78037634832,
        90494.33249751404,
        3733.7463949893686,
    ];
    assert_close(&day1.to_array(), &expected, 1e-11);

    let model = ModelSpec::China(p);
    let traj = simulate_open_loop(&model, &china_ic().into(), 0, &[0.5; 10]).unwrap();
    let expected10 = [
        1389826069.8766606,
        928.1089176354053,
        493.99786092190186,
        903.0783771741679,
        1074.3338253719667,
        107.12545079388416,
        74661.26865895373,
        91432.8553694288,
        3881.354880449565,
    ];
    assert_close(traj.states()[10].values(), &expected10, 1e-10);
}

#[test]
fn bundled_chile_ic_sums_to_population() {
    let s = chile_config().build().unwrap();
    assert_eq!(s.x0.total(), 7_112_808.0);
    assert_eq!(ChileState::try_from(&s.x0).unwrap(), chile_ic());
}

#[test]
fn controls_outside_admissible_set_are_rejected() {
    let model = ModelSpec::Chile(ChileParams::metropolitan_region());
    let x0: StateVec = chile_ic().into();
    for u in [-0.1, 0.81, f64::NAN] {
        let err = model.step(&x0, u).unwrap_err();
        assert!(matches!(err, DynamicsError::InadmissibleControl { .. }), "{err}");
    }
    let err = simulate_open_loop(&model, &x0, 0, &[0.0, 0.0, 0.9]).unwrap_err();
    assert!(err.to_string().starts_with("day 2:"), "{err}");
}

#[test]
fn wrong_model_state_is_rejected() {
    let model = ModelSpec::Chile(ChileParams::metropolitan_region());
    let err = model.step(&china_ic().into(), 0.0).unwrap_err();
    assert!(matches!(err, DynamicsError::ModelMismatch { .. } | DynamicsError::Dimension { .. }));
}

fn chile_step_checked(x: &ChileState, u: f64) -> ChileState {
    chile_step(x, u, &ChileParams::metropolitan_region()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chile_conserves_and_is_monotone(us in prop::collection::vec(0.0..=0.8f64, 1..120)) {
        let n = 7_112_808.0;
        let mut x = chile_ic();
        for u in us {
            let next = chile_step_checked(&x, u);
            prop_assert!((next.total() - n).abs() <= 1e-9 * n);
            prop_assert!(next.to_array().iter().all(|v| *v >= 0.0));
            prop_assert!(next.d >= x.d);
            prop_assert!(next.s <= x.s);
            x = next;
        }
    }

    #[test]
    fn china_conserves_and_is_monotone(us in prop::collection::vec(0.0..=0.75f64, 1..40)) {
        let p = china_fixture();
        let n = p.population;
        let mut x = china_ic();
        for u in us {
            let next = china_step_day(&x, u, &p).unwrap();
            prop_assert!((next.total() - n).abs() <= 1e-9 * n);
            prop_assert!(next.to_array().iter().all(|v| *v >= 0.0));
            prop_assert!(next.d >= x.d);
            prop_assert!(next.s <= x.s);
            x = next;
        }
    }

    #[test]
    fn more_control_means_fewer_infections(u in 0.0..0.8f64, du in 0.0..0.2f64) {
        let hi = (u + du).min(0.8);
        let a = chile_step_checked(&chile_ic(), u);
        let b = chile_step_checked(&chile_ic(), hi);
        prop_assert!(b.s >= a.s);
    }
}
