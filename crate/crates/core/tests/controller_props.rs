use frachz::controllers::{Controller, ControllerSpec, ParamKind, Structure};
use frachz::fracops::{gl_differintegral, FilterSettings};
use frachz::fuzzy::FuzzyEngine;
use proptest::prelude::*;

const DT: f64 = 0.01;

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

fn build(structure: Structure, named: &[(&str, f64)]) -> Controller {
    let spec = ControllerSpec::new(structure, named.iter().copied()).unwrap();
    Controller::new(&spec, DT, &FilterSettings::default()).unwrap()
}

fn band_limited(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 * DT;
            0.6 * (0.4 * t).sin() + 0.3 * (1.3 * t).sin() + 0.1 * (3.0 * t).sin()
        })
        .collect()
}

fn drive(c: &mut Controller, e: &[f64], y: &[f64]) -> Vec<f64> {
    e.iter().zip(y).map(|(&a, &b)| c.step(a, b)).collect()
}

#[test]
fn pi_pd_with_equal_inputs_is_pid() {
    let (ke, kd, kpi, kpd, lam, mu) = (0.7, 0.4, 1.3, 0.9, 0.85, 0.6);
    let mut pid = build(
        Structure::FuzzyPid,
        &[("K_e", ke), ("K_d", kd), ("K_PI", kpi), ("K_PD", kpd), ("lambda", lam), ("mu", mu)],
    );
    let mut pipd = build(
        Structure::FuzzyPiPlusPd,
        &[
            ("K_e1", ke),
            ("K_d1", kd),
            ("K_PI", kpi),
            ("K_e2", ke),
            ("K_d2", kd),
            ("K_PD", kpd),
            ("lambda", lam),
            ("mu", mu),
        ],
    );
    let e = band_limited(3000);
    let y = vec![0.0; e.len()];
    assert_eq!(drive(&mut pid, &e, &y), drive(&mut pipd, &e, &y));
}

fn feedback_derivative_spec(structure: Structure, kd2: f64) -> Vec<(&'static str, f64)> {
    match structure {
        Structure::FuzzyPPlusId => vec![
            ("K_e", 0.5),
            ("K_d1", 0.3),
            ("K_p", 2.0),
            ("K_d2", kd2),
            ("K_i", 0.8),
            ("lambda", 0.9),
            ("mu1", 0.7),
            ("mu2", 0.8),
        ],
        _ => vec![("K_e", 0.5), ("K_d1", 0.3), ("K_PI", 2.0), ("K_d2", kd2), ("lambda", 0.9), ("mu1", 0.7), ("mu2", 0.8)],
    }
}

#[test]
fn output_derivative_does_not_kick_on_setpoint_steps() {
    let n = 400;
    let step_at = 200;
    let e: Vec<f64> = (0..n).map(|i| if i >= step_at { 1.0 } else { 0.0 }).collect();
    let run = |structure: Structure, kd2: f64, y: &[f64]| {
        let mut c = build(structure, &feedback_derivative_spec(structure, kd2));
        drive(&mut c, &e, y)
    };
    for structure in [Structure::FuzzyPPlusId, Structure::FuzzyPiPlusD] {
        let rest = vec![0.0; n];
        let (soft, hard) = (run(structure, 0.1, &rest), run(structure, 30.0, &rest));
        assert_eq!(soft[step_at] - soft[step_at - 1], hard[step_at] - hard[step_at - 1], "{structure}");

        // With a smooth output the derivative channel moves by the same small
        // amount at the step sample as just before it.
        let y: Vec<f64> = (0..n).map(|i| 0.2 * (i as f64 * DT).sin()).collect();
        let (soft, hard) = (run(structure, 0.1, &y), run(structure, 30.0, &y));
        let channel: Vec<f64> = soft.iter().zip(&hard).map(|(a, b)| (a - b) / (30.0 - 0.1)).collect();
        let at_step = channel[step_at] - channel[step_at - 1];
        let before = channel[step_at - 1] - channel[step_at - 2];
        assert!((at_step - before).abs() < 1e-3, "{structure}: {at_step} vs {before}");
    }
    let mut c = build(Structure::FuzzyPPlusId, &feedback_derivative_spec(Structure::FuzzyPPlusId, 30.0));
    let u = drive(&mut c, &e, &vec![0.0; n]);
    // Proportional path plus one integral increment.
    assert!((u[step_at] - u[step_at - 1]).abs() <= 2.0 + 0.1);
}

#[test]
fn pd_i_without_fuzzy_path_is_fractional_integral() {
    let (ki, lam) = (0.113836, 0.989822);
    let mut c = build(
        Structure::FuzzyPdPlusI,
        &[("K_e", 0.056807), ("K_d", 0.211725), ("K_i", ki), ("K_PD", 0.0), ("lambda", lam), ("mu", 0.723279)],
    );
    // Pairs sin(wt) - 2 sin(2wt) so the integral carries no DC offset, which
    // would sit below the fitted band.
    let e: Vec<f64> = (0..4001)
        .map(|i| {
            let t = i as f64 * DT;
            0.5 * ((0.5 * t).sin() - 2.0 * t.sin()) + 0.2 * ((1.5 * t).sin() - 2.0 * (3.0 * t).sin())
        })
        .collect();
    let u = drive(&mut c, &e, &vec![0.0; e.len()]);
    let reference: Vec<f64> = gl_differintegral(&e, -lam, DT).iter().map(|v| ki * v).collect();
    let from = (5.0 / DT) as usize;
    let diff: Vec<f64> = (from..e.len()).map(|i| u[i] - reference[i]).collect();
    let rel = rms(&diff) / rms(&reference[from..]);
    assert!(rel < 0.07, "{rel}");
}

#[test]
fn unit_orders_match_integer_pid() {
    let (ke, kd, kpi, kpd) = (0.6, 0.3, 1.5, 0.8);
    let mut c = build(
        Structure::FuzzyPid,
        &[("K_e", ke), ("K_d", kd), ("K_PI", kpi), ("K_PD", kpd), ("lambda", 1.0), ("mu", 1.0)],
    );
    let n = 5001;
    let e = band_limited(n);
    let u = drive(&mut c, &e, &vec![0.0; n]);

    // Backward-difference rate, trapezoidal integral of the fuzzy output.
    let engine = FuzzyEngine::default();
    let (mut prev_e, mut prev_v, mut acc) = (0.0, 0.0, 0.0);
    let mut reference = Vec::with_capacity(n);
    for &x in &e {
        let de = (x - prev_e) / DT;
        let v = engine.infer(ke * x, kd * de);
        acc += 0.5 * DT * (v + prev_v);
        reference.push(kpi * acc + kpd * v);
        prev_e = x;
        prev_v = v;
    }
    let from = (5.0 / DT) as usize;
    let diff: Vec<f64> = (from..n).map(|i| u[i] - reference[i]).collect();
    assert!(rms(&diff) / rms(&reference[from..]) < 0.05);
}

#[test]
fn deterministic_and_resettable() {
    for structure in Structure::ALL {
        let vals: Vec<f64> = structure
            .params()
            .iter()
            .map(|(_, k)| match k {
                ParamKind::InputScaling => 0.4,
                ParamKind::Gain => 1.7,
                ParamKind::Order => 0.8,
            })
            .collect();
        let spec = ControllerSpec::from_vector(structure, &vals).unwrap();
        let mut a = Controller::new(&spec, DT, &FilterSettings::default()).unwrap();
        let mut b = a.clone();
        let e = band_limited(800);
        let y: Vec<f64> = e.iter().map(|v| 0.5 * v).collect();
        let first = drive(&mut a, &e, &y);
        assert_eq!(first, drive(&mut b, &e, &y));
        a.reset();
        assert_eq!(first, drive(&mut a, &e, &y));
    }
}

fn spec_strategy() -> impl Strategy<Value = ControllerSpec> {
    prop::sample::select(Structure::ALL.to_vec()).prop_flat_map(|s| {
        let ranges: Vec<_> = s.params().iter().map(|(_, k)| k.bounds()).map(|(lo, hi)| lo..=hi).collect();
        ranges.prop_map(move |v| ControllerSpec::from_vector(s, &v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_history_gives_zero_output(spec in spec_strategy()) {
        let mut c = Controller::new(&spec, DT, &FilterSettings::default()).unwrap();
        for _ in 0..50 {
            prop_assert_eq!(c.step(0.0, 0.0), 0.0);
        }
    }

    #[test]
    fn negated_signals_negate_output(
        spec in spec_strategy(),
        e in prop::collection::vec(-2.0f64..2.0, 60),
        y in prop::collection::vec(-2.0f64..2.0, 60),
    ) {
        let mut a = Controller::new(&spec, DT, &FilterSettings::default()).unwrap();
        let mut b = a.clone();
        let ne: Vec<f64> = e.iter().map(|v| -v).collect();
        let ny: Vec<f64> = y.iter().map(|v| -v).collect();
        let up = drive(&mut a, &e, &y);
        let down = drive(&mut b, &ne, &ny);
        for (p, q) in up.iter().zip(&down) {
            prop_assert_eq!(*p, -*q);
        }
    }
}
