use gaitforge::hybrid::{impact_map, InjectionKind};
use gaitforge::models::{build_model, event_value, prismatic_monopod, total_energy};
use gaitforge::simulate::{integrate_phase, simulate_stride, PhaseEnd, PiecewiseControl, SimConfig, SimError};

const FLIGHT: usize = 0;
const STANCE: usize = 1;

fn drop_state(z: f64) -> Vec<f64> {
    vec![0.0, z, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
}

fn table_guess() -> Vec<f64> {
    vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, -0.55, 0.0, 0.0, -0.55]
}

fn table_result() -> Vec<f64> {
    vec![
        0.0, 0.9713, 0.0676, 0.1723, 0.9999, 0.3835, -0.5740, 0.0082, -0.2443, -0.6487,
    ]
}

#[test]
fn ballistic_drop_touches_down_at_closed_form_time() {
    let model = build_model("prismatic-monopod", &[("k_L".into(), 1e4)]).unwrap();
    let zero = PiecewiseControl::zero(2);
    let run = integrate_phase(
        &model,
        FLIGHT,
        &drop_state(1.2),
        &zero,
        0.0,
        0.0,
        InjectionKind::default(),
        5.0,
    )
    .unwrap();
    let PhaseEnd::Event { target, time } = run.end else {
        panic!("no touchdown");
    };
    assert_eq!(target, STANCE);
    assert!((time - (0.4f64).sqrt()).abs() < 2e-3, "t = {time}");
}

#[test]
fn flight_height_follows_parabola() {
    let model = prismatic_monopod();
    let zero = PiecewiseControl::zero(2);
    let mut x0 = drop_state(3.0);
    x0[6] = 0.4;
    let run = integrate_phase(&model, FLIGHT, &x0, &zero, 0.0, 0.0, InjectionKind::default(), 0.5).unwrap();
    assert_eq!(run.end, PhaseEnd::Timeout);
    for (t, x) in run.segment.times.iter().zip(&run.segment.states) {
        let z = 3.0 + 0.4 * t - 0.5 * t * t;
        assert!((x[1] - z).abs() < 1e-8);
    }
    assert!((run.segment.times.last().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn event_is_localized_tightly() {
    let model = prismatic_monopod();
    let zero = PiecewiseControl::zero(2);
    let run = integrate_phase(
        &model,
        FLIGHT,
        &drop_state(1.1),
        &zero,
        0.0,
        0.0,
        InjectionKind::default(),
        5.0,
    )
    .unwrap();
    let e = event_value(&model, FLIGHT, STANCE, &run.final_state, &[]).unwrap();
    assert!(e.abs() < 1e-8, "{e}");
    // Foot descends, so the event value keeps rising.
    let vz = run.final_state[6] - run.final_state[9];
    assert!(e + 1e-6 * (-vz) > 0.0);
}

#[test]
fn step_halving_is_fourth_order() {
    let model = prismatic_monopod();
    let zero = PiecewiseControl::zero(2);
    let endpoint = |h: f64| {
        let config = SimConfig {
            step: h,
            t_max: 0.4,
            ..SimConfig::default()
        };
        let run = gaitforge::simulate::integrate_phase_sampled(
            &model,
            STANCE,
            &table_guess(),
            &zero,
            0.01,
            0.0,
            InjectionKind::default(),
            &config,
            &[],
            0.0,
        )
        .unwrap();
        run.final_state
    };
    let reference = endpoint(1e-4);
    let err = |h: f64| {
        let x = endpoint(h);
        x.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let ratio = err(0.04) / err(0.02);
    assert!((11.2..=20.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn table_guess_completes_stance_then_flight() {
    let model = prismatic_monopod();
    let traj = simulate_stride(
        &model,
        &[STANCE, FLIGHT],
        &table_guess(),
        &[],
        0.01,
        0.0,
        InjectionKind::default(),
        &SimConfig::default(),
    )
    .unwrap();
    assert_eq!(traj.phases(), vec![STANCE, FLIGHT]);
    assert_eq!(traj.events.len(), 2);
    for seg in &traj.segments {
        assert!(seg.times.windows(2).all(|w| w[1] > w[0]));
    }
    for ev in &traj.events {
        let post = impact_map(&model, ev.from, ev.to, &ev.pre).unwrap();
        assert_eq!(post, ev.post);
    }
}

#[test]
fn table_result_is_nearly_periodic() {
    let model = prismatic_monopod();
    let x0 = table_result();
    let traj = simulate_stride(
        &model,
        &[STANCE, FLIGHT],
        &x0,
        &[],
        0.4466,
        0.0,
        InjectionKind::default(),
        &SimConfig::default(),
    )
    .unwrap();
    let end = &traj.events.last().unwrap().post;
    let start = impact_map(&model, STANCE, STANCE, &x0).unwrap();
    for i in 1..10 {
        assert!(
            (end[i] - start[i]).abs() < 5e-2,
            "state {i}: {} vs {}",
            end[i],
            start[i]
        );
    }
}

// A massless foot leaves the flight-phase mass matrix singular, so the foot
// mass is kept; energy is compared within segments, away from the impacts.
#[test]
fn conservative_limit_keeps_energy() {
    let model = build_model("prismatic-monopod", &[("d_H".into(), 0.0), ("d_L".into(), 0.0)]).unwrap();
    let traj = simulate_stride(
        &model,
        &[STANCE, FLIGHT],
        &table_guess(),
        &[],
        0.3,
        1.0,
        InjectionKind::default(),
        &SimConfig::default(),
    )
    .unwrap();
    for seg in &traj.segments {
        let e0 = total_energy(&model, &seg.states[0]);
        for x in &seg.states {
            assert!((total_energy(&model, x) - e0).abs() < 1e-6);
        }
    }
}

#[test]
fn wrong_sequence_is_reported() {
    let model = prismatic_monopod();
    let err = simulate_stride(
        &model,
        &[STANCE],
        &table_guess(),
        &[],
        0.01,
        0.0,
        InjectionKind::default(),
        &SimConfig::default(),
    )
    .unwrap_err();
    assert!(
        matches!(
            err,
            SimError::WrongSequence {
                from: STANCE,
                got: FLIGHT,
                ..
            }
        ),
        "{err}"
    );
}

#[test]
fn resting_on_the_ground_times_out() {
    let model = prismatic_monopod();
    let mut x0 = drop_state(1.0);
    x0[1] = 0.95;
    x0[4] = 0.95;
    let err = simulate_stride(
        &model,
        &[STANCE, FLIGHT],
        &x0,
        &[],
        0.0,
        1.0,
        InjectionKind::default(),
        &SimConfig {
            t_max: 3.0,
            ..SimConfig::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, SimError::Timeout { phase: STANCE, .. }), "{err}");
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    let model = prismatic_monopod();
    let run = || {
        simulate_stride(
            &model,
            &[STANCE, FLIGHT],
            &table_guess(),
            &[],
            0.01,
            0.0,
            InjectionKind::default(),
            &SimConfig::default(),
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn next_switch_advances_past_rounded_boundaries() {
    let interval = 0.5773487355574385 / 10.0;
    let control = PiecewiseControl::new(interval, vec![vec![0.0]; 10]);
    let mut t = 0.0;
    while let Some(s) = control.next_switch(t) {
        assert!(s > t, "switch {s} does not advance from {t}");
        t = s;
    }
    assert!((t - 9.0 * interval).abs() < 1e-12);
}
