//! Event-driven integration of the hybrid dynamics.
//!
//! Each phase is integrated with classical fixed-step RK4. Event functions
//! are checked at step boundaries; a negative-to-non-negative sign change is
//! localized by bisection on the step fraction. A step is never split more
//! than once, so two crossings inside one step are not resolved (the default
//! step of `1e-3` makes that implausible for these models).

use crate::hybrid::{homotopy_field, impact_map, phase_dynamics, DynamicsError, InjectionKind};
use crate::models::ModelSpec;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("state diverged at t = {time}")]
    Divergence { time: f64 },
    #[error("phase {phase} reached t_max = {t_max} without an event")]
    Timeout { phase: usize, t_max: f64 },
    #[error("start state violates the velocity constraint of phase {phase} (|Wᵀq̇| = {residual:e})")]
    InconsistentStart { phase: usize, residual: f64 },
    #[error(
        "event {from} -> {got} at t = {time}, sequence expects {from} -> {expected} (observed phases {observed:?})"
    )]
    WrongSequence {
        from: usize,
        expected: usize,
        got: usize,
        time: f64,
        observed: Vec<usize>,
    },
    #[error("phase sequence is empty")]
    EmptySequence,
}

/// Piecewise-constant control: `values[k]` holds on `[k·interval, (k+1)·interval)`
/// and the last value persists beyond the end.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseControl {
    pub interval: f64,
    pub values: Vec<Vec<f64>>,
    n_u: usize,
}

impl PiecewiseControl {
    pub fn zero(n_u: usize) -> Self {
        PiecewiseControl {
            interval: f64::INFINITY,
            values: Vec::new(),
            n_u,
        }
    }

    pub fn new(interval: f64, values: Vec<Vec<f64>>) -> Self {
        let n_u = values.first().map_or(0, Vec::len);
        PiecewiseControl { interval, values, n_u }
    }

    fn index(&self, t: f64) -> usize {
        if self.values.is_empty() {
            return 0;
        }
        let k = (t / self.interval).floor();
        (k.max(0.0) as usize).min(self.values.len() - 1)
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        if self.values.is_empty() {
            vec![0.0; self.n_u]
        } else {
            self.values[self.index(t)].clone()
        }
    }

    /// First switch time strictly after `t`.
    pub fn next_switch(&self, t: f64) -> Option<f64> {
        if self.values.len() < 2 {
            return None;
        }
        let tol = 1e-12 * self.interval.max(t.abs());
        ((self.index(t) + 1)..self.values.len())
            .map(|k| k as f64 * self.interval)
            .find(|&s| s > t + tol)
    }
}

/// Integration settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub step: f64,
    pub t_max: f64,
    pub event_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            step: 1e-3,
            t_max: 5.0,
            event_tol: 1e-10,
        }
    }
}

/// One phase of a trajectory, with times measured from the stride start.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub phase: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Control held at each sample (empty when unactuated).
    pub controls: Vec<Vec<f64>>,
}

impl Segment {
    pub fn control_at(&self, k: usize, n_u: usize) -> Vec<f64> {
        self.controls.get(k).cloned().unwrap_or_else(|| vec![0.0; n_u])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub from: usize,
    pub to: usize,
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
}

/// Per-phase samples plus the jumps between phases.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct HybridTrajectory {
    pub segments: Vec<Segment>,
    pub events: Vec<EventRecord>,
    pub duration: f64,
}

impl HybridTrajectory {
    /// Phases in the order they were visited.
    pub fn phases(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.phase).collect()
    }
}

/// How a phase integration ended.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseEnd {
    Event { target: usize, time: f64 },
    Timeout,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRun {
    pub segment: Segment,
    pub end: PhaseEnd,
    /// State at the end of the segment (pre-event state if an event fired).
    pub final_state: Vec<f64>,
}

struct PhaseIntegrator<'a> {
    model: &'a ModelSpec,
    phase: usize,
    gamma: f64,
    eps: f64,
    kind: InjectionKind,
}

impl PhaseIntegrator<'_> {
    fn field(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        homotopy_field(self.model, self.phase, x, u, self.gamma, self.eps, self.kind)
    }

    fn rk4(&self, x: &[f64], u: &[f64], h: f64) -> Result<Vec<f64>, DynamicsError> {
        let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
        let k1 = self.field(x, u)?;
        let k2 = self.field(&axpy(x, 0.5 * h, &k1), u)?;
        let k3 = self.field(&axpy(x, 0.5 * h, &k2), u)?;
        let k4 = self.field(&axpy(x, h, &k3), u)?;
        Ok((0..x.len())
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }

    fn events(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        let ph = &self.model.phases[self.phase];
        let n = self.model.n_q;
        let needs_lambda = ph
            .events
            .iter()
            .any(|e| matches!(e.kind, crate::models::EventKind::Liftoff { .. }));
        let lambda = if needs_lambda {
            phase_dynamics(
                self.model,
                self.phase,
                &x[..n],
                &x[n..],
                u,
                &self.model.free_param_values(),
            )?
            .lambda
        } else {
            Vec::new()
        };
        Ok(ph
            .events
            .iter()
            .map(|e| self.model.event_of(self.phase, e.kind, &x[..n], &lambda))
            .collect())
    }
}

/// Integrates one phase until an event fires or `t_max` is reached.
#[allow(clippy::too_many_arguments)]
pub fn integrate_phase(
    model: &ModelSpec,
    phase: usize,
    x0: &[f64],
    control: &PiecewiseControl,
    gamma: f64,
    eps: f64,
    kind: InjectionKind,
    t_max: f64,
) -> Result<PhaseRun, SimError> {
    let config = SimConfig {
        t_max,
        ..SimConfig::default()
    };
    integrate_phase_sampled(model, phase, x0, control, gamma, eps, kind, &config, &[], 0.0)
}

/// [`integrate_phase`] with explicit settings. Steps are shortened so that
/// every phase-local time in `sample_times` and every control switch is hit
/// exactly. `t0` offsets the recorded times.
#[allow(clippy::too_many_arguments)]
pub fn integrate_phase_sampled(
    model: &ModelSpec,
    phase: usize,
    x0: &[f64],
    control: &PiecewiseControl,
    gamma: f64,
    eps: f64,
    kind: InjectionKind,
    config: &SimConfig,
    sample_times: &[f64],
    t0: f64,
) -> Result<PhaseRun, SimError> {
    let n = model.n_q;
    let contact = model.contact(phase, &x0[..n], &x0[n..]);
    let residual = contact
        .w
        .iter()
        .map(|w| crate::numerics::dot(w, &x0[n..]).abs())
        .fold(0.0, f64::max);
    if residual > 1e-8 {
        return Err(SimError::InconsistentStart { phase, residual });
    }
    let integ = PhaseIntegrator {
        model,
        phase,
        gamma,
        eps,
        kind,
    };
    let mut segment = Segment {
        phase,
        times: vec![t0],
        states: vec![x0.to_vec()],
        controls: vec![control.at(0.0)],
    };
    let mut t = 0.0;
    let mut x = x0.to_vec();
    let mut prev = integ.events(&x, &control.at(0.0))?;
    let mut pending: Vec<f64> = sample_times.iter().copied().filter(|&s| s > 0.0).collect();
    pending.sort_by(f64::total_cmp);
    let mut next_sample = 0;
    loop {
        let mut h = config.step.min(config.t_max - t);
        if let Some(s) = control.next_switch(t) {
            h = h.min(s - t);
        }
        while next_sample < pending.len() && pending[next_sample] <= t + 1e-14 {
            next_sample += 1;
        }
        if next_sample < pending.len() {
            h = h.min(pending[next_sample] - t);
        }
        if h <= 1e-15 {
            return Ok(PhaseRun {
                final_state: x,
                segment,
                end: PhaseEnd::Timeout,
            });
        }
        let u = control.at(t + 0.5 * h);
        let x_new = integ.rk4(&x, &u, h)?;
        if x_new.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Divergence { time: t0 + t + h });
        }
        let values = integ.events(&x_new, &u)?;
        let mut hit: Option<(f64, usize, Vec<f64>)> = None;
        for (k, (&a, &b)) in prev.iter().zip(&values).enumerate() {
            if a < 0.0 && b >= 0.0 {
                let (mut lo, mut hi) = (0.0, h);
                while hi - lo > config.event_tol {
                    let mid = 0.5 * (lo + hi);
                    let xm = integ.rk4(&x, &u, mid)?;
                    if integ.events(&xm, &u)?[k] < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if hit.as_ref().is_none_or(|(tau, _, _)| hi < *tau) {
                    let xe = integ.rk4(&x, &u, hi)?;
                    hit = Some((hi, k, xe));
                }
            }
        }
        if let Some((tau, k, xe)) = hit {
            let target = model.phases[phase].events[k].target;
            segment.times.push(t0 + t + tau);
            segment.states.push(xe.clone());
            segment.controls.push(u);
            return Ok(PhaseRun {
                final_state: xe,
                segment,
                end: PhaseEnd::Event { target, time: t + tau },
            });
        }
        t += h;
        x = x_new;
        prev = values;
        segment.times.push(t0 + t);
        segment.states.push(x.clone());
        segment.controls.push(u);
        if t >= config.t_max {
            return Ok(PhaseRun {
                final_state: x,
                segment,
                end: PhaseEnd::Timeout,
            });
        }
    }
}

/// Chains phases through a declared sequence, applying impact maps, and
/// closes the stride with the transition back to the first phase.
///
/// The start state is first projected into the first phase. `controls` holds
/// one schedule per phase of the sequence (missing entries mean zero input).
#[allow(clippy::too_many_arguments)]
pub fn simulate_stride(
    model: &ModelSpec,
    sequence: &[usize],
    x0: &[f64],
    controls: &[PiecewiseControl],
    gamma: f64,
    eps: f64,
    kind: InjectionKind,
    config: &SimConfig,
) -> Result<HybridTrajectory, SimError> {
    simulate_stride_sampled(model, sequence, x0, controls, gamma, eps, kind, config, &[])
}

/// [`simulate_stride`] landing exactly on the given phase-local sample times.
#[allow(clippy::too_many_arguments)]
pub fn simulate_stride_sampled(
    model: &ModelSpec,
    sequence: &[usize],
    x0: &[f64],
    controls: &[PiecewiseControl],
    gamma: f64,
    eps: f64,
    kind: InjectionKind,
    config: &SimConfig,
    samples: &[Vec<f64>],
) -> Result<HybridTrajectory, SimError> {
    let m = sequence.len();
    if m == 0 {
        return Err(SimError::EmptySequence);
    }
    let first = sequence[0];
    let mut x = impact_map(model, first, first, x0)?;
    let mut traj = HybridTrajectory::default();
    let mut t = 0.0;
    let zero = PiecewiseControl::zero(model.n_u);
    for k in 0..m {
        let phase = sequence[k];
        let expected = sequence[(k + 1) % m];
        let control = controls.get(k).unwrap_or(&zero);
        let sample = samples.get(k).map_or(&[][..], Vec::as_slice);
        let run = integrate_phase_sampled(model, phase, &x, control, gamma, eps, kind, config, sample, t)?;
        traj.segments.push(run.segment);
        match run.end {
            PhaseEnd::Timeout => {
                return Err(SimError::Timeout {
                    phase,
                    t_max: config.t_max,
                })
            }
            PhaseEnd::Event { target, time } => {
                if target != expected {
                    let mut observed = traj.phases();
                    observed.push(target);
                    return Err(SimError::WrongSequence {
                        from: phase,
                        expected,
                        got: target,
                        time: t + time,
                        observed,
                    });
                }
                t += time;
                let post = impact_map(model, phase, target, &run.final_state)?;
                traj.events.push(EventRecord {
                    time: t,
                    from: phase,
                    to: target,
                    pre: run.final_state,
                    post: post.clone(),
                });
                x = post;
            }
        }
    }
    traj.duration = t;
    Ok(traj)
}
