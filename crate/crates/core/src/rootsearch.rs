//! Quasi-passive gait search: damped Newton on the gait residuals with the
//! controls held at zero and the injection parameter `γ` free.

use crate::hybrid::{impact_map, InjectionKind};
use crate::models::ModelSpec;
use crate::numerics::{solve_least_squares, DenseMatrix, NumericsError};
use crate::simulate::{simulate_stride, HybridTrajectory, SimConfig, SimError};
use crate::transcription::{
    DecisionLayout, GaitVector, LayoutMode, OperatingPoint, ResidualReport, Transcription, TranscriptionError,
};
use log::{debug, info, warn};
use nalgebra::DVector;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RootSearchError {
    #[error(transparent)]
    Transcription(#[from] TranscriptionError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("no candidate start state produced the phase sequence {sequence:?}: {observed:?}")]
    GuessFailure {
        sequence: Vec<usize>,
        observed: Vec<String>,
    },
    #[error("candidate list is empty")]
    NoCandidates,
    #[error("root search did not converge in {iterations} iterations (‖h‖∞ = {residual:e})\n{report}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        report: ResidualReport,
    },
    #[error("line search stalled at iteration {iteration} (‖h‖∞ = {residual:e})")]
    Stalled { iteration: usize, residual: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootSearchConfig {
    pub tol: f64,
    pub max_iters: usize,
    /// Step shrink factor of the backtracking line search.
    pub backtrack: f64,
    pub min_step: f64,
    pub gamma_init: f64,
    pub n_intervals: usize,
    pub sim: SimConfig,
}

impl Default for RootSearchConfig {
    fn default() -> Self {
        RootSearchConfig {
            tol: 1e-8,
            max_iters: 200,
            backtrack: 0.5,
            min_step: 2f64.powi(-20),
            gamma_init: 0.01,
            n_intervals: 10,
            sim: SimConfig::default(),
        }
    }
}

impl RootSearchConfig {
    pub fn validate(&self) -> Result<(), RootSearchError> {
        let ok = self.tol > 0.0
            && self.max_iters > 0
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.min_step > 0.0
            && self.n_intervals >= 2;
        if ok {
            Ok(())
        } else {
            Err(RootSearchError::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// One Newton iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual: f64,
    pub step: f64,
    pub rank: usize,
}

/// A converged quasi-passive gait.
#[derive(Clone, Debug)]
pub struct QuasiPassiveGait {
    pub transcription: Transcription,
    pub a: Vec<f64>,
    pub gamma: f64,
    pub report: ResidualReport,
    pub log: Vec<IterationRecord>,
}

/// Linear interpolation of a segment at phase-local times.
fn resample(times: &[f64], states: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let t0 = times[0];
    let duration = times[times.len() - 1] - t0;
    let mut out = Vec::with_capacity(n + 1);
    let mut i = 0;
    for j in 0..=n {
        if j == n {
            out.push(states[states.len() - 1].clone());
            break;
        }
        let t = t0 + duration * j as f64 / n as f64;
        while i + 2 < times.len() && times[i + 1] < t {
            i += 1;
        }
        let (ta, tb) = (times[i], times[i + 1]);
        let w = if tb > ta {
            ((t - ta) / (tb - ta)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(
            states[i]
                .iter()
                .zip(&states[i + 1])
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        );
    }
    out
}

/// Packs a simulated stride into a quasi-passive decision vector.
pub fn pack_trajectory(
    model: &ModelSpec,
    layout: &DecisionLayout,
    traj: &HybridTrajectory,
    gamma: f64,
) -> Result<Vec<f64>, RootSearchError> {
    let n = layout.n_intervals;
    let nodes: Vec<Vec<Vec<f64>>> = traj.segments.iter().map(|s| resample(&s.times, &s.states, n)).collect();
    let durations = traj
        .segments
        .iter()
        .map(|s| s.times[s.times.len() - 1] - s.times[0])
        .collect();
    let g = GaitVector {
        x0: nodes[0][0].clone(),
        gamma: Some(gamma),
        durations,
        free: model.free_param_values(),
        nodes,
        controls: vec![vec![vec![0.0; model.n_u]; n]; layout.n_phases()],
    };
    Ok(layout.pack(&g)?)
}

/// Simulates each candidate start state at `γ_init` and packs the first one
/// that follows `sequence` onto a uniform per-phase grid.
#[allow(clippy::too_many_arguments)]
pub fn build_guess_from_simulation(
    model: &ModelSpec,
    sequence: &[usize],
    candidates: &[Vec<f64>],
    gamma_init: f64,
    n_intervals: usize,
    kind: InjectionKind,
    sim: &SimConfig,
) -> Result<(DecisionLayout, Vec<f64>), RootSearchError> {
    if candidates.is_empty() {
        return Err(RootSearchError::NoCandidates);
    }
    let layout = DecisionLayout::new(model, sequence, n_intervals, LayoutMode::QuasiPassive)?;
    let mut observed = Vec::new();
    for (i, x0) in candidates.iter().enumerate() {
        match simulate_stride(model, sequence, x0, &[], gamma_init, 0.0, kind, sim) {
            Ok(traj) => {
                info!(
                    "candidate {i} follows the phase sequence (stride time {:.4})",
                    traj.duration
                );
                let a = pack_trajectory(model, &layout, &traj, gamma_init)?;
                return Ok((layout, a));
            }
            Err(e) => {
                debug!("candidate {i} rejected: {e}");
                observed.push(format!("candidate {i}: {e}"));
            }
        }
    }
    Err(RootSearchError::GuessFailure {
        sequence: sequence.to_vec(),
        observed,
    })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Regularized Gauss-Newton step `(JᵀJ + μI) Δ = −Jᵀh`, with `μ` raised
/// until `‖h‖₂` decreases.
fn levenberg_marquardt_step(
    t: &Transcription,
    a: &[f64],
    eps: f64,
    jac: &DenseMatrix,
    h: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let norm0 = two_norm(h);
    let normal = jac.transpose() * jac;
    let grad = jac.transpose() * DVector::from_column_slice(h);
    let scale = normal.diagonal().max().max(1e-12);
    let mut mu = 1e-6 * scale;
    while mu < 1e8 * scale {
        let mut lhs = normal.clone();
        for i in 0..lhs.nrows() {
            lhs[(i, i)] += mu;
        }
        if let Some(chol) = lhs.cholesky() {
            let delta = chol.solve(&(-&grad));
            let trial: Vec<f64> = a.iter().zip(delta.iter()).map(|(x, d)| x + d).collect();
            if let Ok(h_trial) = t.residuals(&trial, eps) {
                if two_norm(&h_trial) < norm0 {
                    return Some((trial, h_trial));
                }
            }
        }
        mu *= 10.0;
    }
    None
}

/// Damped least-squares Newton on `h(a, ε) = 0` from a packed start.
///
/// Steps are minimum-norm solutions of `J Δ = −h`, so underdetermined
/// systems are handled as well. The step length is halved until `‖h‖₂`
/// decreases. When no step length helps, a Levenberg-Marquardt step is
/// tried before giving up.
pub fn newton_solve(
    t: &Transcription,
    a0: &[f64],
    eps: f64,
    config: &RootSearchConfig,
) -> Result<(Vec<f64>, Vec<IterationRecord>), RootSearchError> {
    config.validate()?;
    let mut a = a0.to_vec();
    let mut h = t.residuals(&a, eps)?;
    let mut log = Vec::new();
    for iteration in 0..config.max_iters {
        let res = inf_norm(&h);
        if res < config.tol {
            info!("newton converged: iteration={iteration} residual={res:.3e}");
            return Ok((a, log));
        }
        let jac = t.jacobian(&a, eps)?;
        let rhs: Vec<f64> = h.iter().map(|v| -v).collect();
        let ls = solve_least_squares(&jac.jac, &rhs, 0)?;
        let norm0 = two_norm(&h);
        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = a.iter().zip(ls.x.iter()).map(|(x, d)| x + step * d).collect();
            if let Ok(h_trial) = t.residuals(&trial, eps) {
                if two_norm(&h_trial) < norm0 {
                    break Some((trial, h_trial));
                }
            }
            step *= config.backtrack;
            if step < config.min_step {
                break None;
            }
        };
        let accepted = match accepted {
            Some(v) => Some(v),
            None => {
                debug!("newton step rejected at iteration {iteration}; trying Levenberg-Marquardt");
                step = 0.0;
                levenberg_marquardt_step(t, &a, eps, &jac.jac, &h)
            }
        };
        let Some((trial, h_trial)) = accepted else {
            return Err(RootSearchError::Stalled {
                iteration,
                residual: res,
            });
        };
        info!(
            "newton iteration={iteration} residual={res:.3e} step={step:.3e} rank={} n_h={} n_a={}",
            ls.rank,
            t.n_h(),
            t.n_a()
        );
        log.push(IterationRecord {
            iteration,
            residual: res,
            step,
            rank: ls.rank,
        });
        a = trial;
        h = h_trial;
    }
    let residual = inf_norm(&h);
    if residual < config.tol {
        return Ok((a, log));
    }
    Err(RootSearchError::NonConvergence {
        iterations: config.max_iters,
        residual,
        report: t.report(&a, eps)?,
    })
}

/// Solves the quasi-passive gait problem from a packed guess.
pub fn find_quasi_passive_gait(
    model: &ModelSpec,
    layout: &DecisionLayout,
    guess: &[f64],
    op: OperatingPoint,
    kind: InjectionKind,
    config: &RootSearchConfig,
) -> Result<QuasiPassiveGait, RootSearchError> {
    if layout.mode != LayoutMode::QuasiPassive {
        return Err(RootSearchError::InvalidConfig("layout must be quasi-passive".into()));
    }
    let t = Transcription::new(model, layout.clone(), op, kind)?;
    if t.n_h() != t.n_a() {
        warn!(
            "gait system is not square (n_h = {}, n_a = {}); using minimum-norm least-squares steps",
            t.n_h(),
            t.n_a()
        );
    }
    let start = layout.unpack(guess)?;
    let gamma0 = start.gamma.unwrap_or(config.gamma_init);
    let sim_model = t.model_at(guess);
    if let Err(e) = simulate_stride(
        &sim_model,
        &layout.sequence,
        &start.x0,
        &[],
        gamma0,
        0.0,
        kind,
        &config.sim,
    ) {
        warn!("guess does not reproduce the phase sequence in simulation: {e}");
    }
    let (a, log) = newton_solve(&t, guess, 0.0, config)?;
    let gamma = t.gamma(&a);
    if gamma <= 0.0 {
        warn!("converged injection parameter γ = {gamma} is not positive");
    }
    let report = t.report(&a, 0.0)?;
    Ok(QuasiPassiveGait {
        transcription: t,
        a,
        gamma,
        report,
        log,
    })
}

/// Initial state projected into the first phase (as simulation starts it).
pub fn projected_start(model: &ModelSpec, sequence: &[usize], x0: &[f64]) -> Result<Vec<f64>, RootSearchError> {
    let first = *sequence.first().ok_or(RootSearchError::NoCandidates)?;
    Ok(impact_map(model, first, first, x0).map_err(SimError::from)?)
}
