//! Constrained phase dynamics, impact maps and virtual energy injection.
//!
//! In a phase with holonomic foot constraints `g(q) = 0` the dynamics are
//! `M q̈ = n + Jᵀu + Wλ` with the contact force `λ` chosen so the constraint
//! acceleration vanishes. Transitions project velocities with the target
//! phase's constraints. The homotopy field adds a scaled virtual injection
//! `(1 − ε) f_E(x, γ)` on top of the physical vector field.

use crate::models::{ModelError, ModelSpec};
use crate::numerics::{Ldl, Scalar, SmallMat};
use crate::simulate::HybridTrajectory;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("mass matrix is not positive definite")]
    SingularMass,
    #[error("constraint matrix WᵀM⁻¹W of phase {phase} is singular")]
    ConstraintDegeneracy { phase: usize },
    #[error("injection parameter must be non-negative, got {0}")]
    NegativeInjection(f64),
    #[error("expected {expected} entries for {what}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Configuration and velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
}

impl State {
    pub fn from_x(x: &[f64]) -> Self {
        let n = x.len() / 2;
        State {
            q: x[..n].to_vec(),
            qd: x[n..].to_vec(),
        }
    }

    pub fn to_x(&self) -> Vec<f64> {
        let mut x = self.q.clone();
        x.extend_from_slice(&self.qd);
        x
    }
}

/// Form of the virtual energy injection `f_E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InjectionKind {
    /// `γ · ∇E = γ (∂E/∂q, M q̇)`.
    EnergyGradient,
    /// `(0, γ M⁻¹ q̇)`.
    NegativeDamping,
    /// `(0, γ q̇)`, injecting power `2γ E_kin`. Keeps `Wᵀq̇ = 0` invariant.
    #[default]
    MassProportional,
}

impl InjectionKind {
    pub fn name(self) -> &'static str {
        match self {
            InjectionKind::EnergyGradient => "energy-grad",
            InjectionKind::NegativeDamping => "neg-damping",
            InjectionKind::MassProportional => "mass-prop",
        }
    }
}

impl fmt::Display for InjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InjectionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "energy-grad" => Ok(InjectionKind::EnergyGradient),
            "neg-damping" => Ok(InjectionKind::NegativeDamping),
            "mass-prop" => Ok(InjectionKind::MassProportional),
            other => Err(format!(
                "unknown injection `{other}` (expected mass-prop, neg-damping or energy-grad)"
            )),
        }
    }
}

/// Accelerations and contact forces of one phase at one state.
#[derive(Clone, Debug)]
pub struct PhaseDynamics<S> {
    pub qdd: Vec<S>,
    pub lambda: Vec<S>,
    pub mass: SmallMat<S>,
    pub factor: Ldl<S>,
}

/// Solves the constrained phase dynamics on a generic scalar.
pub fn phase_dynamics<S: Scalar>(
    model: &ModelSpec,
    phase: usize,
    q: &[S],
    qd: &[S],
    u: &[S],
    free: &[S],
) -> Result<PhaseDynamics<S>, DynamicsError> {
    let terms = model.dynamics_terms(q, qd, u, free);
    let factor = Ldl::new(&terms.mass).ok_or(DynamicsError::SingularMass)?;
    let mut qdd = factor.solve(&terms.forces);
    let n_c = model.phases[phase].n_constraints();
    let mut lambda = Vec::new();
    if n_c > 0 {
        let contact = model.contact(phase, q, qd);
        let minv_w: Vec<Vec<S>> = contact.w.iter().map(|w| factor.solve(w)).collect();
        let mut a = SmallMat::zeros(n_c);
        for i in 0..n_c {
            for j in 0..n_c {
                *a.at_mut(i, j) = crate::numerics::dot(&contact.w[i], &minv_w[j]);
            }
        }
        let rhs: Vec<S> = (0..n_c)
            .map(|i| -crate::numerics::dot(&contact.w[i], &qdd) - contact.bias[i])
            .collect();
        let a_factor = Ldl::new(&a).ok_or(DynamicsError::ConstraintDegeneracy { phase })?;
        lambda = a_factor.solve(&rhs);
        for (c, col) in minv_w.iter().enumerate() {
            for (acc, m) in qdd.iter_mut().zip(col) {
                *acc += *m * lambda[c];
            }
        }
    }
    Ok(PhaseDynamics {
        qdd,
        lambda,
        mass: terms.mass,
        factor,
    })
}

/// Injection increment `f_E(x, γ)` given the mass matrix and its factor.
#[allow(clippy::too_many_arguments)]
pub fn injection_increment<S: Scalar>(
    model: &ModelSpec,
    kind: InjectionKind,
    q: &[S],
    qd: &[S],
    gamma: S,
    free: &[S],
    mass: &SmallMat<S>,
    factor: &Ldl<S>,
) -> Vec<S> {
    let n = model.n_q;
    let mut out = vec![S::zero(); 2 * n];
    match kind {
        InjectionKind::MassProportional => {
            for i in 0..n {
                out[n + i] = gamma * qd[i];
            }
        }
        InjectionKind::NegativeDamping => {
            let v = factor.solve(qd);
            for i in 0..n {
                out[n + i] = gamma * v[i];
            }
        }
        InjectionKind::EnergyGradient => {
            let dt = model.kinetic_energy_gradient(q, qd);
            let dv = model.potential_gradient(q, free);
            for i in 0..n {
                out[i] = gamma * (dt[i] + dv[i]);
                let mut p = S::zero();
                for j in 0..n {
                    p += mass.at(i, j) * qd[j];
                }
                out[n + i] = gamma * p;
            }
        }
    }
    out
}

/// Power `∇E · f_E` of an injection increment.
pub fn injection_power<S: Scalar>(
    model: &ModelSpec,
    q: &[S],
    qd: &[S],
    increment: &[S],
    free: &[S],
    mass: &SmallMat<S>,
) -> S {
    let n = model.n_q;
    let mut p = S::zero();
    if increment[..n].iter().any(|v| v.value() != 0.0) {
        let dt = model.kinetic_energy_gradient(q, qd);
        let dv = model.potential_gradient(q, free);
        for i in 0..n {
            p += (dt[i] + dv[i]) * increment[i];
        }
    }
    for i in 0..n {
        let mut mq = S::zero();
        for j in 0..n {
            mq += mass.at(i, j) * qd[j];
        }
        p += mq * increment[n + i];
    }
    p
}

/// `f_i(x, u) + (1 − ε) f_E(x, γ)` on a generic scalar.
#[allow(clippy::too_many_arguments)]
pub fn homotopy_field_of<S: Scalar>(
    model: &ModelSpec,
    phase: usize,
    x: &[S],
    u: &[S],
    gamma: S,
    eps: S,
    kind: InjectionKind,
    free: &[S],
) -> Result<Vec<S>, DynamicsError> {
    let n = model.n_q;
    let (q, qd) = x.split_at(n);
    let dynamics = phase_dynamics(model, phase, q, qd, u, free)?;
    let mut xdot: Vec<S> = qd.iter().copied().chain(dynamics.qdd.iter().copied()).collect();
    let scale = (S::one() - eps) * gamma;
    let inc = injection_increment(model, kind, q, qd, S::one(), free, &dynamics.mass, &dynamics.factor);
    for (v, d) in xdot.iter_mut().zip(&inc) {
        *v += *d * scale;
    }
    Ok(xdot)
}

/// Velocity projection `Δ` into the phase `to` on a generic scalar.
pub fn impact_map_of<S: Scalar>(model: &ModelSpec, to: usize, x: &[S]) -> Result<Vec<S>, DynamicsError> {
    let n = model.n_q;
    let (q, qd) = x.split_at(n);
    let n_c = model.phases[to].n_constraints();
    if n_c == 0 {
        return Ok(x.to_vec());
    }
    let mass = model.mass_matrix_of(q);
    let factor = Ldl::new(&mass).ok_or(DynamicsError::SingularMass)?;
    let contact = model.contact(to, q, qd);
    let minv_w: Vec<Vec<S>> = contact.w.iter().map(|w| factor.solve(w)).collect();
    let mut a = SmallMat::zeros(n_c);
    for i in 0..n_c {
        for j in 0..n_c {
            *a.at_mut(i, j) = crate::numerics::dot(&contact.w[i], &minv_w[j]);
        }
    }
    let a_factor = Ldl::new(&a).ok_or(DynamicsError::ConstraintDegeneracy { phase: to })?;
    let wt_qd: Vec<S> = contact.w.iter().map(|w| crate::numerics::dot(w, qd)).collect();
    let mu = a_factor.solve(&wt_qd);
    let mut out = x.to_vec();
    for (c, col) in minv_w.iter().enumerate() {
        for i in 0..n {
            out[n + i] -= col[i] * mu[c];
        }
    }
    Ok(out)
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), DynamicsError> {
    if expected == got {
        Ok(())
    } else {
        Err(DynamicsError::Dimension { what, expected, got })
    }
}

fn check_phase(model: &ModelSpec, phase: usize) -> Result<(), DynamicsError> {
    if phase < model.phases.len() {
        Ok(())
    } else {
        Err(ModelError::UnknownPhase(phase.to_string()).into())
    }
}

fn check_state(model: &ModelSpec, phase: usize, x: &[f64], u: &[f64]) -> Result<(), DynamicsError> {
    check_phase(model, phase)?;
    check_len("state", model.n_x(), x.len())?;
    check_len("input", model.n_u, u.len())
}

/// Contact forces `λ` of a phase (empty in flight).
pub fn contact_forces(model: &ModelSpec, phase: usize, x: &[f64], u: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    check_state(model, phase, x, u)?;
    let (q, qd) = x.split_at(model.n_q);
    Ok(phase_dynamics(model, phase, q, qd, u, &model.free_param_values())?.lambda)
}

/// Physical vector field `ẋ = f_i(x, u)`.
pub fn vector_field(model: &ModelSpec, phase: usize, x: &[f64], u: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    check_state(model, phase, x, u)?;
    let (q, qd) = x.split_at(model.n_q);
    let d = phase_dynamics(model, phase, q, qd, u, &model.free_param_values())?;
    Ok(qd.iter().copied().chain(d.qdd).collect())
}

/// Jump map from phase `from` to phase `to`; positions are untouched.
pub fn impact_map(model: &ModelSpec, from: usize, to: usize, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    check_phase(model, from)?;
    check_phase(model, to)?;
    check_len("state", model.n_x(), x.len())?;
    impact_map_of(model, to, x)
}

/// Injection increment `f_E(x, γ)` (length `2 n_q`).
pub fn virtual_injection(
    model: &ModelSpec,
    x: &[f64],
    gamma: f64,
    kind: InjectionKind,
) -> Result<Vec<f64>, DynamicsError> {
    if gamma < 0.0 {
        return Err(DynamicsError::NegativeInjection(gamma));
    }
    check_len("state", model.n_x(), x.len())?;
    let (q, qd) = x.split_at(model.n_q);
    let mass = model.mass_matrix_of(q);
    let factor = Ldl::new(&mass).ok_or(DynamicsError::SingularMass)?;
    let free = model.free_param_values();
    Ok(injection_increment(model, kind, q, qd, gamma, &free, &mass, &factor))
}

/// Power inserted by the injection at `x`.
pub fn virtual_injection_power(
    model: &ModelSpec,
    x: &[f64],
    gamma: f64,
    kind: InjectionKind,
) -> Result<f64, DynamicsError> {
    let inc = virtual_injection(model, x, gamma, kind)?;
    let (q, qd) = x.split_at(model.n_q);
    let mass = model.mass_matrix_of(q);
    Ok(injection_power(model, q, qd, &inc, &model.free_param_values(), &mass))
}

/// `f_i(x, u) + (1 − ε) f_E(x, γ)`.
#[allow(clippy::too_many_arguments)]
pub fn homotopy_field(
    model: &ModelSpec,
    phase: usize,
    x: &[f64],
    u: &[f64],
    gamma: f64,
    eps: f64,
    kind: InjectionKind,
) -> Result<Vec<f64>, DynamicsError> {
    if gamma < 0.0 {
        return Err(DynamicsError::NegativeInjection(gamma));
    }
    check_state(model, phase, x, u)?;
    homotopy_field_of(model, phase, x, u, gamma, eps, kind, &model.free_param_values())
}

/// Energy flows of one stride.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyAudit {
    /// `∫ (1 − ε) ∇E·f_E dt`.
    pub injected: f64,
    /// `∫ Σ d (c·q̇)² dt`.
    pub dissipated: f64,
    /// `Σ E(x⁻) − E(x⁺)` over jumps.
    pub impact_loss: f64,
    /// `∫ q̇ᵀ (Q(u) − Q(0)) dt`.
    pub actuator_work: f64,
    /// Largest `|Wᵀq̇|` seen along constrained segments.
    pub constraint_drift: f64,
}

impl EnergyAudit {
    /// `injected + actuator − dissipated − impact`; zero for a periodic stride.
    pub fn imbalance(&self) -> f64 {
        self.injected + self.actuator_work - self.dissipated - self.impact_loss
    }
}

/// Instantaneous injected, dissipated and actuator power at one state.
pub fn power_terms(
    model: &ModelSpec,
    x: &[f64],
    u: &[f64],
    gamma: f64,
    eps: f64,
    kind: InjectionKind,
    free: &[f64],
) -> (f64, f64, f64) {
    let n = model.n_q;
    let (q, qd) = x.split_at(n);
    let mass = model.mass_matrix_of(q);
    let injected = match Ldl::new(&mass) {
        Some(factor) if gamma != 0.0 && eps != 1.0 => {
            let inc = injection_increment(model, kind, q, qd, gamma, free, &mass, &factor);
            (1.0 - eps) * injection_power(model, q, qd, &inc, free, &mass)
        }
        _ => 0.0,
    };
    let dissipated = model.damping_power(qd);
    let act = model.actuator_forces(u);
    let actuator = crate::numerics::dot(qd, &act);
    (injected, dissipated, actuator)
}

/// Energy bookkeeping along a simulated or reconstructed stride.
///
/// Powers are integrated with the trapezoidal rule on the segment samples;
/// jumps contribute their energy drop.
pub fn stride_energy_audit(
    model: &ModelSpec,
    trajectory: &HybridTrajectory,
    gamma: f64,
    eps: f64,
    kind: InjectionKind,
) -> Result<EnergyAudit, DynamicsError> {
    let free = model.free_param_values();
    let mut audit = EnergyAudit::default();
    for seg in &trajectory.segments {
        let mut prev: Option<(f64, (f64, f64, f64))> = None;
        for (k, (t, x)) in seg.times.iter().zip(&seg.states).enumerate() {
            check_len("state", model.n_x(), x.len())?;
            let u = seg.control_at(k, model.n_u);
            let p = power_terms(model, x, &u, gamma, eps, kind, &free);
            if let Some((t0, p0)) = prev {
                let h = t - t0;
                audit.injected += 0.5 * h * (p0.0 + p.0);
                audit.dissipated += 0.5 * h * (p0.1 + p.1);
                audit.actuator_work += 0.5 * h * (p0.2 + p.2);
            }
            prev = Some((*t, p));
            let (q, qd) = x.split_at(model.n_q);
            let c = model.contact(seg.phase, q, qd);
            for w in &c.w {
                let drift = crate::numerics::dot(w, qd).abs();
                audit.constraint_drift = audit.constraint_drift.max(drift);
            }
        }
    }
    for ev in &trajectory.events {
        audit.impact_loss += model.total_energy_of(&ev.pre, &free) - model.total_energy_of(&ev.post, &free);
    }
    Ok(audit)
}
