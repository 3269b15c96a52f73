//! Planar legged models behind one interface.
//!
//! A [`ModelSpec`] is data: point masses and rotational inertias described by
//! [`PointExpr`]s, linear springs with dampers on coordinate combinations,
//! actuators, feet and contact phases. Mass matrix, generalized forces,
//! contact kinematics and energies are evaluated from that description on any
//! [`Scalar`], so the same definition serves simulation and differentiation.
//!
//! Three models ship with the crate: [`prismatic_monopod`],
//! [`segmented_monopod`] and [`sagittal_quadruped`].

mod kinematics;
mod params;
mod zoo;

pub use kinematics::{PointExpr, PointKinematics, Term};
pub use params::ParamSet;
pub use zoo::{build_model, prismatic_monopod, sagittal_quadruped, segmented_monopod, ModelKind};

use crate::numerics::{DenseMatrix, Scalar, SmallMat};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unknown parameter `{name}` for model {model}")]
    UnknownParameter { model: String, name: String },
    #[error("parameter `{name}` = {value} is out of range: {reason}")]
    InvalidParameter { name: String, value: f64, reason: String },
    #[error("unknown phase `{0}`")]
    UnknownPhase(String),
    #[error("no event from phase {from} to phase {to}")]
    UnknownEvent { from: usize, to: usize },
    #[error("mass matrix is not positive definite")]
    Singular,
    #[error("expected {expected} entries for {what}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

/// How motor commands enter the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActuationKind {
    /// The motor adds a generalized force on a coordinate.
    ParallelTorque,
    /// The motor position shifts the rest position of a spring.
    SeriesElasticPosition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointMass {
    pub name: String,
    pub mass: f64,
    pub point: PointExpr,
}

/// Rotational inertia about an angle that is a sum of coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Inertia {
    pub name: String,
    pub inertia: f64,
    pub angles: Vec<usize>,
}

/// Rest position of a spring: fixed or one of the model's free parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rest {
    Fixed(f64),
    Free(usize),
}

/// Linear spring and damper acting on the deflection `c·q`.
///
/// Potential `½k(u + rest − c·q)²` where `u` is the series motor position (if
/// any), dissipation `½d(c·q̇)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spring {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub rest: Rest,
    pub stiffness: f64,
    pub damping: f64,
    pub motor: Option<usize>,
}

impl Spring {
    fn deflection<S: Scalar>(&self, v: &[S]) -> S {
        self.coeffs.iter().fold(S::zero(), |a, &(i, c)| a + v[i] * c)
    }

    fn rest_value<S: Scalar>(&self, free: &[S]) -> S {
        match self.rest {
            Rest::Fixed(r) => S::cst(r),
            Rest::Free(k) => free[k],
        }
    }
}

/// Motor acting directly as a generalized force on one coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelActuator {
    pub motor: usize,
    pub coord: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Foot {
    pub name: String,
    pub point: PointExpr,
}

/// What a transition watches for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// Foot height crosses zero from above: value `−z_foot`.
    Touchdown { foot: usize },
    /// Vertical contact force crosses zero from above: value `−λ_z`.
    Liftoff { foot: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub target: usize,
    pub kind: EventKind,
}

/// One contact configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpec {
    pub id: usize,
    pub name: String,
    /// Feet held on the ground; each contributes an `(x, z)` constraint pair.
    pub contacts: Vec<usize>,
    pub events: Vec<Transition>,
}

impl PhaseSpec {
    pub fn n_constraints(&self) -> usize {
        2 * self.contacts.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeParam {
    pub name: String,
    pub value: f64,
}

/// A planar hybrid mechanical model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub n_q: usize,
    pub n_u: usize,
    pub state_names: Vec<String>,
    pub control_names: Vec<String>,
    pub phases: Vec<PhaseSpec>,
    pub params: ParamSet,
    pub actuation_kind: ActuationKind,
    pub gravity: f64,
    pub masses: Vec<PointMass>,
    pub inertias: Vec<Inertia>,
    pub springs: Vec<Spring>,
    pub parallel: Vec<ParallelActuator>,
    pub feet: Vec<Foot>,
    pub free_params: Vec<FreeParam>,
    /// Coordinates excluded from periodicity (zero rows of `P`).
    pub aperiodic: Vec<usize>,
    /// `(motor, foot)` pairs: the motor may only move while the foot is in contact.
    pub gated_motors: Vec<(usize, usize)>,
}

/// Contact kinematics of one phase.
#[derive(Clone, Debug)]
pub struct Contact<S> {
    /// Stacked foot positions `g`.
    pub g: Vec<S>,
    /// Columns of `W` (one per constraint row), each of length `n_q`.
    pub w: Vec<Vec<S>>,
    /// `Ẇᵀ q̇`.
    pub bias: Vec<S>,
}

/// Mass matrix and total generalized force at one state.
#[derive(Clone, Debug)]
pub struct DynamicsTerms<S> {
    pub mass: SmallMat<S>,
    pub forces: Vec<S>,
}

impl ModelSpec {
    pub fn n_x(&self) -> usize {
        2 * self.n_q
    }

    pub fn phase_index(&self, name: &str) -> Result<usize, ModelError> {
        self.phases
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| ModelError::UnknownPhase(name.to_string()))
    }

    pub fn free_param_values(&self) -> Vec<f64> {
        self.free_params.iter().map(|p| p.value).collect()
    }

    /// Periodicity matrix `P` (`2n_q × 2n_q`, zero rows for aperiodic states).
    pub fn periodicity_matrix(&self) -> DenseMatrix {
        let n = self.n_x();
        DenseMatrix::from_fn(n, n, |i, j| {
            if i == j && !self.aperiodic.contains(&i) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn transition(&self, from: usize, to: usize) -> Result<EventKind, ModelError> {
        self.phases
            .get(from)
            .and_then(|p| p.events.iter().find(|t| t.target == to))
            .map(|t| t.kind)
            .ok_or(ModelError::UnknownEvent { from, to })
    }

    /// `M(q)`.
    pub fn mass_matrix_of<S: Scalar>(&self, q: &[S]) -> SmallMat<S> {
        let zero = vec![S::zero(); self.n_q];
        let kin: Vec<_> = self.masses.iter().map(|m| m.point.kinematics(q, &zero)).collect();
        self.assemble_mass(&kin)
    }

    fn assemble_mass<S: Scalar>(&self, kin: &[PointKinematics<S>]) -> SmallMat<S> {
        let n = self.n_q;
        let mut mass = SmallMat::zeros(n);
        for (pm, k) in self.masses.iter().zip(kin) {
            if pm.mass == 0.0 {
                continue;
            }
            for i in 0..n {
                let ji = k.jac[i];
                for j in i..n {
                    let jj = k.jac[j];
                    let t = (ji[0] * jj[0] + ji[1] * jj[1]) * pm.mass;
                    *mass.at_mut(i, j) += t;
                }
            }
        }
        for inertia in &self.inertias {
            for &a in &inertia.angles {
                for &b in &inertia.angles {
                    if a <= b {
                        *mass.at_mut(a, b) += S::cst(inertia.inertia);
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                *mass.at_mut(i, j) = mass.at(j, i);
            }
        }
        mass
    }

    /// Mass matrix and `n(q, q̇) + Jᵀu`: velocity-product, gravity, spring,
    /// damper and actuator forces.
    pub fn dynamics_terms<S: Scalar>(&self, q: &[S], qd: &[S], u: &[S], free: &[S]) -> DynamicsTerms<S> {
        let n = self.n_q;
        let kin: Vec<_> = self.masses.iter().map(|m| m.point.kinematics(q, qd)).collect();
        let mass = self.assemble_mass(&kin);
        let mut forces = vec![S::zero(); n];
        for (pm, k) in self.masses.iter().zip(&kin) {
            if pm.mass == 0.0 {
                continue;
            }
            let bx = k.bias[0] * pm.mass;
            let bz = k.bias[1] * pm.mass;
            for i in 0..n {
                forces[i] -= k.jac[i][0] * bx + k.jac[i][1] * bz;
                forces[i] -= k.jac[i][1] * (pm.mass * self.gravity);
            }
        }
        self.add_spring_forces(q, qd, u, free, &mut forces);
        for act in &self.parallel {
            forces[act.coord] += u[act.motor];
        }
        DynamicsTerms { mass, forces }
    }

    fn add_spring_forces<S: Scalar>(&self, q: &[S], qd: &[S], u: &[S], free: &[S], forces: &mut [S]) {
        for s in &self.springs {
            let mut stretch = s.rest_value(free) - s.deflection(q);
            if let Some(m) = s.motor {
                stretch += u[m];
            }
            let rate = s.deflection(qd);
            let magnitude = stretch * s.stiffness - rate * s.damping;
            for &(i, c) in &s.coeffs {
                forces[i] += magnitude * c;
            }
        }
    }

    /// Generalized force delivered by the motors beyond the `u = 0` forces.
    pub fn actuator_forces<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        let mut f = vec![S::zero(); self.n_q];
        for s in &self.springs {
            if let Some(m) = s.motor {
                for &(i, c) in &s.coeffs {
                    f[i] += u[m] * (s.stiffness * c);
                }
            }
        }
        for act in &self.parallel {
            f[act.coord] += u[act.motor];
        }
        f
    }

    /// Power dissipated by the dampers, `Σ d (c·q̇)²`.
    pub fn damping_power<S: Scalar>(&self, qd: &[S]) -> S {
        self.springs.iter().fold(S::zero(), |acc, s| {
            let r = s.deflection(qd);
            acc + r * r * s.damping
        })
    }

    /// Gravity plus spring potential with motors at zero.
    pub fn potential_energy<S: Scalar>(&self, q: &[S], free: &[S]) -> S {
        let mut v = S::zero();
        for pm in &self.masses {
            if pm.mass != 0.0 {
                v += pm.point.position(q)[1] * (pm.mass * self.gravity);
            }
        }
        for s in &self.springs {
            let d = s.rest_value(free) - s.deflection(q);
            v += d * d * (0.5 * s.stiffness);
        }
        v
    }

    /// `∂V/∂q` of [`Self::potential_energy`].
    pub fn potential_gradient<S: Scalar>(&self, q: &[S], free: &[S]) -> Vec<S> {
        let n = self.n_q;
        let zero = vec![S::zero(); n];
        let mut grad = vec![S::zero(); n];
        for pm in &self.masses {
            if pm.mass == 0.0 {
                continue;
            }
            let k = pm.point.kinematics(q, &zero);
            for i in 0..n {
                grad[i] += k.jac[i][1] * (pm.mass * self.gravity);
            }
        }
        for s in &self.springs {
            let d = s.rest_value(free) - s.deflection(q);
            for &(i, c) in &s.coeffs {
                grad[i] -= d * (s.stiffness * c);
            }
        }
        grad
    }

    pub fn kinetic_energy_of<S: Scalar>(&self, q: &[S], qd: &[S]) -> S {
        let m = self.mass_matrix_of(q);
        let n = self.n_q;
        let mut e = S::zero();
        for i in 0..n {
            for j in 0..n {
                e += qd[i] * m.at(i, j) * qd[j];
            }
        }
        e * 0.5
    }

    pub fn total_energy_of<S: Scalar>(&self, x: &[S], free: &[S]) -> S {
        let (q, qd) = x.split_at(self.n_q);
        self.kinetic_energy_of(q, qd) + self.potential_energy(q, free)
    }

    /// Foot position.
    pub fn foot_position<S: Scalar>(&self, foot: usize, q: &[S]) -> [S; 2] {
        self.feet[foot].point.position(q)
    }

    /// Constraint values, Jacobian columns and `Ẇᵀq̇` for a phase.
    pub fn contact<S: Scalar>(&self, phase: usize, q: &[S], qd: &[S]) -> Contact<S> {
        let ph = &self.phases[phase];
        let mut c = Contact {
            g: Vec::with_capacity(ph.n_constraints()),
            w: Vec::with_capacity(ph.n_constraints()),
            bias: Vec::with_capacity(ph.n_constraints()),
        };
        for &f in &ph.contacts {
            let k = self.feet[f].point.kinematics(q, qd);
            for d in 0..2 {
                c.g.push(k.pos[d]);
                c.w.push(k.jac.iter().map(|j| j[d]).collect());
                c.bias.push(k.bias[d]);
            }
        }
        c
    }

    /// Row of the contact-force vector holding the vertical force of `foot`.
    pub fn vertical_force_row(&self, phase: usize, foot: usize) -> Option<usize> {
        self.phases[phase]
            .contacts
            .iter()
            .position(|&f| f == foot)
            .map(|k| 2 * k + 1)
    }

    /// Event value given the configuration and the phase's contact forces.
    pub fn event_of<S: Scalar>(&self, phase: usize, kind: EventKind, q: &[S], lambda: &[S]) -> S {
        match kind {
            EventKind::Touchdown { foot } => -self.foot_position(foot, q)[1],
            EventKind::Liftoff { foot } => match self.vertical_force_row(phase, foot) {
                Some(r) => -lambda[r],
                None => S::zero(),
            },
        }
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), ModelError> {
    if expected == got {
        Ok(())
    } else {
        Err(ModelError::Dimension { what, expected, got })
    }
}

/// Symmetric positive definite `M(q)`.
pub fn mass_matrix(model: &ModelSpec, q: &[f64]) -> Result<DenseMatrix, ModelError> {
    check_len("configuration", model.n_q, q.len())?;
    let m = model.mass_matrix_of(q);
    crate::numerics::Ldl::new(&m).ok_or(ModelError::Singular)?;
    Ok(m.to_dense())
}

/// `n(q, q̇) + Jᵀu`.
pub fn generalized_forces(model: &ModelSpec, q: &[f64], qd: &[f64], u: &[f64]) -> Result<Vec<f64>, ModelError> {
    check_len("configuration", model.n_q, q.len())?;
    check_len("velocity", model.n_q, qd.len())?;
    check_len("input", model.n_u, u.len())?;
    Ok(model.dynamics_terms(q, qd, u, &model.free_param_values()).forces)
}

/// Phase constraint evaluated on reals.
#[derive(Clone, Debug)]
pub struct ConstraintEval {
    pub g: Vec<f64>,
    /// `n_q × n_c`.
    pub w: DenseMatrix,
}

/// `g_i(q)` and `W_i(q)`; flight phases give dimension zero.
pub fn constraint_and_jacobian(model: &ModelSpec, phase: usize, q: &[f64]) -> Result<ConstraintEval, ModelError> {
    check_len("configuration", model.n_q, q.len())?;
    if phase >= model.phases.len() {
        return Err(ModelError::UnknownPhase(phase.to_string()));
    }
    let c = model.contact(phase, q, &vec![0.0; model.n_q]);
    let w = DenseMatrix::from_fn(model.n_q, c.w.len(), |i, j| c.w[j][i]);
    Ok(ConstraintEval { g: c.g, w })
}

/// `Ẇᵢᵀ q̇` for a phase.
pub fn constraint_bias(model: &ModelSpec, phase: usize, q: &[f64], qd: &[f64]) -> Result<Vec<f64>, ModelError> {
    if phase >= model.phases.len() {
        return Err(ModelError::UnknownPhase(phase.to_string()));
    }
    Ok(model.contact(phase, q, qd).bias)
}

/// Value of the event guarding the transition `from → to`.
pub fn event_value(model: &ModelSpec, from: usize, to: usize, x: &[f64], lambda: &[f64]) -> Result<f64, ModelError> {
    check_len("state", model.n_x(), x.len())?;
    let kind = model.transition(from, to)?;
    if let EventKind::Liftoff { .. } = kind {
        check_len("contact forces", model.phases[from].n_constraints(), lambda.len())?;
    }
    Ok(model.event_of(from, kind, &x[..model.n_q], lambda))
}

pub fn total_energy(model: &ModelSpec, x: &[f64]) -> f64 {
    model.total_energy_of(x, &model.free_param_values())
}

pub fn kinetic_energy(model: &ModelSpec, x: &[f64]) -> f64 {
    model.kinetic_energy_of(&x[..model.n_q], &x[model.n_q..])
}

impl ModelSpec {
    /// `∂T/∂q` at fixed `q̇`.
    pub fn kinetic_energy_gradient<S: Scalar>(&self, q: &[S], qd: &[S]) -> Vec<S> {
        let mut grad = vec![S::zero(); self.n_q];
        for pm in &self.masses {
            if pm.mass == 0.0 {
                continue;
            }
            let (vel, partials) = pm.point.velocity_partials(q, qd);
            for (g, p) in grad.iter_mut().zip(&partials) {
                *g += (vel[0] * p[0] + vel[1] * p[1]) * pm.mass;
            }
        }
        grad
    }
}
