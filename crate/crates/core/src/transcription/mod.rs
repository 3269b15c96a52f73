//! Hermite–Simpson transcription of the periodic gait problem.
//!
//! A [`Transcription`] binds a model, a [`DecisionLayout`], an
//! [`OperatingPoint`] and an injection kind. It evaluates the stacked residual
//! `h(a, ε)`, its Jacobian and the multiplier-weighted Hessian `Σ λᵢ ∇²hᵢ`.
//! Derivatives are taken block by block: each residual block only reads a
//! few dozen decision variables, so forward-mode seeds stay narrow.

mod blocks;
mod layout;

pub use blocks::BlockGroup;
pub use layout::{DecisionLayout, GaitVector, LayoutMode};

use crate::hybrid::{power_terms, DynamicsError, EnergyAudit, InjectionKind};
use crate::models::{ModelError, ModelSpec};
use crate::numerics::{jacobian_and_values, second_order, DenseMatrix, NumericsError, Scalar, VectorFn};
use crate::simulate::{EventRecord, HybridTrajectory, PiecewiseControl, Segment};
use blocks::{BlockContext, BlockFn, BlockSpec};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TranscriptionError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("decision vector has length {got}, layout expects {expected}")]
    Length { expected: usize, got: usize },
    #[error("duration of phase {index} is {value}, must be positive")]
    NonPositiveDuration { index: usize, value: f64 },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("operating point value {0} is not finite")]
    InvalidOperatingPoint(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatingKind {
    /// Mean horizontal speed of the main body over a stride.
    AverageSpeed,
    /// Total energy at the stride start.
    EnergyLevel,
}

impl OperatingKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatingKind::AverageSpeed => "speed",
            OperatingKind::EnergyLevel => "energy",
        }
    }
}

impl fmt::Display for OperatingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatingKind {
    type Err = TranscriptionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "speed" | "average-speed" => Ok(OperatingKind::AverageSpeed),
            "energy" | "energy-level" => Ok(OperatingKind::EnergyLevel),
            _ => Err(TranscriptionError::InvalidLayout(format!(
                "unknown operating point kind {s:?}"
            ))),
        }
    }
}

/// Scalar condition selecting one gait out of a family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingPoint {
    pub kind: OperatingKind,
    pub value: f64,
}

impl OperatingPoint {
    pub fn new(kind: OperatingKind, value: f64) -> Result<Self, TranscriptionError> {
        if value.is_finite() {
            Ok(OperatingPoint { kind, value })
        } else {
            Err(TranscriptionError::InvalidOperatingPoint(value))
        }
    }

    pub fn speed(value: f64) -> Self {
        OperatingPoint {
            kind: OperatingKind::AverageSpeed,
            value,
        }
    }

    pub fn energy(value: f64) -> Self {
        OperatingPoint {
            kind: OperatingKind::EnergyLevel,
            value,
        }
    }
}

/// Residual values split into named groups.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub blocks: Vec<(BlockGroup, Vec<f64>)>,
}

impl ResidualReport {
    pub fn block(&self, group: BlockGroup) -> &[f64] {
        self.blocks
            .iter()
            .find(|(g, _)| *g == group)
            .map_or(&[], |(_, v)| v.as_slice())
    }

    /// `(group, ‖·‖_∞)` for every group.
    pub fn norms(&self) -> Vec<(BlockGroup, f64)> {
        self.blocks
            .iter()
            .map(|(g, v)| (*g, v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))))
            .collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, |a, (_, n)| a.max(n))
    }

    pub fn values(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, v) in &self.blocks {
            let inf = v.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
            let two = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            writeln!(f, "{:<16} rows={:<5} inf={:.3e} l2={:.3e}", g.name(), v.len(), inf, two)?;
        }
        Ok(())
    }
}

/// `h` together with `∂h/∂a` and `∂h/∂ε`.
#[derive(Clone, Debug)]
pub struct ResidualJacobian {
    pub values: Vec<f64>,
    /// `n_h × n_a`.
    pub jac: DenseMatrix,
    /// `∂h/∂ε`.
    pub d_eps: Vec<f64>,
}

/// First and weighted second derivatives of `h` over `(a, ε)`.
#[derive(Clone, Debug)]
pub struct ConstraintCurvature {
    pub values: Vec<f64>,
    /// `n_h × (n_a + 1)`, last column `∂h/∂ε`.
    pub jac: DenseMatrix,
    /// `Σ λᵢ ∇²hᵢ` over `(a, ε)`, `(n_a + 1) × (n_a + 1)`.
    pub weighted: DenseMatrix,
}

/// The gait residual system of one model, layout and operating point.
#[derive(Clone, Debug)]
pub struct Transcription {
    pub model: ModelSpec,
    pub layout: DecisionLayout,
    pub op: OperatingPoint,
    pub kind: InjectionKind,
    blocks: Vec<BlockSpec>,
}

impl Transcription {
    pub fn new(
        model: &ModelSpec,
        layout: DecisionLayout,
        op: OperatingPoint,
        kind: InjectionKind,
    ) -> Result<Self, TranscriptionError> {
        if !op.value.is_finite() {
            return Err(TranscriptionError::InvalidOperatingPoint(op.value));
        }
        if layout.n_q != model.n_q || layout.n_u != model.n_u || layout.n_free != model.free_params.len() {
            return Err(TranscriptionError::InvalidLayout(
                "layout built for another model".into(),
            ));
        }
        let blocks = blocks::build_blocks(model, &layout, &op)?;
        let t = Transcription {
            model: model.clone(),
            layout,
            op,
            kind,
            blocks,
        };
        debug_assert_eq!(t.n_h(), t.layout.n_residuals());
        Ok(t)
    }

    pub fn n_a(&self) -> usize {
        self.layout.len()
    }

    pub fn n_h(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.first_row + b.rows)
    }

    fn ctx(&self) -> BlockContext<'_> {
        BlockContext {
            model: &self.model,
            layout: &self.layout,
            op: &self.op,
            kind: self.kind,
        }
    }

    fn check(&self, a: &[f64], eps: f64) -> Result<(), TranscriptionError> {
        self.layout.check_len(a.len())?;
        for k in 0..self.layout.n_phases() {
            let value = a[self.layout.duration_index(k)];
            if !(value > 0.0) {
                return Err(TranscriptionError::NonPositiveDuration { index: k, value });
            }
        }
        if !eps.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite.into());
        }
        Ok(())
    }

    fn local(&self, block: &BlockSpec, a: &[f64], eps: f64) -> Vec<f64> {
        let n_a = self.n_a();
        block.vars.iter().map(|&g| if g == n_a { eps } else { a[g] }).collect()
    }

    /// `h(a, ε)`.
    pub fn residuals(&self, a: &[f64], eps: f64) -> Result<Vec<f64>, TranscriptionError> {
        self.check(a, eps)?;
        let ctx = self.ctx();
        let mut out = Vec::with_capacity(self.n_h());
        for b in &self.blocks {
            let local = self.local(b, a, eps);
            let slots = ctx.slot_values(b, &local);
            out.extend(ctx.eval(b, &slots)?);
        }
        Ok(out)
    }

    /// `h` evaluated on any scalar type (used for whole-system AD checks).
    pub fn residuals_generic<S: Scalar>(&self, a: &[S], eps: S) -> Result<Vec<S>, TranscriptionError> {
        self.layout.check_len(a.len())?;
        let ctx = self.ctx();
        let n_a = self.n_a();
        let mut out = Vec::with_capacity(self.n_h());
        for b in &self.blocks {
            let local: Vec<S> = b.vars.iter().map(|&g| if g == n_a { eps } else { a[g] }).collect();
            let slots = ctx.slot_values(b, &local);
            out.extend(ctx.eval(b, &slots)?);
        }
        Ok(out)
    }

    /// Collocation defects only, phase-major and interval-minor.
    pub fn collocation_residuals(&self, a: &[f64], eps: f64) -> Result<Vec<f64>, TranscriptionError> {
        let report = self.report(a, eps)?;
        Ok(report.block(BlockGroup::Collocation).to_vec())
    }

    pub fn report(&self, a: &[f64], eps: f64) -> Result<ResidualReport, TranscriptionError> {
        let h = self.residuals(a, eps)?;
        let mut blocks: Vec<(BlockGroup, Vec<f64>)> = BlockGroup::ALL.iter().map(|&g| (g, Vec::new())).collect();
        for b in &self.blocks {
            let slot = blocks.iter_mut().find(|(g, _)| *g == b.group).expect("group");
            slot.1.extend_from_slice(&h[b.first_row..b.first_row + b.rows]);
        }
        Ok(ResidualReport { blocks })
    }

    /// `h`, `∂h/∂a` and `∂h/∂ε`.
    pub fn jacobian(&self, a: &[f64], eps: f64) -> Result<ResidualJacobian, TranscriptionError> {
        self.check(a, eps)?;
        let ctx = self.ctx();
        let n_a = self.n_a();
        let mut values = vec![0.0; self.n_h()];
        let mut jac = DenseMatrix::zeros(self.n_h(), n_a);
        let mut d_eps = vec![0.0; self.n_h()];
        for b in &self.blocks {
            let local = self.local(b, a, eps);
            let f = BlockFn { ctx: &ctx, block: b };
            let (v, j) = jacobian_and_values(&f, &local, local.len())?;
            for r in 0..b.rows {
                let row = b.first_row + r;
                values[row] = v[r];
                for (l, &g) in b.vars.iter().enumerate() {
                    if g == n_a {
                        d_eps[row] = j[(r, l)];
                    } else {
                        jac[(row, g)] += j[(r, l)];
                    }
                }
            }
        }
        Ok(ResidualJacobian { values, jac, d_eps })
    }

    /// Values, Jacobian over `(a, ε)` and the `λ`-weighted Hessian of `h`.
    pub fn curvature(&self, a: &[f64], lambda: &[f64], eps: f64) -> Result<ConstraintCurvature, TranscriptionError> {
        self.check(a, eps)?;
        if lambda.len() != self.n_h() {
            return Err(TranscriptionError::Length {
                expected: self.n_h(),
                got: lambda.len(),
            });
        }
        let ctx = self.ctx();
        let n = self.n_a() + 1;
        let mut values = vec![0.0; self.n_h()];
        let mut jac = DenseMatrix::zeros(self.n_h(), n);
        let mut weighted = DenseMatrix::zeros(n, n);
        for b in &self.blocks {
            let local = self.local(b, a, eps);
            let f = BlockFn { ctx: &ctx, block: b };
            let so = second_order(&f, &local, crate::numerics::MAX_DUAL2_WIDTH)?;
            for r in 0..b.rows {
                let row = b.first_row + r;
                values[row] = so.values[r];
                let w = lambda[row];
                for (l, &g) in b.vars.iter().enumerate() {
                    jac[(row, g)] += so.jacobian[(r, l)];
                    if w != 0.0 {
                        for (l2, &g2) in b.vars.iter().enumerate() {
                            weighted[(g, g2)] += w * so.hessians[r][(l, l2)];
                        }
                    }
                }
            }
        }
        Ok(ConstraintCurvature { values, jac, weighted })
    }

    /// `c(a) = ξᵀξ`.
    pub fn cost(&self, a: &[f64]) -> f64 {
        a[self.layout.xi_indices()].iter().map(|v| v * v).sum()
    }

    pub fn cost_gradient(&self, a: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; a.len()];
        for i in self.layout.xi_indices() {
            g[i] = 2.0 * a[i];
        }
        g
    }

    /// Copy of the model with free parameters taken from `a`.
    pub fn model_at(&self, a: &[f64]) -> ModelSpec {
        let mut model = self.model.clone();
        for (i, p) in model.free_params.iter_mut().enumerate() {
            p.value = a[self.layout.free_index(i)];
        }
        model
    }

    /// Injection parameter at `a` (the frozen value in actuated mode).
    pub fn gamma(&self, a: &[f64]) -> f64 {
        self.layout.gamma_index().map_or(self.layout.frozen_gamma, |i| a[i])
    }

    /// Energy flows over the collocated stride, integrated with Simpson's rule
    /// on each interval using the Hermite midpoint.
    pub fn grid_energy_audit(&self, a: &[f64], eps: f64) -> Result<EnergyAudit, TranscriptionError> {
        self.check(a, eps)?;
        let g = self.layout.unpack(a)?;
        let model = self.model_at(a);
        let gamma = self.gamma(a);
        let n = self.layout.n_intervals;
        let mut audit = EnergyAudit::default();
        for (k, &phase) in self.layout.sequence.iter().enumerate() {
            let h = g.durations[k] / n as f64;
            for j in 0..n {
                let u = &g.controls[k][j];
                let xa = &g.nodes[k][j];
                let xb = &g.nodes[k][j + 1];
                let field =
                    |x: &[f64]| crate::hybrid::homotopy_field_of(&model, phase, x, u, gamma, eps, self.kind, &g.free);
                let fa = field(xa)?;
                let fb = field(xb)?;
                let xm: Vec<f64> = (0..xa.len())
                    .map(|i| 0.5 * (xa[i] + xb[i]) + h / 8.0 * (fa[i] - fb[i]))
                    .collect();
                let p = [xa, &xm, xb].map(|x| power_terms(&model, x, u, gamma, eps, self.kind, &g.free));
                let simpson = |f: fn(&(f64, f64, f64)) -> f64| h / 6.0 * (f(&p[0]) + 4.0 * f(&p[1]) + f(&p[2]));
                audit.injected += simpson(|p| p.0);
                audit.dissipated += simpson(|p| p.1);
                audit.actuator_work += simpson(|p| p.2);
            }
            for x in &g.nodes[k] {
                let (q, qd) = x.split_at(model.n_q);
                for w in &model.contact(phase, q, qd).w {
                    audit.constraint_drift = audit.constraint_drift.max(crate::numerics::dot(w, qd).abs());
                }
            }
        }
        let m = self.layout.n_phases();
        for k in 0..m {
            let pre = &g.nodes[k][n];
            let to = self.layout.sequence[(k + 1) % m];
            let post = crate::hybrid::impact_map_of(&model, to, pre)?;
            audit.impact_loss += model.total_energy_of(pre, &g.free) - model.total_energy_of(&post, &g.free);
        }
        Ok(audit)
    }

    /// Per-phase piecewise-constant inputs, ready for simulation.
    pub fn piecewise_controls(&self, a: &[f64]) -> Result<Vec<PiecewiseControl>, TranscriptionError> {
        let g = self.layout.unpack(a)?;
        let n = self.layout.n_intervals as f64;
        Ok(g.durations
            .iter()
            .zip(g.controls)
            .map(|(t, values)| PiecewiseControl::new(t / n, values))
            .collect())
    }

    /// The collocated stride as a trajectory of grid nodes.
    pub fn to_trajectory(&self, a: &[f64]) -> Result<HybridTrajectory, TranscriptionError> {
        let g = self.layout.unpack(a)?;
        let model = self.model_at(a);
        let n = self.layout.n_intervals;
        let m = self.layout.n_phases();
        let mut traj = HybridTrajectory::default();
        let mut t0 = 0.0;
        for (k, &phase) in self.layout.sequence.iter().enumerate() {
            let h = g.durations[k] / n as f64;
            traj.segments.push(Segment {
                phase,
                times: (0..=n).map(|j| t0 + j as f64 * h).collect(),
                states: g.nodes[k].clone(),
                controls: (0..=n).map(|j| g.controls[k][j.min(n - 1)].clone()).collect(),
            });
            t0 += g.durations[k];
            let to = self.layout.sequence[(k + 1) % m];
            let pre = g.nodes[k][n].clone();
            let post = crate::hybrid::impact_map_of(&model, to, &pre)?;
            traj.events.push(EventRecord {
                time: t0,
                from: phase,
                to,
                pre,
                post,
            });
        }
        traj.duration = t0;
        Ok(traj)
    }
}

/// `h(a)` as a [`VectorFn`] at fixed `ε`.
pub struct GaitResidualFn<'a> {
    pub transcription: &'a Transcription,
    pub eps: f64,
}

impl VectorFn for GaitResidualFn<'_> {
    fn input_dim(&self) -> usize {
        self.transcription.n_a()
    }

    fn output_dim(&self) -> usize {
        self.transcription.n_h()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.transcription
            .residuals_generic(x, S::cst(self.eps))
            .unwrap_or_else(|_| vec![S::cst(f64::NAN); self.output_dim()])
    }
}

/// Collocation defects of a packed decision vector.
pub fn collocation_residuals(
    model: &ModelSpec,
    layout: &DecisionLayout,
    a: &[f64],
    eps: f64,
    kind: InjectionKind,
) -> Result<Vec<f64>, TranscriptionError> {
    Transcription::new(model, layout.clone(), OperatingPoint::speed(0.0), kind)?.collocation_residuals(a, eps)
}

/// All residual groups of a packed decision vector.
pub fn gait_residuals(
    model: &ModelSpec,
    layout: &DecisionLayout,
    a: &[f64],
    op: OperatingPoint,
    eps: f64,
    kind: InjectionKind,
) -> Result<ResidualReport, TranscriptionError> {
    Transcription::new(model, layout.clone(), op, kind)?.report(a, eps)
}

/// `∂h/∂a`.
pub fn residual_jacobian(
    model: &ModelSpec,
    layout: &DecisionLayout,
    a: &[f64],
    op: OperatingPoint,
    eps: f64,
    kind: InjectionKind,
) -> Result<DenseMatrix, TranscriptionError> {
    Ok(Transcription::new(model, layout.clone(), op, kind)?
        .jacobian(a, eps)?
        .jac)
}

/// `ξᵀξ` over the free controls of `a` (zero in quasi-passive mode).
pub fn cost(layout: &DecisionLayout, a: &[f64]) -> f64 {
    a[layout.xi_indices()].iter().map(|v| v * v).sum()
}
