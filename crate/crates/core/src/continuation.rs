//! Predictor–corrector continuation of first-order optimality points from the
//! quasi-passive gait (`ε = 0`) to the actuated gait (`ε = 1`).
//!
//! The traced curve is the zero set of
//! `r(ζ, ε) = [∇c(a) + (∂h/∂a)ᵀ λ; h(a, ε)]` with `ζ = (a, λ)`.

use crate::numerics::{
    min_eig_symmetric, null_space_basis, null_tangent, solve_least_squares, solve_square, DenseMatrix, HouseholderQr,
    NumericsError,
};
use crate::rootsearch::QuasiPassiveGait;
use crate::transcription::{LayoutMode, Transcription, TranscriptionError};
use log::{info, warn};
use nalgebra::DVector;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error(transparent)]
    Transcription(#[from] TranscriptionError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("fold or singular point at ε = {eps}: {detail}")]
    Fold { eps: f64, detail: String },
    #[error("corrector failed after {iterations} iterations (‖r‖∞ = {residual:e})")]
    CorrectorFailure { iterations: usize, residual: f64 },
    #[error("continuation stuck at ε = {eps} (step {delta:e} below minimum) after {accepted} accepted points")]
    Stuck { eps: f64, delta: f64, accepted: usize },
    #[error("start point is not converged (‖r‖∞ = {0:e})")]
    StartNotConverged(f64),
    #[error("start point must be at ε = 0 in actuated layout")]
    InvalidStart,
    #[error("step budget of {0} exhausted before ε = 1")]
    StepBudget(usize),
}

/// Objective of the optimality system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CostKind {
    /// `c = ξᵀξ`.
    #[default]
    XiSquared,
    /// `c = −ξᵀξ`, only useful as a sign probe for the second-order check.
    NegatedXiSquared,
}

impl CostKind {
    pub fn name(self) -> &'static str {
        match self {
            CostKind::XiSquared => "xi-squared",
            CostKind::NegatedXiSquared => "negated-xi-squared",
        }
    }

    fn sign(self) -> f64 {
        match self {
            CostKind::XiSquared => 1.0,
            CostKind::NegatedXiSquared => -1.0,
        }
    }
}

impl std::str::FromStr for CostKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xi-squared" => Ok(CostKind::XiSquared),
            "negated-xi-squared" => Ok(CostKind::NegatedXiSquared),
            _ => Err(format!("unknown cost {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationConfig {
    /// Nominal arclength step `δ` in `ψ = (a, λ, ε)` units. The multipliers
    /// dominate this norm, so `ε` advances much more slowly than `δ`.
    pub delta: f64,
    pub min_delta: f64,
    /// Growth factor after `grow_after` consecutive successes (capped at `delta`).
    pub grow: f64,
    pub grow_after: usize,
    /// Corrector tolerance on `‖r‖∞`.
    pub tol: f64,
    pub max_corrector_iters: usize,
    pub max_steps: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            delta: 2.0,
            min_delta: 1e-5,
            grow: 1.5,
            grow_after: 3,
            tol: 1e-6,
            max_corrector_iters: 25,
            max_steps: 20_000,
        }
    }
}

/// A point on the optimality curve.
#[derive(Clone, Debug, PartialEq)]
pub struct HomotopyPoint {
    pub a: Vec<f64>,
    pub lambda: Vec<f64>,
    pub eps: f64,
    /// Unit tangent over `(a, λ, ε)`.
    pub tangent: Vec<f64>,
    pub mu_min: f64,
    pub residual: f64,
    /// `‖R p‖∞` for the stored tangent.
    pub tangent_residual: f64,
}

impl HomotopyPoint {
    /// `ψ = (a, λ, ε)`.
    pub fn psi(&self) -> Vec<f64> {
        let mut v = self.a.clone();
        v.extend_from_slice(&self.lambda);
        v.push(self.eps);
        v
    }
}

/// One accepted continuation point.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub step: usize,
    pub eps: f64,
    pub delta: f64,
    pub residual: f64,
    pub cost: f64,
    pub mu_min: f64,
    pub tangent_residual: f64,
    pub tangent_norm: f64,
    pub durations: Vec<f64>,
    pub corrector_iterations: usize,
    /// `ε` decreased relative to the previous point.
    pub fold: bool,
}

/// Evaluated homotopy map with its Jacobian.
#[derive(Clone, Debug)]
pub struct MapEval {
    pub r: Vec<f64>,
    /// `∂r/∂(ζ, ε)`, `n_ζ × (n_ζ + 1)`.
    pub jac: DenseMatrix,
    /// Lagrangian Hessian over `a`.
    pub hessian: DenseMatrix,
    /// `∂h/∂a`.
    pub constraint_jac: DenseMatrix,
}

/// The optimality system of an actuated transcription.
#[derive(Clone, Debug)]
pub struct Homotopy {
    pub transcription: Transcription,
    pub cost: CostKind,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

impl Homotopy {
    pub fn new(transcription: Transcription, cost: CostKind) -> Result<Self, ContinuationError> {
        if transcription.layout.mode != LayoutMode::Actuated {
            return Err(ContinuationError::InvalidStart);
        }
        Ok(Homotopy { transcription, cost })
    }

    pub fn n_a(&self) -> usize {
        self.transcription.n_a()
    }

    pub fn n_h(&self) -> usize {
        self.transcription.n_h()
    }

    pub fn n_zeta(&self) -> usize {
        self.n_a() + self.n_h()
    }

    pub fn cost_value(&self, a: &[f64]) -> f64 {
        self.cost.sign() * self.transcription.cost(a)
    }

    fn split<'a>(&self, zeta: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        zeta.split_at(self.n_a())
    }

    /// `r(ζ, ε)` without derivatives.
    pub fn map(&self, zeta: &[f64], eps: f64) -> Result<Vec<f64>, ContinuationError> {
        let (a, lambda) = self.split(zeta);
        let jac = self.transcription.jacobian(a, eps)?;
        let grad = self.transcription.cost_gradient(a);
        let mut r: Vec<f64> = (0..self.n_a())
            .map(|i| self.cost.sign() * grad[i] + jac.jac.column(i).dot(&DVector::from_column_slice(lambda)))
            .collect();
        r.extend(jac.values);
        Ok(r)
    }

    /// `r` and `R = ∂r/∂(ζ, ε)`.
    pub fn evaluate(&self, zeta: &[f64], eps: f64) -> Result<MapEval, ContinuationError> {
        let (a, lambda) = self.split(zeta);
        let n_a = self.n_a();
        let n_h = self.n_h();
        let n_z = n_a + n_h;
        let curv = self.transcription.curvature(a, lambda, eps)?;
        let grad = self.transcription.cost_gradient(a);
        let sign = self.cost.sign();
        let jac_a = curv.jac.columns(0, n_a).into_owned();
        let lam = DVector::from_column_slice(lambda);
        let jt_lambda = jac_a.tr_mul(&lam);
        let mut r = Vec::with_capacity(n_z);
        for i in 0..n_a {
            r.push(sign * grad[i] + jt_lambda[i]);
        }
        r.extend_from_slice(&curv.values);
        let mut hessian = curv.weighted.view((0, 0), (n_a, n_a)).into_owned();
        for i in self.transcription.layout.xi_indices() {
            hessian[(i, i)] += 2.0 * sign;
        }
        let mut jac = DenseMatrix::zeros(n_z, n_z + 1);
        jac.view_mut((0, 0), (n_a, n_a)).copy_from(&hessian);
        jac.view_mut((0, n_a), (n_a, n_h)).copy_from(&jac_a.transpose());
        jac.view_mut((0, n_z), (n_a, 1))
            .copy_from(&curv.weighted.view((0, n_a), (n_a, 1)));
        jac.view_mut((n_a, 0), (n_h, n_a)).copy_from(&jac_a);
        jac.view_mut((n_a, n_z), (n_h, 1))
            .copy_from(&curv.jac.view((0, n_a), (n_h, 1)));
        Ok(MapEval {
            r,
            jac,
            hessian,
            constraint_jac: jac_a,
        })
    }

    /// Unit null vector of `R`, oriented along `prev` when given.
    pub fn tangent(&self, eval: &MapEval, prev: Option<&[f64]>, eps: f64) -> Result<Vec<f64>, ContinuationError> {
        let p = null_tangent(&eval.jac).map_err(|e| ContinuationError::Fold {
            eps,
            detail: e.to_string(),
        })?;
        let mut p: Vec<f64> = p.iter().copied().collect();
        if let Some(prev) = prev {
            let dot: f64 = p.iter().zip(prev).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                p.iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(p)
    }

    /// `min eig(Zᵀ H Z)` over the kernel of `∂h/∂a`.
    pub fn reduced_min_eig(&self, eval: &MapEval) -> Result<f64, ContinuationError> {
        reduced_min_eigenvalue(&eval.hessian, &eval.constraint_jac)
    }

    /// Smallest eigenvalue of the reduced Lagrangian Hessian at `(a, λ, ε)`.
    pub fn second_order_check(&self, a: &[f64], lambda: &[f64], eps: f64) -> Result<f64, ContinuationError> {
        let mut zeta = a.to_vec();
        zeta.extend_from_slice(lambda);
        let eval = self.evaluate(&zeta, eps)?;
        self.reduced_min_eig(&eval)
    }

    /// Newton on the bordered system `[R; pᵀ] Δ = −[r; 0]` from `psi`.
    /// Returns the corrected `ψ`, its evaluation and the iteration count.
    pub fn corrector(
        &self,
        psi: &[f64],
        p: &[f64],
        tol: f64,
        max_iters: usize,
    ) -> Result<(Vec<f64>, MapEval, usize), ContinuationError> {
        let n_z = self.n_zeta();
        let mut psi = psi.to_vec();
        let mut first = None;
        for it in 0..=max_iters {
            let eval = self.evaluate(&psi[..n_z], psi[n_z])?;
            let res = inf_norm(&eval.r);
            if !res.is_finite() {
                break;
            }
            if res < tol {
                return Ok((psi, eval, it));
            }
            let r0 = *first.get_or_insert(res);
            if it == max_iters || res > 1e4 * r0.max(tol) {
                return Err(ContinuationError::CorrectorFailure {
                    iterations: it,
                    residual: res,
                });
            }
            let mut bordered = DenseMatrix::zeros(n_z + 1, n_z + 1);
            bordered.view_mut((0, 0), (n_z, n_z + 1)).copy_from(&eval.jac);
            for (j, v) in p.iter().enumerate() {
                bordered[(n_z, j)] = *v;
            }
            let mut rhs = DVector::zeros(n_z + 1);
            for (i, v) in eval.r.iter().enumerate() {
                rhs[i] = -v;
            }
            let step = solve_square(&bordered, &rhs).map_err(|e| ContinuationError::Fold {
                eps: psi[n_z],
                detail: e.to_string(),
            })?;
            for (x, d) in psi.iter_mut().zip(step.iter()) {
                *x += d;
            }
        }
        Err(ContinuationError::CorrectorFailure {
            iterations: max_iters,
            residual: f64::NAN,
        })
    }

    /// Plain Newton in `ζ` at fixed `ε`.
    pub fn fixed_eps_newton(
        &self,
        zeta: &[f64],
        eps: f64,
        tol: f64,
        max_iters: usize,
    ) -> Result<(Vec<f64>, MapEval, usize), ContinuationError> {
        let n_z = self.n_zeta();
        let mut zeta = zeta.to_vec();
        let mut first = None;
        for it in 0..=max_iters {
            let eval = self.evaluate(&zeta, eps)?;
            let res = inf_norm(&eval.r);
            if res < tol {
                return Ok((zeta, eval, it));
            }
            let r0 = *first.get_or_insert(res);
            if !res.is_finite() || it == max_iters || res > 1e4 * r0.max(tol) {
                return Err(ContinuationError::CorrectorFailure {
                    iterations: it,
                    residual: res,
                });
            }
            let square = eval.jac.columns(0, n_z).into_owned();
            let rhs = DVector::from_iterator(n_z, eval.r.iter().map(|v| -v));
            let step = solve_square(&square, &rhs).map_err(|e| ContinuationError::Fold {
                eps,
                detail: e.to_string(),
            })?;
            for (x, d) in zeta.iter_mut().zip(step.iter()) {
                *x += d;
            }
        }
        unreachable!("loop returns on its last iteration")
    }

    /// Packages an evaluated `ψ` and its tangent as a curve point.
    pub fn point(&self, psi: &[f64], eval: &MapEval, tangent: Vec<f64>) -> Result<HomotopyPoint, ContinuationError> {
        let n_a = self.n_a();
        let n_z = self.n_zeta();
        let rp = &eval.jac * DVector::from_column_slice(&tangent);
        Ok(HomotopyPoint {
            tangent_residual: rp.amax(),
            a: psi[..n_a].to_vec(),
            lambda: psi[n_a..n_z].to_vec(),
            eps: psi[n_z],
            tangent,
            mu_min: self.reduced_min_eig(eval)?,
            residual: inf_norm(&eval.r),
        })
    }

    fn record(&self, step: usize, pt: &HomotopyPoint, delta: f64, iters: usize, fold: bool) -> PathRecord {
        let durations = (0..self.transcription.layout.n_phases())
            .map(|k| pt.a[self.transcription.layout.duration_index(k)])
            .collect();
        let rec = PathRecord {
            step,
            eps: pt.eps,
            delta,
            residual: pt.residual,
            cost: self.cost_value(&pt.a),
            mu_min: pt.mu_min,
            tangent_residual: pt.tangent_residual,
            tangent_norm: pt.tangent.iter().map(|v| v * v).sum::<f64>().sqrt(),
            durations,
            corrector_iterations: iters,
            fold,
        };
        info!(
            "continuation step={} eps={:.6} delta={:.3e} residual={:.3e} cost={:.6e} mu_min={:.4e} iters={}",
            rec.step, rec.eps, rec.delta, rec.residual, rec.cost, rec.mu_min, rec.corrector_iterations
        );
        rec
    }
}

/// Smallest eigenvalue of `Zᵀ H Z`, where the columns of `Z` span the kernel
/// of `jac`. Returns `+∞` when the kernel is trivial.
///
/// ```
/// use gaitforge::continuation::reduced_min_eigenvalue;
/// use gaitforge::numerics::DenseMatrix;
///
/// // c = ‖a‖², h = a₀ − 1: the Hessian is 2I and the kernel is span(e₁, e₂).
/// let hessian = DenseMatrix::identity(3, 3) * 2.0;
/// let jac = DenseMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
/// let mu = reduced_min_eigenvalue(&hessian, &jac).unwrap();
/// assert!((mu - 2.0).abs() < 1e-12);
/// ```
pub fn reduced_min_eigenvalue(hessian: &DenseMatrix, jac: &DenseMatrix) -> Result<f64, ContinuationError> {
    let z = null_space_basis(jac)?;
    if z.ncols() == 0 {
        info!("constraint Jacobian has a trivial kernel; second-order check is vacuous");
        return Ok(f64::INFINITY);
    }
    let reduced = z.transpose() * hessian * &z;
    Ok(min_eig_symmetric(&reduced)?)
}

/// Repacks a quasi-passive root into the actuated layout with `ξ = 0` and
/// `γ` frozen, and solves `(∂h/∂a)ᵀ λ = −∇c` for the multipliers.
pub fn init_from_quasi_passive(
    gait: &QuasiPassiveGait,
    cost: CostKind,
) -> Result<(Homotopy, HomotopyPoint), ContinuationError> {
    let qp = &gait.transcription;
    let layout = qp
        .layout
        .with_mode(LayoutMode::Actuated, &qp.model)?
        .with_frozen_gamma(gait.gamma);
    let mut parts = qp.layout.unpack(&gait.a)?;
    parts.gamma = None;
    let a = layout.pack(&parts)?;
    let t = Transcription::new(&qp.model, layout, qp.op, qp.kind)?;
    let homotopy = Homotopy::new(t, cost)?;
    let jac = homotopy.transcription.jacobian(&a, 0.0)?;
    let grad: Vec<f64> = homotopy
        .transcription
        .cost_gradient(&a)
        .iter()
        .map(|g| -cost.sign() * g)
        .collect();
    let lambda: Vec<f64> = solve_least_squares(&jac.jac.transpose(), &grad, 0)?
        .x
        .iter()
        .copied()
        .collect();
    let mut zeta = a.clone();
    zeta.extend_from_slice(&lambda);
    let eval = homotopy.evaluate(&zeta, 0.0)?;
    let mut psi = zeta;
    psi.push(0.0);
    let tangent = homotopy.tangent(&eval, None, 0.0)?;
    let point = homotopy.point(&psi, &eval, tangent)?;
    Ok((homotopy, point))
}

/// Follows the curve from `start` (at `ε = 0`) to `ε = 1`.
pub fn continue_to_actuated(
    homotopy: &Homotopy,
    start: HomotopyPoint,
    config: &ContinuationConfig,
) -> Result<(HomotopyPoint, Vec<PathRecord>), ContinuationError> {
    let n_z = homotopy.n_zeta();
    if start.eps != 0.0 {
        return Err(ContinuationError::InvalidStart);
    }
    if !(start.residual < config.tol) {
        return Err(ContinuationError::StartNotConverged(start.residual));
    }
    let p_eps = start.tangent[n_z];
    if p_eps == 0.0 {
        return Err(ContinuationError::Fold {
            eps: 0.0,
            detail: "initial tangent has no ε component".into(),
        });
    }
    // The algorithm's orientation is d_hom = sign(p_ε); the bordered
    // determinant convention is only logged.
    let d_hom = p_eps.signum();
    if d_hom < 0.0 {
        warn!("determinant-oriented tangent points toward decreasing ε; following increasing ε");
    }
    let mut current = start;
    current.tangent.iter_mut().for_each(|v| *v *= d_hom);
    let mut log = vec![homotopy.record(0, &current, 0.0, 0, false)];
    let mut delta = config.delta;
    let mut successes = 0;
    for step in 1..=config.max_steps {
        let psi = current.psi();
        let p = current.tangent.clone();
        let eps_pred = current.eps + delta * p[n_z];
        let result = if eps_pred >= 1.0 && p[n_z] > 0.0 {
            let s = (1.0 - current.eps) / p[n_z];
            let pred: Vec<f64> = psi.iter().zip(&p).map(|(x, d)| x + s * d).collect();
            homotopy
                .fixed_eps_newton(&pred[..n_z], 1.0, config.tol, config.max_corrector_iters)
                .map(|(zeta, eval, it)| {
                    let mut psi = zeta;
                    psi.push(1.0);
                    (psi, eval, it, s)
                })
        } else {
            let pred: Vec<f64> = psi.iter().zip(&p).map(|(x, d)| x + delta * d).collect();
            homotopy
                .corrector(&pred, &p, config.tol, config.max_corrector_iters)
                .map(|(psi, eval, it)| (psi, eval, it, delta))
        };
        match result {
            Ok((psi_new, eval, iters, used)) => {
                let tangent = homotopy.tangent(&eval, Some(&p), psi_new[n_z])?;
                let next = homotopy.point(&psi_new, &eval, tangent)?;
                let fold = next.eps < current.eps;
                if fold {
                    warn!("ε decreased from {} to {}", current.eps, next.eps);
                }
                log.push(homotopy.record(step, &next, used, iters, fold));
                current = next;
                if current.eps >= 1.0 {
                    return Ok((current, log));
                }
                successes += 1;
                if successes >= config.grow_after {
                    delta = (delta * config.grow).min(config.delta);
                    successes = 0;
                }
            }
            Err(e @ ContinuationError::Transcription(_))
            | Err(e @ ContinuationError::CorrectorFailure { .. })
            | Err(e @ ContinuationError::Fold { .. }) => {
                successes = 0;
                delta *= 0.5;
                info!("step rejected ({e}); delta -> {delta:.3e}");
                if delta < config.min_delta {
                    return Err(ContinuationError::Stuck {
                        eps: current.eps,
                        delta,
                        accepted: log.len(),
                    });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(ContinuationError::StepBudget(config.max_steps))
}

/// Determinant sign of the bordered matrix `[R; pᵀ]`, for diagnostics.
pub fn bordered_orientation(eval: &MapEval, p: &[f64]) -> f64 {
    let n = eval.jac.ncols();
    let mut b = DenseMatrix::zeros(n, n);
    b.view_mut((0, 0), (n - 1, n)).copy_from(&eval.jac);
    for (j, v) in p.iter().enumerate() {
        b[(n - 1, j)] = *v;
    }
    let qr = HouseholderQr::new(&b);
    let diag: f64 = (0..n).map(|i| qr.r()[(i, i)].signum()).product();
    qr.q_det_sign() * diag
}
