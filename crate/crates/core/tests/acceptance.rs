//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). The process exits with status
//! 0 unless `GAITFORGE_ACCEPTANCE_STRICT=1` is set, in which case any failing
//! criterion makes it exit with status 1.

use gaitforge::continuation::{continue_to_actuated, init_from_quasi_passive, ContinuationConfig, CostKind, Homotopy};
use gaitforge::hybrid::{
    homotopy_field_of, impact_map, impact_map_of, stride_energy_audit, EnergyAudit, InjectionKind,
};
use gaitforge::models::{total_energy, ModelKind, ModelSpec};
use gaitforge::numerics::{fd_jacobian, hessian_stack, jacobian, Scalar, VectorFn};
use gaitforge::presets::GaitPreset;
use gaitforge::rootsearch::{build_guess_from_simulation, find_quasi_passive_gait, QuasiPassiveGait, RootSearchConfig};
use gaitforge::simulate::{simulate_stride, simulate_stride_sampled, SimConfig};
use gaitforge::transcription::{GaitResidualFn, Transcription};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

const KIND: InjectionKind = InjectionKind::MassProportional;

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: usize, title: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        id,
        title,
        pass,
        detail,
    }
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn solve_preset(kind: ModelKind, n: usize) -> Result<QuasiPassiveGait, String> {
    let preset = GaitPreset::for_model(kind);
    let model = preset.build_model();
    let config = RootSearchConfig {
        n_intervals: n,
        ..RootSearchConfig::default()
    };
    let (layout, guess) = build_guess_from_simulation(
        &model,
        &preset.sequence,
        std::slice::from_ref(&preset.guess),
        config.gamma_init,
        n,
        KIND,
        &config.sim,
    )
    .map_err(|e| e.to_string())?;
    find_quasi_passive_gait(&model, &layout, &guess, preset.operating_point, KIND, &config).map_err(|e| e.to_string())
}

fn within(value: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&value)
}

// ---------------------------------------------------------------------------
// Criteria 1-3: quasi-passive reproduction.

fn criterion_1(gait: &Result<QuasiPassiveGait, String>, seconds: f64) -> Outcome {
    let title = "prismatic monopod quasi-passive gait";
    let g = match gait {
        Ok(g) => g,
        Err(e) => return verdict(1, title, false, e.clone()),
    };
    let res = g.report.max_norm();
    let (z0, xd0) = (g.a[1], g.a[5]);
    let pass = res < 1e-8
        && within(g.gamma, 0.4266, 0.4666)
        && within(z0, 0.9613, 0.9813)
        && within(xd0, 0.3635, 0.4035)
        && seconds < 60.0;
    let detail = format!(
        "γ*={:.4} ∈ [0.4266,0.4666], z0={z0:.4} ∈ [0.9613,0.9813], ẋ0={xd0:.4} ∈ [0.3635,0.4035], ‖h‖∞={res:.1e} < 1e-8, {seconds:.1}s < 60s",
        g.gamma
    );
    verdict(1, title, pass, detail)
}

fn criterion_2() -> Outcome {
    let title = "segmented monopod quasi-passive gait";
    let start = Instant::now();
    let gait = solve_preset(ModelKind::SegmentedMonopod, 18);
    let seconds = start.elapsed().as_secs_f64();
    match gait {
        Ok(g) => {
            let alpha = g.a[g.transcription.layout.free_index(0)];
            let pass = within(g.gamma, 0.8056, 0.8656) && within(alpha, -0.1861, -0.1661) && seconds < 180.0;
            verdict(
                2,
                title,
                pass,
                format!(
                    "γ*={:.4} ∈ [0.8056,0.8656], α01={alpha:.4} ∈ [-0.1861,-0.1661], {seconds:.1}s < 180s",
                    g.gamma
                ),
            )
        }
        Err(e) => verdict(
            2,
            title,
            false,
            format!("no root found in {seconds:.1}s: {}", first_line(&e)),
        ),
    }
}

fn criterion_3(gait: &Result<QuasiPassiveGait, String>, seconds: f64) -> Outcome {
    let title = "sagittal quadruped bounding gait";
    match gait {
        Ok(g) => {
            let pass = within(g.gamma, 0.6610, 0.7210) && seconds < 600.0;
            verdict(
                3,
                title,
                pass,
                format!(
                    "γ*={:.4} ∈ [0.6610,0.7210], ‖h‖∞={:.1e}, {seconds:.1}s < 600s",
                    g.gamma,
                    g.report.max_norm()
                ),
            )
        }
        Err(e) => verdict(3, title, false, first_line(e)),
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or_default().to_string()
}

// ---------------------------------------------------------------------------
// Criterion 4: continuation.

struct ActuatedRun {
    homotopy: Homotopy,
    a: Vec<f64>,
    zeta_samples: Vec<(Vec<f64>, f64)>,
    outcome: Outcome,
}

fn criterion_4(gait: &QuasiPassiveGait) -> Result<ActuatedRun, Outcome> {
    let title = "continuation to the actuated prismatic gait";
    let fail = |d: String| verdict(4, title, false, d);
    let start = Instant::now();
    let (homotopy, point) = init_from_quasi_passive(gait, CostKind::XiSquared).map_err(|e| fail(e.to_string()))?;
    let c0 = homotopy.cost_value(&point.a);
    let samples = vec![(point.psi()[..homotopy.n_zeta()].to_vec(), 0.0)];
    let (end, log) =
        continue_to_actuated(&homotopy, point, &ContinuationConfig::default()).map_err(|e| fail(e.to_string()))?;
    let seconds = start.elapsed().as_secs_f64();
    let c1 = homotopy.cost_value(&end.a);
    let mu = log.iter().map(|r| r.mu_min).fold(f64::INFINITY, f64::min);
    let pass = end.eps == 1.0 && end.residual < 1e-6 && c0 == 0.0 && c1 > 0.0 && mu > 0.0 && seconds < 600.0;
    let detail = format!(
        "ε_end={}, ‖r‖∞={:.1e} < 1e-6, c(0)={c0}, c(1)={c1:.4} > 0, min μ_min={mu:.4} > 0 over {} points, {seconds:.1}s < 600s",
        end.eps,
        end.residual,
        log.len()
    );
    let tangent_ok = log
        .iter()
        .all(|r| r.tangent_residual < 1e-9 && (r.tangent_norm - 1.0).abs() < 1e-12);
    let worst_rp = log.iter().map(|r| r.tangent_residual).fold(0.0, f64::max);
    let mut zeta_samples = samples;
    let mut end_zeta = end.a.clone();
    end_zeta.extend_from_slice(&end.lambda);
    zeta_samples.push((end_zeta, 1.0));
    Ok(ActuatedRun {
        a: end.a.clone(),
        homotopy,
        zeta_samples,
        outcome: Outcome {
            id: 4,
            title,
            pass,
            detail: format!("{detail}; tangent ok={tangent_ok} (max ‖Rp‖∞={worst_rp:.1e})"),
        },
    })
}

// ---------------------------------------------------------------------------
// Criterion 5: energy balance.

/// `stride_energy_audit` of the stride re-simulated from the grid's `x0`,
/// together with the Simpson audit of the grid itself.
fn audits(t: &Transcription, a: &[f64], eps: f64) -> Result<(EnergyAudit, EnergyAudit), String> {
    let g = t.layout.unpack(a).map_err(|e| e.to_string())?;
    let model = t.model_at(a);
    let controls = t.piecewise_controls(a).map_err(|e| e.to_string())?;
    let gamma = t.gamma(a);
    let traj = simulate_stride(
        &model,
        &t.layout.sequence,
        &g.x0,
        &controls,
        gamma,
        eps,
        t.kind,
        &SimConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let simulated = stride_energy_audit(&model, &traj, gamma, eps, t.kind).map_err(|e| e.to_string())?;
    let grid = t.grid_energy_audit(a, eps).map_err(|e| e.to_string())?;
    Ok((simulated, grid))
}

fn criterion_5(quasi_passive: &[(&str, &QuasiPassiveGait)], actuated: Option<&ActuatedRun>) -> Outcome {
    let title = "energy balance of converged gaits";
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g) in quasi_passive {
        match audits(&g.transcription, &g.a, 0.0) {
            Ok((sim, grid)) => {
                let imbalance = sim.injected - sim.dissipated - sim.impact_loss;
                let grid_imbalance = grid.injected - grid.dissipated - grid.impact_loss;
                pass &= imbalance.abs() < 1e-3;
                parts.push(format!(
                    "{name}: |inj−diss−imp|={:.1e} (grid {:.1e})",
                    imbalance.abs(),
                    grid_imbalance.abs()
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    match actuated.map(|run| audits(&run.homotopy.transcription, &run.a, 1.0)) {
        Some(Ok((sim, grid))) => {
            let balance = sim.actuator_work - sim.dissipated - sim.impact_loss;
            let grid_balance = grid.actuator_work - grid.dissipated - grid.impact_loss;
            pass &= sim.injected == 0.0 && balance.abs() < 1e-3;
            parts.push(format!(
                "actuated: E_inj={}, |act−diss−imp|={:.1e} (grid {:.1e})",
                sim.injected,
                balance.abs(),
                grid_balance.abs()
            ));
        }
        Some(Err(e)) => {
            pass = false;
            parts.push(format!("actuated: {e}"));
        }
        None => {
            pass = false;
            parts.push("actuated gait unavailable".into());
        }
    }
    verdict(5, title, pass, format!("{} (limit 1e-3)", parts.join("; ")))
}

// ---------------------------------------------------------------------------
// Criterion 6: simulation oracle.

/// Largest node mismatch and largest mismatch-to-bound ratio.
fn oracle_mismatch(t: &Transcription, a: &[f64], eps: f64) -> Result<(f64, f64), String> {
    let g = t.layout.unpack(a).map_err(|e| e.to_string())?;
    let model = t.model_at(a);
    let controls = t.piecewise_controls(a).map_err(|e| e.to_string())?;
    let n = t.layout.n_intervals;
    let samples: Vec<Vec<f64>> = g
        .durations
        .iter()
        .map(|&d| (1..n).map(|j| d * j as f64 / n as f64).collect())
        .collect();
    let traj = simulate_stride_sampled(
        &model,
        &t.layout.sequence,
        &g.x0,
        &controls,
        t.gamma(a),
        eps,
        t.kind,
        &SimConfig::default(),
        &samples,
    )
    .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut ratio = 0.0f64;
    for (k, seg) in traj.segments.iter().enumerate() {
        let bound = 10.0 * (g.durations[k] / n as f64).powi(4);
        let t0 = seg.times[0];
        for (j, &s) in samples[k].iter().enumerate() {
            let Some(i) = seg.times.iter().position(|&tt| (tt - t0 - s).abs() < 1e-9) else {
                return Err(format!("phase {k} ended before node {}", j + 1));
            };
            let err = inf(&diff(&seg.states[i], &g.nodes[k][j + 1]));
            worst = worst.max(err);
            ratio = ratio.max(err / bound);
        }
        let err = inf(&diff(&traj.events[k].pre, &g.nodes[k][n]));
        worst = worst.max(err);
        ratio = ratio.max(err / bound);
    }
    Ok((worst, ratio))
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn criterion_6(
    gaits: &[(&str, &QuasiPassiveGait)],
    refined: &[(&str, Result<QuasiPassiveGait, String>)],
    actuated: Option<&ActuatedRun>,
) -> Outcome {
    let title = "simulation matches the collocation grid";
    let mut pass = true;
    let mut parts = Vec::new();
    let mut coarse_err = Vec::new();
    for (name, g) in gaits {
        match oracle_mismatch(&g.transcription, &g.a, 0.0) {
            Ok((err, ratio)) => {
                pass &= ratio <= 1.0;
                coarse_err.push(err);
                parts.push(format!("{name}: max err {err:.1e} = {ratio:.2}×bound"));
            }
            Err(e) => {
                pass = false;
                coarse_err.push(f64::NAN);
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    if let Some(run) = actuated {
        match oracle_mismatch(&run.homotopy.transcription, &run.a, 1.0) {
            Ok((err, ratio)) => {
                pass &= ratio <= 1.0;
                parts.push(format!("actuated: max err {err:.1e} = {ratio:.2}×bound"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("actuated: {e}"));
            }
        }
    } else {
        pass = false;
    }
    for ((name, g), coarse) in refined.iter().zip(&coarse_err) {
        match g
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|g| oracle_mismatch(&g.transcription, &g.a, 0.0))
        {
            Ok((err, _)) => {
                let shrink = coarse / err;
                pass &= within(shrink, 8.0, 32.0);
                parts.push(format!("{name}: N→2N shrink {shrink:.1}× ∈ [8,32]"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} at 2N: {e}"));
            }
        }
    }
    verdict(
        6,
        title,
        pass,
        format!("{} (bound 10·(T/N)⁴ per node)", parts.join("; ")),
    )
}

// ---------------------------------------------------------------------------
// Criterion 7: derivatives.

/// `(x, u, γ, ε) ↦ f(x, u) + (1 − ε) γ f_E(x)` for one phase.
struct FieldFn<'a> {
    model: &'a ModelSpec,
    phase: usize,
}

impl VectorFn for FieldFn<'_> {
    fn input_dim(&self) -> usize {
        self.model.n_x() + self.model.n_u + 2
    }
    fn output_dim(&self) -> usize {
        self.model.n_x()
    }
    fn eval<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        let (n_x, n_u) = (self.model.n_x(), self.model.n_u);
        let free: Vec<S> = self.model.free_param_values().iter().map(|&p| S::cst(p)).collect();
        homotopy_field_of(
            self.model,
            self.phase,
            &v[..n_x],
            &v[n_x..n_x + n_u],
            v[n_x + n_u],
            v[n_x + n_u + 1],
            KIND,
            &free,
        )
        .unwrap_or_else(|_| vec![S::cst(f64::NAN); n_x])
    }
}

struct ImpactFn<'a> {
    model: &'a ModelSpec,
    to: usize,
}

impl VectorFn for ImpactFn<'_> {
    fn input_dim(&self) -> usize {
        self.model.n_x()
    }
    fn output_dim(&self) -> usize {
        self.model.n_x()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        impact_map_of(self.model, self.to, x).unwrap_or_else(|_| vec![S::cst(f64::NAN); self.model.n_x()])
    }
}

fn rel_close(ad: f64, fd: f64) -> bool {
    (ad - fd).abs() <= 1e-4 * fd.abs().max(1.0)
}

/// Jacobian vs central differences and Hessians vs differenced Jacobians.
fn check_function<F: VectorFn>(f: &F, x: &[f64], with_hessian: bool) -> Result<(), String> {
    let ad = jacobian(f, x).map_err(|e| e.to_string())?;
    let fd = fd_jacobian(f, x, 1e-6);
    for (i, (a, b)) in ad.iter().zip(fd.iter()).enumerate() {
        if !rel_close(*a, *b) {
            return Err(format!("jacobian entry {i}: {a} vs {b}"));
        }
    }
    if with_hessian {
        let h = hessian_stack(f, x).map_err(|e| e.to_string())?;
        let step = 1e-5;
        for j in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += step;
            xm[j] -= step;
            let jp = jacobian(f, &xp).map_err(|e| e.to_string())?;
            let jm = jacobian(f, &xm).map_err(|e| e.to_string())?;
            for (out, hess) in h.iter().enumerate() {
                for i in 0..x.len() {
                    let fd = (jp[(out, i)] - jm[(out, i)]) / (2.0 * step);
                    if !rel_close(hess[(i, j)], fd) {
                        return Err(format!("hessian [{out}][{i},{j}]: {} vs {fd}", hess[(i, j)]));
                    }
                }
            }
        }
    }
    Ok(())
}

fn random_state(rng: &mut StdRng, kind: ModelKind) -> Vec<f64> {
    let reference = GaitPreset::for_model(kind).reference.expect("reference state");
    let n = reference.len() / 2;
    let mut x: Vec<f64> = reference[..n].iter().map(|q| q + rng.random_range(-0.1..0.1)).collect();
    x.extend((0..n).map(|_| rng.random_range(-1.0..1.0)));
    x
}

fn criterion_7(rng: &mut StdRng, gait: Option<&QuasiPassiveGait>, actuated: Option<&ActuatedRun>) -> Outcome {
    let title = "derivatives agree with finite differences";
    const POINTS: usize = 20;
    let mut parts = Vec::new();
    let mut pass = true;
    let mut record = |name: String, result: Result<(), String>| {
        if let Err(e) = &result {
            pass = false;
            parts.push(format!("{name}: {e}"));
        }
    };
    let mut checked = 0;
    for kind in ModelKind::ALL {
        let model = GaitPreset::for_model(kind).build_model();
        for phase in 0..model.phases.len() {
            let f = FieldFn { model: &model, phase };
            for _ in 0..POINTS {
                let mut v = random_state(rng, kind);
                v.extend((0..model.n_u).map(|_| rng.random_range(-0.5..0.5)));
                v.push(rng.random_range(0.0..1.0));
                v.push(rng.random_range(0.0..1.0));
                record(
                    format!("{} field phase {phase}", model.name),
                    check_function(&f, &v, true),
                );
                checked += 1;
            }
            if !model.phases[phase].contacts.is_empty() {
                let f = ImpactFn {
                    model: &model,
                    to: phase,
                };
                for _ in 0..POINTS {
                    let x = random_state(rng, kind);
                    record(
                        format!("{} impact into {phase}", model.name),
                        check_function(&f, &x, true),
                    );
                    checked += 1;
                }
            }
        }
    }
    match gait {
        Some(g) => {
            let t = &g.transcription;
            let f = GaitResidualFn {
                transcription: t,
                eps: 0.0,
            };
            for _ in 0..POINTS {
                let a: Vec<f64> = g.a.iter().map(|v| v + rng.random_range(-1e-3..1e-3)).collect();
                record("gait residuals".into(), check_function(&f, &a, false));
                record("gait curvature".into(), check_curvature(rng, t, &a));
                checked += 2;
            }
        }
        None => record("gait residuals".into(), Err("no converged gait".into())),
    }
    match actuated {
        Some(run) => {
            for i in 0..POINTS {
                let (zeta, eps) = &run.zeta_samples[i % run.zeta_samples.len()];
                let z: Vec<f64> = zeta.iter().map(|v| v + rng.random_range(-1e-4..1e-4)).collect();
                let eps = (eps + rng.random_range(-0.05..0.05)).clamp(0.0, 1.0);
                record("homotopy map".into(), check_homotopy(rng, &run.homotopy, &z, eps));
                checked += 1;
            }
        }
        None => record("homotopy map".into(), Err("no continuation run".into())),
    }
    if let Some(run) = actuated {
        if !run.outcome.detail.contains("tangent ok=true") {
            pass = false;
            parts.push("tangent conditions violated on the path".into());
        }
    }
    let detail = if parts.is_empty() {
        format!("{checked} point checks (fields, impacts, gait residuals, curvature, homotopy map, path tangents) within 1e-4")
    } else {
        parts.truncate(4);
        parts.join("; ")
    };
    verdict(7, title, pass, detail)
}

/// `Σ λᵢ ∇²hᵢ` against differences of `(∂h/∂a)ᵀ λ` on random columns.
fn check_curvature(rng: &mut StdRng, t: &Transcription, a: &[f64]) -> Result<(), String> {
    let lambda: Vec<f64> = (0..t.n_h()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let curv = t.curvature(a, &lambda, 0.0).map_err(|e| e.to_string())?;
    let jt_lambda = |a: &[f64]| -> Result<Vec<f64>, String> {
        let j = t.jacobian(a, 0.0).map_err(|e| e.to_string())?.jac;
        Ok(j.tr_mul(&nalgebra::DVector::from_column_slice(&lambda))
            .iter()
            .copied()
            .collect())
    };
    let step = 1e-6;
    for _ in 0..8 {
        let col = rng.random_range(0..t.n_a());
        let mut plus = a.to_vec();
        let mut minus = a.to_vec();
        plus[col] += step;
        minus[col] -= step;
        let (gp, gm) = (jt_lambda(&plus)?, jt_lambda(&minus)?);
        for row in 0..t.n_a() {
            let fd = (gp[row] - gm[row]) / (2.0 * step);
            if !rel_close(curv.weighted[(row, col)], fd) {
                return Err(format!(
                    "curvature [{row},{col}]: {} vs {fd}",
                    curv.weighted[(row, col)]
                ));
            }
        }
    }
    Ok(())
}

/// `∂r/∂(ζ, ε)` against central differences of `r` on random columns.
fn check_homotopy(rng: &mut StdRng, h: &Homotopy, zeta: &[f64], eps: f64) -> Result<(), String> {
    let eval = h.evaluate(zeta, eps).map_err(|e| e.to_string())?;
    let n_z = h.n_zeta();
    let step = 1e-6;
    let mut columns: Vec<usize> = (0..6).map(|_| rng.random_range(0..n_z)).collect();
    columns.push(n_z);
    for col in columns {
        let mut psi = zeta.to_vec();
        psi.push(eps);
        let mut plus = psi.clone();
        let mut minus = psi.clone();
        plus[col] += step;
        minus[col] -= step;
        let rp = h.map(&plus[..n_z], plus[n_z]).map_err(|e| e.to_string())?;
        let rm = h.map(&minus[..n_z], minus[n_z]).map_err(|e| e.to_string())?;
        for row in 0..n_z {
            let fd = (rp[row] - rm[row]) / (2.0 * step);
            if !rel_close(eval.jac[(row, col)], fd) {
                return Err(format!("R[{row},{col}]: {} vs {fd}", eval.jac[(row, col)]));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Criterion 8: impact map.

fn criterion_8(rng: &mut StdRng) -> Outcome {
    let title = "impact-map properties on random states";
    let mut worst_w = 0.0f64;
    let mut worst_idem = 0.0f64;
    let mut failures = Vec::new();
    let mut count = 0;
    for kind in ModelKind::ALL {
        let model = GaitPreset::for_model(kind).build_model();
        let n = model.n_q;
        for _ in 0..100 {
            let x = random_state(rng, kind);
            for to in (0..model.phases.len()).filter(|&p| !model.phases[p].contacts.is_empty()) {
                count += 1;
                let post = match impact_map(&model, 0, to, &x) {
                    Ok(p) => p,
                    Err(e) => {
                        failures.push(format!("{}: {e}", model.name));
                        continue;
                    }
                };
                if (0..n).any(|i| post[i].to_bits() != x[i].to_bits()) {
                    failures.push(format!("{}: q changed", model.name));
                }
                for w in &model.contact(to, &post[..n], &post[n..]).w {
                    let scale = 1.0 + inf(w);
                    let v = w.iter().zip(&post[n..]).map(|(a, b)| a * b).sum::<f64>().abs() / scale;
                    worst_w = worst_w.max(v);
                }
                let (e0, e1) = (total_energy(&model, &x), total_energy(&model, &post));
                if e1 > e0 + 1e-12 * e0.abs().max(1.0) {
                    failures.push(format!("{}: energy rose by {:.1e}", model.name, e1 - e0));
                }
                if let Ok(again) = impact_map(&model, to, to, &post) {
                    let d = again
                        .iter()
                        .zip(&post)
                        .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
                        .fold(0.0, f64::max);
                    worst_idem = worst_idem.max(d);
                }
            }
        }
    }
    let pass = failures.is_empty() && worst_w < 1e-10 && worst_idem < 1e-12;
    let mut detail = format!(
        "{count} maps over 100 states per model: q bitwise, max |Wᵀq̇⁺|={worst_w:.1e} < 1e-10, E non-increasing, idempotence {worst_idem:.1e} < 1e-12"
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures[0]));
    }
    verdict(8, title, pass, detail)
}

// ---------------------------------------------------------------------------

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; only `--list`
    // needs an answer.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut outcomes = Vec::new();
    let clock = Instant::now();

    let start = Instant::now();
    let prismatic = solve_preset(ModelKind::PrismaticMonopod, 10);
    outcomes.push(criterion_1(&prismatic, start.elapsed().as_secs_f64()));
    outcomes.push(criterion_2());
    let start = Instant::now();
    let quadruped = solve_preset(ModelKind::SagittalQuadruped, 10);
    outcomes.push(criterion_3(&quadruped, start.elapsed().as_secs_f64()));

    let actuated = match &prismatic {
        Ok(g) => match criterion_4(g) {
            Ok(run) => Some(run),
            Err(outcome) => {
                outcomes.push(outcome);
                None
            }
        },
        Err(e) => {
            outcomes.push(verdict(
                4,
                "continuation to the actuated prismatic gait",
                false,
                e.clone(),
            ));
            None
        }
    };
    if let Some(run) = &actuated {
        outcomes.push(Outcome {
            id: run.outcome.id,
            title: run.outcome.title,
            pass: run.outcome.pass,
            detail: run.outcome.detail.clone(),
        });
    }

    let mut converged: Vec<(&str, &QuasiPassiveGait)> = Vec::new();
    if let Ok(g) = &prismatic {
        converged.push(("prismatic", g));
    }
    if let Ok(g) = &quadruped {
        converged.push(("quadruped", g));
    }
    outcomes.push(criterion_5(&converged, actuated.as_ref()));

    let refined: Vec<(&str, Result<QuasiPassiveGait, String>)> = converged
        .iter()
        .map(|(name, _)| {
            let kind = if *name == "prismatic" {
                ModelKind::PrismaticMonopod
            } else {
                ModelKind::SagittalQuadruped
            };
            (*name, solve_preset(kind, 20))
        })
        .collect();
    outcomes.push(criterion_6(&converged, &refined, actuated.as_ref()));
    outcomes.push(criterion_7(&mut rng, prismatic.as_ref().ok(), actuated.as_ref()));
    outcomes.push(criterion_8(&mut rng));

    outcomes.sort_by_key(|o| o.id);
    for o in &outcomes {
        println!(
            "{} [{}] {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.0}s",
        outcomes.len() - failed,
        clock.elapsed().as_secs_f64()
    );
    let strict = std::env::var("GAITFORGE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
