use crate::artifact::GaitArtifact;
use crate::config::RunConfig;
use crate::csv::{trajectory_table, Table};
use crate::error::CliError;
use gaitforge::continuation::{continue_to_actuated, init_from_quasi_passive, Homotopy, PathRecord};
use gaitforge::hybrid::stride_energy_audit;
use gaitforge::rootsearch::{build_guess_from_simulation, find_quasi_passive_gait, QuasiPassiveGait};
use gaitforge::simulate::{simulate_stride, SimConfig};
use gaitforge::transcription::{BlockGroup, LayoutMode};
use log::info;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Residual blocks above this are flagged by `check`.
pub const RESIDUAL_LIMIT: f64 = 1e-6;
/// Energy imbalance above this is flagged by `check`.
pub const ENERGY_LIMIT: f64 = 1e-3;

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn sim_config(cfg: &RunConfig) -> SimConfig {
    cfg.root_search.sim.clone()
}

pub fn simulate(
    cfg: &RunConfig,
    x0: Option<Vec<f64>>,
    gamma: Option<f64>,
    eps: Option<f64>,
) -> Result<PathBuf, CliError> {
    let x0 = x0
        .or_else(|| cfg.simulate.x0.clone())
        .unwrap_or_else(|| cfg.candidates[0].clone());
    if x0.len() != cfg.model.n_x() {
        return Err(CliError::Config(format!(
            "x0 has {} entries, {} expects {}",
            x0.len(),
            cfg.kind,
            cfg.model.n_x()
        )));
    }
    let gamma = gamma.or(cfg.simulate.gamma).unwrap_or(cfg.root_search.gamma_init);
    let eps = eps.or(cfg.simulate.eps).unwrap_or(0.0);
    let traj = simulate_stride(
        &cfg.model,
        &cfg.sequence,
        &x0,
        &[],
        gamma,
        eps,
        cfg.injection,
        &sim_config(cfg),
    )
    .map_err(CliError::numerical)?;
    ensure_dir(&cfg.out)?;
    let path = cfg.out.join("trajectory.csv");
    trajectory_table(&traj, &cfg.model.state_names, &cfg.model.control_names).write(&path)?;
    info!(
        "stride of {:.6} time units written to {}",
        traj.duration,
        path.display()
    );
    Ok(path)
}

fn gait_summary(names: &[String], gamma: f64, x0: &[f64], durations: &[f64], free: &[f64]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "gamma = {gamma:.10}");
    for (n, v) in names.iter().zip(x0) {
        let _ = writeln!(s, "x0.{n} = {v:.10}");
    }
    for (k, t) in durations.iter().enumerate() {
        let _ = writeln!(s, "T[{k}] = {t:.10}");
    }
    for (k, v) in free.iter().enumerate() {
        let _ = writeln!(s, "free[{k}] = {v:.10}");
    }
    s
}

pub fn find_gait(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    ensure_dir(&cfg.out)?;
    let report_path = cfg.out.join("report.txt");
    let result = build_guess_from_simulation(
        &cfg.model,
        &cfg.sequence,
        &cfg.candidates,
        cfg.root_search.gamma_init,
        cfg.n_intervals,
        cfg.injection,
        &cfg.root_search.sim,
    )
    .and_then(|(layout, guess)| {
        find_quasi_passive_gait(
            &cfg.model,
            &layout,
            &guess,
            cfg.operating_point,
            cfg.injection,
            &cfg.root_search,
        )
    });
    let gait = match result {
        Ok(g) => g,
        Err(e) => {
            write_text(&report_path, &format!("root search failed\n{e}\n"))?;
            return Err(CliError::numerical(e));
        }
    };
    let t = &gait.transcription;
    let parts = t.layout.unpack(&gait.a).map_err(CliError::numerical)?;
    let mut report = gait_summary(
        &cfg.model.state_names,
        gait.gamma,
        &parts.x0,
        &parts.durations,
        &parts.free,
    );
    let _ = writeln!(report, "iterations = {}", gait.log.len());
    let _ = write!(report, "{}", gait.report);
    write_text(&report_path, &report)?;
    print!("{report}");
    let artifact = GaitArtifact::new(t, &cfg.params, cfg.cost, gait.gamma, 0.0, gait.a.clone(), None)?;
    let path = cfg.out.join("gait.json");
    artifact.save(&path)?;
    Ok(path)
}

fn path_table(records: &[PathRecord], phase_names: &[String]) -> Table {
    let mut header = vec!["eps".to_string()];
    header.extend(phase_names.iter().map(|n| format!("t_{n}")));
    header.extend(["c", "mu_min", "residual", "delta"].map(String::from));
    let mut table = Table::new(header);
    for r in records {
        let mut row = vec![r.eps];
        row.extend_from_slice(&r.durations);
        row.extend([r.cost, r.mu_min, r.residual, r.delta]);
        table.rows.push(row);
    }
    table
}

pub fn continue_gait(cfg: &RunConfig, gait_path: &Path) -> Result<PathBuf, CliError> {
    let artifact = GaitArtifact::load(gait_path)?;
    let restored = artifact.restore(gait_path)?;
    if restored.transcription.layout.mode != LayoutMode::QuasiPassive {
        return Err(CliError::Artifact {
            path: gait_path.to_path_buf(),
            detail: "continuation starts from a quasi-passive gait".into(),
        });
    }
    let t = restored.transcription;
    let report = t.report(&artifact.a, 0.0).map_err(CliError::numerical)?;
    let gait = QuasiPassiveGait {
        transcription: t,
        a: artifact.a.clone(),
        gamma: artifact.gamma,
        report,
        log: Vec::new(),
    };
    ensure_dir(&cfg.out)?;
    let report_path = cfg.out.join("continuation.txt");
    let (homotopy, start) = init_from_quasi_passive(&gait, restored.cost).map_err(CliError::numerical)?;
    let (end, records) = match continue_to_actuated(&homotopy, start, &cfg.continuation) {
        Ok(v) => v,
        Err(e) => {
            write_text(&report_path, &format!("continuation failed\n{e}\n"))?;
            return Err(CliError::numerical(e));
        }
    };
    let t = &homotopy.transcription;
    let phase_names: Vec<String> = t
        .layout
        .sequence
        .iter()
        .map(|&p| t.model.phases[p].name.clone())
        .collect();
    path_table(&records, &phase_names).write(&cfg.out.join("path.csv"))?;
    let traj = t.to_trajectory(&end.a).map_err(CliError::numerical)?;
    trajectory_table(&traj, &t.model.state_names, &t.model.control_names).write(&cfg.out.join("actuated_grid.csv"))?;
    let parts = t.layout.unpack(&end.a).map_err(CliError::numerical)?;
    let mut text = gait_summary(
        &t.model.state_names,
        artifact.gamma,
        &parts.x0,
        &parts.durations,
        &parts.free,
    );
    let min_mu = records.iter().map(|r| r.mu_min).fold(f64::INFINITY, f64::min);
    let _ = writeln!(text, "steps = {}", records.len());
    let _ = writeln!(text, "eps = {}", end.eps);
    let _ = writeln!(text, "cost = {:.10e}", homotopy.cost_value(&end.a));
    let _ = writeln!(text, "residual = {:.3e}", end.residual);
    let _ = writeln!(text, "min mu_min along path = {min_mu:.6e}");
    write_text(&report_path, &text)?;
    print!("{text}");
    let out = GaitArtifact::new(
        t,
        &artifact.params.into_iter().collect::<Vec<_>>(),
        restored.cost,
        artifact.gamma,
        end.eps,
        end.a.clone(),
        Some(end.lambda.clone()),
    )?;
    let path = cfg.out.join("actuated.json");
    out.save(&path)?;
    Ok(path)
}

/// Audit verdict of one artifact.
pub struct CheckOutcome {
    pub text: String,
    pub flags: Vec<String>,
}

pub fn check(gait_path: &Path) -> Result<CheckOutcome, CliError> {
    let artifact = GaitArtifact::load(gait_path)?;
    let restored = artifact.restore(gait_path)?;
    let t = &restored.transcription;
    let (a, eps) = (&artifact.a, artifact.eps);
    let report = t.report(a, eps).map_err(CliError::numerical)?;
    let grid = t.grid_energy_audit(a, eps).map_err(CliError::numerical)?;
    let mut flags = Vec::new();
    let model = t.model_at(a);
    let controls = t.piecewise_controls(a).map_err(CliError::numerical)?;
    let simulated = simulate_stride(
        &model,
        &t.layout.sequence,
        &artifact.x0,
        &controls,
        artifact.gamma,
        eps,
        restored.injection,
        &SimConfig::default(),
    )
    .map_err(|e| e.to_string())
    .and_then(|traj| {
        stride_energy_audit(&model, &traj, artifact.gamma, eps, restored.injection).map_err(|e| e.to_string())
    });
    for (group, norm) in report.norms() {
        if !(norm < RESIDUAL_LIMIT) {
            flags.push(format!(
                "{} residual {norm:.3e} exceeds {RESIDUAL_LIMIT:e}",
                group.name()
            ));
        }
    }
    let audit = match simulated {
        Ok(audit) => audit,
        Err(e) => {
            flags.push(format!("re-simulation failed: {e}"));
            grid.clone()
        }
    };
    if !(audit.imbalance().abs() < ENERGY_LIMIT) {
        flags.push(format!(
            "energy imbalance {:.3e} exceeds {ENERGY_LIMIT:e}",
            audit.imbalance()
        ));
    }
    let mut text = String::new();
    let _ = writeln!(text, "model = {}", artifact.model);
    let _ = writeln!(text, "mode = {}", artifact.mode);
    let _ = writeln!(text, "gamma = {}", artifact.gamma);
    let _ = writeln!(text, "eps = {eps}");
    let _ = write!(text, "{report}");
    let _ = writeln!(text, "energy injected = {:.6e}", audit.injected);
    let _ = writeln!(text, "energy dissipated = {:.6e}", audit.dissipated);
    let _ = writeln!(text, "impact loss = {:.6e}", audit.impact_loss);
    let _ = writeln!(text, "actuator work = {:.6e}", audit.actuator_work);
    let _ = writeln!(text, "imbalance = {:.6e}", audit.imbalance());
    let _ = writeln!(text, "grid imbalance = {:.6e}", grid.imbalance());
    let _ = writeln!(text, "grid constraint drift = {:.3e}", grid.constraint_drift);
    if t.layout.mode == LayoutMode::Actuated {
        if let Some(lambda) = &artifact.lambda {
            let homotopy = Homotopy::new(t.clone(), restored.cost).map_err(CliError::numerical)?;
            let mu = homotopy
                .second_order_check(a, lambda, eps)
                .map_err(CliError::numerical)?;
            let _ = writeln!(text, "mu_min = {mu:.6e}");
            if !(mu > 0.0) {
                flags.push(format!("reduced Hessian is not positive definite (mu_min = {mu:.3e})"));
            }
        }
    }
    if report.block(BlockGroup::Periodicity).is_empty() {
        flags.push("periodicity block missing".into());
    }
    for f in &flags {
        let _ = writeln!(text, "FLAG {f}");
    }
    let _ = writeln!(text, "verdict = {}", if flags.is_empty() { "ok" } else { "flagged" });
    Ok(CheckOutcome { text, flags })
}

pub fn export(cfg: &RunConfig, gait_path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let artifact = GaitArtifact::load(gait_path)?;
    let restored = artifact.restore(gait_path)?;
    let t = &restored.transcription;
    ensure_dir(&cfg.out)?;
    let grid = t.to_trajectory(&artifact.a).map_err(CliError::numerical)?;
    let grid_path = cfg.out.join("grid.csv");
    trajectory_table(&grid, &t.model.state_names, &t.model.control_names).write(&grid_path)?;
    let model = t.model_at(&artifact.a);
    let controls = t.piecewise_controls(&artifact.a).map_err(CliError::numerical)?;
    let sim = simulate_stride(
        &model,
        &t.layout.sequence,
        &artifact.x0,
        &controls,
        artifact.gamma,
        artifact.eps,
        restored.injection,
        &sim_config(cfg),
    )
    .map_err(CliError::numerical)?;
    let sim_path = cfg.out.join("simulated.csv");
    trajectory_table(&sim, &model.state_names, &model.control_names).write(&sim_path)?;
    let audit = stride_energy_audit(&model, &sim, artifact.gamma, artifact.eps, restored.injection)
        .map_err(CliError::numerical)?;
    info!("simulated stride energy imbalance {:.3e}", audit.imbalance());
    Ok(vec![grid_path, sim_path])
}
