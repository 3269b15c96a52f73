//! Run configuration: TOML file, then command-line overrides, then preset
//! defaults for whatever is still unset.

use crate::error::CliError;
use gaitforge::continuation::{ContinuationConfig, CostKind};
use gaitforge::hybrid::InjectionKind;
use gaitforge::models::{ModelKind, ModelSpec};
use gaitforge::presets::GaitPreset;
use gaitforge::rootsearch::RootSearchConfig;
use gaitforge::transcription::{OperatingKind, OperatingPoint};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Contents of a config file. Every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<String>,
    pub sequence: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub injection: Option<String>,
    pub gamma_init: Option<f64>,
    pub cost: Option<String>,
    pub out: Option<PathBuf>,
    /// Start states tried in order when seeding the gait search.
    pub candidates: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub operating_point: Option<OperatingSection>,
    #[serde(default)]
    pub root_search: RootSearchSection,
    #[serde(default)]
    pub continuation: ContinuationSection,
    #[serde(default)]
    pub simulate: SimulateSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingSection {
    pub kind: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSearchSection {
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationSection {
    pub delta: Option<f64>,
    pub min_delta: Option<f64>,
    pub tol: Option<f64>,
    pub max_steps: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub x0: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub eps: Option<f64>,
    pub step: Option<f64>,
    pub t_max: Option<f64>,
}

/// Values given on the command line; they win over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub op_kind: Option<String>,
    pub op_value: Option<f64>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub tol: Option<f64>,
    pub injection: Option<String>,
    pub out: Option<PathBuf>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub kind: ModelKind,
    pub params: Vec<(String, f64)>,
    pub model: ModelSpec,
    pub sequence: Vec<usize>,
    pub n_intervals: usize,
    pub operating_point: OperatingPoint,
    pub injection: InjectionKind,
    pub cost: CostKind,
    pub candidates: Vec<Vec<f64>>,
    pub root_search: RootSearchConfig,
    pub continuation: ContinuationConfig,
    pub simulate: SimulateSection,
    pub out: PathBuf,
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(file: ConfigFile, cli: Overrides) -> Result<Self, CliError> {
        let model_name = cli.model.or(file.model).unwrap_or_else(|| "prismatic-monopod".into());
        let kind: ModelKind = model_name
            .parse()
            .map_err(|e| CliError::Config(format!("model: {e}")))?;
        let preset = GaitPreset::for_model(kind);
        let mut param_set = kind.default_params();
        let params: Vec<(String, f64)> = file.params.into_iter().collect();
        for (name, value) in &params {
            param_set
                .set(name, *value)
                .map_err(|e| CliError::Config(format!("params.{name}: {e}")))?;
        }
        let model = kind
            .build(&param_set)
            .map_err(|e| CliError::Config(format!("params: {e}")))?;

        let sequence = file.sequence.unwrap_or(preset.sequence.clone());
        if let Some(&bad) = sequence.iter().find(|&&p| p >= model.phases.len()) {
            return Err(CliError::Config(format!(
                "sequence: phase {bad} does not exist in {} ({} phases)",
                kind,
                model.phases.len()
            )));
        }
        let n_intervals = cli.n.or(file.n).unwrap_or(preset.n_intervals);
        if n_intervals < 2 {
            return Err(CliError::Config(format!(
                "n: need at least 2 intervals, got {n_intervals}"
            )));
        }

        let file_op = file.operating_point.map(|s| (s.kind, s.value));
        let op_kind = match cli.op_kind.or(file_op.as_ref().map(|(k, _)| k.clone())) {
            Some(k) => k
                .parse::<OperatingKind>()
                .map_err(|e| CliError::Config(format!("op-kind: {e}")))?,
            None => preset.operating_point.kind,
        };
        let op_value = cli
            .op_value
            .or(file_op.map(|(_, v)| v))
            .unwrap_or(preset.operating_point.value);
        let operating_point =
            OperatingPoint::new(op_kind, op_value).map_err(|e| CliError::Config(format!("operating point: {e}")))?;

        let injection = match cli.injection.or(file.injection) {
            Some(s) => s
                .parse()
                .map_err(|e: String| CliError::Config(format!("injection: {e}")))?,
            None => InjectionKind::default(),
        };
        let cost = match file.cost {
            Some(s) => s.parse().map_err(|e| CliError::Config(format!("cost: {e}")))?,
            None => CostKind::default(),
        };

        let candidates = file.candidates.unwrap_or_else(|| vec![preset.guess.clone()]);
        if let Some(c) = candidates.iter().find(|c| c.len() != model.n_x()) {
            return Err(CliError::Config(format!(
                "candidates: state has {} entries, {} expects {}",
                c.len(),
                kind,
                model.n_x()
            )));
        }

        let mut root_search = RootSearchConfig {
            n_intervals,
            ..RootSearchConfig::default()
        };
        if let Some(g) = file.gamma_init {
            root_search.gamma_init = g;
        }
        if let Some(t) = cli.tol.or(file.root_search.tol) {
            root_search.tol = t;
        }
        if let Some(m) = file.root_search.max_iters {
            root_search.max_iters = m;
        }
        if let Some(h) = file.simulate.step {
            root_search.sim.step = h;
        }
        if let Some(t) = file.simulate.t_max {
            root_search.sim.t_max = t;
        }
        root_search
            .validate()
            .map_err(|e| CliError::Config(format!("root_search: {e}")))?;

        let mut continuation = ContinuationConfig::default();
        if let Some(d) = cli.delta.or(file.continuation.delta) {
            continuation.delta = d;
        }
        if let Some(d) = file.continuation.min_delta {
            continuation.min_delta = d;
        }
        if let Some(t) = file.continuation.tol {
            continuation.tol = t;
        }
        if let Some(m) = file.continuation.max_steps {
            continuation.max_steps = m;
        }
        if !(continuation.delta > 0.0 && continuation.min_delta > 0.0 && continuation.tol > 0.0) {
            return Err(CliError::Config(
                "continuation: delta, min_delta and tol must be positive".into(),
            ));
        }

        if let Some(x0) = &file.simulate.x0 {
            if x0.len() != model.n_x() {
                return Err(CliError::Config(format!(
                    "simulate.x0: state has {} entries, {} expects {}",
                    x0.len(),
                    kind,
                    model.n_x()
                )));
            }
        }

        Ok(RunConfig {
            kind,
            params,
            model,
            sequence,
            n_intervals,
            operating_point,
            injection,
            cost,
            candidates,
            root_search,
            continuation,
            simulate: file.simulate,
            out: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}
