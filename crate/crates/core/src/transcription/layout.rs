//! Decision-vector layout and packing.

use super::TranscriptionError;
use crate::models::ModelSpec;
use std::fmt;
use std::str::FromStr;

/// Which unknowns the decision vector carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayoutMode {
    /// `γ` free, controls fixed at zero.
    QuasiPassive,
    /// `γ` frozen, piecewise-constant controls free.
    Actuated,
}

impl LayoutMode {
    pub fn name(self) -> &'static str {
        match self {
            LayoutMode::QuasiPassive => "quasi-passive",
            LayoutMode::Actuated => "actuated",
        }
    }
}

impl fmt::Display for LayoutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutMode {
    type Err = TranscriptionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quasi-passive" => Ok(LayoutMode::QuasiPassive),
            "actuated" => Ok(LayoutMode::Actuated),
            _ => Err(TranscriptionError::InvalidLayout(format!("unknown mode {s:?}"))),
        }
    }
}

/// Index map of the decision vector.
///
/// Order: `x0`, `γ` (quasi-passive only), phase durations, free model
/// parameters, grid nodes, controls (actuated only). Phase 1 stores nodes
/// `1..=N` because node 0 is `x0`; later phases store nodes `0..=N`. Controls
/// are stored phase-major, then interval, then active input.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionLayout {
    pub mode: LayoutMode,
    pub sequence: Vec<usize>,
    pub n_intervals: usize,
    pub n_q: usize,
    pub n_u: usize,
    pub n_free: usize,
    /// `active[k][c]`: input `c` is a decision variable in the `k`-th phase.
    pub active: Vec<Vec<bool>>,
    /// Injection parameter held fixed in actuated mode.
    pub frozen_gamma: f64,
    durations_at: usize,
    free_at: usize,
    grid_at: usize,
    xi_at: Vec<usize>,
    len: usize,
}

impl DecisionLayout {
    pub fn new(
        model: &ModelSpec,
        sequence: &[usize],
        n_intervals: usize,
        mode: LayoutMode,
    ) -> Result<Self, TranscriptionError> {
        if sequence.is_empty() {
            return Err(TranscriptionError::InvalidLayout("empty phase sequence".into()));
        }
        if n_intervals < 2 {
            return Err(TranscriptionError::InvalidLayout(format!(
                "need at least 2 intervals per phase, got {n_intervals}"
            )));
        }
        for (k, &p) in sequence.iter().enumerate() {
            if p >= model.phases.len() {
                return Err(TranscriptionError::InvalidLayout(format!("unknown phase id {p}")));
            }
            let next = sequence[(k + 1) % sequence.len()];
            model.transition(p, next)?;
        }
        let active: Vec<Vec<bool>> = sequence
            .iter()
            .map(|&p| {
                (0..model.n_u)
                    .map(|c| {
                        model
                            .gated_motors
                            .iter()
                            .filter(|(motor, _)| *motor == c)
                            .all(|(_, foot)| model.phases[p].contacts.contains(foot))
                    })
                    .collect()
            })
            .collect();
        let n_x = 2 * model.n_q;
        let m = sequence.len();
        let gamma = usize::from(mode == LayoutMode::QuasiPassive);
        let durations_at = n_x + gamma;
        let free_at = durations_at + m;
        let grid_at = free_at + model.free_params.len();
        let mut at = grid_at + n_x * (n_intervals + (m - 1) * (n_intervals + 1));
        let mut xi_at = Vec::with_capacity(m);
        for phase_active in &active {
            xi_at.push(at);
            if mode == LayoutMode::Actuated {
                at += n_intervals * phase_active.iter().filter(|&&a| a).count();
            }
        }
        Ok(DecisionLayout {
            mode,
            sequence: sequence.to_vec(),
            n_intervals,
            n_q: model.n_q,
            n_u: model.n_u,
            n_free: model.free_params.len(),
            active,
            frozen_gamma: 0.0,
            durations_at,
            free_at,
            grid_at,
            xi_at,
            len: at,
        })
    }

    /// Same layout with a different mode (sequence, grid and mask kept).
    pub fn with_mode(&self, mode: LayoutMode, model: &ModelSpec) -> Result<Self, TranscriptionError> {
        let mut out = DecisionLayout::new(model, &self.sequence, self.n_intervals, mode)?;
        out.frozen_gamma = self.frozen_gamma;
        Ok(out)
    }

    pub fn with_frozen_gamma(mut self, gamma: f64) -> Self {
        self.frozen_gamma = gamma;
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_x(&self) -> usize {
        2 * self.n_q
    }

    pub fn n_phases(&self) -> usize {
        self.sequence.len()
    }

    pub fn gamma_index(&self) -> Option<usize> {
        (self.mode == LayoutMode::QuasiPassive).then_some(self.n_x())
    }

    pub fn duration_index(&self, k: usize) -> usize {
        self.durations_at + k
    }

    pub fn free_index(&self, i: usize) -> usize {
        self.free_at + i
    }

    /// First index of grid node `j` of the `k`-th phase.
    pub fn node_index(&self, k: usize, j: usize) -> usize {
        let n_x = self.n_x();
        let n = self.n_intervals;
        match k {
            0 if j == 0 => 0,
            0 => self.grid_at + (j - 1) * n_x,
            _ => self.grid_at + n * n_x + ((k - 1) * (n + 1) + j) * n_x,
        }
    }

    /// Index of input `c` on interval `j` of the `k`-th phase, if it is free.
    pub fn xi_index(&self, k: usize, j: usize, c: usize) -> Option<usize> {
        if self.mode != LayoutMode::Actuated || !self.active[k][c] {
            return None;
        }
        let per = self.active[k].iter().filter(|&&a| a).count();
        let rank = self.active[k][..c].iter().filter(|&&a| a).count();
        Some(self.xi_at[k] + j * per + rank)
    }

    /// Every control index, in storage order.
    pub fn xi_indices(&self) -> std::ops::Range<usize> {
        let start = self.xi_at.first().copied().unwrap_or(self.len);
        start..self.len
    }

    /// Number of residual rows of the full gait system.
    pub fn n_residuals(&self) -> usize {
        let n_x = self.n_x();
        let m = self.n_phases();
        n_x * self.n_intervals * m + n_x * (m - 1) + n_x + m + 1
    }

    pub fn check_len(&self, got: usize) -> Result<(), TranscriptionError> {
        if got == self.len {
            Ok(())
        } else {
            Err(TranscriptionError::Length {
                expected: self.len,
                got,
            })
        }
    }

    /// Splits a packed vector into its named parts.
    pub fn unpack(&self, a: &[f64]) -> Result<GaitVector, TranscriptionError> {
        self.check_len(a.len())?;
        let n_x = self.n_x();
        let m = self.n_phases();
        let n = self.n_intervals;
        let nodes = (0..m)
            .map(|k| {
                (0..=n)
                    .map(|j| {
                        let i = self.node_index(k, j);
                        a[i..i + n_x].to_vec()
                    })
                    .collect()
            })
            .collect();
        let controls = (0..m)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        (0..self.n_u)
                            .map(|c| self.xi_index(k, j, c).map_or(0.0, |i| a[i]))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(GaitVector {
            x0: a[..n_x].to_vec(),
            gamma: self.gamma_index().map(|i| a[i]),
            durations: a[self.durations_at..self.durations_at + m].to_vec(),
            free: a[self.free_at..self.free_at + self.n_free].to_vec(),
            nodes,
            controls,
        })
    }

    /// Inverse of [`unpack`](Self::unpack). `nodes[0][0]` is ignored in favour
    /// of `x0`, and frozen controls are dropped.
    pub fn pack(&self, g: &GaitVector) -> Result<Vec<f64>, TranscriptionError> {
        let n_x = self.n_x();
        let m = self.n_phases();
        let n = self.n_intervals;
        let shape_ok = g.x0.len() == n_x
            && g.durations.len() == m
            && g.free.len() == self.n_free
            && g.nodes.len() == m
            && g.nodes
                .iter()
                .all(|p| p.len() == n + 1 && p.iter().all(|x| x.len() == n_x))
            && (self.mode == LayoutMode::QuasiPassive
                || (g.controls.len() == m
                    && g.controls
                        .iter()
                        .all(|p| p.len() == n && p.iter().all(|u| u.len() == self.n_u))));
        if !shape_ok {
            return Err(TranscriptionError::InvalidLayout(
                "gait parts do not match the layout".into(),
            ));
        }
        let mut a = vec![0.0; self.len];
        a[..n_x].copy_from_slice(&g.x0);
        if let Some(i) = self.gamma_index() {
            a[i] = g
                .gamma
                .ok_or_else(|| TranscriptionError::InvalidLayout("missing γ".into()))?;
        }
        a[self.durations_at..self.durations_at + m].copy_from_slice(&g.durations);
        a[self.free_at..self.free_at + self.n_free].copy_from_slice(&g.free);
        for k in 0..m {
            for j in 0..=n {
                if k == 0 && j == 0 {
                    continue;
                }
                let i = self.node_index(k, j);
                a[i..i + n_x].copy_from_slice(&g.nodes[k][j]);
            }
            for j in 0..n {
                for c in 0..self.n_u {
                    if let Some(i) = self.xi_index(k, j, c) {
                        a[i] = g.controls[k][j][c];
                    }
                }
            }
        }
        Ok(a)
    }
}

/// Unpacked decision vector.
#[derive(Clone, Debug, PartialEq)]
pub struct GaitVector {
    pub x0: Vec<f64>,
    pub gamma: Option<f64>,
    pub durations: Vec<f64>,
    pub free: Vec<f64>,
    /// `nodes[k][j]`, with `nodes[0][0] == x0`.
    pub nodes: Vec<Vec<Vec<f64>>>,
    /// `controls[k][j]`: full input vector on interval `j` of phase `k`.
    pub controls: Vec<Vec<Vec<f64>>>,
}

impl GaitVector {
    /// Stride period `Σ T_k`.
    pub fn period(&self) -> f64 {
        self.durations.iter().sum()
    }
}
