//! Residual blocks with their local variable lists.
//!
//! Every block reads a short, fixed list of slots. A slot is either a
//! decision variable (deduplicated into the block's local variables) or a
//! constant. The homotopy parameter `ε` is always the last local variable and
//! carries the global index `n_a`.

use super::layout::DecisionLayout;
use super::{OperatingKind, OperatingPoint, TranscriptionError};
use crate::hybrid::{homotopy_field_of, impact_map_of, phase_dynamics, InjectionKind};
use crate::models::{EventKind, ModelSpec};
use crate::numerics::{Scalar, VectorFn};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Slot {
    Var(usize),
    Const(f64),
}

/// The five residual groups, in row order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BlockGroup {
    Collocation,
    Linkage,
    Periodicity,
    Anchor,
    OperatingPoint,
}

impl BlockGroup {
    pub const ALL: [BlockGroup; 5] = [
        BlockGroup::Collocation,
        BlockGroup::Linkage,
        BlockGroup::Periodicity,
        BlockGroup::Anchor,
        BlockGroup::OperatingPoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BlockGroup::Collocation => "collocation",
            BlockGroup::Linkage => "linkage",
            BlockGroup::Periodicity => "periodicity",
            BlockGroup::Anchor => "anchor",
            BlockGroup::OperatingPoint => "operating-point",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum BlockKind {
    /// Slots: `x_a, x_b, T, γ, u, free, ε`.
    Collocation { phase: usize },
    /// Slots: `x_end, x_next, ε`; rows `x_next − Δ(x_end)`.
    Linkage { target: usize },
    /// Slots: `x_end, x0, ε`; rows `P Δ(x_end) − x0`.
    Periodicity { target: usize },
    /// Slots: `x, u, free, ε`.
    Anchor { phase: usize, event: EventKind },
    /// Slots: `x0_x, x_end_x, T_1..T_m, ε`.
    Speed,
    /// Slots: `x0, free, ε`.
    Energy,
}

#[derive(Clone, Debug)]
pub(crate) struct BlockSpec {
    pub kind: BlockKind,
    pub group: BlockGroup,
    /// Global indices of the local variables (`n_a` stands for `ε`).
    pub vars: Vec<usize>,
    pub slots: Vec<Slot>,
    pub first_row: usize,
    pub rows: usize,
}

struct Builder {
    vars: Vec<usize>,
    slots: Vec<Slot>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            vars: Vec::new(),
            slots: Vec::new(),
        }
    }

    fn var(&mut self, g: usize) {
        let local = match self.vars.iter().position(|&v| v == g) {
            Some(l) => l,
            None => {
                self.vars.push(g);
                self.vars.len() - 1
            }
        };
        self.slots.push(Slot::Var(local));
    }

    fn range(&mut self, start: usize, len: usize) {
        for g in start..start + len {
            self.var(g);
        }
    }

    fn constant(&mut self, v: f64) {
        self.slots.push(Slot::Const(v));
    }

    fn finish(mut self, kind: BlockKind, group: BlockGroup, eps: usize, first_row: usize, rows: usize) -> BlockSpec {
        self.var(eps);
        BlockSpec {
            kind,
            group,
            vars: self.vars,
            slots: self.slots,
            first_row,
            rows,
        }
    }
}

pub(crate) fn build_blocks(
    model: &ModelSpec,
    layout: &DecisionLayout,
    op: &OperatingPoint,
) -> Result<Vec<BlockSpec>, TranscriptionError> {
    let n_x = layout.n_x();
    let n = layout.n_intervals;
    let m = layout.n_phases();
    let eps = layout.len();
    let mut blocks = Vec::new();
    let mut row = 0;
    let controls = |b: &mut Builder, k: usize, j: usize| {
        for c in 0..layout.n_u {
            match layout.xi_index(k, j, c) {
                Some(i) => b.var(i),
                None => b.constant(0.0),
            }
        }
    };
    let free = |b: &mut Builder| {
        for i in 0..layout.n_free {
            b.var(layout.free_index(i));
        }
    };
    for (k, &phase) in layout.sequence.iter().enumerate() {
        for j in 0..n {
            let mut b = Builder::new();
            b.range(layout.node_index(k, j), n_x);
            b.range(layout.node_index(k, j + 1), n_x);
            b.var(layout.duration_index(k));
            match layout.gamma_index() {
                Some(i) => b.var(i),
                None => b.constant(layout.frozen_gamma),
            }
            controls(&mut b, k, j);
            free(&mut b);
            blocks.push(b.finish(BlockKind::Collocation { phase }, BlockGroup::Collocation, eps, row, n_x));
            row += n_x;
        }
    }
    for k in 0..m - 1 {
        let mut b = Builder::new();
        b.range(layout.node_index(k, n), n_x);
        b.range(layout.node_index(k + 1, 0), n_x);
        let target = layout.sequence[k + 1];
        blocks.push(b.finish(BlockKind::Linkage { target }, BlockGroup::Linkage, eps, row, n_x));
        row += n_x;
    }
    {
        let mut b = Builder::new();
        b.range(layout.node_index(m - 1, n), n_x);
        b.range(0, n_x);
        let target = layout.sequence[0];
        blocks.push(b.finish(
            BlockKind::Periodicity { target },
            BlockGroup::Periodicity,
            eps,
            row,
            n_x,
        ));
        row += n_x;
    }
    for (k, &phase) in layout.sequence.iter().enumerate() {
        let event = model.transition(phase, layout.sequence[(k + 1) % m])?;
        let mut b = Builder::new();
        b.range(layout.node_index(k, n), n_x);
        controls(&mut b, k, n - 1);
        free(&mut b);
        blocks.push(b.finish(BlockKind::Anchor { phase, event }, BlockGroup::Anchor, eps, row, 1));
        row += 1;
    }
    let mut b = Builder::new();
    let kind = match op.kind {
        OperatingKind::AverageSpeed => {
            b.var(0);
            b.var(layout.node_index(m - 1, n));
            for k in 0..m {
                b.var(layout.duration_index(k));
            }
            BlockKind::Speed
        }
        OperatingKind::EnergyLevel => {
            b.range(0, n_x);
            free(&mut b);
            BlockKind::Energy
        }
    };
    blocks.push(b.finish(kind, BlockGroup::OperatingPoint, eps, row, 1));
    Ok(blocks)
}

/// Everything a block needs besides its slot values.
pub(crate) struct BlockContext<'a> {
    pub model: &'a ModelSpec,
    pub layout: &'a DecisionLayout,
    pub op: &'a OperatingPoint,
    pub kind: InjectionKind,
}

impl BlockContext<'_> {
    pub fn eval<S: Scalar>(&self, block: &BlockSpec, s: &[S]) -> Result<Vec<S>, TranscriptionError> {
        let model = self.model;
        let n_x = self.layout.n_x();
        let n_u = self.layout.n_u;
        let n_f = self.layout.n_free;
        let eps = *s.last().expect("ε slot");
        match &block.kind {
            BlockKind::Collocation { phase } => {
                let (xa, rest) = s.split_at(n_x);
                let (xb, rest) = rest.split_at(n_x);
                let (t, gamma) = (rest[0], rest[1]);
                let u = &rest[2..2 + n_u];
                let free = &rest[2 + n_u..2 + n_u + n_f];
                let h = t * (1.0 / self.layout.n_intervals as f64);
                let field = |x: &[S]| homotopy_field_of(model, *phase, x, u, gamma, eps, self.kind, free);
                let fa = field(xa)?;
                let fb = field(xb)?;
                let xm: Vec<S> = (0..n_x)
                    .map(|i| (xa[i] + xb[i]) * 0.5 + h * 0.125 * (fa[i] - fb[i]))
                    .collect();
                let fm = field(&xm)?;
                Ok((0..n_x)
                    .map(|i| xb[i] - xa[i] - h * (1.0 / 6.0) * (fa[i] + fm[i] * 4.0 + fb[i]))
                    .collect())
            }
            BlockKind::Linkage { target } => {
                let post = impact_map_of(model, *target, &s[..n_x])?;
                Ok((0..n_x).map(|i| s[n_x + i] - post[i]).collect())
            }
            BlockKind::Periodicity { target } => {
                let post = impact_map_of(model, *target, &s[..n_x])?;
                Ok((0..n_x)
                    .map(|i| {
                        let periodic = if model.aperiodic.contains(&i) {
                            S::zero()
                        } else {
                            post[i]
                        };
                        periodic - s[n_x + i]
                    })
                    .collect())
            }
            BlockKind::Anchor { phase, event } => {
                let x = &s[..n_x];
                let u = &s[n_x..n_x + n_u];
                let free = &s[n_x + n_u..n_x + n_u + n_f];
                let (q, qd) = x.split_at(self.layout.n_q);
                let lambda = match event {
                    EventKind::Liftoff { .. } => phase_dynamics(model, *phase, q, qd, u, free)?.lambda,
                    EventKind::Touchdown { .. } => Vec::new(),
                };
                Ok(vec![model.event_of(*phase, *event, q, &lambda)])
            }
            BlockKind::Speed => {
                let m = self.layout.n_phases();
                let period = s[2..2 + m].iter().fold(S::zero(), |a, &t| a + t);
                Ok(vec![(s[1] - s[0]) / period - self.op.value])
            }
            BlockKind::Energy => {
                let e = model.total_energy_of(&s[..n_x], &s[n_x..n_x + n_f]);
                Ok(vec![e - self.op.value])
            }
        }
    }

    pub fn slot_values<S: Scalar>(&self, block: &BlockSpec, local: &[S]) -> Vec<S> {
        block
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Var(i) => local[i],
                Slot::Const(v) => S::cst(v),
            })
            .collect()
    }
}

/// A block as a function of its local variables. Evaluation failures turn
/// into NaN outputs, which the differentiation driver reports.
pub(crate) struct BlockFn<'a> {
    pub ctx: &'a BlockContext<'a>,
    pub block: &'a BlockSpec,
}

impl VectorFn for BlockFn<'_> {
    fn input_dim(&self) -> usize {
        self.block.vars.len()
    }

    fn output_dim(&self) -> usize {
        self.block.rows
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let slots = self.ctx.slot_values(self.block, x);
        self.ctx
            .eval(self.block, &slots)
            .unwrap_or_else(|_| vec![S::cst(f64::NAN); self.block.rows])
    }
}
