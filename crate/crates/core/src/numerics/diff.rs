//! Jacobians and Hessian stacks of generic vector functions.
//!
//! The const seed width of the forward-mode types is picked at run time from a
//! small menu of monomorphized sizes. Inputs wider than the strip width are
//! covered by several passes: Jacobians take one pass per strip, Hessians one
//! pass per pair of half-width strips.

use super::dual::Dual;
use super::dual2::Dual2;
use super::scalar::Scalar;
use super::{DenseMatrix, NumericsError};

/// A function `ℝⁿ → ℝᵐ` written once against [`Scalar`].
pub trait VectorFn {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

/// Seed-strip width used by [`jacobian`] and [`hessian_stack`].
pub const DEFAULT_STRIP_WIDTH: usize = 8;

/// Largest seed width available for first-order passes.
pub const MAX_DUAL_WIDTH: usize = 64;
/// Largest seed width available for second-order passes.
pub const MAX_DUAL2_WIDTH: usize = 32;

/// Values, first and second derivatives of every output of a function.
#[derive(Clone, Debug)]
pub struct SecondOrder {
    pub values: Vec<f64>,
    pub jacobian: DenseMatrix,
    pub hessians: Vec<DenseMatrix>,
}

macro_rules! with_dual_width {
    ($w:expr, $func:ident, ($($arg:expr),*)) => {
        match $w {
            0..=1 => $func::<1, _>($($arg),*),
            2 => $func::<2, _>($($arg),*),
            3..=4 => $func::<4, _>($($arg),*),
            5..=8 => $func::<8, _>($($arg),*),
            9..=16 => $func::<16, _>($($arg),*),
            17..=24 => $func::<24, _>($($arg),*),
            25..=32 => $func::<32, _>($($arg),*),
            33..=40 => $func::<40, _>($($arg),*),
            41..=48 => $func::<48, _>($($arg),*),
            _ => $func::<64, _>($($arg),*),
        }
    };
}

macro_rules! with_dual2_width {
    ($w:expr, $func:ident, ($($arg:expr),*)) => {
        match $w {
            0..=2 => $func::<2, _>($($arg),*),
            3..=4 => $func::<4, _>($($arg),*),
            5..=8 => $func::<8, _>($($arg),*),
            9..=16 => $func::<16, _>($($arg),*),
            17..=24 => $func::<24, _>($($arg),*),
            _ => $func::<32, _>($($arg),*),
        }
    };
}

fn check_finite(values: &[f64], what: &str) -> Result<(), NumericsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(component) => Err(NumericsError::DifferentiationFailure {
            component,
            detail: format!("non-finite {what}"),
        }),
        None => Ok(()),
    }
}

fn jacobian_pass<const W: usize, F: VectorFn>(
    f: &F,
    x: &[f64],
    first: usize,
    out: &mut DenseMatrix,
    values: &mut Vec<f64>,
) -> Result<(), NumericsError> {
    let xs: Vec<Dual<W>> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i >= first && i < first + W {
                Dual::variable(v, i - first)
            } else {
                Dual::constant(v)
            }
        })
        .collect();
    let ys = f.eval(&xs);
    if ys.len() != out.nrows() {
        return Err(NumericsError::Dimension(format!(
            "function returned {} outputs, declared {}",
            ys.len(),
            out.nrows()
        )));
    }
    for (r, y) in ys.iter().enumerate() {
        if !y.v.is_finite() || y.d.iter().any(|d| !d.is_finite()) {
            return Err(NumericsError::DifferentiationFailure {
                component: r,
                detail: "non-finite value or derivative".into(),
            });
        }
        for k in 0..W.min(x.len().saturating_sub(first)) {
            out[(r, first + k)] = y.d[k];
        }
    }
    if values.is_empty() {
        values.extend(ys.iter().map(|y| y.v));
    }
    Ok(())
}

/// Jacobian with an explicit strip width; also returns the function values.
pub fn jacobian_and_values<F: VectorFn>(
    f: &F,
    x: &[f64],
    strip_width: usize,
) -> Result<(Vec<f64>, DenseMatrix), NumericsError> {
    let n = x.len();
    if n != f.input_dim() {
        return Err(NumericsError::Dimension(format!(
            "input has length {n}, function expects {}",
            f.input_dim()
        )));
    }
    check_finite(x, "input")?;
    let m = f.output_dim();
    let width = strip_width.clamp(1, MAX_DUAL_WIDTH).min(n.max(1));
    let mut out = DenseMatrix::zeros(m, n);
    let mut values = Vec::new();
    if n == 0 {
        values = values_only(f, x);
        return Ok((values, out));
    }
    let mut first = 0;
    while first < n {
        let w = width.min(n - first);
        with_dual_width!(w, jacobian_pass, (f, x, first, &mut out, &mut values))?;
        first += w;
    }
    Ok((values, out))
}

/// `∂f/∂x` with the default strip width.
pub fn jacobian<F: VectorFn>(f: &F, x: &[f64]) -> Result<DenseMatrix, NumericsError> {
    jacobian_and_values(f, x, DEFAULT_STRIP_WIDTH).map(|(_, j)| j)
}

/// Plain `f64` evaluation.
pub fn values_only<F: VectorFn>(f: &F, x: &[f64]) -> Vec<f64> {
    f.eval(x)
}

fn second_order_pass<const W: usize, F: VectorFn>(
    f: &F,
    x: &[f64],
    seeds: &[usize],
    out: &mut SecondOrder,
) -> Result<(), NumericsError> {
    let mut xs: Vec<Dual2<W>> = x.iter().map(|&v| Dual2::constant(v)).collect();
    for (k, &i) in seeds.iter().enumerate() {
        xs[i] = Dual2::variable(x[i], k);
    }
    let ys = f.eval(&xs);
    if ys.len() != out.hessians.len() {
        return Err(NumericsError::Dimension(format!(
            "function returned {} outputs, declared {}",
            ys.len(),
            out.hessians.len()
        )));
    }
    for (r, y) in ys.iter().enumerate() {
        if !y.v.is_finite() {
            return Err(NumericsError::DifferentiationFailure {
                component: r,
                detail: "non-finite value".into(),
            });
        }
        let h = y.hessian();
        for (a, &i) in seeds.iter().enumerate() {
            out.jacobian[(r, i)] = y.g[a];
            for (b, &j) in seeds.iter().enumerate() {
                out.hessians[r][(i, j)] = h[a][b];
            }
        }
        let bad = y.g[..seeds.len()].iter().any(|g| !g.is_finite())
            || h[..seeds.len()]
                .iter()
                .any(|row| row[..seeds.len()].iter().any(|v| !v.is_finite()));
        if bad {
            return Err(NumericsError::DifferentiationFailure {
                component: r,
                detail: "non-finite derivative".into(),
            });
        }
    }
    if out.values.is_empty() {
        out.values = ys.iter().map(|y| y.v).collect();
    }
    Ok(())
}

/// Values, Jacobian and per-output Hessians with an explicit strip width.
///
/// Inputs no wider than the strip width take a single pass. Wider inputs are
/// split into strips of half the width and every pair of strips is seeded
/// together, so each Hessian block is produced exactly once or twice.
pub fn second_order<F: VectorFn>(f: &F, x: &[f64], strip_width: usize) -> Result<SecondOrder, NumericsError> {
    let n = x.len();
    if n != f.input_dim() {
        return Err(NumericsError::Dimension(format!(
            "input has length {n}, function expects {}",
            f.input_dim()
        )));
    }
    check_finite(x, "input")?;
    let m = f.output_dim();
    let mut out = SecondOrder {
        values: Vec::new(),
        jacobian: DenseMatrix::zeros(m, n),
        hessians: vec![DenseMatrix::zeros(n, n); m],
    };
    let width = strip_width.clamp(2, MAX_DUAL2_WIDTH);
    if n <= width {
        let seeds: Vec<usize> = (0..n).collect();
        with_dual2_width!(n, second_order_pass, (f, x, &seeds, &mut out))?;
    } else {
        let half = width / 2;
        let strips: Vec<Vec<usize>> = (0..n).collect::<Vec<_>>().chunks(half).map(<[usize]>::to_vec).collect();
        for a in 0..strips.len() {
            for b in a + 1..strips.len() {
                let seeds: Vec<usize> = strips[a].iter().chain(&strips[b]).copied().collect();
                with_dual2_width!(seeds.len(), second_order_pass, (f, x, &seeds, &mut out))?;
            }
        }
    }
    for h in out.hessians.iter_mut() {
        let sym = (&*h + h.transpose()) * 0.5;
        *h = sym;
    }
    Ok(out)
}

/// One symmetric Hessian per output, default strip width.
pub fn hessian_stack<F: VectorFn>(f: &F, x: &[f64]) -> Result<Vec<DenseMatrix>, NumericsError> {
    second_order(f, x, DEFAULT_STRIP_WIDTH).map(|s| s.hessians)
}

/// Central finite-difference Jacobian, used as a test oracle.
pub fn fd_jacobian<F: VectorFn>(f: &F, x: &[f64], step: f64) -> DenseMatrix {
    let n = x.len();
    let m = f.output_dim();
    let mut out = DenseMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + step;
        let fp = f.eval(&xp);
        xp[j] = x[j] - step;
        let fm = f.eval(&xp);
        xp[j] = x[j];
        for i in 0..m {
            out[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    out
}
