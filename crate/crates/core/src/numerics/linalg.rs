use super::scalar::Scalar;
use super::{DenseMatrix, NumericsError};
use nalgebra::{DVector, SymmetricEigen};

/// Relative rank threshold: pivots below `RANK_RTOL · |R₀₀|` count as zero.
pub const RANK_RTOL: f64 = 1e-10;

/// Solution of a least-squares problem with the detected numerical rank.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub x: DVector<f64>,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
///
/// Column-pivoted QR followed, when rank deficient or underdetermined, by a
/// second QR of the leading rows (complete orthogonal decomposition).
/// `min_rank` lets the caller reject solutions whose effective rank is too low.
pub fn solve_least_squares(a: &DenseMatrix, b: &[f64], min_rank: usize) -> Result<LeastSquares, NumericsError> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(NumericsError::Dimension(format!(
            "right-hand side has length {}, matrix has {m} rows",
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    if n == 0 {
        return Ok(LeastSquares {
            x: DVector::zeros(0),
            rank: 0,
        });
    }
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let k = m.min(n);
    let scale = r[(0, 0)].abs();
    let rank = if scale == 0.0 {
        0
    } else {
        (0..k).take_while(|&i| r[(i, i)].abs() > RANK_RTOL * scale).count()
    };
    if rank < min_rank {
        return Err(NumericsError::RankDeficient { rank });
    }
    let mut qtb = DVector::from_column_slice(b);
    qr.q_tr_mul(&mut qtb);
    let c = qtb.rows(0, rank).into_owned();
    // Permuted solution y with A P y ≈ b.
    let mut y = DVector::zeros(n);
    if rank == n {
        let r11 = r.view((0, 0), (rank, rank));
        let sol = r11
            .solve_upper_triangular(&c)
            .ok_or(NumericsError::RankDeficient { rank })?;
        y.rows_mut(0, rank).copy_from(&sol);
    } else if rank > 0 {
        // [R11 R12] = Lᵀ Zᵀ via QR of its transpose; y = Z L⁻ᵀ c.
        let top = r.view((0, 0), (rank, n)).transpose();
        let qr2 = top.qr();
        let l_t = qr2.r();
        let w = l_t
            .transpose()
            .solve_lower_triangular(&c)
            .ok_or(NumericsError::RankDeficient { rank })?;
        y = qr2.q() * w;
    }
    qr.p().inv_permute_rows(&mut y);
    Ok(LeastSquares { x: y, rank })
}

/// Householder QR keeping every reflector, so the full orthogonal factor and
/// its determinant sign are available.
pub struct HouseholderQr {
    q: DenseMatrix,
    r: DenseMatrix,
    reflections: usize,
}

impl HouseholderQr {
    pub fn new(a: &DenseMatrix) -> Self {
        let (m, n) = a.shape();
        let mut r = a.clone();
        let mut q = DenseMatrix::identity(m, m);
        let mut reflections = 0;
        for k in 0..n.min(m.saturating_sub(1)) {
            let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            reflections += 1;
            for j in 0..n {
                let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
                for i in k..m {
                    r[(i, j)] -= s * v[i - k];
                }
            }
            for i in 0..m {
                let s: f64 = (k..m).map(|l| q[(i, l)] * v[l - k]).sum::<f64>() * 2.0 / vnorm2;
                for l in k..m {
                    q[(i, l)] -= s * v[l - k];
                }
            }
            for i in k + 1..m {
                r[(i, k)] = 0.0;
            }
        }
        HouseholderQr { q, r, reflections }
    }

    /// Full `m × m` orthogonal factor.
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    /// Upper-trapezoidal factor, `m × n`.
    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// `det(Q) = (-1)^reflections`.
    pub fn q_det_sign(&self) -> f64 {
        if self.reflections.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Unit vector spanning the null space of an `n × (n+1)` matrix, oriented
/// so that `det([R; pᵀ]) > 0`.
///
/// With `Rᵀ = Q [U; 0]` the last column of `Q` spans the null space and
/// `det([R; pᵀ]) = det(U) · det(Q)`, so the orientation comes from the signs
/// of the triangular pivots and the reflection count.
pub fn null_tangent(r: &DenseMatrix) -> Result<DVector<f64>, NumericsError> {
    let (n, cols) = r.shape();
    if cols != n + 1 {
        return Err(NumericsError::Dimension(format!(
            "null_tangent needs n × (n+1), got {n} × {cols}"
        )));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    let qr = HouseholderQr::new(&r.transpose());
    let u = qr.r();
    let scale = (0..n).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
    let rank = (0..n)
        .filter(|&i| u[(i, i)].abs() > RANK_RTOL * scale.max(f64::MIN_POSITIVE))
        .count();
    if rank < n {
        return Err(NumericsError::RankDeficient { rank });
    }
    let mut sign = qr.q_det_sign();
    for i in 0..n {
        if u[(i, i)] < 0.0 {
            sign = -sign;
        }
    }
    let mut p = qr.q().column(n).into_owned();
    p /= p.norm();
    if sign < 0.0 {
        p = -p;
    }
    Ok(p)
}

/// Orthonormal basis of the null space of a `m × n` matrix of full row rank
/// (columns of the returned `n × (n−m)` matrix).
pub fn null_space_basis(a: &DenseMatrix) -> Result<DenseMatrix, NumericsError> {
    let (m, n) = a.shape();
    if m > n {
        return Err(NumericsError::Dimension(format!(
            "null space basis needs rows <= cols, got {m} × {n}"
        )));
    }
    let qr = HouseholderQr::new(&a.transpose());
    let u = qr.r();
    let scale = (0..m).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
    let rank = (0..m).filter(|&i| u[(i, i)].abs() > RANK_RTOL * scale).count();
    if rank < m {
        return Err(NumericsError::RankDeficient { rank });
    }
    Ok(qr.q().columns(m, n - m).into_owned())
}

/// Smallest eigenvalue of a symmetric matrix (symmetrized on input).
pub fn min_eig_symmetric(h: &DenseMatrix) -> Result<f64, NumericsError> {
    min_eig_pair(h).map(|(mu, _)| mu)
}

/// Smallest eigenvalue with a unit eigenvector.
pub fn min_eig_pair(h: &DenseMatrix) -> Result<(f64, DVector<f64>), NumericsError> {
    if !h.is_square() {
        return Err(NumericsError::Dimension("matrix is not square".into()));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    if h.nrows() == 0 {
        return Ok((f64::INFINITY, DVector::zeros(0)));
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let (idx, mu) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    Ok((mu, eig.eigenvectors.column(idx).into_owned()))
}

/// Square solve through LU with partial pivoting.
pub fn solve_square(a: &DenseMatrix, b: &DVector<f64>) -> Result<DVector<f64>, NumericsError> {
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    a.clone()
        .lu()
        .solve(b)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(NumericsError::Singular)
}

/// Row-major square matrix over a generic scalar, used inside model code.
#[derive(Clone, Debug)]
pub struct SmallMat<S> {
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> SmallMat<S> {
    pub fn zeros(n: usize) -> Self {
        SmallMat {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.n + j]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.at(i, j).value())
    }
}

/// `LDLᵀ` factorization of a symmetric positive definite matrix, generic over
/// the scalar so it can be differentiated through.
#[derive(Clone, Debug)]
pub struct Ldl<S> {
    n: usize,
    l: Vec<S>,
    d: Vec<S>,
}

impl<S: Scalar> Ldl<S> {
    /// Fails when a pivot is not strictly positive.
    pub fn new(a: &SmallMat<S>) -> Option<Self> {
        let n = a.n;
        let mut l = vec![S::zero(); n * n];
        let mut d = vec![S::zero(); n];
        for j in 0..n {
            let mut dj = a.at(j, j);
            for k in 0..j {
                dj -= l[j * n + k] * l[j * n + k] * d[k];
            }
            if !(dj.value() > 0.0) {
                return None;
            }
            d[j] = dj;
            let inv = dj.recip();
            for i in j + 1..n {
                let mut s = a.at(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k] * d[k];
                }
                l[i * n + j] = s * inv;
            }
        }
        Some(Ldl { n, l, d })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let t = self.l[i * n + k] * y[k];
                y[i] -= t;
            }
        }
        for i in 0..n {
            y[i] = y[i] / self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = self.l[k * n + i] * y[k];
                y[i] -= t;
            }
        }
        y
    }
}
