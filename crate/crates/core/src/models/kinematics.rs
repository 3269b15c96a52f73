//! Planar point kinematics built from rotated offsets.
//!
//! Every body point is the main-body position `(x, z)` (coordinates 0 and 1)
//! plus a sum of terms `s · R(θ) · o`, where `θ` is a sum of angle
//! coordinates, `s` is either 1 or a length coordinate, and `o` a fixed
//! offset. Positions, Jacobians and the velocity-product bias `J̇ q̇` follow in
//! closed form from this description.

use crate::numerics::Scalar;

/// One rotated-offset term of a [`PointExpr`].
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    /// Coordinates whose sum is the rotation angle.
    pub angles: Vec<usize>,
    /// Optional coordinate multiplying the rotated offset.
    pub scale: Option<usize>,
    pub offset: [f64; 2],
}

impl Term {
    pub fn rigid(angles: &[usize], offset: [f64; 2]) -> Self {
        Term {
            angles: angles.to_vec(),
            scale: None,
            offset,
        }
    }

    pub fn scaled(angles: &[usize], scale: usize, offset: [f64; 2]) -> Self {
        Term {
            angles: angles.to_vec(),
            scale: Some(scale),
            offset,
        }
    }
}

/// A point rigidly or prismatically attached to the main body.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PointExpr {
    pub terms: Vec<Term>,
}

impl PointExpr {
    pub fn base() -> Self {
        PointExpr { terms: Vec::new() }
    }

    pub fn with(mut self, term: Term) -> Self {
        self.terms.push(term);
        self
    }
}

/// Position and first-order kinematics of a point at one state.
#[derive(Clone, Debug)]
pub struct PointKinematics<S> {
    pub pos: [S; 2],
    /// `∂p/∂q_i` for every coordinate, as `(x, z)` pairs.
    pub jac: Vec<[S; 2]>,
    /// `J q̇`.
    pub vel: [S; 2],
    /// `J̇ q̇`.
    pub bias: [S; 2],
}

impl PointExpr {
    pub fn position<S: Scalar>(&self, q: &[S]) -> [S; 2] {
        let mut p = [q[0], q[1]];
        for t in &self.terms {
            let theta = t.angles.iter().fold(S::zero(), |a, &i| a + q[i]);
            let (s, c) = theta.sin_cos();
            let mut v = [c * t.offset[0] - s * t.offset[1], s * t.offset[0] + c * t.offset[1]];
            if let Some(k) = t.scale {
                v = [v[0] * q[k], v[1] * q[k]];
            }
            p[0] += v[0];
            p[1] += v[1];
        }
        p
    }

    pub fn kinematics<S: Scalar>(&self, q: &[S], qd: &[S]) -> PointKinematics<S> {
        let n = q.len();
        let zero = S::zero();
        let mut pos = [q[0], q[1]];
        let mut jac = vec![[zero; 2]; n];
        jac[0][0] = S::one();
        jac[1][1] = S::one();
        let mut vel = [qd[0], qd[1]];
        let mut bias = [zero; 2];
        for t in &self.terms {
            let theta = t.angles.iter().fold(zero, |a, &i| a + q[i]);
            let theta_dot = t.angles.iter().fold(zero, |a, &i| a + qd[i]);
            let (s, c) = theta.sin_cos();
            let [ox, oz] = t.offset;
            // v = R(θ)o and its angle derivative v' = R(θ)(−oz, ox).
            let v = [c * ox - s * oz, s * ox + c * oz];
            let vp = [-(s * ox) - c * oz, c * ox - s * oz];
            let (len, len_dot) = match t.scale {
                Some(k) => (q[k], qd[k]),
                None => (S::one(), zero),
            };
            for d in 0..2 {
                pos[d] += v[d] * len;
                vel[d] += vp[d] * len * theta_dot;
                bias[d] -= v[d] * len * theta_dot * theta_dot;
                if t.scale.is_some() {
                    vel[d] += v[d] * len_dot;
                    bias[d] += vp[d] * theta_dot * len_dot * 2.0;
                }
            }
            for &i in &t.angles {
                jac[i][0] += vp[0] * len;
                jac[i][1] += vp[1] * len;
            }
            if let Some(k) = t.scale {
                jac[k][0] += v[0];
                jac[k][1] += v[1];
            }
        }
        PointKinematics { pos, jac, vel, bias }
    }

    /// `∂(J q̇)/∂q_i` for every coordinate, together with `J q̇`.
    pub fn velocity_partials<S: Scalar>(&self, q: &[S], qd: &[S]) -> ([S; 2], Vec<[S; 2]>) {
        let zero = S::zero();
        let mut vel = [qd[0], qd[1]];
        let mut partials = vec![[zero; 2]; q.len()];
        for t in &self.terms {
            let theta = t.angles.iter().fold(zero, |a, &i| a + q[i]);
            let theta_dot = t.angles.iter().fold(zero, |a, &i| a + qd[i]);
            let (s, c) = theta.sin_cos();
            let [ox, oz] = t.offset;
            let v = [c * ox - s * oz, s * ox + c * oz];
            let vp = [-(s * ox) - c * oz, c * ox - s * oz];
            let (len, len_dot) = match t.scale {
                Some(k) => (q[k], qd[k]),
                None => (S::one(), zero),
            };
            for d in 0..2 {
                vel[d] += vp[d] * len * theta_dot + v[d] * len_dot;
                let by_angle = vp[d] * len_dot - v[d] * len * theta_dot;
                for &i in &t.angles {
                    partials[i][d] += by_angle;
                }
                if let Some(k) = t.scale {
                    partials[k][d] += vp[d] * theta_dot;
                }
            }
        }
        (vel, partials)
    }
}
