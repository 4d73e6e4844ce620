//! Scalar linear toy plant and the exact value-iteration oracle for it.

use nalgebra::{Matrix3, Matrix3x4, Matrix4, SMatrix, Vector3};

use super::Plant;
use crate::ac::{ActorWeights, Quadrature, EPS_INV};
use crate::error::{Error, Result};

/// `theta(k+1) = a theta(k) + b u(k)`, one update per control interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarLti {
    pub a: f64,
    pub b: f64,
    theta: f64,
    t: f64,
}

impl ScalarLti {
    pub fn new(a: f64, b: f64, theta0: f64) -> Self {
        Self { a, b, theta: theta0, t: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl Plant for ScalarLti {
    fn n_joints(&self) -> usize {
        1
    }

    fn time(&self) -> f64 {
        self.t
    }

    fn measure(&self) -> Vec<f64> {
        vec![self.theta]
    }

    fn advance(&mut self, u: &[f64], duration: f64) -> Result<()> {
        self.theta = self.a * self.theta + self.b * u[0];
        self.t += duration;
        if !self.theta.is_finite() {
            return Err(Error::Divergence { what: "scalar plant", step: None });
        }
        Ok(())
    }

    fn hold_command(&self) -> Vec<f64> {
        vec![(1.0 - self.a) * self.theta / self.b]
    }
}

/// Exact value iteration for the error window driven by [`ScalarLti`] under
/// a constant reference and the incremental control `u(k) = u(k-1) + eta(k)`.
///
/// The window obeys `X' = A X + B eta` with
/// `A = [[1+a, -a, 0], [1, 0, 0], [0, 1, 0]]` and `B = [-b, 0, 0]'`.
#[derive(Debug, Clone)]
pub struct LtiValueIteration {
    m: Matrix3x4<f64>,
    q: Matrix3<f64>,
    r: f64,
    nu: f64,
    rule: Quadrature,
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub kernel: Matrix4<f64>,
    pub gains: ActorWeights,
    pub iterations: usize,
}

pub const ORACLE_TOL: f64 = 1e-10;
pub const ORACLE_MAX_ITER: usize = 1_000_000;

impl LtiValueIteration {
    pub fn new(a: f64, b: f64, q: Matrix3<f64>, r: f64, nu: f64, rule: Quadrature) -> Self {
        let m = Matrix3x4::new(1.0 + a, -a, 0.0, -b, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        Self { m, q, r, nu, rule }
    }

    /// Greedy gains of a kernel, zero while the eta-eta block is still empty.
    pub fn gains(h: &Matrix4<f64>) -> Vector3<f64> {
        if h[(3, 3)] <= EPS_INV {
            return Vector3::zeros();
        }
        -h.fixed_view::<3, 1>(0, 3).into_owned() / h[(3, 3)]
    }

    /// One application of the Bellman map: the kernel of
    /// `int U + S_h(X', K X')` with `K` greedy for `h`.
    pub fn next_kernel(&self, h: &Matrix4<f64>) -> Matrix4<f64> {
        let k = Self::gains(h);
        let mut ik = SMatrix::<f64, 4, 3>::zeros();
        ik.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
        ik.fixed_view_mut::<1, 3>(3, 0).copy_from(&k.transpose());
        let mut now = Matrix4::zeros();
        now.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.q);
        now[(3, 3)] = self.r;
        let closed = ik.transpose() * h * ik;
        let next_cost = self.q + k * k.transpose() * self.r;
        let (w_now, w_next) = match self.rule {
            Quadrature::Trapezoid => (0.5 * self.nu, 0.5 * self.nu),
            Quadrature::LeftEndpoint => (self.nu, 0.0),
        };
        now * w_now + self.m.transpose() * (next_cost * w_next + closed) * self.m
    }

    /// Iterates from the zero kernel until successive kernels agree to [`ORACLE_TOL`].
    pub fn solve(&self) -> Result<OracleSolution> {
        let mut h = Matrix4::zeros();
        for it in 1..=ORACLE_MAX_ITER {
            let next = self.next_kernel(&h);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { what: "oracle value iteration", step: Some(it) });
            }
            let done = (next - h).abs().max() < ORACLE_TOL;
            h = next;
            if done {
                let k = Self::gains(&h);
                return Ok(OracleSolution { kernel: h, gains: ActorWeights::new(k[0], k[1], k[2]), iterations: it });
            }
        }
        Err(Error::OracleFailure(ORACLE_MAX_ITER))
    }

    /// The first `n` kernels of the sequence, starting with the zero kernel.
    pub fn sequence(&self, n: usize) -> Vec<Matrix4<f64>> {
        let mut out = vec![Matrix4::zeros()];
        for _ in 0..n {
            let next = self.next_kernel(out.last().unwrap());
            out.push(next);
        }
        out
    }
}

/// Optimal kernel and gains for the toy plant under the trapezoid rule.
pub fn scalar_lti_oracle(a: f64, b: f64, q: Matrix3<f64>, r: f64, nu: f64) -> Result<OracleSolution> {
    if b == 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::Precondition(format!("oracle needs finite a and nonzero b, got a={a}, b={b}")));
    }
    LtiValueIteration::new(a, b, q, r, nu, Quadrature::Trapezoid).solve()
}
