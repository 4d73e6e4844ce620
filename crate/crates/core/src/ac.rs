//! Actor-critic building blocks: the error window, the quadratic critic
//! kernel, the linear actor, and the stateless tuning laws that connect them.

use nalgebra::{Matrix3, Matrix4, RowVector3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard on the critic's eta-eta block before it is inverted.
pub const EPS_INV: f64 = 1e-8;

/// Tolerance used when checking that a critic kernel is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Tracking errors at t, t-nu and t-2nu (radians).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorWindow {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
}

impl ErrorWindow {
    pub fn new(e0: f64, e1: f64, e2: f64) -> Self {
        Self { e0, e1, e2 }
    }

    /// Window with the missing history filled by the current error.
    pub fn backfilled(e: f64) -> Self {
        Self::new(e, e, e)
    }

    /// Pushes a new sample in front; the oldest one drops out.
    pub fn shift(&self, e_new: f64) -> Self {
        Self::new(e_new, self.e0, self.e1)
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.e0, self.e1, self.e2)
    }

    pub fn is_finite(&self) -> bool {
        self.e0.is_finite() && self.e1.is_finite() && self.e2.is_finite()
    }
}

/// The critic's input `V = [X; eta]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AugmentedState {
    pub x: ErrorWindow,
    pub eta: f64,
}

impl AugmentedState {
    pub fn new(x: ErrorWindow, eta: f64) -> Self {
        Self { x, eta }
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.x.e0, self.x.e1, self.x.e2, self.eta)
    }
}

/// Symmetric 4x4 kernel of the quadratic value `S = 0.5 V' M V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticWeights {
    m: Matrix4<f64>,
}

impl CriticWeights {
    /// Validates symmetry, finiteness and the eta-eta inversion guard.
    ///
    /// Positive definiteness is deliberately not required here; callers can
    /// inspect it with [`CriticWeights::min_leading_minor`].
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("critic matrix has non-finite entries".into()));
        }
        let asym = (m - m.transpose()).abs().max();
        if asym > SYMMETRY_TOL {
            return Err(Error::Invalid(format!("critic matrix is not symmetric (max |M - M'| = {asym:e})")));
        }
        if m[(3, 3)] <= EPS_INV {
            return Err(Error::SingularBlock { value: m[(3, 3)], guard: EPS_INV, step: None });
        }
        Ok(Self { m: symmetrize(&m) })
    }

    pub fn identity() -> Self {
        Self { m: Matrix4::identity() }
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn m_xx(&self) -> Matrix3<f64> {
        self.m.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn m_xeta(&self) -> Vector3<f64> {
        self.m.fixed_view::<3, 1>(0, 3).into_owned()
    }

    pub fn m_etax(&self) -> RowVector3<f64> {
        self.m.fixed_view::<1, 3>(3, 0).into_owned()
    }

    pub fn m_etaeta(&self) -> f64 {
        self.m[(3, 3)]
    }

    pub fn frobenius(&self) -> f64 {
        self.m.norm()
    }

    /// Smallest of the four leading principal minors; positive iff the kernel is PD.
    pub fn min_leading_minor(&self) -> f64 {
        leading_minors4(&self.m).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_leading_minor() > 0.0
    }

    /// Returns `k * self`; used by the scale-invariance checks.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.m * k)
    }
}

/// Gain row `[w0, w_nu, w_2nu]` of the linear actor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActorWeights {
    pub w: RowVector3<f64>,
}

impl ActorWeights {
    pub fn new(w0: f64, w_nu: f64, w_2nu: f64) -> Self {
        Self { w: RowVector3::new(w0, w_nu, w_2nu) }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w[0], self.w[1], self.w[2]]
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite())
    }
}

/// Utility weights: `U = 0.5 (X' Q X + R eta^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    q: Matrix3<f64>,
    r: f64,
}

impl CostWeights {
    pub fn new(q: Matrix3<f64>, r: f64) -> Result<Self> {
        if q.iter().any(|v| !v.is_finite()) || !r.is_finite() {
            return Err(Error::Invalid("cost weights must be finite".into()));
        }
        if (q - q.transpose()).abs().max() > SYMMETRY_TOL {
            return Err(Error::Invalid("Q is not symmetric".into()));
        }
        let minors = leading_minors3(&q);
        if minors.iter().any(|&d| d <= 0.0) {
            return Err(Error::Invalid(format!("Q is not positive definite (leading minors {minors:?})")));
        }
        if r <= 0.0 {
            return Err(Error::Invalid(format!("R must be positive, got {r}")));
        }
        Ok(Self { q, r })
    }

    pub fn identity() -> Self {
        Self { q: Matrix3::identity(), r: 1.0 }
    }

    pub fn q(&self) -> &Matrix3<f64> {
        &self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRates {
    alpha_c: f64,
    alpha_a: f64,
}

impl LearningRates {
    pub fn new(alpha_c: f64, alpha_a: f64) -> Result<Self> {
        for (name, v) in [("alpha_c", alpha_c), ("alpha_a", alpha_a)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Invalid(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(Self { alpha_c, alpha_a })
    }

    pub fn alpha_c(&self) -> f64 {
        self.alpha_c
    }

    pub fn alpha_a(&self) -> f64 {
        self.alpha_a
    }
}

/// Scalar factor multiplying the tuning-law update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningMode {
    /// Signed residual, i.e. the gradient of the squared error.
    #[default]
    Signed,
    /// Half the squared residual, as the laws are printed.
    Literal,
}

impl TuningMode {
    fn factor(self, residual: f64) -> f64 {
        match self {
            TuningMode::Signed => residual,
            TuningMode::Literal => 0.5 * residual * residual,
        }
    }
}

/// Rule for the running-cost integral over one control interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Left Riemann sum (forward Euler).
    LeftEndpoint,
}

impl Quadrature {
    /// Integrates the utility over uniformly spaced samples spanning `nu` seconds.
    pub fn integrate(self, cw: &CostWeights, samples: &[(ErrorWindow, f64)], nu: f64) -> Result<f64> {
        if samples.len() < 2 {
            return Err(Error::Precondition(format!(
                "integral needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        let h = nu / (samples.len() - 1) as f64;
        let u: Vec<f64> = samples.iter().map(|(x, eta)| utility(cw, x, *eta)).collect();
        let n = u.len();
        Ok(match self {
            Quadrature::Trapezoid => h * (0.5 * (u[0] + u[n - 1]) + u[1..n - 1].iter().sum::<f64>()),
            Quadrature::LeftEndpoint => h * u[..n - 1].iter().sum::<f64>(),
        })
    }
}

pub fn correction(a: &ActorWeights, x: &ErrorWindow) -> f64 {
    a.w.dot(&x.as_vector().transpose())
}

pub fn value(c: &CriticWeights, v: &AugmentedState) -> f64 {
    let v = v.as_vector();
    0.5 * v.dot(&(c.m * v))
}

pub fn utility(cw: &CostWeights, x: &ErrorWindow, eta: f64) -> f64 {
    let x = x.as_vector();
    0.5 * (x.dot(&(cw.q * x)) + cw.r * eta * eta)
}

/// Trapezoidal integral of the utility over `[t, t + nu]`.
pub fn integral_utility(cw: &CostWeights, samples: &[(ErrorWindow, f64)], nu: f64) -> Result<f64> {
    Quadrature::Trapezoid.integrate(cw, samples, nu)
}

/// Two-sample target `S~ = int U + S(next)`.
pub fn critic_target(
    cw: &CostWeights,
    now: (ErrorWindow, f64),
    next: (ErrorWindow, f64),
    c: &CriticWeights,
    nu: f64,
) -> f64 {
    critic_target_with(Quadrature::Trapezoid, cw, now, next, c, nu)
}

pub fn critic_target_with(
    rule: Quadrature,
    cw: &CostWeights,
    now: (ErrorWindow, f64),
    next: (ErrorWindow, f64),
    c: &CriticWeights,
    nu: f64,
) -> f64 {
    let integral = rule
        .integrate(cw, &[now, next], nu)
        .expect("two samples always satisfy the quadrature precondition");
    integral + value(c, &AugmentedState::new(next.0, next.1))
}

pub fn critic_update(
    c: &CriticWeights,
    v: &AugmentedState,
    s_hat: f64,
    s_tilde: f64,
    alpha_c: f64,
    mode: TuningMode,
) -> Result<CriticWeights> {
    let vv = v.as_vector();
    let m = symmetrize(&(c.m - (alpha_c * mode.factor(s_hat - s_tilde)) * vv * vv.transpose()));
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergence { what: "critic update", step: None });
    }
    Ok(CriticWeights { m })
}

/// Minimizer of the critic over eta: `-m_etax / m_etaeta`.
pub fn greedy_gains(c: &CriticWeights) -> Result<ActorWeights> {
    let d = c.m_etaeta();
    if d <= EPS_INV {
        return Err(Error::SingularBlock { value: d, guard: EPS_INV, step: None });
    }
    Ok(ActorWeights { w: -c.m_etax() / d })
}

pub fn actor_target(c: &CriticWeights, x: &ErrorWindow) -> Result<f64> {
    Ok(correction(&greedy_gains(c)?, x))
}

pub fn actor_update(
    a: &ActorWeights,
    x: &ErrorWindow,
    eta_hat: f64,
    u_tilde: f64,
    alpha_a: f64,
    mode: TuningMode,
) -> Result<ActorWeights> {
    let w = a.w - (alpha_a * mode.factor(eta_hat - u_tilde)) * x.as_vector().transpose();
    let out = ActorWeights { w };
    if !out.is_finite() {
        return Err(Error::Divergence { what: "actor update", step: None });
    }
    Ok(out)
}

/// True when each of the last `window` successive Frobenius differences is at most `sigma`.
pub fn converged(history: &[CriticWeights], sigma: f64, window: usize) -> bool {
    if window == 0 || history.len() < window + 1 {
        return false;
    }
    history[history.len() - window - 1..]
        .windows(2)
        .all(|p| (p[1].m - p[0].m).norm() <= sigma)
}

pub fn symmetrize(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

fn leading_minors3(q: &Matrix3<f64>) -> [f64; 3] {
    [
        q[(0, 0)],
        q.fixed_view::<2, 2>(0, 0).determinant(),
        q.determinant(),
    ]
}

fn leading_minors4(m: &Matrix4<f64>) -> [f64; 4] {
    [
        m[(0, 0)],
        m.fixed_view::<2, 2>(0, 0).determinant(),
        m.fixed_view::<3, 3>(0, 0).determinant(),
        m.determinant(),
    ]
}
