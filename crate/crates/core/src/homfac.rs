//! High-order model-free adaptive control (compact-form dynamic
//! linearization with a weighted history of pseudo-partial-derivative
//! estimates), used as the comparison baseline.

use std::collections::VecDeque;

use crate::ac::ActorWeights;
use crate::error::{Error, Result};
use crate::irl::{EpisodeLog, StepRecord, Termination};
use crate::plant::Plant;
use crate::traj::Reference;

#[derive(Debug, Clone, PartialEq)]
pub struct HomfacParams {
    /// Weights over the previous estimates, most recent first; sums to one.
    pub alpha: Vec<f64>,
    pub eta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub phi0: f64,
    pub epsilon_reset: f64,
}

impl HomfacParams {
    /// Validates the parameters and normalizes `alpha`.
    pub fn new(alpha: Vec<f64>, eta: f64, lambda: f64, mu: f64, rho: f64, phi0: f64, epsilon_reset: f64) -> Result<Self> {
        if alpha.is_empty() || alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Invalid("homfac alpha must be a non-empty list of non-negative weights".into()));
        }
        let total: f64 = alpha.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Invalid("homfac alpha must not sum to zero".into()));
        }
        if !(eta > 0.0 && eta <= 2.0) {
            return Err(Error::Invalid(format!("homfac eta must lie in (0, 2], got {eta}")));
        }
        if !(lambda > 0.0) || !(mu > 0.0) {
            return Err(Error::Invalid("homfac lambda and mu must be positive".into()));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Invalid(format!("homfac rho must lie in (0, 1], got {rho}")));
        }
        if !(phi0.is_finite() && phi0 != 0.0) {
            return Err(Error::Invalid("homfac phi0 must be finite and nonzero".into()));
        }
        if !(epsilon_reset >= 0.0) {
            return Err(Error::Invalid("homfac epsilon_reset must be >= 0".into()));
        }
        let alpha = alpha.iter().map(|a| a / total).collect();
        Ok(Self { alpha, eta, lambda, mu, rho, phi0, epsilon_reset })
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomfacState {
    /// Most recent estimate first.
    pub phi_history: VecDeque<f64>,
    pub u_prev: f64,
    pub y_prev: f64,
    /// `u(t-1) - u(t-2)`.
    pub du_prev: f64,
}

impl HomfacState {
    pub fn new(p: &HomfacParams, u0: f64, y0: f64) -> Self {
        Self { phi_history: std::iter::repeat_n(p.phi0, p.order()).collect(), u_prev: u0, y_prev: y0, du_prev: 0.0 }
    }

    pub fn phi(&self) -> f64 {
        self.phi_history[0]
    }
}

/// One estimator and control update; returns the new command.
pub fn homfac_step(state: &HomfacState, y: f64, y_d_next: f64, p: &HomfacParams) -> Result<(f64, HomfacState)> {
    let du = state.du_prev;
    let dy = y - state.y_prev;
    let weighted: f64 = p.alpha.iter().zip(&state.phi_history).map(|(a, f)| a * f).sum();
    let mut phi = weighted + p.eta * du * (dy - state.phi() * du) / (p.mu + du * du);
    if phi.abs() <= p.epsilon_reset || phi.signum() != p.phi0.signum() {
        phi = p.phi0;
    }
    let u = state.u_prev + p.rho * phi * (y_d_next - y) / (p.lambda + phi * phi);
    if !(u.is_finite() && phi.is_finite()) {
        return Err(Error::Divergence { what: "homfac update", step: None });
    }
    let mut phi_history = state.phi_history.clone();
    phi_history.pop_back();
    phi_history.push_front(phi);
    Ok((u, HomfacState { phi_history, u_prev: u, y_prev: y, du_prev: u - state.u_prev }))
}

/// Lockstep HOMFAC run, logged in the same record format as the IRL loop.
///
/// `signal_scale` multiplies angles before they reach the estimator (for
/// example `180/pi` to run the recursion on degrees). Columns without a
/// HOMFAC meaning are NaN.
pub fn run_homfac_episode<P, T>(
    plant: &mut P,
    refs: &[T],
    params: &[HomfacParams],
    u_limits: &[f64],
    period: f64,
    n_steps: usize,
    signal_scale: f64,
) -> EpisodeLog
where
    P: Plant + ?Sized,
    T: Reference,
{
    let n = params.len();
    assert_eq!(plant.n_joints(), n, "one parameter set per plant joint");
    let mut records: Vec<Vec<StepRecord>> = (0..n).map(|_| Vec::with_capacity(n_steps)).collect();
    let t0 = plant.time();
    let y0 = plant.measure();
    let mut u: Vec<f64> = plant.hold_command().iter().zip(u_limits).map(|(h, l)| h.clamp(-l, *l)).collect();
    let mut states: Vec<HomfacState> = (0..n).map(|j| HomfacState::new(&params[j], u[j], y0[j] * signal_scale)).collect();
    let nan_actor = ActorWeights::new(f64::NAN, f64::NAN, f64::NAN);
    let aborted = |records, joint, step, reason| EpisodeLog {
        records,
        converged_at: vec![None; n],
        termination: Termination::Aborted { joint, step, reason },
    };

    for k in 0..n_steps {
        let t = t0 + k as f64 * period;
        let y = plant.measure();
        let payload = plant.payload_mass();
        for j in 0..n {
            let (r_now, r_next) = match (refs[j].at(t), refs[j].at(t + period)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return aborted(records, j, k, e),
            };
            let (cmd, mut next) = match homfac_step(&states[j], y[j] * signal_scale, r_next * signal_scale, &params[j]) {
                Ok(v) => v,
                Err(e) => return aborted(records, j, k, e.at_step(k)),
            };
            let cmd = cmd.clamp(-u_limits[j], u_limits[j]);
            next.du_prev = cmd - states[j].u_prev;
            next.u_prev = cmd;
            records[j].push(StepRecord {
                t,
                theta: y[j],
                theta_d: r_now,
                epsilon: r_now - y[j],
                eta: cmd - u[j],
                u: cmd,
                s_hat: f64::NAN,
                s_tilde: f64::NAN,
                actor: nan_actor,
                critic_fro: f64::NAN,
                payload_kg: payload,
            });
            u[j] = cmd;
            states[j] = next;
        }
        if let Err(e) = plant.advance(&u, period) {
            return aborted(records, 0, k, e.at_step(k));
        }
    }
    EpisodeLog { records, converged_at: vec![None; n], termination: Termination::Completed }
}
