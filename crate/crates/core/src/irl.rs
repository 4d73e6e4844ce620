//! The online value-iteration loop: actuate, measure, adapt the critic, then
//! the actor, once per control interval, for every joint in lockstep.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::ac::{
    actor_update, converged, correction, critic_target_with, critic_update, greedy_gains, value, ActorWeights,
    AugmentedState, CostWeights, CriticWeights, ErrorWindow, LearningRates, Quadrature, TuningMode,
};
use crate::error::{Error, Result};
use crate::plant::Plant;
use crate::traj::Reference;

/// Loop settings shared by every joint of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSettings {
    /// Control interval (s).
    pub nu: f64,
    pub n_steps: usize,
    pub rates: LearningRates,
    pub mode: TuningMode,
    pub quadrature: Quadrature,
    /// Convergence gate threshold on successive critic differences.
    pub sigma: f64,
    /// Number of successive differences the gate inspects.
    pub window: usize,
}

impl LoopSettings {
    pub fn new(nu: f64, n_steps: usize, rates: LearningRates) -> Self {
        Self {
            nu,
            n_steps,
            rates,
            mode: TuningMode::Signed,
            quadrature: Quadrature::Trapezoid,
            sigma: 1e-4,
            window: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub u: f64,
    pub x: ErrorWindow,
    pub critic: CriticWeights,
    pub actor: ActorWeights,
    pub step: usize,
    pub converged_at: Option<usize>,
}

impl ControllerState {
    pub fn new(critic: CriticWeights, actor: ActorWeights) -> Self {
        Self { u: 0.0, x: ErrorWindow::default(), critic, actor, step: 0, converged_at: None }
    }
}

/// Quantities produced by one adaptation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateInfo {
    pub s_hat: f64,
    pub s_tilde: f64,
    /// Actor target, evaluated with the post-update critic.
    pub u_tilde: f64,
}

/// Critic first, then the actor towards the updated critic's greedy gains.
///
/// `now` is the window and the correction that was actually applied over the
/// interval; `next_x` is the window measured at its end.
pub fn update_step(
    state: &ControllerState,
    now: (ErrorWindow, f64),
    next_x: ErrorWindow,
    cw: &CostWeights,
    settings: &LoopSettings,
) -> Result<(ControllerState, UpdateInfo)> {
    let at = state.step;
    let (s_hat, s_tilde) = critic_terms(state, now, next_x, cw, settings);
    let v = AugmentedState::new(now.0, now.1);
    let critic = critic_update(&state.critic, &v, s_hat, s_tilde, settings.rates.alpha_c(), settings.mode)
        .map_err(|e| e.at_step(at))?;
    let gains = greedy_gains(&critic).map_err(|e| e.at_step(at))?;
    let u_tilde = correction(&gains, &now.0);
    let eta_hat = correction(&state.actor, &now.0);
    let actor = actor_update(&state.actor, &now.0, eta_hat, u_tilde, settings.rates.alpha_a(), settings.mode)
        .map_err(|e| e.at_step(at))?;
    let next = ControllerState { critic, actor, step: at + 1, ..*state };
    Ok((next, UpdateInfo { s_hat, s_tilde, u_tilde }))
}

/// `(S^, S~)` for a transition; the next correction comes from the undisturbed actor.
fn critic_terms(
    state: &ControllerState,
    now: (ErrorWindow, f64),
    next_x: ErrorWindow,
    cw: &CostWeights,
    settings: &LoopSettings,
) -> (f64, f64) {
    let s_hat = value(&state.critic, &AugmentedState::new(now.0, now.1));
    let next = (next_x, correction(&state.actor, &next_x));
    let s_tilde = critic_target_with(settings.quadrature, cw, now, next, &state.critic, settings.nu);
    (s_hat, s_tilde)
}

/// Adds an independent `N(0, sigma^2)` draw to each gain.
pub fn disturb_actor<R: Rng + ?Sized>(a: &ActorWeights, sigma: f64, rng: &mut R) -> ActorWeights {
    if sigma == 0.0 {
        return *a;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
    let [w0, w1, w2] = a.as_array();
    let d0 = normal.sample(rng);
    let d1 = normal.sample(rng);
    let d2 = normal.sample(rng);
    ActorWeights::new(w0 + d0, w1 + d1, w2 + d2)
}

/// Per-step actor-weight noise during the first part of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub sigma: f64,
    /// Noise is applied at control instants `t < until`.
    pub until: f64,
}

/// One joint's controller: its state, cost, saturation and gate history.
#[derive(Debug, Clone)]
pub struct JointController {
    pub state: ControllerState,
    pub cost: CostWeights,
    /// Symmetric saturation on `u`.
    pub u_limit: f64,
    /// When false the weights stay at their initial values.
    pub learn: bool,
    history: VecDeque<CriticWeights>,
}

impl JointController {
    pub fn new(critic: CriticWeights, actor: ActorWeights, cost: CostWeights, u_limit: f64) -> Self {
        Self { state: ControllerState::new(critic, actor), cost, u_limit, learn: true, history: VecDeque::new() }
    }

    /// Restarts the gate and the step counter, keeping the learned weights.
    pub fn reset_episode(&mut self) {
        self.state.step = 0;
        self.state.converged_at = None;
        self.history.clear();
    }

    fn gate(&mut self, settings: &LoopSettings) {
        self.history.push_back(self.state.critic);
        while self.history.len() > settings.window + 1 {
            self.history.pop_front();
        }
        if self.state.converged_at.is_none() && converged(self.history.make_contiguous(), settings.sigma, settings.window)
        {
            self.state.converged_at = Some(self.state.step);
        }
    }
}

/// One logged control step of one joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub theta: f64,
    pub theta_d: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub u: f64,
    pub s_hat: f64,
    pub s_tilde: f64,
    /// Gains that produced `eta` (including any disturbance).
    pub actor: ActorWeights,
    pub critic_fro: f64,
    pub payload_kg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    Aborted { joint: usize, step: usize, reason: Error },
}

#[derive(Debug, Clone)]
pub struct EpisodeLog {
    pub records: Vec<Vec<StepRecord>>,
    pub converged_at: Vec<Option<usize>>,
    pub termination: Termination,
}

impl EpisodeLog {
    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }
}

/// Runs the lockstep loop for `settings.n_steps` intervals or until an abort.
///
/// Each controller's `u` starts from the plant's hold command and its window is
/// backfilled with the initial error. After a joint's gate fires it keeps
/// actuating with frozen weights.
pub fn run_episode<P, T, R>(
    plant: &mut P,
    refs: &[T],
    controllers: &mut [JointController],
    settings: &LoopSettings,
    disturbance: Option<Disturbance>,
    rng: &mut R,
) -> EpisodeLog
where
    P: Plant + ?Sized,
    T: Reference,
    R: Rng + ?Sized,
{
    let n = controllers.len();
    assert_eq!(plant.n_joints(), n, "one controller per plant joint");
    assert_eq!(refs.len(), n, "one reference per joint");
    let mut records: Vec<Vec<StepRecord>> = (0..n).map(|_| Vec::with_capacity(settings.n_steps)).collect();
    let abort = |records: Vec<Vec<StepRecord>>, cs: &[JointController], joint, step, reason| EpisodeLog {
        records,
        converged_at: cs.iter().map(|c| c.state.converged_at).collect(),
        termination: Termination::Aborted { joint, step, reason },
    };

    let t0 = plant.time();
    let hold = plant.hold_command();
    let mut theta = plant.measure();
    for (j, c) in controllers.iter_mut().enumerate() {
        let r0 = match refs[j].at(t0) {
            Ok(r) => r,
            Err(e) => return abort(records, controllers, j, 0, e),
        };
        c.reset_episode();
        c.state.u = hold[j].clamp(-c.u_limit, c.u_limit);
        c.state.x = ErrorWindow::backfilled(r0 - theta[j]);
        c.gate(settings);
    }

    let mut u = vec![0.0; n];
    let mut eta = vec![0.0; n];
    let mut applied = vec![ActorWeights::default(); n];
    for l in 0..settings.n_steps {
        let t = t0 + l as f64 * settings.nu;
        let payload = plant.payload_mass();
        for (j, c) in controllers.iter_mut().enumerate() {
            applied[j] = match disturbance {
                Some(d) if t < d.until => disturb_actor(&c.state.actor, d.sigma, rng),
                _ => c.state.actor,
            };
            let prev = c.state.u;
            c.state.u = (prev + correction(&applied[j], &c.state.x)).clamp(-c.u_limit, c.u_limit);
            eta[j] = c.state.u - prev;
            u[j] = c.state.u;
        }
        if let Err(e) = plant.advance(&u, settings.nu) {
            return abort(records, controllers, 0, l, e.at_step(l));
        }
        let theta_next = plant.measure();
        let t_next = t + settings.nu;
        for (j, c) in controllers.iter_mut().enumerate() {
            let r_now = refs[j].at(t);
            let r_next = refs[j].at(t_next);
            let (r_now, r_next) = match (r_now, r_next) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return abort(records, controllers, j, l, e),
            };
            let now = (c.state.x, eta[j]);
            let next_x = c.state.x.shift(r_next - theta_next[j]);
            let (s_hat, s_tilde) = if c.learn && c.state.converged_at.is_none() {
                match update_step(&c.state, now, next_x, &c.cost, settings) {
                    Ok((s, info)) => {
                        c.state = s;
                        (info.s_hat, info.s_tilde)
                    }
                    Err(e) => return abort(records, controllers, j, l, e),
                }
            } else {
                c.state.step += 1;
                critic_terms(&c.state, now, next_x, &c.cost, settings)
            };
            if c.learn {
                c.gate(settings);
            }
            records[j].push(StepRecord {
                t,
                theta: theta[j],
                theta_d: r_now,
                epsilon: now.0.e0,
                eta: eta[j],
                u: c.state.u,
                s_hat,
                s_tilde,
                actor: applied[j],
                critic_fro: c.state.critic.frobenius(),
                payload_kg: payload,
            });
            c.state.x = next_x;
        }
        theta = theta_next;
    }
    EpisodeLog {
        records,
        converged_at: controllers.iter().map(|c| c.state.converged_at).collect(),
        termination: Termination::Completed,
    }
}
