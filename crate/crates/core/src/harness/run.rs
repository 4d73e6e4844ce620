//! Episode orchestration and log persistence.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ActorInit, ControllerKind, Experiment, ExperimentConfig};
use super::metrics::{compute_metrics, JointMetrics, MetricsContext};
use crate::ac::{greedy_gains, ActorWeights};
use crate::error::{Error, Result};
use crate::homfac::run_homfac_episode;
use crate::irl::{disturb_actor, run_episode, EpisodeLog, JointController, StepRecord, Termination};
use crate::plant::ArmPlant;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub controller: ControllerKind,
    pub seed: u64,
    pub log: EpisodeLog,
    pub metrics: Vec<JointMetrics>,
    /// Initial gains after the actor-initialization rule.
    pub initial_actors: Vec<ActorWeights>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn completed(&self) -> bool {
        self.log.completed()
    }

    pub fn abort_reason(&self) -> Option<String> {
        match &self.log.termination {
            Termination::Completed => None,
            Termination::Aborted { joint, step, reason } => {
                Some(format!("joint {} aborted at step {step}: {reason}", joint + 1))
            }
        }
    }
}

pub fn build_plant(exp: &Experiment) -> Result<ArmPlant> {
    ArmPlant::new(
        exp.joints.iter().map(|j| j.params).collect(),
        exp.joints.iter().map(|j| j.theta0).collect(),
        exp.payload,
        exp.coupled,
        exp.sensor,
        exp.dt_inner,
    )
}

/// Initial actors: greedy gains of each critic, plus seeded noise on the
/// listed joints, or the explicit gains. Noise draws happen in joint order.
pub fn initial_actors(exp: &Experiment, rng: &mut ChaCha8Rng) -> Result<Vec<ActorWeights>> {
    match &exp.config.actor_init {
        ActorInit::Explicit => Ok(exp.joints.iter().map(|j| j.actor.expect("validated")).collect()),
        ActorInit::GreedyPlusNoise { std, joints } => {
            let mut out = Vec::with_capacity(exp.joints.len());
            for (k, j) in exp.joints.iter().enumerate() {
                let base = greedy_gains(&j.critic)
                    .map_err(|e| Error::Invalid(format!("joint {}: initial critic has no greedy policy: {e}", k + 1)))?;
                out.push(if joints.contains(&(k + 1)) && *std > 0.0 { disturb_actor(&base, *std, rng) } else { base });
            }
            Ok(out)
        }
    }
}

/// Runs one episode with the given controller and seed.
pub fn run_experiment(exp: &Experiment, controller: ControllerKind, seed: u64) -> Result<RunOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plant = build_plant(exp)?;
    let refs: Vec<_> = exp.joints.iter().map(|j| j.trajectory.clone()).collect();
    let mut warnings: Vec<String> = exp
        .joints
        .iter()
        .enumerate()
        .filter(|(_, j)| !j.critic_pd)
        .map(|(k, _)| format!("joint {}: initial critic is not positive definite", k + 1))
        .collect();

    let actors = initial_actors(exp, &mut rng)?;
    let log = match controller {
        ControllerKind::Irl => {
            let mut cs: Vec<JointController> = exp
                .joints
                .iter()
                .zip(&actors)
                .map(|(j, a)| {
                    let mut c = JointController::new(j.critic, *a, j.cost, j.u_limit);
                    c.learn = exp.learn;
                    c
                })
                .collect();
            run_episode(&mut plant, &refs, &mut cs, &exp.settings, exp.disturbance, &mut rng)
        }
        ControllerKind::Homfac => {
            let params: Vec<_> = exp.joints.iter().map(|j| j.homfac.clone()).collect();
            let limits: Vec<_> = exp.joints.iter().map(|j| j.u_limit).collect();
            run_homfac_episode(&mut plant, &refs, &params, &limits, exp.homfac_period, exp.homfac_steps, exp.homfac_scale)
        }
    };
    if exp.disturbance.is_some() && controller == ControllerKind::Homfac {
        warnings.push("actor-weight noise has no HOMFAC counterpart and was ignored".into());
    }
    let metrics = metrics_for(exp, &log, controller, seed);
    Ok(RunOutput { controller, seed, log, metrics, initial_actors: actors, warnings })
}

pub fn metrics_for(exp: &Experiment, log: &EpisodeLog, controller: ControllerKind, seed: u64) -> Vec<JointMetrics> {
    let noise_end = exp.noise_end();
    exp.joints
        .iter()
        .enumerate()
        .map(|(k, j)| {
            let ctx = MetricsContext::from_trajectory(&j.trajectory, noise_end);
            let mut m = compute_metrics(&log.records[k], &ctx);
            m.controller = controller.as_str().into();
            m.seed = seed;
            m.joint = k + 1;
            m.convergence_step = log.converged_at.get(k).copied().flatten();
            m.status = match &log.termination {
                Termination::Completed => "completed".into(),
                Termination::Aborted { joint, .. } if *joint == k => "aborted".into(),
                Termination::Aborted { .. } => "partial".into(),
            };
            m
        })
        .collect()
}

/// Column layout of `joint<k>.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub t: f64,
    pub theta: f64,
    pub theta_d: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub u: f64,
    #[serde(rename = "S_hat")]
    pub s_hat: f64,
    #[serde(rename = "S_tilde")]
    pub s_tilde: f64,
    pub w0: f64,
    pub w_nu: f64,
    pub w_2nu: f64,
    pub critic_fro: f64,
    pub payload_kg: f64,
}

impl From<&StepRecord> for CsvRow {
    fn from(r: &StepRecord) -> Self {
        let [w0, w_nu, w_2nu] = r.actor.as_array();
        Self {
            t: r.t,
            theta: r.theta,
            theta_d: r.theta_d,
            epsilon: r.epsilon,
            eta: r.eta,
            u: r.u,
            s_hat: r.s_hat,
            s_tilde: r.s_tilde,
            w0,
            w_nu,
            w_2nu,
            critic_fro: r.critic_fro,
            payload_kg: r.payload_kg,
        }
    }
}

impl From<CsvRow> for StepRecord {
    fn from(r: CsvRow) -> Self {
        StepRecord {
            t: r.t,
            theta: r.theta,
            theta_d: r.theta_d,
            epsilon: r.epsilon,
            eta: r.eta,
            u: r.u,
            s_hat: r.s_hat,
            s_tilde: r.s_tilde,
            actor: ActorWeights::new(r.w0, r.w_nu, r.w_2nu),
            critic_fro: r.critic_fro,
            payload_kg: r.payload_kg,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{}: {e}", path.display()))
}

pub fn write_joint_csv(path: &Path, records: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in records {
        w.serialize(CsvRow::from(r)).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_joint_csv(path: &Path) -> Result<Vec<StepRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize::<CsvRow>().map(|row| row.map(StepRecord::from).map_err(|e| io_err(path, e))).collect()
}

pub fn write_metrics_csv(path: &Path, metrics: &[JointMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for m in metrics {
        w.serialize(m).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<JointMetrics>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| io_err(path, e))).collect()
}

/// Writes `joint<k>.csv`, `metrics.csv` and the effective `config.toml`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (k, recs) in out.log.records.iter().enumerate() {
        write_joint_csv(&dir.join(format!("joint{}.csv", k + 1)), recs)?;
    }
    write_metrics_csv(&dir.join("metrics.csv"), &out.metrics)?;
    let mut effective = config.clone();
    effective.controller = out.controller;
    effective.seed = out.seed;
    let path = dir.join("config.toml");
    fs::write(&path, effective.to_toml()?).map_err(|e| io_err(&path, e))
}

/// Recomputes metrics from a run directory written by [`write_outputs`].
pub fn metrics_from_dir(dir: &Path) -> Result<Vec<JointMetrics>> {
    let path = dir.join("config.toml");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    let exp = cfg.validate()?;
    let mut records = Vec::with_capacity(exp.joints.len());
    for k in 1..=exp.joints.len() {
        records.push(read_joint_csv(&dir.join(format!("joint{k}.csv")))?);
    }
    let full = match cfg.controller {
        ControllerKind::Irl => exp.settings.n_steps,
        ControllerKind::Homfac => exp.homfac_steps,
    };
    let complete = records.iter().all(|r| r.len() == full);
    let log = EpisodeLog {
        records,
        converged_at: vec![None; exp.joints.len()],
        termination: if complete {
            Termination::Completed
        } else {
            Termination::Aborted { joint: usize::MAX, step: 0, reason: Error::Invalid("truncated log".into()) }
        },
    };
    let mut m = metrics_for(&exp, &log, cfg.controller, cfg.seed);
    // Convergence steps are not recoverable from the CSVs; keep the recorded ones.
    if let Ok(saved) = read_metrics_csv(&dir.join("metrics.csv")) {
        for (a, b) in m.iter_mut().zip(saved) {
            a.convergence_step = b.convergence_step;
            a.status = b.status;
        }
    }
    Ok(m)
}
