//! Declarative experiment description. Files use degrees and pounds; the
//! validated [`Experiment`] works in radians and kilograms.

use std::path::Path;

use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use crate::ac::{ActorWeights, CostWeights, CriticWeights, LearningRates, Quadrature, TuningMode};
use crate::error::{Error, Result};
use crate::homfac::HomfacParams;
use crate::irl::{Disturbance, LoopSettings};
use crate::plant::{JointParams, PayloadSchedule, Sensor};
use crate::traj::{TrajectoryKind, TrajectorySpec};

pub const KG_PER_LB: f64 = 0.45359237;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Irl,
    Homfac,
}

impl ControllerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::Irl => "irl",
            ControllerKind::Homfac => "homfac",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment number, 1 to 5.
    pub id: u32,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub controller: ControllerKind,
    #[serde(default)]
    pub seed: u64,
    pub rates: RatesConfig,
    pub learning: LearningConfig,
    #[serde(default)]
    pub actor_init: ActorInit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub payload: PayloadConfig,
    #[serde(default)]
    pub plant: PlantConfig,
    #[serde(default)]
    pub homfac: HomfacConfig,
    pub joints: Vec<JointConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    /// Control interval (s).
    pub nu: f64,
    /// Number of control intervals.
    pub steps: usize,
    #[serde(default = "default_sensor_hz")]
    pub sensor_hz: f64,
    #[serde(default = "default_dt_inner")]
    pub dt_inner: f64,
    #[serde(default = "default_counts")]
    pub counts_per_turn: f64,
}

fn default_sensor_hz() -> f64 {
    50.0
}

fn default_dt_inner() -> f64 {
    1e-3
}

fn default_counts() -> f64 {
    3_686_400.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningConfig {
    pub alpha_c: f64,
    pub alpha_a: f64,
    #[serde(default)]
    pub mode: TuningMode,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    /// Set to false to run the initial gains without adaptation.
    #[serde(default = "default_true")]
    pub enabled: bool,
}

fn default_sigma() -> f64 {
    1e-4
}

fn default_window() -> usize {
    16
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActorInit {
    /// Greedy gains of the initial critic plus `N(0, std^2)` on the listed joints (1-based).
    GreedyPlusNoise { std: f64, joints: Vec<usize> },
    /// Gains taken from each joint's `actor` entry.
    Explicit,
}

impl Default for ActorInit {
    fn default() -> Self {
        ActorInit::GreedyPlusNoise { std: 0.1, joints: vec![1, 2, 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Fraction of the episode, from its start, during which the actor is disturbed.
    pub fraction: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayloadConfig {
    #[default]
    None,
    Constant { mass_lb: f64 },
    Step { mass_lb: f64, step_time: f64 },
    Ramp { mass_lb: f64, ramp_start: f64, ramp_end: f64 },
}

impl PayloadConfig {
    pub fn schedule(&self) -> PayloadSchedule {
        match *self {
            PayloadConfig::None => PayloadSchedule::None,
            PayloadConfig::Constant { mass_lb } => PayloadSchedule::Constant { mass: mass_lb * KG_PER_LB },
            PayloadConfig::Step { mass_lb, step_time } => PayloadSchedule::Step { mass: mass_lb * KG_PER_LB, step_time },
            PayloadConfig::Ramp { mass_lb, ramp_start, ramp_end } => {
                PayloadSchedule::Ramp { mass: mass_lb * KG_PER_LB, ramp_start, ramp_end }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    /// 1-based pair of joints with acceleration coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupled_joints: Option<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalUnit {
    #[default]
    Degrees,
    Radians,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomfacConfig {
    pub alpha: Vec<f64>,
    pub eta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub epsilon_reset: f64,
    /// Control period (s).
    pub period: f64,
    /// Unit of the angles fed to the estimator.
    #[serde(default)]
    pub signal_unit: SignalUnit,
}

impl Default for HomfacConfig {
    fn default() -> Self {
        Self {
            alpha: vec![0.5, 0.25, 0.125, 0.125],
            eta: 0.8,
            lambda: 0.1,
            mu: 0.01,
            rho: 0.8,
            epsilon_reset: 1e-5,
            period: 0.2,
            signal_unit: SignalUnit::Degrees,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub initial_deg: f64,
    /// Symmetric bound on the command `u`.
    #[serde(default = "default_u_limit")]
    pub u_limit: f64,
    pub critic: [[f64; 4]; 4],
    pub q: [[f64; 3]; 3],
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actor: Option<[f64; 3]>,
    pub homfac_phi0: f64,
    pub params: JointParamsConfig,
    pub trajectory: TrajectoryConfig,
}

fn default_u_limit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointParamsConfig {
    pub inertia_base: f64,
    pub link_mass: f64,
    pub link_length: f64,
    pub viscous_friction: f64,
    pub gravity_gain: f64,
    pub actuator_gain: f64,
    #[serde(default)]
    pub coupling_gain: f64,
    #[serde(default)]
    pub servo_stiffness: f64,
    #[serde(default)]
    pub gravity_zero_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    ExpGrowDecay {
        amplitude_deg: f64,
        time_constant: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset_deg: Option<f64>,
    },
    LinearRamp {
        slope_deg_per_s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset_deg: Option<f64>,
    },
    StepHold {
        step_time: f64,
        step_deg: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset_deg: Option<f64>,
    },
    Sinusoid {
        amplitude_deg: f64,
        frequency_hz: f64,
        #[serde(default)]
        phase_rad: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset_deg: Option<f64>,
    },
    PiecewiseSamples {
        times: Vec<f64>,
        values_deg: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset_deg: Option<f64>,
    },
}

impl TrajectoryConfig {
    /// Builds the spec; a missing offset defaults to the joint's initial angle.
    pub fn spec(&self, initial_deg: f64, duration: f64) -> Result<TrajectorySpec> {
        let r = f64::to_radians;
        let (kind, offset) = match self {
            TrajectoryConfig::ExpGrowDecay { amplitude_deg, time_constant, offset_deg } => (
                TrajectoryKind::ExpGrowDecay { amplitude: r(*amplitude_deg), time_constant: *time_constant },
                offset_deg,
            ),
            TrajectoryConfig::LinearRamp { slope_deg_per_s, offset_deg } => {
                (TrajectoryKind::LinearRamp { slope: r(*slope_deg_per_s) }, offset_deg)
            }
            TrajectoryConfig::StepHold { step_time, step_deg, offset_deg } => {
                (TrajectoryKind::StepHold { step_time: *step_time, step_value: r(*step_deg) }, offset_deg)
            }
            TrajectoryConfig::Sinusoid { amplitude_deg, frequency_hz, phase_rad, offset_deg } => (
                TrajectoryKind::Sinusoid { amplitude: r(*amplitude_deg), frequency: *frequency_hz, phase: *phase_rad },
                offset_deg,
            ),
            TrajectoryConfig::PiecewiseSamples { times, values_deg, offset_deg } => (
                TrajectoryKind::PiecewiseSamples { times: times.clone(), values: values_deg.iter().map(|v| r(*v)).collect() },
                offset_deg,
            ),
        };
        TrajectorySpec::new(kind, r(offset.unwrap_or(initial_deg)), duration)
    }
}

/// One joint of a validated experiment, in SI units.
#[derive(Debug, Clone)]
pub struct JointSetup {
    pub name: String,
    pub theta0: f64,
    pub u_limit: f64,
    pub critic: CriticWeights,
    pub cost: CostWeights,
    pub actor: Option<ActorWeights>,
    pub params: JointParams,
    pub trajectory: TrajectorySpec,
    pub homfac: HomfacParams,
    /// False when the initial critic is not positive definite (reported, not rejected).
    pub critic_pd: bool,
}

/// Validated experiment ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub joints: Vec<JointSetup>,
    pub settings: LoopSettings,
    pub learn: bool,
    pub sensor: Sensor,
    pub dt_inner: f64,
    pub payload: PayloadSchedule,
    pub coupled: Option<(usize, usize)>,
    pub disturbance: Option<Disturbance>,
    pub homfac_period: f64,
    pub homfac_steps: usize,
    pub homfac_scale: f64,
}

impl Experiment {
    pub fn duration(&self) -> f64 {
        self.settings.nu * self.settings.n_steps as f64
    }

    /// Noise window end (s), or zero without noise.
    pub fn noise_end(&self) -> f64 {
        self.disturbance.map_or(0.0, |d| d.until)
    }
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Invalid(format!("config parse error: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Invalid(format!("config serialize error: {e}")))
    }

    /// Checks every invariant and converts to runtime units.
    pub fn validate(&self) -> Result<Experiment> {
        if !(1..=5).contains(&self.id) {
            return Err(invalid("id", format!("experiment id must be 1..=5, got {}", self.id)));
        }
        let want = if self.id == 5 { 1 } else { 4 };
        if self.joints.len() != want {
            return Err(invalid("joints", format!("experiment {} controls {want} joint(s), got {}", self.id, self.joints.len())));
        }
        let rt = &self.rates;
        positive("rates.nu", rt.nu)?;
        positive("rates.sensor_hz", rt.sensor_hz)?;
        positive("rates.dt_inner", rt.dt_inner)?;
        positive("rates.counts_per_turn", rt.counts_per_turn)?;
        if rt.steps == 0 {
            return Err(invalid("rates.steps", "must be at least 1"));
        }
        if rt.dt_inner > rt.nu / 10.0 {
            return Err(invalid("rates.dt_inner", "must be at most nu / 10"));
        }
        if rt.sensor_hz < 1.0 / rt.nu {
            return Err(invalid("rates.sensor_hz", "must be at least the control rate"));
        }
        let duration = rt.nu * rt.steps as f64;

        let lr = &self.learning;
        let rates = LearningRates::new(lr.alpha_c, lr.alpha_a).map_err(|e| invalid("learning", e))?;
        if !(lr.sigma >= 0.0) {
            return Err(invalid("learning.sigma", "must be >= 0"));
        }
        if lr.window == 0 {
            return Err(invalid("learning.window", "must be at least 1"));
        }
        let settings = LoopSettings {
            nu: rt.nu,
            n_steps: rt.steps,
            rates,
            mode: lr.mode,
            quadrature: lr.quadrature,
            sigma: lr.sigma,
            window: lr.window,
        };

        if let ActorInit::GreedyPlusNoise { std, joints } = &self.actor_init {
            if !(*std >= 0.0) {
                return Err(invalid("actor_init.std", "must be >= 0"));
            }
            if let Some(j) = joints.iter().find(|&&j| j == 0 || j > self.joints.len()) {
                return Err(invalid("actor_init.joints", format!("joint {j} out of range")));
            }
        }

        let disturbance = match &self.noise {
            None => None,
            Some(n) => {
                if !(n.fraction > 0.0 && n.fraction <= 1.0) {
                    return Err(invalid("noise.fraction", format!("must lie in (0, 1], got {}", n.fraction)));
                }
                if !(n.variance >= 0.0) {
                    return Err(invalid("noise.variance", "must be >= 0"));
                }
                Some(Disturbance { sigma: n.variance.sqrt(), until: n.fraction * duration })
            }
        };

        let payload = self.payload.schedule();
        payload.validate().map_err(|e| invalid("payload", e))?;

        let coupled = match self.plant.coupled_joints {
            None => None,
            Some([a, b]) => {
                if a == b || a == 0 || b == 0 || a > self.joints.len() || b > self.joints.len() {
                    return Err(invalid("plant.coupled_joints", format!("invalid pair [{a}, {b}]")));
                }
                Some((a - 1, b - 1))
            }
        };

        let h = &self.homfac;
        positive("homfac.period", h.period)?;
        let homfac_steps = (duration / h.period).round() as usize;
        if ((duration / h.period) - homfac_steps as f64).abs() > 1e-9 || homfac_steps == 0 {
            return Err(invalid("homfac.period", "must divide the episode duration"));
        }

        let mut joints = Vec::with_capacity(self.joints.len());
        for (k, j) in self.joints.iter().enumerate() {
            let key = |f: &str| format!("joints[{k}].{f}");
            let critic = CriticWeights::from_rows(j.critic).map_err(|e| invalid(&key("critic"), e))?;
            let q = Matrix3::from_fn(|r, c| j.q[r][c]);
            let cost = CostWeights::new(q, j.r).map_err(|e| invalid(&key("q"), e))?;
            positive(&key("u_limit"), j.u_limit)?;
            let p = &j.params;
            let params = JointParams {
                inertia_base: p.inertia_base,
                link_mass: p.link_mass,
                link_length: p.link_length,
                viscous_friction: p.viscous_friction,
                gravity_gain: p.gravity_gain,
                actuator_gain: p.actuator_gain,
                coupling_gain: p.coupling_gain,
                servo_stiffness: p.servo_stiffness,
                servo_home: j.initial_deg.to_radians(),
                gravity_zero: p.gravity_zero_deg.to_radians(),
            };
            params.validate().map_err(|e| invalid(&key("params"), e))?;
            let trajectory = j.trajectory.spec(j.initial_deg, duration).map_err(|e| invalid(&key("trajectory"), e))?;
            let actor = match (&self.actor_init, j.actor) {
                (ActorInit::Explicit, None) => return Err(invalid(&key("actor"), "required by actor_init.rule = explicit")),
                (_, a) => a.map(|[a0, a1, a2]| ActorWeights::new(a0, a1, a2)),
            };
            let homfac = HomfacParams::new(h.alpha.clone(), h.eta, h.lambda, h.mu, h.rho, j.homfac_phi0, h.epsilon_reset)
                .map_err(|e| invalid(&format!("homfac (joint {})", k + 1), e))?;
            joints.push(JointSetup {
                name: if j.name.is_empty() { format!("joint{}", k + 1) } else { j.name.clone() },
                theta0: j.initial_deg.to_radians(),
                u_limit: j.u_limit,
                critic_pd: critic.is_positive_definite(),
                critic,
                cost,
                actor,
                params,
                trajectory,
                homfac,
            });
        }

        Ok(Experiment {
            config: self.clone(),
            joints,
            settings,
            learn: lr.enabled,
            sensor: Sensor { rate_hz: rt.sensor_hz, counts_per_turn: rt.counts_per_turn },
            dt_inner: rt.dt_inner,
            payload,
            coupled,
            disturbance,
            homfac_period: h.period,
            homfac_steps,
            homfac_scale: match h.signal_unit {
                SignalUnit::Degrees => 180.0 / std::f64::consts::PI,
                SignalUnit::Radians => 1.0,
            },
        })
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Kernel as a matrix; handy for tests and reports.
pub fn critic_matrix(rows: &[[f64; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| rows[i][j])
}
