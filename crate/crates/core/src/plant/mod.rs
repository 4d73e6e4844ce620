//! Simulated plants: a payload-loaded multi-joint arm and a scalar linear toy.

mod arm;
mod lti;

pub use arm::{observe, step_dynamics, ArmPlant, JointParams, PlantState, Sensor, GRAVITY};
pub use lti::{scalar_lti_oracle, LtiValueIteration, OracleSolution, ScalarLti, ORACLE_MAX_ITER, ORACLE_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything the controllers can drive in lockstep, one command per joint.
pub trait Plant {
    fn n_joints(&self) -> usize;

    fn time(&self) -> f64;

    /// Angles as the controller sees them (after sensing effects).
    fn measure(&self) -> Vec<f64>;

    /// Applies `u` (held constant) for `duration` seconds.
    fn advance(&mut self, u: &[f64], duration: f64) -> Result<()>;

    /// Command that keeps the plant at rest in its current configuration.
    fn hold_command(&self) -> Vec<f64>;

    fn payload_mass(&self) -> f64 {
        0.0
    }
}

/// Payload carried at the end effector as a function of time (kg).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayloadSchedule {
    #[default]
    None,
    Constant { mass: f64 },
    /// Zero before `step_time`, `mass` from `step_time` on.
    Step { mass: f64, step_time: f64 },
    /// Linear rise from zero at `ramp_start` to `mass` at `ramp_end`.
    Ramp { mass: f64, ramp_start: f64, ramp_end: f64 },
}

impl PayloadSchedule {
    pub fn validate(&self) -> Result<()> {
        let mass = match *self {
            PayloadSchedule::None => 0.0,
            PayloadSchedule::Constant { mass } | PayloadSchedule::Step { mass, .. } => mass,
            PayloadSchedule::Ramp { mass, ramp_start, ramp_end } => {
                if !(ramp_start < ramp_end) {
                    return Err(Error::Invalid(format!(
                        "payload ramp_start ({ramp_start}) must precede ramp_end ({ramp_end})"
                    )));
                }
                mass
            }
        };
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::Invalid(format!("payload mass must be finite and >= 0, got {mass}")));
        }
        Ok(())
    }

    pub fn mass_at(&self, t: f64) -> f64 {
        match *self {
            PayloadSchedule::None => 0.0,
            PayloadSchedule::Constant { mass } => mass,
            PayloadSchedule::Step { mass, step_time } => {
                if t >= step_time {
                    mass
                } else {
                    0.0
                }
            }
            PayloadSchedule::Ramp { mass, ramp_start, ramp_end } => {
                mass * ((t - ramp_start) / (ramp_end - ramp_start)).clamp(0.0, 1.0)
            }
        }
    }
}
