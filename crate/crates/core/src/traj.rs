//! Joint-space reference trajectories. Angles are radians, times seconds.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind {
    /// Rises as `A (1 - e^{-t/tau})` for three time constants, then decays from there.
    ExpGrowDecay { amplitude: f64, time_constant: f64 },
    LinearRamp { slope: f64 },
    /// Right-continuous: the step value applies from `step_time` on.
    StepHold { step_time: f64, step_value: f64 },
    Sinusoid { amplitude: f64, frequency: f64, phase: f64 },
    /// Linear interpolation between `(time, value)` knots; held flat past the ends.
    PiecewiseSamples { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub offset: f64,
    pub duration: f64,
}

/// Slack on the domain check so that `l * nu` round-off at the horizon is accepted.
const TIME_SLACK: f64 = 1e-9;

impl TrajectorySpec {
    pub fn new(kind: TrajectoryKind, offset: f64, duration: f64) -> Result<Self> {
        let spec = Self { kind, offset, duration };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Invalid(format!("trajectory duration must be positive, got {}", self.duration)));
        }
        if !self.offset.is_finite() {
            return Err(Error::Invalid("trajectory offset must be finite".into()));
        }
        match &self.kind {
            TrajectoryKind::ExpGrowDecay { amplitude, time_constant } => {
                if !(*time_constant > 0.0) || !amplitude.is_finite() {
                    return Err(Error::Invalid(format!("time_constant must be positive, got {time_constant}")));
                }
            }
            TrajectoryKind::LinearRamp { slope } => {
                if !slope.is_finite() {
                    return Err(Error::Invalid("ramp slope must be finite".into()));
                }
            }
            TrajectoryKind::StepHold { step_time, step_value } => {
                if !step_time.is_finite() || !step_value.is_finite() {
                    return Err(Error::Invalid("step parameters must be finite".into()));
                }
            }
            TrajectoryKind::Sinusoid { amplitude, frequency, phase } => {
                if !(amplitude.is_finite() && frequency.is_finite() && phase.is_finite()) || *frequency < 0.0 {
                    return Err(Error::Invalid("sinusoid parameters must be finite with frequency >= 0".into()));
                }
            }
            TrajectoryKind::PiecewiseSamples { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Invalid("piecewise samples need matching, non-empty times and values".into()));
                }
                if times.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Invalid("piecewise sample times must increase strictly".into()));
                }
            }
        }
        Ok(())
    }

    /// Size of the discontinuity for step references.
    pub fn step_size(&self) -> Option<f64> {
        match self.kind {
            TrajectoryKind::StepHold { step_value, .. } => Some(step_value),
            _ => None,
        }
    }

    pub fn step_time(&self) -> Option<f64> {
        match self.kind {
            TrajectoryKind::StepHold { step_time, .. } => Some(step_time),
            _ => None,
        }
    }
}

pub fn sample(spec: &TrajectorySpec, t: f64) -> Result<f64> {
    if !(t >= -TIME_SLACK && t <= spec.duration + TIME_SLACK) {
        return Err(Error::OutOfRange { t, duration: spec.duration });
    }
    let t = t.clamp(0.0, spec.duration);
    let rel = match &spec.kind {
        TrajectoryKind::ExpGrowDecay { amplitude, time_constant: tau } => {
            let peak_time = 3.0 * tau;
            if t <= peak_time {
                amplitude * (1.0 - (-t / tau).exp())
            } else {
                amplitude * (1.0 - (-3.0f64).exp()) * (-(t - peak_time) / tau).exp()
            }
        }
        TrajectoryKind::LinearRamp { slope } => slope * t,
        TrajectoryKind::StepHold { step_time, step_value } => {
            if t >= *step_time {
                *step_value
            } else {
                0.0
            }
        }
        TrajectoryKind::Sinusoid { amplitude, frequency, phase } => amplitude * (TAU * frequency * t + phase).sin(),
        TrajectoryKind::PiecewiseSamples { times, values } => {
            return Ok(spec.offset + interpolate(times, values, t));
        }
    };
    Ok(spec.offset + rel)
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&x| x <= t);
    if k == 0 {
        return values[0];
    }
    if k == times.len() {
        return values[k - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let s = (t - t0) / (t1 - t0);
    values[k - 1] + s * (values[k] - values[k - 1])
}

/// Anything that yields a reference angle at a time.
pub trait Reference {
    fn at(&self, t: f64) -> Result<f64>;
}

impl Reference for TrajectorySpec {
    fn at(&self, t: f64) -> Result<f64> {
        sample(self, t)
    }
}
