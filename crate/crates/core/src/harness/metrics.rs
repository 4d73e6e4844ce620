//! Per-joint tracking metrics computed from an episode log.

use serde::{Deserialize, Serialize};

use crate::irl::StepRecord;
use crate::traj::{TrajectoryKind, TrajectorySpec};

/// Settling band as a fraction of the step size (or the reference span).
pub const SETTLING_FRACTION: f64 = 0.02;

/// Reference features the metrics need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsContext {
    /// Signed step size and step time, for step trajectories.
    pub step: Option<(f64, f64)>,
    /// Half-width of the settling band (rad).
    pub band: f64,
    pub duration: f64,
    /// End of the actor-noise window (s); zero without noise.
    pub noise_end: f64,
}

impl MetricsContext {
    pub fn from_trajectory(spec: &TrajectorySpec, noise_end: f64) -> Self {
        let step = match (spec.step_size(), spec.step_time()) {
            (Some(s), Some(t)) => Some((s, t)),
            _ => None,
        };
        let span = match step {
            Some((s, _)) => s.abs(),
            None => reference_span(spec),
        };
        Self { step, band: SETTLING_FRACTION * span, duration: spec.duration, noise_end }
    }
}

fn reference_span(spec: &TrajectorySpec) -> f64 {
    if let TrajectoryKind::PiecewiseSamples { values, .. } = &spec.kind {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return hi - lo;
    }
    let n = 2000;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=n {
        let t = spec.duration * i as f64 / n as f64;
        if let Ok(v) = crate::traj::sample(spec, t) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    hi - lo
}

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointMetrics {
    pub controller: String,
    pub seed: u64,
    /// 1-based joint index.
    pub joint: usize,
    /// Empty for non-step trajectories.
    pub overshoot_pct: Option<f64>,
    /// Empty when the error never settles.
    pub settling_s: Option<f64>,
    pub settled: bool,
    /// Settling time counted from the end of the noise window.
    pub settling_after_noise_s: Option<f64>,
    pub rms_rad: f64,
    pub final10_rms_rad: f64,
    pub final20_max_abs_rad: f64,
    pub post_noise_max_abs_rad: f64,
    pub convergence_step: Option<usize>,
    pub samples: usize,
    pub status: String,
}

fn rms(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Percent overshoot beyond the final reference after the step, direction-aware
/// and never negative.
pub fn percent_overshoot(records: &[StepRecord], step_size: f64, step_time: f64) -> f64 {
    let Some(last) = records.last() else { return 0.0 };
    let final_ref = last.theta_d;
    let dir = step_size.signum();
    let peak = records
        .iter()
        .filter(|r| r.t >= step_time)
        .map(|r| dir * (r.theta - final_ref))
        .fold(0.0, f64::max);
    100.0 * peak / step_size.abs()
}

/// Time from `from` until `|e|` stays within `band`, or `None` if the last
/// sample is outside it.
pub fn settling_time(records: &[StepRecord], band: f64, from: f64) -> Option<f64> {
    let tail: Vec<&StepRecord> = records.iter().filter(|r| r.t >= from).collect();
    if tail.is_empty() {
        return None;
    }
    match tail.iter().rposition(|r| !(r.epsilon.abs() <= band)) {
        None => Some(0.0),
        Some(i) if i + 1 == tail.len() => None,
        Some(i) => Some(tail[i + 1].t - from),
    }
}

/// Metrics for one joint. `records` may be shorter than the full horizon
/// after an abort.
pub fn compute_metrics(records: &[StepRecord], ctx: &MetricsContext) -> JointMetrics {
    let n = records.len();
    let window = |frac: f64| {
        let start = ctx.duration * (1.0 - frac);
        records.iter().filter(move |r| r.t >= start - 1e-9).map(|r| r.epsilon)
    };
    let from = ctx.step.map_or(0.0, |(_, t)| t);
    let settling = settling_time(records, ctx.band, from);
    JointMetrics {
        controller: String::new(),
        seed: 0,
        joint: 0,
        overshoot_pct: ctx.step.map(|(s, t)| percent_overshoot(records, s, t)),
        settled: settling.is_some(),
        settling_s: settling,
        settling_after_noise_s: settling_time(records, ctx.band, ctx.noise_end.max(from)),
        rms_rad: rms(records.iter().map(|r| r.epsilon)),
        final10_rms_rad: rms(window(0.1)),
        final20_max_abs_rad: window(0.2).map(f64::abs).fold(f64::NAN, f64::max),
        post_noise_max_abs_rad: records
            .iter()
            .filter(|r| r.t >= ctx.noise_end)
            .map(|r| r.epsilon.abs())
            .fold(f64::NAN, f64::max),
        convergence_step: None,
        samples: n,
        status: "completed".into(),
    }
}
