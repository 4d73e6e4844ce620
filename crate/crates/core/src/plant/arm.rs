//! Per-joint gravity-loaded pendulum with a position-holding servo spring,
//! viscous friction, payload-dependent inertia and a weak acceleration
//! coupling between one pair of neighbouring joints.

use std::f64::consts::TAU;

use super::{PayloadSchedule, Plant};
use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointParams {
    /// kg m^2, without payload.
    pub inertia_base: f64,
    pub link_mass: f64,
    /// Lever arm of the payload for inertia (m).
    pub link_length: f64,
    /// N m s/rad.
    pub viscous_friction: f64,
    /// Gravity torque amplitude of the bare link (N m); zero for a vertical axis.
    pub gravity_gain: f64,
    /// N m per actuation unit; the sign is the actuator polarity.
    pub actuator_gain: f64,
    pub coupling_gain: f64,
    /// N m/rad, pulling towards `servo_home`.
    pub servo_stiffness: f64,
    pub servo_home: f64,
    /// Angle (rad) at which the gravity torque vanishes.
    pub gravity_zero: f64,
}

impl JointParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.inertia_base,
            self.link_mass,
            self.link_length,
            self.viscous_friction,
            self.gravity_gain,
            self.actuator_gain,
            self.coupling_gain,
            self.servo_stiffness,
            self.servo_home,
            self.gravity_zero,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("joint parameters must be finite".into()));
        }
        if self.inertia_base <= 0.0 {
            return Err(Error::Invalid(format!("inertia_base must be positive, got {}", self.inertia_base)));
        }
        if self.link_mass <= 0.0 {
            return Err(Error::Invalid(format!("link_mass must be positive, got {}", self.link_mass)));
        }
        if self.actuator_gain == 0.0 {
            return Err(Error::Invalid("actuator_gain must be nonzero".into()));
        }
        if !(0.0..=0.5).contains(&self.coupling_gain) {
            return Err(Error::Invalid(format!("coupling_gain must lie in [0, 0.5], got {}", self.coupling_gain)));
        }
        if self.link_length < 0.0 || self.viscous_friction < 0.0 || self.gravity_gain < 0.0 || self.servo_stiffness < 0.0 {
            return Err(Error::Invalid("lengths, friction, gravity and stiffness must be >= 0".into()));
        }
        Ok(())
    }

    pub fn inertia(&self, payload: f64) -> f64 {
        self.inertia_base + payload * self.link_length * self.link_length
    }

    /// Gravity amplitude with the payload lumped onto the link's centre of mass.
    pub fn gravity(&self, payload: f64) -> f64 {
        self.gravity_gain * (self.link_mass + payload) / self.link_mass
    }

    /// Torque from everything except the actuator and the coupling.
    fn passive_torque(&self, theta: f64, omega: f64, payload: f64) -> f64 {
        -self.viscous_friction * omega
            - self.servo_stiffness * (theta - self.servo_home)
            - self.gravity(payload) * (theta - self.gravity_zero).sin()
    }

    /// Command that balances the passive torque at rest at `theta`.
    pub fn hold_command(&self, theta: f64, payload: f64) -> f64 {
        -self.passive_torque(theta, 0.0, payload) / self.actuator_gain
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub t: f64,
    pub payload_mass: f64,
}

impl PlantState {
    pub fn at_rest(theta: Vec<f64>) -> Self {
        let n = theta.len();
        Self { theta, omega: vec![0.0; n], t: 0.0, payload_mass: 0.0 }
    }

    fn is_finite(&self) -> bool {
        self.theta.iter().chain(&self.omega).all(|v| v.is_finite())
    }
}

fn accelerations(
    params: &[JointParams],
    coupled: Option<(usize, usize)>,
    theta: &[f64],
    omega: &[f64],
    u: &[f64],
    payload: f64,
) -> Vec<f64> {
    let mut acc: Vec<f64> = params
        .iter()
        .enumerate()
        .map(|(i, p)| (p.actuator_gain * u[i] + p.passive_torque(theta[i], omega[i], payload)) / p.inertia(payload))
        .collect();
    // theta_i'' = f_i / J_i + c_i theta_j'', solved jointly for the pair.
    if let Some((i, j)) = coupled {
        let (ci, cj) = (params[i].coupling_gain, params[j].coupling_gain);
        let (gi, gj) = (acc[i], acc[j]);
        let det = 1.0 - ci * cj;
        acc[i] = (gi + ci * gj) / det;
        acc[j] = (gj + cj * gi) / det;
    }
    acc
}

/// One classical RK4 step of length `dt`, with the payload frozen at `state.t`.
pub fn step_dynamics(
    state: &PlantState,
    u: &[f64],
    dt: f64,
    params: &[JointParams],
    schedule: &PayloadSchedule,
    coupled: Option<(usize, usize)>,
) -> Result<PlantState> {
    let m = schedule.mass_at(state.t);
    let n = params.len();
    let f = |th: &[f64], om: &[f64]| accelerations(params, coupled, th, om, u, m);
    let axpy = |x: &[f64], k: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a + k * b).collect() };

    let (th, om) = (&state.theta, &state.omega);
    let k1t = om.clone();
    let k1o = f(th, om);
    let (th2, om2) = (axpy(th, 0.5 * dt, &k1t), axpy(om, 0.5 * dt, &k1o));
    let k2t = om2.clone();
    let k2o = f(&th2, &om2);
    let (th3, om3) = (axpy(th, 0.5 * dt, &k2t), axpy(om, 0.5 * dt, &k2o));
    let k3t = om3.clone();
    let k3o = f(&th3, &om3);
    let (th4, om4) = (axpy(th, dt, &k3t), axpy(om, dt, &k3o));
    let k4t = om4.clone();
    let k4o = f(&th4, &om4);

    let mut next = PlantState {
        theta: vec![0.0; n],
        omega: vec![0.0; n],
        t: state.t + dt,
        payload_mass: schedule.mass_at(state.t + dt),
    };
    for i in 0..n {
        next.theta[i] = th[i] + dt / 6.0 * (k1t[i] + 2.0 * k2t[i] + 2.0 * k3t[i] + k4t[i]);
        next.omega[i] = om[i] + dt / 6.0 * (k1o[i] + 2.0 * k2o[i] + 2.0 * k3o[i] + k4o[i]);
    }
    if !next.is_finite() {
        return Err(Error::Divergence { what: "plant integration", step: None });
    }
    Ok(next)
}

/// Encoder model: a fixed sampling rate and a whole number of counts per turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensor {
    pub rate_hz: f64,
    pub counts_per_turn: f64,
}

impl Sensor {
    pub fn quantum(&self) -> f64 {
        TAU / self.counts_per_turn
    }

    /// Rounds down to a whole count.
    pub fn quantize(&self, theta: f64) -> f64 {
        let q = self.quantum();
        (theta / q).floor() * q
    }
}

/// Quantized angles of `state`; the arm plant holds them between sensor ticks.
pub fn observe(state: &PlantState, sensor: &Sensor) -> Vec<f64> {
    state.theta.iter().map(|&th| sensor.quantize(th)).collect()
}

#[derive(Debug, Clone)]
pub struct ArmPlant {
    params: Vec<JointParams>,
    schedule: PayloadSchedule,
    coupled: Option<(usize, usize)>,
    sensor: Sensor,
    dt: f64,
    sensor_every: u64,
    ticks: u64,
    state: PlantState,
    held: Vec<f64>,
}

impl ArmPlant {
    pub fn new(
        params: Vec<JointParams>,
        theta0: Vec<f64>,
        schedule: PayloadSchedule,
        coupled: Option<(usize, usize)>,
        sensor: Sensor,
        dt_inner: f64,
    ) -> Result<Self> {
        if params.is_empty() || params.len() != theta0.len() {
            return Err(Error::Invalid("need one initial angle per joint".into()));
        }
        for p in &params {
            p.validate()?;
        }
        schedule.validate()?;
        if let Some((i, j)) = coupled {
            if i == j || i >= params.len() || j >= params.len() {
                return Err(Error::Invalid(format!("coupled joints ({i}, {j}) out of range")));
            }
        }
        if !(dt_inner > 0.0) {
            return Err(Error::Invalid("dt_inner must be positive".into()));
        }
        let per = 1.0 / (sensor.rate_hz * dt_inner);
        if !(per >= 1.0) || (per - per.round()).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "sensor period must be a whole number of integrator steps (got {per})"
            )));
        }
        let mut state = PlantState::at_rest(theta0);
        state.payload_mass = schedule.mass_at(0.0);
        let held = observe(&state, &sensor);
        Ok(Self { params, schedule, coupled, sensor, dt: dt_inner, sensor_every: per.round() as u64, ticks: 0, state, held })
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    pub fn params(&self) -> &[JointParams] {
        &self.params
    }

    pub fn dt_inner(&self) -> f64 {
        self.dt
    }
}

impl Plant for ArmPlant {
    fn n_joints(&self) -> usize {
        self.params.len()
    }

    fn time(&self) -> f64 {
        self.state.t
    }

    fn measure(&self) -> Vec<f64> {
        self.held.clone()
    }

    fn advance(&mut self, u: &[f64], duration: f64) -> Result<()> {
        let steps = duration / self.dt;
        if (steps - steps.round()).abs() > 1e-6 {
            return Err(Error::Precondition(format!(
                "interval {duration} s is not a whole number of {} s integrator steps",
                self.dt
            )));
        }
        for _ in 0..steps.round() as u64 {
            let mut next = step_dynamics(&self.state, u, self.dt, &self.params, &self.schedule, self.coupled)?;
            self.ticks += 1;
            // Integer tick count keeps long runs free of time drift.
            next.t = self.ticks as f64 * self.dt;
            next.payload_mass = self.schedule.mass_at(next.t);
            self.state = next;
            if self.ticks.is_multiple_of(self.sensor_every) {
                self.held = observe(&self.state, &self.sensor);
            }
        }
        Ok(())
    }

    fn hold_command(&self) -> Vec<f64> {
        let m = self.state.payload_mass;
        self.params.iter().zip(&self.state.theta).map(|(p, &th)| p.hold_command(th, m)).collect()
    }

    fn payload_mass(&self) -> f64 {
        self.state.payload_mass
    }
}
