//! Fixed-step closed-loop simulation: RK4 on the forward dynamics with the
//! torque held over each control period.

use std::io::Write;
use std::time::Instant;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::control::{
    mean_uncertainty, Controller, ControllerKind, CtcController, DefuzzPath, EstimatorSet, FuzzyCtcController, FuzzyEstimator, FuzzyMode, Gains,
    Measurement, NoiseSource, NoiseSpec, Reference, Snr, Trajectory,
};
use crate::error::{Result, SimError};
use crate::robot::{Coords, Derivatives, Robot};

pub const SCHEMA_VERSION: u32 = 1;

/// Per-step trace columns, in order.
pub const CSV_COLUMNS: [&str; 21] = [
    "t", "qd1", "qd2", "qd3", "q1", "q2", "q3", "qdotd1", "qdotd2", "qdotd3", "qdot1", "qdot2", "qdot3", "tau1", "tau2", "tau3", "dq12", "dq13",
    "dqdot12", "dqdot13", "loop_us",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SseMode {
    /// Plain sum over steps and joints.
    #[default]
    Sum,
    /// Sum multiplied by the step size.
    DtWeighted,
}

/// Which controller inputs receive the measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseTarget {
    /// Only the state at which the model terms are evaluated (full model or
    /// fuzzy features); the servo sees the exact state.
    #[default]
    Model,
    /// The servo error as well.
    Everything,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    pub noise: NoiseSpec,
    pub noise_target: NoiseTarget,
    /// Record wall time of every controller call.
    pub timing: bool,
    /// Actuator displacement treated as divergence, metres.
    pub divergence_bound: f64,
    /// Added to the first trajectory sample to form the initial plant state.
    pub initial_offset: [f64; 3],
    pub sse: SseMode,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            noise: NoiseSpec::none(),
            noise_target: NoiseTarget::Model,
            timing: false,
            divergence_bound: 1.0,
            initial_offset: [0.0; 3],
            sse: SseMode::Sum,
        }
    }
}

/// Everything needed to instantiate one controller.
#[derive(Debug, Clone)]
pub struct ControllerSetup<'a> {
    pub kind: ControllerKind,
    pub gains: Gains,
    /// Model used by the full computed-torque controller.
    pub robot: &'a Robot,
    pub estimators: Option<&'a EstimatorSet>,
    /// Width of the uncertain label means at 10 dB, in label sigmas.
    pub rho_10db: f64,
    pub path: DefuzzPath,
}

impl ControllerSetup<'_> {
    /// Builds the controller for a run at `snr`, starting at `start`.
    pub fn build(&self, snr: Snr, start: &Coords) -> Result<Controller> {
        Ok(match self.kind {
            ControllerKind::Pd => Controller::Pd(self.gains),
            ControllerKind::Ctc => Controller::Ctc(CtcController::new(self.gains, self.robot.clone(), *start)),
            ControllerKind::T1 | ControllerKind::T2 => {
                let set = self
                    .estimators
                    .ok_or_else(|| SimError::Config(format!("controller {} needs trained estimators", self.kind)))?;
                let (set, mode) = if self.kind == ControllerKind::T1 {
                    (set.downgrade()?, FuzzyMode::T1)
                } else {
                    (set.with_mean_uncertainty(mean_uncertainty(snr, self.rho_10db))?, FuzzyMode::It2)
                };
                Controller::Fuzzy(FuzzyCtcController::new(self.gains, FuzzyEstimator::new(&set, mode)?, self.path))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub qd: Vector3<f64>,
    pub q: Vector3<f64>,
    pub qdotd: Vector3<f64>,
    pub qdot: Vector3<f64>,
    pub tau: Vector3<f64>,
    /// Features of the measured (possibly noisy) state.
    pub features: [f64; 4],
    pub loop_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub schema_version: u32,
    pub controller: ControllerKind,
    pub snr_db: Snr,
    pub seed: u64,
    pub sse: f64,
    pub steps: usize,
    pub unstable: bool,
    /// Step index at which the run was stopped.
    pub unstable_at: Option<usize>,
    pub failure: Option<String>,
    pub held_estimates: u64,
    pub mean_loop_us: Option<f64>,
    pub p99_loop_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub controller: ControllerKind,
    pub noise: NoiseSpec,
    pub records: Vec<StepRecord>,
    pub sse: f64,
    pub unstable_at: Option<usize>,
    pub failure: Option<String>,
    pub held_estimates: u64,
}

impl SimResult {
    pub fn loop_times(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.loop_us).collect()
    }

    pub fn summary(&self) -> SimSummary {
        let mut times = self.loop_times();
        let (mean, p99) = if times.is_empty() {
            (None, None)
        } else {
            times.sort_by(f64::total_cmp);
            let idx = ((times.len() as f64 * 0.99).ceil() as usize).clamp(1, times.len()) - 1;
            (Some(times.iter().sum::<f64>() / times.len() as f64), Some(times[idx]))
        };
        SimSummary {
            schema_version: SCHEMA_VERSION,
            controller: self.controller,
            snr_db: self.noise.snr_db,
            seed: self.noise.seed,
            sse: self.sse,
            steps: self.records.len(),
            unstable: self.unstable_at.is_some(),
            unstable_at: self.unstable_at,
            failure: self.failure.clone(),
            held_estimates: self.held_estimates,
            mean_loop_us: mean,
            p99_loop_us: p99,
        }
    }

    /// Per-step trace; `loop_us` is empty unless timing was recorded.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CSV_COLUMNS)?;
        let mut row: Vec<String> = Vec::with_capacity(CSV_COLUMNS.len());
        for r in &self.records {
            row.clear();
            row.push(r.t.to_string());
            for v in [&r.qd, &r.q, &r.qdotd, &r.qdot, &r.tau] {
                row.extend(v.iter().map(f64::to_string));
            }
            row.extend(r.features.iter().map(f64::to_string));
            row.push(r.loop_us.map(|x| x.to_string()).unwrap_or_default());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Actuator-space plant integrated on the full model.
#[derive(Debug, Clone)]
pub struct Plant {
    robot: Robot,
    q: Coords,
    pub qa: Vector3<f64>,
    pub qad: Vector3<f64>,
}

impl Plant {
    /// `guess` seeds the passive-joint solve at `qa`.
    pub fn new(robot: Robot, qa: Vector3<f64>, qad: Vector3<f64>, guess: &Coords) -> Result<Self> {
        let q = robot.solve_passive(&qa, guess)?.q;
        Ok(Plant { robot, q, qa, qad })
    }

    pub fn coords(&self) -> &Coords {
        &self.q
    }

    fn accel(&mut self, qa: &Vector3<f64>, qad: &Vector3<f64>, tau: &Vector3<f64>) -> Result<Vector3<f64>> {
        let (terms, q) = self.robot.dynamics_at(qa, qad, &self.q)?;
        self.q = q;
        Ok(terms.acceleration(qad, tau)?)
    }

    /// One RK4 step with constant torque.
    pub fn step(&mut self, tau: &Vector3<f64>, dt: f64) -> Result<()> {
        let (x0, v0) = (self.qa, self.qad);
        let start = self.q;
        let a1 = self.accel(&x0, &v0, tau)?;
        let (x2, v2) = (x0 + v0 * (dt / 2.0), v0 + a1 * (dt / 2.0));
        let a2 = self.accel(&x2, &v2, tau)?;
        let (x3, v3) = (x0 + v2 * (dt / 2.0), v0 + a2 * (dt / 2.0));
        let a3 = self.accel(&x3, &v3, tau)?;
        let (x4, v4) = (x0 + v3 * dt, v0 + a3 * dt);
        let a4 = self.accel(&x4, &v4, tau)?;
        self.qa = x0 + (v0 + v2 * 2.0 + v3 * 2.0 + v4) * (dt / 6.0);
        self.qad = v0 + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (dt / 6.0);
        // re-anchor the passive solve on the accepted state
        self.q = self.robot.solve_passive(&self.qa, &start)?.q;
        Ok(())
    }
}

/// Runs `controller` along `traj` on a plant built from `plant_robot`.
pub fn simulate(mut controller: Controller, traj: &Trajectory, plant_robot: &Robot, opts: &SimOptions) -> Result<SimResult> {
    if traj.is_empty() {
        return Err(SimError::Config("empty trajectory".into()));
    }
    let offset = Vector3::from(opts.initial_offset);
    let mut plant = Plant::new(plant_robot.clone(), traj.q[0] + offset, traj.qd[0], &traj.coords[0])?;
    let (pos_power, vel_power) = traj.signal_power();
    let mut noise = NoiseSource::new(&opts.noise);
    let mut records = Vec::with_capacity(traj.len());
    let mut sse = 0.0;
    let mut unstable_at = None;
    let mut failure = None;
    for k in 0..traj.len() {
        let r = Reference {
            q: traj.q[k],
            qd: traj.qd[k],
            qdd: traj.qdd[k],
        };
        let exact = Measurement {
            q: plant.qa,
            qd: plant.qad,
        };
        let noisy = Measurement {
            q: noise.inject(&plant.qa, pos_power),
            qd: noise.inject(&plant.qad, vel_power),
        };
        let servo_in = match opts.noise_target {
            NoiseTarget::Model => &exact,
            NoiseTarget::Everything => &noisy,
        };
        let started = opts.timing.then(Instant::now);
        let tau = controller.torque(&r, servo_in, &noisy);
        let loop_us = started.map(|s| s.elapsed().as_secs_f64() * 1e6);
        let tau = match tau {
            Ok(t) if t.iter().all(|x| x.is_finite()) => t,
            Ok(_) => {
                unstable_at = Some(k);
                failure = Some("non-finite torque".to_string());
                break;
            }
            Err(e) => {
                unstable_at = Some(k);
                failure = Some(format!("controller: {e}"));
                break;
            }
        };
        sse += (r.q - plant.qa).norm_squared();
        records.push(StepRecord {
            t: traj.time(k),
            qd: r.q,
            q: plant.qa,
            qdotd: r.qd,
            qdot: plant.qad,
            tau,
            features: crate::control::features(&noisy.q, &noisy.qd),
            loop_us,
        });
        if k + 1 == traj.len() {
            break;
        }
        if let Err(e) = plant.step(&tau, traj.dt) {
            unstable_at = Some(k + 1);
            failure = Some(format!("plant: {e}"));
            break;
        }
        if !(plant.qa.amax() <= opts.divergence_bound && plant.qad.iter().all(|v| v.is_finite())) {
            unstable_at = Some(k + 1);
            failure = Some(format!("actuator state left the bound {} m", opts.divergence_bound));
            break;
        }
    }
    if opts.sse == SseMode::DtWeighted {
        sse *= traj.dt;
    }
    Ok(SimResult {
        controller: controller.kind(),
        noise: opts.noise,
        records,
        sse,
        unstable_at,
        failure,
        held_estimates: controller.held_count(),
    })
}

/// Default models: the controller's full model uses finite-difference
/// derivatives, the plant the closed-form ones.
pub fn default_models() -> (Robot, Robot) {
    let plant = Robot::default();
    (plant.with_derivatives(Derivatives::FiniteDifference), plant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{helix_trajectory, HelixParams};

    fn short_traj(robot: &Robot) -> Trajectory {
        let p = HelixParams {
            duration: 0.3,
            ..Default::default()
        };
        helix_trajectory(robot, &p).unwrap()
    }

    #[test]
    fn open_loop_gravity_compensation_holds_still() {
        let rob = Robot::default();
        let start = rob.home();
        let qa = Vector3::zeros();
        let mut plant = Plant::new(rob.clone(), qa, Vector3::zeros(), &start).unwrap();
        let g = rob.dynamics(&start, &Vector3::zeros()).unwrap().g;
        for _ in 0..50 {
            plant.step(&g, 1e-3).unwrap();
        }
        assert!(plant.qa.amax() < 1e-9 && plant.qad.amax() < 1e-7);
    }

    #[test]
    fn falls_under_zero_torque() {
        let rob = Robot::default();
        let mut plant = Plant::new(rob.clone(), Vector3::repeat(0.1), Vector3::zeros(), &rob.home()).unwrap();
        for _ in 0..100 {
            plant.step(&Vector3::zeros(), 1e-3).unwrap();
        }
        // gravity pulls every actuator down by roughly g t^2 / 2 (coupling aside)
        assert!(plant.qa.iter().all(|&x| x < 0.1 - 0.02));
    }

    #[test]
    fn ctc_tracks_with_zero_initial_error() {
        let (model, plant) = default_models();
        let traj = short_traj(&plant);
        let setup = ControllerSetup {
            kind: ControllerKind::Ctc,
            gains: Gains::CTC,
            robot: &model,
            estimators: None,
            rho_10db: 0.25,
            path: DefuzzPath::Early,
        };
        let ctl = setup.build(Snr::INFINITE, &traj.coords[0]).unwrap();
        let res = simulate(ctl, &traj, &plant, &SimOptions::default()).unwrap();
        assert!(res.unstable_at.is_none());
        assert_eq!(res.records.len(), traj.len());
        assert!(res.sse < 1e-6, "sse {}", res.sse);
    }

    #[test]
    fn summary_and_csv_shape() {
        let (_, plant) = default_models();
        let traj = short_traj(&plant);
        let opts = SimOptions {
            timing: true,
            ..Default::default()
        };
        let res = simulate(Controller::Pd(Gains::PD), &traj, &plant, &opts).unwrap();
        let s = res.summary();
        assert_eq!(s.steps, traj.len());
        assert!(s.mean_loop_us.is_some() && s.p99_loop_us.is_some());
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.count(), traj.len());
    }
}
