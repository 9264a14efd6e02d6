use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::robot::{Coords, Robot, ToolPose};

/// Task-space helix: the tool rises linearly while its tilt vector traces a
/// circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HelixParams {
    /// Tool height at `t = 0`.
    pub z0: f64,
    /// Total rise over `duration`.
    pub amplitude_z: f64,
    /// Radius of the tilt circle, radians.
    pub tilt_radius: f64,
    /// Period of the tilt circle, seconds.
    pub period: f64,
    pub duration: f64,
    pub dt: f64,
}

impl Default for HelixParams {
    fn default() -> Self {
        HelixParams {
            z0: 0.07,
            amplitude_z: 0.05,
            tilt_radius: 0.1,
            period: 2.0,
            duration: 10.0,
            dt: 1e-3,
        }
    }
}

impl HelixParams {
    pub fn pose(&self, t: f64) -> ToolPose {
        let ang = 2.0 * PI * t / self.period;
        ToolPose::new(
            self.z0 + self.amplitude_z * t / self.duration,
            self.tilt_radius * ang.cos(),
            self.tilt_radius * ang.sin(),
        )
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.duration >= self.dt && self.period > 0.0 && self.tilt_radius >= 0.0) {
            return Err(SimError::Config(format!("invalid helix parameters {self:?}")));
        }
        Ok(())
    }
}

/// Desired actuator motion sampled every `dt`, with the consistent full
/// coordinates at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub q: Vec<Vector3<f64>>,
    pub qd: Vec<Vector3<f64>>,
    pub qdd: Vec<Vector3<f64>>,
    pub coords: Vec<Coords>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Mean square of positions and of velocities over all samples and joints.
    pub fn signal_power(&self) -> (f64, f64) {
        let ms = |v: &[Vector3<f64>]| v.iter().map(|x| x.norm_squared()).sum::<f64>() / (3 * v.len()) as f64;
        (ms(&self.q), ms(&self.qd))
    }
}

/// Maps the helix through inverse kinematics; rates and accelerations come
/// from five-point central differences of the joint-space samples.
pub fn helix_trajectory(robot: &Robot, params: &HelixParams) -> Result<Trajectory> {
    params.validate()?;
    let n = params.samples() + 1;
    let dt = params.dt;
    // two extra samples on each side for the difference stencils
    let mut coords = Vec::with_capacity(n + 4);
    let mut guess = robot.home();
    for k in 0..n + 4 {
        let t = (k as f64 - 2.0) * dt;
        let q = robot.inverse_kinematics(&params.pose(t), &guess)?;
        guess = q;
        coords.push(q);
    }
    let qa = |k: usize| coords[k].fixed_rows::<3>(0).into_owned();
    let mut traj = Trajectory {
        dt,
        q: Vec::with_capacity(n),
        qd: Vec::with_capacity(n),
        qdd: Vec::with_capacity(n),
        coords: Vec::with_capacity(n),
    };
    for k in 2..n + 2 {
        let (m2, m1, c, p1, p2) = (qa(k - 2), qa(k - 1), qa(k), qa(k + 1), qa(k + 2));
        traj.q.push(c);
        traj.qd.push((m2 - m1 * 8.0 + p1 * 8.0 - p2) / (12.0 * dt));
        traj.qdd.push((-m2 + m1 * 16.0 - c * 30.0 + p1 * 16.0 - p2) / (12.0 * dt * dt));
        traj.coords.push(coords[k]);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(tilt: f64, rise: f64) -> HelixParams {
        HelixParams {
            tilt_radius: tilt,
            amplitude_z: rise,
            duration: 0.5,
            dt: 1e-3,
            ..Default::default()
        }
    }

    #[test]
    fn pure_ramp_has_identical_channels() {
        let rob = Robot::default();
        let tr = helix_trajectory(&rob, &short(0.0, 0.05)).unwrap();
        assert_eq!(tr.len(), 501);
        for (q, qd) in tr.q.iter().zip(&tr.qd) {
            assert!((q[0] - q[1]).abs() < 1e-11 && (q[0] - q[2]).abs() < 1e-11);
            assert!((qd[0] - 0.1).abs() < 1e-6);
        }
    }

    #[test]
    fn rates_are_consistent_with_positions() {
        let rob = Robot::default();
        let tr = helix_trajectory(&rob, &short(0.1, 0.05)).unwrap();
        for k in 1..tr.len() - 1 {
            let fd = (tr.q[k + 1] - tr.q[k - 1]) / (2.0 * tr.dt);
            assert!((fd - tr.qd[k]).amax() <= 1e-3 * tr.qd[k].amax().max(1e-3));
            let fdd = (tr.qd[k + 1] - tr.qd[k - 1]) / (2.0 * tr.dt);
            assert!((fdd - tr.qdd[k]).amax() <= 1e-2 * tr.qdd[k].amax().max(1e-2));
        }
        for q in &tr.coords {
            assert!(rob.constraints(q).unwrap().amax() <= 1e-10);
        }
    }
}
