use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::RobotError;

/// Rigid bodies: three nuts, nine spherical-joint elements, the star.
pub const N_LINKS: usize = 13;

/// Geometry, masses and inertias of the manipulator. Lengths in meters.
///
/// Link order: nuts 1..3, spherical elements 4..12 (three per arm, arm by
/// arm), star 13. Each inertia is about the link's own frame, with the center
/// of mass at the frame origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotParams {
    pub d: f64,
    pub h: f64,
    pub g: f64,
    pub masses: Vec<f64>,
    pub inertias: Vec<[[f64; 3]; 3]>,
}

impl Default for RobotParams {
    fn default() -> Self {
        let nut = diag(0.003, 0.39, 0.3294);
        let sphere = diag(0.094e-3, 0.094e-3, 0.1117e-3);
        let star = diag(0.6451, 1.2901, 0.6451);
        let mut masses = vec![7.175; 3];
        masses.extend([0.357; 9]);
        masses.push(1.758);
        let mut inertias = vec![nut; 3];
        inertias.extend([sphere; 9]);
        inertias.push(star);
        RobotParams {
            d: 0.181,
            h: 0.070,
            g: 9.81,
            masses,
            inertias,
        }
    }
}

fn diag(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]]
}

impl RobotParams {
    pub fn validate(&self) -> Result<(), RobotError> {
        let bad = |m: String| Err(RobotError::InvalidParams(m));
        if !(self.d > 0.0 && self.h >= 0.0 && self.g.is_finite()) {
            return bad(format!("d = {}, h = {}, g = {}", self.d, self.h, self.g));
        }
        if self.masses.len() != N_LINKS || self.inertias.len() != N_LINKS {
            return bad(format!("expected {N_LINKS} masses and inertias, got {} and {}", self.masses.len(), self.inertias.len()));
        }
        for (i, &m) in self.masses.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return bad(format!("mass {} = {m}", i + 1));
            }
        }
        for i in 0..N_LINKS {
            let inertia = self.inertia(i);
            if (inertia - inertia.transpose()).abs().max() > 1e-12 || inertia.cholesky().is_none() {
                return bad(format!("inertia {} is not symmetric positive definite", i + 1));
            }
        }
        Ok(())
    }

    pub fn inertia(&self, link: usize) -> Matrix3<f64> {
        let a = &self.inertias[link];
        Matrix3::from_fn(|r, c| a[r][c])
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = RobotParams::default();
        p.validate().unwrap();
        assert!((p.total_mass() - 26.496).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = RobotParams::default();
        p.masses[4] = 0.0;
        assert!(p.validate().is_err());
        let mut p = RobotParams::default();
        p.inertias[0][0][1] = 1.0;
        assert!(p.validate().is_err());
        let mut p = RobotParams::default();
        p.masses.pop();
        assert!(p.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = RobotParams::default();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<RobotParams>(&s).unwrap(), p);
    }
}
