//! Kinematics and dynamics of the 3-PSP manipulator.
//!
//! Coordinates `q` hold the three actuated ball-screw positions `a_i`, the
//! nine spherical-joint angles `phi_i, theta_i, lambda_i` and the three
//! slider positions `b_i`. Dynamics are reduced onto the actuators through the
//! natural orthogonal complement `T`, which maps actuator rates to the twists
//! of all thirteen links.

mod dynamics;
mod kinematics;
mod params;
pub mod reference;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

pub use dynamics::{DynamicTerms, NocMatrix, TWIST_ROWS};
pub use kinematics::{
    home, idx_a, idx_b, idx_lambda, idx_phi, idx_theta, ArmFrames, ConstraintJacobian, ConstraintVector, Coords, Frame, PassiveSolution,
    ToolPose,
};
pub use params::{RobotParams, N_LINKS};

use crate::error::RobotError;
use kinematics::ArmGeometry;

pub const N_Q: usize = 15;
pub const N_CONSTRAINTS: usize = 12;

/// How the constraint Jacobian and the link-twist map are differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Derivatives {
    /// Central differences of the constraint map and link poses.
    #[default]
    FiniteDifference,
    /// Closed-form screw-axis Jacobians.
    Analytic,
}

impl Derivatives {
    pub fn is_analytic(self) -> bool {
        self == Derivatives::Analytic
    }
}

/// Manipulator model: parameters plus solver settings. Immutable and cheap to
/// share; every call carries its own scratch state.
#[derive(Debug, Clone)]
pub struct Robot {
    params: RobotParams,
    derivatives: Derivatives,
    geometry: ArmGeometry,
    home_tip_rotation: Matrix3<f64>,
    /// Central-difference step for Jacobians.
    pub fd_step: f64,
    /// Sup-norm residual accepted by the passive-joint solve.
    pub passive_tol: f64,
    pub max_newton: usize,
    /// Largest tilt accepted by inverse kinematics, radians.
    pub workspace_tilt: f64,
}

impl Default for Robot {
    fn default() -> Self {
        Robot::new(RobotParams::default(), Derivatives::Analytic).expect("default parameters are valid")
    }
}

impl Robot {
    pub fn new(params: RobotParams, derivatives: Derivatives) -> Result<Self, RobotError> {
        params.validate()?;
        let geometry = ArmGeometry::new(params.d, params.h);
        let mut rob = Robot {
            params,
            derivatives,
            geometry,
            home_tip_rotation: Matrix3::identity(),
            fd_step: 1e-6,
            passive_tol: 1e-12,
            max_newton: 50,
            workspace_tilt: 0.3,
        };
        rob.home_tip_rotation = rob.arm_frames(0, &rob.home())[kinematics::F_TIP].r;
        Ok(rob)
    }

    pub fn params(&self) -> &RobotParams {
        &self.params
    }

    pub fn derivatives(&self) -> Derivatives {
        self.derivatives
    }

    /// Same model with a different differentiation scheme.
    pub fn with_derivatives(&self, derivatives: Derivatives) -> Robot {
        Robot { derivatives, ..self.clone() }
    }

    pub fn home(&self) -> Coords {
        home(self.params.d)
    }
}
