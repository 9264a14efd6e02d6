//! 3-PSP parallel manipulator: kinematics, reduced dynamics, and computed-torque
//! controllers whose model terms come either from the full dynamics or from
//! type-I / interval type-II fuzzy estimators.

pub mod config;
pub mod control;
pub mod error;
pub mod robot;
pub mod sim;
pub mod sweep;
pub mod train;

pub use error::{Result, RobotError, SimError};
