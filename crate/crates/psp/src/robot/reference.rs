//! Reference model values at three actuator states that share the same
//! pairwise differences, and a tolerance report against them.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::DynamicTerms;

/// Actuator positions and rates of the three reference states. The third
/// position of the second and third states is listed as 0.15 and 0.05 in the
/// source data, which contradicts the listed differences; the values here restore
/// `q1 - q3 = 0.05`.
pub const REFERENCE_STATES: [([f64; 3], [f64; 3]); 3] = [
    ([0.1, 0.2, 0.05], [0.15, 0.12, 0.1]),
    ([0.15, 0.25, 0.1], [0.25, 0.22, 0.2]),
    ([0.05, 0.15, 0.0], [0.25, 0.22, 0.2]),
];

/// Reference values shared by all three states.
pub fn reference_terms() -> DynamicTerms {
    DynamicTerms {
        m: Matrix3::new(10.0161, -0.5288, -0.6026, -0.528, 9.2516, 0.0091, -0.6026, 0.0091, 9.4782),
        c: Matrix3::new(10.0159, 0.0004, -0.0163, 0.0481, -0.0247, -0.0234, 0.0346, 0.0124, -0.0560),
        g: Vector3::new(87.1237, 85.6256, 87.1237),
    }
}

/// Relative tolerance of the comparison.
pub const REFERENCE_TOLERANCE: f64 = 0.10;

/// Largest entry-wise deviation of each term, relative to the largest
/// reference entry of that term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub m: f64,
    pub c: f64,
    pub g: f64,
}

impl ReferenceReport {
    pub fn new(ours: &DynamicTerms) -> Self {
        let r = reference_terms();
        ReferenceReport {
            m: (ours.m - r.m).amax() / r.m.amax(),
            c: (ours.c - r.c).amax() / r.c.amax(),
            g: (ours.g - r.g).amax() / r.g.amax(),
        }
    }

    pub fn within(&self, tol: f64) -> [bool; 3] {
        [self.m <= tol, self.c <= tol, self.g <= tol]
    }
}
