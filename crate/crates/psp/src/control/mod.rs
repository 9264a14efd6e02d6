//! Controllers for the actuated joints: PD, computed torque on the full model,
//! and computed torque on fuzzy estimates of the model.

pub mod estimators;
pub mod noise;
pub mod trajectory;

use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use t2fuzzy::t1::{affine_combine_interval, centroid_defuzz};
use t2fuzzy::FuzzyNumber;

use crate::error::{Result, SimError};
use crate::robot::{Coords, DynamicTerms, Robot};

pub use estimators::{features, EstimatorSet, FuzzyDynamicTerms, FuzzyEstimator, FuzzyMode, TrainOptions, TrainReport, TrainingSample};
pub use noise::{mean_uncertainty, NoiseSource, NoiseSpec, Snr};
pub use trajectory::{helix_trajectory, HelixParams, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub kp: f64,
    pub kv: f64,
}

impl Gains {
    pub const PD: Gains = Gains { kp: 1000.0, kv: 100.0 };
    pub const CTC: Gains = Gains { kp: 10.0, kv: 1.0 };

    pub fn new(kp: f64, kv: f64) -> Result<Self> {
        if !(kp > 0.0 && kv >= 0.0 && kp.is_finite() && kv.is_finite()) {
            return Err(SimError::Config(format!("gains need kp > 0 and kv >= 0, got kp={kp} kv={kv}")));
        }
        Ok(Gains { kp, kv })
    }

    /// `kv = 2 sqrt(kp)`.
    pub fn critically_damped(kp: f64) -> Result<Self> {
        Gains::new(kp, 2.0 * kp.sqrt())
    }

    pub fn default_for(kind: ControllerKind) -> Self {
        match kind {
            ControllerKind::Pd => Gains::PD,
            _ => Gains::CTC,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Pd,
    Ctc,
    T1,
    T2,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [ControllerKind::Pd, ControllerKind::Ctc, ControllerKind::T1, ControllerKind::T2];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Pd => "pd",
            ControllerKind::Ctc => "ctc",
            ControllerKind::T1 => "t1",
            ControllerKind::T2 => "t2",
        }
    }

    pub fn is_fuzzy(self) -> bool {
        matches!(self, ControllerKind::T1 | ControllerKind::T2)
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pd" => Ok(ControllerKind::Pd),
            "ctc" => Ok(ControllerKind::Ctc),
            "t1" | "fuzzy-t1" => Ok(ControllerKind::T1),
            "t2" | "fuzzy-t2" => Ok(ControllerKind::T2),
            _ => Err(format!("unknown controller {s:?} (pd, ctc, t1, t2)")),
        }
    }
}

/// Where the fuzzy torque is collapsed to a crisp value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefuzzPath {
    /// Interval torque from interval model terms, then centroid.
    Deferred,
    /// Centroid of each model term, then crisp algebra.
    #[default]
    Early,
}

/// Desired actuator motion at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub q: Vector3<f64>,
    pub qd: Vector3<f64>,
    pub qdd: Vector3<f64>,
}

/// Actuator state as seen by a controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub q: Vector3<f64>,
    pub qd: Vector3<f64>,
}

/// `kp e + kv de` with `e = qd - q`.
pub fn pd_control(gains: &Gains, r: &Reference, m: &Measurement) -> Vector3<f64> {
    (r.q - m.q) * gains.kp + (r.qd - m.qd) * gains.kv
}

/// Commanded acceleration `qdd_d + kv de + kp e`.
pub fn servo(gains: &Gains, r: &Reference, m: &Measurement) -> Vector3<f64> {
    r.qdd + pd_control(gains, r, m)
}

/// `M f' + C qd + G` with the given model.
pub fn ctc_control(gains: &Gains, model: &DynamicTerms, r: &Reference, m: &Measurement) -> Vector3<f64> {
    model.torque(&m.qd, &servo(gains, r, m))
}

/// Torque from interval model terms.
pub fn fuzzy_ctc_control(gains: &Gains, model: &FuzzyDynamicTerms, r: &Reference, m: &Measurement, path: DefuzzPath) -> Result<Vector3<f64>> {
    let f = servo(gains, r, m);
    match path {
        DefuzzPath::Early => Ok(model.centers().torque(&m.qd, &f)),
        DefuzzPath::Deferred => {
            let mut tau = Vector3::zeros();
            for i in 0..3 {
                let sets = [model.m[i][0], model.m[i][1], model.m[i][2], model.c[i][0], model.c[i][1], model.c[i][2], model.g[i]];
                let alphas = [f[0], f[1], f[2], m.qd[0], m.qd[1], m.qd[2], 1.0];
                let ti = affine_combine_interval(&sets, &alphas, 0.0)?;
                tau[i] = centroid_defuzz(&FuzzyNumber::from(ti))?;
            }
            Ok(tau)
        }
    }
}

/// Full-model computed torque; the passive joints are re-solved each call,
/// warm-started from the previous solution. The model terms are assembled at
/// `model_at`, the servo acts on `m`.
#[derive(Debug, Clone)]
pub struct CtcController {
    pub gains: Gains,
    robot: Robot,
    guess: Coords,
}

impl CtcController {
    pub fn new(gains: Gains, robot: Robot, start: Coords) -> Self {
        CtcController { gains, robot, guess: start }
    }

    pub fn torque(&mut self, r: &Reference, m: &Measurement, model_at: &Measurement) -> Result<Vector3<f64>> {
        let (terms, q) = self.robot.dynamics_at(&model_at.q, &model_at.qd, &self.guess)?;
        self.guess = q;
        Ok(ctc_control(&self.gains, &terms, r, m))
    }
}

#[derive(Debug, Clone)]
pub struct FuzzyCtcController {
    pub gains: Gains,
    pub path: DefuzzPath,
    estimator: FuzzyEstimator,
}

impl FuzzyCtcController {
    pub fn new(gains: Gains, estimator: FuzzyEstimator, path: DefuzzPath) -> Self {
        FuzzyCtcController { gains, path, estimator }
    }

    pub fn estimator(&self) -> &FuzzyEstimator {
        &self.estimator
    }

    /// Estimates the model from the features of `model_at`.
    pub fn torque(&mut self, r: &Reference, m: &Measurement, model_at: &Measurement) -> Result<Vector3<f64>> {
        let model = self.estimator.estimate(&features(&model_at.q, &model_at.qd))?;
        fuzzy_ctc_control(&self.gains, &model, r, m, self.path)
    }
}

#[derive(Debug, Clone)]
pub enum Controller {
    Pd(Gains),
    Ctc(CtcController),
    Fuzzy(FuzzyCtcController),
}

impl Controller {
    pub fn kind(&self) -> ControllerKind {
        match self {
            Controller::Pd(_) => ControllerKind::Pd,
            Controller::Ctc(_) => ControllerKind::Ctc,
            Controller::Fuzzy(f) => match f.estimator.mode() {
                FuzzyMode::T1 => ControllerKind::T1,
                FuzzyMode::It2 => ControllerKind::T2,
            },
        }
    }

    /// `m` drives the servo; model terms (full or estimated) are evaluated at
    /// `model_at`. PD ignores `model_at`.
    pub fn torque(&mut self, r: &Reference, m: &Measurement, model_at: &Measurement) -> Result<Vector3<f64>> {
        match self {
            Controller::Pd(g) => Ok(pd_control(g, r, m)),
            Controller::Ctc(c) => c.torque(r, m, model_at),
            Controller::Fuzzy(f) => f.torque(r, m, model_at),
        }
    }

    /// Element evaluations that fell back to a held value (fuzzy only).
    pub fn held_count(&self) -> u64 {
        match self {
            Controller::Fuzzy(f) => f.estimator.held_count(),
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use t2fuzzy::IntervalT1;

    fn reference(q: Vector3<f64>) -> Reference {
        Reference {
            q,
            qd: Vector3::zeros(),
            qdd: Vector3::zeros(),
        }
    }

    #[test]
    fn pd_examples() {
        let r = reference(Vector3::new(0.11, 0.1, 0.1));
        let m = Measurement {
            q: Vector3::new(0.1, 0.1, 0.1),
            qd: Vector3::zeros(),
        };
        let tau = pd_control(&Gains::PD, &r, &m);
        assert!((tau - Vector3::new(10.0, 0.0, 0.0)).amax() < 1e-10);
        let still = Measurement { q: r.q, qd: r.qd };
        assert_eq!(pd_control(&Gains::PD, &r, &still), Vector3::zeros());
        assert_eq!((Gains::PD.kp, Gains::PD.kv), (1000.0, 100.0));
        assert_eq!((Gains::CTC.kp, Gains::CTC.kv), (10.0, 1.0));
    }

    #[test]
    fn critically_damped_preset() {
        let g = Gains::critically_damped(16.0).unwrap();
        assert_eq!(g.kv, 8.0);
        assert!(Gains::new(0.0, 1.0).is_err());
        assert!(Gains::new(1.0, -1.0).is_err());
    }

    #[test]
    fn ctc_with_zero_error_is_inverse_dynamics() {
        let rob = Robot::default();
        let q = rob.home();
        let qa = Vector3::zeros();
        let r = Reference {
            q: qa,
            qd: Vector3::new(0.1, -0.05, 0.02),
            qdd: Vector3::new(0.3, 0.1, -0.2),
        };
        let m = Measurement { q: r.q, qd: r.qd };
        let terms = rob.dynamics(&q, &r.qd).unwrap();
        let tau = ctc_control(&Gains::CTC, &terms, &r, &m);
        let id = rob.inverse_dynamics(&q, &r.qd, &r.qdd).unwrap();
        assert!((tau - id).amax() < 1e-12);
    }

    #[test]
    fn zero_spread_fuzzy_ctc_is_crisp_ctc() {
        let terms = DynamicTerms {
            m: Matrix3::new(10.0, -0.5, -0.6, -0.5, 9.0, 0.01, -0.6, 0.01, 9.5),
            c: Matrix3::from_fn(|i, j| 0.1 * (i as f64 - j as f64)),
            g: Vector3::new(87.0, 85.0, 87.0),
        };
        let fz = FuzzyDynamicTerms::from_elements(&estimators::element_values(&terms).map(IntervalT1::crisp));
        let r = Reference {
            q: Vector3::new(0.1, 0.2, 0.05),
            qd: Vector3::new(0.15, 0.12, 0.1),
            qdd: Vector3::new(1.0, -1.0, 0.5),
        };
        let m = Measurement {
            q: Vector3::new(0.09, 0.21, 0.05),
            qd: Vector3::new(0.1, 0.1, 0.1),
        };
        let crisp = ctc_control(&Gains::CTC, &terms, &r, &m);
        for path in [DefuzzPath::Early, DefuzzPath::Deferred] {
            let tau = fuzzy_ctc_control(&Gains::CTC, &fz, &r, &m, path).unwrap();
            assert!((tau - crisp).amax() < 1e-12, "{path:?}");
        }
    }

    #[test]
    fn controller_kind_parsing() {
        for k in ControllerKind::ALL {
            assert_eq!(k.name().parse::<ControllerKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
        }
        assert!("lqr".parse::<ControllerKind>().is_err());
    }
}
