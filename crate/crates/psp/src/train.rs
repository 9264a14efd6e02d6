//! Estimator training from a recorded noise-free computed-torque run.

use crate::control::estimators::{element_values, train_estimators, EstimatorSet, TrainOptions, TrainReport, TrainingSample};
use crate::control::{features, ControllerKind, DefuzzPath, Gains, HelixParams, Trajectory};
use crate::error::{Result, SimError};
use crate::robot::Robot;
use crate::sim::{simulate, ControllerSetup, SimOptions, SimResult};

/// Fewest recorded samples accepted for training.
pub const MIN_SAMPLES: usize = 500;

/// Model elements of the plant at every `stride`-th recorded state.
pub fn record_samples(plant: &Robot, run: &SimResult, traj: &Trajectory, stride: usize) -> Result<Vec<TrainingSample>> {
    let stride = stride.max(1);
    let mut out = Vec::with_capacity(run.records.len() / stride + 1);
    for (k, r) in run.records.iter().enumerate().step_by(stride) {
        // the desired pose is a close warm start for the tracked state
        let (terms, _) = plant.dynamics_at(&r.q, &r.qdot, &traj.coords[k])?;
        out.push(TrainingSample {
            features: features(&r.q, &r.qdot),
            targets: element_values(&terms),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub estimators: EstimatorSet,
    pub report: TrainReport,
    pub samples: Vec<TrainingSample>,
}

/// Runs the full-model controller on `traj` without noise and learns the
/// estimators from the recorded states.
pub fn train_from_run(model: &Robot, plant: &Robot, traj: &Trajectory, gains: Gains, stride: usize, opts: &TrainOptions) -> Result<TrainOutput> {
    let setup = ControllerSetup {
        kind: ControllerKind::Ctc,
        gains,
        robot: model,
        estimators: None,
        rho_10db: 0.0,
        path: DefuzzPath::Early,
    };
    let ctl = setup.build(crate::control::Snr::INFINITE, &traj.coords[0])?;
    let run = simulate(ctl, traj, plant, &SimOptions::default())?;
    if let Some(k) = run.unstable_at {
        return Err(SimError::Training(format!("recording run unstable at step {k}")));
    }
    let samples = record_samples(plant, &run, traj, stride)?;
    if samples.len() < MIN_SAMPLES {
        return Err(SimError::Training(format!("{} samples recorded, need at least {MIN_SAMPLES}", samples.len())));
    }
    let (estimators, report) = train_estimators(&samples, opts)?;
    Ok(TrainOutput { estimators, report, samples })
}

/// Trajectory used for training when none is given.
pub fn default_training_helix() -> HelixParams {
    HelixParams::default()
}

/// True model elements along a trajectory, for coverage checks.
pub fn reference_samples(plant: &Robot, traj: &Trajectory, stride: usize) -> Result<Vec<TrainingSample>> {
    let stride = stride.max(1);
    (0..traj.len())
        .step_by(stride)
        .map(|k| {
            let terms = plant.dynamics(&traj.coords[k], &traj.qd[k])?;
            Ok(TrainingSample {
                features: features(&traj.q[k], &traj.qd[k]),
                targets: element_values(&terms),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::helix_trajectory;

    #[test]
    fn short_run_is_rejected() {
        let rob = Robot::default();
        let p = HelixParams {
            duration: 0.2,
            ..Default::default()
        };
        let traj = helix_trajectory(&rob, &p).unwrap();
        let err = train_from_run(&rob, &rob, &traj, Gains::CTC, 10, &TrainOptions::default()).unwrap_err();
        assert!(matches!(err, SimError::Training(_)));
    }

    #[test]
    fn reference_samples_follow_the_trajectory() {
        let rob = Robot::default();
        let p = HelixParams {
            duration: 0.05,
            ..Default::default()
        };
        let traj = helix_trajectory(&rob, &p).unwrap();
        let s = reference_samples(&rob, &traj, 10).unwrap();
        assert_eq!(s.len(), 6);
        let g: f64 = s[0].targets[15..].iter().sum();
        assert!(g > 200.0 && g < 300.0);
    }
}
