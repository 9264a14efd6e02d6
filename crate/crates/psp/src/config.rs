//! Run configuration shared by the command-line front end and the tests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{ControllerKind, DefuzzPath, EstimatorSet, Gains, HelixParams, Snr, TrainReport};
use crate::control::estimators::ELEMENTS;
use crate::error::{Result, SimError};
use crate::robot::{Derivatives, Robot, RobotParams};
use crate::sim::{NoiseTarget, SseMode};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "PSP_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainSet {
    pub pd: Gains,
    pub ctc: Gains,
    /// Both fuzzy controllers.
    pub fuzzy: Gains,
}

impl Default for GainSet {
    fn default() -> Self {
        GainSet {
            pd: Gains::PD,
            ctc: Gains::CTC,
            fuzzy: Gains::CTC,
        }
    }
}

impl GainSet {
    pub fn for_kind(&self, kind: ControllerKind) -> Gains {
        match kind {
            ControllerKind::Pd => self.pd,
            ControllerKind::Ctc => self.ctc,
            ControllerKind::T1 | ControllerKind::T2 => self.fuzzy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `"default"` or a path to a robot parameter JSON file.
    pub robot: String,
    pub controllers: Vec<ControllerKind>,
    pub gains: GainSet,
    /// Labels per feature.
    pub labels: usize,
    /// Width of the uncertain label means at 10 dB, in label sigmas.
    pub rho_10db: f64,
    pub snr_db: Vec<Snr>,
    pub seeds: Vec<u64>,
    /// Trajectory and step size.
    pub trajectory: HelixParams,
    /// Every n-th recorded state is used for training.
    pub train_stride: usize,
    pub defuzz: DefuzzPath,
    /// Derivatives used by the full-model controller.
    pub ctc_derivatives: Derivatives,
    pub sse: SseMode,
    pub noise_target: NoiseTarget,
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/estimators`.
    pub estimators_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            robot: "default".into(),
            controllers: ControllerKind::ALL.to_vec(),
            gains: GainSet::default(),
            labels: 2,
            rho_10db: 0.25,
            snr_db: vec![Snr::INFINITE],
            seeds: vec![0],
            trajectory: HelixParams::default(),
            train_stride: 10,
            defuzz: DefuzzPath::Early,
            ctc_derivatives: Derivatives::FiniteDifference,
            sse: SseMode::Sum,
            noise_target: NoiseTarget::Model,
            output_dir: std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
            estimators_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels == 0 {
            return Err(SimError::Config("labels must be positive".into()));
        }
        if !(self.rho_10db >= 0.0 && self.rho_10db.is_finite()) {
            return Err(SimError::Config(format!("rho_10db must be finite and non-negative, got {}", self.rho_10db)));
        }
        if self.controllers.is_empty() || self.snr_db.is_empty() || self.seeds.is_empty() {
            return Err(SimError::Config("controllers, snr_db and seeds must be non-empty".into()));
        }
        if self.robot != "default" && !Path::new(&self.robot).exists() {
            return Err(SimError::Config(format!("robot parameter file {} not found", self.robot)));
        }
        for g in [self.gains.pd, self.gains.ctc, self.gains.fuzzy] {
            Gains::new(g.kp, g.kv)?;
        }
        Ok(())
    }

    pub fn robot_params(&self) -> Result<RobotParams> {
        if self.robot == "default" {
            Ok(RobotParams::default())
        } else {
            Ok(serde_json::from_str(&fs::read_to_string(&self.robot)?)?)
        }
    }

    /// Full-model controller robot and plant robot.
    pub fn models(&self) -> Result<(Robot, Robot)> {
        let plant = Robot::new(self.robot_params()?, Derivatives::Analytic)?;
        Ok((plant.with_derivatives(self.ctc_derivatives), plant))
    }

    pub fn estimators_dir(&self) -> PathBuf {
        self.estimators_dir.clone().unwrap_or_else(|| self.output_dir.join("estimators"))
    }
}

pub const REPORT_FILE: &str = "training_report.json";

/// One pretty-printed JSON file per element plus the training report.
pub fn save_estimators(dir: &Path, set: &EstimatorSet, report: &TrainReport) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(ELEMENTS.len() + 1);
    for (name, base) in ELEMENTS.iter().zip(&set.bases) {
        let path = dir.join(format!("{name}.json"));
        fs::write(&path, serde_json::to_string_pretty(base)? + "\n")?;
        written.push(path);
    }
    let path = dir.join(REPORT_FILE);
    fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
    written.push(path);
    Ok(written)
}

pub fn load_estimators(dir: &Path) -> Result<EstimatorSet> {
    let bases = ELEMENTS
        .iter()
        .map(|name| {
            let path = dir.join(format!("{name}.json"));
            let text = fs::read_to_string(&path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
            let base: t2fuzzy::RuleBase = serde_json::from_str(&text)?;
            base.validate()?;
            Ok(base)
        })
        .collect::<Result<Vec<_>>>()?;
    EstimatorSet::new(bases)
}
