//! Learns the 18 model estimators from a computed-torque run, then tracks the
//! helix with every controller and writes the interval type-II trace.
//!
//! cargo run --release -p psp-ctc --example fuzzy_tracking -- [trace.csv]

use std::fs::File;

use psp_ctc::control::{helix_trajectory, ControllerKind, DefuzzPath, Gains, HelixParams, Snr, TrainOptions};
use psp_ctc::sim::{default_models, simulate, ControllerSetup, SimOptions};
use psp_ctc::train::train_from_run;

fn main() -> anyhow::Result<()> {
    let trace = std::env::args().nth(1);
    let (model, plant) = default_models();
    let traj = helix_trajectory(&plant, &HelixParams::default())?;
    let trained = train_from_run(&model, &plant, &traj, Gains::CTC, 10, &TrainOptions::default())?;
    println!("trained on {} samples", trained.report.samples);
    for w in &trained.report.warnings {
        println!("warning: {w}");
    }

    for kind in ControllerKind::ALL {
        let setup = ControllerSetup {
            kind,
            gains: Gains::default_for(kind),
            robot: &model,
            estimators: Some(&trained.estimators),
            rho_10db: 0.25,
            path: DefuzzPath::Early,
        };
        let res = simulate(setup.build(Snr::INFINITE, &traj.coords[0])?, &traj, &plant, &SimOptions::default())?;
        let s = res.summary();
        println!("{:<4} sse {:.4e}  steps {}  unstable {}", kind.name(), s.sse, s.steps, s.unstable);
        if kind == ControllerKind::T2 {
            if let Some(path) = &trace {
                res.write_csv(File::create(path)?)?;
                println!("trace written to {path}");
            }
        }
    }
    Ok(())
}
