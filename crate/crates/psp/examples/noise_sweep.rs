//! Trains the estimators on the default helix, then compares type-I and
//! interval type-II fuzzy computed torque over a grid of SNRs and seeds.
//!
//! cargo run --release -p psp-ctc --example noise_sweep -- [seeds] [labels] [rho_10db] [model|everything]

use psp_ctc::control::{helix_trajectory, ControllerKind, DefuzzPath, Gains, HelixParams, NoiseSpec, Snr, TrainOptions};
use psp_ctc::sim::{default_models, simulate, ControllerSetup, NoiseTarget, SimOptions};
use psp_ctc::train::train_from_run;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let labels: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let rho_10db: f64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(0.25);
    let noise_target = match args.get(3).map(String::as_str) {
        Some("everything") => NoiseTarget::Everything,
        _ => NoiseTarget::Model,
    };
    let (model, plant) = default_models();
    let traj = helix_trajectory(&plant, &HelixParams::default())?;
    let trained = train_from_run(&model, &plant, &traj, Gains::CTC, 10, &TrainOptions { labels, ..Default::default() })?;
    for b in &trained.report.bases {
        println!("{:>4}: {:>2} rules, median rel err {:.4}", b.element, b.rules, b.median_rel_error);
    }

    let run = |kind: ControllerKind, snr: Snr, seed: u64| -> anyhow::Result<f64> {
        let setup = ControllerSetup {
            kind,
            gains: Gains::default_for(kind),
            robot: &model,
            estimators: Some(&trained.estimators),
            rho_10db,
            path: DefuzzPath::Early,
        };
        let opts = SimOptions {
            noise: NoiseSpec { snr_db: snr, seed },
            noise_target,
            ..Default::default()
        };
        let res = simulate(setup.build(snr, &traj.coords[0])?, &traj, &plant, &opts)?;
        Ok(if res.unstable_at.is_some() { f64::INFINITY } else { res.sse })
    };

    println!("pd  inf: {:.6}", run(ControllerKind::Pd, Snr::INFINITE, 0)?);
    println!("ctc inf: {:.6}", run(ControllerKind::Ctc, Snr::INFINITE, 0)?);
    println!("t1  inf: {:.6}", run(ControllerKind::T1, Snr::INFINITE, 0)?);
    println!("t2  inf: {:.6}", run(ControllerKind::T2, Snr::INFINITE, 0)?);
    println!("{:>5} {:>10} {:>10} {:>8}", "snr", "t1", "t2", "ratio");
    for db in [20.0, 15.0, 10.0] {
        let snr = Snr::db(db).expect("positive");
        let mut ratios = Vec::new();
        for seed in 0..seeds {
            let (a, b) = (run(ControllerKind::T1, snr, seed)?, run(ControllerKind::T2, snr, seed)?);
            println!("{db:>5} {a:>10.5} {b:>10.5} {:>8.4}", a / b);
            ratios.push(a / b);
        }
        ratios.sort_by(f64::total_cmp);
        println!("{db:>5} median ratio {:.4}", ratios[ratios.len() / 2]);
    }
    Ok(())
}
