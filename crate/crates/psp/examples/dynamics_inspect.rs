//! Assembles M, C, G at the three reference actuator states and times both
//! differentiation schemes.

use std::time::Instant;

use nalgebra::Vector3;
use psp_ctc::robot::{Derivatives, Robot};

fn main() -> anyhow::Result<()> {
    let rob = Robot::default();
    let states = [
        ([0.1, 0.2, 0.05], [0.15, 0.12, 0.1]),
        ([0.15, 0.25, 0.1], [0.25, 0.22, 0.2]),
        ([0.05, 0.15, 0.0], [0.25, 0.22, 0.2]),
    ];
    let mut guess = rob.home();
    for (qa, qad) in states {
        let (terms, q) = rob.dynamics_at(&Vector3::from(qa), &Vector3::from(qad), &guess)?;
        guess = q;
        println!("qa = {qa:?}, qad = {qad:?}");
        println!("M = {:.4}C = {:.4}G = {:.4}", terms.m, terms.c, terms.g);
    }

    for mode in [Derivatives::Analytic, Derivatives::FiniteDifference] {
        let r = rob.with_derivatives(mode);
        let qad = Vector3::new(0.15, 0.12, 0.1);
        let n = 2000;
        let start = Instant::now();
        for i in 0..n {
            let qa = Vector3::new(0.1, 0.2, 0.05 + 1e-6 * i as f64);
            let (_, q) = r.dynamics_at(&qa, &qad, &guess)?;
            guess = q;
        }
        println!("{mode:?}: {:.1} us per solve + assembly", start.elapsed().as_secs_f64() * 1e6 / n as f64);
    }
    Ok(())
}
