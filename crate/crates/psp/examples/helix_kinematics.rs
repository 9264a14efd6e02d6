//! Maps the default helix through inverse kinematics and checks the round
//! trip and the constraint residual along the way.
//!
//! cargo run --release -p psp-ctc --example helix_kinematics

use psp_ctc::control::{helix_trajectory, HelixParams};
use psp_ctc::robot::Robot;

fn main() -> anyhow::Result<()> {
    let rob = Robot::default();
    let p = HelixParams::default();
    let traj = helix_trajectory(&rob, &p)?;
    println!("{} samples at dt = {} s", traj.len(), traj.dt);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}", "t", "a1", "a2", "a3", "pose_err", "residual");
    let (mut worst_pose, mut worst_res) = (0.0f64, 0.0f64);
    for k in 0..traj.len() {
        let q = &traj.coords[k];
        let want = p.pose(traj.time(k));
        let got = rob.forward_kinematics(q);
        let pose_err = (got.z - want.z).abs().max((got.tilt[0] - want.tilt[0]).abs()).max((got.tilt[1] - want.tilt[1]).abs());
        let res = rob.constraints(q)?.amax();
        worst_pose = worst_pose.max(pose_err);
        worst_res = worst_res.max(res);
        if k % 1000 == 0 {
            let a = &traj.q[k];
            println!("{:>6.2} {:>10.5} {:>10.5} {:>10.5} {pose_err:>10.2e} {res:>10.2e}", traj.time(k), a[0], a[1], a[2]);
        }
    }
    println!("worst pose error {worst_pose:.2e}, worst constraint residual {worst_res:.2e}");
    let (pos, vel) = traj.signal_power();
    println!("signal power: position {pos:.4e} m^2, rate {vel:.4e} m^2/s^2");
    Ok(())
}
