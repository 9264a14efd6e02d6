use nalgebra::{Matrix3, SMatrix, Vector3};
use serde::{Deserialize, Serialize};

use super::kinematics::{arm_joints, complement_from_jacobian, skew, Coords, Frame, F_NUT, F_SPHERE, F_STAR};
use super::{Robot, N_LINKS, N_Q};
use crate::error::RobotError;

/// Six twist rows (angular then linear velocity) per link.
pub const TWIST_ROWS: usize = 6 * N_LINKS;

pub type NocMatrix = SMatrix<f64, TWIST_ROWS, 3>;
type TwistJacobian = SMatrix<f64, TWIST_ROWS, N_Q>;

/// Relative displacement used to difference `T` along the motion.
const NOC_DOT_STEP_ANALYTIC: f64 = 1e-5;
const NOC_DOT_STEP_FD: f64 = 1e-4;

/// Actuator-space model `M qdd + C qd + G = tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicTerms {
    pub m: Matrix3<f64>,
    pub c: Matrix3<f64>,
    pub g: Vector3<f64>,
}

impl DynamicTerms {
    pub fn torque(&self, qd: &Vector3<f64>, qdd: &Vector3<f64>) -> Vector3<f64> {
        self.m * qdd + self.c * qd + self.g
    }

    /// Accelerations produced by `tau`; fails when `M` is not positive definite.
    pub fn acceleration(&self, qd: &Vector3<f64>, tau: &Vector3<f64>) -> Result<Vector3<f64>, RobotError> {
        let chol = self.m.cholesky().ok_or(RobotError::MassNotPositiveDefinite)?;
        Ok(chol.solve(&(tau - self.c * qd - self.g)))
    }

    /// Largest absolute difference over all entries.
    pub fn max_abs_diff(&self, other: &DynamicTerms) -> f64 {
        (self.m - other.m).amax().max((self.c - other.c).amax()).max((self.g - other.g).amax())
    }
}

/// Link `k`: owning arm, frame along that arm, number of leading arm joints
/// that move it.
const fn link_spec(k: usize) -> (usize, usize, usize) {
    match k {
        0..=2 => (k, F_NUT, 1),
        12 => (0, F_STAR, 5),
        _ => {
            let arm = (k - 3) / 3;
            let j = (k - 3) % 3;
            (arm, F_SPHERE[j], 2 + j)
        }
    }
}

impl Robot {
    /// World frames of the thirteen links.
    pub fn link_frames(&self, q: &Coords) -> [Frame; N_LINKS] {
        let arms = self.all_frames(q);
        std::array::from_fn(|k| {
            let (arm, frame, _) = link_spec(k);
            arms[arm][frame]
        })
    }

    fn twist_jacobian(&self, q: &Coords) -> TwistJacobian {
        if self.derivatives().is_analytic() {
            self.twist_jacobian_analytic(q)
        } else {
            self.twist_jacobian_fd(q)
        }
    }

    fn twist_jacobian_analytic(&self, q: &Coords) -> TwistJacobian {
        let arms = self.all_frames(q);
        let joints = [arm_joints(0, &arms[0]), arm_joints(1, &arms[1]), arm_joints(2, &arms[2])];
        let mut k_mat = TwistJacobian::zeros();
        for k in 0..N_LINKS {
            let (arm, frame, n) = link_spec(k);
            let origin = arms[arm][frame].p;
            for joint in &joints[arm][..n] {
                let (w, v) = joint.twist_at(&origin);
                k_mat.fixed_view_mut::<3, 1>(6 * k, joint.index).copy_from(&w);
                k_mat.fixed_view_mut::<3, 1>(6 * k + 3, joint.index).copy_from(&v);
            }
        }
        k_mat
    }

    fn twist_jacobian_fd(&self, q: &Coords) -> TwistJacobian {
        let h = self.fd_step;
        let base = self.link_frames(q);
        let mut k_mat = TwistJacobian::zeros();
        let mut qp = *q;
        for j in 0..N_Q {
            qp[j] = q[j] + h;
            let plus = self.link_frames(&qp);
            qp[j] = q[j] - h;
            let minus = self.link_frames(&qp);
            qp[j] = q[j];
            for k in 0..N_LINKS {
                let wx = (plus[k].r - minus[k].r) / (2.0 * h) * base[k].r.transpose();
                let w = 0.5 * Vector3::new(wx[(2, 1)] - wx[(1, 2)], wx[(0, 2)] - wx[(2, 0)], wx[(1, 0)] - wx[(0, 1)]);
                let v = (plus[k].p - minus[k].p) / (2.0 * h);
                k_mat.fixed_view_mut::<3, 1>(6 * k, j).copy_from(&w);
                k_mat.fixed_view_mut::<3, 1>(6 * k + 3, j).copy_from(&v);
            }
        }
        k_mat
    }

    fn noc_and_complement(&self, q: &Coords) -> Result<(NocMatrix, SMatrix<f64, N_Q, 3>), RobotError> {
        let l = complement_from_jacobian(&self.constraint_jacobian(q)?)?;
        Ok((self.twist_jacobian(q) * l, l))
    }

    /// Natural orthogonal complement: stacked link twists per unit actuator
    /// rate.
    pub fn noc(&self, q: &Coords) -> Result<NocMatrix, RobotError> {
        Ok(self.noc_and_complement(q)?.0)
    }

    /// Time derivative of `T` along the motion with actuator rates `qad`,
    /// by central differences of `T` along the joint velocity.
    pub fn noc_dot(&self, q: &Coords, qad: &Vector3<f64>) -> Result<NocMatrix, RobotError> {
        let (_, l) = self.noc_and_complement(q)?;
        self.noc_dot_with(q, &(l * qad))
    }

    fn noc_dot_with(&self, q: &Coords, qdot: &Coords) -> Result<NocMatrix, RobotError> {
        let scale = qdot.amax();
        if scale == 0.0 {
            return Ok(NocMatrix::zeros());
        }
        let step = if self.derivatives().is_analytic() { NOC_DOT_STEP_ANALYTIC } else { NOC_DOT_STEP_FD };
        let eps = step / scale;
        let plus = self.noc(&(q + qdot * eps))?;
        let minus = self.noc(&(q - qdot * eps))?;
        Ok((plus - minus) / (2.0 * eps))
    }

    /// `M = T' Mt T`, `C = T' Mt Tdot + T' W Mt T`, `G = -T' w_g` with the
    /// gravity wrench pointing down the world Z axis.
    pub fn dynamics(&self, q: &Coords, qad: &Vector3<f64>) -> Result<DynamicTerms, RobotError> {
        let (t, l) = self.noc_and_complement(q)?;
        let td = self.noc_dot_with(q, &(l * qad))?;
        let frames = self.link_frames(q);
        let p = self.params();
        let mut m = Matrix3::zeros();
        let mut c = Matrix3::zeros();
        let mut g = Vector3::zeros();
        for (k, frame) in frames.iter().enumerate() {
            let jw = t.fixed_view::<3, 3>(6 * k, 0);
            let jv = t.fixed_view::<3, 3>(6 * k + 3, 0);
            let jwd = td.fixed_view::<3, 3>(6 * k, 0);
            let jvd = td.fixed_view::<3, 3>(6 * k + 3, 0);
            let mass = p.masses[k];
            let iw = frame.r * p.inertia(k) * frame.r.transpose();
            let w = jw * qad;
            let jw_t_iw = jw.transpose() * iw;
            m += jw_t_iw * jw + jv.transpose() * jv * mass;
            c += jw_t_iw * jwd + jv.transpose() * jvd * mass + jw.transpose() * skew(&w) * iw * jw;
            g += jv.row(2).transpose() * (mass * p.g);
        }
        Ok(DynamicTerms { m, c, g })
    }

    /// Solves the passive joints for `qa` (starting from `guess`) and assembles
    /// the dynamics there.
    pub fn dynamics_at(&self, qa: &Vector3<f64>, qad: &Vector3<f64>, guess: &Coords) -> Result<(DynamicTerms, Coords), RobotError> {
        let q = self.solve_passive(qa, guess)?.q;
        Ok((self.dynamics(&q, qad)?, q))
    }

    pub fn inverse_dynamics(&self, q: &Coords, qad: &Vector3<f64>, qadd: &Vector3<f64>) -> Result<Vector3<f64>, RobotError> {
        Ok(self.dynamics(q, qad)?.torque(qad, qadd))
    }

    pub fn forward_dynamics(&self, q: &Coords, qad: &Vector3<f64>, tau: &Vector3<f64>) -> Result<Vector3<f64>, RobotError> {
        self.dynamics(q, qad)?.acceleration(qad, tau)
    }

    /// Kinetic energy `1/2 qd' M qd` summed link by link.
    pub fn kinetic_energy(&self, q: &Coords, qad: &Vector3<f64>) -> Result<f64, RobotError> {
        let t = self.noc(q)?;
        let tw = t * qad;
        let frames = self.link_frames(q);
        let p = self.params();
        Ok((0..N_LINKS)
            .map(|k| {
                let w = tw.fixed_rows::<3>(6 * k);
                let v = tw.fixed_rows::<3>(6 * k + 3);
                let iw = frames[k].r * p.inertia(k) * frames[k].r.transpose();
                0.5 * (w.dot(&(iw * w)) + p.masses[k] * v.norm_squared())
            })
            .sum())
    }

    /// Gravitational potential energy of all links (zero at the base plate).
    pub fn potential_energy(&self, q: &Coords) -> f64 {
        let p = self.params();
        self.link_frames(q).iter().zip(&p.masses).map(|(f, m)| m * p.g * f.p.z).sum()
    }
}
