use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::{Robot, N_CONSTRAINTS, N_Q};
use crate::error::RobotError;

pub type Coords = SVector<f64, N_Q>;
pub type ConstraintVector = SVector<f64, N_CONSTRAINTS>;
pub type ConstraintJacobian = SMatrix<f64, N_CONSTRAINTS, N_Q>;

/// Index of `a_i` in the coordinate vector (`arm` is 0-based).
pub const fn idx_a(arm: usize) -> usize {
    arm
}
pub const fn idx_phi(arm: usize) -> usize {
    3 + 3 * arm
}
pub const fn idx_theta(arm: usize) -> usize {
    4 + 3 * arm
}
pub const fn idx_lambda(arm: usize) -> usize {
    5 + 3 * arm
}
pub const fn idx_b(arm: usize) -> usize {
    12 + arm
}

/// Home configuration: actuators and angles zero, `b_i = d`.
pub fn home(d: f64) -> Coords {
    let mut q = Coords::zeros();
    for arm in 0..3 {
        q[idx_b(arm)] = d;
    }
    q
}

/// Rigid transform as rotation and translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub r: Matrix3<f64>,
    pub p: Vector3<f64>,
}

impl Frame {
    pub const IDENTITY: Frame = Frame {
        r: Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0),
        p: Vector3::new(0.0, 0.0, 0.0),
    };

    #[inline]
    pub fn then(&self, other: &Frame) -> Frame {
        Frame {
            r: self.r * other.r,
            p: self.r * other.p + self.p,
        }
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.r);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.p);
        m
    }

    fn rotation(r: Matrix3<f64>) -> Frame {
        Frame { r, p: Vector3::zeros() }
    }

    fn translation(x: f64, y: f64, z: f64) -> Frame {
        Frame {
            r: Matrix3::identity(),
            p: Vector3::new(x, y, z),
        }
    }
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Spherical-joint element rotation used for both `phi` and `theta`.
fn sphere_ab(a: f64) -> Frame {
    let (s, c) = a.sin_cos();
    Frame::rotation(Matrix3::new(s, c, 0.0, 0.0, 0.0, 1.0, c, -s, 0.0))
}

fn sphere_c(l: f64) -> Frame {
    let (s, c) = l.sin_cos();
    Frame::rotation(Matrix3::new(c, -s, 0.0, 0.0, 0.0, 1.0, -s, -c, 0.0))
}

fn slider(b: f64) -> Frame {
    Frame {
        r: Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0),
        p: Vector3::new(0.0, b, 0.0),
    }
}

/// Per-arm constant transforms: plate mount and the tip offset.
#[derive(Debug, Clone)]
pub(crate) struct ArmGeometry {
    pub base: [Frame; 3],
    pub post: [Frame; 3],
}

impl ArmGeometry {
    pub fn new(d: f64, h: f64) -> Self {
        let tip = Frame::translation(0.0, -h, 0.0);
        let mk = |k: usize| {
            let ang = 2.0 * PI * k as f64 / 3.0;
            let base = if k == 0 {
                Frame::translation(d, 0.0, 0.0)
            } else {
                Frame::translation(d * ang.cos(), d * ang.sin(), 0.0).then(&Frame::rotation(rot_z(ang)))
            };
            let post = if k == 0 { tip } else { Frame::rotation(rot_y(ang)).then(&tip) };
            (base, post)
        };
        let (b0, p0) = mk(0);
        let (b1, p1) = mk(1);
        let (b2, p2) = mk(2);
        ArmGeometry {
            base: [b0, b1, b2],
            post: [p0, p1, p2],
        }
    }
}

/// World frames along one arm: plate mount, nut, the three spherical-joint
/// elements, the star side of the slider, and the tool tip.
pub type ArmFrames = [Frame; 7];

pub(crate) const F_NUT: usize = 1;
pub(crate) const F_SPHERE: [usize; 3] = [2, 3, 4];
pub(crate) const F_STAR: usize = 5;
pub(crate) const F_TIP: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum JointKind {
    Prismatic,
    Revolute,
}

/// Joint of an arm: coordinate index, kind, world axis, point on the axis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct JointAxis {
    pub index: usize,
    pub kind: JointKind,
    pub axis: Vector3<f64>,
    pub point: Vector3<f64>,
}

impl JointAxis {
    /// Rotation rate and velocity of `at` for a unit joint rate.
    #[inline]
    pub fn twist_at(&self, at: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
        match self.kind {
            JointKind::Prismatic => (Vector3::zeros(), self.axis),
            JointKind::Revolute => (self.axis, self.axis.cross(&(at - self.point))),
        }
    }
}

/// Joints of one arm in chain order: `a, phi, theta, lambda, b`.
pub(crate) fn arm_joints(arm: usize, f: &ArmFrames) -> [JointAxis; 5] {
    let pivot = f[F_NUT].p;
    let rev = |index, frame: usize| JointAxis {
        index,
        kind: JointKind::Revolute,
        axis: f[frame].r.column(2).into_owned(),
        point: pivot,
    };
    [
        JointAxis {
            index: idx_a(arm),
            kind: JointKind::Prismatic,
            axis: Vector3::z(),
            point: pivot,
        },
        rev(idx_phi(arm), 2),
        rev(idx_theta(arm), 3),
        rev(idx_lambda(arm), 4),
        JointAxis {
            index: idx_b(arm),
            kind: JointKind::Prismatic,
            axis: f[4].r.column(1).into_owned(),
            point: pivot,
        },
    ]
}

#[inline]
pub(crate) fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Tool pose: height of the tip and its tilt about the world X and Y axes,
/// measured from the home orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToolPose {
    pub z: f64,
    pub tilt: [f64; 2],
}

impl ToolPose {
    pub fn new(z: f64, tilt_x: f64, tilt_y: f64) -> Self {
        ToolPose { z, tilt: [tilt_x, tilt_y] }
    }

    fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.z, self.tilt[0], self.tilt[1])
    }
}

/// Result of the passive-joint solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveSolution {
    pub q: Coords,
    pub iterations: usize,
    pub residual: f64,
}

/// Steps allowed when halving a Newton step that increased the residual.
const MAX_HALVINGS: usize = 8;
const IK_TOL: f64 = 1e-11;
const IK_FD_STEP: f64 = 1e-7;

impl Robot {
    pub fn arm_frames(&self, arm: usize, q: &Coords) -> ArmFrames {
        let g = &self.geometry;
        let mut f = [Frame::IDENTITY; 7];
        f[0] = g.base[arm];
        f[1] = f[0].then(&Frame::translation(0.0, 0.0, q[idx_a(arm)]));
        f[2] = f[1].then(&sphere_ab(q[idx_phi(arm)]));
        f[3] = f[2].then(&sphere_ab(q[idx_theta(arm)]));
        f[4] = f[3].then(&sphere_c(q[idx_lambda(arm)]));
        f[5] = f[4].then(&slider(q[idx_b(arm)]));
        f[6] = f[5].then(&g.post[arm]);
        f
    }

    pub(crate) fn all_frames(&self, q: &Coords) -> [ArmFrames; 3] {
        [self.arm_frames(0, q), self.arm_frames(1, q), self.arm_frames(2, q)]
    }

    /// Homogeneous transform from the base plate to the tool tip through arm
    /// `arm` (0-based).
    pub fn arm_transform(&self, arm: usize, q: &Coords) -> Matrix4<f64> {
        assert!(arm < 3, "arm index {arm} out of range");
        self.arm_frames(arm, q)[F_TIP].to_homogeneous()
    }

    /// Closing conditions of the two loops: tip positions of arms 1 and 3
    /// against arm 2, then the Cayley parameters of arms 2 and 3 against arm 1.
    pub fn constraints(&self, q: &Coords) -> Result<ConstraintVector, RobotError> {
        let f = self.all_frames(q);
        let tips = [f[0][F_TIP], f[1][F_TIP], f[2][F_TIP]];
        let mut s = [Matrix3::zeros(); 3];
        for (arm, t) in tips.iter().enumerate() {
            s[arm] = cayley(&t.r).ok_or(RobotError::OrientationSingularity { arm: arm + 1 })?.0;
        }
        Ok(assemble_constraints(
            |r| [tips[0].p[r], tips[1].p[r], tips[2].p[r]],
            |i, j| [s[0][(i, j)], s[1][(i, j)], s[2][(i, j)]],
        ))
    }

    pub fn constraint_jacobian(&self, q: &Coords) -> Result<ConstraintJacobian, RobotError> {
        if self.derivatives.is_analytic() {
            self.constraint_jacobian_analytic(q)
        } else {
            self.constraint_jacobian_fd(q)
        }
    }

    /// Jacobian from the joint screw axes; the Cayley map differentiates as
    /// `dS = (I + R)^-1 dR (I - S)`.
    pub fn constraint_jacobian_analytic(&self, q: &Coords) -> Result<ConstraintJacobian, RobotError> {
        let mut jac = ConstraintJacobian::zeros();
        for arm in 0..3 {
            let f = self.arm_frames(arm, q);
            let tip = f[F_TIP];
            let (s, inv) = cayley(&tip.r).ok_or(RobotError::OrientationSingularity { arm: arm + 1 })?;
            let right = Matrix3::identity() - s;
            for joint in arm_joints(arm, &f) {
                let (w, v) = joint.twist_at(&tip.p);
                let ds = inv * (skew(&w) * tip.r) * right;
                let mut col = ConstraintVector::zeros();
                for r in 0..3 {
                    let [c0, c1] = contribution(arm, v[r]);
                    col[2 * r] = c0;
                    col[2 * r + 1] = c1;
                }
                for (e, &(i, j)) in S_ENTRIES.iter().enumerate() {
                    let [c0, c1] = contribution_s(arm, ds[(i, j)]);
                    col[6 + 2 * e] = c0;
                    col[6 + 2 * e + 1] = c1;
                }
                jac.set_column(joint.index, &col);
            }
        }
        Ok(jac)
    }

    /// Central differences with the configured step.
    pub fn constraint_jacobian_fd(&self, q: &Coords) -> Result<ConstraintJacobian, RobotError> {
        let h = self.fd_step;
        let mut jac = ConstraintJacobian::zeros();
        let mut qp = *q;
        for k in 0..N_Q {
            qp[k] = q[k] + h;
            let plus = self.constraints(&qp)?;
            qp[k] = q[k] - h;
            let minus = self.constraints(&qp)?;
            qp[k] = q[k];
            jac.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        Ok(jac)
    }

    /// Newton solve of the constraints for the passive coordinates with the
    /// actuators held at `qa`, starting from `guess`.
    pub fn solve_passive(&self, qa: &Vector3<f64>, guess: &Coords) -> Result<PassiveSolution, RobotError> {
        let mut q = *guess;
        q.fixed_rows_mut::<3>(0).copy_from(qa);
        let mut r = self.constraints(&q)?;
        let mut norm = r.amax();
        let mut iterations = 0;
        while norm > self.passive_tol {
            if iterations == self.max_newton {
                return Err(RobotError::NoConvergence {
                    what: "passive-joint solve",
                    iterations,
                    residual: norm,
                });
            }
            iterations += 1;
            let jac = self.constraint_jacobian(&q)?;
            let ju = jac.fixed_columns::<12>(3).into_owned();
            let dx = solve_square(ju, &r).ok_or(RobotError::KinematicSingularity)?;
            let mut step = 1.0;
            let mut halvings = 0;
            loop {
                let mut trial = q;
                for k in 0..12 {
                    trial[3 + k] -= step * dx[k];
                }
                let tr = self.constraints(&trial);
                let accept = match &tr {
                    Ok(t) => t.amax() < norm || halvings == MAX_HALVINGS,
                    Err(_) => false,
                };
                if accept {
                    q = trial;
                    r = tr?;
                    norm = r.amax();
                    break;
                }
                if halvings == MAX_HALVINGS {
                    return Err(tr.err().unwrap_or(RobotError::KinematicSingularity));
                }
                step *= 0.5;
                halvings += 1;
            }
        }
        Ok(PassiveSolution { q, iterations, residual: norm })
    }

    /// `L = [I; -(Phi_u)^-1 Phi_a]`, mapping actuator rates to all joint rates.
    pub fn joint_complement(&self, q: &Coords) -> Result<SMatrix<f64, N_Q, 3>, RobotError> {
        let jac = self.constraint_jacobian(q)?;
        complement_from_jacobian(&jac)
    }

    pub fn forward_kinematics(&self, q: &Coords) -> ToolPose {
        let tip = self.arm_frames(0, q)[F_TIP];
        let rel = tip.r * self.home_tip_rotation.transpose();
        // rel = Rx(tx) Ry(ty) Rz(tz)
        let tilt_x = (-rel[(1, 2)]).atan2(rel[(2, 2)]);
        let tilt_y = rel[(0, 2)].clamp(-1.0, 1.0).asin();
        ToolPose::new(tip.p.z, tilt_x, tilt_y)
    }

    /// Actuator positions placing the tool at `pose`, solved by Newton on the
    /// three pose residuals. Returns the full consistent coordinates.
    pub fn inverse_kinematics(&self, pose: &ToolPose, guess: &Coords) -> Result<Coords, RobotError> {
        let bound = self.workspace_tilt;
        if pose.tilt.iter().any(|t| !(t.abs() <= bound)) || !pose.z.is_finite() {
            return Err(RobotError::OutOfWorkspace(format!("tilt {:?} exceeds {bound} rad", pose.tilt)));
        }
        let target = pose.as_vector();
        let mut q = self.solve_passive(&guess.fixed_rows::<3>(0).into_owned(), guess)?.q;
        let residual = |q: &Coords| self.forward_kinematics(q).as_vector() - target;
        let mut r = residual(&q);
        for _ in 0..self.max_newton {
            if r.amax() <= IK_TOL {
                return Ok(q);
            }
            let qa = q.fixed_rows::<3>(0).into_owned();
            let mut jac = Matrix3::zeros();
            for k in 0..3 {
                let mut step = qa;
                step[k] += IK_FD_STEP;
                let plus = self.solve_passive(&step, &q)?.q;
                step[k] = qa[k] - IK_FD_STEP;
                let minus = self.solve_passive(&step, &q)?.q;
                jac.set_column(k, &((residual(&plus) - residual(&minus)) / (2.0 * IK_FD_STEP)));
            }
            let dx = jac.lu().solve(&r).ok_or(RobotError::KinematicSingularity)?;
            q = self.solve_passive(&(qa - dx), &q)?.q;
            r = residual(&q);
        }
        if r.amax() <= IK_TOL {
            return Ok(q);
        }
        Err(RobotError::NoConvergence {
            what: "inverse kinematics",
            iterations: self.max_newton,
            residual: r.amax(),
        })
    }
}

pub(crate) const S_ENTRIES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Contribution of arm `arm`'s tip coordinate to the pair
/// `(T2 - T1, T2 - T3)`.
#[inline]
fn contribution(arm: usize, x: f64) -> [f64; 2] {
    match arm {
        0 => [-x, 0.0],
        1 => [x, x],
        _ => [0.0, -x],
    }
}

/// Contribution of arm `arm`'s Cayley entry to the pair `(S1 - S2, S1 - S3)`.
#[inline]
fn contribution_s(arm: usize, x: f64) -> [f64; 2] {
    match arm {
        0 => [x, x],
        1 => [-x, 0.0],
        _ => [0.0, -x],
    }
}

fn assemble_constraints(p: impl Fn(usize) -> [f64; 3], s: impl Fn(usize, usize) -> [f64; 3]) -> ConstraintVector {
    let mut c = ConstraintVector::zeros();
    for r in 0..3 {
        let t = p(r);
        c[2 * r] = t[1] - t[0];
        c[2 * r + 1] = t[1] - t[2];
    }
    for (e, &(i, j)) in S_ENTRIES.iter().enumerate() {
        let v = s(i, j);
        c[6 + 2 * e] = v[0] - v[1];
        c[6 + 2 * e + 1] = v[0] - v[2];
    }
    c
}

/// Cayley parameters `S = (I + R)^-1 (R - I)` together with `(I + R)^-1`.
pub(crate) fn cayley(r: &Matrix3<f64>) -> Option<(Matrix3<f64>, Matrix3<f64>)> {
    let ipr = Matrix3::identity() + r;
    if ipr.determinant().abs() < 1e-12 {
        return None;
    }
    let inv = ipr.try_inverse()?;
    Some((inv * (r - Matrix3::identity()), inv))
}

pub(crate) fn solve_square(a: SMatrix<f64, 12, 12>, b: &SVector<f64, 12>) -> Option<SVector<f64, 12>> {
    let x = a.lu().solve(b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub(crate) fn complement_from_jacobian(jac: &ConstraintJacobian) -> Result<SMatrix<f64, N_Q, 3>, RobotError> {
    let ju = jac.fixed_columns::<12>(3).into_owned();
    let ja = jac.fixed_columns::<3>(0).into_owned();
    let sol = ju.lu().solve(&ja).ok_or(RobotError::KinematicSingularity)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(RobotError::KinematicSingularity);
    }
    let mut l = SMatrix::<f64, N_Q, 3>::zeros();
    l.fixed_view_mut::<3, 3>(0, 0).fill_with_identity();
    l.fixed_view_mut::<12, 3>(3, 0).copy_from(&(-sol));
    Ok(l)
}
