//! Singular value decomposition of real 3×3 matrices, `M = A · diag(S) · B`.
//!
//! One-sided Jacobi on the columns of `M`. Singular values come out sorted
//! descending and every right-singular vector (row of `B`) has its
//! largest-magnitude entry positive, which makes the decomposition a pure
//! function of the input matrix.

#[allow(unused_imports)]
use num_traits::Float;
use crate::linalg::{Mat3, Vec3};

const MAX_SWEEPS: usize = 60;
const ORTHO_TOL: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvdDecomp {
    /// Left factor; column `i` is the left-singular vector for `s[i]`.
    pub a: Mat3,
    /// Singular values, `s[0] >= s[1] >= s[2] >= 0`.
    pub s: [f64; 3],
    /// Right factor; row `i` is the right-singular vector for `s[i]`.
    pub b: Mat3,
}

impl SvdDecomp {
    /// Principal unit vector `e_i` associated with `s[i]`.
    pub fn principal(i: usize) -> Vec3 {
        let mut e = Vec3::ZERO;
        e[i] = 1.0;
        e
    }

    /// `Bᵀ e_i`: the input direction that `M` stretches by `s[i]`.
    pub fn right_vector(&self, i: usize) -> Vec3 {
        self.b.row(i)
    }

    /// `A e_i`: the output direction paired with `s[i]`.
    pub fn left_vector(&self, i: usize) -> Vec3 {
        self.a.column(i)
    }

    pub fn reconstruct(&self) -> Mat3 {
        self.a * Mat3::diag(self.s[0], self.s[1], self.s[2]) * self.b
    }
}

pub fn svd3(m: &Mat3) -> SvdDecomp {
    let mut w = [m.column(0), m.column(1), m.column(2)];
    let mut v = [Vec3::X, Vec3::Y, Vec3::Z];

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let alpha = w[p].dot(&w[p]);
            let beta = w[q].dot(&w[q]);
            let gamma = w[p].dot(&w[q]);
            if gamma == 0.0 || gamma.abs() <= ORTHO_TOL * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let cs = 1.0 / (1.0 + t * t).sqrt();
            let sn = cs * t;
            let (wp, wq) = (w[p], w[q]);
            w[p] = wp * cs - wq * sn;
            w[q] = wp * sn + wq * cs;
            let (vp, vq) = (v[p], v[q]);
            v[p] = vp * cs - vq * sn;
            v[q] = vp * sn + vq * cs;
        }
        if !rotated {
            break;
        }
    }

    let norms = [w[0].norm(), w[1].norm(), w[2].norm()];
    let mut order = [0usize, 1, 2];
    // stable: equal values keep column order
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(core::cmp::Ordering::Equal));

    let s = [norms[order[0]], norms[order[1]], norms[order[2]]];
    let mut cols = [w[order[0]], w[order[1]], w[order[2]]];
    let mut rights = [v[order[0]], v[order[1]], v[order[2]]];

    for k in 0..3 {
        if leading_sign(&rights[k]) < 0.0 {
            rights[k] = -rights[k];
            cols[k] = -cols[k];
        }
    }

    let tiny = f64::EPSILON * 8.0 * s[0].max(f64::MIN_POSITIVE);
    let u0 = if s[0] > tiny { cols[0] * (1.0 / s[0]) } else { Vec3::X };
    let u1 = if s[1] > tiny {
        let g = cols[1] - u0 * u0.dot(&cols[1]);
        let gn = g.norm();
        if gn > 0.0 {
            g * (1.0 / gn)
        } else {
            any_perpendicular(&u0)
        }
    } else {
        any_perpendicular(&u0)
    };
    let mut u2 = u0.cross(&u1);
    if s[2] > tiny && u2.dot(&cols[2]) < 0.0 {
        u2 = -u2;
    }

    SvdDecomp {
        a: Mat3::from_columns(u0, u1, u2),
        s,
        b: Mat3::from_rows(rights[0], rights[1], rights[2]),
    }
}

/// Sign of the largest-magnitude entry; the first index wins ties.
fn leading_sign(v: &Vec3) -> f64 {
    let mut best = 0;
    for i in 1..3 {
        if v[i].abs() > v[best].abs() + 1e-14 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// A unit vector perpendicular to `u`, chosen from the coordinate axis least
/// aligned with it.
fn any_perpendicular(u: &Vec3) -> Vec3 {
    let mut axis = 0;
    for i in 1..3 {
        if u[i].abs() < u[axis].abs() {
            axis = i;
        }
    }
    let mut e = Vec3::ZERO;
    e[axis] = 1.0;
    let g = e - *u * u.dot(&e);
    g.normalized()
}
