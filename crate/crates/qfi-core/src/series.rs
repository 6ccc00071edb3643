//! The QFI as a power series in the purity, `H = Σ_j r^j H^(j)`, and the
//! lowest-order closed forms for single-qubit and pairwise-correlated
//! protocols.

use crate::bloch::{svd3, BlochChannel};
use crate::dense::DenseOperator;
use crate::fisher::eigenbasis_projectors;
use crate::linalg::{check_unit, Mat3, Vec3};
use crate::mstate::OrderedState;
use crate::{Error, Result};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Shift and shift-derivative magnitudes below this count as zero.
pub const UNITAL_TOL: f64 = 1e-12;
/// Tolerance on `|c · r0|` for the perpendicular closed forms.
pub const PERP_TOL: f64 = 1e-9;

/// Per-order output state `ρ^(j)` and its derivative `∂ρ^(j)/∂λ`.
#[derive(Clone, Debug)]
pub struct StateSeries {
    pub rho: Vec<DenseOperator>,
    pub drho: Vec<DenseOperator>,
}

impl StateSeries {
    /// Orders of the state after `ch` acts on `qubit` of the ordered input.
    pub fn from_input(input: &OrderedState, ch: &BlochChannel, qubit: usize) -> Result<Self> {
        let mut rho = Vec::with_capacity(input.max_order() + 1);
        let mut drho = Vec::with_capacity(input.max_order() + 1);
        for o in input.orders() {
            rho.push(o.apply_channel(ch, qubit)?.to_dense()?);
            drho.push(o.apply_channel_derivative(ch, qubit)?.to_dense()?);
        }
        Ok(StateSeries { rho, drho })
    }

    pub fn max_order(&self) -> usize {
        self.rho.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct SldSeries {
    pub orders: Vec<DenseOperator>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QfiSeries {
    /// `H^(0..=K)`.
    pub orders: Vec<f64>,
}

impl QfiSeries {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    /// `Σ_j r^j H^(j)`.
    pub fn estimate(&self, r: f64) -> f64 {
        self.orders.iter().rev().fold(0.0, |acc, h| acc * r + h)
    }
}

/// Solves `∂ρ^(k) = ½ Σ_{j≤k} {L^(k−j), ρ^(j)}` for `L^(0..=k_max)`, one
/// order at a time, in the eigenbasis of `ρ^(0)`.
pub fn sld_orders(series: &StateSeries, k_max: usize) -> Result<SldSeries> {
    if k_max > series.max_order() {
        return Err(Error::DimensionMismatch { expected: k_max, found: series.max_order() });
    }
    let rho0 = &series.rho[0];
    let eig = rho0.eigh();
    let pmax = eig.values.iter().cloned().fold(0.0, f64::max);
    if !(eig.values[0] > 1e-12 * pmax) {
        return Err(Error::SingularZerothOrder);
    }
    let v = &eig.vectors;
    let vd = v.adjoint();
    let p = &eig.values;
    let mut orders: Vec<DenseOperator> = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut rhs = series.drho[k].scale_re(2.0);
        for j in 1..=k {
            let l = &orders[k - j];
            let rj = &series.rho[j];
            rhs = &rhs - &(&(l * rj) + &(rj * l));
        }
        let mut t = &(&vd * &rhs) * v;
        for a in 0..t.dim() {
            for b in 0..t.dim() {
                let x = t.get(a, b) / (p[a] + p[b]);
                t.set(a, b, x);
            }
        }
        orders.push(&(v * &t) * &vd);
    }
    Ok(SldSeries { orders })
}

/// `H^(j) = Σ_k Tr[∂ρ^(j−k) L^(k)]`.
pub fn qfi_orders(series: &StateSeries, sld: &SldSeries, k_max: usize) -> Result<QfiSeries> {
    if k_max >= sld.orders.len() {
        return Err(Error::DimensionMismatch { expected: k_max, found: sld.orders.len() - 1 });
    }
    let mut orders = Vec::with_capacity(k_max + 1);
    for j in 0..=k_max {
        let mut h = 0.0;
        for k in 0..=j {
            h += series.drho[j - k].trace_product(&sld.orders[k])?.re;
        }
        orders.push(h);
    }
    Ok(QfiSeries { orders })
}

/// Series of the QFI for `ch` acting on qubit 0 of the ordered input.
pub fn qfi_series(input: &OrderedState, ch: &BlochChannel, k_max: usize) -> Result<QfiSeries> {
    let series = StateSeries::from_input(input, ch, 0)?;
    let sld = sld_orders(&series, k_max)?;
    qfi_orders(&series, &sld, k_max)
}

fn require_unital(ch: &BlochChannel) -> Result<()> {
    if !ch.is_unital(UNITAL_TOL) {
        return Err(Error::WrongBranch("a unital channel (d = 0) is required"));
    }
    Ok(())
}

fn require_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::TooFewQubits { n, min });
    }
    Ok(())
}

/// `r0ᵀ Ṁᵀ Ṁ r0`, the `r²` coefficient for a single qubit.
pub fn sqsc_unital_h2(ch: &BlochChannel, r0: &Vec3) -> Result<f64> {
    require_unital(ch)?;
    check_unit(r0, "r0", 1e-9)?;
    let v = ch.dm.mul_vec(r0);
    Ok(v.dot(&v))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqscOptimum {
    pub h2_opt: f64,
    pub r0_opt: Vec3,
    pub meas_dir: Vec3,
}

/// `s1²` with input `Bᵀe1` and measurement along `A e1` from `Ṁ = A S B`.
pub fn sqsc_unital_opt(ch: &BlochChannel) -> Result<SqscOptimum> {
    require_unital(ch)?;
    let svd = svd3(&ch.dm);
    if svd.s[0] == 0.0 {
        return Err(Error::NoInformation);
    }
    Ok(SqscOptimum { h2_opt: svd.s[0] * svd.s[0], r0_opt: svd.right_vector(0), meas_dir: svd.left_vector(0) })
}

/// Zeroth-order QFI for a parameter-dependent shift:
/// `ḋ·ḋ + [∂(d²)/∂λ]² / (4(1 − d²))`, or `ḋ·ḋ` when `|d| = 1`.
pub fn sqsc_nonunital_h0(ch: &BlochChannel) -> Result<f64> {
    if ch.dd.max_abs() < UNITAL_TOL {
        return Err(Error::WrongBranch("the shift d must depend on the parameter"));
    }
    let d2 = ch.d.dot(&ch.d);
    let dd2 = ch.dd.dot(&ch.dd);
    if d2.sqrt() > 1.0 - 1e-9 {
        return Ok(dd2);
    }
    let dsq = 2.0 * ch.d.dot(&ch.dd);
    Ok(dd2 + dsq * dsq / (4.0 * (1.0 - d2)))
}

/// Lowest-order QFI for a constant nonzero shift:
/// `r0ᵀ[ṀᵀṀ + d²/(1 − d²) Ṁᵀ P_d̂ Ṁ] r0`.
pub fn sqsc_nonunital_const_h2(ch: &BlochChannel, r0: &Vec3) -> Result<f64> {
    check_unit(r0, "r0", 1e-9)?;
    let d = ch.d.norm();
    if d < UNITAL_TOL || ch.dd.max_abs() >= UNITAL_TOL {
        return Err(Error::WrongBranch("a constant nonzero shift d is required"));
    }
    if d > 1.0 - 1e-9 {
        return Err(Error::SingularZerothOrder);
    }
    let v = ch.dm.mul_vec(r0);
    let along = ch.d.dot(&v) / d;
    Ok(v.dot(&v) + d * d / (1.0 - d * d) * along * along)
}

/// `r²` coefficient of the pairwise-correlated QFI:
/// `r0ᵀ[(I−Pc)ṀᵀṀ(I−Pc) + (2−n) Pc ṀᵀṀ Pc] r0 + (n−1) cᵀṀᵀṀc`.
pub fn corr_h2(ch: &BlochChannel, n: usize, c: &Vec3, r0: &Vec3) -> Result<f64> {
    require_unital(ch)?;
    require_n(n, 2)?;
    check_unit(c, "c", 1e-9)?;
    check_unit(r0, "r0", 1e-9)?;
    let cr = c.dot(r0);
    let perp = ch.dm.mul_vec(&(*r0 - *c * cr));
    let mc = ch.dm.mul_vec(c);
    let mc2 = mc.dot(&mc);
    let nf = n as f64;
    Ok(perp.dot(&perp) + (2.0 - nf) * cr * cr * mc2 + (nf - 1.0) * mc2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

/// `n s1² − s1²(1 − s2²/s1²) ≤ H^(2) ≤ n s1²`; both zero when `s1 = 0`.
pub fn corr_bounds(ch: &BlochChannel, n: usize) -> Result<Bounds> {
    require_unital(ch)?;
    require_n(n, 2)?;
    let s = svd3(&ch.dm).s;
    let (s1, s2) = (s[0] * s[0], s[1] * s[1]);
    if s1 == 0.0 {
        return Ok(Bounds { lower: 0.0, upper: 0.0 });
    }
    let nf = n as f64;
    Ok(Bounds { lower: nf * s1 - s1 * (1.0 - s2 / s1), upper: nf * s1 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainRange {
    pub lo: f64,
    pub hi: f64,
}

/// Range of `H_corr / H_sqsc`: `[n − (1 − s2²/s1²), n]`.
pub fn corr_gain_ratio(ch: &BlochChannel, n: usize) -> Result<GainRange> {
    require_unital(ch)?;
    require_n(n, 2)?;
    let s = svd3(&ch.dm).s;
    if s[0] == 0.0 {
        return Err(Error::NoInformation);
    }
    let ratio = (s[1] / s[0]) * (s[1] / s[0]);
    let nf = n as f64;
    Ok(GainRange { lo: nf - (1.0 - ratio), hi: nf })
}

/// How [`corr_h3_h4`] obtained its values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H4Method {
    ClosedForm,
    GenericSeries,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HigherOrders {
    pub h3: f64,
    pub h4: f64,
    pub method: H4Method,
}

/// Third and fourth orders of the correlated QFI for `c ⊥ r0`.
///
/// For `n ≥ 3` this evaluates the simplified closed form
///
/// ```text
/// (n−1)(r0×c)ᵀṀᵀṀ(r0×c) + ¼[r0ᵀGr0 + (n−1)cᵀGc]² + (n−1)|∂(Mr0 × Mc)|²
///   + ((n−1)(n−2)/2)[cᵀGc]²
/// ```
///
/// with `G = ∂(MᵀM)/∂λ`, and `h3 = 0`. For `n = 2`
/// both orders come from the generic series.
///
/// The simplified form omits trace terms that do not vanish in general; it
/// disagrees with [`qfi_series`] whenever `M` depends on λ (for `M = λI`,
/// `n = 3` it gives `2 + 21λ²` where the series gives `−2 + 5λ²`). Use
/// [`qfi_series`] when the actual coefficient is needed.
pub fn corr_h3_h4(ch: &BlochChannel, n: usize, c: &Vec3, r0: &Vec3) -> Result<HigherOrders> {
    require_unital(ch)?;
    require_n(n, 2)?;
    check_unit(c, "c", 1e-9)?;
    check_unit(r0, "r0", 1e-9)?;
    let cr = c.dot(r0);
    if cr.abs() > PERP_TOL {
        return Err(Error::NonPerpendicular(cr));
    }
    if n == 2 {
        let input = OrderedState::correlated(2, c, r0, 4)?;
        let h = qfi_series(&input, ch, 4)?;
        return Ok(HigherOrders { h3: h.orders[3], h4: h.orders[4], method: H4Method::GenericSeries });
    }
    let nf = n as f64;
    let g = ch.dm.transpose() * ch.m + ch.m.transpose() * ch.dm;
    let rc = r0.cross(c);
    let mrc = ch.dm.mul_vec(&rc);
    let first = (nf - 1.0) * mrc.dot(&mrc);
    let gr = g.bilinear(r0, r0);
    let gc = g.bilinear(c, c);
    let second = 0.25 * (gr + (nf - 1.0) * gc) * (gr + (nf - 1.0) * gc);
    let dcross = ch.dm.mul_vec(r0).cross(&ch.m.mul_vec(c)) + ch.m.mul_vec(r0).cross(&ch.dm.mul_vec(c));
    let third = (nf - 1.0) * dcross.dot(&dcross);
    let fourth = 0.5 * (nf - 1.0) * (nf - 2.0) * gc * gc;
    Ok(HigherOrders { h3: 0.0, h4: first + second + third + fourth, method: H4Method::ClosedForm })
}

/// Eigenprojectors of `∂ρ^(1)/∂λ`, which saturate the lowest-order QFI for
/// unital channels.
pub fn saturating_basis_lowest_order(drho1: &DenseOperator) -> Result<Vec<DenseOperator>> {
    eigenbasis_projectors(drho1)
}

/// `ṀᵀṀ`, the matrix behind every unital `r²` coefficient.
pub fn information_matrix(ch: &BlochChannel) -> Mat3 {
    ch.dm.gram()
}
