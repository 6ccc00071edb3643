//! Least-squares polynomial fits used to read series coefficients off exact
//! QFI samples.

use crate::{Error, Result};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

/// Fits with a scaled-design condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    /// `coeffs[j]` multiplies `x^j`.
    pub coeffs: Vec<f64>,
    pub condition: f64,
    /// Largest absolute residual over the samples.
    pub max_residual: f64,
}

/// `count` points log-spaced over `[lo, hi]`, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || count < 2 {
        return Err(Error::InvalidGrid("log spacing needs 0 < lo <= hi and at least two points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect())
}

/// Least-squares fit of a degree-`degree` polynomial. The design matrix uses
/// `x / max|x|` so that its columns stay comparable in size.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.len() <= degree {
        return Err(Error::InvalidGrid("need more samples than the polynomial degree"));
    }
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(scale > 0.0) {
        return Err(Error::InvalidGrid("samples must not all be zero"));
    }
    let m = xs.len();
    let a = DMatrix::from_fn(m, degree + 1, |i, j| (xs[i] / scale).powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let sol = svd.solve(&y, 0.0).map_err(|_| Error::IllConditioned { condition })?;
    let residual = &a * &sol - &y;
    let max_residual = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let coeffs = sol.iter().enumerate().map(|(j, c)| c / scale.powi(j as i32)).collect();
    Ok(PolyFit { coeffs, condition, max_residual })
}
