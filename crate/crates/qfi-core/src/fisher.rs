//! Exact SLD, quantum Fisher information and classical Fisher information from
//! dense operators.

use crate::dense::DenseOperator;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Pairs with `p_j + p_k` below `DEFAULT_PAIR_EPS · p_max` are skipped.
pub const DEFAULT_PAIR_EPS: f64 = 1e-12;
/// Eigenvalues down to `−PSD_TOL` are treated as zero.
pub const PSD_TOL: f64 = 1e-9;
/// Outcomes with probability below this are skipped in the CFI sum.
pub const DEFAULT_CFI_EPS: f64 = 1e-14;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SldResult {
    pub l: DenseOperator,
    pub qfi: f64,
    /// Eigenvalues of `ρ`, ascending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors of `ρ` as columns.
    pub eigenvectors: DenseOperator,
    /// Ordered pairs `(j, k)` skipped because `p_j + p_k` was negligible.
    pub dropped_pairs: usize,
}

fn check_inputs(rho: &DenseOperator, drho: &DenseOperator) -> Result<()> {
    if rho.n() != drho.n() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: drho.dim() });
    }
    rho.check_hermitian(HERMITIAN_TOL)?;
    drho.check_hermitian(HERMITIAN_TOL)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::NotNormalized(tr.re));
    }
    let dtr = drho.trace();
    if dtr.norm() > TRACE_TOL {
        return Err(Error::NotTraceless(dtr.norm()));
    }
    Ok(())
}

/// Matrix of `op` in the basis given by the columns of `v`: `V† · op · V`.
fn in_basis(op: &DenseOperator, v: &DenseOperator) -> Result<DenseOperator> {
    v.adjoint().matmul(op)?.matmul(v)
}

/// `L = 2 Σ ⟨φj|ρ̇|φk⟩/(p_j+p_k) |φj⟩⟨φk|` over pairs with
/// `p_j + p_k ≥ eps · p_max`, and `H = Tr[ρ̇ L]`.
pub fn sld_exact(rho: &DenseOperator, drho: &DenseOperator, eps: f64) -> Result<SldResult> {
    check_inputs(rho, drho)?;
    let eig = rho.eigh();
    let lowest = eig.values[0];
    if lowest < -PSD_TOL {
        return Err(Error::NotPositive(lowest));
    }
    let p: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    let threshold = eps * pmax;
    let d = in_basis(drho, &eig.vectors)?;
    let dim = rho.dim();
    let mut lt = DenseOperator::zeros(rho.n())?;
    let mut dropped = 0;
    for j in 0..dim {
        for k in 0..dim {
            let s = p[j] + p[k];
            if s < threshold || s == 0.0 {
                dropped += 1;
                continue;
            }
            lt.set(j, k, d.get(j, k) * (2.0 / s));
        }
    }
    let l = lt.conjugate(&eig.vectors)?;
    let qfi = drho.trace_product(&l)?.re;
    Ok(SldResult { l, qfi, eigenvalues: p, eigenvectors: eig.vectors, dropped_pairs: dropped })
}

pub fn qfi_exact(rho: &DenseOperator, drho: &DenseOperator, eps: f64) -> Result<f64> {
    Ok(sld_exact(rho, drho, eps)?.qfi)
}

/// QFI with `ρ̇` from a central difference of step `h`.
pub fn qfi_numeric_derivative(
    state_at: &dyn Fn(f64) -> Result<DenseOperator>,
    lambda0: f64,
    h: f64,
    eps: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let rho = state_at(lambda0)?;
    let plus = state_at(lambda0 + h)?;
    let minus = state_at(lambda0 - h)?;
    let drho = (&plus - &minus).scale_re(0.5 / h);
    qfi_exact(&rho, &drho, eps)
}

/// Outcome probabilities with their λ-derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbModel {
    outcomes: Vec<(f64, f64)>,
}

impl ProbModel {
    pub fn new(outcomes: Vec<(f64, f64)>) -> Result<Self> {
        let total: f64 = outcomes.iter().map(|o| o.0).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidModel { what: "probabilities do not sum to 1", value: total - 1.0 });
        }
        let dtotal: f64 = outcomes.iter().map(|o| o.1).sum();
        if dtotal.abs() > 1e-8 {
            return Err(Error::InvalidModel { what: "derivatives do not sum to 0", value: dtotal });
        }
        if let Some(neg) = outcomes.iter().map(|o| o.0).find(|&p| p < -1e-12) {
            return Err(Error::InvalidModel { what: "negative probability", value: neg });
        }
        if outcomes.iter().any(|o| !o.0.is_finite() || !o.1.is_finite()) {
            return Err(Error::InvalidModel { what: "non-finite entry", value: f64::NAN });
        }
        Ok(ProbModel { outcomes })
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }
}

/// `Σ_x (∂p_x)² / p_x` over outcomes with `p_x ≥ eps`.
pub fn cfi(model: &ProbModel, eps: f64) -> f64 {
    model.outcomes.iter().filter(|o| o.0 >= eps).map(|&(p, dp)| dp * dp / p).sum()
}

/// Probabilities `Tr[Π ρ]` and derivatives `Tr[Π ρ̇]` of a projective measurement.
pub fn measurement_model(projectors: &[DenseOperator], rho: &DenseOperator, drho: &DenseOperator) -> Result<ProbModel> {
    let mut outcomes = Vec::with_capacity(projectors.len());
    for proj in projectors {
        outcomes.push((proj.trace_product(rho)?.re, proj.trace_product(drho)?.re));
    }
    ProbModel::new(outcomes)
}

/// Eigenprojectors of a Hermitian operator, one rank-one projector per
/// basis vector. Within a degenerate eigenspace the basis is fixed by
/// projecting the computational basis vectors in order, so the result does
/// not depend on how the eigensolver splits the space.
pub fn eigenbasis_projectors(op: &DenseOperator) -> Result<Vec<DenseOperator>> {
    let n = op.n();
    let dim = op.dim();
    let scale = op.max_abs();
    let eig = op.eigh();
    let tol = 1e-10 * scale.max(1e-300);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eig.values[end] - eig.values[start] <= tol {
            end += 1;
        }
        let block: Vec<Vec<Complex64>> = (start..end).map(|k| eig.vectors.column(k)).collect();
        if block.len() == 1 {
            basis.push(block.into_iter().next().expect("one vector"));
        } else {
            basis.extend(canonical_subspace_basis(&block, dim));
        }
        start = end;
    }
    basis
        .iter()
        .map(|v| DenseOperator::dyad(n, v, v))
        .collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// An orthonormal basis of `span(block)` built from the projections of
/// `e_0, e_1, …` onto it.
fn canonical_subspace_basis(block: &[Vec<Complex64>], dim: usize) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(block.len());
    for i in 0..dim {
        if out.len() == block.len() {
            break;
        }
        // projection of e_i onto the block subspace: Σ_b ⟨b|e_i⟩ b
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for b in block {
            let c = b[i].conj();
            v.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        for u in &out {
            let c = dot(u, &v);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let norm = dot(&v, &v).re.sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push(v);
        }
    }
    out
}

/// Projective measurement in the eigenbasis of the SLD.
pub fn sld_eigen_measurement(sld: &SldResult) -> Result<Vec<DenseOperator>> {
    eigenbasis_projectors(&sld.l)
}
