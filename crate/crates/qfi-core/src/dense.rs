//! Dense `2^n × 2^n` complex operators. Qubit 0 is the leftmost tensor
//! factor, i.e. the most significant bit of a basis index.

use crate::linalg::Vec3;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

/// Largest qubit count accepted for dense operators.
pub const DENSE_QUBIT_CAP: usize = 10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n: usize,
    dim: usize,
    /// Row-major entries.
    data: Vec<Complex64>,
}

/// Eigenvalues in ascending order with matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DenseOperator,
}

pub(crate) fn check_dense_cap(n: usize) -> Result<()> {
    if n > DENSE_QUBIT_CAP {
        return Err(Error::QubitCap { n, cap: DENSE_QUBIT_CAP });
    }
    Ok(())
}

impl DenseOperator {
    pub fn zeros(n: usize) -> Result<Self> {
        check_dense_cap(n)?;
        let dim = 1usize << n;
        Ok(DenseOperator { n, dim, data: vec![Complex64::zero(); dim * dim] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..m.dim {
            m.data[i * m.dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..m.dim {
            for j in 0..m.dim {
                m.data[i * m.dim + j] = f(i, j);
            }
        }
        Ok(m)
    }

    /// Builds from row-major entries; `entries.len()` must be `4^n`.
    pub fn from_rows(n: usize, entries: &[Complex64]) -> Result<Self> {
        check_dense_cap(n)?;
        let dim = 1usize << n;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(DenseOperator { n, dim, data: entries.to_vec() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let d = self.dim;
        let mut out = vec![Complex64::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                let dst = &mut out[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(DenseOperator { n: self.n, dim: d, data: out })
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `Tr[self · other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        self.same_shape(other)?;
        let d = self.dim;
        let mut t = Complex64::zero();
        for i in 0..d {
            for k in 0..d {
                t += self.data[i * d + k] * other.data[k * d + i];
            }
        }
        Ok(t)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `max |A_ij − conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        dev
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let dev = self.hermitian_deviation();
        if !(dev <= tol) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(())
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        check_dense_cap(self.n + other.n)?;
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = vec![Complex64::zero(); d * d];
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                if a.is_zero() {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out[(i * db + k) * d + j * db + l] = a * other.data[k * db + l];
                    }
                }
            }
        }
        Ok(DenseOperator { n: self.n + other.n, dim: d, data: out })
    }

    /// `U · self · U†`.
    pub fn conjugate(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    /// Hermitian eigendecomposition; the input is symmetrized first.
    pub fn eigh(&self) -> Eigen {
        let d = self.dim;
        let m = DMatrix::<Complex64>::from_fn(d, d, |i, j| {
            (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5
        });
        let e = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
        let mut vectors = DenseOperator { n: self.n, dim: d, data: vec![Complex64::zero(); d * d] };
        for (col, &k) in order.iter().enumerate() {
            for row in 0..d {
                vectors.data[row * d + col] = e.eigenvectors[(row, k)];
            }
        }
        Eigen { values, vectors }
    }

    /// Column `k` as a vector.
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.data[i * self.dim + k]).collect()
    }

    /// `|u⟩⟨v|` on `n` qubits.
    pub fn dyad(n: usize, u: &[Complex64], v: &[Complex64]) -> Result<Self> {
        let dim = 1usize << n;
        if u.len() != dim || v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: u.len().max(v.len()) });
        }
        Self::from_fn(n, |i, j| u[i] * v[j].conj())
    }

    /// The single-qubit `op` acting on qubit `k` of `n`.
    pub fn embed_one(op: &Self, k: usize, n: usize) -> Result<Self> {
        if op.n != 1 {
            return Err(Error::DimensionMismatch { expected: 2, found: op.dim });
        }
        if k >= n {
            return Err(Error::QubitIndex { index: k, n });
        }
        let mut out = Self::zeros(n)?;
        let shift = n - 1 - k;
        for col in 0..out.dim {
            let b = (col >> shift) & 1;
            for a in 0..2 {
                let v = op.data[a * 2 + b];
                if v.is_zero() {
                    continue;
                }
                let row = (col & !(1 << shift)) | (a << shift);
                out.data[row * out.dim + col] = v;
            }
        }
        Ok(out)
    }

    /// The two-qubit `op` acting on qubits `(i, j)` of `n`; `i` plays the
    /// role of the left factor of `op`.
    pub fn embed_two(op: &Self, i: usize, j: usize, n: usize) -> Result<Self> {
        if op.n != 2 {
            return Err(Error::DimensionMismatch { expected: 4, found: op.dim });
        }
        for q in [i, j] {
            if q >= n {
                return Err(Error::QubitIndex { index: q, n });
            }
        }
        if i == j {
            return Err(Error::QubitIndex { index: j, n });
        }
        let mut out = Self::zeros(n)?;
        let (si, sj) = (n - 1 - i, n - 1 - j);
        let clear = !((1usize << si) | (1usize << sj));
        for col in 0..out.dim {
            let b = (((col >> si) & 1) << 1) | ((col >> sj) & 1);
            for a in 0..4 {
                let v = op.data[a * 4 + b];
                if v.is_zero() {
                    continue;
                }
                let row = (col & clear) | ((a >> 1) << si) | ((a & 1) << sj);
                out.data[row * out.dim + col] = v;
            }
        }
        Ok(out)
    }

    /// Applies a single-qubit Kraus set `ρ ↦ Σ E ρ E†` on qubit `k`.
    pub fn apply_kraus(&self, kraus: &[DenseOperator], k: usize) -> Result<Self> {
        let mut out = Self::zeros(self.n)?;
        for e in kraus {
            let big = Self::embed_one(e, k, self.n)?;
            out = &out + &self.conjugate(&big)?;
        }
        Ok(out)
    }

    /// Projector `(I + σ·v)/2` for a unit vector `v`.
    pub fn bloch_projector(v: &Vec3) -> Self {
        let mut p = Self::identity(1).expect("one qubit").scale_re(0.5);
        let s = sigma(v).scale_re(0.5);
        p = &p + &s;
        p
    }
}

/// Pauli matrix for letter `0..4` (I, X, Y, Z).
pub fn pauli(letter: usize) -> DenseOperator {
    let (o, l) = (Complex64::zero(), Complex64::new(1.0, 0.0));
    let e = match letter {
        0 => [l, o, o, l],
        1 => [o, l, l, o],
        2 => [o, -I, I, o],
        3 => [l, o, o, -l],
        _ => panic!("pauli letter out of range"),
    };
    DenseOperator { n: 1, dim: 2, data: e.to_vec() }
}

/// `σ·v = v_x X + v_y Y + v_z Z`.
pub fn sigma(v: &Vec3) -> DenseOperator {
    let mut out = DenseOperator { n: 1, dim: 2, data: vec![Complex64::zero(); 4] };
    for (a, &c) in v.0.iter().enumerate() {
        out = &out + &pauli(a + 1).scale_re(c);
    }
    out
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, o: &DenseOperator) -> DenseOperator {
        assert_eq!(self.n, o.n, "operator dimensions differ");
        let mut out = self.clone();
        out.data.iter_mut().zip(&o.data).for_each(|(a, b)| *a += b);
        out
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, o: &DenseOperator) -> DenseOperator {
        assert_eq!(self.n, o.n, "operator dimensions differ");
        let mut out = self.clone();
        out.data.iter_mut().zip(&o.data).for_each(|(a, b)| *a -= b);
        out
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, o: &DenseOperator) -> DenseOperator {
        self.matmul(o).expect("operator dimensions differ")
    }
}

/// Single-qubit Kraus operators used as dense oracles for the builtin channels.
pub mod kraus {
    use super::*;

    fn op(e: [f64; 4]) -> DenseOperator {
        DenseOperator { n: 1, dim: 2, data: e.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    /// `ρ ↦ (1−λ)ρ + λ ZρZ`.
    pub fn phase_flip(lambda: f64) -> Vec<DenseOperator> {
        vec![pauli(0).scale_re((1.0 - lambda).sqrt()), pauli(3).scale_re(lambda.sqrt())]
    }

    /// `ρ ↦ λρ + (1−λ) I/2`, valid for `λ ∈ [−1/3, 1]`.
    pub fn depolarizing(lambda: f64) -> Vec<DenseOperator> {
        let w0 = ((1.0 + 3.0 * lambda) / 4.0).sqrt();
        let w = ((1.0 - lambda) / 4.0).sqrt();
        vec![pauli(0).scale_re(w0), pauli(1).scale_re(w), pauli(2).scale_re(w), pauli(3).scale_re(w)]
    }

    /// Generalized amplitude damping in the `ρ ↦ Σ E ρ E†` orientation, which
    /// gives the shift `d = λ(2p−1)ẑ`.
    pub fn gad(lambda: f64, p: f64) -> Vec<DenseOperator> {
        let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
        let (s, sl) = ((1.0 - lambda).sqrt(), lambda.sqrt());
        vec![
            op([sp, 0.0, 0.0, sp * s]),
            op([0.0, sp * sl, 0.0, 0.0]),
            op([sq * s, 0.0, 0.0, sq]),
            op([0.0, 0.0, sq * sl, 0.0]),
        ]
    }
}
