//! n-qubit operators stored as real coefficients over Pauli strings.
//!
//! The coefficient of a string `P` is `Tr[ρP]/2^n`, so `ρ = Σ coeff[P]·P`.
//! Strings are indexed in base 4 with letters `I=0, X=1, Y=2, Z=3` and qubit 0
//! as the most significant digit, which is also the leftmost tensor factor.

use crate::bloch::BlochChannel;
use crate::dense::{check_dense_cap, pauli, sigma, DenseOperator};
use crate::linalg::{check_unit, Mat3, Vec3};
use crate::{Error, Result};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Largest qubit count accepted for Pauli-basis states.
pub const PAULI_QUBIT_CAP: usize = 14;

/// Default highest purity order tracked by [`OrderedState`].
pub const DEFAULT_MAX_ORDER: usize = 4;

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

#[derive(Clone, Debug, PartialEq)]
pub struct PauliState {
    n: usize,
    coeffs: Vec<f64>,
}

fn check_pauli_cap(n: usize) -> Result<()> {
    if n > PAULI_QUBIT_CAP {
        return Err(Error::QubitCap { n, cap: PAULI_QUBIT_CAP });
    }
    Ok(())
}

fn check_purity(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidPurity(r));
    }
    Ok(())
}

fn stride(n: usize, qubit: usize) -> usize {
    1usize << (2 * (n - 1 - qubit))
}

impl PauliState {
    pub fn zeros(n: usize) -> Result<Self> {
        check_pauli_cap(n)?;
        Ok(PauliState { n, coeffs: vec![0.0; 1usize << (2 * n)] })
    }

    /// `I^⊗n / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let mut s = Self::zeros(n)?;
        s.coeffs[0] = 1.0 / (1u64 << n) as f64;
        Ok(s)
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_pauli_cap(n)?;
        let len = 1usize << (2 * n);
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch { expected: len, found: coeffs.len() });
        }
        Ok(PauliState { n, coeffs })
    }

    /// `((I + r σ·r0)/2)^⊗n`.
    pub fn initial_state(n: usize, r: f64, r0: &Vec3) -> Result<Self> {
        check_purity(r)?;
        check_unit(r0, "r0", 1e-9)?;
        check_pauli_cap(n)?;
        let single = [0.5, 0.5 * r * r0[0], 0.5 * r * r0[1], 0.5 * r * r0[2]];
        let mut coeffs = vec![1.0];
        for _ in 0..n {
            let mut next = Vec::with_capacity(coeffs.len() * 4);
            for c in &coeffs {
                next.extend(single.iter().map(|s| c * s));
            }
            coeffs = next;
        }
        Ok(PauliState { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, index: usize) -> f64 {
        self.coeffs[index]
    }

    /// Coefficient of the string spelled by `label`, e.g. `"XZI"`.
    pub fn coeff_of(&self, label: &str) -> Result<f64> {
        Ok(self.coeffs[string_index(label, self.n)?])
    }

    pub fn trace(&self) -> f64 {
        self.coeffs[0] * (1u64 << self.n) as f64
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Nonzero entries as `(label, value)` pairs in index order.
    pub fn nonzero_entries(&self) -> Vec<(String, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (label(i, self.n), *c))
            .collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(PauliState { n: self.n, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(PauliState { n: self.n, coeffs })
    }

    pub fn scale(&self, s: f64) -> Self {
        PauliState { n: self.n, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    fn same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitIndex { index: q, n: self.n });
        }
        Ok(())
    }

    /// Affine Pauli-transfer rule on one qubit: `c_I' = keep·c_I`,
    /// `c_j' = Σ_k m_jk c_k + d_j c_I`.
    fn affine_on(&self, m: &Mat3, d: &Vec3, keep_identity: f64, qubit: usize) -> Result<Self> {
        self.check_qubit(qubit)?;
        let s = stride(self.n, qubit);
        let mut out = self.coeffs.clone();
        for base in 0..self.coeffs.len() {
            if !(base / s).is_multiple_of(4) {
                continue;
            }
            let c = [self.coeffs[base], self.coeffs[base + s], self.coeffs[base + 2 * s], self.coeffs[base + 3 * s]];
            out[base] = keep_identity * c[0];
            for j in 0..3 {
                out[base + (j + 1) * s] = m.0[j][0] * c[1] + m.0[j][1] * c[2] + m.0[j][2] * c[3] + d[j] * c[0];
            }
        }
        Ok(PauliState { n: self.n, coeffs: out })
    }

    /// The channel acting on `qubit`.
    pub fn apply_channel(&self, ch: &BlochChannel, qubit: usize) -> Result<Self> {
        self.affine_on(&ch.m, &ch.d, 1.0, qubit)
    }

    /// `∂/∂λ` of the channel acting on `qubit`, applied to a λ-independent input.
    pub fn apply_channel_derivative(&self, ch: &BlochChannel, qubit: usize) -> Result<Self> {
        self.affine_on(&ch.dm, &ch.dd, 0.0, qubit)
    }

    /// Conjugation by a two-qubit unitary given through its Pauli transfer
    /// matrix, acting on qubits `(i, j)` with `i` as its left factor.
    pub fn apply_transfer(&self, t: &Transfer16, i: usize, j: usize) -> Result<Self> {
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        if i == j {
            return Err(Error::QubitIndex { index: j, n: self.n });
        }
        let (si, sj) = (stride(self.n, i), stride(self.n, j));
        let mut out = vec![0.0; self.coeffs.len()];
        for base in 0..self.coeffs.len() {
            if (base / si) % 4 != 0 || (base / sj) % 4 != 0 {
                continue;
            }
            let mut c = [0.0; 16];
            for (q, slot) in c.iter_mut().enumerate() {
                *slot = self.coeffs[base + (q / 4) * si + (q % 4) * sj];
            }
            for p in 0..16 {
                let v: f64 = (0..16).map(|q| t.0[p][q] * c[q]).sum();
                out[base + (p / 4) * si + (p % 4) * sj] = v;
            }
        }
        Ok(PauliState { n: self.n, coeffs: out })
    }

    /// Conjugation by `U_prep = Π_{i<j} U_c(i, j)`, one pair at a time.
    pub fn apply_u_prep(&self, c: &Vec3) -> Result<Self> {
        let t = Transfer16::from_unitary(&u_c(c)?)?;
        let mut s = self.clone();
        for i in 0..self.n {
            for j in i + 1..self.n {
                s = s.apply_transfer(&t, i, j)?;
            }
        }
        Ok(s)
    }

    /// `U · ρ · U†` through the dense representation.
    pub fn conjugate(&self, u: &DenseOperator) -> Result<Self> {
        if u.n() != self.n {
            return Err(Error::DimensionMismatch { expected: 1 << self.n, found: u.dim() });
        }
        Self::from_dense(&self.to_dense()?.conjugate(u)?)
    }

    /// Exchanges the tensor slots of qubits `i` and `j`.
    pub fn swap_qubits(&self, i: usize, j: usize) -> Result<Self> {
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        if i == j {
            return Ok(self.clone());
        }
        let (si, sj) = (stride(self.n, i), stride(self.n, j));
        let mut out = vec![0.0; self.coeffs.len()];
        for (idx, c) in self.coeffs.iter().enumerate() {
            let (a, b) = ((idx / si) % 4, (idx / sj) % 4);
            let moved = idx + b * si + a * sj - a * si - b * sj;
            out[moved] = *c;
        }
        Ok(PauliState { n: self.n, coeffs: out })
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        check_dense_cap(self.n)?;
        let n = self.n;
        let dim = 1usize << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let masks = StringMasks::new(idx, n);
            for col in 0..dim {
                let row = col ^ masks.flip;
                data[row * dim + col] += masks.phase(col) * c;
            }
        }
        DenseOperator::from_rows(n, &data)
    }

    /// Pauli coefficients of a dense operator; fails when any coefficient has
    /// an imaginary part above `1e-10`, i.e. the operator is not Hermitian.
    pub fn from_dense(op: &DenseOperator) -> Result<Self> {
        let n = op.n();
        check_pauli_cap(n)?;
        let dim = op.dim();
        let norm = 1.0 / dim as f64;
        let mut coeffs = vec![0.0; dim * dim];
        let mut worst: f64 = 0.0;
        for (idx, slot) in coeffs.iter_mut().enumerate() {
            let masks = StringMasks::new(idx, n);
            let mut t = Complex64::new(0.0, 0.0);
            for col in 0..dim {
                t += op.get(col, col ^ masks.flip) * masks.phase(col);
            }
            t *= norm;
            worst = worst.max(t.im.abs());
            *slot = t.re;
        }
        if worst > 1e-10 {
            return Err(Error::NotHermitian(worst));
        }
        Ok(PauliState { n, coeffs })
    }
}

/// Bit masks describing how a Pauli string acts on computational basis states:
/// `P|b⟩ = phase(b)·|b ⊕ flip⟩`.
struct StringMasks {
    flip: usize,
    sign: usize,
    ys: u32,
}

impl StringMasks {
    fn new(idx: usize, n: usize) -> Self {
        let (mut flip, mut sign, mut ys) = (0usize, 0usize, 0u32);
        for q in 0..n {
            let letter = (idx >> (2 * (n - 1 - q))) & 3;
            let bit = 1usize << (n - 1 - q);
            match letter {
                1 => flip |= bit,
                2 => {
                    flip |= bit;
                    sign |= bit;
                    ys += 1;
                }
                3 => sign |= bit,
                _ => {}
            }
        }
        StringMasks { flip, sign, ys }
    }

    fn phase(&self, b: usize) -> Complex64 {
        // Y|b⟩ = i(−1)^b |1−b⟩, Z|b⟩ = (−1)^b |b⟩
        let neg = (b & self.sign).count_ones() % 2 == 1;
        let base = match self.ys % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if neg {
            -base
        } else {
            base
        }
    }
}

/// Label such as `"XZI"` for string index `idx` on `n` qubits.
pub fn label(idx: usize, n: usize) -> String {
    (0..n).map(|q| LETTERS[(idx >> (2 * (n - 1 - q))) & 3]).collect()
}

/// Inverse of [`label`].
pub fn string_index(label: &str, n: usize) -> Result<usize> {
    let letters: Vec<char> = label.chars().collect();
    if letters.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: letters.len() });
    }
    let mut idx = 0;
    for (pos, ch) in letters.iter().enumerate() {
        let l = LETTERS
            .iter()
            .position(|c| c == &ch.to_ascii_uppercase())
            .ok_or(Error::Expression { pos, msg: "Pauli letter must be one of I, X, Y, Z".into() })?;
        idx = idx * 4 + l;
    }
    Ok(idx)
}

/// Real 16×16 Pauli transfer matrix of a two-qubit unitary:
/// `U P_q U† = Σ_p T[p][q] P_p` with `T[p][q] = Tr[P_p U P_q U†]/4`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transfer16(pub [[f64; 16]; 16]);

impl Transfer16 {
    pub fn from_unitary(u: &DenseOperator) -> Result<Self> {
        if u.n() != 2 {
            return Err(Error::DimensionMismatch { expected: 4, found: u.dim() });
        }
        let paulis: Vec<DenseOperator> = (0..16)
            .map(|k| pauli(k / 4).kron(&pauli(k % 4)).expect("two qubits"))
            .collect();
        let ud = u.adjoint();
        let mut t = [[0.0; 16]; 16];
        for q in 0..16 {
            let moved = &(u * &paulis[q]) * &ud;
            for p in 0..16 {
                let v = paulis[p].trace_product(&moved)? * 0.25;
                if v.im.abs() > 1e-12 {
                    return Err(Error::NotHermitian(v.im.abs()));
                }
                t[p][q] = v.re;
            }
        }
        Ok(Transfer16(t))
    }
}

/// `(I⊗I + I⊗σc + σc⊗I − σc⊗σc)/2`, a Hermitian unitary; `ẑ` gives
/// controlled-Z.
pub fn u_c(c: &Vec3) -> Result<DenseOperator> {
    check_unit(c, "c", 1e-9)?;
    let id = pauli(0);
    let sc = sigma(c);
    let ii = id.kron(&id)?;
    let is = id.kron(&sc)?;
    let si = sc.kron(&id)?;
    let ss = sc.kron(&sc)?;
    Ok((&(&(&ii + &is) + &si) - &ss).scale_re(0.5))
}

/// Product of `u_c` over all `n(n−1)/2` qubit pairs.
pub fn u_prep(n: usize, c: &Vec3) -> Result<DenseOperator> {
    if n < 2 {
        return Err(Error::TooFewQubits { n, min: 2 });
    }
    let uc = u_c(c)?;
    let mut u = DenseOperator::identity(n)?;
    for i in 0..n {
        for j in i + 1..n {
            u = &DenseOperator::embed_two(&uc, i, j, n)? * &u;
        }
    }
    Ok(u)
}

/// An operator expanded in powers of the purity, `ρ = Σ_j r^j ρ^(j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedState {
    n: usize,
    orders: Vec<PauliState>,
}

impl OrderedState {
    /// Orders `0..=max_order` of `((I + r σ·r0)/2)^⊗n`: order `j` collects the
    /// strings with exactly `j` letters `σ(r0)`.
    pub fn initial(n: usize, r0: &Vec3, max_order: usize) -> Result<Self> {
        check_unit(r0, "r0", 1e-9)?;
        let full = PauliState::initial_state(n, 1.0, r0)?;
        let mut orders = vec![PauliState::zeros(n)?; max_order + 1];
        for (idx, &c) in full.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let weight = (0..n).filter(|&q| (idx >> (2 * q)) & 3 != 0).count();
            if weight <= max_order {
                orders[weight].coeffs[idx] = c;
            }
        }
        Ok(OrderedState { n, orders })
    }

    /// Purity orders of `U_prep ρ0^⊗n U_prep†` for the pairwise preparation
    /// with control direction `c`.
    pub fn correlated(n: usize, c: &Vec3, r0: &Vec3, max_order: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewQubits { n, min: 2 });
        }
        Self::initial(n, r0, max_order)?.apply_u_prep(c)
    }

    pub fn from_orders(orders: Vec<PauliState>) -> Result<Self> {
        let n = orders.first().map(|o| o.n).ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
        for o in &orders {
            if o.n != n {
                return Err(Error::DimensionMismatch { expected: n, found: o.n });
            }
        }
        Ok(OrderedState { n, orders })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn orders(&self) -> &[PauliState] {
        &self.orders
    }

    pub fn order(&self, j: usize) -> &PauliState {
        &self.orders[j]
    }

    /// `Σ_j r^j ρ^(j)`.
    pub fn evaluate(&self, r: f64) -> Result<PauliState> {
        let mut acc = PauliState::zeros(self.n)?;
        let mut rj = 1.0;
        for o in &self.orders {
            acc = acc.add(&o.scale(rj))?;
            rj *= r;
        }
        Ok(acc)
    }

    pub fn map(&self, f: impl Fn(&PauliState) -> Result<PauliState>) -> Result<Self> {
        let orders = self.orders.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(OrderedState { n: self.n, orders })
    }

    pub fn apply_channel(&self, ch: &BlochChannel, qubit: usize) -> Result<Self> {
        self.map(|o| o.apply_channel(ch, qubit))
    }

    pub fn apply_channel_derivative(&self, ch: &BlochChannel, qubit: usize) -> Result<Self> {
        self.map(|o| o.apply_channel_derivative(ch, qubit))
    }

    pub fn apply_u_prep(&self, c: &Vec3) -> Result<Self> {
        self.map(|o| o.apply_u_prep(c))
    }

    pub fn conjugate(&self, u: &DenseOperator) -> Result<Self> {
        self.map(|o| o.conjugate(u))
    }
}
