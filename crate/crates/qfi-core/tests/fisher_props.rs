use num_complex::Complex64;
use proptest::prelude::*;
use qfi_core::dense::DenseOperator;
use qfi_core::fisher::{cfi, eigenbasis_projectors, measurement_model, qfi_exact, sld_eigen_measurement, sld_exact};

const EPS: f64 = 1e-12;

fn complex_matrix(n: usize) -> impl Strategy<Value = DenseOperator> {
    let dim = 1usize << n;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let data: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        DenseOperator::from_rows(n, &data).unwrap()
    })
}

fn hermitian(n: usize) -> impl Strategy<Value = DenseOperator> {
    complex_matrix(n).prop_map(|g| (&g + &g.adjoint()).scale_re(0.5))
}

fn traceless(h: &DenseOperator) -> DenseOperator {
    let shift = h.trace().re / h.dim() as f64;
    h - &DenseOperator::identity(h.n()).unwrap().scale_re(shift)
}

/// `G G† / Tr`, full rank almost surely.
fn density(n: usize) -> impl Strategy<Value = DenseOperator> {
    complex_matrix(n).prop_map(|g| {
        let p = g.matmul(&g.adjoint()).unwrap();
        let t = p.trace().re;
        p.scale_re(1.0 / t)
    })
}

fn unitary(n: usize) -> impl Strategy<Value = DenseOperator> {
    hermitian(n).prop_map(|h| h.eigh().vectors)
}

fn family(n: usize) -> impl Strategy<Value = (DenseOperator, DenseOperator)> {
    (density(n), hermitian(n)).prop_map(|(rho, h)| (rho, traceless(&h)))
}

/// A unitary orbit `U(λ) ρ0 U(λ)†` through a state of rank `rank`.
fn deficient_family(n: usize, rank: usize) -> impl Strategy<Value = (DenseOperator, DenseOperator)> {
    (unitary(n), prop::collection::vec(0.05f64..1.0, rank), hermitian(n)).prop_map(move |(u, w, h)| {
        let total: f64 = w.iter().sum();
        let diag = DenseOperator::from_fn(n, |i, j| {
            if i == j && i < w.len() { Complex64::new(w[i] / total, 0.0) } else { Complex64::new(0.0, 0.0) }
        })
        .unwrap();
        let rho = diag.conjugate(&u).unwrap();
        let comm = &h.matmul(&rho).unwrap() - &rho.matmul(&h).unwrap();
        (rho, comm.scale(Complex64::new(0.0, -1.0)))
    })
}

fn sld_residual(rho: &DenseOperator, drho: &DenseOperator) -> f64 {
    let sld = sld_exact(rho, drho, EPS).unwrap();
    let sym = (&sld.l.matmul(rho).unwrap() + &rho.matmul(&sld.l).unwrap()).scale_re(0.5);
    let resid = drho - &sym;
    // null-space projector from the clamped spectrum
    let v = &sld.eigenvectors;
    let pmax = sld.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let null: Vec<usize> = (0..rho.dim()).filter(|&k| sld.eigenvalues[k] < EPS * pmax).collect();
    let q = DenseOperator::from_fn(rho.n(), |i, j| {
        null.iter().map(|&k| v.get(i, k) * v.get(j, k).conj()).sum()
    })
    .unwrap();
    let nn = q.matmul(&resid).unwrap().matmul(&q).unwrap();
    (&resid - &nn).frobenius()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qcrb_one_qubit((rho, drho) in family(1), meas in hermitian(1)) {
        let q = qfi_exact(&rho, &drho, EPS).unwrap();
        let model = measurement_model(&eigenbasis_projectors(&meas).unwrap(), &rho, &drho).unwrap();
        prop_assert!(cfi(&model, 1e-14) <= q + 1e-8);
    }

    #[test]
    fn qcrb_two_qubits((rho, drho) in family(2), meas in hermitian(2)) {
        let q = qfi_exact(&rho, &drho, EPS).unwrap();
        let model = measurement_model(&eigenbasis_projectors(&meas).unwrap(), &rho, &drho).unwrap();
        prop_assert!(cfi(&model, 1e-14) <= q + 1e-8);
    }

    #[test]
    fn sld_residual_full_rank((rho, drho) in family(2)) {
        prop_assert!(sld_residual(&rho, &drho) < 1e-8);
    }

    #[test]
    fn sld_residual_rank_deficient((rho, drho) in deficient_family(2, 2)) {
        prop_assert!(sld_residual(&rho, &drho) < 1e-8);
    }

    #[test]
    fn sld_measurement_saturates((rho, drho) in family(2)) {
        let sld = sld_exact(&rho, &drho, EPS).unwrap();
        let model = measurement_model(&sld_eigen_measurement(&sld).unwrap(), &rho, &drho).unwrap();
        let c = cfi(&model, 1e-14);
        prop_assert!((c - sld.qfi).abs() <= 1e-7 * sld.qfi.max(1e-300), "{c} vs {}", sld.qfi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn unitary_invariance((rho, drho) in family(2), u in unitary(2)) {
        let q0 = qfi_exact(&rho, &drho, EPS).unwrap();
        let q1 = qfi_exact(&rho.conjugate(&u).unwrap(), &drho.conjugate(&u).unwrap(), EPS).unwrap();
        prop_assert!((q0 - q1).abs() <= 1e-9 * q0.max(1e-300));
    }
}

#[test]
fn pure_state_orbit_matches_variance() {
    // for ρ = |ψ⟩⟨ψ| moved by H the QFI is 4 Var(H)
    let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
    let rho = DenseOperator::dyad(1, &psi, &psi).unwrap();
    let h = qfi_core::dense::pauli(1);
    let drho = (&h.matmul(&rho).unwrap() - &rho.matmul(&h).unwrap()).scale(Complex64::new(0.0, -1.0));
    let mean = h.trace_product(&rho).unwrap().re;
    let var = h.matmul(&h).unwrap().trace_product(&rho).unwrap().re - mean * mean;
    assert!((qfi_exact(&rho, &drho, EPS).unwrap() - 4.0 * var).abs() < 1e-12);
}
