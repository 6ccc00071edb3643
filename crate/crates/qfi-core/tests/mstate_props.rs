mod common;

use common::{perpendicular_pair, unit_vec};
use num_complex::Complex64;
use proptest::prelude::*;
use qfi_core::bloch::ChannelFamily;
use qfi_core::dense::{kraus, pauli, sigma, DenseOperator};
use qfi_core::linalg::Vec3;
use qfi_core::mstate::{u_c, u_prep, OrderedState, PauliState};

const ID: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

fn letter(v: &Vec3) -> [f64; 4] {
    [0.0, v[0], v[1], v[2]]
}

/// Pauli coefficients of a product of single-qubit operators, qubit 0 first.
fn tensor(factors: &[[f64; 4]]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        out = out.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
    }
    out
}

fn axpy(acc: &mut [f64], s: f64, v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += s * b;
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Coefficients (in the `Tr[ρP]/2^n` convention) of a Hermitian operator.
fn coeffs_of(op: &DenseOperator) -> Vec<f64> {
    PauliState::from_dense(op).unwrap().coeffs().to_vec()
}

fn random_state(n: usize) -> impl Strategy<Value = PauliState> {
    prop::collection::vec(-1.0f64..1.0, 1usize << (2 * n))
        .prop_map(move |v| PauliState::from_coeffs(n, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pauli_product_rule(a in unit_vec(), b in unit_vec()) {
        let lhs = &sigma(&a) * &sigma(&b);
        let rhs = &pauli(0).scale_re(a.dot(&b)) + &sigma(&a.cross(&b)).scale(Complex64::i());
        prop_assert!((&lhs - &rhs).max_abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn u_c_on_single_letter(a in unit_vec(), c in unit_vec()) {
        let u = u_c(&c).unwrap();
        let lhs = sigma(&a).kron(&pauli(0)).unwrap().conjugate(&u).unwrap();
        let ac = a.dot(&c);
        let perp = a - c * ac;
        let mut want = tensor(&[letter(&c), ID]);
        want.iter_mut().for_each(|x| *x *= ac);
        axpy(&mut want, 1.0, &tensor(&[letter(&perp), letter(&c)]));
        prop_assert!(max_diff(&coeffs_of(&lhs), &want) < 1e-13);
    }

    #[test]
    fn u_c_on_two_letters(a in unit_vec(), b in unit_vec(), c in unit_vec()) {
        let u = u_c(&c).unwrap();
        let lhs = sigma(&a).kron(&sigma(&b)).unwrap().conjugate(&u).unwrap();
        let (alpha, beta) = (a.dot(&c), b.dot(&c));
        let (ap, bp) = (a - c * alpha, b - c * beta);
        let mut want = vec![0.0; 16];
        axpy(&mut want, alpha * beta, &tensor(&[letter(&c), letter(&c)]));
        axpy(&mut want, alpha, &tensor(&[ID, letter(&bp)]));
        axpy(&mut want, beta, &tensor(&[letter(&ap), ID]));
        axpy(&mut want, 1.0, &tensor(&[letter(&a.cross(&c)), letter(&b.cross(&c))]));
        prop_assert!(max_diff(&coeffs_of(&lhs), &want) < 1e-13);
    }
}

/// `Σ_k σ_r0^(k) σ_c^(rest) + (r0·c) Σ_k σ_c^(k) − n (r0·c) σ_c^⊗n`, over `N`.
fn first_order_closed_form(n: usize, c: &Vec3, r0: &Vec3) -> Vec<f64> {
    let big_n = (1usize << n) as f64;
    let rc = r0.dot(c);
    let mut out = vec![0.0; 1usize << (2 * n)];
    for k in 0..n {
        let spread: Vec<[f64; 4]> = (0..n).map(|j| if j == k { letter(r0) } else { letter(c) }).collect();
        axpy(&mut out, 1.0 / big_n, &tensor(&spread));
        let local: Vec<[f64; 4]> = (0..n).map(|j| if j == k { letter(c) } else { ID }).collect();
        axpy(&mut out, rc / big_n, &tensor(&local));
    }
    axpy(&mut out, -(n as f64) * rc / big_n, &tensor(&vec![letter(c); n]));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn first_order_perpendicular(n in 2usize..=5, (c, r0) in perpendicular_pair()) {
        let state = OrderedState::correlated(n, &c, &r0, 1).unwrap();
        prop_assert!(max_diff(state.order(1).coeffs(), &first_order_closed_form(n, &c, &r0)) < 1e-13);
    }

    #[test]
    fn first_order_general(n in 2usize..=5, c in unit_vec(), r0 in unit_vec()) {
        let state = OrderedState::correlated(n, &c, &r0, 1).unwrap();
        prop_assert!(max_diff(state.order(1).coeffs(), &first_order_closed_form(n, &c, &r0)) < 1e-13);
    }

    #[test]
    fn pauli_path_matches_dense_u_prep(n in 2usize..=4, c in unit_vec(), r0 in unit_vec(), r in 0.0f64..=1.0) {
        let rho = PauliState::initial_state(n, r, &r0).unwrap();
        let pauli_path = rho.apply_u_prep(&c).unwrap();
        let dense_path = rho.conjugate(&u_prep(n, &c).unwrap()).unwrap();
        prop_assert!(max_diff(pauli_path.coeffs(), dense_path.coeffs()) < 1e-13);
    }
}

fn kraus_cases(lambda: f64, p: f64) -> Vec<(qfi_core::bloch::BlochChannel, Vec<DenseOperator>)> {
    vec![
        (ChannelFamily::phase_flip().eval(lambda).unwrap(), kraus::phase_flip(lambda)),
        (ChannelFamily::depolarizing().eval(lambda).unwrap(), kraus::depolarizing(lambda)),
        (ChannelFamily::gad(p).unwrap().eval(lambda).unwrap(), kraus::gad(lambda, p)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn channel_matches_kraus_1(s in random_state(1), l in 0.0f64..0.99, p in 0.0f64..=1.0) {
        for (ch, k) in kraus_cases(l, p) {
            let want = PauliState::from_dense(&s.to_dense().unwrap().apply_kraus(&k, 0).unwrap()).unwrap();
            prop_assert!(max_diff(s.apply_channel(&ch, 0).unwrap().coeffs(), want.coeffs()) < 1e-12);
        }
    }

    #[test]
    fn channel_matches_kraus_3(s in random_state(3), l in 0.0f64..0.99, p in 0.0f64..=1.0, q in 0usize..3) {
        for (ch, k) in kraus_cases(l, p) {
            let want = PauliState::from_dense(&s.to_dense().unwrap().apply_kraus(&k, q).unwrap()).unwrap();
            prop_assert!(max_diff(s.apply_channel(&ch, q).unwrap().coeffs(), want.coeffs()) < 1e-12);
        }
    }

    #[test]
    fn channel_commutes_with_orders(n in 2usize..=4, c in unit_vec(), r0 in unit_vec(), r in 0.0f64..=1.0, l in 0.0f64..0.99) {
        let ch = ChannelFamily::gad(0.8).unwrap().eval(l).unwrap();
        let ordered = OrderedState::correlated(n, &c, &r0, n).unwrap();
        let after = ordered.apply_channel(&ch, 0).unwrap().evaluate(r).unwrap();
        let before = ordered.evaluate(r).unwrap().apply_channel(&ch, 0).unwrap();
        prop_assert!(max_diff(after.coeffs(), before.coeffs()) < 1e-13);
        let full = PauliState::initial_state(n, r, &r0).unwrap().apply_u_prep(&c).unwrap().apply_channel(&ch, 0).unwrap();
        prop_assert!(max_diff(after.coeffs(), full.coeffs()) < 1e-13);
    }

    #[test]
    fn dense_round_trip(s in random_state(3)) {
        let back = PauliState::from_dense(&s.to_dense().unwrap()).unwrap();
        prop_assert!(max_diff(back.coeffs(), s.coeffs()) < 1e-14);
    }
}

#[test]
fn net_all_c_string_vanishes_at_first_order() {
    let c = Vec3::Z;
    let r0 = Vec3::new(0.6, 0.0, 0.8);
    for n in 2..=5 {
        let state = OrderedState::correlated(n, &c, &r0, 1).unwrap();
        let all_z: String = "Z".repeat(n);
        assert!(state.order(1).coeff_of(&all_z).unwrap().abs() < 1e-15);
        let single: String = core::iter::once('Z').chain(core::iter::repeat_n('I', n - 1)).collect();
        let want = 0.8 / (1u64 << n) as f64;
        assert!((state.order(1).coeff_of(&single).unwrap() - want).abs() < 1e-15);
    }
}
