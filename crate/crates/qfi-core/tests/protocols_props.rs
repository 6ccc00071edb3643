mod common;

use common::{linear_unital, unit_vec};
use proptest::prelude::*;
use qfi_core::bloch::ChannelFamily;
use qfi_core::fisher::DEFAULT_PAIR_EPS;
use qfi_core::protocols::*;

fn families() -> Vec<ChannelFamily> {
    vec![ChannelFamily::phase_flip(), ChannelFamily::depolarizing(), ChannelFamily::phase_shift(), ChannelFamily::gad(0.8).unwrap()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn spectator_permutation_symmetry(n in 3usize..=5, c in unit_vec(), r0 in unit_vec(), r in 0.0f64..=1.0, l in 0.05f64..0.9, f in 0usize..4, i in 1usize..5, j in 1usize..5) {
        let (i, j) = (1 + (i - 1) % (n - 1), 1 + (j - 1) % (n - 1));
        let spec = ProtocolSpec::correlated(families()[f].clone(), l, n, r, c, r0);
        let b = build_state(&spec, 0).unwrap();
        let swapped = b.state.swap_qubits(i, j).unwrap();
        let diff = b.state.coeffs().iter().zip(swapped.coeffs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12);
        let dswapped = b.dstate.swap_qubits(i, j).unwrap();
        let ddiff = b.dstate.coeffs().iter().zip(dswapped.coeffs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(ddiff < 1e-12);
    }

    #[test]
    fn local_measurement_below_qfi(n in 2usize..=4, c in unit_vec(), r0 in unit_vec(), r in 0.0f64..=0.9, l in 0.05f64..0.9, f in 0usize..4) {
        let spec = ProtocolSpec::correlated(families()[f].clone(), l, n, r, c, r0);
        let rec = local_measurement_sim(&spec, MEASUREMENT_FD_STEP).unwrap();
        let q = protocol_qfi(&spec, 0, DEFAULT_PAIR_EPS).unwrap().exact;
        prop_assert!(rec.cfi <= q + 1e-8, "{} > {q}", rec.cfi);
        prop_assert!(rec.cfi <= rec.cfi_ungrouped + 1e-10);
    }

    #[test]
    fn grouping_is_lossless(n in 2usize..=4, c in unit_vec(), r0 in unit_vec(), r in 0.0f64..=0.9, l in 0.05f64..0.9, f in 0usize..4) {
        let spec = ProtocolSpec::correlated(families()[f].clone(), l, n, r, c, r0);
        let rec = local_measurement_sim(&spec, MEASUREMENT_FD_STEP).unwrap();
        prop_assert!((rec.cfi - rec.cfi_ungrouped).abs() < 1e-10, "{} vs {}", rec.cfi, rec.cfi_ungrouped);
    }

    #[test]
    fn lowest_order_general_form(fam in linear_unital(), n in 2usize..=4, (c, r0) in common::perpendicular_pair()) {
        let ch = fam.at(0.1);
        let r = 1e-3;
        let spec = ProtocolSpec::correlated(fam.family(), 0.1, n, r, c, r0);
        let rec = local_measurement_sim(&spec, MEASUREMENT_FD_STEP).unwrap();
        let want = measurement_cfi_general(&ch, n, &c, &r0).unwrap();
        prop_assert!((rec.cfi / (r * r) - want).abs() <= 0.02 * want + 1e-6, "{} vs {want}", rec.cfi / (r * r));
    }
}

#[test]
fn saturation_for_equal_singular_values() {
    for fam in [ChannelFamily::phase_flip(), ChannelFamily::depolarizing()] {
        let ch = fam.eval(0.3).unwrap();
        let (c, r0) = canonical_directions(&ch);
        for n in 2..=5 {
            for r in [1e-3, 3e-3, 1e-2] {
                let spec = ProtocolSpec::correlated(fam.clone(), 0.3, n, r, c, r0);
                let cfi = local_measurement_sim(&spec, MEASUREMENT_FD_STEP).unwrap().cfi;
                let q = protocol_qfi(&spec, 0, DEFAULT_PAIR_EPS).unwrap().exact;
                let rel = (cfi - q).abs() / q;
                assert!(rel < 2.0 * n as f64 * r * r, "{} n={n} r={r}: {rel}", fam.name());
            }
        }
    }
}

#[test]
fn rotation_generator_is_not_saturated_along_r0() {
    // Ṁ for a phase shift maps r0 onto a perpendicular direction, so the
    // projections along r0 only see r0ᵀṀr0 = −sin λ
    let fam = ChannelFamily::phase_shift();
    let l = 0.3f64;
    let ch = fam.eval(l).unwrap();
    let (c, r0) = canonical_directions(&ch);
    for n in 2..=4 {
        let r = 1e-3;
        let spec = ProtocolSpec::correlated(fam.clone(), l, n, r, c, r0);
        let cfi = local_measurement_sim(&spec, MEASUREMENT_FD_STEP).unwrap().cfi / (r * r);
        let general = measurement_cfi_general(&ch, n, &c, &r0).unwrap();
        assert!((general - n as f64 * l.sin().powi(2)).abs() < 1e-12);
        assert!((cfi - general).abs() < 1e-3 * general);
        assert!((measurement_cfi_lowest_order(&ch, n, &c, &r0).unwrap() - n as f64).abs() < 1e-12);
    }
}

#[test]
fn escher_slack_positive_on_default_grid() {
    let (ls, rs) = escher_default_grid();
    let rows = escher_phase_flip_demo(&ls, &rs).unwrap();
    assert_eq!(rows.len(), 19 * 9);
    for row in rows {
        assert!(row.slack > 0.0);
        assert!((row.exact - row.closed_form).abs() <= 1e-10 * row.closed_form);
    }
}
