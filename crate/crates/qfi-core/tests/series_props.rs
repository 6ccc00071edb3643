mod common;

use common::{linear_unital, perpendicular_pair, unit_vec};
use proptest::prelude::*;
use qfi_core::bloch::{builtin, ChannelFamily};
use qfi_core::fisher::DEFAULT_PAIR_EPS;
use qfi_core::fit::{fit_polynomial, log_spaced};
use qfi_core::linalg::Vec3;
use qfi_core::mstate::OrderedState;
use qfi_core::protocols::{canonical_directions, protocol_qfi, ProtocolSpec};
use qfi_core::series::{corr_bounds, corr_h2, qfi_series, sqsc_unital_h2};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlated_closed_form_matches_generic(fam in linear_unital(), n in 2usize..=5, c in unit_vec(), r0 in unit_vec(), l in -0.5f64..0.5) {
        let ch = fam.at(l);
        let series = qfi_series(&OrderedState::correlated(n, &c, &r0, 2).unwrap(), &ch, 2).unwrap();
        let closed = corr_h2(&ch, n, &c, &r0).unwrap();
        prop_assert!((series.orders[2] - closed).abs() <= 1e-9 * closed.abs().max(1.0), "{} vs {closed}", series.orders[2]);
        prop_assert!(series.orders[0].abs() < 1e-12 && series.orders[1].abs() < 1e-12);
    }

    #[test]
    fn single_qubit_closed_form_matches_generic(fam in linear_unital(), r0 in unit_vec(), l in -0.5f64..0.5) {
        let ch = fam.at(l);
        let series = qfi_series(&OrderedState::initial(1, &r0, 2).unwrap(), &ch, 2).unwrap();
        prop_assert!((series.orders[2] - sqsc_unital_h2(&ch, &r0).unwrap()).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bounds_ordering(fam in linear_unital(), n in 2usize..=8, c in unit_vec(), r0 in unit_vec()) {
        let ch = fam.at(0.1);
        let b = corr_bounds(&ch, n).unwrap();
        let (cc, rc) = canonical_directions(&ch);
        let canonical = corr_h2(&ch, n, &cc, &rc).unwrap();
        prop_assert!(b.lower - 1e-9 <= canonical && canonical <= b.upper + 1e-9);
        prop_assert!(corr_h2(&ch, n, &c, &r0).unwrap() <= b.upper + 1e-9);
        prop_assert!((canonical - b.lower).abs() < 1e-9);
    }
}

fn unital_builtins() -> Vec<ChannelFamily> {
    vec![
        ChannelFamily::phase_shift(),
        ChannelFamily::phase_flip(),
        ChannelFamily::depolarizing(),
        ChannelFamily::pauli(Some(0.1), Some(0.05), None).unwrap(),
        builtin("custom_diag", &[("m1", "0"), ("m2", "0"), ("m3", "1-2*lambda")]).unwrap(),
    ]
}

/// Coefficients of `H/r²` fitted over `r ∈ [1e-3, 4e-3]`. A quadratic
/// through three points would alias the `r⁴` term into the linear one.
fn fitted(spec: &ProtocolSpec) -> Vec<f64> {
    let rs = log_spaced(1e-3, 4e-3, 9).unwrap();
    let ys: Vec<f64> = rs
        .iter()
        .map(|&r| {
            let s = ProtocolSpec { r, ..spec.clone() };
            protocol_qfi(&s, 0, DEFAULT_PAIR_EPS).unwrap().exact / (r * r)
        })
        .collect();
    fit_polynomial(&rs, &ys, 4).unwrap().coeffs
}

#[test]
fn exact_fit_recovers_second_order() {
    let (c, r0) = (Vec3::Z, Vec3::X);
    for fam in unital_builtins() {
        for l in [0.2, 0.45, 0.7] {
            let ch = fam.eval(l).unwrap();
            let single = ProtocolSpec::sqsc(fam.clone(), l, 0.0, r0);
            let h2 = sqsc_unital_h2(&ch, &r0).unwrap();
            let got = fitted(&single);
            if h2 > 1e-9 {
                assert!((got[0] - h2).abs() <= 1e-3 * h2, "{} sqsc λ={l}: {} vs {h2}", fam.name(), got[0]);
            }
            for n in 2..=4 {
                for (c, r0) in [(c, r0), canonical_directions(&ch)] {
                    let spec = ProtocolSpec::correlated(fam.clone(), l, n, 0.0, c, r0);
                    let want = corr_h2(&ch, n, &c, &r0).unwrap();
                    let got = fitted(&spec);
                    if want > 1e-9 {
                        assert!((got[0] - want).abs() <= 1e-3 * want, "{} n={n} λ={l}: {} vs {want}", fam.name(), got[0]);
                    }
                    if c.dot(&r0).abs() < 1e-12 {
                        assert!(got[1].abs() < 1e-6, "{} n={n}: H3 {}", fam.name(), got[1]);
                    }
                }
            }
        }
    }
}

#[test]
fn validity_regime_error() {
    let fam = ChannelFamily::phase_flip();
    let ch = fam.eval(0.3).unwrap();
    let (c, r0) = canonical_directions(&ch);
    for n in 2..=6 {
        let r = (0.01 / n as f64).sqrt();
        let exact = protocol_qfi(&ProtocolSpec::correlated(fam.clone(), 0.3, n, r, c, r0), 0, DEFAULT_PAIR_EPS).unwrap().exact;
        let lowest = r * r * corr_h2(&ch, n, &c, &r0).unwrap();
        assert!((lowest - exact).abs() / exact < 0.02, "n={n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn perpendicular_third_order_vanishes(fam in linear_unital(), n in 2usize..=4, (c, r0) in perpendicular_pair()) {
        let ch = fam.at(0.2);
        let series = qfi_series(&OrderedState::correlated(n, &c, &r0, 3).unwrap(), &ch, 3).unwrap();
        prop_assert!(series.orders[3].abs() < 1e-10);
    }
}
