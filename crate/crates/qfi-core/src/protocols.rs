//! End-to-end protocols: single-qubit single-channel (SQSC) and symmetric
//! pairwise-correlated inputs, their exact and series QFIs, the local
//! measurement scheme, gains and the Escher-bound comparison.

use crate::bloch::{svd3, BlochChannel, ChannelFamily, Unitality};
use crate::dense::DenseOperator;
use crate::fisher::{self, cfi, ProbModel, DEFAULT_CFI_EPS, DEFAULT_PAIR_EPS};
use crate::linalg::{check_unit, Vec3};
use crate::mstate::{OrderedState, PauliState, DEFAULT_MAX_ORDER};
use crate::series::{self, corr_gain_ratio, corr_h2, GainRange, QfiSeries};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Default central-difference step for measurement probabilities.
pub const MEASUREMENT_FD_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProtocolKind {
    Sqsc,
    Correlated { n: usize, c: Vec3 },
}

#[derive(Clone, Debug)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub r: f64,
    pub r0: Vec3,
    pub channel: ChannelFamily,
    pub lambda: f64,
}

impl ProtocolSpec {
    pub fn sqsc(channel: ChannelFamily, lambda: f64, r: f64, r0: Vec3) -> Self {
        ProtocolSpec { kind: ProtocolKind::Sqsc, r, r0, channel, lambda }
    }

    pub fn correlated(channel: ChannelFamily, lambda: f64, n: usize, r: f64, c: Vec3, r0: Vec3) -> Self {
        ProtocolSpec { kind: ProtocolKind::Correlated { n, c }, r, r0, channel, lambda }
    }

    pub fn n(&self) -> usize {
        match self.kind {
            ProtocolKind::Sqsc => 1,
            ProtocolKind::Correlated { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.r) {
            return Err(Error::InvalidPurity(self.r));
        }
        check_unit(&self.r0, "r0", 1e-9)?;
        if let ProtocolKind::Correlated { n, c } = self.kind {
            if n < 2 {
                return Err(Error::TooFewQubits { n, min: 2 });
            }
            check_unit(&c, "c", 1e-9)?;
        }
        Ok(())
    }

    fn at_lambda(&self, lambda: f64) -> Self {
        ProtocolSpec { lambda, ..self.clone() }
    }
}

/// The pre-measurement state in every form the rest of the crate consumes.
#[derive(Clone, Debug)]
pub struct BuiltState {
    pub channel: BlochChannel,
    /// Channel input expanded in powers of the purity.
    pub input: OrderedState,
    /// Output state at the spec's purity, in the Pauli basis.
    pub state: PauliState,
    /// `∂/∂λ` of [`BuiltState::state`].
    pub dstate: PauliState,
    pub rho: DenseOperator,
    pub drho: DenseOperator,
}

/// Prepares `ρ0^⊗n`, applies `U_prep` for correlated specs, then the channel
/// on qubit 0. `max_order` bounds the tracked purity orders.
pub fn build_state(spec: &ProtocolSpec, max_order: usize) -> Result<BuiltState> {
    spec.validate()?;
    let ch = spec.channel.eval(spec.lambda)?;
    let n = spec.n();
    let (input, prepared) = match spec.kind {
        ProtocolKind::Sqsc => (
            OrderedState::initial(1, &spec.r0, max_order)?,
            PauliState::initial_state(1, spec.r, &spec.r0)?,
        ),
        ProtocolKind::Correlated { c, .. } => (
            OrderedState::correlated(n, &c, &spec.r0, max_order)?,
            PauliState::initial_state(n, spec.r, &spec.r0)?.apply_u_prep(&c)?,
        ),
    };
    let state = prepared.apply_channel(&ch, 0)?;
    let dstate = prepared.apply_channel_derivative(&ch, 0)?;
    let rho = state.to_dense()?;
    let drho = dstate.to_dense()?;
    Ok(BuiltState { channel: ch, input, state, dstate, rho, drho })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QfiReport {
    pub exact: f64,
    /// `Σ_j r^j H^(j)`; `None` when the zeroth-order state is singular.
    pub series_estimate: Option<f64>,
    pub series: Option<QfiSeries>,
}

/// Exact QFI per channel invocation together with the series estimate.
pub fn protocol_qfi(spec: &ProtocolSpec, max_order: usize, eps: f64) -> Result<QfiReport> {
    let built = build_state(spec, max_order)?;
    let exact = fisher::qfi_exact(&built.rho, &built.drho, eps)?;
    let series = match series::qfi_series(&built.input, &built.channel, max_order) {
        Ok(s) => Some(s),
        Err(Error::SingularZerothOrder) => None,
        Err(e) => return Err(e),
    };
    let series_estimate = series.as_ref().map(|s| s.estimate(spec.r));
    Ok(QfiReport { exact, series_estimate, series })
}

/// Outcome statistics of the local measurement scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub n: usize,
    /// `(p(+,k), ∂p(+,k)/∂λ)` for `k = 0..n−1` plus among qubits `1..n`.
    pub plus: Vec<(f64, f64)>,
    /// `(p(−,k), ∂p(−,k)/∂λ)`.
    pub minus: Vec<(f64, f64)>,
    pub cfi: f64,
    /// CFI of the full `2^n`-outcome distribution.
    pub cfi_ungrouped: f64,
}

/// Probabilities of every `±` outcome string when each qubit is measured
/// along `axis`. Bit `n−1−k` of the outcome index is 1 when qubit `k` gave `+`.
pub fn local_outcome_probabilities(state: &PauliState, axis: &Vec3) -> Result<Vec<f64>> {
    check_unit(axis, "measurement axis", 1e-9)?;
    let n = state.n();
    // Tr[(I ± σ·a)/2 · P] per letter: I → 1, σ_j → ±a_j
    let mut cur: Vec<f64> = state.coeffs().to_vec();
    let mut width = 1usize;
    for _ in 0..n {
        // contract the leading letter of each string against both outcomes
        let rest = cur.len() / (4 * width);
        let mut next = vec![0.0; 2 * width * rest];
        for hi in 0..width {
            for lo in 0..rest {
                let get = |l: usize| cur[(hi * 4 + l) * rest + lo];
                let along = axis[0] * get(1) + axis[1] * get(2) + axis[2] * get(3);
                next[(hi * 2 + 1) * rest + lo] = get(0) + along;
                next[(hi * 2) * rest + lo] = get(0) - along;
            }
        }
        cur = next;
        width *= 2;
    }
    Ok(cur)
}

fn grouped(n: usize, probs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let rest_mask = (1usize << (n - 1)) - 1;
    for (s, p) in probs.iter().enumerate() {
        let k = (s & rest_mask).count_ones() as usize;
        if (s >> (n - 1)) & 1 == 1 {
            plus[k] += p;
        } else {
            minus[k] += p;
        }
    }
    (plus, minus)
}

fn measured_state(spec: &ProtocolSpec, lambda: f64) -> Result<PauliState> {
    let built = build_state(&spec.at_lambda(lambda), 0)?;
    match spec.kind {
        ProtocolKind::Correlated { c, .. } => built.state.apply_u_prep(&c),
        ProtocolKind::Sqsc => Ok(built.state),
    }
}

/// Applies `U_prep` after the channel, measures every qubit along `r0` and
/// groups outcomes by (sign of qubit 0, number of `+` among the others).
/// Derivatives are central differences of step `h` in λ.
pub fn local_measurement_sim(spec: &ProtocolSpec, h: f64) -> Result<MeasurementRecord> {
    spec.validate()?;
    let n = match spec.kind {
        ProtocolKind::Correlated { n, .. } => n,
        ProtocolKind::Sqsc => return Err(Error::WrongBranch("local measurement needs a correlated protocol")),
    };
    if !(h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let p0 = local_outcome_probabilities(&measured_state(spec, spec.lambda)?, &spec.r0)?;
    let pp = local_outcome_probabilities(&measured_state(spec, spec.lambda + h)?, &spec.r0)?;
    let pm = local_outcome_probabilities(&measured_state(spec, spec.lambda - h)?, &spec.r0)?;
    let dp: Vec<f64> = pp.iter().zip(&pm).map(|(a, b)| (a - b) / (2.0 * h)).collect();

    let (g_plus, g_minus) = grouped(n, &p0);
    let (d_plus, d_minus) = grouped(n, &dp);
    let plus: Vec<(f64, f64)> = g_plus.into_iter().zip(d_plus).collect();
    let minus: Vec<(f64, f64)> = g_minus.into_iter().zip(d_minus).collect();
    let model = ProbModel::new(plus.iter().chain(minus.iter()).cloned().collect())?;
    let full = ProbModel::new(p0.iter().cloned().zip(dp.iter().cloned()).collect())?;
    Ok(MeasurementRecord { n, plus, minus, cfi: cfi(&model, DEFAULT_CFI_EPS), cfi_ungrouped: cfi(&full, DEFAULT_CFI_EPS) })
}

/// `c = Bᵀe1`, `r0 = Bᵀe2` from `Ṁ = A S B`.
pub fn canonical_directions(ch: &BlochChannel) -> (Vec3, Vec3) {
    let svd = svd3(&ch.dm);
    (svd.right_vector(0), svd.right_vector(1))
}

/// `r²` coefficient `(n−1)s1² + s2²` of the local-measurement CFI for the
/// canonical directions (signs of `c` and `r0` are immaterial).
///
/// The simulated scheme attains this only when `cᵀṀc = ±s1` and
/// `r0ᵀṀr0 = ±s2`, i.e. when the left and right singular vectors agree on
/// those directions. For a rotation generator such as the phase shift the
/// scheme gives [`measurement_cfi_general`] instead (`n sin²λ`).
pub fn measurement_cfi_lowest_order(ch: &BlochChannel, n: usize, c: &Vec3, r0: &Vec3) -> Result<f64> {
    if !ch.is_unital(series::UNITAL_TOL) {
        return Err(Error::WrongBranch("a unital channel (d = 0) is required"));
    }
    if n < 2 {
        return Err(Error::TooFewQubits { n, min: 2 });
    }
    check_unit(c, "c", 1e-9)?;
    check_unit(r0, "r0", 1e-9)?;
    let svd = svd3(&ch.dm);
    let aligned = |u: &Vec3, v: Vec3| (u.dot(&v).abs() - 1.0).abs() <= 1e-9;
    if !(aligned(c, svd.right_vector(0)) && aligned(r0, svd.right_vector(1))) {
        return Err(Error::NonCanonicalDirections);
    }
    let (s1, s2) = (svd.s[0], svd.s[1]);
    Ok((n as f64 - 1.0) * s1 * s1 + s2 * s2)
}

/// `(r0ᵀṀr0)² + (n−1)(cᵀṀc)²`, the `r²` coefficient for any perpendicular
/// `c`, `r0`.
pub fn measurement_cfi_general(ch: &BlochChannel, n: usize, c: &Vec3, r0: &Vec3) -> Result<f64> {
    check_unit(c, "c", 1e-9)?;
    check_unit(r0, "r0", 1e-9)?;
    let a = ch.dm.bilinear(r0, r0);
    let b = ch.dm.bilinear(c, c);
    Ok(a * a + (n as f64 - 1.0) * b * b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainStatus {
    Ok,
    /// The exact ratio falls outside the lowest-order range.
    OutsideBounds,
    /// The reference QFI is zero or the channel carries no information.
    Undefined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainReport {
    pub exact_a: f64,
    pub exact_b: f64,
    pub exact_ratio: Option<f64>,
    /// Ratio of series estimates; meaningful only while `n r² ≪ 1`.
    pub series_ratio: Option<f64>,
    pub bounds: Option<GainRange>,
    pub status: GainStatus,
}

/// Per-invocation QFI of `a` relative to `b`. When `a` is correlated and the
/// channel unital, the ratio is checked against the lowest-order gain range
/// widened by `0.02 + 2 n r²`.
pub fn compare(a: &ProtocolSpec, b: &ProtocolSpec) -> Result<GainReport> {
    if a.channel.name() != b.channel.name() || a.lambda != b.lambda {
        return Err(Error::InvalidParam { param: "compare: specs must share channel and lambda".into(), value: b.lambda - a.lambda });
    }
    let qa = protocol_qfi(a, DEFAULT_MAX_ORDER, DEFAULT_PAIR_EPS)?;
    let qb = protocol_qfi(b, DEFAULT_MAX_ORDER, DEFAULT_PAIR_EPS)?;
    let ratio = |x: f64, y: f64| if y.abs() > 1e-300 { Some(x / y) } else { None };
    let exact_ratio = ratio(qa.exact, qb.exact);
    let series_ratio = match (qa.series_estimate, qb.series_estimate) {
        (Some(x), Some(y)) => ratio(x, y),
        _ => None,
    };
    let ch = a.channel.eval(a.lambda)?;
    let bounds = match a.kind {
        ProtocolKind::Correlated { n, .. } if a.channel.unitality() == Unitality::Unital => match corr_gain_ratio(&ch, n) {
            Ok(g) => Some(g),
            Err(Error::NoInformation) => None,
            Err(e) => return Err(e),
        },
        _ => None,
    };
    let status = match (exact_ratio, bounds) {
        (None, _) => GainStatus::Undefined,
        (Some(_), None) if a.channel.unitality() == Unitality::Unital && matches!(a.kind, ProtocolKind::Correlated { .. }) => {
            GainStatus::Undefined
        }
        (Some(x), Some(g)) => {
            let slack = 0.02 + 2.0 * a.n() as f64 * a.r * a.r;
            if x < g.lo * (1.0 - slack) || x > g.hi * (1.0 + slack) {
                GainStatus::OutsideBounds
            } else {
                GainStatus::Ok
            }
        }
        (Some(_), None) => GainStatus::Ok,
    };
    Ok(GainReport { exact_a: qa.exact, exact_b: qb.exact, exact_ratio, series_ratio, bounds, status })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EscherRow {
    pub lambda: f64,
    pub r: f64,
    /// `1/[λ(1−λ)]`.
    pub bound: f64,
    /// QFI of the SQSC phase-flip state from the dense oracle.
    pub exact: f64,
    /// `4r²/[1 − (1−2λ)²r²]`.
    pub closed_form: f64,
    pub slack: f64,
}

/// The default grid: λ ∈ {0.05, …, 0.95}, r ∈ {0.1, …, 0.9}.
pub fn escher_default_grid() -> (Vec<f64>, Vec<f64>) {
    let lambdas = (1..=19).map(|k| k as f64 * 0.05).collect();
    let rs = (1..=9).map(|k| k as f64 * 0.1).collect();
    (lambdas, rs)
}

/// Phase-flip Escher bound against the optimal single-qubit QFI, which uses
/// an input along x̂.
pub fn escher_phase_flip_demo(lambdas: &[f64], rs: &[f64]) -> Result<Vec<EscherRow>> {
    let family = ChannelFamily::phase_flip();
    let mut rows = Vec::with_capacity(lambdas.len() * rs.len());
    for &lambda in lambdas {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::OutOfDomain { lambda, lo: 0.0, hi: 1.0 });
        }
        for &r in rs {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidPurity(r));
            }
            let spec = ProtocolSpec::sqsc(family.clone(), lambda, r, Vec3::X);
            let built = build_state(&spec, 0)?;
            let exact = fisher::qfi_exact(&built.rho, &built.drho, DEFAULT_PAIR_EPS)?;
            let a = 1.0 - 2.0 * lambda;
            let closed_form = 4.0 * r * r / (1.0 - a * a * r * r);
            let bound = 1.0 / (lambda * (1.0 - lambda));
            rows.push(EscherRow { lambda, r, bound, exact, closed_form, slack: bound - exact });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonUnitalReport {
    pub n: usize,
    pub lambda: f64,
    pub correlated: f64,
    pub sqsc: f64,
    /// Zeroth-order closed form for the single qubit.
    pub h0_formula: f64,
    pub equal: bool,
    pub formula_agrees: bool,
}

/// Exact QFI at zero purity for the correlated protocol and for SQSC; for a
/// parameter-dependent shift both are the same zeroth-order value.
pub fn nonunital_corr_equals_sqsc_check(family: &ChannelFamily, lambda: f64, n: usize) -> Result<NonUnitalReport> {
    let ch = family.eval(lambda)?;
    if ch.dd.max_abs() < series::UNITAL_TOL {
        return Err(Error::WrongBranch("the shift d must depend on the parameter"));
    }
    let corr = ProtocolSpec::correlated(family.clone(), lambda, n, 0.0, Vec3::Z, Vec3::X);
    let single = ProtocolSpec::sqsc(family.clone(), lambda, 0.0, Vec3::X);
    let qc = protocol_qfi(&corr, 0, DEFAULT_PAIR_EPS)?.exact;
    let qs = protocol_qfi(&single, 0, DEFAULT_PAIR_EPS)?.exact;
    let h0 = series::sqsc_nonunital_h0(&ch)?;
    let tol = 1e-8 * qs.abs().max(1.0);
    Ok(NonUnitalReport {
        n,
        lambda,
        correlated: qc,
        sqsc: qs,
        h0_formula: h0,
        equal: (qc - qs).abs() <= tol,
        formula_agrees: (h0 - qs).abs() <= tol,
    })
}

/// `count` roughly uniform unit vectors on the sphere (Fibonacci lattice).
pub fn direction_grid(count: usize) -> Vec<Vec3> {
    let golden = core::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Vec3::new(rho * phi.cos(), rho * phi.sin(), z).normalized()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMax {
    pub value: f64,
    pub c: Vec3,
    pub r0: Vec3,
}

/// Largest [`corr_h2`] over `count × count` direction pairs and the canonical
/// pair.
pub fn grid_max_corr_h2(ch: &BlochChannel, n: usize, count: usize) -> Result<GridMax> {
    let (cc, rc) = canonical_directions(ch);
    let mut best = GridMax { value: corr_h2(ch, n, &cc, &rc)?, c: cc, r0: rc };
    let dirs = direction_grid(count);
    for c in &dirs {
        for r0 in &dirs {
            let v = corr_h2(ch, n, c, r0)?;
            if v > best.value {
                best = GridMax { value: v, c: *c, r0: *r0 };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn sqsc_zero_purity_is_maximally_mixed() {
        let spec = ProtocolSpec::sqsc(ChannelFamily::phase_flip(), 0.3, 0.0, Vec3::X);
        let b = build_state(&spec, 2).unwrap();
        assert_eq!(b.state.coeffs(), &[0.5, 0.0, 0.0, 0.0]);
        assert_eq!(protocol_qfi(&spec, 2, DEFAULT_PAIR_EPS).unwrap().exact, 0.0);
    }

    #[test]
    fn sqsc_phase_flip_value() {
        let spec = ProtocolSpec::sqsc(ChannelFamily::phase_flip(), 0.2, 0.3, Vec3::X);
        let q = protocol_qfi(&spec, 4, DEFAULT_PAIR_EPS).unwrap();
        let want = 0.36 / (1.0 - 0.36 * 0.09);
        assert!((q.exact - want).abs() < 1e-12);
        assert!((q.exact - 0.37205).abs() < 1e-5);
    }

    #[test]
    fn correlated_depolarizing_within_bounds() {
        let spec = ProtocolSpec::correlated(ChannelFamily::depolarizing(), 0.4, 3, 1e-3, Vec3::Z, Vec3::X);
        let q = protocol_qfi(&spec, 4, DEFAULT_PAIR_EPS).unwrap();
        let ratio = q.exact / 1e-6;
        assert!((2.0..=3.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn correlated_state_is_valid() {
        let spec = ProtocolSpec::correlated(ChannelFamily::phase_flip(), 0.3, 3, 0.7, Vec3::X, Vec3::Y);
        let b = build_state(&spec, 4).unwrap();
        assert!((b.rho.trace().re - 1.0).abs() < 1e-13);
        assert!(b.rho.eigh().values[0] > -1e-12);
        assert!(b.drho.trace().norm() < 1e-13);
    }

    #[test]
    fn measurement_low_purity_probabilities() {
        let (n, l, r) = (3, 0.3, 1e-4);
        let spec = ProtocolSpec::correlated(ChannelFamily::phase_flip(), l, n, r, Vec3::X, Vec3::Y);
        let rec = local_measurement_sim(&spec, MEASUREMENT_FD_STEP).unwrap();
        let m = ChannelFamily::phase_flip().eval(l).unwrap().m;
        let (a, b) = (m.bilinear(&Vec3::Y, &Vec3::Y), m.bilinear(&Vec3::X, &Vec3::X));
        for k in 0..n {
            let want = binom(n - 1, k) / 8.0 * (1.0 + r * a + r * b * (2.0 * k as f64 - n as f64 + 1.0));
            assert!((rec.plus[k].0 - want).abs() < 10.0 * r * r, "{k}: {} vs {want}", rec.plus[k].0);
        }
    }

    #[test]
    fn measurement_at_zero_purity() {
        let spec = ProtocolSpec::correlated(ChannelFamily::phase_flip(), 0.3, 4, 0.0, Vec3::X, Vec3::Y);
        let rec = local_measurement_sim(&spec, MEASUREMENT_FD_STEP).unwrap();
        for k in 0..4 {
            assert!((rec.plus[k].0 - binom(3, k) / 16.0).abs() < 1e-15);
            assert!((rec.minus[k].0 - binom(3, k) / 16.0).abs() < 1e-15);
        }
        assert_eq!(rec.cfi, 0.0);
    }

    #[test]
    fn lowest_order_measurement_values() {
        let dep = ChannelFamily::depolarizing().eval(0.3).unwrap();
        let (c, r0) = canonical_directions(&dep);
        assert!((measurement_cfi_lowest_order(&dep, 4, &c, &r0).unwrap() - 4.0).abs() < 1e-13);
        let fam = ChannelFamily::custom_diag(
            [crate::expr::Expr::Num(0.0), crate::expr::Expr::Num(0.0), crate::expr::Expr::parse("1 - 2*lambda").unwrap()],
            [crate::expr::Expr::Num(0.0), crate::expr::Expr::Num(0.0), crate::expr::Expr::Num(0.0)],
            (0.0, 1.0),
            1e-6,
        )
        .unwrap();
        let ch = fam.eval(0.3).unwrap();
        let (c, r0) = canonical_directions(&ch);
        assert!((measurement_cfi_lowest_order(&ch, 4, &c, &r0).unwrap() - 12.0).abs() < 1e-8);
        let ps = ChannelFamily::phase_shift().eval(0.2).unwrap();
        let (c, r0) = canonical_directions(&ps);
        assert!((measurement_cfi_lowest_order(&ps, 2, &c, &r0).unwrap() - 2.0).abs() < 1e-13);
        assert!(matches!(measurement_cfi_lowest_order(&ps, 2, &r0, &c), Err(Error::NonCanonicalDirections)));
    }

    #[test]
    fn compare_examples() {
        let pf = ChannelFamily::phase_flip();
        let a = ProtocolSpec::correlated(pf.clone(), 0.3, 5, 1e-3, Vec3::X, Vec3::Y);
        let b = ProtocolSpec::sqsc(pf, 0.3, 1e-3, Vec3::X);
        let g = compare(&a, &b).unwrap();
        assert!((g.exact_ratio.unwrap() / 5.0 - 1.0).abs() < 0.02);
        assert_eq!(g.status, GainStatus::Ok);
        let dep = ChannelFamily::depolarizing();
        let a = ProtocolSpec::correlated(dep.clone(), 0.3, 2, 1e-3, Vec3::X, Vec3::Y);
        let b = ProtocolSpec::sqsc(dep, 0.3, 1e-3, Vec3::X);
        assert!((compare(&a, &b).unwrap().exact_ratio.unwrap() - 2.0).abs() < 0.04);
        let flat = ChannelFamily::analytic("flat", (0.0, 1.0), Unitality::Unital, |_| {
            BlochChannel::unital(crate::linalg::Mat3::IDENTITY.scale(0.5), crate::linalg::Mat3::ZERO)
        })
        .unwrap();
        let a = ProtocolSpec::correlated(flat.clone(), 0.3, 2, 1e-3, Vec3::X, Vec3::Y);
        let b = ProtocolSpec::sqsc(flat, 0.3, 1e-3, Vec3::X);
        assert_eq!(compare(&a, &b).unwrap().status, GainStatus::Undefined);
    }

    #[test]
    fn escher_examples() {
        let rows = escher_phase_flip_demo(&[0.5], &[0.5, 0.999999]).unwrap();
        assert!((rows[0].bound - 4.0).abs() < 1e-12);
        assert!((rows[0].exact - 1.0).abs() < 1e-12);
        assert!((rows[0].slack - 3.0).abs() < 1e-12);
        assert!(rows[1].slack > 0.0 && rows[1].slack < 1e-4);
        assert!(escher_phase_flip_demo(&[0.0], &[0.5]).is_err());
        assert!(escher_phase_flip_demo(&[0.5], &[1.0]).is_err());
    }

    #[test]
    fn nonunital_examples() {
        let gad = ChannelFamily::gad(1.0).unwrap();
        let rep = nonunital_corr_equals_sqsc_check(&gad, 0.4, 3).unwrap();
        assert!(rep.equal && rep.formula_agrees);
        assert!((rep.sqsc - 1.0 / 0.84).abs() < 1e-10);
        let gad = ChannelFamily::gad(0.8).unwrap();
        assert!(nonunital_corr_equals_sqsc_check(&gad, 0.4, 2).unwrap().equal);
        assert!(matches!(
            nonunital_corr_equals_sqsc_check(&ChannelFamily::phase_flip(), 0.4, 2),
            Err(Error::WrongBranch(_))
        ));
    }

    #[test]
    fn direction_grid_is_unit() {
        let g = direction_grid(20);
        assert_eq!(g.len(), 20);
        assert!(g.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
    }
}
