//! Single-qubit channels in Bloch form, `r_f = r·M·r_i + d`.

mod svd;

pub use svd::{svd3, SvdDecomp};

#[allow(unused_imports)]
use num_traits::Float;
use crate::expr::Expr;
use crate::linalg::{check_unit, Mat3, Vec3};
use crate::{Error, Result};
use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// Default tolerance for physicality checks.
pub const VALIDATION_TOL: f64 = 1e-9;
/// Default central-difference step for families without analytic derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// A qubit channel at a fixed parameter value together with its λ-derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochChannel {
    pub m: Mat3,
    pub d: Vec3,
    pub dm: Mat3,
    pub dd: Vec3,
}

impl BlochChannel {
    pub fn new(m: Mat3, d: Vec3, dm: Mat3, dd: Vec3) -> Self {
        BlochChannel { m, d, dm, dd }
    }

    pub fn unital(m: Mat3, dm: Mat3) -> Self {
        BlochChannel { m, d: Vec3::ZERO, dm, dd: Vec3::ZERO }
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut violations = Vec::new();
        if !(self.m.is_finite() && self.d.is_finite() && self.dm.is_finite() && self.dd.is_finite()) {
            violations.push(Violation { constraint: Constraint::NonFinite, magnitude: f64::NAN });
            return ValidationReport { violations };
        }
        let dn = self.d.norm();
        if dn > 1.0 + tol {
            violations.push(Violation { constraint: Constraint::ShiftTooLong, magnitude: dn - 1.0 });
        }
        if dn > 1.0 - tol {
            let m = self.m.max_abs();
            if m > tol {
                violations.push(Violation { constraint: Constraint::MatrixAtUnitShift, magnitude: m });
            }
        }
        ValidationReport { violations }
    }

    /// Output Bloch vector for an input of purity `r` along the unit vector `r_i`.
    pub fn apply(&self, r: f64, r_i: &Vec3) -> Result<Vec3> {
        check_unit(r_i, "r_i", 1e-9)?;
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidPurity(r));
        }
        Ok(self.m.mul_vec(r_i) * r + self.d)
    }

    /// `d ≡ 0` locally: both the shift and its derivative vanish within `tol`.
    pub fn is_unital(&self, tol: f64) -> bool {
        self.d.max_abs() < tol && self.dd.max_abs() < tol
    }

    /// The channel with input rotated by `b` and output rotated by `a`.
    pub fn rotated(&self, a: &Mat3, b: &Mat3) -> BlochChannel {
        BlochChannel {
            m: *a * self.m * *b,
            d: a.mul_vec(&self.d),
            dm: *a * self.dm * *b,
            dd: a.mul_vec(&self.dd),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    NonFinite,
    /// `|d| > 1`.
    ShiftTooLong,
    /// `|d| = 1` while `M ≠ 0`.
    MatrixAtUnitShift,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub magnitude: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        write!(f, "fail:")?;
        for v in &self.violations {
            let what = match v.constraint {
                Constraint::NonFinite => "non-finite entries",
                Constraint::ShiftTooLong => "|d| exceeds 1",
                Constraint::MatrixAtUnitShift => "M nonzero while |d| = 1",
            };
            write!(f, " {what} ({:e})", v.magnitude)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unitality {
    Unital,
    NonUnitalParamDepShift,
    NonUnitalConstShift,
}

impl Unitality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Unitality::Unital => "unital",
            Unitality::NonUnitalParamDepShift => "non-unital (parameter-dependent shift)",
            Unitality::NonUnitalConstShift => "non-unital (constant shift)",
        }
    }
}

pub type ValuesFn = dyn Fn(f64) -> (Mat3, Vec3) + Send + Sync;
pub type ChannelFn = dyn Fn(f64) -> BlochChannel + Send + Sync;

#[derive(Clone)]
enum Kind {
    PhaseShift,
    PhaseFlip,
    Depolarizing,
    Gad { p: f64 },
    /// Pauli probabilities for X, Y, Z; `None` marks the letter carrying λ.
    Pauli { probs: [Option<f64>; 3] },
    CustomDiag { diag: Box<[Expr; 3]>, shift: Box<[Expr; 3]>, h: f64 },
    Analytic(Arc<ChannelFn>),
    Sampled { f: Arc<ValuesFn>, h: f64 },
    Rotated { inner: Box<ChannelFamily>, a: Mat3, b: Mat3 },
}

/// A map `λ ↦ BlochChannel` on a closed interval.
#[derive(Clone)]
pub struct ChannelFamily {
    name: String,
    kind: Kind,
    domain: (f64, f64),
    unitality: Unitality,
}

impl fmt::Debug for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChannelFamily")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("unitality", &self.unitality)
            .finish()
    }
}

impl ChannelFamily {
    pub fn phase_shift() -> Self {
        Self::make("phase_shift", Kind::PhaseShift, (-core::f64::consts::PI, core::f64::consts::PI), Unitality::Unital)
    }

    pub fn phase_flip() -> Self {
        Self::make("phase_flip", Kind::PhaseFlip, (0.0, 1.0), Unitality::Unital)
    }

    /// `M = λI`; completely positive for `λ ∈ [-1/3, 1]`.
    pub fn depolarizing() -> Self {
        Self::make("depolarizing", Kind::Depolarizing, (-1.0 / 3.0, 1.0), Unitality::Unital)
    }

    /// Generalized amplitude damping with `M = diag(√(1-λ), √(1-λ), 1-λ)` and
    /// `d = λ(2p-1)ẑ`. The upper end stops short of 1 where `dM` diverges.
    pub fn gad(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParam { param: "p".to_string(), value: p });
        }
        let unitality = if p == 0.5 { Unitality::Unital } else { Unitality::NonUnitalParamDepShift };
        Ok(Self::make("gad", Kind::Gad { p }, (0.0, 1.0 - 1e-9), unitality))
    }

    /// Pauli channel `ρ ↦ Σ p_a σ_a ρ σ_a` with `p_I` taking up the slack.
    /// Exactly one of `px, py, pz` is `None`, meaning it equals λ.
    pub fn pauli(px: Option<f64>, py: Option<f64>, pz: Option<f64>) -> Result<Self> {
        let probs = [px, py, pz];
        if probs.iter().filter(|p| p.is_none()).count() != 1 {
            return Err(Error::InvalidParam { param: "pauli: exactly one probability must be lambda".to_string(), value: f64::NAN });
        }
        let mut fixed = 0.0;
        for (p, name) in probs.iter().zip(["px", "py", "pz"]) {
            if let Some(v) = p {
                if !(0.0..=1.0).contains(v) {
                    return Err(Error::InvalidParam { param: name.to_string(), value: *v });
                }
                fixed += v;
            }
        }
        if fixed > 1.0 {
            return Err(Error::InvalidParam { param: "px + py + pz".to_string(), value: fixed });
        }
        Ok(Self::make("pauli", Kind::Pauli { probs }, (0.0, 1.0 - fixed), Unitality::Unital))
    }

    /// Diagonal `M` and shift `d` given as expressions in λ, differentiated by
    /// central differences with step `h`. Only the Bloch constraints are
    /// checked; complete positivity is the caller's responsibility.
    pub fn custom_diag(diag: [Expr; 3], shift: [Expr; 3], domain: (f64, f64), h: f64) -> Result<Self> {
        check_domain(domain)?;
        if !(h > 0.0) {
            return Err(Error::InvalidStep(h));
        }
        let zero = shift.iter().all(|e| !e.depends_on_lambda() && e.eval(0.0) == 0.0);
        let unitality = if zero {
            Unitality::Unital
        } else if shift.iter().any(Expr::depends_on_lambda) {
            Unitality::NonUnitalParamDepShift
        } else {
            Unitality::NonUnitalConstShift
        };
        Ok(Self::make("custom_diag", Kind::CustomDiag { diag: Box::new(diag), shift: Box::new(shift), h }, domain, unitality))
    }

    /// A family with analytic derivatives supplied by the caller.
    pub fn analytic(
        name: &str,
        domain: (f64, f64),
        unitality: Unitality,
        f: impl Fn(f64) -> BlochChannel + Send + Sync + 'static,
    ) -> Result<Self> {
        check_domain(domain)?;
        Ok(Self::make(name, Kind::Analytic(Arc::new(f)), domain, unitality))
    }

    /// A family given only by its values; derivatives by central differences.
    pub fn sampled(
        name: &str,
        domain: (f64, f64),
        unitality: Unitality,
        h: f64,
        f: impl Fn(f64) -> (Mat3, Vec3) + Send + Sync + 'static,
    ) -> Result<Self> {
        check_domain(domain)?;
        if !(h > 0.0) {
            return Err(Error::InvalidStep(h));
        }
        Ok(Self::make(name, Kind::Sampled { f: Arc::new(f), h }, domain, unitality))
    }

    /// `M ↦ A·M·B`, `d ↦ A·d`: the family sandwiched between fixed rotations.
    pub fn rotated(&self, a: Mat3, b: Mat3) -> Self {
        let mut name = String::from("rotated_");
        name.push_str(&self.name);
        Self::make(&name, Kind::Rotated { inner: Box::new(self.clone()), a, b }, self.domain, self.unitality)
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        check_domain((lo, hi))?;
        self.domain = (lo, hi);
        Ok(self)
    }

    fn make(name: &str, kind: Kind, domain: (f64, f64), unitality: Unitality) -> Self {
        ChannelFamily { name: name.to_string(), kind, domain, unitality }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn unitality(&self) -> Unitality {
        self.unitality
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.domain.0 && lambda <= self.domain.1
    }

    fn check(&self, lambda: f64) -> Result<()> {
        if !self.contains(lambda) {
            return Err(Error::OutOfDomain { lambda, lo: self.domain.0, hi: self.domain.1 });
        }
        Ok(())
    }

    pub fn eval(&self, lambda: f64) -> Result<BlochChannel> {
        self.check(lambda)?;
        Ok(match &self.kind {
            Kind::PhaseShift => {
                let (s, c) = lambda.sin_cos();
                BlochChannel::unital(
                    Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]),
                    Mat3([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]]),
                )
            }
            Kind::PhaseFlip => {
                let a = 1.0 - 2.0 * lambda;
                BlochChannel::unital(Mat3::diag(a, a, 1.0), Mat3::diag(-2.0, -2.0, 0.0))
            }
            Kind::Depolarizing => BlochChannel::unital(Mat3::IDENTITY.scale(lambda), Mat3::IDENTITY),
            Kind::Gad { p } => {
                let q = 2.0 * p - 1.0;
                let s = (1.0 - lambda).sqrt();
                let ds = -0.5 / s;
                BlochChannel::new(
                    Mat3::diag(s, s, 1.0 - lambda),
                    Vec3::new(0.0, 0.0, lambda * q),
                    Mat3::diag(ds, ds, -1.0),
                    Vec3::new(0.0, 0.0, q),
                )
            }
            Kind::Pauli { probs } => {
                let p = |i: usize| probs[i].unwrap_or(lambda);
                let dp = |i: usize| if probs[i].is_none() { 1.0 } else { 0.0 };
                let (px, py, pz) = (p(0), p(1), p(2));
                let pi = 1.0 - px - py - pz;
                let (dx, dy, dz) = (dp(0), dp(1), dp(2));
                let di = -dx - dy - dz;
                BlochChannel::unital(
                    Mat3::diag(pi + px - py - pz, pi - px + py - pz, pi - px - py + pz),
                    Mat3::diag(di + dx - dy - dz, di - dx + dy - dz, di - dx - dy + dz),
                )
            }
            Kind::CustomDiag { h, .. } => self.eval_fd(lambda, *h)?,
            Kind::Analytic(f) => f(lambda),
            Kind::Sampled { h, .. } => self.eval_fd(lambda, *h)?,
            Kind::Rotated { inner, a, b } => inner.eval(lambda)?.rotated(a, b),
        })
    }

    /// `(M, d)` at `λ`, without derivatives.
    pub fn values(&self, lambda: f64) -> Result<(Mat3, Vec3)> {
        self.check(lambda)?;
        match &self.kind {
            Kind::CustomDiag { diag, shift, .. } => Ok((
                Mat3::diag(diag[0].eval(lambda), diag[1].eval(lambda), diag[2].eval(lambda)),
                Vec3::new(shift[0].eval(lambda), shift[1].eval(lambda), shift[2].eval(lambda)),
            )),
            Kind::Sampled { f, .. } => Ok(f(lambda)),
            Kind::Rotated { inner, a, b } => {
                let (m, d) = inner.values(lambda)?;
                Ok((*a * m * *b, a.mul_vec(&d)))
            }
            _ => {
                let ch = self.eval(lambda)?;
                Ok((ch.m, ch.d))
            }
        }
    }

    /// Values at `λ` with derivatives from a central difference of step `h`,
    /// one-sided at the ends of the domain.
    pub fn eval_fd(&self, lambda: f64, h: f64) -> Result<BlochChannel> {
        self.check(lambda)?;
        if !(h > 0.0) {
            return Err(Error::InvalidStep(h));
        }
        let (m, d) = self.values(lambda)?;
        let (lo, hi) = self.domain;
        let (dm, dd) = if lambda - h >= lo && lambda + h <= hi {
            fd_derivative(&|l| self.values(l).unwrap_or((m, d)), lambda, h, self.domain)?
        } else {
            // one-sided second-order stencil at the domain edges
            let s = if lambda - h < lo { 1.0 } else { -1.0 };
            let f1 = self.values(lambda + s * h)?;
            let f2 = self.values(lambda + 2.0 * s * h)?;
            let k = s / (2.0 * h);
            (
                (f1.0.scale(4.0) - m.scale(3.0) - f2.0).scale(k),
                (f1.1 * 4.0 - d * 3.0 - f2.1) * k,
            )
        };
        Ok(BlochChannel { m, d, dm, dd })
    }
}

fn check_domain((lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParam { param: "lambda_domain".to_string(), value: hi - lo });
    }
    Ok(())
}

/// Central difference `(f(λ0+h) − f(λ0−h)) / 2h` of a `(M, d)` family.
pub fn fd_derivative(
    f: &dyn Fn(f64) -> (Mat3, Vec3),
    lambda0: f64,
    h: f64,
    domain: (f64, f64),
) -> Result<(Mat3, Vec3)> {
    if !(h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    for l in [lambda0 - h, lambda0 + h] {
        if l < domain.0 || l > domain.1 {
            return Err(Error::OutOfDomain { lambda: l, lo: domain.0, hi: domain.1 });
        }
    }
    let (mp, dp) = f(lambda0 + h);
    let (mm, dm) = f(lambda0 - h);
    let k = 1.0 / (2.0 * h);
    Ok(((mp - mm).scale(k), (dp - dm) * k))
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 6] = ["phase_shift", "phase_flip", "depolarizing", "gad", "pauli", "custom_diag"];

/// Builds a named family. Parameter values are expressions; for `pauli` the
/// probability written as `lambda` is the estimated one.
///
/// | name | parameters |
/// |------|------------|
/// | `phase_shift`, `phase_flip`, `depolarizing` | none |
/// | `gad` | `p` |
/// | `pauli` | `px`, `py`, `pz` (missing ones are 0) |
/// | `custom_diag` | `m1`, `m2`, `m3`; optional `d1`, `d2`, `d3`, `h`, `lo`, `hi` |
pub fn builtin(name: &str, params: &[(&str, &str)]) -> Result<ChannelFamily> {
    let allowed: &[&str] = match name {
        "phase_shift" | "phase_flip" | "depolarizing" => &[],
        "gad" => &["p"],
        "pauli" => &["px", "py", "pz"],
        "custom_diag" => &["m1", "m2", "m3", "d1", "d2", "d3", "h", "lo", "hi"],
        _ => return Err(Error::UnknownChannel(name.to_string())),
    };
    for (k, _) in params {
        if !allowed.contains(k) {
            return Err(Error::UnknownParam { channel: name.to_string(), param: k.to_string() });
        }
    }
    let get = |key: &str| params.iter().rev().find(|(k, _)| *k == key).map(|(_, v)| *v);
    let require = |key: &str| {
        get(key).ok_or_else(|| Error::MissingParam { channel: name.to_string(), param: key.to_string() })
    };
    match name {
        "phase_shift" => Ok(ChannelFamily::phase_shift()),
        "phase_flip" => Ok(ChannelFamily::phase_flip()),
        "depolarizing" => Ok(ChannelFamily::depolarizing()),
        "gad" => ChannelFamily::gad(Expr::constant(require("p")?)?),
        "pauli" => {
            let mut probs = [Some(0.0); 3];
            for (slot, key) in probs.iter_mut().zip(["px", "py", "pz"]) {
                if let Some(src) = get(key) {
                    let e = Expr::parse(src)?;
                    *slot = match e {
                        Expr::Var => None,
                        _ if e.depends_on_lambda() => {
                            return Err(Error::InvalidParam { param: key.to_string(), value: f64::NAN })
                        }
                        _ => Some(e.eval(0.0)),
                    };
                }
            }
            ChannelFamily::pauli(probs[0], probs[1], probs[2])
        }
        _ => {
            let diag = [Expr::parse(require("m1")?)?, Expr::parse(require("m2")?)?, Expr::parse(require("m3")?)?];
            let opt = |key: &str| get(key).map(Expr::parse).unwrap_or(Ok(Expr::Num(0.0)));
            let shift = [opt("d1")?, opt("d2")?, opt("d3")?];
            let h = get("h").map(Expr::constant).unwrap_or(Ok(DEFAULT_FD_STEP))?;
            let lo = get("lo").map(Expr::constant).unwrap_or(Ok(0.0))?;
            let hi = get("hi").map(Expr::constant).unwrap_or(Ok(1.0))?;
            ChannelFamily::custom_diag(diag, shift, (lo, hi), h)
        }
    }
}

/// Rotation matrix from a proper orthogonal basis `(u, v, u×v)` given as rows.
pub fn rotation_from_axes(u: Vec3, v: Vec3) -> Result<Mat3> {
    check_unit(&u, "u", 1e-9)?;
    let v = v - u * u.dot(&v);
    let vn = v.norm();
    if vn < 1e-9 {
        return Err(Error::NotUnitVector { what: "v (parallel to u)", norm: vn });
    }
    let v = v * (1.0 / vn);
    Ok(Mat3::from_rows(u, v, u.cross(&v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (*a - *b).max_abs() < tol
    }

    #[test]
    fn validate_examples() {
        let edge = BlochChannel::new(Mat3::ZERO, Vec3::Z, Mat3::ZERO, Vec3::ZERO);
        assert!(edge.validate(VALIDATION_TOL).passed());
        let bad = BlochChannel::new(Mat3::IDENTITY, Vec3::Z, Mat3::ZERO, Vec3::ZERO);
        let report = bad.validate(VALIDATION_TOL);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].constraint, Constraint::MatrixAtUnitShift);
        assert_eq!(report.violations[0].magnitude, 1.0);
        let id = BlochChannel::unital(Mat3::IDENTITY, Mat3::ZERO);
        assert!(id.validate(VALIDATION_TOL).passed());
        let long = BlochChannel::new(Mat3::ZERO, Vec3::new(0.0, 0.0, 1.5), Mat3::ZERO, Vec3::ZERO);
        assert_eq!(long.validate(VALIDATION_TOL).violations[0].constraint, Constraint::ShiftTooLong);
    }

    #[test]
    fn apply_examples() {
        let pf = ChannelFamily::phase_flip().eval(0.25).unwrap();
        assert_eq!(pf.apply(1.0, &Vec3::X).unwrap(), Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(pf.apply(0.0, &Vec3::Y).unwrap(), Vec3::ZERO);
        let gad = ChannelFamily::gad(1.0).unwrap().eval(0.5).unwrap();
        assert_eq!(gad.apply(0.0, &Vec3::X).unwrap(), Vec3::new(0.0, 0.0, 0.5));
        assert!(pf.apply(1.0, &Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn builtin_examples() {
        let dep = builtin("depolarizing", &[]).unwrap().eval(0.3).unwrap();
        assert_eq!(dep.m, Mat3::IDENTITY.scale(0.3));
        assert_eq!(dep.d, Vec3::ZERO);
        assert_eq!(dep.dm, Mat3::IDENTITY);
        let ps = builtin("phase_shift", &[]).unwrap().eval(0.0).unwrap();
        assert_eq!(ps.m, Mat3::IDENTITY);
        assert_eq!(ps.dm, Mat3([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]));
        let gad = builtin("gad", &[("p", "0.5")]).unwrap();
        assert_eq!(gad.unitality(), Unitality::Unital);
        for l in [0.0, 0.3, 0.9] {
            assert_eq!(gad.eval(l).unwrap().d, Vec3::ZERO);
        }
        assert!(matches!(builtin("amplitude", &[]), Err(Error::UnknownChannel(_))));
        assert!(matches!(builtin("gad", &[]), Err(Error::MissingParam { .. })));
        assert!(matches!(builtin("phase_flip", &[]).unwrap().eval(1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn pauli_with_lambda_on_z_is_phase_flip() {
        let pauli = builtin("pauli", &[("pz", "lambda")]).unwrap();
        let pf = ChannelFamily::phase_flip();
        for l in [0.0, 0.2, 0.7] {
            let (a, b) = (pauli.eval(l).unwrap(), pf.eval(l).unwrap());
            assert!(close(&a.m, &b.m, 1e-15) && a.dm == b.dm);
        }
        let p = builtin("pauli", &[("px", "0.1"), ("py", "lambda")]).unwrap();
        assert!((p.domain().1 - 0.9).abs() < 1e-15);
        assert!(builtin("pauli", &[("px", "0.1")]).is_err());
    }

    #[test]
    fn fd_examples() {
        let dep = ChannelFamily::depolarizing();
        let (dm, dd) = fd_derivative(&|l| dep.values(l).unwrap(), 0.5, 1e-5, dep.domain()).unwrap();
        assert!(close(&dm, &Mat3::IDENTITY, 1e-9));
        assert_eq!(dd, Vec3::ZERO);
        let pf = ChannelFamily::phase_flip();
        let (dm, _) = fd_derivative(&|l| pf.values(l).unwrap(), 0.3, 1e-5, pf.domain()).unwrap();
        assert!(close(&dm, &Mat3::diag(-2.0, -2.0, 0.0), 1e-8));
        let (dm, dd) = fd_derivative(&|_| (Mat3::IDENTITY, Vec3::Z), 0.0, 1e-3, (-1.0, 1.0)).unwrap();
        assert_eq!((dm, dd), (Mat3::ZERO, Vec3::ZERO));
        assert!(fd_derivative(&|_| (Mat3::ZERO, Vec3::ZERO), 0.0, 1e-3, (0.0, 1.0)).is_err());
        assert!(fd_derivative(&|_| (Mat3::ZERO, Vec3::ZERO), 0.5, 0.0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn custom_diag_rank_one() {
        let fam = builtin("custom_diag", &[("m1", "0"), ("m2", "0"), ("m3", "1 - 2*lambda")]).unwrap();
        assert_eq!(fam.unitality(), Unitality::Unital);
        let ch = fam.eval(0.4).unwrap();
        assert!(close(&ch.dm, &Mat3::diag(0.0, 0.0, -2.0), 1e-8));
        // edges fall back to the one-sided stencil
        let ch = fam.eval(0.0).unwrap();
        assert!(close(&ch.dm, &Mat3::diag(0.0, 0.0, -2.0), 1e-8));
        let shifted = builtin("custom_diag", &[("m1", "lambda"), ("m2", "lambda"), ("m3", "lambda"), ("d3", "0.5")]).unwrap();
        assert_eq!(shifted.unitality(), Unitality::NonUnitalConstShift);
        let moving = builtin("custom_diag", &[("m1", "0"), ("m2", "0"), ("m3", "0"), ("d1", "lambda")]).unwrap();
        assert_eq!(moving.unitality(), Unitality::NonUnitalParamDepShift);
    }

    #[test]
    fn rotated_family_keeps_singular_values() {
        let a = rotation_from_axes(Vec3::new(0.6, 0.8, 0.0), Vec3::Z).unwrap();
        let b = rotation_from_axes(Vec3::Y, Vec3::X).unwrap();
        let fam = ChannelFamily::phase_flip().rotated(a, b);
        let ch = fam.eval(0.3).unwrap();
        let s = svd3(&ch.dm).s;
        assert!((s[0] - 2.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12 && s[2].abs() < 1e-12);
        let (m, _) = fam.values(0.3).unwrap();
        assert!(close(&m, &ch.m, 1e-15));
    }
}
