use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A direction argument was not a unit vector.
    NotUnitVector { what: &'static str, norm: f64 },
    InvalidPurity(f64),
    UnknownChannel(String),
    MissingParam { channel: String, param: String },
    UnknownParam { channel: String, param: String },
    InvalidParam { param: String, value: f64 },
    OutOfDomain { lambda: f64, lo: f64, hi: f64 },
    InvalidStep(f64),
    QubitIndex { index: usize, n: usize },
    QubitCap { n: usize, cap: usize },
    TooFewQubits { n: usize, min: usize },
    DimensionMismatch { expected: usize, found: usize },
    NotHermitian(f64),
    /// Most negative eigenvalue of a supposed state.
    NotPositive(f64),
    NotTraceless(f64),
    NotNormalized(f64),
    /// A channel-class specific routine was handed the wrong class of channel.
    WrongBranch(&'static str),
    NonPerpendicular(f64),
    /// The channel carries no parameter information (s1 = 0).
    NoInformation,
    SingularZerothOrder,
    Expression { pos: usize, msg: String },
    InvalidModel { what: &'static str, value: f64 },
    IllConditioned { condition: f64 },
    NonCanonicalDirections,
    InvalidGrid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotUnitVector { what, norm } => {
                write!(f, "{what} must be a unit vector (norm {norm})")
            }
            Error::InvalidPurity(r) => write!(f, "purity {r} outside [0, 1]"),
            Error::UnknownChannel(name) => write!(f, "unknown channel `{name}`"),
            Error::MissingParam { channel, param } => {
                write!(f, "channel `{channel}` requires parameter `{param}`")
            }
            Error::UnknownParam { channel, param } => {
                write!(f, "channel `{channel}` has no parameter `{param}`")
            }
            Error::InvalidParam { param, value } => {
                write!(f, "invalid value {value} for parameter `{param}`")
            }
            Error::OutOfDomain { lambda, lo, hi } => {
                write!(f, "lambda = {lambda} outside domain [{lo}, {hi}]")
            }
            Error::InvalidStep(h) => write!(f, "finite-difference step must be positive, got {h}"),
            Error::QubitIndex { index, n } => write!(f, "qubit index {index} out of range for {n} qubits"),
            Error::QubitCap { n, cap } => write!(f, "{n} qubits exceeds the supported maximum of {cap}"),
            Error::TooFewQubits { n, min } => write!(f, "need at least {min} qubits, got {n}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotHermitian(dev) => write!(f, "operator is not Hermitian (deviation {dev:e})"),
            Error::NotPositive(ev) => write!(f, "state has negative eigenvalue {ev:e}"),
            Error::NotTraceless(tr) => write!(f, "derivative operator has trace {tr:e}"),
            Error::NotNormalized(tr) => write!(f, "state has trace {tr}"),
            Error::WrongBranch(msg) => write!(f, "wrong channel class: {msg}"),
            Error::NonPerpendicular(dot) => {
                write!(f, "control and initial directions must be perpendicular (c.r0 = {dot:e})")
            }
            Error::NoInformation => write!(f, "channel derivative vanishes (s1 = 0): no information"),
            Error::SingularZerothOrder => write!(f, "zeroth-order state is singular"),
            Error::Expression { pos, msg } => write!(f, "expression error at {pos}: {msg}"),
            Error::InvalidModel { what, value } => write!(f, "invalid probability model: {what} ({value:e})"),
            Error::IllConditioned { condition } => {
                write!(f, "polynomial fit is ill-conditioned (condition number {condition:e})")
            }
            Error::NonCanonicalDirections => {
                write!(f, "directions are not the canonical c = B^T e1, r0 = B^T e2 pair")
            }
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
