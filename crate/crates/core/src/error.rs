use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Subcarrier index outside `1..=K`.
    SubcarrierOutOfRange { k: usize, subcarriers: usize },
    /// An argument lies outside the domain of the operation.
    Domain(&'static str),
    /// Two points that must be distinct coincide (zero propagation distance).
    CoincidentPoints,
    /// An LC load cannot realize a non-negative phase slope.
    UnrealizableLoad { alpha: f64 },
    /// More users than subcarriers.
    Capacity { users: usize, subcarriers: usize },
    /// Every entry of the SNR matrix is zero.
    DegenerateAssignment,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SubcarrierOutOfRange { k, subcarriers } => {
                write!(f, "subcarrier index {k} outside 1..={subcarriers}")
            }
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::CoincidentPoints => write!(f, "endpoint coincides with a surface cell"),
            Error::UnrealizableLoad { alpha } => write!(
                f,
                "phase slope {alpha:e} rad/Hz is not realizable with a series LC load (must be negative)"
            ),
            Error::Capacity { users, subcarriers } => {
                write!(f, "{users} users exceed {subcarriers} subcarriers")
            }
            Error::DegenerateAssignment => write!(f, "SNR matrix is identically zero"),
        }
    }
}

impl core::error::Error for Error {}
