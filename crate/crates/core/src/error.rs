use thiserror::Error;

/// Errors raised by every engine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NotPrime: {0} is not prime")]
    NotPrime(u64),
    #[error("EvenOrTooSmall: p = {0} must be an odd prime >= 3")]
    EvenOrTooSmall(u64),
    #[error("TooLarge: p = {p} exceeds the configured cap {cap}")]
    TooLarge { p: u64, cap: u64 },
    #[error("ZeroArgument: multiplicative argument is 0 mod p")]
    ZeroArgument,
    #[error("OracleTooLarge: p^(k-1) = {0} exceeds the direct-enumeration limit")]
    OracleTooLarge(u128),
    #[error("NonRealValue: |Im Kl_2({a})| = {im:e} exceeds 1e-6")]
    NonRealValue { a: u32, im: f64 },
    #[error("ZeroDiscriminantPoly: discriminant polynomial is identically zero")]
    ZeroDiscriminantPoly,
    #[error("ConstantJInvariant: j(t) is constant for this family")]
    ConstantJInvariant,
    #[error("CostCapExceeded: {what} costs {cost}, cap is {cap}")]
    CostCapExceeded { what: &'static str, cost: u128, cap: u128 },
    #[error("FieldMismatch: operands live over F_{0} and F_{1}")]
    FieldMismatch(u32, u32),
    #[error("EmptySet: operation needs a nonempty set")]
    EmptySet,
    #[error("RoundingDriftExceeded: convolution drift {0:e} >= 0.4")]
    RoundingDriftExceeded(f64),
    #[error("VolumeCapExceeded: progression volume {0} exceeds 1e7")]
    VolumeCapExceeded(u128),
    #[error("OutOfRange: {0} lies outside [-2, 2]")]
    OutOfRange(f64),
    #[error("CoefficientOverflow: polynomial coefficients overflow 128-bit arithmetic")]
    CoefficientOverflow,
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Precondition,
    CostCap,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NotPrime(_) | EvenOrTooSmall(_) | ZeroArgument | FieldMismatch(..) | EmptySet
            | OutOfRange(_) | InvalidInput(_) => ErrorClass::Validation,
            NonRealValue { .. }
            | ZeroDiscriminantPoly
            | ConstantJInvariant
            | RoundingDriftExceeded(_)
            | CoefficientOverflow => ErrorClass::Precondition,
            TooLarge { .. } | OracleTooLarge(_) | CostCapExceeded { .. } | VolumeCapExceeded(_) => {
                ErrorClass::CostCap
            }
        }
    }

    /// Process exit code: 2 input validation, 3 mathematical precondition, 4 cost cap.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Validation => 2,
            ErrorClass::Precondition => 3,
            ErrorClass::CostCap => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
