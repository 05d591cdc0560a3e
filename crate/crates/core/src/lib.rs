//! Kloosterman sums and elliptic-curve traces over `F_p`, bilinear sums with
//! those kernels, additive-combinatorial set statistics, and Sato–Tate
//! equidistribution checks.

pub mod bilinear;
pub mod calibration;
pub mod cli;
pub mod dft;
pub mod error;
pub mod field;
pub mod report;
pub mod sato_tate;
pub mod setcomb;
pub mod sets;
pub mod trace;

pub use error::{Error, ErrorClass, Result};
pub use field::{make_field, FieldContext};
pub use sets::{CoeffVec, SubsetFp};
pub use trace::{kl_bulk, kl_direct, AngleTable, EllipticFamily, TraceKind, TraceTable};
