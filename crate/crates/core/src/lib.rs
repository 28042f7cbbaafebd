//! Joint measurability of finite-dimensional quantum observables, decided and
//! quantified through Fisher-information criteria and a small semidefinite
//! programming core.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`). The type
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line tool uses.
//!
//! ```
//! use incompat::povm::{pauli_povm, PauliAxis};
//! use incompat::incompat::tau;
//!
//! let x = pauli_povm::<f64>(PauliAxis::X);
//! let z = pauli_povm::<f64>(PauliAxis::Z);
//! let report = tau(&[x, z]).unwrap();
//! assert!((report.tau - 2.0).abs() < 1e-7);
//! assert_eq!(report.verdict.as_str(), "incompatible");
//! ```

pub mod bell;
pub mod chamber;
pub mod error;
pub mod estimation;
pub mod incompat;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod povm;
pub mod random;
pub mod scalar;
pub mod sdp;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type HermitianOperator = operator::HermitianOperator<f64>;
pub type OperatorBasis = operator::OperatorBasis<f64>;
pub type Povm = povm::Povm<f64>;
pub type Effect = povm::Effect<f64>;
pub type StochasticMatrix = povm::StochasticMatrix<f64>;
pub type SharpObservable = povm::SharpObservable<f64>;
pub type ValidationReport = povm::ValidationReport<f64>;
pub type ParamPoint = estimation::ParamPoint<f64>;
pub type FisherMatrix = estimation::FisherMatrix<f64>;
pub type QfiMatrix = estimation::QfiMatrix<f64>;
pub type SdpSolution = sdp::SdpSolution<f64>;
pub type JointSolution = sdp::JointSolution<f64>;
pub type IncompatReport = incompat::IncompatReport<f64>;
pub type RobustnessResult = incompat::RobustnessResult<f64>;
pub type UncertaintyReport = incompat::UncertaintyReport<f64>;
pub type ChshResult = bell::ChshResult<f64>;
pub type WeightingMatrix = chamber::WeightingMatrix<f64>;
pub type MeasurementSchedule = chamber::MeasurementSchedule<f64>;
