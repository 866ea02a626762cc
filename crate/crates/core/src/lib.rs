//! Availability analysis of repairable systems whose failure times follow
//! the Lindley distribution, through its phase-type representation.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the command-line tool and
//! the Monte Carlo oracle use.
//!
//! - [`ctmc`]: generator matrices, uniformization, stationary solves.
//! - [`phase_type`]: `PH(α, A)` survival, mean, sampling; the Lindley form.
//! - [`availability`]: closed-form and CTMC availability of one component.
//! - [`system`]: series/parallel compositions and the product-space chain.
//! - [`sim`]: alternating-renewal Monte Carlo estimates.

pub mod availability;
pub mod ctmc;
pub mod linalg;
pub mod phase_type;
mod scalar;
pub mod sim;
pub mod system;

pub use scalar::Scalar;

pub use availability::{Law, AvailabilityError};
pub use ctmc::CtmcError;
pub use phase_type::PhaseTypeError;
pub use system::{Structure, SystemError};

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Generator = ctmc::GeneratorMatrix<f64>;
pub type Distribution = ctmc::StateDistribution<f64>;
pub type PhaseType = phase_type::PhaseType<f64>;
pub type ComponentParams = availability::ComponentParams<f64>;
pub type ClosedFormTerms = availability::ClosedFormTerms<f64>;
pub type Component = system::Component<f64>;
pub type SystemModel = system::SystemModel<f64>;
pub type AvailabilityCurve = system::AvailabilityCurve<f64>;
pub type ProductSpace = system::ProductSpace<f64>;
