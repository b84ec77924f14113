//! Numerical toolkit for non-local Dirichlet forms on finite and lattice
//! state spaces: isoperimetric constants, super-Poincaré rate functions,
//! Orlicz-Sobolev inequalities and the implications between them.

pub mod error;
pub mod ext;
pub mod fit;
pub mod instance;
pub mod isoperimetry;
pub mod lattice;
pub mod measure;
pub mod perturbed;
pub mod pipeline;
pub mod quad;
pub mod report;
pub mod suite;
pub mod superpoincare;
pub mod young;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use measure::{FiniteMeasureSpace, JumpKernel, KillingPotential, SemigroupKernel, WeightFunction};
pub use superpoincare::RateFunction;
pub use young::YoungFunction;
