//! Finite POVMs, their intrinsic noise and non-commutativity, smearing, and
//! an explicit Berezin–Toeplitz quantization of the 2-sphere via spin
//! coherent states.

pub mod error;
pub mod experiments;
pub mod operator;
pub mod par;
pub mod povm;
pub mod search;
pub mod smearing;
pub mod sphere;
pub mod toeplitz;

pub use error::{Error, Result};
pub use operator::HermitianMatrix;
pub use povm::{FinitePovm, OutcomeVector};
pub use search::SearchBudget;
pub use smearing::MarkovKernel;
pub use toeplitz::ToeplitzContext;
