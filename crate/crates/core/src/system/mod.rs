//! Assembly, preconditioning and iterative solution of the collocation
//! system.

pub mod block;
pub mod gmres;
pub mod linalg;
pub mod operator;
pub mod pinv;
pub mod solve;
pub mod spectrum;
pub mod weights;

pub use gmres::{gmres, gmres_many, GmresOutcome, LinearOperator};
pub use operator::{BlockOperator, FactorCache};
pub use pinv::PinvFactors;
pub use solve::{solve, SolveResult, System};
pub use spectrum::{fit_spectrum, singular_spectrum, SpectrumFit};
