pub mod env;
pub mod error;
pub mod moments;
pub mod ratelab;
pub mod rng;
pub mod walk;
pub mod stats;

pub use env::{Environment, EnvironmentLaw, EnvStatics, LadderDecomposition, LawKind};
pub use error::{Error, Result};
pub use moments::{BlockMoments, MomentProfile};
pub use walk::{DiscreteCdf, KsMethod, StepBudget};
