//! Exact construction and analysis of piecewise affine expanding Markov maps of `[0,1]`
//! and of the sync function `phi = sum_k gamma^k T^{k+1}` of the driven linear filter.

pub mod analysis;
pub mod document;
pub mod error;
pub mod exceptional;
pub mod linalg;
pub mod map;
pub mod markov;
pub mod orbit;
pub mod poly;
pub mod rational;
pub(crate) mod serde_util;
pub mod sync;
pub mod variation;

pub use analysis::{Classification, MapAnalysis, Regime, Verdict, VariationReport};
pub use document::MapDocument;
pub use error::{Error, Result};
pub use map::{AffineBranch, PiecewiseAffineMap, Side, SidedPoint};
pub use markov::{CertifiedReal, RegimeThresholds, TransitionMatrix};
pub use orbit::EventualOrbit;
pub use rational::Rational;
pub use sync::{Gamma, SyncValue};
