//! Optimal threshold classifiers and prevalence quantifiers for binary
//! classification under prior probability shift.
//!
//! - [`binormal`]: the equal-variance binormal score model.
//! - [`metrics`]: cost, NAS/NAS*, F_β, Q_β and the Classify & Count error.
//! - [`quantifiers`]: Bayes, minimax, locally best, Q- and F-optimal
//!   classifiers; Classify & Count and Adjusted Count.
//! - [`discrete`]: exhaustive-enumeration checks on finite populations.
//! - [`empirical`]: seeded sampling, rate estimation, CSV ingestion.
//! - [`figures`]: curve tables and the optimizer summary.

pub mod binormal;
pub mod discrete;
pub mod empirical;
mod error;
pub mod figures;
pub mod metrics;
pub mod optimize;
pub mod quantifiers;
pub mod rng;

pub use binormal::{BinormalModel, Rates, ThresholdClassifier};
pub use error::{Error, Result};
pub use metrics::{ConfusionProbs, CostParams, NasVariant, QConfig};
pub use quantifiers::{OptimizedClassifier, QuantificationEstimate};
