//! Learned nuisance components behind the debiased estimators: outcome
//! regressions, propensities, the mediator-odds classifier, and the nested
//! regression, all cross-fitted.

pub mod cross_fit;
pub mod gbt;
pub mod linear;
pub mod logistic;
pub mod saturated;

pub use cross_fit::{cross_fit, LearnerConfig, NuisanceConfig, NuisanceFits};
pub use gbt::{fit_gbt, GbtConfig, GbtModel, Loss};
pub use linear::{ols, ridge_linear, LinearModel, OlsFit};
pub use logistic::{fit_logistic, LogisticConfig, LogisticModel};
pub use saturated::saturated_fits;
