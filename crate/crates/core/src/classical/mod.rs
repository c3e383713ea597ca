//! Quantile gradient boosting, NGBoost and Gaussian process regression,
//! plus the regression tree they share.

pub mod gpr;
pub mod ngboost;
pub mod quantile;
pub mod tree;

pub use gpr::{GprModel, GprOptimize, GprSpec};
pub use ngboost::{NgBoostModel, NgBoostSpec};
pub use quantile::{empirical_quantile, mean_pinball, pinball_loss, QrSpec, QuantileModel};
pub use tree::{RegressionTree, TreeSpec};
