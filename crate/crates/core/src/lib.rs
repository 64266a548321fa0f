//! De-biasing stated willingness-to-pay data.
//!
//! Open-ended WTP answers tend to be inflated by a category-level amount plus
//! individual noise; dichotomous-choice answers are pulled toward the price
//! cue. Combining the two lets the inflation be estimated and removed, and the
//! corrected series then drives demand estimation and price optimization.
//!
//! Modules:
//! - [`model`]: domain types and input validation
//! - [`simulate`]: synthetic populations with known truth and both bias models
//! - [`debias`]: BASIC / EPSILON / FULL correction and the cov(θ, p) sweep
//! - [`demand`]: survival curves, choice shares, logistic MLE, mean WTP
//! - [`inference`]: Welch, KS, likelihood-ratio tests and the bootstrap
//! - [`pricing`]: profit-maximizing price with bootstrap intervals
//! - [`study`]: grid-narrowing Monte-Carlo study
//! - [`io`], [`report`]: CSV schemas and table rendering

pub mod debias;
pub mod demand;
pub mod error;
pub mod inference;
pub mod io;
pub mod model;
pub mod pricing;
pub mod report;
pub mod rng;
pub mod simulate;
pub mod study;

pub use error::{Error, Result};
pub use model::{
    DcDataset, DcRecord, DemandCurve, Elicitation, Interval, LogisticDemand, MarketConfig,
    OptimumReport, TestKind, TestResult, ThetaDistribution, WtpSample,
};
