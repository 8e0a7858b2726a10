//! Steady-state revenue of review-ordering policies.
//!
//! Customers see `c` reviews, form a quality estimate `h(n)` from the number
//! `n` of positive ones and buy when `Θ + h(n)` clears the price. Buyers leave
//! a `Bern(μ)` rating. The crate computes long-run revenues under
//! newest-first, random and window-random orderings in closed form, checks
//! them against exact Markov-chain solves, finds optimal static and dynamic
//! prices, and simulates the model and several variants.

pub mod analytics;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod markov;
pub mod model;
pub mod numerics;
pub mod pricing;
pub mod simulator;

pub use distributions::{MyersonResult, ValuationDistribution};
pub use error::{Error, Result};
pub use model::{Estimator, Instance, Ordering, PricingPolicy, ReviewState};
