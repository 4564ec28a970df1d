//! Strongly budget-balanced double auctions.
//!
//! The crate provides the single-price SBBA mechanism and its dual, the
//! McAfee and VCG baselines, the extension to spatially distributed markets
//! with transit costs (solved through an integral min-cost circulation), and
//! an audit engine that checks truthfulness, individual rationality, budget
//! balance and efficiency bounds in exact rational arithmetic.

pub mod audit;
pub mod error;
pub mod mechanisms;
pub mod model;
pub mod money;
pub mod ranking;
pub mod sdm;

pub use error::{Error, Result};
pub use model::{
    expected_gft, total_gft, Branch, Market, MarketId, Order, Outcome, OutcomeDistribution, Side,
    SingleMarketInstance, TraderId,
};
pub use money::{Extended, Money};
