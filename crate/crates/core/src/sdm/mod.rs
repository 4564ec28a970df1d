//! Spatially distributed markets: several local markets joined by transit
//! costs, cleared through a min-cost circulation and a per-component
//! application of SBBA.

mod circulation;
mod components;
pub mod examples;
mod instance;
mod mechanism;
mod network;

pub use circulation::{has_negative_residual_cycle, min_cost_circulation, tie_broken_costs, Circulation};
pub use components::{components_and_deltas, ComponentPartition};
pub use instance::SdmInstance;
pub use mechanism::{
    sbba_sdm, verify_prices, ComponentMarket, PriceVector, PriceViolation, SbbaSdm, SdmOutcome, Shipments,
};
pub use network::{build_flow_network, EdgeTag, FlowEdge, FlowNetwork, Node, AGENTS};
