use std::collections::BTreeMap;

use crate::model::{Outcome, OutcomeDistribution, SingleMarketInstance};
use crate::ranking::rank;

/// VCG with externality (critical-value) payments.
///
/// All `k` efficient deals execute. A winning buyer pays
/// `max(s_k, b_{k+1})`, the lowest bid that keeps it in the efficient set;
/// a winning seller receives `min(b_k, s_{k+1})`, the highest such ask. The
/// broker covers the gap, so the budget is in deficit.
pub fn vcg(instance: &SingleMarketInstance) -> OutcomeDistribution {
    let r = rank(instance);
    let (b_k, s_k) = match (r.b_k(), r.s_k()) {
        (Some(b), Some(s)) => (b, s),
        _ => return OutcomeDistribution::deterministic(Outcome::empty()),
    };
    let b_next = r.b_next();
    let buy_price = if s_k >= &b_next { s_k.clone() } else { b_next };
    let sell_price = r.s_next().min_money(b_k);
    let buyer_fills: BTreeMap<_, _> = r
        .expensive_buyers()
        .iter()
        .map(|o| (o.id.clone(), buy_price.clone()))
        .collect();
    let seller_fills: BTreeMap<_, _> = r
        .cheap_sellers()
        .iter()
        .map(|o| (o.id.clone(), sell_price.clone()))
        .collect();
    OutcomeDistribution::deterministic(
        Outcome::new(buyer_fills, seller_fills).expect("k deals on each side"),
    )
}
