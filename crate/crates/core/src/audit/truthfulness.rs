use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::model::{Market, OutcomeDistribution, Side, TraderId};
use crate::money::Money;

/// One deviation tried by one trader.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationReport {
    pub trader: TraderId,
    pub true_value: Money,
    pub deviation: Money,
    pub truthful_utility: Money,
    pub deviating_utility: Money,
    pub violation: bool,
}

/// Expected utility of trader `id` with valuation `true_value`, whatever it
/// declared: `value - price` for a filled buyer, `price - value` for a
/// filled seller, nothing otherwise.
pub fn expected_utility(
    dist: &OutcomeDistribution,
    market: &impl Market,
    id: &TraderId,
    true_value: &Money,
) -> Result<Money> {
    if market.order(id).is_none() {
        return Err(Error::UnknownTrader(id.clone()));
    }
    let mut total = Money::zero();
    for b in dist.branches() {
        let gain = match b.outcome.fill(id) {
            Some((Side::Buy, price)) => true_value - price,
            Some((Side::Sell, price)) => price - true_value,
            None => continue,
        };
        total += &b.probability * gain;
    }
    Ok(total)
}

/// The breakpoints themselves, midpoints between consecutive distinct
/// breakpoints, one point above the maximum and one below the minimum.
///
/// Declared values cannot be negative, so negative breakpoints are dropped
/// and the point below the minimum becomes 0 when `min - 1` would be
/// negative, or is omitted when the minimum is already 0.
pub fn deviation_points(breakpoints: impl IntoIterator<Item = Money>) -> Vec<Money> {
    let distinct: BTreeSet<Money> = breakpoints.into_iter().filter(|v| !v.is_negative()).collect();
    let (Some(min), Some(max)) = (distinct.first(), distinct.last()) else {
        return vec![Money::zero()];
    };
    let mut points: BTreeSet<Money> = distinct.clone();
    let sorted: Vec<&Money> = distinct.iter().collect();
    for pair in sorted.windows(2) {
        points.insert(Money::midpoint(pair[0], pair[1]));
    }
    points.insert(max + Money::one());
    let below = min - Money::one();
    if !below.is_negative() {
        points.insert(below);
    } else if min.is_positive() {
        points.insert(Money::zero());
    }
    points.into_iter().collect()
}

/// Candidate misreports for trader `id`, built from the market's breakpoints.
pub fn deviation_set(market: &impl Market, id: &TraderId) -> Vec<Money> {
    deviation_points(market.breakpoints(id))
}

/// Like [`deviation_set`], with any extra breakpoints the mechanism declares.
pub fn mechanism_deviation_set<M: Market>(
    mechanism: &impl Mechanism<M>,
    market: &M,
    id: &TraderId,
) -> Vec<Money> {
    deviation_points(mechanism.breakpoints(market, id))
}

/// Expected utility of `id` (true value as declared in `market`) for each
/// report in `reports`.
pub fn utility_curve<M: Market>(
    mechanism: &impl Mechanism<M>,
    market: &M,
    id: &TraderId,
    reports: &[Money],
) -> Result<Vec<(Money, Money)>> {
    let truth = market
        .order(id)
        .ok_or_else(|| Error::UnknownTrader(id.clone()))?
        .value
        .clone();
    reports
        .iter()
        .map(|r| {
            let deviated = market.with_value(id, r.clone())?;
            let dist = mechanism.run(&deviated)?;
            Ok((r.clone(), expected_utility(&dist, &deviated, id, &truth)?))
        })
        .collect()
}

/// Re-runs the mechanism for every trader and every point of its deviation
/// set and compares exact expected utilities with the truthful report.
pub fn truthfulness_audit<M: Market>(
    mechanism: &impl Mechanism<M>,
    market: &M,
) -> Result<Vec<DeviationReport>> {
    let truthful = mechanism.run(market)?;
    let mut reports = Vec::new();
    for order in market.orders() {
        let truthful_utility = expected_utility(&truthful, market, &order.id, &order.value)?;
        for deviation in mechanism_deviation_set(mechanism, market, &order.id) {
            if deviation == order.value {
                continue;
            }
            let deviated = market.with_value(&order.id, deviation.clone())?;
            let dist = mechanism.run(&deviated)?;
            let deviating_utility = expected_utility(&dist, &deviated, &order.id, &order.value)?;
            reports.push(DeviationReport {
                trader: order.id.clone(),
                true_value: order.value.clone(),
                violation: deviating_utility > truthful_utility,
                deviation,
                truthful_utility: truthful_utility.clone(),
                deviating_utility,
            });
        }
    }
    Ok(reports)
}
