//! Deliberately broken mechanisms that the audits must catch.

use crate::error::Result;
use crate::mechanisms::{sbba_plan, Mechanism, Regime, Selection, TradePlan};
use crate::model::{Outcome, OutcomeDistribution, SingleMarketInstance};
use crate::money::Extended;
use crate::ranking::rank;

/// SBBA without the lottery: when a seller must go, drop the most expensive
/// of the `k` cheapest. That seller can then win by under-reporting.
#[derive(Clone, Copy, Debug, Default)]
pub struct DeterministicExclusion;

impl Mechanism for DeterministicExclusion {
    fn name(&self) -> &'static str {
        "deterministic_exclusion"
    }

    fn run(&self, market: &SingleMarketInstance) -> Result<OutcomeDistribution> {
        let r = rank(market);
        let Some(plan) = sbba_plan(&r) else {
            return Ok(OutcomeDistribution::deterministic(Outcome::empty()));
        };
        let plan = match plan.regime {
            Regime::AllDeals => plan,
            Regime::Lottery => {
                let k = r.k();
                TradePlan {
                    branches: vec![Selection {
                        buyers: r.expensive_buyers()[..k - 1].to_vec(),
                        sellers: r.cheap_sellers()[..k - 1].to_vec(),
                    }],
                    ..plan
                }
            }
        };
        Ok(plan.to_distribution())
    }
}

/// Always posts the first losing ask `s_{k+1}` and lets whoever accepts it
/// trade. Truthful and budget-balanced, but with no efficiency guarantee.
#[derive(Clone, Copy, Debug, Default)]
pub struct NextAskPrice;

impl Mechanism for NextAskPrice {
    fn name(&self) -> &'static str {
        "next_ask_price"
    }

    fn run(&self, market: &SingleMarketInstance) -> Result<OutcomeDistribution> {
        let r = rank(market);
        let Extended::Finite(price) = r.s_next() else {
            return Ok(OutcomeDistribution::deterministic(Outcome::empty()));
        };
        let buyers: Vec<_> = r.expensive_buyers().iter().filter(|b| b.value >= price).cloned().collect();
        let n = buyers.len().min(r.k());
        let plan = TradePlan {
            price,
            regime: Regime::AllDeals,
            branches: vec![Selection {
                buyers: buyers[..n].to_vec(),
                sellers: r.cheap_sellers()[..n].to_vec(),
            }],
        };
        Ok(plan.to_distribution())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{expected_utility, truthfulness_audit};
    use crate::model::{expected_gft, Market, TraderId};
    use crate::money::Money;

    #[test]
    fn deterministic_exclusion_is_manipulable() {
        let i = SingleMarketInstance::from_values(&[9, 8, 4], &[1, 2, 3]).unwrap();
        let s3 = TraderId::from("s3");
        let truthful = DeterministicExclusion.run(&i).unwrap();
        assert_eq!(expected_utility(&truthful, &i, &s3, &Money::from_integer(3)).unwrap(), Money::zero());
        let lie = i.with_value(&s3, Money::ratio(3, 2)).unwrap();
        let gained = DeterministicExclusion.run(&lie).unwrap();
        assert_eq!(expected_utility(&gained, &lie, &s3, &Money::from_integer(3)).unwrap(), Money::one());
        let reports = truthfulness_audit(&DeterministicExclusion, &i).unwrap();
        assert!(reports.iter().any(|r| r.violation && r.trader == s3));
    }

    #[test]
    fn next_ask_price_can_kill_all_trade() {
        let i = SingleMarketInstance::from_values(&[5, 4], &[1, 2, 10]).unwrap();
        let d = NextAskPrice.run(&i).unwrap();
        assert_eq!(d.branches()[0].outcome.deals(), 0);
        assert!(expected_gft(&d, &i).unwrap().is_zero());
    }
}
