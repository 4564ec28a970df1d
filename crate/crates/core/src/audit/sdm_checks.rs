use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{MarketId, Side, TraderId};
use crate::money::Money;
use crate::sdm::{SdmInstance, SdmOutcome};

pub const BRUTE_FORCE_MAX_MARKETS: usize = 3;
pub const BRUTE_FORCE_MAX_TRADERS_PER_MARKET: usize = 4;

/// Best achievable gain-from-trade net of transit, by exhaustive search over
/// trader subsets and integral shipment plans along cheapest routes.
pub fn brute_force_sdm_optimum(sdm: &SdmInstance) -> Result<Money> {
    let markets = sdm.markets();
    if markets.len() > BRUTE_FORCE_MAX_MARKETS {
        return Err(Error::SizeLimitExceeded(format!(
            "{} markets, at most {BRUTE_FORCE_MAX_MARKETS}",
            markets.len()
        )));
    }
    // Per market: every subset as (sellers - buyers, bids - asks).
    let mut options: Vec<Vec<(i64, Money)>> = Vec::new();
    for m in markets {
        let traders: Vec<_> = sdm.traders_in(m).collect();
        if traders.len() > BRUTE_FORCE_MAX_TRADERS_PER_MARKET {
            return Err(Error::SizeLimitExceeded(format!(
                "{} traders in market {m}, at most {BRUTE_FORCE_MAX_TRADERS_PER_MARKET}",
                traders.len()
            )));
        }
        let subsets = (0..1u32 << traders.len())
            .map(|mask| {
                let mut balance = 0;
                let mut value = Money::zero();
                for (_, t) in traders.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1) {
                    match t.side {
                        Side::Sell => {
                            balance += 1;
                            value -= &t.value;
                        }
                        Side::Buy => {
                            balance -= 1;
                            value += &t.value;
                        }
                    }
                }
                (balance, value)
            })
            .collect();
        options.push(subsets);
    }
    let routes = sdm.route_costs();
    let cost = |i: usize, j: usize| routes[&(markets[i].clone(), markets[j].clone())].clone();

    let mut best = Money::zero();
    let mut choice = vec![0usize; markets.len()];
    loop {
        let balances: Vec<i64> = choice.iter().enumerate().map(|(m, &c)| options[m][c].0).collect();
        if balances.iter().sum::<i64>() == 0 {
            let value: Money = choice.iter().enumerate().map(|(m, &c)| &options[m][c].1).sum();
            // The cheapest shipment can only lower the value, so skip hopeless subsets.
            if value > best {
                let shipping = cheapest_transport(&balances, &cost);
                let net = value - shipping;
                if net > best {
                    best = net;
                }
            }
        }
        // Odometer over subset choices.
        let mut m = 0;
        loop {
            if m == choice.len() {
                return Ok(best);
            }
            choice[m] += 1;
            if choice[m] < options[m].len() {
                break;
            }
            choice[m] = 0;
            m += 1;
        }
    }
}

/// Minimum cost of moving each market's surplus to the markets in deficit,
/// by enumerating every integral shipment matrix.
fn cheapest_transport(balances: &[i64], cost: &impl Fn(usize, usize) -> Money) -> Money {
    let sources: Vec<usize> = (0..balances.len()).filter(|&i| balances[i] > 0).collect();
    let sinks: Vec<usize> = (0..balances.len()).filter(|&i| balances[i] < 0).collect();
    let mut need: Vec<i64> = sinks.iter().map(|&j| -balances[j]).collect();

    fn assign(
        s: usize,
        left: i64,
        sources: &[usize],
        sinks: &[usize],
        need: &mut [i64],
        balances: &[i64],
        spent: Money,
        cost: &impl Fn(usize, usize) -> Money,
        best: &mut Option<Money>,
    ) {
        if s == sources.len() {
            if need.iter().all(|&n| n == 0) && best.as_ref().is_none_or(|b| &spent < b) {
                *best = Some(spent);
            }
            return;
        }
        if left == 0 {
            let next = sources.get(s + 1).map_or(0, |&i| balances[i]);
            assign(s + 1, next, sources, sinks, need, balances, spent, cost, best);
            return;
        }
        for t in 0..sinks.len() {
            if need[t] > 0 {
                need[t] -= 1;
                let step = &spent + cost(sources[s], sinks[t]);
                assign(s, left - 1, sources, sinks, need, balances, step, cost, best);
                need[t] += 1;
            }
        }
    }

    let mut best = None;
    let first = sources.first().map_or(0, |&i| balances[i]);
    assign(0, first, &sources, &sinks, &mut need, balances, Money::zero(), cost, &mut best);
    best.expect("balances sum to zero")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConservationViolation {
    /// Broker money after paying carriers is not zero.
    Surplus { branch: usize, surplus: Money },
    /// Net shipments into a market do not match its buyers minus sellers.
    Imbalance {
        branch: usize,
        market: MarketId,
        traded: i64,
        shipped: i64,
    },
    /// Goods cross between two commercial components.
    CrossComponent {
        branch: usize,
        from: MarketId,
        to: MarketId,
    },
    /// A trader settled at something other than its home market's price.
    OffPrice {
        branch: usize,
        trader: TraderId,
        price: Money,
        expected: Option<Money>,
    },
}

/// Money conservation of an SDM run, branch by branch: buyers' payments
/// equal sellers' receipts plus carrier costs, every market balances,
/// components trade only internally, and every fill is at the home price.
pub fn conservation_audit(sdm: &SdmInstance, out: &SdmOutcome) -> Vec<ConservationViolation> {
    let mut violations = Vec::new();
    let home: BTreeMap<&TraderId, &MarketId> = sdm.traders().iter().map(|o| (&o.id, &o.market)).collect();
    for (branch, (b, ships)) in out.distribution.branches().iter().zip(&out.shipments).enumerate() {
        let surplus = out.system_surplus(branch, sdm);
        if !surplus.is_zero() {
            violations.push(ConservationViolation::Surplus { branch, surplus });
        }

        let mut traded: BTreeMap<&MarketId, i64> = BTreeMap::new();
        let fills = b
            .outcome
            .buyer_fills()
            .iter()
            .map(|f| (1, f))
            .chain(b.outcome.seller_fills().iter().map(|f| (-1, f)));
        for (sign, (id, price)) in fills {
            let market = home[id];
            *traded.entry(market).or_insert(0) += sign;
            let expected = out.prices.get(market);
            if expected != Some(price) {
                violations.push(ConservationViolation::OffPrice {
                    branch,
                    trader: id.clone(),
                    price: price.clone(),
                    expected: expected.cloned(),
                });
            }
        }
        let shipped = ships.net_inflow();
        for m in sdm.markets() {
            let t = traded.get(m).copied().unwrap_or(0);
            let s = shipped.get(m).copied().unwrap_or(0);
            if t != s {
                violations.push(ConservationViolation::Imbalance {
                    branch,
                    market: m.clone(),
                    traded: t,
                    shipped: s,
                });
            }
        }
        for (from, to) in ships.0.keys() {
            if out.partition.component_of(from) != out.partition.component_of(to) {
                violations.push(ConservationViolation::CrossComponent {
                    branch,
                    from: from.clone(),
                    to: to.clone(),
                });
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Order;
    use crate::sdm::{build_flow_network, examples, min_cost_circulation, sbba_sdm, Shipments};

    fn two(cost: i64, traders: Vec<Order>) -> SdmInstance {
        SdmInstance::new(
            vec!["1".into(), "2".into()],
            vec![
                ("1".into(), "2".into(), Money::from_integer(cost)),
                ("2".into(), "1".into(), Money::from_integer(cost)),
            ],
            traders,
        )
        .unwrap()
    }

    #[test]
    fn small_cross_market_deal() {
        let sdm = two(3, vec![Order::sell("s", 1).at("1"), Order::buy("b", 10).at("2")]);
        assert_eq!(brute_force_sdm_optimum(&sdm).unwrap(), Money::from_integer(6));
        let far = two(20, vec![Order::sell("s", 1).at("1"), Order::buy("b", 10).at("2")]);
        assert!(brute_force_sdm_optimum(&far).unwrap().is_zero());
    }

    #[test]
    fn agrees_with_flow_on_a_hand_instance() {
        let sdm = two(
            2,
            vec![
                Order::sell("s1", 1).at("1"),
                Order::sell("s2", 4).at("1"),
                Order::buy("b1", 3).at("1"),
                Order::buy("b2", 9).at("2"),
                Order::buy("b3", 7).at("2"),
                Order::sell("s3", 6).at("2"),
            ],
        );
        let net = build_flow_network(&sdm);
        let flow = -min_cost_circulation(&net).total_cost().clone();
        assert_eq!(brute_force_sdm_optimum(&sdm).unwrap(), flow);
    }

    #[test]
    fn size_limit() {
        let traders = (0..5).map(|i| Order::buy(format!("b{i}").as_str(), 1).at("1")).collect();
        let sdm = two(1, traders);
        assert!(matches!(brute_force_sdm_optimum(&sdm), Err(Error::SizeLimitExceeded(_))));
    }

    #[test]
    fn worked_examples_conserve_money() {
        for sdm in [examples::main_example(), examples::lottery_example()] {
            let out = sbba_sdm(&sdm).unwrap();
            assert!(conservation_audit(&sdm, &out).is_empty());
        }
    }

    #[test]
    fn tampered_shipments_are_caught() {
        let sdm = examples::main_example();
        let mut out = sbba_sdm(&sdm).unwrap();
        out.shipments[0] = Shipments::default();
        let v = conservation_audit(&sdm, &out);
        assert!(v.iter().any(|x| matches!(x, ConservationViolation::Surplus { .. })));
        assert!(v.iter().any(|x| matches!(x, ConservationViolation::Imbalance { .. })));
    }
}
