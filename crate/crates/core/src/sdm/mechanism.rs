use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::mechanisms::{sbba_plan, Mechanism, TradePlan};
use crate::model::{MarketId, Order, Outcome, OutcomeDistribution, Side};
use crate::money::Money;
use crate::ranking::{rank_orders, Ranking};

use super::circulation::{min_cost_circulation, Circulation};
use super::components::{components_and_deltas, ComponentPartition};
use super::network::{build_flow_network, FlowNetwork};
use super::SdmInstance;

/// One price per market; markets in components without trade are unpriced.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PriceVector {
    prices: BTreeMap<MarketId, Money>,
}

impl PriceVector {
    pub fn new(prices: BTreeMap<MarketId, Money>) -> Self {
        PriceVector { prices }
    }

    pub fn get(&self, market: &MarketId) -> Option<&Money> {
        self.prices.get(market)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MarketId, &Money)> {
        self.prices.iter()
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Units carried along each ordered market pair in one branch.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Shipments(pub BTreeMap<(MarketId, MarketId), u64>);

impl Shipments {
    pub fn carrier_cost(&self, sdm: &SdmInstance) -> Money {
        self.0
            .iter()
            .map(|((from, to), &units)| {
                sdm.transit_cost(from, to).expect("validated pair") * Money::from_integer(units as i64)
            })
            .sum()
    }

    /// Net units arriving at each market.
    pub fn net_inflow(&self) -> BTreeMap<MarketId, i64> {
        let mut net = BTreeMap::new();
        for ((from, to), &units) in &self.0 {
            *net.entry(from.clone()).or_insert(0) -= units as i64;
            *net.entry(to.clone()).or_insert(0) += units as i64;
        }
        net
    }
}

/// The single-market view of one component after translation.
#[derive(Clone, Debug)]
pub struct ComponentMarket {
    pub markets: BTreeSet<MarketId>,
    pub anchor: MarketId,
    /// Traders of the component with values moved to the anchor market.
    pub ranking: Ranking,
    /// `None` when the component has no efficient deal.
    pub plan: Option<TradePlan>,
}

#[derive(Clone, Debug)]
pub struct SdmOutcome {
    pub network: FlowNetwork,
    pub circulation: Circulation,
    pub partition: ComponentPartition,
    pub components: Vec<ComponentMarket>,
    pub prices: PriceVector,
    pub distribution: OutcomeDistribution,
    /// Aligned with `distribution.branches()`.
    pub shipments: Vec<Shipments>,
}

impl SdmOutcome {
    /// Broker money left after paying carriers in branch `i`.
    pub fn system_surplus(&self, i: usize, sdm: &SdmInstance) -> Money {
        self.distribution.branches()[i].outcome.broker_surplus() - self.shipments[i].carrier_cost(sdm)
    }
}

/// SBBA for spatially distributed markets.
///
/// Solves the min-cost circulation, splits markets into commercial
/// components, and within each component moves every trader to the anchor
/// market by subtracting the anchor-to-home offset from its value. The
/// single-market rule then fixes the anchor price and the traders; every
/// other market's price is the anchor price plus its offset, and each
/// trader settles at its home price. Components are independent, so the
/// lottery is the product of the per-component lotteries.
pub fn sbba_sdm(sdm: &SdmInstance) -> Result<SdmOutcome> {
    let network = build_flow_network(sdm);
    let circulation = min_cost_circulation(&network);
    let partition = components_and_deltas(&network, &circulation);

    let mut components = Vec::new();
    let mut prices = BTreeMap::new();
    let mut factors = Vec::new();
    for (c, markets) in partition.components().iter().enumerate() {
        let anchor = partition.anchor(c).clone();
        let mut buyers = Vec::new();
        let mut sellers = Vec::new();
        for o in sdm.traders().iter().filter(|o| markets.contains(&o.market)) {
            let shifted = o.with_value(&o.value - partition.delta(&anchor, &o.market)?);
            match o.side {
                Side::Buy => buyers.push(shifted),
                Side::Sell => sellers.push(shifted),
            }
        }
        let ranking = rank_orders(buyers, sellers);
        let plan = sbba_plan(&ranking);

        let factor = match &plan {
            None => OutcomeDistribution::deterministic(Outcome::empty()),
            Some(plan) => {
                let mut home = BTreeMap::new();
                for m in markets {
                    let p = &plan.price + partition.delta(&anchor, m)?;
                    home.insert(m.clone(), p.clone());
                    prices.insert(m.clone(), p);
                }
                let original = |o: &Order| {
                    sdm.traders()
                        .iter()
                        .find(|t| t.id == o.id)
                        .expect("translated from this instance")
                };
                let outcomes = plan
                    .branches
                    .iter()
                    .map(|sel| {
                        let fills = |orders: &[Order]| -> BTreeMap<_, _> {
                            orders
                                .iter()
                                .map(|o| (o.id.clone(), home[&original(o).market].clone()))
                                .collect()
                        };
                        Outcome::new(fills(&sel.buyers), fills(&sel.sellers))
                    })
                    .collect::<Result<Vec<_>>>()?;
                OutcomeDistribution::uniform(outcomes)
            }
        };
        factors.push(factor);
        components.push(ComponentMarket {
            markets: markets.clone(),
            anchor,
            ranking,
            plan,
        });
    }
    let distribution = OutcomeDistribution::product(&factors)?;

    let shipments = distribution
        .branches()
        .iter()
        .map(|b| branch_shipments(sdm, &partition, &b.outcome))
        .collect();

    Ok(SdmOutcome {
        network,
        circulation,
        partition,
        components,
        prices: PriceVector::new(prices),
        distribution,
        shipments,
    })
}

/// Cheapest way to carry goods from selling to buying markets in one branch,
/// routed separately inside each component.
fn branch_shipments(sdm: &SdmInstance, partition: &ComponentPartition, outcome: &Outcome) -> Shipments {
    let market_of = |id| &sdm.traders().iter().find(|o| &o.id == id).expect("known trader").market;
    let mut surplus: BTreeMap<MarketId, i64> = BTreeMap::new();
    for id in outcome.seller_fills().keys() {
        *surplus.entry(market_of(id).clone()).or_insert(0) += 1;
    }
    for id in outcome.buyer_fills().keys() {
        *surplus.entry(market_of(id).clone()).or_insert(0) -= 1;
    }
    let mut all = Shipments::default();
    for component in partition.components() {
        let local: BTreeMap<MarketId, i64> = surplus
            .iter()
            .filter(|(m, _)| component.contains(*m))
            .map(|(m, s)| (m.clone(), *s))
            .collect();
        all.0.extend(route_units(sdm, component, local).0);
    }
    all
}

/// Successive shortest paths: ship one unit at a time from a market with
/// surplus to a market with deficit along the cheapest residual route.
/// Reverse arcs let later units reroute earlier ones.
fn route_units(
    sdm: &SdmInstance,
    markets: &BTreeSet<MarketId>,
    mut surplus: BTreeMap<MarketId, i64>,
) -> Shipments {
    let ms: Vec<&MarketId> = markets.iter().collect();
    let n = ms.len();
    let mut flow = vec![vec![0u64; n]; n];
    let cost = |i: usize, j: usize| sdm.transit_cost(ms[i], ms[j]).expect("validated pair").clone();
    let balance = |surplus: &BTreeMap<MarketId, i64>, i: usize| surplus.get(ms[i]).copied().unwrap_or(0);
    loop {
        let sources: Vec<usize> = (0..n).filter(|&i| balance(&surplus, i) > 0).collect();
        if sources.is_empty() {
            break;
        }
        let mut dist: Vec<Option<Money>> = vec![None; n];
        let mut pred: Vec<Option<(usize, bool)>> = vec![None; n];
        for &s in &sources {
            dist[s] = Some(Money::zero());
        }
        for _ in 0..n {
            for i in 0..n {
                let Some(di) = dist[i].clone() else { continue };
                for j in (0..n).filter(|&j| j != i) {
                    // Forward i -> j, or cancel a unit already shipped j -> i.
                    let mut options = vec![(&di + cost(i, j), true)];
                    if flow[j][i] > 0 {
                        options.push((&di - cost(j, i), false));
                    }
                    for (candidate, forward) in options {
                        if dist[j].as_ref().is_none_or(|cur| &candidate < cur) {
                            dist[j] = Some(candidate);
                            pred[j] = Some((i, forward));
                        }
                    }
                }
            }
        }
        let sink = (0..n)
            .filter(|&j| balance(&surplus, j) < 0 && dist[j].is_some())
            .min_by(|&a, &b| dist[a].cmp(&dist[b]))
            .expect("balanced surpluses within a component");
        let mut v = sink;
        while let Some((u, forward)) = pred[v] {
            if forward {
                flow[u][v] += 1;
            } else {
                flow[v][u] -= 1;
            }
            v = u;
        }
        *surplus.get_mut(ms[v]).expect("source") -= 1;
        *surplus.entry(ms[sink].clone()).or_insert(0) += 1;
    }
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if flow[i][j] > 0 {
                out.insert((ms[i].clone(), ms[j].clone()), flow[i][j]);
            }
        }
    }
    Shipments(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PriceViolation {
    Negative {
        market: MarketId,
        price: Money,
    },
    Equilibrium {
        from: MarketId,
        to: MarketId,
        expected: Money,
        actual: Money,
    },
    /// One market of a component is priced and another is not.
    Unpriced { market: MarketId },
}

/// Checks non-negativity and `p_j = p_i + delta(i, j)` inside every
/// component. An empty list means the vector passes.
pub fn verify_prices(prices: &PriceVector, partition: &ComponentPartition) -> Vec<PriceViolation> {
    let mut violations = Vec::new();
    for (market, price) in prices.iter() {
        if price.is_negative() {
            violations.push(PriceViolation::Negative {
                market: market.clone(),
                price: price.clone(),
            });
        }
    }
    for component in partition.components() {
        let priced: Vec<_> = component.iter().filter(|m| prices.get(m).is_some()).collect();
        if priced.is_empty() {
            continue;
        }
        for m in component.iter().filter(|m| prices.get(m).is_none()) {
            violations.push(PriceViolation::Unpriced { market: m.clone() });
        }
        for from in &priced {
            for to in &priced {
                let Ok(delta) = partition.delta(from, to) else {
                    continue;
                };
                let expected = prices.get(from).expect("priced") + delta;
                let actual = prices.get(to).expect("priced");
                if &expected != actual {
                    violations.push(PriceViolation::Equilibrium {
                        from: (*from).clone(),
                        to: (*to).clone(),
                        expected,
                        actual: actual.clone(),
                    });
                }
            }
        }
    }
    violations
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SbbaSdm;

impl Mechanism<SdmInstance> for SbbaSdm {
    fn name(&self) -> &'static str {
        "sbba_sdm"
    }

    fn run(&self, market: &SdmInstance) -> Result<OutcomeDistribution> {
        Ok(sbba_sdm(market)?.distribution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{sbba, Regime};
    use crate::model::SingleMarketInstance;
    use crate::sdm::examples;

    fn m(v: i64) -> Money {
        Money::from_integer(v)
    }

    #[test]
    fn main_example_prices_and_deals() {
        let sdm = examples::main_example();
        let out = sbba_sdm(&sdm).unwrap();
        assert_eq!(out.components.len(), 1);
        let comp = &out.components[0];
        assert_eq!(comp.ranking.k(), 6);
        assert_eq!(comp.ranking.b_k(), Some(&m(18)));
        assert_eq!(comp.ranking.s_next().finite(), Some(&m(17)));
        assert_eq!(comp.ranking.seller(7).unwrap().id, "m2-s21".into());
        assert_eq!(comp.plan.as_ref().unwrap().regime, Regime::AllDeals);
        assert_eq!(out.prices.get(&"1".into()), Some(&m(17)));
        assert_eq!(out.prices.get(&"2".into()), Some(&m(21)));
        assert!(out.distribution.is_deterministic());
        assert_eq!(out.distribution.branches()[0].outcome.deals(), 6);
        assert!(verify_prices(&out.prices, &out.partition).is_empty());
        // 2 units carried 1 -> 2 at cost 4 balance the broker exactly.
        assert_eq!(out.shipments[0].0[&("1".into(), "2".into())], 2);
        assert!(out.system_surplus(0, &sdm).is_zero());
    }

    #[test]
    fn translated_values_match_worked_listing() {
        let out = sbba_sdm(&examples::main_example()).unwrap();
        let r = &out.components[0].ranking;
        let sellers: Vec<_> = r.sellers().iter().map(|o| o.value.clone()).collect();
        let buyers: Vec<_> = r.buyers().iter().map(|o| o.value.clone()).collect();
        let ms = |v: &[i64]| v.iter().map(|&x| m(x)).collect::<Vec<_>>();
        assert_eq!(sellers, ms(&[-2, 1, 5, 9, 13, 15, 17, 19, 23, 27]));
        assert_eq!(buyers, ms(&[32, 28, 24, 20, 19, 18, 14, 12, 8, 4]));
    }

    #[test]
    fn lottery_branches() {
        let sdm = examples::lottery_example();
        let out = sbba_sdm(&sdm).unwrap();
        let comp = &out.components[0];
        assert_eq!(comp.ranking.k(), 6);
        assert_eq!(comp.ranking.b_k(), Some(&m(16)));
        assert_eq!(comp.ranking.s_next().finite(), Some(&m(17)));
        assert_eq!(comp.plan.as_ref().unwrap().regime, Regime::Lottery);
        assert_eq!(out.prices.get(&"1".into()), Some(&m(16)));
        assert_eq!(out.prices.get(&"2".into()), Some(&m(20)));
        let branches = out.distribution.branches();
        assert_eq!(branches.len(), 6);
        let mut excluded_sellers = BTreeSet::new();
        for (i, b) in branches.iter().enumerate() {
            assert_eq!(b.probability, Money::ratio(1, 6));
            assert_eq!(b.outcome.deals(), 5);
            assert!(b.outcome.fill(&"m1-b16".into()).is_none());
            assert!(out.system_surplus(i, &sdm).is_zero());
            let missing: Vec<_> = ["m1-s1", "m1-s5", "m1-s9", "m1-s13", "m2-s15", "m2-s19"]
                .into_iter()
                .filter(|s| b.outcome.fill(&(*s).into()).is_none())
                .collect();
            assert_eq!(missing.len(), 1);
            excluded_sellers.insert(missing[0]);
        }
        assert_eq!(excluded_sellers.len(), 6);
    }

    #[test]
    fn price_audit_flags_broken_vector() {
        let out = sbba_sdm(&examples::main_example()).unwrap();
        let bad = PriceVector::new([("1".into(), m(17)), ("2".into(), m(20))].into_iter().collect());
        let v = verify_prices(&bad, &out.partition);
        assert!(v.iter().any(|x| matches!(x, PriceViolation::Equilibrium { .. })));
        let neg = PriceVector::new([("1".into(), m(-1)), ("2".into(), m(3))].into_iter().collect());
        assert!(verify_prices(&neg, &out.partition)
            .iter()
            .any(|x| matches!(x, PriceViolation::Negative { .. })));
        let lottery = sbba_sdm(&examples::lottery_example()).unwrap();
        assert!(verify_prices(&lottery.prices, &lottery.partition).is_empty());
    }

    #[test]
    fn single_market_matches_sbba() {
        for (b, s) in [
            (vec![8, 7, 6, 4, 3, 2], vec![1, 2, 3, 5, 6, 7]),
            (vec![8, 7, 6, 4, 3, 2], vec![1, 2, 3, 7, 8, 9]),
            (vec![10, 10, 9], vec![0, 0, 1]),
            (vec![3], vec![5]),
            (vec![5, 5], vec![3, 5]),
        ] {
            let inst = SingleMarketInstance::from_values(&b, &s).unwrap();
            let out = sbba_sdm(&SdmInstance::from_single(&inst)).unwrap();
            assert_eq!(out.distribution, sbba(&inst), "{b:?} {s:?}");
        }
    }
}
