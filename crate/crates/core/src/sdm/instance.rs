use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{validate_orders, Market, MarketId, Order, Side, SingleMarketInstance, TraderId};
use crate::money::Money;

/// Several markets joined by positive, possibly asymmetric transit costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdmInstance {
    markets: Vec<MarketId>,
    transit: BTreeMap<(MarketId, MarketId), Money>,
    traders: Vec<Order>,
}

impl SdmInstance {
    /// Validates that every ordered pair of distinct markets has exactly one
    /// strictly positive transit cost and that every trader sits in a known
    /// market.
    pub fn new(
        markets: Vec<MarketId>,
        transit: impl IntoIterator<Item = (MarketId, MarketId, Money)>,
        traders: Vec<Order>,
    ) -> Result<Self> {
        let mut known = BTreeSet::new();
        for m in &markets {
            if !known.insert(m) {
                return Err(Error::DuplicateMarket(m.clone()));
            }
        }
        let mut costs = BTreeMap::new();
        for (from, to, cost) in transit {
            for m in [&from, &to] {
                if !known.contains(m) {
                    return Err(Error::UnknownTransitMarket(m.clone()));
                }
            }
            if from == to {
                return Err(Error::SelfTransit(from));
            }
            if !cost.is_positive() {
                return Err(Error::NonPositiveTransit { from, to, cost });
            }
            if costs.contains_key(&(from.clone(), to.clone())) {
                return Err(Error::DuplicateTransit { from, to });
            }
            costs.insert((from, to), cost);
        }
        for from in &markets {
            for to in &markets {
                if from != to && !costs.contains_key(&(from.clone(), to.clone())) {
                    return Err(Error::MissingTransit {
                        from: from.clone(),
                        to: to.clone(),
                    });
                }
            }
        }
        if let Some(o) = traders.iter().find(|o| !known.contains(&o.market)) {
            return Err(Error::UnknownMarket {
                trader: o.id.clone(),
                market: o.market.clone(),
            });
        }
        validate_orders(&traders)?;
        Ok(SdmInstance {
            markets,
            transit: costs,
            traders,
        })
    }

    /// The degenerate one-market case.
    pub fn from_single(instance: &SingleMarketInstance) -> Self {
        let market = MarketId::single();
        SdmInstance {
            markets: vec![market.clone()],
            transit: BTreeMap::new(),
            traders: instance
                .buyers()
                .iter()
                .chain(instance.sellers())
                .map(|o| o.clone().at(market.clone()))
                .collect(),
        }
    }

    pub fn markets(&self) -> &[MarketId] {
        &self.markets
    }

    pub fn transit(&self) -> &BTreeMap<(MarketId, MarketId), Money> {
        &self.transit
    }

    pub fn transit_cost(&self, from: &MarketId, to: &MarketId) -> Option<&Money> {
        self.transit.get(&(from.clone(), to.clone()))
    }

    pub fn traders(&self) -> &[Order] {
        &self.traders
    }

    pub fn buyers(&self) -> impl Iterator<Item = &Order> {
        self.traders.iter().filter(|o| o.side == Side::Buy)
    }

    pub fn sellers(&self) -> impl Iterator<Item = &Order> {
        self.traders.iter().filter(|o| o.side == Side::Sell)
    }

    pub fn traders_in<'a>(&'a self, market: &'a MarketId) -> impl Iterator<Item = &'a Order> {
        self.traders.iter().filter(move |o| &o.market == market)
    }

    /// All-pairs cheapest transit route cost (Floyd–Warshall). Diagonal is 0.
    pub fn route_costs(&self) -> BTreeMap<(MarketId, MarketId), Money> {
        let n = self.markets.len();
        let mut d: Vec<Vec<Option<Money>>> = vec![vec![None; n]; n];
        for i in 0..n {
            d[i][i] = Some(Money::zero());
            for j in 0..n {
                if i != j {
                    d[i][j] = self.transit_cost(&self.markets[i], &self.markets[j]).cloned();
                }
            }
        }
        for via in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (&d[i][via], &d[via][j]) {
                        let through = a + b;
                        if d[i][j].as_ref().is_none_or(|cur| &through < cur) {
                            d[i][j] = Some(through);
                        }
                    }
                }
            }
        }
        let mut out = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if let Some(c) = d[i][j].take() {
                    out.insert((self.markets[i].clone(), self.markets[j].clone()), c);
                }
            }
        }
        out
    }
}

impl Market for SdmInstance {
    fn orders(&self) -> Vec<&Order> {
        self.traders.iter().collect()
    }

    fn with_value(&self, id: &TraderId, value: Money) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::NegativeValue {
                id: id.clone(),
                value,
            });
        }
        let mut next = self.clone();
        let slot = next
            .traders
            .iter_mut()
            .find(|o| &o.id == id)
            .ok_or_else(|| Error::UnknownTrader(id.clone()))?;
        slot.value = value;
        Ok(next)
    }

    /// Other traders' values shifted by every offset a price difference
    /// between the two markets can take.
    fn breakpoints(&self, id: &TraderId) -> Vec<Money> {
        let Some(me) = self.traders.iter().find(|o| &o.id == id) else {
            return Vec::new();
        };
        let mut offsets: BTreeMap<&MarketId, BTreeSet<Money>> = BTreeMap::new();
        for m in &self.markets {
            offsets.insert(m, self.signed_path_sums(m, &me.market));
        }
        self.traders
            .iter()
            .filter(|o| &o.id != id)
            .flat_map(|o| offsets[&o.market].iter().map(move |d| &o.value + d))
            .collect()
    }
}

/// Longest path explored by [`SdmInstance::signed_path_sums`].
const MAX_PATH_STEPS: usize = 4;

impl SdmInstance {
    /// Sums along simple paths `from -> to` where each step `a -> b` adds
    /// either `c(a, b)` or `-c(b, a)`. Equilibrium price differences inside
    /// a component are such sums, so these are the candidate offsets at
    /// which a trader's regime can change. Paths are capped at
    /// `MAX_PATH_STEPS` steps to keep large instances tractable.
    pub fn signed_path_sums(&self, from: &MarketId, to: &MarketId) -> BTreeSet<Money> {
        fn walk<'a>(
            sdm: &'a SdmInstance,
            at: &'a MarketId,
            to: &MarketId,
            acc: Money,
            visited: &mut Vec<&'a MarketId>,
            out: &mut BTreeSet<Money>,
        ) {
            if at == to {
                out.insert(acc);
                return;
            }
            if visited.len() > MAX_PATH_STEPS {
                return;
            }
            for next in &sdm.markets {
                if visited.contains(&next) {
                    continue;
                }
                let fwd = sdm.transit_cost(at, next).expect("complete transit").clone();
                let back = sdm.transit_cost(next, at).expect("complete transit").clone();
                visited.push(next);
                walk(sdm, next, to, &acc + fwd, visited, out);
                walk(sdm, next, to, &acc - back, visited, out);
                visited.pop();
            }
        }
        let mut out = BTreeSet::new();
        walk(self, from, to, Money::zero(), &mut vec![from], &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_markets(cost: i64) -> Result<SdmInstance> {
        SdmInstance::new(
            vec!["1".into(), "2".into()],
            vec![
                ("1".into(), "2".into(), Money::from_integer(cost)),
                ("2".into(), "1".into(), Money::from_integer(cost)),
            ],
            vec![Order::buy("b", 5).at("1"), Order::sell("s", 1).at("2")],
        )
    }

    #[test]
    fn validates_transit() {
        assert!(two_markets(4).is_ok());
        assert!(matches!(two_markets(0), Err(Error::NonPositiveTransit { .. })));
        assert!(matches!(two_markets(-2), Err(Error::NonPositiveTransit { .. })));
        let missing = SdmInstance::new(
            vec!["1".into(), "2".into()],
            vec![("1".into(), "2".into(), Money::one())],
            vec![],
        );
        assert!(matches!(missing, Err(Error::MissingTransit { .. })));
        let unknown = SdmInstance::new(vec!["1".into()], vec![], vec![Order::buy("b", 1).at("9")]);
        assert!(matches!(unknown, Err(Error::UnknownMarket { .. })));
    }

    #[test]
    fn route_costs_take_cheaper_detours() {
        let sdm = SdmInstance::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                ("a".into(), "b".into(), Money::from_integer(1)),
                ("b".into(), "c".into(), Money::from_integer(1)),
                ("a".into(), "c".into(), Money::from_integer(5)),
                ("b".into(), "a".into(), Money::from_integer(1)),
                ("c".into(), "b".into(), Money::from_integer(1)),
                ("c".into(), "a".into(), Money::from_integer(1)),
            ],
            vec![],
        )
        .unwrap();
        let r = sdm.route_costs();
        assert_eq!(r[&("a".into(), "c".into())], Money::from_integer(2));
        assert_eq!(r[&("c".into(), "a".into())], Money::from_integer(1));
        assert_eq!(r[&("b".into(), "b".into())], Money::zero());
    }

    #[test]
    fn signed_offsets_between_two_markets() {
        let sdm = two_markets(4).unwrap();
        let sums: Vec<_> = sdm.signed_path_sums(&"1".into(), &"2".into()).into_iter().collect();
        assert_eq!(sums, vec![Money::from_integer(-4), Money::from_integer(4)]);
        assert_eq!(sdm.signed_path_sums(&"2".into(), &"2".into()).len(), 1);
    }
}
