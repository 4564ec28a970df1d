//! Traders, instances and outcomes shared by every mechanism.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TraderId(pub String);

impl fmt::Display for TraderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TraderId {
    fn from(s: &str) -> Self {
        TraderId(s.to_string())
    }
}

impl From<String> for TraderId {
    fn from(s: String) -> Self {
        TraderId(s)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarketId(pub String);

impl MarketId {
    /// The market every order lives in when there is only one.
    pub fn single() -> Self {
        MarketId("main".to_string())
    }
}

impl Default for MarketId {
    fn default() -> Self {
        MarketId::single()
    }
}

impl fmt::Display for MarketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MarketId {
    fn from(s: &str) -> Self {
        MarketId(s.to_string())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        })
    }
}

/// One trader's declaration: a bid for buyers, an ask for sellers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Order {
    pub id: TraderId,
    pub side: Side,
    pub value: Money,
    pub market: MarketId,
}

impl Order {
    pub fn buy(id: impl Into<TraderId>, value: impl Into<Money>) -> Self {
        Order {
            id: id.into(),
            side: Side::Buy,
            value: value.into(),
            market: MarketId::single(),
        }
    }

    pub fn sell(id: impl Into<TraderId>, value: impl Into<Money>) -> Self {
        Order {
            id: id.into(),
            side: Side::Sell,
            value: value.into(),
            market: MarketId::single(),
        }
    }

    pub fn at(mut self, market: impl Into<MarketId>) -> Self {
        self.market = market.into();
        self
    }

    pub fn with_value(&self, value: Money) -> Self {
        Order {
            value,
            ..self.clone()
        }
    }

    /// Utility of this trader (at its declared value) for trading at `price`.
    pub fn gain_at(&self, price: &Money) -> Money {
        match self.side {
            Side::Buy => &self.value - price,
            Side::Sell => price - &self.value,
        }
    }
}

/// Checks id uniqueness and value non-negativity over a set of orders.
pub(crate) fn validate_orders<'a>(orders: impl IntoIterator<Item = &'a Order>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for o in orders {
        if !seen.insert(&o.id) {
            return Err(Error::DuplicateId(o.id.clone()));
        }
        if o.value.is_negative() {
            return Err(Error::NegativeValue {
                id: o.id.clone(),
                value: o.value.clone(),
            });
        }
    }
    Ok(())
}

/// A collection of declared orders that a mechanism can be re-run on with
/// one declaration changed. Implemented by both instance kinds so the
/// audit engine can treat mechanisms as black boxes.
pub trait Market: Clone {
    fn orders(&self) -> Vec<&Order>;

    fn order(&self, id: &TraderId) -> Option<&Order> {
        self.orders().into_iter().find(|o| &o.id == id)
    }

    /// The same market with trader `id` declaring `value` instead.
    fn with_value(&self, id: &TraderId, value: Money) -> Result<Self>;

    /// Reports at which trader `id`'s outcome may change regime. Defaults
    /// to every other trader's declared value.
    fn breakpoints(&self, id: &TraderId) -> Vec<Money> {
        self.orders()
            .into_iter()
            .filter(|o| &o.id != id)
            .map(|o| o.value.clone())
            .collect()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SingleMarketInstance {
    buyers: Vec<Order>,
    sellers: Vec<Order>,
}

impl SingleMarketInstance {
    pub fn new(buyers: Vec<Order>, sellers: Vec<Order>) -> Result<Self> {
        if let Some(o) = buyers.iter().find(|o| o.side != Side::Buy) {
            return Err(Error::WrongSide(o.id.clone()));
        }
        if let Some(o) = sellers.iter().find(|o| o.side != Side::Sell) {
            return Err(Error::WrongSide(o.id.clone()));
        }
        validate_orders(buyers.iter().chain(&sellers))?;
        Ok(SingleMarketInstance { buyers, sellers })
    }

    /// Splits a mixed order list by side.
    pub fn from_orders(orders: Vec<Order>) -> Result<Self> {
        let (buyers, sellers) = orders.into_iter().partition(|o| o.side == Side::Buy);
        Self::new(buyers, sellers)
    }

    /// Integer-valued instance with ids `b1..`, `s1..` in list order.
    pub fn from_values(buyers: &[i64], sellers: &[i64]) -> Result<Self> {
        Self::new(
            buyers
                .iter()
                .enumerate()
                .map(|(i, &v)| Order::buy(format!("b{}", i + 1), v))
                .collect(),
            sellers
                .iter()
                .enumerate()
                .map(|(i, &v)| Order::sell(format!("s{}", i + 1), v))
                .collect(),
        )
    }

    pub fn buyers(&self) -> &[Order] {
        &self.buyers
    }

    pub fn sellers(&self) -> &[Order] {
        &self.sellers
    }

    pub fn len(&self) -> usize {
        self.buyers.len() + self.sellers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Market for SingleMarketInstance {
    fn orders(&self) -> Vec<&Order> {
        self.buyers.iter().chain(&self.sellers).collect()
    }

    fn with_value(&self, id: &TraderId, value: Money) -> Result<Self> {
        let mut next = self.clone();
        let slot = next
            .buyers
            .iter_mut()
            .chain(next.sellers.iter_mut())
            .find(|o| &o.id == id)
            .ok_or_else(|| Error::UnknownTrader(id.clone()))?;
        if value.is_negative() {
            return Err(Error::NegativeValue {
                id: id.clone(),
                value,
            });
        }
        slot.value = value;
        Ok(next)
    }
}

/// A deterministic allocation: who trades and at what price.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Outcome {
    buyer_fills: BTreeMap<TraderId, Money>,
    seller_fills: BTreeMap<TraderId, Money>,
    broker_surplus: Money,
}

impl Outcome {
    pub fn empty() -> Self {
        Outcome::default()
    }

    /// Fills are keyed by trader; each buyer fill is the price paid and each
    /// seller fill the price received. Item counts must balance.
    pub fn new(
        buyer_fills: BTreeMap<TraderId, Money>,
        seller_fills: BTreeMap<TraderId, Money>,
    ) -> Result<Self> {
        if buyer_fills.len() != seller_fills.len() {
            return Err(Error::InvalidOutcome(format!(
                "{} buyers filled against {} sellers",
                buyer_fills.len(),
                seller_fills.len()
            )));
        }
        if let Some(id) = buyer_fills.keys().find(|id| seller_fills.contains_key(*id)) {
            return Err(Error::InvalidOutcome(format!("{id} filled on both sides")));
        }
        let broker_surplus =
            buyer_fills.values().sum::<Money>() - seller_fills.values().sum::<Money>();
        Ok(Outcome {
            buyer_fills,
            seller_fills,
            broker_surplus,
        })
    }

    pub fn buyer_fills(&self) -> &BTreeMap<TraderId, Money> {
        &self.buyer_fills
    }

    pub fn seller_fills(&self) -> &BTreeMap<TraderId, Money> {
        &self.seller_fills
    }

    /// Paid by buyers minus received by sellers.
    pub fn broker_surplus(&self) -> &Money {
        &self.broker_surplus
    }

    pub fn deals(&self) -> usize {
        self.buyer_fills.len()
    }

    /// The trader's fill price, if it trades.
    pub fn fill(&self, id: &TraderId) -> Option<(Side, &Money)> {
        self.buyer_fills
            .get(id)
            .map(|p| (Side::Buy, p))
            .or_else(|| self.seller_fills.get(id).map(|p| (Side::Sell, p)))
    }

    /// Union of per-component outcomes with disjoint traders.
    pub fn merge(parts: &[&Outcome]) -> Result<Self> {
        let mut buyers = BTreeMap::new();
        let mut sellers = BTreeMap::new();
        for part in parts {
            for (id, p) in &part.buyer_fills {
                if buyers.insert(id.clone(), p.clone()).is_some() {
                    return Err(Error::InvalidOutcome(format!("{id} filled twice")));
                }
            }
            for (id, p) in &part.seller_fills {
                if sellers.insert(id.clone(), p.clone()).is_some() {
                    return Err(Error::InvalidOutcome(format!("{id} filled twice")));
                }
            }
        }
        Outcome::new(buyers, sellers)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Branch {
    pub probability: Money,
    pub outcome: Outcome,
}

/// A finite lottery over outcomes with exact probabilities.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OutcomeDistribution {
    branches: Vec<Branch>,
}

impl OutcomeDistribution {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidDistribution("no branches".into()));
        }
        let one = Money::one();
        for b in &branches {
            if !b.probability.is_positive() || b.probability > one {
                return Err(Error::InvalidDistribution(format!(
                    "probability {} outside (0, 1]",
                    b.probability
                )));
            }
        }
        let total: Money = branches.iter().map(|b| &b.probability).sum();
        if total != one {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(OutcomeDistribution { branches })
    }

    pub fn deterministic(outcome: Outcome) -> Self {
        OutcomeDistribution {
            branches: vec![Branch {
                probability: Money::one(),
                outcome,
            }],
        }
    }

    /// Equiprobable lottery. Panics on an empty list.
    pub fn uniform(outcomes: Vec<Outcome>) -> Self {
        assert!(!outcomes.is_empty(), "uniform lottery over nothing");
        let p = Money::ratio(1, outcomes.len() as i64);
        OutcomeDistribution {
            branches: outcomes
                .into_iter()
                .map(|outcome| Branch {
                    probability: p.clone(),
                    outcome,
                })
                .collect(),
        }
    }

    /// Independent product of lotteries over disjoint trader sets. Branch
    /// order is lexicographic in the factors' branch order.
    pub fn product(factors: &[OutcomeDistribution]) -> Result<Self> {
        let mut acc: Vec<(Money, Vec<&Outcome>)> = vec![(Money::one(), Vec::new())];
        for factor in factors {
            let mut next = Vec::with_capacity(acc.len() * factor.branches.len());
            for (p, parts) in &acc {
                for b in &factor.branches {
                    let mut parts = parts.clone();
                    parts.push(&b.outcome);
                    next.push((p * &b.probability, parts));
                }
            }
            acc = next;
        }
        let branches = acc
            .into_iter()
            .map(|(probability, parts)| {
                Ok(Branch {
                    probability,
                    outcome: Outcome::merge(&parts)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        OutcomeDistribution::new(branches)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn is_deterministic(&self) -> bool {
        self.branches.len() == 1
    }

    /// Probability that trader `id` trades.
    pub fn fill_probability(&self, id: &TraderId) -> Money {
        self.branches
            .iter()
            .filter(|b| b.outcome.fill(id).is_some())
            .map(|b| &b.probability)
            .sum()
    }
}

fn branch_gain(outcome: &Outcome, market: &impl Market) -> Result<Money> {
    let mut gain = Money::zero();
    for (id, price) in outcome.buyer_fills().iter().chain(outcome.seller_fills()) {
        let order = market
            .order(id)
            .ok_or_else(|| Error::UnknownTrader(id.clone()))?;
        gain += order.gain_at(price);
    }
    Ok(gain)
}

/// Expected gain-from-trade enjoyed by the traders themselves.
pub fn expected_gft(dist: &OutcomeDistribution, market: &impl Market) -> Result<Money> {
    let mut total = Money::zero();
    for b in dist.branches() {
        total += &b.probability * branch_gain(&b.outcome, market)?;
    }
    Ok(total)
}

/// Expected gain-from-trade including money retained by the broker.
pub fn total_gft(dist: &OutcomeDistribution, market: &impl Market) -> Result<Money> {
    let retained: Money = dist
        .branches()
        .iter()
        .map(|b| &b.probability * b.outcome.broker_surplus())
        .sum();
    Ok(expected_gft(dist, market)? + retained)
}
