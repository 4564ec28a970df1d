use std::collections::BTreeMap;

use crate::model::{Order, Outcome, OutcomeDistribution, SingleMarketInstance};
use crate::money::Money;
use crate::ranking::{rank, Ranking};

/// Whether every efficient deal executes or one is cancelled by lottery.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    AllDeals,
    Lottery,
}

/// The traders that trade in one branch of a plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub buyers: Vec<Order>,
    pub sellers: Vec<Order>,
}

/// A single-price allocation rule: one price and equiprobable branches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradePlan {
    pub price: Money,
    pub regime: Regime,
    pub branches: Vec<Selection>,
}

impl TradePlan {
    /// Every selected trader trades at `price` in its branch.
    pub fn to_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution::uniform(
            self.branches
                .iter()
                .map(|sel| single_price_outcome(sel, &self.price))
                .collect(),
        )
    }
}

pub(crate) fn single_price_outcome(sel: &Selection, price: &Money) -> Outcome {
    let fills = |orders: &[Order]| -> BTreeMap<_, _> {
        orders.iter().map(|o| (o.id.clone(), price.clone())).collect()
    };
    Outcome::new(fills(&sel.buyers), fills(&sel.sellers))
        .expect("selections are balanced and disjoint")
}

/// SBBA on a ranked market; `None` when `k = 0`.
///
/// The price is `min(s_{k+1}, b_k)`. If `s_{k+1} <= b_k` all `k` deals
/// execute; otherwise `b_k` is excluded and one of the `k` cheap sellers
/// is excluded uniformly at random.
pub fn sbba_plan(r: &Ranking) -> Option<TradePlan> {
    let k = r.k();
    let b_k = r.b_k()?;
    let s_next = r.s_next();
    if s_next.le_money(b_k) {
        return Some(TradePlan {
            price: s_next.min_money(b_k),
            regime: Regime::AllDeals,
            branches: vec![Selection {
                buyers: r.expensive_buyers().to_vec(),
                sellers: r.cheap_sellers().to_vec(),
            }],
        });
    }
    let buyers = r.expensive_buyers()[..k - 1].to_vec();
    let branches = (0..k)
        .map(|excluded| Selection {
            buyers: buyers.clone(),
            sellers: r
                .cheap_sellers()
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != excluded)
                .map(|(_, o)| o.clone())
                .collect(),
        })
        .collect();
    Some(TradePlan {
        price: b_k.clone(),
        regime: Regime::Lottery,
        branches,
    })
}

/// The buyer/seller mirror of [`sbba_plan`]: price `max(s_k, b_{k+1})`.
///
/// If `b_{k+1} >= s_k` all `k` deals execute; otherwise `s_k` is excluded
/// and one of the `k` expensive buyers is excluded uniformly at random.
pub fn dual_plan(r: &Ranking) -> Option<TradePlan> {
    let k = r.k();
    let s_k = r.s_k()?;
    let b_next = r.b_next();
    if &b_next >= s_k {
        return Some(TradePlan {
            price: b_next,
            regime: Regime::AllDeals,
            branches: vec![Selection {
                buyers: r.expensive_buyers().to_vec(),
                sellers: r.cheap_sellers().to_vec(),
            }],
        });
    }
    let sellers = r.cheap_sellers()[..k - 1].to_vec();
    let branches = (0..k)
        .map(|excluded| Selection {
            buyers: r
                .expensive_buyers()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != excluded)
                .map(|(_, o)| o.clone())
                .collect(),
            sellers: sellers.clone(),
        })
        .collect();
    Some(TradePlan {
        price: s_k.clone(),
        regime: Regime::Lottery,
        branches,
    })
}

pub fn sbba(instance: &SingleMarketInstance) -> OutcomeDistribution {
    match sbba_plan(&rank(instance)) {
        Some(plan) => plan.to_distribution(),
        None => OutcomeDistribution::deterministic(Outcome::empty()),
    }
}

pub fn sbba_dual(instance: &SingleMarketInstance) -> OutcomeDistribution {
    match dual_plan(&rank(instance)) {
        Some(plan) => plan.to_distribution(),
        None => OutcomeDistribution::deterministic(Outcome::empty()),
    }
}
