//! Single-market mechanisms and the efficiency/equilibrium references they
//! are measured against.

mod mcafee;
mod sbba;
mod vcg;

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Market, Outcome, OutcomeDistribution, SingleMarketInstance, TraderId};
use crate::money::Money;
use crate::ranking::rank;

pub use mcafee::mcafee;
pub use sbba::{dual_plan, sbba, sbba_dual, sbba_plan, Regime, Selection, TradePlan};
pub use vcg::vcg;

/// A (possibly randomized) mechanism, run as a black box on a market.
pub trait Mechanism<M: Market = SingleMarketInstance> {
    fn name(&self) -> &'static str;
    fn run(&self, market: &M) -> Result<OutcomeDistribution>;

    /// Reports of trader `id` at which its outcome may change regime.
    fn breakpoints(&self, market: &M, id: &TraderId) -> Vec<Money> {
        market.breakpoints(id)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sbba;

#[derive(Clone, Copy, Debug, Default)]
pub struct SbbaDual;

#[derive(Clone, Copy, Debug, Default)]
pub struct McAfee;

#[derive(Clone, Copy, Debug, Default)]
pub struct Vcg;

impl Mechanism for Sbba {
    fn name(&self) -> &'static str {
        "sbba"
    }
    fn run(&self, market: &SingleMarketInstance) -> Result<OutcomeDistribution> {
        Ok(sbba(market))
    }
}

impl Mechanism for SbbaDual {
    fn name(&self) -> &'static str {
        "sbba_dual"
    }
    fn run(&self, market: &SingleMarketInstance) -> Result<OutcomeDistribution> {
        Ok(sbba_dual(market))
    }
}

impl Mechanism for McAfee {
    fn name(&self) -> &'static str {
        "mcafee"
    }
    fn run(&self, market: &SingleMarketInstance) -> Result<OutcomeDistribution> {
        Ok(mcafee(market))
    }
    /// The candidate price `(b_{k+1} + s_{k+1}) / 2` is a midpoint of two
    /// other traders, so every buyer-seller midpoint is a breakpoint too.
    fn breakpoints(&self, market: &SingleMarketInstance, id: &TraderId) -> Vec<Money> {
        let mut points = market.breakpoints(id);
        for b in market.buyers().iter().filter(|o| &o.id != id) {
            for s in market.sellers().iter().filter(|o| &o.id != id) {
                points.push(Money::midpoint(&b.value, &s.value));
            }
        }
        points
    }
}

impl Mechanism for Vcg {
    fn name(&self) -> &'static str {
        "vcg"
    }
    fn run(&self, market: &SingleMarketInstance) -> Result<OutcomeDistribution> {
        Ok(vcg(market))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalTrade {
    pub k: usize,
    pub gft: Money,
}

/// The efficient allocation: the `k` highest bids matched with the `k`
/// lowest asks.
pub fn optimal_trade(instance: &SingleMarketInstance) -> OptimalTrade {
    let r = rank(instance);
    let gft = r
        .expensive_buyers()
        .iter()
        .zip(r.cheap_sellers())
        .map(|(b, s)| &b.value - &s.value)
        .sum();
    OptimalTrade { k: r.k(), gft }
}

/// The closed interval of market-clearing prices for the efficient trade.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalrasianRange {
    /// `max(s_k, b_{k+1})`, the lowest equilibrium price.
    pub low: Money,
    /// `min(b_k, s_{k+1})`, the highest equilibrium price. Always finite
    /// because `b_k` is.
    pub high: Money,
}

impl WalrasianRange {
    pub fn contains(&self, price: &Money) -> bool {
        &self.low <= price && price <= &self.high
    }
}

pub fn walrasian_range(instance: &SingleMarketInstance) -> Result<WalrasianRange> {
    let r = rank(instance);
    let (b_k, s_k) = match (r.b_k(), r.s_k()) {
        (Some(b), Some(s)) => (b, s),
        _ => return Err(Error::NoEquilibriumRange),
    };
    let b_next = r.b_next();
    Ok(WalrasianRange {
        low: if s_k >= &b_next { s_k.clone() } else { b_next },
        high: r.s_next().min_money(b_k),
    })
}

/// Draws one outcome with its exact probability.
///
/// Uses a single uniform integer draw over the common denominator of the
/// branch probabilities, so the selection is exact and depends only on the
/// random stream.
pub fn sample<'a, R: Rng + ?Sized>(dist: &'a OutcomeDistribution, rng: &mut R) -> &'a Outcome {
    let branches = dist.branches();
    if branches.len() == 1 {
        return &branches[0].outcome;
    }
    let denom = branches
        .iter()
        .fold(BigInt::one(), |acc, b| acc.lcm(b.probability.denom()));
    let draw = rng.gen_bigint_range(&BigInt::zero(), &denom);
    let mut cumulative = BigInt::zero();
    for b in branches {
        cumulative += b.probability.numer() * (&denom / b.probability.denom());
        if draw < cumulative {
            return &b.outcome;
        }
    }
    // Probabilities sum to one, so the loop always returns.
    &branches[branches.len() - 1].outcome
}
