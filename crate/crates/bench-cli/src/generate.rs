//! Seeded instance generators. Values are integers so McAfee's half-integer
//! prices stay exact and the files read back bit-for-bit.

use rand::Rng;
use thiserror::Error;

use sbba_core::ranking::rank;
use sbba_core::sdm::SdmInstance;
use sbba_core::{MarketId, Money, Order, SingleMarketInstance};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("empty value range {lo}..={hi}")]
    EmptyRange { lo: i64, hi: i64 },
    #[error("values must be non-negative, got lower bound {0}")]
    NegativeBound(i64),
    #[error("{what} must be at least {min}, got {got}")]
    TooSmall { what: &'static str, min: i64, got: i64 },
    #[error("adversarial instances need 0 < eps < budget, got eps {eps}, budget {budget}")]
    BadAdversary { budget: i64, eps: i64 },
}

fn check_range(lo: i64, hi: i64) -> Result<(), GenError> {
    if lo < 0 {
        return Err(GenError::NegativeBound(lo));
    }
    if lo > hi {
        return Err(GenError::EmptyRange { lo, hi });
    }
    Ok(())
}

fn at_least(what: &'static str, got: i64, min: i64) -> Result<(), GenError> {
    if got < min {
        return Err(GenError::TooSmall { what, min, got });
    }
    Ok(())
}

/// Independent uniform integer values on both sides.
pub fn uniform(
    rng: &mut impl Rng,
    buyers: usize,
    sellers: usize,
    lo: i64,
    hi: i64,
) -> Result<SingleMarketInstance, GenError> {
    check_range(lo, hi)?;
    let b: Vec<i64> = (0..buyers).map(|_| rng.gen_range(lo..=hi)).collect();
    let s: Vec<i64> = (0..sellers).map(|_| rng.gen_range(lo..=hi)).collect();
    Ok(SingleMarketInstance::from_values(&b, &s).expect("generated ids are unique"))
}

/// Uniform instance conditioned on exactly `k` efficient deals, by
/// rejection. Each side gets between `k` and `2k + 1` traders.
pub fn with_breakeven(rng: &mut impl Rng, k: usize, lo: i64, hi: i64) -> Result<SingleMarketInstance, GenError> {
    check_range(lo, hi)?;
    at_least("k", k as i64, 1)?;
    if lo == hi {
        // Every pair trades, so k is the shorter side.
        let n = k;
        return uniform(rng, n, n, lo, hi);
    }
    loop {
        let nb = rng.gen_range(k..=2 * k + 1);
        let ns = rng.gen_range(k..=2 * k + 1);
        let i = uniform(rng, nb, ns, lo, hi)?;
        if rank(&i).k() == k {
            return Ok(i);
        }
    }
}

/// `k - 1` sellers at 0 and one at `eps`; `k - 1` buyers at `budget` and
/// one at `budget - eps`. McAfee keeps almost all the surplus here.
pub fn adversarial(k: usize, budget: i64, eps: i64) -> Result<SingleMarketInstance, GenError> {
    at_least("k", k as i64, 2)?;
    if eps <= 0 || eps >= budget {
        return Err(GenError::BadAdversary { budget, eps });
    }
    let mut sellers = vec![0; k - 1];
    sellers.push(eps);
    let mut buyers = vec![budget; k - 1];
    buyers.push(budget - eps);
    Ok(SingleMarketInstance::from_values(&buyers, &sellers).expect("generated ids are unique"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdmSpec {
    pub markets: usize,
    /// Each market gets between 0 and this many traders, each side by coin flip.
    pub max_traders_per_market: usize,
    pub value_lo: i64,
    pub value_hi: i64,
    pub transit_lo: i64,
    pub transit_hi: i64,
}

impl Default for SdmSpec {
    fn default() -> Self {
        SdmSpec {
            markets: 2,
            max_traders_per_market: 4,
            value_lo: 0,
            value_hi: 20,
            transit_lo: 1,
            transit_hi: 6,
        }
    }
}

pub fn sdm(rng: &mut impl Rng, spec: &SdmSpec) -> Result<SdmInstance, GenError> {
    check_range(spec.value_lo, spec.value_hi)?;
    at_least("markets", spec.markets as i64, 1)?;
    at_least("transit lower bound", spec.transit_lo, 1)?;
    if spec.transit_lo > spec.transit_hi {
        return Err(GenError::EmptyRange {
            lo: spec.transit_lo,
            hi: spec.transit_hi,
        });
    }
    let markets: Vec<MarketId> = (1..=spec.markets).map(|i| MarketId::from(i.to_string().as_str())).collect();
    let mut transit = Vec::new();
    for a in &markets {
        for b in &markets {
            if a != b {
                let c = rng.gen_range(spec.transit_lo..=spec.transit_hi);
                transit.push((a.clone(), b.clone(), Money::from_integer(c)));
            }
        }
    }
    let mut traders = Vec::new();
    for m in &markets {
        let n = rng.gen_range(0..=spec.max_traders_per_market);
        for i in 1..=n {
            let v = rng.gen_range(spec.value_lo..=spec.value_hi);
            let order = if rng.gen_bool(0.5) {
                Order::buy(format!("m{m}-b{i}").as_str(), v)
            } else {
                Order::sell(format!("m{m}-s{i}").as_str(), v)
            };
            traders.push(order.at(m.clone()));
        }
    }
    Ok(SdmInstance::new(markets, transit, traders).expect("generated instance is valid"))
}

/// Two markets with a fixed symmetric transit cost.
pub fn sdm_pair(rng: &mut impl Rng, traders_per_market: usize, lo: i64, hi: i64, cost: i64) -> Result<SdmInstance, GenError> {
    sdm(
        rng,
        &SdmSpec {
            markets: 2,
            max_traders_per_market: traders_per_market,
            value_lo: lo,
            value_hi: hi,
            transit_lo: cost,
            transit_hi: cost,
        },
    )
}
