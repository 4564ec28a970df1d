use crate::model::{MarketId, TraderId};
use crate::money::Money;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("duplicate trader id {0}")]
    DuplicateId(TraderId),
    #[error("trader {id} declares negative value {value}")]
    NegativeValue { id: TraderId, value: Money },
    #[error("trader {0} is listed on the wrong side")]
    WrongSide(TraderId),
    #[error("unknown trader {0}")]
    UnknownTrader(TraderId),
    #[error("duplicate market id {0}")]
    DuplicateMarket(MarketId),
    #[error("trader {trader} references unknown market {market}")]
    UnknownMarket { trader: TraderId, market: MarketId },
    #[error("transit entry references unknown market {0}")]
    UnknownTransitMarket(MarketId),
    #[error("missing transit cost {from} -> {to}")]
    MissingTransit { from: MarketId, to: MarketId },
    #[error("duplicate transit cost {from} -> {to}")]
    DuplicateTransit { from: MarketId, to: MarketId },
    #[error("transit cost {from} -> {to} must be positive, got {cost}")]
    NonPositiveTransit {
        from: MarketId,
        to: MarketId,
        cost: Money,
    },
    #[error("transit cost declared from market {0} to itself")]
    SelfTransit(MarketId),
    #[error("no profitable deal (k = 0): the equilibrium range is undefined")]
    NoEquilibriumRange,
    #[error("markets {from} and {to} are in different components; no price offset")]
    NoDelta { from: MarketId, to: MarketId },
    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("instance too large for exhaustive enumeration: {0}")]
    SizeLimitExceeded(String),
}
