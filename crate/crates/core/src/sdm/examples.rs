//! Two worked two-market instances with transit cost 4 in both directions.
//!
//! Trader ids are `m<market>-<b|s><value>`, e.g. `m2-b36`.

use crate::model::{MarketId, Order};
use crate::money::Money;

use super::SdmInstance;

fn two_markets(m1: (&[i64], &[i64]), m2: (&[i64], &[i64])) -> SdmInstance {
    let mut traders = Vec::new();
    for (market, (sellers, buyers)) in [("1", m1), ("2", m2)] {
        for &s in sellers {
            traders.push(Order::sell(format!("m{market}-s{s}").as_str(), s).at(market));
        }
        for &b in buyers {
            traders.push(Order::buy(format!("m{market}-b{b}").as_str(), b).at(market));
        }
    }
    let (one, two) = (MarketId::from("1"), MarketId::from("2"));
    SdmInstance::new(
        vec![one.clone(), two.clone()],
        [
            (one.clone(), two.clone(), Money::from_integer(4)),
            (two, one, Money::from_integer(4)),
        ],
        traders,
    )
    .expect("well-formed example")
}

/// Optimal cost -100; one component with prices 17 and 21 and six deals.
pub fn main_example() -> SdmInstance {
    two_markets(
        (&[1, 5, 9, 13, 19], &[20, 18, 12, 8, 4]),
        (&[2, 19, 21, 27, 31], &[36, 32, 28, 23, 18]),
    )
}

/// Optimal cost -85; the lottery case with prices 16 and 20.
pub fn lottery_example() -> SdmInstance {
    two_markets(
        (&[1, 5, 9, 13, 17], &[20, 16, 12, 8, 4]),
        (&[15, 19, 22, 27, 31], &[36, 32, 28, 23, 18]),
    )
}
