use std::collections::BTreeMap;

use crate::model::{Outcome, OutcomeDistribution, SingleMarketInstance};
use crate::money::Money;
use crate::ranking::rank;

/// McAfee's trade-reduction double auction (deterministic).
///
/// If both a `(k+1)`-th buyer and a `(k+1)`-th seller exist and
/// `(b_{k+1} + s_{k+1}) / 2` lies in `[s_k, b_k]`, all `k` deals execute at
/// that price. Otherwise the `k`-th deal is cancelled: the first `k-1`
/// buyers pay `b_k` and the first `k-1` sellers receive `s_k`, and the
/// broker keeps the difference.
pub fn mcafee(instance: &SingleMarketInstance) -> OutcomeDistribution {
    let r = rank(instance);
    let k = r.k();
    let (b_k, s_k) = match (r.b_k(), r.s_k()) {
        (Some(b), Some(s)) => (b.clone(), s.clone()),
        _ => return OutcomeDistribution::deterministic(Outcome::empty()),
    };

    let candidate = match (r.buyer(k + 1), r.seller(k + 1)) {
        (Some(b), Some(s)) => Some(Money::midpoint(&b.value, &s.value)),
        _ => None,
    };
    let (buyers, sellers, buy_price, sell_price) = match candidate {
        Some(p) if s_k <= p && p <= b_k => (&r.buyers()[..k], &r.sellers()[..k], p.clone(), p),
        _ => (&r.buyers()[..k - 1], &r.sellers()[..k - 1], b_k, s_k),
    };
    let buyer_fills: BTreeMap<_, _> = buyers
        .iter()
        .map(|o| (o.id.clone(), buy_price.clone()))
        .collect();
    let seller_fills: BTreeMap<_, _> = sellers
        .iter()
        .map(|o| (o.id.clone(), sell_price.clone()))
        .collect();
    OutcomeDistribution::deterministic(
        Outcome::new(buyer_fills, seller_fills).expect("equal prefixes"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{expected_gft, total_gft};

    fn inst(b: &[i64], s: &[i64]) -> SingleMarketInstance {
        SingleMarketInstance::from_values(b, s).unwrap()
    }

    fn m(v: i64) -> Money {
        Money::from_integer(v)
    }

    #[test]
    fn example_one_reduces_one_deal() {
        let ex1 = inst(&[10, 10, 9], &[0, 0, 1]);
        let d = mcafee(&ex1);
        let o = &d.branches()[0].outcome;
        assert_eq!(o.deals(), 2);
        assert!(o.buyer_fills().values().all(|p| p == &m(9)));
        assert!(o.seller_fills().values().all(|p| p == &m(1)));
        assert_eq!(o.broker_surplus(), &m(16));
        assert_eq!(total_gft(&d, &ex1).unwrap(), m(20));
        assert_eq!(expected_gft(&d, &ex1).unwrap(), m(4));
    }

    #[test]
    fn midpoint_price_when_in_range() {
        let d = mcafee(&inst(&[9, 8, 7, 2], &[1, 2, 3, 8]));
        let o = &d.branches()[0].outcome;
        assert_eq!(o.deals(), 3);
        assert!(o.buyer_fills().values().chain(o.seller_fills().values()).all(|p| p == &m(5)));
        assert!(o.broker_surplus().is_zero());
    }

    #[test]
    fn half_integer_price_is_exact() {
        // p_{k+1} = (4 + 5) / 2 = 9/2 in [3, 6].
        let d = mcafee(&inst(&[8, 7, 6, 4], &[1, 2, 3, 5]));
        let o = &d.branches()[0].outcome;
        assert_eq!(o.deals(), 3);
        assert!(o.buyer_fills().values().all(|p| p == &Money::ratio(9, 2)));
    }

    #[test]
    fn midpoint_out_of_range_reduces() {
        // p_{k+1} = (1 + 9) / 2 = 5 > b_k = 4.
        let d = mcafee(&inst(&[8, 4, 1], &[1, 2, 9]));
        let o = &d.branches()[0].outcome;
        assert_eq!(o.deals(), 1);
        assert_eq!(o.broker_surplus(), &m(2));
    }

    #[test]
    fn missing_next_seller_reduces() {
        // A (k+1)-th buyer exists but no (k+1)-th seller.
        let d = mcafee(&inst(&[9, 8, 1], &[1, 2]));
        assert_eq!(d.branches()[0].outcome.deals(), 1);
    }

    #[test]
    fn no_trade() {
        let d = mcafee(&inst(&[3], &[5]));
        assert_eq!(d.branches()[0].outcome, Outcome::empty());
    }
}
