//! Sorting traders and locating the breakeven index.

use crate::model::{Order, SingleMarketInstance};
use crate::money::{Extended, Money};

/// Buyers by descending bid, sellers by ascending ask, ties broken by id.
///
/// Indices in accessor names are 1-based to match the usual `b_i`, `s_i`
/// notation: `buyer(1)` is the highest bid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    buyers_desc: Vec<Order>,
    sellers_asc: Vec<Order>,
    k: usize,
}

pub fn rank(instance: &SingleMarketInstance) -> Ranking {
    rank_orders(instance.buyers().to_vec(), instance.sellers().to_vec())
}

/// Ranks arbitrary buyer and seller lists. Values may be negative here
/// (translated values in multi-market settings).
pub fn rank_orders(mut buyers: Vec<Order>, mut sellers: Vec<Order>) -> Ranking {
    buyers.sort_by(|a, b| b.value.cmp(&a.value).then_with(|| a.id.cmp(&b.id)));
    sellers.sort_by(|a, b| a.value.cmp(&b.value).then_with(|| a.id.cmp(&b.id)));
    let k = buyers
        .iter()
        .zip(&sellers)
        .take_while(|(b, s)| s.value <= b.value)
        .count();
    Ranking {
        buyers_desc: buyers,
        sellers_asc: sellers,
        k,
    }
}

impl Ranking {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn buyers(&self) -> &[Order] {
        &self.buyers_desc
    }

    pub fn sellers(&self) -> &[Order] {
        &self.sellers_asc
    }

    pub fn buyer(&self, i: usize) -> Option<&Order> {
        i.checked_sub(1).and_then(|i| self.buyers_desc.get(i))
    }

    pub fn seller(&self, i: usize) -> Option<&Order> {
        i.checked_sub(1).and_then(|i| self.sellers_asc.get(i))
    }

    /// The `k` expensive buyers.
    pub fn expensive_buyers(&self) -> &[Order] {
        &self.buyers_desc[..self.k]
    }

    /// The `k` cheap sellers.
    pub fn cheap_sellers(&self) -> &[Order] {
        &self.sellers_asc[..self.k]
    }

    pub fn b_k(&self) -> Option<&Money> {
        self.buyer(self.k).map(|o| &o.value)
    }

    pub fn s_k(&self) -> Option<&Money> {
        self.seller(self.k).map(|o| &o.value)
    }

    /// `s_{k+1}`, or `+∞` when there is no such seller.
    pub fn s_next(&self) -> Extended {
        match self.seller(self.k + 1) {
            Some(o) => Extended::Finite(o.value.clone()),
            None => Extended::PosInfinity,
        }
    }

    /// `b_{k+1}`, or `0` when there is no such buyer.
    pub fn b_next(&self) -> Money {
        self.buyer(self.k + 1)
            .map(|o| o.value.clone())
            .unwrap_or_else(Money::zero)
    }

    pub fn has_next_buyer(&self) -> bool {
        self.buyer(self.k + 1).is_some()
    }

    pub fn has_next_seller(&self) -> bool {
        self.seller(self.k + 1).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SingleMarketInstance;
    use proptest::prelude::*;

    fn m(v: i64) -> Money {
        Money::from_integer(v)
    }

    #[test]
    fn case_one_ranking() {
        let inst = SingleMarketInstance::from_values(&[8, 7, 6, 4, 3, 2], &[1, 2, 3, 5, 6, 7]).unwrap();
        let r = rank(&inst);
        assert_eq!(r.k(), 3);
        assert_eq!(r.b_k(), Some(&m(6)));
        assert_eq!(r.s_k(), Some(&m(3)));
        assert_eq!(r.s_next(), Extended::Finite(m(5)));
        assert_eq!(r.b_next(), m(4));
    }

    #[test]
    fn no_profitable_deal() {
        let r = rank(&SingleMarketInstance::from_values(&[3], &[5]).unwrap());
        assert_eq!(r.k(), 0);
        assert_eq!(r.b_k(), None);
        assert_eq!(r.s_k(), None);
    }

    #[test]
    fn sentinels_when_a_side_is_exhausted() {
        let r = rank(&SingleMarketInstance::from_values(&[10, 10, 9], &[0, 0, 1]).unwrap());
        assert_eq!(r.k(), 3);
        assert_eq!(r.s_next(), Extended::PosInfinity);
        assert_eq!(r.b_next(), Money::zero());
        assert!(!r.has_next_buyer());
    }

    #[test]
    fn ties_break_by_id() {
        let inst = SingleMarketInstance::new(
            vec![Order::buy("z", 5), Order::buy("a", 5)],
            vec![Order::sell("y", 1), Order::sell("c", 1)],
        )
        .unwrap();
        let r = rank(&inst);
        assert_eq!(r.buyers()[0].id, "a".into());
        assert_eq!(r.sellers()[0].id, "c".into());
    }

    proptest! {
        #[test]
        fn permutation_invariant(
            buyers in proptest::collection::vec(0i64..20, 0..7),
            sellers in proptest::collection::vec(0i64..20, 0..7),
            shift in 0usize..7,
        ) {
            let inst = SingleMarketInstance::from_values(&buyers, &sellers).unwrap();
            let mut b = inst.buyers().to_vec();
            let mut s = inst.sellers().to_vec();
            b.reverse();
            if !s.is_empty() {
                let n = s.len();
                s.rotate_left(shift % n);
            }
            let permuted = SingleMarketInstance::new(b, s).unwrap();
            prop_assert_eq!(rank(&inst), rank(&permuted));
        }

        #[test]
        fn breakeven_invariant(
            buyers in proptest::collection::vec(0i64..20, 0..7),
            sellers in proptest::collection::vec(0i64..20, 0..7),
        ) {
            let r = rank(&SingleMarketInstance::from_values(&buyers, &sellers).unwrap());
            for i in 1..=r.k() {
                prop_assert!(r.seller(i).unwrap().value <= r.buyer(i).unwrap().value);
            }
            if let (Some(b), Some(s)) = (r.buyer(r.k() + 1), r.seller(r.k() + 1)) {
                prop_assert!(s.value > b.value);
            }
        }
    }
}
