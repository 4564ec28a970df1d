use serde::{Deserialize, Serialize};

use crate::model::{Market, OutcomeDistribution, Side, TraderId};
use crate::money::Money;

/// Sign pattern of broker surplus across branches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetClass {
    /// Every branch exactly zero.
    Strong,
    /// All non-negative, some positive.
    Surplus,
    /// All non-positive, some negative.
    Deficit,
    Mixed,
}

impl BudgetClass {
    /// Class of the union of two branch sets.
    pub fn join(self, other: BudgetClass) -> BudgetClass {
        use BudgetClass::*;
        match (self, other) {
            (a, b) if a == b => a,
            (Strong, x) | (x, Strong) => x,
            _ => Mixed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BudgetClass::Strong => "strong",
            BudgetClass::Surplus => "surplus",
            BudgetClass::Deficit => "deficit",
            BudgetClass::Mixed => "mixed",
        }
    }
}

impl std::fmt::Display for BudgetClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn budget_audit(dist: &OutcomeDistribution) -> BudgetClass {
    let surpluses = dist.branches().iter().map(|b| b.outcome.broker_surplus());
    let (mut pos, mut neg) = (false, false);
    for s in surpluses {
        pos |= s.is_positive();
        neg |= s.is_negative();
    }
    match (pos, neg) {
        (false, false) => BudgetClass::Strong,
        (true, false) => BudgetClass::Surplus,
        (false, true) => BudgetClass::Deficit,
        (true, true) => BudgetClass::Mixed,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IrViolation {
    /// A trader settled on the wrong side of its declared value.
    Loss {
        branch: usize,
        trader: TraderId,
        value: Money,
        price: Money,
    },
    /// A fill for a trader absent from the market.
    Unknown { branch: usize, trader: TraderId },
    /// A buyer filled as a seller or vice versa.
    WrongSide { branch: usize, trader: TraderId },
}

/// Every fill in every branch must leave the trader no worse off at its
/// declared value.
pub fn ir_audit(dist: &OutcomeDistribution, market: &impl Market) -> Vec<IrViolation> {
    let mut violations = Vec::new();
    for (branch, b) in dist.branches().iter().enumerate() {
        let fills = b
            .outcome
            .buyer_fills()
            .iter()
            .map(|f| (Side::Buy, f))
            .chain(b.outcome.seller_fills().iter().map(|f| (Side::Sell, f)));
        for (side, (id, price)) in fills {
            let Some(order) = market.order(id) else {
                violations.push(IrViolation::Unknown {
                    branch,
                    trader: id.clone(),
                });
                continue;
            };
            if order.side != side {
                violations.push(IrViolation::WrongSide {
                    branch,
                    trader: id.clone(),
                });
            } else if order.gain_at(price).is_negative() {
                violations.push(IrViolation::Loss {
                    branch,
                    trader: id.clone(),
                    value: order.value.clone(),
                    price: price.clone(),
                });
            }
        }
    }
    violations
}
