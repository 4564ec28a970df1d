//! JSON instance files.
//!
//! ```json
//! {
//!   "markets": [{"id": "1"}, {"id": "2"}],
//!   "transit": [{"from": "1", "to": "2", "cost": 4}, {"from": "2", "to": "1", "cost": 4}],
//!   "traders": [{"id": "b1", "side": "buy", "value": "10.5", "market": "1"}]
//! }
//! ```
//!
//! Single-market files omit `markets` and `transit` (and each trader's
//! `market`). Values are JSON integers or decimal / fraction strings, read
//! exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sbba_core::sdm::SdmInstance;
use sbba_core::{Error as CoreError, MarketId, Money, Order, Side, SingleMarketInstance, TraderId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markets: Option<Vec<MarketEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transit: Option<Vec<TransitEntry>>,
    pub traders: Vec<TraderEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketEntry {
    pub id: MarketId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitEntry {
    pub from: MarketId,
    pub to: MarketId,
    pub cost: Money,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraderEntry {
    pub id: TraderId,
    pub side: Side,
    pub value: Money,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Single(SingleMarketInstance),
    Sdm(SdmInstance),
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("line {line}, column {column}: {message} (at `{path}`)")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("`{path}`: {source}")]
    Invalid {
        path: String,
        #[source]
        source: CoreError,
    },
    #[error("`{path}`: {message}")]
    Shape { path: String, message: String },
}

pub fn parse_instance(text: &str) -> Result<Instance, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SchemaError::Syntax {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    file.into_instance()
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, SchemaError> {
        let orders: Vec<Order> = self
            .traders
            .iter()
            .map(|t| Order {
                id: t.id.clone(),
                side: t.side,
                value: t.value.clone(),
                market: t.market.clone().unwrap_or_else(MarketId::single),
            })
            .collect();
        match (self.markets, self.transit) {
            (None, None) => {
                if let Some(i) = self.traders.iter().position(|t| t.market.is_some()) {
                    return Err(SchemaError::Shape {
                        path: format!("traders[{i}].market"),
                        message: "single-market files must not name markets".into(),
                    });
                }
                SingleMarketInstance::from_orders(orders)
                    .map(Instance::Single)
                    .map_err(|e| locate(e, &self.traders, &[]))
            }
            (markets, transit) => {
                let markets: Vec<MarketId> = markets.unwrap_or_default().into_iter().map(|m| m.id).collect();
                let transit = transit.unwrap_or_default();
                if let Some(i) = self.traders.iter().position(|t| t.market.is_none()) {
                    return Err(SchemaError::Shape {
                        path: format!("traders[{i}].market"),
                        message: "every trader needs a market when markets are listed".into(),
                    });
                }
                SdmInstance::new(
                    markets,
                    transit.iter().map(|t| (t.from.clone(), t.to.clone(), t.cost.clone())),
                    orders,
                )
                .map(Instance::Sdm)
                .map_err(|e| locate(e, &self.traders, &transit))
            }
        }
    }
}

/// Attaches the JSON path of the offending entry to a validation error.
fn locate(err: CoreError, traders: &[TraderEntry], transit: &[TransitEntry]) -> SchemaError {
    let trader = |id: &TraderId, field: &str| {
        // For duplicates, point at the second occurrence.
        let hits: Vec<usize> = traders
            .iter()
            .enumerate()
            .filter(|(_, t)| &t.id == id)
            .map(|(i, _)| i)
            .collect();
        match hits.last() {
            Some(i) => format!("traders[{i}]{field}"),
            None => "traders".into(),
        }
    };
    let pair = |from: &MarketId, to: &MarketId| {
        let hits: Vec<usize> = transit
            .iter()
            .enumerate()
            .filter(|(_, t)| &t.from == from && &t.to == to)
            .map(|(i, _)| i)
            .collect();
        match hits.last() {
            Some(i) => format!("transit[{i}]"),
            None => "transit".into(),
        }
    };
    let path = match &err {
        CoreError::DuplicateId(id) => trader(id, ".id"),
        CoreError::NegativeValue { id, .. } => trader(id, ".value"),
        CoreError::UnknownMarket { trader: id, .. } => trader(id, ".market"),
        CoreError::NonPositiveTransit { from, to, .. } => format!("{}.cost", pair(from, to)),
        CoreError::DuplicateTransit { from, to } => pair(from, to),
        CoreError::SelfTransit(m) => pair(m, m),
        CoreError::UnknownTransitMarket(_) | CoreError::MissingTransit { .. } => "transit".into(),
        CoreError::DuplicateMarket(_) => "markets".into(),
        _ => String::new(),
    };
    SchemaError::Invalid { path, source: err }
}

pub fn to_file(instance: &Instance) -> InstanceFile {
    match instance {
        Instance::Single(i) => InstanceFile {
            markets: None,
            transit: None,
            traders: i
                .buyers()
                .iter()
                .chain(i.sellers())
                .map(|o| TraderEntry {
                    id: o.id.clone(),
                    side: o.side,
                    value: o.value.clone(),
                    market: None,
                })
                .collect(),
        },
        Instance::Sdm(s) => InstanceFile {
            markets: Some(s.markets().iter().map(|id| MarketEntry { id: id.clone() }).collect()),
            transit: Some(
                s.transit()
                    .iter()
                    .map(|((from, to), cost)| TransitEntry {
                        from: from.clone(),
                        to: to.clone(),
                        cost: cost.clone(),
                    })
                    .collect(),
            ),
            traders: s
                .traders()
                .iter()
                .map(|o| TraderEntry {
                    id: o.id.clone(),
                    side: o.side,
                    value: o.value.clone(),
                    market: Some(o.market.clone()),
                })
                .collect(),
        },
    }
}

/// Pretty JSON with a trailing newline.
pub fn serialize_instance(instance: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(instance)).expect("plain data serializes");
    s.push('\n');
    s
}
