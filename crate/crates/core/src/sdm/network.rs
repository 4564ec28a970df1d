use crate::model::{MarketId, Side, TraderId};
use crate::money::Money;

use super::SdmInstance;

/// Index of the agents node in every [`FlowNetwork`].
pub const AGENTS: usize = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Agents,
    Market(MarketId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeTag {
    Seller(TraderId),
    Buyer(TraderId),
    Transit { from: MarketId, to: MarketId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub capacity: u64,
    pub cost: Money,
    pub tag: EdgeTag,
}

/// The market-flow graph: an agents node plus one node per market.
///
/// Each seller is a unit edge agents → market costing its ask, each buyer
/// a unit edge market → agents costing minus its bid, and each ordered
/// market pair an edge costing the transit cost. Transit capacity is the
/// total number of sellers, which no feasible shipment can exceed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowNetwork {
    nodes: Vec<Node>,
    edges: Vec<FlowEdge>,
}

impl FlowNetwork {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[FlowEdge] {
        &self.edges
    }

    pub fn market_node(&self, market: &MarketId) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| matches!(n, Node::Market(m) if m == market))
    }

    pub fn market_of(&self, node: usize) -> Option<&MarketId> {
        match self.nodes.get(node) {
            Some(Node::Market(m)) => Some(m),
            _ => None,
        }
    }

    pub fn transit_edges(&self) -> impl Iterator<Item = (usize, &FlowEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e.tag, EdgeTag::Transit { .. }))
    }
}

pub fn build_flow_network(sdm: &SdmInstance) -> FlowNetwork {
    let mut nodes = vec![Node::Agents];
    nodes.extend(sdm.markets().iter().cloned().map(Node::Market));
    let node_of = |m: &MarketId| 1 + sdm.markets().iter().position(|x| x == m).expect("validated");

    let mut edges = Vec::new();
    for o in sdm.traders() {
        let market = node_of(&o.market);
        edges.push(match o.side {
            Side::Sell => FlowEdge {
                from: AGENTS,
                to: market,
                capacity: 1,
                cost: o.value.clone(),
                tag: EdgeTag::Seller(o.id.clone()),
            },
            Side::Buy => FlowEdge {
                from: market,
                to: AGENTS,
                capacity: 1,
                cost: -&o.value,
                tag: EdgeTag::Buyer(o.id.clone()),
            },
        });
    }
    let unbounded = sdm.sellers().count() as u64;
    for ((from, to), cost) in sdm.transit() {
        edges.push(FlowEdge {
            from: node_of(from),
            to: node_of(to),
            capacity: unbounded,
            cost: cost.clone(),
            tag: EdgeTag::Transit {
                from: from.clone(),
                to: to.clone(),
            },
        });
    }
    FlowNetwork { nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Order, SingleMarketInstance};
    use crate::sdm::examples;

    #[test]
    fn main_example_shape() {
        let net = build_flow_network(&examples::main_example());
        assert_eq!(net.nodes().len(), 3);
        assert_eq!(net.edges().len(), 22);
        let transit: Vec<_> = net.transit_edges().map(|(_, e)| e.cost.clone()).collect();
        assert_eq!(transit, vec![Money::from_integer(4); 2]);
        let buyers = net
            .edges()
            .iter()
            .filter(|e| matches!(e.tag, EdgeTag::Buyer(_)))
            .count();
        assert_eq!(buyers, 10);
        // Buyer edges cost minus the bid.
        let b = net
            .edges()
            .iter()
            .find(|e| e.tag == EdgeTag::Buyer("m2-b36".into()))
            .unwrap();
        assert_eq!(b.cost, Money::from_integer(-36));
        assert_eq!((b.from, b.to), (net.market_node(&"2".into()).unwrap(), AGENTS));
    }

    #[test]
    fn one_market_one_pair() {
        let inst = SingleMarketInstance::new(vec![Order::buy("b", 5)], vec![Order::sell("s", 1)]).unwrap();
        let net = build_flow_network(&SdmInstance::from_single(&inst));
        assert_eq!(net.nodes().len(), 2);
        assert_eq!(net.edges().len(), 2);
        assert_eq!(net.transit_edges().count(), 0);
    }

    #[test]
    fn lottery_example_seller_costs() {
        let net = build_flow_network(&examples::lottery_example());
        let m1 = net.market_node(&"1".into()).unwrap();
        let mut costs: Vec<_> = net
            .edges()
            .iter()
            .filter(|e| matches!(e.tag, EdgeTag::Seller(_)) && e.to == m1)
            .map(|e| e.cost.clone())
            .collect();
        costs.sort();
        let expected: Vec<_> = [1, 5, 9, 13, 17].into_iter().map(Money::from_integer).collect();
        assert_eq!(costs, expected);
        assert_eq!(net.edges().len(), 22);
    }
}
