use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::MarketId;
use crate::money::Money;

use super::circulation::Circulation;
use super::network::FlowNetwork;

/// Commercial-relationship components of an optimal circulation and the
/// fixed price offsets between markets inside each component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    components: Vec<BTreeSet<MarketId>>,
    delta: BTreeMap<(MarketId, MarketId), Money>,
}

impl ComponentPartition {
    /// Components ordered by their smallest market id.
    pub fn components(&self) -> &[BTreeSet<MarketId>] {
        &self.components
    }

    pub fn component_of(&self, market: &MarketId) -> Option<usize> {
        self.components.iter().position(|c| c.contains(market))
    }

    /// The lexicographically smallest market of component `c`.
    pub fn anchor(&self, c: usize) -> &MarketId {
        self.components[c].first().expect("components are non-empty")
    }

    /// `p_to - p_from` in any equilibrium.
    pub fn delta(&self, from: &MarketId, to: &MarketId) -> Result<&Money> {
        self.delta
            .get(&(from.clone(), to.clone()))
            .ok_or_else(|| Error::NoDelta {
                from: from.clone(),
                to: to.clone(),
            })
    }

    pub fn deltas(&self) -> &BTreeMap<(MarketId, MarketId), Money> {
        &self.delta
    }
}

/// Groups markets linked by positive transit flow, and sets each in-component
/// offset to the cheapest residual path cost over transit arcs only: forward
/// arcs at the transit cost, reverse arcs at minus the cost where flow is
/// positive.
///
/// Requires an optimal circulation, so that the residual graph has no
/// negative cycle and the shortest paths are well defined.
pub fn components_and_deltas(net: &FlowNetwork, circ: &Circulation) -> ComponentPartition {
    let markets: Vec<&MarketId> = (0..net.nodes().len())
        .filter_map(|n| net.market_of(n))
        .collect();

    // Union-find over market nodes.
    let mut parent: Vec<usize> = (0..net.nodes().len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut x = x;
        while parent[x] != r {
            let next = parent[x];
            parent[x] = r;
            x = next;
        }
        r
    }
    for (i, e) in net.transit_edges() {
        if circ.flow(i) > 0 {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            parent[a] = b;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<MarketId>> = BTreeMap::new();
    for node in 0..net.nodes().len() {
        if let Some(m) = net.market_of(node) {
            let root = find(&mut parent, node);
            groups.entry(root).or_default().insert(m.clone());
        }
    }
    let mut components: Vec<BTreeSet<MarketId>> = groups.into_values().collect();
    components.sort_by(|a, b| a.first().cmp(&b.first()));

    // Transit is uncapacitated in the model; the finite capacity in the
    // network only bounds the search, so forward arcs always stay.
    let mut arcs = Vec::new();
    for (i, e) in net.transit_edges() {
        arcs.push((e.from, e.to, e.cost.clone()));
        if circ.flow(i) > 0 {
            arcs.push((e.to, e.from, -&e.cost));
        }
    }
    let mut delta = BTreeMap::new();
    for component in &components {
        for from in component {
            let source = net.market_node(from).expect("market node");
            let dist = shortest_from(net.nodes().len(), source, &arcs);
            for to in component {
                let node = net.market_node(to).expect("market node");
                let d = dist[node]
                    .clone()
                    .expect("markets in one component are mutually reachable");
                delta.insert((from.clone(), to.clone()), d);
            }
        }
    }
    debug_assert!(markets.iter().all(|m| components.iter().any(|c| c.contains(*m))));
    ComponentPartition { components, delta }
}

/// Single-source Bellman–Ford; arcs are assumed free of negative cycles.
fn shortest_from(nodes: usize, source: usize, arcs: &[(usize, usize, Money)]) -> Vec<Option<Money>> {
    let mut dist: Vec<Option<Money>> = vec![None; nodes];
    dist[source] = Some(Money::zero());
    for _ in 1..nodes.max(2) {
        let mut changed = false;
        for (from, to, cost) in arcs {
            if let Some(d) = &dist[*from] {
                let candidate = d + cost;
                if dist[*to].as_ref().is_none_or(|cur| &candidate < cur) {
                    dist[*to] = Some(candidate);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Order;
    use crate::sdm::{build_flow_network, examples, min_cost_circulation, SdmInstance};

    fn m(v: i64) -> Money {
        Money::from_integer(v)
    }

    #[test]
    fn main_example_single_component() {
        let net = build_flow_network(&examples::main_example());
        let part = components_and_deltas(&net, &min_cost_circulation(&net));
        assert_eq!(part.components().len(), 1);
        assert_eq!(part.delta(&"1".into(), &"2".into()).unwrap(), &m(4));
        assert_eq!(part.delta(&"2".into(), &"1".into()).unwrap(), &m(-4));
        assert_eq!(part.delta(&"1".into(), &"1".into()).unwrap(), &m(0));
    }

    #[test]
    fn no_inter_market_flow_gives_singletons() {
        let sdm = SdmInstance::new(
            vec!["1".into(), "2".into()],
            vec![
                ("1".into(), "2".into(), m(4)),
                ("2".into(), "1".into(), m(4)),
            ],
            vec![
                Order::buy("b1", 10).at("1"),
                Order::sell("s1", 2).at("1"),
                Order::buy("b2", 10).at("2"),
                Order::sell("s2", 2).at("2"),
            ],
        )
        .unwrap();
        let net = build_flow_network(&sdm);
        let part = components_and_deltas(&net, &min_cost_circulation(&net));
        assert_eq!(part.components().len(), 2);
        assert!(part.delta(&"1".into(), &"2".into()).is_err());
        assert_eq!(part.deltas().len(), 2); // only the zero diagonal
    }

    /// Three markets in a line; goods flow 1 -> 2 -> 3.
    fn line() -> SdmInstance {
        let cost = |a: &str, b: &str, c: i64| (MarketId::from(a), MarketId::from(b), m(c));
        SdmInstance::new(
            vec!["1".into(), "2".into(), "3".into()],
            vec![
                cost("1", "2", 2),
                cost("2", "3", 3),
                cost("2", "1", 2),
                cost("3", "2", 3),
                cost("1", "3", 50),
                cost("3", "1", 50),
            ],
            vec![
                Order::sell("s1", 0).at("1"),
                Order::buy("b2", 10).at("2"),
                Order::sell("s1b", 1).at("1"),
                Order::buy("b3", 20).at("3"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn line_deltas_compose() {
        let net = build_flow_network(&line());
        let c = min_cost_circulation(&net);
        let ships = c.shipments(&net);
        assert_eq!(ships[&("1".into(), "2".into())], 2);
        assert_eq!(ships[&("2".into(), "3".into())], 1);
        let part = components_and_deltas(&net, &c);
        assert_eq!(part.components().len(), 1);
        let d = |a: &str, b: &str| part.delta(&a.into(), &b.into()).unwrap().clone();
        assert_eq!(d("1", "3"), m(5));
        assert_eq!(d("1", "2") + d("2", "3"), d("1", "3"));
        assert_eq!(d("3", "1"), m(-5));
    }
}
