//! Integral min-cost circulation by negative-cycle canceling.
//!
//! Starting from the zero circulation, repeatedly find a negative-cost
//! cycle in the residual graph with Bellman–Ford and saturate it. With
//! integral capacities every augmentation is integral, and the process
//! stops exactly when the residual graph has no negative cycle, which is
//! the optimality certificate.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::model::{MarketId, TraderId};
use crate::money::Money;

use super::network::{EdgeTag, FlowNetwork};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circulation {
    flow: Vec<u64>,
    total_cost: Money,
}

impl Circulation {
    pub fn zero(net: &FlowNetwork) -> Self {
        Circulation {
            flow: vec![0; net.edges().len()],
            total_cost: Money::zero(),
        }
    }

    /// Builds a circulation from explicit edge flows, recomputing its cost.
    pub fn from_flows(net: &FlowNetwork, flow: Vec<u64>) -> Self {
        assert_eq!(flow.len(), net.edges().len(), "one flow per edge");
        let total_cost = net
            .edges()
            .iter()
            .zip(&flow)
            .map(|(e, &f)| &e.cost * Money::from_integer(f as i64))
            .sum();
        Circulation { flow, total_cost }
    }

    pub fn flow(&self, edge: usize) -> u64 {
        self.flow[edge]
    }

    pub fn flows(&self) -> &[u64] {
        &self.flow
    }

    pub fn total_cost(&self) -> &Money {
        &self.total_cost
    }

    /// Traders whose unit edge carries flow.
    pub fn active_traders(&self, net: &FlowNetwork) -> BTreeSet<TraderId> {
        net.edges()
            .iter()
            .zip(&self.flow)
            .filter(|(_, &f)| f > 0)
            .filter_map(|(e, _)| match &e.tag {
                EdgeTag::Seller(id) | EdgeTag::Buyer(id) => Some(id.clone()),
                EdgeTag::Transit { .. } => None,
            })
            .collect()
    }

    /// Units shipped along each transit edge with positive flow.
    pub fn shipments(&self, net: &FlowNetwork) -> BTreeMap<(MarketId, MarketId), u64> {
        net.transit_edges()
            .filter(|(i, _)| self.flow[*i] > 0)
            .map(|(i, e)| match &e.tag {
                EdgeTag::Transit { from, to } => ((from.clone(), to.clone()), self.flow[i]),
                _ => unreachable!(),
            })
            .collect()
    }

    /// Flow conservation at every node and capacity bounds on every edge.
    pub fn is_feasible(&self, net: &FlowNetwork) -> bool {
        let mut balance = vec![0i64; net.nodes().len()];
        for (e, &f) in net.edges().iter().zip(&self.flow) {
            if f > e.capacity {
                return false;
            }
            balance[e.from] -= f as i64;
            balance[e.to] += f as i64;
        }
        balance.iter().all(|&b| b == 0)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ResidualArc {
    pub from: usize,
    pub to: usize,
    pub cost: Money,
    pub capacity: u64,
    pub edge: usize,
    pub forward: bool,
}

pub(crate) fn residual_arcs(net: &FlowNetwork, flow: &[u64], costs: &[Money]) -> Vec<ResidualArc> {
    let mut arcs = Vec::new();
    for (i, e) in net.edges().iter().enumerate() {
        let f = flow[i];
        if f < e.capacity {
            arcs.push(ResidualArc {
                from: e.from,
                to: e.to,
                cost: costs[i].clone(),
                capacity: e.capacity - f,
                edge: i,
                forward: true,
            });
        }
        if f > 0 {
            arcs.push(ResidualArc {
                from: e.to,
                to: e.from,
                cost: -&costs[i],
                capacity: f,
                edge: i,
                forward: false,
            });
        }
    }
    arcs
}

/// Bellman–Ford from a virtual source joined to every node at cost 0.
/// Returns the arc indices of some negative cycle, in traversal order.
pub(crate) fn find_negative_cycle(nodes: usize, arcs: &[ResidualArc]) -> Option<Vec<usize>> {
    let mut dist = vec![Money::zero(); nodes];
    let mut pred: Vec<Option<usize>> = vec![None; nodes];
    let mut last_relaxed = None;
    for _ in 0..nodes {
        last_relaxed = None;
        for (a, arc) in arcs.iter().enumerate() {
            let candidate = &dist[arc.from] + &arc.cost;
            if candidate < dist[arc.to] {
                dist[arc.to] = candidate;
                pred[arc.to] = Some(a);
                last_relaxed = Some(arc.to);
            }
        }
        last_relaxed?;
    }
    // Still relaxing after |V| rounds: walk back |V| steps to land on the
    // cycle, then collect it.
    let mut v = last_relaxed?;
    for _ in 0..nodes {
        v = arcs[pred[v]?].from;
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let a = pred[v]?;
        cycle.push(a);
        v = arcs[a].from;
        if v == start {
            break;
        }
    }
    cycle.reverse();
    Some(cycle)
}

/// Solves with [`tie_broken_costs`], so the result is a true optimum that is
/// also canonical among equally cheap circulations.
pub fn min_cost_circulation(net: &FlowNetwork) -> Circulation {
    let costs = tie_broken_costs(net);
    let mut flow = vec![0u64; net.edges().len()];
    loop {
        let arcs = residual_arcs(net, &flow, &costs);
        let Some(cycle) = find_negative_cycle(net.nodes().len(), &arcs) else {
            break;
        };
        let push = cycle.iter().map(|&a| arcs[a].capacity).min().expect("non-empty cycle");
        for &a in &cycle {
            let arc = &arcs[a];
            if arc.forward {
                flow[arc.edge] += push;
            } else {
                flow[arc.edge] -= push;
            }
        }
    }
    Circulation::from_flows(net, flow)
}

/// Edge costs plus an exact perturbation too small to flip any strict
/// preference between circulations.
///
/// Every circulation cost is a multiple of `1/D`, `D` the common
/// denominator of all edge costs, so a total perturbation below `1/D`
/// only decides between optima. Traders sorted by id get weights that
/// double at each step, so among optima the solver keeps the lowest ids,
/// as the (value, id) ranking does; each transit unit then adds one
/// small unit, so direct routes beat detours of equal cost.
pub fn tie_broken_costs(net: &FlowNetwork) -> Vec<Money> {
    let mut traders: Vec<(&TraderId, usize)> = net
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| match &e.tag {
            EdgeTag::Seller(id) | EdgeTag::Buyer(id) => Some((id, i)),
            EdgeTag::Transit { .. } => None,
        })
        .collect();
    traders.sort();
    let transit_units: u64 = net.transit_edges().map(|(_, e)| e.capacity).sum();
    let step = BigInt::from(transit_units + 1);

    let mut denom = BigInt::one();
    for e in net.edges() {
        denom = denom.lcm(e.cost.denom());
    }
    let total_weight = (BigInt::one() << (traders.len() + 1)) * &step;
    let unit = Money::from_big(BigInt::one(), denom * total_weight);

    let mut costs: Vec<Money> = net.edges().iter().map(|e| e.cost.clone()).collect();
    for (rank, &(_, edge)) in traders.iter().enumerate() {
        let weight = (BigInt::one() << rank) * &step;
        costs[edge] += &unit * Money::from_big(weight, BigInt::one());
    }
    for (i, _) in net.transit_edges() {
        costs[i] += &unit;
    }
    costs
}

/// Optimality certificate: no negative cycle remains in the residual graph.
pub fn has_negative_residual_cycle(net: &FlowNetwork, circ: &Circulation) -> bool {
    let costs: Vec<Money> = net.edges().iter().map(|e| e.cost.clone()).collect();
    find_negative_cycle(net.nodes().len(), &residual_arcs(net, &circ.flow, &costs)).is_some()
}
