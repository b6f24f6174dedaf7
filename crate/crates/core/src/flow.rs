//! Maximum flow over real capacities by shortest augmenting paths, and the
//! super-sink reduction for multi-gateway uplinks.

use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};
use crate::routing::RateMatrix;

/// Residual capacities at or below this are treated as saturated.
pub const FLOW_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    n_nodes: usize,
    edges: Vec<FlowEdge>,
    source: usize,
    sink: usize,
}

impl FlowNetwork {
    pub fn new(n_nodes: usize, edges: Vec<FlowEdge>, source: usize, sink: usize) -> Result<Self> {
        for v in [source, sink] {
            if v >= n_nodes {
                return Err(Error::IndexOutOfRange { index: v, len: n_nodes });
            }
        }
        if source == sink {
            return Err(invalid("source and sink must differ"));
        }
        for e in &edges {
            for v in [e.from, e.to] {
                if v >= n_nodes {
                    return Err(Error::IndexOutOfRange { index: v, len: n_nodes });
                }
            }
            if !(e.capacity >= 0.0 && e.capacity.is_finite()) {
                return Err(invalid(format!(
                    "edge {}->{} has invalid capacity {}",
                    e.from, e.to, e.capacity
                )));
            }
        }
        Ok(FlowNetwork {
            n_nodes,
            edges,
            source,
            sink,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[FlowEdge] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn total_capacity(&self) -> f64 {
        self.edges.iter().map(|e| e.capacity).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Flow per edge, aligned with [`FlowNetwork::edges`].
    pub flows: Vec<f64>,
    pub total: f64,
}

impl FlowSolution {
    /// Net flow entering `node`.
    pub fn net_inflow(&self, net: &FlowNetwork, node: usize) -> f64 {
        net.edges
            .iter()
            .zip(&self.flows)
            .map(|(e, f)| {
                if e.to == node {
                    *f
                } else if e.from == node {
                    -*f
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Edmonds-Karp on a dense residual matrix. Neighbors are scanned in
/// ascending node order, so the result is a deterministic function of the
/// network. Parallel edges share one residual entry and antiparallel edges
/// cancel; per-edge flows are recovered from the net flow between each pair.
pub fn max_flow(net: &FlowNetwork) -> FlowSolution {
    let n = net.n_nodes;
    let (s, t) = (net.source, net.sink);
    let mut cap = vec![0.0; n * n];
    for e in &net.edges {
        if e.from != e.to {
            cap[e.from * n + e.to] += e.capacity;
        }
    }
    let mut residual = cap.clone();

    const NONE: usize = usize::MAX;
    let mut pred = vec![NONE; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut total = 0.0;
    loop {
        pred.fill(NONE);
        pred[s] = s;
        queue.clear();
        queue.push_back(s);
        'bfs: while let Some(u) = queue.pop_front() {
            let row = &residual[u * n..(u + 1) * n];
            for (v, &r) in row.iter().enumerate() {
                if r > FLOW_EPSILON && pred[v] == NONE {
                    pred[v] = u;
                    if v == t {
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if pred[t] == NONE {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = pred[v];
            bottleneck = bottleneck.min(residual[u * n + v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = pred[v];
            residual[u * n + v] -= bottleneck;
            residual[v * n + u] += bottleneck;
            v = u;
        }
        total += bottleneck;
    }

    // net flow u→v, handed to the u→v edges in input order
    let mut remaining: Vec<f64> = (0..n * n)
        .map(|k| (cap[k] - residual[k]).max(0.0))
        .collect();
    let flows = net
        .edges
        .iter()
        .map(|e| {
            if e.from == e.to {
                return 0.0;
            }
            let slot = &mut remaining[e.from * n + e.to];
            let f = slot.min(e.capacity);
            *slot -= f;
            f
        })
        .collect();
    FlowSolution { flows, total }
}

/// Exhaustive minimum `s`/`t` cut; exponential in the node count.
pub fn min_cut_value(net: &FlowNetwork) -> Result<f64> {
    const MAX_NODES: usize = 20;
    if net.n_nodes > MAX_NODES {
        return Err(Error::TooLarge(format!(
            "{} nodes, at most {MAX_NODES} supported",
            net.n_nodes
        )));
    }
    let free: Vec<usize> = (0..net.n_nodes)
        .filter(|&v| v != net.source && v != net.sink)
        .collect();
    let mut best = f64::INFINITY;
    let mut source_side = vec![false; net.n_nodes];
    for mask in 0u32..(1u32 << free.len()) {
        source_side.fill(false);
        source_side[net.source] = true;
        for (bit, &v) in free.iter().enumerate() {
            source_side[v] = mask & (1 << bit) != 0;
        }
        let cut: f64 = net
            .edges
            .iter()
            .filter(|e| source_side[e.from] && !source_side[e.to])
            .map(|e| e.capacity)
            .sum();
        best = best.min(cut);
    }
    Ok(best)
}

/// Flow network for one UE's uplink: a node per device plus a super-sink fed
/// by every gateway.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkNetwork {
    pub network: FlowNetwork,
    /// Edge index of the `gateway → super-sink` edge, per gateway.
    pub gateway_edges: Vec<usize>,
}

impl UplinkNetwork {
    pub fn gateway_inflows(&self, sol: &FlowSolution) -> Vec<f64> {
        self.gateway_edges.iter().map(|&k| sol.flows[k]).collect()
    }
}

/// Directed links usable by an uplink from `source_ue`: every positive rate
/// except those leaving a gateway or entering the source.
pub fn uplink_edges(rates: &RateMatrix, source_ue: usize) -> Vec<FlowEdge> {
    let n = rates.len();
    let mut edges = Vec::new();
    for i in rates.num_gateways()..n {
        for j in 0..n {
            let c = rates.rate(i, j);
            if c > 0.0 && j != source_ue {
                edges.push(FlowEdge {
                    from: i,
                    to: j,
                    capacity: c,
                });
            }
        }
    }
    edges
}

pub fn build_uplink_network(rates: &RateMatrix, source_ue: usize) -> Result<UplinkNetwork> {
    let n = rates.len();
    let s = rates.num_gateways();
    if source_ue >= n {
        return Err(Error::IndexOutOfRange { index: source_ue, len: n });
    }
    if source_ue < s {
        return Err(invalid(format!("source {source_ue} is a gateway, not a UE")));
    }
    let mut edges = uplink_edges(rates, source_ue);
    // finite stand-in for an infinite capacity: no cut can exceed it
    let unbounded = edges.iter().map(|e| e.capacity).sum::<f64>() + 1.0;
    let super_sink = n;
    let gateway_edges = (0..s)
        .map(|g| {
            edges.push(FlowEdge {
                from: g,
                to: super_sink,
                capacity: unbounded,
            });
            edges.len() - 1
        })
        .collect();
    Ok(UplinkNetwork {
        network: FlowNetwork::new(n + 1, edges, source_ue, super_sink)?,
        gateway_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edge(from: usize, to: usize, capacity: f64) -> FlowEdge {
        FlowEdge { from, to, capacity }
    }

    /// s=0, a=1, b=2, t=3
    fn diamond() -> FlowNetwork {
        FlowNetwork::new(
            4,
            vec![edge(0, 1, 3.0), edge(0, 2, 2.0), edge(1, 3, 2.0), edge(2, 3, 3.0), edge(1, 2, 1.0)],
            0,
            3,
        )
        .unwrap()
    }

    fn assert_feasible(net: &FlowNetwork, sol: &FlowSolution) {
        for (e, f) in net.edges().iter().zip(&sol.flows) {
            assert!(*f >= 0.0 && *f <= e.capacity + 1e-9);
        }
        for v in 0..net.num_nodes() {
            if v != net.source() && v != net.sink() {
                assert!(sol.net_inflow(net, v).abs() <= 1e-9);
            }
        }
        assert!((sol.net_inflow(net, net.sink()) - sol.total).abs() <= 1e-9);
    }

    #[test]
    fn single_edge() {
        let net = FlowNetwork::new(2, vec![edge(0, 1, 5.0)], 0, 1).unwrap();
        assert_eq!(max_flow(&net).total, 5.0);
        assert_eq!(min_cut_value(&net).unwrap(), 5.0);
    }

    #[test]
    fn diamond_network() {
        let net = diamond();
        let sol = max_flow(&net);
        assert!((sol.total - 5.0).abs() < 1e-12);
        assert_feasible(&net, &sol);
        assert_eq!(min_cut_value(&net).unwrap(), 5.0);
    }

    #[test]
    fn disconnected() {
        let net = FlowNetwork::new(4, vec![edge(0, 1, 4.0), edge(2, 3, 4.0)], 0, 3).unwrap();
        assert_eq!(max_flow(&net).total, 0.0);
        assert_eq!(min_cut_value(&net).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_networks() {
        assert!(FlowNetwork::new(2, vec![edge(0, 1, -1.0)], 0, 1).is_err());
        assert!(FlowNetwork::new(2, vec![edge(0, 1, f64::INFINITY)], 0, 1).is_err());
        assert!(FlowNetwork::new(2, vec![edge(0, 2, 1.0)], 0, 1).is_err());
        assert!(FlowNetwork::new(2, vec![], 1, 1).is_err());
        let big = FlowNetwork::new(21, vec![], 0, 1).unwrap();
        assert!(matches!(min_cut_value(&big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn deterministic_split() {
        let net = diamond();
        assert_eq!(max_flow(&net), max_flow(&net));
    }

    fn random_network(n: usize, raw: &[(usize, usize, f64)]) -> FlowNetwork {
        let edges = raw
            .iter()
            .map(|&(a, b, c)| edge(a % n, b % n, c))
            .filter(|e| e.from != e.to)
            .collect();
        FlowNetwork::new(n, edges, 0, n - 1).unwrap()
    }

    proptest! {
        #[test]
        fn max_flow_equals_min_cut(
            n in 2usize..9,
            raw in prop::collection::vec((0usize..9, 0usize..9, 0.0f64..10.0), 0..30),
        ) {
            let net = random_network(n, &raw);
            let sol = max_flow(&net);
            let cut = min_cut_value(&net).unwrap();
            prop_assert!((sol.total - cut).abs() <= 1e-6 * cut.max(1.0));
            assert_feasible(&net, &sol);
        }

        #[test]
        fn raising_a_capacity_never_lowers_the_flow(
            n in 2usize..8,
            raw in prop::collection::vec((0usize..8, 0usize..8, 0.0f64..10.0), 1..25),
            pick in 0usize..25,
            extra in 0.0f64..5.0,
        ) {
            let net = random_network(n, &raw);
            if net.edges().is_empty() {
                return Ok(());
            }
            let mut edges = net.edges().to_vec();
            let k = pick % edges.len();
            edges[k].capacity += extra;
            let raised = FlowNetwork::new(n, edges, 0, n - 1).unwrap();
            prop_assert!(max_flow(&raised).total >= max_flow(&net).total - 1e-9);
        }
    }
}
