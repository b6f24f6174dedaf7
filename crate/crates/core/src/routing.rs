//! Link rate matrices and per-UE uplink routing.
//!
//! UMF (unconstrained max-flow) routes each UE by augmenting paths to a
//! super-sink. PPMF (privacy-preserving max-flow) solves the same problem as
//! a linear program with the extra requirement that every gateway receives
//! the same rate from the UE.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{gain_linear, ChannelParams, ChannelRealization};
use crate::error::{invalid, Error, Result};
use crate::flow::{self, FlowEdge, FlowNetwork};
use crate::simplex::{self, LpProblem, LpSolution, LpStatus, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopMode {
    SingleHop,
    MultiHop,
}

impl HopMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HopMode::SingleHop => "single_hop",
            HopMode::MultiHop => "multi_hop",
        }
    }
}

impl fmt::Display for HopMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Umf,
    Ppmf,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Umf => "umf",
            Algorithm::Ppmf => "ppmf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maximum achievable rate per directed link, in bit/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    n: usize,
    num_gateways: usize,
    mode: HopMode,
    rho: Vec<f64>,
}

impl RateMatrix {
    /// Wraps explicit rates (row-major `n×n`). Entries that the mode forbids
    /// are rejected rather than silently zeroed.
    pub fn from_rates(n: usize, num_gateways: usize, mode: HopMode, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != n * n {
            return Err(invalid("rate matrix has the wrong size"));
        }
        if num_gateways == 0 || num_gateways > n {
            return Err(invalid(format!("num_gateways must be in 1..={n}")));
        }
        for i in 0..n {
            for j in 0..n {
                let r = rho[i * n + j];
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(invalid(format!("rate ({i}, {j}) = {r} is not a finite non-negative value")));
                }
                if i == j && r != 0.0 {
                    return Err(invalid("rate matrix diagonal must be zero"));
                }
                if mode == HopMode::SingleHop && r > 0.0 && (i < num_gateways || j >= num_gateways) {
                    return Err(invalid(format!(
                        "single-hop rates only allowed from UEs to gateways, got ({i}, {j})"
                    )));
                }
            }
        }
        Ok(RateMatrix {
            n,
            num_gateways,
            mode,
            rho,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_gateways(&self) -> usize {
        self.num_gateways
    }

    pub fn mode(&self) -> HopMode {
        self.mode
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.n + j]
    }

    pub fn ue_indices(&self) -> std::ops::Range<usize> {
        self.num_gateways..self.n
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RateMatrix {
            rho: self.rho.iter().map(|r| r * factor).collect(),
            ..self.clone()
        }
    }
}

/// `log2(1 + Γ)` on links whose gain exceeds the rate threshold.
pub fn rate_matrix(ch: &ChannelRealization, params: &ChannelParams, num_gateways: usize, mode: HopMode) -> Result<RateMatrix> {
    let n = ch.len();
    if num_gateways == 0 || num_gateways > n {
        return Err(invalid(format!("num_gateways must be in 1..={n}")));
    }
    let delta = params.effective_delta_db();
    let mut rho = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if mode == HopMode::SingleHop && (j >= num_gateways || i < num_gateways) {
                continue;
            }
            let g = ch.gain_db(i, j);
            if g > delta {
                rho[i * n + j] = (1.0 + gain_linear(g)).log2();
            }
        }
    }
    Ok(RateMatrix {
        n,
        num_gateways,
        mode,
        rho,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingResult {
    pub ue: usize,
    pub algorithm: Algorithm,
    /// Total rate `C(v)` from the UE to all gateways.
    pub rate: f64,
    /// Rate delivered through each gateway.
    pub inflows: Vec<f64>,
}

impl RoutingResult {
    pub fn csv_header(num_gateways: usize) -> String {
        let mut h = String::from("trial,ue,algorithm,mode,c_v");
        for g in 1..=num_gateways {
            h.push_str(&format!(",inflow_{g}"));
        }
        h
    }

    pub fn csv_row(&self, trial: usize, mode: HopMode) -> String {
        let mut row = format!("{trial},{},{},{},{}", self.ue, self.algorithm, mode, self.rate);
        for f in &self.inflows {
            row.push_str(&format!(",{f}"));
        }
        row
    }
}

fn check_ue(rates: &RateMatrix, v: usize) -> Result<()> {
    if v >= rates.n {
        return Err(Error::IndexOutOfRange { index: v, len: rates.n });
    }
    if v < rates.num_gateways {
        return Err(invalid(format!("device {v} is a gateway, not a UE")));
    }
    Ok(())
}

pub fn umf(rates: &RateMatrix, v: usize) -> Result<RoutingResult> {
    check_ue(rates, v)?;
    let up = flow::build_uplink_network(rates, v)?;
    let sol = flow::max_flow(&up.network);
    let inflows = up.gateway_inflows(&sol);
    Ok(RoutingResult {
        ue: v,
        algorithm: Algorithm::Umf,
        rate: inflows.iter().sum(),
        inflows,
    })
}

/// The uplink LP for UE `v` and the edge behind each LP variable.
///
/// Links that cannot carry flow from `v` to a gateway are dropped; that
/// leaves the optimum unchanged. With `equal_gateways` false the LP is the
/// plain max-flow relaxation.
pub fn uplink_lp(rates: &RateMatrix, v: usize, equal_gateways: bool) -> Result<(LpProblem, Vec<FlowEdge>)> {
    check_ue(rates, v)?;
    let n = rates.n;
    let s = rates.num_gateways;
    let all = flow::uplink_edges(rates, v);

    let mut out_adj = vec![Vec::new(); n];
    let mut in_adj = vec![Vec::new(); n];
    for e in &all {
        out_adj[e.from].push(e.to);
        in_adj[e.to].push(e.from);
    }
    let forward = reach(&out_adj, std::iter::once(v), n);
    let backward = reach(&in_adj, 0..s, n);
    let edges: Vec<FlowEdge> = all
        .into_iter()
        .filter(|e| forward[e.from] && backward[e.to])
        .collect();

    let objective = edges.iter().map(|e| if e.to < s { 1.0 } else { 0.0 }).collect();
    let mut lp = LpProblem::maximize(objective);
    for (k, e) in edges.iter().enumerate() {
        lp.set_upper_bound(k, e.capacity);
    }
    let mut terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        terms[e.from].push((k, 1.0));
        terms[e.to].push((k, -1.0));
    }
    // relays may not emit more than they receive
    for node in s..n {
        if node != v && !terms[node].is_empty() {
            lp.add_sparse_constraint(&terms[node], Relation::Le, 0.0);
        }
    }
    if equal_gateways {
        for g in 1..s {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (k, e) in edges.iter().enumerate() {
                if e.to == g - 1 {
                    row.push((k, 1.0));
                } else if e.to == g {
                    row.push((k, -1.0));
                }
            }
            lp.add_sparse_constraint(&row, Relation::Eq, 0.0);
        }
    }
    Ok((lp, edges))
}

fn reach(adj: &[Vec<usize>], start: impl Iterator<Item = usize>, n: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = start.collect();
    for &v in &stack {
        seen[v] = true;
    }
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

fn routed_by_lp(rates: &RateMatrix, v: usize, equal_gateways: bool, algorithm: Algorithm) -> Result<RoutingResult> {
    let (lp, edges) = uplink_lp(rates, v, equal_gateways)?;
    let sol = simplex::solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "uplink LP for UE {v} returned {:?}; the zero flow is always feasible",
            sol.status
        )));
    }
    let mut inflows = vec![0.0; rates.num_gateways];
    for (e, f) in edges.iter().zip(&sol.x) {
        if e.to < rates.num_gateways {
            inflows[e.to] += f;
        }
    }
    Ok(RoutingResult {
        ue: v,
        algorithm,
        rate: inflows.iter().sum(),
        inflows,
    })
}

pub fn ppmf(rates: &RateMatrix, v: usize) -> Result<RoutingResult> {
    routed_by_lp(rates, v, true, Algorithm::Ppmf)
}

/// UMF computed through the LP instead of augmenting paths.
pub fn umf_via_lp(rates: &RateMatrix, v: usize) -> Result<RoutingResult> {
    routed_by_lp(rates, v, false, Algorithm::Umf)
}

pub fn route(rates: &RateMatrix, v: usize, algorithm: Algorithm) -> Result<RoutingResult> {
    match algorithm {
        Algorithm::Umf => umf(rates, v),
        Algorithm::Ppmf => ppmf(rates, v),
    }
}

/// One independent routing problem per UE.
pub fn route_all(rates: &RateMatrix, algorithm: Algorithm) -> Result<Vec<RoutingResult>> {
    rates.ue_indices().map(|v| route(rates, v, algorithm)).collect()
}

/// `Σ_v C(v)` for one realization.
pub fn total_rate(rates: &RateMatrix, algorithm: Algorithm) -> Result<f64> {
    Ok(route_all(rates, algorithm)?.iter().map(|r| r.rate).sum())
}

/// LP formulation of a single-source single-sink max-flow: one variable per
/// edge bounded by its capacity, conservation at every other node.
pub fn max_flow_lp(net: &FlowNetwork) -> Result<LpSolution> {
    let edges = net.edges();
    let objective = edges
        .iter()
        .map(|e| {
            let mut c = 0.0;
            if e.to == net.sink() {
                c += 1.0;
            }
            if e.from == net.sink() {
                c -= 1.0;
            }
            c
        })
        .collect();
    let mut lp = LpProblem::maximize(objective);
    for (k, e) in edges.iter().enumerate() {
        lp.set_upper_bound(k, e.capacity);
    }
    let mut terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); net.num_nodes()];
    for (k, e) in edges.iter().enumerate() {
        if e.from != e.to {
            terms[e.from].push((k, 1.0));
            terms[e.to].push((k, -1.0));
        }
    }
    for (node, row) in terms.iter().enumerate() {
        if node != net.source() && node != net.sink() && !row.is_empty() {
            lp.add_sparse_constraint(row, Relation::Eq, 0.0);
        }
    }
    simplex::solve(&lp)
}

/// Multi-source flow LP: each source `n` may inject at most `c_n`, every
/// other node conserves flow, and all sinks drain into a super-sink whose
/// intake is maximized. Variables are the input edges followed by one
/// `sink → super-sink` variable per sink.
pub fn multi_source_flow_lp(
    n_nodes: usize,
    edges: &[FlowEdge],
    source_caps: &[(usize, f64)],
    sinks: &[usize],
) -> Result<LpSolution> {
    for e in edges {
        for v in [e.from, e.to] {
            if v >= n_nodes {
                return Err(Error::IndexOutOfRange { index: v, len: n_nodes });
            }
        }
        if !(e.capacity >= 0.0) {
            return Err(invalid(format!("edge {}->{} has negative capacity", e.from, e.to)));
        }
    }
    for &(src, c) in source_caps {
        if src >= n_nodes {
            return Err(Error::IndexOutOfRange { index: src, len: n_nodes });
        }
        if !(c >= 0.0) {
            return Err(invalid(format!("source {src} has negative capacity {c}")));
        }
        if sinks.contains(&src) {
            return Err(invalid(format!("node {src} is both a source and a sink")));
        }
    }
    if let Some(&t) = sinks.iter().find(|&&t| t >= n_nodes) {
        return Err(Error::IndexOutOfRange { index: t, len: n_nodes });
    }

    let m = edges.len();
    let nvars = m + sinks.len();
    let mut objective = vec![0.0; nvars];
    for c in &mut objective[m..] {
        *c = 1.0;
    }
    let mut lp = LpProblem::maximize(objective);
    for (k, e) in edges.iter().enumerate() {
        lp.set_upper_bound(k, e.capacity);
    }
    let mut terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_nodes];
    for (k, e) in edges.iter().enumerate() {
        if e.from != e.to {
            terms[e.from].push((k, 1.0));
            terms[e.to].push((k, -1.0));
        }
    }
    for (i, &t) in sinks.iter().enumerate() {
        terms[t].push((m + i, 1.0));
    }
    for (node, row) in terms.iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        match source_caps.iter().find(|(s, _)| *s == node) {
            Some(&(_, cap)) => {
                lp.add_sparse_constraint(row, Relation::Le, cap);
                lp.add_sparse_constraint(row, Relation::Ge, 0.0);
            }
            None => {
                lp.add_sparse_constraint(row, Relation::Eq, 0.0);
            }
        }
    }
    simplex::solve(&lp)
}
