//! Threshold graphs over channel gains and their connected components.

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Undirected graph with canonical `(i, j)`, `i < j`, edges in ascending
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl AdjacencyGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, len: n });
                }
            }
            if a != b {
                canon.push((a.min(b), a.max(b)));
            }
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(AdjacencyGraph { n, edges: canon })
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    /// Component label per node; labels are the smallest node index in the
    /// component.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n);
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        let mut smallest = vec![usize::MAX; self.n];
        for v in 0..self.n {
            let root = uf.find(v);
            smallest[root] = smallest[root].min(v);
        }
        (0..self.n).map(|v| smallest[uf.find(v)]).collect()
    }
}

/// Edge `(i, j)` present iff `gain_db(i, j) > gamma_db`.
pub fn adjacency(ch: &ChannelRealization, gamma_db: f64) -> AdjacencyGraph {
    let n = ch.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if ch.gain_db(i, j) > gamma_db {
                edges.push((i, j));
            }
        }
    }
    AdjacencyGraph { n, edges }
}

pub fn all_connected(g: &AdjacencyGraph) -> bool {
    if g.n <= 1 {
        return true;
    }
    let mut uf = UnionFind::new(g.n);
    let mut merges = 0;
    for &(a, b) in &g.edges {
        if uf.union(a, b) {
            merges += 1;
            if merges == g.n - 1 {
                return true;
            }
        }
    }
    false
}

/// Nodes in the connected component of `v`, ascending.
pub fn component_of(g: &AdjacencyGraph, v: usize) -> Result<Vec<usize>> {
    if v >= g.n {
        return Err(Error::IndexOutOfRange { index: v, len: g.n });
    }
    let labels = g.component_labels();
    Ok((0..g.n).filter(|&u| labels[u] == labels[v]).collect())
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize_channel, ChannelParams};
    use crate::scenario::{place_uniform_square, Point2D, Scenario};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_channel(n: usize, seed: u64) -> ChannelRealization {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = place_uniform_square(n, 1, 100.0, &mut rng).unwrap();
        realize_channel(&s, &ChannelParams::default(), &mut rng).unwrap()
    }

    #[test]
    fn infinite_thresholds() {
        let ch = random_channel(6, 1);
        assert_eq!(adjacency(&ch, f64::NEG_INFINITY).edges().len(), 15);
        assert!(adjacency(&ch, f64::INFINITY).edges().is_empty());
    }

    #[test]
    fn pair_at_100m_with_threshold_below_gain() {
        let s = Scenario::explicit(vec![Point2D::ORIGIN, Point2D::new(100.0, 0.0)], 1).unwrap();
        let p = ChannelParams {
            sigma_sh: 0.0,
            ..ChannelParams::default()
        };
        let ch = realize_channel(&s, &p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(adjacency(&ch, -10.5).has_edge(0, 1));
        assert!(!adjacency(&ch, -9.5).has_edge(0, 1));
    }

    #[test]
    fn connectedness_examples() {
        assert!(all_connected(&AdjacencyGraph::new(1, []).unwrap()));
        assert!(all_connected(&AdjacencyGraph::new(3, [(0, 1), (1, 2)]).unwrap()));
        assert!(!all_connected(&AdjacencyGraph::new(4, [(0, 1), (2, 3)]).unwrap()));
    }

    #[test]
    fn component_examples() {
        let g = AdjacencyGraph::new(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(component_of(&g, 0).unwrap(), vec![0, 1, 2]);
        assert_eq!(component_of(&g, 4).unwrap(), vec![3, 4]);
        let isolated = AdjacencyGraph::new(3, [(0, 1)]).unwrap();
        assert_eq!(component_of(&isolated, 2).unwrap(), vec![2]);
        let complete = AdjacencyGraph::new(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(component_of(&complete, 1).unwrap(), vec![0, 1, 2]);
        assert!(component_of(&g, 5).is_err());
    }

    #[test]
    fn edges_are_canonical() {
        let g = AdjacencyGraph::new(3, [(2, 0), (0, 2), (1, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2)]);
    }

    proptest! {
        #[test]
        fn thresholds_are_monotone(seed in 0u64..500, g1 in -40.0f64..20.0, dg in 0.0f64..30.0) {
            let ch = random_channel(8, seed);
            let lo = adjacency(&ch, g1);
            let hi = adjacency(&ch, g1 + dg);
            for e in hi.edges() {
                prop_assert!(lo.edges().contains(e));
            }
            if all_connected(&hi) {
                prop_assert!(all_connected(&lo));
            }
        }

        #[test]
        fn components_partition_nodes(seed in 0u64..500, gamma in -30.0f64..10.0) {
            let g = adjacency(&random_channel(9, seed), gamma);
            let mut seen = vec![0usize; 9];
            let labels = g.component_labels();
            for v in 0..9 {
                let comp = component_of(&g, v).unwrap();
                prop_assert!(comp.contains(&v));
                if labels[v] == v {
                    for u in comp {
                        seen[u] += 1;
                    }
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
