use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

/// Undirected weighted graph on nodes `0..n_nodes`. Each edge appears once
/// with `a <= b`; `a == b` is a self-loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    pub n_nodes: usize,
    pub edges: Vec<Edge>,
}

impl Graph {
    /// Normalize endpoints, merge parallel edges by summing weights and drop
    /// zero weights. Edges end up sorted by `(a, b)`.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| {
                assert!(e.a < n_nodes && e.b < n_nodes, "edge endpoint out of range");
                Edge {
                    a: e.a.min(e.b),
                    b: e.a.max(e.b),
                    w: e.w,
                }
            })
            .collect();
        edges.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
        let mut merged: Vec<Edge> = Vec::with_capacity(edges.len());
        for e in edges {
            match merged.last_mut() {
                Some(last) if last.a == e.a && last.b == e.b => last.w += e.w,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.w != 0.0);
        Graph { n_nodes, edges: merged }
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Weighted degree; a self-loop contributes twice its weight.
    pub fn degrees(&self) -> Vec<f64> {
        let mut k = vec![0.0; self.n_nodes];
        for e in &self.edges {
            k[e.a] += e.w;
            k[e.b] += e.w;
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_parallel_and_reversed_edges() {
        let g = Graph::new(
            3,
            [
                Edge { a: 1, b: 0, w: 1.0 },
                Edge { a: 0, b: 1, w: 2.0 },
                Edge { a: 2, b: 2, w: 1.5 },
            ],
        );
        assert_eq!(g.edges, vec![Edge { a: 0, b: 1, w: 3.0 }, Edge { a: 2, b: 2, w: 1.5 }]);
        assert_eq!(g.degrees(), vec![3.0, 3.0, 3.0]);
        assert_eq!(g.total_weight(), 4.5);
    }
}
