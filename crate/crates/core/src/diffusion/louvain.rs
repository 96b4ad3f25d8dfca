use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{Edge, Graph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSummary {
    pub n_communities: usize,
    /// Modularity of the original graph under the partition after this level.
    pub modularity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Community of each node, numbered densely by first appearance.
    pub membership: Vec<usize>,
    pub n_communities: usize,
    pub modularity: f64,
    pub levels: Vec<LevelSummary>,
}

impl Partition {
    /// Number of nodes in each community.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_communities];
        for &c in &self.membership {
            s[c] += 1;
        }
        s
    }
}

/// Newman modularity with resolution `gamma`. Self-loops add their weight
/// once to the internal weight and twice to the degree.
pub fn modularity(graph: &Graph, membership: &[usize], gamma: f64) -> f64 {
    let m = graph.total_weight();
    if m <= 0.0 {
        return 0.0;
    }
    let n_comm = membership.iter().max().map_or(0, |&c| c + 1);
    let mut internal = vec![0.0; n_comm];
    let mut degree = vec![0.0; n_comm];
    for e in &graph.edges {
        let (ca, cb) = (membership[e.a], membership[e.b]);
        if ca == cb {
            internal[ca] += e.w;
        }
        degree[ca] += e.w;
        degree[cb] += e.w;
    }
    internal
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - gamma * (d / (2.0 * m)).powi(2))
        .sum()
}

struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

impl Csr {
    fn new(g: &Graph) -> Self {
        let n = g.n_nodes;
        let mut count = vec![0usize; n + 1];
        for e in g.edges.iter().filter(|e| e.a != e.b) {
            count[e.a + 1] += 1;
            count[e.b + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let offsets = count.clone();
        let mut fill = count;
        let mut targets = vec![0; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for e in g.edges.iter().filter(|e| e.a != e.b) {
            for (from, to) in [(e.a, e.b), (e.b, e.a)] {
                targets[fill[from]] = to;
                weights[fill[from]] = e.w;
                fill[from] += 1;
            }
        }
        Csr {
            offsets,
            targets,
            weights,
            degree: g.degrees(),
        }
    }
}

/// Local moving phase. Returns the community of each node and whether any
/// node moved.
fn one_level(g: &Graph, order: &[usize], gamma: f64) -> (Vec<usize>, bool) {
    let n = g.n_nodes;
    let csr = Csr::new(g);
    let two_m = 2.0 * g.total_weight();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = csr.degree.clone();
    let mut link_w = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_moved = false;
    if two_m <= 0.0 {
        return (comm, false);
    }

    for _pass in 0..10_000 {
        let mut moved = false;
        for &i in order {
            let ki = csr.degree[i];
            let own = comm[i];
            for p in csr.offsets[i]..csr.offsets[i + 1] {
                let c = comm[csr.targets[p]];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                link_w[c] += csr.weights[p];
            }
            tot[own] -= ki;
            let gain = |c: usize, link_w: &[f64]| link_w[c] - gamma * tot[c] * ki / two_m;
            let stay = gain(own, &link_w);
            let mut best = own;
            let mut best_gain = f64::NEG_INFINITY;
            for &c in &touched {
                if c == own {
                    continue;
                }
                let g = gain(c, &link_w);
                if g > best_gain || (g == best_gain && c < best) {
                    best = c;
                    best_gain = g;
                }
            }
            let target = if best != own && best_gain > stay + 1e-12 * (1.0 + ki) {
                best
            } else {
                own
            };
            tot[target] += ki;
            if target != own {
                comm[i] = target;
                moved = true;
            }
            for c in touched.drain(..) {
                seen[c] = false;
                link_w[c] = 0.0;
            }
        }
        if !moved {
            break;
        }
        any_moved = true;
    }
    (comm, any_moved)
}

fn relabel_dense(labels: &mut [usize]) -> usize {
    let mut map = std::collections::HashMap::new();
    for l in labels.iter_mut() {
        let next = map.len();
        *l = *map.entry(*l).or_insert(next);
    }
    map.len()
}

fn aggregate(g: &Graph, comm: &[usize], n_comm: usize) -> Graph {
    Graph::new(
        n_comm,
        g.edges.iter().map(|e| Edge {
            a: comm[e.a],
            b: comm[e.b],
            w: e.w,
        }),
    )
}

/// Multi-level Louvain community detection.
///
/// Node order is a seeded shuffle at each level. A node moves only for a
/// strictly positive modularity gain; among equal gains the lowest community
/// id wins. Levels aggregate until a local moving phase changes nothing.
pub fn louvain(graph: &Graph, resolution: f64, seed: u64) -> Result<Partition> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::invalid(format!("resolution must be positive, got {resolution}")));
    }
    if graph.edges.iter().any(|e| !(e.w.is_finite() && e.w > 0.0)) {
        return Err(Error::invalid("edge weights must be positive and finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..graph.n_nodes).collect();
    let mut current = graph.clone();
    let mut levels = Vec::new();
    loop {
        let mut order: Vec<usize> = (0..current.n_nodes).collect();
        order.shuffle(&mut rng);
        let (mut comm, moved) = one_level(&current, &order, resolution);
        if !moved {
            break;
        }
        let n_comm = relabel_dense(&mut comm);
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        levels.push(LevelSummary {
            n_communities: n_comm,
            modularity: modularity(graph, &membership, resolution),
        });
        current = aggregate(&current, &comm, n_comm);
    }
    let n_communities = relabel_dense(&mut membership);
    let modularity = modularity(graph, &membership, resolution);
    if levels.is_empty() {
        levels.push(LevelSummary {
            n_communities,
            modularity,
        });
    }
    Ok(Partition {
        membership,
        n_communities,
        modularity,
        levels,
    })
}
