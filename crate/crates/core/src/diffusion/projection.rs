use rayon::prelude::*;

use super::bipartite::BipartiteGraph;
use super::graph::{Edge, Graph};

/// Link-link projection: links are adjacent when at least one user shared
/// both, weighted by the number of such users.
///
/// Each link accumulates co-occurrence counts with higher-indexed links in a
/// scratch buffer, so memory stays proportional to the output.
pub fn project_links(bipartite: &BipartiteGraph) -> Graph {
    let n = bipartite.links.len();
    let user_links = bipartite.user_links();
    let mut link_users = vec![Vec::new(); n];
    for &(u, l) in &bipartite.edges {
        link_users[l].push(u);
    }

    let edges: Vec<Edge> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0u32; n], Vec::new()),
            |(counts, touched), a| {
                for &u in &link_users[a] {
                    for &b in &user_links[u] {
                        if b > a {
                            if counts[b] == 0 {
                                touched.push(b);
                            }
                            counts[b] += 1;
                        }
                    }
                }
                touched.sort_unstable();
                let out: Vec<Edge> = touched
                    .drain(..)
                    .map(|b| {
                        let w = std::mem::take(&mut counts[b]);
                        Edge { a, b, w: f64::from(w) }
                    })
                    .collect();
                out
            },
        )
        .flatten_iter()
        .collect();
    Graph { n_nodes: n, edges }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bip(edges: &[(usize, usize)], users: usize, links: usize) -> BipartiteGraph {
        BipartiteGraph {
            users: (0..users).map(|u| format!("u{u}")).collect(),
            links: (0..links).map(|l| format!("l{l}")).collect(),
            link_video: vec!["AAAAAAAAAAA".into(); links],
            edges: edges.to_vec(),
        }
    }

    #[test]
    fn counts_shared_users() {
        let g = project_links(&bip(&[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)], 2, 3));
        assert_eq!(
            g.edges,
            vec![
                Edge { a: 0, b: 1, w: 2.0 },
                Edge { a: 0, b: 2, w: 1.0 },
                Edge { a: 1, b: 2, w: 1.0 },
            ]
        );
    }

    #[test]
    fn isolated_links_have_no_edges() {
        let g = project_links(&bip(&[(0, 0), (1, 1)], 2, 2));
        assert_eq!(g.n_nodes, 2);
        assert!(g.edges.is_empty());
    }
}
