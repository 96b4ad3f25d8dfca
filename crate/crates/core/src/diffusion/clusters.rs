use std::collections::HashMap;

use super::bipartite::BipartiteGraph;
use super::graph::{Edge, Graph};
use super::louvain::{louvain, Partition};
use crate::Result;

/// Second-level clustering of link communities through the videos they share.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityClustering {
    /// Link community of each link (the first-level partition).
    pub link_community: Vec<usize>,
    /// Cluster of each link community, 1-based.
    pub community_cluster: Vec<usize>,
    /// Cluster of each link, 1-based.
    pub link_cluster: Vec<usize>,
    pub n_clusters: usize,
    /// Links per cluster; entry `c - 1` belongs to cluster `c`.
    pub cluster_links: Vec<usize>,
    /// Partition of the community-video graph.
    pub partition: Partition,
    /// Videos in community-video node order, after the communities.
    pub videos: Vec<String>,
}

/// Cluster link communities by running Louvain on the community-video graph,
/// where an edge weight counts the community's links to that video.
///
/// Clusters are numbered from 1 by descending link count, ties by the lowest
/// community they contain. Clusters holding only video nodes are dropped.
pub fn cluster_communities(
    bipartite: &BipartiteGraph,
    links: &Partition,
    resolution: f64,
    seed: u64,
) -> Result<CommunityClustering> {
    let n_comm = links.n_communities;
    let mut videos: Vec<String> = bipartite.link_video.clone();
    videos.sort();
    videos.dedup();
    let video_ix: HashMap<&str, usize> = videos.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let graph = Graph::new(
        n_comm + videos.len(),
        bipartite.link_video.iter().enumerate().map(|(l, v)| Edge {
            a: links.membership[l],
            b: n_comm + video_ix[v.as_str()],
            w: 1.0,
        }),
    );
    let partition = louvain(&graph, resolution, seed)?;

    let mut links_per_raw: HashMap<usize, (usize, usize)> = HashMap::new();
    for &c in &links.membership {
        let raw = partition.membership[c];
        let e = links_per_raw.entry(raw).or_insert((0, c));
        e.0 += 1;
        e.1 = e.1.min(c);
    }
    let mut ranked: Vec<(usize, (usize, usize))> = links_per_raw.into_iter().collect();
    ranked.sort_by(|x, y| y.1 .0.cmp(&x.1 .0).then(x.1 .1.cmp(&y.1 .1)));
    let rank: HashMap<usize, usize> = ranked.iter().enumerate().map(|(i, (raw, _))| (*raw, i + 1)).collect();

    let community_cluster: Vec<usize> = (0..n_comm).map(|c| rank[&partition.membership[c]]).collect();
    let link_cluster: Vec<usize> = links.membership.iter().map(|&c| community_cluster[c]).collect();
    Ok(CommunityClustering {
        link_community: links.membership.clone(),
        community_cluster,
        link_cluster,
        n_clusters: ranked.len(),
        cluster_links: ranked.iter().map(|(_, (n, _))| *n).collect(),
        partition,
        videos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn communities_sharing_videos_merge() {
        // links 0..4 to video A, 4..6 to video B; each link its own community
        let bip = BipartiteGraph {
            users: vec![],
            links: (0..6).map(|l| format!("l{l}")).collect(),
            link_video: ["A", "A", "A", "A", "B", "B"].iter().map(|s| s.to_string()).collect(),
            edges: vec![],
        };
        let links = Partition {
            membership: vec![0, 1, 2, 3, 4, 5],
            n_communities: 6,
            modularity: 0.0,
            levels: vec![],
        };
        let c = cluster_communities(&bip, &links, 1.0, 3).unwrap();
        assert_eq!(c.n_clusters, 2);
        assert_eq!(c.link_cluster, vec![1, 1, 1, 1, 2, 2]);
        assert_eq!(c.cluster_links, vec![4, 2]);
    }
}
