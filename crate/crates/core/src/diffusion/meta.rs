use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::bipartite::BipartiteGraph;
use super::clusters::CommunityClustering;
use super::graph::Graph;

/// How a cluster's PC2 average treats its videos.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pc2Weighting {
    /// Each distinct coded video counts once.
    #[default]
    Unweighted,
    /// Each coded video counts once per link in the cluster.
    LinkWeighted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopVideo {
    pub video_id: String,
    pub link_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaNode {
    pub id: usize,
    pub n_links: usize,
    /// Absent when no video in the cluster has a score.
    pub avg_pc2: Option<f64>,
    pub top_videos: Vec<TopVideo>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaEdge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaGraph {
    pub nodes: Vec<MetaNode>,
    /// Sorted by `(a, b)` with `a <= b`; `a == b` carries within-cluster weight.
    pub edges: Vec<MetaEdge>,
}

/// Collapse the link projection onto clusters.
///
/// Edge weights sum the projection weights between (or within) clusters.
/// `pc2` maps video ids to a PC2 score; videos without one are skipped when
/// averaging.
pub fn meta_graph(
    bipartite: &BipartiteGraph,
    projection: &Graph,
    clustering: &CommunityClustering,
    pc2: &HashMap<String, f64>,
    weighting: Pc2Weighting,
    top_n: usize,
) -> MetaGraph {
    let k = clustering.n_clusters;
    let mut per_cluster: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); k];
    for (l, video) in bipartite.link_video.iter().enumerate() {
        *per_cluster[clustering.link_cluster[l] - 1].entry(video.as_str()).or_default() += 1;
    }

    let nodes = per_cluster
        .iter()
        .enumerate()
        .map(|(i, videos)| {
            let (mut sum, mut weight) = (0.0, 0.0);
            for (v, &count) in videos {
                if let Some(&s) = pc2.get(*v) {
                    let w = match weighting {
                        Pc2Weighting::Unweighted => 1.0,
                        Pc2Weighting::LinkWeighted => count as f64,
                    };
                    sum += w * s;
                    weight += w;
                }
            }
            let mut top: Vec<TopVideo> = videos
                .iter()
                .map(|(v, &c)| TopVideo {
                    video_id: v.to_string(),
                    link_count: c,
                })
                .collect();
            top.sort_by(|x, y| y.link_count.cmp(&x.link_count).then_with(|| x.video_id.cmp(&y.video_id)));
            top.truncate(top_n);
            MetaNode {
                id: i + 1,
                n_links: clustering.cluster_links[i],
                avg_pc2: (weight > 0.0).then(|| sum / weight),
                top_videos: top,
            }
        })
        .collect();

    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in &projection.edges {
        let (ca, cb) = (clustering.link_cluster[e.a], clustering.link_cluster[e.b]);
        *weights.entry((ca.min(cb), ca.max(cb))).or_default() += e.w;
    }
    MetaGraph {
        nodes,
        edges: weights.into_iter().map(|((a, b), w)| MetaEdge { a, b, w }).collect(),
    }
}
