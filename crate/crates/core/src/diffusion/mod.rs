//! Sharing-path networks: the user-link bipartite graph, its link-link
//! projection, two-level Louvain clustering and the cluster meta-graph.

mod bipartite;
mod clusters;
mod graph;
mod io;
mod louvain;
mod meta;
mod projection;

pub use bipartite::{build_bipartite, BipartiteGraph};
pub use clusters::{cluster_communities, CommunityClustering};
pub use graph::{Edge, Graph};
pub use io::{write_edges_csv, write_metagraph_json, write_partition_csv, write_top_videos_csv};
pub use louvain::{louvain, modularity, LevelSummary, Partition};
pub use meta::{meta_graph, MetaEdge, MetaGraph, MetaNode, Pc2Weighting, TopVideo};
pub use projection::project_links;
