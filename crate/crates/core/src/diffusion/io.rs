use std::collections::HashMap;
use std::path::Path;

use super::graph::Graph;
use super::meta::MetaGraph;
use crate::error::finish_csv;
use crate::{Error, Result};

fn weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        format!("{w:.10}")
    }
}

/// `a,b,weight` with nodes written by label.
pub fn write_edges_csv(path: &Path, graph: &Graph, labels: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["a", "b", "weight"])?;
    for e in &graph.edges {
        w.write_record([labels[e.a].as_str(), labels[e.b].as_str(), weight(e.w).as_str()])?;
    }
    finish_csv(w, path)
}

/// `node,community`.
pub fn write_partition_csv(path: &Path, labels: &[String], membership: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["node", "community"])?;
    for (l, c) in labels.iter().zip(membership) {
        w.write_record([l.clone(), c.to_string()])?;
    }
    finish_csv(w, path)
}

pub fn write_metagraph_json(path: &Path, meta: &MetaGraph) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// `cluster,links,video_id,title`: each cluster's top videos with their
/// link counts. Missing titles are left empty.
pub fn write_top_videos_csv(path: &Path, meta: &MetaGraph, titles: &HashMap<String, String>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cluster", "links", "video_id", "title"])?;
    for node in &meta.nodes {
        for v in &node.top_videos {
            w.write_record([
                node.id.to_string(),
                v.link_count.to_string(),
                v.video_id.clone(),
                titles.get(&v.video_id).cloned().unwrap_or_default(),
            ])?;
        }
    }
    finish_csv(w, path)
}
