use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::Serialize;

use super::clustering::{DateClustering, Epoch};
use super::incidence::IncidenceMatrix;
use crate::error::finish_csv as finish;
use crate::stats::five_number;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeatmapCell {
    pub video_id: String,
    pub date: NaiveDate,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heatmap {
    /// Selected videos, in display order.
    pub videos: Vec<String>,
    /// Non-zero cells of the selected videos, row by row.
    pub cells: Vec<HeatmapCell>,
    /// Video-sharing tweets per date.
    pub daily_series: Vec<(NaiveDate, u64)>,
}

fn peak_date(incidence: &IncidenceMatrix, v: usize) -> usize {
    let mut best = 0;
    for d in 1..incidence.n_dates() {
        if incidence.count(d, v) > incidence.count(best, v) {
            best = d;
        }
    }
    best
}

/// Heat-map data for the `top_n` most shared videos.
///
/// Videos are ranked by total shares (earlier first share wins ties) and
/// displayed in order of their busiest day, the earliest such day when
/// counts tie.
pub fn heatmap_export(incidence: &IncidenceMatrix, top_n: usize) -> Heatmap {
    let totals = incidence.video_totals();
    // video columns are already in first-share order
    let mut ranked: Vec<usize> = (0..incidence.n_videos()).collect();
    ranked.sort_by(|&a, &b| totals[b].cmp(&totals[a]).then(a.cmp(&b)));
    ranked.truncate(top_n);
    ranked.sort_by_key(|&v| (peak_date(incidence, v), v));

    let mut cells = Vec::new();
    for &v in &ranked {
        for d in 0..incidence.n_dates() {
            let count = incidence.count(d, v);
            if count > 0 {
                cells.push(HeatmapCell {
                    video_id: incidence.videos[v].clone(),
                    date: incidence.dates[d],
                    count,
                });
            }
        }
    }
    Heatmap {
        videos: ranked.iter().map(|&v| incidence.videos[v].clone()).collect(),
        cells,
        daily_series: incidence
            .dates
            .iter()
            .copied()
            .zip(incidence.tweets_per_date.iter().copied())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotRow {
    pub cluster: usize,
    /// 1-based component number.
    pub pc: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Five-number summaries of each cluster's dates on PC1 and PC2.
pub fn epoch_boxplot_export(clustering: &DateClustering, scores: &DMatrix<f64>) -> Vec<BoxplotRow> {
    assert_eq!(scores.nrows(), clustering.labels.len(), "scores and dates differ");
    let mut rows = Vec::new();
    for cluster in clustering.cluster_ids() {
        for pc in 0..scores.ncols().min(2) {
            let values: Vec<f64> = clustering
                .labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == cluster)
                .map(|(i, _)| scores[(i, pc)])
                .collect();
            if let Some(f) = five_number(&values) {
                rows.push(BoxplotRow {
                    cluster,
                    pc: pc + 1,
                    min: f.min,
                    q1: f.q1,
                    median: f.median,
                    q3: f.q3,
                    max: f.max,
                });
            }
        }
    }
    rows
}

pub fn write_heatmap_csv(path: &Path, heatmap: &Heatmap) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["video_id", "date", "count"])?;
    for c in &heatmap.cells {
        w.write_record([c.video_id.clone(), c.date.to_string(), c.count.to_string()])?;
    }
    finish(w, path)
}

pub fn write_daily_series_csv(path: &Path, heatmap: &Heatmap) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "tweets"])?;
    for (d, n) in &heatmap.daily_series {
        w.write_record([d.to_string(), n.to_string()])?;
    }
    finish(w, path)
}

pub fn write_epochs_csv(path: &Path, epochs: &[Epoch]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cluster", "start", "end", "n_tweets", "n_videos"])?;
    for e in epochs {
        w.write_record([
            e.cluster.to_string(),
            e.start.to_string(),
            e.end.to_string(),
            e.n_tweets.to_string(),
            e.n_videos.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_boxplot_csv(path: &Path, rows: &[BoxplotRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cluster", "pc", "min", "q1", "median", "q3", "max"])?;
    for r in rows {
        w.write_record([
            r.cluster.to_string(),
            r.pc.to_string(),
            format!("{:.6}", r.min),
            format!("{:.6}", r.q1),
            format!("{:.6}", r.median),
            format!("{:.6}", r.q3),
            format!("{:.6}", r.max),
        ])?;
    }
    finish(w, path)
}

/// Cluster label of every date: `date,cluster`.
pub fn write_date_clusters_csv(path: &Path, dates: &[NaiveDate], labels: &[usize]) -> Result<()> {
    if dates.len() != labels.len() {
        return Err(Error::invalid("dates and cluster labels differ in length"));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "cluster"])?;
    for (d, c) in dates.iter().zip(labels) {
        w.write_record([d.to_string(), c.to_string()])?;
    }
    finish(w, path)
}

pub fn read_date_clusters_csv(path: &Path) -> Result<BTreeMap<NaiveDate, usize>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = || Error::invalid(format!("{} row {}: expected date,cluster", path.display(), i + 1));
        let date: NaiveDate = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let cluster: usize = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if out.insert(date, cluster).is_some() {
            return Err(Error::invalid(format!("{}: date {date} listed twice", path.display())));
        }
    }
    Ok(out)
}
