use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::ingest::TweetRecord;

/// Share counts of each video on each day.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    /// Chronological.
    pub dates: Vec<NaiveDate>,
    /// Order of first share.
    pub videos: Vec<String>,
    /// dates × videos share counts, row-major.
    counts: Vec<u32>,
    /// Tweets sharing at least one video, per date.
    pub tweets_per_date: Vec<u64>,
    /// When set, [`IncidenceMatrix::cell`] reports presence (0/1) rather than counts.
    pub binarized: bool,
}

impl IncidenceMatrix {
    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_videos(&self) -> usize {
        self.videos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty() || self.videos.is_empty()
    }

    /// Raw number of tweets sharing video `v` on date `d`.
    pub fn count(&self, d: usize, v: usize) -> u32 {
        self.counts[d * self.videos.len() + v]
    }

    /// Analysis value: the count, or its presence indicator when binarized.
    pub fn cell(&self, d: usize, v: usize) -> u32 {
        let c = self.count(d, v);
        if self.binarized {
            c.min(1)
        } else {
            c
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_dates(), self.n_videos(), |d, v| self.cell(d, v) as f64)
    }

    /// Total raw shares of each video.
    pub fn video_totals(&self) -> Vec<u64> {
        (0..self.n_videos())
            .map(|v| (0..self.n_dates()).map(|d| self.count(d, v) as u64).sum())
            .collect()
    }

    /// Same matrix with video columns reordered by `perm` (new column `j`
    /// is old column `perm[j]`).
    pub fn permute_videos(&self, perm: &[usize]) -> IncidenceMatrix {
        let nv = self.n_videos();
        let mut counts = vec![0; self.counts.len()];
        for d in 0..self.n_dates() {
            for (j, &src) in perm.iter().enumerate() {
                counts[d * nv + j] = self.counts[d * nv + src];
            }
        }
        IncidenceMatrix {
            videos: perm.iter().map(|&i| self.videos[i].clone()).collect(),
            counts,
            ..self.clone()
        }
    }
}

/// Count, for every day and video, the tweets sharing that video that day.
///
/// Only days with at least one video share appear. Videos are ordered by
/// first share, with tweets taken in `(timestamp, tweet_id)` order.
pub fn build_incidence(tweets: &[TweetRecord], binarize: bool) -> IncidenceMatrix {
    let mut ordered: Vec<&TweetRecord> = tweets.iter().filter(|t| !t.video_ids.is_empty()).collect();
    ordered.sort_by(|a, b| (a.timestamp, &a.tweet_id).cmp(&(b.timestamp, &b.tweet_id)));

    let mut video_index: HashMap<&str, usize> = HashMap::new();
    let mut videos = Vec::new();
    let mut per_date: BTreeMap<NaiveDate, (HashMap<usize, u32>, u64)> = BTreeMap::new();
    for t in &ordered {
        let entry = per_date.entry(t.date()).or_default();
        entry.1 += 1;
        for id in &t.video_ids {
            let v = *video_index.entry(id.as_str()).or_insert_with(|| {
                videos.push(id.clone());
                videos.len() - 1
            });
            *entry.0.entry(v).or_default() += 1;
        }
    }

    let nv = videos.len();
    let mut counts = vec![0u32; per_date.len() * nv];
    let mut dates = Vec::with_capacity(per_date.len());
    let mut tweets_per_date = Vec::with_capacity(per_date.len());
    for (d, (date, (cells, n))) in per_date.into_iter().enumerate() {
        dates.push(date);
        tweets_per_date.push(n);
        for (v, c) in cells {
            counts[d * nv + v] = c;
        }
    }
    IncidenceMatrix {
        dates,
        videos,
        counts,
        tweets_per_date,
        binarized: binarize,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::UrlEntity;
    use chrono::{TimeZone, Utc};

    fn share(id: &str, day: u32, hour: u32, video: &str) -> TweetRecord {
        TweetRecord::new(
            id,
            "u",
            Utc.with_ymd_and_hms(2021, 2, day, hour, 0, 0).unwrap(),
            false,
            "",
            vec![UrlEntity {
                short: format!("https://t.co/{id}"),
                expanded: format!("https://youtu.be/{video}"),
            }],
        )
    }

    const V1: &str = "VVVVVVVVVV1";
    const V2: &str = "VVVVVVVVVV2";

    fn fixture() -> Vec<TweetRecord> {
        vec![share("1", 1, 1, V1), share("2", 1, 2, V1), share("3", 2, 1, V2)]
    }

    fn rows(m: &IncidenceMatrix) -> Vec<Vec<u32>> {
        (0..m.n_dates())
            .map(|d| (0..m.n_videos()).map(|v| m.cell(d, v)).collect())
            .collect()
    }

    #[test]
    fn counts_per_day() {
        let m = build_incidence(&fixture(), false);
        assert_eq!(rows(&m), vec![vec![2, 0], vec![0, 1]]);
        assert_eq!(m.videos, vec![V1, V2]);
    }

    #[test]
    fn binarized_cells() {
        let m = build_incidence(&fixture(), true);
        assert_eq!(rows(&m), vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn empty_input() {
        let m = build_incidence(&[], true);
        assert_eq!((m.n_dates(), m.n_videos()), (0, 0));
        assert!(m.is_empty());
    }

    #[test]
    fn cell_sum_equals_share_count() {
        let mut tweets = fixture();
        tweets.push(share("4", 3, 0, V1));
        tweets.push(share("5", 3, 5, V2));
        let m = build_incidence(&tweets, false);
        let total: u64 = m.video_totals().iter().sum();
        let shares: usize = tweets.iter().map(|t| t.video_ids.len()).sum();
        assert_eq!(total, shares as u64);
    }

    #[test]
    fn video_order_follows_time_not_input_order() {
        let mut tweets = fixture();
        tweets.reverse();
        let m = build_incidence(&tweets, false);
        assert_eq!(m.videos, vec![V1, V2]);
    }
}
