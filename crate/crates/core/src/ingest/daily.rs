use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use serde::Serialize;

use super::records::{TweetRecord, VideoRecord};
use super::status::VideoStatus;
use crate::stats::median;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DailyLinkStats {
    pub date: NaiveDate,
    pub tweets_total: u64,
    pub tweets_with_video_link: u64,
    /// Video links, each distinct video counted once per tweet.
    pub links_total: u64,
    pub links_inaccessible: u64,
}

impl DailyLinkStats {
    fn empty(date: NaiveDate) -> Self {
        DailyLinkStats {
            date,
            tweets_total: 0,
            tweets_with_video_link: 0,
            links_total: 0,
            links_inaccessible: 0,
        }
    }

    pub fn video_link_share(&self) -> Option<f64> {
        (self.tweets_total > 0).then(|| self.tweets_with_video_link as f64 / self.tweets_total as f64)
    }

    pub fn inaccessible_share(&self) -> Option<f64> {
        (self.links_total > 0).then(|| self.links_inaccessible as f64 / self.links_total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkStatsSummary {
    pub days: Vec<DailyLinkStats>,
    /// Median over days of the fraction of tweets linking a video.
    pub median_video_link_share: Option<f64>,
    /// Median over days of the fraction of video links that are unavailable.
    pub median_inaccessible_share: Option<f64>,
}

/// Per-day link counts over `window` (inclusive), or over the span of the
/// tweets when no window is given. Days with a zero denominator are left out
/// of the corresponding median.
pub fn daily_link_stats(
    tweets: &[TweetRecord],
    videos: &[VideoRecord],
    window: Option<(NaiveDate, NaiveDate)>,
) -> LinkStatsSummary {
    let unavailable: HashMap<&str, bool> = videos
        .iter()
        .map(|v| (v.video_id.as_str(), v.status == VideoStatus::Unavailable))
        .collect();

    let span = window.or_else(|| {
        let first = tweets.iter().map(TweetRecord::date).min()?;
        let last = tweets.iter().map(TweetRecord::date).max()?;
        Some((first, last))
    });
    let mut days: BTreeMap<NaiveDate, DailyLinkStats> = BTreeMap::new();
    if let Some((start, end)) = span {
        for d in start.iter_days().take_while(|d| *d <= end) {
            days.insert(d, DailyLinkStats::empty(d));
        }
    }

    for t in tweets {
        let Some(row) = days.get_mut(&t.date()) else {
            continue;
        };
        row.tweets_total += 1;
        if !t.video_ids.is_empty() {
            row.tweets_with_video_link += 1;
        }
        row.links_total += t.video_ids.len() as u64;
        row.links_inaccessible += t
            .video_ids
            .iter()
            .filter(|id| unavailable.get(id.as_str()).copied().unwrap_or(false))
            .count() as u64;
    }

    let days: Vec<DailyLinkStats> = days.into_values().collect();
    let share: Vec<f64> = days.iter().filter_map(DailyLinkStats::video_link_share).collect();
    let inaccessible: Vec<f64> = days.iter().filter_map(DailyLinkStats::inaccessible_share).collect();
    LinkStatsSummary {
        median_video_link_share: median(&share),
        median_inaccessible_share: median(&inaccessible),
        days,
    }
}
