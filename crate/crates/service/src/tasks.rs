use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use crossflow_core::ingest::{TweetRecord, VideoRecord};
use serde::Serialize;

use crate::ServiceError;

/// Sample tweets returned with each task.
pub const MAX_SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TweetSample {
    pub tweet_id: String,
    pub text: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

impl TweetSample {
    fn of(t: &TweetRecord) -> Self {
        TweetSample {
            tweet_id: t.tweet_id.clone(),
            text: t.text.clone(),
            timestamp: rfc3339(t.timestamp),
        }
    }
}

fn rfc3339(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// A video shared at least the threshold number of times on one date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodingTask {
    pub cluster_id: usize,
    pub date: NaiveDate,
    pub video_id: String,
    pub title: Option<String>,
    pub share_count_on_date: u32,
    pub tweet_samples: Vec<TweetSample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterSummary {
    pub cluster_id: usize,
    pub n_dates: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub n_tweets: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DateSummary {
    pub date: NaiveDate,
    pub n_tweets: u64,
    pub n_videos: usize,
    /// Share count of the date's most shared video.
    pub max_video_shares: u32,
}

/// Read-only lookup of shares by cluster, date and video.
#[derive(Debug, Clone, Default)]
pub struct TaskIndex {
    /// Chronological by timestamp, then tweet id.
    tweets: Vec<TweetRecord>,
    clusters: BTreeMap<usize, Vec<NaiveDate>>,
    /// date -> video -> indices into `tweets`
    shares: BTreeMap<NaiveDate, BTreeMap<String, Vec<usize>>>,
    by_video: HashMap<String, Vec<usize>>,
    titles: HashMap<String, Option<String>>,
}

impl TaskIndex {
    /// Index `tweets` under the date clustering `date_clusters`. Videos are
    /// known if they appear in `videos` or in any tweet.
    pub fn new(tweets: &[TweetRecord], videos: &[VideoRecord], date_clusters: &BTreeMap<NaiveDate, usize>) -> Self {
        let mut tweets = tweets.to_vec();
        tweets.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.tweet_id.cmp(&b.tweet_id)));

        let mut clusters: BTreeMap<usize, Vec<NaiveDate>> = BTreeMap::new();
        for (&date, &c) in date_clusters {
            clusters.entry(c).or_default().push(date);
        }

        let mut titles: HashMap<String, Option<String>> =
            videos.iter().map(|v| (v.video_id.clone(), v.title.clone())).collect();
        let mut shares: BTreeMap<NaiveDate, BTreeMap<String, Vec<usize>>> = BTreeMap::new();
        let mut by_video: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, t) in tweets.iter().enumerate() {
            for v in &t.video_ids {
                titles.entry(v.clone()).or_insert(None);
                by_video.entry(v.clone()).or_default().push(i);
                shares.entry(t.date()).or_default().entry(v.clone()).or_default().push(i);
            }
        }
        TaskIndex {
            tweets,
            clusters,
            shares,
            by_video,
            titles,
        }
    }

    fn date_tweets(&self, date: NaiveDate) -> u64 {
        self.shares.get(&date).map_or(0, |videos| {
            let mut ids: Vec<usize> = videos.values().flatten().copied().collect();
            ids.sort_unstable();
            ids.dedup();
            ids.len() as u64
        })
    }

    pub fn clusters(&self) -> Vec<ClusterSummary> {
        self.clusters
            .iter()
            .map(|(&cluster_id, dates)| ClusterSummary {
                cluster_id,
                n_dates: dates.len(),
                first_date: dates[0],
                last_date: dates[dates.len() - 1],
                n_tweets: dates.iter().map(|&d| self.date_tweets(d)).sum(),
            })
            .collect()
    }

    pub fn dates(&self, cluster_id: usize) -> Result<Vec<DateSummary>, ServiceError> {
        let dates = self
            .clusters
            .get(&cluster_id)
            .ok_or_else(|| ServiceError::NotFound(format!("no cluster {cluster_id}")))?;
        Ok(dates
            .iter()
            .map(|&date| {
                let videos = self.shares.get(&date);
                DateSummary {
                    date,
                    n_tweets: self.date_tweets(date),
                    n_videos: videos.map_or(0, BTreeMap::len),
                    max_video_shares: videos
                        .and_then(|v| v.values().map(Vec::len).max())
                        .unwrap_or(0) as u32,
                }
            })
            .collect())
    }

    /// Videos shared at least `min_daily_shares` times on `date`, most
    /// shared first, then by video id.
    pub fn list_tasks(
        &self,
        cluster_id: usize,
        date: NaiveDate,
        min_daily_shares: u32,
    ) -> Result<Vec<CodingTask>, ServiceError> {
        let dates = self
            .clusters
            .get(&cluster_id)
            .ok_or_else(|| ServiceError::NotFound(format!("no cluster {cluster_id}")))?;
        if dates.binary_search(&date).is_err() {
            return Err(ServiceError::NotFound(format!("{date} is not in cluster {cluster_id}")));
        }
        let mut tasks: Vec<CodingTask> = self
            .shares
            .get(&date)
            .into_iter()
            .flatten()
            .filter(|(_, ids)| ids.len() as u32 >= min_daily_shares.max(1))
            .map(|(video_id, ids)| CodingTask {
                cluster_id,
                date,
                video_id: video_id.clone(),
                title: self.titles.get(video_id).cloned().flatten(),
                share_count_on_date: ids.len() as u32,
                tweet_samples: ids.iter().take(MAX_SAMPLES).map(|&i| TweetSample::of(&self.tweets[i])).collect(),
            })
            .collect();
        tasks.sort_by(|a, b| {
            b.share_count_on_date
                .cmp(&a.share_count_on_date)
                .then_with(|| a.video_id.cmp(&b.video_id))
        });
        Ok(tasks)
    }

    /// Every tweet sharing `video_id`, oldest first.
    pub fn video_tweets(&self, video_id: &str) -> Result<Vec<TweetSample>, ServiceError> {
        if !self.has_video(video_id) {
            return Err(ServiceError::NotFound(format!("unknown video {video_id}")));
        }
        Ok(self
            .by_video
            .get(video_id)
            .into_iter()
            .flatten()
            .map(|&i| TweetSample::of(&self.tweets[i]))
            .collect())
    }

    pub fn has_video(&self, video_id: &str) -> bool {
        self.titles.contains_key(video_id)
    }
}
