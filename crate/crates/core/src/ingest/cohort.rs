use std::collections::{BTreeSet, HashMap};

use super::records::{TweetRecord, VideoRecord};
use super::status::VideoStatus;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CohortOptions {
    /// Ignore retweets entirely, both as evidence and as output.
    pub originals_only: bool,
}

/// The suspect-cohort dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cohort {
    /// Tweets by suspect users whose videos are all available, sorted by id.
    pub tweets: Vec<TweetRecord>,
    /// Users who shared at least one unavailable video.
    pub suspect_users: BTreeSet<String>,
    /// Videos in the cohort whose status is still unknown; they count as
    /// available but are reported separately.
    pub unknown_videos: BTreeSet<String>,
}

fn status_of(statuses: &HashMap<&str, VideoStatus>, id: &str) -> VideoStatus {
    statuses.get(id).copied().unwrap_or(VideoStatus::Unknown)
}

fn index(videos: &[VideoRecord]) -> HashMap<&str, VideoStatus> {
    videos
        .iter()
        .map(|v| (v.video_id.as_str(), v.status))
        .collect()
}

fn eligible(t: &TweetRecord, opts: CohortOptions) -> bool {
    !(opts.originals_only && t.is_retweet)
}

/// Users who shared at least one unavailable video.
pub fn suspect_users(
    tweets: &[TweetRecord],
    videos: &[VideoRecord],
    opts: CohortOptions,
) -> BTreeSet<String> {
    let statuses = index(videos);
    tweets
        .iter()
        .filter(|t| eligible(t, opts))
        .filter(|t| {
            t.video_ids
                .iter()
                .any(|id| status_of(&statuses, id) == VideoStatus::Unavailable)
        })
        .map(|t| t.user_id.clone())
        .collect()
}

/// Tweets by `suspects` that link at least one video, all of them available.
pub fn filter_cohort_tweets(
    tweets: &[TweetRecord],
    videos: &[VideoRecord],
    suspects: &BTreeSet<String>,
    opts: CohortOptions,
) -> Vec<TweetRecord> {
    let statuses = index(videos);
    let mut out: Vec<TweetRecord> = tweets
        .iter()
        .filter(|t| eligible(t, opts) && suspects.contains(&t.user_id))
        .filter(|t| {
            !t.video_ids.is_empty()
                && t.video_ids
                    .iter()
                    .all(|id| status_of(&statuses, id).counts_as_available())
        })
        .cloned()
        .collect();
    out.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    out
}

/// Select tweets with available videos from users who also shared an
/// unavailable video.
pub fn select_cohort(tweets: &[TweetRecord], videos: &[VideoRecord], opts: CohortOptions) -> Cohort {
    let suspects = suspect_users(tweets, videos, opts);
    let selected = filter_cohort_tweets(tweets, videos, &suspects, opts);
    let statuses = index(videos);
    let unknown_videos = selected
        .iter()
        .flat_map(|t| &t.video_ids)
        .filter(|id| status_of(&statuses, id) == VideoStatus::Unknown)
        .cloned()
        .collect();
    Cohort {
        tweets: selected,
        suspect_users: suspects,
        unknown_videos,
    }
}
