use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::status::VideoStatus;
use super::video_id::{extract_video_ids, is_valid_video_id};
use crate::{Error, Result};

/// A shortened link embedded in a tweet and the URL it expands to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UrlEntity {
    pub short: String,
    pub expanded: String,
}

/// One share event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub is_retweet: bool,
    pub text: String,
    pub urls: Vec<UrlEntity>,
    /// Distinct video identifiers found in `urls`, first-seen order.
    pub video_ids: Vec<String>,
}

impl TweetRecord {
    pub fn new(
        tweet_id: impl Into<String>,
        user_id: impl Into<String>,
        timestamp: DateTime<Utc>,
        is_retweet: bool,
        text: impl Into<String>,
        urls: Vec<UrlEntity>,
    ) -> Self {
        let video_ids = extract_video_ids(urls.iter().map(|u| u.expanded.as_str()));
        TweetRecord {
            tweet_id: tweet_id.into(),
            user_id: user_id.into(),
            timestamp: timestamp.trunc_subsecs(0),
            is_retweet,
            text: text.into(),
            urls,
            video_ids,
        }
    }

    pub fn date(&self) -> chrono::NaiveDate {
        self.timestamp.date_naive()
    }
}

#[derive(Serialize, Deserialize)]
struct TweetLine {
    id: String,
    user_id: String,
    created_at: String,
    retweet: bool,
    text: String,
    urls: Vec<UrlEntity>,
}

impl From<&TweetRecord> for TweetLine {
    fn from(t: &TweetRecord) -> Self {
        TweetLine {
            id: t.tweet_id.clone(),
            user_id: t.user_id.clone(),
            created_at: t.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
            retweet: t.is_retweet,
            text: t.text.clone(),
            urls: t.urls.clone(),
        }
    }
}

/// A video and its availability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub status: VideoStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
    #[serde(rename = "checked_at", with = "rfc3339_secs")]
    pub status_checked_at: DateTime<Utc>,
}

mod rfc3339_secs {
    use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
            .map_err(serde::de::Error::custom)
    }
}

/// Inclusive bounds on accepted tweet timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleWindow {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl SampleWindow {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    /// 1-based line number in the source file.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub accepted: usize,
    pub rejected: Vec<RejectedLine>,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    /// Sorted by `tweet_id`.
    pub tweets: Vec<TweetRecord>,
    /// Sorted by `video_id`.
    pub videos: Vec<VideoRecord>,
    pub tweet_report: ParseReport,
    pub video_report: ParseReport,
}

fn parse_tweet_line(line: &str, window: Option<&SampleWindow>) -> Result<TweetRecord, String> {
    let raw: TweetLine = serde_json::from_str(line).map_err(|e| format!("malformed record: {e}"))?;
    if raw.id.is_empty() {
        return Err("empty tweet id".into());
    }
    let timestamp = DateTime::parse_from_rfc3339(&raw.created_at)
        .map_err(|e| format!("bad created_at {:?}: {e}", raw.created_at))?
        .with_timezone(&Utc);
    if let Some(w) = window {
        if !w.contains(timestamp) {
            return Err(format!("created_at {} outside sample window", raw.created_at));
        }
    }
    Ok(TweetRecord::new(
        raw.id,
        raw.user_id,
        timestamp,
        raw.retweet,
        raw.text,
        raw.urls,
    ))
}

fn non_blank_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect()
}

/// Parse a line-delimited tweet export held in memory.
///
/// Malformed lines and duplicate ids are skipped and reported; the returned
/// tweets are sorted by `tweet_id`.
pub fn parse_tweets(text: &str, window: Option<&SampleWindow>) -> (Vec<TweetRecord>, ParseReport) {
    let lines = non_blank_lines(text);
    let parsed: Vec<(usize, Result<TweetRecord, String>)> = lines
        .par_iter()
        .map(|&(no, l)| (no, parse_tweet_line(l, window)))
        .collect();

    let mut seen = HashSet::new();
    let mut tweets = Vec::with_capacity(parsed.len());
    let mut report = ParseReport::default();
    for (line, res) in parsed {
        match res {
            Ok(t) if !seen.insert(t.tweet_id.clone()) => report.rejected.push(RejectedLine {
                line,
                reason: format!("duplicate tweet id {}", t.tweet_id),
            }),
            Ok(t) => tweets.push(t),
            Err(reason) => report.rejected.push(RejectedLine { line, reason }),
        }
    }
    for r in &report.rejected {
        log::warn!("tweet export line {}: {}", r.line, r.reason);
    }
    tweets.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    report.accepted = tweets.len();
    (tweets, report)
}

/// Parse a line-delimited video status export held in memory.
pub fn parse_videos(text: &str) -> (Vec<VideoRecord>, ParseReport) {
    let mut videos: Vec<VideoRecord> = Vec::new();
    let mut seen = HashSet::new();
    let mut report = ParseReport::default();
    for (line, l) in non_blank_lines(text) {
        let res = serde_json::from_str::<VideoRecord>(l)
            .map_err(|e| format!("malformed record: {e}"))
            .and_then(|v| {
                if !is_valid_video_id(&v.video_id) {
                    Err(format!("invalid video id {:?}", v.video_id))
                } else if !seen.insert(v.video_id.clone()) {
                    Err(format!("duplicate video id {}", v.video_id))
                } else {
                    Ok(v)
                }
            });
        match res {
            Ok(v) => videos.push(v),
            Err(reason) => {
                log::warn!("video export line {line}: {reason}");
                report.rejected.push(RejectedLine { line, reason });
            }
        }
    }
    videos.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    report.accepted = videos.len();
    (videos, report)
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_tweets(
    path: &Path,
    window: Option<&SampleWindow>,
) -> Result<(Vec<TweetRecord>, ParseReport)> {
    Ok(parse_tweets(&read_to_string(path)?, window))
}

pub fn read_videos(path: &Path) -> Result<(Vec<VideoRecord>, ParseReport)> {
    Ok(parse_videos(&read_to_string(path)?))
}

/// Read a tweet export and, optionally, a video status export.
///
/// An unreadable file is fatal; malformed lines are skipped and counted.
pub fn parse_exports(
    tweet_file: &Path,
    video_file: Option<&Path>,
    window: Option<&SampleWindow>,
) -> Result<Dataset> {
    let (tweets, tweet_report) = read_tweets(tweet_file, window)?;
    let (videos, video_report) = match video_file {
        Some(p) => read_videos(p)?,
        None => (Vec::new(), ParseReport::default()),
    };
    Ok(Dataset {
        tweets,
        videos,
        tweet_report,
        video_report,
    })
}

fn write_lines<T: Serialize>(path: &Path, items: impl Iterator<Item = T>) -> Result<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.push(b'\n');
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })
}

/// Write tweets in the export format accepted by [`parse_tweets`].
pub fn write_tweets(path: &Path, tweets: &[TweetRecord]) -> Result<()> {
    write_lines(path, tweets.iter().map(TweetLine::from))
}

pub fn write_videos(path: &Path, videos: &[VideoRecord]) -> Result<()> {
    write_lines(path, videos.iter())
}

#[cfg(test)]
fn serialize_tweet(t: &TweetRecord) -> String {
    serde_json::to_string(&TweetLine::from(t)).expect("tweet serializes")
}
