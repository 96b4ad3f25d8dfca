use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::records::{TweetRecord, VideoRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VideoStatus {
    Available,
    Unavailable,
    /// Not yet checked, or too recently shared to trust a check.
    Unknown,
}

impl VideoStatus {
    /// Cohort selection keys only on confirmed removals.
    pub fn counts_as_available(self) -> bool {
        self != VideoStatus::Unavailable
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("status lookup failed: {0}")]
pub struct TransportError(pub String);

/// Batched availability lookup against the video platform.
pub trait StatusClient: Sync {
    /// Availability of each requested id the platform reports on. Ids absent
    /// from the result are treated as removed, mirroring list endpoints that
    /// silently omit deleted videos.
    fn lookup(&self, ids: &[String]) -> Result<HashMap<String, bool>, TransportError>;
}

/// Status client backed by a JSON object mapping video id to availability.
#[derive(Debug, Clone, Default)]
pub struct MockStatusClient {
    present: HashMap<String, bool>,
}

impl MockStatusClient {
    pub fn new(present: HashMap<String, bool>) -> Self {
        MockStatusClient { present }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(Self::new(serde_json::from_str(text)?))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

impl StatusClient for MockStatusClient {
    fn lookup(&self, ids: &[String]) -> Result<HashMap<String, bool>, TransportError> {
        Ok(ids
            .iter()
            .filter_map(|id| self.present.get(id).map(|&p| (id.clone(), p)))
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Minimum days between a video's last share and its status check.
    pub min_age_days: i64,
    pub checked_at: DateTime<Utc>,
    pub batch_size: usize,
    pub retries: u32,
    /// Initial retry delay, doubled after each failed attempt.
    pub backoff: Duration,
}

impl CheckOptions {
    pub fn at(checked_at: DateTime<Utc>) -> Self {
        CheckOptions {
            min_age_days: 60,
            checked_at,
            batch_size: 50,
            retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatusReport {
    /// One record per requested id, sorted by id.
    pub records: Vec<VideoRecord>,
    /// Ids left `Unknown` that should be checked again later.
    pub recheck: Vec<String>,
    pub warnings: Vec<String>,
}

/// Time of the most recent share of every video in `tweets`.
pub fn last_share_times(tweets: &[TweetRecord]) -> BTreeMap<String, DateTime<Utc>> {
    let mut last: BTreeMap<String, DateTime<Utc>> = BTreeMap::new();
    for t in tweets {
        for id in &t.video_ids {
            last.entry(id.clone())
                .and_modify(|ts| *ts = (*ts).max(t.timestamp))
                .or_insert(t.timestamp);
        }
    }
    last
}

fn old_enough(last: DateTime<Utc>, checked_at: DateTime<Utc>, min_age_days: i64) -> bool {
    checked_at - last >= chrono::Duration::days(min_age_days)
}

fn unknown(id: &str, at: DateTime<Utc>) -> VideoRecord {
    VideoRecord {
        video_id: id.to_string(),
        status: VideoStatus::Unknown,
        title: None,
        channel: None,
        status_checked_at: at,
    }
}

fn lookup_with_retry(
    client: &dyn StatusClient,
    batch: &[String],
    opts: &CheckOptions,
) -> Result<HashMap<String, bool>, TransportError> {
    let mut delay = opts.backoff;
    let mut attempt = 0;
    loop {
        match client.lookup(batch) {
            Ok(found) => return Ok(found),
            Err(e) if attempt >= opts.retries => return Err(e),
            Err(e) => {
                log::debug!("status lookup attempt {} failed: {e}", attempt + 1);
                std::thread::sleep(delay);
                delay *= 2;
                attempt += 1;
            }
        }
    }
}

/// Resolve the availability of every video in `last_shared`.
///
/// Videos shared within `min_age_days` of the check are not queried; they are
/// reported `Unknown` and queued for a re-check. A batch whose lookups keep
/// failing is also left `Unknown`, never guessed.
pub fn check_statuses(
    client: &dyn StatusClient,
    last_shared: &BTreeMap<String, DateTime<Utc>>,
    opts: &CheckOptions,
) -> StatusReport {
    let mut report = StatusReport::default();
    let mut due = Vec::new();
    for (id, &last) in last_shared {
        if old_enough(last, opts.checked_at, opts.min_age_days) {
            due.push(id.clone());
        } else {
            report.recheck.push(id.clone());
            report.records.push(unknown(id, opts.checked_at));
        }
    }

    let batches: Vec<&[String]> = due.chunks(opts.batch_size.max(1)).collect();
    let results: Vec<_> = batches
        .par_iter()
        .map(|batch| (batch, lookup_with_retry(client, batch, opts)))
        .collect();

    for (batch, res) in results {
        match res {
            Ok(found) => report.records.extend(batch.iter().map(|id| VideoRecord {
                video_id: id.clone(),
                status: match found.get(id) {
                    Some(true) => VideoStatus::Available,
                    _ => VideoStatus::Unavailable,
                },
                title: None,
                channel: None,
                status_checked_at: opts.checked_at,
            })),
            Err(e) => {
                let msg = format!(
                    "{e}; {} ids left unknown after {} retries",
                    batch.len(),
                    opts.retries
                );
                log::warn!("{msg}");
                report.warnings.push(msg);
                report.recheck.extend(batch.iter().cloned());
                report
                    .records
                    .extend(batch.iter().map(|id| unknown(id, opts.checked_at)));
            }
        }
    }
    report.records.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    report.recheck.sort();
    report
}

/// Apply the minimum-age rule to statuses taken from an export.
///
/// Records checked less than `min_age_days` after the video's last share
/// become `Unknown`; shared videos missing from the export are added as
/// `Unknown`. Every id in `last_shared` ends up with exactly one record.
pub fn apply_min_age(
    exported: &[VideoRecord],
    last_shared: &BTreeMap<String, DateTime<Utc>>,
    min_age_days: i64,
) -> StatusReport {
    let by_id: HashMap<&str, &VideoRecord> =
        exported.iter().map(|v| (v.video_id.as_str(), v)).collect();
    let mut report = StatusReport::default();
    for (id, &last) in last_shared {
        match by_id.get(id.as_str()) {
            Some(v) if v.status == VideoStatus::Unknown => {
                report.recheck.push(id.clone());
                report.records.push((*v).clone());
            }
            Some(v) if !old_enough(last, v.status_checked_at, min_age_days) => {
                report.recheck.push(id.clone());
                report.records.push(VideoRecord {
                    status: VideoStatus::Unknown,
                    ..(*v).clone()
                });
            }
            Some(v) => report.records.push((*v).clone()),
            None => {
                report.recheck.push(id.clone());
                report.warnings.push(format!("no status exported for {id}"));
                report.records.push(unknown(id, last));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn day(d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::days(d as i64)
    }

    fn opts(at: DateTime<Utc>) -> CheckOptions {
        CheckOptions {
            backoff: Duration::ZERO,
            ..CheckOptions::at(at)
        }
    }

    #[test]
    fn pass_through_when_old_enough() {
        let client = MockStatusClient::from_json(r#"{"AAAAAAAAAAA": true, "BBBBBBBBBBB": false}"#)
            .unwrap();
        let last = BTreeMap::from([("AAAAAAAAAAA".into(), day(0)), ("BBBBBBBBBBB".into(), day(3))]);
        let report = check_statuses(&client, &last, &opts(day(100)));
        let statuses: Vec<_> = report.records.iter().map(|r| r.status).collect();
        assert_eq!(statuses, [VideoStatus::Available, VideoStatus::Unavailable]);
        assert!(report.recheck.is_empty());
    }

    #[test]
    fn omitted_ids_are_unavailable() {
        let client = MockStatusClient::default();
        let last = BTreeMap::from([("CCCCCCCCCCC".into(), day(0))]);
        let report = check_statuses(&client, &last, &opts(day(61)));
        assert_eq!(report.records[0].status, VideoStatus::Unavailable);
    }

    #[test]
    fn recent_share_stays_unknown() {
        let client = MockStatusClient::from_json(r#"{"AAAAAAAAAAA": true}"#).unwrap();
        let last = BTreeMap::from([("AAAAAAAAAAA".into(), day(90))]);
        let report = check_statuses(&client, &last, &opts(day(100)));
        assert_eq!(report.records[0].status, VideoStatus::Unknown);
        assert_eq!(report.recheck, vec!["AAAAAAAAAAA"]);
    }

    struct Down(AtomicUsize);

    impl StatusClient for Down {
        fn lookup(&self, _: &[String]) -> Result<HashMap<String, bool>, TransportError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Err(TransportError("timeout".into()))
        }
    }

    #[test]
    fn exhausted_retries_leave_unknown_with_warning() {
        let client = Down(AtomicUsize::new(0));
        let last = BTreeMap::from([("AAAAAAAAAAA".into(), day(0))]);
        let report = check_statuses(&client, &last, &opts(day(100)));
        assert_eq!(report.records[0].status, VideoStatus::Unknown);
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(client.0.load(Ordering::SeqCst), 4);
    }

    struct Flaky(AtomicUsize);

    impl StatusClient for Flaky {
        fn lookup(&self, ids: &[String]) -> Result<HashMap<String, bool>, TransportError> {
            if self.0.fetch_add(1, Ordering::SeqCst) < 2 {
                return Err(TransportError("reset".into()));
            }
            Ok(ids.iter().map(|i| (i.clone(), true)).collect())
        }
    }

    #[test]
    fn transient_failure_recovers() {
        let client = Flaky(AtomicUsize::new(0));
        let last = BTreeMap::from([("AAAAAAAAAAA".into(), day(0))]);
        let report = check_statuses(&client, &last, &opts(day(100)));
        assert_eq!(report.records[0].status, VideoStatus::Available);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn export_statuses_respect_min_age() {
        let rec = |id: &str, status, at| VideoRecord {
            video_id: id.into(),
            status,
            title: None,
            channel: None,
            status_checked_at: at,
        };
        let exported = vec![
            rec("AAAAAAAAAAA", VideoStatus::Unavailable, day(100)),
            rec("BBBBBBBBBBB", VideoStatus::Unavailable, day(100)),
        ];
        let last = BTreeMap::from([
            ("AAAAAAAAAAA".into(), day(10)),
            ("BBBBBBBBBBB".into(), day(80)),
            ("CCCCCCCCCCC".into(), day(10)),
        ]);
        let report = apply_min_age(&exported, &last, 60);
        let statuses: Vec<_> = report.records.iter().map(|r| r.status).collect();
        assert_eq!(
            statuses,
            [VideoStatus::Unavailable, VideoStatus::Unknown, VideoStatus::Unknown]
        );
        assert_eq!(report.recheck, vec!["BBBBBBBBBBB", "CCCCCCCCCCC"]);
    }
}
