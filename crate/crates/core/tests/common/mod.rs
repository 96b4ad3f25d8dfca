#![allow(dead_code)]

use chrono::{Duration, TimeZone, Utc};
use crossflow_core::ingest::{TweetRecord, UrlEntity};

pub fn video(v: usize) -> String {
    format!("vid{v:08}")
}

/// One tweet per `(day, video)` share, starting 2022-01-01.
pub fn share_tweets(shares: &[(usize, usize)]) -> Vec<TweetRecord> {
    let start = Utc.with_ymd_and_hms(2022, 1, 1, 12, 0, 0).unwrap();
    shares
        .iter()
        .enumerate()
        .map(|(i, &(day, v))| {
            TweetRecord::new(
                format!("{}", 1_000_000 + i),
                format!("user{}", i % 97),
                start + Duration::days(day as i64) + Duration::seconds(i as i64 % 3600),
                false,
                "",
                vec![UrlEntity {
                    short: format!("https://t.co/{i}"),
                    expanded: format!("https://www.youtube.com/watch?v={}", video(v)),
                }],
            )
        })
        .collect()
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}
