mod common;

use std::collections::{BTreeMap, HashMap, HashSet};

use crossflow_core::ingest::{daily_link_stats, parse_exports, select_cohort, CohortOptions, VideoStatus};
use serde_json::Value;

/// Video id from the URL shapes used by the fixtures.
fn recount_id(url: &str) -> Option<String> {
    let id = if let Some(i) = url.find("v=") {
        url[i + 2..].split('&').next().unwrap()
    } else if url.contains("youtu.be/") || url.contains("/shorts/") {
        url.rsplit('/').next().unwrap()
    } else {
        return None;
    };
    Some(id.to_string())
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { (xs[n / 2 - 1] + xs[n / 2]) / 2.0 })
}

#[test]
fn daily_medians_match_recount() {
    let data = parse_exports(
        &common::fixture("ingest_stats.jsonl"),
        Some(&common::fixture("videos.jsonl")),
        None,
    )
    .unwrap();
    let summary = daily_link_stats(&data.tweets, &data.videos, None);

    let text = std::fs::read_to_string(common::fixture("ingest_stats.jsonl")).unwrap();
    let gone: HashSet<String> = std::fs::read_to_string(common::fixture("videos.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v["status"] == "unavailable")
        .map(|v| v["video_id"].as_str().unwrap().to_string())
        .collect();
    // date -> (tweets, tweets with video, links, gone links)
    let mut days: BTreeMap<String, (u32, u32, u32, u32)> = BTreeMap::new();
    for line in text.lines() {
        let t: Value = serde_json::from_str(line).unwrap();
        let date = t["created_at"].as_str().unwrap()[..10].to_string();
        let mut ids: Vec<String> = t["urls"]
            .as_array()
            .unwrap()
            .iter()
            .filter_map(|u| recount_id(u["expanded"].as_str().unwrap()))
            .collect();
        ids.sort();
        ids.dedup();
        let e = days.entry(date).or_default();
        e.0 += 1;
        e.1 += u32::from(!ids.is_empty());
        e.2 += ids.len() as u32;
        e.3 += ids.iter().filter(|i| gone.contains(*i)).count() as u32;
    }
    let share = median(days.values().map(|d| f64::from(d.1) / f64::from(d.0)).collect());
    let gone_share = median(
        days.values()
            .filter(|d| d.2 > 0)
            .map(|d| f64::from(d.3) / f64::from(d.2))
            .collect(),
    );
    assert_eq!(summary.median_video_link_share, share);
    assert_eq!(summary.median_inaccessible_share, gone_share);
    // the empty day is kept in the series
    assert_eq!(summary.days.len(), 10);
}

#[test]
fn cohort_rule_holds_on_fixture() {
    let data = parse_exports(&common::fixture("tweets.jsonl"), Some(&common::fixture("videos.jsonl")), None).unwrap();
    let cohort = select_cohort(&data.tweets, &data.videos, CohortOptions::default());
    let status: HashMap<&str, VideoStatus> = data.videos.iter().map(|v| (v.video_id.as_str(), v.status)).collect();
    let shared_gone: HashSet<&str> = data
        .tweets
        .iter()
        .filter(|t| t.video_ids.iter().any(|v| status.get(v.as_str()) == Some(&VideoStatus::Unavailable)))
        .map(|t| t.user_id.as_str())
        .collect();
    assert!(!cohort.tweets.is_empty());
    for t in &cohort.tweets {
        assert!(shared_gone.contains(t.user_id.as_str()));
        assert!(!t.video_ids.is_empty());
        assert!(t.video_ids.iter().all(|v| status.get(v.as_str()) != Some(&VideoStatus::Unavailable)));
    }
    let expected = data
        .tweets
        .iter()
        .filter(|t| {
            shared_gone.contains(t.user_id.as_str())
                && !t.video_ids.is_empty()
                && t.video_ids.iter().all(|v| status.get(v.as_str()) != Some(&VideoStatus::Unavailable))
        })
        .count();
    assert_eq!(cohort.tweets.len(), expected);
}
