mod common;

use crossflow_core::temporal::{build_incidence, cluster_dates, DateClusterOptions};
use crossflow_testkit::gen::planted_epochs;
use crossflow_testkit::oracle::adjusted_rand_index;

#[test]
fn planted_epochs_are_recovered() {
    let planted = planted_epochs(3, 120, 8, 25, 0.4);
    let incidence = build_incidence(&common::share_tweets(&planted.active), false);
    assert_eq!(incidence.n_dates(), 120);
    let opts = DateClusterOptions {
        pcs: 60,
        k_range: (1..=25).collect(),
        ..DateClusterOptions::default()
    };
    let clustering = cluster_dates(&incidence, &opts).unwrap();
    let ari = adjusted_rand_index(&planted.labels, &clustering.labels);
    assert!(ari >= 0.9, "ARI {ari}");
    let n_tweets: usize = clustering.epochs.iter().map(|e| e.n_tweets as usize).sum();
    assert_eq!(n_tweets, planted.active.len());
}

#[test]
fn incidence_counts_match_recount() {
    let planted = planted_epochs(9, 30, 3, 5, 0.5);
    let m = build_incidence(&common::share_tweets(&planted.active), false);
    for (d, date) in m.dates.iter().enumerate() {
        let day = (*date - chrono::NaiveDate::from_ymd_opt(2022, 1, 1).unwrap()).num_days() as usize;
        for (v, id) in m.videos.iter().enumerate() {
            let expected = planted
                .active
                .iter()
                .filter(|&&(dd, vv)| dd == day && common::video(vv) == *id)
                .count() as u32;
            assert_eq!(m.count(d, v), expected);
        }
    }
}
