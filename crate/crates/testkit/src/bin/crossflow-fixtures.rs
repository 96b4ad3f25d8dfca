//! Regenerate the bundled fixture files: `crossflow-fixtures <dir>`.

use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir).expect("create fixture dir");
    let f = crossflow_testkit::fixture::pipeline_fixture(2022);
    for (name, body) in [
        ("tweets.jsonl", &f.tweets_jsonl),
        ("videos.jsonl", &f.videos_jsonl),
        ("status.json", &f.status_json),
        ("codesheet.csv", &f.codesheet_csv),
        ("ingest_stats.jsonl", &f.stats_jsonl),
    ] {
        std::fs::write(dir.join(name), body).expect("write fixture");
    }
}
