//! The four analysis stages. Each reads its inputs from files, writes its
//! outputs into one directory and returns a summary that is also written
//! there as `summary.json`.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use chrono::Utc;
use crossflow_core::coding::{
    change_tables, code_pca, coder_models, consensus_codes, read_codesheet, write_change_overall_csv,
    write_change_per_coder_csv, write_conditional_means_csv, write_consensus_csv, write_video_scores_csv,
    ChangeTables, CodeSheet, ConsensusCodes, Retention, CODE_NAMES,
};
use crossflow_core::diffusion::{
    build_bipartite, cluster_communities, louvain, meta_graph, project_links, write_edges_csv,
    write_metagraph_json, write_partition_csv, write_top_videos_csv, MetaGraph, Pc2Weighting,
};
use crossflow_core::ingest::{
    apply_min_age, check_statuses, daily_link_stats, last_share_times, read_tweets, read_videos, select_cohort,
    write_tweets, write_videos, CheckOptions, CohortOptions, MockStatusClient, ParseReport, TweetRecord,
    VideoRecord, VideoStatus,
};
use crossflow_core::numerics::{write_bic_table, CovarianceModel, PcaOptions};
use crossflow_core::temporal::{
    build_incidence, cluster_dates, epoch_boxplot_export, heatmap_export, write_boxplot_csv,
    write_daily_series_csv, write_date_clusters_csv, write_epochs_csv, write_heatmap_csv, DateClusterOptions,
    Heatmap,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const COHORT: &str = "cohort.jsonl";
pub const VIDEOS: &str = "videos.jsonl";
pub const DAILY_STATS: &str = "daily_stats.csv";
pub const REJECTED: &str = "rejected.csv";
pub const SUMMARY: &str = "summary.json";

pub const HEATMAP: &str = "heatmap.csv";
pub const DAILY_SERIES: &str = "daily_series.csv";
pub const EPOCHS: &str = "epochs.csv";
pub const BOXPLOT: &str = "boxplot.csv";
pub const BIC: &str = "bic.csv";
pub const DATE_CLUSTERS: &str = "date_clusters.csv";

pub const CONDITIONAL_MEANS: &str = "conditional_means.csv";
pub const CHANGE_OVERALL: &str = "change_overall.csv";
pub const CHANGE_PER_CODER: &str = "change_per_coder.csv";
pub const CONSENSUS: &str = "consensus.csv";
pub const VIDEO_SCORES: &str = "video_scores.csv";
pub const CODE_LOADINGS: &str = "code_loadings.csv";

pub const LINK_EDGES: &str = "link_edges.csv";
pub const LINK_COMMUNITIES: &str = "link_communities.csv";
pub const LINK_CLUSTERS: &str = "link_clusters.csv";
pub const METAGRAPH: &str = "metagraph.json";
pub const TOP_VIDEOS: &str = "top_videos.csv";

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn csv_result<T>(path: &Path, r: std::result::Result<T, impl std::fmt::Display>) -> Result<T> {
    r.map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| CliError::Usage(format!("missing {what}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub tweets_read: usize,
    pub tweets_rejected: usize,
    pub videos_read: usize,
    pub videos_rejected: usize,
    pub videos_shared: usize,
    pub videos_unavailable: usize,
    pub videos_unknown: usize,
    /// Videos whose status should be checked again later.
    pub recheck: Vec<String>,
    pub suspect_users: usize,
    pub cohort_tweets: usize,
    pub cohort_videos: usize,
    /// Cohort videos counted as available without a confirmed status.
    pub cohort_unknown_videos: Vec<String>,
    pub median_video_link_share: Option<f64>,
    pub median_inaccessible_share: Option<f64>,
    pub warnings: Vec<String>,
}

fn write_rejected(path: &Path, reports: &[(&str, &ParseReport)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_result(path, w.write_record(["file", "line", "reason"]))?;
    for (file, report) in reports {
        for r in &report.rejected {
            csv_result(path, w.write_record([file.to_string(), r.line.to_string(), r.reason.clone()]))?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

/// Parse the exports, resolve video statuses and select the suspect cohort.
pub fn run_ingest(config: &RunConfig, out: &Path) -> Result<IngestSummary> {
    let tweets_path = require(&config.tweets, "tweet export (--tweets or `tweets` in the config)")?;
    if config.videos.is_none() && config.statuses.is_none() {
        return Err(CliError::Usage(
            "video statuses are needed: give a video export (--videos) or a status map (--statuses)".into(),
        ));
    }
    create_dir(out)?;
    let (tweets, tweet_report) = read_tweets(tweets_path, None)?;
    let (exported, video_report) = match &config.videos {
        Some(p) => read_videos(p)?,
        None => (Vec::new(), ParseReport::default()),
    };
    for (what, r) in [("tweet", &tweet_report), ("video", &video_report)] {
        if !r.rejected.is_empty() {
            log::warn!("{} malformed {what} lines skipped", r.rejected.len());
        }
    }

    let last = last_share_times(&tweets);
    let report = match &config.statuses {
        Some(path) => {
            let client = MockStatusClient::from_file(path)?;
            let checked_at = config.checked_at.unwrap_or_else(Utc::now);
            let opts = CheckOptions {
                min_age_days: config.min_age_days,
                ..CheckOptions::at(checked_at)
            };
            let mut report = check_statuses(&client, &last, &opts);
            let meta: HashMap<&str, &VideoRecord> = exported.iter().map(|v| (v.video_id.as_str(), v)).collect();
            for r in &mut report.records {
                if let Some(v) = meta.get(r.video_id.as_str()) {
                    r.title.clone_from(&v.title);
                    r.channel.clone_from(&v.channel);
                }
            }
            report
        }
        None => apply_min_age(&exported, &last, config.min_age_days),
    };
    let videos = report.records;

    let cohort = select_cohort(
        &tweets,
        &videos,
        CohortOptions {
            originals_only: config.originals_only,
        },
    );
    let mut warnings = report.warnings;
    if cohort.tweets.is_empty() {
        let msg = "the cohort is empty: no user shared both an unavailable and an available video".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let daily = daily_link_stats(&tweets, &videos, None);

    write_tweets(&out.join(COHORT), &cohort.tweets)?;
    write_videos(&out.join(VIDEOS), &videos)?;
    write_rejected(&out.join(REJECTED), &[("tweets", &tweet_report), ("videos", &video_report)])?;
    let path = out.join(DAILY_STATS);
    let mut w = csv_writer(&path)?;
    csv_result(
        &path,
        w.write_record(["date", "tweets_total", "tweets_with_video_link", "links_total", "links_inaccessible"]),
    )?;
    for d in &daily.days {
        csv_result(
            &path,
            w.write_record([
                d.date.to_string(),
                d.tweets_total.to_string(),
                d.tweets_with_video_link.to_string(),
                d.links_total.to_string(),
                d.links_inaccessible.to_string(),
            ]),
        )?;
    }
    w.flush().map_err(CliError::io(&path))?;

    let count = |s: VideoStatus| videos.iter().filter(|v| v.status == s).count();
    let cohort_videos = cohort
        .tweets
        .iter()
        .flat_map(|t| &t.video_ids)
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let summary = IngestSummary {
        tweets_read: tweet_report.accepted,
        tweets_rejected: tweet_report.rejected.len(),
        videos_read: video_report.accepted,
        videos_rejected: video_report.rejected.len(),
        videos_shared: videos.len(),
        videos_unavailable: count(VideoStatus::Unavailable),
        videos_unknown: count(VideoStatus::Unknown),
        recheck: report.recheck,
        suspect_users: cohort.suspect_users.len(),
        cohort_tweets: cohort.tweets.len(),
        cohort_videos,
        cohort_unknown_videos: cohort.unknown_videos.into_iter().collect(),
        median_video_link_share: daily.median_video_link_share,
        median_inaccessible_share: daily.median_inaccessible_share,
        warnings,
    };
    write_json(&out.join(SUMMARY), &summary)?;
    Ok(summary)
}

fn read_cohort(ingest_dir: &Path) -> Result<Vec<TweetRecord>> {
    let path = ingest_dir.join(COHORT);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "{} not found; run `crossflow ingest` first",
            path.display()
        )));
    }
    let (tweets, report) = read_tweets(&path, None)?;
    if !report.rejected.is_empty() {
        return Err(CliError::Invalid(format!(
            "{}: {} unreadable lines",
            path.display(),
            report.rejected.len()
        )));
    }
    Ok(tweets)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemporalSummary {
    pub n_dates: usize,
    pub n_videos: usize,
    pub k: usize,
    pub model: Option<String>,
    pub explained_variance_ratio: Vec<f64>,
    pub epochs: usize,
    /// Clusters that cover more than one run of dates.
    pub non_contiguous: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Cluster the cohort's sharing dates into epochs.
pub fn run_temporal(config: &RunConfig, ingest_dir: &Path, out: &Path) -> Result<TemporalSummary> {
    let seed = config.require_seed()?;
    let tweets = read_cohort(ingest_dir)?;
    create_dir(out)?;
    let incidence = build_incidence(&tweets, config.binarize);

    let summary = if incidence.is_empty() {
        let msg = "no video shares in the cohort; temporal tables are empty".to_string();
        log::warn!("{msg}");
        let empty = Heatmap {
            videos: vec![],
            cells: vec![],
            daily_series: vec![],
        };
        write_heatmap_csv(&out.join(HEATMAP), &empty)?;
        write_daily_series_csv(&out.join(DAILY_SERIES), &empty)?;
        write_epochs_csv(&out.join(EPOCHS), &[])?;
        write_boxplot_csv(&out.join(BOXPLOT), &[])?;
        write_bic_table(&out.join(BIC), &[])?;
        write_date_clusters_csv(&out.join(DATE_CLUSTERS), &[], &[])?;
        TemporalSummary {
            n_dates: 0,
            n_videos: 0,
            k: 0,
            model: None,
            explained_variance_ratio: vec![],
            epochs: 0,
            non_contiguous: vec![],
            warnings: vec![msg],
        }
    } else {
        let opts = DateClusterOptions {
            pcs: config.pcs,
            k_range: config.k_range(),
            models: CovarianceModel::ALL.to_vec(),
            seed,
            restarts: config.restarts,
            pca: PcaOptions::CENTERED,
        };
        let clustering = cluster_dates(&incidence, &opts)?;
        let heatmap = heatmap_export(&incidence, config.heatmap_top);
        write_heatmap_csv(&out.join(HEATMAP), &heatmap)?;
        write_daily_series_csv(&out.join(DAILY_SERIES), &heatmap)?;
        write_epochs_csv(&out.join(EPOCHS), &clustering.epochs)?;
        write_boxplot_csv(&out.join(BOXPLOT), &epoch_boxplot_export(&clustering, &clustering.scores))?;
        write_bic_table(&out.join(BIC), &clustering.bic_table)?;
        write_date_clusters_csv(&out.join(DATE_CLUSTERS), &clustering.dates, &clustering.labels)?;
        TemporalSummary {
            n_dates: incidence.n_dates(),
            n_videos: incidence.n_videos(),
            k: clustering.k,
            model: Some(clustering.model.to_string()),
            explained_variance_ratio: clustering.explained_variance_ratio.clone(),
            epochs: clustering.epochs.len(),
            non_contiguous: clustering.non_contiguous.clone(),
            warnings: clustering.warnings.clone(),
        }
    };
    write_json(&out.join(SUMMARY), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodesSummary {
    pub rows: usize,
    pub videos: usize,
    pub coders: Vec<u32>,
    pub retained_pcs: usize,
    pub explained_variance_ratio: Vec<f64>,
    /// Adjusted R² of the coder model of each retained PC.
    pub coder_adj_r_squared: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Coder-bias analysis and consensus coding of a code sheet file.
pub fn run_codes(config: &RunConfig, sheet_path: &Path, out: &Path) -> Result<CodesSummary> {
    analyze_codes(config, &read_codesheet(sheet_path)?, out)
}

/// As [`run_codes`] for a sheet already in memory. Fewer than two rows
/// give zeroed tables.
pub fn analyze_codes(config: &RunConfig, sheet: &CodeSheet, out: &Path) -> Result<CodesSummary> {
    create_dir(out)?;
    let mut warnings = Vec::new();

    if sheet.len() < 2 {
        let msg = format!("code sheet has {} rows; coding tables are zeroed", sheet.len());
        log::warn!("{msg}");
        warnings.push(msg);
        let tables = ChangeTables {
            overall: Default::default(),
            per_coder: vec![],
        };
        write_conditional_means_csv(&out.join(CONDITIONAL_MEANS), &[])?;
        write_change_overall_csv(&out.join(CHANGE_OVERALL), &tables)?;
        write_change_per_coder_csv(&out.join(CHANGE_PER_CODER), &tables)?;
        let none = ConsensusCodes {
            videos: vec![],
            retained_pcs: 0,
            threshold: config.threshold,
        };
        write_consensus_csv(&out.join(CONSENSUS), &none)?;
        write_video_scores_csv(&out.join(VIDEO_SCORES), &none)?;
        let summary = CodesSummary {
            rows: sheet.len(),
            videos: sheet.n_videos(),
            coders: sheet.coders().into_iter().collect(),
            retained_pcs: 0,
            explained_variance_ratio: vec![],
            coder_adj_r_squared: vec![],
            warnings,
        };
        write_json(&out.join(SUMMARY), &summary)?;
        return Ok(summary);
    }

    let model = code_pca(sheet, Retention::Kaiser)?;
    warnings.extend(model.warnings.iter().cloned());
    let coders: Vec<u32> = sheet.rows().iter().map(|r| r.coder_id).collect();
    let fits = coder_models(&model.scores, &coders)?;
    if sheet.coders().len() < 2 {
        warnings.push("only one coder; coder models are intercept-only".into());
    }
    let consensus = consensus_codes(sheet, &model, &fits, config.threshold)?;
    let tables = change_tables(sheet, &consensus)?;

    write_conditional_means_csv(&out.join(CONDITIONAL_MEANS), &fits)?;
    write_change_overall_csv(&out.join(CHANGE_OVERALL), &tables)?;
    write_change_per_coder_csv(&out.join(CHANGE_PER_CODER), &tables)?;
    write_consensus_csv(&out.join(CONSENSUS), &consensus)?;
    write_video_scores_csv(&out.join(VIDEO_SCORES), &consensus)?;
    let path = out.join(CODE_LOADINGS);
    let mut w = csv_writer(&path)?;
    let mut header = vec!["code".to_string()];
    header.extend((1..=model.n_components()).map(|i| format!("pc{i}")));
    csv_result(&path, w.write_record(&header))?;
    for (code, row) in CODE_NAMES.iter().zip(model.loadings.row_iter()) {
        let mut rec = vec![code.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.6}")));
        csv_result(&path, w.write_record(&rec))?;
    }
    w.flush().map_err(CliError::io(&path))?;

    let summary = CodesSummary {
        rows: sheet.len(),
        videos: sheet.n_videos(),
        coders: sheet.coders().into_iter().collect(),
        retained_pcs: model.n_components(),
        explained_variance_ratio: model.explained_variance_ratio(),
        coder_adj_r_squared: fits.iter().map(|f| f.adjusted_r_squared).collect(),
        warnings,
    };
    write_json(&out.join(SUMMARY), &summary)?;
    Ok(summary)
}

/// Uncorrected PC2 score of each coded video from a `video_scores.csv`.
/// Blank or `NA` scores are skipped.
pub fn read_pc2(path: &Path) -> Result<HashMap<String, f64>> {
    let mut r = csv_result(path, csv::Reader::from_path(path))?;
    let header = csv_result(path, r.headers())?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Invalid(format!("{}: no `{name}` column", path.display())))
    };
    let (id_col, pc2_col) = (col("video_id")?, col("pc2")?);
    let mut out = HashMap::new();
    for rec in r.records() {
        let rec = csv_result(path, rec)?;
        let raw = rec.get(pc2_col).unwrap_or("").trim();
        if raw.is_empty() || raw == "NA" {
            continue;
        }
        let v: f64 = raw
            .parse()
            .map_err(|e| CliError::Invalid(format!("{}: pc2 {raw:?}: {e}", path.display())))?;
        out.insert(rec.get(id_col).unwrap_or("").to_string(), v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSummary {
    pub users: usize,
    pub links: usize,
    pub projection_edges: usize,
    pub link_communities: usize,
    pub link_modularity: Option<f64>,
    pub clusters: usize,
    pub cluster_modularity: Option<f64>,
    pub videos_with_pc2: usize,
    pub warnings: Vec<String>,
}

/// Two-level community detection on the cohort's link sharing network.
pub fn run_network(config: &RunConfig, ingest_dir: &Path, scores: Option<&Path>, out: &Path) -> Result<NetworkSummary> {
    let seed = config.require_seed()?;
    let tweets = read_cohort(ingest_dir)?;
    create_dir(out)?;
    let pc2 = match scores {
        Some(p) => read_pc2(p)?,
        None => HashMap::new(),
    };
    let titles: HashMap<String, String> = {
        let path = ingest_dir.join(VIDEOS);
        let videos = if path.exists() { read_videos(&path)?.0 } else { vec![] };
        videos
            .into_iter()
            .filter_map(|v| v.title.map(|t| (v.video_id, t)))
            .collect()
    };

    let bip = build_bipartite(&tweets);
    let projection = project_links(&bip);
    let mut warnings = Vec::new();
    let mut summary = NetworkSummary {
        users: bip.users.len(),
        links: bip.links.len(),
        projection_edges: projection.edges.len(),
        link_communities: 0,
        link_modularity: None,
        clusters: 0,
        cluster_modularity: None,
        videos_with_pc2: pc2.len(),
        warnings: vec![],
    };
    write_edges_csv(&out.join(LINK_EDGES), &projection, &bip.links)?;

    let meta = if bip.links.is_empty() {
        let msg = "no shared links in the cohort; network tables are empty".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
        write_partition_csv(&out.join(LINK_COMMUNITIES), &[], &[])?;
        write_partition_csv(&out.join(LINK_CLUSTERS), &[], &[])?;
        MetaGraph {
            nodes: vec![],
            edges: vec![],
        }
    } else {
        let links = louvain(&projection, config.resolution, seed)?;
        let clustering = cluster_communities(&bip, &links, config.resolution, seed)?;
        write_partition_csv(&out.join(LINK_COMMUNITIES), &bip.links, &links.membership)?;
        write_partition_csv(&out.join(LINK_CLUSTERS), &bip.links, &clustering.link_cluster)?;
        summary.link_communities = links.n_communities;
        summary.link_modularity = Some(links.modularity);
        summary.clusters = clustering.n_clusters;
        summary.cluster_modularity = Some(clustering.partition.modularity);
        if pc2.is_empty() {
            warnings.push("no PC2 scores given; avg_pc2 is null for every cluster".into());
        }
        meta_graph(
            &bip,
            &projection,
            &clustering,
            &pc2,
            Pc2Weighting::Unweighted,
            config.top_videos,
        )
    };
    write_metagraph_json(&out.join(METAGRAPH), &meta)?;
    write_top_videos_csv(&out.join(TOP_VIDEOS), &meta, &titles)?;
    summary.warnings = warnings;
    write_json(&out.join(SUMMARY), &summary)?;
    Ok(summary)
}

/// Date → cluster map for the coding service.
pub fn read_date_clusters(path: &Path) -> Result<BTreeMap<chrono::NaiveDate, usize>> {
    Ok(crossflow_core::temporal::read_date_clusters_csv(path)?)
}
