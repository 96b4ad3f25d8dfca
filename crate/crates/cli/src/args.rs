use std::net::SocketAddr;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{ArgAction, Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "crossflow", version, about = "Cohort, epoch, content-coding and diffusion analysis of shared videos")]
pub struct Cli {
    /// TOML settings file; flags on the command line take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Log more (-v info, -vv debug)
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse exports, resolve video statuses and select the suspect cohort
    Ingest(IngestCmd),
    /// Cluster the cohort's sharing dates into epochs
    Temporal(TemporalCmd),
    /// Serve coding tasks and record judgments over HTTP
    Serve(ServeCmd),
    /// Content-coding analysis
    #[command(subcommand)]
    Codes(CodesCmd),
    /// Two-level community detection on the link sharing network
    Network(NetworkCmd),
    /// Run the whole pipeline and collect the report tables
    Report(ReportCmd),
}

#[derive(Debug, Subcommand)]
pub enum CodesCmd {
    /// Coder models, consensus codes and change tables for a code sheet
    Analyze(CodesAnalyzeCmd),
}

#[derive(Debug, Default, Args)]
pub struct IngestFlags {
    /// Tweet export (JSON lines)
    #[arg(long, value_name = "FILE")]
    pub tweets: Option<PathBuf>,
    /// Video export with statuses and titles (JSON lines)
    #[arg(long, value_name = "FILE")]
    pub videos: Option<PathBuf>,
    /// JSON map of video id to availability, queried as a status service
    #[arg(long, value_name = "FILE")]
    pub statuses: Option<PathBuf>,
    /// Time of the status check (RFC 3339)
    #[arg(long, value_name = "TIME")]
    pub checked_at: Option<DateTime<Utc>>,
    #[arg(long, value_name = "DAYS")]
    pub min_age_days: Option<i64>,
    /// Ignore retweets
    #[arg(long)]
    pub originals_only: bool,
}

#[derive(Debug, Default, Args)]
pub struct TemporalFlags {
    /// Principal components used for date clustering
    #[arg(long)]
    pub pcs: Option<usize>,
    #[arg(long)]
    pub kmin: Option<usize>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// EM restarts per model and k
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Cluster on share presence instead of counts
    #[arg(long)]
    pub binarize: bool,
    /// Videos in the heat map
    #[arg(long, value_name = "N")]
    pub heatmap_top: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct NetworkFlags {
    /// Louvain resolution
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Top videos listed per cluster
    #[arg(long, value_name = "N")]
    pub top_videos: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IngestCmd {
    #[command(flatten)]
    pub flags: IngestFlags,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TemporalCmd {
    /// Output directory of `ingest`
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    #[command(flatten)]
    pub flags: TemporalFlags,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeCmd {
    /// Output directory of `ingest`
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// `date_clusters.csv` written by `temporal`
    #[arg(long, value_name = "FILE")]
    pub clusters: PathBuf,
    /// TOML table of coder tokens
    #[arg(long, value_name = "FILE")]
    pub coders: PathBuf,
    /// Append-only judgment log
    #[arg(long, value_name = "FILE")]
    pub log: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}

#[derive(Debug, Args)]
pub struct CodesAnalyzeCmd {
    #[arg(long, value_name = "FILE")]
    pub sheet: PathBuf,
    /// Reconstructed values at or above this become true
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NetworkCmd {
    /// Output directory of `ingest`
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// `video_scores.csv` from `codes analyze`, for cluster PC2 averages
    #[arg(long, value_name = "FILE")]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub flags: NetworkFlags,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    #[command(flatten)]
    pub ingest: IngestFlags,
    #[command(flatten)]
    pub temporal: TemporalFlags,
    #[command(flatten)]
    pub network: NetworkFlags,
    #[arg(long, value_name = "FILE")]
    pub codesheet: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Reuse the ingest and temporal outputs already in the output directory
    #[arg(long)]
    pub resume: bool,
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}

impl IngestFlags {
    pub fn apply(&self, c: &mut RunConfig) {
        set_opt(&mut c.tweets, &self.tweets);
        set_opt(&mut c.videos, &self.videos);
        set_opt(&mut c.statuses, &self.statuses);
        set_opt(&mut c.checked_at, &self.checked_at);
        set(&mut c.min_age_days, &self.min_age_days);
        c.originals_only |= self.originals_only;
    }
}

impl TemporalFlags {
    pub fn apply(&self, c: &mut RunConfig) {
        set(&mut c.pcs, &self.pcs);
        set(&mut c.kmin, &self.kmin);
        set(&mut c.kmax, &self.kmax);
        set(&mut c.restarts, &self.restarts);
        set(&mut c.heatmap_top, &self.heatmap_top);
        c.binarize |= self.binarize;
    }
}

impl NetworkFlags {
    pub fn apply(&self, c: &mut RunConfig) {
        set(&mut c.resolution, &self.resolution);
        set(&mut c.top_videos, &self.top_videos);
    }
}

impl ReportCmd {
    pub fn apply(&self, c: &mut RunConfig) {
        self.ingest.apply(c);
        self.temporal.apply(c);
        self.network.apply(c);
        set_opt(&mut c.codesheet, &self.codesheet);
        set(&mut c.threshold, &self.threshold);
        set_opt(&mut c.seed, &self.seed);
        set_opt(&mut c.out, &self.out);
    }
}
