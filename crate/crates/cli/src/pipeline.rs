use std::path::{Path, PathBuf};

use crossflow_core::coding::CodeSheet;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::stages::{self, *};

pub const CONFIG_FILE: &str = "config.toml";

/// Files collected into `report/`, by stage directory.
pub const REPORT_FILES: [(&str, &str); 7] = [
    ("temporal", EPOCHS),
    ("temporal", HEATMAP),
    ("codes", CONDITIONAL_MEANS),
    ("codes", CHANGE_OVERALL),
    ("codes", CHANGE_PER_CODER),
    ("network", METAGRAPH),
    ("network", TOP_VIDEOS),
];

/// Stage output directories under a run's `out`.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
    pub ingest: PathBuf,
    pub temporal: PathBuf,
    pub codes: PathBuf,
    pub network: PathBuf,
    pub report: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Layout {
            root: root.to_path_buf(),
            ingest: root.join("ingest"),
            temporal: root.join("temporal"),
            codes: root.join("codes"),
            network: root.join("network"),
            report: root.join("report"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Complete { report: PathBuf, warnings: Vec<String> },
    /// Stopped after the temporal stage until a code sheet exists.
    AwaitingCodes { instructions: String },
}

fn write_config(dir: &Path, config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let path = dir.join(CONFIG_FILE);
    std::fs::write(&path, config.to_toml()).map_err(CliError::io(&path))
}

fn resume_instructions(layout: &Layout, sheet: Option<&Path>) -> String {
    let sheet = sheet.map_or_else(|| "SHEET.csv".to_string(), |p| p.display().to_string());
    format!(
        "epochs are ready; the pipeline now waits for content coding.\n\
         1. serve coding tasks:  crossflow serve --in {ingest} --clusters {clusters} --coders CODERS.toml --log judgments.jsonl\n\
         2. export the judgments from GET /api/export/codes.csv to {sheet}\n\
         3. resume:              crossflow report --config {config} --codesheet {sheet} --resume",
        ingest = layout.ingest.display(),
        clusters = layout.temporal.join(DATE_CLUSTERS).display(),
        config = layout.root.join(CONFIG_FILE).display(),
    )
}

/// Run ingest → temporal → coding analysis → network and collect the
/// report tables in `<out>/report`.
///
/// Without a code sheet the run stops after the temporal stage. `resume`
/// reuses the ingest and temporal outputs of an earlier run in `out`.
pub fn run_pipeline(config: &RunConfig, resume: bool) -> Result<Outcome> {
    config.validate()?;
    config.require_seed()?;
    let layout = Layout::new(config.require_out()?);
    let mut warnings = Vec::new();

    let cohort_empty = if resume {
        for dir in [&layout.ingest, &layout.temporal] {
            if !dir.join(SUMMARY).exists() {
                return Err(CliError::Usage(format!(
                    "cannot resume: {} has no completed stage; run without --resume",
                    dir.display()
                )));
            }
        }
        log::info!("resuming with the ingest and temporal outputs in {}", layout.root.display());
        let (tweets, _) = crossflow_core::ingest::read_tweets(&layout.ingest.join(COHORT), None)?;
        tweets.is_empty()
    } else {
        let ingest = stages::run_ingest(config, &layout.ingest)?;
        warnings.extend(ingest.warnings);
        let temporal = stages::run_temporal(config, &layout.ingest, &layout.temporal)?;
        warnings.extend(temporal.warnings);
        ingest.cohort_tweets == 0
    };
    write_config(&layout.root, config)?;

    let sheet = config.codesheet.as_deref().filter(|p| p.exists());
    let codes = match sheet {
        Some(p) => stages::run_codes(config, p, &layout.codes)?,
        // nothing to code, so there is nothing to wait for
        None if cohort_empty => stages::analyze_codes(config, &CodeSheet::default(), &layout.codes)?,
        None if resume => {
            return Err(CliError::Usage(match &config.codesheet {
                Some(p) => format!("code sheet {} not found", p.display()),
                None => "--resume needs a code sheet (--codesheet)".into(),
            }))
        }
        None => {
            return Ok(Outcome::AwaitingCodes {
                instructions: resume_instructions(&layout, config.codesheet.as_deref()),
            })
        }
    };
    warnings.extend(codes.warnings);
    let scores = layout.codes.join(VIDEO_SCORES);
    let network = stages::run_network(config, &layout.ingest, Some(&scores), &layout.network)?;
    warnings.extend(network.warnings);

    std::fs::create_dir_all(&layout.report).map_err(CliError::io(&layout.report))?;
    for (stage, file) in REPORT_FILES {
        let from = layout.root.join(stage).join(file);
        let to = layout.report.join(file);
        std::fs::copy(&from, &to).map_err(CliError::io(&from))?;
    }
    write_config(&layout.report, config)?;
    Ok(Outcome::Complete {
        report: layout.report,
        warnings,
    })
}
