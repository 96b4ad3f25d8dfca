//! The `crossflow` command line: stage commands, the coding service and the
//! end-to-end report pipeline.

pub mod args;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod stages;

use std::ffi::OsString;

use clap::Parser;
use crossflow_core::ingest::{read_tweets, read_videos};
use crossflow_service::{AppState, Coders, JudgmentLog, TaskIndex};

use args::{Cli, CodesCmd, Command};
pub use config::RunConfig;
pub use error::CliError;
pub use pipeline::{run_pipeline, Layout, Outcome};

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
}

fn execute(cli: Cli) -> error::Result<()> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Ingest(cmd) => {
            cmd.flags.apply(&mut config);
            config.validate()?;
            let s = stages::run_ingest(&config, &cmd.out)?;
            println!(
                "{} cohort tweets from {} suspect users; wrote {}",
                s.cohort_tweets,
                s.suspect_users,
                cmd.out.display()
            );
        }
        Command::Temporal(cmd) => {
            cmd.flags.apply(&mut config);
            if cmd.seed.is_some() {
                config.seed = cmd.seed;
            }
            config.validate()?;
            let s = stages::run_temporal(&config, &cmd.input, &cmd.out)?;
            println!("{} epochs in {} date clusters; wrote {}", s.epochs, s.k, cmd.out.display());
        }
        Command::Codes(CodesCmd::Analyze(cmd)) => {
            if let Some(t) = cmd.threshold {
                config.threshold = t;
            }
            config.validate()?;
            let s = stages::run_codes(&config, &cmd.sheet, &cmd.out)?;
            println!("{} judgments on {} videos; wrote {}", s.rows, s.videos, cmd.out.display());
        }
        Command::Network(cmd) => {
            cmd.flags.apply(&mut config);
            if cmd.seed.is_some() {
                config.seed = cmd.seed;
            }
            config.validate()?;
            let s = stages::run_network(&config, &cmd.input, cmd.scores.as_deref(), &cmd.out)?;
            println!(
                "{} links in {} communities and {} clusters; wrote {}",
                s.links,
                s.link_communities,
                s.clusters,
                cmd.out.display()
            );
        }
        Command::Serve(cmd) => {
            let (tweets, _) = read_tweets(&cmd.input.join(stages::COHORT), None)?;
            let videos_path = cmd.input.join(stages::VIDEOS);
            let videos = if videos_path.exists() { read_videos(&videos_path)?.0 } else { vec![] };
            let clusters = stages::read_date_clusters(&cmd.clusters)?;
            let state = AppState::new(
                TaskIndex::new(&tweets, &videos, &clusters),
                JudgmentLog::open(&cmd.log)?,
                Coders::load(&cmd.coders)?,
            );
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Invalid(format!("runtime: {e}")))?;
            rt.block_on(crossflow_service::serve(cmd.addr, state))
                .map_err(|e| CliError::Invalid(format!("serving on {}: {e}", cmd.addr)))?;
        }
        Command::Report(cmd) => {
            cmd.apply(&mut config);
            match run_pipeline(&config, cmd.resume)? {
                Outcome::Complete { report, warnings } => {
                    for w in &warnings {
                        eprintln!("warning: {w}");
                    }
                    println!("report written to {}", report.display());
                }
                Outcome::AwaitingCodes { instructions } => println!("{instructions}"),
            }
        }
    }
    Ok(())
}

/// Parse `args` (program name first), run the command and return the exit
/// code: 0 on success, 1 for usage errors, 2 for data errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
