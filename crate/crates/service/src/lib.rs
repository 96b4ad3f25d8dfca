//! Coding-task service: browse date clusters, fetch videos shared often
//! enough on a date, and record five-code judgments in an append-only log.

mod api;
mod coders;
mod error;
mod judgments;
mod tasks;

pub use api::{router, serve, AppState};
pub use coders::Coders;
pub use error::ServiceError;
pub use judgments::{Judgment, JudgmentLog};
pub use tasks::{ClusterSummary, CodingTask, DateSummary, TaskIndex, TweetSample, MAX_SAMPLES};
