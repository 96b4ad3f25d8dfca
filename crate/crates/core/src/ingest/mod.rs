//! Tweet and video-status ingestion, availability resolution and cohort
//! selection.

mod cohort;
mod daily;
mod records;
mod status;
mod video_id;

pub use cohort::{filter_cohort_tweets, select_cohort, suspect_users, Cohort, CohortOptions};
pub use daily::{daily_link_stats, DailyLinkStats, LinkStatsSummary};
pub use records::{
    parse_exports, parse_tweets, parse_videos, read_tweets, read_videos, write_tweets,
    write_videos, Dataset, ParseReport, RejectedLine, SampleWindow, TweetRecord, UrlEntity,
    VideoRecord,
};
pub use status::{
    apply_min_age, check_statuses, last_share_times, CheckOptions, MockStatusClient,
    StatusClient, StatusReport, TransportError, VideoStatus,
};
pub use video_id::{extract_video_id, extract_video_ids, is_valid_video_id};
