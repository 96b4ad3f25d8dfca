//! Human content codes: PCA over the five binary codes, coder-effect models
//! and the coder-independent consensus coding.

mod analysis;
mod sheet;
mod tables;

pub use analysis::{
    code_pca, coder_models, consensus_codes, corrected_scores, ConsensusCodes, ConsensusVideo,
    Retention,
};
pub use sheet::{parse_codesheet, read_codesheet, write_codesheet, CodeRow, CodeSheet, Codes, CODE_NAMES};
pub use tables::{
    change_tables, write_change_overall_csv, write_change_per_coder_csv,
    write_conditional_means_csv, write_consensus_csv, write_video_scores_csv, ChangeTables,
    CodeChange, CoderChange, CoderChanges,
};
