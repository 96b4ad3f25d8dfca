//! Date × video incidence, epoch clustering of the sampling window, and the
//! plot-ready exports built on them.

mod clustering;
mod export;
mod incidence;

pub use clustering::{cluster_dates, DateClusterOptions, DateClustering, Epoch};
pub use export::{
    epoch_boxplot_export, heatmap_export, read_date_clusters_csv, write_boxplot_csv,
    write_daily_series_csv, write_date_clusters_csv, write_epochs_csv, write_heatmap_csv,
    BoxplotRow, Heatmap, HeatmapCell,
};
pub use incidence::{build_incidence, IncidenceMatrix};
