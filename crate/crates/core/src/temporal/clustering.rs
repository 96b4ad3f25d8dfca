use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use nalgebra::DMatrix;

use super::incidence::IncidenceMatrix;
use crate::numerics::{fit_gmm, pca, BicRow, CovarianceModel, GmmOptions, PcaOptions};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct DateClusterOptions {
    /// Number of leading principal components the dates are clustered on.
    pub pcs: usize,
    pub k_range: Vec<usize>,
    pub models: Vec<CovarianceModel>,
    pub seed: u64,
    pub restarts: usize,
    pub pca: PcaOptions,
}

impl Default for DateClusterOptions {
    fn default() -> Self {
        DateClusterOptions {
            pcs: 3,
            k_range: (1..=25).collect(),
            models: CovarianceModel::ALL.to_vec(),
            seed: 0,
            restarts: 10,
            pca: PcaOptions::CENTERED,
        }
    }
}

/// A maximal run of consecutive dates sharing one cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Epoch {
    pub cluster: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Video-sharing tweets posted on the run's dates.
    pub n_tweets: u64,
    /// Videos whose busiest day (earliest on ties) falls in the run.
    pub n_videos: usize,
}

#[derive(Debug, Clone)]
pub struct DateClustering {
    pub dates: Vec<NaiveDate>,
    /// Cluster of each date, numbered from 1 in order of median date.
    pub labels: Vec<usize>,
    /// Number of non-empty clusters.
    pub k: usize,
    pub model: CovarianceModel,
    pub bic_table: Vec<BicRow>,
    /// Runs of consecutive dates, in date order; together they cover every date once.
    pub epochs: Vec<Epoch>,
    /// dates × components used for clustering.
    pub scores: DMatrix<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Clusters split over more than one run of dates.
    pub non_contiguous: Vec<usize>,
    pub warnings: Vec<String>,
}

impl DateClustering {
    pub fn cluster_ids(&self) -> Vec<usize> {
        (1..=self.k).collect()
    }

    pub fn dates_of(&self, cluster: usize) -> Vec<NaiveDate> {
        self.dates
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == cluster)
            .map(|(d, _)| *d)
            .collect()
    }
}

fn median_index(members: &[usize]) -> f64 {
    let n = members.len();
    if n % 2 == 1 {
        members[n / 2] as f64
    } else {
        0.5 * (members[n / 2 - 1] + members[n / 2]) as f64
    }
}

/// Renumber raw labels 1.. by the median position of their dates.
fn chronological(raw: &[usize]) -> Vec<usize> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in raw.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    let mut order: Vec<(f64, usize, usize)> = members
        .iter()
        .map(|(&l, m)| (median_index(m), m[0], l))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let rename: BTreeMap<usize, usize> = order
        .iter()
        .enumerate()
        .map(|(new, &(_, _, old))| (old, new + 1))
        .collect();
    raw.iter().map(|l| rename[l]).collect()
}

fn epochs(incidence: &IncidenceMatrix, labels: &[usize]) -> Vec<Epoch> {
    let nd = incidence.n_dates();
    let mut peak_date = vec![0usize; nd];
    for v in 0..incidence.n_videos() {
        let mut best = 0;
        for d in 1..nd {
            if incidence.count(d, v) > incidence.count(best, v) {
                best = d;
            }
        }
        peak_date[best] += 1;
    }

    let mut out: Vec<Epoch> = Vec::new();
    let mut start = 0;
    for d in 1..=nd {
        if d == nd || labels[d] != labels[start] {
            out.push(Epoch {
                cluster: labels[start],
                start: incidence.dates[start],
                end: incidence.dates[d - 1],
                n_tweets: incidence.tweets_per_date[start..d].iter().sum(),
                n_videos: peak_date[start..d].iter().sum(),
            });
            start = d;
        }
    }
    out
}

/// Cluster dates by their video-sharing profiles.
///
/// Runs PCA on the incidence matrix, fits Gaussian mixtures to the leading
/// date scores and keeps the best model by BIC. Clusters are renumbered by
/// their median date; clusters that are not one contiguous run are reported
/// in `non_contiguous` rather than split.
pub fn cluster_dates(incidence: &IncidenceMatrix, opts: &DateClusterOptions) -> Result<DateClustering> {
    if incidence.is_empty() {
        return Err(Error::invalid("cannot cluster an empty incidence matrix"));
    }
    let nd = incidence.n_dates();
    if nd < 2 {
        return Err(Error::invalid("date clustering needs at least two dates"));
    }
    let mut warnings = Vec::new();
    let mut warn = |msg: String| {
        log::warn!("{msg}");
        warnings.push(msg);
    };

    let model = pca(&incidence.to_matrix(), opts.pca)?;
    let available = model.n_components();
    let pcs = if opts.pcs > available {
        warn(format!("only {available} components available; using them instead of {}", opts.pcs));
        available
    } else {
        opts.pcs.max(1)
    };
    let scores = model.scores.columns(0, pcs).into_owned();
    let explained_variance_ratio = model.explained_variance_ratio()[..pcs].to_vec();

    let mut k_range: Vec<usize> = opts.k_range.iter().copied().filter(|&k| k < nd).collect();
    if k_range.len() < opts.k_range.len() {
        warn(format!("{nd} dates: k range limited to k < {nd}"));
    }
    if k_range.is_empty() {
        k_range.push(1);
    }

    let spread: f64 = model.explained_variance[..pcs].iter().sum();
    let (raw, model_used, bic_table) = if spread <= 1e-12 * model.total_variance.max(1.0) {
        warn("dates do not vary in their sharing profile; a single cluster is reported".into());
        (vec![0; nd], opts.models.first().copied().unwrap_or(CovarianceModel::VVV), Vec::new())
    } else {
        let gmm = GmmOptions {
            k_range,
            models: opts.models.clone(),
            seed: opts.seed,
            restarts: opts.restarts,
            ..Default::default()
        };
        let sel = fit_gmm(&scores, &gmm)?;
        (sel.best.labels(), sel.best.covariance_model, sel.table)
    };

    let labels = chronological(&raw);
    let k = labels.iter().collect::<BTreeSet<_>>().len();
    let epochs = epochs(incidence, &labels);
    let mut runs: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &epochs {
        *runs.entry(e.cluster).or_default() += 1;
    }
    let non_contiguous: Vec<usize> = runs.into_iter().filter(|&(_, r)| r > 1).map(|(c, _)| c).collect();

    Ok(DateClustering {
        dates: incidence.dates.clone(),
        labels,
        k,
        model: model_used,
        bic_table,
        epochs,
        scores,
        explained_variance_ratio,
        non_contiguous,
        warnings,
    })
}
