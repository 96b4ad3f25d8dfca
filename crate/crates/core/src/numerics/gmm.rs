//! Gaussian mixtures fitted by EM, selected by BIC.
//!
//! Covariance structures follow the usual volume/shape/orientation naming:
//! `EII` one spherical covariance shared by all components, `VII` spherical
//! with per-component volume, `EEE` one full covariance shared by all
//! components, and `VVV` a full covariance per component.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CovarianceModel {
    EII,
    VII,
    EEE,
    VVV,
}

impl CovarianceModel {
    pub const ALL: [CovarianceModel; 4] = [
        CovarianceModel::EII,
        CovarianceModel::VII,
        CovarianceModel::EEE,
        CovarianceModel::VVV,
    ];
}

impl fmt::Display for CovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for CovarianceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EII" => Ok(CovarianceModel::EII),
            "VII" => Ok(CovarianceModel::VII),
            "EEE" => Ok(CovarianceModel::EEE),
            "VVV" => Ok(CovarianceModel::VVV),
            other => Err(Error::invalid(format!("unknown covariance model {other:?}"))),
        }
    }
}

/// Free parameters of a `k`-component mixture in `d` dimensions.
pub fn n_params(model: CovarianceModel, k: usize, d: usize) -> usize {
    let full = d * (d + 1) / 2;
    let cov = match model {
        CovarianceModel::EII => 1,
        CovarianceModel::VII => k,
        CovarianceModel::EEE => full,
        CovarianceModel::VVV => k * full,
    };
    (k - 1) + k * d + cov
}

#[derive(Debug, Clone)]
pub struct GmmOptions {
    pub k_range: Vec<usize>,
    pub models: Vec<CovarianceModel>,
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions {
            k_range: (1..=9).collect(),
            models: CovarianceModel::ALL.to_vec(),
            seed: 0,
            restarts: 10,
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFit {
    pub k: usize,
    pub covariance_model: CovarianceModel,
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub log_likelihood: f64,
    pub n_params: usize,
    pub n_observations: usize,
    pub bic: f64,
    /// observations × k; rows sum to one.
    pub responsibilities: DMatrix<f64>,
    pub converged: bool,
    /// Log-likelihood at every EM iteration.
    pub trace: Vec<f64>,
    /// Set when a covariance needed a diagonal ridge to stay invertible.
    pub regularized: bool,
}

impl MixtureFit {
    /// Hard assignment: most responsible component, lowest index on ties.
    pub fn labels(&self) -> Vec<usize> {
        self.responsibilities
            .row_iter()
            .map(|row| {
                let mut best = 0;
                for j in 1..row.len() {
                    if row[j] > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}

/// One cell of the model-selection grid. `bic` is `None` when every restart
/// failed (degenerate covariance or empty component).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicRow {
    pub k: usize,
    pub model: CovarianceModel,
    pub bic: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub n_params: usize,
    pub converged: bool,
    /// The fit needed a diagonal ridge; its likelihood reflects the ridge
    /// rather than the data.
    pub regularized: bool,
}

#[derive(Debug, Clone)]
pub struct GmmSelection {
    pub best: MixtureFit,
    /// Ordered by k, then covariance model.
    pub table: Vec<BicRow>,
}

struct Params {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    covs: Vec<DMatrix<f64>>,
    chols: Vec<Cholesky<f64, Dyn>>,
    regularized: bool,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sq_dist(x: &DMatrix<f64>, i: usize, c: &DVector<f64>) -> f64 {
    x.row(i)
        .iter()
        .zip(c.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// k-means++ seeding followed by a few Lloyd iterations; returns hard labels.
fn kmeans_init(x: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let n = x.nrows();
    let row = |i: usize| x.row(i).transpose();
    let mut centers = vec![row(rng.random_range(0..n))];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x, i, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = n - 1;
        for (i, &w) in d2.iter().enumerate() {
            acc += w;
            if acc > target && w > 0.0 {
                pick = i;
                break;
            }
        }
        let c = row(pick);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x, i, &c));
        }
        centers.push(c);
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..20 {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centers.iter().enumerate() {
                let d = sq_dist(x, i, c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (j, c) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == j).collect();
            if !members.is_empty() {
                *c = members.iter().map(|&i| row(i)).sum::<DVector<f64>>() / members.len() as f64;
            }
        }
    }
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);
    sizes.iter().all(|&s| s > 0).then_some(labels)
}

/// Cholesky factor of `cov`, adding a ridge of `1e-6 * trace / d` to the
/// diagonal if it is numerically singular. `None` if the ridge does not help.
fn factor(cov: &mut DMatrix<f64>, floor: f64, regularized: &mut bool) -> Option<Cholesky<f64, Dyn>> {
    let d = cov.nrows();
    let well_conditioned = |c: &Cholesky<f64, Dyn>| {
        let diag = c.l_dirty().diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        lo > 0.0 && (lo / hi).powi(2) > 1e-12
    };
    let trace = cov.trace();
    if trace / d as f64 > floor {
        if let Some(c) = Cholesky::new(cov.clone()) {
            if well_conditioned(&c) {
                return Some(c);
            }
        }
    }
    let ridge = 1e-6 * trace / d as f64;
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    *regularized = true;
    if cov.trace() / d as f64 <= floor {
        return None;
    }
    Cholesky::new(cov.clone()).filter(well_conditioned)
}

fn m_step(x: &DMatrix<f64>, resp: &DMatrix<f64>, model: CovarianceModel, floor: f64) -> Option<Params> {
    let (n, d) = x.shape();
    let k = resp.ncols();
    let nk: Vec<f64> = resp.column_iter().map(|c| c.sum()).collect();
    if nk.iter().any(|&m| m <= 1e-10 * n as f64) {
        return None;
    }
    let weights: Vec<f64> = nk.iter().map(|m| m / n as f64).collect();
    let means: Vec<DVector<f64>> = (0..k)
        .map(|j| x.transpose() * resp.column(j) / nk[j])
        .collect();
    let scatter: Vec<DMatrix<f64>> = (0..k)
        .map(|j| {
            let mut diff = x.clone();
            for (i, mut r) in diff.row_iter_mut().enumerate() {
                let w = resp[(i, j)].sqrt();
                for c in 0..d {
                    r[c] = (r[c] - means[j][c]) * w;
                }
            }
            diff.transpose() * diff
        })
        .collect();

    let mut covs: Vec<DMatrix<f64>> = match model {
        CovarianceModel::EII => {
            let lambda = scatter.iter().map(|w| w.trace()).sum::<f64>() / (n * d) as f64;
            vec![DMatrix::identity(d, d) * lambda; k]
        }
        CovarianceModel::VII => (0..k)
            .map(|j| DMatrix::identity(d, d) * (scatter[j].trace() / (nk[j] * d as f64)))
            .collect(),
        CovarianceModel::EEE => {
            let pooled = scatter.iter().fold(DMatrix::zeros(d, d), |acc, w| acc + w) / n as f64;
            vec![pooled; k]
        }
        CovarianceModel::VVV => (0..k).map(|j| &scatter[j] / nk[j]).collect(),
    };
    let mut regularized = false;
    let chols = covs
        .iter_mut()
        .map(|c| factor(c, floor, &mut regularized))
        .collect::<Option<Vec<_>>>()?;
    Some(Params {
        weights,
        means,
        covs,
        chols,
        regularized,
    })
}

/// Responsibilities and log-likelihood under `p`.
fn e_step(x: &DMatrix<f64>, p: &Params) -> (DMatrix<f64>, f64) {
    let (n, d) = x.shape();
    let k = p.weights.len();
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let mut logp = DMatrix::zeros(n, k);
    for j in 0..k {
        let mut diff_t = x.transpose();
        for mut col in diff_t.column_iter_mut() {
            col -= &p.means[j];
        }
        let chol = &p.chols[j];
        let y = chol
            .l_dirty()
            .solve_lower_triangular(&diff_t)
            .expect("cholesky factor is invertible");
        let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let base = p.weights[j].ln() - 0.5 * (d as f64 * ln2pi + logdet);
        for (i, c) in y.column_iter().enumerate() {
            logp[(i, j)] = base - 0.5 * c.norm_squared();
        }
    }
    let mut ll = 0.0;
    for mut row in logp.row_iter_mut() {
        let m = row.max();
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        ll += lse;
        row.apply(|v| *v = (*v - lse).exp());
    }
    (logp, ll)
}

fn run_em(
    x: &DMatrix<f64>,
    k: usize,
    model: CovarianceModel,
    seed: u64,
    opts: &GmmOptions,
    floor: f64,
) -> Option<MixtureFit> {
    let n = x.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = kmeans_init(x, k, &mut rng)?;
    let mut resp = DMatrix::from_fn(n, k, |i, j| if labels[i] == j { 1.0 } else { 0.0 });
    let mut params = m_step(x, &resp, model, floor)?;
    let mut regularized = params.regularized;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut ll = f64::NEG_INFINITY;
    for _ in 0..opts.max_iter {
        let (r, next) = e_step(x, &params);
        if !next.is_finite() {
            return None;
        }
        resp = r;
        trace.push(next);
        let delta = next - ll;
        ll = next;
        if delta.abs() < opts.tol {
            converged = true;
            break;
        }
        params = m_step(x, &resp, model, floor)?;
        regularized |= params.regularized;
    }
    let n_params = n_params(model, k, x.ncols());
    Some(MixtureFit {
        k,
        covariance_model: model,
        weights: params.weights,
        means: params.means,
        covariances: params.covs,
        log_likelihood: ll,
        n_params,
        n_observations: n,
        bic: 2.0 * ll - n_params as f64 * (n as f64).ln(),
        responsibilities: resp,
        converged,
        trace,
        regularized,
    })
}

fn variance_floor(x: &DMatrix<f64>) -> f64 {
    let n = x.nrows() as f64;
    let total: f64 = x
        .column_iter()
        .map(|c| {
            let m = c.mean();
            c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
        })
        .sum();
    1e-10 * (total / x.ncols() as f64).max(f64::MIN_POSITIVE)
}

/// Best of `restarts` seeded EM runs for one `(k, model)` cell, by
/// log-likelihood, preferring runs that never needed a ridge. `None` if every restart failed.
pub fn fit_mixture(
    data: &DMatrix<f64>,
    k: usize,
    model: CovarianceModel,
    opts: &GmmOptions,
) -> Option<MixtureFit> {
    let floor = variance_floor(data);
    (0..opts.restarts.max(1))
        .filter_map(|r| {
            // Seeds depend on (seed, k, restart) so every model starts from
            // the same partitions.
            let seed = splitmix(opts.seed ^ splitmix((k as u64) << 32 | r as u64));
            run_em(data, k, model, seed, opts, floor)
        })
        .fold(None, |best: Option<MixtureFit>, fit| match best {
            Some(b) if selection_key(&b, b.log_likelihood) >= selection_key(&fit, fit.log_likelihood) => Some(b),
            _ => Some(fit),
        })
}

/// Fits that needed a ridge rank below every fit that did not.
fn selection_key(fit: &MixtureFit, score: f64) -> (bool, f64) {
    (!fit.regularized, score)
}

/// Fit every `(k, model)` combination and keep the maximum-BIC mixture.
/// Ridge-regularized fits are only chosen when no other fit exists.
///
/// Ties go to the smaller `k`, then to the earlier model in
/// `EII < VII < EEE < VVV`.
pub fn fit_gmm(data: &DMatrix<f64>, opts: &GmmOptions) -> Result<GmmSelection> {
    let (n, d) = data.shape();
    let kmax = opts.k_range.iter().copied().max().unwrap_or(0);
    if d == 0 || opts.k_range.is_empty() || opts.k_range.contains(&0) {
        return Err(Error::invalid("gmm needs at least one dimension and k >= 1"));
    }
    if n <= kmax {
        return Err(Error::invalid(format!(
            "gmm needs more observations ({n}) than the largest k ({kmax})"
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("gmm input contains non-finite values"));
    }

    let mut ks = opts.k_range.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut models = opts.models.clone();
    models.sort();
    models.dedup();
    let cells: Vec<(usize, CovarianceModel)> = ks
        .iter()
        .flat_map(|&k| models.iter().map(move |&m| (k, m)))
        .collect();

    let fits: Vec<Option<MixtureFit>> = cells
        .par_iter()
        .map(|&(k, m)| fit_mixture(data, k, m, opts))
        .collect();

    let table = cells
        .iter()
        .zip(&fits)
        .map(|(&(k, model), fit)| BicRow {
            k,
            model,
            bic: fit.as_ref().map(|f| f.bic),
            log_likelihood: fit.as_ref().map(|f| f.log_likelihood),
            n_params: n_params(model, k, d),
            converged: fit.as_ref().is_some_and(|f| f.converged),
            regularized: fit.as_ref().is_some_and(|f| f.regularized),
        })
        .collect();

    let mut best: Option<MixtureFit> = None;
    for fit in fits.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| selection_key(&fit, fit.bic) > selection_key(b, b.bic)) {
            best = Some(fit);
        }
    }
    let best = best.ok_or_else(|| Error::Numerical("no mixture could be fitted".into()))?;
    log::debug!(
        "selected {} components ({}), bic {:.3}",
        best.k,
        best.covariance_model,
        best.bic
    );
    Ok(GmmSelection { best, table })
}
