use nalgebra::DMatrix;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcaOptions {
    pub center: bool,
    pub scale: bool,
}

impl PcaOptions {
    pub const CENTERED: PcaOptions = PcaOptions {
        center: true,
        scale: false,
    };
    pub const STANDARDIZED: PcaOptions = PcaOptions {
        center: true,
        scale: true,
    };
}

/// A fitted principal component decomposition.
///
/// Loadings are the right singular vectors of the pre-processed data matrix;
/// each loading column is signed so its largest-magnitude entry is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// variables × components, orthonormal columns.
    pub loadings: DMatrix<f64>,
    /// observations × components.
    pub scores: DMatrix<f64>,
    /// Variance of each component's scores, non-increasing.
    pub explained_variance: Vec<f64>,
    /// Column means of the raw data.
    pub means: Vec<f64>,
    /// Divisor applied to each column (1.0 when unscaled).
    pub scales: Vec<f64>,
    pub centered: bool,
    pub scaled: bool,
    /// Total variance of the pre-processed data.
    pub total_variance: f64,
    pub warnings: Vec<String>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.explained_variance.len()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| if self.total_variance > 0.0 { v / self.total_variance } else { 0.0 })
            .collect()
    }

    /// Keep only the first `k` components.
    pub fn truncated(&self, k: usize) -> PcaModel {
        let k = k.min(self.n_components());
        PcaModel {
            loadings: self.loadings.columns(0, k).into_owned(),
            scores: self.scores.columns(0, k).into_owned(),
            explained_variance: self.explained_variance[..k].to_vec(),
            ..self.clone()
        }
    }

    /// Apply the model's centering and scaling to raw data.
    pub fn preprocess(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = data.clone();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            let shift = if self.centered { self.means[j] } else { 0.0 };
            col.apply(|v| *v = (*v - shift) / self.scales[j]);
        }
        x
    }

    /// Scores of new observations on the retained components.
    pub fn transform(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        self.preprocess(data) * &self.loadings
    }

    /// Map component scores back to the original variable scale.
    pub fn reconstruct(&self, scores: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = scores * self.loadings.transpose();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            let shift = if self.centered { self.means[j] } else { 0.0 };
            col.apply(|v| *v = *v * self.scales[j] + shift);
        }
        x
    }
}

/// Right singular vectors (as columns) and singular values of `x`.
fn thin_svd(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let m = faer::Mat::<f64>::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)]);
    let svd = m
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let (v, s) = (svd.V(), svd.S());
    let r = s.dim();
    let right = DMatrix::from_fn(x.ncols(), r, |i, j| v[(i, j)]);
    Ok((right, (0..r).map(|i| s[i]).collect()))
}

/// Principal component analysis via singular value decomposition of the
/// centered (and optionally scaled) data matrix.
///
/// A zero-variance column under `scale` keeps a scale of 1.0 and records a
/// warning instead of failing.
pub fn pca(data: &DMatrix<f64>, opts: PcaOptions) -> Result<PcaModel> {
    let (n, p) = data.shape();
    if n < 2 || p < 1 {
        return Err(Error::invalid(format!(
            "pca needs at least 2 observations and 1 variable, got {n}×{p}"
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("pca input contains non-finite values"));
    }

    let denom = (n - 1) as f64;
    let means: Vec<f64> = data.column_iter().map(|c| c.mean()).collect();
    let mut warnings = Vec::new();
    let scales: Vec<f64> = data
        .column_iter()
        .enumerate()
        .map(|(j, c)| {
            if !opts.scale {
                return 1.0;
            }
            let shift = if opts.center { means[j] } else { 0.0 };
            let s = (c.iter().map(|v| (v - shift).powi(2)).sum::<f64>() / denom).sqrt();
            if s > 0.0 {
                s
            } else {
                let msg = format!("column {j} has zero variance; left unscaled");
                log::warn!("{msg}");
                warnings.push(msg);
                1.0
            }
        })
        .collect();

    let mut model = PcaModel {
        loadings: DMatrix::zeros(0, 0),
        scores: DMatrix::zeros(0, 0),
        explained_variance: Vec::new(),
        means,
        scales,
        centered: opts.center,
        scaled: opts.scale,
        total_variance: 0.0,
        warnings,
    };
    let x = model.preprocess(data);
    model.total_variance = x.iter().map(|v| v * v).sum::<f64>() / denom;

    let (right, sv) = thin_svd(&x)?;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

    let r = order.len();
    let mut loadings = DMatrix::zeros(p, r);
    for (c, &src) in order.iter().enumerate() {
        let mut col = right.column(src).into_owned();
        let mut pivot = 0;
        for i in 1..p {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        loadings.set_column(c, &col);
    }
    model.explained_variance = order.iter().map(|&i| sv[i] * sv[i] / denom).collect();
    model.scores = x * &loadings;
    model.loadings = loadings;
    Ok(model)
}
