//! Least-squares regression on a single categorical predictor with sum
//! contrasts.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// A fitted one-way sum-contrast linear model.
///
/// Level effects are centered on the intercept (the unweighted mean of the
/// level means) and sum to zero across levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<G> {
    /// Distinct levels, ascending.
    pub levels: Vec<G>,
    /// Index into `levels` of the level coded as minus the sum of the others.
    pub reference: usize,
    /// observations × levels: intercept column then one column per
    /// non-reference level.
    pub design: DMatrix<f64>,
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
    /// Effect of each level, aligned with `levels`.
    pub conditional_means: Vec<f64>,
    /// Standard error of each level effect, aligned with `levels`.
    pub effect_std_errors: Vec<f64>,
    /// True when only one level was present and the fit is intercept-only.
    pub intercept_only: bool,
}

impl<G> LinearFit<G> {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }
}

pub fn fit_sum_contrast_lm<G: Ord + Clone>(response: &[f64], groups: &[G]) -> Result<LinearFit<G>> {
    let n_levels = groups.iter().collect::<std::collections::BTreeSet<_>>().len();
    fit_sum_contrast_lm_with_reference(response, groups, n_levels.saturating_sub(1))
}

/// As [`fit_sum_contrast_lm`], choosing which level (by ascending position)
/// is encoded as the negative sum of the others.
pub fn fit_sum_contrast_lm_with_reference<G: Ord + Clone>(
    response: &[f64],
    groups: &[G],
    reference: usize,
) -> Result<LinearFit<G>> {
    let n = response.len();
    if n != groups.len() {
        return Err(Error::invalid("response and group lengths differ"));
    }
    if n == 0 {
        return Err(Error::invalid("linear model needs observations"));
    }
    let index: BTreeMap<&G, usize> = groups
        .iter()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();
    let levels: Vec<G> = index.keys().map(|g| (*g).clone()).collect();
    let n_levels = levels.len();
    if reference >= n_levels {
        return Err(Error::invalid("reference level out of range"));
    }
    let intercept_only = n_levels == 1;
    if intercept_only {
        log::warn!("single group: coder model degenerates to an intercept-only fit");
    }

    // column c (1-based) belongs to the c-th non-reference level
    let contrast_col: Vec<Option<usize>> = (0..n_levels)
        .map(|l| match l.cmp(&reference) {
            std::cmp::Ordering::Less => Some(l + 1),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(l),
        })
        .collect();
    let mut design = DMatrix::zeros(n, n_levels);
    for (i, g) in groups.iter().enumerate() {
        design[(i, 0)] = 1.0;
        match contrast_col[index[g]] {
            Some(c) => design[(i, c)] = 1.0,
            None => (1..n_levels).for_each(|c| design[(i, c)] = -1.0),
        }
    }

    let y = DVector::from_column_slice(response);
    // every level is observed, so the design has full column rank
    let qr = design.clone().qr();
    let r = qr.r();
    let solve = |rhs: &DVector<f64>| -> Result<DVector<f64>> {
        r.solve_upper_triangular(&qr.q().tr_mul(rhs))
            .ok_or_else(|| Error::Numerical("rank-deficient sum-contrast design".into()))
    };
    let mut beta = solve(&y)?;
    // one step of iterative refinement
    beta += solve(&(&y - &design * &beta))?;
    let fitted = &design * &beta;
    let residuals = &y - &fitted;

    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res = residuals.norm_squared();
    let p = n_levels as f64;
    let (r_squared, adjusted_r_squared) = if ss_tot <= 0.0 {
        (0.0, 0.0)
    } else {
        let r2 = 1.0 - ss_res / ss_tot;
        let df = n as f64 - p;
        let adj = if df > 0.0 {
            1.0 - (1.0 - r2) * (n as f64 - 1.0) / df
        } else {
            f64::NAN
        };
        (r2, adj)
    };

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let conditional_means: Vec<f64> = contrast_col
        .iter()
        .map(|c| match c {
            Some(c) => coefficients[*c],
            None => -coefficients[1..].iter().sum::<f64>(),
        })
        .collect();

    // Var(beta) = sigma^2 (X'X)^-1; the reference effect is -1'beta.
    let df = n as f64 - p;
    let sigma2 = if df > 0.0 { ss_res / df } else { f64::NAN };
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("rank-deficient sum-contrast design".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let effect_std_errors = contrast_col
        .iter()
        .map(|c| match c {
            Some(c) => (sigma2 * xtx_inv[(*c, *c)]).sqrt(),
            None => {
                let s: f64 = (1..n_levels)
                    .flat_map(|a| (1..n_levels).map(move |b| (a, b)))
                    .map(|(a, b)| xtx_inv[(a, b)])
                    .sum();
                (sigma2 * s).sqrt()
            }
        })
        .collect();

    Ok(LinearFit {
        levels,
        reference,
        design,
        coefficients,
        fitted: fitted.iter().copied().collect(),
        residuals: residuals.iter().copied().collect(),
        r_squared,
        adjusted_r_squared,
        conditional_means,
        effect_std_errors,
        intercept_only,
    })
}
