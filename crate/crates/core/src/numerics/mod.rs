//! Statistical kernels shared by the temporal and coding analyses.

mod gmm;
mod io;
mod linear;
mod pca;

pub use gmm::{
    fit_gmm, fit_mixture, n_params, BicRow, CovarianceModel, GmmOptions, GmmSelection, MixtureFit,
};
pub use io::{read_matrix_csv, write_bic_table, write_matrix_csv};
pub use linear::{fit_sum_contrast_lm, fit_sum_contrast_lm_with_reference, LinearFit};
pub use pca::{pca, PcaModel, PcaOptions};
