//! Monte Carlo designs: continuous and discrete data generating processes,
//! Gaussian-copula matched pairs, and warp-speed rejection-rate studies.

mod dgp;
mod study;

pub use dgp::{
    default_box, discrete10_quantile, gaussian_copula_sample, generate, standard_normal_quantile,
    uniform3_quantile, DgpFamily, DgpSpec, Generated, SIGMA3,
};
pub use study::{replicate, warp_speed_study, RateRow, RateTable, StudyPlan};
