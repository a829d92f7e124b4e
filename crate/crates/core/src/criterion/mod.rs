//! The minimum-distance criterion
//! `L(φ) = inf_θ ∫ Σ_k φ_k(x, θ_k)² dν(x)`, its quadrature and its minimizer.

mod field;
mod normal;
mod quadrature;
mod search;

pub use field::{CdfDiffField, Component, Replicate};
pub use normal::{normal_cdf, normal_quantile};
pub use quadrature::{auto_nu, auto_nu_with_padding, make_grid, NuMeasure, QuadratureGrid, AUTO_NU_PADDING};
pub use search::{
    minimize, minimize_over_mixes, numerical_second_derivative, objective, Criterion, MinimizeSettings,
    Minimum,
};
