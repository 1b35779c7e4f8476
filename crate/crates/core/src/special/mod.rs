//! Special functions: gamma, erfc, Mittag-Leffler, Mainardi.

pub mod bounds;
pub mod erfc;
pub mod gamma;
pub mod mainardi;
pub mod ml;
pub mod zeros;

pub use bounds::{ml_bounds, ml_bounds_beta, ml_bounds_twin};
pub use erfc::{erfc, erfcx};
pub use gamma::{gamma, ln_gamma, rgamma};
pub use mainardi::{mainardi_half_closed, mainardi_series};
pub use ml::{
    kappa_alpha, ml_asymptotic_full, ml_asymptotic_neg, ml_dominant_identity_residual, ml_eval, ml_integral, ml_series,
    EvalPolicy, MlOrder,
};
pub use zeros::{ml_real_zeros, ZeroList, DEFAULT_ZERO_TOL};
