//! Zeros of the Selberg zeta function on the critical line and the sums over
//! them that appear in the explicit formula for ψ_Γ.
//!
//! Only cuspidal spectral parameters are used. The zero at `s = 1` is the main
//! term `x` and is never stored in a table.

mod explicit;
mod window;
mod zeros;

pub use explicit::{
    exceptional_threshold, explicit_psi, optimal_truncation, optimal_truncation_scaled,
    truncation_cap, zero_sum, ExplicitPsi, TruncationChoice,
};
pub use window::{
    measure_bound, window_exceptional_measure, window_mean_square, ExceptionalReport,
};
pub use zeros::{
    load_zero_file, load_zero_table, unit_window_inverse_sum, weyl_check, SpectralZero,
    WeylDiagnostic, ZeroTable, ZEROS_ENV,
};
