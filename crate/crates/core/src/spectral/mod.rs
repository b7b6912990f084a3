//! Fixed-point diagnostics: active support, the block operator of the
//! linearised constraints, the Jacobian of one balancing round, plan
//! sensitivities, pseudospectra and the constant-estimation sweep.

pub mod block;
pub mod constants;
pub mod jacobian;
pub mod pseudospectrum;
pub mod report;
pub mod sensitivity;
pub mod support;

pub use block::{build_block_operator, BlockOperator};
pub use constants::{estimate_constants, write_constants_csv, ConstantRow, CONSTANTS_HEADER};
pub use jacobian::sinkhorn_jacobian;
pub use pseudospectrum::{pseudospectrum_grid, PseudospectrumGrid};
pub use report::{
    duality_check, matrix_spectrum, spectral_report, DualityOutcome, MatrixSpectrum, SpectralReport,
};
pub use support::{detect_active_support, ActiveSupport};
