//! Linearized collisional theory: memory kernel, density Volterra equation,
//! dispersion function and stability margin, `k = 0` relaxation and the
//! forced free-streaming model.

mod dispersion;
mod faddeeva;
mod fit;
mod freestream;
mod kernel;
mod volterra;

pub use dispersion::{
    dispersion_l, dispersion_l_with, large_mode_bound, least_damped_root, refine_root, stability_scan,
    DispersionMethod, DispersionRoot, ModeMargin, ScanSpec, StabilityReport,
};
pub use faddeeva::faddeeva;
pub use fit::{damping_rate_fit, DampingFit, MIN_PEAKS};
pub use freestream::{free_streaming_response, resonance_factor, FreeStreamingResponse};
pub use kernel::{kernel_eval, VolterraKernel};
pub use volterra::{mode_reconstruct, volterra_solve, zero_mode, DensityHistory, ZeroMode, RESOLUTION_LIMIT};
