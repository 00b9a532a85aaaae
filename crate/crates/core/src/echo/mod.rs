//! Echo kernel, its exponential moments and the growth envelopes built on it.

mod growth;
mod kernel;
mod moments;

pub use growth::*;
pub use kernel::{
    echo_kernel, echo_kernel_brute, echo_time, kernel_table, piecewise_integral_check, EchoKernelSpec, KernelRow,
    KernelTable,
};
pub use moments::{
    backward_horizon, backward_scan, calibrate, echo_moment_backward, echo_moment_backward_with,
    echo_moment_forward, echo_moment_forward_with, forward_scan, loglog_slope, MomentRow, TAIL_FRACTION,
};
