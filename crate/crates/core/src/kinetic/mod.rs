//! Nonlinear split-step spectral solver for the weakly collisional
//! Vlasov–Poisson system in one dimension.

mod run;
mod state;
mod stepper;

pub use run::{
    characteristics_deflect, echo_experiment, echo_runs, EchoRuns, run, run_with_kick, Diagnostics, DiagnosticsRow, EchoReport,
    FieldHistory, Kick, KineticConfig, Perturbation, RunOutput, VShape,
};
pub use state::{discrete_equilibrium, Grid, PhaseState};
pub use stepper::{collision_substep, poisson_field, step, Stepper, TOP_BAND_LIMIT};
