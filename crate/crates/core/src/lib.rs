//! Weakly collisional Vlasov–Poisson toolkit.

pub mod echo;
pub mod error;
pub mod hybridnorms;
pub mod kinetic;
pub mod numerics;
pub mod lintheory;
pub mod profiles;

pub use error::{Error, Result};

/// Code in the guide under `book/` runs as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/linear-theory.md")]
    mod linear_theory {}
    #[doc = include_str!("../../../book/src/hybrid-norms.md")]
    mod hybrid_norms {}
    #[doc = include_str!("../../../book/src/echoes.md")]
    mod echoes {}
    #[doc = include_str!("../../../book/src/kinetic.md")]
    mod kinetic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
