pub mod decomp;
pub mod error;
pub mod exponent;
mod fft;
pub mod grid;
pub mod harness;
pub mod nls;
pub mod norms;
pub mod numeric;
pub mod profiles;
pub mod schrodinger;
pub mod trajectory;
pub mod ufd;
pub mod windows;

pub use error::{Error, Result};
pub use exponent::{Exponent, Rational};
pub use grid::{pairing, Domain, Field, GridSpec};
pub use windows::WindowFamily;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/regimes.md")]
    mod regimes {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/schrodinger.md")]
    mod schrodinger {}
    #[doc = include_str!("../../../book/src/nls.md")]
    mod nls {}
    #[doc = include_str!("../../../book/src/supercritical.md")]
    mod supercritical {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
