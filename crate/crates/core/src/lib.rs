//! Driven cascaded quantum networks: master equations, coherent absorbers and
//! pure entangled dark states of spin chains and Kerr cavities.
//!
//! All rates are in units of the waveguide emission rate `gamma` unless a
//! function takes `gamma` explicitly.

pub mod absorber;
pub mod error;
pub mod kerr;
pub mod master;
pub mod mcwf;
pub mod measures;
pub mod operator;
pub mod opfile;
pub mod special;
pub mod spin;
pub mod sweeps;

mod ode;

pub use error::{Error, Result};
pub use ode::Tolerances;
pub use operator::{c64, CMat, DensityMatrix, Ket, Operator, SubsystemDims};

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on; output order is index order.
pub fn par_map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
