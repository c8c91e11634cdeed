//! Twisted Ruelle and Selberg zeta values, heat-trace identities, and
//! analytic-torsion asymptotics for closed hyperbolic 3-manifolds, computed
//! from geodesic length-spectrum data.
//!
//! The input is a finite list of primitive closed geodesics (length,
//! holonomy angle, multiplicity), complete up to a stated cutoff and
//! subject to an exponential counting bound. On top of that the crate
//! evaluates, with certified truncation tails:
//!
//! * logarithms of character- and representation-twisted Ruelle and
//!   Selberg zeta functions in their absolute-convergence region
//!   ([`zeta`]);
//! * the exact identities tying them together: the Ruelle-to-Selberg
//!   factorization, three independent routes to representation twists, and
//!   the modulus form of the functional equations ([`zeta`], [`algebra`]);
//! * heat-trace and resolvent identities on the spectral side ([`trace`]);
//! * analytic-torsion ratios along the two strongly acyclic twist
//!   families, whose growth is quadratic in the twist index with slope
//!   vol / 4 pi, and a least-squares recovery of the volume from that
//!   growth ([`torsion`]).
//!
//! Determinism is a contract: every series is summed in a fixed order with
//! a fixed-shape blocked compensated reduction, so all results are
//! bit-identical across thread counts and runs.
//!
//! ```
//! use num_complex::Complex64;
//! use torzeta::spectrum::{GeodesicClass, LengthSpectrum};
//! use torzeta::zeta::ZetaEvaluator;
//!
//! let spectrum = LengthSpectrum::new(
//!     vec![GeodesicClass::new(1.0, 0.0, 1).unwrap()],
//!     1.0,   // completeness radius
//!     10.0,  // counting constant
//!     None,  // volume unknown
//! ).unwrap();
//! let ev = ZetaEvaluator::new(&spectrum);
//! let v = ev.log_ruelle(0, Complex64::new(3.0, 0.0)).unwrap();
//! // One primitive of length 1, trivial twist: log(1 - e^{-3}).
//! assert!((v.value.re - (1.0 - (-3.0f64).exp()).ln()).abs() < 1e-15);
//! // The tail allows for primitives the tiny cutoff leaves unseen.
//! assert!(v.tail_bound.is_finite() && v.tail_bound > 0.0);
//! ```

pub mod algebra;
pub mod error;
pub mod numerics;
pub mod spectrum;
pub mod torsion;
pub mod trace;
pub mod zeta;

pub use error::{Error, Result};

// Every code block in the guide compiles and runs as a doctest, so the
// book cannot drift out of sync with the API it documents.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/length-spectra.md")]
    mod length_spectra {}
    #[doc = include_str!("../../../book/src/zeta-functions.md")]
    mod zeta_functions {}
    #[doc = include_str!("../../../book/src/representation-routes.md")]
    mod representation_routes {}
    #[doc = include_str!("../../../book/src/trace-identities.md")]
    mod trace_identities {}
    #[doc = include_str!("../../../book/src/torsion-and-volume.md")]
    mod torsion_and_volume {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics_design {}
}
