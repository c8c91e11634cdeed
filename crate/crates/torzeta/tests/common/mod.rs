//! Shared fixtures and independent oracles for the integration tests.
//!
//! The frozen constants below are 40-digit evaluations of the defining
//! series (explicit power loops per primitive, summed in extended
//! precision), rounded to f64. They are independent of every code path in
//! the crate: any regression in term generation, summation, or
//! representation bookkeeping shows up as a mismatch here.

#![allow(dead_code)]
// The frozen constants keep every digit of the oracle output on purpose.
#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use torzeta::spectrum::{reduce_holonomy, GeodesicClass, LengthSpectrum};

/// Reference spectrum with three primitives, one of multiplicity 2.
pub fn three_primitive_spectrum() -> LengthSpectrum {
    LengthSpectrum::new(
        vec![
            GeodesicClass::new(1.0, 0.7, 1).unwrap(),
            GeodesicClass::new(1.3, 2.1, 2).unwrap(),
            GeodesicClass::new(2.2, 5.9, 1).unwrap(),
        ],
        2.5,
        10.0,
        None,
    )
    .unwrap()
}

/// log R(3.5, sigma_3) on the reference spectrum.
pub const FROZEN_RUELLE_35_K3: (f64, f64) =
    (-5.969411127534040718060104e-3, -2.561543251513569715615883e-2);

/// log R(4 + 2i, sigma_{-2}) on the reference spectrum.
pub const FROZEN_RUELLE_4P2I_KM2: (f64, f64) =
    (8.088246666375291544747592e-3, 8.077449642457782392160688e-4);

/// log Z(3.5, sigma_0) on the reference spectrum.
pub const FROZEN_SELBERG_35_K0: (f64, f64) = (-1.540493713775819242936091e-2, 0.0);

/// log Z(4 + 2i, sigma_1) on the reference spectrum.
pub const FROZEN_SELBERG_4P2I_K1: (f64, f64) =
    (-3.738264307568314121057098e-3, 7.492281928630757952428547e-3);

/// log R(5.5, tau_{1,1}) on the reference spectrum (real: the (1,1)
/// character is a squared modulus).
pub const FROZEN_REP_11_55: (f64, f64) = (-1.876417315176024900154079e-2, 0.0);

/// log R(6, tau_{2,0}) on the reference spectrum.
pub const FROZEN_REP_20_6: (f64, f64) =
    (-3.009064357784149405981182e-3, -3.313078370609772739404819e-3);

/// log(1 - e^{-3}): single class of length 1, trivial twist, s = 3.
pub const LOG_ONE_MINUS_E3: f64 = -5.106918094270158653872374e-2;

/// Single class of length 1, trivial twist, Selberg log at s = 3
/// (the double sum over powers and symmetric degrees).
pub const SINGLE_SELBERG_S3: f64 = -4.606428328780049355707679e-2;

/// 6 / pi - log(1 - e^{-3}): even torsion ratio at m = 3 for one class
/// (length 1, holonomy 0, volume 1).
pub const SINGLE_TORSION_EVEN_M3: f64 = 1.960928498045445615765329;

/// 5 / pi - log(1 + e^{-5/2}): odd torsion ratio at m = 2 for one class
/// (length 1, holonomy pi, volume 1).
pub const SINGLE_TORSION_ODD_M2: f64 = 1.512659696626403734344794;

pub fn cplx(pair: (f64, f64)) -> Complex64 {
    Complex64::new(pair.0, pair.1)
}

/// Independent Ruelle oracle: the power sum per primitive resums to a
/// principal logarithm, log R(s, sigma_k) = sum over primitives of
/// w log(1 - e^{i k theta0} e^{-s l0}). Covers all powers; differences
/// against the evaluator are bounded by its reported tail.
pub fn oracle_log_ruelle(spectrum: &LengthSpectrum, k: i64, s: Complex64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for e in spectrum.entries() {
        let z = Complex64::from_polar(1.0, k as f64 * e.holonomy()) * (-s * e.length()).exp();
        total += f64::from(e.multiplicity()) * (Complex64::new(1.0, 0.0) - z).ln();
    }
    total
}

/// Independent Selberg oracle from the product definition: per primitive,
/// the symmetric powers of the contracting adjoint action contribute
/// eigenvalue branches indexed by total degree d and split j,
///
/// ```text
/// log Z(s, sigma_k) = sum_prim w sum_{d >= 0} sum_{j = 0..d}
///     log(1 - e^{i (k + 2d - 4j) theta0} e^{-(s + 1 + d) l0}).
/// ```
///
/// Degrees are cut when a branch bound falls under 1e-22.
pub fn oracle_log_selberg(spectrum: &LengthSpectrum, k: i64, s: Complex64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for e in spectrum.entries() {
        let l0 = e.length();
        let w = f64::from(e.multiplicity());
        let mut d: i64 = 0;
        loop {
            let branch_scale = ((d + 1) as f64) * (-(s.re + 1.0 + d as f64) * l0).exp();
            if branch_scale < 1e-22 {
                break;
            }
            for j in 0..=d {
                let phase = (k + 2 * d - 4 * j) as f64 * e.holonomy();
                let z = Complex64::from_polar(1.0, phase)
                    * (-(s + 1.0 + d as f64) * l0).exp();
                total += w * (Complex64::new(1.0, 0.0) - z).ln();
            }
            d += 1;
        }
    }
    total
}

/// Brute-force class enumeration: every power of every primitive up to the
/// limit, sorted by (length, power, holonomy, primitive position). This is
/// the order [`LengthSpectrum::iterate_classes`] promises.
pub fn oracle_enumerate(
    spectrum: &LengthSpectrum,
    limit: f64,
) -> Vec<(f64, f64, u32, f64)> {
    let mut out: Vec<(usize, f64, f64, u32, f64)> = Vec::new();
    for (idx, e) in spectrum.entries().iter().enumerate() {
        let top = LengthSpectrum::max_power(e.length(), limit);
        for n in 1..=top {
            let length = n as f64 * e.length();
            out.push((
                idx,
                length,
                reduce_holonomy(n as f64 * e.holonomy()),
                n as u32,
                f64::from(e.multiplicity()),
            ));
        }
    }
    out.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.3.cmp(&b.3))
            .then(a.2.total_cmp(&b.2))
            .then(a.0.cmp(&b.0))
    });
    out.into_iter().map(|(_, l, th, n, w)| (l, th, n, w)).collect()
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want}, |diff| = {} > {tol}",
        (got - want).abs()
    );
}

pub fn assert_close_c(got: Complex64, want: Complex64, tol: f64, what: &str) {
    assert!(
        (got - want).norm() <= tol,
        "{what}: got {got}, want {want}, |diff| = {} > {tol}",
        (got - want).norm()
    );
}
