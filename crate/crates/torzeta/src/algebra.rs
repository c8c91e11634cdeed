//! Representation-theoretic kernel: torus characters, the adjoint
//! denominator, Lefschetz numbers, Plancherel polynomials, Casimir
//! eigenvalues, and the exact Weyl bookkeeping behind the
//! Selberg-factorization of representation-twisted Ruelle values.
//!
//! Conventions. A loxodromic class acts on the negative nilpotent part of
//! the Lie algebra with eigenvalues e^{-l + 2i theta} and e^{-l - 2i theta},
//! so
//!
//! ```text
//! adjoint_det(l, theta) = det(1 - Ad restricted) = |1 - e^{-l + 2i theta}|^2
//!                       = (1 - e^{-l})^2 + 4 e^{-l} sin^2(theta) > 0.
//! ```
//!
//! The unitary-dual parameter is an integer weight k (character
//! sigma_k: theta -> e^{i k theta}); finite-dimensional twists are
//! parameterized by highest weights (m, n) of the complexified group, with
//! restricted character
//!
//! ```text
//! char_tau(m, n; l, theta) =
//!     (sum_{j=0..m} e^{i (m-2j) theta} e^{(m/2 - j) l})
//!   * (sum_{j=0..n} e^{-i (n-2j) theta} e^{(n/2 - j) l}).
//! ```
//!
//! [`weyl_data`] returns the four (weight, shift, sign) triples through
//! which adjoint_det * char_tau collapses to a four-term exponential sum
//! ([`kostant_residual`] measures the collapse numerically), and through
//! which a representation-twisted Ruelle value factors into four Selberg
//! values. Shifts and Casimir eigenvalues are kept as exact rationals.

use num_complex::Complex64;
use num_rational::Ratio;

/// Exact rational with small integer parts; shifts are half-integers.
pub type Rational = Ratio<i64>;

/// Converts an exact shift to f64. Numerators stay far below 2^53, so the
/// conversion is a single rounding.
pub fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Character value of the weight-k torus character: e^{i k theta}.
pub fn character(k: i64, theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, k as f64 * theta)
}

/// det(1 - Ad(m a)) on the contracting nilpotent part, in the
/// cancellation-free form (1 - e^{-l})^2 + 4 e^{-l} sin^2(theta).
/// Strictly positive for length > 0.
pub fn adjoint_det(length: f64, theta: f64) -> f64 {
    let one_minus = -f64::exp_m1(-length);
    let s = theta.sin();
    one_minus * one_minus + 4.0 * (-length).exp() * s * s
}

/// Lefschetz number of a class against sigma_k:
/// e^{i k theta} e^{-l} / adjoint_det(l, theta).
pub fn lefschetz_l(k: i64, length: f64, theta: f64) -> Complex64 {
    character(k, theta) * (-length).exp() / adjoint_det(length, theta)
}

/// Symmetrized Lefschetz number, lefschetz_l(k) + lefschetz_l(-k):
/// 2 cos(k theta) e^{-l} / adjoint_det(l, theta). Real by construction.
pub fn lefschetz_sym(k: i64, length: f64, theta: f64) -> f64 {
    2.0 * (k as f64 * theta).cos() * (-length).exp() / adjoint_det(length, theta)
}

/// Plancherel polynomial of sigma_k: (1 / 4 pi^2) (k^2 / 4 - z^2).
pub fn plancherel(k: i64, z: Complex64) -> Complex64 {
    let k2 = (k * k) as f64;
    (Complex64::new(k2 / 4.0, 0.0) - z * z) / (4.0 * std::f64::consts::PI.powi(2))
}

/// Spectral-shift constant of sigma_l: c(sigma_l) = l^2/4 - 1, exactly.
pub fn c_const(l: i64) -> Rational {
    Rational::new(l * l - 4, 4)
}

/// Casimir eigenvalue of the (m, n) twist: (m(m+2) + n(n+2)) / 2, exactly.
pub fn casimir(m: u32, n: u32) -> Rational {
    let m = i64::from(m);
    let n = i64::from(n);
    Rational::new(m * (m + 2) + n * (n + 2), 2)
}

/// One Weyl-element contribution: boundary weight q, exact spectral shift
/// lambda, and the parity sign of the element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeylDatum {
    pub q: i64,
    pub lambda: Rational,
    pub sign: i64,
}

/// The four (q, lambda, sign) triples attached to the (m, n) twist, in the
/// fixed order below. Signs are (-1)^{length(w)}: +1 on the two inner
/// elements, -1 on the two outer ones.
///
/// Exact invariant, for every datum: lambda^2 + c(sigma_q) = casimir(m, n).
pub fn weyl_data(m: u32, n: u32) -> [WeylDatum; 4] {
    let m = i64::from(m);
    let n = i64::from(n);
    [
        WeylDatum {
            q: m - n,
            lambda: Rational::new(m + n + 2, 2),
            sign: 1,
        },
        WeylDatum {
            q: n - m,
            lambda: Rational::new(-(m + n + 2), 2),
            sign: 1,
        },
        WeylDatum {
            q: -(m + n + 2),
            lambda: Rational::new(n - m, 2),
            sign: -1,
        },
        WeylDatum {
            q: m + n + 2,
            lambda: Rational::new(m - n, 2),
            sign: -1,
        },
    ]
}

/// Decomposition of the m-th symmetric-power twist restricted to the
/// parabolic data: pairs (weight, shift) = (m - 2j, (m - 2j)/2) for
/// j = 0..=m. A Ruelle value twisted by this representation is the sum of
/// weight-(m - 2j) Ruelle values evaluated at s shifted by -(m - 2j)/2.
pub fn sym_power_restriction(m: u32) -> Vec<(i64, Rational)> {
    let m = i64::from(m);
    (0..=m).map(|j| (m - 2 * j, Rational::new(m - 2 * j, 2))).collect()
}

/// Restricted character of the (m, n) twist on the class (l, theta).
/// Bounded by (m+1)(n+1) e^{(m+n) l / 2}.
pub fn char_tau(m: u32, n: u32, length: f64, theta: f64) -> Complex64 {
    let factor = |deg: u32, orientation: f64| -> Complex64 {
        let d = i64::from(deg);
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..=d {
            let weight = (d - 2 * j) as f64;
            sum += Complex64::from_polar((weight * length / 2.0).exp(), orientation * weight * theta);
        }
        sum
    };
    factor(m, 1.0) * factor(n, -1.0)
}

/// Absolute defect of the four-term exponential collapse:
///
/// ```text
/// | adjoint_det(l, theta) * char_tau(m, n; l, theta)
///   - sum over weyl_data of sign * e^{i q theta} * e^{(lambda - 1) l} |.
/// ```
///
/// The identity is exact; the returned value is floating-point noise,
/// below 1e-12 * (1 + |lhs|) throughout (m, n) <= (8, 8) and moderate l.
pub fn kostant_residual(m: u32, n: u32, length: f64, theta: f64) -> f64 {
    let lhs = adjoint_det(length, theta) * char_tau(m, n, length, theta);
    let mut rhs = Complex64::new(0.0, 0.0);
    for datum in weyl_data(m, n) {
        let growth = ((rational_to_f64(datum.lambda) - 1.0) * length).exp();
        rhs += datum.sign as f64 * character(datum.q, theta) * growth;
    }
    (lhs - rhs).norm()
}
