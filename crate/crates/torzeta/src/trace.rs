//! Heat-trace and resolvent identities on the spectral side.
//!
//! For a weight-k twist the heat trace splits into an identity
//! contribution, a closed form in the volume,
//!
//! ```text
//! identity_term(k, t, vol) = 2 vol (1 / 4 pi^2) sqrt(pi / t) (k^2/4 + 1/(2t)),
//! ```
//!
//! which is 2 vol times the Gaussian integral of the Plancherel polynomial
//! on the imaginary axis, plus a geometric sum over classes,
//!
//! ```text
//! hyperbolic(t) = sum w l0 lefschetz_sym(k; l, theta) e^{-l^2 / 4t} / sqrt(4 pi t),
//! ```
//!
//! with l0 the primitive length under the class. Two exact identities tie
//! this to the zeta side and are exposed as residuals:
//!
//! * the Gaussian transform
//!   `int_0^inf e^{-t s^2} e^{-l^2/4t} / sqrt(4 pi t) dt = e^{-s l} / (2 s)`,
//!   which converts each heat term into a zeta term, and
//! * the resolvent identity obtained by integrating the difference of two
//!   Gaussian dampings against the geometric heat term:
//!   `int_0^inf (e^{-t s^2} - e^{-t s0^2}) hyperbolic(t) dt
//!    = D(s)/(2s) - D(s0)/(2s0)` with
//!   `D(sigma) = sum w l0 lefschetz_sym e^{-sigma l}`.
//!
//! Residuals are measured with adaptive quadrature on a truncated t-domain
//! chosen so both truncation tails sit far below the comparison tolerance.

use crate::algebra::lefschetz_sym;
use crate::error::{Error, Result};
use crate::numerics::{integrate, sum_blocked};
use crate::spectrum::LengthSpectrum;
use std::f64::consts::PI;

/// ln(1e18), the relative scale targeted by truncation choices.
const LN_TARGET: f64 = 41.44653167389282;

/// One heat-trace evaluation. `total` is exactly
/// `identity_term + hyperbolic_term`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatEvaluation {
    pub t: f64,
    pub identity_term: f64,
    pub hyperbolic_term: f64,
    pub total: f64,
    /// Bound on the omitted geometric terms beyond the class cutoff.
    pub tail_bound: f64,
}

/// Geometric side of the heat trace with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricHeat {
    pub value: f64,
    pub tail_bound: f64,
}

/// Identity contribution to the weight-k heat trace at time t.
/// Requires t > 0 and volume > 0.
pub fn identity_term(k: i64, t: f64, volume: f64) -> f64 {
    debug_assert!(t > 0.0 && volume > 0.0);
    let k2 = (k * k) as f64;
    2.0 * volume / (4.0 * PI * PI) * (PI / t).sqrt() * (k2 / 4.0 + 1.0 / (2.0 * t))
}

/// Geometric heat term at time t: Gaussian-damped symmetrized Lefschetz
/// numbers over all classes up to a cutoff that pushes the kept-class
/// remainder below 1e-18 relative scale. The reported tail bounds the
/// classes beyond the cutoff through the counting invariant; it is itself
/// evaluated by quadrature with a generous error margin.
pub fn heat_geometric(spectrum: &LengthSpectrum, k: i64, t: f64) -> Result<GeometricHeat> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Invariant(format!(
            "heat time must be positive, got {t}"
        )));
    }
    let r = spectrum.cutoff();
    let l_heat = r.max(2.0 * (LN_TARGET * t).sqrt());
    let gauss_norm = 1.0 / (4.0 * PI * t).sqrt();
    let terms: Vec<f64> = spectrum
        .iterate_classes(l_heat)
        .map(|c| {
            let l0 = c.length / f64::from(c.power);
            c.weight
                * l0
                * lefschetz_sym(k, c.length, c.holonomy)
                * (-c.length * c.length / (4.0 * t)).exp()
                * gauss_norm
        })
        .collect();
    let value = sum_blocked(&terms);

    // Classes beyond l_heat. Class counting obeys
    // N_all(x) <= C_g e^{2x} (1 + (x / delta) e^{-x}): primitives directly,
    // higher powers through N(x/n) <= C_g e^x with at most x/delta such
    // powers. Each omitted term is bounded by
    // 2 x e^{-x} e^{-x^2/4t} / ((1 - e^{-l_heat})^2 sqrt(4 pi t)), and
    // partial integration against the counting bound gives the integral
    // below; the integrand majorizes |d/dx| of the term bound times N_all.
    let delta_eff = spectrum.systole().unwrap_or(r);
    let c_g = spectrum.growth_constant();
    let one_minus = -f64::exp_m1(-l_heat);
    let prefactor = 2.0 * c_g / (one_minus * one_minus) * gauss_norm;
    let x_star = 2.0 * t + 26.0 * t.sqrt() + 5.0;
    let tail_bound = if x_star > l_heat {
        let integrand = |x: f64| {
            x * (2.0 + x / (2.0 * t))
                * (x.exp() + x / delta_eff)
                * (-x * x / (4.0 * t)).exp()
        };
        let quad = integrate(
            integrand,
            l_heat,
            x_star,
            &[],
            1e-8,
            f64::MIN_POSITIVE,
            300,
        );
        // The bound integral itself is numeric; widen by its error estimate.
        prefactor * (quad.value + 10.0 * quad.error_estimate) + 1e-60
    } else {
        1e-60
    };
    Ok(GeometricHeat { value, tail_bound })
}

/// Full heat-trace evaluation: identity term plus geometric term. Volume
/// resolution: the argument, else the spectrum's stored volume, else an
/// error.
pub fn heat_trace(
    spectrum: &LengthSpectrum,
    k: i64,
    t: f64,
    volume: Option<f64>,
) -> Result<HeatEvaluation> {
    let vol = volume
        .or_else(|| spectrum.volume())
        .ok_or(Error::MissingVolume)?;
    // `!(a > b)` rather than `a <= b`: a NaN volume must take the error branch.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(vol > 0.0) {
        return Err(Error::Invariant(format!(
            "volume must be positive, got {vol}"
        )));
    }
    let identity = identity_term(k, t, vol);
    let geometric = heat_geometric(spectrum, k, t)?;
    Ok(HeatEvaluation {
        t,
        identity_term: identity,
        hyperbolic_term: geometric.value,
        total: identity + geometric.value,
        tail_bound: geometric.tail_bound,
    })
}

/// Absolute defect of the Gaussian transform
///
/// ```text
/// int_0^inf e^{-t s^2} e^{-l^2 / 4t} / sqrt(4 pi t) dt = e^{-s l} / (2 s)
/// ```
///
/// measured by adaptive quadrature at relative target 1e-10. The t-domain
/// is truncated where the integrand falls 20 decades under the value of
/// the right-hand side, so truncation cannot dominate the residual. The
/// integrand peaks at the saddle t = l / (2 s); that point and l^2/(4 s^2)
/// seed the panel subdivision.
pub fn gaussian_transform_residual(s: f64, length: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0 && length.is_finite() && length > 0.0) {
        return Err(Error::Invariant(format!(
            "gaussian transform requires s > 0 and length > 0, got s = {s}, length = {length}"
        )));
    }
    let closed = (-s * length).exp() / (2.0 * s);
    let t_lo = length * length / (4.0 * (s * length + 46.1));
    let t_hi = 3.0 * length / s + 92.2 / (s * s);
    let splits = [length / (2.0 * s), length * length / (4.0 * s * s)];
    let integrand =
        |t: f64| (-t * s * s - length * length / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
    let quad = integrate(
        integrand,
        t_lo,
        t_hi,
        &splits,
        1e-10,
        f64::MIN_POSITIVE,
        400,
    );
    if !quad.converged {
        return Err(Error::Quadrature(format!(
            "gaussian transform quadrature did not converge at s = {s}, length = {length} \
             (error estimate {})",
            quad.error_estimate
        )));
    }
    Ok((quad.value - closed).abs())
}

/// Absolute defect of the resolvent identity
///
/// ```text
/// int_0^inf (e^{-t s^2} - e^{-t s0^2}) hyperbolic(t) dt
///     = D(s) / (2 s) - D(s0) / (2 s0)
/// ```
///
/// with both sides restricted to the same truncated class set, so the
/// defect measures quadrature error alone. Requires s, s0 > 2 (the
/// abscissa of D); the empty spectrum yields 0 exactly.
pub fn resolvent_identity_residual(
    spectrum: &LengthSpectrum,
    k: i64,
    s: f64,
    s0: f64,
) -> Result<f64> {
    let low = s.min(s0);
    // `!(a > b)` rather than `a <= b`: a NaN input must take the error branch.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(low > 2.0) {
        return Err(Error::Divergence {
            context: format!("resolvent identity with k = {k}"),
            re_s: low,
            abscissa: 2.0,
        });
    }
    let Some(systole) = spectrum.systole() else {
        return Ok(0.0);
    };
    let l_res = spectrum.cutoff().max(LN_TARGET / low);
    let classes: Vec<(f64, f64)> = spectrum
        .iterate_classes(l_res)
        .map(|c| {
            let l0 = c.length / f64::from(c.power);
            (
                c.weight * l0 * lefschetz_sym(k, c.length, c.holonomy),
                c.length,
            )
        })
        .collect();
    let d_series = |sigma: f64| -> f64 {
        let terms: Vec<f64> = classes
            .iter()
            .map(|&(coef, l)| coef * (-sigma * l).exp())
            .collect();
        sum_blocked(&terms)
    };
    let closed = d_series(s) / (2.0 * s) - d_series(s0) / (2.0 * s0);

    // e^{-systole^2 / (4 t_lo)} = e^{-57.5} and e^{-t_hi low^2} = e^{-60}:
    // both t-tails are far below the 1e-6 scale this residual is held to.
    let t_lo = systole * systole / 230.0;
    let t_hi = 60.0 / (low * low);
    let splits: Vec<f64> = (1..8)
        .map(|i| t_lo * (t_hi / t_lo).powf(f64::from(i) / 8.0))
        .collect();
    let integrand = |t: f64| {
        let damp = (-t * s * s).exp() - (-t * s0 * s0).exp();
        if damp == 0.0 {
            return 0.0;
        }
        let gauss_norm = 1.0 / (4.0 * PI * t).sqrt();
        let mut heat = 0.0;
        for &(coef, l) in &classes {
            heat += coef * (-l * l / (4.0 * t)).exp();
        }
        damp * heat * gauss_norm
    };
    let quad = integrate(integrand, t_lo, t_hi, &splits, 1e-10, f64::MIN_POSITIVE, 600);
    if !quad.converged {
        return Err(Error::Quadrature(format!(
            "resolvent quadrature did not converge at k = {k}, s = {s}, s0 = {s0} \
             (error estimate {})",
            quad.error_estimate
        )));
    }
    Ok((quad.value - closed).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::GeodesicClass;

    fn single_class(length: f64, holonomy: f64) -> LengthSpectrum {
        LengthSpectrum::new(
            vec![GeodesicClass::new(length, holonomy, 1).unwrap()],
            length,
            10.0,
            None,
        )
        .unwrap()
    }

    #[test]
    fn identity_term_matches_the_closed_form_at_unit_arguments() {
        let got = identity_term(0, 1.0, 1.0);
        let want = PI.sqrt() / (4.0 * PI * PI);
        assert!((got - want).abs() < 1e-16, "got {got}, want {want}");
    }

    #[test]
    fn heat_total_is_the_exact_sum_of_its_parts() {
        let spec = single_class(1.0, 0.4);
        let h = heat_trace(&spec, 2, 0.7, Some(1.3)).unwrap();
        assert_eq!(h.total, h.identity_term + h.hyperbolic_term);
        assert!(h.tail_bound.is_finite() && h.tail_bound > 0.0);
    }

    #[test]
    fn gaussian_transform_residual_is_tiny() {
        let r = gaussian_transform_residual(2.0, 1.0).unwrap();
        assert!(r < 1e-11, "residual {r}");
        let r = gaussian_transform_residual(10.0, 5.0).unwrap();
        assert!(r < 1e-11, "residual {r}");
    }

    #[test]
    fn resolvent_residual_vanishes_on_the_empty_spectrum() {
        let spec = LengthSpectrum::new(Vec::new(), 2.0, 10.0, None).unwrap();
        assert_eq!(resolvent_identity_residual(&spec, 0, 3.0, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn resolvent_residual_is_quadrature_noise_for_one_class() {
        let spec = single_class(1.0, 2.0);
        let r = resolvent_identity_residual(&spec, 2, 3.0, 4.0).unwrap();
        assert!(r < 1e-9, "residual {r}");
    }

    #[test]
    fn resolvent_requires_arguments_beyond_the_abscissa() {
        let spec = single_class(1.0, 0.0);
        assert!(resolvent_identity_residual(&spec, 0, 2.0, 4.0).is_err());
    }
}
