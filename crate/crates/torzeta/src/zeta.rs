//! Twisted Ruelle and Selberg zeta values as absolutely convergent
//! geodesic series, with certified truncation tails.
//!
//! Everything here is a logarithm. For a weight-k character twist the two
//! defining series over nontrivial conjugacy classes (primitive classes
//! gamma0 at every power n >= 1, class length l = n l0, class holonomy
//! theta = n theta0) are
//!
//! ```text
//! log R(s, sigma_k) = - sum (w / n) e^{i k theta} e^{-s l}
//! log Z(s, sigma_k) = - sum (w / n) e^{i k theta} e^{-(s+1) l} / adjoint_det(l, theta)
//! ```
//!
//! where w is the multiplicity of the primitive class. Both converge
//! absolutely for Re(s) > 2 under the counting bound
//! counting(x) <= C_g e^{2x}; a certified override of the growth exponent
//! moves every abscissa accordingly.
//!
//! Representation twists by a highest weight (m, n) replace the character
//! with [`crate::algebra::char_tau`]. Three independent evaluation routes
//! are exposed: the direct series, a sum of character-twisted Ruelle values
//! at shifted arguments (symmetric powers, n = 0 only), and a signed sum of
//! four Selberg values at the [`crate::algebra::weyl_data`] shifts. All
//! three agree term by term; the only differences are truncation tails.
//!
//! Every value carries a `tail_bound`: a rigorous bound on the modulus of
//! the omitted part of the series, combining (a) classes of primitives
//! beyond the completeness radius, bounded through the counting invariant,
//! and (b) powers of kept primitives beyond the power cutoff, bounded by a
//! geometric tail. Power cutoffs are chosen so contribution (b) is below
//! the 1e-18 scale of double rounding.
//!
//! Evaluation order is fixed: terms are generated in
//! [`LengthSpectrum::iterate_classes`] order and summed with a fixed-shape
//! blocked compensated reduction, so results are bit-identical for every
//! thread count.

use crate::algebra::{adjoint_det, char_tau, character, rational_to_f64, sym_power_restriction, weyl_data};
use crate::error::{Error, Result};
use crate::numerics::sum_blocked_complex;
use crate::spectrum::LengthSpectrum;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Reported tail bounds never drop below this floor; it absorbs
/// floating-point underflow in the bound arithmetic itself.
pub const TAIL_FLOOR: f64 = 1e-280;

/// ln(1e18): power cutoffs push the geometric power tail below the scale
/// of double rounding relative to the leading term.
const LN_POWER_TARGET: f64 = 41.44653167389282;

/// A logarithmic zeta value with a certified truncation tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedValue {
    /// Truncated value of the defining log series.
    pub value: Complex64,
    /// Rigorous bound on the modulus of the omitted part.
    pub tail_bound: f64,
    /// Abscissa of absolute convergence enforced for this evaluation;
    /// Re(s) was strictly greater.
    pub abscissa: f64,
}

/// A positive magnitude (a zeta modulus) with an error bound on its log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedMagnitude {
    /// The magnitude itself.
    pub value: f64,
    /// Bound on the absolute error of log(value); the relative error of
    /// `value` is at most exp(tail_bound) - 1.
    pub tail_bound: f64,
}

/// Residual of a closed-form identity together with the truncation
/// allowance the comparison is entitled to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    /// |lhs - rhs| of the identity, both sides truncated.
    pub residual: f64,
    /// Sum of the tail bounds of every series involved.
    pub tail_allowance: f64,
}

/// Selector for [`ZetaEvaluator::evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaKind {
    /// log R(s, sigma_k).
    Ruelle { k: i64 },
    /// log Z(s, sigma_k).
    Selberg { k: i64 },
    /// log Z(s, sigma_k + sigma_{-k}), the sum of the two weight twists.
    SelbergSym { k: i64 },
    /// log R(s, tau_{m,n}) by the direct series.
    RuelleRep { m: u32, n: u32 },
}

/// Internal series dispatch: which numerator rides on e^{-s l}.
#[derive(Debug, Clone, Copy)]
enum SeriesKind {
    Ruelle { k: i64 },
    Selberg { k: i64 },
    RepDirect { m: u32, n: u32 },
}

impl SeriesKind {
    /// Extra exponential decay (+) or growth (-) of the numerator, so the
    /// effective decay rate is Re(s) + shift.
    fn decay_shift(self) -> f64 {
        match self {
            SeriesKind::Ruelle { .. } => 0.0,
            SeriesKind::Selberg { .. } => 1.0,
            SeriesKind::RepDirect { m, n } => -(f64::from(m + n)) / 2.0,
        }
    }

    /// Abscissa in excess of the growth exponent.
    fn abscissa_offset(self) -> f64 {
        match self {
            SeriesKind::Ruelle { .. } | SeriesKind::Selberg { .. } => 0.0,
            SeriesKind::RepDirect { m, n } => f64::from(m + n) / 2.0,
        }
    }

    fn context(self) -> String {
        match self {
            SeriesKind::Ruelle { k } => format!("ruelle series with k = {k}"),
            SeriesKind::Selberg { k } => format!("selberg series with k = {k}"),
            SeriesKind::RepDirect { m, n } => {
                format!("representation-twisted series with (m, n) = ({m}, {n})")
            }
        }
    }

    /// Bound on the numerator modulus after factoring out e^{-shift * l},
    /// valid for class lengths >= floor.
    fn amplitude(self, length_floor: f64) -> f64 {
        match self {
            SeriesKind::Ruelle { .. } => 1.0,
            SeriesKind::Selberg { .. } => {
                let one_minus = -f64::exp_m1(-length_floor);
                1.0 / (one_minus * one_minus)
            }
            SeriesKind::RepDirect { m, n } => f64::from((m + 1) * (n + 1)),
        }
    }
}

/// Series evaluator bound to one spectrum and one certified growth
/// exponent.
#[derive(Debug, Clone, Copy)]
pub struct ZetaEvaluator<'a> {
    spectrum: &'a LengthSpectrum,
    exponent: f64,
}

impl<'a> ZetaEvaluator<'a> {
    /// Evaluator under the standard counting bound
    /// counting(x) <= C_g e^{2x}.
    pub fn new(spectrum: &'a LengthSpectrum) -> Self {
        Self {
            spectrum,
            exponent: 2.0,
        }
    }

    /// Evaluator under a caller-certified bound
    /// counting(x) <= C_g e^{exponent * x}. The claim is re-checked against
    /// the stored entries at every jump of the counting function; each
    /// abscissa below moves from 2 to the certified exponent.
    pub fn with_certified_exponent(spectrum: &'a LengthSpectrum, exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::Invariant(format!(
                "growth exponent must be positive, got {exponent}"
            )));
        }
        let c_g = spectrum.growth_constant();
        let mut running = 0u64;
        for e in spectrum.entries() {
            running += u64::from(e.multiplicity());
            let allowed = c_g * (exponent * e.length()).exp();
            if running as f64 > allowed * (1.0 + 1e-9) {
                return Err(Error::Invariant(format!(
                    "certified exponent {exponent} fails at x = {}: counting = {running} \
                     exceeds {c_g} * e^({exponent} x)",
                    e.length()
                )));
            }
        }
        Ok(Self { spectrum, exponent })
    }

    pub fn spectrum(&self) -> &LengthSpectrum {
        self.spectrum
    }

    /// The growth exponent in force (2 unless certified otherwise).
    pub fn growth_exponent(&self) -> f64 {
        self.exponent
    }

    /// Dispatches on a [`ZetaKind`] tag.
    pub fn evaluate(&self, kind: ZetaKind, s: Complex64) -> Result<BoundedValue> {
        match kind {
            ZetaKind::Ruelle { k } => self.log_ruelle(k, s),
            ZetaKind::Selberg { k } => self.log_selberg(k, s),
            ZetaKind::SelbergSym { k } => self.log_selberg_sym(k, s),
            ZetaKind::RuelleRep { m, n } => self.log_ruelle_rep_direct(m, n, s),
        }
    }

    /// log R(s, sigma_k). Requires Re(s) > growth exponent.
    pub fn log_ruelle(&self, k: i64, s: Complex64) -> Result<BoundedValue> {
        self.series(SeriesKind::Ruelle { k }, s)
    }

    /// log Z(s, sigma_k). Requires Re(s) > growth exponent.
    pub fn log_selberg(&self, k: i64, s: Complex64) -> Result<BoundedValue> {
        self.series(SeriesKind::Selberg { k }, s)
    }

    /// log Z(s, sigma_k + sigma_{-k}) = log Z(s, sigma_k) + log Z(s, sigma_{-k}).
    /// For k = 0 this is twice the weight-0 value.
    pub fn log_selberg_sym(&self, k: i64, s: Complex64) -> Result<BoundedValue> {
        let plus = self.log_selberg(k, s)?;
        let minus = self.log_selberg(-k, s)?;
        Ok(BoundedValue {
            value: plus.value + minus.value,
            tail_bound: plus.tail_bound + minus.tail_bound,
            abscissa: plus.abscissa,
        })
    }

    /// log R(s, tau_{m,n}) by the direct char_tau series.
    /// Requires Re(s) > growth exponent + (m + n)/2.
    pub fn log_ruelle_rep_direct(&self, m: u32, n: u32, s: Complex64) -> Result<BoundedValue> {
        self.series(SeriesKind::RepDirect { m, n }, s)
    }

    /// log R(s, tau_{m,0}) as the sum of character-twisted Ruelle values at
    /// shifted arguments: for each (q, nu) in the symmetric-power
    /// restriction, one term log R(s - nu, sigma_q). Requires
    /// Re(s) > growth exponent + m/2 so the widest shift still converges.
    pub fn log_ruelle_rep_chars(&self, m: u32, s: Complex64) -> Result<BoundedValue> {
        let abscissa = self.exponent + f64::from(m) / 2.0;
        // `!(a > b)` rather than `a <= b`: a NaN input must take the error branch.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(s.re > abscissa) {
            return Err(Error::Divergence {
                context: format!("character-shift route with m = {m}"),
                re_s: s.re,
                abscissa,
            });
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut tail = 0.0;
        for (q, nu) in sym_power_restriction(m) {
            let part = self.log_ruelle(q, s - rational_to_f64(nu))?;
            value += part.value;
            tail += part.tail_bound;
        }
        Ok(BoundedValue {
            value,
            tail_bound: tail,
            abscissa,
        })
    }

    /// log R(s, tau_{m,n}) as the signed sum of four Selberg values at the
    /// Weyl shifts: sum of sign * log Z(s - lambda, sigma_q) over
    /// weyl_data(m, n). Requires Re(s) > growth exponent + (m + n)/2 + 1.
    pub fn log_ruelle_rep_selberg(&self, m: u32, n: u32, s: Complex64) -> Result<BoundedValue> {
        let abscissa = self.exponent + f64::from(m + n) / 2.0 + 1.0;
        // `!(a > b)` rather than `a <= b`: a NaN input must take the error branch.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(s.re > abscissa) {
            return Err(Error::Divergence {
                context: format!("factorization route with (m, n) = ({m}, {n})"),
                re_s: s.re,
                abscissa,
            });
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut tail = 0.0;
        for datum in weyl_data(m, n) {
            let part = self.log_selberg(datum.q, s - rational_to_f64(datum.lambda))?;
            value += datum.sign as f64 * part.value;
            tail += part.tail_bound;
        }
        Ok(BoundedValue {
            value,
            tail_bound: tail,
            abscissa,
        })
    }

    /// Residual of the character-level factorization
    ///
    /// ```text
    /// log R(s, sigma_k) = log Z(s+1, sigma_k) + log Z(s-1, sigma_k)
    ///                   - log Z(s, sigma_{k+2}) - log Z(s, sigma_{k-2})
    /// ```
    ///
    /// which holds term by term in the defining series. Requires
    /// Re(s) > growth exponent + 1 so the s - 1 factor converges. The
    /// residual is bounded by the reported allowance plus accumulated
    /// rounding (about 1e-12 at moderate values).
    pub fn ruelle_selberg_residual(&self, k: i64, s: Complex64) -> Result<IdentityResidual> {
        let abscissa = self.exponent + 1.0;
        // `!(a > b)` rather than `a <= b`: a NaN input must take the error branch.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(s.re > abscissa) {
            return Err(Error::Divergence {
                context: format!("factorization residual with k = {k}"),
                re_s: s.re,
                abscissa,
            });
        }
        let direct = self.log_ruelle(k, s)?;
        let z_up = self.log_selberg(k, s + 1.0)?;
        let z_down = self.log_selberg(k, s - 1.0)?;
        let z_twist_up = self.log_selberg(k + 2, s)?;
        let z_twist_down = self.log_selberg(k - 2, s)?;
        let combined = z_up.value + z_down.value - z_twist_up.value - z_twist_down.value;
        Ok(IdentityResidual {
            residual: (direct.value - combined).norm(),
            tail_allowance: direct.tail_bound
                + z_up.tail_bound
                + z_down.tail_bound
                + z_twist_up.tail_bound
                + z_twist_down.tail_bound,
        })
    }

    /// |R(-s, sigma_k)| through the modulus form of the functional
    /// equation, |R(-s)| = exp(-4 vol Re(s) / pi) |R(s)|, with |R(s)| from
    /// the series. The phase of R(-s) is outside the scope of this crate.
    /// Volume resolution: the argument, else the spectrum's stored volume,
    /// else an error.
    pub fn ruelle_modulus_negated(
        &self,
        k: i64,
        s: Complex64,
        volume: Option<f64>,
    ) -> Result<BoundedMagnitude> {
        let vol = self.resolve_volume(volume)?;
        let base = self.log_ruelle(k, s)?;
        let log_modulus = -4.0 * vol * s.re / PI + base.value.re;
        Ok(BoundedMagnitude {
            value: log_modulus.exp(),
            tail_bound: base.tail_bound,
        })
    }

    /// |Z(-s, sigma_k)| through the modulus form of the functional
    /// equation,
    ///
    /// ```text
    /// |Z(-s)| = exp((vol / pi) Re(k^2 s / 4 - s^3 / 3)) |Z(s)|,
    /// ```
    ///
    /// the exponent being 4 pi vol times the integral of the Plancherel
    /// polynomial of sigma_k from 0 to s.
    pub fn selberg_modulus_negated(
        &self,
        k: i64,
        s: Complex64,
        volume: Option<f64>,
    ) -> Result<BoundedMagnitude> {
        let vol = self.resolve_volume(volume)?;
        let base = self.log_selberg(k, s)?;
        let poly = s * ((k * k) as f64) / 4.0 - s * s * s / 3.0;
        let log_modulus = vol / PI * poly.re + base.value.re;
        Ok(BoundedMagnitude {
            value: log_modulus.exp(),
            tail_bound: base.tail_bound,
        })
    }

    fn resolve_volume(&self, volume: Option<f64>) -> Result<f64> {
        volume
            .or_else(|| self.spectrum.volume())
            .ok_or(Error::MissingVolume)
    }

    /// Core series evaluation with tail certification.
    fn series(&self, kind: SeriesKind, s: Complex64) -> Result<BoundedValue> {
        let a = self.exponent;
        let abscissa = a + kind.abscissa_offset();
        // `!(a > b)` rather than `a <= b`: a NaN input must take the error branch.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(s.re > abscissa) {
            return Err(Error::Divergence {
                context: kind.context(),
                re_s: s.re,
                abscissa,
            });
        }
        let a_eff = s.re + kind.decay_shift();
        let r = self.spectrum.cutoff();
        // Power cutoff: far enough that the geometric power tail sits below
        // 1e-18 relative to a unit term, never below the completeness radius.
        let cutoff_amp = kind.amplitude(r).ln().max(0.0);
        let l_pow = r.max((LN_POWER_TARGET + cutoff_amp) / a_eff);

        let terms: Vec<Complex64> = self
            .spectrum
            .iterate_classes(l_pow)
            .map(|t| {
                let numerator = match kind {
                    SeriesKind::Ruelle { k } => character(k, t.holonomy),
                    SeriesKind::Selberg { k } => {
                        character(k, t.holonomy) * (-t.length).exp()
                            / adjoint_det(t.length, t.holonomy)
                    }
                    SeriesKind::RepDirect { m, n } => char_tau(m, n, t.length, t.holonomy),
                };
                numerator * (-s * t.length).exp() * (-t.weight / f64::from(t.power))
            })
            .collect();
        let value = sum_blocked_complex(&terms);

        // Unknown primitives beyond the completeness radius: per primitive,
        // sum over powers is geometric with ratio e^{-a_eff l0} <= e^{-a_eff R};
        // the primitive sum is bounded through the counting invariant by
        // partial integration of e^{-a_eff x} against the counting function.
        let gap = a_eff - a;
        let c_g = self.spectrum.growth_constant();
        let beyond = kind.amplitude(r) / (1.0 - (-a_eff * r).exp())
            * a_eff
            * c_g
            * (-gap * r).exp()
            / gap;
        // Omitted powers of kept primitives: geometric tails past l_pow.
        let power_amp = kind.amplitude(l_pow);
        let mut tail = beyond;
        for e in self.spectrum.entries() {
            let n0 = LengthSpectrum::max_power(e.length(), l_pow);
            let x = (-a_eff * e.length()).exp();
            let first_omitted = (-a_eff * ((n0 + 1) as f64) * e.length()).exp();
            tail += f64::from(e.multiplicity()) * power_amp * first_omitted
                / (((n0 + 1) as f64) * (1.0 - x));
        }
        Ok(BoundedValue {
            value,
            tail_bound: tail.max(TAIL_FLOOR),
            abscissa,
        })
    }
}
