//! Analytic-torsion ratios along the two strongly acyclic twist families,
//! their geodesic remainders, a summability certificate for those
//! remainders, and asymptotic volume recovery.
//!
//! For the even family of twists, indexed M = 2m, the log ratio of
//! torsions against the base twist M = 4 has the closed decomposition
//!
//! ```text
//! ratio(m) = (vol / pi) (m (m + 1) - 6)
//!          - sum_{k=3..m} Re log R(k, sigma_{2k})        (m >= 2)
//! ```
//!
//! and for the odd family, indexed M = 2m + 1 against the base M = 3,
//!
//! ```text
//! ratio(m) = (vol / pi) (m (m + 2) - 3)
//!          - sum_{k=2..m} Re log R(k + 1/2, sigma_{2k+1}) (m >= 1).
//! ```
//!
//! Each Ruelle argument sits beyond the abscissa (k >= 3, resp.
//! k + 1/2 >= 5/2), so every remainder is an absolutely convergent series
//! with a certified tail. In both families
//!
//! ```text
//! ratio(m) = (vol / 4 pi) M^2 + (vol / 2 pi) M + const(parity) - remainders,
//! ```
//!
//! so the ratios grow like (vol / 4 pi) M^2 and the volume is recoverable
//! as 4 pi times the quadratic coefficient of a least-squares fit; the
//! remainder sums converge, keeping the fit residuals bounded.

use crate::error::{Error, Result};
use crate::numerics::sum_blocked;
use crate::zeta::ZetaEvaluator;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Twist-family parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Index M of the base twist the ratios are taken against.
    pub fn base_index(self) -> u32 {
        match self {
            Parity::Even => 4,
            Parity::Odd => 3,
        }
    }

    /// First m carrying a remainder term.
    fn first_m(self) -> u32 {
        match self {
            Parity::Even => 3,
            Parity::Odd => 2,
        }
    }

    /// Twist index M for the row at m.
    pub fn index(self, m: u32) -> u32 {
        match self {
            Parity::Even => 2 * m,
            Parity::Odd => 2 * m + 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One row of a torsion-ratio table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorsionRow {
    /// Family parameter of the row.
    pub m: u32,
    /// Twist index M = 2m (even) or 2m + 1 (odd).
    pub index: u32,
    /// Polynomial increment from the previous row:
    /// (vol / pi) 2m even, (vol / pi) (2m + 1) odd.
    pub poly_increment: f64,
    /// Geodesic remainder Re log R at this row's argument.
    pub remainder: f64,
    /// Truncation tail of that remainder series.
    pub remainder_tail: f64,
    /// Log torsion ratio against the base twist. Exactly
    /// previous cumulative + poly_increment - remainder.
    pub cumulative: f64,
    /// Accumulated remainder tails.
    pub cumulative_tail: f64,
}

/// Torsion-ratio table for one parity.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionSeries {
    pub parity: Parity,
    /// Index of the base twist: 4 (even) or 3 (odd).
    pub base_index: u32,
    pub volume: f64,
    /// Rows for m = 3..=max_m (even) or 2..=max_m (odd); the base row
    /// before them has cumulative 0 by definition.
    pub rows: Vec<TorsionRow>,
}

/// Summability certificate for the torsion remainders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderCertificate {
    /// Sum of |remainder| over the checked range.
    pub sum_abs: f64,
    /// C1 * |log R at the family's base argument, trivial twist| with
    /// C1 = (1 - e^{-systole})^{-1}.
    pub bound: f64,
    /// Truncation allowance of both sides.
    pub tail_allowance: f64,
    /// sum_abs <= bound + tail_allowance + 1e-12.
    pub pass: bool,
}

/// Parity selection for [`fit_volume`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityChoice {
    Even,
    Odd,
    Both,
}

/// Least-squares recovery of the volume from torsion-ratio growth.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeFit {
    /// Coefficient of M^2.
    pub slope: f64,
    /// Intercept (the even-family intercept when both parities are used).
    pub intercept: f64,
    /// Odd-family intercept when both parities are used.
    pub intercept_odd: Option<f64>,
    /// Coefficient of M.
    pub linear_coefficient: f64,
    /// 4 pi * slope.
    pub recovered_volume: f64,
    pub injected_volume: f64,
    /// |recovered - injected| / injected.
    pub rel_error: f64,
    /// Inclusive twist-index range the fit used.
    pub index_range: (u32, u32),
    pub max_abs_residual: f64,
    /// max |residual| / M, the scale the residuals are expected to keep.
    pub max_residual_over_index: f64,
}

fn validate_volume(volume: f64) -> Result<()> {
    if !(volume.is_finite() && volume > 0.0) {
        return Err(Error::Invariant(format!(
            "volume must be positive, got {volume}"
        )));
    }
    Ok(())
}

/// Remainder argument and weight for the row at m.
fn remainder_args(parity: Parity, m: u32) -> (i64, f64) {
    match parity {
        Parity::Even => (2 * i64::from(m), f64::from(m)),
        Parity::Odd => (2 * i64::from(m) + 1, f64::from(m) + 0.5),
    }
}

/// Builds the torsion-ratio table for m up to max_m. The bookkeeping
/// invariant `cumulative = previous + poly_increment - remainder` holds
/// bitwise row by row.
pub fn torsion_series(
    evaluator: &ZetaEvaluator<'_>,
    volume: f64,
    parity: Parity,
    max_m: u32,
) -> Result<TorsionSeries> {
    validate_volume(volume)?;
    let first = parity.first_m();
    if max_m < first {
        return Err(Error::Invariant(format!(
            "max m must be at least {first} for the {parity} family, got {max_m}"
        )));
    }
    let mut rows = Vec::with_capacity((max_m - first + 1) as usize);
    let mut cumulative = 0.0f64;
    let mut cumulative_tail = 0.0f64;
    for m in first..=max_m {
        let (weight, s) = remainder_args(parity, m);
        let value = evaluator.log_ruelle(weight, Complex64::new(s, 0.0))?;
        let poly_increment = match parity {
            Parity::Even => volume / PI * f64::from(2 * m),
            Parity::Odd => volume / PI * f64::from(2 * m + 1),
        };
        let remainder = value.value.re;
        cumulative = cumulative + poly_increment - remainder;
        cumulative_tail += value.tail_bound;
        rows.push(TorsionRow {
            m,
            index: parity.index(m),
            poly_increment,
            remainder,
            remainder_tail: value.tail_bound,
            cumulative,
            cumulative_tail,
        });
    }
    Ok(TorsionSeries {
        parity,
        base_index: parity.base_index(),
        volume,
        rows,
    })
}

/// Log torsion ratio of the even twist M = 2m against the base M = 4.
/// Requires m >= 3 (m = 2 is the base itself, ratio 0).
pub fn torsion_ratio_even(
    evaluator: &ZetaEvaluator<'_>,
    volume: f64,
    m: u32,
) -> Result<TorsionRow> {
    let series = torsion_series(evaluator, volume, Parity::Even, m)?;
    Ok(*series.rows.last().expect("series reaches m"))
}

/// Log torsion ratio of the odd twist M = 2m + 1 against the base M = 3.
/// Requires m >= 2 (m = 1 is the base itself, ratio 0).
pub fn torsion_ratio_odd(
    evaluator: &ZetaEvaluator<'_>,
    volume: f64,
    m: u32,
) -> Result<TorsionRow> {
    let series = torsion_series(evaluator, volume, Parity::Odd, m)?;
    Ok(*series.rows.last().expect("series reaches m"))
}

/// Certifies summability of the torsion remainders up to max_m:
///
/// ```text
/// sum |Re log R(row argument)| <= C1 * |log R(base, sigma_0)|,
/// C1 = (1 - e^{-systole})^{-1},
/// ```
///
/// with base argument 3 (even family) or 5/2 (odd family). Termwise,
/// |Re log R| is dominated by the trivial-twist series at the row's s, and
/// the geometric sum over rows telescopes into C1 at the base argument.
/// The empty spectrum certifies trivially with sum and bound both 0.
pub fn remainder_bound(
    evaluator: &ZetaEvaluator<'_>,
    parity: Parity,
    max_m: u32,
) -> Result<RemainderCertificate> {
    let first = parity.first_m();
    if max_m < first {
        return Err(Error::Invariant(format!(
            "max m must be at least {first} for the {parity} family, got {max_m}"
        )));
    }
    let (_, base_s) = remainder_args(parity, first);
    let Some(systole) = evaluator.spectrum().systole() else {
        let reference = evaluator.log_ruelle(0, Complex64::new(base_s, 0.0))?;
        return Ok(RemainderCertificate {
            sum_abs: 0.0,
            bound: 0.0,
            tail_allowance: reference.tail_bound,
            pass: true,
        });
    };
    let c1 = 1.0 / -f64::exp_m1(-systole);
    let mut sum_abs = 0.0f64;
    let mut tail_allowance = 0.0f64;
    for m in first..=max_m {
        let (weight, s) = remainder_args(parity, m);
        let value = evaluator.log_ruelle(weight, Complex64::new(s, 0.0))?;
        sum_abs += value.value.re.abs();
        tail_allowance += value.tail_bound;
    }
    let reference = evaluator.log_ruelle(0, Complex64::new(base_s, 0.0))?;
    let bound = c1 * reference.value.re.abs();
    tail_allowance += c1 * reference.tail_bound;
    Ok(RemainderCertificate {
        sum_abs,
        bound,
        tail_allowance,
        pass: sum_abs <= bound + tail_allowance + 1e-12,
    })
}

/// Solves the p x p system a x = b by Gaussian elimination with partial
/// pivoting. Deterministic: ties keep the first maximal pivot.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let p = b.len();
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Invariant(
                "volume fit design matrix is singular".into(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..p {
            let factor = a[row][col] / a[col][col];
            // Index loop: the update reads row `col` while writing row `row`.
            #[allow(clippy::needless_range_loop)]
            for k in col..p {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; p];
    for col in (0..p).rev() {
        let mut acc = b[col];
        for k in (col + 1)..p {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// Recovers the volume from torsion-ratio growth over twist indices
/// index_min..=index_max. The design is [1, M, M^2] for a single parity
/// and [1_even, 1_odd, M, M^2] for both (the two families share quadratic
/// and linear terms but not intercepts). The recovered volume is 4 pi
/// times the fitted M^2 coefficient. Requires at least 8 usable indices.
pub fn fit_volume(
    evaluator: &ZetaEvaluator<'_>,
    volume: f64,
    index_min: u32,
    index_max: u32,
    parity: ParityChoice,
) -> Result<VolumeFit> {
    validate_volume(volume)?;
    if index_min > index_max {
        return Err(Error::Invariant(format!(
            "index range is empty: {index_min} > {index_max}"
        )));
    }
    let parities: &[Parity] = match parity {
        ParityChoice::Even => &[Parity::Even],
        ParityChoice::Odd => &[Parity::Odd],
        ParityChoice::Both => &[Parity::Even, Parity::Odd],
    };
    // Points (parity slot, M, cumulative), even rows first, ascending M.
    let mut points: Vec<(usize, f64, f64)> = Vec::new();
    for (slot, &par) in parities.iter().enumerate() {
        let max_m = match par {
            Parity::Even => index_max / 2,
            Parity::Odd => index_max.saturating_sub(1) / 2,
        };
        if max_m < par.first_m() {
            continue;
        }
        let series = torsion_series(evaluator, volume, par, max_m)?;
        for row in &series.rows {
            if row.index >= index_min && row.index <= index_max {
                points.push((slot, f64::from(row.index), row.cumulative));
            }
        }
    }
    if points.len() < 8 {
        return Err(Error::Invariant(format!(
            "volume fit needs at least 8 indices in [{index_min}, {index_max}], got {}",
            points.len()
        )));
    }
    let intercepts = parities.len();
    let p = intercepts + 2;
    let design_row = |slot: usize, index: f64| -> Vec<f64> {
        let mut row = vec![0.0; p];
        row[slot] = 1.0;
        row[intercepts] = index;
        row[intercepts + 1] = index * index;
        row
    };
    let mut xtx = vec![vec![0.0f64; p]; p];
    let mut xty = vec![0.0f64; p];
    for &(slot, index, y) in &points {
        let row = design_row(slot, index);
        for i in 0..p {
            for j in 0..p {
                xtx[i][j] += row[i] * row[j];
            }
            xty[i] += row[i] * y;
        }
    }
    let coeffs = solve_linear(xtx, xty)?;
    let slope = coeffs[intercepts + 1];
    let linear_coefficient = coeffs[intercepts];
    let recovered_volume = 4.0 * PI * slope;
    let residuals: Vec<f64> = points
        .iter()
        .map(|&(slot, index, y)| {
            let row = design_row(slot, index);
            let fitted: f64 = row.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
            y - fitted
        })
        .collect();
    let max_abs_residual = residuals.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    let max_residual_over_index = points
        .iter()
        .zip(&residuals)
        .fold(0.0f64, |acc, (&(_, index, _), r)| acc.max(r.abs() / index));
    Ok(VolumeFit {
        slope,
        intercept: coeffs[0],
        intercept_odd: if intercepts == 2 { Some(coeffs[1]) } else { None },
        linear_coefficient,
        recovered_volume,
        injected_volume: volume,
        rel_error: (recovered_volume - volume).abs() / volume,
        index_range: (index_min, index_max),
        max_abs_residual,
        max_residual_over_index,
    })
}

/// Cumulative remainder sum diagnostics used by tests: the absolute
/// remainders of a series, summed deterministically.
pub fn remainder_abs_sum(series: &TorsionSeries) -> f64 {
    let terms: Vec<f64> = series.rows.iter().map(|r| r.remainder.abs()).collect();
    sum_blocked(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{GeodesicClass, LengthSpectrum};

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
    fn even_ratio_matches_the_closed_form_for_one_class() {
        // theta = 0: the m = 3 remainder is log(1 - e^{-3}), so the ratio
        // is 6 vol / pi - log(1 - e^{-3}).
        let spec = single_class(1.0, 0.0);
        let ev = ZetaEvaluator::new(&spec);
        let row = torsion_ratio_even(&ev, 1.0, 3).unwrap();
        let want = 6.0 / PI - (1.0 - (-3.0f64).exp()).ln();
        assert!((row.cumulative - want).abs() < 1e-14, "got {}", row.cumulative);
        assert_eq!(row.index, 6);
    }

    #[test]
    fn odd_ratio_matches_the_closed_form_for_one_class() {
        // theta = pi: the m = 2 remainder is log(1 + e^{-5/2}), so the
        // ratio is 5 vol / pi - log(1 + e^{-5/2}).
        let spec = single_class(1.0, PI);
        let ev = ZetaEvaluator::new(&spec);
        let row = torsion_ratio_odd(&ev, 1.0, 2).unwrap();
        let want = 5.0 / PI - (1.0 + (-2.5f64).exp()).ln();
        assert!((row.cumulative - want).abs() < 1e-14, "got {}", row.cumulative);
        assert_eq!(row.index, 5);
    }

    #[test]
    fn bookkeeping_invariant_is_bitwise() {
        let spec = single_class(0.9, 1.1);
        let ev = ZetaEvaluator::new(&spec);
        for parity in [Parity::Even, Parity::Odd] {
            let series = torsion_series(&ev, 2.7, parity, 9).unwrap();
            let mut prev = 0.0f64;
            for row in &series.rows {
                assert_eq!(row.cumulative, prev + row.poly_increment - row.remainder);
                prev = row.cumulative;
            }
        }
    }

    #[test]
    fn remainder_certificate_passes_and_empty_is_trivial() {
        let spec = single_class(1.0, 0.0);
        let ev = ZetaEvaluator::new(&spec);
        for parity in [Parity::Even, Parity::Odd] {
            let cert = remainder_bound(&ev, parity, 12).unwrap();
            assert!(cert.pass, "{parity}: {cert:?}");
            assert!(cert.sum_abs > 0.0);
        }
        let empty = LengthSpectrum::new(Vec::new(), 2.0, 10.0, None).unwrap();
        let ev = ZetaEvaluator::new(&empty);
        let cert = remainder_bound(&ev, Parity::Even, 10).unwrap();
        assert_eq!((cert.sum_abs, cert.bound), (0.0, 0.0));
        assert!(cert.pass);
    }

    #[test]
    fn fit_recovers_the_injected_volume_when_remainders_are_tiny() {
        let spec = single_class(1.0, 0.7);
        let ev = ZetaEvaluator::new(&spec);
        for choice in [ParityChoice::Even, ParityChoice::Odd, ParityChoice::Both] {
            let fit = fit_volume(&ev, 1.3, 20, 60, choice).unwrap();
            assert!(
                fit.rel_error < 1e-6,
                "{choice:?}: recovered {} vs 1.3",
                fit.recovered_volume
            );
        }
    }

    #[test]
    fn fit_rejects_short_ranges() {
        let spec = single_class(1.0, 0.0);
        let ev = ZetaEvaluator::new(&spec);
        assert!(fit_volume(&ev, 1.0, 20, 24, ParityChoice::Even).is_err());
    }
}
