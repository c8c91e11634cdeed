//! Numerical utilities: compensated summation with a deterministic parallel
//! reduction shape, adaptive Gauss-Kronrod quadrature, and canonical float
//! formatting.
//!
//! Every reduction in this crate that feeds user-visible output goes through
//! [`sum_blocked`] / [`sum_blocked_complex`]. The reduction shape is fixed:
//! terms are pre-sorted by the caller, grouped into blocks of [`BLOCK`]
//! consecutive terms, each block is summed sequentially with Neumaier
//! compensation, and the block totals are combined sequentially in block
//! order. Worker threads only decide who computes which block, never the
//! shape, so results are bit-identical for every thread count.

use num_complex::Complex64;
use rayon::prelude::*;

/// Block length of the fixed-shape reduction.
pub const BLOCK: usize = 4096;

/// Neumaier-compensated accumulator (Kahan summation with the branch that
/// also protects against a new term exceeding the running sum).
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term, updating the compensation with the exact rounding
    /// error of the floating-point addition.
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated total.
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sums a slice in the fixed blocked shape described in the module docs.
///
/// The result does not depend on the rayon pool size: per-block sums are
/// sequential and the combine step walks blocks in index order.
pub fn sum_blocked(terms: &[f64]) -> f64 {
    let partials: Vec<f64> = terms
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = NeumaierSum::new();
            for &x in chunk {
                acc.add(x);
            }
            acc.value()
        })
        .collect();
    let mut total = NeumaierSum::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}

/// Complex variant of [`sum_blocked`]; real and imaginary parts are
/// compensated independently.
pub fn sum_blocked_complex(terms: &[Complex64]) -> Complex64 {
    let partials: Vec<(f64, f64)> = terms
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut re = NeumaierSum::new();
            let mut im = NeumaierSum::new();
            for z in chunk {
                re.add(z.re);
                im.add(z.im);
            }
            (re.value(), im.value())
        })
        .collect();
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for (r, i) in partials {
        re.add(r);
        im.add(i);
    }
    Complex64::new(re.value(), im.value())
}

/// Formats a float with 17 significant digits in scientific notation.
///
/// 17 digits round-trip every finite f64, so two runs that compute the same
/// bits print the same bytes. All CSV and JSON output in this project uses
/// this formatter.
pub fn fmt_f64(x: f64) -> String {
    // Negative zero is normalized so that algebraically-zero imaginary
    // parts cannot print two different byte strings.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.16e}", x)
}

/// Result of an adaptive quadrature run.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub panels: usize,
}

// 15-point Kronrod nodes (positive half), 7-point Gauss weights, and
// 15-point Kronrod weights, kept at their published 33-digit precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One Gauss-Kronrod 15 evaluation on [lo, hi]: (integral, error estimate).
fn qk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut res_gauss = WG[3] * fc;
    let mut res_kronrod = WGK[7] * fc;
    for j in 0..3 {
        let x = h * XGK[2 * j + 1];
        let pair = f(c - x) + f(c + x);
        res_gauss += WG[j] * pair;
        res_kronrod += WGK[2 * j + 1] * pair;
    }
    for j in 0..4 {
        let x = h * XGK[2 * j];
        let pair = f(c - x) + f(c + x);
        res_kronrod += WGK[2 * j] * pair;
    }
    (res_kronrod * h, (res_kronrod - res_gauss).abs() * h.abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    error: f64,
    seq: u64,
    lo: f64,
    hi: f64,
    value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.seq == other.seq
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Max-heap by error estimate; insertion sequence makes the order total.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b].
///
/// `splits` lists interior points (peaks, saddles, scale changes) that seed
/// the initial panel set; points outside (a, b) are ignored. Panels are
/// bisected worst-error-first until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |integral|)` or `max_panels` is reached. The loop
/// is single-threaded and heap order is total, so results are deterministic.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> QuadResult {
    assert!(a < b, "integration bounds must satisfy a < b");
    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(splits.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap = std::collections::BinaryHeap::new();
    let mut seq = 0u64;
    let mut finite = true;
    for w in edges.windows(2) {
        let (v, e) = qk15(&f, w[0], w[1]);
        finite &= v.is_finite();
        heap.push(Panel {
            error: e,
            seq,
            lo: w[0],
            hi: w[1],
            value: v,
        });
        seq += 1;
    }

    loop {
        let total_value: f64 = {
            let mut acc = NeumaierSum::new();
            for p in heap.iter() {
                acc.add(p.value);
            }
            acc.value()
        };
        let total_error: f64 = heap.iter().map(|p| p.error).sum();
        let target = abs_tol.max(rel_tol * total_value.abs());
        if !finite {
            return QuadResult {
                value: total_value,
                error_estimate: f64::INFINITY,
                converged: false,
                panels: heap.len(),
            };
        }
        if total_error <= target || heap.len() >= max_panels {
            return QuadResult {
                value: total_value,
                error_estimate: total_error,
                converged: total_error <= target,
                panels: heap.len(),
            };
        }
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval at floating-point resolution; keep it as is.
            let mut p = worst;
            p.error = 0.0;
            heap.push(p);
            continue;
        }
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let (v, e) = qk15(&f, lo, hi);
            finite &= v.is_finite();
            heap.push(Panel {
                error: e,
                seq,
                lo,
                hi,
                value: v,
            });
            seq += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut acc = NeumaierSum::new();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn blocked_sum_matches_serial_for_any_split() {
        let terms: Vec<f64> = (0..20_000)
            .map(|i| ((i as f64) * 0.7).sin() / (1.0 + i as f64))
            .collect();
        let mut serial = NeumaierSum::new();
        for chunk in terms.chunks(BLOCK) {
            let mut block = NeumaierSum::new();
            for &x in chunk {
                block.add(x);
            }
            serial.add(block.value());
        }
        assert_eq!(sum_blocked(&terms), serial.value());
    }

    #[test]
    fn quadrature_polynomial_exact() {
        // x^2 on [0,3] is inside the Gauss rule's exactness degree.
        let r = integrate(|x| x * x, 0.0, 3.0, &[], 1e-14, 0.0, 100);
        assert!((r.value - 9.0).abs() < 1e-12, "value {}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn quadrature_peaked_integrand() {
        // Gaussian with width 1e-2 centered at 0.5; exact integral over the
        // real line is sqrt(pi)*1e-2, and the [0,1] restriction differs by
        // an unobservably small tail.
        let w = 1e-2;
        let f = move |x: f64| (-(x - 0.5_f64).powi(2) / (w * w)).exp();
        let r = integrate(f, 0.0, 1.0, &[0.5], 1e-12, 0.0, 2000);
        let exact = std::f64::consts::PI.sqrt() * w;
        assert!(r.converged);
        assert!(
            (r.value - exact).abs() <= 1e-12 * exact,
            "value {} exact {}",
            r.value,
            exact
        );
    }

    #[test]
    fn formatting_is_17_significant_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.5), "-5.0000000000000000e-1");
        let x = 0.1 + 0.2;
        let printed = fmt_f64(x);
        let back: f64 = printed.parse().unwrap();
        assert_eq!(back, x, "17 digits must round-trip");
    }
}
