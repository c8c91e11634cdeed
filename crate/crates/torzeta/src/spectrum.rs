//! Geodesic length-spectrum data model, file ingestion, synthetic
//! generation, and enumeration of conjugacy classes.
//!
//! A closed hyperbolic 3-manifold enters this crate as a finite list of
//! primitive closed geodesics, each one the pair (length l0, holonomy angle
//! theta0) of the loxodromic element it represents, together with a
//! completeness radius R: the list is asserted to contain every primitive
//! class with l0 <= R. All conjugacy classes are powers gamma0^n of
//! primitives; [`LengthSpectrum::iterate_classes`] enumerates them with
//! length n*l0 and holonomy n*theta0 mod 2pi in a deterministic order that
//! every series evaluator in the crate shares.
//!
//! Truncation bounds downstream rely on the counting invariant
//! `counting(x) <= C_g * e^{2x}` for all x <= R, with C_g stored on the
//! spectrum. Loaders re-check it; the synthetic generator reports the
//! smallest constant its sample satisfies.

use crate::error::{Error, Result};
use crate::numerics::fmt_f64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::{Read, Write};

/// Tolerance for snapping a reduced holonomy just below 2pi back to zero,
/// so that powers of theta0 = 2pi/n do not land at 2pi - epsilon.
const HOLONOMY_SNAP: f64 = 1e-12;

/// Default growth constant when a manifest does not specify one.
const DEFAULT_GROWTH_CONSTANT: f64 = 10.0;

/// Hard cap on synthetic spectrum size, independent of profile caps.
const GENERATION_HARD_CAP: u64 = 10_000_000;

/// One primitive closed geodesic: hyperbolic length, holonomy angle of the
/// rotation part, and the number of distinct primitive classes sharing the
/// pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicClass {
    length: f64,
    holonomy: f64,
    multiplicity: u32,
}

impl GeodesicClass {
    /// Validates length > 0, holonomy in [0, 2pi), multiplicity >= 1.
    pub fn new(length: f64, holonomy: f64, multiplicity: u32) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Invariant(format!(
                "nonpositive length {length}"
            )));
        }
        if !(holonomy.is_finite() && (0.0..TAU).contains(&holonomy)) {
            return Err(Error::Invariant(format!(
                "holonomy out of range [0, 2pi): {holonomy}"
            )));
        }
        if multiplicity == 0 {
            return Err(Error::Invariant("multiplicity must be >= 1".into()));
        }
        Ok(Self {
            length,
            holonomy,
            multiplicity,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn holonomy(&self) -> f64 {
        self.holonomy
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }
}

/// One conjugacy class gamma0^n produced by class enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassTerm {
    /// Class length n * l0.
    pub length: f64,
    /// n * theta0 reduced mod 2pi (with the snap-to-zero rule).
    pub holonomy: f64,
    /// Power n >= 1 of the underlying primitive.
    pub power: u32,
    /// Multiplicity of the underlying primitive class, as a float weight.
    pub weight: f64,
}

/// Finite length spectrum, complete up to `cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthSpectrum {
    /// Sorted ascending by (length, holonomy, multiplicity).
    entries: Vec<GeodesicClass>,
    cutoff: f64,
    growth_constant: f64,
    volume: Option<f64>,
    /// prefix_counts[i] = total multiplicity of entries[..=i].
    prefix_counts: Vec<u64>,
}

/// Synthetic-generation density profiles.
///
/// `PoissonLinear` is a homogeneous Poisson point process on
/// [systole, cutoff] with the given intensity per unit length, so the
/// expected counting function is linear. `CappedExponential` targets a
/// counting function close to e^{c x}: it draws ceil(e^{c R} - e^{c delta})
/// lengths with density proportional to e^{c x}, and refuses profiles whose
/// count would exceed `max_count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityProfile {
    PoissonLinear { rate: f64 },
    CappedExponential { c: f64, max_count: u64 },
}

/// Input format selector for [`load_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumFormat {
    /// Bare CSV rows; metadata that CSV cannot carry is supplied here.
    /// A missing cutoff defaults to the maximum entry length.
    Csv {
        cutoff: Option<f64>,
        growth_constant: f64,
        volume: Option<f64>,
    },
    /// Self-describing JSON manifest.
    Json,
}

impl SpectrumFormat {
    /// CSV with defaults: cutoff from data, growth constant 10, no volume.
    pub fn csv() -> Self {
        SpectrumFormat::Csv {
            cutoff: None,
            growth_constant: DEFAULT_GROWTH_CONSTANT,
            volume: None,
        }
    }
}

fn default_growth() -> f64 {
    DEFAULT_GROWTH_CONSTANT
}

/// Serialized manifest shape. Field order here fixes the canonical JSON key
/// order.
#[derive(Serialize, Deserialize)]
struct Manifest {
    cutoff: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    systole: Option<f64>,
    #[serde(default = "default_growth")]
    growth_constant: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    volume: Option<f64>,
    entries: Vec<(f64, f64, u32)>,
}

impl LengthSpectrum {
    /// Builds a validated spectrum. Entries are sorted canonically; the
    /// counting invariant against `growth_constant` is checked at every
    /// jump point of the counting function.
    pub fn new(
        mut entries: Vec<GeodesicClass>,
        cutoff: f64,
        growth_constant: f64,
        volume: Option<f64>,
    ) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::Invariant(format!(
                "cutoff must be positive, got {cutoff}"
            )));
        }
        if !(growth_constant.is_finite() && growth_constant > 0.0) {
            return Err(Error::Invariant(format!(
                "growth constant must be positive, got {growth_constant}"
            )));
        }
        if let Some(v) = volume {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invariant(format!(
                    "volume must be positive, got {v}"
                )));
            }
        }
        entries.sort_by(|a, b| {
            a.length
                .total_cmp(&b.length)
                .then(a.holonomy.total_cmp(&b.holonomy))
                .then(a.multiplicity.cmp(&b.multiplicity))
        });
        if let Some(last) = entries.last() {
            if last.length > cutoff {
                return Err(Error::Invariant(format!(
                    "entry beyond cutoff: length {} > cutoff {}",
                    last.length, cutoff
                )));
            }
        }
        let mut prefix_counts = Vec::with_capacity(entries.len());
        let mut running = 0u64;
        for e in &entries {
            running += u64::from(e.multiplicity);
            prefix_counts.push(running);
        }
        // Counting invariant: N(x) <= C_g e^{2x} peaks just after a jump,
        // so checking at entry lengths covers all x. A hair of slack
        // tolerates decimal round-trips of a tight constant.
        for (e, &count) in entries.iter().zip(&prefix_counts) {
            let allowed = growth_constant * (2.0 * e.length).exp();
            if count as f64 > allowed * (1.0 + 1e-9) {
                return Err(Error::Invariant(format!(
                    "counting function violates growth bound at x = {}: \
                     {} > {} * e^(2x)",
                    e.length, count, growth_constant
                )));
            }
        }
        Ok(Self {
            entries,
            cutoff,
            growth_constant,
            volume,
            prefix_counts,
        })
    }

    pub fn entries(&self) -> &[GeodesicClass] {
        &self.entries
    }

    /// Completeness radius R.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Constant C_g of the counting bound counting(x) <= C_g e^{2x}.
    pub fn growth_constant(&self) -> f64 {
        self.growth_constant
    }

    pub fn volume(&self) -> Option<f64> {
        self.volume
    }

    /// Systole delta = minimal primitive length; None for the empty
    /// spectrum.
    pub fn systole(&self) -> Option<f64> {
        self.entries.first().map(|e| e.length)
    }

    /// Total multiplicity over all entries.
    pub fn total_multiplicity(&self) -> u64 {
        self.prefix_counts.last().copied().unwrap_or(0)
    }

    /// Counting function: total multiplicity of primitives with length <= x.
    /// Only meaningful inside the completeness radius.
    pub fn counting(&self, x: f64) -> Result<u64> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Invariant(format!(
                "counting point must be finite and >= 0, got {x}"
            )));
        }
        if x > self.cutoff {
            return Err(Error::BeyondCutoff {
                x,
                cutoff: self.cutoff,
            });
        }
        let idx = self.entries.partition_point(|e| e.length <= x);
        Ok(if idx == 0 {
            0
        } else {
            self.prefix_counts[idx - 1]
        })
    }

    /// Enumerates all conjugacy classes (primitive, power n >= 1) with
    /// n * l0 <= length_limit, ascending by (length, power, holonomy).
    /// The empty stream is fine; every series evaluator and every test in
    /// this crate consumes terms in exactly this order.
    pub fn iterate_classes(&self, length_limit: f64) -> ClassTermIter<'_> {
        ClassTermIter::new(self, length_limit)
    }

    /// Largest power n with n * l0 <= limit under the same floating-point
    /// predicate the iterator uses; 0 when even n = 1 exceeds the limit.
    pub fn max_power(primitive_length: f64, limit: f64) -> u64 {
        if primitive_length <= 0.0 || limit <= 0.0 || primitive_length > limit {
            return 0;
        }
        let mut n = (limit / primitive_length).floor() as u64;
        // Fix the floor estimate against rounding in n * l0.
        while n > 0 && (n as f64) * primitive_length > limit {
            n -= 1;
        }
        while ((n + 1) as f64) * primitive_length <= limit {
            n += 1;
        }
        n
    }

    /// Loads a spectrum from a byte stream in the given format.
    pub fn load(reader: impl Read, format: SpectrumFormat) -> Result<Self> {
        match format {
            SpectrumFormat::Csv {
                cutoff,
                growth_constant,
                volume,
            } => Self::load_csv(reader, cutoff, growth_constant, volume),
            SpectrumFormat::Json => Self::load_json(reader),
        }
    }

    fn load_csv(
        reader: impl Read,
        cutoff: Option<f64>,
        growth_constant: f64,
        volume: Option<f64>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        {
            let headers = rdr
                .headers()
                .map_err(|e| Error::Parse {
                    line: 1,
                    message: e.to_string(),
                })?
                .clone();
            let cols: Vec<&str> = headers.iter().collect();
            if cols != ["length", "theta", "multiplicity"] && cols != ["length", "theta"] {
                return Err(Error::Parse {
                    line: 1,
                    message: format!(
                        "header must be exactly `length,theta,multiplicity` \
                         (multiplicity optional), got `{}`",
                        cols.join(",")
                    ),
                });
            }
        }
        let mut entries = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2; // 1-based, after the header line
            let record = record.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let parse_field = |idx: usize, name: &str| -> Result<f64> {
                record
                    .get(idx)
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("missing field `{name}`"),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        line,
                        message: format!("bad {name}: {e}"),
                    })
            };
            let length = parse_field(0, "length")?;
            let theta = parse_field(1, "theta")?;
            let multiplicity = match record.get(2) {
                None | Some("") => 1u32,
                Some(raw) => raw.trim().parse::<u32>().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad multiplicity: {e}"),
                })?,
            };
            if !(length.is_finite() && length > 0.0) {
                return Err(Error::Invariant(format!(
                    "nonpositive length at line {line}"
                )));
            }
            entries.push(GeodesicClass::new(length, theta, multiplicity).map_err(
                |e| Error::Parse {
                    line,
                    message: e.to_string(),
                },
            )?);
        }
        let cutoff = match cutoff {
            Some(c) => c,
            None => entries
                .iter()
                .map(|e| e.length)
                .fold(f64::NEG_INFINITY, f64::max)
                .max(1.0),
        };
        Self::new(entries, cutoff, growth_constant, volume)
    }

    fn load_json(mut reader: impl Read) -> Result<Self> {
        let mut buf = String::new();
        reader.read_to_string(&mut buf)?;
        let manifest: Manifest = serde_json::from_str(&buf).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let mut entries = Vec::with_capacity(manifest.entries.len());
        for (i, &(length, theta, multiplicity)) in manifest.entries.iter().enumerate() {
            if !(length.is_finite() && length > 0.0) {
                return Err(Error::Invariant(format!(
                    "nonpositive length at entry {}",
                    i + 1
                )));
            }
            entries.push(GeodesicClass::new(length, theta, multiplicity)?);
        }
        let spec = Self::new(
            entries,
            manifest.cutoff,
            manifest.growth_constant,
            manifest.volume,
        )?;
        if let Some(declared) = manifest.systole {
            match spec.systole() {
                Some(actual) if (actual - declared).abs() <= 1e-12 * declared.abs().max(1.0) => {}
                other => {
                    return Err(Error::Invariant(format!(
                        "declared systole {declared} does not match recomputed {other:?}"
                    )));
                }
            }
        }
        Ok(spec)
    }

    /// Canonical JSON manifest with 17-significant-digit floats. Fixed key
    /// order and fixed entry order make the bytes a function of the value.
    pub fn to_json_string(&self) -> String {
        let manifest = Manifest {
            cutoff: self.cutoff,
            systole: self.systole(),
            growth_constant: self.growth_constant,
            volume: self.volume,
            entries: self
                .entries
                .iter()
                .map(|e| (e.length, e.holonomy, e.multiplicity))
                .collect(),
        };
        let mut out = Vec::new();
        let mut ser =
            serde_json::Serializer::with_formatter(&mut out, Sig17Formatter);
        manifest
            .serialize(&mut ser)
            .expect("manifest serialization cannot fail");
        String::from_utf8(out).expect("serializer emits UTF-8")
    }

    /// Writes the canonical JSON manifest.
    pub fn write_json(&self, mut writer: impl Write) -> Result<()> {
        writer.write_all(self.to_json_string().as_bytes())?;
        Ok(())
    }

    /// Canonical CSV body (metadata is not representable in CSV).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("length,theta,multiplicity\n");
        for e in &self.entries {
            out.push_str(&fmt_f64(e.length));
            out.push(',');
            out.push_str(&fmt_f64(e.holonomy));
            out.push(',');
            out.push_str(&e.multiplicity.to_string());
            out.push('\n');
        }
        out
    }
}

/// JSON formatter that prints every f64 with 17 significant digits.
#[derive(Default)]
pub struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Reduces n * theta0 into [0, 2pi) with the snap-to-zero rule.
pub fn reduce_holonomy(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if TAU - r < HOLONOMY_SNAP {
        0.0
    } else {
        r
    }
}

/// Heap entry for the k-way merge over primitives. Ordered ascending by
/// (length, power, holonomy, entry index); the index makes the order total
/// so iteration is deterministic for any input.
#[derive(Debug, Clone, Copy)]
struct Pending {
    length: f64,
    power: u32,
    holonomy: f64,
    entry_index: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the smallest first.
        other
            .length
            .total_cmp(&self.length)
            .then(other.power.cmp(&self.power))
            .then(other.holonomy.total_cmp(&self.holonomy))
            .then(other.entry_index.cmp(&self.entry_index))
    }
}

/// Lazy merged stream of [`ClassTerm`]s, ascending by (length, power,
/// holonomy).
pub struct ClassTermIter<'a> {
    spectrum: &'a LengthSpectrum,
    limit: f64,
    heap: std::collections::BinaryHeap<Pending>,
}

impl<'a> ClassTermIter<'a> {
    fn new(spectrum: &'a LengthSpectrum, limit: f64) -> Self {
        let mut heap = std::collections::BinaryHeap::new();
        for (i, e) in spectrum.entries.iter().enumerate() {
            if e.length <= limit {
                heap.push(Pending {
                    length: e.length,
                    power: 1,
                    holonomy: e.holonomy,
                    entry_index: i,
                });
            }
        }
        Self {
            spectrum,
            limit,
            heap,
        }
    }
}

impl Iterator for ClassTermIter<'_> {
    type Item = ClassTerm;

    fn next(&mut self) -> Option<ClassTerm> {
        let head = self.heap.pop()?;
        let entry = &self.spectrum.entries[head.entry_index];
        let next_power = head.power + 1;
        let next_length = f64::from(next_power) * entry.length;
        if next_length <= self.limit {
            self.heap.push(Pending {
                length: next_length,
                power: next_power,
                holonomy: reduce_holonomy(f64::from(next_power) * entry.holonomy),
                entry_index: head.entry_index,
            });
        }
        Some(ClassTerm {
            length: head.length,
            holonomy: head.holonomy,
            power: head.power,
            weight: f64::from(entry.multiplicity),
        })
    }
}

/// Deterministic synthetic spectrum. For a fixed seed and parameters the
/// result is identical on every run, including its serialized bytes.
pub fn generate_synthetic(
    seed: u64,
    systole: f64,
    cutoff: f64,
    density: &DensityProfile,
) -> Result<LengthSpectrum> {
    if !(systole.is_finite() && systole > 0.0) {
        return Err(Error::Generation(format!(
            "systole must be positive, got {systole}"
        )));
    }
    if !(cutoff.is_finite() && systole < cutoff) {
        return Err(Error::Generation(format!(
            "systole {systole} must be below cutoff {cutoff}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count: u64 = match *density {
        DensityProfile::PoissonLinear { rate } => {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::Generation(format!(
                    "poisson-linear rate must be positive, got {rate}"
                )));
            }
            let mean = rate * (cutoff - systole);
            if !mean.is_finite() || mean > GENERATION_HARD_CAP as f64 {
                return Err(Error::Generation(format!(
                    "expected count {mean} exceeds the generation cap; \
                     use a smaller cutoff or rate"
                )));
            }
            let poisson = rand_distr::Poisson::new(mean)
                .map_err(|e| Error::Generation(e.to_string()))?;
            poisson.sample(&mut rng) as u64
        }
        DensityProfile::CappedExponential { c, max_count } => {
            if !(c.is_finite() && c > 0.0 && c <= 2.0) {
                return Err(Error::Generation(format!(
                    "capped-exponential exponent must be in (0, 2], got {c}"
                )));
            }
            let expected = ((c * cutoff).exp() - (c * systole).exp()).ceil();
            if !expected.is_finite()
                || expected > max_count as f64
                || expected > GENERATION_HARD_CAP as f64
            {
                return Err(Error::Generation(format!(
                    "profile would exceed max_count ({expected} > {max_count}); \
                     use a smaller cutoff"
                )));
            }
            expected as u64
        }
    };
    // Draw (length, holonomy) pairs in a fixed order, then sort by length.
    // The draw order is part of the determinism contract.
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let length = match *density {
            DensityProfile::PoissonLinear { .. } => rng.random_range(systole..cutoff),
            DensityProfile::CappedExponential { c, .. } => {
                let lo = (c * systole).exp();
                let hi = (c * cutoff).exp();
                let u: f64 = rng.random_range(0.0..1.0);
                (lo + u * (hi - lo)).ln() / c
            }
        };
        let holonomy = rng.random_range(0.0..TAU);
        raw.push((length.min(cutoff), holonomy));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let entries: Vec<GeodesicClass> = raw
        .into_iter()
        .map(|(l, th)| GeodesicClass::new(l, th, 1))
        .collect::<Result<_>>()?;
    // Tightest constant the sample satisfies; N(x) e^{-2x} peaks at jumps.
    let mut growth = DEFAULT_GROWTH_CONSTANT.min(1.0);
    let mut running = 0u64;
    for e in &entries {
        running += u64::from(e.multiplicity);
        growth = growth.max(running as f64 * (-2.0 * e.length).exp());
    }
    let growth = if entries.is_empty() {
        DEFAULT_GROWTH_CONSTANT
    } else {
        growth * (1.0 + 1e-12)
    };
    LengthSpectrum::new(entries, cutoff, growth, None)
}
