//! Finite discrete distributions and standard normal utilities.
//!
//! A [`DiscreteDistribution`] stores strictly increasing atoms with positive
//! probabilities summing to one. Construction sorts, coalesces atoms closer
//! than the absolute merge tolerance, drops zero-probability atoms and
//! validates the mass. Exact convolution, two-sided distribution function
//! evaluation and seeded inverse-transform sampling operate on that
//! normalized form.

mod erf;

pub(crate) use erf::erfcx;

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Atoms closer than this are treated as the same point mass.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// Atom-count cap above which exact convolution refuses to proceed.
pub const DEFAULT_ATOM_CAP: usize = 1 << 24;

/// Name of the pseudo-random generator behind [`DiscreteDistribution::sample`],
/// recorded in every report that involves sampling.
pub const GENERATOR_NAME: &str = "chacha8";

/// Distribution function of the standard normal law.
///
/// Computed through the scaled complementary error function, so the relative
/// error stays below 1e-14 in both tails, down to the smallest normal `f64`
/// near `normal_cdf(-37.5)`.
pub fn normal_cdf<T: Real>(x: T) -> T {
    normal_sf(-x)
}

/// Upper tail `1 - normal_cdf(x)` with full relative accuracy.
pub fn normal_sf<T: Real>(x: T) -> T {
    let half = T::cast(0.5);
    if x < half {
        // Center and lower range: erfc does not amplify argument rounding
        // here because the result is order one.
        return half * erf::erfc(x / T::SQRT_2());
    }
    // Tail: going through erfc(x / sqrt 2) would square the rounding of the
    // divided argument into an x^2 * eps relative error. Instead pair erfcx
    // with exp(-x^2 / 2) whose exponent is assembled exactly: the truncated
    // head squares without rounding and x - xh is exact by construction.
    let xh = (x * T::cast(16.0)).trunc() * T::cast(0.0625);
    let del = (x - xh) * (x + xh);
    let e = (-(xh * xh) * half).exp() * (-del * half).exp();
    half * erf::erfcx(x / T::SQRT_2()) * e
}

/// Density of the standard normal law.
pub fn normal_pdf<T: Real>(x: T) -> T {
    (-x * x * T::cast(0.5)).exp() / (T::cast(2.0) * T::PI()).sqrt()
}

/// A finitely supported probability distribution on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<T> {
    atoms: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> DiscreteDistribution<T> {
    /// Build from parallel atom and probability lists.
    ///
    /// Input may be unsorted and may repeat atoms (within the merge
    /// tolerance); negative probabilities are rejected naming the offending
    /// index, and the total mass must be 1 within 1e-9.
    pub fn new(atoms: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if atoms.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        for (i, (&a, &p)) in atoms.iter().zip(&probs).enumerate() {
            if !a.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "atom {i} is not finite: {a}"
                )));
            }
            if !p.is_finite() || p < T::zero() {
                return Err(Error::InvalidDistribution(format!(
                    "probability {i} is negative or not finite: {p}"
                )));
            }
        }
        let d = Self::from_pairs(atoms.into_iter().zip(probs))?;
        let mass = compensated_mass(&d.probs);
        if (mass - T::one()).abs() > T::cast(1e-9) {
            return Err(Error::InvalidDistribution(format!(
                "total mass {mass} deviates from 1 by more than 1e-9"
            )));
        }
        Ok(d)
    }

    /// The distribution concentrated at one point.
    pub fn point_mass(x: T) -> Self {
        DiscreteDistribution { atoms: vec![x], probs: vec![T::one()] }
    }

    /// Sort, coalesce near-equal atoms, drop zero-probability atoms.
    /// Does not check the total mass; convolution preserves it by
    /// construction.
    fn from_pairs<I: IntoIterator<Item = (T, T)>>(pairs: I) -> Result<Self> {
        let mut pairs: Vec<(T, T)> = pairs.into_iter().filter(|&(_, p)| p != T::zero()).collect();
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution(
                "every atom has zero probability".into(),
            ));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let tol = T::cast(ATOM_MERGE_TOL);
        let mut atoms = Vec::with_capacity(pairs.len());
        let mut probs = Vec::with_capacity(pairs.len());
        let mut i = 0;
        while i < pairs.len() {
            let mut j = i + 1;
            while j < pairs.len() && pairs[j].0 - pairs[j - 1].0 <= tol {
                j += 1;
            }
            // Probability-weighted location of the merged run, measured
            // from the run's first atom. Anchoring keeps an exact duplicate
            // exactly in place even when its mass is subnormal, where the
            // plain weighted mean loses most of its precision.
            let anchor = pairs[i].0;
            let mut mass = CompensatedSum::new();
            let mut loc = CompensatedSum::new();
            for &(a, p) in &pairs[i..j] {
                mass.add(p);
                loc.add((a - anchor) * p);
            }
            let m = mass.value();
            if m > T::zero() {
                atoms.push(anchor + loc.value() / m);
                probs.push(m);
            }
            i = j;
        }
        Ok(DiscreteDistribution { atoms, probs })
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> T {
        let mut s = CompensatedSum::new();
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            s.add(a * p);
        }
        s.value()
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        let mut s = CompensatedSum::new();
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            let d = a - m;
            s.add(d * d * p);
        }
        s.value()
    }

    pub fn second_moment(&self) -> T {
        let mut s = CompensatedSum::new();
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            s.add(a * a * p);
        }
        s.value()
    }

    /// Expectation of `f` under the distribution, in atom order.
    pub fn expect<F: Fn(T) -> T>(&self, f: F) -> T {
        let mut s = CompensatedSum::new();
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            s.add(f(a) * p);
        }
        s.value()
    }

    /// Left limit and value of the distribution function at `x`:
    /// `(P[X < x], P[X <= x])`.
    pub fn cdf_pair(&self, x: T) -> (T, T) {
        let mut below = CompensatedSum::new();
        let mut at = T::zero();
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            if a < x {
                below.add(p);
            } else if a == x {
                at = p;
            } else {
                break;
            }
        }
        // Rounding in the cumulative sum must not push a distribution
        // function value past 1.
        let lo = below.value().min(T::one());
        (lo, (lo + at).min(T::one()))
    }

    /// Exact distribution of the sum of independent draws from `self` and
    /// `other`, with the default atom cap.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.convolve_capped(other, DEFAULT_ATOM_CAP)
    }

    /// [`DiscreteDistribution::convolve`] with an explicit cap on the atom
    /// count of the result before merging.
    pub fn convolve_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let predicted = self.len().saturating_mul(other.len());
        if predicted > cap {
            return Err(Error::AtomCapExceeded { predicted, cap });
        }
        let mut pairs = Vec::with_capacity(predicted);
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            for (&b, &q) in other.atoms.iter().zip(&other.probs) {
                pairs.push((a + b, p * q));
            }
        }
        Self::from_pairs(pairs)
    }

    /// `count` independent draws by inverse transform on a seeded ChaCha8
    /// stream. Equal `(self, count, seed)` yield bit-identical output.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cum = self.cumulative();
        (0..count).map(|_| self.draw(&mut rng, &cum)).collect()
    }

    /// Cumulative probability thresholds for inverse-transform draws.
    pub(crate) fn cumulative(&self) -> Vec<T> {
        let mut acc = CompensatedSum::new();
        let mut cum = Vec::with_capacity(self.probs.len());
        for &p in &self.probs {
            acc.add(p);
            cum.push(acc.value());
        }
        // Guard against the total landing a few ulp under 1.
        if let Some(last) = cum.last_mut() {
            *last = last.max(T::one());
        }
        cum
    }

    #[inline]
    pub(crate) fn draw<R: Rng>(&self, rng: &mut R, cum: &[T]) -> T {
        let u = T::cast(rng.random::<f64>());
        let idx = cum.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        self.atoms[idx]
    }

    /// JSON form `{"atoms": [...], "probs": [...]}` with every number as a
    /// decimal string carrying 17 significant digits, enough to round-trip
    /// an `f64` exactly.
    pub fn to_json(&self) -> Value {
        let enc = |xs: &[T]| -> Vec<Value> {
            xs.iter()
                .map(|x| Value::String(format!("{:.16e}", x.to_f64().unwrap())))
                .collect()
        };
        json!({ "atoms": enc(&self.atoms), "probs": enc(&self.probs) })
    }

    /// Parse the [`DiscreteDistribution::to_json`] form. Numbers are also
    /// accepted in place of decimal strings. Malformed input is rejected
    /// with the field and index spelled out.
    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Malformed {
            field: "distribution".into(),
            reason: "expected an object with \"atoms\" and \"probs\"".into(),
        })?;
        let field = |name: &str| -> Result<Vec<T>> {
            let arr = obj
                .get(name)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Malformed {
                    field: name.into(),
                    reason: "missing or not an array".into(),
                })?;
            arr.iter()
                .enumerate()
                .map(|(i, v)| {
                    let x = match v {
                        Value::String(s) => s.parse::<f64>().map_err(|e| Error::Malformed {
                            field: format!("{name}[{i}]"),
                            reason: e.to_string(),
                        })?,
                        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Malformed {
                            field: format!("{name}[{i}]"),
                            reason: "not representable as f64".into(),
                        })?,
                        other => {
                            return Err(Error::Malformed {
                                field: format!("{name}[{i}]"),
                                reason: format!("expected a decimal string, got {other}"),
                            })
                        }
                    };
                    Ok(T::cast(x))
                })
                .collect()
        };
        Self::new(field("atoms")?, field("probs")?)
    }
}

fn compensated_mass<T: Real>(probs: &[T]) -> T {
    let mut s = CompensatedSum::new();
    for &p in probs {
        s.add(p);
    }
    s.value()
}
