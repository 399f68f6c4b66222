//! Kolmogorov distance between a row sum and the standard normal law.
//!
//! Small rows are folded into an exact atom list by convolution; larger ones
//! are sampled. Sampling is batched with one counter-mode stream per batch,
//! so results are bit-identical for a given seed no matter how many worker
//! threads run, and the empirical distance carries a distribution-free
//! confidence half-width from the Dvoretzky-Kiefer-Wolfowitz inequality.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{normal_cdf, DiscreteDistribution, DEFAULT_ATOM_CAP};
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::triangular_array::{build_row, limsup_proxy, ArraySpec};
use crate::Real;

/// Default confidence level for empirical distances.
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Draws per Monte-Carlo batch. Each batch owns one generator stream, which
/// pins the sample values regardless of thread scheduling.
const MC_BATCH: usize = 1 << 14;

/// How to realize the law of one row sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSumMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// The realized law: either the full atom list or a seeded sample.
#[derive(Debug, Clone)]
pub enum RowSumLaw<T> {
    Exact { n: usize, dist: DiscreteDistribution<T> },
    Empirical { n: usize, seed: u64, values: Vec<T> },
}

/// Fold the entries of row `n` into the law of their sum.
pub fn row_sum_dist<T: Real>(
    spec: &ArraySpec<T>,
    n: usize,
    method: RowSumMethod,
) -> Result<RowSumLaw<T>> {
    let row = build_row(spec, n)?;
    match method {
        RowSumMethod::Exact => Ok(RowSumLaw::Exact { n, dist: exact_row_sum(&row)? }),
        RowSumMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidConfig("sample count must be positive".into()));
            }
            Ok(RowSumLaw::Empirical { n, seed, values: sample_row_sums(&row, samples, seed) })
        }
    }
}

/// Left-to-right convolution of the row. The predicted atom count of each
/// step is checked against the cap before anything is allocated, so a row
/// whose sum law explodes combinatorially fails fast and cheap.
pub fn exact_row_sum<T: Real>(row: &[DiscreteDistribution<T>]) -> Result<DiscreteDistribution<T>> {
    let mut acc = DiscreteDistribution::point_mass(T::zero());
    for entry in row {
        acc = acc.convolve_capped(entry, DEFAULT_ATOM_CAP)?;
    }
    Ok(acc)
}

/// Seeded sample of `samples` row sums, in a deterministic order.
pub fn sample_row_sums<T: Real>(
    row: &[DiscreteDistribution<T>],
    samples: usize,
    seed: u64,
) -> Vec<T> {
    let tables: Vec<(&DiscreteDistribution<T>, Vec<T>)> =
        row.iter().map(|d| (d, d.cumulative())).collect();
    let batches = samples.div_ceil(MC_BATCH);
    let chunks: Vec<Vec<T>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            (0..count)
                .map(|_| {
                    let mut sum = T::zero();
                    for (d, cum) in &tables {
                        sum = sum + d.draw(&mut rng, cum);
                    }
                    sum
                })
                .collect()
        })
        .collect();
    chunks.concat()
}

/// `sup_x |F(x) - Phi(x)|` for an atomic `F`. The supremum over the real
/// line is attained at an atom, approached from one side or the other, so
/// both one-sided gaps are taken at every atom.
pub fn k_distance_exact<T: Real>(dist: &DiscreteDistribution<T>) -> T {
    let mut cum = CompensatedSum::new();
    let mut best = T::zero();
    for (&a, &p) in dist.atoms().iter().zip(dist.probs()) {
        let phi = normal_cdf(a);
        let below = cum.value();
        cum.add(p);
        let at = cum.value();
        best = best.max((phi - below).abs()).max((phi - at).abs());
    }
    best
}

/// `sup_x |F_m(x) - Phi(x)|` for the empirical distribution of `values`.
/// Ties are grouped so the jump at a repeated value is counted once with its
/// full height.
pub fn k_distance_empirical<T: Real>(values: &[T]) -> T {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
    let m = T::cast(sorted.len());
    let mut best = T::zero();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let phi = normal_cdf(sorted[i]);
        let below = T::cast(i) / m;
        let at = T::cast(j + 1) / m;
        best = best.max((phi - below).abs()).max((phi - at).abs());
        i = j + 1;
    }
    best
}

/// Two-sided DKW half-width: with probability at least `confidence`,
/// `sup_x |F_m - F| <= sqrt(ln(2 / (1 - confidence)) / (2 m))`.
pub fn dkw_half_width<T: Real>(samples: usize, confidence: T) -> Result<T> {
    if samples == 0 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    if !(confidence > T::zero() && confidence < T::one()) {
        return Err(Error::InvalidConfig(format!(
            "confidence level must lie in (0, 1), got {confidence}"
        )));
    }
    let eta = T::one() - confidence;
    Ok(((T::cast(2.0) / eta).ln() / (T::cast(2.0) * T::cast(samples))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMethod {
    Exact,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceBand<T> {
    pub level: T,
    pub half_width: T,
}

/// One measured distance. `confidence`, `samples` and `seed` are present
/// exactly when the value is empirical.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult<T> {
    pub n: usize,
    pub value: T,
    pub method: DistanceMethod,
    pub confidence: Option<ConfidenceBand<T>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

/// Distance of a realized row-sum law from the standard normal.
pub fn k_distance<T: Real>(law: &RowSumLaw<T>, confidence: T) -> Result<DistanceResult<T>> {
    match law {
        RowSumLaw::Exact { n, dist } => Ok(DistanceResult {
            n: *n,
            value: k_distance_exact(dist),
            method: DistanceMethod::Exact,
            confidence: None,
            samples: None,
            seed: None,
        }),
        RowSumLaw::Empirical { n, seed, values } => {
            let half_width = dkw_half_width(values.len(), confidence)?;
            Ok(DistanceResult {
                n: *n,
                value: k_distance_empirical(values),
                method: DistanceMethod::Empirical,
                confidence: Some(ConfidenceBand { level: confidence, half_width }),
                samples: Some(values.len()),
                seed: Some(*seed),
            })
        }
    }
}

/// Method selection for a distance curve over several row sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodPolicy {
    /// Try the exact fold; fall back to sampling only when the atom cap
    /// rejects it.
    Auto { samples: usize, seed: u64 },
    ExactOnly,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Distances over an increasing `n` grid plus a limit proxy.
#[derive(Debug, Clone, PartialEq)]
pub struct KCurve<T> {
    pub results: Vec<DistanceResult<T>>,
    pub plateau: T,
}

/// Measure the distance for every row size in `n_list`. Per-size sampling
/// seeds are derived as `seed + n` so each size has its own stream family
/// while the whole curve stays reproducible from one seed.
pub fn k_curve<T: Real>(
    spec: &ArraySpec<T>,
    n_list: &[usize],
    policy: MethodPolicy,
    confidence: T,
) -> Result<KCurve<T>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("n grid must be strictly increasing".into()));
    }
    let mut results = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let law = match policy {
            MethodPolicy::ExactOnly => row_sum_dist(spec, n, RowSumMethod::Exact)?,
            MethodPolicy::MonteCarlo { samples, seed } => row_sum_dist(
                spec,
                n,
                RowSumMethod::MonteCarlo { samples, seed: seed.wrapping_add(n as u64) },
            )?,
            MethodPolicy::Auto { samples, seed } => {
                match row_sum_dist(spec, n, RowSumMethod::Exact) {
                    Ok(law) => law,
                    Err(Error::AtomCapExceeded { .. }) => row_sum_dist(
                        spec,
                        n,
                        RowSumMethod::MonteCarlo { samples, seed: seed.wrapping_add(n as u64) },
                    )?,
                    Err(e) => return Err(e),
                }
            }
        };
        results.push(k_distance(&law, confidence)?);
    }
    let values: Vec<T> = results.iter().map(|r| r.value).collect();
    Ok(KCurve { plateau: limsup_proxy(&values), results })
}
