//! Rows of independent zero-mean entries with unit total variance, and the
//! negligibility indices measured on them.
//!
//! A row is a list of [`DiscreteDistribution`]s. The built-in one-parameter
//! family keeps an asymptotically non-negligible tail: entry `k` of row `n`
//! places mass `beta/(2k)` on `+-sqrt(k)/s_n` next to the bulk atoms
//! `+-1/s_n`, where `beta = alpha/(1-alpha)` and `s_n` normalizes the row
//! variance to 1. The indices quantify how much second moment survives
//! truncation (`lindeberg_tail`, [`lin_index`]) or a smooth weight
//! ([`relaxed_index`]).

use std::collections::BTreeMap;

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::numerics::{integrate, CompensatedSum};
use crate::Real;

/// Truncation thresholds used when no grid is requested explicitly.
pub const DEFAULT_EPSILON_GRID: [f64; 5] = [0.2, 0.1, 0.05, 0.02, 0.01];

/// Row sizes used when no grid is requested explicitly. The indices of the
/// built-in family converge like `log n / n`, so `1e5` settles three
/// decimals.
pub fn default_n_grid() -> Vec<usize> {
    vec![100, 1_000, 10_000, 100_000]
}

/// Recipe for the rows of a triangular array.
#[derive(Debug, Clone, PartialEq)]
pub enum ArraySpec<T> {
    /// The one-parameter example family; valid for `alpha` in `(0, 1/2]`.
    ExampleAlpha { alpha: T },
    /// User-supplied rows, keyed by row size.
    Explicit {
        rows: BTreeMap<usize, Vec<DiscreteDistribution<T>>>,
    },
}

impl<T: Real> ArraySpec<T> {
    /// The built-in family. `alpha` beyond `1/2` makes `beta > 1`, and the
    /// bulk probability `(1 - beta/k)/2` of the very first entry turns
    /// negative, so such parameters are rejected rather than reinterpreted.
    pub fn example_alpha(alpha: T) -> Result<Self> {
        if !alpha.is_finite() || alpha <= T::zero() || alpha > T::cast(0.5) {
            return Err(Error::AlphaOutOfRange {
                alpha: alpha.to_f64().unwrap_or(f64::NAN),
                n: 1,
                k: 1,
            });
        }
        Ok(ArraySpec::ExampleAlpha { alpha })
    }

    /// Explicit rows. Every entry must have mean zero and the entry
    /// variances of each row must sum to 1, both within 1e-10.
    pub fn explicit(rows: BTreeMap<usize, Vec<DiscreteDistribution<T>>>) -> Result<Self> {
        let tol = T::cast(1e-10);
        for (&n, row) in &rows {
            if row.is_empty() {
                return Err(Error::InvalidArraySpec(format!("row {n} is empty")));
            }
            let mut total = CompensatedSum::new();
            for (k, entry) in row.iter().enumerate() {
                let mean = entry.mean();
                if mean.abs() > tol {
                    return Err(Error::InvalidArraySpec(format!(
                        "row {n}, entry {}: mean {mean} is not zero",
                        k + 1
                    )));
                }
                total.add(entry.second_moment());
            }
            let total = total.value();
            if (total - T::one()).abs() > tol {
                return Err(Error::InvalidArraySpec(format!(
                    "row {n}: variances sum to {total}, not 1"
                )));
            }
        }
        Ok(ArraySpec::Explicit { rows })
    }

    pub fn alpha(&self) -> Option<T> {
        match self {
            ArraySpec::ExampleAlpha { alpha } => Some(*alpha),
            ArraySpec::Explicit { .. } => None,
        }
    }
}

/// `(1 + beta) n - beta H_n`, the squared normalizer of row `n` of the
/// example family.
pub fn s_squared<T: Real>(alpha: T, n: usize) -> T {
    let beta = alpha / (T::one() - alpha);
    (T::one() + beta) * T::cast(n) - beta * harmonic(n)
}

fn harmonic<T: Real>(n: usize) -> T {
    let mut s = CompensatedSum::new();
    for i in 1..=n {
        s.add(T::one() / T::cast(i));
    }
    s.value()
}

/// Materialize row `n`. Entry `k >= 2` of the example family carries atoms
/// `+-1/s_n` with probability `(1 - beta/k)/2` each and `+-sqrt(k)/s_n` with
/// probability `beta/(2k)` each; for `k = 1` the two pairs coincide and merge
/// into `+-1/s_n` with probability `1/2` each.
pub fn build_row<T: Real>(spec: &ArraySpec<T>, n: usize) -> Result<Vec<DiscreteDistribution<T>>> {
    if n == 0 {
        return Err(Error::InvalidArraySpec("row size must be at least 1".into()));
    }
    match spec {
        ArraySpec::ExampleAlpha { alpha } => {
            let one = T::one();
            let half = T::cast(0.5);
            let beta = *alpha / (one - *alpha);
            let s = s_squared(*alpha, n).sqrt();
            let bulk = one / s;
            let mut row = Vec::with_capacity(n);
            row.push(DiscreteDistribution::new(vec![-bulk, bulk], vec![half, half])?);
            for k in 2..=n {
                let kf = T::cast(k);
                let spread = kf.sqrt() / s;
                let p_spread = beta / (T::cast(2.0) * kf);
                let p_bulk = half * (one - beta / kf);
                row.push(DiscreteDistribution::new(
                    vec![-spread, -bulk, bulk, spread],
                    vec![p_spread, p_bulk, p_bulk, p_spread],
                )?);
            }
            Ok(row)
        }
        ArraySpec::Explicit { rows } => rows
            .get(&n)
            .cloned()
            .ok_or_else(|| Error::InvalidArraySpec(format!("no explicit row for n = {n}"))),
    }
}

/// Largest entry second moment of the row; the row is asymptotically
/// negligible when this tends to 0 along `n`.
pub fn feller_max<T: Real>(row: &[DiscreteDistribution<T>]) -> T {
    row.iter()
        .map(|d| d.second_moment())
        .fold(T::zero(), T::max)
}

/// Second moment at or beyond the threshold:
/// `sum_k sum_{|atom| >= epsilon} atom^2 prob`.
pub fn lindeberg_tail<T: Real>(row: &[DiscreteDistribution<T>], epsilon: T) -> Result<T> {
    if !(epsilon > T::zero()) {
        return Err(Error::NonPositiveEpsilon(epsilon.to_f64().unwrap_or(f64::NAN)));
    }
    let mut s = CompensatedSum::new();
    for d in row {
        for (&a, &p) in d.atoms().iter().zip(d.probs()) {
            if a.abs() >= epsilon {
                s.add(a * a * p);
            }
        }
    }
    Ok(s.value())
}

/// Weight applied to `|atom|` inside [`relaxed_index`]. Members must vanish
/// at 0, be non-decreasing with range in `[0, 1]`, and be strictly positive
/// away from 0.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction<T> {
    /// `1 - exp(-gamma x^2)`.
    PhiGamma { gamma: T },
    /// `1 - integral_0^1 exp(-(1 - s^2) x^2 / 2) ds`, evaluated by
    /// quadrature and memoized; see [`psi_half`].
    PsiHalf,
    /// Piecewise-linear interpolation of `(x, value)` nodes starting at
    /// `(0, 0)`; constant beyond the last node.
    Table { nodes: Vec<(T, T)> },
}

impl<T: Real> WeightFunction<T> {
    pub fn phi_gamma(gamma: T) -> Result<Self> {
        let w = WeightFunction::PhiGamma { gamma };
        w.validate()?;
        Ok(w)
    }

    pub fn table(nodes: Vec<(T, T)>) -> Result<Self> {
        let w = WeightFunction::Table { nodes };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFunction::PhiGamma { gamma } => {
                if !gamma.is_finite() || *gamma <= T::zero() {
                    return Err(Error::InvalidWeight(format!(
                        "gamma must be positive and finite, got {gamma}"
                    )));
                }
            }
            WeightFunction::PsiHalf => {}
            WeightFunction::Table { nodes } => {
                if nodes.len() < 2 {
                    return Err(Error::InvalidWeight("table needs at least 2 nodes".into()));
                }
                if !(nodes[0].0 == T::zero() && nodes[0].1 == T::zero()) {
                    return Err(Error::InvalidWeight(
                        "table must start at (0, 0): the weight vanishes at 0".into(),
                    ));
                }
                if nodes[1].1 <= T::zero() {
                    return Err(Error::InvalidWeight(
                        "table must be strictly positive away from 0".into(),
                    ));
                }
                for w in nodes.windows(2) {
                    if !(w[1].0.is_finite() && w[1].1.is_finite()) {
                        return Err(Error::InvalidWeight("non-finite table node".into()));
                    }
                    if w[1].0 <= w[0].0 {
                        return Err(Error::InvalidWeight(
                            "table abscissae must be strictly increasing".into(),
                        ));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(Error::InvalidWeight("table must be non-decreasing".into()));
                    }
                }
                if nodes.last().unwrap().1 > T::one() {
                    return Err(Error::InvalidWeight("table values must stay within [0, 1]".into()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn evaluator(&self) -> Result<WeightEval<T>> {
        self.validate()?;
        Ok(match self {
            WeightFunction::PhiGamma { gamma } => WeightEval::Phi { gamma: *gamma },
            WeightFunction::PsiHalf => {
                let step = T::cast(PSI_TABLE_MAX / PSI_TABLE_STEPS as f64);
                let mut values = Vec::with_capacity(PSI_TABLE_STEPS + 1);
                for i in 0..=PSI_TABLE_STEPS {
                    values.push(psi_half(T::cast(i) * step)?);
                }
                WeightEval::Psi { step, values }
            }
            WeightFunction::Table { nodes } => WeightEval::Table { nodes: nodes.clone() },
        })
    }

    pub fn label(&self) -> String {
        match self {
            WeightFunction::PhiGamma { gamma } => format!("phi_gamma({gamma})"),
            WeightFunction::PsiHalf => "psi_half".into(),
            WeightFunction::Table { nodes } => format!("table({} nodes)", nodes.len()),
        }
    }
}

/// Upper end of the memo grid behind the `PsiHalf` evaluator; larger
/// arguments fall back to direct quadrature.
pub const PSI_TABLE_MAX: f64 = 12.0;
const PSI_TABLE_STEPS: usize = 1 << 15;

/// Compiled weight: cheap to call inside atom loops. Interpolation between
/// monotone nodes keeps the evaluated weight monotone; the memo grid is fine
/// enough for about 1e-8 absolute accuracy.
pub(crate) enum WeightEval<T> {
    Phi { gamma: T },
    Psi { step: T, values: Vec<T> },
    Table { nodes: Vec<(T, T)> },
}

impl<T: Real> WeightEval<T> {
    pub(crate) fn eval(&self, x: T) -> Result<T> {
        let y = x.abs();
        Ok(match self {
            WeightEval::Phi { gamma } => -(-(*gamma) * y * y).exp_m1(),
            WeightEval::Psi { step, values } => {
                let top = T::cast(PSI_TABLE_MAX);
                if y >= top {
                    return psi_half(y);
                }
                let pos = y / *step;
                let i = pos.floor().to_usize().unwrap_or(0).min(values.len() - 2);
                let frac = pos - T::cast(i);
                values[i] + (values[i + 1] - values[i]) * frac
            }
            WeightEval::Table { nodes } => {
                if y <= nodes[0].0 {
                    nodes[0].1
                } else if y >= nodes.last().unwrap().0 {
                    nodes.last().unwrap().1
                } else {
                    let j = nodes.partition_point(|&(a, _)| a <= y);
                    let (x0, v0) = nodes[j - 1];
                    let (x1, v1) = nodes[j];
                    v0 + (v1 - v0) * (y - x0) / (x1 - x0)
                }
            }
        })
    }
}

/// `1 - integral_0^1 exp(-(1 - s^2) x^2 / 2) ds` by quadrature at tolerance
/// 1e-12. The integrand is written through `expm1` so small arguments keep
/// full absolute accuracy.
pub fn psi_half<T: Real>(x: T) -> Result<T> {
    if x == T::zero() {
        return Ok(T::zero());
    }
    let half_x2 = x * x * T::cast(0.5);
    let q = integrate(
        |s: T| -(-(T::one() - s * s) * half_x2).exp_m1(),
        T::zero(),
        T::one(),
        T::cast(1e-12),
    )?;
    Ok(q.value)
}

/// One measured value of an index: row size, optional threshold or weight
/// parameter, and the finite-`n` sum.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSample<T> {
    pub n: usize,
    pub parameter: Option<T>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexKind<T> {
    Lindeberg,
    Relaxed(WeightFunction<T>),
}

/// Finite-`n` index values over a grid, together with a limit proxy and the
/// closed form when one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport<T> {
    pub kind: IndexKind<T>,
    pub alpha: Option<T>,
    pub n_grid: Vec<usize>,
    pub epsilon_grid: Vec<T>,
    pub finite_values: Vec<IndexSample<T>>,
    pub limit_estimate: T,
    pub closed_form: Option<T>,
}

/// Proxy for the large-`n` limit of a sequence sampled on an increasing
/// grid: the maximum over the last third of the grid. Empty input gives 0.
pub fn limsup_proxy<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let start = values.len() - values.len().div_ceil(3);
    values[start..]
        .iter()
        .fold(T::neg_infinity(), |m, &v| m.max(v))
}

fn check_n_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::InvalidConfig("empty n grid".into()));
    }
    if n_grid[0] == 0 {
        return Err(Error::InvalidConfig("row sizes start at 1".into()));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("n grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Truncated-second-moment index over an `(n, epsilon)` grid.
///
/// The limit proxy takes, for each threshold, the maximum finite value over
/// the last third of the `n` grid, then the maximum over thresholds; since
/// the tail grows as the threshold shrinks this is attained at the smallest
/// one. The closed form for the example family is `alpha` itself.
pub fn lin_index<T: Real>(
    spec: &ArraySpec<T>,
    epsilon_grid: &[T],
    n_grid: &[usize],
) -> Result<IndexReport<T>> {
    check_n_grid(n_grid)?;
    if epsilon_grid.is_empty() {
        return Err(Error::InvalidConfig("empty epsilon grid".into()));
    }
    if epsilon_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig(
            "epsilon grid must decrease toward 0".into(),
        ));
    }
    let mut finite_values = Vec::with_capacity(n_grid.len() * epsilon_grid.len());
    for &n in n_grid {
        let row = build_row(spec, n)?;
        for &eps in epsilon_grid {
            finite_values.push(IndexSample {
                n,
                parameter: Some(eps),
                value: lindeberg_tail(&row, eps)?,
            });
        }
    }
    let limit_estimate = epsilon_grid
        .iter()
        .enumerate()
        .map(|(j, _)| {
            let series: Vec<T> = finite_values
                .iter()
                .skip(j)
                .step_by(epsilon_grid.len())
                .map(|s| s.value)
                .collect();
            limsup_proxy(&series)
        })
        .fold(T::zero(), T::max);
    Ok(IndexReport {
        kind: IndexKind::Lindeberg,
        alpha: spec.alpha(),
        n_grid: n_grid.to_vec(),
        epsilon_grid: epsilon_grid.to_vec(),
        finite_values,
        limit_estimate,
        closed_form: spec.alpha().map(lin_closed_form),
    })
}

/// Weighted-second-moment index `sum_k E[entry^2 w(|entry|)]` over an `n`
/// grid. The closed form is available for the example family with the
/// `PhiGamma` weight.
pub fn relaxed_index<T: Real>(
    spec: &ArraySpec<T>,
    weight: &WeightFunction<T>,
    n_grid: &[usize],
) -> Result<IndexReport<T>> {
    check_n_grid(n_grid)?;
    let eval = weight.evaluator()?;
    let mut finite_values = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let row = build_row(spec, n)?;
        let mut sum = CompensatedSum::new();
        for d in &row {
            for (&a, &p) in d.atoms().iter().zip(d.probs()) {
                sum.add(a * a * eval.eval(a)? * p);
            }
        }
        finite_values.push(IndexSample { n, parameter: None, value: sum.value() });
    }
    let series: Vec<T> = finite_values.iter().map(|s| s.value).collect();
    let closed_form = match (spec.alpha(), weight) {
        (Some(alpha), WeightFunction::PhiGamma { gamma }) => {
            Some(relaxed_closed_form(alpha, *gamma))
        }
        _ => None,
    };
    Ok(IndexReport {
        kind: IndexKind::Relaxed(weight.clone()),
        alpha: spec.alpha(),
        n_grid: n_grid.to_vec(),
        epsilon_grid: Vec::new(),
        finite_values,
        limit_estimate: limsup_proxy(&series),
        closed_form,
    })
}

/// Limit of the truncated index for the example family.
pub fn lin_closed_form<T: Real>(alpha: T) -> T {
    alpha
}

/// Limit of the `PhiGamma`-weighted index for the example family:
/// `alpha (1 - (1 - exp(-gamma (1 - alpha))) / (gamma (1 - alpha)))`.
pub fn relaxed_closed_form<T: Real>(alpha: T, gamma: T) -> T {
    let u = gamma * (T::one() - alpha);
    alpha * (T::one() + (-u).exp_m1() / u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example(alpha: f64) -> ArraySpec<f64> {
        ArraySpec::example_alpha(alpha).unwrap()
    }

    #[test]
    fn squared_normalizer_at_small_n_is_exact() {
        assert_eq!(s_squared(0.5, 2), 2.5);
        assert_eq!(s_squared(0.5, 1), 1.0);
    }

    #[test]
    fn two_entry_row_matches_hand_computation() {
        let row = build_row(&example(0.5), 2).unwrap();
        let s = 2.5f64.sqrt();
        assert_eq!(row[0].atoms(), &[-1.0 / s, 1.0 / s]);
        assert_eq!(row[0].probs(), &[0.5, 0.5]);
        assert_eq!(row[1].probs(), &[0.25, 0.25, 0.25, 0.25]);
        assert_abs_diff_eq!(row[0].second_moment(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(row[1].second_moment(), 0.6, epsilon = 1e-15);
    }

    #[test]
    fn entry_variances_follow_the_closed_law_and_sum_to_one() {
        for &(alpha, n) in &[(0.5, 2), (0.25, 50), (0.1, 7)] {
            let beta = alpha / (1.0 - alpha);
            let s2 = s_squared(alpha, n);
            let row = build_row(&example(alpha), n).unwrap();
            let mut total = 0.0;
            for (k, d) in row.iter().enumerate() {
                let v = d.second_moment();
                let law = (1.0 + beta - beta / (k + 1) as f64) / s2;
                assert_abs_diff_eq!(v, law, epsilon = 1e-14);
                total += v;
            }
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn alpha_beyond_half_names_the_first_bad_entry() {
        let err = ArraySpec::example_alpha(0.6).unwrap_err();
        match err {
            Error::AlphaOutOfRange { n, k, .. } => assert_eq!((n, k), (1, 1)),
            other => panic!("unexpected error: {other}"),
        }
        assert!(err.to_string().contains("(0, 1/2]"), "{err}");
        assert!(ArraySpec::example_alpha(0.0).is_err());
        assert!(ArraySpec::example_alpha(-0.1).is_err());
        assert!(ArraySpec::example_alpha(0.5).is_ok());
    }

    #[test]
    fn explicit_rows_are_checked_for_the_array_conditions() {
        let coin = DiscreteDistribution::new(vec![-0.5, 0.5], vec![0.5, 0.5]).unwrap();
        // Two +-1/2 coins only reach total variance 1/2.
        let err =
            ArraySpec::explicit(BTreeMap::from([(2, vec![coin.clone(), coin.clone()])])).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        let shifted = DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let err = ArraySpec::explicit(BTreeMap::from([(1, vec![shifted])])).unwrap_err();
        assert!(err.to_string().contains("mean"), "{err}");
        let wide = DiscreteDistribution::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let spec = ArraySpec::explicit(BTreeMap::from([(1, vec![wide])])).unwrap();
        assert_eq!(build_row(&spec, 1).unwrap().len(), 1);
        assert!(build_row(&spec, 3).is_err());
    }

    #[test]
    fn feller_max_is_the_last_entry_and_shrinks_with_n() {
        let row = build_row(&example(0.5), 2).unwrap();
        assert_abs_diff_eq!(feller_max(&row), 0.6, epsilon = 1e-15);
        let single = build_row(&example(0.3), 1).unwrap();
        assert_abs_diff_eq!(feller_max(&single), 1.0, epsilon = 1e-15);
        let mut prev = f64::INFINITY;
        for n in [100, 1_000, 10_000] {
            let m = feller_max(&build_row(&example(0.25), n).unwrap());
            assert!(m < prev, "not decreasing at n = {n}");
            prev = m;
        }
    }

    #[test]
    fn truncated_second_moment_matches_the_atom_count_formula() {
        let row = build_row(&example(0.5), 100).unwrap();
        let tail = lindeberg_tail(&row, 0.2).unwrap();
        assert_abs_diff_eq!(tail, 0.4773817980322134, epsilon = 1e-13);
        // Count view: spread atoms with sqrt(k)/s >= 0.2 are k >= 8, and
        // each contributes beta/s^2.
        let s2 = s_squared(0.5f64, 100);
        let first = (0.04 * s2).ceil();
        assert_abs_diff_eq!(tail, (100.0 - first + 1.0) / s2, epsilon = 1e-13);
    }

    #[test]
    fn truncation_limits() {
        let row = build_row(&example(0.5), 20).unwrap();
        assert_eq!(lindeberg_tail(&row, 10.0).unwrap(), 0.0);
        assert_abs_diff_eq!(lindeberg_tail(&row, 1e-9).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            lindeberg_tail(&row, 0.0),
            Err(Error::NonPositiveEpsilon(_))
        ));
    }

    #[test]
    fn truncated_index_report() {
        let report = lin_index(&example(0.3), &[0.2, 0.1], &[100, 200, 400, 1_000]).unwrap();
        assert_eq!(report.closed_form, Some(0.3));
        assert_eq!(report.finite_values.len(), 8);
        // Finite values at the small threshold approach alpha - beta eps^2.
        let beta: f64 = 0.3 / 0.7;
        let last = report.finite_values.last().unwrap();
        assert_eq!((last.n, last.parameter), (1_000, Some(0.1)));
        assert_abs_diff_eq!(last.value, 0.3 - beta * 0.01, epsilon = 0.002);
        assert!(report.limit_estimate >= last.value - 1e-15);

        // Rows of +-1/sqrt(n) coins have no mass at or beyond 0.2 once
        // n > 25, so every value vanishes.
        let n = 36;
        let c = 1.0 / 6.0;
        let coin = DiscreteDistribution::new(vec![-c, c], vec![0.5, 0.5]).unwrap();
        let spec = ArraySpec::explicit(BTreeMap::from([(n, vec![coin; n])])).unwrap();
        let report = lin_index(&spec, &[0.2], &[36]).unwrap();
        assert_eq!(report.finite_values[0].value, 0.0);
        assert_eq!(report.closed_form, None);
    }

    #[test]
    fn grid_validation() {
        let spec = example(0.5);
        assert!(lin_index(&spec, &[], &[10]).is_err());
        assert!(lin_index(&spec, &[0.1, 0.2], &[10]).is_err());
        assert!(lin_index(&spec, &[0.2, 0.1], &[]).is_err());
        assert!(lin_index(&spec, &[0.2, 0.1], &[10, 10]).is_err());
        assert!(relaxed_index(&spec, &WeightFunction::PsiHalf, &[0]).is_err());
    }

    #[test]
    fn weighted_closed_forms() {
        assert_abs_diff_eq!(
            relaxed_closed_form(0.5, 0.5),
            0.057601566142809736,
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            relaxed_closed_form(0.25, 0.5),
            0.04152618586064813,
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            relaxed_closed_form(0.3, 1.0),
            0.08425084448203264,
            epsilon = 1e-16
        );
    }

    #[test]
    fn weighted_closed_form_rises_to_the_truncated_limit() {
        let mut prev = 0.0;
        for gamma in [1.0, 10.0, 100.0, 1000.0] {
            let v = relaxed_closed_form(0.3, gamma);
            assert!(v > prev && v < 0.3);
            prev = v;
        }
        assert!(0.3 - prev < 5e-4);
    }

    #[test]
    fn weighted_index_finite_value_matches_reference_sum() {
        let w = WeightFunction::phi_gamma(0.5).unwrap();
        let report = relaxed_index(&example(0.5), &w, &[1_000]).unwrap();
        assert_abs_diff_eq!(
            report.finite_values[0].value,
            0.05819842432618114,
            epsilon = 1e-13
        );
        assert_eq!(report.closed_form, Some(relaxed_closed_form(0.5, 0.5)));
    }

    #[test]
    fn zero_variance_entry_contributes_nothing() {
        let coin = DiscreteDistribution::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let still = DiscreteDistribution::point_mass(0.0);
        let spec = ArraySpec::explicit(BTreeMap::from([(2, vec![still, coin])])).unwrap();
        let w = WeightFunction::phi_gamma(2.0).unwrap();
        let report = relaxed_index(&spec, &w, &[2]).unwrap();
        assert_abs_diff_eq!(
            report.finite_values[0].value,
            -(-2.0f64).exp_m1(),
            epsilon = 1e-15
        );
    }

    // Quadrature references for the s-integral weight.
    const PSI_REFERENCE: &[(f64, f64)] = &[
        (0.25, 0.020575225759913773),
        (0.5, 0.07931143476103027),
        (1.0, 0.2752215409929237),
        (2.0, 0.6800059627172955),
        (3.0, 0.8689443736110433),
        (5.0, 0.9581508485609049),
        (10.0, 0.9898968384350814),
    ];

    #[test]
    fn psi_half_matches_reference_quadrature() {
        assert_eq!(psi_half(0.0).unwrap(), 0.0);
        for &(x, want) in PSI_REFERENCE {
            assert_abs_diff_eq!(psi_half(x).unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn memoized_psi_tracks_the_exact_values() {
        let eval = WeightFunction::<f64>::PsiHalf.evaluator().unwrap();
        for &(x, want) in PSI_REFERENCE {
            assert_abs_diff_eq!(eval.eval(x).unwrap(), want, epsilon = 1e-7);
        }
        // Beyond the memo grid the evaluator falls back to quadrature.
        assert_abs_diff_eq!(
            eval.eval(13.0).unwrap(),
            psi_half(13.0).unwrap(),
            epsilon = 1e-14
        );
        assert_eq!(eval.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn psi_weighted_index_sits_under_phi_half_within_a_factor() {
        let spec = example(0.5);
        let psi = relaxed_index(&spec, &WeightFunction::PsiHalf, &[50]).unwrap();
        let phi = relaxed_index(&spec, &WeightFunction::phi_gamma(0.5).unwrap(), &[50]).unwrap();
        let (p, q) = (psi.finite_values[0].value, phi.finite_values[0].value);
        assert!(p <= q + 1e-7, "psi {p} vs phi {q}");
        assert!(q <= 1.5 * p + 1e-7, "phi {q} vs 1.5 psi {p}");
    }

    #[test]
    fn table_weight_is_validated_and_interpolated() {
        assert!(WeightFunction::table(vec![(0.0, 0.0)]).is_err());
        assert!(WeightFunction::table(vec![(0.1, 0.0), (1.0, 1.0)]).is_err());
        assert!(WeightFunction::table(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(WeightFunction::table(vec![(0.0, 0.0), (1.0, 0.8), (2.0, 0.5)]).is_err());
        assert!(WeightFunction::table(vec![(0.0, 0.0), (1.0, 0.8), (2.0, 1.2)]).is_err());
        let w = WeightFunction::table(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)]).unwrap();
        let eval = w.evaluator().unwrap();
        assert_eq!(eval.eval(0.5).unwrap(), 0.25);
        assert_eq!(eval.eval(-0.5).unwrap(), 0.25);
        assert_eq!(eval.eval(3.0).unwrap(), 1.0);
        assert!(WeightFunction::phi_gamma(0.0).is_err());
    }

    #[test]
    fn limit_proxy_takes_the_tail_maximum() {
        assert_eq!(limsup_proxy(&[1.0, 5.0, 2.0, 3.0]), 3.0);
        assert_eq!(limsup_proxy(&[4.0]), 4.0);
        assert_eq!(limsup_proxy::<f64>(&[]), 0.0);
    }
}
