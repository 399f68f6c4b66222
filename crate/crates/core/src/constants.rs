//! The constant pipeline behind the lower bound.
//!
//! Everything here revolves around the odd function
//!
//! `f(x) = (1 - exp(-sigma^2 x^2 / 2)) / x`,
//!
//! which is the solution of the Stein-type equation driven by the centered
//! Gaussian characteristic function `exp(-sigma^2 x^2 / 2)`. Three numbers
//! are extracted: the mass a unit jump feeds through the smoothing kernel
//! (`integral_jump`), the total variation of the kernel's derivative
//! (`tv_muhat`, identically 2), and `integral |f''|`. Their combination
//! `c_psi = (tv_muhat + integral_f2) / integral_jump` converts a weighted
//! negligibility index into a lower bound on the limiting Kolmogorov
//! distance; `sigma = 1.7` gives `c_psi` about 20.19, close to the best
//! value over the admissible window.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::distributions::normal_pdf;
use crate::error::{Error, Result};
use crate::numerics::{bracket_scan, find_root, integrate, integrate_split, RootResult};
use crate::triangular_array::psi_half;
use crate::Real;

/// `(f, f', f'')` at `x` for the family parameter `sigma > 0`.
///
/// Near the origin (`sigma^2 x^2 < 1/2`) the closed forms lose digits to
/// cancellation, so the alternating power series in `x^2` is summed instead;
/// both branches agree to machine precision at the seam.
pub fn f_sigma_eval<T: Real>(sigma: T, x: T) -> Result<(T, T, T)> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "family parameter sigma must be positive and finite, got {sigma}"
        )));
    }
    let a = sigma * sigma;
    let half = T::cast(0.5);
    if x == T::zero() {
        return Ok((T::zero(), a * half, T::zero()));
    }
    let x2 = x * x;
    let u = a * x2;
    if u < half {
        // c_m = -(-a/2)^m / m!; f = sum c_m x^(2m-1), termwise derivatives.
        let mut c = a * half;
        let mut p = T::one();
        let (mut f, mut f1, mut f2) = (T::zero(), T::zero(), T::zero());
        for m in 1..=60usize {
            let d = T::cast(2 * m - 1);
            f += c * p * x;
            let t1 = c * d * p;
            f1 += t1;
            f2 += c * d * (d - T::one()) * p / x;
            if m > 2 && t1.abs() <= T::epsilon() * f1.abs() {
                break;
            }
            c = -c * a * half / T::cast(m + 1);
            p *= x2;
        }
        Ok((f, f1, f2))
    } else {
        let e = (-u * half).exp();
        let em = (-u * half).exp_m1();
        let two = T::cast(2.0);
        Ok((
            -em / x,
            a * e + em / x2,
            (two - e * (two + u + u * u)) / (x2 * x),
        ))
    }
}

/// Admissible window for the family parameter. Outside it the scan bracket
/// `[0.1, 10]` no longer safely contains the inflection point.
pub const SIGMA_WINDOW: (f64, f64) = (0.5, 3.0);

/// Positive inflection point of `f`: the root of `f'' = 0`, located by a
/// coarse sign scan and polished to width 1e-10. Scales as `R(sigma) =
/// R(1) / sigma` with `R(1)` about 2.535.
pub fn find_r<T: Real>(sigma: T) -> Result<RootResult<T>> {
    let (lo, hi) = SIGMA_WINDOW;
    if !(sigma >= T::cast(lo) && sigma <= T::cast(hi)) {
        return Err(Error::InvalidConfig(format!(
            "sigma = {sigma} outside the supported window [{lo}, {hi}]"
        )));
    }
    let f2 = |x: T| f_sigma_eval(sigma, x).map(|t| t.2).unwrap_or(T::nan());
    let bracket = bracket_scan(f2, T::cast(0.1), T::cast(10.0), T::cast(0.1))?;
    find_root(f2, bracket.0, bracket.1, T::cast(1e-10))
}

/// All derived constants for one `sigma`, with the residuals of the
/// closed-form/quadrature cross-checks that validated them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsRecord<T> {
    pub sigma: T,
    pub r: T,
    pub integral_jump: T,
    pub tv_muhat: T,
    pub integral_f2: T,
    pub c_psi: T,
    pub c_half: T,
    pub c_tilde: T,
    pub residual_jump: T,
    pub residual_tv: T,
    pub residual_f2: T,
}

const CROSS_CHECK_TOL: f64 = 1e-6;
const TV_TOL: f64 = 1e-8;

/// Compute the constants for one `sigma`, cross-checking every closed form
/// by quadrature. A residual above tolerance aborts with
/// [`Error::CheckFailed`] instead of returning a silently wrong constant.
pub fn constants_pipeline<T: Real>(sigma: T) -> Result<ConstantsRecord<T>> {
    let r = find_r(sigma)?.root;
    let a = sigma * sigma;
    let half = T::cast(0.5);
    let one = T::one();
    let two = T::cast(2.0);
    let tol = T::cast(1e-10);

    // Mass a unit jump at the origin keeps after Gaussian smoothing with an
    // N(0, sigma^2)-distributed shift.
    let jump_closed = {
        let s2 = one + a;
        one - (one + a / (two * s2)) / s2.sqrt()
    };
    let jump_quad = integrate(
        |x: T| {
            // 1 - (1 + x^2/2) e^{-x^2/2}, written via expm1 for small x.
            let w = x * x * half;
            let weight = -(-w).exp_m1() - w * (-w).exp();
            weight * normal_pdf(x / sigma) / sigma
        },
        T::neg_infinity(),
        T::infinity(),
        tol,
    )?
    .value;
    let residual_jump = (jump_closed - jump_quad).abs();
    if residual_jump > T::cast(CROSS_CHECK_TOL) {
        return Err(Error::CheckFailed {
            name: "integral_jump".into(),
            residual: residual_jump.to_f64().unwrap_or(f64::NAN),
            tolerance: CROSS_CHECK_TOL,
        });
    }

    // Total variation of d/dx exp(-sigma^2 x^2 / 2): always exactly 2.
    let tv_quad = integrate_split(
        |x: T| a * x.abs() * (-a * x * x * half).exp(),
        T::neg_infinity(),
        T::infinity(),
        tol,
        &[T::zero()],
    )?
    .value;
    let residual_tv = (tv_quad - two).abs();
    if residual_tv > T::cast(TV_TOL) {
        return Err(Error::CheckFailed {
            name: "tv_muhat".into(),
            residual: residual_tv.to_f64().unwrap_or(f64::NAN),
            tolerance: TV_TOL,
        });
    }

    // integral |f''| over the line: f'' is odd-symmetric in sign around its
    // single positive zero r, which telescopes to sigma^2 - 4 f'(r).
    let f1_at_r = f_sigma_eval(sigma, r)?.1;
    let intf2_closed = a - T::cast(4.0) * f1_at_r;
    let intf2_quad = two
        * integrate_split(
            |x: T| f_sigma_eval(sigma, x).map(|t| t.2.abs()).unwrap_or(T::nan()),
            T::zero(),
            T::infinity(),
            tol,
            &[r],
        )?
        .value;
    let residual_f2 = (intf2_closed - intf2_quad).abs();
    if residual_f2 > T::cast(CROSS_CHECK_TOL) {
        return Err(Error::CheckFailed {
            name: "integral_f2".into(),
            residual: residual_f2.to_f64().unwrap_or(f64::NAN),
            tolerance: CROSS_CHECK_TOL,
        });
    }

    let c_psi = (two + intf2_closed) / jump_closed;
    let c_half = T::cast(1.5) * c_psi;
    Ok(ConstantsRecord {
        sigma,
        r,
        integral_jump: jump_closed,
        tv_muhat: tv_quad,
        integral_f2: intf2_closed,
        c_psi,
        c_half,
        c_tilde: one / c_half,
        residual_jump,
        residual_tv,
        residual_f2,
    })
}

/// `c_psi` over a `sigma` grid, tracking the minimum. Ties resolve to the
/// smaller parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaScan<T> {
    pub best_sigma: T,
    pub best_c_psi: T,
    pub table: Vec<(T, T)>,
}

pub fn sigma_scan<T: Real>(lo: T, hi: T, step: T) -> Result<SigmaScan<T>> {
    let window = SIGMA_WINDOW;
    if !(step > T::zero()) || hi < lo || lo < T::cast(window.0) || hi > T::cast(window.1) {
        return Err(Error::InvalidConfig(format!(
            "scan needs window.0 <= lo <= hi <= window.1 and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let s = lo + T::cast(i) * step;
        if s > hi + step * T::cast(1e-9) {
            break;
        }
        grid.push(s);
        i += 1;
    }
    let table: Vec<(T, T)> = grid
        .par_iter()
        .map(|&s| constants_pipeline(s).map(|rec| (s, rec.c_psi)))
        .collect::<Result<_>>()?;
    let (mut best_sigma, mut best_c_psi) = table[0];
    for &(s, c) in &table[1..] {
        if c < best_c_psi {
            best_sigma = s;
            best_c_psi = c;
        }
    }
    Ok(SigmaScan { best_sigma, best_c_psi, table })
}

/// Configuration of [`identity_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityConfig<T> {
    /// Shifts `a` for the shifted-expectation relation.
    pub relation_shifts: Vec<T>,
    /// `(sigma, a)` pairs for the cosine-transform identity.
    pub transform_pairs: Vec<(T, T)>,
    /// `(lo, hi, step)` grid for the weight sandwich.
    pub sandwich_grid: (T, T, T),
    pub tol_relation: T,
    pub tol_transform: T,
    pub sandwich_slack: T,
}

impl<T: Real> Default for IdentityConfig<T> {
    fn default() -> Self {
        IdentityConfig {
            relation_shifts: vec![T::cast(0.5), T::one(), T::cast(2.0)],
            transform_pairs: vec![
                (T::one(), T::one()),
                (T::cast(1.7), T::cast(0.5)),
                (T::cast(2.0), T::cast(2.0)),
            ],
            sandwich_grid: (T::zero(), T::cast(10.0), T::cast(1e-3)),
            tol_relation: T::cast(1e-6),
            tol_transform: T::cast(1e-8),
            sandwich_slack: T::cast(1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationLine<T> {
    pub a: T,
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformLine<T> {
    pub sigma: T,
    pub a: T,
    pub lhs: T,
    pub rhs: T,
    pub closed: T,
    pub residual: T,
}

/// Results of the identity battery. `tail_gap_*` report `1 - w(10)` for the
/// two weights; the exponential weight closes this gap to about 2e-22 while
/// the s-averaged weight still sits about 1e-2 away at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityChecks<T> {
    pub relation: Vec<RelationLine<T>>,
    pub transform: Vec<TransformLine<T>>,
    pub sandwich_margin_low: T,
    pub sandwich_margin_high: T,
    pub tail_gap_psi: T,
    pub tail_gap_phi: T,
    pub pass: bool,
}

/// Verify the identities the lower-bound derivation rests on.
///
/// 1. For bounded odd `f` (here `tanh`) and `g(x) = x f(x)`:
///    `a^2 integral_0^1 E[g(xi + s a)] e^{-(1-s^2) a^2 / 2} ds = a E[f(xi + a)]`.
/// 2. `E[exp(-sigma^2 (xi + a)^2 / 2)]` equals the cosine transform
///    `integral exp(-x^2/2) cos(a x) dmu(x)` for `mu = N(0, sigma^2)`; both
///    sides equal `exp(-sigma^2 a^2 / (2 (1 + sigma^2))) / sqrt(1 + sigma^2)`.
/// 3. The weight sandwich `psi(x) <= 1 - exp(-x^2/2) <= 1.5 psi(x)` on the
///    grid, where `psi` is the s-averaged weight of `psi_half`.
///
/// Any residual beyond its tolerance aborts with a named
/// [`Error::CheckFailed`].
pub fn identity_checks<T: Real>(config: &IdentityConfig<T>) -> Result<IdentityChecks<T>> {
    let half = T::cast(0.5);
    let one = T::one();
    let inner_tol = T::cast(1e-9);

    let mut relation = Vec::with_capacity(config.relation_shifts.len());
    for &a in &config.relation_shifts {
        let pending: RefCell<Option<Error>> = RefCell::new(None);
        let outer = integrate(
            |s: T| {
                let shifted = integrate(
                    |x: T| {
                        let y = x + s * a;
                        y * y.tanh() * normal_pdf(x)
                    },
                    T::neg_infinity(),
                    T::infinity(),
                    inner_tol,
                );
                match shifted {
                    Ok(q) => q.value * (-(one - s * s) * a * a * half).exp(),
                    Err(e) => {
                        pending.borrow_mut().get_or_insert(e);
                        T::zero()
                    }
                }
            },
            T::zero(),
            one,
            inner_tol,
        )?;
        if let Some(e) = pending.into_inner() {
            return Err(e);
        }
        let lhs = a * a * outer.value;
        let rhs = a * integrate(
            |x: T| (x + a).tanh() * normal_pdf(x),
            T::neg_infinity(),
            T::infinity(),
            inner_tol,
        )?
        .value;
        let residual = (lhs - rhs).abs();
        if residual > config.tol_relation {
            return Err(Error::CheckFailed {
                name: format!("shifted-tanh relation at a = {a}"),
                residual: residual.to_f64().unwrap_or(f64::NAN),
                tolerance: config.tol_relation.to_f64().unwrap_or(f64::NAN),
            });
        }
        relation.push(RelationLine { a, lhs, rhs, residual });
    }

    let tol = T::cast(1e-10);
    let mut transform = Vec::with_capacity(config.transform_pairs.len());
    for &(sigma, a) in &config.transform_pairs {
        let s2 = sigma * sigma;
        let lhs = integrate(
            |x: T| {
                let y = x + a;
                normal_pdf(x) * (-s2 * y * y * half).exp()
            },
            T::neg_infinity(),
            T::infinity(),
            tol,
        )?
        .value;
        let rhs = integrate(
            |x: T| (-x * x * half).exp() * (a * x).cos() * normal_pdf(x / sigma) / sigma,
            T::neg_infinity(),
            T::infinity(),
            tol,
        )?
        .value;
        let closed = (-s2 * a * a / (T::cast(2.0) * (one + s2))).exp() / (one + s2).sqrt();
        let residual = (lhs - closed).abs().max((rhs - closed).abs());
        if residual > config.tol_transform {
            return Err(Error::CheckFailed {
                name: format!("cosine transform at sigma = {sigma}, a = {a}"),
                residual: residual.to_f64().unwrap_or(f64::NAN),
                tolerance: config.tol_transform.to_f64().unwrap_or(f64::NAN),
            });
        }
        transform.push(TransformLine { sigma, a, lhs, rhs, closed, residual });
    }

    let (lo, hi, step) = config.sandwich_grid;
    let mut margin_low = T::infinity();
    let mut margin_high = T::infinity();
    let count = ((hi - lo) / step + half).floor().to_usize().unwrap_or(0);
    for i in 0..=count {
        let x = lo + T::cast(i) * step;
        let psi = psi_half(x)?;
        let phi = -(-x * x * half).exp_m1();
        margin_low = margin_low.min(phi - psi);
        margin_high = margin_high.min(T::cast(1.5) * psi - phi);
    }
    if margin_low < -config.sandwich_slack || margin_high < -config.sandwich_slack {
        return Err(Error::CheckFailed {
            name: "weight sandwich".into(),
            residual: margin_low.min(margin_high).to_f64().unwrap_or(f64::NAN),
            tolerance: config.sandwich_slack.to_f64().unwrap_or(f64::NAN),
        });
    }

    let ten = T::cast(10.0);
    Ok(IdentityChecks {
        relation,
        transform,
        sandwich_margin_low: margin_low,
        sandwich_margin_high: margin_high,
        tail_gap_psi: one - psi_half(ten)?,
        tail_gap_phi: (-ten * ten * half).exp(),
        pass: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn family_is_odd_and_regular_at_zero() {
        let (f, f1, f2) = f_sigma_eval(1.7, 0.0).unwrap();
        assert_eq!((f, f2), (0.0, 0.0));
        assert_eq!(f1, 1.7f64 * 1.7 / 2.0);
        for &x in &[0.1, 0.5, 1.0, 3.0] {
            let plus = f_sigma_eval(1.7, x).unwrap();
            let minus = f_sigma_eval(1.7, -x).unwrap();
            assert_eq!(plus.0, -minus.0);
            assert_eq!(plus.1, minus.1);
            assert_eq!(plus.2, -minus.2);
        }
        assert!(f_sigma_eval(0.0, 1.0).is_err());
        assert!(f_sigma_eval(-1.0, 1.0).is_err());
    }

    #[test]
    fn family_reference_values() {
        assert_abs_diff_eq!(
            f_sigma_eval(1.7, 0.5).unwrap().0,
            0.6063904490079304,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            f_sigma_eval(1.7, 1.4913).unwrap().1,
            -0.3153587827265255,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            f_sigma_eval(1.7, 0.8).unwrap().2,
            -1.7257929553328175,
            epsilon = 1e-13
        );
    }

    #[test]
    fn series_branch_consistent_with_finite_differences() {
        // x = 0.3 with sigma = 1.7 keeps x +- e inside the series branch.
        let e = 1e-5;
        let at = |x: f64| f_sigma_eval(1.7, x).unwrap();
        let fd1 = (at(0.3 + e).0 - at(0.3 - e).0) / (2.0 * e);
        assert_abs_diff_eq!(fd1, at(0.3).1, epsilon = 1e-8);
        let fd2 = (at(0.3 + e).1 - at(0.3 - e).1) / (2.0 * e);
        assert_abs_diff_eq!(fd2, at(0.3).2, epsilon = 1e-6);
        // Seam continuity: both branches near u = 1/2 agree through the
        // derivative chain.
        let seam = (0.5f64).sqrt() / 1.7;
        let below = at(seam * (1.0 - 1e-9));
        let above = at(seam * (1.0 + 1e-9));
        assert_abs_diff_eq!(below.2, above.2, epsilon = 1e-7);
    }

    #[test]
    fn inflection_point_reference_and_scaling() {
        let r = find_r(1.7f64).unwrap();
        assert_abs_diff_eq!(r.root, 1.491281124118997, epsilon = 2e-10);
        assert!(f_sigma_eval(1.7, r.root).unwrap().2.abs() < 1e-9);
        let r1 = find_r(1.0).unwrap().root;
        assert_abs_diff_eq!(r1, 2.5351779110022945, epsilon = 1e-9);
        for sigma in [0.5, 0.8, 2.5, 3.0] {
            let rs = find_r(sigma).unwrap().root;
            assert_abs_diff_eq!(rs * sigma, r1, epsilon = 1e-8);
        }
        assert!(find_r(0.4).is_err());
        assert!(find_r(3.1).is_err());
    }

    #[test]
    fn pipeline_reference_values() {
        let rec = constants_pipeline(1.7).unwrap();
        assert_abs_diff_eq!(rec.integral_jump, 0.3046394922324663, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.tv_muhat, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rec.integral_f2, 4.151435131726315, epsilon = 1e-10);
        assert_abs_diff_eq!(rec.c_psi, 20.192507171828655, epsilon = 1e-9);
        assert_abs_diff_eq!(rec.c_half, 30.288760757742985, epsilon = 1e-8);
        assert_abs_diff_eq!(rec.c_tilde, 0.033015546855754446, epsilon = 1e-12);
        assert!(rec.residual_jump <= 1e-8);
        assert!(rec.residual_tv <= 1e-9);
        assert!(rec.residual_f2 <= 1e-7);
    }

    #[test]
    fn scan_finds_the_interior_minimum() {
        let scan = sigma_scan(1.5, 1.9, 0.01).unwrap();
        assert_eq!(scan.table.len(), 41);
        assert_abs_diff_eq!(scan.best_sigma, 1.72, epsilon = 1e-12);
        assert_abs_diff_eq!(scan.best_c_psi, 20.18913361076219, epsilon = 1e-8);
        assert!(scan.best_c_psi < 20.20);
        // Unimodal over this window: the difference sign flips exactly once.
        let mut flips = 0;
        for w in scan.table.windows(2).collect::<Vec<_>>().windows(2) {
            let d0 = w[0][1].1 - w[0][0].1;
            let d1 = w[1][1].1 - w[1][0].1;
            if d0 < 0.0 && d1 >= 0.0 {
                flips += 1;
            }
        }
        assert_eq!(flips, 1);
        let single = sigma_scan(1.7, 1.7, 0.01).unwrap();
        assert_eq!(single.table.len(), 1);
        assert_abs_diff_eq!(
            single.best_c_psi,
            constants_pipeline(1.7).unwrap().c_psi,
            epsilon = 0.0
        );
        assert!(sigma_scan(0.4, 1.0, 0.1).is_err());
    }

    #[test]
    fn identity_battery_passes_with_reference_values() {
        let checks = identity_checks(&IdentityConfig::default()).unwrap();
        assert!(checks.pass);
        let rhs: Vec<f64> = checks.relation.iter().map(|l| l.rhs).collect();
        assert_abs_diff_eq!(rhs[0], 0.1477264385258687, epsilon = 1e-7);
        assert_abs_diff_eq!(rhs[1], 0.5504004907933272, epsilon = 1e-7);
        assert_abs_diff_eq!(rhs[2], 1.7293294335267746, epsilon = 1e-7);
        for line in &checks.relation {
            assert!(line.residual < 1e-6);
        }
        let closed: Vec<f64> = checks.transform.iter().map(|l| l.closed).collect();
        assert_abs_diff_eq!(closed[0], 0.5506953149031838, epsilon = 1e-15);
        assert_abs_diff_eq!(closed[1], 0.4620552054501786, epsilon = 1e-15);
        assert_abs_diff_eq!(closed[2], 0.0902908677313118, epsilon = 1e-15);
        for line in &checks.transform {
            assert!(line.residual < 1e-8);
        }
        assert!(checks.sandwich_margin_low >= -1e-12);
        assert!(checks.sandwich_margin_high >= -1e-12);
        // The s-averaged weight approaches 1 only at logarithmic speed.
        assert_abs_diff_eq!(checks.tail_gap_psi, 0.0101031615649186, epsilon = 1e-10);
        assert!(checks.tail_gap_phi < 1e-21);
    }

    #[test]
    fn sandwich_slack_violation_is_reported() {
        let mut config = IdentityConfig::<f64>::default();
        config.sandwich_slack = -1.0; // impossible demand: margins must exceed 1
        let err = identity_checks(&config).unwrap_err();
        match err {
            Error::CheckFailed { name, .. } => assert!(name.contains("sandwich")),
            other => panic!("unexpected error: {other}"),
        }
    }
}
