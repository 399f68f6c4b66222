//! Deterministic report serialization.
//!
//! Every floating-point value that leaves the crate goes through the same
//! 12-significant-digit rounding, so JSON and CSV renderings of one run
//! carry identical numbers and re-running a recorded configuration
//! reproduces its report byte for byte. Object keys are sorted (the default
//! `serde_json` map), and no timestamps or machine identifiers are embedded.

use serde_json::{json, Value};

use crate::certify::{
    BoundCertificate, CertifyConfig, ConstantsChoice, ConstantsUsed, OptimalityScan, Verdict,
};
use crate::constants::{ConstantsRecord, IdentityChecks, SigmaScan};
use crate::kolmogorov::{DistanceMethod, DistanceResult, KCurve};
use crate::stein::BoundSuiteReport;
use crate::triangular_array::{IndexKind, IndexReport, WeightFunction};
use crate::Real;

/// Round to `digits` significant decimal digits via decimal formatting, so
/// the result is exactly the value a reader of the printed number parses
/// back. Zero and non-finite values pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    assert!(digits >= 1);
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap()
}

/// The canonical 12-significant-digit rendering used by every writer.
pub fn fmt_sig12(x: f64) -> String {
    match serde_json::Number::from_f64(round_sig(x, 12)) {
        Some(n) => n.to_string(),
        None => "null".into(),
    }
}

/// A JSON number in canonical rounding.
pub fn number<T: Real>(x: T) -> Value {
    let v = x.to_f64().unwrap_or(f64::NAN);
    match serde_json::Number::from_f64(round_sig(v, 12)) {
        Some(n) => Value::Number(n),
        None => Value::Null,
    }
}

fn opt_number<T: Real>(x: Option<T>) -> Value {
    x.map_or(Value::Null, number)
}

pub fn weight_json<T: Real>(w: &WeightFunction<T>) -> Value {
    match w {
        WeightFunction::PhiGamma { gamma } => json!({"kind": "phi_gamma", "gamma": number(*gamma)}),
        WeightFunction::PsiHalf => json!({"kind": "psi_half"}),
        WeightFunction::Table { nodes } => json!({
            "kind": "table",
            "nodes": nodes
                .iter()
                .map(|&(x, v)| json!([number(x), number(v)]))
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn index_report_json<T: Real>(r: &IndexReport<T>) -> Value {
    let (kind, weight) = match &r.kind {
        IndexKind::Lindeberg => ("lindeberg", Value::Null),
        IndexKind::Relaxed(w) => ("relaxed", weight_json(w)),
    };
    json!({
        "kind": kind,
        "weight": weight,
        "alpha": opt_number(r.alpha),
        "n_grid": r.n_grid,
        "epsilon_grid": r.epsilon_grid.iter().map(|&e| number(e)).collect::<Vec<_>>(),
        "finite": r
            .finite_values
            .iter()
            .map(|s| json!({
                "n": s.n,
                "parameter": opt_number(s.parameter),
                "value": number(s.value),
            }))
            .collect::<Vec<_>>(),
        "limit_estimate": number(r.limit_estimate),
        "closed_form": opt_number(r.closed_form),
    })
}

pub fn method_name(m: DistanceMethod) -> &'static str {
    match m {
        DistanceMethod::Exact => "exact",
        DistanceMethod::Empirical => "empirical",
    }
}

pub fn distance_json<T: Real>(r: &DistanceResult<T>) -> Value {
    json!({
        "n": r.n,
        "value": number(r.value),
        "method": method_name(r.method),
        "confidence": r.confidence.map_or(Value::Null, |b| json!({
            "level": number(b.level),
            "half_width": number(b.half_width),
        })),
        "samples": r.samples,
        "seed": r.seed,
    })
}

pub fn k_curve_json<T: Real>(c: &KCurve<T>) -> Value {
    json!({
        "results": c.results.iter().map(distance_json).collect::<Vec<_>>(),
        "plateau": number(c.plateau),
    })
}

pub fn constants_json<T: Real>(rec: &ConstantsRecord<T>) -> Value {
    json!({
        "sigma": number(rec.sigma),
        "R": number(rec.r),
        "integral_jump": number(rec.integral_jump),
        "tv_muhat": number(rec.tv_muhat),
        "integral_f2": number(rec.integral_f2),
        "c_psi": number(rec.c_psi),
        "c_half": number(rec.c_half),
        "c_tilde": number(rec.c_tilde),
        "residuals": {
            "integral_jump": number(rec.residual_jump),
            "tv_muhat": number(rec.residual_tv),
            "integral_f2": number(rec.residual_f2),
        },
    })
}

pub fn sigma_scan_json<T: Real>(s: &SigmaScan<T>) -> Value {
    json!({
        "best_sigma": number(s.best_sigma),
        "best_c_psi": number(s.best_c_psi),
        "table": s
            .table
            .iter()
            .map(|&(sig, c)| json!({"sigma": number(sig), "c_psi": number(c)}))
            .collect::<Vec<_>>(),
    })
}

pub fn identity_checks_json<T: Real>(ch: &IdentityChecks<T>) -> Value {
    json!({
        "relation": ch
            .relation
            .iter()
            .map(|l| json!({
                "a": number(l.a),
                "lhs": number(l.lhs),
                "rhs": number(l.rhs),
                "residual": number(l.residual),
            }))
            .collect::<Vec<_>>(),
        "transform": ch
            .transform
            .iter()
            .map(|l| json!({
                "sigma": number(l.sigma),
                "a": number(l.a),
                "lhs": number(l.lhs),
                "rhs": number(l.rhs),
                "closed": number(l.closed),
                "residual": number(l.residual),
            }))
            .collect::<Vec<_>>(),
        "sandwich": {
            "margin_low": number(ch.sandwich_margin_low),
            "margin_high": number(ch.sandwich_margin_high),
        },
        "tail_gap_psi": number(ch.tail_gap_psi),
        "tail_gap_phi": number(ch.tail_gap_phi),
        "pass": ch.pass,
    })
}

pub fn bound_suite_json<T: Real>(b: &BoundSuiteReport<T>) -> Value {
    json!({
        "h": b.label,
        "sup_f2": number(b.sup_f2),
        "bound_f2": number(b.bound_f2),
        "osc_f1": number(b.osc_f1),
        "osc_bound": number(b.osc_bound),
        "pass": b.pass,
    })
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Consistent => "consistent",
        Verdict::Inconsistent => "inconsistent",
        Verdict::Inconclusive => "inconclusive",
    }
}

pub fn constants_used_json<T: Real>(c: &ConstantsUsed<T>) -> Value {
    match c {
        ConstantsUsed::Pipeline(rec) => json!({
            "source": "pipeline",
            "record": constants_json(rec),
        }),
        ConstantsUsed::Fixed { c_tilde } => json!({
            "source": "fixed",
            "c_tilde": number(*c_tilde),
        }),
    }
}

pub fn certify_config_json<T: Real>(cfg: &CertifyConfig<T>) -> Value {
    let constants = match cfg.constants {
        ConstantsChoice::Pipeline { sigma } => json!({"source": "pipeline", "sigma": number(sigma)}),
        ConstantsChoice::Fixed { c_tilde } => json!({"source": "fixed", "c_tilde": number(c_tilde)}),
    };
    json!({
        "n_grid": cfg.n_grid,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "confidence": number(cfg.confidence),
        "constants": constants,
        "epsilon_grid": cfg.epsilon_grid.iter().map(|&e| number(e)).collect::<Vec<_>>(),
    })
}

pub fn certificate_json<T: Real>(cert: &BoundCertificate<T>) -> Value {
    json!({
        "spec": {
            "kind": cert.spec.kind,
            "alpha": opt_number(cert.spec.alpha),
            "rows": cert.spec.rows,
        },
        "lower": number(cert.lower),
        "upper": number(cert.upper),
        "closed_form_bounds": cert.closed_form_bounds,
        "empirical": cert.empirical.iter().map(distance_json).collect::<Vec<_>>(),
        "verdict": verdict_name(cert.verdict),
        "constants": constants_used_json(&cert.constants),
        "config": certify_config_json(&cert.config),
    })
}

pub fn optimality_json<T: Real>(scan: &OptimalityScan<T>) -> Value {
    json!({
        "p": number(scan.p),
        "c_tilde": number(scan.c_tilde),
        "rows": scan
            .rows
            .iter()
            .map(|r| json!({
                "alpha": number(r.alpha),
                "lower": number(r.lower),
                "ratio": number(r.ratio),
            }))
            .collect::<Vec<_>>(),
    })
}
