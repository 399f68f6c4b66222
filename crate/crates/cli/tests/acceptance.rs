//! End-to-end acceptance gate. Each numbered criterion runs in isolation,
//! prints one PASS/FAIL line with its wall time, and the test fails at the
//! end if any criterion failed or overran its budget. Budgets assume a
//! single worker; `cargo test -p cltcert-cli --test acceptance -- --nocapture`
//! shows the lines as they appear.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use cltcert::certify::{certify_bounds, optimality_scan, CertifyConfig, ConstantsChoice, Verdict};
use cltcert::constants::{constants_pipeline, find_r, identity_checks, IdentityConfig};
use cltcert::kolmogorov::{
    dkw_half_width, exact_row_sum, k_distance_empirical, k_distance_exact, sample_row_sums,
};
use cltcert::numerics::uniform_grid;
use cltcert::stein::{
    bound_suite, identity_residual, indicator_f1_oscillation, indicator_solution, SteinSolution,
    TestFunction,
};
use cltcert::triangular_array::{
    build_row, lindeberg_tail, relaxed_closed_form, relaxed_index, ArraySpec, WeightFunction,
    DEFAULT_EPSILON_GRID,
};
use cltcert::distributions::DiscreteDistribution;

fn run_criterion(
    number: usize,
    name: &str,
    budget_seconds: Option<f64>,
    body: impl FnOnce(),
) -> Option<String> {
    let clock = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let elapsed = clock.elapsed().as_secs_f64();
    let mut failure = match result {
        Ok(()) => None,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked without a message".into());
            Some(format!("criterion {number} ({name}): {msg}"))
        }
    };
    if failure.is_none() {
        if let Some(budget) = budget_seconds {
            if elapsed > budget {
                failure = Some(format!(
                    "criterion {number} ({name}): ran {elapsed:.2} s, budget {budget} s"
                ));
            }
        }
    }
    let state = if failure.is_none() { "PASS" } else { "FAIL" };
    println!("criterion {number} ({name}): {state} ({elapsed:.2} s)");
    failure
}

fn cli_run(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_cltcert"))
        .args(args)
        .status()
        .expect("could not launch the binary");
    assert!(status.success(), "cltcert {args:?} exited with {status}");
}

fn read_bytes(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

#[test]
fn acceptance_criteria() {
    let mut failures: Vec<String> = Vec::new();

    failures.extend(run_criterion(1, "inflection point bracket", Some(1.0), || {
        let root = find_r(1.7f64).unwrap().root;
        assert!(
            root > 1.4912 && root < 1.4914,
            "R(1.7) = {root} outside (1.4912, 1.4914)"
        );
    }));

    failures.extend(run_criterion(2, "constant pipeline", Some(10.0), || {
        let rec = constants_pipeline(1.7f64).unwrap();
        assert!(
            (rec.c_psi - 20.19).abs() <= 0.02,
            "c_psi = {} not within 20.19 +- 0.02",
            rec.c_psi
        );
        assert!(rec.c_half <= 30.3, "c_half = {} exceeds 30.3", rec.c_half);
        assert!(rec.c_tilde >= 0.033, "c_tilde = {} below 0.033", rec.c_tilde);
        assert!(
            (rec.tv_muhat - 2.0).abs() <= 1e-8,
            "total variation = {} not within 2 +- 1e-8",
            rec.tv_muhat
        );
        for (label, r) in [
            ("jump", rec.residual_jump),
            ("tv", rec.residual_tv),
            ("f2", rec.residual_f2),
        ] {
            assert!(r <= 1e-6, "{label} cross-check residual {r} exceeds 1e-6");
        }
    }));

    failures.extend(run_criterion(3, "index closed forms", Some(30.0), || {
        let n = 100_000;
        for alpha in [0.25f64, 0.5] {
            let beta = alpha / (1.0 - alpha);
            let spec = ArraySpec::example_alpha(alpha).unwrap();
            let row = build_row(&spec, n).unwrap();
            let tail = lindeberg_tail(&row, 0.1).unwrap();
            let target = alpha - beta * 0.01;
            assert!(
                (tail - target).abs() <= 0.005,
                "alpha {alpha}: tail {tail} is not within 0.005 of {target}"
            );
            let weight = WeightFunction::phi_gamma(0.5).unwrap();
            let report = relaxed_index(&spec, &weight, &[n]).unwrap();
            let finite = report.finite_values[0].value;
            let closed = relaxed_closed_form(alpha, 0.5);
            assert!(
                (finite - closed).abs() <= 0.005,
                "alpha {alpha}: relaxed index {finite} is not within 0.005 of {closed}"
            );
        }
    }));

    failures.extend(run_criterion(4, "Stein solution suite", Some(30.0), || {
        let grid: Vec<f64> = uniform_grid(-6.0, 6.0, 0.1);
        let cases = [(0.0, 1.0), (1.0, 0.5), (-1.0, 0.5), (2.0, 0.25), (0.5, 2.0)];
        for (z, delta) in cases {
            let h = TestFunction::smoothstep(z, delta).unwrap();
            let sol = SteinSolution::new(h.clone()).unwrap();
            for &x in &grid {
                let r = identity_residual(&sol, x, 0.004).unwrap();
                assert!(r < 1e-8, "smoothstep({z}, {delta}): residual {r} at x = {x}");
            }
            let suite = bound_suite(&h, &grid).unwrap();
            assert!(
                suite.osc_f1 <= 1.0 + 1e-9,
                "smoothstep({z}, {delta}): osc f' = {}",
                suite.osc_f1
            );
            assert!(
                suite.sup_f2 <= suite.bound_f2 + 1e-9,
                "smoothstep({z}, {delta}): sup f'' = {} exceeds {}",
                suite.sup_f2,
                suite.bound_f2
            );
            assert!(suite.pass, "smoothstep({z}, {delta}): bound suite failed");
        }
        let narrow: Vec<f64> = uniform_grid(-4.0, 4.0, 0.1);
        for z in [0.0, 1.0, -1.0] {
            let osc = indicator_f1_oscillation(z, &grid);
            assert!(osc <= 1.0 + 1e-9, "indicator({z}): osc f' = {osc}");
            let sol =
                SteinSolution::with_tolerance(TestFunction::indicator(z).unwrap(), 1e-12).unwrap();
            for &x in &narrow {
                let gap = (indicator_solution(z, x).0 - sol.f(x).unwrap()).abs();
                assert!(gap <= 1e-8, "indicator({z}): closed form off by {gap} at x = {x}");
            }
        }
    }));

    failures.extend(run_criterion(5, "weight sandwich and identities", Some(30.0), || {
        let checks = identity_checks(&IdentityConfig::<f64>::default()).unwrap();
        assert!(checks.sandwich_margin_low >= -1e-12, "lower sandwich margin {}", checks.sandwich_margin_low);
        assert!(checks.sandwich_margin_high >= -1e-12, "upper sandwich margin {}", checks.sandwich_margin_high);
        for line in &checks.relation {
            assert!(
                line.residual < 1e-6,
                "shifted relation at a = {}: residual {}",
                line.a,
                line.residual
            );
        }
        for line in &checks.transform {
            assert!(
                line.residual < 1e-8,
                "transform at (sigma, a) = ({}, {}): residual {}",
                line.sigma,
                line.a,
                line.residual
            );
        }
        assert!(checks.pass);
    }));

    failures.extend(run_criterion(6, "exact distance oracle", None, || {
        let half = DiscreteDistribution::new(vec![-0.5f64, 0.5], vec![0.5, 0.5]).unwrap();
        let row = vec![half; 4];
        let k = k_distance_exact(&exact_row_sum(&row).unwrap());
        assert_eq!(k, 0.1875, "4-fold coin distance {k} is not exactly 0.1875");

        let spec = ArraySpec::example_alpha(0.5f64).unwrap();
        let row = build_row(&spec, 8).unwrap();
        let exact = k_distance_exact(&exact_row_sum(&row).unwrap());
        let hw = dkw_half_width(10_000, 0.99f64).unwrap();
        let mut agree = 0;
        for seed in 0..100u64 {
            let draws = sample_row_sums(&row, 10_000, seed);
            if (k_distance_empirical(&draws) - exact).abs() <= hw {
                agree += 1;
            }
        }
        assert!(agree >= 99, "exact and sampled distances agreed in only {agree}/100 trials");
    }));

    failures.extend(run_criterion(7, "two-sided certificate", Some(300.0), || {
        let hw = dkw_half_width(1_000_000, 0.99f64).unwrap();
        for alpha in [0.25f64, 0.5] {
            let spec = ArraySpec::example_alpha(alpha).unwrap();
            let config = CertifyConfig {
                n_grid: vec![2_000],
                samples: 1_000_000,
                seed: 1,
                confidence: 0.99,
                constants: ConstantsChoice::Pipeline { sigma: 1.7 },
                epsilon_grid: DEFAULT_EPSILON_GRID.to_vec(),
            };
            let cert = certify_bounds(&spec, &config).unwrap();
            let measured = cert.empirical[0].value;
            let slack = hw + 0.005;
            assert!(
                measured >= cert.lower - slack && measured <= alpha + slack,
                "alpha {alpha}: measured {measured} outside [{} - {slack}, {alpha} + {slack}]",
                cert.lower
            );
            assert_eq!(cert.verdict, Verdict::Consistent, "alpha {alpha}: verdict not consistent");
        }
    }));

    failures.extend(run_criterion(8, "optimality trend", None, || {
        let scan =
            optimality_scan(1.0f64, &[0.1, 0.01, 0.001], ConstantsChoice::Pipeline { sigma: 1.7 })
                .unwrap();
        assert_eq!(scan.rows.len(), 3);
        for pair in scan.rows.windows(2) {
            let factor = pair[1].ratio / pair[0].ratio;
            assert!(
                factor >= 8.0,
                "ratio grew by {factor} from alpha {} to {}, below 8",
                pair[0].alpha,
                pair[1].alpha
            );
        }
    }));

    failures.extend(run_criterion(9, "byte-identical reruns", None, || {
        let dir = tempfile::tempdir().unwrap();
        let path = |name: &str| dir.path().join(name);

        let first = path("indices1.json");
        let second = path("indices2.json");
        let argv = [
            "indices", "--alpha", "0.3", "--n", "100,1000", "--weight", "phi:0.5", "--seed", "7",
        ];
        cli_run(&[&argv[..], &["--out", first.to_str().unwrap()]].concat());
        cli_run(&[&argv[..], &["--out", second.to_str().unwrap()]].concat());
        assert_eq!(read_bytes(&first), read_bytes(&second), "repeated indices runs differ");

        // Rebuild the command line from the report's own embedded config.
        let report: serde_json::Value =
            serde_json::from_slice(&read_bytes(&first)).expect("report is not valid JSON");
        let cfg = &report["config"];
        let nums = |key: &str| {
            cfg[key]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let third = path("indices3.json");
        cli_run(&[
            "indices",
            "--alpha",
            &cfg["alpha"].to_string(),
            "--n",
            &nums("n_grid"),
            "--epsilon",
            &nums("epsilon_grid"),
            "--weight",
            cfg["weight"].as_str().unwrap(),
            "--seed",
            &cfg["seed"].to_string(),
            "--format",
            cfg["format"].as_str().unwrap(),
            "--out",
            third.to_str().unwrap(),
        ]);
        assert_eq!(
            read_bytes(&first),
            read_bytes(&third),
            "config-rebuilt indices run differs"
        );

        let d1 = path("distance1.json");
        let d2 = path("distance2.json");
        let argv = [
            "distance", "--alpha", "0.5", "--n", "4,16", "--method", "mc", "--samples", "20000",
            "--seed", "3",
        ];
        cli_run(&[&argv[..], &["--out", d1.to_str().unwrap()]].concat());
        cli_run(&[&argv[..], &["--out", d2.to_str().unwrap()]].concat());
        assert_eq!(read_bytes(&d1), read_bytes(&d2), "repeated sampling runs differ");

        let report: serde_json::Value =
            serde_json::from_slice(&read_bytes(&d1)).expect("report is not valid JSON");
        let cfg = &report["config"];
        let d3 = path("distance3.json");
        cli_run(&[
            "distance",
            "--alpha",
            &cfg["alpha"].to_string(),
            "--n",
            &cfg["n_grid"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
            "--method",
            cfg["method"].as_str().unwrap(),
            "--samples",
            &cfg["samples"].to_string(),
            "--confidence",
            &cfg["confidence"].to_string(),
            "--seed",
            &cfg["seed"].to_string(),
            "--format",
            cfg["format"].as_str().unwrap(),
            "--out",
            d3.to_str().unwrap(),
        ]);
        assert_eq!(
            read_bytes(&d1),
            read_bytes(&d3),
            "config-rebuilt sampling run differs"
        );
    }));

    assert!(
        failures.is_empty(),
        "{} criterion(s) failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
