//! Acceptance suite. Prints one PASS/FAIL line per criterion; run with
//! `cargo test -p binquant-cli --test acceptance -- --nocapture`.

use std::process::Command;

use binquant::binormal::{std_normal_sf, Rates};
use binquant::discrete::{run_oracle_suite, OracleConfig};
use binquant::empirical::{quantify_sample, sample_binormal};
use binquant::metrics::{error_bound, prediction_error, shifted_prevalence};
use binquant::quantifiers::{adjusted_count, locally_best_classifier, minimax_classifier, q_optimal_classifier};
use binquant::rng::Stream;
use binquant::{BinormalModel, NasVariant, QConfig, ThresholdClassifier};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// mpmath, 30 digits
const SF_ONE: f64 = 0.15865525393145705;
const LOCALLY_BEST_T: f64 = 1.3595731419890997;

struct Csv {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Csv {
    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i]).collect()
    }
}

fn run_cli(args: &[&str]) -> Csv {
    let out = Command::new(env!("CARGO_BIN_EXE_binquant")).args(args).output().expect("spawn binquant");
    assert!(out.status.success(), "binquant {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let columns = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    Csv { columns, rows }
}

fn criterion_1() -> Outcome {
    let m = BinormalModel::reference();
    let post = m.posterior(1.0);
    ensure((post - 0.25).abs() <= 1e-12, || format!("posterior(1) = {post}"))?;
    let lr = m.likelihood_ratio(1.0);
    ensure((lr - 1.0).abs() <= 1e-12, || format!("likelihood_ratio(1) = {lr}"))?;
    let mm = minimax_classifier(&m);
    ensure((mm.threshold() - 1.0).abs() <= 1e-10, || format!("minimax threshold {}", mm.threshold()))?;
    ensure((mm.rates.fpr - SF_ONE).abs() <= 1e-10, || format!("fpr {}", mm.rates.fpr))?;
    ensure((mm.rates.fnr() - SF_ONE).abs() <= 1e-10, || format!("fnr {}", mm.rates.fnr()))?;
    Ok(format!("posterior(1)={post} lr(1)={lr} t={} fpr={} fnr={}", mm.threshold(), mm.rates.fpr, mm.rates.fnr()))
}

fn criterion_2() -> Outcome {
    let m = BinormalModel::reference();
    let lb = locally_best_classifier(&m);
    // plain bisection on P[X > t] = p
    let mass = |t: f64| 0.75 * std_normal_sf(t) + 0.25 * std_normal_sf(t - 2.0);
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 0.25 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = lb.threshold();
    ensure((t - lo).abs() <= 1e-8, || format!("threshold {t}, bisection {lo}"))?;
    ensure((t - LOCALLY_BEST_T).abs() <= 1e-8, || format!("threshold {t}, reference {LOCALLY_BEST_T}"))?;
    let err = prediction_error(lb.rates, 0.25);
    ensure(err <= 1e-9, || format!("prediction_error(w=0.25) = {err}"))?;
    Ok(format!("t={t} bisection={lo} err(0.25)={err:e}"))
}

/// Index of the maximum, after checking the sequence rises then falls.
fn unimodal_peak(v: &[f64]) -> Result<usize, String> {
    let peak = (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
    for i in 1..=peak {
        ensure(v[i] >= v[i - 1], || format!("dip before peak at row {i}"))?;
    }
    for i in peak + 1..v.len() {
        ensure(v[i] <= v[i - 1], || format!("rise after peak at row {i}"))?;
    }
    let local_max = (1..v.len() - 1).filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1]).count();
    ensure(local_max == 1, || format!("{local_max} local maxima"))?;
    Ok(peak)
}

fn criterion_3() -> Outcome {
    let m = BinormalModel::reference();
    let q2 = q_optimal_classifier(&m, QConfig::new(2.0, NasVariant::NasStar).unwrap());
    let q1 = q_optimal_classifier(&m, QConfig::new(1.0, NasVariant::NasStar).unwrap());
    ensure((q2.u_star - 0.25).abs() <= 1e-4, || format!("beta=2 u* = {}", q2.u_star))?;
    ensure(q1.u_star > 0.25 + 1e-4, || format!("beta=1 u* = {}", q1.u_star))?;

    let csv = run_cli(&["figure-qcurve", "--beta", "1,2", "--nas", "nas-star"]);
    let u = csv.col("u");
    let p1 = unimodal_peak(&csv.col("Q_beta=1")).map_err(|e| format!("beta=1 curve: {e}"))?;
    let p2 = unimodal_peak(&csv.col("Q_beta=2")).map_err(|e| format!("beta=2 curve: {e}"))?;
    ensure(u[p2] == 0.25, || format!("beta=2 grid peak at u={}", u[p2]))?;
    ensure(u[p1] > 0.25, || format!("beta=1 grid peak at u={}", u[p1]))?;
    Ok(format!(
        "u*(beta=2)={} u*(beta=1)={} grid peaks u={} and u={}",
        q2.u_star, q1.u_star, u[p2], u[p1]
    ))
}

/// Checks a sampled |linear| curve: one sign change in the differences and
/// both arms meeting zero at the same w in [0, 1].
fn v_shape(w: &[f64], e: &[f64]) -> Result<f64, String> {
    let signs: Vec<f64> = e
        .windows(2)
        .map(|d| d[1] - d[0])
        .filter(|d| d.abs() > 1e-15)
        .map(f64::signum)
        .collect();
    let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
    ensure(changes == 1 && signs[0] < 0.0, || format!("{changes} sign changes in differences"))?;
    let n = e.len();
    let root = |i: usize, j: usize| {
        let slope = (e[j] - e[i]) / (w[j] - w[i]);
        w[i] - e[i] / slope
    };
    let (left, right) = (root(0, 1), root(n - 2, n - 1));
    ensure((left - right).abs() <= 1e-9 && (0.0..=1.0).contains(&left), || {
        format!("arms cross zero at {left} and {right}")
    })?;
    Ok(left)
}

fn criterion_4() -> Outcome {
    let csv = run_cli(&["figure-error"]);
    let w = csv.col("w");
    let at = |x: f64| w.iter().position(|&v| v == x).ok_or_else(|| format!("w={x} missing from grid"));
    let (i_half, i_p) = (at(0.5)?, at(0.25)?);
    let mm = csv.col("err_minimax");
    let lb = csv.col("err_locallybest");
    ensure(mm[i_half] <= 1e-9, || format!("err_minimax(0.5) = {}", mm[i_half]))?;
    ensure(lb[i_p] <= 1e-9, || format!("err_locallybest(0.25) = {}", lb[i_p]))?;
    let mut zeros = Vec::new();
    for name in ["err_qopt", "err_minimax", "err_locallybest"] {
        zeros.push(v_shape(&w, &csv.col(name)).map_err(|e| format!("{name}: {e}"))?);
    }
    Ok(format!(
        "err_minimax(0.5)={:e} err_locallybest(0.25)={:e} zeros at w={:.6},{:.6},{:.6}",
        mm[i_half], lb[i_p], zeros[0], zeros[1], zeros[2]
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = Stream::new(5);
    let mut violations = 0;
    for _ in 0..10_000 {
        let r = Rates::new(rng.uniform(), rng.uniform()).unwrap();
        let w = rng.uniform();
        if prediction_error(r, w) > error_bound(r) {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations in 10000 cases"))?;
    Ok("10000 cases, 0 violations".into())
}

fn criterion_6() -> Outcome {
    let mut rng = Stream::new(6);
    let (mut violations, mut worst) = (0, 0.0f64);
    for _ in 0..10_000 {
        let mu = -5.0 + 10.0 * rng.uniform();
        let sigma = 0.1 + 3.9 * rng.uniform();
        let nu = mu + sigma * (0.1 + 5.9 * rng.uniform());
        let p = 0.01 + 0.98 * rng.uniform();
        let m = BinormalModel::new(mu, nu, sigma, p).unwrap();
        let t = 0.5 * (mu + nu) + sigma * (6.0 * rng.uniform() - 3.0);
        let w = rng.uniform();
        let r = m.classifier_rates(ThresholdClassifier::new(t));
        let ac = adjusted_count(shifted_prevalence(r, w), r).map_err(|e| e.to_string())?.ac;
        worst = worst.max((ac - w).abs());
        if (ac - w).abs() > 1e-10 {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations, worst {worst:e}"))?;
    Ok(format!("10000 cases, 0 violations, worst |ac - w| = {worst:e}"))
}

fn oracle_report() -> binquant::discrete::OracleReport {
    run_oracle_suite(OracleConfig {
        trials: 200,
        seed: 2024,
        max_atoms: 12,
    })
    .expect("oracle configuration is valid")
}

fn suite_failures(report: &binquant::discrete::OracleReport, suite: &str) -> Vec<String> {
    report
        .violations
        .iter()
        .filter(|v| v.suite == suite)
        .map(|v| format!("trial {}: {} [{}]", v.trial, v.detail, v.population))
        .collect()
}

fn criterion_7() -> Outcome {
    let report = oracle_report();
    let fails = suite_failures(&report, "fbeta");
    ensure(fails.is_empty(), || fails.join("; "))?;
    ensure(report.tied_populations > 0, || "no tied populations generated".into())?;
    Ok(format!(
        "{} populations ({} tied), {} F_beta checks, 0 violations",
        report.trials, report.tied_populations, report.fbeta_checks
    ))
}

fn criterion_8() -> Outcome {
    let report = oracle_report();
    let fails = suite_failures(&report, "local_bayes");
    ensure(fails.is_empty(), || fails.join("; "))?;
    let per_branch = report.local_bayes_checks / 2;
    ensure(per_branch >= 100, || format!("only {per_branch} checks per branch"))?;
    Ok(format!("{per_branch} checks per branch (q below and above the cutoff), 0 violations"))
}

fn criterion_9() -> Outcome {
    let report = oracle_report();
    let fails = suite_failures(&report, "minimax");
    ensure(fails.is_empty(), || fails.join("; "))?;

    let m = BinormalModel::reference();
    let mm = minimax_classifier(&m);
    let lr = m.likelihood_ratio(mm.threshold());
    ensure((lr - 1.0).abs() <= 1e-12, || format!("likelihood ratio at minimax threshold {lr}"))?;
    ensure((mm.rates.fpr - mm.rates.fnr()).abs() <= 1e-10, || {
        format!("fpr {} vs fnr {}", mm.rates.fpr, mm.rates.fnr())
    })?;
    // scan of max(FPR, FNR) over thresholds
    let worst = |t: f64| {
        let r = m.classifier_rates(ThresholdClassifier::new(t));
        r.fpr.max(r.fnr())
    };
    let best_t = (0..=20_000).map(|i| i as f64 * 1e-4).fold(0.0, |b, t| if worst(t) < worst(b) { t } else { b });
    ensure((best_t - 1.0).abs() <= 1e-4, || format!("scan minimum at t={best_t}"))?;
    Ok(format!(
        "{} populations, brute force never above threshold family ({} attained); binormal lr*={lr} fpr=fnr={}",
        report.minimax_checks, report.minimax_attained, mm.rates.fpr
    ))
}

fn criterion_10() -> Outcome {
    let m = BinormalModel::reference();
    let lb = locally_best_classifier(&m);
    let w = 0.6;
    let target = sample_binormal(&m.with_prior(w).unwrap(), 100_000, 10).map_err(|e| e.to_string())?.scores();
    let est = quantify_sample(&target, lb.classifier, lb.rates).map_err(|e| e.to_string())?;
    ensure((est.ac - w).abs() <= 0.01, || format!("ac = {}", est.ac))?;
    let predicted = prediction_error(lb.rates, w);
    let observed = (est.cc - w).abs();
    ensure((observed - predicted).abs() <= 0.01, || {
        format!("|cc - w| = {observed}, analytic error {predicted}")
    })?;
    Ok(format!("ac={} cc={} |cc-w|={observed} analytic={predicted}", est.ac, est.cc))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("binormal closed forms", criterion_1),
        ("locally best classifier", criterion_2),
        ("Q-measure optimization", criterion_3),
        ("prediction-error figure", criterion_4),
        ("error bound", criterion_5),
        ("adjusted count exactness", criterion_6),
        ("thresholded F_beta optimum", criterion_7),
        ("local Bayes optimality", criterion_8),
        ("minimax comparison", criterion_9),
        ("Monte Carlo consistency", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
