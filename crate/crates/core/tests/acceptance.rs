//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.
//!
//! Run with `cargo test -p jumpqle --test acceptance`. Pass criterion
//! numbers (e.g. `-- 1 6 7`) to run a subset. Set `JUMPQLE_FULL_SCALE=1`
//! to include the M = 1000 run of criterion 8.

use std::process::ExitCode;
use std::time::Instant;

use jumpqle::estimate::{levy_ou_alpha, levy_ou_beta, levy_ou_intensity_mean};
use jumpqle::montecarlo::{run_study, CellReport, StudyKind};
use jumpqle::rng::stream_rng;
use jumpqle::stats::{ks_p_value, ks_statistic, normal_cdf};
use jumpqle::*;
use rand::Rng;

const N: usize = 1_000_000;
const H_POWER: f64 = 2.0 / 3.0;
const PARAM_NAMES: [&str; 5] = ["alpha", "beta", "lambda", "mu", "sigma2"];

fn theta0() -> LevyOuParams {
    LevyOuParams::new(2.0, 2.5, 6.0, 0.0, 20.25)
}

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new(id: u32, title: &'static str) -> Self {
        Self {
            id,
            title,
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("     {line}"));
    }
}

fn best_rho_grid() -> ThresholdGrid {
    ThresholdGrid {
        d: 1.0,
        rho1: SlotValues::single(0.285),
        rho2: SlotValues::single(0.26),
        rho3: SlotValues::single(0.255),
        rho1_bar: SlotValues::single(0.26),
        rho2_bar: SlotValues::single(0.26),
    }
}

fn estimation_cell(rhos: Vec<f64>, m: usize, seed: u64) -> Vec<CellReport> {
    let cfg = StudyConfig::new(theta0(), ThresholdGrid::tied(rhos), m, N, HRule::Power(H_POWER), seed);
    run_study(&cfg, StudyKind::Estimation, None).expect("study runs").cells
}

fn check_means(out: &mut Outcome, cell: &CellReport, targets: [f64; 5], tolerances: [f64; 5]) {
    for k in 0..5 {
        let got = cell.mean[k];
        out.check(
            (got - targets[k]).abs() <= tolerances[k],
            format!("{:<6} mean {got:>10.5}  target {:>9.5} ± {}", PARAM_NAMES[k], targets[k], tolerances[k]),
        );
    }
}

fn criterion_1(cells: &[CellReport]) -> Outcome {
    let mut out = Outcome::new(1, "estimator means at rho = 0.26, M = 100");
    let cell = &cells[1];
    out.check(cell.failures.is_empty(), format!("failed replications: {}", cell.failures.len()));
    check_means(
        &mut out,
        cell,
        [2.0036, 2.4999, 5.957, -0.001, 20.380],
        [0.010, 0.020, 0.15, 0.010, 0.60],
    );
    for k in 0..5 {
        out.note(format!(
            "{:<6} Monte Carlo SE of the mean {:.5}",
            PARAM_NAMES[k],
            cell.sd[k] / (cell.successes() as f64).sqrt()
        ));
    }
    out
}

fn criterion_2(cells: &[CellReport]) -> Outcome {
    let mut out = Outcome::new(2, "bias trend across rho = 0.255, 0.26, 0.30, M = 100");
    let (low, mid, high) = (&cells[0], &cells[1], &cells[2]);
    out.check(
        low.mean[2] <= mid.mean[2] && mid.mean[2] < high.mean[2],
        format!("lambda rises: {:.4} -> {:.4} -> {:.4}", low.mean[2], mid.mean[2], high.mean[2]),
    );
    out.check(
        low.mean[4] > high.mean[4],
        format!("sigma2 falls: {:.4} -> {:.4}", low.mean[4], high.mean[4]),
    );
    let references = [
        (low, "0.255", [2.00370, 2.50007, 5.91793, f64::NAN, 20.51549]),
        (high, "0.30", [f64::NAN, f64::NAN, 22.31719, f64::NAN, 5.45139]),
    ];
    for (cell, label, target) in references {
        for k in 0..5 {
            if target[k].is_nan() {
                continue;
            }
            let rel = (cell.mean[k] - target[k]).abs() / target[k].abs();
            out.check(
                rel <= 0.10,
                format!(
                    "rho {label} {:<6} mean {:>10.5} reference {:>9.5} rel.err {rel:.4}",
                    PARAM_NAMES[k], cell.mean[k], target[k]
                ),
            );
        }
    }
    out
}

fn null_test_study(theta_null: [f64; 5], m: usize, seed: u64) -> CellReport {
    let cfg = StudyConfig::new(theta0(), best_rho_grid(), m, N, HRule::Power(H_POWER), seed)
        .with_null(theta_null.iter().copied().enumerate(), 0.05);
    run_study(&cfg, StudyKind::Test, None).expect("study runs").cells.remove(0)
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new(3, "chi-square limit of the ratio statistic under the null, M = 500");
    let cell = null_test_study(theta0().to_array(), 500, 3003);
    let lam = cell.lambda_samples();
    out.check(cell.failures.is_empty(), format!("failed replications: {}", cell.failures.len()));
    let rate = cell.rejection_rate.unwrap_or(f64::NAN);
    out.check((0.025..=0.085).contains(&rate), format!("rejection rate {rate:.4} in [0.025, 0.085]"));
    let d = ks_statistic(&lam, |x| chi2_cdf(x, 5).unwrap());
    out.check(d < 0.08, format!("KS distance to chi2(5) {d:.4} < 0.08"));
    let (m, sd) = (jumpqle::stats::mean(&lam), jumpqle::stats::sample_sd(&lam));
    let se = sd / (lam.len() as f64).sqrt();
    out.check((m - 5.0).abs() <= 3.0 * se, format!("mean {m:.4} within 3 SE ({se:.4}) of the chi2(5) mean 5"));
    out.note(format!("sd {sd:.4} (chi2(5) sd 3.1623)"));
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new(4, "power against alpha = 2.01, M = 200");
    let cell = null_test_study([2.01, 2.5, 6.0, 0.0, 20.25], 200, 4004);
    out.check(cell.failures.is_empty(), format!("failed replications: {}", cell.failures.len()));
    let rate = cell.rejection_rate.unwrap_or(f64::NAN);
    out.check(rate >= 0.99, format!("rejection rate {rate:.4} >= 0.99"));
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new(5, "normality of standardized estimators, rho = (0.285, 0.26, 0.255), M = 100");
    let cfg = StudyConfig::new(theta0(), best_rho_grid(), 100, N, HRule::Power(H_POWER), 5005);
    let cell = run_study(&cfg, StudyKind::Estimation, None).expect("study runs").cells.remove(0);
    out.check(cell.failures.is_empty(), format!("failed replications: {}", cell.failures.len()));
    for k in 0..5 {
        let z = cell.standardized_component(k);
        let d = ks_statistic(&z, normal_cdf);
        let p = ks_p_value(d, z.len());
        out.check(
            p >= 0.01,
            format!(
                "{:<6} KS {d:.4} p {p:.4} (mean {:+.3}, sd {:.3})",
                PARAM_NAMES[k],
                jumpqle::stats::mean(&z),
                jumpqle::stats::sample_sd(&z)
            ),
        );
    }
    out
}

/// A random small Lévy-OU dataset with its thresholds.
struct Dataset {
    path: Path,
    thresholds: ThresholdConfig,
}

fn random_dataset(case: u64) -> Dataset {
    let mut rng = stream_rng(0xACCE_5506 ^ case, 9);
    let theta = LevyOuParams::new(
        rng.random_range(0.5..3.0),
        rng.random_range(0.5..5.0),
        rng.random_range(2.0..20.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(1.0..30.0),
    );
    let n = rng.random_range(10..=1000);
    let h = 10f64.powf(rng.random_range(-2.0..-1.0));
    let mut rho = || rng.random_range(0.2..0.45);
    let thresholds = ThresholdConfig::from_rhos(1.0, rho(), rho(), rho(), rho(), rho()).unwrap();
    let path = simulate_levy_ou(&theta.to_vector(), &PathConfig::new(n, h, case)).unwrap();
    Dataset { path, thresholds }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Direct-summation Lévy-OU likelihoods, independent of the library's code path.
mod naive {
    use std::f64::consts::PI;

    fn small(dx: f64, h: f64, rho: f64) -> bool {
        dx.abs() <= h.powf(rho)
    }

    pub fn diffusion(x: &[f64], h: f64, rho: f64, alpha: f64) -> f64 {
        let mut s = 0.0;
        for w in x.windows(2) {
            let dx = w[1] - w[0];
            if small(dx, h, rho) {
                s += -0.5 * (dx * dx / (h * alpha * alpha) + (alpha * alpha).ln());
            }
        }
        s
    }

    pub fn drift(x: &[f64], h: f64, rho: f64, beta: f64, alpha: f64) -> f64 {
        let mut s = 0.0;
        for w in x.windows(2) {
            let dx = w[1] - w[0];
            if small(dx, h, rho) {
                let r = dx + h * beta * w[0];
                s += -r * r / (2.0 * h * alpha * alpha);
            }
        }
        s
    }

    pub fn jump(x: &[f64], h: f64, rho: f64, lambda: f64, mu: f64, sigma2: f64) -> f64 {
        let mut s = 0.0;
        for w in x.windows(2) {
            let dx = w[1] - w[0];
            if !small(dx, h, rho) {
                let r = dx - mu;
                s += (lambda * (-r * r / (2.0 * sigma2)).exp() / (2.0 * PI * sigma2).sqrt()).ln();
            }
        }
        s - lambda * h * (x.len() - 1) as f64
    }

    pub fn joint_continuous(x: &[f64], h: f64, rho: f64, alpha: f64, beta: f64) -> f64 {
        let mut s = 0.0;
        for w in x.windows(2) {
            let dx = w[1] - w[0];
            if small(dx, h, rho) {
                let r = dx + h * beta * w[0];
                s += -0.5 * (r * r / (h * alpha * alpha) + (alpha * alpha).ln());
            }
        }
        s
    }
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new(6, "closed forms vs optimizer and likelihoods vs direct summation, 100 datasets");
    let model = levy_ou_model();
    let (mut used, mut skipped, mut worst_est, mut worst_ll) = (0, 0, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    let mut case = 0u64;
    while used < 100 && case < 2000 {
        case += 1;
        let ds = random_dataset(case);
        let cfg = EstimationConfig::new(ds.thresholds, LevyOuParams::default_bounds());
        let (Ok(closed), Ok(closed_joint)) = (estimate_adaptive_levy_ou(&ds.path, &cfg), estimate_joint_levy_ou(&ds.path, &cfg))
        else {
            skipped += 1;
            continue;
        };
        if closed.any_projected() || closed_joint.any_projected() {
            skipped += 1;
            continue;
        }
        used += 1;
        let ctx = QllContext::new(&model, &ds.path).unwrap();
        let generic = estimate_adaptive_generic(&ctx, &cfg).unwrap();
        let joint = estimate_joint(&ctx, &cfg).unwrap();
        for (label, a, b) in [("adaptive", &closed, &generic), ("joint", &closed_joint, &joint)] {
            for k in 0..5 {
                let (x, y) = (a.theta_hat.get(k), b.theta_hat.get(k));
                worst_est = worst_est.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
                if !close(x, y, 1e-6) {
                    failures.push(format!("case {case} {label} {}: closed {x} optimizer {y}", PARAM_NAMES[k]));
                }
            }
        }

        let x = ds.path.values();
        let h = ds.path.h();
        let th = &ds.thresholds;
        let t = closed.theta_hat.as_slice();
        let tj = closed_joint.theta_hat.as_slice();
        let pairs = [
            (
                qll_diffusion(&ctx, &t[0..1], &th.diffusion).unwrap(),
                naive::diffusion(x, h, th.diffusion.rho, t[0]),
            ),
            (
                qll_drift(&ctx, &t[1..2], &t[0..1], &th.drift).unwrap(),
                naive::drift(x, h, th.drift.rho, t[1], t[0]),
            ),
            (
                qll_jump(&ctx, &t[2..5], &th.jump).unwrap(),
                naive::jump(x, h, th.jump.rho, t[2], t[3], t[4]),
            ),
            (
                qll_joint_continuous(&ctx, &tj[0..1], &tj[1..2], &th.joint_continuous).unwrap(),
                naive::joint_continuous(x, h, th.joint_continuous.rho, tj[0], tj[1]),
            ),
            (
                qll_joint(&ctx, &closed_joint.theta_hat, &th.joint_continuous, &th.joint_jump).unwrap(),
                naive::joint_continuous(x, h, th.joint_continuous.rho, tj[0], tj[1])
                    + naive::jump(x, h, th.joint_jump.rho, tj[2], tj[3], tj[4]),
            ),
        ];
        for (k, (lib, oracle)) in pairs.iter().enumerate() {
            let rel = (lib - oracle).abs() / oracle.abs().max(1e-300);
            worst_ll = worst_ll.max(rel);
            if rel > 1e-10 {
                failures.push(format!("case {case} likelihood {k}: library {lib} oracle {oracle}"));
            }
        }
    }
    out.check(used == 100, format!("{used} usable datasets ({skipped} degenerate or on the boundary, skipped)"));
    out.check(worst_est <= 1e-6, format!("worst estimator discrepancy {worst_est:.2e} <= 1e-6"));
    out.check(worst_ll <= 1e-10, format!("worst likelihood relative error {worst_ll:.2e} <= 1e-10"));
    for f in failures.iter().take(5) {
        out.note(f.clone());
    }
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new(7, "property suite");
    let model = levy_ou_model();

    let (mut partition_ok, mut additive_ok, mut foc_ok) = (true, true, true);
    let mut worst_foc = 0.0f64;
    for case in 1..=50 {
        let ds = random_dataset(10_000 + case);
        let ctx = QllContext::new(&model, &ds.path).unwrap();
        let x = ds.path.values();
        let h = ds.path.h();
        for (_, th) in ds.thresholds.slots() {
            let cls = classify(&ds.path, &th);
            let small = cls.small_indices().count();
            let large = cls.large_indices().count();
            partition_ok &= small == cls.n_small && large == cls.n_large && small + large == ds.path.n();
            partition_ok &= cls.small_indices().all(|i| (x[i] - x[i - 1]).abs() <= cls.cutoff);
            partition_ok &= cls.large_indices().all(|i| (x[i] - x[i - 1]).abs() > cls.cutoff);
        }
        let theta = LevyOuParams::new(1.7, 2.2, 5.0, 0.3, 12.0).to_vector();
        let th = &ds.thresholds;
        let whole = qll_joint(&ctx, &theta, &th.joint_continuous, &th.joint_jump).unwrap();
        let parts = qll_joint_continuous(&ctx, theta.alpha(), theta.beta(), &th.joint_continuous).unwrap()
            + qll_jump(&ctx, theta.gamma(), &th.joint_jump).unwrap();
        additive_ok &= (whole - parts).abs() <= 1e-12 * whole.abs().max(1.0);

        let cls3 = ctx.classification(&th.drift);
        if let Ok(beta) = levy_ou_beta(&ds.path, &cls3) {
            let (mut s, mut scale) = (0.0, 0.0);
            for i in cls3.small_indices() {
                let term = x[i - 1] * (x[i] - x[i - 1] + beta * h * x[i - 1]);
                s += term;
                scale += (x[i - 1] * (x[i] - x[i - 1])).abs() + (beta * h * x[i - 1] * x[i - 1]).abs();
            }
            worst_foc = worst_foc.max(s.abs() / scale.max(1e-300));
            foc_ok &= s.abs() <= 1e-8 * scale;
        }
        let cls2 = ctx.classification(&th.jump);
        if let Ok((_, mu)) = levy_ou_intensity_mean(&ds.path, &cls2) {
            let (mut s, mut scale) = (0.0, 0.0);
            for i in cls2.large_indices() {
                s += x[i] - x[i - 1] - mu;
                scale += (x[i] - x[i - 1]).abs();
            }
            foc_ok &= s.abs() <= 1e-12 * scale.max(1.0);
        }
        let cls1 = ctx.classification(&th.diffusion);
        if let Ok(alpha) = levy_ou_alpha(&ds.path, &cls1) {
            let centre = qll_diffusion(&ctx, &[alpha], &th.diffusion).unwrap();
            for delta in [-1e-3, 1e-3] {
                foc_ok &= qll_diffusion(&ctx, &[alpha + delta], &th.diffusion).unwrap() <= centre;
            }
        }
    }
    out.check(partition_ok, "every increment is small or large, never both, on 50 datasets x 5 filters".into());
    out.check(additive_ok, "joint likelihood equals continuous + jump parts to 1e-12".into());
    out.check(foc_ok, format!("first-order conditions hold (worst drift residual {worst_foc:.1e} <= 1e-8)"));

    let mut roundtrip = 0.0f64;
    for df in 1..=10 {
        for k in 1..100 {
            let eps = k as f64 / 100.0;
            let q = chi2_quantile(eps, df).unwrap();
            roundtrip = roundtrip.max((chi2_cdf(q, df).unwrap() - (1.0 - eps)).abs());
        }
    }
    out.check(roundtrip <= 1e-8, format!("chi2 quantile/cdf round trip error {roundtrip:.1e} <= 1e-8"));
    let q5 = chi2_quantile(0.05, 5).unwrap();
    out.check((q5 - 11.0705).abs() <= 1e-3, format!("chi2(5) upper 0.05 point {q5:.5} = 11.0705 ± 1e-3"));

    let base = StudyConfig::new(theta0(), ThresholdGrid::tied(vec![0.3, 0.35]), 8, 2000, HRule::Explicit(0.01), 77)
        .with_null(theta0().to_array().into_iter().enumerate(), 0.05);
    let serial = run_study(&base.clone().with_parallelism(1), StudyKind::Test, None).unwrap();
    let wide = run_study(&base.with_parallelism(8), StudyKind::Test, None).unwrap();
    let a = simulate_levy_ou(&theta0().to_vector(), &PathConfig::new(5000, 0.01, 42)).unwrap();
    let b = simulate_levy_ou(&theta0().to_vector(), &PathConfig::new(5000, 0.01, 42)).unwrap();
    let bits = |p: &Path| p.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    out.check(
        serial.same_results(&wide) && bits(&a) == bits(&b),
        "seeded simulation and studies are bitwise reproducible (1 vs 8 worker threads)".into(),
    );
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new(8, "full-scale run, M = 1000 at rho = 0.26");
    let started = Instant::now();
    let cell = estimation_cell(vec![0.26], 1000, 8008).remove(0);
    check_means(
        &mut out,
        &cell,
        [2.00362, 2.49988, 5.95749, -0.00087, 20.37968],
        [0.010, 0.020, 0.15, 0.010, 0.60],
    );
    out.note(format!("wall time {:.0} s", started.elapsed().as_secs_f64()));
    out
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |id: u32| selected.is_empty() || selected.contains(&id);
    let full_scale = std::env::var_os("JUMPQLE_FULL_SCALE").is_some_and(|v| !v.is_empty() && v != "0");

    let mut outcomes = Vec::new();
    let mut report = |o: Outcome, secs: f64| {
        println!("{} criterion {}: {} ({secs:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.id, o.title);
        for d in &o.details {
            println!("    {d}");
        }
        outcomes.push((o.id, o.pass));
    };
    let timed = |f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        (o, t.elapsed().as_secs_f64())
    };

    for (id, f) in [(7, criterion_7 as fn() -> Outcome), (6, criterion_6)] {
        if wanted(id) {
            let (o, s) = timed(&f);
            report(o, s);
        }
    }
    if wanted(1) || wanted(2) {
        let t = Instant::now();
        let cells = estimation_cell(vec![0.255, 0.26, 0.3], 100, 1001);
        let secs = t.elapsed().as_secs_f64();
        if wanted(1) {
            report(criterion_1(&cells), secs);
        }
        if wanted(2) {
            report(criterion_2(&cells), secs);
        }
    }
    for (id, f) in [(3, criterion_3 as fn() -> Outcome), (4, criterion_4), (5, criterion_5)] {
        if wanted(id) {
            let (o, s) = timed(&f);
            report(o, s);
        }
    }
    if wanted(8) {
        if full_scale {
            let (o, s) = timed(&criterion_8);
            report(o, s);
        } else {
            println!("SKIP criterion 8: full-scale run (set JUMPQLE_FULL_SCALE=1 to enable)");
        }
    }

    let failed: Vec<u32> = outcomes.iter().filter(|(_, p)| !p).map(|(id, _)| *id).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        outcomes.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({failed:?})") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
