//! Replication harness for estimation and testing studies on the
//! Lévy-OU model, with CSV/JSON export.
//!
//! Each (cell, replication) pair draws its own path from
//! `replication_seed(base_seed, cell, rep)`, so results do not depend on
//! scheduling. Replications are gathered by index and reduced in order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path as FsPath;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{estimate_adaptive_levy_ou, estimate_constrained, Constraint, EstimationConfig, EstimatorKind};
use crate::filters::{Threshold, ThresholdConfig, ThresholdSlot};
use crate::inference::{asymptotic_covariance_levy_ou, decide_test, estimate_mu2, qlr_statistic, standardize};
use crate::io::{write_atomic, write_json_atomic};
use crate::likelihood::QllContext;
use crate::model::{levy_ou_model, LevyOuParams, ParamBounds};
use crate::numeric::{format_g, format_g17};
use crate::rng::replication_seed;
use crate::simulate::{simulate_levy_ou, Path, PathConfig};
use crate::stats::{chi2_quantile, mean, normal_quantile, plotting_positions, sample_sd};

/// Step-size rule: an explicit h, or h = n^(−c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HRule {
    Explicit(f64),
    Power(f64),
}

impl HRule {
    pub fn step(&self, n: usize) -> f64 {
        match *self {
            HRule::Explicit(h) => h,
            HRule::Power(c) => (n as f64).powf(-c),
        }
    }
}

/// Values for one threshold slot: an explicit list, or the name of another
/// slot (`"rho1"`, `"rho2"`, `"rho3"`, `"rho1_bar"`, `"rho2_bar"`) to copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlotValues {
    List(Vec<f64>),
    Tied(String),
}

impl SlotValues {
    pub fn single(rho: f64) -> Self {
        SlotValues::List(vec![rho])
    }
}

impl From<Vec<f64>> for SlotValues {
    fn from(v: Vec<f64>) -> Self {
        SlotValues::List(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdGrid {
    #[serde(default = "unit_d")]
    pub d: f64,
    pub rho1: SlotValues,
    pub rho2: SlotValues,
    pub rho3: SlotValues,
    pub rho1_bar: SlotValues,
    pub rho2_bar: SlotValues,
}

fn unit_d() -> f64 {
    1.0
}

const SLOT_ORDER: [ThresholdSlot; 5] = [
    ThresholdSlot::Diffusion,
    ThresholdSlot::Jump,
    ThresholdSlot::Drift,
    ThresholdSlot::JointContinuous,
    ThresholdSlot::JointJump,
];

fn slot_from_label(label: &str) -> Option<usize> {
    SLOT_ORDER.iter().position(|s| s.label() == label)
}

impl ThresholdGrid {
    /// A single cell.
    pub fn fixed(cfg: &ThresholdConfig) -> Self {
        Self {
            d: cfg.diffusion.d,
            rho1: SlotValues::single(cfg.diffusion.rho),
            rho2: SlotValues::single(cfg.jump.rho),
            rho3: SlotValues::single(cfg.drift.rho),
            rho1_bar: SlotValues::single(cfg.joint_continuous.rho),
            rho2_bar: SlotValues::single(cfg.joint_jump.rho),
        }
    }

    /// Every slot follows one list of ρ values.
    pub fn tied(rhos: Vec<f64>) -> Self {
        let tie = || SlotValues::Tied("rho1".into());
        Self {
            d: 1.0,
            rho1: SlotValues::List(rhos),
            rho2: tie(),
            rho3: tie(),
            rho1_bar: tie(),
            rho2_bar: tie(),
        }
    }

    fn slots(&self) -> [&SlotValues; 5] {
        [&self.rho1, &self.rho2, &self.rho3, &self.rho1_bar, &self.rho2_bar]
    }

    /// Expands the grid; the last listed slot varies fastest.
    pub fn cells(&self) -> Result<Vec<ThresholdConfig>> {
        let slots = self.slots();
        let mut source = [0usize; 5];
        for (k, s) in slots.iter().enumerate() {
            source[k] = match s {
                SlotValues::List(v) => {
                    if v.is_empty() {
                        return Err(Error::InvalidParameter(format!("grid slot {} is empty", SLOT_ORDER[k].label())));
                    }
                    for &rho in v {
                        Threshold::new(self.d, rho)?;
                    }
                    k
                }
                SlotValues::Tied(name) => {
                    let j = slot_from_label(name).ok_or_else(|| {
                        Error::InvalidParameter(format!("unknown slot '{name}' in tie of {}", SLOT_ORDER[k].label()))
                    })?;
                    if !matches!(slots[j], SlotValues::List(_)) {
                        return Err(Error::InvalidParameter(format!(
                            "{} is tied to {name}, which is itself tied",
                            SLOT_ORDER[k].label()
                        )));
                    }
                    j
                }
            };
        }
        let free: Vec<usize> = (0..5).filter(|&k| source[k] == k).collect();
        let lists: Vec<&Vec<f64>> = free
            .iter()
            .map(|&k| match slots[k] {
                SlotValues::List(v) => v,
                SlotValues::Tied(_) => unreachable!(),
            })
            .collect();
        let total: usize = lists.iter().map(|l| l.len()).product();
        let mut cells = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut rho = [0.0; 5];
            for (pos, &k) in free.iter().enumerate().rev() {
                let l = lists[pos];
                rho[k] = l[idx % l.len()];
                idx /= l.len();
            }
            for k in 0..5 {
                rho[k] = rho[source[k]];
            }
            cells.push(ThresholdConfig::from_rhos(self.d, rho[0], rho[1], rho[2], rho[3], rho[4])?);
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Estimation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub theta: LevyOuParams,
    /// Null hypothesis for test studies; empty for estimation studies.
    pub constraints: Vec<Constraint>,
    pub eps: f64,
    pub grid: ThresholdGrid,
    pub replications: usize,
    pub n: usize,
    pub h: HRule,
    pub base_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub parallelism: usize,
    pub burn_in_time: Option<f64>,
    pub bounds: ParamBounds,
}

impl StudyConfig {
    pub fn new(theta: LevyOuParams, grid: ThresholdGrid, replications: usize, n: usize, h: HRule, base_seed: u64) -> Self {
        Self {
            theta,
            constraints: Vec::new(),
            eps: 0.05,
            grid,
            replications,
            n,
            h,
            base_seed,
            parallelism: 0,
            burn_in_time: None,
            bounds: LevyOuParams::default_bounds(),
        }
    }

    pub fn with_null(mut self, constraints: impl IntoIterator<Item = (usize, f64)>, eps: f64) -> Self {
        self.constraints = constraints.into_iter().map(|(index, value)| Constraint { index, value }).collect();
        self.eps = eps;
        self
    }

    pub fn with_parallelism(mut self, threads: usize) -> Self {
        self.parallelism = threads;
        self
    }

    pub fn step(&self) -> f64 {
        self.h.step(self.n)
    }

    pub fn validate(&self, kind: StudyKind) -> Result<Vec<ThresholdConfig>> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("a study needs at least one replication".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let h = self.step();
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParameter(format!("step size must lie in (0, 1), got {h}")));
        }
        match kind {
            StudyKind::Estimation if !self.constraints.is_empty() => {
                return Err(Error::InvalidParameter("an estimation study takes no constraints".into()));
            }
            StudyKind::Test if self.constraints.is_empty() => {
                return Err(Error::InvalidParameter("a test study requires constraints".into()));
            }
            StudyKind::Test if !(self.eps > 0.0 && self.eps < 1.0) => {
                return Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {}", self.eps)));
            }
            _ => {}
        }
        let cells = self.grid.cells()?;
        EstimationConfig::new(cells[0], self.bounds.clone())
            .with_constraints(self.constraints.iter().map(|c| (c.index, c.value)))
            .validate()?;
        Ok(cells)
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub seed: u64,
    pub estimate: [f64; 5],
    /// Rate-scaled, K-whitened deviation (estimation studies).
    pub standardized: Option<[f64; 5]>,
    /// Ratio statistic and decision (test studies).
    pub lambda_n: Option<f64>,
    pub reject: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub index: usize,
    pub thresholds: ThresholdConfig,
    /// Seeds of every replication, in replication order.
    pub seeds: Vec<u64>,
    pub replications: Vec<Replication>,
    pub failures: Vec<ReplicationFailure>,
    pub mean: [f64; 5],
    pub sd: [f64; 5],
    pub rejections: usize,
    pub rejection_rate: Option<f64>,
}

impl CellReport {
    pub fn successes(&self) -> usize {
        self.replications.len()
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.replications.iter().map(|r| r.estimate[k]).collect()
    }

    pub fn standardized_component(&self, k: usize) -> Vec<f64> {
        self.replications.iter().filter_map(|r| r.standardized.map(|z| z[k])).collect()
    }

    pub fn lambda_samples(&self) -> Vec<f64> {
        self.replications.iter().filter_map(|r| r.lambda_n).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub config: StudyConfig,
    pub h: f64,
    pub cells: Vec<CellReport>,
    /// Wall-clock seconds per cell; excluded from reproducibility checks.
    pub wall_times: Vec<f64>,
}

impl StudyReport {
    /// Everything except timings and the thread count.
    pub fn same_results(&self, other: &StudyReport) -> bool {
        let mut config = other.config.clone();
        config.parallelism = self.config.parallelism;
        self.kind == other.kind && self.config == config && self.h.to_bits() == other.h.to_bits() && self.cells == other.cells
    }

    pub fn df(&self) -> u32 {
        self.config.constraints.len() as u32
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures.len()).sum()
    }
}

/// Progress callback: (completed replications, total replications).
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

fn simulate_replication(cfg: &StudyConfig, h: f64, seed: u64) -> Result<Path> {
    let mut pc = PathConfig::new(cfg.n, h, seed);
    pc.burn_in_time = cfg.burn_in_time;
    simulate_levy_ou(&cfg.theta.to_vector(), &pc)
}

fn one_replication(cfg: &StudyConfig, kind: StudyKind, th: &ThresholdConfig, h: f64, seed: u64) -> Result<Replication> {
    let path = simulate_replication(cfg, h, seed)?;
    let est_cfg = EstimationConfig::new(*th, cfg.bounds.clone());
    let unconstrained = estimate_adaptive_levy_ou(&path, &est_cfg)?;
    let estimate: [f64; 5] = unconstrained.theta_hat.as_slice().try_into().expect("five components");
    match kind {
        StudyKind::Estimation => {
            let theta0 = cfg.theta.to_vector();
            let info = asymptotic_covariance_levy_ou(&theta0, estimate_mu2(&path)?)?;
            let z = standardize(&unconstrained, &theta0, &info, cfg.n, h)?;
            Ok(Replication {
                seed,
                estimate,
                standardized: Some(z),
                lambda_n: None,
                reject: None,
            })
        }
        StudyKind::Test => {
            let model = levy_ou_model();
            let ctx = QllContext::new(&model, &path)?;
            let null_cfg = est_cfg.with_constraints(cfg.constraints.iter().map(|c| (c.index, c.value)));
            let constrained = estimate_constrained(&ctx, &null_cfg, EstimatorKind::Adaptive)?;
            let lambda_n = qlr_statistic(
                &ctx,
                &unconstrained.theta_hat,
                &constrained.theta_hat,
                &th.joint_continuous,
                &th.joint_jump,
            )?;
            let decision = decide_test(lambda_n, cfg.constraints.len() as u32, cfg.eps)?;
            Ok(Replication {
                seed,
                estimate,
                standardized: None,
                lambda_n: Some(lambda_n),
                reject: Some(decision.reject),
            })
        }
    }
}

fn reduce_cell(index: usize, thresholds: ThresholdConfig, outcomes: Vec<(u64, Result<Replication>)>) -> CellReport {
    let mut seeds = Vec::with_capacity(outcomes.len());
    let mut replications = Vec::new();
    let mut failures = Vec::new();
    for (rep, (seed, outcome)) in outcomes.into_iter().enumerate() {
        seeds.push(seed);
        match outcome {
            Ok(r) => replications.push(r),
            Err(e) => failures.push(ReplicationFailure {
                replication: rep,
                seed,
                message: e.to_string(),
            }),
        }
    }
    let mut m = [f64::NAN; 5];
    let mut s = [f64::NAN; 5];
    for k in 0..5 {
        let xs: Vec<f64> = replications.iter().map(|r| r.estimate[k]).collect();
        m[k] = mean(&xs);
        s[k] = sample_sd(&xs);
    }
    let decided: Vec<bool> = replications.iter().filter_map(|r| r.reject).collect();
    let rejections = decided.iter().filter(|&&r| r).count();
    let rejection_rate = (!decided.is_empty()).then(|| rejections as f64 / decided.len() as f64);
    CellReport {
        index,
        thresholds,
        seeds,
        replications,
        failures,
        mean: m,
        sd: s,
        rejections,
        rejection_rate,
    }
}

/// Runs a study. Failed replications are recorded per cell, never fatal.
pub fn run_study(cfg: &StudyConfig, kind: StudyKind, progress: Option<Progress<'_>>) -> Result<StudyReport> {
    let cells = cfg.validate(kind)?;
    let h = cfg.step();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let m = cfg.replications;
    let total = cells.len() * m;
    let done = std::sync::atomic::AtomicUsize::new(0);

    let mut reports = Vec::with_capacity(cells.len());
    let mut wall_times = Vec::with_capacity(cells.len());
    for (ci, th) in cells.iter().enumerate() {
        let started = Instant::now();
        let outcomes: Vec<(u64, Result<Replication>)> = pool.install(|| {
            (0..m)
                .into_par_iter()
                .map(|rep| {
                    let seed = replication_seed(cfg.base_seed, ci as u64, rep as u64);
                    let out = one_replication(cfg, kind, th, h, seed);
                    let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                    if let Some(cb) = progress {
                        cb(finished, total);
                    }
                    (seed, out)
                })
                .collect()
        });
        reports.push(reduce_cell(ci, *th, outcomes));
        wall_times.push(started.elapsed().as_secs_f64());
    }
    Ok(StudyReport {
        kind,
        config: cfg.clone(),
        h,
        cells: reports,
        wall_times,
    })
}

pub fn run_estimation_study(cfg: &StudyConfig) -> Result<StudyReport> {
    run_study(cfg, StudyKind::Estimation, None)
}

pub fn run_test_study(cfg: &StudyConfig) -> Result<StudyReport> {
    run_study(cfg, StudyKind::Test, None)
}

const PARAM_COLUMNS: &str = "alpha,beta,lambda,mu,sigma2";
const RHO_COLUMNS: &str = "rho1,rho2,rho3,rho1_bar,rho2_bar";

fn rho_fields(th: &ThresholdConfig) -> String {
    th.slots().iter().map(|(_, t)| format_g(t.rho, 6)).collect::<Vec<_>>().join(",")
}

fn fixed6(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.6}")
    }
}

fn table_csv(report: &StudyReport, pick: impl Fn(&CellReport) -> [f64; 5]) -> String {
    let mut out = format!("cell,{RHO_COLUMNS},{PARAM_COLUMNS}\n");
    for c in &report.cells {
        let vals: Vec<String> = pick(c).iter().map(|&v| fixed6(v)).collect();
        let _ = writeln!(out, "{},{},{}", c.index, rho_fields(&c.thresholds), vals.join(","));
    }
    out
}

fn cells_csv(report: &StudyReport) -> String {
    let mut out = format!("cell,{RHO_COLUMNS},replications,successes,failures,rejections,rejection_rate\n");
    for c in &report.cells {
        let rate = c.rejection_rate.map(fixed6).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.index,
            rho_fields(&c.thresholds),
            c.seeds.len(),
            c.successes(),
            c.failures.len(),
            c.rejections,
            rate
        );
    }
    out
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn qq_csv(report: &StudyReport, cell: &CellReport) -> Result<String> {
    let mut out = String::new();
    match report.kind {
        StudyKind::Estimation => {
            let cols: Vec<Vec<f64>> = (0..5).map(|k| sorted(cell.standardized_component(k))).collect();
            let m = cols[0].len();
            let _ = writeln!(out, "theoretical,{PARAM_COLUMNS}");
            for (i, p) in plotting_positions(m).into_iter().enumerate() {
                out.push_str(&format_g17(normal_quantile(p)));
                for col in &cols {
                    out.push(',');
                    out.push_str(&format_g17(col[i]));
                }
                out.push('\n');
            }
        }
        StudyKind::Test => {
            let lam = sorted(cell.lambda_samples());
            let df = report.df();
            let _ = writeln!(out, "theoretical,lambda_n");
            for (i, p) in plotting_positions(lam.len()).into_iter().enumerate() {
                let q = chi2_quantile(1.0 - p, df)?;
                let _ = writeln!(out, "{},{}", format_g17(q), format_g17(lam[i]));
            }
        }
    }
    Ok(out)
}

/// ρ̄1 × ρ̄2 matrix of rejection rates, or long format when other slots
/// vary independently of (ρ̄1, ρ̄2).
fn rejections_csv(report: &StudyReport) -> String {
    let key = |t: &ThresholdConfig| (t.joint_continuous.rho.to_bits(), t.joint_jump.rho.to_bits());
    let mut by_key = BTreeMap::new();
    let mut unique = true;
    for c in &report.cells {
        if by_key.insert(key(&c.thresholds), c).is_some() {
            unique = false;
        }
    }
    if !unique {
        let mut out = format!("{RHO_COLUMNS},rejection_rate\n");
        for c in &report.cells {
            let rate = c.rejection_rate.map(fixed6).unwrap_or_default();
            let _ = writeln!(out, "{},{rate}", rho_fields(&c.thresholds));
        }
        return out;
    }
    let mut rows: Vec<f64> = report.cells.iter().map(|c| c.thresholds.joint_continuous.rho).collect();
    let mut cols: Vec<f64> = report.cells.iter().map(|c| c.thresholds.joint_jump.rho).collect();
    for v in [&mut rows, &mut cols] {
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
    }
    let mut out = String::from("rho1_bar\\rho2_bar");
    for c in &cols {
        let _ = write!(out, ",{}", format_g(*c, 6));
    }
    out.push('\n');
    for r in &rows {
        out.push_str(&format_g(*r, 6));
        for c in &cols {
            out.push(',');
            if let Some(cell) = by_key.get(&(r.to_bits(), c.to_bits())) {
                out.push_str(&cell.rejection_rate.map(fixed6).unwrap_or_default());
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    crate_name: &'static str,
    crate_version: &'static str,
    kind: StudyKind,
    seed_derivation: &'static str,
    h: f64,
    config: &'a StudyConfig,
    cells: Vec<ManifestCell<'a>>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct ManifestCell<'a> {
    index: usize,
    thresholds: &'a ThresholdConfig,
    seeds: &'a [u64],
    successes: usize,
    failures: &'a [ReplicationFailure],
    wall_time_secs: f64,
}

/// Writes the study tables, QQ data, and manifest into `out_dir`.
///
/// Each file is written to a temporary name and renamed into place.
pub fn export_report(report: &StudyReport, out_dir: &FsPath) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files: Vec<(String, String)> = Vec::new();
    match report.kind {
        StudyKind::Estimation => {
            files.push(("means.csv".into(), table_csv(report, |c| c.mean)));
            files.push(("sds.csv".into(), table_csv(report, |c| c.sd)));
        }
        StudyKind::Test => files.push(("rejections.csv".into(), rejections_csv(report))),
    }
    files.push(("cells.csv".into(), cells_csv(report)));
    for c in &report.cells {
        files.push((format!("qq_{:03}.csv", c.index), qq_csv(report, c)?));
    }
    let mut written = Vec::with_capacity(files.len() + 1);
    for (name, text) in &files {
        let target = out_dir.join(name);
        write_atomic(&target, text.as_bytes())?;
        written.push(target);
    }
    let manifest = Manifest {
        crate_name: env!("CARGO_PKG_NAME"),
        crate_version: env!("CARGO_PKG_VERSION"),
        kind: report.kind,
        seed_derivation: "splitmix64(splitmix64(base_seed ^ splitmix64(cell)) ^ replication); ChaCha12 stream 0 for the path, stream 1 for burn-in",
        h: report.h,
        config: &report.config,
        cells: report
            .cells
            .iter()
            .zip(&report.wall_times)
            .map(|(c, &t)| ManifestCell {
                index: c.index,
                thresholds: &c.thresholds,
                seeds: &c.seeds,
                successes: c.successes(),
                failures: &c.failures,
                wall_time_secs: t,
            })
            .collect(),
        files: files.iter().map(|(n, _)| n.clone()).collect(),
    };
    let target = out_dir.join("manifest.json");
    write_json_atomic(&target, &manifest)?;
    written.push(target);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tied_grid_expands_to_one_cell_per_rho() {
        let grid = ThresholdGrid::tied(vec![0.255, 0.26, 0.3]);
        let cells = grid.cells().unwrap();
        assert_eq!(cells.len(), 3);
        for (c, rho) in cells.iter().zip([0.255, 0.26, 0.3]) {
            assert!(c.slots().iter().all(|(_, t)| t.rho == rho));
        }
    }

    #[test]
    fn product_grid_order() {
        let grid = ThresholdGrid {
            d: 1.0,
            rho1: SlotValues::single(0.285),
            rho2: SlotValues::single(0.26),
            rho3: SlotValues::single(0.255),
            rho1_bar: vec![0.255, 0.26].into(),
            rho2_bar: vec![0.255, 0.26, 0.265].into(),
        };
        let cells = grid.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[1].joint_continuous.rho, 0.255);
        assert_eq!(cells[1].joint_jump.rho, 0.26);
        assert_eq!(cells[3].joint_continuous.rho, 0.26);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let mut g = ThresholdGrid::tied(vec![0.26]);
        g.rho2 = SlotValues::Tied("rho9".into());
        assert!(g.cells().is_err());
        let mut g = ThresholdGrid::tied(vec![0.26]);
        g.rho1 = SlotValues::Tied("rho2".into());
        assert!(g.cells().is_err());
        assert!(ThresholdGrid::tied(vec![0.6]).cells().is_err());
    }

    #[test]
    fn h_rule() {
        assert!((HRule::Power(2.0 / 3.0).step(1_000_000) - 1e-4).abs() < 1e-15);
        assert_eq!(HRule::Explicit(0.01).step(5), 0.01);
    }
}
