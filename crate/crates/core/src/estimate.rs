//! Adaptive, joint, and constrained quasi-maximum likelihood estimators.
//!
//! The adaptive estimator maximizes the three likelihoods of
//! [`crate::likelihood`] in sequence: α̌ from l1, then β̌ from l2̄(· | α̌),
//! and γ̌ from l2̃ (which does not depend on α̌ or β̌). The joint estimator
//! maximizes l(θ) over the whole box. For the Lévy-OU model all of these
//! have closed forms; other models go through [`nelder_mead`].
//!
//! Constraints fix individual components of θ; the remaining components are
//! optimized over the reduced box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{IncrementClassification, ThresholdConfig};
use crate::likelihood::{qll_diffusion, qll_drift, qll_joint_parts, qll_jump, QllContext};
use crate::model::{levy_ou_model, LevyOuParams, ParamBounds, ParamLayout, ParamVector};
use crate::numeric::CompensatedSum;
use crate::optimize::{nelder_mead, OptimizerSettings};
use crate::simulate::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub thresholds: ThresholdConfig,
    pub bounds: ParamBounds,
    pub optimizer: OptimizerSettings,
    pub constraints: Vec<Constraint>,
    /// Optimizer starting point; defaults to a point inside the box.
    pub initial: Option<ParamVector>,
}

impl EstimationConfig {
    pub fn new(thresholds: ThresholdConfig, bounds: ParamBounds) -> Self {
        Self {
            thresholds,
            bounds,
            optimizer: OptimizerSettings::default(),
            constraints: Vec::new(),
            initial: None,
        }
    }

    pub fn with_constraints(mut self, constraints: impl IntoIterator<Item = (usize, f64)>) -> Self {
        self.constraints = constraints.into_iter().map(|(index, value)| Constraint { index, value }).collect();
        self
    }

    pub fn with_initial(mut self, initial: ParamVector) -> Self {
        self.initial = Some(initial);
        self
    }

    pub fn layout(&self) -> ParamLayout {
        self.bounds.layout()
    }

    /// Checks constraint indices are distinct, in range, and inside the box.
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        let len = self.layout().len();
        let mut seen = vec![false; len];
        for c in &self.constraints {
            if c.index >= len {
                return Err(Error::InvalidParameter(format!(
                    "constraint index {} out of range for {len} parameters",
                    c.index
                )));
            }
            if std::mem::replace(&mut seen[c.index], true) {
                return Err(Error::InvalidParameter(format!("component {} constrained twice", c.index)));
            }
            let (lower, upper) = self.bounds.interval(c.index);
            if !(lower <= c.value && c.value <= upper) {
                return Err(Error::ConstraintOutOfBounds {
                    index: c.index,
                    value: c.value,
                    lower,
                    upper,
                });
            }
        }
        if let Some(init) = &self.initial {
            if init.layout() != self.layout() {
                return Err(Error::InvalidParameter("initial point layout does not match bounds".into()));
            }
        }
        Ok(())
    }

    pub fn fixed_value(&self, index: usize) -> Option<f64> {
        self.constraints.iter().find(|c| c.index == index).map(|c| c.value)
    }

    fn is_fully_constrained(&self) -> bool {
        self.constraints.len() == self.layout().len()
    }

    fn start_point(&self) -> Vec<f64> {
        let lower = self.bounds.lower();
        let upper = self.bounds.upper();
        let mut x: Vec<f64> = match &self.initial {
            Some(init) => init.as_slice().to_vec(),
            None => lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| {
                    if lo > 0.0 {
                        (lo * hi).sqrt()
                    } else if lo <= 0.0 && hi >= 0.0 {
                        0.0
                    } else {
                        -(lo * hi).sqrt()
                    }
                })
                .collect(),
        };
        for c in &self.constraints {
            x[c.index] = c.value;
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Optimizer,
    /// Every component was fixed by constraints.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Adaptive,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoglikParts {
    /// (l1(α̌), l2̄(β̌ | α̌), l2̃(γ̌)).
    Adaptive { diffusion: f64, drift: f64, jump: f64 },
    /// l̄(α̂, β̂) and l̃(γ̂) with their sum.
    Joint { continuous: f64, jump: f64, total: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub theta_hat: ParamVector,
    pub kind: EstimatorKind,
    /// Small increments under the diffusion filter (ρ1, or ρ̄1 for joint).
    pub n1: usize,
    /// Large increments under the jump filter (ρ2, or ρ̄2 for joint).
    pub n2: usize,
    /// Small increments under the drift filter (ρ3, or ρ̄1 for joint).
    pub n3: usize,
    pub loglik: LoglikParts,
    pub method: Method,
    pub converged: bool,
    /// Components clamped onto the parameter box.
    pub projected: Vec<bool>,
    pub constraints: Vec<Constraint>,
    pub thresholds: ThresholdConfig,
    pub seed: Option<u64>,
}

impl EstimateResult {
    pub fn any_projected(&self) -> bool {
        self.projected.iter().any(|&p| p)
    }
}

fn degenerate(msg: impl Into<String>) -> Error {
    Error::DegenerateFilter(msg.into())
}

fn require_levy_ou(path: &Path, cfg: &EstimationConfig) -> Result<()> {
    if path.dim() != 1 {
        return Err(Error::DimensionMismatch {
            what: "Levy-OU path dimension",
            expected: 1,
            got: path.dim(),
        });
    }
    if cfg.layout() != LevyOuParams::layout() {
        return Err(Error::InvalidParameter("Levy-OU estimation needs a (1, 1, 3) parameter box".into()));
    }
    cfg.validate()
}

/// Sums the Lévy-OU closed forms are built from.
struct FilterSums {
    count: usize,
    sum_dx: f64,
    sum_dx2: f64,
    sum_x_dx: f64,
    sum_x2: f64,
}

fn filter_sums(path: &Path, cls: &IncrementClassification, small: bool) -> FilterSums {
    let x = path.values();
    let mut dx1 = CompensatedSum::new();
    let mut dx2 = CompensatedSum::new();
    let mut xdx = CompensatedSum::new();
    let mut x2 = CompensatedSum::new();
    let mut count = 0;
    for (k, &is_small) in cls.small_mask.iter().enumerate() {
        if is_small != small {
            continue;
        }
        let (prev, dx) = (x[k], x[k + 1] - x[k]);
        count += 1;
        dx1.add(dx);
        dx2.add(dx * dx);
        xdx.add(prev * dx);
        x2.add(prev * prev);
    }
    FilterSums {
        count,
        sum_dx: dx1.value(),
        sum_dx2: dx2.value(),
        sum_x_dx: xdx.value(),
        sum_x2: x2.value(),
    }
}

/// Σ_{large} (ΔX − μ)².
fn centred_jump_ss(path: &Path, cls: &IncrementClassification, mu: f64) -> f64 {
    let x = path.values();
    cls.large_indices()
        .map(|i| {
            let r = x[i] - x[i - 1] - mu;
            r * r
        })
        .collect::<CompensatedSum>()
        .value()
}

/// α̌ = sqrt((n1 h)⁻¹ Σ_{small} ΔX²).
pub fn levy_ou_alpha(path: &Path, cls: &IncrementClassification) -> Result<f64> {
    let s = filter_sums(path, cls, true);
    if s.count == 0 {
        return Err(degenerate("n1 = 0: no increment passes the diffusion filter"));
    }
    Ok((s.sum_dx2 / (s.count as f64 * path.h())).sqrt())
}

/// β̌ = −Σ_{small} X ΔX / (h Σ_{small} X²).
pub fn levy_ou_beta(path: &Path, cls: &IncrementClassification) -> Result<f64> {
    let s = filter_sums(path, cls, true);
    if !(s.sum_x2 > 0.0) {
        return Err(degenerate("sum of X_{t_{i-1}}^2 over the drift filter is zero"));
    }
    Ok(-s.sum_x_dx / (path.h() * s.sum_x2))
}

/// (λ̌, μ̌) = (n2 / (n h), n2⁻¹ Σ_{large} ΔX).
pub fn levy_ou_intensity_mean(path: &Path, cls: &IncrementClassification) -> Result<(f64, f64)> {
    let s = filter_sums(path, cls, false);
    if s.count == 0 {
        return Err(degenerate("n2 = 0: no increment passes the jump filter"));
    }
    Ok((s.count as f64 / path.horizon(), s.sum_dx / s.count as f64))
}

/// σ̌² = n2⁻¹ Σ_{large} (ΔX − μ)².
pub fn levy_ou_jump_variance(path: &Path, cls: &IncrementClassification, mu: f64, mu_estimated: bool) -> Result<f64> {
    let needed = if mu_estimated { 2 } else { 1 };
    if cls.n_large < needed {
        return Err(degenerate(format!(
            "n2 = {} < {needed}: jump variance is undefined",
            cls.n_large
        )));
    }
    Ok(centred_jump_ss(path, cls, mu) / cls.n_large as f64)
}

/// Sets free component `index` to `value` clamped onto the box.
fn place(theta: &mut [f64], projected: &mut [bool], bounds: &ParamBounds, index: usize, value: f64) {
    let (lo, hi) = bounds.interval(index);
    let clamped = value.clamp(lo, hi);
    projected[index] = clamped != value;
    theta[index] = clamped;
}

/// γ̌ = (λ̌, μ̌, σ̌²) honouring constraints on γ.
fn levy_ou_gamma(
    path: &Path,
    cls: &IncrementClassification,
    cfg: &EstimationConfig,
    theta: &mut [f64],
    projected: &mut [bool],
) -> Result<()> {
    let (lambda_fixed, mu_fixed, sigma_fixed) = (cfg.fixed_value(2), cfg.fixed_value(3), cfg.fixed_value(4));
    if mu_fixed.is_none() && cls.n_large == 0 {
        return Err(degenerate("n2 = 0: no increment passes the jump filter"));
    }
    if lambda_fixed.is_none() {
        place(theta, projected, &cfg.bounds, 2, cls.n_large as f64 / path.horizon());
    }
    if mu_fixed.is_none() {
        let (_, mu) = levy_ou_intensity_mean(path, cls)?;
        place(theta, projected, &cfg.bounds, 3, mu);
    }
    if sigma_fixed.is_none() {
        let s2 = levy_ou_jump_variance(path, cls, theta[3], mu_fixed.is_none())?;
        place(theta, projected, &cfg.bounds, 4, s2);
    }
    Ok(())
}

fn fixed_start(cfg: &EstimationConfig) -> (Vec<f64>, Vec<bool>) {
    let mut theta = vec![f64::NAN; cfg.layout().len()];
    for c in &cfg.constraints {
        theta[c.index] = c.value;
    }
    (theta, vec![false; cfg.layout().len()])
}

fn adaptive_logliks(ctx: &QllContext<'_>, theta: &ParamVector, th: &ThresholdConfig) -> Result<LoglikParts> {
    Ok(LoglikParts::Adaptive {
        diffusion: qll_diffusion(ctx, theta.alpha(), &th.diffusion)?,
        drift: qll_drift(ctx, theta.beta(), theta.alpha(), &th.drift)?,
        jump: qll_jump(ctx, theta.gamma(), &th.jump)?,
    })
}

fn joint_logliks(ctx: &QllContext<'_>, theta: &ParamVector, th: &ThresholdConfig) -> Result<LoglikParts> {
    let (continuous, jump) = qll_joint_parts(ctx, theta, &th.joint_continuous, &th.joint_jump)?;
    Ok(LoglikParts::Joint {
        continuous,
        jump,
        total: continuous + jump,
    })
}

/// Closed-form adaptive estimator for the Lévy-OU model.
pub fn estimate_adaptive_levy_ou(path: &Path, cfg: &EstimationConfig) -> Result<EstimateResult> {
    require_levy_ou(path, cfg)?;
    let model = levy_ou_model();
    let ctx = QllContext::new(&model, path)?;
    let th = &cfg.thresholds;
    let cls1 = ctx.classification(&th.diffusion);
    let cls2 = ctx.classification(&th.jump);
    let cls3 = ctx.classification(&th.drift);

    let (mut theta, mut projected) = fixed_start(cfg);
    if cfg.fixed_value(0).is_none() {
        place(&mut theta, &mut projected, &cfg.bounds, 0, levy_ou_alpha(path, &cls1)?);
    }
    if cfg.fixed_value(1).is_none() {
        place(&mut theta, &mut projected, &cfg.bounds, 1, levy_ou_beta(path, &cls3)?);
    }
    levy_ou_gamma(path, &cls2, cfg, &mut theta, &mut projected)?;

    let theta = ParamVector::from_flat(LevyOuParams::layout(), theta)?;
    let method = if cfg.is_fully_constrained() { Method::Fixed } else { Method::ClosedForm };
    Ok(EstimateResult {
        loglik: adaptive_logliks(&ctx, &theta, th)?,
        theta_hat: theta,
        kind: EstimatorKind::Adaptive,
        n1: cls1.n_small,
        n2: cls2.n_large,
        n3: cls3.n_small,
        method,
        converged: true,
        projected,
        constraints: cfg.constraints.clone(),
        thresholds: *th,
        seed: None,
    })
}

/// Closed-form joint estimator for the Lévy-OU model.
///
/// β̂ does not depend on α, so it is computed first (or taken from its
/// constraint) and α̂ is the conditional maximizer given β̂.
pub fn estimate_joint_levy_ou(path: &Path, cfg: &EstimationConfig) -> Result<EstimateResult> {
    require_levy_ou(path, cfg)?;
    let model = levy_ou_model();
    let ctx = QllContext::new(&model, path)?;
    let th = &cfg.thresholds;
    let cls1 = ctx.classification(&th.joint_continuous);
    let cls2 = ctx.classification(&th.joint_jump);

    let (mut theta, mut projected) = fixed_start(cfg);
    if cfg.fixed_value(1).is_none() {
        place(&mut theta, &mut projected, &cfg.bounds, 1, levy_ou_beta(path, &cls1)?);
    }
    if cfg.fixed_value(0).is_none() {
        if cls1.n_small == 0 {
            return Err(degenerate("n1 = 0: no increment passes the joint continuous filter"));
        }
        let beta = theta[1];
        let h = path.h();
        let x = path.values();
        let ss = cls1
            .small_indices()
            .map(|i| {
                let r = x[i] - x[i - 1] + beta * h * x[i - 1];
                r * r
            })
            .collect::<CompensatedSum>()
            .value();
        place(&mut theta, &mut projected, &cfg.bounds, 0, (ss / (cls1.n_small as f64 * h)).sqrt());
    }
    levy_ou_gamma(path, &cls2, cfg, &mut theta, &mut projected)?;

    let theta = ParamVector::from_flat(LevyOuParams::layout(), theta)?;
    let method = if cfg.is_fully_constrained() { Method::Fixed } else { Method::ClosedForm };
    Ok(EstimateResult {
        loglik: joint_logliks(&ctx, &theta, th)?,
        theta_hat: theta,
        kind: EstimatorKind::Joint,
        n1: cls1.n_small,
        n2: cls2.n_large,
        n3: cls1.n_small,
        method,
        converged: true,
        projected,
        constraints: cfg.constraints.clone(),
        thresholds: *th,
        seed: None,
    })
}

/// Maximizes `objective` over the free components in `range`, writing the
/// maximizer into `theta`. Returns whether the optimizer converged.
fn optimize_block<F>(cfg: &EstimationConfig, range: std::ops::Range<usize>, theta: &mut [f64], mut objective: F) -> Result<bool>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let free: Vec<usize> = range.clone().filter(|&i| cfg.fixed_value(i).is_none()).collect();
    if free.is_empty() {
        return Ok(true);
    }
    let lower: Vec<f64> = free.iter().map(|&i| cfg.bounds.lower()[i]).collect();
    let upper: Vec<f64> = free.iter().map(|&i| cfg.bounds.upper()[i]).collect();
    let start: Vec<f64> = free.iter().map(|&i| theta[i]).collect();
    let mut block = theta[range.clone()].to_vec();
    let mut first_error = None;
    let result = nelder_mead(
        |x| {
            for (&i, &v) in free.iter().zip(x) {
                block[i - range.start] = v;
            }
            match objective(&block) {
                Ok(v) => v,
                Err(e) => {
                    first_error.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        &lower,
        &upper,
        &start,
        &cfg.optimizer,
    )?;
    if !result.value.is_finite() {
        return Err(first_error.unwrap_or_else(|| degenerate("likelihood is not finite anywhere the optimizer looked")));
    }
    for (&i, &v) in free.iter().zip(&result.argmax) {
        theta[i] = v;
    }
    Ok(result.converged)
}

/// Adaptive estimator by three sequential box-constrained maximizations.
pub fn estimate_adaptive_generic(ctx: &QllContext<'_>, cfg: &EstimationConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let model = ctx.model();
    if cfg.layout() != model.layout() {
        return Err(Error::InvalidParameter("parameter box does not match the model layout".into()));
    }
    let layout = model.layout();
    let th = &cfg.thresholds;
    let cls1 = ctx.classification(&th.diffusion);
    let cls2 = ctx.classification(&th.jump);
    let cls3 = ctx.classification(&th.drift);
    if cls1.n_small == 0 && layout.p > 0 {
        return Err(degenerate("n1 = 0: the diffusion likelihood is flat"));
    }
    if cls3.n_small == 0 && layout.q > 0 {
        return Err(degenerate("n3 = 0: the drift likelihood is flat"));
    }
    if cls2.n_large == 0 && layout.r > 0 {
        return Err(degenerate("n2 = 0: no increment passes the jump filter"));
    }

    let mut theta = cfg.start_point();
    let mut converged = true;
    let alpha_range = layout.alpha_range();
    converged &= optimize_block(cfg, alpha_range.clone(), &mut theta, |a| qll_diffusion(ctx, a, &th.diffusion))?;
    let alpha_hat = theta[alpha_range].to_vec();
    converged &= optimize_block(cfg, layout.beta_range(), &mut theta, |b| qll_drift(ctx, b, &alpha_hat, &th.drift))?;
    converged &= optimize_block(cfg, layout.gamma_range(), &mut theta, |g| qll_jump(ctx, g, &th.jump))?;

    let theta = ParamVector::from_flat(layout, theta)?;
    Ok(EstimateResult {
        loglik: adaptive_logliks(ctx, &theta, th)?,
        theta_hat: theta,
        kind: EstimatorKind::Adaptive,
        n1: cls1.n_small,
        n2: cls2.n_large,
        n3: cls3.n_small,
        method: if cfg.is_fully_constrained() { Method::Fixed } else { Method::Optimizer },
        converged,
        projected: vec![false; layout.len()],
        constraints: cfg.constraints.clone(),
        thresholds: *th,
        seed: None,
    })
}

/// Adaptive estimator: closed form when the model has one, optimizer otherwise.
pub fn estimate_adaptive(ctx: &QllContext<'_>, cfg: &EstimationConfig) -> Result<EstimateResult> {
    if ctx.model().has_closed_form() {
        estimate_adaptive_levy_ou(ctx.path(), cfg)
    } else {
        estimate_adaptive_generic(ctx, cfg)
    }
}

/// Joint estimator by derivative-free maximization of l(θ), started at the
/// adaptive estimate (or the configured start if that is unavailable).
pub fn estimate_joint(ctx: &QllContext<'_>, cfg: &EstimationConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let model = ctx.model();
    if cfg.layout() != model.layout() {
        return Err(Error::InvalidParameter("parameter box does not match the model layout".into()));
    }
    let layout = model.layout();
    let th = &cfg.thresholds;
    let cls1 = ctx.classification(&th.joint_continuous);
    let cls2 = ctx.classification(&th.joint_jump);
    if cls1.n_small == 0 && layout.p + layout.q > 0 {
        return Err(degenerate("n1 = 0: the joint continuous part is flat"));
    }
    if cls2.n_large == 0 && layout.r > 0 {
        return Err(degenerate("n2 = 0: no increment passes the joint jump filter"));
    }

    let mut theta = match estimate_adaptive(ctx, cfg) {
        Ok(seed) => seed.theta_hat.into_vec(),
        Err(_) => cfg.start_point(),
    };
    let converged = optimize_block(cfg, 0..layout.len(), &mut theta, |t| {
        let tv = ParamVector::from_flat(layout, t.to_vec())?;
        let (c, j) = qll_joint_parts(ctx, &tv, &th.joint_continuous, &th.joint_jump)?;
        Ok(c + j)
    })?;

    let theta = ParamVector::from_flat(layout, theta)?;
    Ok(EstimateResult {
        loglik: joint_logliks(ctx, &theta, th)?,
        theta_hat: theta,
        kind: EstimatorKind::Joint,
        n1: cls1.n_small,
        n2: cls2.n_large,
        n3: cls1.n_small,
        method: if cfg.is_fully_constrained() { Method::Fixed } else { Method::Optimizer },
        converged,
        projected: vec![false; layout.len()],
        constraints: cfg.constraints.clone(),
        thresholds: *th,
        seed: None,
    })
}

/// Estimator over Θ₀ = {θ ∈ Θ : constrained components equal their values}.
///
/// With every component fixed the fixed point is returned directly. An
/// empty constraint list gives the unconstrained estimator.
pub fn estimate_constrained(ctx: &QllContext<'_>, cfg: &EstimationConfig, kind: EstimatorKind) -> Result<EstimateResult> {
    cfg.validate()?;
    if cfg.is_fully_constrained() {
        let layout = cfg.layout();
        let theta = ParamVector::from_flat(layout, cfg.start_point())?;
        ctx.model().check_params(&theta)?;
        let th = &cfg.thresholds;
        let (loglik, n1, n2, n3) = match kind {
            EstimatorKind::Adaptive => (
                adaptive_logliks(ctx, &theta, th)?,
                ctx.classification(&th.diffusion).n_small,
                ctx.classification(&th.jump).n_large,
                ctx.classification(&th.drift).n_small,
            ),
            EstimatorKind::Joint => {
                let n1 = ctx.classification(&th.joint_continuous).n_small;
                (joint_logliks(ctx, &theta, th)?, n1, ctx.classification(&th.joint_jump).n_large, n1)
            }
        };
        return Ok(EstimateResult {
            theta_hat: theta,
            kind,
            n1,
            n2,
            n3,
            loglik,
            method: Method::Fixed,
            converged: true,
            projected: vec![false; layout.len()],
            constraints: cfg.constraints.clone(),
            thresholds: *th,
            seed: None,
        });
    }
    match (kind, ctx.model().has_closed_form()) {
        (EstimatorKind::Adaptive, true) => estimate_adaptive_levy_ou(ctx.path(), cfg),
        (EstimatorKind::Adaptive, false) => estimate_adaptive_generic(ctx, cfg),
        (EstimatorKind::Joint, true) => estimate_joint_levy_ou(ctx.path(), cfg),
        (EstimatorKind::Joint, false) => estimate_joint(ctx, cfg),
    }
}
