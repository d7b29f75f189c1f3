//! The quasi-log likelihoods.
//!
//! Adaptive estimation uses three functions, each with its own filter:
//!
//! ```text
//! l1(α)     = −½ Σ_{small ρ1} [ h⁻¹ ΔXᵀ S⁻¹(α) ΔX + log det S(α) ]
//! l2̄(β | ᾱ) = −(2h)⁻¹ Σ_{small ρ3} X̄(β)ᵀ S⁻¹(ᾱ) X̄(β),   X̄(β) = ΔX − h b(β)
//! l2̃(γ)     = Σ_{large ρ2} log Ψ_γ(ΔX, X) − h Σ_{all i} ∫ Ψ_γ(y, X) dy
//! ```
//!
//! with S, b, Ψ evaluated at the left endpoint X_{t_{i−1}}. The joint
//! likelihood is the continuous part with both α and β free (filter ρ̄1)
//! plus the jump part (filter ρ̄2).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::filters::{classify, IncrementClassification, Threshold};
use crate::model::{eval_s, ModelSpec, ParamVector};
use crate::numeric::CompensatedSum;
use crate::simulate::Path;

/// Model, data, and cached filter results.
pub struct QllContext<'a> {
    model: &'a ModelSpec,
    path: &'a Path,
    cache: Mutex<HashMap<(u64, u64), Arc<IncrementClassification>>>,
}

impl<'a> QllContext<'a> {
    pub fn new(model: &'a ModelSpec, path: &'a Path) -> Result<Self> {
        if model.dim() != path.dim() {
            return Err(Error::DimensionMismatch {
                what: "path dimension",
                expected: model.dim(),
                got: path.dim(),
            });
        }
        Ok(Self {
            model,
            path,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn model(&self) -> &'a ModelSpec {
        self.model
    }

    pub fn path(&self) -> &'a Path {
        self.path
    }

    /// Classification for `th`, computed once per distinct (D, ρ).
    pub fn classification(&self, th: &Threshold) -> Arc<IncrementClassification> {
        let mut cache = self.cache.lock().expect("classification cache poisoned");
        cache
            .entry(th.key())
            .or_insert_with(|| Arc::new(classify(self.path, th)))
            .clone()
    }

    fn check_block(&self, what: &'static str, got: usize, expected: usize) -> Result<()> {
        if got != expected {
            return Err(Error::DimensionMismatch { what, expected, got });
        }
        Ok(())
    }
}

/// Factor of a symmetric positive definite S.
enum SpdFactor {
    Scalar { inv: f64, log_det: f64 },
    Cholesky { l: DMatrix<f64>, log_det: f64 },
}

impl SpdFactor {
    fn new(s: DMatrix<f64>, step: Option<usize>) -> Result<Self> {
        if s.nrows() == 1 {
            let v = s[(0, 0)];
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::SingularDiffusion { step });
            }
            return Ok(SpdFactor::Scalar { inv: 1.0 / v, log_det: v.ln() });
        }
        let chol = s.cholesky().ok_or(Error::SingularDiffusion { step })?;
        let l = chol.unpack();
        let log_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::SingularDiffusion { step });
        }
        Ok(SpdFactor::Cholesky { l, log_det })
    }

    #[inline]
    fn quad(&self, v: &[f64]) -> f64 {
        match self {
            SpdFactor::Scalar { inv, .. } => v[0] * v[0] * inv,
            SpdFactor::Cholesky { l, .. } => {
                let mut y = DVector::from_column_slice(v);
                l.solve_lower_triangular_mut(&mut y);
                y.norm_squared()
            }
        }
    }

    #[inline]
    fn log_det(&self) -> f64 {
        match self {
            SpdFactor::Scalar { log_det, .. } | SpdFactor::Cholesky { log_det, .. } => *log_det,
        }
    }
}

/// S⁻¹ and log det S along the path, factored once when S is state-free.
struct DiffusionFactors<'c> {
    ctx: &'c QllContext<'c>,
    alpha: &'c [f64],
    fixed: Option<SpdFactor>,
}

impl<'c> DiffusionFactors<'c> {
    fn new(ctx: &'c QllContext<'c>, alpha: &'c [f64]) -> Result<Self> {
        let fixed = if ctx.model.state_independent_diffusion() {
            Some(factor_at(ctx, alpha, 0)?)
        } else {
            None
        };
        Ok(Self { ctx, alpha, fixed })
    }

    /// Calls `f` with the factor of S(X_{t_{i−1}}, α).
    #[inline]
    fn with<T>(&self, i: usize, f: impl FnOnce(&SpdFactor) -> T) -> Result<T> {
        match &self.fixed {
            Some(fac) => Ok(f(fac)),
            None => Ok(f(&factor_at(self.ctx, self.alpha, i - 1)?)),
        }
    }
}

fn factor_at(ctx: &QllContext<'_>, alpha: &[f64], row: usize) -> Result<SpdFactor> {
    let s = eval_s(ctx.model, ctx.path.state(row), alpha).map_err(|e| match e {
        Error::SingularDiffusion { .. } => Error::SingularDiffusion { step: Some(row + 1) },
        other => other,
    })?;
    SpdFactor::new(s, Some(row + 1))
}

/// Adaptive diffusion likelihood l1(α) on the small increments of `th1`.
pub fn qll_diffusion(ctx: &QllContext<'_>, alpha: &[f64], th1: &Threshold) -> Result<f64> {
    ctx.check_block("alpha", alpha.len(), ctx.model.layout().p)?;
    let cls = ctx.classification(th1);
    if cls.n_small == 0 {
        return Ok(0.0);
    }
    let factors = DiffusionFactors::new(ctx, alpha)?;
    let h = ctx.path.h();
    let mut dx = vec![0.0; ctx.path.dim()];
    let mut acc = CompensatedSum::new();
    for i in cls.small_indices() {
        ctx.path.increment_into(i, &mut dx);
        let term = factors.with(i, |f| f.quad(&dx) / h + f.log_det())?;
        acc.add(term);
    }
    Ok(-0.5 * acc.value())
}

/// Σ_{small} X̄ᵀ S⁻¹ X̄ and Σ_{small} log det S over the filter `th`.
fn continuous_sums(ctx: &QllContext<'_>, alpha: &[f64], beta: &[f64], th: &Threshold) -> Result<(f64, f64)> {
    let cls = ctx.classification(th);
    if cls.n_small == 0 {
        return Ok((0.0, 0.0));
    }
    let factors = DiffusionFactors::new(ctx, alpha)?;
    let h = ctx.path.h();
    let d = ctx.path.dim();
    let mut dx = vec![0.0; d];
    let mut b = vec![0.0; d];
    let mut quad = CompensatedSum::new();
    let mut logdet = CompensatedSum::new();
    for i in cls.small_indices() {
        ctx.path.increment_into(i, &mut dx);
        ctx.model.drift(ctx.path.state(i - 1), beta, &mut b);
        for k in 0..d {
            dx[k] -= h * b[k];
        }
        let (q, ld) = factors.with(i, |f| (f.quad(&dx), f.log_det()))?;
        quad.add(q);
        logdet.add(ld);
    }
    Ok((quad.value(), logdet.value()))
}

/// Adaptive drift likelihood l2̄(β | ᾱ) on the small increments of `th3`.
pub fn qll_drift(ctx: &QllContext<'_>, beta: &[f64], alpha_bar: &[f64], th3: &Threshold) -> Result<f64> {
    ctx.check_block("alpha", alpha_bar.len(), ctx.model.layout().p)?;
    ctx.check_block("beta", beta.len(), ctx.model.layout().q)?;
    let (quad, _) = continuous_sums(ctx, alpha_bar, beta, th3)?;
    Ok(-quad / (2.0 * ctx.path.h()))
}

/// Jump likelihood l2̃(γ): log Ψ over large increments of `th2` minus the
/// compensator h Σ ∫ Ψ dy over all increments.
pub fn qll_jump(ctx: &QllContext<'_>, gamma: &[f64], th2: &Threshold) -> Result<f64> {
    ctx.check_block("gamma", gamma.len(), ctx.model.layout().r)?;
    let cls = ctx.classification(th2);
    let path = ctx.path;
    let mut dx = vec![0.0; path.dim()];
    let mut jumps = CompensatedSum::new();
    for i in cls.large_indices() {
        path.increment_into(i, &mut dx);
        jumps.add(ctx.model.log_jump_density(&dx, path.state(i - 1), gamma));
    }
    let compensator: CompensatedSum = (0..path.n()).map(|row| ctx.model.jump_mass(path.state(row), gamma)).collect();
    Ok(jumps.value() - path.h() * compensator.value())
}

/// Continuous part l̄(α, β) of the joint likelihood.
pub fn qll_joint_continuous(ctx: &QllContext<'_>, alpha: &[f64], beta: &[f64], th1_bar: &Threshold) -> Result<f64> {
    ctx.check_block("alpha", alpha.len(), ctx.model.layout().p)?;
    ctx.check_block("beta", beta.len(), ctx.model.layout().q)?;
    let (quad, logdet) = continuous_sums(ctx, alpha, beta, th1_bar)?;
    Ok(-0.5 * (quad / ctx.path.h() + logdet))
}

/// Joint likelihood split into (continuous part, jump part).
pub fn qll_joint_parts(
    ctx: &QllContext<'_>,
    theta: &ParamVector,
    th1_bar: &Threshold,
    th2_bar: &Threshold,
) -> Result<(f64, f64)> {
    ctx.model.check_params(theta)?;
    let cont = qll_joint_continuous(ctx, theta.alpha(), theta.beta(), th1_bar)?;
    let jump = qll_jump(ctx, theta.gamma(), th2_bar)?;
    Ok((cont, jump))
}

/// Joint quasi-log likelihood l(θ) = l̄(α, β) + l̃(γ).
pub fn qll_joint(ctx: &QllContext<'_>, theta: &ParamVector, th1_bar: &Threshold, th2_bar: &Threshold) -> Result<f64> {
    let (c, j) = qll_joint_parts(ctx, theta, th1_bar, th2_bar)?;
    Ok(c + j)
}
