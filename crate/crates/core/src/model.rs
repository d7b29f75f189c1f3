//! Parameter vectors, parameter boxes, and jump-diffusion model specifications.
//!
//! A model is the SDE
//!
//! ```text
//! dX_t = b(X_{t-}, β) dt + a(X_{t-}, α) dW_t + ∫ c(X_{t-}, z, γ) p(dt, dz)
//! ```
//!
//! whose jumps arrive at rate λ(γ) with mark law F_γ. The likelihood code
//! needs the jump-size density Ψ_γ(y, x) in log form together with its mass
//! ∫ Ψ_γ(y, x) dy; both are supplied directly by the model.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Sizes of the diffusion (α), drift (β) and jump (γ) blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub p: usize,
    pub q: usize,
    pub r: usize,
}

impl ParamLayout {
    pub fn new(p: usize, q: usize, r: usize) -> Result<Self> {
        if p + q + r == 0 {
            return Err(Error::InvalidParameter(
                "parameter layout must have at least one component".into(),
            ));
        }
        Ok(Self { p, q, r })
    }

    pub fn len(&self) -> usize {
        self.p + self.q + self.r
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn alpha_range(&self) -> Range<usize> {
        0..self.p
    }

    pub fn beta_range(&self) -> Range<usize> {
        self.p..self.p + self.q
    }

    pub fn gamma_range(&self) -> Range<usize> {
        self.p + self.q..self.len()
    }
}

/// θ = (α, β, γ) stored flat, in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    layout: ParamLayout,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(alpha: &[f64], beta: &[f64], gamma: &[f64]) -> Result<Self> {
        let layout = ParamLayout::new(alpha.len(), beta.len(), gamma.len())?;
        let values = alpha.iter().chain(beta).chain(gamma).copied().collect();
        Ok(Self { layout, values })
    }

    pub fn from_flat(layout: ParamLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: layout.len(),
                got: values.len(),
            });
        }
        Ok(Self { layout, values })
    }

    pub fn layout(&self) -> ParamLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.values[self.layout.alpha_range()]
    }

    pub fn beta(&self) -> &[f64] {
        &self.values[self.layout.beta_range()]
    }

    pub fn gamma(&self) -> &[f64] {
        &self.values[self.layout.gamma_range()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        self.values[index] = value;
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Compact box Θ = Π [lower_i, upper_i].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    layout: ParamLayout,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamBounds {
    pub fn new(layout: ParamLayout, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        for (what, v) in [("lower bounds", &lower), ("upper bounds", &upper)] {
            if v.len() != layout.len() {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: layout.len(),
                    got: v.len(),
                });
            }
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "bounds for component {i} must be finite with lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { layout, lower, upper })
    }

    pub fn layout(&self) -> ParamLayout {
        self.layout
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn interval(&self, index: usize) -> (f64, f64) {
        (self.lower[index], self.upper[index])
    }

    pub fn contains(&self, theta: &ParamVector) -> bool {
        theta.layout() == self.layout
            && theta
                .as_slice()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Clamps `theta` into the box; returns which components moved.
    pub fn project(&self, theta: &mut ParamVector) -> Vec<bool> {
        theta
            .as_mut_slice()
            .iter_mut()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (&lo, &hi))| {
                let clamped = v.clamp(lo, hi);
                let moved = clamped != *v;
                *v = clamped;
                moved
            })
            .collect()
    }

    /// Sub-box for a contiguous block of components.
    pub fn block(&self, range: Range<usize>) -> (Vec<f64>, Vec<f64>) {
        (self.lower[range.clone()].to_vec(), self.upper[range].to_vec())
    }
}

pub type DriftFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
pub type DiffusionFn = Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>;
pub type JumpMapFn = Arc<dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync>;
pub type LogJumpDensityFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync>;
pub type IntensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type JumpMassFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type MarkSamplerFn = Arc<dyn Fn(&[f64], &mut SimRng, &mut [f64]) + Send + Sync>;

/// Coefficients of a jump-diffusion model.
///
/// Function arguments follow the order (state, parameter block) for `drift`
/// and `diffusion`, (state, mark, γ) for `jump_map`, and (jump, state, γ)
/// for `log_jump_density`. Marks live in the state space.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    dim: usize,
    noise_dim: usize,
    layout: ParamLayout,
    parameter_names: Vec<String>,
    drift: DriftFn,
    diffusion: DiffusionFn,
    jump_map: JumpMapFn,
    log_jump_density: LogJumpDensityFn,
    intensity: IntensityFn,
    jump_mass: JumpMassFn,
    mark_sampler: MarkSamplerFn,
    state_independent_diffusion: bool,
    has_closed_form: bool,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("noise_dim", &self.noise_dim)
            .field("layout", &self.layout)
            .field("has_closed_form", &self.has_closed_form)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    pub fn builder(name: impl Into<String>, dim: usize, noise_dim: usize, layout: ParamLayout) -> ModelBuilder {
        ModelBuilder {
            name: name.into(),
            dim,
            noise_dim,
            layout,
            parameter_names: None,
            drift: None,
            diffusion: None,
            jump_map: None,
            log_jump_density: None,
            intensity: None,
            jump_mass: None,
            mark_sampler: None,
            state_independent_diffusion: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn layout(&self) -> ParamLayout {
        self.layout
    }

    pub fn parameter_names(&self) -> &[String] {
        &self.parameter_names
    }

    pub fn has_closed_form(&self) -> bool {
        self.has_closed_form
    }

    /// True when a(x, α) does not depend on x, so S can be factored once.
    pub fn state_independent_diffusion(&self) -> bool {
        self.state_independent_diffusion
    }

    #[inline]
    pub fn drift(&self, x: &[f64], beta: &[f64], out: &mut [f64]) {
        (self.drift)(x, beta, out)
    }

    #[inline]
    pub fn diffusion(&self, x: &[f64], alpha: &[f64]) -> DMatrix<f64> {
        (self.diffusion)(x, alpha)
    }

    #[inline]
    pub fn jump_map(&self, x: &[f64], z: &[f64], gamma: &[f64], out: &mut [f64]) {
        (self.jump_map)(x, z, gamma, out)
    }

    #[inline]
    pub fn log_jump_density(&self, y: &[f64], x: &[f64], gamma: &[f64]) -> f64 {
        (self.log_jump_density)(y, x, gamma)
    }

    #[inline]
    pub fn intensity(&self, gamma: &[f64]) -> f64 {
        (self.intensity)(gamma)
    }

    #[inline]
    pub fn jump_mass(&self, x: &[f64], gamma: &[f64]) -> f64 {
        (self.jump_mass)(x, gamma)
    }

    #[inline]
    pub fn sample_mark(&self, gamma: &[f64], rng: &mut SimRng, out: &mut [f64]) {
        (self.mark_sampler)(gamma, rng, out)
    }

    pub fn check_params(&self, theta: &ParamVector) -> Result<()> {
        if theta.layout() != self.layout {
            return Err(Error::InvalidParameter(format!(
                "parameter layout {:?} does not match model {} layout {:?}",
                theta.layout(),
                self.name,
                self.layout
            )));
        }
        Ok(())
    }
}

pub struct ModelBuilder {
    name: String,
    dim: usize,
    noise_dim: usize,
    layout: ParamLayout,
    parameter_names: Option<Vec<String>>,
    drift: Option<DriftFn>,
    diffusion: Option<DiffusionFn>,
    jump_map: Option<JumpMapFn>,
    log_jump_density: Option<LogJumpDensityFn>,
    intensity: Option<IntensityFn>,
    jump_mass: Option<JumpMassFn>,
    mark_sampler: Option<MarkSamplerFn>,
    state_independent_diffusion: bool,
}

impl ModelBuilder {
    pub fn parameter_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.parameter_names = Some(names.into_iter().map(Into::into).collect());
        self
    }

    pub fn drift(mut self, f: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.drift = Some(Arc::new(f));
        self
    }

    pub fn diffusion(mut self, f: impl Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.diffusion = Some(Arc::new(f));
        self
    }

    pub fn jump_map(mut self, f: impl Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.jump_map = Some(Arc::new(f));
        self
    }

    pub fn log_jump_density(mut self, f: impl Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.log_jump_density = Some(Arc::new(f));
        self
    }

    pub fn intensity(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.intensity = Some(Arc::new(f));
        self
    }

    pub fn jump_mass(mut self, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.jump_mass = Some(Arc::new(f));
        self
    }

    pub fn mark_sampler(mut self, f: impl Fn(&[f64], &mut SimRng, &mut [f64]) + Send + Sync + 'static) -> Self {
        self.mark_sampler = Some(Arc::new(f));
        self
    }

    pub fn state_independent_diffusion(mut self, yes: bool) -> Self {
        self.state_independent_diffusion = yes;
        self
    }

    pub fn build(self) -> Result<ModelSpec> {
        if self.dim == 0 || self.noise_dim == 0 {
            return Err(Error::InvalidParameter("model dimensions must be positive".into()));
        }
        let missing = |what: &str| Error::InvalidParameter(format!("model {} is missing its {what} function", self.name));
        let parameter_names = match self.parameter_names {
            Some(names) if names.len() != self.layout.len() => {
                return Err(Error::DimensionMismatch {
                    what: "parameter names",
                    expected: self.layout.len(),
                    got: names.len(),
                })
            }
            Some(names) => names,
            None => (0..self.layout.len()).map(|i| format!("theta{i}")).collect(),
        };
        Ok(ModelSpec {
            drift: self.drift.ok_or_else(|| missing("drift"))?,
            diffusion: self.diffusion.ok_or_else(|| missing("diffusion"))?,
            jump_map: self.jump_map.ok_or_else(|| missing("jump map"))?,
            log_jump_density: self.log_jump_density.ok_or_else(|| missing("log jump density"))?,
            intensity: self.intensity.ok_or_else(|| missing("intensity"))?,
            jump_mass: self.jump_mass.ok_or_else(|| missing("jump mass"))?,
            mark_sampler: self.mark_sampler.ok_or_else(|| missing("mark sampler"))?,
            name: self.name,
            dim: self.dim,
            noise_dim: self.noise_dim,
            layout: self.layout,
            parameter_names,
            state_independent_diffusion: self.state_independent_diffusion,
            has_closed_form: false,
        })
    }
}

/// Parameters of the Lévy-driven OU model
/// `dX = -β X dt + α dW + ∫ z p(dt, dz)` with N(μ, σ²) jumps at rate λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyOuParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub sigma2: f64,
}

impl LevyOuParams {
    pub const NAMES: [&'static str; 5] = ["alpha", "beta", "lambda", "mu", "sigma2"];

    pub fn new(alpha: f64, beta: f64, lambda: f64, mu: f64, sigma2: f64) -> Self {
        Self { alpha, beta, lambda, mu, sigma2 }
    }

    pub fn layout() -> ParamLayout {
        ParamLayout { p: 1, q: 1, r: 3 }
    }

    pub fn to_vector(&self) -> ParamVector {
        ParamVector {
            layout: Self::layout(),
            values: self.to_array().to_vec(),
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.alpha, self.beta, self.lambda, self.mu, self.sigma2]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match *v {
            [alpha, beta, lambda, mu, sigma2] => Ok(Self { alpha, beta, lambda, mu, sigma2 }),
            _ => Err(Error::DimensionMismatch {
                what: "Levy-OU parameters",
                expected: 5,
                got: v.len(),
            }),
        }
    }

    pub fn from_vector(theta: &ParamVector) -> Result<Self> {
        if theta.layout() != Self::layout() {
            return Err(Error::InvalidParameter(format!(
                "expected Levy-OU layout (1, 1, 3), got {:?}",
                theta.layout()
            )));
        }
        Self::from_slice(theta.as_slice())
    }

    /// A wide default box for (α, β, λ, μ, σ²).
    pub fn default_bounds() -> ParamBounds {
        ParamBounds {
            layout: Self::layout(),
            lower: vec![1e-4, 1e-4, 1e-4, -1e4, 1e-8],
            upper: vec![1e3, 1e3, 1e6, 1e4, 1e6],
        }
    }

    /// Second moment of the invariant law, (α² + λ(σ² + μ²)) / (2β) + (λμ/β)².
    pub fn stationary_second_moment(&self) -> f64 {
        let mean = self.lambda * self.mu / self.beta;
        (self.alpha * self.alpha + self.lambda * (self.sigma2 + self.mu * self.mu)) / (2.0 * self.beta)
            + mean * mean
    }
}

impl From<LevyOuParams> for ParamVector {
    fn from(p: LevyOuParams) -> Self {
        p.to_vector()
    }
}

/// Gaussian log density of a N(μ, σ²) jump scaled by λ.
#[inline]
pub fn levy_ou_log_psi(y: f64, lambda: f64, mu: f64, sigma2: f64) -> f64 {
    if !(lambda > 0.0 && sigma2 > 0.0) {
        return f64::NEG_INFINITY;
    }
    let r = y - mu;
    lambda.ln() - 0.5 * (2.0 * std::f64::consts::PI * sigma2).ln() - r * r / (2.0 * sigma2)
}

/// The one-dimensional Lévy-driven Ornstein–Uhlenbeck model with Gaussian jumps.
pub fn levy_ou_model() -> ModelSpec {
    ModelSpec {
        name: "levy_ou".into(),
        dim: 1,
        noise_dim: 1,
        layout: LevyOuParams::layout(),
        parameter_names: LevyOuParams::NAMES.iter().map(|s| s.to_string()).collect(),
        drift: Arc::new(|x, beta, out| out[0] = -beta[0] * x[0]),
        diffusion: Arc::new(|_x, alpha| DMatrix::from_element(1, 1, alpha[0])),
        jump_map: Arc::new(|_x, z, _gamma, out| out[0] = z[0]),
        log_jump_density: Arc::new(|y, _x, g| levy_ou_log_psi(y[0], g[0], g[1], g[2])),
        intensity: Arc::new(|g| g[0]),
        jump_mass: Arc::new(|_x, g| g[0]),
        mark_sampler: Arc::new(|g, rng, out| {
            let z: f64 = StandardNormal.sample(rng);
            out[0] = g[1] + g[2].sqrt() * z;
        }),
        state_independent_diffusion: true,
        has_closed_form: true,
    }
}

/// Looks up a built-in model by its configuration name.
pub fn model_by_name(name: &str) -> Result<ModelSpec> {
    match name {
        "levy_ou" => Ok(levy_ou_model()),
        other => Err(Error::InvalidParameter(format!("unknown model '{other}' (built-in: levy_ou)"))),
    }
}

/// S(x, α) = a(x, α) a(x, α)ᵀ, checked to be positive definite.
pub fn eval_s(model: &ModelSpec, x: &[f64], alpha: &[f64]) -> Result<DMatrix<f64>> {
    let a = model.diffusion(x, alpha);
    if a.nrows() != model.dim() {
        return Err(Error::DimensionMismatch {
            what: "diffusion matrix rows",
            expected: model.dim(),
            got: a.nrows(),
        });
    }
    let s = &a * a.transpose();
    // a aᵀ is symmetric up to rounding; symmetrize so the factorization
    // sees an exactly symmetric matrix.
    let s = (&s + s.transpose()) * 0.5;
    if s.clone().cholesky().is_none() || s.determinant() <= 0.0 {
        return Err(Error::SingularDiffusion { step: None });
    }
    Ok(s)
}

/// Checks S(x, α) is positive definite at every (state, α) pair given.
///
/// Advisory: the condition is an assumption about the whole state space and
/// parameter box, so this can only ever sample it.
pub fn check_diffusion_nondegenerate(model: &ModelSpec, states: &[Vec<f64>], alphas: &[Vec<f64>]) -> Result<()> {
    for x in states {
        for alpha in alphas {
            eval_s(model, x, alpha)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_gamma() -> [f64; 3] {
        [6.0, 0.0, 20.25]
    }

    #[test]
    fn levy_ou_log_density_at_zero() {
        let m = levy_ou_model();
        let v = m.log_jump_density(&[0.0], &[123.0], &[1.0, 0.0, 1.0]);
        assert!((v + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
        assert!((v + 0.9189).abs() < 1e-4);
    }

    #[test]
    fn levy_ou_intensity_and_mass() {
        let m = levy_ou_model();
        assert_eq!(m.intensity(&reference_gamma()), 6.0);
        for x in [-10.0, 0.0, 3.5] {
            assert_eq!(m.jump_mass(&[x], &reference_gamma()), 6.0);
        }
        assert!(m.has_closed_form());
        assert_eq!(m.dim(), 1);
    }

    #[test]
    fn eval_s_scalar() {
        let m = levy_ou_model();
        assert_eq!(eval_s(&m, &[0.3], &[2.0]).unwrap()[(0, 0)], 4.0);
        assert_eq!(eval_s(&m, &[-7.0], &[1.0]).unwrap()[(0, 0)], 1.0);
        for x in [-5.0, 0.0, 1.0, 100.0] {
            assert_eq!(eval_s(&m, &[x], &[1.7]).unwrap()[(0, 0)], 1.7 * 1.7);
        }
    }

    #[test]
    fn eval_s_singular() {
        let m = levy_ou_model();
        assert!(matches!(eval_s(&m, &[0.0], &[0.0]), Err(Error::SingularDiffusion { .. })));
    }

    fn diag_model() -> ModelSpec {
        ModelSpec::builder("diag", 2, 2, ParamLayout::new(2, 0, 1).unwrap())
            .drift(|_, _, out| out.fill(0.0))
            .diffusion(|_, a| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(a)))
            .jump_map(|_, z, _, out| out.copy_from_slice(z))
            .log_jump_density(|_, _, _| 0.0)
            .intensity(|g| g[0])
            .jump_mass(|_, g| g[0])
            .mark_sampler(|_, _, out| out.fill(0.0))
            .build()
            .unwrap()
    }

    #[test]
    fn eval_s_diagonal() {
        let s = eval_s(&diag_model(), &[0.0, 0.0], &[1.0, 3.0]).unwrap();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 9.0]));
        assert!((&s - s.transpose()).abs().max() <= 1e-14);
    }

    #[test]
    fn gaussian_jump_density_integrates_to_mass() {
        let m = levy_ou_model();
        let gamma = reference_gamma();
        // Trapezoid rule over ±15σ.
        let sd = gamma[2].sqrt();
        let (lo, hi, steps) = (gamma[1] - 15.0 * sd, gamma[1] + 15.0 * sd, 200_000);
        let dy = (hi - lo) / steps as f64;
        let mut acc = 0.0;
        for k in 0..=steps {
            let y = lo + k as f64 * dy;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            acc += w * m.log_jump_density(&[y], &[0.0], &gamma).exp();
        }
        let integral = acc * dy;
        let mass = m.jump_mass(&[0.0], &gamma);
        assert!(((integral - mass) / mass).abs() < 1e-6);
    }

    #[test]
    fn bounds_validation_and_projection() {
        let layout = LevyOuParams::layout();
        assert!(ParamBounds::new(layout, vec![0.0; 5], vec![1.0; 4]).is_err());
        assert!(ParamBounds::new(layout, vec![1.0; 5], vec![1.0; 5]).is_err());
        assert!(ParamBounds::new(layout, vec![0.0; 5], vec![f64::INFINITY; 5]).is_err());
        let b = ParamBounds::new(layout, vec![0.0; 5], vec![1.0; 5]).unwrap();
        let mut t = ParamVector::from_flat(layout, vec![0.5, -1.0, 2.0, 0.5, 1.0]).unwrap();
        assert!(!b.contains(&t));
        assert_eq!(b.project(&mut t), vec![false, true, true, false, false]);
        assert!(b.contains(&t));
    }

    #[test]
    fn layout_requires_a_component() {
        assert!(ParamLayout::new(0, 0, 0).is_err());
        assert!(ParamVector::new(&[], &[], &[]).is_err());
        let t = ParamVector::new(&[1.0], &[2.0, 3.0], &[]).unwrap();
        assert_eq!(t.alpha(), &[1.0]);
        assert_eq!(t.beta(), &[2.0, 3.0]);
        assert!(t.gamma().is_empty());
    }

    #[test]
    fn stationary_moment_of_reference_parameters() {
        let p = LevyOuParams::new(2.0, 2.5, 6.0, 0.0, 20.25);
        assert!((p.stationary_second_moment() - 25.1).abs() < 1e-12);
    }
}
