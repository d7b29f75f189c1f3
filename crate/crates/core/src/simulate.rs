//! Discretely observed sample paths.
//!
//! The Lévy-driven OU model is simulated exactly: between jump epochs the OU
//! transition is Gaussian with known mean and variance, so the only source of
//! error is Monte Carlo noise. Generic models fall back to Euler–Maruyama on a
//! refined grid.

use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LevyOuParams, ModelSpec, ParamVector};
use crate::rng::{stream_rng, SimRng, BURN_IN_STREAM, PATH_STREAM};

/// Default burn-in length (time units) for generic models.
pub const DEFAULT_GENERIC_BURN_IN: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Fixed(Vec<f64>),
    /// Terminal value of a burn-in run started at the origin.
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub n: usize,
    pub h: f64,
    pub seed: u64,
    /// Burn-in length for stationary starts; `None` uses 50/β for the OU
    /// model and [`DEFAULT_GENERIC_BURN_IN`] otherwise.
    pub burn_in_time: Option<f64>,
    /// Euler substeps per observation interval (generic scheme only).
    pub substeps: usize,
    pub initial: InitialState,
}

impl PathConfig {
    pub fn new(n: usize, h: f64, seed: u64) -> Self {
        Self {
            n,
            h,
            seed,
            burn_in_time: None,
            substeps: 1,
            initial: InitialState::Stationary,
        }
    }

    pub fn with_initial(mut self, x0: Vec<f64>) -> Self {
        self.initial = InitialState::Fixed(x0);
        self
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn with_burn_in(mut self, time: f64) -> Self {
        self.burn_in_time = Some(time);
        self
    }

    /// Horizon T = n h.
    pub fn horizon(&self) -> f64 {
        self.n as f64 * self.h
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("path needs n >= 1 increments".into()));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {}", self.h)));
        }
        if let Some(b) = self.burn_in_time {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::InvalidParameter(format!("burn-in time must be nonnegative, got {b}")));
            }
        }
        if self.substeps == 0 {
            return Err(Error::InvalidParameter("substeps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Observations X_{t_0}, …, X_{t_n} on the grid t_i = i h.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    h: f64,
    dim: usize,
    values: Vec<f64>,
    jump_marks: Option<Vec<u32>>,
}

impl Path {
    /// `values` is row-major, (n + 1) × `dim`.
    pub fn new(h: f64, dim: usize, values: Vec<f64>, jump_marks: Option<Vec<u32>>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
        }
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter("path values must be a whole number of states".into()));
        }
        let rows = values.len() / dim;
        if rows < 2 {
            return Err(Error::InvalidParameter("path needs at least one increment".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { step: i / dim });
        }
        if let Some(marks) = &jump_marks {
            if marks.len() != rows - 1 {
                return Err(Error::DimensionMismatch {
                    what: "jump marks",
                    expected: rows - 1,
                    got: marks.len(),
                });
            }
        }
        Ok(Self { h, dim, values, jump_marks })
    }

    pub fn from_values_1d(h: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(h, 1, values, None)
    }

    /// Number of increments.
    pub fn n(&self) -> usize {
        self.values.len() / self.dim - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.n() as f64 * self.h
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n()).map(|i| self.time(i)).collect()
    }

    /// Row-major observation matrix.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// X_{t_i}.
    #[inline]
    pub fn state(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// ΔX_i = X_{t_i} − X_{t_{i−1}} for i in 1..=n, written into `out`.
    #[inline]
    pub fn increment_into(&self, i: usize, out: &mut [f64]) {
        let d = self.dim;
        for k in 0..d {
            out[k] = self.values[i * d + k] - self.values[(i - 1) * d + k];
        }
    }

    /// ΔX_1, …, ΔX_n for a one-dimensional path.
    pub fn increments_1d(&self) -> Vec<f64> {
        debug_assert_eq!(self.dim, 1);
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn jump_marks(&self) -> Option<&[u32]> {
        self.jump_marks.as_deref()
    }
}

/// Exact OU transition over `dt`: returns (e^{−β dt}, conditional sd).
#[inline]
fn ou_transition(alpha: f64, beta: f64, dt: f64) -> (f64, f64) {
    let decay = (-beta * dt).exp();
    let var = if beta > 0.0 {
        alpha * alpha * -(-2.0 * beta * dt).exp_m1() / (2.0 * beta)
    } else {
        alpha * alpha * dt
    };
    (decay, var.sqrt())
}

fn check_levy_ou(p: &LevyOuParams) -> Result<()> {
    let all = p.to_array();
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("Levy-OU parameters must be finite".into()));
    }
    if p.alpha < 0.0 || p.beta < 0.0 || p.lambda < 0.0 || p.sigma2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Levy-OU simulation needs alpha, beta, lambda, sigma2 >= 0; got {:?}",
            all
        )));
    }
    if p.lambda > 0.0 && p.sigma2 <= 0.0 {
        return Err(Error::InvalidParameter("jump variance sigma2 must be positive when lambda > 0".into()));
    }
    Ok(())
}

struct JumpClock {
    exp: Option<Exp<f64>>,
    next: f64,
}

impl JumpClock {
    fn new(rate: f64, rng: &mut SimRng) -> Self {
        let exp = (rate > 0.0).then(|| Exp::new(rate).expect("positive rate"));
        let next = exp.as_ref().map_or(f64::INFINITY, |e| e.sample(rng));
        Self { exp, next }
    }

    fn advance(&mut self, rng: &mut SimRng) {
        if let Some(e) = &self.exp {
            self.next += e.sample(rng);
        }
    }
}

/// Runs the exact OU-with-jumps dynamics from `x` over `[0, duration]`
/// without recording a grid.
fn levy_ou_evolve(p: &LevyOuParams, mut x: f64, duration: f64, rng: &mut SimRng) -> f64 {
    let mut clock = JumpClock::new(p.lambda, rng);
    let sd_jump = p.sigma2.sqrt();
    let mut t = 0.0;
    while clock.next <= duration {
        let (decay, sd) = ou_transition(p.alpha, p.beta, clock.next - t);
        let z: f64 = StandardNormal.sample(rng);
        let mark: f64 = StandardNormal.sample(rng);
        x = decay * x + sd * z + p.mu + sd_jump * mark;
        t = clock.next;
        clock.advance(rng);
    }
    let (decay, sd) = ou_transition(p.alpha, p.beta, duration - t);
    let z: f64 = StandardNormal.sample(rng);
    decay * x + sd * z
}

/// Draws an approximately stationary initial state for the Lévy-OU model.
pub fn stationary_start(params: &ParamVector, cfg: &PathConfig) -> Result<f64> {
    let p = LevyOuParams::from_vector(params)?;
    check_levy_ou(&p)?;
    if p.beta <= 0.0 {
        return Err(Error::InvalidParameter("stationary start needs beta > 0".into()));
    }
    let burn_in = cfg.burn_in_time.unwrap_or(50.0 / p.beta);
    let mut rng = stream_rng(cfg.seed, BURN_IN_STREAM);
    Ok(levy_ou_evolve(&p, 0.0, burn_in, &mut rng))
}

/// Exact event-driven simulation of the Lévy-driven OU model.
///
/// Boundary values α = 0, β = 0 and λ = 0 are accepted (deterministic or
/// jump-free dynamics); a stationary start additionally needs β > 0.
pub fn simulate_levy_ou(params: &ParamVector, cfg: &PathConfig) -> Result<Path> {
    let p = LevyOuParams::from_vector(params)?;
    check_levy_ou(&p)?;
    cfg.validate()?;
    let x0 = match &cfg.initial {
        InitialState::Fixed(v) if v.len() == 1 => v[0],
        InitialState::Fixed(v) => {
            return Err(Error::DimensionMismatch {
                what: "initial state",
                expected: 1,
                got: v.len(),
            })
        }
        InitialState::Stationary => stationary_start(params, cfg)?,
    };

    let n = cfg.n;
    let h = cfg.h;
    let mut rng = stream_rng(cfg.seed, PATH_STREAM);
    let mut clock = JumpClock::new(p.lambda, &mut rng);
    let sd_jump = p.sigma2.sqrt();
    let (decay_h, sd_h) = ou_transition(p.alpha, p.beta, h);

    let mut values = Vec::with_capacity(n + 1);
    let mut marks = Vec::with_capacity(n);
    let mut x = x0;
    values.push(x);
    for i in 1..=n {
        let t_end = i as f64 * h;
        let z: f64 = StandardNormal.sample(&mut rng);
        if clock.next > t_end {
            x = decay_h * x + sd_h * z;
            marks.push(0);
        } else {
            let mut t = (i - 1) as f64 * h;
            let mut count = 0u32;
            while clock.next <= t_end {
                let (decay, sd) = ou_transition(p.alpha, p.beta, clock.next - t);
                let w: f64 = StandardNormal.sample(&mut rng);
                let mark: f64 = StandardNormal.sample(&mut rng);
                x = decay * x + sd * w + p.mu + sd_jump * mark;
                t = clock.next;
                count += 1;
                clock.advance(&mut rng);
            }
            let (decay, sd) = ou_transition(p.alpha, p.beta, t_end - t);
            x = decay * x + sd * z;
            marks.push(count);
        }
        if !x.is_finite() {
            return Err(Error::NonFiniteState { step: i });
        }
        values.push(x);
    }
    Path::new(h, 1, values, Some(marks))
}

/// Euler–Maruyama with compound-Poisson jumps for any [`ModelSpec`].
///
/// Jumps whose epoch falls inside a substep are applied at the end of that
/// substep.
pub fn simulate_generic(model: &ModelSpec, params: &ParamVector, cfg: &PathConfig) -> Result<Path> {
    model.check_params(params)?;
    cfg.validate()?;
    let d = model.dim();
    let rate = model.intensity(params.gamma());
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("jump intensity must be finite and >= 0, got {rate}")));
    }
    let x0 = match &cfg.initial {
        InitialState::Fixed(v) if v.len() == d => v.clone(),
        InitialState::Fixed(v) => {
            return Err(Error::DimensionMismatch {
                what: "initial state",
                expected: d,
                got: v.len(),
            })
        }
        InitialState::Stationary => {
            let burn = cfg.burn_in_time.unwrap_or(DEFAULT_GENERIC_BURN_IN);
            let steps = (burn / cfg.h).ceil() as usize;
            let mut rng = stream_rng(cfg.seed, BURN_IN_STREAM);
            let mut euler = EulerStepper::new(model, params, cfg.h / cfg.substeps as f64, rate, &mut rng);
            let mut x = vec![0.0; d];
            for i in 1..=steps {
                euler.interval(&mut x, i, cfg.substeps, cfg.h, &mut rng)?;
            }
            x
        }
    };

    let mut rng = stream_rng(cfg.seed, PATH_STREAM);
    let mut euler = EulerStepper::new(model, params, cfg.h / cfg.substeps as f64, rate, &mut rng);
    let mut values = Vec::with_capacity((cfg.n + 1) * d);
    let mut marks = Vec::with_capacity(cfg.n);
    let mut x = x0;
    values.extend_from_slice(&x);
    for i in 1..=cfg.n {
        marks.push(euler.interval(&mut x, i, cfg.substeps, cfg.h, &mut rng)?);
        values.extend_from_slice(&x);
    }
    Path::new(cfg.h, d, values, Some(marks))
}

struct EulerStepper<'a> {
    model: &'a ModelSpec,
    params: &'a ParamVector,
    dt: f64,
    clock: JumpClock,
    drift: Vec<f64>,
    noise: Vec<f64>,
    mark: Vec<f64>,
    jump: Vec<f64>,
}

impl<'a> EulerStepper<'a> {
    fn new(model: &'a ModelSpec, params: &'a ParamVector, dt: f64, rate: f64, rng: &mut SimRng) -> Self {
        let d = model.dim();
        Self {
            model,
            params,
            dt,
            clock: JumpClock::new(rate, rng),
            drift: vec![0.0; d],
            noise: vec![0.0; model.noise_dim()],
            mark: vec![0.0; d],
            jump: vec![0.0; d],
        }
    }

    /// Advances `x` across observation interval `i`; returns the jump count.
    fn interval(&mut self, x: &mut [f64], i: usize, substeps: usize, h: f64, rng: &mut SimRng) -> Result<u32> {
        let t_start = (i - 1) as f64 * h;
        let sqrt_dt = self.dt.sqrt();
        let mut count = 0;
        for k in 1..=substeps {
            let t_end = if k == substeps { i as f64 * h } else { t_start + k as f64 * self.dt };
            self.model.drift(x, self.params.beta(), &mut self.drift);
            let a = self.model.diffusion(x, self.params.alpha());
            for z in self.noise.iter_mut() {
                *z = StandardNormal.sample(rng);
            }
            for r in 0..x.len() {
                let mut diff = 0.0;
                for c in 0..self.noise.len() {
                    diff += a[(r, c)] * self.noise[c];
                }
                x[r] += self.drift[r] * self.dt + diff * sqrt_dt;
            }
            while self.clock.next <= t_end {
                self.model.sample_mark(self.params.gamma(), rng, &mut self.mark);
                self.model.jump_map(x, &self.mark, self.params.gamma(), &mut self.jump);
                for (xr, jr) in x.iter_mut().zip(&self.jump) {
                    *xr += jr;
                }
                count += 1;
                self.clock.advance(rng);
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { step: i });
            }
        }
        Ok(count)
    }
}
