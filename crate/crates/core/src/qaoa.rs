//! QAOA on a diagonal cost Hamiltonian: state preparation, exact
//! expectations, adjoint gradients, Adam training and `p = 1` landscapes.
//!
//! The ansatz is `prod_j exp(-i beta_j sum X) exp(-i gamma_j H_C)` applied
//! to `|+>^n`. The cost layer is an elementwise phase from a precomputed
//! energy table (offset included, so it contributes only a global phase);
//! the mixer is `RX(2 beta_j)` on every qubit.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EnergyModel, IsingModel};
use crate::optim::Adam;
use crate::statevec::StateVector;

/// Central-difference step used by [`GradientMethod::FiniteDifference`].
pub const FD_STEP: f64 = 1e-5;

/// Above this many bytes of per-layer checkpoints the adjoint pass
/// uncomputes the forward state instead of storing it.
const CHECKPOINT_BUDGET: usize = 512 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl QaoaParams {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        let params = QaoaParams { beta, gamma };
        params.validate()?;
        Ok(params)
    }

    pub fn constant(p: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; p], vec![value; p])
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.is_empty() {
            return Err(Error::InvalidParams("layer count p must be at least 1".into()));
        }
        if self.beta.len() != self.gamma.len() {
            return Err(Error::InvalidParams(format!(
                "beta has {} entries but gamma has {}",
                self.beta.len(),
                self.gamma.len()
            )));
        }
        if self.beta.iter().chain(&self.gamma).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite angle".into()));
        }
        Ok(())
    }

    /// `[beta_1..beta_p, gamma_1..gamma_p]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.beta.iter().chain(&self.gamma).copied().collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::InvalidParams("odd parameter vector length".into()));
        }
        let p = flat.len() / 2;
        Self::new(flat[..p].to_vec(), flat[p..].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    Adjoint,
    FiniteDifference,
}

/// Where Adam starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Every angle set to the same value.
    Constant(f64),
    /// Angles drawn uniformly from `[lo, hi)` with the config seed.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub step_size: f64,
    pub max_iters: usize,
    pub init: Init,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub gradient_method: GradientMethod,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            step_size: 1e-3,
            max_iters: 2000,
            init: Init::Constant(0.01),
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            gradient_method: GradientMethod::Adjoint,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidConfig("step_size must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    fn initial_params(&self, p: usize) -> Result<QaoaParams> {
        match self.init {
            Init::Constant(v) => QaoaParams::constant(p, v),
            Init::Uniform { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::InvalidConfig("empty random init range".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let flat: Vec<f64> = (0..2 * p).map(|_| rng.gen_range(lo..hi)).collect();
                QaoaParams::from_flat(&flat)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Expectation at the parameters entering each iteration.
    pub expectations: Vec<f64>,
    /// Parameters entering each iteration (same length as `expectations`).
    pub trajectory: Vec<QaoaParams>,
    /// Best parameters seen, including the point after the last step.
    pub params: QaoaParams,
    pub expectation: f64,
}

/// A cost Hamiltonian reduced to its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaProblem {
    n: usize,
    energies: Vec<f64>,
}

impl QaoaProblem {
    pub fn new(model: &impl EnergyModel) -> Result<Self> {
        let n = model.num_vars();
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        Ok(QaoaProblem {
            n,
            energies: model.energy_table()?,
        })
    }

    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        let len = energies.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::EnergyTableSize {
                expected: len.next_power_of_two().max(2),
                got: len,
            });
        }
        Ok(QaoaProblem {
            n: len.trailing_zeros() as usize,
            energies,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn state(&self, params: &QaoaParams) -> Result<StateVector> {
        params.validate()?;
        let mut psi = StateVector::uniform(self.n)?;
        for (&b, &g) in params.beta.iter().zip(&params.gamma) {
            psi.apply_diagonal_phase_mut(&self.energies, g)?;
            psi.mix_all(b);
        }
        Ok(psi)
    }

    pub fn expectation(&self, params: &QaoaParams) -> Result<f64> {
        self.state(params)?.expectation_diagonal(&self.energies)
    }

    pub fn probabilities(&self, params: &QaoaParams) -> Result<Vec<f64>> {
        Ok(self.state(params)?.probabilities())
    }

    /// Expectation and its gradient, ordered `[d/d beta.., d/d gamma..]`.
    pub fn value_and_gradient(
        &self,
        params: &QaoaParams,
        method: GradientMethod,
    ) -> Result<(f64, Vec<f64>)> {
        match method {
            GradientMethod::Adjoint => self.adjoint(params),
            GradientMethod::FiniteDifference => {
                let value = self.expectation(params)?;
                Ok((value, self.finite_difference(params, FD_STEP)?))
            }
        }
    }

    pub fn gradient(&self, params: &QaoaParams) -> Result<Vec<f64>> {
        Ok(self.adjoint(params)?.1)
    }

    pub fn finite_difference(&self, params: &QaoaParams, step: f64) -> Result<Vec<f64>> {
        let flat = params.to_flat();
        let mut grad = Vec::with_capacity(flat.len());
        for k in 0..flat.len() {
            let mut plus = flat.clone();
            let mut minus = flat.clone();
            plus[k] += step;
            minus[k] -= step;
            let ep = self.expectation(&QaoaParams::from_flat(&plus)?)?;
            let em = self.expectation(&QaoaParams::from_flat(&minus)?)?;
            grad.push((ep - em) / (2.0 * step));
        }
        Ok(grad)
    }

    /// Reverse sweep: with `lambda = H_C psi` pulled back through each
    /// layer, `dE/dtheta = 2 Im <lambda|G|psi>` for a gate `exp(-i theta G)`.
    fn adjoint(&self, params: &QaoaParams) -> Result<(f64, Vec<f64>)> {
        let bytes = 3 * params.p() * self.energies.len() * std::mem::size_of::<Complex64>();
        self.adjoint_sweep(params, bytes <= CHECKPOINT_BUDGET)
    }

    fn adjoint_sweep(&self, params: &QaoaParams, store: bool) -> Result<(f64, Vec<f64>)> {
        params.validate()?;
        let p = params.p();

        let mut psi = StateVector::uniform(self.n)?;
        let mut checkpoints: Vec<StateVector> = Vec::with_capacity(if store { 2 * p } else { 0 });
        let mut phases: Vec<Vec<Complex64>> = Vec::with_capacity(if store { p } else { 0 });
        for (&b, &g) in params.beta.iter().zip(&params.gamma) {
            if store {
                let ph = StateVector::phase_table(&self.energies, g);
                psi.apply_phases(&ph, false);
                phases.push(ph);
                checkpoints.push(psi.clone());
            } else {
                psi.apply_diagonal_phase_mut(&self.energies, g)?;
            }
            psi.mix_all(b);
            if store {
                checkpoints.push(psi.clone());
            }
        }
        let value = psi.expectation_diagonal(&self.energies)?;

        let lam_amps: Vec<Complex64> = psi
            .amplitudes()
            .iter()
            .zip(&self.energies)
            .map(|(a, &e)| a * e)
            .collect();
        let mut lam = StateVector::from_amplitudes(lam_amps)?;
        let mut grad_beta = vec![0.0; p];
        let mut grad_gamma = vec![0.0; p];

        for j in (0..p).rev() {
            let after_mix = if store { &checkpoints[2 * j + 1] } else { &psi };
            grad_beta[j] = 2.0 * im_x_sum(lam.amplitudes(), after_mix.amplitudes(), self.n);
            lam.mix_all(-params.beta[j]);
            if !store {
                psi.mix_all(-params.beta[j]);
            }
            let after_cost = if store { &checkpoints[2 * j] } else { &psi };
            grad_gamma[j] = 2.0 * im_diag(lam.amplitudes(), after_cost.amplitudes(), &self.energies);
            if store {
                lam.apply_phases(&phases[j], true);
            } else {
                lam.apply_diagonal_phase_mut(&self.energies, -params.gamma[j])?;
                psi.apply_diagonal_phase_mut(&self.energies, -params.gamma[j])?;
            }
        }
        grad_beta.extend(grad_gamma);
        Ok((value, grad_beta))
    }

    /// Adam on the exact expectation for `max_iters` steps.
    pub fn train_adam(&self, p: usize, config: &TrainConfig) -> Result<TrainTrace> {
        config.validate()?;
        let mut params = config.initial_params(p)?;
        let mut flat = params.to_flat();
        let mut opt = Adam::new(
            flat.len(),
            config.step_size,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_eps,
        );
        let mut expectations = Vec::with_capacity(config.max_iters);
        let mut trajectory = Vec::with_capacity(config.max_iters);
        let mut best = (params.clone(), f64::INFINITY);
        for _ in 0..config.max_iters {
            let (value, grad) = self.value_and_gradient(&params, config.gradient_method)?;
            if value < best.1 {
                best = (params.clone(), value);
            }
            expectations.push(value);
            trajectory.push(params.clone());
            opt.step(&mut flat, &grad);
            params = QaoaParams::from_flat(&flat)?;
        }
        let last = self.expectation(&params)?;
        if last < best.1 {
            best = (params, last);
        }
        Ok(TrainTrace {
            expectations,
            trajectory,
            params: best.0,
            expectation: best.1,
        })
    }

    /// `p = 1` expectation over a `beta x gamma` grid.
    pub fn landscape_scan(&self, p: usize, beta: GridAxis, gamma: GridAxis) -> Result<Landscape> {
        if p != 1 {
            return Err(Error::InvalidParams(format!(
                "landscape scans need p = 1, got p = {p}"
            )));
        }
        let betas = beta.values()?;
        let gammas = gamma.values()?;
        let row = |b: &f64| -> Result<Vec<f64>> {
            gammas
                .iter()
                .map(|&g| self.expectation(&QaoaParams::new(vec![*b], vec![g])?))
                .collect()
        };
        #[cfg(feature = "parallel")]
        let rows: Vec<Vec<f64>> = {
            use rayon::prelude::*;
            betas.par_iter().map(row).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Vec<f64>> = betas.iter().map(row).collect::<Result<_>>()?;
        Ok(Landscape {
            betas,
            gammas,
            values: rows.into_iter().flatten().collect(),
        })
    }
}

/// `Im <lam| sum_q X_q |psi>`.
fn im_x_sum(lam: &[Complex64], psi: &[Complex64], n: usize) -> f64 {
    let mut acc = 0.0;
    for q in 0..n {
        let mask = 1usize << (n - 1 - q);
        for (lb, pb) in lam.chunks_exact(2 * mask).zip(psi.chunks_exact(2 * mask)) {
            let (l0, l1) = lb.split_at(mask);
            let (p0, p1) = pb.split_at(mask);
            for k in 0..mask {
                acc += im_conj_mul(l0[k], p1[k]) + im_conj_mul(l1[k], p0[k]);
            }
        }
    }
    acc
}

/// `Im <lam| diag(E) |psi>`.
fn im_diag(lam: &[Complex64], psi: &[Complex64], energies: &[f64]) -> f64 {
    lam.iter()
        .zip(psi)
        .zip(energies)
        .map(|((l, p), &e)| e * im_conj_mul(*l, *p))
        .sum()
}

#[inline]
fn im_conj_mul(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Equidistant points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        GridAxis { lo, hi, points }
    }

    /// `[-pi/4, pi/4]`.
    pub fn quarter_pi(points: usize) -> Self {
        let q = std::f64::consts::FRAC_PI_4;
        GridAxis::new(-q, q, points)
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::InvalidConfig("grid axis needs at least one point".into()));
        }
        if self.points == 1 {
            return Ok(vec![self.lo]);
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                if i == self.points - 1 {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect())
    }
}

/// Row-major expectations: row `i` is `betas[i]`, column `j` is `gammas[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub values: Vec<f64>,
}

impl Landscape {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.gammas.len() + j]
    }

    /// `(beta, gamma, value)` of the smallest entry (first one on ties).
    pub fn minimum(&self) -> (f64, f64, f64) {
        let (k, &v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, &f64::INFINITY), |acc, (k, v)| if *v < *acc.1 { (k, v) } else { acc });
        let cols = self.gammas.len();
        (self.betas[k / cols], self.gammas[k % cols], v)
    }

    /// `beta,gamma,expectation`, ascending beta then gamma.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,gamma,expectation\n");
        for (i, b) in self.betas.iter().enumerate() {
            for (j, g) in self.gammas.iter().enumerate() {
                let _ = writeln!(out, "{b},{g},{}", self.get(i, j));
            }
        }
        out
    }
}

pub fn qaoa_state(model: &IsingModel, params: &QaoaParams) -> Result<StateVector> {
    QaoaProblem::new(model)?.state(params)
}

pub fn expectation(model: &IsingModel, params: &QaoaParams) -> Result<f64> {
    QaoaProblem::new(model)?.expectation(params)
}

pub fn gradient(model: &IsingModel, params: &QaoaParams) -> Result<Vec<f64>> {
    QaoaProblem::new(model)?.gradient(params)
}

pub fn train_adam(model: &IsingModel, p: usize, config: &TrainConfig) -> Result<TrainTrace> {
    QaoaProblem::new(model)?.train_adam(p, config)
}

pub fn landscape_scan(
    model: &IsingModel,
    p: usize,
    beta: GridAxis,
    gamma: GridAxis,
) -> Result<Landscape> {
    QaoaProblem::new(model)?.landscape_scan(p, beta, gamma)
}
