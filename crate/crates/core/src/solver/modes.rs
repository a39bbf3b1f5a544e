//! Eigenmodes of the one-step map `f(t + dt) = A f(t)`.

use super::arnoldi::{largest_eigenpairs, ArnoldiOptions, C64};
use super::operator::{LinearOperator, PowerOperator, StepOperator};
use super::Simulation;
use crate::error::{Error, Result};
use crate::lattice::Q;

/// Residual bound `|A v - sigma v| / |v|` for an accepted mode.
pub const MODE_RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeOptions {
    pub arnoldi: ArnoldiOptions,
    /// Arnoldi runs on `A^power`; powers above one spread clustered eigenvalues
    /// near the unit circle apart without changing the eigenvectors.
    pub power: usize,
}

impl Default for ModeOptions {
    fn default() -> Self {
        Self {
            arnoldi: ArnoldiOptions::default(),
            power: 1,
        }
    }
}

/// One eigenpair of the step map.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Eigenvalue `sigma = exp(gamma dt)`.
    pub sigma: C64,
    /// Growth rate in physical time units, principal branch of `ln(sigma) / dt`.
    pub gamma: C64,
    /// Unit-norm population field, node-major with nine entries per node.
    pub eigenvector: Vec<C64>,
    pub residual: f64,
}

impl EigenResult {
    /// Growth rate per time step (`gamma * dt`).
    pub fn gamma_per_step(&self) -> C64 {
        self.sigma.ln()
    }

    /// Moment vector of node `n`.
    pub fn node_moments(&self, sim: &Simulation, n: usize) -> [C64; Q] {
        let m = sim.model().basis().m();
        let f = &self.eigenvector[n * Q..(n + 1) * Q];
        std::array::from_fn(|k| (0..Q).map(|q| f[q] * m[k][q]).sum())
    }
}

/// Principal-branch growth rate `ln(sigma) / dt`.
pub fn growth_rate(sigma: C64, dt: f64) -> C64 {
    C64::new(sigma.norm().ln(), sigma.arg()) / dt
}

/// Dominant eigenpairs of the step map of `sim`, sorted by decreasing `|sigma|`.
///
/// Every returned pair satisfies the residual bound with respect to `A` itself.
pub fn arnoldi_modes(sim: &Simulation, k: usize, opts: &ModeOptions) -> Result<Vec<EigenResult>> {
    let mut step = StepOperator::new(sim)?;
    let pairs = {
        let mut op = PowerOperator::new(&mut step, opts.power);
        largest_eigenpairs(&mut op, k, &opts.arnoldi)?
    };
    let n = step.dim();
    let dt = sim.dt();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    let mut are = vec![0.0; n];
    let mut aim = vec![0.0; n];
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        for (i, c) in p.vector.iter().enumerate() {
            re[i] = c.re;
            im[i] = c.im;
        }
        step.apply(&re, &mut are)?;
        step.apply(&im, &mut aim)?;
        // Rayleigh quotient x^H A x / x^H x with |x| = 1
        let mut sigma = C64::new(0.0, 0.0);
        for (i, x) in p.vector.iter().enumerate() {
            sigma += x.conj() * C64::new(are[i], aim[i]);
        }
        let residual = p
            .vector
            .iter()
            .enumerate()
            .map(|(i, x)| (C64::new(are[i], aim[i]) - sigma * x).norm_sqr())
            .sum::<f64>()
            .sqrt();
        out.push(EigenResult {
            sigma,
            gamma: growth_rate(sigma, dt),
            eigenvector: p.vector,
            residual,
        });
    }
    let bad: Vec<f64> = out
        .iter()
        .map(|m| m.residual)
        .filter(|r| r.is_nan() || *r >= MODE_RESIDUAL_LIMIT)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NoConvergence {
            restarts: opts.arnoldi.max_restarts,
            worst_residual: bad.iter().cloned().fold(0.0, f64::max),
            residuals: out.iter().map(|m| m.residual).collect(),
        });
    }
    out.sort_by(|a, b| {
        b.sigma
            .norm()
            .partial_cmp(&a.sigma.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}
