//! The one-step update as a linear operator on population vectors.

use nalgebra::DMatrix;

use super::Simulation;
use crate::error::{Error, Result};

/// A real linear map applied without forming its matrix.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

/// `v -> step(v)` for a simulation with homogeneous boundary data.
#[derive(Debug, Clone)]
pub struct StepOperator {
    sim: Simulation,
}

impl StepOperator {
    pub fn new(sim: &Simulation) -> Result<Self> {
        if !sim.is_homogeneous() {
            return Err(Error::Contract(
                "the one-step map is linear only with homogeneous boundary data".into(),
            ));
        }
        Ok(Self { sim: sim.clone() })
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }
}

impl LinearOperator for StepOperator {
    fn dim(&self) -> usize {
        self.sim.node_count() * crate::lattice::Q
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.sim.set_state_vector(x)?;
        self.sim.step()?;
        for (dst, f) in y.chunks_exact_mut(crate::lattice::Q).zip(self.sim.populations()) {
            dst.copy_from_slice(f);
        }
        Ok(())
    }
}

/// `A^p` for an operator `A`.
pub struct PowerOperator<'a, A: LinearOperator + ?Sized> {
    inner: &'a mut A,
    power: usize,
    scratch: Vec<f64>,
}

impl<'a, A: LinearOperator + ?Sized> PowerOperator<'a, A> {
    pub fn new(inner: &'a mut A, power: usize) -> Self {
        let n = inner.dim();
        Self {
            inner,
            power: power.max(1),
            scratch: vec![0.0; n],
        }
    }
}

impl<A: LinearOperator + ?Sized> LinearOperator for PowerOperator<'_, A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.inner.apply(x, y)?;
        for _ in 1..self.power {
            self.scratch.copy_from_slice(y);
            self.inner.apply(&self.scratch, y)?;
        }
        Ok(())
    }
}

/// A dense matrix viewed as an operator.
impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.nrows();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            *yi = (0..n).map(|j| self[(i, j)] * x[j]).sum();
        }
        Ok(())
    }
}

/// Assembles the matrix of `op` column by column.
pub fn assemble_dense(op: &mut dyn LinearOperator) -> Result<DMatrix<f64>> {
    let n = op.dim();
    let mut a = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col)?;
        e[j] = 0.0;
        for i in 0..n {
            a[(i, j)] = col[i];
        }
    }
    Ok(a)
}
