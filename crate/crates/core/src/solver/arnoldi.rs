//! Thick-restart Arnoldi iteration for the largest-magnitude eigenpairs of a
//! real operator.
//!
//! After each cycle the Ritz vectors of the wanted values (real and imaginary
//! parts for complex pairs) are orthonormalised and kept, so the next cycle
//! extends an approximately invariant subspace instead of starting over.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operator::LinearOperator;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Iteration cap of the dense Schur step on the projected matrix.
const SCHUR_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ArnoldiOptions {
    /// Krylov subspace size `m`; must exceed the number of wanted pairs.
    pub subspace: usize,
    pub max_restarts: usize,
    /// Relative residual `|A x - theta x| / |theta|` required for every wanted pair.
    pub tolerance: f64,
    /// Seed of the start vector.
    pub seed: u64,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        Self {
            subspace: 40,
            max_restarts: 300,
            tolerance: 1e-11,
            seed: 0,
        }
    }
}

/// An approximate eigenpair with unit-norm vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RitzPair {
    pub value: C64,
    pub vector: Vec<C64>,
    pub residual_estimate: f64,
}

/// Largest-magnitude eigenpairs of `op`, sorted by decreasing magnitude.
///
/// Complex conjugate pairs are never split, so up to `k + 1` pairs may be returned.
pub fn largest_eigenpairs(op: &mut dyn LinearOperator, k: usize, opts: &ArnoldiOptions) -> Result<Vec<RitzPair>> {
    let n = op.dim();
    if k == 0 {
        return Err(Error::InvalidArgument(
            "at least one eigenpair must be requested".into(),
        ));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a {n}-dimensional operator"
        )));
    }
    let m = opts.subspace.min(n);
    if m <= k + 1 && m < n {
        return Err(Error::InvalidArgument(format!(
            "subspace size {} must exceed the number of wanted pairs {k} by at least two",
            opts.subspace
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut start);
    basis.push(start);
    let mut h = DMatrix::<f64>::zeros(m + 1, m);
    let mut kept = 0;
    let mut w = vec![0.0; n];
    let mut worst = f64::INFINITY;
    let mut last_residuals = Vec::new();

    for restart in 0..=opts.max_restarts {
        for j in kept..m {
            op.apply(&basis[j], &mut w)?;
            let scale = norm(&w);
            orthogonalize(&basis, &mut w, |i, c| h[(i, j)] += c);
            let beta = norm(&w);
            if j + 1 == n {
                h[(j + 1, j)] = 0.0;
                basis.push(vec![0.0; n]);
                break;
            }
            if beta <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                // invariant subspace: continue with a fresh direction
                let mut r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                orthogonalize(&basis, &mut r, |_, _| {});
                normalize(&mut r);
                h[(j + 1, j)] = 0.0;
                basis.push(r);
            } else {
                h[(j + 1, j)] = beta;
                basis.push(w.iter().map(|x| x / beta).collect());
            }
        }
        let hm = h.view((0, 0), (m, m)).into_owned();
        let beta_m = h[(m, m - 1)];
        let Some(schur) = Schur::try_new(hm.clone(), f64::EPSILON, SCHUR_MAX_ITERATIONS) else {
            return Err(Error::NoConvergence {
                restarts: restart,
                worst_residual: f64::INFINITY,
                residuals: last_residuals,
            });
        };
        let mut ritz: Vec<C64> = schur.complex_eigenvalues().iter().copied().collect();
        ritz.sort_by(|a, b| {
            b.norm()
                .partial_cmp(&a.norm())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        let wanted = pair_closed_count(&ritz, k);
        let vectors: Vec<DVector<C64>> = ritz[..wanted].iter().map(|&t| small_eigenvector(&hm, t)).collect();
        let residuals: Vec<f64> = ritz[..wanted]
            .iter()
            .zip(&vectors)
            .map(|(t, y)| {
                let inner = (hm.map(C64::from) * y - y * *t).norm();
                let outer = beta_m.abs() * y[m - 1].norm();
                (inner * inner + outer * outer).sqrt() / t.norm().max(f64::MIN_POSITIVE)
            })
            .collect();
        worst = residuals.iter().cloned().fold(0.0, f64::max);
        last_residuals = residuals.clone();
        if worst <= opts.tolerance {
            return Ok(ritz[..wanted]
                .iter()
                .zip(vectors)
                .zip(residuals)
                .map(|((&value, y), r)| {
                    let mut x = vec![C64::new(0.0, 0.0); n];
                    for (col, v) in basis.iter().take(m).enumerate() {
                        let c = y[col];
                        for (xi, vi) in x.iter_mut().zip(v) {
                            *xi += c * *vi;
                        }
                    }
                    let nx = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    x.iter_mut().for_each(|c| *c /= nx);
                    RitzPair {
                        value,
                        vector: x,
                        residual_estimate: r,
                    }
                })
                .collect());
        }
        if restart == opts.max_restarts || m == n {
            break;
        }

        // keep the wanted pairs plus a buffer of the next ones
        let target = (wanted + (m - wanted) / 2).min(m - 2).max(wanted);
        let keep_values = pair_closed_count(&ritz, target);
        let mut columns: Vec<DVector<f64>> = Vec::new();
        for (idx, &t) in ritz[..keep_values].iter().enumerate() {
            let y = if idx < wanted {
                vectors[idx].clone()
            } else {
                small_eigenvector(&hm, t)
            };
            if t.im.abs() <= 1e-14 * t.norm() {
                columns.push(y.map(|c| c.re));
            } else if t.im > 0.0 {
                columns.push(y.map(|c| c.re));
                columns.push(y.map(|c| c.im));
            }
        }
        let s = orthonormal_columns(&columns, m);
        let p = s.ncols();
        if p == 0 || p >= m {
            break;
        }
        let r = s.transpose() * &hm * &s;
        let spike = s.row(m - 1) * beta_m;
        let mut new_basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for c in 0..p {
            let mut v = vec![0.0; n];
            for (row, b) in basis.iter().take(m).enumerate() {
                let coef = s[(row, c)];
                if coef != 0.0 {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += coef * bi;
                    }
                }
            }
            new_basis.push(v);
        }
        new_basis.push(basis[m].clone());
        basis = new_basis;
        h.fill(0.0);
        h.view_mut((0, 0), (p, p)).copy_from(&r);
        for c in 0..p {
            h[(p, c)] = spike[c];
        }
        kept = p;
    }
    Err(Error::NoConvergence {
        restarts: opts.max_restarts,
        worst_residual: worst,
        residuals: last_residuals,
    })
}

/// Smallest count `>= k` that does not split a conjugate pair in `sorted`.
fn pair_closed_count(sorted: &[C64], k: usize) -> usize {
    let k = k.min(sorted.len());
    if k == 0 || k == sorted.len() {
        return k;
    }
    let last = sorted[k - 1];
    let next = sorted[k];
    let tol = 1e-10 * last.norm().max(1e-300);
    if last.im.abs() > tol && (next - last.conj()).norm() <= tol {
        k + 1
    } else {
        k
    }
}

/// Unit eigenvector of a small dense matrix by shifted inverse iteration.
fn small_eigenvector(h: &DMatrix<f64>, theta: C64) -> DVector<C64> {
    let m = h.nrows();
    let hc = h.map(C64::from);
    let scale = h.amax().max(1.0);
    let mut y = DVector::<C64>::from_fn(m, |i, _| C64::new(1.0 + (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()));
    for attempt in 0..3 {
        let shift = theta + C64::new(1e-13 * scale * 10f64.powi(attempt * 3), 0.0);
        let mut a = hc.clone();
        for i in 0..m {
            a[(i, i)] -= shift;
        }
        let lu = a.lu();
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&y) {
                Some(z) if z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) && z.norm() > 0.0 => {
                    y = &z / C64::from(z.norm());
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            break;
        }
    }
    // fix the phase so the largest entry is real and positive
    let (imax, _) = y.iter().enumerate().fold(
        (0, 0.0),
        |(bi, bv), (i, c)| if c.norm() > bv { (i, c.norm()) } else { (bi, bv) },
    );
    let phase = y[imax] / C64::from(y[imax].norm());
    y.map(|c| c / phase)
}

/// Orthonormal basis (Gram-Schmidt, twice) of the given columns, dropping dependent ones.
fn orthonormal_columns(columns: &[DVector<f64>], m: usize) -> DMatrix<f64> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in columns {
        let mut v = c.clone();
        let n0 = v.norm();
        for _ in 0..2 {
            for q in &out {
                let d = q.dot(&v);
                v -= q * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-10 * n0.max(f64::MIN_POSITIVE) {
            out.push(v / nv);
        }
    }
    let mut s = DMatrix::zeros(m, out.len());
    for (j, v) in out.iter().enumerate() {
        s.set_column(j, v);
    }
    s
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

/// Modified Gram-Schmidt against every basis vector, applied twice.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64], mut record: impl FnMut(usize, f64)) {
    for _ in 0..2 {
        for (i, v) in basis.iter().enumerate() {
            let c = dot(v, w);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= c * vi;
            }
            record(i, c);
        }
    }
}
