//! Least-squares fits used to post-process experiment fields.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("abscissae and ordinates differ in length ({xs} vs {ys})")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("degenerate abscissae: the normal equations are singular")]
    Degenerate,
    #[error("fitted parabola has no real root (discriminant {discriminant:.3e})")]
    NoRealRoot { discriminant: f64 },
}

/// Coefficients in increasing degree and the residual norm of the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub fit: FitResult,
}

/// Numerical wall positions from the zeros of a fitted parabola.
#[derive(Debug, Clone, PartialEq)]
pub struct WallFit {
    pub fit: FitResult,
    /// Zeros of the parabola, ascending.
    pub roots: [f64; 2],
    /// Signed distance from each wall to the nearest zero, positive outside the fluid.
    pub lower_offset: f64,
    pub upper_offset: f64,
}

impl WallFit {
    pub fn mean_offset(&self) -> f64 {
        0.5 * (self.lower_offset + self.upper_offset)
    }
}

fn check(xs: &[f64], ys: &[f64], needed: usize) -> Result<(), FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < needed {
        return Err(FitError::TooFewSamples { needed, got: xs.len() });
    }
    Ok(())
}

/// Least-squares polynomial of degree `deg`, solved on centred and scaled
/// abscissae for conditioning.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], deg: usize) -> Result<FitResult, FitError> {
    check(xs, ys, deg + 1)?;
    let n = xs.len() as f64;
    let shift = xs.iter().sum::<f64>() / n;
    let scale = xs.iter().map(|x| (x - shift).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(FitError::Degenerate);
    }
    let a = nalgebra::DMatrix::from_fn(xs.len(), deg + 1, |i, k| ((xs[i] - shift) / scale).powi(k as i32));
    let b = nalgebra::DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax {
        return Err(FitError::Degenerate);
    }
    let c = svd.solve(&b, 0.0).map_err(|_| FitError::Degenerate)?;
    let residual_norm = (a * &c - b).norm();
    // expand p((x - shift) / scale) into powers of x
    let mut coefficients = vec![0.0; deg + 1];
    for (k, ck) in c.iter().enumerate() {
        let w = ck / scale.powi(k as i32);
        for (m, out) in coefficients.iter_mut().enumerate().take(k + 1) {
            *out += w * binomial(k, m) * (-shift).powi((k - m) as i32);
        }
    }
    Ok(FitResult {
        coefficients,
        residual_norm,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Indices of the central half of `n` samples.
pub fn central_half(n: usize) -> std::ops::Range<usize> {
    n / 4..n - n / 4
}

/// Straight line through the central half of the samples.
pub fn fit_linear_half_window(xs: &[f64], ys: &[f64]) -> Result<LinearFit, FitError> {
    check(xs, ys, 4)?;
    let w = central_half(xs.len());
    let fit = fit_polynomial(&xs[w.clone()], &ys[w], 1)?;
    Ok(LinearFit {
        intercept: fit.coefficients[0],
        slope: fit.coefficients[1],
        fit,
    })
}

/// Parabola through a velocity profile between walls at `walls[0] < walls[1]`.
pub fn fit_parabola_wall_position(xs: &[f64], ys: &[f64], walls: [f64; 2]) -> Result<WallFit, FitError> {
    check(xs, ys, 3)?;
    let fit = fit_polynomial(xs, ys, 2)?;
    let [c0, c1, c2] = [fit.coefficients[0], fit.coefficients[1], fit.coefficients[2]];
    if c2 == 0.0 {
        return Err(FitError::NoRealRoot { discriminant: 0.0 });
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Err(FitError::NoRealRoot { discriminant: disc });
    }
    // stable quadratic roots
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / c2, c0 / q) };
    let roots = [r1.min(r2), r1.max(r2)];
    Ok(WallFit {
        fit,
        roots,
        lower_offset: walls[0] - roots[0],
        upper_offset: roots[1] - walls[1],
    })
}

/// Coefficient of determination of a straight-line fit over all samples.
pub fn r_squared_linear(xs: &[f64], ys: &[f64]) -> Result<f64, FitError> {
    let fit = fit_polynomial(xs, ys, 1)?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let total: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    if total == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - fit.residual_norm.powi(2) / total)
}
