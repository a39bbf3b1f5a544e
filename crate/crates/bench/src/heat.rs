//! Decay modes of the heat equation on a square.

use std::f64::consts::PI;

use abbflow::boundary::{BoundaryDatum, HalfwayScheme};
use abbflow::solver::modes::{arnoldi_modes, ModeOptions};
use abbflow::solver::{BoxEdges, EdgeCondition, Geometry, Simulation};

use crate::config::{HeatSquareConfig, SquareBoundary};
use crate::error::Result;
use crate::fit::r_squared_linear;
use crate::output::{num, OutputDir, Summary};

/// Number of leading distinct `{k, l}` pairs checked against the exact spectrum.
pub const LEADING_PAIRS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatMode {
    pub gamma_re: f64,
    pub gamma_im: f64,
    pub sigma_abs: f64,
    pub residual: f64,
    /// Wave numbers of the nearest exact mode, `k <= l`, in units of `pi / L`.
    pub k: usize,
    pub l: usize,
    pub gamma_exact: f64,
    /// `gamma / gamma_exact - 1`; `None` for the constant mode.
    pub rel_error: Option<f64>,
}

impl HeatMode {
    pub fn index(&self) -> usize {
        self.k * self.k + self.l * self.l
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatSquareReport {
    pub modes: Vec<HeatMode>,
    pub diffusivity: f64,
    /// Distinct pairs among the leading exact ones that were found.
    pub leading_pairs_found: usize,
    pub leading_max_abs_error: f64,
    /// R^2 of a straight-line fit of the error against `k^2 + l^2`.
    pub linearity_r2: f64,
    pub max_sigma_abs: f64,
    pub summary: Summary,
}

/// Exact rates `mu pi^2 (k^2 / Lx^2 + l^2 / Ly^2)` with their pairs, ascending.
fn exact_spectrum(boundary: SquareBoundary, lx: f64, ly: f64, mu: f64, count: usize) -> Vec<(usize, usize, f64)> {
    let (start, stride) = match boundary {
        SquareBoundary::Dirichlet => (1, 1),
        SquareBoundary::Periodic => (0, 2),
    };
    let kmax = start + stride * (count + 2);
    let mut out = Vec::new();
    for a in (start..=kmax).step_by(stride) {
        for b in (start..=kmax).step_by(stride) {
            out.push((
                a,
                b,
                mu * PI * PI * ((a * a) as f64 / (lx * lx) + (b * b) as f64 / (ly * ly)),
            ));
        }
    }
    out.sort_by(|x, y| x.2.total_cmp(&y.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    out
}

pub fn build_simulation(cfg: &HeatSquareConfig) -> Result<Simulation> {
    let model = cfg.model.build()?;
    let edges = match cfg.boundary {
        SquareBoundary::Dirichlet => BoxEdges::uniform(EdgeCondition::wall(
            HalfwayScheme::AntiBounceBack,
            BoundaryDatum::homogeneous(),
        )),
        SquareBoundary::Periodic => BoxEdges::periodic(),
    };
    Ok(Simulation::new(
        model,
        cfg.nx,
        cfg.ny,
        1.0 / cfg.nx as f64,
        Geometry::Box(edges),
    )?)
}

pub fn run_heat_square(cfg: &HeatSquareConfig, seed: u64, out: Option<(&OutputDir, &str)>) -> Result<HeatSquareReport> {
    let sim = build_simulation(cfg)?;
    let dx = sim.dx();
    let mu = sim.model().transport_coefficients(dx)?.diffusivity;
    let opts = ModeOptions {
        arnoldi: cfg.eigen.arnoldi(seed),
        power: cfg.eigen.power,
    };
    let found = arnoldi_modes(&sim, cfg.eigen.modes, &opts)?;
    let (lx, ly) = (cfg.nx as f64 * dx, cfg.ny as f64 * dx);
    let exact = exact_spectrum(cfg.boundary, lx, ly, mu, cfg.eigen.modes);

    let modes: Vec<HeatMode> = found
        .iter()
        .map(|m| {
            let rate = -m.gamma.re;
            let &(a, b, g) = exact
                .iter()
                .min_by(|x, y| (x.2 - rate).abs().total_cmp(&(y.2 - rate).abs()))
                .expect("non-empty spectrum");
            let gamma_exact = -g;
            HeatMode {
                gamma_re: m.gamma.re,
                gamma_im: m.gamma.im,
                sigma_abs: m.sigma.norm(),
                residual: m.residual,
                k: a.min(b),
                l: a.max(b),
                gamma_exact,
                rel_error: (gamma_exact != 0.0).then(|| m.gamma.re / gamma_exact - 1.0),
            }
        })
        .collect();

    // leading distinct pairs of the exact spectrum, excluding the constant mode
    let mut leading: Vec<(usize, usize)> = Vec::new();
    for &(a, b, g) in &exact {
        let p = (a.min(b), a.max(b));
        if g > 0.0 && !leading.contains(&p) {
            leading.push(p);
        }
        if leading.len() == LEADING_PAIRS {
            break;
        }
    }
    let in_leading: Vec<&HeatMode> = modes
        .iter()
        .filter(|m| m.rel_error.is_some() && leading.contains(&(m.k, m.l)))
        .collect();
    let leading_pairs_found = leading
        .iter()
        .filter(|p| in_leading.iter().any(|m| (m.k, m.l) == **p))
        .count();
    let leading_max_abs_error = in_leading
        .iter()
        .filter_map(|m| m.rel_error)
        .fold(0.0, |a: f64, e| a.max(e.abs()));
    let xs: Vec<f64> = in_leading.iter().map(|m| m.index() as f64).collect();
    let ys: Vec<f64> = in_leading.iter().filter_map(|m| m.rel_error).collect();
    let linearity_r2 = r_squared_linear(&xs, &ys).unwrap_or(f64::NAN);
    let max_sigma_abs = modes.iter().map(|m| m.sigma_abs).fold(0.0, f64::max);

    let mut summary = Summary::new("heat-square");
    summary
        .add("nx", cfg.nx)
        .add("ny", cfg.ny)
        .add_num("dx", dx)
        .add_num("dt", sim.dt())
        .add_num("diffusivity", mu)
        .add("modes_computed", modes.len())
        .add("leading_pairs_found", format!("{leading_pairs_found}/{LEADING_PAIRS}"))
        .add_num("leading_max_abs_rel_error", leading_max_abs_error)
        .add_num("error_linearity_r2", linearity_r2)
        .add_num("max_sigma_abs", max_sigma_abs);

    if let Some((dir, source)) = out {
        dir.write_csv(
            "modes.csv",
            &[
                "rank",
                "gamma_re",
                "gamma_im",
                "k",
                "l",
                "k2_plus_l2",
                "gamma_exact",
                "rel_error",
                "sigma_abs",
                "residual",
            ],
            modes.iter().enumerate().map(|(i, m)| {
                vec![
                    i.to_string(),
                    num(m.gamma_re),
                    num(m.gamma_im),
                    m.k.to_string(),
                    m.l.to_string(),
                    m.index().to_string(),
                    num(m.gamma_exact),
                    m.rel_error.map(num).unwrap_or_default(),
                    num(m.sigma_abs),
                    num(m.residual),
                ]
            }),
        )?;
        dir.write_summary(&summary, source)?;
    }

    Ok(HeatSquareReport {
        modes,
        diffusivity: mu,
        leading_pairs_found,
        leading_max_abs_error,
        linearity_r2,
        max_sigma_abs,
        summary,
    })
}
