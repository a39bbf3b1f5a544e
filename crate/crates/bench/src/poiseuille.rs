//! Pressure-driven channel flow between no-slip side walls.

use abbflow::boundary::{BoundaryDatum, HalfwayScheme};
use abbflow::lattice::moment;
use abbflow::solver::{BoxEdges, EdgeCondition, Geometry, MomentFields, Simulation};

use crate::config::PoiseuilleConfig;
use crate::error::{BenchError, Result};
use crate::fit::{fit_linear_half_window, fit_parabola_wall_position, WallFit};
use crate::output::{num, OutputDir, Summary};

/// Largest relative metric change accepted by the doubling check.
pub const DOUBLING_TOLERANCE: f64 = 1e-3;

/// Row used for a wall-position fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileWindow {
    /// Middle of the channel (average of the two middle rows for even heights).
    Center,
    /// First row of nodes next to the inlet.
    FirstLayer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoiseuilleMetrics {
    /// Relative error of the pressure in the first cell on the centerline.
    pub first_cell_pressure_error: f64,
    pub fitted_gradient: f64,
    pub exact_gradient: f64,
    /// `fitted / exact - 1`.
    pub gradient_rel_error: f64,
    pub gradient_residual: f64,
    /// `max |u_x| / max |u_y|` over the whole channel.
    pub ux_uy_ratio: f64,
    pub bottom: WallFit,
    pub center: WallFit,
}

impl PoiseuilleMetrics {
    fn values(&self) -> [(&'static str, f64); 10] {
        [
            ("first_cell_pressure_error", self.first_cell_pressure_error),
            ("fitted_gradient", self.fitted_gradient),
            ("exact_gradient", self.exact_gradient),
            ("gradient_rel_error", self.gradient_rel_error),
            ("gradient_fit_residual", self.gradient_residual),
            ("ux_uy_ratio", self.ux_uy_ratio),
            ("bottom_wall_offset", self.bottom.mean_offset()),
            ("bottom_fit_residual", self.bottom.fit.residual_norm),
            ("center_wall_offset", self.center.mean_offset()),
            ("center_fit_residual", self.center.fit.residual_norm),
        ]
    }

    /// Largest relative change of any metric between two runs.
    pub fn max_rel_change(&self, other: &Self) -> f64 {
        self.values()
            .iter()
            .zip(other.values())
            .filter(|((k, _), _)| !k.ends_with("residual"))
            .map(|((_, a), (_, b))| {
                let scale = a.abs().max(b.abs());
                if scale == 0.0 {
                    0.0
                } else {
                    (a - b).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoiseuilleReport {
    pub steps: u64,
    /// Relative one-step change at the convergence check.
    pub final_change: f64,
    pub metrics: PoiseuilleMetrics,
    /// Largest relative metric change after doubling the step count, if checked.
    pub doubling_change: Option<f64>,
    pub summary: Summary,
}

pub fn build_simulation(cfg: &PoiseuilleConfig) -> Result<Simulation> {
    let model = cfg.model.build()?;
    let c0sq = model.transport_coefficients(1.0)?.sound_speed_sq;
    let side = EdgeCondition::wall(HalfwayScheme::BounceBack, BoundaryDatum::homogeneous());
    let edges = BoxEdges {
        bottom: EdgeCondition::wall(cfg.scheme, BoundaryDatum::density(cfg.p0 / c0sq)),
        top: EdgeCondition::wall(cfg.scheme, BoundaryDatum::density(-cfg.p0 / c0sq)),
        left: side.clone(),
        right: side,
    };
    Ok(Simulation::new(
        model,
        cfg.nx,
        cfg.ny,
        1.0 / cfg.nx as f64,
        Geometry::Box(edges),
    )?)
}

/// Runs until the largest one-step change falls below `tolerance * max|f|`.
pub fn run_to_steady_state(sim: &mut Simulation, cfg: &PoiseuilleConfig) -> Result<(u64, f64)> {
    let mut change = f64::INFINITY;
    while sim.time_step() < cfg.max_steps {
        let block = cfg.check_interval.min(cfg.max_steps - sim.time_step());
        sim.run(block - 1)?;
        let prev = sim.populations().to_vec();
        sim.step()?;
        let (mut dmax, mut fmax) = (0.0f64, 0.0f64);
        for (a, b) in sim.populations().iter().zip(&prev) {
            for (x, y) in a.iter().zip(b) {
                dmax = dmax.max((x - y).abs());
                fmax = fmax.max(x.abs());
            }
        }
        change = if fmax > 0.0 { dmax / fmax } else { 0.0 };
        if change < cfg.tolerance {
            return Ok((sim.time_step(), change));
        }
    }
    Err(BenchError::NotConverged {
        steps: sim.time_step(),
        change,
    })
}

fn pressure_centerline(f: &MomentFields, nx: usize, ny: usize, c0sq: f64) -> Vec<f64> {
    (0..ny).map(|j| c0sq * column_average(f, moment::RHO, nx, j)).collect()
}

/// Value on the vertical centerline (average of the two middle columns for even widths).
fn column_average(f: &MomentFields, k: usize, nx: usize, j: usize) -> f64 {
    if nx.is_multiple_of(2) {
        0.5 * (f.get(k, nx / 2 - 1, j) + f.get(k, nx / 2, j))
    } else {
        f.get(k, nx / 2, j)
    }
}

fn row_profile(f: &MomentFields, k: usize, nx: usize, ny: usize, window: ProfileWindow) -> Vec<f64> {
    (0..nx)
        .map(|i| match window {
            ProfileWindow::FirstLayer => f.get(k, i, 0),
            ProfileWindow::Center if ny.is_multiple_of(2) => 0.5 * (f.get(k, i, ny / 2 - 1) + f.get(k, i, ny / 2)),
            ProfileWindow::Center => f.get(k, i, ny / 2),
        })
        .collect()
}

/// Numerical wall positions from the vertical velocity in `window`, in cell units.
pub fn wall_position(f: &MomentFields, nx: usize, ny: usize, window: ProfileWindow) -> Result<WallFit> {
    let xs: Vec<f64> = (0..nx).map(|i| i as f64 + 0.5).collect();
    let ys = row_profile(f, moment::JY, nx, ny, window);
    Ok(fit_parabola_wall_position(&xs, &ys, [0.0, nx as f64])?)
}

pub fn compute_metrics(sim: &Simulation, cfg: &PoiseuilleConfig) -> Result<PoiseuilleMetrics> {
    let (nx, ny) = (cfg.nx, cfg.ny);
    let dx = sim.dx();
    let c0sq = sim.model().transport_coefficients(dx)?.sound_speed_sq;
    let f = sim.moment_fields();
    let p = pressure_centerline(&f, nx, ny, c0sq);
    let height = ny as f64 * dx;
    let exact = |y: f64| cfg.p0 * (1.0 - 2.0 * y / height);
    let ys: Vec<f64> = (0..ny).map(|j| (j as f64 + 0.5) * dx).collect();
    let p_first = exact(ys[0]);
    let line = fit_linear_half_window(&ys, &p)?;
    let exact_gradient = -2.0 * cfg.p0 / height;
    let ux_max = f.jx().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let uy_max = f.jy().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(PoiseuilleMetrics {
        first_cell_pressure_error: (p[0] - p_first) / p_first,
        fitted_gradient: line.slope,
        exact_gradient,
        gradient_rel_error: line.slope / exact_gradient - 1.0,
        gradient_residual: line.fit.residual_norm,
        ux_uy_ratio: if uy_max > 0.0 { ux_max / uy_max } else { f64::NAN },
        bottom: wall_position(&f, nx, ny, ProfileWindow::FirstLayer)?,
        center: wall_position(&f, nx, ny, ProfileWindow::Center)?,
    })
}

pub fn run_poiseuille(cfg: &PoiseuilleConfig, out: Option<(&OutputDir, &str)>) -> Result<PoiseuilleReport> {
    let mut sim = build_simulation(cfg)?;
    let (steps, final_change) = run_to_steady_state(&mut sim, cfg)?;
    let metrics = compute_metrics(&sim, cfg)?;
    let doubling_change = if cfg.verify_doubling {
        let mut longer = sim.clone();
        longer.run(steps)?;
        Some(compute_metrics(&longer, cfg)?.max_rel_change(&metrics))
    } else {
        None
    };

    let mut summary = Summary::new("poiseuille");
    summary
        .add("nx", cfg.nx)
        .add("ny", cfg.ny)
        .add("scheme", scheme_name(cfg.scheme))
        .add_num("dx", sim.dx())
        .add_num("dt", sim.dt())
        .add("steps", steps)
        .add_num("final_relative_change", final_change);
    for (k, v) in metrics.values() {
        summary.add_num(k, v);
    }
    summary
        .add_num("bottom_lower_offset", metrics.bottom.lower_offset)
        .add_num("bottom_upper_offset", metrics.bottom.upper_offset)
        .add_num("center_lower_offset", metrics.center.lower_offset)
        .add_num("center_upper_offset", metrics.center.upper_offset);
    match doubling_change {
        Some(c) => summary
            .add_num("doubling_max_rel_change", c)
            .add("doubling_invariant", c < DOUBLING_TOLERANCE),
        None => summary.add("doubling_invariant", "not checked"),
    };

    if let Some((dir, source)) = out {
        write_fields(dir, &sim, cfg)?;
        dir.write_summary(&summary, source)?;
    }

    Ok(PoiseuilleReport {
        steps,
        final_change,
        metrics,
        doubling_change,
        summary,
    })
}

fn scheme_name(s: HalfwayScheme) -> &'static str {
    match s {
        HalfwayScheme::BounceBack => "bb",
        HalfwayScheme::AntiBounceBack => "abb",
        HalfwayScheme::MixedBounceBack => "mixed",
        HalfwayScheme::PressureTangential => "pt",
    }
}

fn write_fields(dir: &OutputDir, sim: &Simulation, cfg: &PoiseuilleConfig) -> Result<()> {
    let (nx, ny) = (cfg.nx, cfg.ny);
    let dx = sim.dx();
    let c0sq = sim.model().transport_coefficients(dx)?.sound_speed_sq;
    let f = sim.moment_fields();
    let height = ny as f64 * dx;
    let p = pressure_centerline(&f, nx, ny, c0sq);
    dir.write_csv(
        "centerline_pressure.csv",
        &["j", "y", "p", "p_exact"],
        p.iter().enumerate().map(|(j, pj)| {
            let y = (j as f64 + 0.5) * dx;
            vec![j.to_string(), num(y), num(*pj), num(cfg.p0 * (1.0 - 2.0 * y / height))]
        }),
    )?;

    let uy_max = f.jy().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let norm = if uy_max > 0.0 { 1.0 / uy_max } else { 1.0 };
    let profiles: Vec<[Vec<f64>; 2]> = [ProfileWindow::FirstLayer, ProfileWindow::Center]
        .map(|w| {
            [
                row_profile(&f, moment::JX, nx, ny, w),
                row_profile(&f, moment::JY, nx, ny, w),
            ]
        })
        .to_vec();
    dir.write_csv(
        "horizontal_velocity_profiles.csv",
        &[
            "i",
            "x",
            "ux_bottom",
            "uy_bottom",
            "ux_center",
            "uy_center",
            "ux_bottom_norm",
            "uy_bottom_norm",
            "ux_center_norm",
            "uy_center_norm",
        ],
        (0..nx).map(|i| {
            let raw = [
                profiles[0][0][i],
                profiles[0][1][i],
                profiles[1][0][i],
                profiles[1][1][i],
            ];
            let mut row = vec![i.to_string(), num((i as f64 + 0.5) * dx)];
            row.extend(raw.iter().map(|v| num(*v)));
            row.extend(raw.iter().map(|v| num(v * norm)));
            row
        }),
    )?;
    dir.write_csv(
        "vertical_velocity_profile.csv",
        &["j", "y", "ux", "uy", "ux_norm", "uy_norm"],
        (0..ny).map(|j| {
            let ux = column_average(&f, moment::JX, nx, j);
            let uy = column_average(&f, moment::JY, nx, j);
            vec![
                j.to_string(),
                num((j as f64 + 0.5) * dx),
                num(ux),
                num(uy),
                num(ux * norm),
                num(uy * norm),
            ]
        }),
    )?;
    dir.write_csv(
        "phi_y_inlet.csv",
        &["i", "j", "x", "y", "phi_y"],
        (0..cfg.phi_rows.min(ny)).flat_map(|j| {
            let f = &f;
            (0..nx).map(move |i| {
                vec![
                    i.to_string(),
                    j.to_string(),
                    num((i as f64 + 0.5) * dx),
                    num((j as f64 + 0.5) * dx),
                    num(f.get(moment::PHI_Y, i, j)),
                ]
            })
        }),
    )?;
    Ok(())
}
