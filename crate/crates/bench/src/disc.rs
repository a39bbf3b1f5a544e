//! Acoustic eigenmodes of a disc with interpolated wall rules.

use std::collections::BTreeMap;

use abbflow::boundary::disc::{default_center, discretize_disc};
use abbflow::boundary::{BoundaryDatum, Interpolation};
use abbflow::lattice::moment;
use abbflow::solver::arnoldi::C64;
use abbflow::solver::modes::{arnoldi_modes, EigenResult, ModeOptions};
use abbflow::solver::{DiscBoundary, Geometry, Simulation};

use crate::config::DiscConfig;
use crate::error::Result;
use crate::output::{num, OutputDir, Summary};

/// Modes with `|Im(gamma dt)|` below this are treated as stationary.
pub const STATIONARY_FREQUENCY: f64 = 1e-9;
/// Minimum share of the squared moment norm carried by the density.
pub const DENSITY_SHARE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscMode {
    pub gamma: C64,
    pub sigma_abs: f64,
    pub residual: f64,
    /// Share of the squared moment norm held by the density.
    pub density_share: f64,
}

/// Phase-aligned real profile of one mode at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub node: [usize; 2],
    pub radius: f64,
    pub rho: f64,
    pub u_radial: f64,
    pub u_tangential: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscReport {
    pub modes: Vec<DiscMode>,
    pub first: Option<usize>,
    pub profile: Vec<ProfilePoint>,
    /// Largest per-radius density spread relative to the maximum density.
    pub radial_spread: f64,
    /// `max |u_t| / max |u_r|` of the first mode.
    pub tangential_ratio: f64,
    pub max_sigma_abs: f64,
    pub node_count: usize,
    pub summary: Summary,
}

pub fn build_simulation(cfg: &DiscConfig) -> Result<Simulation> {
    let model = cfg.model.build()?;
    let margin = match cfg.interpolation {
        Interpolation::Linear => 1,
        Interpolation::Quadratic => 2,
    };
    let geometry = discretize_disc(cfg.radius, cfg.nx, cfg.ny, cfg.center, margin)?;
    let disc = DiscBoundary {
        geometry,
        reflection: cfg.reflection,
        interpolation: cfg.interpolation,
        datum: BoundaryDatum::homogeneous(),
    };
    Ok(Simulation::new(model, cfg.nx, cfg.ny, 1.0, Geometry::Disc(disc))?)
}

fn density_share(m: &EigenResult, sim: &Simulation) -> f64 {
    let (mut rho, mut total) = (0.0, 0.0);
    for n in 0..sim.node_count() {
        let mm = m.node_moments(sim, n);
        rho += mm[moment::RHO].norm_sqr();
        total += mm.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    if total > 0.0 {
        rho / total
    } else {
        0.0
    }
}

/// Rotation that makes `sum z^2` real positive, so `Re(z e^{-i theta})` carries the mode.
fn alignment(values: impl Iterator<Item = C64>) -> C64 {
    let s: C64 = values.map(|z| z * z).sum();
    if s.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        C64::from_polar(1.0, -0.5 * s.arg())
    }
}

fn radial_profile(m: &EigenResult, sim: &Simulation, center: [f64; 2]) -> Vec<ProfilePoint> {
    let moments: Vec<[C64; 9]> = (0..sim.node_count()).map(|n| m.node_moments(sim, n)).collect();
    let rho_rot = alignment(moments.iter().map(|mm| mm[moment::RHO]));
    let j_rot = alignment(moments.iter().flat_map(|mm| [mm[moment::JX], mm[moment::JY]]));
    let rho_max = moments
        .iter()
        .map(|mm| (mm[moment::RHO] * rho_rot).re)
        .fold(0.0f64, |a, r| if r.abs() > a.abs() { r } else { a });
    let scale = if rho_max != 0.0 { 1.0 / rho_max } else { 1.0 };
    sim.nodes()
        .iter()
        .zip(&moments)
        .map(|(&[i, j], mm)| {
            let (x, y) = (i as f64 - center[0], j as f64 - center[1]);
            let r = x.hypot(y);
            let jx = (mm[moment::JX] * j_rot).re * scale;
            let jy = (mm[moment::JY] * j_rot).re * scale;
            let (ur, ut) = if r > 0.0 {
                ((jx * x + jy * y) / r, (jy * x - jx * y) / r)
            } else {
                (0.0, 0.0)
            };
            ProfilePoint {
                node: [i, j],
                radius: r,
                rho: (mm[moment::RHO] * rho_rot).re * scale,
                u_radial: ur,
                u_tangential: ut,
            }
        })
        .collect()
}

/// Largest `(max - min)` of the density among nodes sharing a radius, over `max |rho|`.
pub fn radial_spread(profile: &[ProfilePoint]) -> f64 {
    let mut groups: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for p in profile {
        let key = (p.radius * 1e8).round() as i64;
        let e = groups.entry(key).or_insert((f64::INFINITY, f64::NEG_INFINITY));
        e.0 = e.0.min(p.rho);
        e.1 = e.1.max(p.rho);
    }
    let amax = profile.iter().map(|p| p.rho.abs()).fold(0.0, f64::max);
    if amax == 0.0 {
        return 0.0;
    }
    groups.values().map(|(lo, hi)| hi - lo).fold(0.0, f64::max) / amax
}

pub fn run_disc_modes(cfg: &DiscConfig, seed: u64, out: Option<(&OutputDir, &str)>) -> Result<DiscReport> {
    let sim = build_simulation(cfg)?;
    let center = cfg.center.unwrap_or_else(|| default_center(cfg.nx, cfg.ny));
    let opts = ModeOptions {
        arnoldi: cfg.eigen.arnoldi(seed),
        power: cfg.eigen.power,
    };
    let found = arnoldi_modes(&sim, cfg.eigen.modes, &opts)?;
    let dt = sim.dt();
    let modes: Vec<DiscMode> = found
        .iter()
        .map(|m| DiscMode {
            gamma: m.gamma,
            sigma_abs: m.sigma.norm(),
            residual: m.residual,
            density_share: density_share(m, &sim),
        })
        .collect();
    let first = modes
        .iter()
        .position(|m| (m.gamma.im * dt).abs() > STATIONARY_FREQUENCY && m.density_share > DENSITY_SHARE);
    let profile = first
        .map(|i| radial_profile(&found[i], &sim, center))
        .unwrap_or_default();
    let spread = radial_spread(&profile);
    let ur_max = profile.iter().map(|p| p.u_radial.abs()).fold(0.0, f64::max);
    let ut_max = profile.iter().map(|p| p.u_tangential.abs()).fold(0.0, f64::max);
    let tangential_ratio = if ur_max > 0.0 { ut_max / ur_max } else { f64::NAN };
    let max_sigma_abs = modes.iter().map(|m| m.sigma_abs).fold(0.0, f64::max);

    let mut summary = Summary::new("disc-modes");
    summary
        .add("nx", cfg.nx)
        .add("ny", cfg.ny)
        .add_num("radius", cfg.radius)
        .add_num("center_x", center[0])
        .add_num("center_y", center[1])
        .add("fluid_nodes", sim.node_count())
        .add("boundary_links", sim.boundary_link_count())
        .add("modes_computed", modes.len());
    match first {
        Some(i) => {
            summary
                .add("first_mode_rank", i)
                .add_num("first_mode_gamma_re", modes[i].gamma.re)
                .add_num("first_mode_gamma_im", modes[i].gamma.im)
                .add_num("first_mode_density_share", modes[i].density_share);
        }
        None => {
            summary.add("first_mode_rank", "none");
        }
    }
    summary
        .add_num("radial_spread", spread)
        .add_num("tangential_ratio", tangential_ratio)
        .add_num("max_sigma_abs", max_sigma_abs);

    if let Some((dir, source)) = out {
        dir.write_csv(
            "modes.csv",
            &[
                "rank",
                "gamma_re",
                "gamma_im",
                "sigma_abs",
                "residual",
                "density_share",
                "first",
            ],
            modes.iter().enumerate().map(|(i, m)| {
                vec![
                    i.to_string(),
                    num(m.gamma.re),
                    num(m.gamma.im),
                    num(m.sigma_abs),
                    num(m.residual),
                    num(m.density_share),
                    (Some(i) == first).to_string(),
                ]
            }),
        )?;
        dir.write_csv(
            "radial_profile.csv",
            &["i", "j", "radius", "rho", "u_radial", "u_tangential"],
            profile.iter().map(|p| {
                vec![
                    p.node[0].to_string(),
                    p.node[1].to_string(),
                    num(p.radius),
                    num(p.rho),
                    num(p.u_radial),
                    num(p.u_tangential),
                ]
            }),
        )?;
        dir.write_summary(&summary, source)?;
    }

    Ok(DiscReport {
        modes,
        first,
        profile,
        radial_spread: spread,
        tangential_ratio,
        max_sigma_abs,
        node_count: sim.node_count(),
        summary,
    })
}
