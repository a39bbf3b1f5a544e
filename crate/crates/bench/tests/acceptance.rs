//! Acceptance criteria, one PASS/FAIL line each. Runs with its own harness so
//! the lines are always printed; the process fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use abbflow::analysis::reference::{
    collision_matrix, printed_k, printed_kernel, reference_coefficients, t_matrix, u_matrix, ExpansionCoefficients,
    ReferenceParams,
};
use abbflow::analysis::{build_boundary_matrices, unit_gradient, LayerAnalysis, WallGradients};
use abbflow::boundary::disc::discretize_disc;
use abbflow::boundary::{
    apply_extended_linear, apply_extended_quadratic, BoundaryDatum, HalfwayScheme, Interpolation, LinkSamples,
    Reflection, Wall, WallSample,
};
use abbflow::collision::{CollisionModel, PhysicsKind, RelaxationRates};
use abbflow::lattice::{build_moment_basis, moment, Matrix9, Vector9, Q};
use abbflow::solver::operator::{assemble_dense, LinearOperator, StepOperator};
use abbflow::solver::{BoxEdges, DiscBoundary, EdgeCondition, Geometry, Simulation};
use abbflow::Error;
use abbflow_bench::config::{DiscConfig, HeatSquareConfig, PoiseuilleConfig};
use abbflow_bench::poiseuille::{run_poiseuille, PoiseuilleReport};
use abbflow_bench::{disc::run_disc_modes, heat::run_heat_square, parse_config, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATE_SETS: usize = 20;
const MESHES: [usize; 3] = [20, 40, 80];
/// Runtime allowed for one experiment or mesh where the requirement is "minutes".
const MINUTES: Duration = Duration::from_secs(600);

struct Outcome {
    pass: bool,
    detail: String,
}

/// Collects named sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.failed.push(what);
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn finish(self, started: Instant, limit: Duration) -> Outcome {
        let elapsed = started.elapsed();
        let mut failed = self.failed;
        if elapsed > limit {
            failed.push(format!(
                "runtime {:.1} s exceeds {:.0} s",
                elapsed.as_secs_f64(),
                limit.as_secs_f64()
            ));
        }
        let mut detail = self.notes.join("; ");
        if !failed.is_empty() {
            detail = format!("failed: {}; {}", failed.join(", "), detail);
        }
        detail.push_str(&format!(" [{:.1} s]", elapsed.as_secs_f64()));
        Outcome {
            pass: failed.is_empty(),
            detail,
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_rates(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> RelaxationRates {
    let mut s = || r.random_range(lo..hi);
    RelaxationRates {
        s_j: s(),
        s_e: s(),
        s_x: s(),
        s_q: s(),
        s_d: s(),
    }
}

fn model(kind: PhysicsKind, rates: RelaxationRates) -> CollisionModel {
    CollisionModel::new(kind, -2.0, 1.0, rates, 1.0).unwrap()
}

fn params(m: &CollisionModel) -> ReferenceParams {
    ReferenceParams {
        alpha: m.alpha(),
        beta: m.beta(),
        lambda: m.lambda(),
        rates: m.rates(),
    }
}

const CASES: [(PhysicsKind, HalfwayScheme, &str); 4] = [
    (PhysicsKind::Thermal, HalfwayScheme::AntiBounceBack, "thermal ABB"),
    (PhysicsKind::Acoustic, HalfwayScheme::AntiBounceBack, "fluid ABB"),
    (PhysicsKind::Acoustic, HalfwayScheme::MixedBounceBack, "mixed"),
    (
        PhysicsKind::Acoustic,
        HalfwayScheme::PressureTangential,
        "pressure-tangential",
    ),
];

/// The moment matrix as printed, at `lambda = 1`.
const PRINTED_M: [[f64; Q]; Q] = [
    [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
    [0.0, 1.0, 0.0, -1.0, 0.0, 1.0, -1.0, -1.0, 1.0],
    [0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 1.0, -1.0, -1.0],
    [-4.0, -1.0, -1.0, -1.0, -1.0, 2.0, 2.0, 2.0, 2.0],
    [0.0, 1.0, -1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 1.0, -1.0],
    [0.0, -2.0, 0.0, 2.0, 0.0, 1.0, -1.0, -1.0, 1.0],
    [0.0, 0.0, -2.0, 0.0, 2.0, 1.0, 1.0, -1.0, -1.0],
    [4.0, -2.0, -2.0, -2.0, -2.0, 1.0, 1.0, 1.0, 1.0],
];

fn rates_for_trial(r: &mut ChaCha8Rng, trial: usize) -> RelaxationRates {
    if trial == 0 {
        RelaxationRates::heat_square()
    } else {
        random_rates(r, 0.5, 1.9)
    }
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let basis = build_moment_basis(1.0).unwrap();
    let dm = (basis.matrix() - Matrix9::from_fn(|i, j| PRINTED_M[i][j])).amax();
    c.check(dm < 1e-10, format!("M deviates by {dm:.1e}"));
    let mut r = rng(101);
    let mut worst = [0.0f64; 4];
    let mut k_mismatch: Vec<String> = Vec::new();
    for trial in 0..RATE_SETS {
        let rates = rates_for_trial(&mut r, trial);
        for kind in [PhysicsKind::Thermal, PhysicsKind::Acoustic] {
            let m = model(kind, rates);
            worst[0] = worst[0].max((m.collision_matrix() - collision_matrix(kind, &params(&m))).amax());
        }
        for (kind, scheme, name) in CASES {
            let m = model(kind, rates);
            let b = build_boundary_matrices(scheme, Wall::Bottom).unwrap();
            worst[1] = worst[1].max((b.t - t_matrix(scheme)).amax());
            worst[2] = worst[2].max((b.u - u_matrix()).amax());
            let a = LayerAnalysis::new(scheme, &m).unwrap();
            let printed = printed_k(kind, scheme, &params(&m)).unwrap();
            let d = a.k - printed;
            worst[3] = worst[3].max(d.amax());
            for i in 0..Q {
                for j in 0..Q {
                    if d[(i, j)].abs() > 1e-10 {
                        let e = format!("{name} K[{i}][{j}]");
                        if !k_mismatch.contains(&e) {
                            k_mismatch.push(e);
                        }
                    }
                }
            }
        }
    }
    c.check(worst[0] < 1e-10, format!("C deviates by {:.1e}", worst[0]));
    c.check(worst[1] < 1e-10, format!("T deviates by {:.1e}", worst[1]));
    c.check(worst[2] < 1e-10, format!("U deviates by {:.1e}", worst[2]));
    c.check(
        k_mismatch.is_empty(),
        format!(
            "printed K entries {} (printed values are inconsistent with K = I - M(T+U)M^-1 C)",
            k_mismatch.join(", ")
        ),
    );
    c.note(format!(
        "M {dm:.1e}, C {:.1e}, T {:.1e}, U {:.1e}, K max deviation {:.1e} over {RATE_SETS} rate sets",
        worst[0], worst[1], worst[2], worst[3]
    ));
    c.finish(t0, Duration::from_secs(1))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let mut r = rng(102);
    let mut dims_ok = true;
    let mut worst = 0.0f64;
    let mut bad_vectors: Vec<String> = Vec::new();
    for trial in 0..RATE_SETS {
        let rates = rates_for_trial(&mut r, trial);
        for ((kind, scheme, name), dim) in CASES.into_iter().zip([0, 2, 1, 1]) {
            let m = model(kind, rates);
            let a = LayerAnalysis::new(scheme, &m).unwrap();
            dims_ok &= a.kernel_dimension() == dim;
            let printed = printed_kernel(kind, scheme, &params(&m));
            for (got, want) in a.kernel.iter().zip(&printed) {
                let d = (got - Vector9::from(*want)).amax();
                worst = worst.max(d);
                if d > 1e-8 && !bad_vectors.contains(&name.to_string()) {
                    bad_vectors.push(name.to_string());
                }
            }
        }
    }
    c.check(dims_ok, "kernel dimensions differ from (0, 2, 1, 1)");
    c.check(
        bad_vectors.is_empty(),
        format!(
            "printed kernel vector of {} (the printed vector is not annihilated by K)",
            bad_vectors.join(", ")
        ),
    );
    c.note(format!("dimensions (0, 2, 1, 1); max kernel deviation {worst:.1e}"));
    c.finish(t0, Duration::from_secs(1))
}

fn thermal_channel_deviation() -> f64 {
    let n = 10;
    let edges = BoxEdges {
        bottom: EdgeCondition::wall(HalfwayScheme::AntiBounceBack, BoundaryDatum::density(0.0)),
        top: EdgeCondition::wall(HalfwayScheme::AntiBounceBack, BoundaryDatum::density(1.0)),
        left: EdgeCondition::Periodic,
        right: EdgeCondition::Periodic,
    };
    let m = model(PhysicsKind::Thermal, RelaxationRates::heat_square());
    let mut sim = Simulation::new(m, 3, n, 1.0 / n as f64, Geometry::Box(edges)).unwrap();
    sim.run(8000).unwrap();
    let f = sim.moment_fields();
    let mut dev = 0.0f64;
    for j in 0..n {
        for i in 0..3 {
            dev = dev.max((f.get(moment::RHO, i, j) - (j as f64 + 0.5) / n as f64).abs());
        }
    }
    dev
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let mut r = rng(103);
    let (mut m0_dev, mut coef_dev) = (0.0f64, 0.0f64);
    for trial in 0..RATE_SETS {
        let rates = rates_for_trial(&mut r, trial);
        let m = model(PhysicsKind::Thermal, rates);
        let a = LayerAnalysis::new(HalfwayScheme::AntiBounceBack, &m).unwrap();
        let rho0 = r.random_range(-2.0..2.0);
        let m0 = a
            .solve_order0(
                WallSample {
                    rho0,
                    ..Default::default()
                },
                &[],
            )
            .unwrap();
        let mut expect = Vector9::zeros();
        expect[moment::RHO] = rho0;
        expect[moment::EPSILON] = m.alpha() * rho0;
        expect[moment::D] = m.beta() * rho0;
        m0_dev = m0_dev.max((m0 - expect).amax());
        let m1 = a.first_order_correction(&unit_gradient(1)).unwrap();
        coef_dev = coef_dev.max((m1[moment::RHO] - 0.5).abs());
    }
    let channel = thermal_channel_deviation();
    c.check(m0_dev < 1e-12, format!("m0 deviates by {m0_dev:.1e}"));
    c.check(
        coef_dev < 1e-10,
        format!("d_y rho coefficient deviates by {coef_dev:.1e}"),
    );
    c.check(channel < 1e-10, format!("channel profile deviates by {channel:.1e}"));
    c.note(format!(
        "m0 {m0_dev:.1e}, coefficient 1/2 {coef_dev:.1e}, channel profile {channel:.1e}"
    ));
    c.finish(t0, Duration::from_secs(10))
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let mut r = rng(104);
    let (mut abb_dev, mut mixed_dev) = (0.0f64, 0.0f64);
    let mut hidden_ok = true;
    for _ in 0..RATE_SETS {
        let rates = random_rates(&mut r, 0.5, 1.9);
        let m = model(PhysicsKind::Acoustic, rates);
        let p = params(&m);
        let a = LayerAnalysis::new(HalfwayScheme::AntiBounceBack, &m).unwrap();
        let rho = |a: &LayerAnalysis, i| a.first_order_correction(&unit_gradient(i)).unwrap()[moment::RHO];
        if let Ok(ExpansionCoefficients::AntiBounceBack { a_jx, a_jy }) =
            reference_coefficients(HalfwayScheme::AntiBounceBack, &p)
        {
            abb_dev = abb_dev.max((rho(&a, 2) - a_jx).abs()).max((rho(&a, 5) - a_jy).abs());
        } else {
            hidden_ok = false;
        }
        // incompatibility exactly when d_x J_y + d_y J_x != 0
        for k in 0..6 {
            let mut g = WallGradients {
                rho: [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)],
                jx: [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)],
                jy: [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)],
            };
            let compatible = k % 2 == 0;
            if compatible {
                g.jx[1] = -g.jy[0];
            }
            match (compatible, a.first_order_correction(&g)) {
                (true, Ok(_)) => {}
                (false, Err(Error::Incompatible { violations })) => {
                    hidden_ok &= violations.len() == 1 && violations[0].relation.contains("g_phi_y");
                }
                _ => hidden_ok = false,
            }
        }
        for scheme in [HalfwayScheme::MixedBounceBack, HalfwayScheme::PressureTangential] {
            let a = LayerAnalysis::new(scheme, &m).unwrap();
            match reference_coefficients(scheme, &p) {
                Ok(ExpansionCoefficients::Mixed {
                    a_rho,
                    b_rho,
                    c_rho,
                    denominator,
                }) => {
                    mixed_dev = mixed_dev
                        .max((rho(&a, 1) - (0.5 + a_rho / denominator)).abs())
                        .max((rho(&a, 2) - b_rho / denominator).abs())
                        .max((rho(&a, 5) - c_rho / denominator).abs());
                }
                _ => mixed_dev = f64::INFINITY,
            }
        }
    }
    c.check(abb_dev < 1e-8, format!("a_jx/a_jy deviate by {abb_dev:.1e}"));
    c.check(
        mixed_dev < 1e-8,
        format!("a_rho/b_rho/c_rho deviate by {mixed_dev:.1e}"),
    );
    c.check(
        hidden_ok,
        "incompatibility not raised exactly when d_x J_y + d_y J_x != 0",
    );
    c.note(format!(
        "a_jx/a_jy {abb_dev:.1e}, a_rho/b_rho/c_rho {mixed_dev:.1e}, hidden condition detected exactly"
    ));
    c.finish(t0, Duration::from_secs(5))
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ExperimentConfig {
    parse_config(&configs_dir().join(name)).unwrap().config
}

fn heat_config() -> HeatSquareConfig {
    match load("heat_square.conf") {
        ExperimentConfig::HeatSquare(c) => c,
        other => panic!("unexpected config {other:?}"),
    }
}

fn disc_config() -> DiscConfig {
    match load("disc_modes.conf") {
        ExperimentConfig::DiscModes(c) => c,
        other => panic!("unexpected config {other:?}"),
    }
}

fn poiseuille_config(scheme: &str, n: usize) -> PoiseuilleConfig {
    match load(&format!("poiseuille_{scheme}_{n}.conf")) {
        ExperimentConfig::Poiseuille(c) => c,
        other => panic!("unexpected config {other:?}"),
    }
}

fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let r = run_heat_square(&heat_config(), 1, None).unwrap();
    c.check(
        r.leading_pairs_found == 10,
        format!("only {} of 10 leading pairs found", r.leading_pairs_found),
    );
    c.check(
        r.leading_max_abs_error < 2.5e-4,
        format!("max |eps| {:.3e} >= 2.5e-4", r.leading_max_abs_error),
    );
    c.check(r.linearity_r2 > 0.9, format!("R^2 {:.3}", r.linearity_r2));
    c.check(r.max_sigma_abs <= 1.0 + 1e-12, format!("|sigma| {}", r.max_sigma_abs));
    let first = r.modes.first().and_then(|m| m.rel_error).unwrap_or(f64::NAN);
    c.note(format!(
        "eps first mode {first:.3e}, max over first 10 pairs {:.3e}, R^2 {:.4}",
        r.leading_max_abs_error, r.linearity_r2
    ));
    c.finish(t0, MINUTES)
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let r = run_disc_modes(&disc_config(), 1, None).unwrap();
    let target = -0.03983758;
    match r.first {
        Some(i) => {
            let g = r.modes[i].gamma;
            // the printed value corresponds to -i gamma: decay rate -0.00019317, frequency 0.03983758
            let printed_re = -g.im.abs();
            let rel = (printed_re / target - 1.0).abs();
            c.check(
                rel < 0.05,
                format!("gamma component {printed_re:.8} is {:.2}% off", 100.0 * rel),
            );
            c.note(format!(
                "gamma = {:.8} {:+.8}i (printed convention {printed_re:.8} {:+.8}i)",
                g.re, g.im, -g.re
            ));
        }
        None => c.check(false, "no oscillating density mode found"),
    }
    c.check(
        r.radial_spread < 0.02,
        format!("per-radius spread {:.2}%", 100.0 * r.radial_spread),
    );
    c.check(
        r.tangential_ratio < 0.01,
        format!("tangential ratio {:.2}%", 100.0 * r.tangential_ratio),
    );
    c.check(r.max_sigma_abs <= 1.0 + 1e-12, format!("|sigma| {}", r.max_sigma_abs));
    c.note(format!(
        "spread {:.3}%, tangential {:.3}%, max |sigma| - 1 = {:.1e}",
        100.0 * r.radial_spread,
        100.0 * r.tangential_ratio,
        r.max_sigma_abs - 1.0
    ));
    c.finish(t0, MINUTES)
}

struct ChannelRuns {
    abb: Vec<(PoiseuilleReport, Duration)>,
    pt: Vec<(PoiseuilleReport, Duration)>,
}

fn channel_runs() -> ChannelRuns {
    let run = |scheme: &str| {
        MESHES
            .iter()
            .map(|&n| {
                let mut cfg = poiseuille_config(scheme, n);
                cfg.verify_doubling = true;
                let t = Instant::now();
                let r = run_poiseuille(&cfg, None).unwrap();
                (r, t.elapsed())
            })
            .collect::<Vec<_>>()
    };
    ChannelRuns {
        abb: run("abb"),
        pt: run("pt"),
    }
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn steady_state_checks(c: &mut Checks, runs: &[(PoiseuilleReport, Duration)]) {
    for ((r, t), n) in runs.iter().zip(MESHES) {
        c.check(*t <= MINUTES, format!("{n}: runtime {:.0} s", t.as_secs_f64()));
        let d = r.doubling_change.unwrap_or(f64::INFINITY);
        c.check(d < 1e-3, format!("{n}: metrics change {d:.1e} when doubling the steps"));
    }
}

fn criterion_7(runs: &ChannelRuns) -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let table3_bottom = [0.261, 0.582, 1.26];
    steady_state_checks(&mut c, &runs.abb);
    let mut lines = Vec::new();
    for (((r, t), n), bottom_ref) in runs.abb.iter().zip(MESHES).zip(table3_bottom) {
        let m = &r.metrics;
        let first = m.first_cell_pressure_error.abs();
        let fitted = m.gradient_rel_error.abs();
        let bottom = m.bottom.mean_offset();
        let center = m.center.mean_offset().abs();
        c.check(
            (0.13..=0.23).contains(&first),
            format!("{n}: first-cell error {:.2}%", 100.0 * first),
        );
        c.check(
            (0.04..=0.09).contains(&fitted),
            format!("{n}: fitted error {:.2}%", 100.0 * fitted),
        );
        c.check(
            (0.10..=0.25).contains(&m.ux_uy_ratio),
            format!("{n}: ux/uy {:.3}", m.ux_uy_ratio),
        );
        c.check(
            within(bottom, bottom_ref, 0.3),
            format!("{n}: bottom offset {bottom:.3}"),
        );
        c.check(center < 1e-2, format!("{n}: center offset {center:.2e}"));
        lines.push(format!(
            "{n}: first {:.1}% fitted {:.2}% ux/uy {:.3} bottom {bottom:.3} center {center:.2e} ({:.0} s)",
            100.0 * first,
            100.0 * fitted,
            m.ux_uy_ratio,
            t.as_secs_f64()
        ));
    }
    let bottoms: Vec<f64> = runs.abb.iter().map(|(r, _)| r.metrics.bottom.mean_offset()).collect();
    c.check(
        bottoms.windows(2).all(|w| w[1] > w[0]),
        "bottom offsets do not grow with refinement",
    );
    c.note(lines.join(" | "));
    c.finish(t0, MINUTES)
}

fn criterion_8(runs: &ChannelRuns) -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let table4 = [0.0669, 0.0362, 0.0190];
    let table5_bottom = [0.0165, 0.0608, 0.108];
    let table5_center = [4.56e-3, 2.40e-3, 1.33e-3];
    steady_state_checks(&mut c, &runs.pt);
    let mut lines = Vec::new();
    for (i, n) in MESHES.into_iter().enumerate() {
        let m = &runs.pt[i].0.metrics;
        let fitted = m.gradient_rel_error.abs();
        let bottom = m.bottom.mean_offset();
        let center = m.center.mean_offset().abs();
        let reduction = runs.abb[i].0.metrics.ux_uy_ratio / m.ux_uy_ratio;
        c.check(
            (fitted - table4[i]).abs() <= 0.015,
            format!("{n}: fitted error {:.2}% vs {:.2}%", 100.0 * fitted, 100.0 * table4[i]),
        );
        c.check(
            within(bottom, table5_bottom[i], 0.5),
            format!("{n}: bottom offset {bottom:.4} vs {}", table5_bottom[i]),
        );
        c.check(
            within(center, table5_center[i], 0.5),
            format!("{n}: center offset {center:.2e} vs {:.2e}", table5_center[i]),
        );
        c.check(reduction >= 5.0, format!("{n}: ux defect reduced {reduction:.1}x"));
        lines.push(format!(
            "{n}: fitted {:.2}% bottom {bottom:.4} center {center:.2e} ux/uy {:.4} ({reduction:.1}x below ABB, {:.0} s)",
            100.0 * fitted,
            m.ux_uy_ratio,
            runs.pt[i].1.as_secs_f64()
        ));
    }
    let fitted: Vec<f64> = runs
        .pt
        .iter()
        .map(|(r, _)| r.metrics.gradient_rel_error.abs())
        .collect();
    let centers: Vec<f64> = runs
        .pt
        .iter()
        .map(|(r, _)| r.metrics.center.mean_offset().abs())
        .collect();
    c.check(
        fitted.windows(2).all(|w| w[1] < w[0]),
        "fitted errors not strictly decreasing",
    );
    c.check(centers.windows(2).all(|w| w[1] < w[0]), "center offsets not decreasing");
    c.note(lines.join(" | "));
    c.finish(t0, MINUTES)
}

fn acoustic() -> CollisionModel {
    CollisionModel::acoustic(-2.0, 1.0, RelaxationRates::acoustic_quartic(), 1.0).unwrap()
}

fn thermal() -> CollisionModel {
    CollisionModel::thermal(-2.0, 1.0, RelaxationRates::heat_square(), 1.0).unwrap()
}

fn fixed_point_drift(mut sim: Simulation, rho: f64, jx: f64, jy: f64) -> f64 {
    sim.fill_equilibrium(rho, jx, jy);
    let before = sim.state_vector();
    sim.run(5).unwrap();
    before
        .iter()
        .zip(sim.state_vector())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn fixed_points() -> f64 {
    let (rho, jx, jy) = (0.4, 0.02, -0.05);
    let uniform = |s, d| Geometry::Box(BoxEdges::uniform(EdgeCondition::wall(s, d)));
    let full = || BoundaryDatum {
        rho0: rho.into(),
        jx0: jx.into(),
        jy0: jy.into(),
    };
    let mut worst = 0.0f64;
    for (scheme, datum) in [
        (HalfwayScheme::AntiBounceBack, BoundaryDatum::density(rho)),
        (HalfwayScheme::BounceBack, BoundaryDatum::momentum(jx, jy)),
        (HalfwayScheme::MixedBounceBack, full()),
    ] {
        let sim = Simulation::new(acoustic(), 6, 5, 0.2, uniform(scheme, datum)).unwrap();
        worst = worst.max(fixed_point_drift(sim, rho, jx, jy));
    }
    let pt = |t: f64| {
        EdgeCondition::wall(
            HalfwayScheme::PressureTangential,
            BoundaryDatum {
                rho0: rho.into(),
                jx0: t.into(),
                jy0: t.into(),
            },
        )
    };
    let edges = BoxEdges {
        bottom: pt(jx),
        top: pt(jx),
        left: pt(jy),
        right: pt(jy),
    };
    let sim = Simulation::new(acoustic(), 6, 5, 0.2, Geometry::Box(edges)).unwrap();
    worst = worst.max(fixed_point_drift(sim, rho, jx, jy));
    for (scheme, datum) in [
        (HalfwayScheme::AntiBounceBack, BoundaryDatum::density(rho)),
        (HalfwayScheme::BounceBack, BoundaryDatum::homogeneous()),
    ] {
        let sim = Simulation::new(thermal(), 5, 6, 0.2, uniform(scheme, datum)).unwrap();
        worst = worst.max(fixed_point_drift(sim, rho, 0.0, 0.0));
    }
    for interpolation in [Interpolation::Linear, Interpolation::Quadratic] {
        for (reflection, datum) in [
            (Reflection::AntiBounce, BoundaryDatum::density(rho)),
            (Reflection::Bounce, BoundaryDatum::momentum(jx, jy)),
        ] {
            let disc = DiscBoundary {
                geometry: discretize_disc(6.3, 19, 19, None, 2).unwrap(),
                reflection,
                interpolation,
                datum,
            };
            let sim = Simulation::new(acoustic(), 19, 19, 1.0, Geometry::Disc(disc)).unwrap();
            worst = worst.max(fixed_point_drift(sim, rho, jx, jy));
        }
    }
    worst
}

fn randomized(mut sim: Simulation, seed: u64) -> Simulation {
    let mut r = rng(seed);
    for f in sim.populations_mut() {
        *f = std::array::from_fn(|_| r.random_range(-1.0..1.0));
    }
    sim
}

fn conservation_drift() -> f64 {
    let mut worst = 0.0f64;
    for m in [thermal(), acoustic()] {
        let conserved = if m.kind() == PhysicsKind::Acoustic { 3 } else { 1 };
        let mut sim = randomized(
            Simulation::new(m, 8, 6, 0.1, Geometry::Box(BoxEdges::periodic())).unwrap(),
            5,
        );
        let totals = |s: &Simulation| {
            let f = s.moment_fields();
            [moment::RHO, moment::JX, moment::JY].map(|k| f.fields[k].iter().sum::<f64>())
        };
        let start = totals(&sim);
        for _ in 0..20 {
            sim.step().unwrap();
            let now = totals(&sim);
            for k in 0..conserved {
                worst = worst.max((now[k] - start[k]).abs());
            }
        }
    }
    worst
}

/// Largest deviation between the assembled matrix and direct stepping, and
/// between `A v` and the matrix product.
fn dense_equivalence() -> (f64, f64) {
    let h = BoundaryDatum::homogeneous;
    let cases = [
        (thermal(), 3, 3, BoxEdges::periodic()),
        (
            acoustic(),
            6,
            6,
            BoxEdges::uniform(EdgeCondition::wall(HalfwayScheme::MixedBounceBack, h())),
        ),
        (
            acoustic(),
            5,
            6,
            BoxEdges::uniform(EdgeCondition::wall(HalfwayScheme::PressureTangential, h())),
        ),
        (
            thermal(),
            6,
            5,
            BoxEdges::uniform(EdgeCondition::wall(HalfwayScheme::AntiBounceBack, h())),
        ),
    ];
    let (mut exact, mut product) = (0.0f64, 0.0f64);
    for (m, nx, ny, edges) in cases {
        let sim = Simulation::new(m, nx, ny, 0.5, Geometry::Box(edges)).unwrap();
        let mut op = StepOperator::new(&sim).unwrap();
        let a = assemble_dense(&mut op).unwrap();
        let n = op.dim();
        let mut direct = sim.clone();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            direct.set_state_vector(&e).unwrap();
            direct.step().unwrap();
            for (i, v) in direct.state_vector().iter().enumerate() {
                exact = exact.max((a[(i, j)] - v).abs());
            }
        }
        let mut r = rng(9);
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut y = vec![0.0; n];
        op.apply(&v, &mut y).unwrap();
        let p = &a * nalgebra::DVector::from_vec(v);
        product = product.max(y.iter().zip(p.iter()).map(|(x, z)| (x - z).abs()).fold(0.0, f64::max));
    }
    (exact, product)
}

fn eta_continuity() -> f64 {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v: [f64; 5] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let s = LinkSamples {
            out_here: v[0],
            out_next: v[1],
            out_next2: v[2],
            in_here: v[3],
            in_next: v[4],
        };
        for refl in [Reflection::Bounce, Reflection::AntiBounce] {
            for rule in [apply_extended_linear, apply_extended_quadratic] {
                let at = rule(0.5, refl, &s, 0.3).unwrap();
                for eta in [0.5 - 1e-9, 0.5 + 1e-9] {
                    worst = worst.max((rule(eta, refl, &s, 0.3).unwrap() - at).abs());
                }
            }
        }
    }
    worst
}

fn thread_determinism() -> bool {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let edges = BoxEdges::uniform(EdgeCondition::wall(
                    HalfwayScheme::PressureTangential,
                    BoundaryDatum::density(0.01),
                ));
                let mut sim = randomized(
                    Simulation::new(acoustic(), 64, 48, 0.1, Geometry::Box(edges)).unwrap(),
                    11,
                );
                sim.run(30).unwrap();
                sim.state_vector()
            })
    };
    let one = run(1);
    [2, 3, 8]
        .into_iter()
        .all(|t| run(t).iter().zip(&one).all(|(a, b)| a.to_bits() == b.to_bits()))
}

fn criterion_9() -> Outcome {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let basis = build_moment_basis(1.0).unwrap();
    let mut r = rng(8);
    let mut round_trip = 0.0f64;
    for _ in 0..100 {
        let f: [f64; Q] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let back = basis.from_moments(&basis.to_moments(&f));
        round_trip = back
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).abs())
            .fold(round_trip, f64::max);
    }
    let fixed = fixed_points();
    let conservation = conservation_drift();
    let (dense, product) = dense_equivalence();
    let eta = eta_continuity();
    let threads = thread_determinism();
    c.check(fixed < 1e-14, format!("fixed-point drift {fixed:.1e}"));
    c.check(round_trip < 1e-12, format!("round trip {round_trip:.1e}"));
    c.check(conservation < 1e-12, format!("conservation drift {conservation:.1e}"));
    c.check(dense == 0.0, format!("dense operator deviation {dense:.1e}"));
    c.check(product < 1e-13, format!("operator product deviation {product:.1e}"));
    c.check(eta < 1e-7, format!("eta jump {eta:.1e}"));
    c.check(threads, "results depend on the thread count");
    c.note(format!(
        "fixed points {fixed:.1e}, round trip {round_trip:.1e}, conservation {conservation:.1e}, \
         dense operator {dense:.1e}, eta continuity {eta:.1e}, thread determinism {threads}"
    ));
    c.finish(t0, Duration::from_secs(30))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Outcome {
            pass: false,
            detail: format!("error: {msg}"),
        }
    })
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let selected = |n: usize| filter.as_ref().is_none_or(|f| f == &n.to_string());
    let names = [
        "matrix fidelity",
        "kernel structure",
        "order-0/1 thermal expansion",
        "fluid ABB coefficients",
        "heat-square eigenmodes",
        "disc acoustic mode",
        "Poiseuille, pure ABB",
        "Poiseuille, pressure + tangential",
        "property suites",
    ];
    let mut runs: Option<ChannelRuns> = None;
    let mut failures = 0;
    for (i, name) in names.iter().enumerate() {
        let n = i + 1;
        if !selected(n) {
            continue;
        }
        let outcome = match n {
            1 => guarded(criterion_1),
            2 => guarded(criterion_2),
            3 => guarded(criterion_3),
            4 => guarded(criterion_4),
            5 => guarded(criterion_5),
            6 => guarded(criterion_6),
            7 | 8 => {
                if runs.is_none() {
                    runs = catch_unwind(channel_runs).ok();
                }
                match &runs {
                    Some(r) if n == 7 => guarded(|| criterion_7(r)),
                    Some(r) => guarded(|| criterion_8(r)),
                    None => Outcome {
                        pass: false,
                        detail: "channel runs failed".into(),
                    },
                }
            }
            _ => guarded(criterion_9),
        };
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {n} ({name}): {} - {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
