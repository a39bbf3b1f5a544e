//! Boundary-layer report for one wall rule and collision model.

use abbflow::analysis::reference::{reference_coefficients, ExpansionCoefficients, ReferenceParams};
use abbflow::analysis::{kernel_and_rank, unit_gradient, LayerAnalysis, RANK_TOLERANCE};
use abbflow::boundary::{HalfwayScheme, WallSample};
use abbflow::collision::PhysicsKind;
use abbflow::lattice::{moment, Vector9};

use crate::config::AnalyzeConfig;
use crate::error::Result;
use crate::output::{num, OutputDir, Summary};

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub analysis: LayerAnalysis,
    pub singular_values: Vec<f64>,
    /// Density coefficients of the order-1 correction next to their closed forms.
    pub coefficient_checks: Vec<(String, f64, f64)>,
    pub summary: Summary,
}

fn header_with(first: &[&'static str]) -> Vec<&'static str> {
    let mut h = first.to_vec();
    h.extend(moment::NAMES);
    h
}

fn entries(v: &Vector9) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| num(*x))
}

/// Analyzer density coefficients paired with the closed forms, where these exist.
fn coefficient_checks(a: &LayerAnalysis, cfg: &AnalyzeConfig) -> Result<Vec<(String, f64, f64)>> {
    if cfg.model.kind != PhysicsKind::Acoustic || cfg.scheme == HalfwayScheme::BounceBack {
        return Ok(Vec::new());
    }
    let p = ReferenceParams {
        alpha: cfg.model.alpha,
        beta: cfg.model.beta,
        lambda: cfg.model.lambda,
        rates: cfg.model.rates,
    };
    let rho = |i: usize| -> Result<f64> { Ok(a.first_order_correction(&unit_gradient(i))?[moment::RHO]) };
    Ok(match reference_coefficients(cfg.scheme, &p)? {
        ExpansionCoefficients::AntiBounceBack { a_jx, a_jy } => vec![
            ("dy_rho".into(), rho(1)?, 0.5),
            ("a_jx".into(), rho(2)?, a_jx),
            ("a_jy".into(), rho(5)?, a_jy),
        ],
        ExpansionCoefficients::Mixed {
            a_rho,
            b_rho,
            c_rho,
            denominator,
        } => vec![
            ("dy_rho".into(), rho(1)?, 0.5 + a_rho / denominator),
            ("dx_jx".into(), rho(2)?, b_rho / denominator),
            ("dy_jy".into(), rho(5)?, c_rho / denominator),
        ],
    })
}

pub fn run_analyze(cfg: &AnalyzeConfig, out: Option<(&OutputDir, &str)>) -> Result<AnalyzeReport> {
    let model = cfg.model.build()?;
    let a = LayerAnalysis::new(cfg.scheme, &model)?;
    let info = kernel_and_rank(&a.k, RANK_TOLERANCE);
    let checks = coefficient_checks(&a, cfg)?;
    let units: [(&str, WallSample); 3] = [
        (
            "rho0",
            WallSample {
                rho0: 1.0,
                ..Default::default()
            },
        ),
        (
            "jx0",
            WallSample {
                jx0: 1.0,
                ..Default::default()
            },
        ),
        (
            "jy0",
            WallSample {
                jy0: 1.0,
                ..Default::default()
            },
        ),
    ];
    let gauge_zero = vec![0.0; a.gauge.len()];
    let order0: Vec<(&str, abbflow::Result<Vector9>)> = units
        .iter()
        .map(|(n, d)| (*n, a.solve_order0(*d, &gauge_zero)))
        .collect();
    let order1 = a.first_order_table();

    let mut summary = Summary::new("analyze");
    summary
        .add("scheme", format!("{:?}", cfg.scheme))
        .add("model", format!("{:?}", cfg.model.kind))
        .add("rank", a.rank)
        .add("kernel_dimension", a.kernel_dimension())
        .add(
            "gauge",
            a.gauge.iter().map(|&i| moment::NAMES[i]).collect::<Vec<_>>().join(" "),
        )
        .add(
            "singular_values",
            info.singular_values
                .iter()
                .map(|s| num(*s))
                .collect::<Vec<_>>()
                .join(" "),
        )
        .add(
            "relations",
            a.relations
                .iter()
                .map(|r| r.name.as_str())
                .collect::<Vec<_>>()
                .join("; "),
        );
    for (name, res) in &order0 {
        let v = match res {
            Ok(m) => num(m[moment::RHO]),
            Err(e) => e.to_string(),
        };
        summary.add(format!("order0_rho_for_unit_{name}"), v);
    }
    for (name, analyzer, reference) in &checks {
        summary
            .add_num(format!("coefficient_{name}_analyzer"), *analyzer)
            .add_num(format!("coefficient_{name}_closed_form"), *reference);
    }

    if let Some((dir, source)) = out {
        dir.write_csv(
            "k_matrix.csv",
            &header_with(&["row"]),
            a.k.row_iter().enumerate().map(|(i, r)| {
                let mut row = vec![moment::NAMES[i].to_string()];
                row.extend(r.iter().map(|x| num(*x)));
                row
            }),
        )?;
        dir.write_csv(
            "kernel.csv",
            &header_with(&["vector"]),
            a.kernel.iter().enumerate().map(|(i, v)| {
                let mut row = vec![i.to_string()];
                row.extend(entries(v));
                row
            }),
        )?;
        dir.write_csv(
            "relations.csv",
            &header_with(&["relation"]),
            a.relations.iter().map(|r| {
                let mut row = vec![r.name.clone()];
                row.extend(entries(&r.coefficients));
                row
            }),
        )?;
        let solution_rows = |rows: Vec<(&str, &abbflow::Result<Vector9>)>| {
            rows.into_iter()
                .map(|(name, res)| {
                    let mut row = vec![name.to_string()];
                    match res {
                        Ok(m) => {
                            row.push("ok".into());
                            row.extend(entries(m));
                        }
                        Err(e) => {
                            row.push(e.to_string());
                            row.extend(std::iter::repeat_n(String::new(), 9));
                        }
                    }
                    row
                })
                .collect::<Vec<_>>()
        };
        dir.write_csv(
            "order0.csv",
            &header_with(&["unit_datum", "status"]),
            solution_rows(order0.iter().map(|(n, r)| (*n, r)).collect()),
        )?;
        dir.write_csv(
            "order1.csv",
            &header_with(&["unit_gradient", "status"]),
            solution_rows(order1.iter().map(|(n, r)| (*n, r)).collect()),
        )?;
        dir.write_csv(
            "coefficients.csv",
            &["coefficient", "analyzer", "closed_form"],
            checks.iter().map(|(n, a, r)| vec![n.clone(), num(*a), num(*r)]),
        )?;
        dir.write_summary(&summary, source)?;
    }

    Ok(AnalyzeReport {
        analysis: a,
        singular_values: info.singular_values,
        coefficient_checks: checks,
        summary,
    })
}
