//! Closed-form reference values for the bottom-wall boundary analysis.
//!
//! These are transcriptions kept independent of the numeric pipeline in the
//! parent module; tests compare the two.

use crate::boundary::HalfwayScheme;
use crate::collision::{PhysicsKind, RelaxationRates};
use crate::error::{Error, Result};
use crate::lattice::Matrix9;

/// Model constants used by the reference formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub rates: RelaxationRates,
}

fn rows(r: [[f64; 9]; 9]) -> Matrix9 {
    Matrix9::from_fn(|i, j| r[i][j])
}

/// Collision matrix in its tabulated form.
pub fn collision_matrix(kind: PhysicsKind, p: &ReferenceParams) -> Matrix9 {
    let RelaxationRates {
        s_j,
        s_e,
        s_x,
        s_q,
        s_d,
    } = p.rates;
    let (a, b, l) = (p.alpha, p.beta, p.lambda);
    let l2 = l * l;
    let (c11, c61) = match kind {
        PhysicsKind::Thermal => (1.0 - s_j, 0.0),
        PhysicsKind::Acoustic => (1.0, -s_q * l2),
    };
    rows([
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, c11, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, c11, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [a * s_e * l2, 0.0, 0.0, 1.0 - s_e, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0 - s_x, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.0 - s_x, 0.0, 0.0, 0.0],
        [0.0, c61, 0.0, 0.0, 0.0, 0.0, 1.0 - s_q, 0.0, 0.0],
        [0.0, 0.0, c61, 0.0, 0.0, 0.0, 0.0, 1.0 - s_q, 0.0],
        [b * s_d * l2 * l2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0 - s_d],
    ])
}

/// Selection matrix of interior streaming for the bottom wall.
pub fn u_matrix() -> Matrix9 {
    Matrix9::from_diagonal(&[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0].into())
}

/// Same-node interaction matrix for the bottom wall.
pub fn t_matrix(scheme: HalfwayScheme) -> Matrix9 {
    let mut t = Matrix9::zeros();
    match scheme {
        HalfwayScheme::AntiBounceBack => {
            t[(2, 4)] = -1.0;
            t[(5, 7)] = -1.0;
            t[(6, 8)] = -1.0;
        }
        HalfwayScheme::BounceBack => {
            t[(2, 4)] = 1.0;
            t[(5, 7)] = 1.0;
            t[(6, 8)] = 1.0;
        }
        HalfwayScheme::MixedBounceBack => {
            t[(2, 4)] = -1.0;
            t[(5, 7)] = 1.0;
            t[(6, 8)] = 1.0;
        }
        HalfwayScheme::PressureTangential => {
            let s = 1.0 / 6.0;
            t[(2, 4)] = -1.0;
            let r5 = [0.0, 0.0, s, 0.0, -s, s, s, 5.0 * s, -s];
            let r6 = [0.0, 0.0, s, 0.0, -s, s, s, -s, 5.0 * s];
            for k in 0..9 {
                t[(5, k)] = r5[k];
                t[(6, k)] = r6[k];
            }
        }
    }
    t
}

/// Tabulated K for (thermal, ABB), (acoustic, ABB), (acoustic, mixed) and
/// (acoustic, pressure + tangential), entry by entry as printed.
pub fn printed_k(kind: PhysicsKind, scheme: HalfwayScheme, p: &ReferenceParams) -> Result<Matrix9> {
    let RelaxationRates {
        s_j,
        s_e,
        s_x,
        s_q,
        s_d,
    } = p.rates;
    let (a, b, l) = (p.alpha, p.beta, p.lambda);
    let (l2, l3, l4) = (l * l, l * l * l, l * l * l * l);
    let z = 0.0;
    let k = match (kind, scheme) {
        (PhysicsKind::Thermal, HalfwayScheme::AntiBounceBack)
        | (PhysicsKind::Acoustic, HalfwayScheme::AntiBounceBack) => {
            let thermal = kind == PhysicsKind::Thermal;
            let (k11, k22) = if thermal { (s_j, s_j) } else { (z, z) };
            let (k61, k72) = if thermal { (z, z) } else { (l2 * s_q, l2 * s_q) };
            rows([
                [
                    (4.0 + a * s_e) / 6.0,
                    z,
                    z,
                    (1.0 - s_e) / (6.0 * l2),
                    (s_x - 1.0) / (2.0 * l2),
                    z,
                    z,
                    z,
                    z,
                ],
                [z, k11, z, z, z, (1.0 - s_x) / l, z, z, z],
                [
                    l * (4.0 + a * s_e) / 6.0,
                    z,
                    k22,
                    (1.0 - s_e) / (6.0 * l),
                    (s_x - 1.0) / (2.0 * l),
                    z,
                    z,
                    z,
                    z,
                ],
                [
                    l2 * (4.0 - 3.0 * a * s_e + 2.0 * b * s_d) / 6.0,
                    z,
                    z,
                    (s_e + 1.0) / 2.0,
                    (1.0 - s_x) / 2.0,
                    z,
                    z,
                    z,
                    (1.0 - s_d) / (3.0 * l2),
                ],
                [
                    l2 * (-4.0 + a * s_e + 2.0 * b * s_d) / 18.0,
                    z,
                    z,
                    (1.0 - s_e) / 18.0,
                    (1.0 + s_x) / 2.0,
                    z,
                    z,
                    z,
                    (1.0 - s_d) / (9.0 * l2),
                ],
                [z, z, z, z, z, 1.0, z, z, z],
                [z, k61, z, z, z, l * (1.0 - s_x), s_q, z, z],
                [
                    l3 * (a * s_e + b * s_d) / 3.0,
                    z,
                    k72,
                    l * (1.0 - s_e) / 3.0,
                    l * (1.0 - s_x),
                    z,
                    z,
                    s_q,
                    (1.0 - s_d) / (3.0 * l),
                ],
                [
                    l4 * (a * s_e - 2.0 * b * s_d) / 3.0,
                    z,
                    z,
                    l2 * (1.0 - s_e) / 3.0,
                    l2 * (1.0 - s_x),
                    z,
                    z,
                    z,
                    (1.0 + 2.0 * s_d) / 3.0,
                ],
            ])
        }
        (PhysicsKind::Acoustic, HalfwayScheme::MixedBounceBack)
        | (PhysicsKind::Acoustic, HalfwayScheme::PressureTangential) => {
            let mixed = scheme == HalfwayScheme::MixedBounceBack;
            // entries where the two tables differ
            let k02 = if mixed {
                (2.0 - s_q) / (3.0 * l)
            } else {
                (1.0 - s_q) / (3.0 * l)
            };
            let k22 = if mixed { (2.0 - s_q) / 3.0 } else { (1.0 - s_q) / 3.0 };
            let k32 = if mixed {
                l * (4.0 - 2.0 * s_q) / 3.0
            } else {
                2.0 * l * (1.0 - s_q) / 3.0
            };
            let k38 = if mixed {
                (1.0 - s_d) / (3.0 * l2)
            } else {
                (1.0 - s_d) / (9.0 * l2)
            };
            let k72 = if mixed {
                2.0 * l2 * (1.0 + s_q) / 3.0
            } else {
                l2 * (1.0 + 2.0 * s_q) / 3.0
            };
            let k82 = if mixed {
                l3 * (2.0 - s_q) / 3.0
            } else {
                l3 * (1.0 - s_q) / 3.0
            };
            let head = (4.0 - a * s_e - 2.0 * b * s_d) / 18.0;
            rows([
                [
                    head,
                    z,
                    k02,
                    (s_e - 1.0) / (18.0 * l2),
                    (s_x - 1.0) / (2.0 * l2),
                    z,
                    z,
                    (1.0 - s_q) / (3.0 * l3),
                    (s_d - 1.0) / (9.0 * l4),
                ],
                [z, (2.0 - s_q) / 3.0, z, z, z, z, (1.0 - s_q) / (3.0 * l2), z, z],
                [
                    l * head,
                    z,
                    k22,
                    (s_e - 1.0) / (18.0 * l),
                    (s_x - 1.0) / (2.0 * l),
                    z,
                    z,
                    (1.0 - s_q) / (3.0 * l2),
                    (s_d - 1.0) / (9.0 * l3),
                ],
                [
                    l2 * (-4.0 - 17.0 * a * s_e + 2.0 * b * s_d) / 18.0,
                    z,
                    k32,
                    (1.0 + 17.0 * s_e) / 18.0,
                    (1.0 - s_x) / 2.0,
                    z,
                    z,
                    2.0 * (1.0 - s_q) / (3.0 * l),
                    k38,
                ],
                [
                    l2 * (-4.0 + a * s_e + 2.0 * b * s_d) / 18.0,
                    z,
                    z,
                    (1.0 - s_e) / 18.0,
                    (1.0 + s_x) / 2.0,
                    z,
                    z,
                    z,
                    (1.0 - s_d) / (9.0 * l2),
                ],
                [z, l * (2.0 - s_q) / 3.0, z, z, z, s_x, (1.0 - s_q) / (3.0 * l), z, z],
                [
                    z,
                    2.0 * l2 * (1.0 + s_q) / 3.0,
                    z,
                    z,
                    z,
                    z,
                    (1.0 + 2.0 * s_q) / 3.0,
                    z,
                    z,
                ],
                [
                    l3 * (-4.0 + a * s_e + 2.0 * b * s_d) / 9.0,
                    z,
                    k72,
                    l * (1.0 - s_e) / 9.0,
                    l * (1.0 - s_x),
                    z,
                    z,
                    (1.0 + 2.0 * s_q) / 3.0,
                    2.0 * (1.0 - s_d) / (9.0 * l),
                ],
                [
                    l4 * (-4.0 + a * s_e - 7.0 * b * s_d) / 9.0,
                    z,
                    k82,
                    l2 * (1.0 - s_e) / 3.0,
                    l2 * (1.0 - s_x),
                    z,
                    z,
                    l * (1.0 - s_q) / 3.0,
                    (2.0 + 7.0 * s_d) / 9.0,
                ],
            ])
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "no tabulated K for {kind:?} with {scheme:?}"
            )))
        }
    };
    Ok(k)
}

/// Entries of [`printed_k`] that disagree with `I - M (T + U) M^-1 C`,
/// with the value the definition gives.
pub fn printed_k_corrections(
    kind: PhysicsKind,
    scheme: HalfwayScheme,
    p: &ReferenceParams,
) -> Vec<((usize, usize), f64)> {
    let RelaxationRates { s_e, s_d, .. } = p.rates;
    let l2 = p.lambda * p.lambda;
    match (kind, scheme) {
        (PhysicsKind::Acoustic, HalfwayScheme::MixedBounceBack) => {
            vec![((3, 8), (1.0 - s_d) / (9.0 * l2)), ((8, 3), l2 * (1.0 - s_e) / 9.0)]
        }
        (PhysicsKind::Acoustic, HalfwayScheme::PressureTangential) => {
            vec![((8, 3), l2 * (1.0 - s_e) / 9.0)]
        }
        _ => Vec::new(),
    }
}

/// Kernel vectors of K as tabulated: `kappa_x`, `kappa_y` for acoustic ABB,
/// `kappa` for mixed, `kappa_y` for pressure + tangential.
pub fn printed_kernel(kind: PhysicsKind, scheme: HalfwayScheme, p: &ReferenceParams) -> Vec<[f64; 9]> {
    let l = p.lambda;
    let l2 = l * l;
    let kappa_x = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -l2, 0.0, 0.0];
    let kappa_y = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -l2, 0.0];
    match (kind, scheme) {
        (PhysicsKind::Acoustic, HalfwayScheme::AntiBounceBack) => vec![kappa_x, kappa_y],
        (PhysicsKind::Acoustic, HalfwayScheme::PressureTangential) => vec![kappa_y],
        (PhysicsKind::Acoustic, HalfwayScheme::MixedBounceBack) => {
            let RelaxationRates { s_e, s_x, s_q, s_d, .. } = p.rates;
            let (a, b) = (p.alpha, p.beta);
            let den = s_d * s_e * s_x * (a + 2.0 * b - 4.0);
            vec![[
                (3.0 * s_e * s_d + 2.0 * s_e * s_x + s_d * s_x) * s_q / (l * den),
                0.0,
                1.0,
                l * (3.0 * a * s_e * s_d + 2.0 * a * s_e * s_x - 2.0 * b * s_d * s_x + 4.0 * s_d * s_x) * s_q / den,
                l * s_q / (3.0 * s_x),
                0.0,
                0.0,
                -2.0 * l2,
                -l2 * l * (a * s_e * s_x - 3.0 * b * s_e * s_d - b * s_d * s_x - 4.0 * s_e * s_x) * s_q / den,
            ]]
        }
        _ => Vec::new(),
    }
}

/// Closed-form first-cell density coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpansionCoefficients {
    /// Acoustic anti bounce back: coefficients of `dx Jx` and `dy Jy`.
    AntiBounceBack { a_jx: f64, a_jy: f64 },
    /// Mixed and pressure + tangential: numerators and their common denominator
    /// `s_x s_e s_d (alpha + 2 beta - 4)`.
    Mixed {
        a_rho: f64,
        b_rho: f64,
        c_rho: f64,
        denominator: f64,
    },
}

/// Evaluates the closed forms for `scheme` (acoustic model).
pub fn reference_coefficients(scheme: HalfwayScheme, p: &ReferenceParams) -> Result<ExpansionCoefficients> {
    let RelaxationRates { s_e, s_x, s_q, s_d, .. } = p.rates;
    let (a, b) = (p.alpha, p.beta);
    match scheme {
        HalfwayScheme::AntiBounceBack => {
            let den = 8.0 * (s_e * s_x + s_e * s_d + s_x * s_d)
                + 2.0 * (s_e * s_x + 2.0 * s_e * s_d) * a
                + 2.0 * (s_e * s_d - s_x * s_d) * b;
            if den.abs() < 1e-300 {
                return Err(Error::SingularParameters("a_jx/a_jy denominator vanishes".into()));
            }
            let common = 2.0 * (s_e * s_x + 2.0 * s_e * s_d - s_x - 2.0 * s_d) * a
                + 2.0 * (s_e * s_d - s_x * s_d - s_e + s_x) * b;
            let a_jx = (6.0 * s_e * s_x + 5.0 * s_e * s_d + 7.0 * s_x * s_d - 6.0 * s_e + 2.0 * s_x - 8.0 * s_d
                + common)
                / den;
            let a_jy =
                (2.0 * s_e * s_x + 5.0 * s_e * s_d - s_x * s_d + 2.0 * s_e + 2.0 * s_x + 8.0 * s_d + common) / den;
            Ok(ExpansionCoefficients::AntiBounceBack { a_jx, a_jy })
        }
        HalfwayScheme::MixedBounceBack | HalfwayScheme::PressureTangential => {
            let denominator = s_x * s_e * s_d * (a + 2.0 * b - 4.0);
            if denominator.abs() < 1e-300 {
                return Err(Error::SingularParameters(
                    "s_x s_e s_d (alpha + 2 beta - 4) vanishes".into(),
                ));
            }
            let a_rho = (-4.0 * (2.0 * s_e * s_x + 3.0 * s_e * s_d + s_x * s_d)
                + (2.0 * s_e * s_x * s_q + 3.0 * s_e * s_q * s_d + s_x * s_q * s_d
                    - 6.0 * s_e * s_x
                    - 9.0 * s_e * s_d
                    - 3.0 * s_x * s_d)
                    * a
                + (2.0 * s_e * s_x * s_q + 3.0 * s_e * s_q * s_d + s_x * s_q * s_d
                    - 4.0 * s_e * s_x
                    - 6.0 * s_e * s_d
                    - 2.0 * s_x * s_d)
                    * b)
                / 6.0;
            let b_rho = 2.0 * s_e * (3.0 * s_d - 2.0 * s_x * s_d - s_x)
                + s_x * s_d * (s_e - 1.0) * a
                + 2.0 * s_e * s_x * (s_d - 1.0) * b;
            let c_rho = (4.0 * s_e * s_x * s_d
                - 2.0 * s_e * s_x * s_q
                - 3.0 * s_e * s_q * s_d
                - s_x * s_q * s_d
                - 4.0 * s_e * s_x
                - 12.0 * s_e * s_d
                + 2.0 * s_x * s_d * (s_e - 1.0) * a
                + 4.0 * (s_d - 1.0) * s_e * s_x * b)
                / 2.0;
            Ok(ExpansionCoefficients::Mixed {
                a_rho,
                b_rho,
                c_rho,
                denominator,
            })
        }
        HalfwayScheme::BounceBack => Err(Error::Unsupported(
            "no closed-form density expansion for bounce back".into(),
        )),
    }
}

/// Entries of [`printed_kernel`] that are not annihilated by K, as
/// `((vector, entry), corrected value)`.
pub fn printed_kernel_corrections(
    kind: PhysicsKind,
    scheme: HalfwayScheme,
    p: &ReferenceParams,
) -> Vec<((usize, usize), f64)> {
    match (kind, scheme) {
        (PhysicsKind::Acoustic, HalfwayScheme::MixedBounceBack) => {
            vec![((0, 4), -p.lambda * p.rates.s_q / (3.0 * p.rates.s_x))]
        }
        _ => Vec::new(),
    }
}
