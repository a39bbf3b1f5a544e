//! Boundary-layer analysis of halfway rules at a bottom wall.
//!
//! A node next to the wall updates as
//! `f = T f* + U f*(x - v dt) + xi`. Expanding in `dx` gives, in moment space,
//! `K m = M xi_0 + dt (M d_xi - d_t m - B^a d_a m) + O(dx^2)` with
//! `K = I - M (T + U) M^-1 C` and `B^a = M U diag(v^a) M^-1 C`.

pub mod reference;

use nalgebra::SVD;

use crate::boundary::{halfway_xi, HalfwayScheme, Wall, WallSample, XiParams};
use crate::collision::{CollisionModel, PhysicsKind};
use crate::error::{Error, Result, Violation};
use crate::lattice::{moment, Matrix9, MomentBasis, Stencil, Vector9, Q};

/// Relative singular-value threshold used for rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// `T`, `U` and the blocked direction set of a wall rule.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrices {
    pub t: Matrix9,
    pub u: Matrix9,
    pub blocked: [usize; 3],
}

/// Builds `T` and `U` for `scheme` on a bottom wall.
pub fn build_boundary_matrices(scheme: HalfwayScheme, wall: Wall) -> Result<BoundaryMatrices> {
    if wall != Wall::Bottom {
        return Err(Error::Unsupported(format!(
            "boundary matrices are built for the bottom wall only, got {wall:?}"
        )));
    }
    let blocked = wall.blocked();
    let mut u = Matrix9::zeros();
    for j in 0..Q {
        if !blocked.contains(&j) {
            u[(j, j)] = 1.0;
        }
    }
    let mut t = Matrix9::zeros();
    for &q in &blocked {
        let o = Stencil::opposite(q);
        t[(q, o)] = scheme.reflection(wall, q).sign();
        if scheme.needs_node_momentum() && q != wall.normal_direction() {
            // xi contains (v_q . n)(n . j) / (6 lambda), with j = lambda sum_l v_ly f_l
            for l in 0..Q {
                t[(q, l)] += Stencil::velocity(l)[1] as f64 / 6.0;
            }
        }
    }
    Ok(BoundaryMatrices { t, u, blocked })
}

/// `K = I - M (T + U) M^-1 C`.
pub fn build_k(t: &Matrix9, u: &Matrix9, c: &Matrix9, basis: &MomentBasis) -> Matrix9 {
    Matrix9::identity() - basis.matrix() * (t + u) * basis.inverse_matrix() * c
}

/// `B^1` and `B^2`.
pub fn build_advection_matrices(u: &Matrix9, c: &Matrix9, basis: &MomentBasis) -> (Matrix9, Matrix9) {
    let l = basis.lambda();
    let vx = Matrix9::from_diagonal(&Vector9::from_fn(|j, _| l * Stencil::velocity(j)[0] as f64));
    let vy = Matrix9::from_diagonal(&Vector9::from_fn(|j, _| l * Stencil::velocity(j)[1] as f64));
    let m = basis.matrix();
    let tail = basis.inverse_matrix() * c;
    (m * u * vx * tail, m * u * vy * tail)
}

/// Rank, right kernel and left kernel of a 9x9 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInfo {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub kernel: Vec<Vector9>,
    pub left_kernel: Vec<Vector9>,
}

/// Rank-revealing decomposition with singular values below `tol * sigma_max` treated as zero.
pub fn kernel_and_rank(k: &Matrix9, tol: f64) -> KernelInfo {
    let svd = SVD::new(*k, true, true);
    let u = svd.u.expect("left vectors requested");
    let v_t = svd.v_t.expect("right vectors requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut kernel = Vec::new();
    let mut left_kernel = Vec::new();
    let mut rank = 0;
    for (i, &s) in sigma.iter().enumerate() {
        if s > tol * smax {
            rank += 1;
        } else {
            kernel.push(v_t.row(i).transpose());
            left_kernel.push(u.column(i).into_owned());
        }
    }
    KernelInfo {
        rank,
        singular_values: sigma,
        kernel,
        left_kernel,
    }
}

/// `<l, g>` for every left-kernel vector `l` of `k`.
pub fn compatibility(k: &Matrix9, g: &Vector9) -> Vec<f64> {
    kernel_and_rank(k, RANK_TOLERANCE)
        .left_kernel
        .iter()
        .map(|l| l.dot(g))
        .collect()
}

/// A named linear relation `<coefficients, g> = 0` that right-hand sides must satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub name: String,
    pub coefficients: Vector9,
}

/// Gradients of the conserved fields at the wall: `[d/dx, d/dy]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WallGradients {
    pub rho: [f64; 2],
    pub jx: [f64; 2],
    pub jy: [f64; 2],
}

/// Full analysis of one (rule, model) pair at a bottom wall.
#[derive(Debug, Clone)]
pub struct LayerAnalysis {
    scheme: HalfwayScheme,
    model: CollisionModel,
    pub matrices: BoundaryMatrices,
    pub c: Matrix9,
    pub k: Matrix9,
    pub b1: Matrix9,
    pub b2: Matrix9,
    pub rank: usize,
    /// Kernel basis normalised so that its restriction to `gauge` is the identity.
    pub kernel: Vec<Vector9>,
    /// Moment indices whose values fix the kernel component of solutions.
    pub gauge: Vec<usize>,
    pub relations: Vec<Relation>,
    svd: SVD<f64, nalgebra::Const<9>, nalgebra::Const<9>>,
}

impl LayerAnalysis {
    pub fn new(scheme: HalfwayScheme, model: &CollisionModel) -> Result<Self> {
        let matrices = build_boundary_matrices(scheme, Wall::Bottom)?;
        let basis = model.basis();
        let c = model.collision_matrix();
        let k = build_k(&matrices.t, &matrices.u, &c, basis);
        let (b1, b2) = build_advection_matrices(&matrices.u, &c, basis);
        let info = kernel_and_rank(&k, RANK_TOLERANCE);
        let gauge = choose_gauge(&info.kernel)?;
        let kernel = normalise_kernel(&info.kernel, &gauge)?;
        let relations = named_relations(scheme, model, &k, &info.left_kernel);
        Ok(Self {
            scheme,
            model: model.clone(),
            matrices,
            c,
            k,
            b1,
            b2,
            rank: info.rank,
            kernel,
            gauge,
            relations,
            svd: SVD::new(k, true, true),
        })
    }

    pub fn scheme(&self) -> HalfwayScheme {
        self.scheme
    }

    pub fn model(&self) -> &CollisionModel {
        &self.model
    }

    pub fn kernel_dimension(&self) -> usize {
        self.kernel.len()
    }

    /// Residual of each named relation on `g`.
    pub fn relation_residuals(&self, g: &Vector9) -> Vec<(String, f64)> {
        self.relations
            .iter()
            .map(|r| (r.name.clone(), r.coefficients.dot(g)))
            .collect()
    }

    /// Solves `K m = g` with `m[gauge[i]] = gauge_values[i]`.
    pub fn solve(&self, g: &Vector9, gauge_values: &[f64]) -> Result<Vector9> {
        if gauge_values.len() != self.gauge.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} gauge values, got {}",
                self.gauge.len(),
                gauge_values.len()
            )));
        }
        let tol = (RANK_TOLERANCE * g.amax()).max(1e-14);
        let violations: Vec<Violation> = self
            .relation_residuals(g)
            .into_iter()
            .filter(|(_, r)| r.abs() > tol)
            .map(|(relation, residual)| Violation { relation, residual })
            .collect();
        if !violations.is_empty() {
            return Err(Error::Incompatible { violations });
        }
        let smax = self.svd.singular_values.max();
        let mut m = self
            .svd
            .solve(g, RANK_TOLERANCE * smax)
            .map_err(|e| Error::Contract(e.to_string()))?;
        let shift: Vec<f64> = self.gauge.iter().zip(gauge_values).map(|(&i, &v)| v - m[i]).collect();
        for (kv, s) in self.kernel.iter().zip(shift) {
            m += kv * s;
        }
        Ok(m)
    }

    /// Data term of the rule on the three blocked links; the node-momentum
    /// part of the pressure + tangential rule is carried by `T`.
    pub fn xi(&self, data: WallSample) -> [f64; Q] {
        let p = XiParams::from_model(&self.model);
        let mut xi = [0.0; Q];
        for &q in &self.matrices.blocked {
            xi[q] = halfway_xi(self.scheme, &p, Wall::Bottom, q, data, [0.0; 2]);
        }
        xi
    }

    /// First-order data correction: the diagonal links sample the wall data
    /// half a cell away from the node, `xi_q(x1 - v_qx dx / 2)`.
    pub fn d_xi(&self, tangential_derivative: WallSample) -> [f64; Q] {
        let l = self.model.lambda();
        let mut d = self.xi(tangential_derivative);
        for (q, dq) in d.iter_mut().enumerate() {
            *dq *= -0.5 * l * Stencil::velocity(q)[0] as f64;
        }
        d
    }

    /// Order-0 moments `K m0 = M xi0`.
    pub fn solve_order0(&self, data: WallSample, gauge_values: &[f64]) -> Result<Vector9> {
        let rhs = self.model.basis().matrix() * Vector9::from(self.xi(data));
        self.solve(&rhs, gauge_values)
    }

    /// Order-1 right-hand side `M d_xi - d_t m0 - B^1 d_x m0 - B^2 d_y m0`.
    pub fn order1_rhs(&self, grad: &WallGradients, dt_m0: &Vector9) -> Vector9 {
        let eq = |r: f64, jx: f64, jy: f64| self.model.equilibrium_from(r, jx, jy).to_vector();
        let dx_m0 = eq(grad.rho[0], grad.jx[0], grad.jy[0]);
        let dy_m0 = eq(grad.rho[1], grad.jx[1], grad.jy[1]);
        let d_xi = self.d_xi(WallSample {
            rho0: grad.rho[0],
            jx0: grad.jx[0],
            jy0: grad.jy[0],
        });
        self.model.basis().matrix() * Vector9::from(d_xi) - dt_m0 - self.b1 * dx_m0 - self.b2 * dy_m0
    }

    /// Order-1 correction `m1` with its kernel component fixed by `gauge_values`.
    pub fn solve_order1(&self, grad: &WallGradients, dt_m0: &Vector9, gauge_values: &[f64]) -> Result<Vector9> {
        self.solve(&self.order1_rhs(grad, dt_m0), gauge_values)
    }

    /// `d_t m0` implied by the first-order bulk equations (zero for the thermal model,
    /// whose evolution is diffusive and enters at higher order).
    pub fn bulk_time_derivative(&self, grad: &WallGradients) -> Vector9 {
        match self.model.kind() {
            PhysicsKind::Thermal => Vector9::zeros(),
            PhysicsKind::Acoustic => {
                let c0sq = self
                    .model
                    .transport_coefficients(1.0)
                    .map(|t| t.sound_speed_sq)
                    .unwrap_or(0.0);
                self.model
                    .equilibrium_from(-(grad.jx[0] + grad.jy[1]), -c0sq * grad.rho[0], -c0sq * grad.rho[1])
                    .to_vector()
            }
        }
    }

    /// Order-1 correction with `d_t m0` from the bulk equations and zero gauge.
    pub fn first_order_correction(&self, grad: &WallGradients) -> Result<Vector9> {
        let dt = self.bulk_time_derivative(grad);
        self.solve_order1(grad, &dt, &vec![0.0; self.gauge.len()])
    }

    /// Per-gradient coefficients of the order-1 density and momentum
    /// corrections, in the order `(d_x rho, d_y rho, d_x jx, d_y jx, d_x jy, d_y jy)`.
    ///
    /// Unit gradients that break a compatibility relation are reported as `Err`.
    pub fn first_order_table(&self) -> Vec<(&'static str, Result<Vector9>)> {
        GRADIENT_NAMES
            .iter()
            .enumerate()
            .map(|(i, &name)| (name, self.first_order_correction(&unit_gradient(i))))
            .collect()
    }
}

/// Names of the six wall gradients, matching [`unit_gradient`].
pub const GRADIENT_NAMES: [&str; 6] = ["dx_rho", "dy_rho", "dx_jx", "dy_jx", "dx_jy", "dy_jy"];

/// Unit gradient number `i` in the order of [`GRADIENT_NAMES`].
pub fn unit_gradient(i: usize) -> WallGradients {
    let mut g = WallGradients::default();
    match i {
        0 => g.rho[0] = 1.0,
        1 => g.rho[1] = 1.0,
        2 => g.jx[0] = 1.0,
        3 => g.jx[1] = 1.0,
        4 => g.jy[0] = 1.0,
        5 => g.jy[1] = 1.0,
        _ => {}
    }
    g
}

/// Picks kernel-fixing moment indices, preferring the momentum components.
fn choose_gauge(kernel: &[Vector9]) -> Result<Vec<usize>> {
    let preference = [
        moment::JY,
        moment::JX,
        moment::RHO,
        moment::EPSILON,
        moment::PHI_X,
        moment::PHI_Y,
        moment::QX,
        moment::QY,
        moment::D,
    ];
    let mut chosen: Vec<usize> = Vec::new();
    for &idx in &preference {
        if chosen.len() == kernel.len() {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(idx);
        if restriction(kernel, &trial).rank(1e-8) == trial.len() {
            chosen = trial;
        }
    }
    if chosen.len() != kernel.len() {
        return Err(Error::Contract("could not fix the kernel gauge".into()));
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Matrix with entry `(r, c)` equal to `kernel[c][rows[r]]`.
fn restriction(kernel: &[Vector9], rows: &[usize]) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(rows.len(), kernel.len(), |r, c| kernel[c][rows[r]])
}

fn normalise_kernel(kernel: &[Vector9], gauge: &[usize]) -> Result<Vec<Vector9>> {
    if kernel.is_empty() {
        return Ok(Vec::new());
    }
    let n = nalgebra::DMatrix::from_fn(Q, kernel.len(), |r, c| kernel[c][r]);
    let inv = restriction(kernel, gauge)
        .try_inverse()
        .ok_or_else(|| Error::Contract("singular gauge restriction".into()))?;
    let normalised = n * inv;
    Ok((0..gauge.len())
        .map(|c| Vector9::from_fn(|r, _| normalised[(r, c)]))
        .collect())
}

/// Compatibility relations with readable names where the structure is known,
/// otherwise the raw left-kernel vectors.
fn named_relations(
    scheme: HalfwayScheme,
    model: &CollisionModel,
    k: &Matrix9,
    left_kernel: &[Vector9],
) -> Vec<Relation> {
    let l = model.lambda();
    let s_x = model.rates().s_x;
    let e = |i: usize| Vector9::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
    let candidates: Vec<Relation> = match (model.kind(), scheme) {
        (PhysicsKind::Acoustic, HalfwayScheme::AntiBounceBack) => vec![
            Relation {
                name: "lambda g_rho - g_jy = 0".into(),
                coefficients: e(moment::RHO) * l - e(moment::JY),
            },
            Relation {
                name: "lambda g_jx + (s_x - 1) g_phi_y = 0".into(),
                coefficients: e(moment::JX) * l + e(moment::PHI_Y) * (s_x - 1.0),
            },
        ],
        (PhysicsKind::Acoustic, HalfwayScheme::MixedBounceBack)
        | (PhysicsKind::Acoustic, HalfwayScheme::PressureTangential) => vec![Relation {
            name: "lambda g_rho - g_jy = 0".into(),
            coefficients: e(moment::RHO) * l - e(moment::JY),
        }],
        _ => Vec::new(),
    };
    let valid = candidates.len() == left_kernel.len()
        && candidates.iter().all(|r| {
            let row = r.coefficients.transpose() * k;
            row.amax() <= 1e-10 * k.amax() * r.coefficients.amax()
        });
    if valid {
        candidates
    } else {
        left_kernel
            .iter()
            .enumerate()
            .map(|(i, v)| Relation {
                name: format!("left kernel vector {i}"),
                coefficients: *v,
            })
            .collect()
    }
}
