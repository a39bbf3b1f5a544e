//! Halfway and interpolated boundary rules for the D2Q9 scheme.
//!
//! All rules are written in pull notation: for a fluid node `x` and an
//! incoming direction `q` whose upstream neighbour `x - v_q` lies outside the
//! fluid, the rule supplies `f_q(x, t + dt)` from post-collision values at
//! time `t`. The outgoing direction `o = opposite(q)` points at the wall.

pub mod disc;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{Stencil, Q};

/// Smallest wall fraction accepted by the interpolated rules.
pub const ETA_MIN: f64 = 0.01;

/// Straight wall orientation, named after the side of the domain it closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    Bottom,
    Top,
    Left,
    Right,
}

impl Wall {
    pub const ALL: [Wall; 4] = [Wall::Bottom, Wall::Top, Wall::Left, Wall::Right];

    /// Unit normal pointing into the fluid.
    pub fn inward_normal(self) -> [i32; 2] {
        match self {
            Wall::Bottom => [0, 1],
            Wall::Top => [0, -1],
            Wall::Left => [1, 0],
            Wall::Right => [-1, 0],
        }
    }

    /// Incoming directions whose upstream neighbour lies behind this wall.
    pub fn blocked(self) -> [usize; 3] {
        match self {
            Wall::Bottom => [2, 5, 6],
            Wall::Top => [4, 7, 8],
            Wall::Left => [1, 5, 8],
            Wall::Right => [3, 6, 7],
        }
    }

    pub fn blocks(self, q: usize) -> bool {
        self.blocked().contains(&q)
    }

    /// The blocked direction normal to the wall.
    pub fn normal_direction(self) -> usize {
        self.blocked()[0]
    }
}

/// A scalar boundary field of (arc position, time).
#[derive(Clone, Default)]
pub enum WallField {
    #[default]
    Zero,
    Constant(f64),
    Function(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl WallField {
    pub fn function(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        WallField::Function(Arc::new(f))
    }

    #[inline]
    pub fn sample(&self, s: f64, t: f64) -> f64 {
        match self {
            WallField::Zero => 0.0,
            WallField::Constant(c) => *c,
            WallField::Function(f) => f(s, t),
        }
    }

    /// True when the field is identically zero by construction.
    pub fn is_zero(&self) -> bool {
        match self {
            WallField::Zero => true,
            WallField::Constant(c) => *c == 0.0,
            WallField::Function(_) => false,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        !matches!(self, WallField::Function(_))
    }
}

impl fmt::Debug for WallField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WallField::Zero => write!(f, "Zero"),
            WallField::Constant(c) => write!(f, "Constant({c})"),
            WallField::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl From<f64> for WallField {
    fn from(v: f64) -> Self {
        WallField::Constant(v)
    }
}

/// Boundary data: density (or temperature) and both momentum components.
#[derive(Debug, Clone, Default)]
pub struct BoundaryDatum {
    pub rho0: WallField,
    pub jx0: WallField,
    pub jy0: WallField,
}

/// Boundary data evaluated at one crossing point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WallSample {
    pub rho0: f64,
    pub jx0: f64,
    pub jy0: f64,
}

impl BoundaryDatum {
    pub fn homogeneous() -> Self {
        Self::default()
    }

    pub fn density(rho0: impl Into<WallField>) -> Self {
        Self {
            rho0: rho0.into(),
            ..Self::default()
        }
    }

    pub fn momentum(jx0: impl Into<WallField>, jy0: impl Into<WallField>) -> Self {
        Self {
            jx0: jx0.into(),
            jy0: jy0.into(),
            ..Self::default()
        }
    }

    #[inline]
    pub fn sample(&self, s: f64, t: f64) -> WallSample {
        WallSample {
            rho0: self.rho0.sample(s, t),
            jx0: self.jx0.sample(s, t),
            jy0: self.jy0.sample(s, t),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rho0.is_zero() && self.jx0.is_zero() && self.jy0.is_zero()
    }

    pub fn is_time_independent(&self) -> bool {
        self.rho0.is_time_independent() && self.jx0.is_time_independent() && self.jy0.is_time_independent()
    }
}

/// Model constants entering the data terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl XiParams {
    pub fn from_model(model: &crate::collision::CollisionModel) -> Self {
        Self {
            alpha: model.alpha(),
            beta: model.beta(),
            lambda: model.lambda(),
        }
    }
}

#[inline]
fn is_axis(q: usize) -> bool {
    (1..=4).contains(&q)
}

/// Data term of anti bounce back for direction `q`, given the wall density.
#[inline]
pub fn xi_abb_coefficient(p: &XiParams, q: usize) -> f64 {
    if is_axis(q) {
        (4.0 - p.alpha - 2.0 * p.beta) / 18.0
    } else {
        (4.0 + 2.0 * p.alpha + p.beta) / 18.0
    }
}

/// `xi_q` for anti bounce back with wall density `rho0`.
pub fn xi_abb(p: &XiParams, wall: Wall, q: usize, rho0: f64) -> Result<f64> {
    check_blocked(wall, q)?;
    Ok(xi_abb_coefficient(p, q) * rho0)
}

/// `xi_q` for bounce back with wall momentum `(jx0, jy0)`.
#[inline]
pub fn xi_bb_raw(p: &XiParams, q: usize, jx0: f64, jy0: f64) -> f64 {
    let [vx, vy] = Stencil::velocity(q);
    let w6 = if is_axis(q) { 2.0 / 3.0 } else { 1.0 / 6.0 };
    w6 * (vx as f64 * jx0 + vy as f64 * jy0) / p.lambda
}

pub fn xi_bb(p: &XiParams, wall: Wall, q: usize, jx0: f64, jy0: f64) -> Result<f64> {
    check_blocked(wall, q)?;
    Ok(xi_bb_raw(p, q, jx0, jy0))
}

fn check_blocked(wall: Wall, q: usize) -> Result<()> {
    if q >= Q || !wall.blocks(q) {
        return Err(Error::Contract(format!(
            "direction {q} does not cross the {wall:?} wall"
        )));
    }
    Ok(())
}

/// Reflection sign of a rule: `+1` bounce back, `-1` anti bounce back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reflection {
    Bounce,
    AntiBounce,
}

impl Reflection {
    pub fn sign(self) -> f64 {
        match self {
            Reflection::Bounce => 1.0,
            Reflection::AntiBounce => -1.0,
        }
    }
}

/// Rules for walls located half a cell beyond the last fluid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfwayScheme {
    BounceBack,
    AntiBounceBack,
    /// Anti bounce back on the normal link, bounce back on the diagonals.
    MixedBounceBack,
    /// Pressure and tangential momentum imposed; normal momentum taken from the node.
    PressureTangential,
}

impl HalfwayScheme {
    /// Reflection used on link `q` of `wall`.
    pub fn reflection(self, wall: Wall, q: usize) -> Reflection {
        match self {
            HalfwayScheme::BounceBack => Reflection::Bounce,
            HalfwayScheme::AntiBounceBack => Reflection::AntiBounce,
            HalfwayScheme::MixedBounceBack | HalfwayScheme::PressureTangential => {
                if q == wall.normal_direction() {
                    Reflection::AntiBounce
                } else {
                    Reflection::Bounce
                }
            }
        }
    }

    pub fn needs_node_momentum(self) -> bool {
        self == HalfwayScheme::PressureTangential
    }
}

/// Data term of a halfway rule on link `q`.
///
/// `node_j` is the current momentum of the boundary node; only the
/// pressure + tangential scheme reads it.
#[inline]
pub fn halfway_xi(
    scheme: HalfwayScheme,
    p: &XiParams,
    wall: Wall,
    q: usize,
    data: WallSample,
    node_j: [f64; 2],
) -> f64 {
    match scheme.reflection(wall, q) {
        Reflection::AntiBounce => xi_abb_coefficient(p, q) * data.rho0,
        Reflection::Bounce => {
            let (jx, jy) = if scheme == HalfwayScheme::PressureTangential {
                // keep the tangential part of the data, the normal part of the node
                match wall {
                    Wall::Bottom | Wall::Top => (data.jx0, node_j[1]),
                    Wall::Left | Wall::Right => (node_j[0], data.jy0),
                }
            } else {
                (data.jx0, data.jy0)
            };
            xi_bb_raw(p, q, jx, jy)
        }
    }
}

/// `f_q(x, t+dt)` for a halfway wall.
#[inline]
pub fn halfway_link_value(
    scheme: HalfwayScheme,
    p: &XiParams,
    wall: Wall,
    q: usize,
    f_out: f64,
    data: WallSample,
    node_j: [f64; 2],
) -> f64 {
    scheme.reflection(wall, q).sign() * f_out + halfway_xi(scheme, p, wall, q, data, node_j)
}

/// Position along a straight wall of the crossing point of link `q` leaving `node`
/// (physical coordinates of the node; cell spacing `dx`).
pub fn crossing_arc_position(wall: Wall, q: usize, node: [f64; 2], dx: f64) -> f64 {
    let [vx, vy] = Stencil::velocity(q);
    match wall {
        Wall::Bottom | Wall::Top => node[0] - 0.5 * dx * vx as f64,
        Wall::Left | Wall::Right => node[1] - 0.5 * dx * vy as f64,
    }
}

fn apply_halfway_wall(
    scheme: HalfwayScheme,
    p: &XiParams,
    wall: Wall,
    f_star: &[f64; Q],
    data: &[WallSample; 3],
    node_j: [f64; 2],
) -> [(usize, f64); 3] {
    let b = wall.blocked();
    std::array::from_fn(|k| {
        let q = b[k];
        let v = halfway_link_value(scheme, p, wall, q, f_star[Stencil::opposite(q)], data[k], node_j);
        (q, v)
    })
}

/// Anti bounce back at a halfway wall. `data[k]` is sampled at the crossing
/// point of `wall.blocked()[k]`. Returns `(direction, value)` pairs.
pub fn apply_abb_halfway(p: &XiParams, wall: Wall, f_star: &[f64; Q], data: &[WallSample; 3]) -> [(usize, f64); 3] {
    apply_halfway_wall(HalfwayScheme::AntiBounceBack, p, wall, f_star, data, [0.0; 2])
}

pub fn apply_bb_halfway(p: &XiParams, wall: Wall, f_star: &[f64; Q], data: &[WallSample; 3]) -> [(usize, f64); 3] {
    apply_halfway_wall(HalfwayScheme::BounceBack, p, wall, f_star, data, [0.0; 2])
}

pub fn apply_mixed_bbabb(p: &XiParams, wall: Wall, f_star: &[f64; Q], data: &[WallSample; 3]) -> [(usize, f64); 3] {
    apply_halfway_wall(HalfwayScheme::MixedBounceBack, p, wall, f_star, data, [0.0; 2])
}

/// Pressure + tangential momentum rule; `node_j` is the node's own momentum.
pub fn apply_pressure_tangential(
    p: &XiParams,
    wall: Wall,
    f_star: &[f64; Q],
    node_j: [f64; 2],
    data: &[WallSample; 3],
) -> [(usize, f64); 3] {
    apply_halfway_wall(HalfwayScheme::PressureTangential, p, wall, f_star, data, node_j)
}

/// Post-collision values needed by the interpolated rules on one link.
///
/// `out_*` are values of the outgoing direction `o` at `x`, `x + v_q` and
/// `x + 2 v_q`; `in_*` are values of the incoming direction `q` at `x` and
/// `x + v_q`. Entries that a branch does not read may hold any value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkSamples {
    pub out_here: f64,
    pub out_next: f64,
    pub out_next2: f64,
    pub in_here: f64,
    pub in_next: f64,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param("eta", format!("must lie in (0, 1], got {eta}")));
    }
    Ok(())
}

/// Interpolated rule assuming a linear variation along the link.
pub fn apply_extended_linear(eta: f64, reflection: Reflection, s: &LinkSamples, xi: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(extended_linear(eta, reflection.sign(), s, xi))
}

/// Interpolated rule assuming a parabolic variation along the link.
pub fn apply_extended_quadratic(eta: f64, reflection: Reflection, s: &LinkSamples, xi: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(extended_quadratic(eta, reflection.sign(), s, xi))
}

#[inline]
pub(crate) fn extended_linear(eta: f64, sign: f64, s: &LinkSamples, xi: f64) -> f64 {
    if eta <= 0.5 {
        sign * (2.0 * eta * s.out_here + (1.0 - 2.0 * eta) * s.out_next) + xi
    } else {
        let h = 1.0 / (2.0 * eta);
        sign * h * s.out_here + (1.0 - h) * s.in_here + h * xi
    }
}

#[inline]
pub(crate) fn extended_quadratic(eta: f64, sign: f64, s: &LinkSamples, xi: f64) -> f64 {
    if eta <= 0.5 {
        sign * (eta * (1.0 + 2.0 * eta) * s.out_here + (1.0 - 4.0 * eta * eta) * s.out_next
            - eta * (1.0 - 2.0 * eta) * s.out_next2)
            + xi
    } else {
        (sign * s.out_here + xi) / (eta * (1.0 + 2.0 * eta))
            + (2.0 - 1.0 / eta) * s.in_here
            + (1.0 - 2.0 * eta) / (1.0 + 2.0 * eta) * s.in_next
    }
}

/// Interpolation order of the extended rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    Quadratic,
}

/// Clamps a geometric wall fraction into `[ETA_MIN, 1]`.
pub fn clamp_eta(eta: f64) -> f64 {
    eta.clamp(ETA_MIN, 1.0)
}
