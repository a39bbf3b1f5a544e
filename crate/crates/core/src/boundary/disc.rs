//! Cut links of a disc embedded in a Cartesian grid.

use crate::error::{Error, Result};
use crate::lattice::{Stencil, Q};

use super::clamp_eta;

/// A link from a fluid node whose upstream neighbour lies outside the fluid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLink {
    pub node: [usize; 2],
    /// Incoming direction supplied by the boundary rule.
    pub q: usize,
    /// Fraction of the outgoing link lying inside the fluid, clamped.
    pub eta: f64,
    /// Unclamped geometric fraction.
    pub eta_geometric: f64,
    /// Grid coordinates of the point where the link meets the wall.
    pub crossing: [f64; 2],
}

/// Disc of fluid nodes; node `(i, j)` sits at grid coordinates `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscGeometry {
    pub nx: usize,
    pub ny: usize,
    pub center: [f64; 2],
    pub radius: f64,
    pub links: Vec<BoundaryLink>,
}

impl DiscGeometry {
    /// Strict interior test used for fluid nodes.
    pub fn contains(&self, i: i64, j: i64) -> bool {
        inside(self.center, self.radius, i as f64, j as f64)
    }

    /// Arc-length coordinate of a point on the circle.
    pub fn arc_position(&self, p: [f64; 2]) -> f64 {
        self.radius * (p[1] - self.center[1]).atan2(p[0] - self.center[0])
    }
}

#[inline]
fn inside(c: [f64; 2], r: f64, x: f64, y: f64) -> bool {
    let dx = x - c[0];
    let dy = y - c[1];
    dx * dx + dy * dy < r * r
}

/// Center midway between the two middle nodes in both axes (for even sizes).
pub fn default_center(nx: usize, ny: usize) -> [f64; 2] {
    [(nx as f64 - 1.0) / 2.0, (ny as f64 - 1.0) / 2.0]
}

/// Finds every cut link of a disc of radius `radius` (cell units).
///
/// `margin` is the number of empty cells required between the disc and the
/// grid edge (2 when quadratic rules will be used).
pub fn discretize_disc(
    radius: f64,
    nx: usize,
    ny: usize,
    center: Option<[f64; 2]>,
    margin: usize,
) -> Result<DiscGeometry> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("radius", format!("must be positive, got {radius}")));
    }
    let c = center.unwrap_or_else(|| default_center(nx, ny));
    let m = margin as f64;
    if c[0] - radius - m < 0.0
        || c[1] - radius - m < 0.0
        || c[0] + radius + m > nx as f64 - 1.0
        || c[1] + radius + m > ny as f64 - 1.0
    {
        return Err(Error::Configuration(format!(
            "disc of radius {radius} at ({}, {}) does not fit a {nx}x{ny} grid with margin {margin}",
            c[0], c[1]
        )));
    }
    let mut links = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = (i as f64, j as f64);
            if !inside(c, radius, x, y) {
                continue;
            }
            for q in 1..Q {
                let [vx, vy] = Stencil::velocity(q).map(|v| v as f64);
                if inside(c, radius, x - vx, y - vy) {
                    continue;
                }
                let eta_geometric = link_fraction(c, radius, [x, y], [-vx, -vy]);
                links.push(BoundaryLink {
                    node: [i, j],
                    q,
                    eta: clamp_eta(eta_geometric),
                    eta_geometric,
                    crossing: [x - eta_geometric * vx, y - eta_geometric * vy],
                });
            }
        }
    }
    Ok(DiscGeometry {
        nx,
        ny,
        center: c,
        radius,
        links,
    })
}

/// Smallest positive `t` with `|x + t d - c| = r`, for `x` strictly inside.
fn link_fraction(c: [f64; 2], r: f64, x: [f64; 2], d: [f64; 2]) -> f64 {
    let px = x[0] - c[0];
    let py = x[1] - c[1];
    let a = d[0] * d[0] + d[1] * d[1];
    let b = px * d[0] + py * d[1];
    let cc = px * px + py * py - r * r;
    let disc = (b * b - a * cc).max(0.0);
    ((-b + disc.sqrt()) / a).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_disc_axis_links() {
        let g = discretize_disc(1.5, 9, 9, Some([4.0, 4.0]), 1).unwrap();
        // axis neighbours of the center pointing outward along the same axis
        for (node, q) in [([5, 4], 3), ([3, 4], 1), ([4, 5], 4), ([4, 3], 2)] {
            let l = g.links.iter().find(|l| l.node == node && l.q == q).unwrap();
            assert!((l.eta - 0.5).abs() < 1e-14, "{l:?}");
        }
    }

    #[test]
    fn tangent_link_has_unit_fraction() {
        // upstream node (6, 4) lies exactly on the circle
        let g = discretize_disc(2.0, 9, 9, Some([4.0, 4.0]), 1).unwrap();
        let l = g.links.iter().find(|l| l.node == [5, 4] && l.q == 3).unwrap();
        assert!((l.eta - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_large_disc_rejected() {
        assert!(matches!(
            discretize_disc(10.0, 16, 16, None, 1),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn crossing_points_lie_on_circle() {
        let g = discretize_disc(7.3, 20, 20, None, 2).unwrap();
        for l in &g.links {
            let r = ((l.crossing[0] - g.center[0]).powi(2) + (l.crossing[1] - g.center[1]).powi(2)).sqrt();
            assert!((r - 7.3).abs() < 1e-10);
            assert!(l.eta > 0.0 && l.eta <= 1.0);
        }
    }
}
