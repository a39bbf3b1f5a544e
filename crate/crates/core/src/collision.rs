//! Linear MRT collision for the thermal (heat) and acoustic (linear fluid) models.

use crate::error::{Error, Result};
use crate::lattice::{mat_vec, moment, Matrix9, MomentBasis, MomentVector, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhysicsKind {
    /// Only the density (temperature) is conserved.
    Thermal,
    /// Density and both momentum components are conserved.
    Acoustic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationRates {
    pub s_j: f64,
    pub s_e: f64,
    pub s_x: f64,
    pub s_q: f64,
    pub s_d: f64,
}

/// Rate for the stress moments that cancels the leading anisotropic errors.
pub fn quartic_s_x() -> f64 {
    1.0 / (3f64.sqrt() / 6.0 + 0.5)
}

/// Rate for the heat-flux moments paired with [`quartic_s_x`].
pub fn quartic_s_q() -> f64 {
    1.0 / (3f64.sqrt() / 3.0 + 0.5)
}

/// Companion parameter `1/s - 1/2`.
pub fn sigma(s: f64) -> f64 {
    1.0 / s - 0.5
}

impl RelaxationRates {
    /// Rates of the thermal square eigenmode experiment.
    pub fn heat_square() -> Self {
        Self {
            s_j: 1.2,
            s_e: 1.3,
            s_x: quartic_s_x(),
            s_q: quartic_s_q(),
            s_d: 1.7,
        }
    }

    /// Quartic stress and flux rates with `s_e = s_d = 1.3`; `s_j` is unused by the acoustic model.
    pub fn acoustic_quartic() -> Self {
        Self {
            s_j: 1.0,
            s_e: 1.3,
            s_x: quartic_s_x(),
            s_q: quartic_s_q(),
            s_d: 1.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionModel {
    kind: PhysicsKind,
    alpha: f64,
    beta: f64,
    rates: RelaxationRates,
    basis: MomentBasis,
    rate_vector: [f64; Q],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportCoefficients {
    pub diffusivity: f64,
    pub sound_speed_sq: f64,
    pub shear_viscosity: f64,
    pub bulk_viscosity: f64,
}

impl CollisionModel {
    pub fn new(kind: PhysicsKind, alpha: f64, beta: f64, rates: RelaxationRates, lambda: f64) -> Result<Self> {
        let basis = MomentBasis::new(lambda)?;
        let mut checked: Vec<(&'static str, f64)> = vec![
            ("s_e", rates.s_e),
            ("s_x", rates.s_x),
            ("s_q", rates.s_q),
            ("s_d", rates.s_d),
        ];
        if kind == PhysicsKind::Thermal {
            checked.insert(0, ("s_j", rates.s_j));
        }
        for (name, s) in checked {
            if !(s > 0.0 && s < 2.0) {
                return Err(Error::param(
                    name,
                    format!("relaxation rate must lie in (0, 2), got {s}"),
                ));
            }
        }
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        let s_j = match kind {
            PhysicsKind::Thermal => rates.s_j,
            PhysicsKind::Acoustic => 0.0,
        };
        let rate_vector = [
            0.0, s_j, s_j, rates.s_e, rates.s_x, rates.s_x, rates.s_q, rates.s_q, rates.s_d,
        ];
        Ok(Self {
            kind,
            alpha,
            beta,
            rates,
            basis,
            rate_vector,
        })
    }

    pub fn thermal(alpha: f64, beta: f64, rates: RelaxationRates, lambda: f64) -> Result<Self> {
        Self::new(PhysicsKind::Thermal, alpha, beta, rates, lambda)
    }

    pub fn acoustic(alpha: f64, beta: f64, rates: RelaxationRates, lambda: f64) -> Result<Self> {
        Self::new(PhysicsKind::Acoustic, alpha, beta, rates, lambda)
    }

    pub fn kind(&self) -> PhysicsKind {
        self.kind
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn rates(&self) -> RelaxationRates {
        self.rates
    }
    pub fn lambda(&self) -> f64 {
        self.basis.lambda()
    }
    pub fn basis(&self) -> &MomentBasis {
        &self.basis
    }

    /// Number of conserved moments (1 or 3).
    pub fn conserved_count(&self) -> usize {
        match self.kind {
            PhysicsKind::Thermal => 1,
            PhysicsKind::Acoustic => 3,
        }
    }

    /// Equilibrium moments for the conserved values `(rho)` or `(rho, jx, jy)`.
    pub fn equilibrium_moments(&self, conserved: &[f64]) -> Result<MomentVector> {
        if conserved.len() != self.conserved_count() {
            return Err(Error::InvalidArgument(format!(
                "{:?} model expects {} conserved values, got {}",
                self.kind,
                self.conserved_count(),
                conserved.len()
            )));
        }
        let (rho, jx, jy) = match self.kind {
            PhysicsKind::Thermal => (conserved[0], 0.0, 0.0),
            PhysicsKind::Acoustic => (conserved[0], conserved[1], conserved[2]),
        };
        Ok(self.equilibrium_from(rho, jx, jy))
    }

    /// Equilibrium for given `(rho, jx, jy)`; momentum is ignored by the thermal model.
    #[inline]
    pub fn equilibrium_from(&self, rho: f64, jx: f64, jy: f64) -> MomentVector {
        let l2 = self.lambda() * self.lambda();
        let mut m = [0.0; Q];
        m[moment::RHO] = rho;
        m[moment::EPSILON] = self.alpha * l2 * rho;
        m[moment::D] = self.beta * l2 * l2 * rho;
        if self.kind == PhysicsKind::Acoustic {
            m[moment::JX] = jx;
            m[moment::JY] = jy;
            m[moment::QX] = -l2 * jx;
            m[moment::QY] = -l2 * jy;
        }
        MomentVector(m)
    }

    pub fn equilibrium_populations(&self, conserved: &[f64]) -> Result<[f64; Q]> {
        Ok(self.basis.from_moments(&self.equilibrium_moments(conserved)?))
    }

    /// Per-moment relaxation rates; zero for conserved moments.
    pub fn rate_vector(&self) -> [f64; Q] {
        self.rate_vector
    }

    /// `m*_k = m_k + s_k (m_k^eq - m_k)`.
    #[inline]
    pub fn relax(&self, m: &MomentVector) -> MomentVector {
        let eq = self.equilibrium_from(m.0[0], m.0[1], m.0[2]);
        let s = &self.rate_vector;
        let mut out = m.0;
        for k in 0..Q {
            if s[k] != 0.0 {
                out[k] = (1.0 - s[k]) * m.0[k] + s[k] * eq.0[k];
            }
        }
        MomentVector(out)
    }

    /// Post-collision populations.
    #[inline]
    pub fn collide(&self, f: &[f64; Q]) -> [f64; Q] {
        let m = self.basis.to_moments(f);
        self.basis.from_moments(&self.relax(&m))
    }

    /// Matrix C with `C m = relax(m)`.
    pub fn collision_matrix(&self) -> Matrix9 {
        let l = self.lambda();
        let l2 = l * l;
        let r = &self.rates;
        let mut c = Matrix9::zeros();
        c[(0, 0)] = 1.0;
        match self.kind {
            PhysicsKind::Thermal => {
                c[(1, 1)] = 1.0 - r.s_j;
                c[(2, 2)] = 1.0 - r.s_j;
            }
            PhysicsKind::Acoustic => {
                c[(1, 1)] = 1.0;
                c[(2, 2)] = 1.0;
                c[(6, 1)] = -r.s_q * l2;
                c[(7, 2)] = -r.s_q * l2;
            }
        }
        c[(3, 0)] = self.alpha * r.s_e * l2;
        c[(3, 3)] = 1.0 - r.s_e;
        c[(4, 4)] = 1.0 - r.s_x;
        c[(5, 5)] = 1.0 - r.s_x;
        c[(6, 6)] = 1.0 - r.s_q;
        c[(7, 7)] = 1.0 - r.s_q;
        c[(8, 0)] = self.beta * r.s_d * l2 * l2;
        c[(8, 8)] = 1.0 - r.s_d;
        c
    }

    /// The one-node collision map `M^-1 C M` acting on populations.
    pub fn population_collision_matrix(&self) -> [[f64; Q]; Q] {
        let a = self.basis.inverse_matrix() * self.collision_matrix() * self.basis.matrix();
        let mut out = [[0.0; Q]; Q];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[(i, j)];
            }
        }
        out
    }

    pub fn transport_coefficients(&self, dx: f64) -> Result<TransportCoefficients> {
        if !dx.is_finite() || dx <= 0.0 {
            return Err(Error::param("dx", format!("must be positive, got {dx}")));
        }
        let l = self.lambda();
        let r = &self.rates;
        Ok(TransportCoefficients {
            diffusivity: sigma(r.s_j) * (self.alpha + 4.0) * l * dx / 6.0,
            sound_speed_sq: (self.alpha + 4.0) * l * l / 6.0,
            shear_viscosity: l / 3.0 * dx * sigma(r.s_x),
            bulk_viscosity: -l * self.alpha / 6.0 * dx * sigma(r.s_e),
        })
    }
}

/// Applies a dense population-space 9x9 matrix.
#[inline]
pub fn apply_population_matrix(a: &[[f64; Q]; Q], f: &[f64; Q]) -> [f64; Q] {
    mat_vec(a, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thermal() -> CollisionModel {
        CollisionModel::thermal(-2.0, 1.0, RelaxationRates::heat_square(), 1.0).unwrap()
    }

    fn acoustic() -> CollisionModel {
        CollisionModel::acoustic(-2.0, 1.0, RelaxationRates::acoustic_quartic(), 1.0).unwrap()
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(
            thermal().equilibrium_moments(&[1.0]).unwrap().0,
            [1.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(
            acoustic().equilibrium_moments(&[1.0, 0.3, -0.1]).unwrap().0,
            [1.0, 0.3, -0.1, -2.0, 0.0, 0.0, -0.3, 0.1, 1.0]
        );
        assert!(thermal().equilibrium_moments(&[1.0, 0.0, 0.0]).is_err());
        assert!(acoustic().equilibrium_moments(&[1.0]).is_err());
    }

    #[test]
    fn equilibrium_populations_match_explicit_weights() {
        let f = thermal().equilibrium_populations(&[1.0]).unwrap();
        let w = [
            4.0 / 9.0,
            1.0 / 9.0,
            1.0 / 9.0,
            1.0 / 9.0,
            1.0 / 9.0,
            1.0 / 36.0,
            1.0 / 36.0,
            1.0 / 36.0,
            1.0 / 36.0,
        ];
        for j in 0..Q {
            assert!((f[j] - w[j]).abs() < 1e-15);
        }
        let f = acoustic().equilibrium_populations(&[1.0, 0.1, 0.0]).unwrap();
        assert!((f[1] - 5.2 / 36.0).abs() < 1e-15);
        assert!((f[3] - 2.8 / 36.0).abs() < 1e-15);
        assert!((f[2] - 4.0 / 36.0).abs() < 1e-15);
        assert!((f[4] - 4.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn relax_examples() {
        let t = thermal();
        let m = t.relax(&MomentVector([1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert!((m.0[1] + 0.2).abs() < 1e-15);
        let eq = t.equilibrium_moments(&[0.7]).unwrap();
        assert_eq!(t.relax(&eq), eq);
        let ones = RelaxationRates {
            s_j: 1.0,
            s_e: 1.0,
            s_x: 1.0,
            s_q: 1.0,
            s_d: 1.0,
        };
        let a = CollisionModel::acoustic(-2.0, 1.0, ones, 1.0).unwrap();
        let m = MomentVector([0.3, 0.1, -0.2, 5.0, 1.0, -1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.relax(&m), a.equilibrium_from(0.3, 0.1, -0.2));
    }

    #[test]
    fn collision_matrix_entries() {
        let t = thermal();
        let c = t.collision_matrix();
        assert_eq!(c[(3, 0)], -2.0 * 1.3);
        assert!((c[(3, 3)] - (1.0 - 1.3)).abs() < 1e-15);
        let a = acoustic();
        let c = a.collision_matrix();
        assert_eq!(c[(6, 1)], -quartic_s_q());
        assert_eq!(c[(1, 1)], 1.0);
    }

    #[test]
    fn rates_are_validated() {
        let mut r = RelaxationRates::heat_square();
        r.s_x = 2.5;
        assert!(matches!(
            CollisionModel::thermal(-2.0, 1.0, r, 1.0),
            Err(Error::InvalidParameter { name: "s_x", .. })
        ));
        let mut r = RelaxationRates::acoustic_quartic();
        r.s_j = 0.0;
        assert!(CollisionModel::acoustic(-2.0, 1.0, r, 1.0).is_ok());
    }

    #[test]
    fn transport_examples() {
        let t = thermal().transport_coefficients(1.0).unwrap();
        assert!((t.diffusivity - 1.0 / 9.0).abs() < 1e-15);
        assert!((t.sound_speed_sq - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.shear_viscosity - 3f64.sqrt() / 18.0).abs() < 1e-15);
    }
}
