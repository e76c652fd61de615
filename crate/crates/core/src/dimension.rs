use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Space dimension N of the radial problem. Only 3, 4 and 5 are energy-critical
/// with a locally Lipschitz nonlinearity, so nothing else can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub const THREE: Dimension = Dimension(3);
    pub const FOUR: Dimension = Dimension(4);
    pub const FIVE: Dimension = Dimension(5);

    pub const ALL: [Dimension; 3] = [Self::THREE, Self::FOUR, Self::FIVE];

    pub fn new(n: u32) -> Result<Self> {
        match n {
            3..=5 => Ok(Dimension(n)),
            other => Err(Error::InvalidDimension(other)),
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// Surface area of the unit sphere S^{N-1}.
    pub fn sphere_area(self) -> f64 {
        match self.0 {
            3 => 4.0 * PI,
            4 => 2.0 * PI * PI,
            _ => 8.0 * PI * PI / 3.0,
        }
    }

    /// Surface area of S^{N-2}, the transverse sphere used by axisymmetric quadrature.
    pub fn transverse_sphere_area(self) -> f64 {
        match self.0 {
            3 => 2.0 * PI,
            4 => 4.0 * PI,
            _ => 2.0 * PI * PI,
        }
    }

    /// Power p = 1 + 4/(N-2) of the nonlinearity |u|^{p-1} u.
    pub fn nonlinear_power(self) -> f64 {
        1.0 + 4.0 / (self.as_f64() - 2.0)
    }

    /// Critical Sobolev exponent 2N/(N-2).
    pub fn critical_exponent(self) -> f64 {
        2.0 * self.as_f64() / (self.as_f64() - 2.0)
    }

    /// Coefficient (N-2)/(2N) in front of the potential energy.
    pub fn potential_coefficient(self) -> f64 {
        (self.as_f64() - 2.0) / (2.0 * self.as_f64())
    }

    /// Radiation weight exponent (N-1)/2.
    pub fn radiation_exponent(self) -> f64 {
        (self.as_f64() - 1.0) / 2.0
    }

    /// c_N = (N-1)(N-3)/4, the inverse-square potential felt by r^{(N-1)/2} u.
    pub fn conjugation_potential(self) -> f64 {
        let n = self.as_f64();
        (n - 1.0) * (n - 3.0) / 4.0
    }

    /// Space-time Lebesgue exponent 2(N+2)/(N-2) of the Strichartz norm.
    pub fn strichartz_exponent(self) -> f64 {
        2.0 * (self.as_f64() + 2.0) / (self.as_f64() - 2.0)
    }

    /// Evaluates |u|^{p-1} u. For N = 5 the power 4/3 goes through `cbrt`.
    #[inline]
    pub fn nonlinearity(self, u: f64) -> f64 {
        match self.0 {
            3 => {
                let u2 = u * u;
                u2 * u2 * u
            }
            4 => u * u * u,
            _ => {
                let a = u.abs();
                u * a * a.cbrt()
            }
        }
    }

    /// Evaluates |u|^{2N/(N-2)}.
    #[inline]
    pub fn critical_power(self, u: f64) -> f64 {
        match self.0 {
            3 => {
                let u2 = u * u;
                u2 * u2 * u2
            }
            4 => {
                let u2 = u * u;
                u2 * u2
            }
            _ => {
                let a = u.abs();
                a * a * a * a.cbrt()
            }
        }
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_other_dimensions() {
        assert!(Dimension::new(2).is_err());
        assert!(Dimension::new(6).is_err());
        assert!(Dimension::new(4).is_ok());
    }

    #[test]
    fn exponents_are_consistent() {
        let expect = [(3, 5.0, 6.0), (4, 3.0, 4.0), (5, 7.0 / 3.0, 10.0 / 3.0)];
        for (n, p, crit) in expect {
            let d = Dimension::new(n).unwrap();
            assert!((d.nonlinear_power() - p).abs() < 1e-15);
            assert!((d.critical_exponent() - crit).abs() < 1e-15);
            assert!((d.critical_exponent() - (d.nonlinear_power() + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_areas_match_gamma_formula() {
        // 2 pi^{N/2} / Gamma(N/2) with Gamma(3/2) = sqrt(pi)/2, Gamma(2) = 1, Gamma(5/2) = 3 sqrt(pi)/4
        let g = [PI.sqrt() / 2.0, 1.0, 3.0 * PI.sqrt() / 4.0];
        for (d, gamma) in Dimension::ALL.iter().zip(g) {
            let expect = 2.0 * PI.powf(d.as_f64() / 2.0) / gamma;
            assert!((d.sphere_area() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn nonlinearity_matches_powf() {
        for d in Dimension::ALL {
            for &u in &[-1.7f64, -0.3, 0.0, 0.25, 2.0] {
                let p = d.nonlinear_power();
                let expect = u.abs().powf(p - 1.0) * u;
                assert!((d.nonlinearity(u) - expect).abs() <= 1e-13 * (1.0 + expect.abs()));
                let crit = u.abs().powf(d.critical_exponent());
                assert!((d.critical_power(u) - crit).abs() <= 1e-13 * (1.0 + crit));
            }
        }
    }
}
