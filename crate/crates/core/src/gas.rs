//! Polytropic closure for steady potential flow.
//!
//! Everything is nondimensional: the reference state `rho = 1` has pressure
//! `1/gamma` and unit sound speed. Density follows from the Bernoulli law
//!
//! ```text
//! rho(v^2) = (1 + (gamma - 1) (b0 - v^2 / 2))^(1 / (gamma - 1))
//! ```
//!
//! with `p = rho^gamma / gamma` and `c^2 = rho^(gamma - 1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest admissible gap `gamma - 1`.
pub const MIN_GAMMA_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GasError {
    #[error("adiabatic exponent gamma = {0} must satisfy gamma >= 1 + {MIN_GAMMA_GAP}")]
    Gamma(f64),
    #[error("Bernoulli constant b0 = {b0} leaves 1 + (gamma - 1) b0 = {base} <= 0")]
    Bernoulli { b0: f64, base: f64 },
    #[error("speed {v} outside the admissible range [0, {max}]")]
    Speed { v: f64, max: f64 },
    #[error("density {0} is negative")]
    Density(f64),
}

/// Adiabatic exponent and Bernoulli constant of a polytropic gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    gamma: f64,
    b0: f64,
}

impl GasModel {
    pub fn new(gamma: f64, b0: f64) -> Result<Self, GasError> {
        if !(gamma.is_finite() && gamma >= 1.0 + MIN_GAMMA_GAP) {
            return Err(GasError::Gamma(gamma));
        }
        let base = 1.0 + (gamma - 1.0) * b0;
        if !(b0.is_finite() && base > 0.0) {
            return Err(GasError::Bernoulli { b0, base });
        }
        Ok(Self { gamma, b0 })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// Critical speed `c*`, where flow speed equals sound speed.
    pub fn critical_speed(&self) -> f64 {
        let g = self.gamma;
        (2.0 / (g + 1.0) * (1.0 + (g - 1.0) * self.b0)).sqrt()
    }

    /// Vacuum speed, at which the density vanishes.
    pub fn max_speed(&self) -> f64 {
        (2.0 * (self.b0 + 1.0 / (self.gamma - 1.0))).sqrt()
    }

    fn check_speed(&self, v: f64) -> Result<(), GasError> {
        let max = self.max_speed();
        if v.is_nan() || v < 0.0 || v > max {
            return Err(GasError::Speed { v, max });
        }
        Ok(())
    }

    /// Density as a function of speed.
    pub fn density_from_speed(&self, v: f64) -> Result<f64, GasError> {
        self.check_speed(v)?;
        Ok(self.density_unchecked(v))
    }

    /// Same as [`GasModel::density_from_speed`] for callers that already
    /// keep `v` inside `[0, max_speed]`. The parenthesis is floored at zero.
    #[inline]
    pub(crate) fn density_unchecked(&self, v: f64) -> f64 {
        let g1 = self.gamma - 1.0;
        let base = 1.0 + g1 * (self.b0 - 0.5 * v * v);
        base.max(0.0).powf(1.0 / g1)
    }

    pub fn pressure(&self, rho: f64) -> Result<f64, GasError> {
        if rho.is_nan() || rho < 0.0 {
            return Err(GasError::Density(rho));
        }
        Ok(rho.powf(self.gamma) / self.gamma)
    }

    pub fn sound_speed(&self, rho: f64) -> Result<f64, GasError> {
        if rho.is_nan() || rho < 0.0 {
            return Err(GasError::Density(rho));
        }
        Ok(rho.powf(0.5 * (self.gamma - 1.0)))
    }

    /// Mass flux per unit area `rho(v^2) v`. Unimodal on `[0, max_speed]`
    /// with its peak at the critical speed.
    pub fn mass_flux_density(&self, v: f64) -> Result<f64, GasError> {
        self.check_speed(v)?;
        Ok(self.density_unchecked(v) * v)
    }

    /// `rho(v^2) v` and its derivative `rho (1 - v^2 / c^2)`.
    #[inline]
    pub(crate) fn flux_and_slope(&self, v: f64) -> (f64, f64) {
        let g1 = self.gamma - 1.0;
        let c2 = (1.0 + g1 * (self.b0 - 0.5 * v * v)).max(0.0);
        let rho = c2.powf(1.0 / g1);
        let slope = if c2 > 0.0 { rho * (1.0 - v * v / c2) } else { 0.0 };
        (rho * v, slope)
    }

    /// Peak of the mass flux density, reached at the critical speed.
    pub fn sonic_flux(&self) -> f64 {
        let cs = self.critical_speed();
        self.density_unchecked(cs) * cs
    }

    /// Left side minus right side of the Bernoulli law for a given state.
    pub fn bernoulli_residual(&self, v: f64, rho: f64) -> f64 {
        let g1 = self.gamma - 1.0;
        0.5 * v * v + (rho.powf(g1) - 1.0) / g1 - self.b0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn air() -> GasModel {
        GasModel::new(1.4, 2.5).unwrap()
    }

    #[test]
    fn rejects_bad_models() {
        assert!(matches!(GasModel::new(1.0, 2.5), Err(GasError::Gamma(_))));
        assert!(matches!(GasModel::new(1.0 + 1e-7, 2.5), Err(GasError::Gamma(_))));
        assert!(matches!(GasModel::new(1.4, -3.0), Err(GasError::Bernoulli { .. })));
        assert!(GasModel::new(1.4, -2.4).is_ok());
    }

    #[test]
    fn density_reference_values() {
        let gas = air();
        // (1 + 0.4 * 2.5)^(1/0.4) = 2^2.5
        assert_relative_eq!(gas.density_from_speed(0.0).unwrap(), 5.656854249492381, max_relative = 1e-14);
        assert_eq!(gas.density_from_speed(gas.max_speed()).unwrap(), 0.0);
        let cs = (5.0f64 / 3.0).sqrt();
        let rho = gas.density_from_speed(cs).unwrap();
        assert_relative_eq!(rho, (5.0f64 / 3.0).powf(2.5), max_relative = 1e-13);
        assert_relative_eq!(rho, 3.586095690932794, max_relative = 1e-12);
        assert_relative_eq!(gas.sound_speed(rho).unwrap(), cs, max_relative = 1e-13);
    }

    #[test]
    fn density_domain_errors() {
        let gas = air();
        assert!(matches!(gas.density_from_speed(-1e-3), Err(GasError::Speed { .. })));
        assert!(matches!(gas.density_from_speed(gas.max_speed() * 1.001), Err(GasError::Speed { .. })));
        assert!(gas.mass_flux_density(f64::NAN).is_err());
    }

    #[test]
    fn pressure_and_sound_speed() {
        assert_relative_eq!(air().pressure(1.0).unwrap(), 1.0 / 1.4);
        assert_eq!(air().pressure(0.0).unwrap(), 0.0);
        let g2 = GasModel::new(2.0, 1.0).unwrap();
        assert_relative_eq!(g2.pressure(3.0).unwrap(), 4.5, max_relative = 1e-15);
        assert_eq!(air().sound_speed(1.0).unwrap(), 1.0);
        let g3 = GasModel::new(3.0, 1.0).unwrap();
        assert_relative_eq!(g3.sound_speed(4.0).unwrap(), 4.0, max_relative = 1e-15);
        assert!(matches!(air().pressure(-1.0), Err(GasError::Density(_))));
        assert!(matches!(air().sound_speed(-1.0), Err(GasError::Density(_))));
    }

    #[test]
    fn critical_and_max_speed() {
        let gas = air();
        assert_relative_eq!(gas.critical_speed(), 1.2909944487358056, max_relative = 1e-15);
        assert_relative_eq!(gas.max_speed(), 10f64.sqrt(), max_relative = 1e-15);
        let cs = gas.critical_speed();
        let c = gas.sound_speed(gas.density_from_speed(cs).unwrap()).unwrap();
        assert_relative_eq!(c, cs, max_relative = 1e-14);
        // b0 -> -1/(gamma - 1) from above
        let degenerate = GasModel::new(1.4, -2.5 + 1e-12).unwrap();
        assert!(degenerate.critical_speed() < 1e-5);
    }

    #[test]
    fn sonic_flux_value() {
        let gas = air();
        let expected = (5.0f64 / 3.0).powf(2.5) * (5.0f64 / 3.0).sqrt();
        assert_relative_eq!(gas.sonic_flux(), expected, max_relative = 1e-13);
        // (5/3)^2.5 * (5/3)^0.5 = (5/3)^3
        assert_relative_eq!(gas.sonic_flux(), 125.0 / 27.0, max_relative = 1e-13);
        // grid scan: nothing beats the sonic flux
        let n = 10_000;
        let vmax = gas.max_speed();
        let best = (0..=n).map(|k| gas.mass_flux_density(vmax * k as f64 / n as f64).unwrap()).fold(0.0f64, f64::max);
        assert!(best <= gas.sonic_flux() * (1.0 + 1e-14));
        assert_eq!(gas.mass_flux_density(0.0).unwrap(), 0.0);
        assert_eq!(gas.mass_flux_density(vmax).unwrap(), 0.0);
    }

    #[test]
    fn slope_matches_finite_difference() {
        let gas = air();
        for &v in &[0.3, 0.9, 1.7, 2.8] {
            let h = 1e-6;
            let fd = (gas.mass_flux_density(v + h).unwrap() - gas.mass_flux_density(v - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(gas.flux_and_slope(v).1, fd, max_relative = 1e-7);
        }
    }
}
