//! Radially symmetric flow in a straight divergent nozzle.
//!
//! Mass conservation reduces to the algebraic law `r^(dim-1) rho(v^2) v = a0`
//! with `a0 = r0^(dim-1) rho0 u0`. For each radius the law has one root on
//! the supersonic side of `c*` and one on the subsonic side; a transonic
//! shock at `r_s` switches from the first to the second.

mod profile;
mod shock;

pub use profile::{Branch, RadialProfile};
pub use shock::{
    rh_jump, AdmissibleInterval, ExitDatum, ExitKind, Lemma1Report, PropertyCheck, TransonicShockSolution,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas::{GasError, GasModel};
use crate::quad;
use crate::roots::{self, RootError, RootOptions};

/// Brackets stop this far (relative to `c*`) from the sonic point.
pub const SONIC_GUARD: f64 = 1e-9;

/// Absolute tolerance of the adaptive rule used for potential integrals.
const POTENTIAL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadialError {
    #[error(transparent)]
    Gas(#[from] GasError),
    #[error("invalid nozzle geometry: {0}")]
    Geometry(String),
    #[error("entry speed u0 = {u0} must lie strictly inside ({critical}, {max})")]
    EntrySpeed { u0: f64, critical: f64, max: f64 },
    #[error("radius {r} outside the nozzle [{r0}, {r1}]")]
    Radius { r: f64, r0: f64, r1: f64 },
    #[error("shock radius {r_s} must lie strictly inside ({r0}, {r1})")]
    ShockRadius { r_s: f64, r0: f64, r1: f64 },
    #[error("flux density {flux} exceeds the sonic flux {sonic}: no steady radial flow at this radius")]
    NoSolution { flux: f64, sonic: f64 },
    #[error("upstream speed {v} is not strictly supersonic: needs ({critical}, {max})")]
    NotSupersonic { v: f64, critical: f64, max: f64 },
    #[error("root finding failed near the sonic point: {0}")]
    Root(#[from] RootError),
    #[error("grid needs at least 2 nodes, got {0}")]
    GridSize(usize),
    #[error("{kind} interval is empty: both endpoint limits equal {lo} (upper limit {hi})")]
    EmptyInterval { kind: ExitKind, lo: f64, hi: f64 },
    #[error("{kind} {value} outside the admissible open interval ({lo}, {hi})")]
    OutOfRange { kind: ExitKind, value: f64, lo: f64, hi: f64 },
    #[error("shock fit did not converge: bracket [{lo}, {hi}], mismatch {mismatch}")]
    NoConvergence { lo: f64, hi: f64, mismatch: f64 },
}

/// Straight divergent nozzle `r0 < r < r1`; `half_angle` is the wall
/// half-opening of the two-dimensional wedge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NozzleGeometry {
    r0: f64,
    r1: f64,
    dim: u32,
    half_angle: f64,
}

impl NozzleGeometry {
    pub fn new(r0: f64, r1: f64, dim: u32, half_angle: f64) -> Result<Self, RadialError> {
        if !(r0.is_finite() && r1.is_finite() && 0.0 < r0 && r0 < r1) {
            return Err(RadialError::Geometry(format!("need 0 < r0 < r1, got r0 = {r0}, r1 = {r1}")));
        }
        if dim != 2 && dim != 3 {
            return Err(RadialError::Geometry(format!("dim must be 2 or 3, got {dim}")));
        }
        if dim == 2 && !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(RadialError::Geometry(format!("half angle {half_angle} outside (0, pi/2)")));
        }
        Ok(Self { r0, r1, dim, half_angle })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    /// `r^(dim-1)`: area factor of the flux law.
    #[inline]
    pub fn area(&self, r: f64) -> f64 {
        if self.dim == 2 {
            r
        } else {
            r * r
        }
    }
}

/// Gas, nozzle and supersonic entry state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    gas: GasModel,
    geom: NozzleGeometry,
    u0: f64,
    rho0: f64,
    a0: f64,
}

impl RadialProblem {
    pub fn new(gas: GasModel, geom: NozzleGeometry, u0: f64) -> Result<Self, RadialError> {
        let critical = gas.critical_speed();
        let max = gas.max_speed();
        if !(u0 > critical && u0 < max) {
            return Err(RadialError::EntrySpeed { u0, critical, max });
        }
        let rho0 = gas.density_from_speed(u0)?;
        let a0 = geom.area(geom.r0) * rho0 * u0;
        Ok(Self { gas, geom, u0, rho0, a0 })
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }
    pub fn geometry(&self) -> &NozzleGeometry {
        &self.geom
    }
    pub fn u0(&self) -> f64 {
        self.u0
    }
    pub fn rho0(&self) -> f64 {
        self.rho0
    }
    /// Conserved mass-flux constant.
    pub fn a0(&self) -> f64 {
        self.a0
    }

    fn check_radius(&self, r: f64) -> Result<(), RadialError> {
        let (r0, r1) = (self.geom.r0, self.geom.r1);
        if !(r >= r0 && r <= r1) {
            return Err(RadialError::Radius { r, r0, r1 });
        }
        Ok(())
    }

    pub(crate) fn check_shock_radius(&self, r_s: f64) -> Result<(), RadialError> {
        let (r0, r1) = (self.geom.r0, self.geom.r1);
        if !(r_s > r0 && r_s < r1) {
            return Err(RadialError::ShockRadius { r_s, r0, r1 });
        }
        Ok(())
    }

    /// Speed at radius `r` on the requested side of `c*`.
    pub fn branch_speed(&self, r: f64, branch: Branch) -> Result<f64, RadialError> {
        self.check_radius(r)?;
        speed_for_flux(&self.gas, self.a0 / self.geom.area(r), branch)
    }

    /// Same as [`RadialProblem::branch_speed`] without the range check, for
    /// radii already known to be inside the nozzle.
    pub(crate) fn speed_at(&self, r: f64, branch: Branch) -> Result<f64, RadialError> {
        speed_for_flux(&self.gas, self.a0 / self.geom.area(r), branch)
    }

    /// Supersonic potential `phi^-(r) = u0 r0 + int_{r0}^{r} v^-`, evaluated
    /// with adaptive Gauss-Legendre quadrature. Valid for any `r` in the nozzle.
    pub fn supersonic_potential(&self, r: f64) -> Result<f64, RadialError> {
        self.check_radius(r)?;
        let r0 = self.geom.r0;
        let integral = quad::adaptive_gauss_legendre(|x| self.speed_at(x, Branch::Supersonic), r0, r, POTENTIAL_TOL)?;
        Ok(self.u0 * r0 + integral)
    }

    /// `int_a^b` of the subsonic branch speed.
    pub(crate) fn subsonic_integral(&self, a: f64, b: f64) -> Result<f64, RadialError> {
        quad::adaptive_gauss_legendre(|x| self.speed_at(x, Branch::Subsonic), a, b, POTENTIAL_TOL)
    }
}

/// Root of `rho(v^2) v = flux` on one side of the sonic point.
///
/// Fluxes within rounding of the sonic flux return `c*` itself; larger
/// fluxes have no steady solution.
pub fn speed_for_flux(gas: &GasModel, flux: f64, branch: Branch) -> Result<f64, RadialError> {
    let cs = gas.critical_speed();
    let sonic = gas.sonic_flux();
    if !(flux >= 0.0) || flux > sonic * (1.0 + 1e-12) {
        return Err(RadialError::NoSolution { flux, sonic });
    }
    let (lo, hi) = match branch {
        Branch::Supersonic => (cs * (1.0 + SONIC_GUARD), gas.max_speed()),
        Branch::Subsonic => (0.0, cs * (1.0 - SONIC_GUARD)),
    };
    let guard_point = match branch {
        Branch::Supersonic => lo,
        Branch::Subsonic => hi,
    };
    if flux >= gas.flux_and_slope(guard_point).0 {
        // root sits inside the guard band, where the flux is flat to rounding
        return Ok(cs);
    }
    if flux == 0.0 {
        return Ok(match branch {
            Branch::Supersonic => gas.max_speed(),
            Branch::Subsonic => 0.0,
        });
    }
    let opts = RootOptions { ftol: 1e-15 * flux, ..RootOptions::default() };
    let root = roots::newton_bisect(
        |v| {
            let (q, dq) = gas.flux_and_slope(v);
            (q - flux, dq)
        },
        lo,
        hi,
        opts,
    )?;
    Ok(root.x)
}
