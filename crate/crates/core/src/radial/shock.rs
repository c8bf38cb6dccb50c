use std::fmt;

use serde::{Deserialize, Serialize};

use super::{speed_for_flux, Branch, RadialError, RadialProblem, RadialProfile};
use crate::gas::GasModel;
use crate::roots::{self, RootOptions};

/// Grid size used for the profiles attached to a fitted solution.
pub const DEFAULT_PROFILE_NODES: usize = 201;

/// Downstream subsonic speed with the same mass-flux density as `v_minus`.
///
/// Potential flow keeps the Bernoulli constant across the shock, so the jump
/// is the other root of `rho(v^2) v = rho(v_minus^2) v_minus`.
pub fn rh_jump(gas: &GasModel, v_minus: f64) -> Result<f64, RadialError> {
    let critical = gas.critical_speed();
    let max = gas.max_speed();
    if !(v_minus > critical && v_minus < max) {
        return Err(RadialError::NotSupersonic { v: v_minus, critical, max });
    }
    let flux = gas.mass_flux_density(v_minus)?;
    speed_for_flux(gas, flux, Branch::Subsonic)
}

/// Which exit quantity parameterizes the shock family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExitKind {
    /// Exit speed `|grad phi| = v1` (Bernoulli back-pressure condition).
    Speed,
    /// Exit potential `phi = phi1` (Dirichlet back condition).
    Potential,
}

impl fmt::Display for ExitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExitKind::Speed => f.write_str("exit speed"),
            ExitKind::Potential => f.write_str("exit potential"),
        }
    }
}

/// Prescribed exit condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExitDatum {
    Speed(f64),
    Potential(f64),
}

impl ExitDatum {
    pub fn kind(&self) -> ExitKind {
        match self {
            ExitDatum::Speed(_) => ExitKind::Speed,
            ExitDatum::Potential(_) => ExitKind::Potential,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            ExitDatum::Speed(v) | ExitDatum::Potential(v) => v,
        }
    }
}

/// Open interval of exit data that put the shock strictly inside the nozzle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleInterval {
    pub kind: ExitKind,
    pub lo: f64,
    pub hi: f64,
}

impl AdmissibleInterval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Radial flow with a transonic shock at `r_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransonicShockSolution {
    pub r_s: f64,
    pub supersonic: RadialProfile,
    pub subsonic: RadialProfile,
    pub v_minus: f64,
    pub v_plus: f64,
    /// Exit speed.
    pub v1: f64,
    /// Exit potential.
    pub phi1: f64,
}

impl TransonicShockSolution {
    /// Relative mismatch of `rho v` across the shock.
    pub fn jump_flux_residual(&self, gas: &GasModel) -> f64 {
        let minus = gas.density_unchecked(self.v_minus) * self.v_minus;
        let plus = gas.density_unchecked(self.v_plus) * self.v_plus;
        (plus - minus).abs() / minus
    }

    pub fn potential_jump(&self) -> f64 {
        self.subsonic.phi[0] - self.supersonic.phi.last().copied().unwrap_or(f64::NAN)
    }
}

/// One property of the symmetric solution with its worst margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    /// Smallest value of the quantity required to be positive (or the
    /// largest magnitude of a quantity required to vanish).
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub checks: Vec<PropertyCheck>,
}

impl Lemma1Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl RadialProblem {
    /// Post-shock subsonic speed at the exit for a shock at `r_s`.
    ///
    /// The downstream flow carries the same flux constant `a0` as the
    /// upstream one, so this value does not depend on `r_s`.
    pub fn exit_velocity(&self, r_s: f64) -> Result<f64, RadialError> {
        self.check_shock_radius(r_s)?;
        self.exit_velocity_unchecked(r_s)
    }

    fn exit_velocity_unchecked(&self, r_s: f64) -> Result<f64, RadialError> {
        let v_minus = self.speed_at(r_s, Branch::Supersonic)?;
        let v_plus = rh_jump(self.gas(), v_minus)?;
        // the downstream flux constant, from the jump state
        let a_plus = self.geometry().area(r_s) * self.gas().density_unchecked(v_plus) * v_plus;
        speed_for_flux(self.gas(), a_plus / self.geometry().area(self.geometry().r1()), Branch::Subsonic)
    }

    /// Exit potential `phi^-(r_s) + int_{r_s}^{r1} v^+` for a shock at `r_s`.
    /// Strictly increasing in `r_s`, with slope `v^-(r_s) - v^+(r_s)`.
    pub fn exit_potential(&self, r_s: f64) -> Result<f64, RadialError> {
        self.check_shock_radius(r_s)?;
        self.exit_potential_unchecked(r_s)
    }

    fn exit_potential_unchecked(&self, r_s: f64) -> Result<f64, RadialError> {
        let r1 = self.geometry().r1();
        Ok(self.supersonic_potential(r_s)? + self.subsonic_integral(r_s, r1)?)
    }

    pub fn exit_value(&self, kind: ExitKind, r_s: f64) -> Result<f64, RadialError> {
        match kind {
            ExitKind::Speed => self.exit_velocity(r_s),
            ExitKind::Potential => self.exit_potential(r_s),
        }
    }

    fn exit_value_unchecked(&self, kind: ExitKind, r_s: f64) -> Result<f64, RadialError> {
        match kind {
            ExitKind::Speed => self.exit_velocity_unchecked(r_s),
            ExitKind::Potential => self.exit_potential_unchecked(r_s),
        }
    }

    /// Admissible exit-speed interval `I`.
    pub fn admissible_interval(&self, tol: f64) -> Result<AdmissibleInterval, RadialError> {
        self.admissible_interval_for(ExitKind::Speed, tol)
    }

    /// Limits of the exit map as the shock approaches the entry and the exit.
    ///
    /// Each limit is taken from evaluations at offsets `eps` and `eps/2`
    /// (`eps = tol (r1 - r0)`) combined by one Richardson step. An interval
    /// whose limits agree to `tol` is reported as empty.
    pub fn admissible_interval_for(&self, kind: ExitKind, tol: f64) -> Result<AdmissibleInterval, RadialError> {
        let (r0, r1) = (self.geometry().r0(), self.geometry().r1());
        let eps = tol.abs().max(1e-14) * (r1 - r0);
        let limit = |a: f64, b: f64| -> Result<f64, RadialError> {
            let coarse = self.exit_value_unchecked(kind, a)?;
            let fine = self.exit_value_unchecked(kind, b)?;
            Ok(2.0 * fine - coarse)
        };
        let lo = limit(r0 + eps, r0 + 0.5 * eps)?;
        let hi = limit(r1 - eps, r1 - 0.5 * eps)?;
        if !(hi - lo > tol.abs().max(1e-14) * hi.abs().max(1.0)) {
            return Err(RadialError::EmptyInterval { kind, lo, hi });
        }
        Ok(AdmissibleInterval { kind, lo, hi })
    }

    /// Shock solution for a prescribed exit speed.
    pub fn find_shock(&self, v1: f64, tol: f64) -> Result<TransonicShockSolution, RadialError> {
        self.find_shock_for(ExitDatum::Speed(v1), tol)
    }

    /// Shock solution for a prescribed exit datum: bisection on the
    /// monotone exit map over `(r0, r1)` until the mismatch is below `tol`.
    pub fn find_shock_for(&self, datum: ExitDatum, tol: f64) -> Result<TransonicShockSolution, RadialError> {
        let kind = datum.kind();
        let target = datum.value();
        let interval = match self.admissible_interval_for(kind, tol) {
            Ok(iv) => iv,
            Err(RadialError::EmptyInterval { lo, hi, .. }) => {
                return Err(RadialError::OutOfRange { kind, value: target, lo, hi })
            }
            Err(e) => return Err(e),
        };
        if !interval.contains(target) {
            return Err(RadialError::OutOfRange { kind, value: target, lo: interval.lo, hi: interval.hi });
        }
        let (r0, r1) = (self.geometry().r0(), self.geometry().r1());
        let mut failure = None;
        let opts = RootOptions { ftol: tol, xtol: 1e-15, max_iter: 200 };
        let result = roots::bisect(
            |r| match self.exit_value_unchecked(kind, r) {
                Ok(v) => v - target,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            r0,
            r1,
            opts,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let root = result.map_err(|e| match e {
            roots::RootError::NotBracketed { lo, hi, f_lo, .. } => {
                RadialError::NoConvergence { lo, hi, mismatch: f_lo }
            }
            roots::RootError::MaxIterations { lo, hi, residual, .. } => {
                RadialError::NoConvergence { lo, hi, mismatch: residual }
            }
        })?;
        if root.residual.abs() > tol {
            return Err(RadialError::NoConvergence { lo: root.x, hi: root.x, mismatch: root.residual });
        }
        if !(root.x > r0 && root.x < r1) {
            return Err(RadialError::OutOfRange { kind, value: target, lo: interval.lo, hi: interval.hi });
        }
        self.shock_solution(root.x, DEFAULT_PROFILE_NODES)
    }

    /// Full solution with the shock at `r_s`, profiles on `n` nodes each.
    pub fn shock_solution(&self, r_s: f64, n: usize) -> Result<TransonicShockSolution, RadialError> {
        self.check_shock_radius(r_s)?;
        let r0 = self.geometry().r0();
        let supersonic = RadialProfile::build(self, r0, r_s, n, Branch::Supersonic, self.u0() * r0)?;
        let subsonic = self.subsonic_after(&supersonic, n)?;
        let v_minus = *supersonic.v.last().expect("n >= 2");
        let v_plus = rh_jump(self.gas(), v_minus)?;
        Ok(TransonicShockSolution {
            r_s,
            v_minus,
            v_plus,
            v1: *subsonic.v.last().expect("n >= 2"),
            phi1: self.exit_potential_unchecked(r_s)?,
            supersonic,
            subsonic,
        })
    }

    /// Checks the monotonicity and ordering properties of the symmetric
    /// solution node by node on the subsonic grid.
    pub fn verify_lemma1(&self, solution: &TransonicShockSolution) -> Lemma1Report {
        let mut checks = Vec::new();
        let sup = &solution.supersonic;
        let sub = &solution.subsonic;

        let min_step = |v: &[f64], sign: f64| v.windows(2).map(|w| sign * (w[1] - w[0])).fold(f64::INFINITY, f64::min);
        let inc = min_step(&sup.v, 1.0);
        checks.push(PropertyCheck { name: "supersonic_increasing".into(), passed: inc > 0.0, worst_margin: inc });
        let dec = min_step(&sub.v, -1.0);
        checks.push(PropertyCheck { name: "subsonic_decreasing".into(), passed: dec > 0.0, worst_margin: dec });

        // continue the supersonic flow past the shock on the subsonic grid
        let mut phi_minus = Vec::with_capacity(sub.len());
        let mut v_minus = Vec::with_capacity(sub.len());
        let mut extension_ok = true;
        phi_minus.push(*sup.phi.last().unwrap_or(&f64::NAN));
        for (i, &r) in sub.grid.iter().enumerate() {
            let v = self.speed_at(r, Branch::Supersonic).unwrap_or_else(|_| {
                extension_ok = false;
                f64::NAN
            });
            v_minus.push(v);
            if i > 0 {
                let mid = self.speed_at(0.5 * (sub.grid[i - 1] + r), Branch::Supersonic).unwrap_or(f64::NAN);
                let step = crate::quad::simpson(r - sub.grid[i - 1], v_minus[i - 1], mid, v);
                phi_minus.push(phi_minus[i - 1] + step);
            }
        }

        let at_shock = (phi_minus[0] - sub.phi[0]).abs();
        let scale = sub.phi[0].abs().max(1.0);
        checks.push(PropertyCheck {
            name: "potential_continuity".into(),
            passed: extension_ok && at_shock <= 1e-12 * scale,
            worst_margin: at_shock,
        });
        let gap = phi_minus.iter().zip(&sub.phi).skip(1).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
        checks.push(PropertyCheck {
            name: "potential_ordering".into(),
            passed: extension_ok && gap > 0.0,
            worst_margin: gap,
        });
        let speed_gap = v_minus.iter().zip(&sub.v).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
        checks.push(PropertyCheck {
            name: "speed_ordering".into(),
            passed: extension_ok && speed_gap > 0.0,
            worst_margin: speed_gap,
        });
        Lemma1Report { checks }
    }
}
