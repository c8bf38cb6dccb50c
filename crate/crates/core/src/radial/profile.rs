use serde::{Deserialize, Serialize};

use super::{RadialError, RadialProblem};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Supersonic,
    Subsonic,
}

/// Radial flow sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub v: Vec<f64>,
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
    pub branch: Branch,
}

impl RadialProfile {
    /// Samples `branch` on `n` uniform nodes over `[a, b]`. The potential
    /// starts at `phi_start` and is advanced interval by interval with
    /// Simpson's rule, using an extra branch solve at each midpoint.
    pub(crate) fn build(
        problem: &RadialProblem,
        a: f64,
        b: f64,
        n: usize,
        branch: Branch,
        phi_start: f64,
    ) -> Result<Self, RadialError> {
        if n < 2 {
            return Err(RadialError::GridSize(n));
        }
        let h = (b - a) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * h }).collect();
        let v = grid.iter().map(|&r| problem.speed_at(r, branch)).collect::<Result<Vec<_>, _>>()?;
        let gas = problem.gas();
        let rho = v.iter().map(|&s| gas.density_unchecked(s)).collect();
        let mut phi = Vec::with_capacity(n);
        phi.push(phi_start);
        for i in 0..n - 1 {
            let mid = problem.speed_at(0.5 * (grid[i] + grid[i + 1]), branch)?;
            let step = quad::simpson(grid[i + 1] - grid[i], v[i], mid, v[i + 1]);
            phi.push(phi[i] + step);
        }
        Ok(Self { grid, v, rho, phi, branch })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Worst relative mass-flux defect `|r^(dim-1) rho v - a0| / a0`.
    pub fn mass_residual(&self, problem: &RadialProblem) -> f64 {
        let a0 = problem.a0();
        self.grid
            .iter()
            .zip(self.v.iter().zip(&self.rho))
            .map(|(&r, (&v, &rho))| (problem.geometry().area(r) * rho * v - a0).abs() / a0)
            .fold(0.0, f64::max)
    }

    /// Worst absolute Bernoulli defect over the nodes.
    pub fn bernoulli_residual(&self, problem: &RadialProblem) -> f64 {
        let gas = problem.gas();
        self.v.iter().zip(&self.rho).map(|(&v, &rho)| gas.bernoulli_residual(v, rho).abs()).fold(0.0, f64::max)
    }

    /// Pressure and Mach number at each node.
    pub fn pressure_mach(&self, problem: &RadialProblem) -> Vec<(f64, f64)> {
        let gas = problem.gas();
        self.v
            .iter()
            .zip(&self.rho)
            .map(|(&v, &rho)| {
                let p = rho.powf(gas.gamma()) / gas.gamma();
                let c = rho.powf(0.5 * (gas.gamma() - 1.0));
                (p, v / c)
            })
            .collect()
    }
}

impl RadialProblem {
    /// Supersonic flow over the whole nozzle `[r0, r1]`.
    pub fn supersonic_profile(&self, n: usize) -> Result<RadialProfile, RadialError> {
        let g = self.geometry();
        RadialProfile::build(self, g.r0(), g.r1(), n, Branch::Supersonic, self.u0() * g.r0())
    }

    /// Subsonic flow behind a shock at `r_s`, on `n` nodes over `[r_s, r1]`.
    ///
    /// The starting potential is the supersonic potential at `r_s`, integrated
    /// on an `n`-node grid over `[r0, r_s]`, so the result agrees bit for bit
    /// with the pair built by [`RadialProblem::shock_solution`].
    pub fn subsonic_profile_from_shock(&self, r_s: f64, n: usize) -> Result<RadialProfile, RadialError> {
        self.check_shock_radius(r_s)?;
        let upstream = RadialProfile::build(
            self,
            self.geometry().r0(),
            r_s,
            n,
            Branch::Supersonic,
            self.u0() * self.geometry().r0(),
        )?;
        self.subsonic_after(&upstream, n)
    }

    pub(crate) fn subsonic_after(&self, upstream: &RadialProfile, n: usize) -> Result<RadialProfile, RadialError> {
        let r_s = *upstream.grid.last().expect("non-empty profile");
        let phi_s = *upstream.phi.last().expect("non-empty profile");
        RadialProfile::build(self, r_s, self.geometry().r1(), n, Branch::Subsonic, phi_s)
    }
}
