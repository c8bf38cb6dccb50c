use super::{FbpError, ShockFront};
use crate::radial::{Branch, RadialProblem};

/// Upstream data on a candidate front, one entry per angular node.
#[derive(Debug, Clone, PartialEq)]
pub struct SupersonicTrace {
    /// Normal mass flux `rho^- v^-` carried into the front.
    pub flux: Vec<f64>,
    /// Upstream potential `phi^-(f)`.
    pub phi: Vec<f64>,
    /// Upstream speed `v^-(f)`, equal to `d_r phi^-`.
    pub speed: Vec<f64>,
    pub critical_speed: f64,
}

/// Radial supersonic flow evaluated on the front. Since the upstream flow
/// is radial, its normal flux through a front of any slope reduces to
/// `rho^- v^-` at `r = f(theta)`.
pub fn supersonic_trace(problem: &RadialProblem, front: &ShockFront) -> Result<SupersonicTrace, FbpError> {
    front.validate(problem.geometry())?;
    let gas = problem.gas();
    let n = front.len();
    let mut trace = SupersonicTrace {
        flux: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        speed: Vec::with_capacity(n),
        critical_speed: gas.critical_speed(),
    };
    for &f in &front.f {
        let v = problem.branch_speed(f, Branch::Supersonic)?;
        trace.flux.push(gas.mass_flux_density(v).map_err(crate::radial::RadialError::from)?);
        trace.phi.push(problem.supersonic_potential(f)?);
        trace.speed.push(v);
    }
    Ok(trace)
}
