//! Free-boundary iteration for a transonic shock in a two-dimensional wedge
//! nozzle `r0 < r < r1`, `|theta| < theta_w`.
//!
//! Behind a candidate front `r = f(theta)` the subsonic potential is solved
//! with the upstream mass flux as inflow, zero flux through the walls and
//! a prescribed exit potential. The front is then moved to remove the
//! mismatch between the upstream and downstream potentials on it. A fixed
//! point satisfies both front conditions. Comparing it against the radial
//! solution with the same exit datum checks that the symmetric shock is the
//! only one.

mod field;
mod front;
mod relax;
mod run;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use field::Field2D;
pub use front::{
    check_perpendicularity, front_update, perturb_front, theta_grid, FrontUpdate, PerpendicularityCheck, Perturbation,
    ShockFront,
};
pub use run::{check_uniqueness, run_fbp, solve_subsonic, ConvergenceReport, FbpRun, UniquenessMetrics, Verdict};
pub use trace::{supersonic_trace, SupersonicTrace};

use crate::radial::RadialError;

#[derive(Debug, Error, PartialEq)]
pub enum FbpError {
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error("the free-boundary solver needs dim = 2, got {0}")]
    Dimension(u32),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("front radius {f} at theta = {theta} outside ({r0}, {r1})")]
    FrontOutOfRange { theta: f64, f: f64, r0: f64, r1: f64 },
    #[error("front grid needs at least 3 nodes with matching angles, got {thetas} angles and {radii} radii")]
    FrontGrid { thetas: usize, radii: usize },
    #[error("exit speed {0} fixes the outflow but leaves the potential free up to a constant; use an exit potential")]
    SpeedExit(f64),
    #[error("perturbation amplitude {amplitude} must be non-negative and below {limit}")]
    Amplitude { amplitude: f64, limit: f64 },
    #[error("Picard iteration stalled after {iterations} sweeps; last changes {:?}", tail(history))]
    PicardStagnation { iterations: usize, history: Vec<f64> },
    #[error(
        "linear solve failed in Picard sweep {picard_iteration}: residual {residual} after {sweeps} relaxation sweeps"
    )]
    LinearSolver { picard_iteration: usize, sweeps: usize, residual: f64 },
}

fn tail(history: &[f64]) -> &[f64] {
    &history[history.len().saturating_sub(5)..]
}

/// Grid sizes, tolerances and caps for [`run_fbp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FbpConfig {
    /// Nodes along `s`, front to exit.
    pub nr: usize,
    /// Nodes along `theta`, wall to wall.
    pub ntheta: usize,
    /// Max change of `phi` between Picard sweeps.
    pub picard_tol: f64,
    /// Relative, diagonally scaled residual of each linear solve.
    pub linear_tol: f64,
    /// Max front movement in one outer iteration.
    pub front_tol: f64,
    /// Front under-relaxation, in `(0, 1]`.
    pub omega: f64,
    /// Speeds inside the density are capped at `(1 - delta_clamp) c*`.
    pub delta_clamp: f64,
    pub max_outer: usize,
    pub max_picard: usize,
    pub max_linear_sweeps: usize,
    /// Over-relaxation of the line sweeps, in `(0, 2)`.
    pub sor_omega: f64,
}

impl Default for FbpConfig {
    fn default() -> Self {
        Self {
            nr: 128,
            ntheta: 64,
            picard_tol: 1e-11,
            linear_tol: 1e-12,
            front_tol: 1e-6,
            omega: 1.0,
            delta_clamp: 0.05,
            max_outer: 60,
            max_picard: 100,
            max_linear_sweeps: 5000,
            sor_omega: 1.8,
        }
    }
}

impl FbpConfig {
    pub fn validate(&self) -> Result<(), FbpError> {
        let bad = |msg: &str| Err(FbpError::Config(msg.to_string()));
        if self.nr < 4 || self.ntheta < 3 {
            return bad("need nr >= 4 and ntheta >= 3");
        }
        for (name, tol) in
            [("picard_tol", self.picard_tol), ("linear_tol", self.linear_tol), ("front_tol", self.front_tol)]
        {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(FbpError::Config(format!("{name} must be positive, got {tol}")));
            }
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return bad("omega must lie in (0, 1]");
        }
        if !(self.delta_clamp > 0.0 && self.delta_clamp < 1.0) {
            return bad("delta_clamp must lie in (0, 1)");
        }
        if !(self.sor_omega > 0.0 && self.sor_omega < 2.0) {
            return bad("sor_omega must lie in (0, 2)");
        }
        if self.max_outer == 0 || self.max_picard == 0 || self.max_linear_sweeps == 0 {
            return bad("iteration caps must be positive");
        }
        Ok(())
    }
}
