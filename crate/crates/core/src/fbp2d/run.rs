use serde::{Deserialize, Serialize};

use super::field::{linear_guess, picard};
use super::{
    check_perpendicularity, front_update, supersonic_trace, FbpConfig, FbpError, Field2D, PerpendicularityCheck,
    ShockFront,
};
use crate::radial::{Branch, ExitDatum, RadialError, RadialProblem, TransonicShockSolution};

/// Relative width below which the exit-datum interval counts as empty.
const INTERVAL_TOL: f64 = 1e-10;
/// Exit-map mismatch accepted for the radial reference.
const REFERENCE_TOL: f64 = 1e-13;
/// Consecutive iterations with clipped nodes that count as divergence.
const CLIP_STREAK: usize = 3;

/// Front deviation accepted by [`check_uniqueness`], in radial cells.
pub const FRONT_CELLS_LIMIT: f64 = 2.0;
/// Relative speed deviation accepted by [`check_uniqueness`].
pub const SPEED_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    MaxIterations,
    Diverged,
}

/// Distance of a computed state from the radial solution with the same
/// exit datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessMetrics {
    pub front_deviation: f64,
    /// `front_deviation` in units of `(r1 - r0) / nr`.
    pub front_deviation_cells: f64,
    pub speed_rel_linf: f64,
    pub speed_rel_l2: f64,
    /// `max |phi^- - phi^+|` on the front.
    pub dirichlet_mismatch: f64,
    pub within_thresholds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub verdict: Verdict,
    pub outer_iterations: usize,
    pub exit: ExitDatum,
    pub reference_shock_radius: f64,
    pub initial_deviation: f64,
    /// `max |f - r_s|` after each outer iteration.
    pub front_deviation: Vec<f64>,
    pub front_movement: Vec<f64>,
    /// `max |phi^- - phi^+|` on the front each outer iteration drove.
    pub dirichlet_mismatch: Vec<f64>,
    pub picard_iterations: Vec<usize>,
    pub linear_sweeps: Vec<usize>,
    /// Nodes with `v_r < 0` in each solved field.
    pub hypothesis_violations: Vec<usize>,
    pub clamped_nodes: Vec<usize>,
    pub clipped_nodes: Vec<usize>,
    pub final_picard_change: f64,
    pub final_linear_residual: f64,
    pub final_mismatch: f64,
    pub mass_balance: f64,
    pub slip_residual: f64,
    pub wall_tangential_speed: f64,
    pub max_speed: f64,
    pub critical_speed: f64,
    pub uniqueness: Option<UniquenessMetrics>,
    pub perpendicularity: Option<PerpendicularityCheck>,
    pub failure: Option<String>,
}

impl ConvergenceReport {
    /// Converged and, where computed, within the uniqueness thresholds.
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Converged && self.uniqueness.is_some_and(|u| u.within_thresholds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbpRun {
    pub front: ShockFront,
    pub field: Field2D,
    pub report: ConvergenceReport,
    /// Initial front followed by every iterate.
    pub history: Vec<ShockFront>,
}

fn check_setup(problem: &RadialProblem, front: &ShockFront, config: &FbpConfig) -> Result<(), FbpError> {
    let dim = problem.geometry().dim();
    if dim != 2 {
        return Err(FbpError::Dimension(dim));
    }
    config.validate()?;
    front.validate(problem.geometry())?;
    if front.len() != config.ntheta {
        return Err(FbpError::Config(format!("front has {} nodes, config.ntheta = {}", front.len(), config.ntheta)));
    }
    let expected = super::theta_grid(problem.geometry().half_angle(), front.len());
    if front.thetas.iter().zip(&expected).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(FbpError::Config("front angles do not match the nozzle half-angle".into()));
    }
    Ok(())
}

/// Exit potential for the 2D solve. The datum must lie strictly inside its
/// admissible interval. An exit speed fixes the outflow but leaves the
/// potential free up to a constant, so it does not pin the front.
fn exit_potential(problem: &RadialProblem, exit: ExitDatum) -> Result<f64, FbpError> {
    let kind = exit.kind();
    let value = exit.value();
    let interval = match problem.admissible_interval_for(kind, INTERVAL_TOL) {
        Ok(iv) => iv,
        Err(RadialError::EmptyInterval { lo, hi, .. }) => {
            return Err(RadialError::OutOfRange { kind, value, lo, hi }.into())
        }
        Err(e) => return Err(e.into()),
    };
    if !interval.contains(value) {
        return Err(RadialError::OutOfRange { kind, value, lo: interval.lo, hi: interval.hi }.into());
    }
    match exit {
        ExitDatum::Potential(phi) => Ok(phi),
        ExitDatum::Speed(v1) => Err(FbpError::SpeedExit(v1)),
    }
}

/// Subsonic field behind `front` for the exit datum `exit`, starting from
/// `guess` (same layout as [`Field2D::phi`]) or a linear profile in `s`.
pub fn solve_subsonic(
    problem: &RadialProblem,
    front: &ShockFront,
    exit: ExitDatum,
    config: &FbpConfig,
    guess: Option<&[f64]>,
) -> Result<Field2D, FbpError> {
    check_setup(problem, front, config)?;
    let phi_exit = exit_potential(problem, exit)?;
    let trace = supersonic_trace(problem, front)?;
    let guess = match guess {
        Some(g) if g.len() == config.nr * config.ntheta => g.to_vec(),
        Some(g) => {
            return Err(FbpError::Config(format!(
                "guess has {} values, grid has {}",
                g.len(),
                config.nr * config.ntheta
            )))
        }
        None => linear_guess(&trace.phi, phi_exit, config.nr),
    };
    picard(problem.gas(), front, &trace, problem.geometry().r1(), phi_exit, config, guess)
}

/// Deviation of a converged state from the radial `reference`.
pub fn check_uniqueness(
    problem: &RadialProblem,
    front: &ShockFront,
    field: &Field2D,
    reference: &TransonicShockSolution,
) -> Result<UniquenessMetrics, FbpError> {
    let geom = problem.geometry();
    let cell = (geom.r1() - geom.r0()) / field.nr as f64;
    let front_deviation = front.max_deviation(reference.r_s);
    let mut linf: f64 = 0.0;
    let mut sum2 = 0.0;
    for j in 0..field.ntheta {
        for i in 0..field.nr {
            let exact = problem.branch_speed(field.radius(i, j), Branch::Subsonic)?;
            let rel = (field.speed[field.idx(i, j)] - exact).abs() / exact;
            linf = linf.max(rel);
            sum2 += rel * rel;
        }
    }
    let mut mismatch: f64 = 0.0;
    for (j, &f) in field.front.iter().enumerate() {
        mismatch = mismatch.max((problem.supersonic_potential(f)? - field.phi[field.idx(0, j)]).abs());
    }
    let front_deviation_cells = front_deviation / cell;
    Ok(UniquenessMetrics {
        front_deviation,
        front_deviation_cells,
        speed_rel_linf: linf,
        speed_rel_l2: (sum2 / (field.nr * field.ntheta) as f64).sqrt(),
        dirichlet_mismatch: mismatch,
        within_thresholds: front_deviation_cells <= FRONT_CELLS_LIMIT && linf <= SPEED_LIMIT,
    })
}

enum Stop {
    Converged,
    Diverged,
    Failed(FbpError),
}

/// Alternates subsonic solves and front updates from `initial` until one
/// update moves the front by less than `front_tol`, or a cap is hit.
pub fn run_fbp(
    problem: &RadialProblem,
    exit: ExitDatum,
    initial: &ShockFront,
    config: &FbpConfig,
) -> Result<FbpRun, FbpError> {
    check_setup(problem, initial, config)?;
    let phi_exit = exit_potential(problem, exit)?;
    let reference = problem.find_shock_for(exit, REFERENCE_TOL)?;
    let geom = problem.geometry();
    let h_r = (geom.r1() - geom.r0()) / config.nr as f64;
    let bounds = (geom.r0() + h_r, geom.r1() - h_r);
    let r1 = geom.r1();
    let gas = problem.gas();

    let mut front = ShockFront { iteration: 0, ..initial.clone() };
    let mut history = vec![front.clone()];
    let mut report = ConvergenceReport {
        verdict: Verdict::MaxIterations,
        outer_iterations: 0,
        exit,
        reference_shock_radius: reference.r_s,
        initial_deviation: front.max_deviation(reference.r_s),
        front_deviation: Vec::new(),
        front_movement: Vec::new(),
        dirichlet_mismatch: Vec::new(),
        picard_iterations: Vec::new(),
        linear_sweeps: Vec::new(),
        hypothesis_violations: Vec::new(),
        clamped_nodes: Vec::new(),
        clipped_nodes: Vec::new(),
        final_picard_change: f64::NAN,
        final_linear_residual: f64::NAN,
        final_mismatch: f64::NAN,
        mass_balance: f64::NAN,
        slip_residual: f64::NAN,
        wall_tangential_speed: f64::NAN,
        max_speed: f64::NAN,
        critical_speed: gas.critical_speed(),
        uniqueness: None,
        perpendicularity: None,
        failure: None,
    };

    let mut field: Option<Field2D> = None;
    let mut stop = None;
    let mut clip_streak = 0;
    for outer in 1..=config.max_outer {
        let trace = supersonic_trace(problem, &front)?;
        let guess = match &field {
            Some(f) => f.phi.clone(),
            None => linear_guess(&trace.phi, phi_exit, config.nr),
        };
        let solved = match picard(gas, &front, &trace, r1, phi_exit, config, guess) {
            Ok(f) => f,
            Err(e) => {
                stop = Some(Stop::Failed(e));
                break;
            }
        };
        let step = front_update(&front, &solved, &trace, config.omega, bounds);
        report.outer_iterations = outer;
        report.front_deviation.push(step.front.max_deviation(reference.r_s));
        report.front_movement.push(step.max_movement);
        report.dirichlet_mismatch.push(step.max_mismatch);
        report.picard_iterations.push(solved.picard_history.len());
        report.linear_sweeps.push(solved.linear_sweeps.iter().sum());
        report.hypothesis_violations.push(solved.hypothesis_violations());
        report.clamped_nodes.push(solved.clamped_nodes);
        report.clipped_nodes.push(step.clipped_nodes);
        field = Some(solved);
        front = step.front;
        history.push(front.clone());

        clip_streak = if step.clipped_nodes > 0 { clip_streak + 1 } else { 0 };
        if !step.max_movement.is_finite() || clip_streak >= CLIP_STREAK {
            stop = Some(Stop::Diverged);
            break;
        }
        if step.max_movement < config.front_tol {
            stop = Some(Stop::Converged);
            break;
        }
    }

    report.verdict = match &stop {
        Some(Stop::Converged) => Verdict::Converged,
        Some(Stop::Diverged) => Verdict::Diverged,
        Some(Stop::Failed(FbpError::LinearSolver { residual, .. })) if !residual.is_finite() => Verdict::Diverged,
        Some(Stop::Failed(_)) | None => Verdict::MaxIterations,
    };
    let Some(mut field) = field else {
        return match stop {
            Some(Stop::Failed(e)) => Err(e),
            _ => unreachable!("max_outer >= 1 yields a field or a failure"),
        };
    };
    match stop {
        Some(Stop::Failed(e)) => {
            // the last good field belongs to the front before the last update
            front = history[history.len() - 1].clone();
            report.failure = Some(e.to_string());
        }
        Some(Stop::Diverged) => report.failure = Some("front diverged or kept hitting the domain bounds".into()),
        _ => {
            // field on the final front, so front and field outputs agree
            let trace = supersonic_trace(problem, &front)?;
            match picard(gas, &front, &trace, r1, phi_exit, config, field.phi.clone()) {
                Ok(f) => field = f,
                Err(e) => {
                    report.verdict = Verdict::MaxIterations;
                    report.failure = Some(e.to_string());
                }
            }
        }
    }
    if report.verdict == Verdict::MaxIterations && report.failure.is_none() {
        report.failure = Some(format!("front still moving after {} outer iterations", config.max_outer));
    }

    report.final_picard_change = *field.picard_history.last().unwrap_or(&f64::NAN);
    report.final_linear_residual = field.linear_residual;
    report.mass_balance = field.mass_balance();
    report.slip_residual = field.slip_residual;
    report.wall_tangential_speed = field.wall_tangential_speed();
    report.max_speed = field.max_speed();
    if report.verdict == Verdict::Converged {
        let metrics = check_uniqueness(problem, &front, &field, &reference)?;
        report.final_mismatch = metrics.dirichlet_mismatch;
        report.uniqueness = Some(metrics);
        report.perpendicularity = Some(check_perpendicularity(&front, config.front_tol));
    }
    Ok(FbpRun { front, field, report, history })
}
