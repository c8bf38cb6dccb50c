//! Subsonic potential flow between a shock front and the exit arc.
//!
//! The region `f(theta) < r < r1` is mapped to the rectangle
//! `s = (r - f) / (r1 - f) in [0, 1]`. With `L = r1 - f` and `m = (1 - s) f'`
//! the equation `div(rho grad phi) = 0` becomes
//!
//! ```text
//! d_s[rho ((m^2 + r^2)/(L r) phi_s - (m/r) phi_theta)]
//!   + d_theta[rho (-(m/r) phi_s + (L/r) phi_theta)] = 0
//! ```
//!
//! which is discretized with vertex-centred finite volumes: half cells at the
//! front and at the walls, exit nodes fixed by the exit potential. The bracketed
//! terms are the mass fluxes per unit `theta` and per unit `s`. Only `f` and
//! `f'` enter. Density and the mixed-derivative terms are frozen at the
//! previous Picard iterate, leaving a five-point system that is symmetric
//! whenever `f' = 0`.

use serde::Serialize;

use super::relax::{FivePoint, RelaxError};
use super::{FbpConfig, FbpError, ShockFront, SupersonicTrace};
use crate::gas::GasModel;

/// Converged subsonic field on the mapped grid. Arrays are stored column by
/// column, `j * nr + i`, with `i` along `s` and `j` along `theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field2D {
    pub nr: usize,
    pub ntheta: usize,
    pub s: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Front radii the field was solved on.
    pub front: Vec<f64>,
    pub r1: f64,
    pub phi: Vec<f64>,
    pub v_r: Vec<f64>,
    pub v_theta: Vec<f64>,
    pub speed: Vec<f64>,
    pub rho: Vec<f64>,
    /// Max change of `phi` per Picard sweep.
    pub picard_history: Vec<f64>,
    /// Relaxation sweeps per Picard sweep.
    pub linear_sweeps: Vec<usize>,
    pub linear_residual: f64,
    /// Nodes whose speed was clamped inside the density at the last sweep.
    pub clamped_nodes: usize,
    /// Mass entering through the front and leaving through the last
    /// interior face, per unit depth.
    pub mass_inflow: f64,
    pub mass_outflow: f64,
    /// Largest wall half-cell flux imbalance relative to the inflow.
    pub slip_residual: f64,
}

impl Field2D {
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nr + i
    }

    pub fn radius(&self, i: usize, j: usize) -> f64 {
        let f = self.front[j];
        f + self.s[i] * (self.r1 - f)
    }

    pub fn max_speed(&self) -> f64 {
        self.speed.iter().copied().fold(0.0, f64::max)
    }

    /// `|outflow - inflow| / inflow`.
    pub fn mass_balance(&self) -> f64 {
        (self.mass_outflow - self.mass_inflow).abs() / self.mass_inflow.abs()
    }

    /// Nodes with `v_r < 0`, i.e. where the flow runs back towards the front.
    pub fn hypothesis_violations(&self) -> usize {
        self.v_r.iter().filter(|&&v| v < 0.0).count()
    }

    /// `d_r phi^+` at front node `j` from a second-order one-sided difference.
    pub fn front_radial_derivative(&self, j: usize) -> f64 {
        let k = self.idx(0, j);
        let hs = self.s[1] - self.s[0];
        let phi_s = (-3.0 * self.phi[k] + 4.0 * self.phi[k + 1] - self.phi[k + 2]) / (2.0 * hs);
        phi_s / (self.r1 - self.front[j])
    }

    /// Largest `|v_theta|` at the wall nodes, a discretization-level
    /// companion to `slip_residual`.
    pub fn wall_tangential_speed(&self) -> f64 {
        let last = self.ntheta - 1;
        (0..self.nr)
            .flat_map(|i| [self.v_theta[self.idx(i, 0)], self.v_theta[self.idx(i, last)]])
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

/// Per-column mapping data.
struct Mapping {
    nr: usize,
    nt: usize,
    hs: f64,
    ht: f64,
    s: Vec<f64>,
    r1: f64,
    f: Vec<f64>,
    fp: Vec<f64>,
}

impl Mapping {
    fn new(front: &ShockFront, r1: f64, nr: usize) -> Self {
        let hs = 1.0 / (nr - 1) as f64;
        let s = (0..nr).map(|i| if i == nr - 1 { 1.0 } else { i as f64 * hs }).collect();
        Self { nr, nt: front.len(), hs, ht: front.h_theta(), s, r1, f: front.f.clone(), fp: front.slope() }
    }

    #[inline]
    fn k(&self, i: usize, j: usize) -> usize {
        j * self.nr + i
    }

    /// Nodal `(phi_s, phi_theta)`: central inside, second-order one-sided at
    /// the edges.
    fn gradients(&self, phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (nr, nt) = (self.nr, self.nt);
        let mut ps = vec![0.0; nr * nt];
        let mut pt = vec![0.0; nr * nt];
        for j in 0..nt {
            for i in 0..nr {
                let k = self.k(i, j);
                ps[k] = if i == 0 {
                    (-3.0 * phi[k] + 4.0 * phi[k + 1] - phi[k + 2]) / (2.0 * self.hs)
                } else if i == nr - 1 {
                    (3.0 * phi[k] - 4.0 * phi[k - 1] + phi[k - 2]) / (2.0 * self.hs)
                } else {
                    (phi[k + 1] - phi[k - 1]) / (2.0 * self.hs)
                };
                pt[k] = if j == 0 {
                    (-3.0 * phi[k] + 4.0 * phi[k + nr] - phi[k + 2 * nr]) / (2.0 * self.ht)
                } else if j == nt - 1 {
                    (3.0 * phi[k] - 4.0 * phi[k - nr] + phi[k - 2 * nr]) / (2.0 * self.ht)
                } else {
                    (phi[k + nr] - phi[k - nr]) / (2.0 * self.ht)
                };
            }
        }
        (ps, pt)
    }

    /// Nodal velocity components `(v_r, v_theta)` from mapped gradients.
    fn velocity(&self, ps: &[f64], pt: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut vr = vec![0.0; ps.len()];
        let mut vt = vec![0.0; ps.len()];
        for j in 0..self.nt {
            let l = self.r1 - self.f[j];
            for i in 0..self.nr {
                let k = self.k(i, j);
                let r = self.f[j] + self.s[i] * l;
                let m = (1.0 - self.s[i]) * self.fp[j];
                vr[k] = ps[k] / l;
                vt[k] = (pt[k] - m * vr[k]) / r;
            }
        }
        (vr, vt)
    }
}

struct Frozen {
    rho: Vec<f64>,
    ps: Vec<f64>,
    pt: Vec<f64>,
    clamped: usize,
}

fn freeze(map: &Mapping, gas: &GasModel, phi: &[f64], cap: f64) -> (Frozen, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (ps, pt) = map.gradients(phi);
    let (vr, vt) = map.velocity(&ps, &pt);
    let mut clamped = 0;
    let mut speed = Vec::with_capacity(vr.len());
    let rho = vr
        .iter()
        .zip(&vt)
        .map(|(a, b)| {
            let q = a.hypot(*b);
            speed.push(q);
            if q > cap {
                clamped += 1;
            }
            gas.density_unchecked(q.min(cap))
        })
        .collect();
    (Frozen { rho, ps, pt, clamped }, vr, vt, speed)
}

/// Face coefficients: flux = `k * (difference of phi) + x`.
struct Faces {
    /// s-faces `(i + 1/2, j)`, `i < nr - 1`.
    ks: Vec<f64>,
    xs: Vec<f64>,
    /// theta-faces `(i, j + 1/2)`, `j < nt - 1`.
    kt: Vec<f64>,
    xt: Vec<f64>,
}

fn faces(map: &Mapping, fr: &Frozen) -> Faces {
    let (nr, nt) = (map.nr, map.nt);
    let mut out =
        Faces { ks: vec![0.0; nr * nt], xs: vec![0.0; nr * nt], kt: vec![0.0; nr * nt], xt: vec![0.0; nr * nt] };
    for j in 0..nt {
        let l = map.r1 - map.f[j];
        for i in 0..nr - 1 {
            let k = map.k(i, j);
            let s = 0.5 * (map.s[i] + map.s[i + 1]);
            let r = map.f[j] + s * l;
            let m = (1.0 - s) * map.fp[j];
            let rho = 0.5 * (fr.rho[k] + fr.rho[k + 1]);
            let pt = 0.5 * (fr.pt[k] + fr.pt[k + 1]);
            out.ks[k] = rho * (m * m + r * r) / (l * r) / map.hs;
            out.xs[k] = -rho * m / r * pt;
        }
    }
    for j in 0..nt - 1 {
        let f = 0.5 * (map.f[j] + map.f[j + 1]);
        let fp = (map.f[j + 1] - map.f[j]) / map.ht;
        let l = map.r1 - f;
        for i in 0..nr {
            let k = map.k(i, j);
            let r = f + map.s[i] * l;
            let m = (1.0 - map.s[i]) * fp;
            let rho = 0.5 * (fr.rho[k] + fr.rho[k + nr]);
            let ps = 0.5 * (fr.ps[k] + fr.ps[k + nr]);
            out.kt[k] = rho * l / r / map.ht;
            out.xt[k] = -rho * m / r * ps;
        }
    }
    out
}

struct Assembled {
    system: FivePoint,
    faces: Faces,
    inflow: Vec<f64>,
}

/// Control-volume balances for every node except the exit row.
fn assemble(map: &Mapping, fr: &Frozen, inflow: &[f64], phi_exit: f64) -> Assembled {
    let (nr, nt) = (map.nr, map.nt);
    let rows = nr - 1;
    let fc = faces(map, fr);
    let mut a = FivePoint::zeros(rows, nt);
    for j in 0..nt {
        let wt = if j == 0 || j == nt - 1 { 0.5 * map.ht } else { map.ht };
        for i in 0..rows {
            let ws = if i == 0 { 0.5 * map.hs } else { map.hs };
            let k = map.k(i, j);
            let u = j * rows + i;
            let east = wt * fc.ks[k];
            let (west, x_west) = if i == 0 { (0.0, inflow[j]) } else { (wt * fc.ks[k - 1], fc.xs[k - 1]) };
            let (north, x_north) = if j + 1 < nt { (ws * fc.kt[k], fc.xt[k]) } else { (0.0, 0.0) };
            let (south, x_south) = if j > 0 { (ws * fc.kt[k - nr], fc.xt[k - nr]) } else { (0.0, 0.0) };
            a.east[u] = if i + 1 < rows { east } else { 0.0 };
            a.west[u] = west;
            a.north[u] = north;
            a.south[u] = south;
            a.diag[u] = east + west + north + south;
            a.rhs[u] = wt * (fc.xs[k] - x_west) + ws * (x_north - x_south);
            if i + 1 == rows {
                a.rhs[u] += east * phi_exit;
            }
        }
    }
    Assembled { system: a, faces: fc, inflow: inflow.to_vec() }
}

/// Inflow, outflow through the last interior s-face, and the worst wall
/// half-cell imbalance, all for `phi` under the frozen coefficients.
fn balances(map: &Mapping, asm: &Assembled, phi: &[f64]) -> (f64, f64, f64) {
    let (nr, nt) = (map.nr, map.nt);
    let weight = |j: usize| if j == 0 || j == nt - 1 { 0.5 * map.ht } else { map.ht };
    let inflow: f64 = (0..nt).map(|j| weight(j) * asm.inflow[j]).sum();
    let outflow: f64 = (0..nt)
        .map(|j| {
            let k = map.k(nr - 2, j);
            weight(j) * (asm.faces.ks[k] * (phi[k + 1] - phi[k]) + asm.faces.xs[k])
        })
        .sum();
    let unknowns: Vec<f64> =
        (0..nt).flat_map(|j| (0..nr - 1).map(move |i| (i, j))).map(|(i, j)| phi[map.k(i, j)]).collect();
    let mut r = vec![0.0; unknowns.len()];
    asm.system.residual(&unknowns, &mut r);
    let rows = nr - 1;
    let wall = (0..rows).flat_map(|i| [r[i], r[(nt - 1) * rows + i]]).map(f64::abs).fold(0.0, f64::max);
    (inflow, outflow, wall / inflow.abs())
}

/// Initial iterate: linear in `s` from the upstream potential to `phi_exit`.
pub(crate) fn linear_guess(front_phi: &[f64], phi_exit: f64, nr: usize) -> Vec<f64> {
    let mut phi = Vec::with_capacity(nr * front_phi.len());
    for &p0 in front_phi {
        for i in 0..nr {
            let s = i as f64 / (nr - 1) as f64;
            phi.push(p0 + s * (phi_exit - p0));
        }
    }
    phi
}

/// Picard iteration for the subsonic field behind `front`. `guess` (same
/// grid layout) is used as the first iterate; exit nodes are reset to
/// `phi_exit`.
pub(crate) fn picard(
    gas: &GasModel,
    front: &ShockFront,
    trace: &SupersonicTrace,
    r1: f64,
    phi_exit: f64,
    config: &FbpConfig,
    guess: Vec<f64>,
) -> Result<Field2D, FbpError> {
    let (nr, nt) = (config.nr, front.len());
    let map = Mapping::new(front, r1, nr);
    let cap = (1.0 - config.delta_clamp) * gas.critical_speed();
    let inflow: Vec<f64> = trace.flux.iter().zip(&front.f).map(|(g, f)| g * f).collect();
    let mut phi = guess;
    for j in 0..nt {
        phi[map.k(nr - 1, j)] = phi_exit;
    }
    let rows = nr - 1;
    let mut history = Vec::new();
    let mut sweeps = Vec::new();
    let mut unknowns = vec![0.0; rows * nt];
    for it in 1..=config.max_picard {
        let (frozen, ..) = freeze(&map, gas, &phi, cap);
        let asm = assemble(&map, &frozen, &inflow, phi_exit);
        for j in 0..nt {
            unknowns[j * rows..(j + 1) * rows].copy_from_slice(&phi[j * nr..j * nr + rows]);
        }
        let stats = asm
            .system
            .solve(&mut unknowns, config.sor_omega, config.linear_tol, config.max_linear_sweeps)
            .map_err(|e| match e {
                RelaxError::Breakdown { sweeps, residual } | RelaxError::MaxSweeps { sweeps, residual } => {
                    FbpError::LinearSolver { picard_iteration: it, sweeps, residual }
                }
            })?;
        let mut change: f64 = 0.0;
        for j in 0..nt {
            for i in 0..rows {
                let k = map.k(i, j);
                let new = unknowns[j * rows + i];
                change = change.max((new - phi[k]).abs());
                phi[k] = new;
            }
        }
        history.push(change);
        sweeps.push(stats.sweeps);
        if !change.is_finite() {
            return Err(FbpError::PicardStagnation { iterations: it, history });
        }
        if change < config.picard_tol {
            let (inflow_total, outflow, slip) = balances(&map, &asm, &phi);
            let (frozen, v_r, v_theta, speed) = freeze(&map, gas, &phi, cap);
            return Ok(Field2D {
                nr,
                ntheta: nt,
                s: map.s.clone(),
                thetas: front.thetas.clone(),
                front: front.f.clone(),
                r1,
                phi,
                v_r,
                v_theta,
                speed,
                rho: frozen.rho,
                picard_history: history,
                linear_sweeps: sweeps,
                linear_residual: stats.residual,
                clamped_nodes: frozen.clamped,
                mass_inflow: inflow_total,
                mass_outflow: outflow,
                slip_residual: slip,
            });
        }
    }
    Err(FbpError::PicardStagnation { iterations: config.max_picard, history })
}
