use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{FbpError, Field2D, SupersonicTrace};
use crate::radial::NozzleGeometry;

/// Shock front `r = f(theta)` sampled on a uniform grid over `[-theta_w, theta_w]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockFront {
    pub thetas: Vec<f64>,
    pub f: Vec<f64>,
    pub iteration: usize,
}

/// Uniform angular grid with exact endpoints.
pub fn theta_grid(half_angle: f64, ntheta: usize) -> Vec<f64> {
    let h = 2.0 * half_angle / (ntheta - 1) as f64;
    (0..ntheta)
        .map(|j| match j {
            0 => -half_angle,
            _ if j == ntheta - 1 => half_angle,
            _ => -half_angle + j as f64 * h,
        })
        .collect()
}

impl ShockFront {
    pub fn flat(r_s: f64, half_angle: f64, ntheta: usize) -> Self {
        Self { thetas: theta_grid(half_angle, ntheta), f: vec![r_s; ntheta], iteration: 0 }
    }

    pub fn from_radii(half_angle: f64, f: Vec<f64>) -> Self {
        Self { thetas: theta_grid(half_angle, f.len()), f, iteration: 0 }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn h_theta(&self) -> f64 {
        (self.thetas[self.thetas.len() - 1] - self.thetas[0]) / (self.thetas.len() - 1) as f64
    }

    /// Checks the graph-form invariants: a uniform grid of at least three
    /// nodes and `r0 < f < r1` everywhere.
    pub fn validate(&self, geom: &NozzleGeometry) -> Result<(), FbpError> {
        if self.f.len() < 3 || self.thetas.len() != self.f.len() {
            return Err(FbpError::FrontGrid { thetas: self.thetas.len(), radii: self.f.len() });
        }
        for (&theta, &f) in self.thetas.iter().zip(&self.f) {
            if !(f > geom.r0() && f < geom.r1()) {
                return Err(FbpError::FrontOutOfRange { theta, f, r0: geom.r0(), r1: geom.r1() });
            }
        }
        Ok(())
    }

    /// `f'` at every node: central differences inside, second-order
    /// one-sided differences at the walls.
    pub fn slope(&self) -> Vec<f64> {
        let n = self.f.len();
        let h = self.h_theta();
        let f = &self.f;
        (0..n)
            .map(|j| {
                if j == 0 {
                    (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                } else if j == n - 1 {
                    (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
                } else {
                    (f[j + 1] - f[j - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    pub fn max_deviation(&self, r_s: f64) -> f64 {
        self.f.iter().map(|f| (f - r_s).abs()).fold(0.0, f64::max)
    }
}

/// Shape of an initial front perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Perturbation {
    /// `cos(mode * pi * theta / theta_w)`.
    Cosine { mode: u32 },
    /// Seeded sum of wall-orthogonal cosines with decaying random weights.
    Noise { seed: u64 },
}

const NOISE_TERMS: u32 = 6;

/// `r_s` plus a perturbation whose largest node value is `amplitude`.
/// Every shape has `f' = 0` at both walls.
pub fn perturb_front(
    geom: &NozzleGeometry,
    r_s: f64,
    amplitude: f64,
    perturbation: Perturbation,
    ntheta: usize,
) -> Result<ShockFront, FbpError> {
    let limit = (r_s - geom.r0()).min(geom.r1() - r_s);
    if !(amplitude >= 0.0 && amplitude < limit) {
        return Err(FbpError::Amplitude { amplitude, limit });
    }
    if ntheta < 3 {
        return Err(FbpError::FrontGrid { thetas: ntheta, radii: ntheta });
    }
    let tw = geom.half_angle();
    let thetas = theta_grid(tw, ntheta);
    let shape: Vec<f64> = match perturbation {
        Perturbation::Cosine { mode } => {
            thetas.iter().map(|t| (mode as f64 * std::f64::consts::PI * t / tw).cos()).collect()
        }
        Perturbation::Noise { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let weights: Vec<f64> = (1..=NOISE_TERMS)
                .map(|k| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z / (k * k) as f64
                })
                .collect();
            let raw: Vec<f64> = thetas
                .iter()
                .map(|t| {
                    weights
                        .iter()
                        .enumerate()
                        .map(|(k, w)| w * ((k + 1) as f64 * std::f64::consts::PI * (t + tw) / (2.0 * tw)).cos())
                        .sum()
                })
                .collect();
            let peak = raw.iter().map(|x: &f64| x.abs()).fold(0.0, f64::max);
            raw.into_iter().map(|x| if peak > 0.0 { x / peak } else { 0.0 }).collect()
        }
    };
    let f = shape.into_iter().map(|s| r_s + amplitude * s).collect();
    let front = ShockFront { thetas, f, iteration: 0 };
    front.validate(geom)?;
    Ok(front)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontUpdate {
    pub front: ShockFront,
    pub max_movement: f64,
    pub max_mismatch: f64,
    pub clipped_nodes: usize,
}

/// One Newton-like step on the continuity mismatch `phi^- - phi^+` at the
/// front. The denominator `v^- - d_r phi^+` is floored at `1e-6 c*`; new
/// radii are clipped to `[lo, hi]`.
pub fn front_update(
    front: &ShockFront,
    field: &Field2D,
    trace: &SupersonicTrace,
    omega: f64,
    (lo, hi): (f64, f64),
) -> FrontUpdate {
    let floor = 1e-6 * trace.critical_speed;
    let mut f = front.f.clone();
    let mut max_movement: f64 = 0.0;
    let mut max_mismatch: f64 = 0.0;
    let mut clipped_nodes = 0;
    for (j, fj) in f.iter_mut().enumerate() {
        let mismatch = trace.phi[j] - field.phi[field.idx(0, j)];
        let den = (trace.speed[j] - field.front_radial_derivative(j)).max(floor);
        let mut next = *fj - omega * mismatch / den;
        if next < lo || next > hi {
            clipped_nodes += 1;
            next = next.clamp(lo, hi);
        }
        max_mismatch = max_mismatch.max(mismatch.abs());
        max_movement = max_movement.max((next - *fj).abs());
        *fj = next;
    }
    FrontUpdate {
        front: ShockFront { thetas: front.thetas.clone(), f, iteration: front.iteration + 1 },
        max_movement,
        max_mismatch,
        clipped_nodes,
    }
}

/// One-sided estimates of `f'` at both walls against the threshold
/// `10 front_tol / h_theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerpendicularityCheck {
    pub left: f64,
    pub right: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub fn check_perpendicularity(front: &ShockFront, front_tol: f64) -> PerpendicularityCheck {
    let slope = front.slope();
    let left = slope[0].abs();
    let right = slope[slope.len() - 1].abs();
    let threshold = 10.0 * front_tol / front.h_theta();
    PerpendicularityCheck { left, right, threshold, passed: left <= threshold && right <= threshold }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn geom() -> NozzleGeometry {
        NozzleGeometry::new(1.0, 2.0, 2, PI / 6.0).unwrap()
    }

    #[test]
    fn grid_has_exact_endpoints() {
        let t = theta_grid(PI / 6.0, 64);
        assert_eq!(t[0], -PI / 6.0);
        assert_eq!(t[63], PI / 6.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let f = perturb_front(&geom(), 1.5, 0.0, Perturbation::Cosine { mode: 1 }, 64).unwrap();
        assert!(f.f.iter().all(|&x| x == 1.5));
        let c = check_perpendicularity(&f, 1e-6);
        assert_eq!((c.left, c.right), (0.0, 0.0));
        assert!(c.passed);
    }

    #[test]
    fn cosine_extremum_equals_amplitude() {
        let f = perturb_front(&geom(), 1.5, 0.05, Perturbation::Cosine { mode: 1 }, 64).unwrap();
        assert!((f.max_deviation(1.5) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn cosine_modes_meet_walls_at_right_angles() {
        for mode in 1..=3 {
            let f = perturb_front(&geom(), 1.5, 0.05, Perturbation::Cosine { mode }, 64).unwrap();
            let c = check_perpendicularity(&f, 1e-6);
            // f''' vanishes at the walls, leaving the h^3 f'''' / 4 term
            let k = mode as f64 * PI / (PI / 6.0);
            let bound = 0.05 * k.powi(4) * f.h_theta().powi(3) / 4.0 * 1.05;
            assert!(c.left <= bound && c.right <= bound, "{mode}: {c:?} vs {bound}");
            assert!((c.left - c.right).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_is_reproducible_normalized_and_wall_orthogonal() {
        let p = Perturbation::Noise { seed: 7 };
        let a = perturb_front(&geom(), 1.5, 0.03, p, 64).unwrap();
        let b = perturb_front(&geom(), 1.5, 0.03, p, 64).unwrap();
        assert_eq!(a, b);
        assert!((a.max_deviation(1.5) - 0.03).abs() < 1e-15);
        let c = perturb_front(&geom(), 1.5, 0.03, Perturbation::Noise { seed: 8 }, 64).unwrap();
        assert_ne!(a, c);
        let check = check_perpendicularity(&a, 1e-6);
        assert!(check.left < 1e-3 && check.right < 1e-3, "{check:?}");
    }

    #[test]
    fn amplitude_limit() {
        assert!(matches!(
            perturb_front(&geom(), 1.5, 0.5, Perturbation::Cosine { mode: 1 }, 64),
            Err(FbpError::Amplitude { .. })
        ));
        assert!(perturb_front(&geom(), 1.5, 0.49, Perturbation::Cosine { mode: 1 }, 64).is_ok());
    }

    #[test]
    fn validation() {
        let g = geom();
        assert!(ShockFront::flat(1.5, PI / 6.0, 8).validate(&g).is_ok());
        assert!(matches!(ShockFront::flat(1.0, PI / 6.0, 8).validate(&g), Err(FbpError::FrontOutOfRange { .. })));
        assert!(matches!(ShockFront::flat(1.5, PI / 6.0, 2).validate(&g), Err(FbpError::FrontGrid { .. })));
    }

    #[test]
    fn slope_of_tilted_front() {
        let f = ShockFront::from_radii(0.5, (0..11).map(|j| 1.5 + 0.01 * j as f64).collect());
        for s in f.slope() {
            assert!((s - 0.1).abs() < 1e-12);
        }
    }
}
