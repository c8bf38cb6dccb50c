use proptest::prelude::*;
use transonic::fbp2d::{perturb_front, supersonic_trace, Perturbation};
use transonic::radial::{Branch, ExitDatum, NozzleGeometry, RadialProblem};
use transonic::GasModel;

fn problem(dim: u32) -> RadialProblem {
    let gas = GasModel::new(1.4, 2.5).unwrap();
    let geom = NozzleGeometry::new(1.0, 2.0, dim, std::f64::consts::PI / 6.0).unwrap();
    RadialProblem::new(gas, geom, 1.5).unwrap()
}

fn shape() -> impl Strategy<Value = Perturbation> {
    prop_oneof![
        (0u32..6).prop_map(|mode| Perturbation::Cosine { mode }),
        any::<u64>().prop_map(|seed| Perturbation::Noise { seed }),
    ]
}

proptest! {
    #[test]
    fn bernoulli_holds_on_the_closure(gamma in 1.05f64..3.0, b0 in 0.5f64..5.0, t in 0.0f64..0.999) {
        let gas = GasModel::new(gamma, b0).unwrap();
        let v = t * gas.max_speed();
        let rho = gas.density_from_speed(v).unwrap();
        prop_assert!(rho > 0.0);
        prop_assert!(gas.bernoulli_residual(v, rho).abs() <= 1e-12 * b0.max(1.0));
    }

    #[test]
    fn flux_peaks_at_the_critical_speed(gamma in 1.05f64..3.0, b0 in 0.5f64..5.0, t in 0.0f64..1.0) {
        let gas = GasModel::new(gamma, b0).unwrap();
        let v = t * gas.max_speed();
        prop_assert!(gas.mass_flux_density(v).unwrap() <= gas.sonic_flux() * (1.0 + 1e-14));
    }

    #[test]
    fn branches_carry_the_same_flux(dim in 2u32..4, r in 1.0f64..2.0) {
        let p = problem(dim);
        let gas = p.gas();
        let sup = p.branch_speed(r, Branch::Supersonic).unwrap();
        let sub = p.branch_speed(r, Branch::Subsonic).unwrap();
        prop_assert!(sub < gas.critical_speed() && gas.critical_speed() < sup);
        let a0 = p.a0();
        let area = r.powi(dim as i32 - 1);
        for v in [sup, sub] {
            prop_assert!((area * gas.mass_flux_density(v).unwrap() - a0).abs() <= 1e-11 * a0);
        }
    }

    #[test]
    fn exit_potential_increases_with_the_shock_radius(dim in 2u32..4, a in 1.05f64..1.95, b in 1.05f64..1.95) {
        prop_assume!((a - b).abs() > 1e-3);
        let p = problem(dim);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(p.exit_potential(lo).unwrap() < p.exit_potential(hi).unwrap());
    }

    #[test]
    fn potential_datum_round_trips(r_s in 1.05f64..1.95) {
        let p = problem(3);
        let phi1 = p.exit_potential(r_s).unwrap();
        let found = p.find_shock_for(ExitDatum::Potential(phi1), 1e-13).unwrap();
        prop_assert!((found.r_s - r_s).abs() <= 1e-9);
    }

    #[test]
    fn perturbed_front_peaks_at_the_amplitude(
        r_s in 1.2f64..1.8,
        frac in 0.0f64..0.99,
        shape in shape(),
        ntheta in 3usize..80,
    ) {
        let p = problem(2);
        let amplitude = frac * 0.2;
        let front = perturb_front(p.geometry(), r_s, amplitude, shape, ntheta).unwrap();
        prop_assert_eq!(front.len(), ntheta);
        prop_assert!(front.thetas.windows(2).all(|w| w[1] > w[0]));
        // cosines reach |1| at the walls and noise is normalised to its peak
        prop_assert!((front.max_deviation(r_s) - amplitude).abs() <= 1e-12);
        prop_assert!(front.f.iter().all(|&f| f > 1.0 && f < 2.0));
    }

    #[test]
    fn supersonic_trace_matches_the_radial_flux(r_s in 1.2f64..1.8, mode in 0u32..4, amp in 0.0f64..0.15) {
        let p = problem(2);
        let front = perturb_front(p.geometry(), r_s, amp, Perturbation::Cosine { mode }, 17).unwrap();
        let trace = supersonic_trace(&p, &front).unwrap();
        for (k, &f) in front.f.iter().enumerate() {
            prop_assert!((trace.flux[k] * f - p.a0()).abs() <= 1e-12 * p.a0());
            prop_assert!(trace.speed[k] > trace.critical_speed);
        }
    }
}
