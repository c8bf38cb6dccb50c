//! Quadrature rules used to integrate speeds into potentials.

// 5-point Gauss-Legendre on [-1, 1]
const GL5_NODES: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss-Legendre rule with `panels` equal panels.
/// Works for `b < a` (returns the negated integral).
pub fn gauss_legendre<F, E>(mut f: F, a: f64, b: f64, panels: usize) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let mut panel = 0.0;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            panel += w * f(mid + 0.5 * h * x)?;
        }
        total += 0.5 * h * panel;
    }
    Ok(total)
}

/// Adaptive Gauss-Legendre: panels are halved until the one-panel and
/// two-panel estimates agree to `tol`, which is halved with each split.
/// Used for integrands with a nearby branch point.
pub fn adaptive_gauss_legendre<F, E>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss_legendre(&mut f, a, b, 1)?;
    refine(&mut f, a, b, whole, tol, 0)
}

const MAX_DEPTH: u32 = 40;

fn refine<F, E>(f: &mut F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let m = 0.5 * (a + b);
    let left = gauss_legendre(&mut *f, a, m, 1)?;
    let right = gauss_legendre(&mut *f, m, b, 1)?;
    if depth >= MAX_DEPTH || (left + right - whole).abs() <= tol {
        return Ok(left + right);
    }
    Ok(refine(f, a, m, left, 0.5 * tol, depth + 1)? + refine(f, m, b, right, 0.5 * tol, depth + 1)?)
}

/// Simpson's rule on a single interval from endpoint and midpoint samples.
#[inline]
pub fn simpson(h: f64, left: f64, mid: f64, right: f64) -> f64 {
    h / 6.0 * (left + 4.0 * mid + right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn gauss_legendre_exact_for_degree_nine() {
        let p = |x: f64| -> Result<f64, Infallible> { Ok(x.powi(9) - 3.0 * x.powi(4) + 2.0) };
        let exact = |x: f64| x.powi(10) / 10.0 - 3.0 * x.powi(5) / 5.0 + 2.0 * x;
        let v = gauss_legendre(p, -0.3, 1.7, 1).unwrap();
        assert!((v - (exact(1.7) - exact(-0.3))).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_reversed_limits() {
        let f = |x: f64| -> Result<f64, Infallible> { Ok(x.exp()) };
        let fwd = gauss_legendre(f, 0.0, 1.0, 4).unwrap();
        let back = gauss_legendre(f, 1.0, 0.0, 4).unwrap();
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-14);
        assert_eq!(fwd, -back);
    }

    #[test]
    fn adaptive_handles_nearby_branch_point() {
        // sqrt(x - 0.99) on [1, 2]: branch point 0.01 outside the interval
        let f = |x: f64| -> Result<f64, Infallible> { Ok((x - 0.99).sqrt()) };
        let exact = 2.0 / 3.0 * (1.01f64.powf(1.5) - 0.01f64.powf(1.5));
        let v = adaptive_gauss_legendre(f, 1.0, 2.0, 1e-14).unwrap();
        assert!((v - exact).abs() < 1e-13, "{}", v - exact);
        assert_eq!(adaptive_gauss_legendre(f, 1.5, 1.5, 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let f = |x: f64| x * x * x - x;
        let (a, b) = (0.5, 2.0);
        let v = simpson(b - a, f(a), f(0.5 * (a + b)), f(b));
        let exact = |x: f64| x.powi(4) / 4.0 - x * x / 2.0;
        assert!((v - (exact(b) - exact(a))).abs() < 1e-14);
    }
}
