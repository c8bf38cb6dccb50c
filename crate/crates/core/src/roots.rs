//! Bracketed scalar root finding.
//!
//! Every caller in this crate has a monotone function on a known interval,
//! so the bracket is never lost: Newton steps are taken when they land
//! inside the current bracket and shrink the residual, bisection otherwise.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("no convergence after {iterations} iterations, bracket [{lo}, {hi}], residual {residual}")]
    MaxIterations { iterations: usize, lo: f64, hi: f64, residual: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once `|f(x)| <= ftol`.
    pub ftol: f64,
    /// Stop once the bracket is narrower than `xtol * max(1, |x|)`.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { ftol: 0.0, xtol: 4.0 * f64::EPSILON, max_iter: 400 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Safeguarded Newton on `[lo, hi]`; `f` returns the value and derivative.
pub fn newton_bisect<F>(f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root, RootError>
where
    F: Fn(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(RootError::NotBracketed { lo, hi, f_lo, f_hi });
    }
    // orient so that f(neg) < 0 < f(pos)
    let (mut neg, mut pos) = if f_lo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    let mut x = 0.5 * (lo + hi);
    let mut last_step = (hi - lo).abs();

    for it in 1..=opts.max_iter {
        let (fx, dfx) = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= opts.ftol || fx == 0.0 {
            return Ok(Root { x, residual: fx, iterations: it });
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };
        if b - a <= opts.xtol * x.abs().max(1.0) {
            let (xb, fb) = best;
            return Ok(Root { x: xb, residual: fb, iterations: it });
        }

        let newton = x - fx / dfx;
        let inside = dfx != 0.0 && newton.is_finite() && newton > a && newton < b;
        let step = (newton - x).abs();
        if inside && step < 0.5 * last_step {
            last_step = step;
            x = newton;
        } else {
            last_step = b - a;
            x = 0.5 * (a + b);
        }
    }
    let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };
    Err(RootError::MaxIterations { iterations: opts.max_iter, lo: a, hi: b, residual: best.1 })
}

/// Plain bisection for monotone maps whose derivative is not at hand.
pub fn bisect<F>(f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root, RootError>
where
    F: FnMut(f64) -> f64,
{
    let mut f = f;
    newton_bisect_mut(&mut f, lo, hi, opts)
}

fn newton_bisect_mut<F>(f: &mut F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root, RootError>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() || f_hi.is_nan() || (f_lo != 0.0 && f_hi != 0.0 && f_lo.signum() == f_hi.signum()) {
        return Err(RootError::NotBracketed { lo, hi, f_lo, f_hi });
    }
    if f_lo.abs() <= opts.ftol {
        return Ok(Root { x: lo, residual: f_lo, iterations: 0 });
    }
    if f_hi.abs() <= opts.ftol {
        return Ok(Root { x: hi, residual: f_hi, iterations: 0 });
    }
    let (mut a, mut b) = (lo, hi);
    let a_negative = f_lo < 0.0;
    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    for it in 1..=opts.max_iter {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() < best.1.abs() {
            best = (m, fm);
        }
        if fm.abs() <= opts.ftol {
            return Ok(Root { x: m, residual: fm, iterations: it });
        }
        if (fm < 0.0) == a_negative {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() <= opts.xtol * m.abs().max(1.0) {
            return Ok(Root { x: best.0, residual: best.1, iterations: it });
        }
    }
    Err(RootError::MaxIterations { iterations: opts.max_iter, lo: a.min(b), hi: a.max(b), residual: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_finds_sqrt2() {
        let r = newton_bisect(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, RootOptions::default()).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.iterations < 20);
    }

    #[test]
    fn newton_survives_flat_derivative() {
        // derivative vanishes at the root: Newton degenerates, bisection must carry it
        let r =
            newton_bisect(|x| ((x - 1.0).powi(3), 3.0 * (x - 1.0).powi(2)), 0.0, 3.0, RootOptions::default()).unwrap();
        assert!((r.x - 1.0).abs() < 1e-5);
    }

    #[test]
    fn decreasing_function_is_fine() {
        let r = newton_bisect(|x| (1.0 - x, -1.0), 0.0, 5.0, RootOptions::default()).unwrap();
        assert_eq!(r.x, 1.0);
    }

    #[test]
    fn not_bracketed() {
        let e = newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, RootOptions::default()).unwrap_err();
        assert!(matches!(e, RootError::NotBracketed { .. }));
        assert!(matches!(bisect(|x| x + 3.0, 0.0, 1.0, RootOptions::default()), Err(RootError::NotBracketed { .. })));
    }

    #[test]
    fn bisection_respects_ftol_and_caps() {
        let opts = RootOptions { ftol: 1e-6, ..Default::default() };
        let r = bisect(|x| x.powi(3) - 0.1, 0.0, 1.0, opts).unwrap();
        assert!(r.residual.abs() <= 1e-6);
        let capped = RootOptions { ftol: 0.0, xtol: 0.0, max_iter: 5 };
        assert!(matches!(bisect(|x| x - 0.3, 0.0, 1.0, capped), Err(RootError::MaxIterations { .. })));
    }
}
