//! Line relaxation for the five-point systems of the subsonic solve.
//!
//! Unknowns are stored column by column (`j * rows + i`, `i` along the
//! stream, `j` across it). Each sweep solves every column exactly with the
//! Thomas algorithm, forward then backward over the columns, and then adds a
//! column-independent correction obtained from the column-summed residual.
//! The correction removes the smooth cross-stream mode that line relaxation
//! alone damps slowly.

#[derive(Debug, Clone)]
pub(crate) struct FivePoint {
    pub rows: usize,
    pub cols: usize,
    /// Coupling to `i - 1`, `i + 1`, `j - 1`, `j + 1`.
    pub west: Vec<f64>,
    pub east: Vec<f64>,
    pub south: Vec<f64>,
    pub north: Vec<f64>,
    pub diag: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SolveStats {
    pub sweeps: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum RelaxError {
    Breakdown { sweeps: usize, residual: f64 },
    MaxSweeps { sweeps: usize, residual: f64 },
}

impl FivePoint {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let n = rows * cols;
        Self {
            rows,
            cols,
            west: vec![0.0; n],
            east: vec![0.0; n],
            south: vec![0.0; n],
            north: vec![0.0; n],
            diag: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * self.rows + i
    }

    /// `b - A x` at every unknown.
    pub fn residual(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..self.cols {
            for i in 0..self.rows {
                let k = self.at(i, j);
                let mut ax = self.diag[k] * x[k];
                if i > 0 {
                    ax -= self.west[k] * x[k - 1];
                }
                if i + 1 < self.rows {
                    ax -= self.east[k] * x[k + 1];
                }
                if j > 0 {
                    ax -= self.south[k] * x[k - self.rows];
                }
                if j + 1 < self.cols {
                    ax -= self.north[k] * x[k + self.rows];
                }
                out[k] = self.rhs[k] - ax;
            }
        }
    }

    /// Diagonally scaled norm `sqrt(sum r^2 / a_P)`, a cheap stand-in for
    /// the energy norm of the error.
    fn scaled_norm(&self, r: &[f64]) -> f64 {
        r.iter().zip(&self.diag).map(|(r, d)| r * r / d).sum::<f64>().sqrt()
    }

    fn line(&self, j: usize, x: &mut [f64], omega: f64, work: &mut LineWork) {
        let n = self.rows;
        let base = j * n;
        for i in 0..n {
            let k = base + i;
            let mut b = self.rhs[k];
            if j > 0 {
                b += self.south[k] * x[k - n];
            }
            if j + 1 < self.cols {
                b += self.north[k] * x[k + n];
            }
            work.sub[i] = -self.west[k];
            work.main[i] = self.diag[k];
            work.sup[i] = -self.east[k];
            work.rhs[i] = b;
        }
        thomas(&work.sub[..n], &work.main[..n], &work.sup[..n], &mut work.rhs[..n], &mut work.scratch[..n]);
        for i in 0..n {
            let k = base + i;
            x[k] += omega * (work.rhs[i] - x[k]);
        }
    }

    fn column_correction(&self, r: &[f64], x: &mut [f64], work: &mut LineWork) {
        let n = self.rows;
        for i in 0..n {
            let (mut w, mut d, mut e, mut s) = (0.0, 0.0, 0.0, 0.0);
            for j in 0..self.cols {
                let k = self.at(i, j);
                w += self.west[k];
                e += self.east[k];
                d += self.diag[k] - self.south[k] - self.north[k];
                s += r[k];
            }
            work.sub[i] = -w;
            work.main[i] = d;
            work.sup[i] = -e;
            work.rhs[i] = s;
        }
        thomas(&work.sub[..n], &work.main[..n], &work.sup[..n], &mut work.rhs[..n], &mut work.scratch[..n]);
        for j in 0..self.cols {
            for i in 0..n {
                x[j * n + i] += work.rhs[i];
            }
        }
    }

    /// Symmetric line SOR with column correction, warm-started from `x`,
    /// until the scaled residual drops below `tol` times that of `b`.
    pub fn solve(&self, x: &mut [f64], omega: f64, tol: f64, max_sweeps: usize) -> Result<SolveStats, RelaxError> {
        let mut work = LineWork::new(self.rows);
        let mut r = vec![0.0; x.len()];
        let b_norm = self.scaled_norm(&self.rhs).max(f64::MIN_POSITIVE);
        self.residual(x, &mut r);
        let mut rel = self.scaled_norm(&r) / b_norm;
        if rel <= tol {
            return Ok(SolveStats { sweeps: 0, residual: rel });
        }
        for sweep in 1..=max_sweeps {
            for j in 0..self.cols {
                self.line(j, x, omega, &mut work);
            }
            for j in (0..self.cols).rev() {
                self.line(j, x, omega, &mut work);
            }
            self.residual(x, &mut r);
            self.column_correction(&r, x, &mut work);
            self.residual(x, &mut r);
            rel = self.scaled_norm(&r) / b_norm;
            if !rel.is_finite() {
                return Err(RelaxError::Breakdown { sweeps: sweep, residual: rel });
            }
            if rel <= tol {
                return Ok(SolveStats { sweeps: sweep, residual: rel });
            }
        }
        Err(RelaxError::MaxSweeps { sweeps: max_sweeps, residual: rel })
    }
}

struct LineWork {
    sub: Vec<f64>,
    main: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl LineWork {
    fn new(n: usize) -> Self {
        Self { sub: vec![0.0; n], main: vec![0.0; n], sup: vec![0.0; n], rhs: vec![0.0; n], scratch: vec![0.0; n] }
    }
}

/// Tridiagonal solve; the solution overwrites `rhs`.
fn thomas(sub: &[f64], main: &[f64], sup: &[f64], rhs: &mut [f64], c: &mut [f64]) {
    let n = main.len();
    c[0] = sup[0] / main[0];
    rhs[0] /= main[0];
    for i in 1..n {
        let m = main[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Anisotropic Laplacian with Neumann rows at i = 0 and the column
    /// edges, Dirichlet beyond the last row.
    fn anisotropic(rows: usize, cols: usize) -> FivePoint {
        let mut a = FivePoint::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                let k = j * rows + i;
                a.east[k] = 50.0;
                a.west[k] = if i > 0 { 50.0 } else { 0.0 };
                a.north[k] = if j + 1 < cols { 1.0 } else { 0.0 };
                a.south[k] = if j > 0 { 1.0 } else { 0.0 };
                a.diag[k] = a.east[k] + a.west[k] + a.north[k] + a.south[k];
                a.rhs[k] = ((i * 7 + j * 3) % 5) as f64 - 2.0;
            }
        }
        a
    }

    #[test]
    fn thomas_solves_small_system() {
        let sub = [0.0, -1.0, -1.0];
        let main = [2.0, 2.0, 2.0];
        let sup = [-1.0, -1.0, 0.0];
        let mut rhs = [1.0, 0.0, 1.0];
        let mut c = [0.0; 3];
        thomas(&sub, &main, &sup, &mut rhs, &mut c);
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn converges_on_anisotropic_problem() {
        let a = anisotropic(40, 24);
        let mut x = vec![0.0; 40 * 24];
        let stats = a.solve(&mut x, 1.3, 1e-11, 2000).unwrap();
        let mut r = vec![0.0; x.len()];
        a.residual(&x, &mut r);
        assert!(a.scaled_norm(&r) <= 1e-11 * a.scaled_norm(&a.rhs) * 1.0001);
        assert!(stats.sweeps < 200, "{stats:?}");
    }

    #[test]
    fn reports_cap() {
        let a = anisotropic(40, 24);
        let mut x = vec![0.0; 40 * 24];
        assert!(matches!(a.solve(&mut x, 1.3, 1e-14, 1), Err(RelaxError::MaxSweeps { .. })));
    }

    #[test]
    fn deterministic() {
        let a = anisotropic(20, 10);
        let mut x1 = vec![0.0; 200];
        let mut x2 = vec![0.0; 200];
        a.solve(&mut x1, 1.4, 1e-12, 500).unwrap();
        a.solve(&mut x2, 1.4, 1e-12, 500).unwrap();
        assert_eq!(x1, x2);
    }
}
