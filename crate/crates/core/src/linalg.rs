//! Symmetric five-point systems on the structured grid, solved with a banded
//! Cholesky factorisation ordered along the shorter grid dimension.

use crate::error::{Error, Result};

/// Symmetric positive-definite system with a five-point sparsity pattern.
#[derive(Clone, Debug)]
pub struct FivePointSystem {
    nx: usize,
    ny: usize,
    diag: Vec<f64>,
    /// Coupling between `c` and `c + 1` (same row), stored as a positive conductance.
    east: Vec<f64>,
    /// Coupling between `c` and `c + nx`.
    north: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl FivePointSystem {
    pub fn new(nx: usize, ny: usize) -> Self {
        let n = nx * ny;
        FivePointSystem {
            nx,
            ny,
            diag: vec![0.0; n],
            east: vec![0.0; n],
            north: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds a conductance `t` between two neighbouring cells:
    /// `t (x_a - x_b)` contributes to row `a` and `t (x_b - x_a)` to row `b`.
    pub fn add_coupling(&mut self, a: usize, b: usize, t: f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if hi == lo + 1 && lo / self.nx == hi / self.nx {
            self.east[lo] += t;
        } else if hi == lo + self.nx {
            self.north[lo] += t;
        } else {
            panic!("cells {a} and {b} are not grid neighbours");
        }
        self.diag[a] += t;
        self.diag[b] += t;
    }

    pub fn add_diag(&mut self, c: usize, v: f64) {
        self.diag[c] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for c in 0..self.len() {
            let e = self.east[c];
            if e != 0.0 {
                y[c] -= e * x[c + 1];
                y[c + 1] -= e * x[c];
            }
            let n = self.north[c];
            if n != 0.0 {
                y[c] -= n * x[c + nx];
                y[c + nx] -= n * x[c];
            }
        }
        y
    }

    /// Relative residual `|b - A x| / (|b| + |D x|)` in the 2-norm.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let r: f64 = ax.iter().zip(&self.rhs).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
        let b: f64 = self.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dx: f64 = self.diag.iter().zip(x).map(|(d, v)| (d * v).powi(2)).sum::<f64>().sqrt();
        let denom = b + dx;
        if denom == 0.0 {
            0.0
        } else {
            r / denom
        }
    }

    /// Solves the system, verifying the relative residual is at most `tol`.
    pub fn solve(&self, tol: f64) -> Result<Vec<f64>> {
        let chol = BandedCholesky::factor(self)?;
        let mut x = chol.solve(&self.rhs);
        for _ in 0..3 {
            let res = self.relative_residual(&x);
            if res <= tol.min(1e-13) {
                break;
            }
            let ax = self.matvec(&x);
            let r: Vec<f64> = self.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = chol.solve(&r);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
        }
        let res = self.relative_residual(&x);
        if !res.is_finite() || res > tol {
            return Err(Error::solver(format!(
                "pressure solve did not reach tolerance {tol:e} (relative residual {res:e})"
            )));
        }
        Ok(x)
    }
}

/// Lower-triangular band factor `A = L Lᵀ` in a permuted ordering.
struct BandedCholesky {
    n: usize,
    band: usize,
    /// Row `p` holds `L(p, p - band ..= p)`.
    l: Vec<f64>,
    /// `perm[p]` is the grid cell of unknown `p`.
    perm: Vec<usize>,
}

impl BandedCholesky {
    fn factor(sys: &FivePointSystem) -> Result<Self> {
        let (nx, ny) = (sys.nx, sys.ny);
        let n = nx * ny;
        // order along the shorter dimension to minimise the bandwidth
        let column_major = ny < nx;
        let band = if column_major { ny } else { nx };
        let perm: Vec<usize> = if column_major {
            (0..n).map(|p| (p % ny) * nx + p / ny).collect()
        } else {
            (0..n).collect()
        };
        let w = band + 1;
        let mut l = vec![0.0; n * w];
        // scatter A's lower triangle into band rows
        for p in 0..n {
            let c = perm[p];
            l[p * w + band] = sys.diag[c];
            let (i, j) = (c % nx, c / nx);
            // the two lower neighbours in the permuted ordering
            let (lower_a, off_a, lower_b, off_b) = if column_major {
                // p - 1 is (i, j-1), p - ny is (i-1, j)
                (j > 0, sys.north.get(c.wrapping_sub(nx)), i > 0, sys.east.get(c.wrapping_sub(1)))
            } else {
                (i > 0, sys.east.get(c.wrapping_sub(1)), j > 0, sys.north.get(c.wrapping_sub(nx)))
            };
            if lower_a {
                l[p * w + band - 1] = -off_a.copied().unwrap_or(0.0);
            }
            if lower_b {
                l[p * w] = -off_b.copied().unwrap_or(0.0);
            }
        }
        for p in 0..n {
            let row_start = p.saturating_sub(band);
            for q in row_start..=p {
                let k0 = row_start.max(q.saturating_sub(band));
                let mut s = l[p * w + (q + band - p)];
                for k in k0..q {
                    s -= l[p * w + (k + band - p)] * l[q * w + (k + band - q)];
                }
                if q == p {
                    let d = sys.diag[perm[p]];
                    if !(s > 1e-14 * d.abs()) || !s.is_finite() {
                        return Err(Error::solver(format!(
                            "singular or indefinite system at cell {} (pivot {s:e})",
                            perm[p]
                        )));
                    }
                    l[p * w + band] = s.sqrt();
                } else {
                    l[p * w + (q + band - p)] = s / l[q * w + band];
                }
            }
        }
        Ok(BandedCholesky { n, band, l, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, band, w) = (self.n, self.band, self.band + 1);
        let mut y: Vec<f64> = self.perm.iter().map(|&c| b[c]).collect();
        for p in 0..n {
            let k0 = p.saturating_sub(band);
            let mut s = y[p];
            for k in k0..p {
                s -= self.l[p * w + (k + band - p)] * y[k];
            }
            y[p] = s / self.l[p * w + band];
        }
        for p in (0..n).rev() {
            let mut s = y[p];
            let k1 = (p + band).min(n - 1);
            for k in p + 1..=k1 {
                s -= self.l[k * w + (p + band - k)] * y[k];
            }
            y[p] = s / self.l[p * w + band];
        }
        let mut x = vec![0.0; n];
        for (p, &c) in self.perm.iter().enumerate() {
            x[c] = y[p];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(nx: usize, ny: usize, seed: u64) -> FivePointSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sys = FivePointSystem::new(nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = j * nx + i;
                if i + 1 < nx {
                    sys.add_coupling(c, c + 1, rng.gen_range(0.1..10.0));
                }
                if j + 1 < ny {
                    sys.add_coupling(c, c + nx, rng.gen_range(0.1..10.0));
                }
                sys.rhs[c] = rng.gen_range(-1.0..1.0);
            }
        }
        // Dirichlet-like anchoring on the first column
        for j in 0..ny {
            sys.add_diag(j * nx, 1.0);
        }
        sys
    }

    #[test]
    fn solves_wide_and_tall_systems() {
        for (nx, ny) in [(17, 5), (5, 17), (8, 8), (1, 9), (9, 1)] {
            let sys = random_system(nx, ny, 7);
            let x = sys.solve(1e-12).unwrap();
            assert!(sys.relative_residual(&x) < 1e-13, "{nx}x{ny}");
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let mut sys = FivePointSystem::new(4, 3);
        for c in 0..11 {
            if (c + 1) % 4 != 0 {
                sys.add_coupling(c, c + 1, 1.0);
            }
        }
        for c in 0..8 {
            sys.add_coupling(c, c + 4, 1.0);
        }
        sys.rhs[0] = 1.0;
        assert!(matches!(sys.solve(1e-10), Err(Error::Solver(_))));
    }

    #[test]
    fn matches_dense_gaussian_elimination() {
        let sys = random_system(6, 4, 11);
        let n = sys.len();
        let mut a = vec![vec![0.0; n]; n];
        for c in 0..n {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            let col = sys.matvec(&e);
            for r in 0..n {
                a[r][c] = col[r];
            }
        }
        let mut b = sys.rhs.clone();
        for k in 0..n {
            for r in k + 1..n {
                let f = a[r][k] / a[k][k];
                for c in k..n {
                    a[r][c] -= f * a[k][c];
                }
                b[r] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|c| a[k][c] * x[c]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        let got = sys.solve(1e-12).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-10 * e.abs().max(1.0));
        }
    }
}
