//! Symmetric tridiagonal helpers: solves, Sturm counts and quadratic forms.

/// Symmetric tridiagonal matrix stored as diagonal and super-diagonal.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        debug_assert_eq!(diag.len(), off.len() + 1);
        Tridiagonal { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Tridiagonal, s: f64) -> Tridiagonal {
        Tridiagonal {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a + s * b).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = (0..n).map(|i| self.diag[i] * x[i]).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// `xᵀ T x`. Loses relative accuracy on near-null vectors of
    /// Laplacian-like matrices; use difference forms there.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (d, xi) in self.diag.iter().zip(x) {
            s += d * xi * xi;
        }
        for i in 0..self.len() - 1 {
            s += 2.0 * self.off[i] * x[i] * x[i + 1];
        }
        s
    }

    /// Solves `T x = b` by elimination without pivoting (Thomas algorithm).
    /// Exact zero pivots are nudged so near-singular shifted systems, as used
    /// by inverse iteration, still return a (large) solution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut piv = self.diag[0];
        if piv == 0.0 {
            piv = f64::EPSILON * self.scale();
        }
        if n > 1 {
            c[0] = self.off[0] / piv;
        }
        d[0] = b[0] / piv;
        for i in 1..n {
            let mut p = self.diag[i] - self.off[i - 1] * c[i - 1];
            if p == 0.0 {
                p = f64::EPSILON * self.scale();
            }
            if i < n - 1 {
                c[i] = self.off[i] / p;
            }
            d[i] = (b[i] - self.off[i - 1] * d[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }

    fn scale(&self) -> f64 {
        self.diag.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE)
    }

    /// Number of negative pivots of `A - σ M`, i.e. the number of
    /// eigenvalues of the pencil `(A, M)` below `σ` (M positive definite).
    pub fn sturm_count(a: &Tridiagonal, m: &Tridiagonal, sigma: f64) -> usize {
        let n = a.len();
        let mut count = 0;
        let mut d = a.diag[0] - sigma * m.diag[0];
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..n {
            if i > 0 {
                let e = a.off[i - 1] - sigma * m.off[i - 1];
                d = (a.diag[i] - sigma * m.diag[i]) - e * e / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_matches_product() {
        let t = Tridiagonal::new(vec![4.0, 5.0, 6.0, 7.0], vec![1.0, -2.0, 0.5]);
        let x = vec![1.0, -1.0, 2.0, 0.25];
        let b = t.mul(&x);
        let y = t.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((t.quad_form(&x) - dot(&x, &b)).abs() < 1e-13);
    }

    #[test]
    fn sturm_counts_identity_pencil() {
        // eigenvalues of diag(1,2,3) w.r.t. identity
        let a = Tridiagonal::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.0]);
        let m = Tridiagonal::new(vec![1.0; 3], vec![0.0, 0.0]);
        assert_eq!(Tridiagonal::sturm_count(&a, &m, 0.5), 0);
        assert_eq!(Tridiagonal::sturm_count(&a, &m, 2.5), 2);
        assert_eq!(Tridiagonal::sturm_count(&a, &m, 10.0), 3);
    }
}
