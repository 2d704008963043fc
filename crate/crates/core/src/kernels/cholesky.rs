use crate::error::KernelError;

/// Dense Cholesky factor `A = L L^T` of the coarsest operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseCholesky {
    n: usize,
    /// Lower triangle, row-major, upper part unused.
    l: Vec<f64>,
}

impl DenseCholesky {
    /// Factors a symmetric positive definite row-major `n x n` matrix. Only
    /// the lower triangle is read.
    pub fn factor(a: &[f64], n: usize) -> Result<Self, KernelError> {
        if a.len() != n * n {
            return Err(KernelError::Shape(format!(
                "matrix has {} entries, expected {n}x{n}",
                a.len()
            )));
        }
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(KernelError::NotPositiveDefinite(j));
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(DenseCholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` by forward and back substitution.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}
