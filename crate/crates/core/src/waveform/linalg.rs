//! Minimal dense complex linear algebra for the equalizers: a row-major
//! matrix type, LU with partial pivoting, and Cholesky for Hermitian
//! positive-definite systems.

use crate::{Error, Result};
use num_complex::Complex;

type C = Complex<f64>;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        CMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn row(&self, i: usize) -> &[C] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn herm(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C]) -> Vec<C> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^H x` without materializing the transpose.
    pub fn herm_mul_vec(&self, x: &[C]) -> Vec<C> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![C::new(0.0, 0.0); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (j, o) in out.iter_mut().enumerate() {
                *o += self[(i, j)].conj() * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `A^H A + sigma2 I`, the Gram matrix used by the MMSE solve.
    pub fn gram_regularized(&self, sigma2: f64) -> CMat {
        let n = self.cols;
        let mut g = CMat::zeros(n, n);
        for k in 0..self.rows {
            let row = self.row(k);
            for i in 0..n {
                let a = row[i].conj();
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    g[(i, j)] += a * row[j];
                }
            }
        }
        for i in 0..n {
            g[(i, i)] += C::new(sigma2, 0.0);
        }
        g
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting: `P A = L U`.
pub struct LuFactor {
    lu: CMat,
    /// `perm[i]` = source row of permuted row `i`.
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(a: &CMat) -> Result<Self> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.data.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        for k in 0..n {
            // pivot search in column k
            let (pivot_row, pivot_mag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            if pivot_mag < 1e-13 * scale {
                return Err(Error::Solver(format!("pivot {pivot_mag:.3e} at column {k}")));
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
            }
            let inv_p = C::new(1.0, 0.0) / lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] * inv_p;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let sub = f * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(LuFactor { lu, perm })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut y: Vec<C> = self.perm.iter().map(|&p| b[p]).collect();
        // forward: L y' = P b (unit diagonal)
        for i in 1..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        // back: U x = y'
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * y[j];
            }
            y[i] = acc / self.lu[(i, i)];
        }
        y
    }

    /// Solves `A^H x = b` using the same factorization
    /// (`A^H = U^H L^H P`).
    pub fn solve_adjoint(&self, b: &[C]) -> Vec<C> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        // U^H z = b (U^H is lower triangular)
        let mut z = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = acc / self.lu[(i, i)].conj();
        }
        // L^H w = z (upper triangular, unit diagonal)
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = acc;
        }
        // x = P^T w
        let mut x = vec![C::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    pub fn inverse(&self) -> CMat {
        let n = self.lu.rows;
        let mut out = CMat::zeros(n, n);
        let mut e = vec![C::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C::new(1.0, 0.0);
            let col = self.solve(&e);
            e[j] = C::new(0.0, 0.0);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

/// Cholesky factorization `A = L L^H` of a Hermitian positive-definite
/// matrix; fails on loss of positive definiteness.
pub struct CholeskyFactor {
    l: CMat,
}

impl CholeskyFactor {
    pub fn new(a: &CMat) -> Result<Self> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let mut l = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = a[(i, j)];
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)].conj();
                }
                if i == j {
                    if acc.re <= 0.0 || acc.im.abs() > 1e-9 * acc.re.abs().max(1e-300) {
                        return Err(Error::Solver(format!(
                            "matrix not positive definite at row {i} (d = {acc})"
                        )));
                    }
                    l[(i, i)] = C::new(acc.re.sqrt(), 0.0);
                } else {
                    l[(i, j)] = acc / l[(j, j)];
                }
            }
        }
        Ok(CholeskyFactor { l })
    }

    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let n = self.l.rows;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.l[(i, j)] * y[j];
            }
            y[i] = acc / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.l[(j, i)].conj() * y[j];
            }
            y[i] = acc / self.l[(i, i)];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::randcn;

    fn random_matrix(n: usize, seed: u64) -> CMat {
        let mut rng = crate::substream(seed, "linalg", &[]);
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = randcn(&mut rng);
            }
        }
        m
    }

    fn to_nalgebra(m: &CMat) -> nalgebra::DMatrix<Complex<f64>> {
        nalgebra::DMatrix::from_fn(m.rows, m.cols, |i, j| m[(i, j)])
    }

    #[test]
    fn lu_solve_matches_nalgebra() {
        for seed in 0..5 {
            let n = 24;
            let a = random_matrix(n, seed);
            let mut rng = crate::substream(seed, "rhs", &[]);
            let b: Vec<C> = (0..n).map(|_| randcn(&mut rng)).collect();
            let x = LuFactor::new(&a).unwrap().solve(&b);
            let na = to_nalgebra(&a);
            let nb = nalgebra::DVector::from_vec(b.clone());
            let nx = na.lu().solve(&nb).unwrap();
            for i in 0..n {
                assert!((x[i] - nx[i]).norm() < 1e-9, "seed {seed} row {i}");
            }
        }
    }

    #[test]
    fn adjoint_solve_is_consistent() {
        let n = 16;
        let a = random_matrix(n, 3);
        let mut rng = crate::substream(9, "rhs", &[]);
        let b: Vec<C> = (0..n).map(|_| randcn(&mut rng)).collect();
        let f = LuFactor::new(&a).unwrap();
        let x = f.solve_adjoint(&b);
        // A^H x should reproduce b
        let back = a.herm().mul_vec(&x);
        for i in 0..n {
            assert!((back[i] - b[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn inverse_matches_nalgebra() {
        let n = 12;
        let a = random_matrix(n, 5);
        let inv = LuFactor::new(&a).unwrap().inverse();
        let ninv = to_nalgebra(&a).try_inverse().unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!((inv[(i, j)] - ninv[(i, j)]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn singular_matrix_reports_failure() {
        let mut a = CMat::zeros(4, 4);
        a[(0, 0)] = C::new(1.0, 0.0);
        a[(1, 1)] = C::new(1.0, 0.0);
        // rows 2 and 3 identical
        for j in 0..4 {
            a[(2, j)] = C::new(1.0, 1.0);
            a[(3, j)] = C::new(1.0, 1.0);
        }
        assert!(LuFactor::new(&a).is_err());
    }

    #[test]
    fn cholesky_solves_gram_system() {
        let n = 20;
        let h = random_matrix(n, 7);
        let g = h.gram_regularized(0.3);
        let mut rng = crate::substream(11, "rhs", &[]);
        let b: Vec<C> = (0..n).map(|_| randcn(&mut rng)).collect();
        let x = CholeskyFactor::new(&g).unwrap().solve(&b);
        let back = g.mul_vec(&x);
        for i in 0..n {
            assert!((back[i] - b[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn gram_matches_explicit_product() {
        let h = random_matrix(9, 13);
        let g = h.gram_regularized(0.7);
        let mut explicit = h.herm().matmul(&h);
        for i in 0..9 {
            explicit[(i, i)] += C::new(0.7, 0.0);
        }
        assert!(g.max_abs_diff(&explicit) < 1e-12);
    }
}
