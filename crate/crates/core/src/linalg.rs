//! Small dense linear algebra: symmetric eigensolvers and determinants.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("matrix rows must form a square".into()));
        }
        Ok(Matrix { n, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenpairs of a symmetric matrix; `vectors` holds unit eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations on a symmetric matrix (upper triangle is read).
///
/// Eigenvalues are returned in decreasing order.
pub fn jacobi_eigen(a: &Matrix) -> Result<SymEigen> {
    let n = a.dim();
    let mut s = a.clone();
    for i in 0..n {
        for j in 0..i {
            s[(i, j)] = s[(j, i)];
        }
    }
    let mut v = Matrix::identity(n);
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| s[(i, j)].powi(2)).sum();
        if off.sqrt() <= 1e-15 * scale * n as f64 || off == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {:.3e})",
                off.sqrt()
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = s[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[(q, q)] - s[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (skp, skq) = (s[(k, p)], s[(k, q)]);
                    s[(k, p)] = c * skp - sn * skq;
                    s[(k, q)] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let (spk, sqk) = (s[(p, k)], s[(q, k)]);
                    s[(p, k)] = c * spk - sn * sqk;
                    s[(q, k)] = sn * spk + c * sqk;
                }
                s[(p, q)] = 0.0;
                s[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| s[(i, i)]).collect();
    Ok(sorted_desc(values, v, sweeps))
}

fn sorted_desc(values: Vec<f64>, v: Matrix, sweeps: usize) -> SymEigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut vectors = Matrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    SymEigen { values: order.iter().map(|&i| values[i]).collect(), vectors, sweeps }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e.len() == d.len() - 1`) by implicit QL, decreasing.
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 || e.len() + 1 != n {
        return Err(Error::Domain("tridiagonal sizes do not match".into()));
    }
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain([0.0]).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numeric("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`
/// (Sturm sequence; `e2` holds squared off-diagonals).
pub fn sturm_count(d: &[f64], e2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let prev = if q == 0.0 { f64::EPSILON * (d[i - 1].abs() + x.abs()).max(1e-300) } else { q };
        q = d[i] - x - e2[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues by Sturm bisection, decreasing. Test oracle for the QL path.
pub fn sturm_bisection(d: &[f64], e2: &[f64]) -> Vec<f64> {
    let n = d.len();
    let radius = (0..n)
        .map(|i| {
            let left = if i > 0 { e2[i - 1].sqrt() } else { 0.0 };
            let right = if i + 1 < n { e2[i].sqrt() } else { 0.0 };
            d[i].abs() + left + right
        })
        .fold(0.0, f64::max);
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        // k-th smallest eigenvalue: count(x) > k
        let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sturm_count(d, e2, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// Determinant by LU with partial pivoting.
pub fn determinant(a: &Matrix) -> f64 {
    let n = a.dim();
    let mut m = a.clone();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs())).unwrap();
        if m[(pivot, col)] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                let tmp = m[(col, k)];
                m[(col, k)] = m[(pivot, k)];
                m[(pivot, k)] = tmp;
            }
            det = -det;
        }
        let piv = m[(col, col)];
        det *= piv;
        for i in col + 1..n {
            let factor = m[(i, col)] / piv;
            if factor != 0.0 {
                for k in col..n {
                    m[(i, k)] -= factor * m[(col, k)];
                }
            }
        }
    }
    det
}
