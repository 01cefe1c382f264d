//! Level m = 1: the operator is tridiagonal on columns `(1^k)`, its spectrum
//! is the root set of a three-term recurrence polynomial, and norms close
//! through the Christoffel-Darboux identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{determinant, tridiagonal_eigenvalues, Matrix};
use crate::logsigned::LogSigned;
use crate::model::{Branch, CouplingParams, Model};
use crate::theta::ThetaContext;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TridiagonalModel {
    pub n: usize,
    /// `A_k`, k = 0..=n.
    pub a: Vec<f64>,
    /// `B_{k+1}`, k = 0..n (index k).
    pub b_up: Vec<f64>,
    /// `B_{-k}`, k = 1..=n (index k - 1).
    pub b_down: Vec<f64>,
    /// `rho_0, ..., rho_{n+1}`.
    pub rho_ext: Vec<f64>,
    /// Largest relative disagreement between the product and ratio forms.
    pub form_discrepancy: f64,
    /// `E_(1^0) > ... > E_(1^n)`.
    pub roots: Vec<f64>,
}

struct Forms<'a> {
    ctx: &'a ThetaContext,
    params: &'a CouplingParams,
    rho: Vec<f64>,
    c: [f64; 4],
}

impl Forms<'_> {
    fn br(&self, z: f64, r: usize) -> f64 {
        self.ctx.br(z, r)
    }

    fn one_body_up(&self, x: f64) -> f64 {
        let (gs, gps) = (self.params.gs(), self.params.gps());
        (1..=4)
            .map(|r| {
                self.br(x + gs[r - 1], r) * self.br(x + gps[r - 1] + 0.5, r) / (self.br(x, r) * self.br(x + 0.5, r))
            })
            .product()
    }

    fn one_body_down(&self, x: f64) -> f64 {
        let (gs, gps) = (self.params.gs(), self.params.gps());
        (1..=4)
            .map(|r| {
                self.br(x + 1.0 - gs[r - 1], r) * self.br(x - gps[r - 1] + 0.5, r)
                    / (self.br(x + 1.0, r) * self.br(x + 0.5, r))
            })
            .product()
    }

    fn a_raw(&self, k: usize) -> f64 {
        let (n, g, rho) = (self.params.n, self.params.g, &self.rho);
        (1..=4)
            .map(|r| {
                let mut prod = 1.0;
                for j in 1..=n {
                    let s = if j <= k { 1.0 } else { 0.0 };
                    let x = rho[j] + s;
                    prod *= self.br(x + 0.5 - g, r) * self.br(x - 0.5 + g, r) / (self.br(x + 0.5, r) * self.br(x - 0.5, r));
                }
                self.c[r - 1] * (prod - 1.0)
            })
            .sum()
    }

    fn a_ratio(&self, k: usize) -> f64 {
        let (n, rho) = (self.params.n, &self.rho);
        (1..=4)
            .map(|r| {
                let num = self.br(rho[0] + 0.5, r) * self.br(rho[k + 1] + 1.5, r) * self.br(rho[k] - 0.5, r) * self.br(rho[n + 1] + 0.5, r);
                let den = self.br(rho[k] + 0.5, r) * self.br(rho[1] + 1.5, r) * self.br(rho[n] - 0.5, r) * self.br(rho[k + 1] + 0.5, r);
                self.c[r - 1] * (num / den - 1.0)
            })
            .sum()
    }

    /// `B_{(1^k), k+1}`, product form.
    fn b_up_raw(&self, k: usize) -> f64 {
        let (n, g, rho) = (self.params.n, self.params.g, &self.rho);
        let x = rho[k + 1];
        let mut b = self.one_body_up(x);
        for j in 1..=k {
            for d in [1.0, -1.0] {
                b *= self.br(x + d * rho[j] + d + g, 1) / self.br(x + d * rho[j] + d, 1);
            }
        }
        for j in k + 2..=n {
            for d in [1.0, -1.0] {
                b *= self.br(x + d * rho[j] + g, 1) / self.br(x + d * rho[j], 1);
            }
        }
        b
    }

    fn b_up_ratio(&self, k: usize) -> f64 {
        let (n, g, rho) = (self.params.n, self.params.g, &self.rho);
        let x = rho[k + 1];
        let num = self.br(rho[0] + x + 1.0, 1) * self.br(2.0 * x, 1) * self.br(x - rho[n + 1], 1) * self.br(1.0, 1);
        let den = self.br(rho[k] + x + 1.0, 1) * self.br(rho[1] - x + 1.0, 1) * self.br(x + rho[n], 1) * self.br(g, 1);
        num / den * self.one_body_up(x)
    }

    /// `B_{(1^k), -k}`, product form.
    fn b_down_raw(&self, k: usize) -> f64 {
        let (n, g, rho) = (self.params.n, self.params.g, &self.rho);
        let x = rho[k];
        let mut b = self.one_body_down(x);
        for j in 1..k {
            for d in [1.0, -1.0] {
                b *= self.br(x + d * rho[j] + 1.0 + d - g, 1) / self.br(x + d * rho[j] + 1.0 + d, 1);
            }
        }
        for j in k + 1..=n {
            for d in [1.0, -1.0] {
                b *= self.br(x + d * rho[j] + 1.0 - g, 1) / self.br(x + d * rho[j] + 1.0, 1);
            }
        }
        b
    }

    fn b_down_ratio(&self, k: usize) -> f64 {
        let (n, g, rho) = (self.params.n, self.params.g, &self.rho);
        let x = rho[k];
        let num = self.br(2.0 * x + 2.0, 1) * self.br(rho[0] - x, 1) * self.br(x + rho[n + 1] + 1.0, 1) * self.br(1.0, 1);
        let den = self.br(rho[1] + x + 2.0, 1) * self.br(x + rho[k + 1] + 1.0, 1) * self.br(x - rho[n] + 1.0, 1) * self.br(g, 1);
        num / den * self.one_body_down(x)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn coeffs_m1(params: &CouplingParams) -> Result<TridiagonalModel> {
    if params.m != 1 {
        return Err(Error::Domain(format!("the column model needs m = 1, got m = {}", params.m)));
    }
    if params.branch != Branch::Generic {
        return Err(Error::Branch("the column model uses the generic coefficients".into()));
    }
    let model = Model::new(params)?;
    let n = params.n;
    let rho: Vec<f64> = (0..=n + 1).map(|j| (n as f64 - j as f64) * params.g + params.g1).collect();
    let forms = Forms { ctx: model.ctx(), params, rho: rho.clone(), c: model.c_r()? };
    let mut disc: f64 = 0.0;
    let mut a = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let (x, y) = (forms.a_raw(k), forms.a_ratio(k));
        disc = disc.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
        a.push(x);
    }
    let mut b_up = Vec::with_capacity(n);
    let mut b_down = Vec::with_capacity(n);
    for k in 0..n {
        let (x, y) = (forms.b_up_raw(k), forms.b_up_ratio(k));
        disc = disc.max(rel(x, y));
        b_up.push(x);
        let (x, y) = (forms.b_down_raw(k + 1), forms.b_down_ratio(k + 1));
        disc = disc.max(rel(x, y));
        b_down.push(x);
    }
    let mut model = TridiagonalModel { n, a, b_up, b_down, rho_ext: rho, form_discrepancy: disc, roots: Vec::new() };
    model.roots = spectrum_m1(&model)?;
    Ok(model)
}

impl TridiagonalModel {
    /// `B_k B_{-k}` for 1 <= k <= n.
    pub fn coupling(&self, k: usize) -> f64 {
        self.b_up[k - 1] * self.b_down[k - 1]
    }

    /// `P_(1^0)(E), ..., P_(1^{n+1})(E)`.
    pub fn poly_values(&self, e: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n + 2);
        out.push(1.0);
        for k in 0..=self.n {
            let mut next = (e - self.a[k]) * out[k];
            if k > 0 {
                next -= self.coupling(k) * out[k - 1];
            }
            out.push(next);
        }
        out
    }

    /// `c_(1^k) = prod_{j<=k} 1 / B_j`.
    pub fn c(&self, k: usize) -> LogSigned {
        self.b_up[..k].iter().map(|&b| LogSigned::from_f64(b).recip()).product()
    }

    /// `Delta_(1^k) = prod_{j<=k} B_j / B_{-j}`.
    pub fn delta(&self, k: usize) -> LogSigned {
        (0..k).map(|j| LogSigned::from_f64(self.b_up[j]) / LogSigned::from_f64(self.b_down[j])).product()
    }

    fn coupling_product(&self, upto: usize) -> f64 {
        (1..=upto).map(|k| self.coupling(k)).product()
    }

    /// `sum_k P_k(x) P_k(y) / prod_{j<=k} B_j B_{-j}` and the Christoffel-Darboux right side.
    pub fn christoffel_darboux(&self, x: f64, y: f64) -> (f64, f64) {
        let (px, py) = (self.poly_values(x), self.poly_values(y));
        let n = self.n;
        let lhs = (0..=n).map(|k| px[k] * py[k] / self.coupling_product(k)).sum();
        let rhs = (px[n + 1] * py[n] - px[n] * py[n + 1]) / ((x - y) * self.coupling_product(n));
        (lhs, rhs)
    }

    /// `P_(1^{n+1})(x)` and `prod_l (x - E_(1^l))`.
    pub fn characteristic(&self, x: f64) -> (f64, f64) {
        let p = self.poly_values(x)[self.n + 1];
        (p, self.roots.iter().map(|e| x - e).product())
    }

    /// `h^{(1^l)}_{(1^k)} = c_k P_k(E_l) / N_l` over k.
    pub fn eigenfunction(&self, l: usize) -> Vec<f64> {
        let (direct, _) = norms_m1(self, l);
        let p = self.poly_values(self.roots[l]);
        (0..=self.n).map(|k| self.c(k).to_f64() * p[k] / direct).collect()
    }
}

/// `P_(1^k)(E)` for `0 <= k <= n + 1`.
pub fn poly_p(model: &TridiagonalModel, k: usize, e: f64) -> Result<f64> {
    model
        .poly_values(e)
        .get(k)
        .copied()
        .ok_or_else(|| Error::Domain(format!("degree {k} exceeds n + 1 = {}", model.n + 1)))
}

/// `P_(1^k)(E)` as the determinant of the k x k tridiagonal matrix.
pub fn poly_p_det(model: &TridiagonalModel, k: usize, e: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut m = Matrix::zeros(k);
    for i in 0..k {
        m[(i, i)] = e - model.a[i];
        if i + 1 < k {
            m[(i, i + 1)] = -model.b_up[i];
            m[(i + 1, i)] = -model.b_down[i];
        }
    }
    determinant(&m)
}

/// Roots of `P_(1^{n+1})`, decreasing.
pub fn spectrum_m1(model: &TridiagonalModel) -> Result<Vec<f64>> {
    let mut off = Vec::with_capacity(model.n);
    for k in 1..=model.n {
        let prod = model.coupling(k);
        if !(prod > 0.0) {
            return Err(Error::Internal(format!("B_{k} B_-{k} = {prod} is not positive")));
        }
        off.push(prod.sqrt());
    }
    let roots = tridiagonal_eigenvalues(&model.a, &off)?;
    if roots.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Numeric("column spectrum is not simple".into()));
    }
    Ok(roots)
}

/// `N_(1^l)` as the direct sum `sum_k c^2 P^2 Delta` and by the closed product form.
pub fn norms_m1(model: &TridiagonalModel, l: usize) -> (f64, f64) {
    let el = model.roots[l];
    let p = model.poly_values(el);
    let n = model.n;
    let direct = (0..=n).map(|k| (model.c(k).powi(2) * model.delta(k)).to_f64() * p[k] * p[k]).sum();
    let gaps: f64 = (0..=n).filter(|&j| j != l).map(|j| el - model.roots[j]).product();
    let closed = p[n] * gaps / model.coupling_product(n);
    (direct, closed)
}
