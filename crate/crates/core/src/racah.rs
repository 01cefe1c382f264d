//! The regularized operator at g = 1: one-body elliptic Racah chain on `n + m`
//! nodes, its roots, generalized Schur eigenfunctions and their norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Partition, Step};
use crate::linalg::{determinant, tridiagonal_eigenvalues, Matrix};
use crate::logsigned::LogSigned;
use crate::model::{Affine, Branch, CouplingParams, Factor, Model, OperatorCoefficients, PERMUTATIONS};

/// Coefficients, weights and roots of the one-body chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RacahChain {
    pub n: usize,
    pub m: u32,
    /// Residues of `c_r` at g = 1.
    pub res_c: [f64; 4],
    pub a: Vec<f64>,
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
    /// `Delta^(1)_k`, k < n + m.
    pub delta1: Vec<LogSigned>,
    /// `c_k = prod_{j<k} 1 / b_j^+`.
    pub c1: Vec<LogSigned>,
    /// Roots of `P_{n+m}`, decreasing.
    pub roots: Vec<f64>,
}

fn require_g1(model: &Model) -> Result<()> {
    if model.params().branch != Branch::G1 {
        return Err(Error::Branch("the Racah chain needs the g1 branch".into()));
    }
    Ok(())
}

/// Residue at g = 1 of `c_r`: `2 prod_s [..]_s [..]_s / ([1]_1 [0]'_1)`.
pub fn residues(model: &Model) -> Result<[f64; 4]> {
    let ctx = model.ctx();
    let den = ctx.bracket(1.0, 1)? * ctx.bracket_deriv(0.0, 1)?;
    let mut out = [0.0; 4];
    for (r, perm) in PERMUTATIONS.iter().enumerate() {
        out[r] = 2.0 * model.c_numerator(perm) / den;
    }
    Ok(out)
}

fn g1_sym(model: &Model) -> Affine {
    model.rho_sym(model.n())
}

/// `b_k^+`.
fn b_plus(model: &Model, k: u32) -> Result<f64> {
    let x = g1_sym(model) + f64::from(k);
    let mut num = Vec::new();
    let mut den = Vec::new();
    for r in 1..=4 {
        num.push(Factor { arg: x + model.gr_sym(r), r });
        num.push(Factor { arg: x + model.gpr_sym(r) + 0.5, r });
        den.push(Factor { arg: x, r });
        den.push(Factor { arg: x + 0.5, r });
    }
    Ok(model.quotient(&num, &den)?.to_f64())
}

/// `b_k^-`.
fn b_minus(model: &Model, k: u32) -> Result<f64> {
    let x = g1_sym(model) + f64::from(k);
    let mut num = Vec::new();
    let mut den = Vec::new();
    for r in 1..=4 {
        num.push(Factor { arg: x - model.gr_sym(r), r });
        num.push(Factor { arg: x - model.gpr_sym(r) + (-0.5), r });
        den.push(Factor { arg: x, r });
        den.push(Factor { arg: x + (-0.5), r });
    }
    Ok(model.quotient(&num, &den)?.to_f64())
}

/// `Delta^(1)_k` by its product formula.
fn delta1(model: &Model, k: u32) -> LogSigned {
    let ctx = model.ctx();
    let p = model.params();
    let (gs, gps, g1) = (p.gs(), p.gps(), p.g1);
    let mut w = LogSigned::from_f64(ctx.bracket(2.0 * g1 + 2.0 * f64::from(k), 1).unwrap_or(0.0))
        / LogSigned::from_f64(ctx.bracket(2.0 * g1, 1).unwrap_or(0.0));
    for r in 1..=4 {
        w *= ctx.factorial(&[g1 + gs[r - 1], g1 + gps[r - 1] + 0.5], r, k);
        w /= ctx.factorial(&[g1 + 1.0 - gs[r - 1], g1 - gps[r - 1] + 0.5], r, k);
    }
    w
}

pub fn coeffs_g1(params: &CouplingParams) -> Result<RacahChain> {
    chain_from_model(&Model::new(params)?)
}

pub fn chain_from_model(model: &Model) -> Result<RacahChain> {
    require_g1(model)?;
    let p = model.params();
    let len = p.n as u32 + p.m;
    let res_c = residues(model)?;
    let ctx = model.ctx();
    let g1 = p.g1;
    let mut a = Vec::with_capacity(len as usize);
    for k in 0..len {
        let mut ak = 0.0;
        for (r, res) in (1..=4).zip(res_c) {
            let up = ctx.bracket_log_deriv(g1 + f64::from(k) + 0.5, r)?;
            let down = ctx.bracket_log_deriv(g1 + f64::from(k) - 0.5, r)?;
            ak += res * (up - down);
        }
        a.push(ak);
    }
    let b_plus = (0..len).map(|k| b_plus(model, k)).collect::<Result<Vec<_>>>()?;
    let b_minus = (0..len).map(|k| b_minus(model, k)).collect::<Result<Vec<_>>>()?;
    let delta1 = (0..len).map(|k| delta1(model, k)).collect();
    let mut c1 = Vec::with_capacity(len as usize);
    let mut acc = LogSigned::ONE;
    for k in 0..len as usize {
        c1.push(acc);
        acc /= LogSigned::from_f64(b_plus[k]);
    }
    let mut chain = RacahChain { n: p.n, m: p.m, res_c, a, b_plus, b_minus, delta1, c1, roots: Vec::new() };
    chain.roots = racah_roots(&chain)?;
    Ok(chain)
}

impl RacahChain {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `b_{k-1}^+ b_k^-` for 1 <= k < n + m.
    pub fn coupling(&self, k: usize) -> f64 {
        self.b_plus[k - 1] * self.b_minus[k]
    }

    /// `P_0(E), ..., P_{n+m}(E)` by the three-term recurrence.
    pub fn poly_values(&self, e: f64) -> Vec<f64> {
        let len = self.len();
        let mut out = Vec::with_capacity(len + 1);
        out.push(1.0);
        for k in 0..len {
            let mut next = (e - self.a[k]) * out[k];
            if k > 0 {
                next -= self.coupling(k) * out[k - 1];
            }
            out.push(next);
        }
        out
    }

    /// Eigenvalue of `nu` on the g = 1 operator: `sum_j E_{n-j+nu_j}`.
    pub fn eigenvalue(&self, nu: &Partition) -> f64 {
        self.nodes(nu).iter().sum()
    }

    /// `E_{n-j+nu_j}`, j = 1..n.
    pub fn nodes(&self, nu: &Partition) -> Vec<f64> {
        (0..self.n).map(|j| self.roots[self.n - 1 - j + nu[j] as usize]).collect()
    }

    /// One-body norm `N_l` from the product over root gaps.
    pub fn one_body_norm(&self, l: usize) -> f64 {
        let len = self.len();
        let el = self.roots[l];
        let p = self.poly_values(el);
        let gaps: f64 = (0..len).filter(|&j| j != l).map(|j| el - self.roots[j]).product();
        let couplings: f64 = (1..len).map(|k| self.coupling(k)).product();
        p[len - 1] * gaps / couplings
    }

    /// `sum_k c_k^2 P_k(E_j) P_k(E_l) Delta^(1)_k`.
    pub fn one_body_inner(&self, j: usize, l: usize) -> f64 {
        let pj = self.poly_values(self.roots[j]);
        let pl = self.poly_values(self.roots[l]);
        (0..self.len()).map(|k| (self.c1[k].powi(2) * self.delta1[k]).to_f64() * pj[k] * pl[k]).sum()
    }
}

/// `P_k(E)` for `0 <= k <= n + m`.
pub fn racah_poly(chain: &RacahChain, k: usize, e: f64) -> Result<f64> {
    chain
        .poly_values(e)
        .get(k)
        .copied()
        .ok_or_else(|| Error::Domain(format!("degree {k} exceeds n + m = {}", chain.len())))
}

/// Roots of `P_{n+m}` from the symmetrized Jacobi matrix, decreasing.
pub fn racah_roots(chain: &RacahChain) -> Result<Vec<f64>> {
    let len = chain.len();
    let mut off = Vec::with_capacity(len.saturating_sub(1));
    for k in 1..len {
        let prod = chain.coupling(k);
        if !(prod > 0.0) {
            return Err(Error::Domain(format!("b_{}^+ b_{k}^- = {prod} is not positive", k - 1)));
        }
        off.push(prod.sqrt());
    }
    let roots = tridiagonal_eigenvalues(&chain.a, &off)?;
    if roots.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Numeric("Racah roots are not simple".into()));
    }
    Ok(roots)
}

/// `V_lambda` pair factors: numerators `[rho_j + d rho_k + lam_j + d lam_k]_1` for pairs containing `j`
/// (all pairs when `only` is `None`).
fn v_factors(model: &Model, lam: &Partition, only: Option<usize>) -> Vec<Factor> {
    let n = model.n();
    let mut out = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            if only.is_some_and(|o| o != j && o != k) {
                continue;
            }
            for delta in [1.0, -1.0] {
                let arg = model.rho_sym(j + 1) + delta * model.rho_sym(k + 1) + (f64::from(lam[j]) + delta * f64::from(lam[k]));
                out.push(Factor { arg, r: 1 });
            }
        }
    }
    out
}

/// `V_lambda`.
pub fn v_lambda(model: &Model, lam: &Partition) -> Result<LogSigned> {
    let num = v_factors(model, lam, None);
    let den = v_factors(model, &Partition::zero(model.n()), None);
    model.quotient(&num, &den)
}

/// `B_{lambda, eps j}` as `(V_{lambda + eps e_j} / V_lambda) b^{eps}_{n-j+lambda_j}`.
pub fn coeff_b_g1(model: &Model, chain: &RacahChain, lam: &Partition, step: Step) -> Result<f64> {
    let j = step.part;
    let idx = model.n() - 1 - j + lam[j] as usize;
    let b = if step.raise { chain.b_plus[idx] } else { chain.b_minus[idx] };
    if b == 0.0 {
        return Ok(0.0);
    }
    // leaving the weakly decreasing cone hits a [0]_1 factor of V
    let Some(mu) = lam.shifted(step).and_then(|mu| Partition::new(mu.parts().to_vec()).ok()) else {
        return Ok(0.0);
    };
    let num = v_factors(model, &mu, Some(j));
    let den = v_factors(model, lam, Some(j));
    Ok((model.quotient(&num, &den)? * b).to_f64())
}

/// `A_lambda = sum_j a_{n-j+lambda_j}`.
pub fn coeff_a_g1(chain: &RacahChain, lam: &Partition) -> f64 {
    (0..chain.n).map(|j| chain.a[chain.n - 1 - j + lam[j] as usize]).sum()
}

/// `Delta_lambda = V^2 prod_j Delta^(1)_{n-j+lambda_j} / Delta^(1)_{n-j}`.
pub fn weight_g1(model: &Model, chain: &RacahChain, lam: &Partition) -> Result<LogSigned> {
    let n = chain.n;
    let mut w = v_lambda(model, lam)?.powi(2);
    for j in 0..n {
        w *= chain.delta1[n - 1 - j + lam[j] as usize] / chain.delta1[n - 1 - j];
    }
    Ok(w)
}

/// `c_lambda` of the Schur eigenfunctions.
pub fn c_lambda_g1(model: &Model, lam: &Partition) -> Result<LogSigned> {
    let p = model.params();
    let (gs, gps) = (p.gs(), p.gps());
    let rho = &model.weyl().rho;
    let ctx = model.ctx();
    let mut c = v_lambda(model, lam)?.recip();
    for j in 0..p.n {
        for r in 1..=4 {
            c *= ctx.factorial(&[rho[j], rho[j] + 0.5], r, lam[j]);
            c /= ctx.factorial(&[rho[j] + gs[r - 1], rho[j] + gps[r - 1] + 0.5], r, lam[j]);
        }
    }
    Ok(c)
}

/// Coefficient table of the g = 1 operator.
pub(crate) fn operator_coefficients(model: &Model, lattice: &Lattice) -> Result<OperatorCoefficients> {
    model.check_lattice(lattice)?;
    let chain = chain_from_model(model)?;
    let mut a = Vec::with_capacity(lattice.len());
    let mut b = Vec::with_capacity(lattice.len());
    let mut weights = Vec::with_capacity(lattice.len());
    for lam in lattice.points() {
        a.push(coeff_a_g1(&chain, lam));
        let row = lattice
            .all_steps()
            .map(|s| if lattice.admissible(lam, s) { coeff_b_g1(model, &chain, lam, s) } else { Ok(0.0) })
            .collect::<Result<Vec<_>>>()?;
        b.push(row);
        weights.push(weight_g1(model, &chain, lam)?);
    }
    Ok(OperatorCoefficients { n: model.n(), a, b, weights })
}

/// Schur-determinant eigenfunction with both norm evaluations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchurEigenfunction {
    pub nu: Partition,
    pub energy: f64,
    /// `s^(nu)_lambda` in lattice order.
    pub s_values: Vec<f64>,
    pub a0: f64,
    pub a0_vandermonde: f64,
    pub c_lambda: Vec<LogSigned>,
    /// `sum_lambda c^2 s^2 Delta`.
    pub norm_direct: f64,
    /// Cauchy-Binet closed form.
    pub norm_closed: f64,
    /// `h^(nu)_lambda = c_lambda s_lambda / N_nu`.
    pub h: Vec<f64>,
}

pub fn schur_eigenfunction(model: &Model, chain: &RacahChain, lattice: &Lattice, nu: &Partition) -> Result<SchurEigenfunction> {
    require_g1(model)?;
    let n = chain.n;
    let nodes = chain.nodes(nu);
    let polys: Vec<Vec<f64>> = nodes.iter().map(|&e| chain.poly_values(e)).collect();
    let a_of = |lam: &Partition| {
        let mut mat = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                mat[(i, j)] = polys[j][n - 1 - i + lam[i] as usize];
            }
        }
        determinant(&mat)
    };
    let a0 = a_of(&Partition::zero(n));
    let mut vander = 1.0;
    for j in 0..n {
        for k in j + 1..n {
            vander *= nodes[j] - nodes[k];
        }
    }
    if a0.abs() < 1e-300 || !a0.is_finite() {
        return Err(Error::Numeric(format!("a_0 vanishes for nu = {nu}")));
    }
    let mut s_values = Vec::with_capacity(lattice.len());
    let mut c_lambda = Vec::with_capacity(lattice.len());
    let mut norm_direct = 0.0;
    for lam in lattice.points() {
        let s = a_of(lam) / a0;
        let c = c_lambda_g1(model, lam)?;
        let w = weight_g1(model, chain, lam)?;
        norm_direct += (c.powi(2) * w).to_f64() * s * s;
        s_values.push(s);
        c_lambda.push(c);
    }
    let mut closed = LogSigned::from_f64(a0).powi(-2);
    for j in 0..n {
        let idx = n - 1 - j + nu[j] as usize;
        closed *= LogSigned::from_f64(chain.one_body_norm(idx));
        closed /= chain.delta1[n - 1 - j] * chain.c1[n - 1 - j].powi(2);
    }
    let norm_closed = closed.to_f64();
    let h = s_values.iter().zip(&c_lambda).map(|(s, c)| c.to_f64() * s / norm_direct).collect();
    Ok(SchurEigenfunction {
        nu: nu.clone(),
        energy: nodes.iter().sum(),
        s_values,
        a0,
        a0_vandermonde: vander,
        c_lambda,
        norm_direct,
        norm_closed,
        h,
    })
}

/// `A_lambda` at g = 1 as the limit of the generic formula: symmetric offsets
/// `1 +/- delta` and `1 +/- delta/2`, combined by Richardson extrapolation.
pub fn finite_g_limit_a(params: &CouplingParams, lam: &Partition, delta: f64) -> Result<f64> {
    let at = |g: f64| -> Result<f64> {
        let q = CouplingParams { g, branch: Branch::Generic, ..params.clone() };
        Model::new(&q)?.coeff_a(lam)
    };
    let sym = |d: f64| -> Result<f64> { Ok(0.5 * (at(1.0 + d)? + at(1.0 - d)?)) };
    let coarse = sym(delta)?;
    let fine = sym(0.5 * delta)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
