//! Closed forms at p = 0: spectrum, dual couplings, `c_{lambda,q}`,
//! `Delta_{lambda,q}` and the normalization `N_{nu,q}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Partition, Step};
use crate::logsigned::LogSigned;
use crate::model::{CouplingParams, PERMUTATIONS};
use crate::theta::{q_bracket, q_factorial};

/// `E_nu = 2 sum_j cos(alpha (rho_hat_j + nu_j))`.
pub fn eigenvalue_p0(params: &CouplingParams, nu: &Partition) -> f64 {
    let alpha = params.alpha();
    let rho_hat = params.weyl().rho_hat;
    rho_hat.iter().zip(nu.parts()).map(|(r, &v)| 2.0 * (alpha * (r + f64::from(v))).cos()).sum()
}

/// The constant `c = 2 sum_j cos(alpha rho_hat_j)` that every row of `H` sums to at p = 0.
pub fn row_constant(params: &CouplingParams) -> f64 {
    eigenvalue_p0(params, &Partition::zero(params.n))
}

/// `(g^1, g^2, g^'1, g^'2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCouplings {
    pub g_hat: [f64; 4],
}

impl DualCouplings {
    /// The Koornwinder parameters `(t, a, b, c, d)` as powers of `q = e^{i alpha}`:
    /// each entry is `(sign, exponent)` meaning `sign * q^exponent`.
    pub fn km_exponents(&self, g: f64) -> [(f64, f64); 5] {
        let [a, b, c, d] = self.g_hat;
        [(1.0, g), (1.0, a), (-1.0, b), (1.0, c + 0.5), (-1.0, d + 0.5)]
    }
}

/// The half-Hadamard reflection; an involution.
pub fn reflect(v: [f64; 4]) -> [f64; 4] {
    let [a, b, c, d] = v;
    [
        0.5 * (a + b + c + d),
        0.5 * (a + b - c - d),
        0.5 * (a - b + c - d),
        0.5 * (a - b - c + d),
    ]
}

pub fn dual_couplings(params: &CouplingParams) -> DualCouplings {
    DualCouplings { g_hat: reflect([params.g1, params.g2, params.gp1, params.gp2]) }
}

fn qb(alpha: f64, z: f64, r: usize) -> f64 {
    q_bracket(alpha, z, r)
}

/// `c_{r,q}` for r = 1, 2.
fn c_rq(params: &CouplingParams) -> [f64; 2] {
    let alpha = params.alpha();
    let g = params.g;
    let gs = params.gs();
    let gps = params.gps();
    let den = qb(alpha, g, 1) * qb(alpha, g - 1.0, 1);
    let mut out = [0.0; 2];
    for (r, perm) in PERMUTATIONS.iter().take(2).enumerate() {
        let num: f64 = (0..2).map(|s| qb(alpha, gs[perm[s]] - 0.5, s + 1) * qb(alpha, gps[perm[s]], s + 1)).product();
        out[r] = 2.0 * num / den;
    }
    out
}

/// `A_lambda` at p = 0 from trigonometric brackets only.
pub fn coeff_a_p0(params: &CouplingParams, lam: &Partition) -> Result<f64> {
    if params.primes_vanish() {
        return Ok(0.0);
    }
    if (params.g - 1.0).abs() < 1e-12 {
        return Err(Error::Branch("c_{r,q} has a pole at g = 1".into()));
    }
    let alpha = params.alpha();
    let g = params.g;
    let rho = params.weyl().rho;
    let c = c_rq(params);
    let mut total = 0.0;
    for r in 1..=2 {
        let mut prod = 1.0;
        for (j, rj) in rho.iter().enumerate() {
            let x = rj + f64::from(lam[j]);
            for delta in [1.0, -1.0] {
                prod *= qb(alpha, delta * x - 0.5 + g, r) / qb(alpha, delta * x - 0.5, r);
            }
        }
        total += c[r - 1] * (prod - 1.0);
    }
    Ok(total)
}

/// `B_{lambda, eps j}` at p = 0; zero for inadmissible moves.
pub fn coeff_b_p0(params: &CouplingParams, lattice: &Lattice, lam: &Partition, step: Step) -> f64 {
    if !lattice.admissible(lam, step) {
        return 0.0;
    }
    let alpha = params.alpha();
    let eps = step.eps();
    let rho = params.weyl().rho;
    let gs = params.gs();
    let gps = params.gps();
    let j = step.part;
    let x = rho[j] + f64::from(lam[j]);
    let mut b = 1.0;
    for r in 1..=2 {
        b *= qb(alpha, x + eps * gs[r - 1], r) * qb(alpha, x + eps * (gps[r - 1] + 0.5), r);
        b /= qb(alpha, x, r) * qb(alpha, x + 0.5 * eps, r);
    }
    for k in (0..params.n).filter(|&k| k != j) {
        let y = rho[k] + f64::from(lam[k]);
        for delta in [1.0, -1.0] {
            b *= qb(alpha, x + delta * y + eps * params.g, 1) / qb(alpha, x + delta * y, 1);
        }
    }
    b
}

fn pair(lam: &Partition, j: usize, k: usize, delta: f64) -> u32 {
    if delta > 0.0 {
        lam[j] + lam[k]
    } else {
        lam[j] - lam[k]
    }
}

/// `c_{lambda,q}`.
pub fn c_lambda_q(params: &CouplingParams, lam: &Partition) -> LogSigned {
    let alpha = params.alpha();
    let rho = params.weyl().rho;
    let gs = params.gs();
    let gps = params.gps();
    let mut c = LogSigned::ONE;
    for j in 0..params.n {
        for r in 1..=2 {
            c *= q_factorial(alpha, &[rho[j], rho[j] + 0.5], r, lam[j]);
            c /= q_factorial(alpha, &[rho[j] + gs[r - 1], rho[j] + gps[r - 1] + 0.5], r, lam[j]);
        }
        for k in j + 1..params.n {
            for delta in [1.0, -1.0] {
                let s = rho[j] + delta * rho[k];
                let l = pair(lam, j, k, delta);
                c *= q_factorial(alpha, &[s], 1, l);
                c /= q_factorial(alpha, &[s + params.g], 1, l);
            }
        }
    }
    c
}

/// `Delta_{lambda,q}`.
pub fn delta_lambda_q(params: &CouplingParams, lam: &Partition) -> LogSigned {
    let cs = [params.g1, params.g2, params.gp1, params.gp2];
    trig_weight(params.alpha(), params.g, &params.weyl().rho, cs, lam)
}

/// The same weight with `rho -> rho_hat` and the couplings replaced by their duals.
pub fn dual_delta_q(params: &CouplingParams, nu: &Partition) -> LogSigned {
    let cs = dual_couplings(params).g_hat;
    trig_weight(params.alpha(), params.g, &params.weyl().rho_hat, cs, nu)
}

fn trig_weight(alpha: f64, g: f64, rho: &[f64], cs: [f64; 4], lam: &Partition) -> LogSigned {
    let (gs, gps) = ([cs[0], cs[1]], [cs[2], cs[3]]);
    let mut w = LogSigned::ONE;
    for j in 0..rho.len() {
        w *= LogSigned::from_f64(qb(alpha, 2.0 * rho[j] + 2.0 * f64::from(lam[j]), 1) / qb(alpha, 2.0 * rho[j], 1));
        for r in 1..=2 {
            w *= q_factorial(alpha, &[rho[j] + gs[r - 1], rho[j] + gps[r - 1] + 0.5], r, lam[j]);
            w /= q_factorial(alpha, &[rho[j] + 1.0 - gs[r - 1], rho[j] - gps[r - 1] + 0.5], r, lam[j]);
        }
        for k in j + 1..rho.len() {
            for delta in [1.0, -1.0] {
                let s = rho[j] + delta * rho[k];
                let l = pair(lam, j, k, delta);
                w *= LogSigned::from_f64(qb(alpha, s + f64::from(l), 1) / qb(alpha, s, 1));
                w *= q_factorial(alpha, &[s + g], 1, l);
                w /= q_factorial(alpha, &[s + 1.0 - g], 1, l);
            }
        }
    }
    w
}

/// `sum_lambda Delta_{lambda,q}`, which is `N_{0,q}`.
pub fn total_mass_q(params: &CouplingParams) -> Result<LogSigned> {
    let lattice = Lattice::new(params.n, params.m)?;
    let ws: Vec<LogSigned> = lattice.points().iter().map(|lam| delta_lambda_q(params, lam)).collect();
    if ws.iter().any(|w| !w.is_positive()) {
        return Err(Error::Numeric("non-positive weight in the total mass".into()));
    }
    let top = ws.iter().map(|w| w.logmag).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = ws.iter().map(|w| (w.logmag - top).exp()).sum();
    Ok(LogSigned::new(1, top + sum.ln()))
}

/// `N_{nu,q} = N_{0,q} / hat Delta_{nu,q}`, so that `h^(nu)_0 = 1 / N_{nu,q}` at p = 0.
pub fn norm_product_nq(params: &CouplingParams, nu: &Partition) -> Result<f64> {
    let value = (total_mass_q(params)? / dual_delta_q(params, nu)).to_f64();
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Numeric(format!("N_q at {nu} is {value}")));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn sample() -> CouplingParams {
        CouplingParams::new(2, 2, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], 0.0)
    }

    #[test]
    fn reflection() {
        assert_eq!(reflect([1.0, 1.0, 1.0, 1.0]), [2.0, 0.0, 0.0, 0.0]);
        let v = [0.3, -1.2, 0.77, 2.5];
        let back = reflect(reflect(v));
        for i in 0..4 {
            assert!((back[i] - v[i]).abs() < 1e-15);
        }
        let params = sample();
        let d = dual_couplings(&params);
        let rh = params.weyl().rho_hat;
        assert!((d.g_hat[0] - rh[params.n - 1]).abs() < 1e-15);
    }

    #[test]
    fn zero_partition_values() {
        let params = sample();
        let zero = Partition::zero(2);
        assert!(c_lambda_q(&params, &zero).approx_eq(LogSigned::ONE, 1e-15));
        assert!(delta_lambda_q(&params, &zero).approx_eq(LogSigned::ONE, 1e-15));
        let c = row_constant(&params);
        assert_eq!(c, eigenvalue_p0(&params, &zero));
    }

    #[test]
    fn delta_q_is_weight_at_p0() {
        let params = sample();
        let model = Model::new(&params).unwrap();
        for lam in Lattice::new(2, 2).unwrap().points() {
            let a = delta_lambda_q(&params, lam);
            let b = model.weight_delta(lam).unwrap();
            assert!(a.approx_eq(b, 1e-12), "{lam}");
        }
    }

    #[test]
    fn p0_paths_agree_with_model() {
        let params = sample();
        let model = Model::new(&params).unwrap();
        let lat = Lattice::new(2, 2).unwrap();
        for lam in lat.points() {
            let a0 = coeff_a_p0(&params, lam).unwrap();
            assert!((a0 - model.coeff_a(lam).unwrap()).abs() < 1e-12);
            for step in lat.moves(lam) {
                let b0 = coeff_b_p0(&params, &lat, lam, step);
                let b = model.coeff_b(lam, step).unwrap();
                assert!((b0 - b).abs() < 1e-12 * b.abs());
            }
        }
    }

    #[test]
    fn row_sum_identity() {
        let params = sample();
        let lat = Lattice::new(2, 2).unwrap();
        let c = row_constant(&params);
        for lam in lat.points() {
            let sum: f64 = coeff_a_p0(&params, lam).unwrap()
                + lat.moves(lam).into_iter().map(|s| coeff_b_p0(&params, &lat, lam, s)).sum::<f64>();
            assert!((sum - c).abs() < 1e-12 * c.abs().max(1.0), "{lam}: {sum} vs {c}");
        }
    }

    #[test]
    fn norm_matches_ground_state() {
        let params = CouplingParams::new(1, 3, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05, 0.02, -0.03, 0.04], 0.0);
        let (_, result) = crate::spectral::spectrum(&params, &Default::default()).unwrap();
        for (nu, ef) in result.lattice_order.iter().zip(&result.eigenfunctions) {
            let nq = norm_product_nq(&params, nu).unwrap();
            assert!((ef.values[0] * nq - 1.0).abs() < 1e-10, "{nu}");
        }
    }

    #[test]
    fn norms_are_positive() {
        let params = sample();
        for nu in Lattice::new(2, 2).unwrap().points() {
            assert!(norm_product_nq(&params, nu).unwrap() > 0.0);
        }
    }
}
