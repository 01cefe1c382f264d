//! Rescaled Jacobi theta functions `[z;p]_r`, r = 1..4.
//!
//! With `x = alpha*z/2`,
//!
//! ```text
//! [z]_1 = theta_1(x; p) / (sin(alpha/2) theta_1'(0; p))
//! [z]_r = theta_r(x; p) / theta_r(0; p)          (r = 2, 3, 4)
//! ```
//!
//! `theta_1` and `theta_2` carry a common `2 p^{1/4}` prefactor which cancels
//! in every ratio above, so the series used here are the reduced ones
//!
//! ```text
//! theta_1 / 2p^{1/4} = sum_{l>=0} (-1)^l p^{l(l+1)} sin((2l+1)x)
//! theta_2 / 2p^{1/4} = sum_{l>=0}        p^{l(l+1)} cos((2l+1)x)
//! theta_3            = 1 + 2 sum_{l>=1}        p^{l^2} cos(2lx)
//! theta_4            = 1 + 2 sum_{l>=1} (-1)^l p^{l^2} cos(2lx)
//! ```
//!
//! which only involve integer powers of `p` and therefore stay regular for
//! `-1 < p <= 0`.
//!
//! For `|p| > PRODUCT_SWITCH` the series cancel badly (`theta_4(0; 0.9)` is
//! about 1e-9 while its terms are of order one), so brackets there come from
//! the infinite products, whose factors `1 +- 2q cos 2x + q^2` are all positive.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::logsigned::LogSigned;

/// Default relative truncation tolerance of the theta series.
pub const DEFAULT_TOL: f64 = 1e-16;
/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 64;

/// Nome magnitude above which brackets are evaluated from the products.
pub const PRODUCT_SWITCH: f64 = 0.6;

const MAX_PRODUCT_FACTORS: usize = 4096;

/// The real period scale `alpha` and the nome `p` shared by all brackets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaContext {
    alpha: f64,
    p: f64,
    tol: f64,
    /// Values of the reduced series (or derivative, for r = 1) at the origin.
    norm: [f64; 4],
}

fn check_index(r: usize) -> Result<()> {
    if (1..=4).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain(format!("theta index {r} not in 1..=4")))
    }
}

impl ThetaContext {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        Self::with_tol(alpha, p, DEFAULT_TOL)
    }

    pub fn with_tol(alpha: f64, p: f64, tol: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < TAU) {
            return Err(Error::Domain(format!("alpha = {alpha} not in (0, 2pi)")));
        }
        if !(p.is_finite() && p.abs() < 1.0) {
            return Err(Error::Domain(format!("nome p = {p} not in (-1, 1)")));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Domain(format!("tolerance {tol} must be positive")));
        }
        let mut ctx = ThetaContext { alpha, p, tol, norm: [1.0; 4] };
        let d1 = (alpha / 2.0).sin() * ctx.series_deriv(0.0, 1);
        let norm = [d1, ctx.series(0.0, 2), ctx.series(0.0, 3), ctx.series(0.0, 4)];
        if norm.iter().any(|d| !(d.abs() > tol)) {
            return Err(Error::Internal(format!("theta normalization underflow: {norm:?}")));
        }
        ctx.norm = norm;
        Ok(ctx)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The same context with a different nome.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::with_tol(self.alpha, p, self.tol)
    }

    /// `p^k` for the series exponents; `0^0 = 1`.
    fn pow(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.p.powi(k as i32)
        }
    }

    /// Reduced theta series `theta_r(x)` (prefactor `2p^{1/4}` removed for r = 1, 2).
    fn series(&self, x: f64, r: usize) -> f64 {
        let mut sum = if r >= 3 { 1.0 } else { 0.0 };
        for l in 0..MAX_TERMS {
            let (coef, term) = match r {
                1 => {
                    let c = self.pow(l * (l + 1)) * if l % 2 == 0 { 1.0 } else { -1.0 };
                    (c, c * ((2 * l + 1) as f64 * x).sin())
                }
                2 => {
                    let c = self.pow(l * (l + 1));
                    (c, c * ((2 * l + 1) as f64 * x).cos())
                }
                _ => {
                    if l == 0 {
                        continue;
                    }
                    let sign = if r == 4 && l % 2 == 1 { -1.0 } else { 1.0 };
                    let c = 2.0 * sign * self.pow(l * l);
                    (c, c * ((2 * l) as f64 * x).cos())
                }
            };
            sum += term;
            if coef.abs() < self.tol * sum.abs().max(1.0) && l > 0 {
                break;
            }
        }
        sum
    }

    /// Derivative of [`Self::series`] with respect to `x`.
    fn series_deriv(&self, x: f64, r: usize) -> f64 {
        let mut sum = 0.0;
        for l in 0..MAX_TERMS {
            let (coef, term) = match r {
                1 => {
                    let k = (2 * l + 1) as f64;
                    let c = k * self.pow(l * (l + 1)) * if l % 2 == 0 { 1.0 } else { -1.0 };
                    (c, c * (k * x).cos())
                }
                2 => {
                    let k = (2 * l + 1) as f64;
                    let c = k * self.pow(l * (l + 1));
                    (c, -c * (k * x).sin())
                }
                _ => {
                    if l == 0 {
                        continue;
                    }
                    let k = (2 * l) as f64;
                    let sign = if r == 4 && l % 2 == 1 { -1.0 } else { 1.0 };
                    let c = 2.0 * k * sign * self.pow(l * l);
                    (c, -c * (k * x).sin())
                }
            };
            sum += term;
            if coef.abs() < self.tol * sum.abs().max(1.0) && l > 0 {
                break;
            }
        }
        sum
    }

    /// Unchecked `[z]_r`; `r` must be in 1..=4.
    #[inline]
    pub(crate) fn br(&self, z: f64, r: usize) -> f64 {
        let x = 0.5 * self.alpha * z;
        if self.p.abs() > PRODUCT_SWITCH {
            self.product_eval(x, r).0
        } else {
            self.series(x, r) / self.norm[r - 1]
        }
    }

    /// Normalized bracket and its `x`-derivative from the product expansion.
    fn product_eval(&self, x: f64, r: usize) -> (f64, f64) {
        let p = self.p;
        let (sx, cx) = x.sin_cos();
        let (mut value, slope) = match r {
            1 => {
                let s = (0.5 * self.alpha).sin();
                (sx / s, cx / s)
            }
            2 => (cx, -sx),
            _ => (1.0, 0.0),
        };
        let s2 = (2.0 * x).sin();
        let mut prod = 1.0;
        let mut log_slope = 0.0;
        for l in 1..=MAX_PRODUCT_FACTORS {
            let (q, s) = match r {
                1 => (p.powi(2 * l as i32), -1.0),
                2 => (p.powi(2 * l as i32), 1.0),
                3 => (p.powi(2 * l as i32 - 1), 1.0),
                _ => (p.powi(2 * l as i32 - 1), -1.0),
            };
            // (1 + s q e^{2ix})(1 + s q e^{-2ix}) over its value at x = 0
            let d = (1.0 + s * q) * (1.0 + s * q);
            let f = 1.0 - 4.0 * s * q * sx * sx / d;
            prod *= f;
            log_slope -= 4.0 * s * q * s2 / (d * f);
            if q.abs() < 1e-18 {
                break;
            }
        }
        let deriv = slope * prod + value * prod * log_slope;
        value *= prod;
        (value, deriv)
    }

    /// `[z;p]_r`.
    pub fn bracket(&self, z: f64, r: usize) -> Result<f64> {
        check_index(r)?;
        if !z.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {z}")));
        }
        Ok(self.br(z, r))
    }

    /// `d/dz [z;p]_r`.
    pub fn bracket_deriv(&self, z: f64, r: usize) -> Result<f64> {
        check_index(r)?;
        if !z.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {z}")));
        }
        let x = 0.5 * self.alpha * z;
        let d = if self.p.abs() > PRODUCT_SWITCH {
            self.product_eval(x, r).1
        } else {
            self.series_deriv(x, r) / self.norm[r - 1]
        };
        Ok(0.5 * self.alpha * d)
    }

    /// `[z]'_r / [z]_r`, by term-wise differentiation of the reduced series.
    pub fn bracket_log_deriv(&self, z: f64, r: usize) -> Result<f64> {
        check_index(r)?;
        if !z.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {z}")));
        }
        let x = 0.5 * self.alpha * z;
        let (value, slope) = if self.p.abs() > PRODUCT_SWITCH {
            self.product_eval(x, r)
        } else {
            (self.series(x, r), self.series_deriv(x, r))
        };
        if value == 0.0 || value.abs() < 1e-14 * slope.abs() {
            return Err(Error::Pole(format!("log-derivative of [z]_{r} at its zero z = {z}")));
        }
        Ok(0.5 * self.alpha * slope / value)
    }

    /// `[z;p]_r` from the infinite product expansions.
    pub fn bracket_product(&self, z: f64, r: usize) -> Result<f64> {
        check_index(r)?;
        if !z.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {z}")));
        }
        Ok(self.product_eval(0.5 * self.alpha * z, r).0)
    }

    /// Elliptic shifted factorial `prod_j prod_{0<=k<l} [z_j + k]_r`.
    pub fn shifted_factorial(&self, zs: &[f64], r: usize, l: u32) -> Result<LogSigned> {
        check_index(r)?;
        if let Some(z) = zs.iter().find(|z| !z.is_finite()) {
            return Err(Error::Domain(format!("non-finite argument {z}")));
        }
        Ok(self.factorial(zs, r, l))
    }

    pub(crate) fn factorial(&self, zs: &[f64], r: usize, l: u32) -> LogSigned {
        zs.iter()
            .flat_map(|&z| (0..l).map(move |k| z + f64::from(k)))
            .map(|z| LogSigned::from_f64(self.br(z, r)))
            .product()
    }
}

/// Trigonometric brackets: `[z]_{1,q} = sin(alpha z/2)/sin(alpha/2)`,
/// `[z]_{2,q} = cos(alpha z/2)`, and `[z]_{3,q} = [z]_{4,q} = 1`.
///
/// These are the `p = 0` values of [`ThetaContext::bracket`].
pub fn q_bracket(alpha: f64, z: f64, r: usize) -> f64 {
    match r {
        1 => (0.5 * alpha * z).sin() / (0.5 * alpha).sin(),
        2 => (0.5 * alpha * z).cos(),
        3 | 4 => 1.0,
        _ => panic!("theta index {r} not in 1..=4"),
    }
}

/// Trigonometric shifted factorial `prod_j prod_{0<=k<l} [z_j + k]_{r,q}`.
pub fn q_factorial(alpha: f64, zs: &[f64], r: usize, l: u32) -> LogSigned {
    zs.iter()
        .flat_map(|&z| (0..l).map(move |k| z + f64::from(k)))
        .map(|z| LogSigned::from_f64(q_bracket(alpha, z, r)))
        .product()
}

/// Real zero set of `[z]_r` for the context's `alpha`: the odd bracket vanishes
/// on `(2 pi/alpha) Z`, the second on `(pi/alpha)(2Z + 1)`; the others have no
/// real zeros for real `p`.
pub fn distance_to_real_zero(alpha: f64, z: f64, r: usize) -> f64 {
    let half_period = PI / alpha;
    match r {
        1 => {
            let t = z / (2.0 * half_period);
            (t - t.round()).abs() * 2.0 * half_period
        }
        2 => {
            let t = (z - half_period) / (2.0 * half_period);
            (t - t.round()).abs() * 2.0 * half_period
        }
        _ => f64::INFINITY,
    }
}
