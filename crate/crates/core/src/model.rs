//! Couplings, truncation, operator coefficients `A_lambda`, `B_{lambda,eps j}`
//! and the elliptic weights `Delta_lambda`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Partition, Step};
use crate::logsigned::LogSigned;
use crate::theta::{distance_to_real_zero, ThetaContext, DEFAULT_TOL};

/// Permutations `pi_1 = id, pi_2 = (12)(34), pi_3 = (13)(24), pi_4 = (14)(23)`
/// of the external-field labels, 0-based.
pub const PERMUTATIONS: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];

/// Relative distance below which a coefficient denominator counts as a pole.
pub const POLE_TOL: f64 = 1e-9;

/// Which coefficient formulas build the operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Theta-quotient formulas; singular at g = 1 unless all primed couplings vanish.
    #[default]
    Generic,
    /// Regularized impenetrable-boson limit g = 1.
    G1,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Generic => write!(f, "generic"),
            Branch::G1 => write!(f, "g1"),
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Branch::Generic),
            "g1" => Ok(Branch::G1),
            _ => Err(Error::Domain(format!("unknown branch {s:?}"))),
        }
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

/// The nine couplings, particle number, level and nome.
///
/// Serialized as a flat object with keys `n, m, g, g1..g4, gp1..gp4, p, tol`
/// (plus an optional `branch`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub n: usize,
    pub m: u32,
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
    pub gp1: f64,
    pub gp2: f64,
    pub gp3: f64,
    pub gp4: f64,
    pub p: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub branch: Branch,
}

impl CouplingParams {
    pub fn new(n: usize, m: u32, g: f64, gs: [f64; 4], gps: [f64; 4], p: f64) -> Self {
        CouplingParams {
            n,
            m,
            g,
            g1: gs[0],
            g2: gs[1],
            g3: gs[2],
            g4: gs[3],
            gp1: gps[0],
            gp2: gps[1],
            gp3: gps[2],
            gp4: gps[3],
            p,
            tol: DEFAULT_TOL,
            branch: Branch::Generic,
        }
    }

    /// The regularized g = 1 operator with the given external field.
    pub fn g1_branch(n: usize, m: u32, gs: [f64; 4], gps: [f64; 4], p: f64) -> Self {
        CouplingParams { branch: Branch::G1, ..Self::new(n, m, 1.0, gs, gps, p) }
    }

    pub fn with_p(&self, p: f64) -> Self {
        CouplingParams { p, ..self.clone() }
    }

    /// External-field couplings `(g1, g2, g3, g4)`.
    pub fn gs(&self) -> [f64; 4] {
        [self.g1, self.g2, self.g3, self.g4]
    }

    /// Primed couplings `(g'1, g'2, g'3, g'4)`.
    pub fn gps(&self) -> [f64; 4] {
        [self.gp1, self.gp2, self.gp3, self.gp4]
    }

    /// `alpha = pi / (m + (n-1) g + g1 + g2)`.
    pub fn alpha(&self) -> f64 {
        PI / self.half_period()
    }

    /// `pi / alpha`.
    pub fn half_period(&self) -> f64 {
        f64::from(self.m) + (self.n as f64 - 1.0) * self.g + self.g1 + self.g2
    }

    pub fn weyl(&self) -> WeylVector {
        WeylVector::new(self)
    }

    pub fn primes_vanish(&self) -> bool {
        self.gps().iter().all(|&x| x == 0.0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("parameter file: {e}")))
    }
}

/// `rho_j = (n-j) g + g1` and `rho_hat_j = (n-j) g + (g1+g2+g'1+g'2)/2`, j = 1..n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylVector {
    pub rho: Vec<f64>,
    pub rho_hat: Vec<f64>,
}

impl WeylVector {
    pub fn new(params: &CouplingParams) -> Self {
        let n = params.n;
        let shift = 0.5 * (params.g1 + params.g2 + params.gp1 + params.gp2);
        let rho = (1..=n).map(|j| (n - j) as f64 * params.g + params.g1).collect();
        let rho_hat = (1..=n).map(|j| (n - j) as f64 * params.g + shift).collect();
        WeylVector { rho, rho_hat }
    }
}

/// Outcome of parameter validation; never an error by itself.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub alpha: Option<f64>,
    pub violations: Vec<String>,
    /// Coefficient denominators within [`POLE_TOL`] of a zero.
    pub near_poles: Vec<String>,
    /// Hits of the sufficient genericity guard `k g + l g1 in Z/2 + (pi/2alpha) Z`.
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn into_result(self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            let mut all = self.violations;
            all.extend(self.near_poles);
            Err(Error::InvalidParams(all))
        }
    }
}

/// Branch consistency on its own: the generic operator at g = 1 (with some
/// g'_r nonzero) and the g1 branch away from g = 1 are both branch errors.
pub fn check_branch(params: &CouplingParams) -> Result<()> {
    match params.branch {
        Branch::Generic if (params.g - 1.0).abs() < POLE_TOL && !params.primes_vanish() => {
            Err(Error::Branch("g = 1 is a pole of c_r unless all g'_r vanish; use the g1 branch".into()))
        }
        Branch::G1 if (params.g - 1.0).abs() > 1e-12 => {
            Err(Error::Branch(format!("the g1 branch requires g = 1, got g = {}", params.g)))
        }
        _ => Ok(()),
    }
}

/// Checks the coupling domain, the truncation condition and coefficient regularity.
pub fn validate(params: &CouplingParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    let finite = [params.g, params.g1, params.g2, params.g3, params.g4]
        .iter()
        .chain(params.gps().iter())
        .chain([params.p, params.tol].iter())
        .all(|x| x.is_finite());
    if !finite {
        v.push("all couplings, p and tol must be finite".into());
    }
    if params.n == 0 {
        v.push("n must be >= 1".into());
    }
    if params.m == 0 {
        v.push("m must be >= 1".into());
    }
    if !(params.g > 0.0) {
        v.push(format!("g = {} must be > 0", params.g));
    }
    if !(params.g1 > 0.0) {
        v.push(format!("g1 = {} must be > 0", params.g1));
    }
    if !(params.g2 > 0.0) {
        v.push(format!("g2 = {} must be > 0", params.g2));
    }
    if !(params.gp1.abs() < params.g1 + 0.5) {
        v.push(format!("|g'1| = {} must be < g1 + 1/2 = {}", params.gp1.abs(), params.g1 + 0.5));
    }
    if !(params.gp2.abs() < params.g2 + 0.5) {
        v.push(format!("|g'2| = {} must be < g2 + 1/2 = {}", params.gp2.abs(), params.g2 + 0.5));
    }
    if !(params.p.abs() < 1.0) {
        v.push(format!("nome p = {} must satisfy |p| < 1", params.p));
    }
    if !(params.tol > 0.0) {
        v.push(format!("tol = {} must be > 0", params.tol));
    }
    if let Err(e) = check_branch(params) {
        v.push(e.to_string());
    }
    if !report.violations.is_empty() {
        return report;
    }
    report.alpha = Some(params.alpha());

    let half = params.half_period();
    for k in 0..params.n {
        for l in 0..2u32 {
            if k == 0 && l == 0 {
                continue;
            }
            let x = k as f64 * params.g + f64::from(l) * params.g1;
            // nearest point of Z/2 + (half/2) Z over the relevant window
            let hit = (-4..=4).any(|b| {
                let rest = x - f64::from(b) * 0.5 * half;
                (rest - (2.0 * rest).round() / 2.0).abs() < POLE_TOL
            });
            if hit {
                report
                    .warnings
                    .push(format!("{k} g + {l} g1 = {x} lies on the genericity guard lattice"));
            }
        }
    }

    match Model::unchecked(params) {
        Ok(model) => report.near_poles = model.pole_scan(),
        Err(e) => report.violations.push(e.to_string()),
    }
    report.valid = report.violations.is_empty() && report.near_poles.is_empty();
    report
}

/// Index of each coupling in an [`Affine`] coefficient vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sym {
    One = 0,
    G = 1,
    Gr1 = 2,
    Gr2 = 3,
}

const NSYM: usize = 10;

/// A theta argument as an exact linear form in `(1, g, g1..g4, g'1..g'4)`.
///
/// Coefficients are small integers and half-integers, so comparisons are exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Affine([f64; NSYM]);

impl Affine {
    fn zero() -> Self {
        Affine([0.0; NSYM])
    }

    pub(crate) fn constant(c: f64) -> Self {
        let mut a = Self::zero();
        a.0[Sym::One as usize] = c;
        a
    }

    fn sym(s: Sym) -> Self {
        let mut a = Self::zero();
        a.0[s as usize] = 1.0;
        a
    }

    /// External coupling g_r (r = 1..4).
    fn gr(r: usize) -> Self {
        let mut a = Self::zero();
        a.0[1 + r] = 1.0;
        a
    }

    /// Primed coupling g'_r (r = 1..4).
    fn gpr(r: usize) -> Self {
        let mut a = Self::zero();
        a.0[5 + r] = 1.0;
        a
    }

    fn eval(&self, values: &[f64; NSYM]) -> f64 {
        self.0.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl Add for Affine {
    type Output = Affine;
    fn add(mut self, rhs: Affine) -> Affine {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Affine {
    type Output = Affine;
    fn sub(self, rhs: Affine) -> Affine {
        self + (-rhs)
    }
}

impl Neg for Affine {
    type Output = Affine;
    fn neg(mut self) -> Affine {
        self.0.iter_mut().for_each(|a| *a = -*a);
        self
    }
}

impl Mul<Affine> for f64 {
    type Output = Affine;
    fn mul(self, mut rhs: Affine) -> Affine {
        rhs.0.iter_mut().for_each(|a| *a *= self);
        rhs
    }
}

impl Add<f64> for Affine {
    type Output = Affine;
    fn add(self, rhs: f64) -> Affine {
        self + Affine::constant(rhs)
    }
}

/// A theta factor `[arg]_r`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Factor {
    pub arg: Affine,
    pub r: usize,
}

/// Coupling-dependent data shared by every coefficient evaluation.
#[derive(Clone, Debug)]
pub struct Model {
    params: CouplingParams,
    ctx: ThetaContext,
    weyl: WeylVector,
    values: [f64; NSYM],
    /// `c_r`, or `None` when every `A_lambda` vanishes identically.
    c: Option<[f64; 4]>,
}

impl Model {
    /// Validates `params` and precomputes `alpha`, `rho`, and `c_r`.
    pub fn new(params: &CouplingParams) -> Result<Self> {
        validate(params).into_result()?;
        Self::unchecked(params)
    }

    fn unchecked(params: &CouplingParams) -> Result<Self> {
        let ctx = ThetaContext::with_tol(params.alpha(), params.p, params.tol)?;
        let mut values = [0.0; NSYM];
        values[Sym::One as usize] = 1.0;
        values[Sym::G as usize] = params.g;
        for r in 1..=4 {
            values[1 + r] = params.gs()[r - 1];
            values[5 + r] = params.gps()[r - 1];
        }
        let mut model = Model { params: params.clone(), ctx, weyl: params.weyl(), values, c: None };
        if !params.primes_vanish() && params.branch == Branch::Generic {
            model.c = Some(model.compute_c()?);
        }
        Ok(model)
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn ctx(&self) -> &ThetaContext {
        &self.ctx
    }

    pub fn weyl(&self) -> &WeylVector {
        &self.weyl
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// A model at another nome with the same couplings.
    pub fn at_p(&self, p: f64) -> Result<Self> {
        let mut model = self.clone();
        model.params.p = p;
        model.ctx = self.ctx.with_p(p)?;
        if model.c.is_some() {
            model.c = Some(model.compute_c()?);
        }
        Ok(model)
    }

    /// The interaction coupling as a symbol, or as the constant 1 on the g1 branch.
    fn sym_g(&self) -> Affine {
        match self.params.branch {
            Branch::Generic => Affine::sym(Sym::G),
            Branch::G1 => Affine::constant(1.0),
        }
    }

    /// `rho_j` for 1-based `j`; indices `0` and `n+1` extend the formula.
    pub(crate) fn rho_sym(&self, j: usize) -> Affine {
        (self.params.n as f64 - j as f64) * self.sym_g() + Affine::sym(Sym::Gr1)
    }

    pub(crate) fn gr_sym(&self, r: usize) -> Affine {
        Affine::gr(r)
    }

    pub(crate) fn gpr_sym(&self, r: usize) -> Affine {
        Affine::gpr(r)
    }

    /// `pi/alpha` as a linear form.
    fn half_period_sym(&self) -> Affine {
        Affine::constant(f64::from(self.params.m))
            + (self.params.n as f64 - 1.0) * self.sym_g()
            + Affine::sym(Sym::Gr1)
            + Affine::sym(Sym::Gr2)
    }

    pub(crate) fn eval(&self, arg: &Affine) -> f64 {
        arg.eval(&self.values)
    }

    /// Whether `[arg]_r` vanishes identically in the couplings once the
    /// truncation condition is imposed.
    pub(crate) fn vanishes(&self, f: &Factor) -> bool {
        if f.r > 2 {
            return false;
        }
        let k = f.arg.0[Sym::Gr2 as usize];
        if k.fract() != 0.0 {
            return false;
        }
        let parity_ok = if f.r == 1 { k % 2.0 == 0.0 } else { k.rem_euclid(2.0) == 1.0 };
        parity_ok && (f.arg - k * self.half_period_sym()).is_zero()
    }

    pub(crate) fn bracket(&self, f: &Factor) -> f64 {
        self.ctx.br(self.eval(&f.arg), f.r)
    }

    /// `prod num / prod den`, exactly zero when a numerator factor vanishes identically.
    pub(crate) fn quotient(&self, num: &[Factor], den: &[Factor]) -> Result<LogSigned> {
        if num.iter().any(|f| self.vanishes(f)) {
            return Ok(LogSigned::ZERO);
        }
        if let Some(f) = den.iter().find(|f| self.vanishes(f)) {
            return Err(Error::Pole(format!("denominator [{}]_{} vanishes", self.eval(&f.arg), f.r)));
        }
        let top: LogSigned = num.iter().map(|f| LogSigned::from_f64(self.bracket(f))).product();
        let bottom: LogSigned = den.iter().map(|f| LogSigned::from_f64(self.bracket(f))).product();
        if bottom.is_zero() {
            return Err(Error::Pole("denominator theta factor underflowed to zero".into()));
        }
        Ok(top / bottom)
    }

    fn compute_c(&self) -> Result<[f64; 4]> {
        let g = self.params.g;
        let den = self.ctx.br(g, 1) * self.ctx.br(g - 1.0, 1);
        if den.abs() < POLE_TOL {
            return Err(Error::Branch(format!(
                "c_r has a pole at g = {g}; the g = 1 operator lives on the g1 branch"
            )));
        }
        let mut c = [0.0; 4];
        for (r, perm) in PERMUTATIONS.iter().enumerate() {
            c[r] = 2.0 / den * self.c_numerator(perm);
        }
        Ok(c)
    }

    /// `prod_s [g_{pi(s)} - 1/2]_s [g'_{pi(s)}]_s`.
    pub(crate) fn c_numerator(&self, perm: &[usize; 4]) -> f64 {
        let gs = self.params.gs();
        let gps = self.params.gps();
        (0..4)
            .map(|s| self.ctx.br(gs[perm[s]] - 0.5, s + 1) * self.ctx.br(gps[perm[s]], s + 1))
            .product()
    }

    /// The coefficients `c_r`, r = 1..4 (generic branch only).
    pub fn c_r(&self) -> Result<[f64; 4]> {
        match (self.params.branch, self.c) {
            (Branch::G1, _) => Err(Error::Branch("c_r is singular at g = 1".into())),
            (_, Some(c)) => Ok(c),
            (_, None) => Ok(self.compute_c().unwrap_or([0.0; 4])),
        }
    }

    fn x(&self, lam: &Partition, j: usize) -> Affine {
        self.rho_sym(j + 1) + f64::from(lam[j])
    }

    /// The diagonal coefficient `A_lambda` (generic branch).
    pub fn coeff_a(&self, lam: &Partition) -> Result<f64> {
        if self.params.branch == Branch::G1 {
            return Err(Error::Branch("A_lambda at g = 1 is built from the racah chain".into()));
        }
        let Some(c) = self.c else {
            return Ok(0.0);
        };
        let g = self.sym_g();
        let mut total = 0.0;
        for (r, cr) in (1..=4).zip(c) {
            let mut num = Vec::with_capacity(2 * self.n());
            let mut den = Vec::with_capacity(2 * self.n());
            for j in 0..self.n() {
                let x = self.x(lam, j);
                num.push(Factor { arg: x + 0.5 - g, r });
                num.push(Factor { arg: x + (-0.5) + g, r });
                den.push(Factor { arg: x + 0.5, r });
                den.push(Factor { arg: x + (-0.5), r });
            }
            total += cr * (self.quotient(&num, &den)?.to_f64() - 1.0);
        }
        Ok(total)
    }

    /// Numerator and denominator factors of the one-body part of `B_{lambda, eps j}`.
    pub(crate) fn one_body_factors(&self, x: Affine, eps: f64) -> (Vec<Factor>, Vec<Factor>) {
        let mut num = Vec::with_capacity(8);
        let mut den = Vec::with_capacity(8);
        for r in 1..=4 {
            num.push(Factor { arg: x + eps * Affine::gr(r), r });
            num.push(Factor { arg: x + eps * (Affine::gpr(r) + 0.5), r });
            den.push(Factor { arg: x, r });
            den.push(Factor { arg: x + 0.5 * eps, r });
        }
        (num, den)
    }

    /// The hopping coefficient `B_{lambda, eps j}`; exactly zero off the lattice.
    pub fn coeff_b(&self, lam: &Partition, step: Step) -> Result<f64> {
        let j = step.part;
        if j >= self.n() || lam.len() != self.n() {
            return Err(Error::Domain(format!("step {step:?} does not fit {lam}")));
        }
        let eps = step.eps();
        let x = self.x(lam, j);
        let (mut num, mut den) = self.one_body_factors(x, eps);
        let g = self.sym_g();
        for k in (0..self.n()).filter(|&k| k != j) {
            for delta in [1.0, -1.0] {
                let y = x + delta * self.x(lam, k);
                num.push(Factor { arg: y + eps * g, r: 1 });
                den.push(Factor { arg: y, r: 1 });
            }
        }
        Ok(self.quotient(&num, &den)?.to_f64())
    }

    /// `Delta_lambda` from its defining product of elliptic shifted factorials.
    pub fn weight_delta(&self, lam: &Partition) -> Result<LogSigned> {
        let gs = self.params.gs();
        let gps = self.params.gps();
        let rho = &self.weyl.rho;
        let g = self.params.g_eff();
        let ctx = &self.ctx;
        let mut w = LogSigned::ONE;
        for j in 0..self.n() {
            let l = lam[j];
            for r in 1..=4 {
                let (gr, gpr) = (gs[r - 1], gps[r - 1]);
                w *= ctx.factorial(&[rho[j] + 1.0, rho[j] + gr, rho[j] + gpr + 0.5], r, l);
                w /= ctx.factorial(&[rho[j], rho[j] + 1.0 - gr, rho[j] - gpr + 0.5], r, l);
            }
        }
        for j in 0..self.n() {
            for k in j + 1..self.n() {
                for delta in [1.0, -1.0] {
                    let s = rho[j] + delta * rho[k];
                    let l = pair_length(lam, j, k, delta);
                    w *= ctx.factorial(&[s + g, s + 1.0], 1, l);
                    w /= ctx.factorial(&[s, s + 1.0 - g], 1, l);
                }
            }
        }
        finite_weight(w, lam)
    }

    /// `Delta_lambda` in the form obtained through the duplication formula.
    pub fn weight_delta_dup(&self, lam: &Partition) -> Result<LogSigned> {
        let gs = self.params.gs();
        let gps = self.params.gps();
        let rho = &self.weyl.rho;
        let g = self.params.g_eff();
        let ctx = &self.ctx;
        let mut w = LogSigned::ONE;
        for j in 0..self.n() {
            let l = lam[j];
            w *= LogSigned::from_f64(ctx.br(2.0 * rho[j] + 2.0 * f64::from(l), 1));
            w /= LogSigned::from_f64(ctx.br(2.0 * rho[j], 1));
            for r in 1..=4 {
                let (gr, gpr) = (gs[r - 1], gps[r - 1]);
                w *= ctx.factorial(&[rho[j] + gr, rho[j] + gpr + 0.5], r, l);
                w /= ctx.factorial(&[rho[j] + 1.0 - gr, rho[j] - gpr + 0.5], r, l);
            }
        }
        for j in 0..self.n() {
            for k in j + 1..self.n() {
                for delta in [1.0, -1.0] {
                    let s = rho[j] + delta * rho[k];
                    let l = pair_length(lam, j, k, delta);
                    w *= LogSigned::from_f64(ctx.br(s + f64::from(l), 1));
                    w /= LogSigned::from_f64(ctx.br(s, 1));
                    w *= ctx.factorial(&[s + g], 1, l);
                    w /= ctx.factorial(&[s + 1.0 - g], 1, l);
                }
            }
        }
        finite_weight(w, lam)
    }

    /// Evaluates the full generic coefficient table over `lattice`.
    pub fn coefficients(&self, lattice: &Lattice) -> Result<OperatorCoefficients> {
        self.check_lattice(lattice)?;
        let mut a = Vec::with_capacity(lattice.len());
        let mut b = Vec::with_capacity(lattice.len());
        let mut weights = Vec::with_capacity(lattice.len());
        for lam in lattice.points() {
            a.push(self.coeff_a(lam)?);
            let row = lattice
                .all_steps()
                .map(|s| self.coeff_b(lam, s))
                .collect::<Result<Vec<_>>>()?;
            b.push(row);
            weights.push(self.weight_delta(lam)?);
        }
        Ok(OperatorCoefficients { n: self.n(), a, b, weights })
    }

    pub(crate) fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if lattice.n() != self.params.n || lattice.m() != self.params.m {
            return Err(Error::Domain(format!(
                "lattice ({}, {}) does not match parameters ({}, {})",
                lattice.n(),
                lattice.m(),
                self.params.n,
                self.params.m
            )));
        }
        Ok(())
    }

    /// Coefficient denominators numerically close to a zero of their bracket.
    fn pole_scan(&self) -> Vec<String> {
        let mut hits = Vec::new();
        let alpha = self.params.alpha();
        let scale = self.params.half_period();
        let mut check = |f: &Factor, what: &str| {
            if self.vanishes(f) {
                return;
            }
            let z = self.eval(&f.arg);
            if distance_to_real_zero(alpha, z, f.r) < POLE_TOL * scale {
                hits.push(format!("{what}: denominator [{z}]_{} is near a zero", f.r));
            }
        };
        if self.params.branch == Branch::Generic && !self.params.primes_vanish() {
            let g = self.params.g;
            check(&Factor { arg: Affine::constant(g), r: 1 }, "c_r");
            check(&Factor { arg: Affine::constant(g - 1.0), r: 1 }, "c_r");
        }
        let Ok(lattice) = Lattice::new(self.params.n, self.params.m) else {
            return hits;
        };
        for lam in lattice.points() {
            for j in 0..self.n() {
                let x = self.x(lam, j);
                for r in 1..=4 {
                    check(&Factor { arg: x + 0.5, r }, "A");
                    check(&Factor { arg: x + (-0.5), r }, "A");
                }
            }
            for step in lattice.moves(lam) {
                let j = step.part;
                let x = self.x(lam, j);
                let (_, den) = self.one_body_factors(x, step.eps());
                for f in &den {
                    check(f, "B");
                }
                for k in (0..self.n()).filter(|&k| k != j) {
                    for delta in [1.0, -1.0] {
                        check(&Factor { arg: x + delta * self.x(lam, k), r: 1 }, "B");
                    }
                }
            }
        }
        hits.sort();
        hits.dedup();
        hits
    }
}

impl CouplingParams {
    /// The interaction coupling actually used by the formulas (1 on the g1 branch).
    pub fn g_eff(&self) -> f64 {
        match self.branch {
            Branch::Generic => self.g,
            Branch::G1 => 1.0,
        }
    }
}

fn pair_length(lam: &Partition, j: usize, k: usize, delta: f64) -> u32 {
    if delta > 0.0 {
        lam[j] + lam[k]
    } else {
        lam[j] - lam[k]
    }
}

fn finite_weight(w: LogSigned, lam: &Partition) -> Result<LogSigned> {
    if w.is_zero() || !w.logmag.is_finite() {
        return Err(Error::Numeric(format!("weight at {lam} is {w}")));
    }
    Ok(w)
}

/// Dense tables of `A`, `B` and `Delta` over a lattice, indexed by rank.
///
/// `b[rank][2 j]` is the raising coefficient for part `j`, `b[rank][2 j + 1]`
/// the lowering one; inadmissible moves hold exact zeros.
#[derive(Clone, Debug)]
pub struct OperatorCoefficients {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub weights: Vec<LogSigned>,
}

impl OperatorCoefficients {
    pub fn b(&self, rank: usize, step: Step) -> f64 {
        self.b[rank][2 * step.part + usize::from(!step.raise)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> CouplingParams {
        CouplingParams::new(2, 2, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], 0.3)
    }

    #[test]
    fn truncation_alpha() {
        let params = CouplingParams::new(2, 3, 0.5, [0.3, 0.4, 0.0, 0.0], [0.0; 4], 0.0);
        let report = validate(&params);
        assert!(report.valid, "{report:?}");
        assert!((report.alpha.unwrap() - PI / 4.2).abs() < 1e-15);
    }

    #[test]
    fn g_equal_one_needs_branch() {
        let mut params = CouplingParams::new(2, 2, 1.0, [0.6, 0.7, 0.1, 0.2], [0.1, 0.0, 0.0, 0.0], 0.2);
        let report = validate(&params);
        assert!(!report.valid);
        params.branch = Branch::G1;
        assert!(validate(&params).valid);
    }

    #[test]
    fn boundary_of_primed_condition() {
        let params = CouplingParams::new(2, 2, 0.5, [0.6, 0.7, 0.1, 0.1], [1.1, 0.0, 0.0, 0.0], 0.1);
        let report = validate(&params);
        assert!(!report.valid);
        assert!(report.violations.iter().any(|v| v.contains("g'1")));
    }

    #[test]
    fn other_violations() {
        let mut params = sample();
        params.g = -0.1;
        assert!(!validate(&params).valid);
        let mut params = sample();
        params.p = 1.0;
        assert!(!validate(&params).valid);
        let mut params = sample();
        params.m = 0;
        assert!(!validate(&params).valid);
        assert!(Model::new(&params).is_err());
    }

    #[test]
    fn pole_in_a_denominator_is_flagged() {
        // [rho_n - 1/2]_1 = [g1 - 1/2]_1 vanishes
        let params = CouplingParams::new(2, 2, 0.3, [0.5, 0.7, 0.1, 0.1], [0.05; 4], 0.1);
        let report = validate(&params);
        assert!(!report.valid);
        assert!(!report.near_poles.is_empty());
    }

    #[test]
    fn genericity_guard_is_a_warning() {
        let params = CouplingParams::new(2, 3, 0.5, [0.3, 0.4, 0.0, 0.0], [0.0; 4], 0.0);
        let report = validate(&params);
        assert!(report.valid);
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn weyl_vector() {
        let w = sample().weyl();
        assert_eq!(w.rho, vec![1.1, 0.6]);
        assert!((w.rho_hat[1] - 0.5 * (0.6 + 0.7 + 0.1)).abs() < 1e-15);
        assert!(w.rho.windows(2).all(|x| x[0] > x[1]));
    }

    #[test]
    fn a_vanishes_without_primes() {
        let params = CouplingParams::new(3, 2, 0.4, [0.6, 0.7, 0.2, -0.3], [0.0; 4], 0.4);
        let model = Model::new(&params).unwrap();
        for lam in Lattice::new(3, 2).unwrap().points() {
            assert_eq!(model.coeff_a(lam).unwrap(), 0.0);
        }
    }

    #[test]
    fn b_at_top_row_vanishes() {
        let model = Model::new(&sample()).unwrap();
        let lam = Partition::new(vec![2, 1]).unwrap();
        assert_eq!(model.coeff_b(&lam, Step::up(0)).unwrap(), 0.0);
        let flat = Partition::new(vec![1, 1]).unwrap();
        assert_eq!(model.coeff_b(&flat, Step::up(1)).unwrap(), 0.0);
        assert!(model.coeff_b(&flat, Step::up(0)).unwrap() > 0.0);
    }

    #[test]
    fn weight_at_zero_is_one() {
        let model = Model::new(&sample()).unwrap();
        let w = model.weight_delta(&Partition::zero(2)).unwrap();
        assert!(w.approx_eq(LogSigned::ONE, 1e-15));
    }

    #[test]
    fn weight_forms_agree() {
        let model = Model::new(&sample()).unwrap();
        for lam in Lattice::new(2, 2).unwrap().points() {
            let a = model.weight_delta(lam).unwrap();
            let b = model.weight_delta_dup(lam).unwrap();
            assert!(a.approx_eq(b, 1e-12), "{lam}: {a} vs {b}");
        }
    }

    #[test]
    fn detailed_balance() {
        let model = Model::new(&sample()).unwrap();
        let lat = Lattice::new(2, 2).unwrap();
        for lam in lat.points() {
            for step in lat.moves(lam) {
                let mu = lam.shifted(step).unwrap();
                let lhs = LogSigned::from_f64(model.coeff_b(lam, step).unwrap()) * model.weight_delta(lam).unwrap();
                let rhs = LogSigned::from_f64(model.coeff_b(&mu, step.reversed()).unwrap())
                    * model.weight_delta(&mu).unwrap();
                assert!(lhs.approx_eq(rhs, 1e-11), "{lam} {step:?}");
            }
        }
    }

    #[test]
    fn json_keys_are_flat() {
        let text = r#"{"n":2,"m":2,"g":0.5,"g1":0.6,"g2":0.7,"g3":0.1,"g4":0.1,
            "gp1":0.05,"gp2":0.05,"gp3":0.05,"gp4":0.05,"p":0.3,"tol":1e-16}"#;
        let params = CouplingParams::from_json(text).unwrap();
        assert_eq!(params, sample());
        assert!(CouplingParams::from_json("{\"n\": 2}").is_err());
    }
}
