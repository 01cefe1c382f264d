//! Invariant suite run by `verify`: every module's properties at one parameter
//! point plus a seeded random neighborhood.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Partition};
use crate::logsigned::LogSigned;
use crate::m1::{coeffs_m1, norms_m1};
use crate::model::{validate, Branch, CouplingParams, Model};
use crate::racah::{chain_from_model, coeff_a_g1, finite_g_limit_a, schur_eigenfunction};
use crate::spectral::{
    build_operator, diagonalize, dual_orthogonality_residual, eigen_residual, orthogonality_residuals, projector_h,
    spectrum, SpectralOptions,
};
use crate::theta::ThetaContext;
use crate::trig::{coeff_a_p0, coeff_b_p0, eigenvalue_p0, norm_product_nq, row_constant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail: None,
        });
    }

    fn fail(&mut self, name: impl Into<String>, err: &Error) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            tolerance: 0.0,
            detail: Some(err.to_string()),
        });
    }

    fn skip(&mut self, name: impl Into<String>, why: impl Into<String>) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed: true,
            measured: 0.0,
            tolerance: 0.0,
            detail: Some(format!("skipped: {}", why.into())),
        });
    }

    fn record(&mut self, name: &str, outcome: Result<(f64, f64)>) {
        match outcome {
            Ok((measured, tol)) => self.push(name, measured, tol),
            Err(e) => self.fail(name, &e),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Worst duplication/parity defect over random arguments at the given context.
pub fn theta_identities(ctx: &ThetaContext, rng: &mut ChaCha8Rng, samples: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z: f64 = rng.gen_range(-6.0..6.0);
        let lhs = ctx.bracket(2.0 * z, 1)?;
        let rhs = 2.0 * (1..=4).map(|r| ctx.br(z, r)).product::<f64>();
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        worst = worst.max((lhs - rhs).abs() / scale);
        worst = worst.max((ctx.br(-z, 1) + ctx.br(z, 1)).abs() / ctx.br(z, 1).abs().max(1.0));
        for r in 2..=4 {
            worst = worst.max(rel(ctx.br(-z, r), ctx.br(z, r)));
        }
    }
    Ok(worst)
}

/// Boundary zeros and interior positivity of `B`; returns the number of violations.
pub fn truncation_violations(model: &Model, lattice: &Lattice) -> Result<usize> {
    let mut bad = 0;
    for lam in lattice.points() {
        for step in lattice.all_steps() {
            let b = model.coeff_b(lam, step)?;
            let ok = if lattice.admissible(lam, step) { b > 0.0 } else { b == 0.0 };
            bad += usize::from(!ok);
        }
    }
    Ok(bad)
}

/// Weight positivity count, worst detailed-balance defect and worst form mismatch.
pub fn weight_checks(model: &Model, lattice: &Lattice) -> Result<(usize, f64, f64)> {
    let mut negative = 0;
    let mut balance: f64 = 0.0;
    let mut forms: f64 = 0.0;
    let weights = lattice.points().iter().map(|l| model.weight_delta(l)).collect::<Result<Vec<_>>>()?;
    for (i, lam) in lattice.points().iter().enumerate() {
        negative += usize::from(!weights[i].is_positive());
        let dup = model.weight_delta_dup(lam)?;
        forms = forms.max(log_rel(weights[i], dup));
        for step in lattice.moves(lam) {
            let mu = lam.shifted(step).expect("admissible");
            let k = lattice.rank(&mu).expect("in lattice");
            let lhs = LogSigned::from_f64(model.coeff_b(lam, step)?) * weights[i];
            let rhs = LogSigned::from_f64(model.coeff_b(&mu, step.reversed())?) * weights[k];
            balance = balance.max(log_rel(lhs, rhs));
        }
    }
    Ok((negative, balance, forms))
}

fn log_rel(a: LogSigned, b: LogSigned) -> f64 {
    if a.sign != b.sign {
        return f64::INFINITY;
    }
    if a.is_zero() {
        return 0.0;
    }
    -(-(a.logmag - b.logmag).abs()).exp_m1()
}

/// Runs the whole suite. Invalid parameters are an error, not a failed check.
pub fn run_suite(params: &CouplingParams, opts: &SpectralOptions, seed: u64) -> Result<VerifyReport> {
    validate(params).into_result()?;
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    point_checks(params, opts, &mut rng, &mut report, "")?;

    for i in 0..3 {
        let mut q = params.clone();
        let jiggle = |x: f64, rng: &mut ChaCha8Rng| x * (1.0 + rng.gen_range(-0.01..0.01));
        q.g1 = jiggle(q.g1, &mut rng);
        q.g2 = jiggle(q.g2, &mut rng);
        q.g3 = jiggle(q.g3, &mut rng);
        q.gp1 = jiggle(q.gp1, &mut rng);
        if q.branch == Branch::Generic {
            q.g = jiggle(q.g, &mut rng);
        }
        if !validate(&q).valid {
            report.skip(format!("neighbor{i}"), "perturbed point is invalid");
            continue;
        }
        let model = Model::new(&q)?;
        let lattice = Lattice::new(q.n, q.m)?;
        report.record(
            &format!("neighbor{i}.truncation"),
            truncation_violations(&model, &lattice).map(|b| (b as f64, 0.0)),
        );
        report.record(&format!("neighbor{i}.detailed_balance"), weight_checks(&model, &lattice).map(|w| (w.1, 1e-11)));
        report.record(&format!("neighbor{i}.self_adjoint"), build_operator(&q).map(|op| (op.symmetrized().1, 1e-10)));
    }
    Ok(report)
}

fn point_checks(
    params: &CouplingParams,
    opts: &SpectralOptions,
    rng: &mut ChaCha8Rng,
    report: &mut VerifyReport,
    prefix: &str,
) -> Result<()> {
    let name = |s: &str| format!("{prefix}{s}");
    let model = Model::new(params)?;
    let lattice = Lattice::new(params.n, params.m)?;

    report.record(&name("theta.duplication_parity"), theta_identities(model.ctx(), rng, 200).map(|w| (w, 1e-12)));
    report.record(&name("model.truncation"), truncation_violations(&model, &lattice).map(|b| (b as f64, 0.0)));
    match weight_checks(&model, &lattice) {
        Ok((neg, bal, forms)) => {
            report.push(name("model.weight_positivity"), neg as f64, 0.0);
            report.push(name("model.detailed_balance"), bal, 1e-11);
            report.push(name("model.weight_forms"), forms, 1e-12);
        }
        Err(e) => report.fail(name("model.weights"), &e),
    }

    match spectrum(params, opts) {
        Ok((op, result)) => {
            report.push(name("spectral.self_adjoint"), result.diagnostics.sym_residual, 1e-10);
            let tr: f64 = result.energies().iter().sum();
            report.push(name("spectral.trace"), rel(tr, op.matrix().trace()).min((tr - op.matrix().trace()).abs()), 1e-10);
            report.push(name("spectral.eigen_residual"), eigen_residual(&op, &result), 1e-9);
            let (off, diag) = orthogonality_residuals(&op, &result);
            report.push(name("spectral.orthogonality"), off, 1e-9);
            report.push(name("spectral.norm_equals_h0"), diag, 1e-10);
            report.push(name("spectral.dual_orthogonality"), dual_orthogonality_residual(&op, &result), 1e-9);
            let mut worst: f64 = 0.0;
            let mut skipped = 0;
            for nu in 0..op.dim() {
                match projector_h(&op, &result, nu, opts) {
                    Ok(h) => {
                        let d: Vec<f64> = h.iter().zip(result.h(nu)).map(|(a, b)| a - b).collect();
                        worst = worst.max((op.inner(&d, &d) / result.norms[nu]).sqrt());
                    }
                    Err(Error::Conditioning { .. }) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
            report.push(name("spectral.projector_route"), worst, 1e-7);
            if skipped > 0 {
                report.skip(name("spectral.projector_conditioning"), format!("{skipped} labels above the amplification limit"));
            }
        }
        Err(e) => report.fail(name("spectral.pipeline"), &e),
    }

    let p0 = params.with_p(0.0);
    report.record(&name("trig.spectrum"), trig_spectrum_defect(&p0));
    if params.branch == Branch::Generic {
        report.record(&name("trig.row_sum"), row_sum_defect(&p0));
        report.record(&name("trig.norm_product"), trig_norm_defect(&p0, opts));
    }

    if params.m == 1 && params.branch == Branch::Generic {
        report.record(&name("m1.oracle"), m1_defect(params));
    }
    if params.branch == Branch::G1 {
        report.record(&name("g1.oracle"), g1_defect(params));
    }
    Ok(())
}

/// Sorted numeric spectrum at p = 0 against the closed formula.
pub fn trig_spectrum_defect(p0: &CouplingParams) -> Result<(f64, f64)> {
    let op = build_operator(p0)?;
    let pairs = diagonalize(&op)?;
    let mut closed: Vec<f64> = op.lattice().points().iter().map(|nu| eigenvalue_p0(p0, nu)).collect();
    closed.sort_by(|a, b| b.total_cmp(a));
    let worst = pairs.values.iter().zip(&closed).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max);
    Ok((worst, 1e-10))
}

pub fn row_sum_defect(p0: &CouplingParams) -> Result<(f64, f64)> {
    let lattice = Lattice::new(p0.n, p0.m)?;
    let c = row_constant(p0);
    let mut worst: f64 = 0.0;
    for lam in lattice.points() {
        let s = coeff_a_p0(p0, lam)? + lattice.moves(lam).into_iter().map(|st| coeff_b_p0(p0, &lattice, lam, st)).sum::<f64>();
        worst = worst.max((s - c).abs() / c.abs().max(1.0));
    }
    let op = build_operator(p0)?;
    for s in op.row_sums() {
        worst = worst.max((s - c).abs() / c.abs().max(1.0));
    }
    Ok((worst, 1e-10))
}

/// `h_0 N_q = 1` at p = 0.
pub fn trig_norm_defect(p0: &CouplingParams, opts: &SpectralOptions) -> Result<(f64, f64)> {
    let (_, result) = spectrum(p0, opts)?;
    let mut worst: f64 = 0.0;
    for (nu, ef) in result.lattice_order.iter().zip(&result.eigenfunctions) {
        let nq = norm_product_nq(p0, nu)?;
        worst = worst.max((ef.values[0] * nq - 1.0).abs());
    }
    Ok((worst, 1e-9))
}

pub fn m1_defect(params: &CouplingParams) -> Result<(f64, f64)> {
    let tri = coeffs_m1(params)?;
    let (_, result) = spectrum(params, &SpectralOptions::default())?;
    let mut worst = tri.form_discrepancy;
    let energies = result.energies();
    for (l, root) in tri.roots.iter().enumerate() {
        // column (1^l) has rank l in the graded order
        worst = worst.max((root - energies[l]).abs() / root.abs().max(1.0));
        let (direct, closed) = norms_m1(&tri, l);
        worst = worst.max(rel(direct, closed));
    }
    Ok((worst, 1e-9))
}

pub fn g1_defect(params: &CouplingParams) -> Result<(f64, f64)> {
    let model = Model::new(params)?;
    let chain = chain_from_model(&model)?;
    let lattice = Lattice::new(params.n, params.m)?;
    let (op, result) = spectrum(params, &SpectralOptions::default())?;
    let mut worst: f64 = 0.0;
    let mut additive: Vec<f64> = lattice.points().iter().map(|nu| chain.eigenvalue(nu)).collect();
    additive.sort_by(|a, b| b.total_cmp(a));
    let mut numeric = result.energies();
    numeric.sort_by(|a, b| b.total_cmp(a));
    for (a, b) in additive.iter().zip(&numeric) {
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    for nu in lattice.points() {
        let s = schur_eigenfunction(&model, &chain, &lattice, nu)?;
        worst = worst.max(rel(s.a0, s.a0_vandermonde));
        worst = worst.max(rel(s.norm_direct, s.norm_closed));
        let hs = op.apply(&s.h);
        let r: Vec<f64> = hs.iter().zip(&s.h).map(|(a, b)| a - s.energy * b).collect();
        worst = worst.max((op.inner(&r, &r) / op.inner(&s.h, &s.h)).sqrt() / s.energy.abs().max(1.0));
    }
    let zero = Partition::zero(params.n);
    let limit = finite_g_limit_a(params, &zero, 1e-5)?;
    let closed = coeff_a_g1(&chain, &zero);
    worst = worst.max((limit - closed).abs() / closed.abs().max(1.0) * 1e-3);
    Ok((worst, 1e-8))
}
