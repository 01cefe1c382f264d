//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use elliptic_lattice::checks::{truncation_violations, weight_checks};
use elliptic_lattice::io::{g1_report, m1_report, to_json};
use elliptic_lattice::racah::{chain_from_model, coeff_a_g1, finite_g_limit_a};
use elliptic_lattice::spectral::{
    dual_orthogonality_residual, orthogonality_residuals, projector_amplification, projector_h,
};
use elliptic_lattice::sweep::{p_grid, run_sweep};
use elliptic_lattice::trig::{coeff_a_p0, coeff_b_p0, eigenvalue_p0, norm_product_nq, row_constant};
use elliptic_lattice::{
    build_operator, q_bracket, spectrum, CouplingParams, Lattice, Model, SpectralOptions, ThetaContext,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn samples_2() -> Vec<CouplingParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut out = Vec::new();
    for (n, m) in [(2, 2), (3, 2), (2, 3)] {
        for _ in 0..20 {
            out.push(common::random_params(&mut rng, n, m, 0.9));
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut dup, mut parity, mut prod, mut trig): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let alpha = rng.gen_range(0.1..3.0);
        let p = rng.gen_range(-0.9..0.9);
        let z: f64 = rng.gen_range(-8.0..8.0);
        let ctx = ThetaContext::new(alpha, p).unwrap();
        let b = |x: f64, r: usize| ctx.bracket(x, r).unwrap();
        let lhs = b(2.0 * z, 1);
        let rhs = 2.0 * (1..=4).map(|r| b(z, r)).product::<f64>();
        dup = dup.max(rel(lhs, rhs));
        parity = parity.max(rel(b(-z, 1), -b(z, 1)));
        for r in 1..=4 {
            if r > 1 {
                parity = parity.max(rel(b(-z, r), b(z, r)));
            }
            prod = prod.max(rel(b(z, r), ctx.bracket_product(z, r).unwrap()));
        }
        let ctx0 = ThetaContext::new(alpha, 0.0).unwrap();
        for r in 1..=4 {
            trig = trig.max(rel(ctx0.bracket(z, r).unwrap(), q_bracket(alpha, z, r)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let worst = dup.max(parity).max(prod).max(trig);
    outcome(
        worst <= 1e-12 && secs < 5.0,
        format!("1000 samples: duplication {dup:.1e}, parity {parity:.1e}, product {prod:.1e}, p=0 {trig:.1e}; {secs:.2} s"),
    )
}

fn criterion_2(samples: &[CouplingParams]) -> Outcome {
    let mut bad = 0;
    for params in samples {
        let model = Model::new(params).unwrap();
        let lattice = Lattice::new(params.n, params.m).unwrap();
        bad += truncation_violations(&model, &lattice).unwrap();
    }
    outcome(bad == 0, format!("{} parameter sets, {bad} boundary/interior violations", samples.len()))
}

fn criterion_3(samples: &[CouplingParams]) -> Outcome {
    let (mut negative, mut balance) = (0, 0.0f64);
    for params in samples {
        let model = Model::new(params).unwrap();
        let lattice = Lattice::new(params.n, params.m).unwrap();
        let (neg, bal, _) = weight_checks(&model, &lattice).unwrap();
        negative += neg;
        balance = balance.max(bal);
    }
    outcome(negative == 0 && balance <= 1e-11, format!("{negative} non-positive weights, worst edge defect {balance:.1e}"))
}

fn criterion_4(samples: &[CouplingParams]) -> Outcome {
    let worst = samples.iter().map(|p| build_operator(p).unwrap().symmetrized().1).fold(0.0, f64::max);
    outcome(worst <= 1e-10, format!("worst ||S - S^T||_max / ||S||_max = {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut spec_err, mut rows, mut slowest) = (0.0f64, 0.0f64, 0.0f64);
    for (n, m) in [(2, 2), (3, 2), (2, 3), (4, 2), (3, 3)] {
        for _ in 0..4 {
            let params = common::random_params(&mut rng, n, m, 0.0);
            let start = Instant::now();
            let op = build_operator(&params).unwrap();
            let lattice = op.lattice().clone();
            let mut closed: Vec<f64> = lattice.points().iter().map(|nu| eigenvalue_p0(&params, nu)).collect();
            closed.sort_by(|a, b| b.total_cmp(a));
            let pairs = elliptic_lattice::spectral::diagonalize(&op).unwrap();
            for (a, b) in pairs.values.iter().zip(&closed) {
                spec_err = spec_err.max(rel(*a, *b));
            }
            let c = row_constant(&params);
            for lam in lattice.points() {
                let s = coeff_a_p0(&params, lam).unwrap()
                    + lattice.moves(lam).into_iter().map(|st| coeff_b_p0(&params, &lattice, lam, st)).sum::<f64>();
                rows = rows.max(rel(s, c));
            }
            for s in op.row_sums() {
                rows = rows.max(rel(s, c));
            }
            slowest = slowest.max(start.elapsed().as_secs_f64());
        }
    }
    outcome(
        spec_err <= 1e-10 && rows <= 1e-10 && slowest < 1.0,
        format!("20 instances: spectrum {spec_err:.1e}, row sums {rows:.1e}; slowest {slowest:.3} s"),
    )
}

fn criterion_6(samples: &[CouplingParams]) -> Outcome {
    let opts = SpectralOptions::default();
    let (mut orth, mut diag, mut dual, mut proj, mut norm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut projected, mut gated) = (0, 0);
    let mut failures = Vec::new();
    for params in samples.iter().step_by(3) {
        let (op, result) = match spectrum(params, &opts) {
            Ok(x) => x,
            Err(e) => {
                failures.push(e.to_string());
                continue;
            }
        };
        let (o, d) = orthogonality_residuals(&op, &result);
        orth = orth.max(o);
        diag = diag.max(d);
        dual = dual.max(dual_orthogonality_residual(&op, &result));
        let energies = result.energies();
        for nu in 0..op.dim() {
            if projector_amplification(&energies, nu) > opts.max_amplification {
                gated += 1;
                continue;
            }
            let h = projector_h(&op, &result, nu, &opts).unwrap();
            let diff: Vec<f64> = h.iter().zip(result.h(nu)).map(|(a, b)| a - b).collect();
            proj = proj.max((op.inner(&diff, &diff) / result.norms[nu]).sqrt());
            projected += 1;
        }
        let p0 = params.with_p(0.0);
        let (_, r0) = spectrum(&p0, &opts).unwrap();
        for (nu, ef) in r0.lattice_order.iter().zip(&r0.eigenfunctions) {
            norm = norm.max((ef.values[0] * norm_product_nq(&p0, nu).unwrap() - 1.0).abs());
        }
    }
    outcome(
        failures.is_empty() && orth <= 1e-9 && diag <= 1e-9 && dual <= 1e-9 && proj <= 1e-7 && norm <= 1e-9,
        format!(
            "orthogonality {orth:.1e}, <h,h> = h0 {diag:.1e}, dual {dual:.1e}, projector {proj:.1e} \
             ({projected} labels, {gated} gated), 1/N = h0 {norm:.1e}{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {failures:?}") }
        ),
    )
}

fn criterion_7() -> Outcome {
    let opts = SpectralOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut roots, mut norms, mut chars) = (0.0f64, 0.0f64, 0.0f64);
    for n in 2..=4 {
        for _ in 0..3 {
            let params = common::random_params(&mut rng, n, 1, 0.6);
            let report = m1_report(&params, &opts).unwrap();
            roots = roots.max(report.root_residual);
            for (d, c) in report.norms_direct.iter().zip(&report.norms_closed) {
                norms = norms.max((d - c).abs() / d.abs());
            }
            chars = chars.max(report.characteristic_residual);
        }
    }
    outcome(
        roots <= 1e-10 && norms <= 1e-9 && chars <= 1e-9,
        format!("n = 2..4: roots {roots:.1e}, Christoffel-Darboux norms {norms:.1e}, characteristic {chars:.1e}"),
    )
}

fn criterion_8() -> Outcome {
    let opts = SpectralOptions::default();
    let (mut spec_err, mut eig, mut norms, mut vdm, mut limit) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let cases = [
        CouplingParams::g1_branch(2, 2, [0.6, 0.7, 0.1, 0.2], [0.05, 0.1, -0.05, 0.02], 0.25),
        CouplingParams::g1_branch(2, 3, [0.45, 0.8, 0.3, 0.1], [0.1, -0.05, 0.0, 0.05], -0.3),
        CouplingParams::g1_branch(3, 2, [0.7, 0.55, 0.2, 0.2], [0.0, 0.15, 0.1, -0.05], 0.4),
    ];
    for params in &cases {
        let report = g1_report(params, &opts).unwrap();
        spec_err = spec_err.max(report.spectrum_residual);
        eig = eig.max(report.eigen_residual);
        for s in &report.eigenfunctions {
            norms = norms.max((s.norm_direct - s.norm_closed).abs() / s.norm_direct.abs());
            vdm = vdm.max(rel(s.a0, s.a0_vandermonde));
        }
        let model = Model::new(params).unwrap();
        let chain = chain_from_model(&model).unwrap();
        for lam in Lattice::new(params.n, params.m).unwrap().points() {
            let a = finite_g_limit_a(params, lam, 1e-5).unwrap();
            limit = limit.max(rel(a, coeff_a_g1(&chain, lam)));
        }
    }
    outcome(
        spec_err <= 1e-8 && eig <= 1e-8 && norms <= 1e-8 && vdm <= 1e-9 && limit <= 1e-5,
        format!(
            "spectrum {spec_err:.1e}, Schur residual {eig:.1e}, Cauchy-Binet norms {norms:.1e}, \
             Vandermonde {vdm:.1e}, finite-g limit {limit:.1e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let base = common::sample();
    let points: Vec<_> = p_grid(0.0, 0.6, 0.05).into_iter().map(|p| base.with_p(p)).collect();
    let table = run_sweep(points.clone(), &SpectralOptions::default());
    let mut overlap = f64::INFINITY;
    let mut permuted = 0;
    let mut steps = 0;
    let mut failures = table.failures();
    match spectrum(&base.with_p(0.6), &SpectralOptions::default()) {
        Ok((_, result)) => {
            for s in &result.diagnostics.path {
                overlap = overlap.min(s.min_overlap);
                permuted += usize::from(!s.order_preserved);
                steps += 1;
            }
        }
        Err(_) => failures += 1,
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && overlap >= 0.9 && permuted == 0 && secs < 30.0,
        format!(
            "p = 0 -> 0.6: {steps} steps, min overlap {overlap:.4}, {permuted} permuted steps, \
             {failures} failures, max jump {:.3}; {secs:.2} s",
            table.max_jump
        ),
    )
}

fn criterion_10() -> Outcome {
    let opts = SpectralOptions::default();
    let once = || to_json(&spectrum(&common::sample(), &opts).unwrap().1).unwrap();
    let a = once();
    let b = once();
    let base = common::sample();
    let sweep = || {
        let pts: Vec<_> = p_grid(0.0, 0.3, 0.1).into_iter().map(|p| base.with_p(p)).collect();
        to_json(&run_sweep(pts, &opts)).unwrap()
    };
    let (s1, s2) = (sweep(), sweep());
    outcome(a == b && s1 == s2, format!("spectrum JSON {} bytes, sweep JSON {} bytes, identical: {}", a.len(), s1.len(), a == b && s1 == s2))
}

fn main() -> ExitCode {
    let samples = samples_2();
    let results = [
        ("theta identities", criterion_1()),
        ("truncation", criterion_2(&samples)),
        ("positivity and detailed balance", criterion_3(&samples)),
        ("self-adjointness", criterion_4(&samples)),
        ("trigonometric limit", criterion_5()),
        ("eigenbasis", criterion_6(&samples)),
        ("m = 1 oracle", criterion_7()),
        ("g = 1 oracle", criterion_8()),
        ("continuation robustness", criterion_9()),
        ("determinism", criterion_10()),
    ];
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.passed;
        println!("criterion {:>2} [{}] {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
