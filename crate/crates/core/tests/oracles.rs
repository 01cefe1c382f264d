//! Comparison with values frozen from an independent mpmath implementation
//! (`tests/oracles/generate.py`).

use elliptic_lattice::{spectrum, CouplingParams, Lattice, Model, Partition, SpectralOptions, Step, ThetaContext};
use serde::Deserialize;

#[derive(Deserialize)]
struct Oracles {
    brackets: Vec<BracketValue>,
    cases: Vec<Case>,
}

#[derive(Deserialize)]
struct BracketValue {
    alpha: f64,
    p: f64,
    z: f64,
    r: usize,
    value: f64,
}

#[derive(Deserialize)]
struct BValue {
    lambda: Vec<u32>,
    part: usize,
    raise: bool,
    #[serde(rename = "B")]
    b: f64,
}

#[derive(Deserialize)]
struct Case {
    params: CouplingParams,
    lattice: Vec<Vec<u32>>,
    c: [f64; 4],
    #[serde(rename = "A")]
    a: Vec<f64>,
    #[serde(rename = "B")]
    b: Vec<BValue>,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    h0: Vec<f64>,
}

fn oracles() -> Oracles {
    serde_json::from_str(include_str!("oracles/values.json")).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn brackets_match_jtheta() {
    for v in oracles().brackets {
        let ctx = ThetaContext::new(v.alpha, v.p).unwrap();
        let got = ctx.bracket(v.z, v.r).unwrap();
        assert!(close(got, v.value, 1e-12), "alpha={} p={} z={} r={}: {got} vs {}", v.alpha, v.p, v.z, v.r, v.value);
    }
}

#[test]
fn coefficients_and_weights() {
    for case in oracles().cases {
        let model = Model::new(&case.params).unwrap();
        let lattice = Lattice::new(case.params.n, case.params.m).unwrap();
        let order: Vec<Vec<u32>> = lattice.points().iter().map(|p| p.parts().to_vec()).collect();
        assert_eq!(order, case.lattice);
        for (got, want) in model.c_r().unwrap().iter().zip(case.c) {
            assert!(close(*got, want, 1e-11), "c_r {got} vs {want}");
        }
        for (i, lam) in lattice.points().iter().enumerate() {
            assert!(close(model.coeff_a(lam).unwrap(), case.a[i], 1e-11), "A at {lam}");
            let w = model.weight_delta(lam).unwrap().to_f64();
            assert!((w - case.weights[i]).abs() <= 1e-11 * w.abs(), "weight at {lam}: {w} vs {}", case.weights[i]);
        }
        for bv in &case.b {
            let lam = Partition::new(bv.lambda.clone()).unwrap();
            let step = if bv.raise { Step::up(bv.part) } else { Step::down(bv.part) };
            let got = model.coeff_b(&lam, step).unwrap();
            let in_lattice = lam.shifted(step).map_or(false, |mu| lattice.contains(&mu));
            if !in_lattice {
                assert_eq!(got, 0.0, "B off the lattice at {lam} {step:?}");
                assert!(bv.b.abs() < 1e-12, "oracle B off the lattice at {lam} {step:?}: {}", bv.b);
            } else {
                assert!((got - bv.b).abs() <= 1e-11 * bv.b.abs(), "B at {lam} {step:?}: {got} vs {}", bv.b);
            }
        }
    }
}

#[test]
fn spectrum_and_ground_values() {
    for case in oracles().cases {
        let (_, result) = spectrum(&case.params, &SpectralOptions::default()).unwrap();
        let mut pairs: Vec<(f64, f64)> =
            result.eigenvalues.iter().zip(&result.eigenfunctions).map(|(e, f)| (e.e, f.values[0])).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        for ((e, h0), (we, wh)) in pairs.iter().zip(case.eigenvalues.iter().zip(&case.h0)) {
            assert!(close(*e, *we, 1e-10), "{e} vs {we}");
            assert!((h0 - wh).abs() < 1e-9, "{h0} vs {wh}");
        }
    }
}
