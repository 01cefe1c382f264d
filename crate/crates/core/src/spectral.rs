//! Matrix of `H` on the lattice, its diagonalization in the weighted space,
//! labeling of eigenvalues by continuation from p = 0, and the eigenbasis `h^(nu)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Partition};
use crate::linalg::{dot, jacobi_eigen, Matrix};
use crate::logsigned::LogSigned;
use crate::model::{Branch, CouplingParams, Model, OperatorCoefficients};
use crate::racah;
use crate::trig::eigenvalue_p0;

/// Tolerances of the spectral pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Minimum eigenvalue gap relative to the spectral width.
    pub gap_rel: f64,
    /// Minimum eigenvector overlap accepted between consecutive homotopy steps.
    pub overlap_min: f64,
    pub initial_step: f64,
    pub min_step: f64,
    /// Largest tolerated amplification of the projector product.
    pub max_amplification: f64,
    /// `|f_0|` below this marks the zero locus of `h_0`.
    pub zero_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            gap_rel: 1e-8,
            overlap_min: 0.9,
            initial_step: 0.05,
            min_step: 1e-4,
            max_amplification: 1e8,
            zero_tol: 1e-12,
        }
    }
}

/// `H` as a dense matrix over the lattice in rank order, with its weights.
#[derive(Clone, Debug)]
pub struct LatticeOperator {
    params: CouplingParams,
    lattice: Lattice,
    coeffs: OperatorCoefficients,
    matrix: Matrix,
}

/// Assembles `H` with the coefficient formulas selected by `params.branch`.
pub fn build_operator(params: &CouplingParams) -> Result<LatticeOperator> {
    let model = Model::new(params)?;
    let lattice = Lattice::new(params.n, params.m)?;
    build_with(&model, lattice)
}

pub(crate) fn build_with(model: &Model, lattice: Lattice) -> Result<LatticeOperator> {
    let coeffs = match model.params().branch {
        Branch::Generic => model.coefficients(&lattice)?,
        Branch::G1 => racah::operator_coefficients(model, &lattice)?,
    };
    let dim = lattice.len();
    let mut matrix = Matrix::zeros(dim);
    for (i, lam) in lattice.points().iter().enumerate() {
        matrix[(i, i)] = coeffs.a[i];
        for step in lattice.moves(lam) {
            let mu = lam.shifted(step).expect("admissible move");
            let k = lattice.rank(&mu).expect("admissible move stays in the lattice");
            matrix[(i, k)] = coeffs.b(i, step);
        }
    }
    Ok(LatticeOperator { params: model.params().clone(), lattice, coeffs, matrix })
}

impl LatticeOperator {
    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn coefficients(&self) -> &OperatorCoefficients {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.lattice.len()
    }

    pub fn weights(&self) -> &[LogSigned] {
        &self.coeffs.weights
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.coeffs.weights.iter().map(|w| w.to_f64()).collect()
    }

    /// `(H f)_lambda`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(f)
    }

    /// `<f, g>_Delta`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.coeffs.weights.iter().zip(f.iter().zip(g)).map(|(w, (a, b))| w.to_f64() * a * b).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.row(i).iter().sum()).collect()
    }

    /// `S = D^{1/2} H D^{-1/2}` and the asymmetry `max|S - S^T| / max|S|`.
    pub fn symmetrized(&self) -> (Matrix, f64) {
        let dim = self.dim();
        let half: Vec<f64> = self.coeffs.weights.iter().map(|w| 0.5 * w.logmag).collect();
        let mut s = Matrix::zeros(dim);
        for i in 0..dim {
            for k in 0..dim {
                let h = self.matrix[(i, k)];
                if h != 0.0 {
                    s[(i, k)] = h * (half[i] - half[k]).exp();
                }
            }
        }
        let mut asym: f64 = 0.0;
        for i in 0..dim {
            for k in i + 1..dim {
                asym = asym.max((s[(i, k)] - s[(k, i)]).abs());
            }
        }
        let scale = s.max_abs();
        let residual = if scale > 0.0 { asym / scale } else { 0.0 };
        (s, residual)
    }

    fn sqrt_weights(&self) -> Vec<f64> {
        self.coeffs.weights.iter().map(|w| (0.5 * w.logmag).exp()).collect()
    }
}

/// Unlabeled eigenpairs; `vectors` are orthonormal columns of the symmetrized matrix,
/// in decreasing eigenvalue order.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sym_residual: f64,
}

impl Eigenpairs {
    pub fn width(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => a - b,
            _ => 0.0,
        }
    }

    /// Smallest gap between consecutive eigenvalues and the column pair attaining it.
    pub fn min_gap(&self) -> (f64, usize, usize) {
        self.values
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[0] - w[1], i, i + 1))
            .fold((f64::INFINITY, 0, 0), |best, x| if x.0 < best.0 { x } else { best })
    }
}

pub fn diagonalize(op: &LatticeOperator) -> Result<Eigenpairs> {
    let (s, sym_residual) = op.symmetrized();
    let mut sym = s.clone();
    let t = s.transpose();
    for i in 0..s.dim() {
        for k in 0..s.dim() {
            sym[(i, k)] = 0.5 * (s[(i, k)] + t[(i, k)]);
        }
    }
    let eig = jacobi_eigen(&sym)?;
    Ok(Eigenpairs { values: eig.values, vectors: eig.vectors, sym_residual })
}

/// One accepted step of the p-homotopy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub p: f64,
    pub step: f64,
    pub min_overlap: f64,
    pub min_gap: f64,
    /// Whether the labels, read in decreasing eigenvalue order, are the same as at p = 0.
    pub order_preserved: bool,
}

/// Column index -> lattice rank of its label.
#[derive(Clone, Debug, PartialEq)]
pub struct Labeling {
    pub label_of: Vec<usize>,
    pub path: Vec<PathStep>,
}

impl Labeling {
    pub fn order_preserved(&self) -> bool {
        self.path.iter().all(|s| s.order_preserved)
    }

    pub fn min_overlap(&self) -> f64 {
        self.path.iter().map(|s| s.min_overlap).fold(1.0, f64::min)
    }
}

fn check_gap(pairs: &Eigenpairs, opts: &SpectralOptions, p: f64, label_of: Option<&[usize]>, lattice: &Lattice) -> Result<f64> {
    let (gap, i, k) = pairs.min_gap();
    let tol = opts.gap_rel * pairs.width().max(f64::MIN_POSITIVE);
    if pairs.values.len() > 1 && gap < tol {
        let name = |c: usize| match label_of {
            Some(l) => lattice.points()[l[c]].to_string(),
            None => format!("#{c}"),
        };
        return Err(Error::Labeling {
            p,
            detail: format!("unresolved cluster: {} and {} are {gap:.3e} apart (gate {tol:.3e})", name(i), name(k)),
        });
    }
    Ok(gap)
}

/// Labels at p = 0 from the closed eigenvalue formula.
fn label_at_p0(params: &CouplingParams, lattice: &Lattice, pairs: &Eigenpairs, opts: &SpectralOptions) -> Result<Vec<usize>> {
    let closed: Vec<f64> = lattice.points().iter().map(|nu| eigenvalue_p0(params, nu)).collect();
    let mut order: Vec<usize> = (0..closed.len()).collect();
    order.sort_by(|&a, &b| closed[b].total_cmp(&closed[a]));
    let width = (closed[order[0]] - closed[order[order.len() - 1]]).abs().max(f64::MIN_POSITIVE);
    for w in order.windows(2) {
        let gap = closed[w[0]] - closed[w[1]];
        if gap < opts.gap_rel * width {
            return Err(Error::Labeling {
                p: 0.0,
                detail: format!(
                    "unresolved cluster: closed-form eigenvalues of {} and {} coincide",
                    lattice.points()[w[0]],
                    lattice.points()[w[1]]
                ),
            });
        }
    }
    for (col, &rank) in order.iter().enumerate() {
        let diff = (pairs.values[col] - closed[rank]).abs();
        if diff > 1e-6 * width.max(1.0) {
            return Err(Error::Labeling {
                p: 0.0,
                detail: format!("numeric eigenvalue {} does not match the closed form {}", pairs.values[col], closed[rank]),
            });
        }
    }
    Ok(order)
}

fn overlaps(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.dim();
    let mut o = Matrix::zeros(n);
    let cols_a: Vec<Vec<f64>> = (0..n).map(|k| a.column(k)).collect();
    let cols_b: Vec<Vec<f64>> = (0..n).map(|k| b.column(k)).collect();
    for k in 0..n {
        for l in 0..n {
            o[(k, l)] = dot(&cols_a[k], &cols_b[l]).abs();
        }
    }
    o
}

/// Labels `pairs` (computed at `op`'s nome) by continuation from p = 0.
pub fn label_eigenvalues(op: &LatticeOperator, pairs: &Eigenpairs, opts: &SpectralOptions) -> Result<Labeling> {
    let params = op.params();
    let target = params.p;
    let lattice = op.lattice();
    let model = Model::new(params)?;

    let start_pairs = if target == 0.0 {
        pairs.clone()
    } else {
        diagonalize(&build_with(&model.at_p(0.0)?, lattice.clone())?)?
    };
    let p0_labels = label_at_p0(params, lattice, &start_pairs, opts)?;
    check_gap(&start_pairs, opts, 0.0, Some(&p0_labels), lattice)?;
    let mut labels = p0_labels.clone();
    let mut current = start_pairs.vectors;
    let mut p = 0.0;
    let mut path = Vec::new();
    let mut h = opts.initial_step;
    let dir = target.signum();

    while p != target {
        let remaining = (target - p).abs();
        let step = h.min(remaining);
        let p_new = if step == remaining { target } else { p + dir * step };
        let next = if p_new == target {
            pairs.clone()
        } else {
            diagonalize(&build_with(&model.at_p(p_new)?, lattice.clone())?)?
        };
        let o = overlaps(&current, &next.vectors);
        let n = o.dim();
        let mut new_labels = vec![usize::MAX; n];
        let mut min_overlap = f64::INFINITY;
        let mut ok = true;
        for k in 0..n {
            let (best, val) = (0..n).map(|l| (l, o[(k, l)])).fold((0, -1.0), |b, x| if x.1 > b.1 { x } else { b });
            min_overlap = min_overlap.min(val);
            if val < opts.overlap_min || new_labels[best] != usize::MAX {
                ok = false;
                break;
            }
            new_labels[best] = labels[k];
        }
        if !ok {
            h *= 0.5;
            if h < opts.min_step {
                return Err(Error::Labeling {
                    p: p_new,
                    detail: format!("eigenvector overlap fell below {} even at step {:.1e}", opts.overlap_min, 2.0 * h),
                });
            }
            continue;
        }
        let gap = check_gap(&next, opts, p_new, Some(&new_labels), lattice)?;
        path.push(PathStep { p: p_new, step, min_overlap, min_gap: gap, order_preserved: new_labels == p0_labels });
        labels = new_labels;
        current = next.vectors;
        p = p_new;
        h = (2.0 * h).min(opts.initial_step);
    }
    Ok(Labeling { label_of: labels, path })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledEigenvalue {
    pub nu: Partition,
    #[serde(rename = "E")]
    pub e: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub nu: Partition,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sym_residual: f64,
    pub min_gap: f64,
    pub path: Vec<PathStep>,
    /// Labels whose `h_0` vanishes numerically; their vectors are left unit-normalized.
    pub zero_locus: Vec<Partition>,
    pub warnings: Vec<String>,
}

/// Labeled spectrum and eigenbasis; every list is indexed by the lattice rank of `nu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub params: CouplingParams,
    pub lattice_order: Vec<Partition>,
    pub eigenvalues: Vec<LabeledEigenvalue>,
    pub eigenfunctions: Vec<Eigenfunction>,
    pub norms: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl SpectralResult {
    pub fn energies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.e).collect()
    }

    pub fn h(&self, rank: usize) -> &[f64] {
        &self.eigenfunctions[rank].values
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("spectral result: {e}")))
    }
}

/// `h^(nu) = f_0 f^(nu)` with `f` the Delta-orthonormal eigenvectors, sign fixed by `f_0 > 0`.
pub fn eigenbasis_h(op: &LatticeOperator, pairs: &Eigenpairs, labeling: &Labeling, opts: &SpectralOptions) -> SpectralResult {
    let dim = op.dim();
    let sqrt_w = op.sqrt_weights();
    let points = op.lattice().points();
    let mut energies = vec![0.0; dim];
    let mut vectors = vec![Vec::new(); dim];
    let mut zero_locus = Vec::new();
    let mut warnings = Vec::new();
    for col in 0..dim {
        let rank = labeling.label_of[col];
        let v = pairs.vectors.column(col);
        let mut f: Vec<f64> = v.iter().zip(&sqrt_w).map(|(x, s)| x / s).collect();
        if f[0] < 0.0 {
            f.iter_mut().for_each(|x| *x = -*x);
        }
        energies[rank] = pairs.values[col];
        if f[0].abs() < opts.zero_tol {
            zero_locus.push(points[rank].clone());
            warnings.push(format!("h_0 vanishes for nu = {}; vector left unit-normalized", points[rank]));
            vectors[rank] = f;
        } else {
            let f0 = f[0];
            vectors[rank] = f.into_iter().map(|x| f0 * x).collect();
        }
    }
    let norms = vectors.iter().map(|h| op.inner(h, h)).collect();
    let (min_gap, _, _) = pairs.min_gap();
    SpectralResult {
        params: op.params().clone(),
        lattice_order: points.to_vec(),
        eigenvalues: points.iter().zip(&energies).map(|(nu, &e)| LabeledEigenvalue { nu: nu.clone(), e }).collect(),
        eigenfunctions: points.iter().zip(vectors).map(|(nu, values)| Eigenfunction { nu: nu.clone(), values }).collect(),
        norms,
        diagnostics: Diagnostics {
            sym_residual: pairs.sym_residual,
            min_gap: if dim > 1 { min_gap } else { 0.0 },
            path: labeling.path.clone(),
            zero_locus,
            warnings,
        },
    }
}

/// The full pipeline: build, diagonalize, label, normalize.
pub fn spectrum(params: &CouplingParams, opts: &SpectralOptions) -> Result<(LatticeOperator, SpectralResult)> {
    let op = build_operator(params)?;
    let pairs = diagonalize(&op)?;
    let labeling = label_eigenvalues(&op, &pairs, opts)?;
    let result = eigenbasis_h(&op, &pairs, &labeling, opts);
    Ok((op, result))
}

/// Applies `prod_{mu != nu} (H - E_mu)/(E_nu - E_mu)` to `x`.
pub fn apply_projector(op: &LatticeOperator, energies: &[f64], nu: usize, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    for (mu, &e_mu) in energies.iter().enumerate() {
        if mu == nu {
            continue;
        }
        let denom = energies[nu] - e_mu;
        let hy = op.apply(&y);
        y = hy.iter().zip(&y).map(|(a, b)| (a - e_mu * b) / denom).collect();
    }
    y
}

/// Worst-case growth of the projector product: `prod_mu max_E |E - E_mu| / |E_nu - E_mu|`.
pub fn projector_amplification(energies: &[f64], nu: usize) -> f64 {
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    energies
        .iter()
        .enumerate()
        .filter(|&(mu, _)| mu != nu)
        .map(|(_, &e)| (hi - e).abs().max((lo - e).abs()) / (energies[nu] - e).abs())
        .product()
}

/// `h^(nu)` by the spectral projector applied to the delta function at the zero partition.
pub fn projector_h(op: &LatticeOperator, result: &SpectralResult, nu: usize, opts: &SpectralOptions) -> Result<Vec<f64>> {
    let energies = result.energies();
    if nu >= energies.len() {
        return Err(Error::Domain(format!("label rank {nu} out of range")));
    }
    let amplification = projector_amplification(&energies, nu);
    if !(amplification <= opts.max_amplification) {
        return Err(Error::Conditioning { amplification, limit: opts.max_amplification });
    }
    let mut chi = vec![0.0; op.dim()];
    chi[0] = 1.0;
    Ok(apply_projector(op, &energies, nu, &chi))
}

/// `max_nu ||H h - E h||_Delta / ||h||_Delta`.
pub fn eigen_residual(op: &LatticeOperator, result: &SpectralResult) -> f64 {
    let mut worst: f64 = 0.0;
    for (ev, ef) in result.eigenvalues.iter().zip(&result.eigenfunctions) {
        let h = &ef.values;
        let r: Vec<f64> = op.apply(h).iter().zip(h).map(|(a, b)| a - ev.e * b).collect();
        let scale = op.inner(h, h).sqrt() * ev.e.abs().max(1.0);
        worst = worst.max(op.inner(&r, &r).sqrt() / scale);
    }
    worst
}

/// Largest normalized off-diagonal inner product and largest relative deviation of
/// `<h, h>_Delta` from `h_0`.
pub fn orthogonality_residuals(op: &LatticeOperator, result: &SpectralResult) -> (f64, f64) {
    let hs: Vec<&[f64]> = result.eigenfunctions.iter().map(|e| e.values.as_slice()).collect();
    let norms: Vec<f64> = hs.iter().map(|h| op.inner(h, h)).collect();
    let mut off: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for a in 0..hs.len() {
        if !result.diagnostics.zero_locus.contains(&result.lattice_order[a]) {
            diag = diag.max((norms[a] - hs[a][0]).abs() / norms[a]);
        }
        for b in a + 1..hs.len() {
            off = off.max(op.inner(hs[a], hs[b]).abs() / (norms[a] * norms[b]).sqrt());
        }
    }
    (off, diag)
}

/// `max_{lambda,mu} |sqrt(D_l D_m) sum_nu h_l h_m / <h,h> - delta_{lm}|`.
pub fn dual_orthogonality_residual(op: &LatticeOperator, result: &SpectralResult) -> f64 {
    let sqrt_w = op.sqrt_weights();
    let dim = op.dim();
    let mut worst: f64 = 0.0;
    for l in 0..dim {
        for m in l..dim {
            let sum: f64 = result
                .eigenfunctions
                .iter()
                .zip(&result.norms)
                .map(|(e, n)| e.values[l] * e.values[m] / n)
                .sum();
            let expect = if l == m { 1.0 } else { 0.0 };
            worst = worst.max((sqrt_w[l] * sqrt_w[m] * sum - expect).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(p: f64) -> CouplingParams {
        CouplingParams::new(2, 2, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], p)
    }

    #[test]
    fn one_particle_is_tridiagonal() {
        let params = CouplingParams::new(1, 2, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], 0.2);
        let op = build_operator(&params).unwrap();
        assert_eq!(op.dim(), 3);
        assert_eq!(op.matrix()[(0, 2)], 0.0);
        assert_eq!(op.matrix()[(2, 0)], 0.0);
        assert!(op.matrix()[(0, 1)] > 0.0 && op.matrix()[(1, 0)] > 0.0);
    }

    #[test]
    fn stencil_sparsity_and_symmetry() {
        let op = build_operator(&sample(0.3)).unwrap();
        let lat = op.lattice();
        for (i, lam) in lat.points().iter().enumerate() {
            let targets: Vec<usize> = lat.moves(lam).iter().map(|&s| lat.rank(&lam.shifted(s).unwrap()).unwrap()).collect();
            for k in 0..op.dim() {
                if k != i && !targets.contains(&k) {
                    assert_eq!(op.matrix()[(i, k)], 0.0);
                }
            }
        }
        let (_, res) = op.symmetrized();
        assert!(res < 1e-10, "{res}");
    }

    #[test]
    fn trace_and_p0_spectrum() {
        let op = build_operator(&sample(0.0)).unwrap();
        let pairs = diagonalize(&op).unwrap();
        let tr: f64 = pairs.values.iter().sum();
        assert!((tr - op.matrix().trace()).abs() < 1e-10 * tr.abs().max(1.0));
        let mut closed: Vec<f64> = op.lattice().points().iter().map(|nu| eigenvalue_p0(op.params(), nu)).collect();
        closed.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in pairs.values.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn eigenbasis_normalization() {
        let (op, result) = spectrum(&sample(0.2), &SpectralOptions::default()).unwrap();
        for (k, h) in result.eigenfunctions.iter().enumerate() {
            assert!(h.values[0] > 0.0);
            assert!((result.norms[k] - h.values[0]).abs() < 1e-10 * h.values[0]);
        }
        assert!(eigen_residual(&op, &result) < 1e-9);
        let (off, diag) = orthogonality_residuals(&op, &result);
        assert!(off < 1e-9 && diag < 1e-10);
        assert!(dual_orthogonality_residual(&op, &result) < 1e-9);
    }

    #[test]
    fn projector_two_by_two() {
        let params = CouplingParams::new(1, 1, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], 0.3);
        let (op, result) = spectrum(&params, &SpectralOptions::default()).unwrap();
        for nu in 0..2 {
            let h = projector_h(&op, &result, nu, &SpectralOptions::default()).unwrap();
            for (a, b) in h.iter().zip(result.h(nu)) {
                assert!((a - b).abs() < 1e-12 * b.abs().max(1e-300) + 1e-14);
            }
        }
    }

    #[test]
    fn projector_agrees_and_is_idempotent() {
        let opts = SpectralOptions::default();
        let (op, result) = spectrum(&sample(0.2), &opts).unwrap();
        let energies = result.energies();
        for nu in 0..op.dim() {
            let h = projector_h(&op, &result, nu, &opts).unwrap();
            let d: Vec<f64> = h.iter().zip(result.h(nu)).map(|(a, b)| a - b).collect();
            let rel = (op.inner(&d, &d) / result.norms[nu]).sqrt();
            assert!(rel < 1e-7, "nu {nu}: {rel}");
            let twice = apply_projector(&op, &energies, nu, &h);
            let d2: Vec<f64> = twice.iter().zip(&h).map(|(a, b)| a - b).collect();
            assert!((op.inner(&d2, &d2) / result.norms[nu]).sqrt() < 1e-7);
        }
    }

    #[test]
    fn labels_persist_at_small_p() {
        let opts = SpectralOptions::default();
        let op = build_operator(&sample(0.05)).unwrap();
        let pairs = diagonalize(&op).unwrap();
        let labeling = label_eigenvalues(&op, &pairs, &opts).unwrap();
        assert_eq!(labeling.path.len(), 1);
        assert!(labeling.min_overlap() > 0.99);
        assert!(labeling.order_preserved());
    }

    #[test]
    fn m1_order_at_p0() {
        let params = CouplingParams::new(2, 1, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], 0.0);
        let (_, result) = spectrum(&params, &SpectralOptions::default()).unwrap();
        let e = result.energies();
        assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    }

    #[test]
    fn degenerate_spectrum_is_refused() {
        // rho_hat differences hit a symmetric point: identical closed-form values
        let mut params = CouplingParams::new(2, 1, 0.5, [0.6, 0.7, 0.1, 0.1], [0.0; 4], 0.0);
        params.g = 0.5;
        let op = build_operator(&params).unwrap();
        let mut pairs = diagonalize(&op).unwrap();
        pairs.values[1] = pairs.values[0];
        assert!(matches!(check_gap(&pairs, &SpectralOptions::default(), 0.0, None, op.lattice()), Err(Error::Labeling { .. })));
    }
}
