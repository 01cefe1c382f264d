//! Report types and their JSON / CSV renderings.
//!
//! CSV files start with `#`-prefixed metadata lines; eigenfunction tables are
//! lambda-major with the graded-lex lattice order as the header row.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::checks::VerifyReport;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Partition};
use crate::m1::{coeffs_m1, norms_m1, poly_p_det};
use crate::model::{CouplingParams, Model};
use crate::racah::{chain_from_model, schur_eigenfunction, SchurEigenfunction};
use crate::spectral::{spectrum, SpectralOptions, SpectralResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Domain(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

struct Csv {
    out: String,
    rows: csv::Writer<Vec<u8>>,
}

impl Csv {
    fn new() -> Self {
        Csv { out: String::new(), rows: csv::WriterBuilder::new().flexible(true).from_writer(Vec::new()) }
    }

    fn meta(&mut self, key: &str, value: impl fmt::Display) {
        self.out.push_str(&format!("# {key}: {value}\n"));
    }

    fn params(&mut self, params: &CouplingParams) -> Result<()> {
        let json = serde_json::to_string(params).map_err(|e| Error::Internal(e.to_string()))?;
        self.meta("params", json);
        Ok(())
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.rows.write_record(fields).map_err(|e| Error::Internal(e.to_string()))
    }

    fn finish(self) -> Result<String> {
        let body = self.rows.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        let body = String::from_utf8(body).map_err(|e| Error::Internal(e.to_string()))?;
        Ok(self.out + &body)
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Rows `lambda, h^(nu_0)_lambda, h^(nu_1)_lambda, ...` preceded by the
/// eigenvalue and norm rows.
pub fn spectrum_csv(result: &SpectralResult) -> Result<String> {
    let mut csv = Csv::new();
    csv.params(&result.params)?;
    csv.meta("sym_residual", num(result.diagnostics.sym_residual));
    csv.meta("min_gap", num(result.diagnostics.min_gap));
    csv.meta("path_steps", result.diagnostics.path.len());
    if !result.diagnostics.zero_locus.is_empty() {
        let z: Vec<String> = result.diagnostics.zero_locus.iter().map(|p| p.to_string()).collect();
        csv.meta("zero_locus", z.join(" "));
    }
    for w in &result.diagnostics.warnings {
        csv.meta("warning", w);
    }
    let header = std::iter::once("lambda".to_string()).chain(result.lattice_order.iter().map(|p| p.to_string()));
    csv.row(header)?;
    csv.row(std::iter::once("E".to_string()).chain(result.eigenvalues.iter().map(|e| num(e.e))))?;
    csv.row(std::iter::once("norm".to_string()).chain(result.norms.iter().map(|&x| num(x))))?;
    for (i, lam) in result.lattice_order.iter().enumerate() {
        let row = std::iter::once(lam.to_string()).chain(result.eigenfunctions.iter().map(|ef| num(ef.values[i])));
        csv.row(row)?;
    }
    csv.finish()
}

pub fn render_spectrum(result: &SpectralResult, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(result),
        Format::Csv => spectrum_csv(result),
    }
}

pub fn render_verify(report: &VerifyReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut csv = Csv::new();
            csv.meta("passed", report.passed());
            csv.row(["check", "passed", "measured", "tolerance", "detail"])?;
            for c in &report.checks {
                csv.row([
                    c.name.clone(),
                    c.passed.to_string(),
                    num(c.measured),
                    num(c.tolerance),
                    c.detail.clone().unwrap_or_default(),
                ])?;
            }
            csv.finish()
        }
    }
}

/// Output of `special m1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct M1Report {
    pub params: CouplingParams,
    /// Roots of `P_(1^{n+1})`, i.e. `E_(1^l)`, in decreasing order.
    pub roots: Vec<f64>,
    /// The generic solver's eigenvalues on the same columns.
    pub generic: Vec<f64>,
    pub root_residual: f64,
    pub norms_direct: Vec<f64>,
    pub norms_closed: Vec<f64>,
    /// Worst mismatch between the raw products and the simplified ratio forms.
    pub form_discrepancy: f64,
    /// `max |P_(1^{n+1})(x) - prod_l (x - E_l)|` over probe points, relative.
    pub characteristic_residual: f64,
    /// `eigenfunctions[l][k] = h^{(1^l)}_{(1^k)}`.
    pub eigenfunctions: Vec<Vec<f64>>,
}

pub fn m1_report(params: &CouplingParams, opts: &SpectralOptions) -> Result<M1Report> {
    let tri = coeffs_m1(params)?;
    let (_, result) = spectrum(params, opts)?;
    let generic = result.energies();
    let n = tri.n;
    let root_residual = tri
        .roots
        .iter()
        .zip(&generic)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max);
    let (norms_direct, norms_closed): (Vec<f64>, Vec<f64>) = (0..=n).map(|l| norms_m1(&tri, l)).unzip();
    let lo = tri.roots.last().copied().unwrap_or(0.0) - 1.0;
    let hi = tri.roots.first().copied().unwrap_or(0.0) + 1.0;
    let mut characteristic_residual: f64 = 0.0;
    for i in 0..=16 {
        let x = lo + (hi - lo) * f64::from(i) / 16.0;
        let (p, prod) = tri.characteristic(x);
        characteristic_residual = characteristic_residual.max((p - prod).abs() / prod.abs().max(1.0));
        let det = poly_p_det(&tri, n + 1, x);
        characteristic_residual = characteristic_residual.max((p - det).abs() / det.abs().max(1.0));
    }
    Ok(M1Report {
        params: params.clone(),
        roots: tri.roots.clone(),
        generic,
        root_residual,
        norms_direct,
        norms_closed,
        form_discrepancy: tri.form_discrepancy,
        characteristic_residual,
        eigenfunctions: (0..=n).map(|l| tri.eigenfunction(l)).collect(),
    })
}

pub fn render_m1(report: &M1Report, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let n = report.roots.len() - 1;
            let mut csv = Csv::new();
            csv.params(&report.params)?;
            csv.meta("root_residual", num(report.root_residual));
            csv.meta("form_discrepancy", num(report.form_discrepancy));
            csv.meta("characteristic_residual", num(report.characteristic_residual));
            let cols: Vec<String> = (0..=n).map(|l| Partition::column(n, l).to_string()).collect();
            csv.row(std::iter::once("lambda".to_string()).chain(cols.iter().cloned()))?;
            csv.row(std::iter::once("E".to_string()).chain(report.roots.iter().map(|&x| num(x))))?;
            csv.row(std::iter::once("norm_direct".to_string()).chain(report.norms_direct.iter().map(|&x| num(x))))?;
            csv.row(std::iter::once("norm_closed".to_string()).chain(report.norms_closed.iter().map(|&x| num(x))))?;
            for (k, lam) in cols.iter().enumerate() {
                csv.row(std::iter::once(lam.clone()).chain(report.eigenfunctions.iter().map(|h| num(h[k]))))?;
            }
            csv.finish()
        }
    }
}

/// Output of `special g1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct G1Report {
    pub params: CouplingParams,
    pub lattice_order: Vec<Partition>,
    /// Roots of the one-body chain on `n + m` nodes.
    pub roots: Vec<f64>,
    pub res_c: [f64; 4],
    /// Schur eigenfunctions, indexed by lattice rank of `nu`.
    pub eigenfunctions: Vec<SchurEigenfunction>,
    /// Worst eigen-residual of the Schur functions in the Delta norm.
    pub eigen_residual: f64,
    /// Worst mismatch between additive energies and the regularized diagonalization.
    pub spectrum_residual: f64,
}

pub fn g1_report(params: &CouplingParams, opts: &SpectralOptions) -> Result<G1Report> {
    let model = Model::new(params)?;
    let chain = chain_from_model(&model)?;
    let lattice = Lattice::new(params.n, params.m)?;
    let (op, result) = spectrum(params, opts)?;
    let mut eigenfunctions = Vec::with_capacity(lattice.len());
    let mut eigen_residual: f64 = 0.0;
    let mut spectrum_residual: f64 = 0.0;
    for (i, nu) in lattice.points().iter().enumerate() {
        let s = schur_eigenfunction(&model, &chain, &lattice, nu)?;
        let hs = op.apply(&s.h);
        let r: Vec<f64> = hs.iter().zip(&s.h).map(|(a, b)| a - s.energy * b).collect();
        eigen_residual = eigen_residual.max((op.inner(&r, &r) / op.inner(&s.h, &s.h)).sqrt());
        spectrum_residual = spectrum_residual.max((s.energy - result.eigenvalues[i].e).abs() / s.energy.abs().max(1.0));
        eigenfunctions.push(s);
    }
    Ok(G1Report {
        params: params.clone(),
        lattice_order: lattice.points().to_vec(),
        roots: chain.roots.clone(),
        res_c: chain.res_c,
        eigenfunctions,
        eigen_residual,
        spectrum_residual,
    })
}

pub fn render_g1(report: &G1Report, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut csv = Csv::new();
            csv.params(&report.params)?;
            let roots: Vec<String> = report.roots.iter().map(|&x| num(x)).collect();
            csv.meta("roots", roots.join(" "));
            csv.meta("eigen_residual", num(report.eigen_residual));
            csv.meta("spectrum_residual", num(report.spectrum_residual));
            let efs = &report.eigenfunctions;
            csv.row(std::iter::once("lambda".to_string()).chain(report.lattice_order.iter().map(|p| p.to_string())))?;
            csv.row(std::iter::once("E".to_string()).chain(efs.iter().map(|s| num(s.energy))))?;
            csv.row(std::iter::once("norm_direct".to_string()).chain(efs.iter().map(|s| num(s.norm_direct))))?;
            csv.row(std::iter::once("norm_closed".to_string()).chain(efs.iter().map(|s| num(s.norm_closed))))?;
            for (i, lam) in report.lattice_order.iter().enumerate() {
                csv.row(std::iter::once(lam.to_string()).chain(efs.iter().map(|s| num(s.s_values[i]))))?;
            }
            csv.finish()
        }
    }
}

/// One line of a sweep table; failed points carry `error` and no spectral data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: usize,
    pub p: f64,
    pub nu: Option<Partition>,
    #[serde(rename = "E")]
    pub e: Option<f64>,
    pub h0: Option<f64>,
    pub min_gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    /// Parameter sets in grid order after deduplication.
    pub points: Vec<CouplingParams>,
    pub rows: Vec<SweepRow>,
    /// Largest change of any `E_nu` between consecutive successful points.
    pub max_jump: f64,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

pub fn render_sweep(table: &SweepTable, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(table),
        Format::Csv => {
            let mut csv = Csv::new();
            csv.meta("points", table.points.len());
            csv.meta("failures", table.failures());
            csv.meta("max_jump", num(table.max_jump));
            for (i, p) in table.points.iter().enumerate() {
                let json = serde_json::to_string(p).map_err(|e| Error::Internal(e.to_string()))?;
                csv.meta(&format!("point {i}"), json);
            }
            csv.row(["point", "p", "nu", "E", "h0", "min_gap", "error"])?;
            let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
            for r in &table.rows {
                csv.row([
                    r.point.to_string(),
                    num(r.p),
                    r.nu.as_ref().map(|p| p.to_string()).unwrap_or_default(),
                    opt(r.e),
                    opt(r.h0),
                    opt(r.min_gap),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
            csv.finish()
        }
    }
}
