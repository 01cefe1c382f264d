//! Parameter sweeps: independent spectra over a grid, run on the rayon pool.

use rayon::prelude::*;

use crate::io::{SweepRow, SweepTable};
use crate::model::CouplingParams;
use crate::spectral::{spectrum, SpectralOptions};

/// `from, from + step, ...` up to and including `to` (within half a step).
pub fn p_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || to < from {
        return vec![from];
    }
    let count = ((to - from) / step + 0.5).floor() as usize;
    (0..=count).map(|i| from + step * i as f64).collect()
}

/// Drops repeated parameter sets, keeping the first occurrence.
pub fn dedup_points(points: Vec<CouplingParams>) -> Vec<CouplingParams> {
    let mut out: Vec<CouplingParams> = Vec::with_capacity(points.len());
    for p in points {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

pub fn run_sweep(points: Vec<CouplingParams>, opts: &SpectralOptions) -> SweepTable {
    let points = dedup_points(points);
    let mut results: Vec<(usize, Vec<SweepRow>, Option<Vec<f64>>)> = points
        .par_iter()
        .enumerate()
        .map(|(i, params)| match spectrum(params, opts) {
            Ok((_, result)) => {
                let rows = result
                    .eigenvalues
                    .iter()
                    .zip(&result.eigenfunctions)
                    .map(|(ev, ef)| SweepRow {
                        point: i,
                        p: params.p,
                        nu: Some(ev.nu.clone()),
                        e: Some(ev.e),
                        h0: Some(ef.values[0]),
                        min_gap: Some(result.diagnostics.min_gap),
                        error: None,
                    })
                    .collect();
                (i, rows, Some(result.energies()))
            }
            Err(e) => {
                let row = SweepRow { point: i, p: params.p, nu: None, e: None, h0: None, min_gap: None, error: Some(e.to_string()) };
                (i, vec![row], None)
            }
        })
        .collect();
    results.sort_by_key(|r| r.0);

    let mut max_jump: f64 = 0.0;
    let mut prev: Option<&Vec<f64>> = None;
    for (_, _, energies) in &results {
        if let Some(e) = energies {
            if let Some(q) = prev {
                if q.len() == e.len() {
                    max_jump = e.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(max_jump, f64::max);
                }
            }
            prev = Some(e);
        }
    }
    let rows = results.into_iter().flat_map(|r| r.1).collect();
    SweepTable { points, rows, max_jump }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = p_grid(0.0, 0.5, 0.05);
        assert_eq!(g.len(), 11);
        assert!((g[10] - 0.5).abs() < 1e-15);
        assert_eq!(p_grid(0.2, 0.2, 0.1), vec![0.2]);
    }

    #[test]
    fn sweep_is_continuous_and_dedups() {
        let base = CouplingParams::new(2, 2, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], 0.0);
        let mut pts: Vec<_> = p_grid(0.0, 0.5, 0.05).into_iter().map(|p| base.with_p(p)).collect();
        pts.push(base.with_p(0.1));
        let table = run_sweep(pts, &SpectralOptions::default());
        assert_eq!(table.points.len(), 11);
        assert_eq!(table.failures(), 0);
        assert_eq!(table.rows.len(), 11 * 6);
        assert!(table.max_jump < 0.5, "{}", table.max_jump);
    }

    #[test]
    fn failed_point_is_inline() {
        let good = CouplingParams::new(1, 1, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], 0.1);
        let mut bad = good.clone();
        bad.gp1 = 5.0;
        let table = run_sweep(vec![good.clone(), bad, good.with_p(0.2)], &SpectralOptions::default());
        assert_eq!(table.failures(), 1);
        assert_eq!(table.rows.len(), 2 + 1 + 2);
        assert!(table.rows[2].error.is_some());
    }
}
