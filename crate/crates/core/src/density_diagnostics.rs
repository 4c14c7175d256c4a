//! Density-existence diagnostics from samples of Γ and of the law itself.
//!
//! These are statistical surrogates: a positive determinant of Γ together
//! with the energy image density property (taken as given) implies a
//! density; only the first half is checked here.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::csv_util::{fmt_real, write_rows};
use crate::error::{Error, Result};
use crate::functional_calculus::GammaMatrix;
use crate::scalar::Scalar;

/// Threshold applied to det Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetTolerance {
    Absolute(f64),
    /// `factor · (trace/d)^d`, evaluated per sample.
    Relative(f64),
}

impl Default for DetTolerance {
    fn default() -> Self {
        DetTolerance::Relative(1e-12)
    }
}

impl DetTolerance {
    fn threshold(self, trace: f64, d: usize) -> f64 {
        match self {
            DetTolerance::Absolute(t) => t,
            DetTolerance::Relative(f) => f * (trace / d as f64).max(0.0).powi(d as i32),
        }
    }

    fn describe(self) -> String {
        match self {
            DetTolerance::Absolute(t) => format!("det > {t:e}"),
            DetTolerance::Relative(f) => format!("det > {f:e}·(trace/d)^d"),
        }
    }
}

/// Outcome of one algebraic span condition.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVerdict {
    pub label: String,
    pub dimension: usize,
    pub required: usize,
}

impl RankVerdict {
    pub fn holds(&self) -> bool {
        self.dimension >= self.required
    }
}

pub const QUANTILE_LEVELS: [f64; 7] = [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport {
    pub dim: usize,
    pub samples: usize,
    pub tolerance: DetTolerance,
    pub nondegenerate: usize,
    pub min_det: f64,
    pub median_det: f64,
    /// Quantiles of the smallest eigenvalue at [`QUANTILE_LEVELS`].
    pub min_eigenvalue_quantiles: Vec<f64>,
    pub rank_checks: Vec<RankVerdict>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

impl NondegeneracyReport {
    pub fn fraction(&self) -> f64 {
        self.nondegenerate as f64 / self.samples as f64
    }

    /// Adds the verdict `span_dimension(vectors) ≥ required`.
    pub fn with_rank_check<T: Scalar>(
        mut self,
        label: impl Into<String>,
        vectors: &[DVector<T>],
        required: usize,
        tol: f64,
    ) -> Self {
        self.rank_checks.push(RankVerdict { label: label.into(), dimension: span_dimension(vectors, tol), required });
        self
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("samples: {}\n", self.samples));
        s.push_str(&format!("dimension: {}\n", self.dim));
        s.push_str(&format!("criterion: {}\n", self.tolerance.describe()));
        s.push_str(&format!("nondegenerate: {} ({:.6})\n", self.nondegenerate, self.fraction()));
        s.push_str(&format!("min det: {:e}\n", self.min_det));
        s.push_str(&format!("median det: {:e}\n", self.median_det));
        s.push_str("min eigenvalue quantiles:\n");
        for (q, v) in QUANTILE_LEVELS.iter().zip(&self.min_eigenvalue_quantiles) {
            s.push_str(&format!("  q{:.2}: {:e}\n", q, v));
        }
        for r in &self.rank_checks {
            s.push_str(&format!(
                "rank {}: {} (span {} of required {})\n",
                r.label,
                if r.holds() { "holds" } else { "fails" },
                r.dimension,
                r.required
            ));
        }
        s.push_str(
            "note: det Γ > 0 implies a density only together with the energy image density \
             property, which is assumed, not checked\n",
        );
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let header = ["statistic".to_string(), "value".to_string()];
        let mut rows = vec![
            vec!["samples".into(), self.samples.to_string()],
            vec!["nondegenerate".into(), self.nondegenerate.to_string()],
            vec!["fraction".into(), fmt_real(self.fraction())],
            vec!["min_det".into(), fmt_real(self.min_det)],
            vec!["median_det".into(), fmt_real(self.median_det)],
        ];
        for (q, v) in QUANTILE_LEVELS.iter().zip(&self.min_eigenvalue_quantiles) {
            rows.push(vec![format!("min_eigenvalue_q{q:.2}"), fmt_real(*v)]);
        }
        for r in &self.rank_checks {
            rows.push(vec![format!("rank_{}", r.label), format!("{}/{}", r.dimension, r.required)]);
        }
        write_rows(out, &header, rows)
    }
}

/// Determinant and smallest-eigenvalue statistics over a sample of Γ.
pub fn nondegeneracy_stats<T: Scalar>(gammas: &[GammaMatrix<T>], tol: DetTolerance) -> Result<NondegeneracyReport> {
    let first = gammas.first().ok_or_else(|| Error::Input("no Γ samples".into()))?;
    let dim = first.dim();
    let mut dets = Vec::with_capacity(gammas.len());
    let mut mins = Vec::with_capacity(gammas.len());
    let mut nondegenerate = 0;
    for (i, g) in gammas.iter().enumerate() {
        if g.dim() != dim {
            return Err(Error::Input(format!("sample {i} has dimension {}, expected {dim}", g.dim())));
        }
        let det = g.determinant().as_f64();
        if det > tol.threshold(g.trace().as_f64(), dim) {
            nondegenerate += 1;
        }
        dets.push(det);
        mins.push(g.min_eigenvalue().as_f64());
    }
    let dets = sorted(dets);
    let mins = sorted(mins);
    Ok(NondegeneracyReport {
        dim,
        samples: gammas.len(),
        tolerance: tol,
        nondegenerate,
        min_det: dets[0],
        median_det: quantile(&dets, 0.5),
        min_eigenvalue_quantiles: QUANTILE_LEVELS.iter().map(|q| quantile(&mins, *q)).collect(),
        rank_checks: Vec::new(),
    })
}

/// Numerical dimension of the span: singular values of the normalized
/// vectors above `tol ×` the largest.
pub fn span_dimension<T: Scalar>(vectors: &[DVector<T>], tol: f64) -> usize {
    let Some(first) = vectors.first() else { return 0 };
    let d = first.len();
    let cols: Vec<DVector<f64>> = vectors
        .iter()
        .map(|v| DVector::from_iterator(d, v.iter().map(|x| x.as_f64())))
        .filter(|v| v.norm() > 0.0)
        .map(|v| v.normalize())
        .collect();
    if cols.is_empty() {
        return 0;
    }
    let m = DMatrix::from_columns(&cols);
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > tol * max).count()
}

/// Location and frequency of a detected atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub count: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomReport {
    pub samples: usize,
    pub threshold: f64,
    pub atoms: Vec<Atom>,
}

impl AtomReport {
    pub fn has_atom(&self) -> bool {
        !self.atoms.is_empty()
    }

    /// Heaviest atom, if any.
    pub fn largest(&self) -> Option<&Atom> {
        self.atoms.iter().max_by_key(|a| a.count)
    }
}

pub const MIN_ATOM_SAMPLES: usize = 1000;

/// Flags values repeated (within `resolution` in every coordinate) with
/// frequency above 3/√n.
pub fn atom_test<T: Scalar>(samples: &[DVector<T>], resolution: f64) -> Result<AtomReport> {
    let n = samples.len();
    if n < MIN_ATOM_SAMPLES {
        return Err(Error::Input(format!("atom test needs at least {MIN_ATOM_SAMPLES} samples, got {n}")));
    }
    let mut pts: Vec<Vec<f64>> = samples.iter().map(|v| v.iter().map(|x| x.as_f64()).collect()).collect();
    pts.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let threshold = 3.0 / (n as f64).sqrt();
    let mut atoms = Vec::new();
    let mut start = 0;
    while start < n {
        let anchor = &pts[start];
        let mut end = start + 1;
        while end < n && pts[end].iter().zip(anchor).all(|(x, y)| (x - y).abs() <= resolution) {
            end += 1;
        }
        let count = end - start;
        let frequency = count as f64 / n as f64;
        if frequency > threshold {
            atoms.push(Atom { location: anchor.clone(), count, frequency });
        }
        start = end;
    }
    Ok(AtomReport { samples: n, threshold, atoms })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// 0.9·min(σ, IQR/1.34)·n^{-1/5} in one dimension; Scott's rule in two.
    Silverman,
    /// σ_i·n^{-1/(d+4)} per coordinate.
    Scott,
    Fixed(f64),
}

pub const KDE_GRID_1D: usize = 512;
pub const KDE_GRID_2D: usize = 64;

/// Gaussian kernel density estimate on a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeGrid {
    pub dim: usize,
    pub bandwidth: Vec<f64>,
    /// Grid coordinates per axis.
    pub axes: Vec<Vec<f64>>,
    /// Densities, row-major over (x, y) in two dimensions.
    pub density: Vec<f64>,
    pub warnings: Vec<String>,
}

impl KdeGrid {
    /// Grid points that strictly exceed all their grid neighbours.
    pub fn local_maxima(&self) -> Vec<Vec<f64>> {
        if self.dim == 1 {
            let f = &self.density;
            let x = &self.axes[0];
            (1..f.len() - 1).filter(|&i| f[i] > f[i - 1] && f[i] > f[i + 1]).map(|i| vec![x[i]]).collect()
        } else {
            let (nx, ny) = (self.axes[0].len(), self.axes[1].len());
            let at = |i: usize, j: usize| self.density[i * ny + j];
            let mut out = Vec::new();
            for i in 1..nx - 1 {
                for j in 1..ny - 1 {
                    let v = at(i, j);
                    let is_max = (i - 1..=i + 1)
                        .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                        .filter(|&(a, b)| (a, b) != (i, j))
                        .all(|(a, b)| v > at(a, b));
                    if is_max {
                        out.push(vec![self.axes[0][i], self.axes[1][j]]);
                    }
                }
            }
            out
        }
    }

    /// Grid point of highest density.
    pub fn mode(&self) -> Vec<f64> {
        let best = (0..self.density.len()).fold(0, |b, i| if self.density[i] > self.density[b] { i } else { b });
        if self.dim == 1 {
            vec![self.axes[0][best]]
        } else {
            let ny = self.axes[1].len();
            vec![self.axes[0][best / ny], self.axes[1][best % ny]]
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        if self.dim == 1 {
            let header = ["x".to_string(), "density".to_string()];
            let rows = self.axes[0].iter().zip(&self.density).map(|(x, f)| vec![fmt_real(*x), fmt_real(*f)]);
            write_rows(out, &header, rows)
        } else {
            let header = ["x".to_string(), "y".to_string(), "density".to_string()];
            let ny = self.axes[1].len();
            let rows = self
                .density
                .iter()
                .enumerate()
                .map(|(k, f)| vec![fmt_real(self.axes[0][k / ny]), fmt_real(self.axes[1][k % ny]), fmt_real(*f)]);
            write_rows(out, &header, rows)
        }
    }
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.max(0.0).sqrt())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Gaussian KDE of 1- or 2-dimensional samples; constant coordinates give a
/// warning and a nominal bandwidth rather than an error.
pub fn kde_summary<T: Scalar>(samples: &[DVector<T>], rule: BandwidthRule) -> Result<KdeGrid> {
    let n = samples.len();
    if n < MIN_ATOM_SAMPLES {
        return Err(Error::Input(format!("KDE needs at least {MIN_ATOM_SAMPLES} samples, got {n}")));
    }
    let dim = samples[0].len();
    if dim != 1 && dim != 2 {
        return Err(Error::Input(format!("KDE supports 1 or 2 dimensions, got {dim}")));
    }
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::Input("samples have inconsistent dimensions".into()));
    }
    let coords: Vec<Vec<f64>> = (0..dim).map(|k| samples.iter().map(|s| s[k].as_f64()).collect()).collect();
    let nf = n as f64;
    let mut warnings = Vec::new();
    let mut bandwidth = Vec::with_capacity(dim);
    for (k, c) in coords.iter().enumerate() {
        let (mean, sd) = mean_sd(c);
        let spread = match rule {
            BandwidthRule::Silverman if dim == 1 => {
                let s = sorted(c.clone());
                let iqr = (quantile(&s, 0.75) - quantile(&s, 0.25)) / 1.34;
                let m = if iqr > 0.0 { sd.min(iqr) } else { sd };
                0.9 * m * nf.powf(-0.2)
            }
            BandwidthRule::Silverman | BandwidthRule::Scott => sd * nf.powf(-1.0 / (dim as f64 + 4.0)),
            BandwidthRule::Fixed(h) => {
                if !(h > 0.0) {
                    return Err(Error::Input(format!("bandwidth must be positive, got {h}")));
                }
                h
            }
        };
        if !(sd > 0.0) {
            warnings.push(format!("coordinate {k} has degenerate variance"));
        }
        bandwidth.push(if spread > 0.0 { spread } else { 1e-3 * mean.abs().max(1.0) });
    }
    let points = if dim == 1 { KDE_GRID_1D } else { KDE_GRID_2D };
    let axes: Vec<Vec<f64>> = coords
        .iter()
        .zip(&bandwidth)
        .map(|(c, h)| {
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
            linspace(lo, hi, points)
        })
        .collect();
    let norm = (2.0 * std::f64::consts::PI).powf(dim as f64 / 2.0) * bandwidth.iter().product::<f64>() * nf;
    let density = if dim == 1 {
        let h = bandwidth[0];
        axes[0]
            .iter()
            .map(|x| coords[0].iter().map(|s| (-0.5 * ((x - s) / h).powi(2)).exp()).sum::<f64>() / norm)
            .collect()
    } else {
        let (hx, hy) = (bandwidth[0], bandwidth[1]);
        let mut out = Vec::with_capacity(points * points);
        for x in &axes[0] {
            let wx: Vec<f64> = coords[0].iter().map(|s| (-0.5 * ((x - s) / hx).powi(2)).exp()).collect();
            for y in &axes[1] {
                let sum: f64 = wx.iter().zip(&coords[1]).map(|(w, s)| w * (-0.5 * ((y - s) / hy).powi(2)).exp()).sum();
                out.push(sum / norm);
            }
        }
        out
    };
    Ok(KdeGrid { dim, bandwidth, axes, density, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional_calculus::Provenance;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn g(m: DMatrix<f64>) -> GammaMatrix<f64> {
        GammaMatrix::from_matrix(m, Provenance::Engine)
    }

    #[test]
    fn zero_and_identity_gammas() {
        let zeros = vec![g(DMatrix::zeros(2, 2)); 5];
        assert_eq!(nondegeneracy_stats(&zeros, DetTolerance::default()).unwrap().fraction(), 0.0);
        let ids = vec![g(DMatrix::identity(2, 2)); 5];
        let r = nondegeneracy_stats(&ids, DetTolerance::default()).unwrap();
        assert_eq!(r.fraction(), 1.0);
        assert_eq!(r.min_det, 1.0);
        assert!(r.min_eigenvalue_quantiles.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let v = vec![g(DMatrix::identity(2, 2)), g(DMatrix::identity(3, 3))];
        assert!(matches!(nondegeneracy_stats(&v, DetTolerance::default()), Err(Error::Input(_))));
    }

    #[test]
    fn span_examples() {
        let v = |x: &[f64]| DVector::from_column_slice(x);
        assert_eq!(span_dimension(&[v(&[1.0, 2.0]), v(&[1.0, 2.0]), v(&[1.0, 2.0])], 1e-10), 1);
        assert_eq!(span_dimension(&[v(&[1.0, 0.3]), v(&[1.0, 0.7])], 1e-10), 2);
        let (c1, c2) = (0.4, -0.9);
        let vs = [v(&[1.0, 2.0 * c1, c1]), v(&[1.0, 2.0 * c2, c2]), v(&[0.0, 1.0, 2.0])];
        assert_eq!(span_dimension(&vs, 1e-10), 3);
    }

    #[test]
    fn atoms_in_mixture_and_not_in_uniform() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let uni: Vec<DVector<f64>> = (0..5000).map(|_| DVector::from_element(1, rng.random::<f64>())).collect();
        assert!(!atom_test(&uni, 1e-12).unwrap().has_atom());
        let mix: Vec<DVector<f64>> = (0..5000)
            .map(|_| DVector::from_element(1, if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() + 0.5 }))
            .collect();
        let r = atom_test(&mix, 1e-12).unwrap();
        let a = r.largest().unwrap();
        assert_eq!(a.location, vec![0.0]);
        assert!((a.frequency - 0.3).abs() < 3.0 * (0.21f64 / 5000.0).sqrt() + 1e-3);
        assert!(atom_test(&uni[..10], 1e-12).is_err());
    }

    #[test]
    fn kde_normal_mode_and_bimodal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let normal: Vec<DVector<f64>> =
            (0..100_000).map(|_| DVector::from_element(1, rng.sample::<f64, _>(StandardNormal))).collect();
        let k = kde_summary(&normal, BandwidthRule::Silverman).unwrap();
        assert!(k.mode()[0].abs() < 0.1, "mode {:?} h {:?}", k.mode(), k.bandwidth);
        assert!(k.warnings.is_empty());
        let two: Vec<DVector<f64>> = (0..2000)
            .map(|i| {
                DVector::from_element(
                    1,
                    if i % 2 == 0 { -3.0 } else { 3.0 } + 0.1 * rng.sample::<f64, _>(StandardNormal),
                )
            })
            .collect();
        assert_eq!(kde_summary(&two, BandwidthRule::Silverman).unwrap().local_maxima().len(), 2);
        let constant = vec![DVector::from_element(1, 2.0); 1000];
        assert!(!kde_summary(&constant, BandwidthRule::Silverman).unwrap().warnings.is_empty());
    }

    #[test]
    fn kde_two_dimensional_grid_csv() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let s: Vec<DVector<f64>> = (0..1000)
            .map(|_| DVector::from_vec(vec![rng.sample(StandardNormal), rng.sample(StandardNormal)]))
            .collect();
        let k = kde_summary(&s, BandwidthRule::Scott).unwrap();
        assert_eq!(k.density.len(), KDE_GRID_2D * KDE_GRID_2D);
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), KDE_GRID_2D * KDE_GRID_2D + 1);
    }
}
