use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::csv_util::{fmt_scalar, write_rows};
use crate::error::{Error, Result};
use crate::scalar::{max_abs, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Engine,
    Oracle,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Engine => "engine",
            Provenance::Oracle => "oracle",
        }
    }
}

/// Contribution of a single jump of the configuration to Γ.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpContribution<T: Scalar> {
    pub index: usize,
    pub time: T,
    pub matrix: DMatrix<T>,
}

/// Carré du champ matrix Γ[F] together with its per-jump decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix<T: Scalar> {
    matrix: DMatrix<T>,
    provenance: Provenance,
    contributions: Vec<JumpContribution<T>>,
}

impl<T: Scalar> GammaMatrix<T> {
    /// Sums contributions in index order.
    pub fn from_contributions(dim: usize, provenance: Provenance, contributions: Vec<JumpContribution<T>>) -> Self {
        let matrix = contributions.iter().fold(DMatrix::zeros(dim, dim), |acc, c| acc + &c.matrix);
        Self { matrix, provenance, contributions }
    }

    /// Γ given directly as a matrix, without a decomposition.
    pub fn from_matrix(matrix: DMatrix<T>, provenance: Provenance) -> Self {
        Self { matrix, provenance, contributions: Vec::new() }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn contributions(&self) -> &[JumpContribution<T>] {
        &self.contributions
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    pub fn determinant(&self) -> T {
        self.matrix.determinant()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        symmetric_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().into_iter().reduce(|m, v| if v < m { v } else { m }).unwrap_or(T::zero())
    }

    pub fn max_abs(&self) -> T {
        max_abs(self.matrix.iter().copied())
    }

    /// Symmetric and PSD within `-1e-10 · trace`.
    pub fn check_psd(&self) -> Result<()> {
        let asym = (&self.matrix - self.matrix.transpose()).amax();
        let scale = T::one() + self.max_abs();
        if asym > T::lit(1e-12) * scale {
            return Err(Error::Internal(format!("gamma matrix not symmetric: asymmetry {asym}")));
        }
        if self.dim() == 0 {
            return Ok(());
        }
        let floor = -T::lit(1e-10) * self.trace().abs();
        let min = self.min_eigenvalue();
        if min < floor {
            return Err(Error::Internal(format!("gamma matrix not PSD: min eigenvalue {min}")));
        }
        Ok(())
    }
}

pub(crate) fn symmetric_eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * T::lit(0.5);
    SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()
}

/// Engine-versus-oracle comparison of two Γ matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDiscrepancy {
    pub max_abs: f64,
    /// ‖A − B‖∞ / ‖B‖∞ (zero when both vanish).
    pub relative: f64,
    /// ‖A − B‖∞ / (1 + ‖A‖∞), the quantity the tolerance applies to.
    pub scaled: f64,
}

impl GammaDiscrepancy {
    pub fn within(&self, tol: f64) -> bool {
        self.scaled <= tol
    }
}

pub fn compare_gammas<T: Scalar>(engine: &GammaMatrix<T>, oracle: &GammaMatrix<T>) -> GammaDiscrepancy {
    compare_matrices(engine.matrix(), oracle.matrix())
}

pub fn compare_matrices<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> GammaDiscrepancy {
    let diff = max_abs((a - b).iter().copied()).as_f64();
    let a_norm = max_abs(a.iter().copied()).as_f64();
    let b_norm = max_abs(b.iter().copied()).as_f64();
    let relative = if b_norm > 0.0 {
        diff / b_norm
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    GammaDiscrepancy { max_abs: diff, relative, scaled: diff / (1.0 + a_norm) }
}

/// Header `path_id, g_1_1.., det, min_eigenvalue` for Γ matrices of size `dim`.
pub fn gamma_csv_header(dim: usize) -> Vec<String> {
    let mut header = vec!["path_id".to_string()];
    for i in 1..=dim {
        for j in 1..=dim {
            header.push(format!("g_{i}_{j}"));
        }
    }
    header.push("det".into());
    header.push("min_eigenvalue".into());
    header
}

pub fn gamma_csv_row<T: Scalar>(path_id: usize, gamma: &GammaMatrix<T>) -> Vec<String> {
    let m = gamma.matrix();
    let mut row = vec![path_id.to_string()];
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            row.push(fmt_scalar(m[(i, j)]));
        }
    }
    row.push(fmt_scalar(gamma.determinant()));
    row.push(fmt_scalar(gamma.min_eigenvalue()));
    row
}

/// One row per path, entries row-major.
pub fn write_gamma_csv<'a, T: Scalar, W: Write>(
    dim: usize,
    rows: impl IntoIterator<Item = (usize, &'a GammaMatrix<T>)>,
    out: W,
) -> Result<()> {
    write_rows(out, &gamma_csv_header(dim), rows.into_iter().map(|(id, g)| gamma_csv_row(id, g)))
}

/// Per-jump contribution trace: `path_id, jump_index, time, c_1_1..`.
pub fn write_contributions_csv<'a, T: Scalar, W: Write>(
    dim: usize,
    rows: impl IntoIterator<Item = (usize, &'a GammaMatrix<T>)>,
    out: W,
) -> Result<()> {
    let mut header = vec!["path_id".to_string(), "jump_index".into(), "time".into()];
    for i in 1..=dim {
        for j in 1..=dim {
            header.push(format!("c_{i}_{j}"));
        }
    }
    let mut body = Vec::new();
    for (id, g) in rows {
        for c in g.contributions() {
            let mut row = vec![id.to_string(), c.index.to_string(), fmt_scalar(c.time)];
            row.extend(c.matrix.transpose().iter().map(|x| fmt_scalar(*x)));
            body.push(row);
        }
    }
    write_rows(out, &header, body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contributions_sum() {
        let c = |i: usize, x: f64| JumpContribution {
            index: i,
            time: 0.1 * i as f64,
            matrix: DMatrix::from_element(1, 1, x),
        };
        let g = GammaMatrix::from_contributions(1, Provenance::Engine, vec![c(0, 0.25), c(1, 0.04)]);
        assert!((g.matrix()[(0, 0)] - 0.29).abs() < 1e-15);
        assert!(g.check_psd().is_ok());
    }

    #[test]
    fn non_psd_detected() {
        let g = GammaMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]), Provenance::Engine);
        assert!(g.check_psd().is_err());
    }

    #[test]
    fn csv_row_layout() {
        let g = GammaMatrix::from_matrix(DMatrix::<f64>::identity(2, 2), Provenance::Engine);
        let mut buf = Vec::new();
        write_gamma_csv(2, [(7, &g)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "path_id,g_1_1,g_1_2,g_2_1,g_2_2,det,min_eigenvalue");
        assert!(lines.next().unwrap().starts_with("7,1.0000000000000000e0,0.0000000000000000e0"));
    }

    #[test]
    fn discrepancy_measures() {
        let a = DMatrix::from_element(1, 1, 1.21);
        let b = DMatrix::from_element(1, 1, 1.0);
        let d = compare_matrices(&a, &b);
        assert!((d.relative - 0.21).abs() < 1e-12);
        assert!((d.scaled - 0.21 / 2.21).abs() < 1e-12);
    }
}
