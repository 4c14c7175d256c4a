//! Bottom carré du champ γ(f)(u) = Σ ξ_ij(u) ∂_i f ∂_j f ψ(u)/k(u) on the
//! mark space, and sanity checks of the hypotheses it is built on.
//!
//! The gradient ♭ with values in an auxiliary L²(ρ) is never materialized:
//! every quantity downstream depends on it only through γ, so marks carry
//! plain ℝʳ gradients and γ is evaluated from them directly.

use std::fmt::Write as _;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::csv_util::write_rows;
use crate::error::{Error, Result};
use crate::levy_sim::LevyMeasureSpec;
use crate::scalar::Scalar;

/// Weight matrix W(u) = ξ(u) ψ(u)/k(u); zero off `O` and where ψ = k = 0.
pub fn gamma_weight<T: Scalar>(spec: &LevyMeasureSpec<T>, u: &DVector<T>) -> Result<DMatrix<T>> {
    let r = spec.dim();
    if u.len() != r {
        return Err(Error::Input(format!("mark has dimension {}, spec has {r}", u.len())));
    }
    if !spec.in_domain(u) {
        return Ok(DMatrix::zeros(r, r));
    }
    let psi = spec.psi(u);
    let k = spec.density(u);
    if k <= T::zero() {
        if psi > T::zero() {
            return Err(Error::SpecViolation {
                mark: u.iter().map(|x| x.as_f64()).collect(),
                reason: format!("k(u) = {k} while psi(u) = {psi} > 0"),
            });
        }
        return Ok(DMatrix::zeros(r, r));
    }
    let xi = spec.xi(u);
    if xi.nrows() != r || xi.ncols() != r {
        return Err(Error::Input(format!("xi returned a {}x{} matrix", xi.nrows(), xi.ncols())));
    }
    Ok(xi * (psi / k))
}

/// γ(f, g)(u) from the mark gradients of `f` and `g` at `u`.
pub fn gamma_of<T: Scalar>(
    spec: &LevyMeasureSpec<T>,
    grad_f: &DVector<T>,
    grad_g: &DVector<T>,
    u: &DVector<T>,
) -> Result<T> {
    let w = gamma_weight(spec, u)?;
    if grad_f.len() != w.nrows() || grad_g.len() != w.nrows() {
        return Err(Error::Input("gradient dimension does not match the mark space".into()));
    }
    Ok(grad_f.dot(&(w * grad_g)))
}

/// Default finite-difference step for a mark: max(1e-6, 1e-6 |u|).
pub fn default_mark_step<T: Scalar>(u: &DVector<T>) -> T {
    let base = T::lit(1e-6);
    let scaled = base * u.norm();
    if scaled > base {
        scaled
    } else {
        base
    }
}

/// Central-difference gradient of a scalar mark function.
pub fn mark_gradient_fd<T, F>(f: F, u: &DVector<T>, h: T) -> DVector<T>
where
    T: Scalar,
    F: Fn(&DVector<T>) -> T,
{
    let two = T::lit(2.0);
    DVector::from_iterator(
        u.len(),
        (0..u.len()).map(|i| {
            let mut plus = u.clone();
            let mut minus = u.clone();
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (two * h)
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// k > 0 on O
    Positivity,
    /// ψ ≤ k on O
    Domination,
    /// ψ = 0 off O
    Support,
    /// ξ symmetric
    Symmetry,
    /// ξ positive definite on O
    Ellipticity,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Positivity => "positivity",
            CheckKind::Domination => "domination",
            CheckKind::Support => "support",
            CheckKind::Symmetry => "symmetry",
            CheckKind::Ellipticity => "ellipticity",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeCheck {
    pub probe: usize,
    pub mark: Vec<f64>,
    pub check: CheckKind,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ProbeCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&ProbeCheck> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(
            s,
            "spec validation: {} ({} checks, {} failed)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len(),
            failed
        );
        if let Some(f) = self.first_failure() {
            let _ = writeln!(s, "first failure: probe {} at {:?}, {}: {}", f.probe, f.mark, f.check.as_str(), f.detail);
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "  probe {:>3} {:<12} {} {}",
                c.probe,
                c.check.as_str(),
                if c.pass { "ok  " } else { "FAIL" },
                c.detail
            );
        }
        s
    }

    /// Columns `probe, check, pass, detail`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let header = ["probe", "check", "pass", "detail"].map(String::from);
        let rows = self
            .checks
            .iter()
            .map(|c| vec![c.probe.to_string(), c.check.as_str().to_string(), c.pass.to_string(), c.detail.clone()]);
        write_rows(out, &header, rows)
    }
}

/// Checks the bottom-structure hypotheses at each probe mark.
pub fn validate_spec<T: Scalar>(spec: &LevyMeasureSpec<T>, probes: &[DVector<T>]) -> ValidationReport {
    let mut checks = Vec::new();
    for (i, u) in probes.iter().enumerate() {
        let mark: Vec<f64> = u.iter().map(|x| x.as_f64()).collect();
        let mut push = |check: CheckKind, pass: bool, detail: String| {
            checks.push(ProbeCheck { probe: i, mark: mark.clone(), check, pass, detail });
        };
        if u.len() != spec.dim() {
            push(CheckKind::Support, false, format!("probe dimension {} != {}", u.len(), spec.dim()));
            continue;
        }
        let psi = spec.psi_raw(u);
        if !spec.in_domain(u) {
            push(CheckKind::Support, psi == T::zero(), format!("psi = {psi} off O"));
            continue;
        }
        let k = spec.density(u);
        push(CheckKind::Positivity, k > T::zero(), format!("k = {k}"));
        push(CheckKind::Domination, psi <= k && psi >= T::zero(), format!("psi = {psi}, k = {k}"));
        let xi = spec.xi(u);
        let asym = (&xi - xi.transpose()).amax();
        let scale = xi.amax();
        let symmetric = asym <= T::default_epsilon() * T::lit(16.0) * (T::one() + scale);
        push(CheckKind::Symmetry, symmetric, format!("max asymmetry = {asym}"));
        let mut sym = (&xi + xi.transpose()) * T::lit(0.5);
        if spec.on_axes() {
            // Only the tangent direction of the support carries a derivative.
            let active: Vec<usize> = (0..u.len()).filter(|&i| u[i] != T::zero()).collect();
            sym = sym.select_rows(&active).select_columns(&active);
        }
        let min_eig = SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .fold(None, |m: Option<T>, v| Some(m.map_or(*v, |m| if *v < m { *v } else { m })))
            .unwrap_or(T::zero());
        push(CheckKind::Ellipticity, min_eig > T::zero(), format!("min eigenvalue = {min_eig}"));
    }
    ValidationReport { checks }
}
