//! Lent particle evaluation of Γ[F] = ∫∫ ε⁻γ[ε⁺F] dN and its
//! finite-difference oracle.
//!
//! On a finite configuration the integral against N is the sum over the
//! configuration's own points. At an existing point j, ε⁻γ[ε⁺F] is γ of
//! the derivative of F in the mark U_j with every other point held fixed:
//! adding the particle creates the new argument, differentiating in it and
//! removing the particle leaves that derivative evaluated on the original
//! configuration.

use nalgebra::{DMatrix, DVector};

use crate::bottom_structure::gamma_weight;
use crate::error::{Error, Result};
use crate::functional_calculus::gamma::{GammaMatrix, JumpContribution, Provenance};
use crate::levy_sim::{JumpConfiguration, LevyMeasureSpec};
use crate::scalar::Scalar;

/// A Poisson functional F: configuration → ℝᵈ.
pub trait Functional<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn output_dim(&self) -> usize;

    fn mark_dim(&self) -> usize;

    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>>;

    /// Analytic ∂F/∂U_j (d×r) on the configuration with the jump present.
    fn mark_derivative(&self, _config: &JumpConfiguration<T>, _index: usize) -> Option<Result<DMatrix<T>>> {
        None
    }
}

impl<T: Scalar, F: Functional<T> + ?Sized> Functional<T> for &F {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn mark_dim(&self) -> usize {
        (**self).mark_dim()
    }
    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        (**self).evaluate(config)
    }
    fn mark_derivative(&self, config: &JumpConfiguration<T>, index: usize) -> Option<Result<DMatrix<T>>> {
        (**self).mark_derivative(config, index)
    }
}

impl<T: Scalar, F: Functional<T> + ?Sized> Functional<T> for Box<F> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn mark_dim(&self) -> usize {
        (**self).mark_dim()
    }
    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        (**self).evaluate(config)
    }
    fn mark_derivative(&self, config: &JumpConfiguration<T>, index: usize) -> Option<Result<DMatrix<T>>> {
        (**self).mark_derivative(config, index)
    }
}

/// Central differences in the marks: step `base_step · max(1, |U_j|)`,
/// with a Richardson step when the h and h/2 estimates disagree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdRule {
    pub base_step: f64,
    pub richardson_tol: f64,
}

impl Default for FdRule {
    fn default() -> Self {
        Self { base_step: 1e-5, richardson_tol: 1e-4 }
    }
}

impl FdRule {
    pub fn with_step(base_step: f64) -> Self {
        Self { base_step, ..Self::default() }
    }

    pub fn step_for<T: Scalar>(&self, mark: &DVector<T>) -> T {
        let n = mark.norm();
        T::lit(self.base_step) * if n > T::one() { n } else { T::one() }
    }

    /// Jacobian of `eval` (ℝʳ → ℝᵈ) at `mark`, one column per mark coordinate.
    pub fn jacobian<T, E>(&self, mark: &DVector<T>, out_dim: usize, eval: E) -> Result<DMatrix<T>>
    where
        T: Scalar,
        E: Fn(&DVector<T>) -> Result<DVector<T>>,
    {
        if !(self.base_step > 0.0) {
            return Err(Error::Input(format!("finite-difference step must be positive, got {}", self.base_step)));
        }
        let h = self.step_for(mark);
        let two = T::lit(2.0);
        let central = |i: usize, h: T| -> Result<DVector<T>> {
            let mut plus = mark.clone();
            let mut minus = mark.clone();
            plus[i] += h;
            minus[i] -= h;
            Ok((eval(&plus)? - eval(&minus)?) / (two * h))
        };
        let mut jac = DMatrix::zeros(out_dim, mark.len());
        for i in 0..mark.len() {
            let coarse = central(i, h)?;
            let fine = central(i, h / two)?;
            let diff = (&coarse - &fine).amax();
            let scale = fine.amax();
            let floor = T::lit(1e-12);
            let col = if diff > T::lit(self.richardson_tol) * if scale > floor { scale } else { floor } {
                (fine * T::lit(4.0) - coarse) / T::lit(3.0)
            } else {
                coarse
            };
            if col.len() != out_dim {
                return Err(Error::Input(format!("functional returned dimension {}, expected {out_dim}", col.len())));
            }
            jac.set_column(i, &col);
        }
        Ok(jac)
    }
}

/// ∂F/∂U_j by central differences with full re-evaluation of F.
pub fn mark_derivative_fd<T: Scalar, F: Functional<T> + ?Sized>(
    functional: &F,
    config: &JumpConfiguration<T>,
    index: usize,
    rule: &FdRule,
) -> Result<DMatrix<T>> {
    let mark = config.points()[index].mark.clone();
    rule.jacobian(&mark, functional.output_dim(), |m| functional.evaluate(&config.with_mark(index, m.clone())))
}

fn check_dims<T: Scalar, F: Functional<T> + ?Sized>(
    functional: &F,
    config: &JumpConfiguration<T>,
    spec: &LevyMeasureSpec<T>,
) -> Result<()> {
    if functional.mark_dim() != config.mark_dim() || spec.dim() != config.mark_dim() {
        return Err(Error::Input(format!(
            "mark dimensions disagree: functional {}, configuration {}, spec {}",
            functional.mark_dim(),
            config.mark_dim(),
            spec.dim()
        )));
    }
    Ok(())
}

fn assemble<T: Scalar, D>(
    functional_dim: usize,
    config: &JumpConfiguration<T>,
    spec: &LevyMeasureSpec<T>,
    provenance: Provenance,
    mut derivative: D,
) -> Result<GammaMatrix<T>>
where
    D: FnMut(usize) -> Result<DMatrix<T>>,
{
    let mut contributions = Vec::with_capacity(config.len());
    for (j, p) in config.points().iter().enumerate() {
        let d = derivative(j)?;
        if d.nrows() != functional_dim || d.ncols() != config.mark_dim() {
            return Err(Error::NumericAtJump {
                index: j,
                detail: format!("derivative has shape {}x{}", d.nrows(), d.ncols()),
            });
        }
        if d.iter().any(|x| !x.is_finite_value()) {
            return Err(Error::NumericAtJump { index: j, detail: "non-finite mark derivative".into() });
        }
        let w = gamma_weight(spec, &p.mark)?;
        let c = &d * w * d.transpose();
        let c = (&c + c.transpose()) * T::lit(0.5);
        contributions.push(JumpContribution { index: j, time: p.time, matrix: c });
    }
    Ok(GammaMatrix::from_contributions(functional_dim, provenance, contributions))
}

/// Γ[F] = Σ_j D_j W(U_j) D_jᵀ, D_j analytic when the functional provides
/// it and finite differences otherwise.
pub fn lent_particle_gamma<T: Scalar, F: Functional<T> + ?Sized>(
    functional: &F,
    config: &JumpConfiguration<T>,
    spec: &LevyMeasureSpec<T>,
) -> Result<GammaMatrix<T>> {
    lent_particle_gamma_with(functional, config, spec, &FdRule::default())
}

pub fn lent_particle_gamma_with<T: Scalar, F: Functional<T> + ?Sized>(
    functional: &F,
    config: &JumpConfiguration<T>,
    spec: &LevyMeasureSpec<T>,
    rule: &FdRule,
) -> Result<GammaMatrix<T>> {
    check_dims(functional, config, spec)?;
    assemble(functional.output_dim(), config, spec, Provenance::Engine, |j| {
        match functional.mark_derivative(config, j) {
            Some(d) => d,
            None => mark_derivative_fd(functional, config, j, rule),
        }
    })
}

/// Same sum with every D_j from central differences of full re-evaluations.
pub fn oracle_gamma<T: Scalar, F: Functional<T> + ?Sized>(
    functional: &F,
    config: &JumpConfiguration<T>,
    spec: &LevyMeasureSpec<T>,
    h: f64,
) -> Result<GammaMatrix<T>> {
    check_dims(functional, config, spec)?;
    let rule = FdRule::with_step(h);
    assemble(functional.output_dim(), config, spec, Provenance::Oracle, |j| {
        mark_derivative_fd(functional, config, j, &rule)
    })
}
