use nalgebra::{DMatrix, DVector};

use super::driver::ZPath;
use super::model::SdeModel;
use super::solver::{solve_sde, terminal_with_step, EventKind, FlowState, StepControl, Trajectory};
use crate::bottom_structure::gamma_weight;
use crate::error::{Error, Result};
use crate::functional_calculus::{FdRule, GammaMatrix, JumpContribution, Provenance};
use crate::levy_sim::{JumpConfiguration, LevyMeasureSpec};
use crate::scalar::Scalar;

fn symmetrize<T: Scalar>(m: DMatrix<T>) -> DMatrix<T> {
    (&m + m.transpose()) * T::lit(0.5)
}

fn psd_or_internal<T: Scalar>(g: GammaMatrix<T>) -> Result<GammaMatrix<T>> {
    match g.check_psd() {
        Ok(()) => Ok(g),
        Err(e) => Err(Error::Internal(format!("Γ[X_t] is not PSD: {e}"))),
    }
}

/// Γ[X_t] = K_t [Σ_α K̄_α ∇_u c W(u) ∇_u cᵀ K̄_αᵀ] K_tᵀ, with K̄_α the value
/// of K̄ just after the jump at α on the original path, which is the
/// flow with the particle present and then taken back.
pub fn sde_gamma<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    trajectory: &Trajectory<T>,
    flow: &FlowState<T>,
    config: &JumpConfiguration<T>,
    spec: &LevyMeasureSpec<T>,
) -> Result<GammaMatrix<T>> {
    if spec.dim() != model.mark_dim() {
        return Err(Error::Input(format!(
            "spec dimension {} differs from model mark dimension {}",
            spec.dim(),
            model.mark_dim()
        )));
    }
    if flow.records().len() != trajectory.events().len() {
        return Err(Error::Input("flow state does not match the trajectory".into()));
    }
    if !flow.has_inverse() {
        return Err(Error::Input("flow state lacks K̄; compute it with inverse_flow".into()));
    }
    let d = model.state_dim();
    let kt = flow.terminal_k();
    let mut contributions = Vec::new();
    for (event, record) in trajectory.events().iter().zip(flow.records()) {
        let EventKind::NJump(j) = event.kind else { continue };
        let u = &config.points()[j].mark;
        let left = &event.left;
        let grad = match model.jump_mark_gradient(event.time, left, u) {
            Some(g) => g,
            None => FdRule::default().jacobian(u, d, |v| Ok(model.jump(event.time, left, v)))?,
        };
        if grad.nrows() != d || grad.ncols() != model.mark_dim() {
            return Err(Error::Input(format!("mark gradient at jump {j} has shape {}x{}", grad.nrows(), grad.ncols())));
        }
        let w = gamma_weight(spec, u)?;
        let kbar = record.kbar.as_ref().expect("checked above");
        let b = kt * kbar * grad;
        let m = symmetrize(&b * w * b.transpose());
        if m.iter().any(|x| !x.is_finite_value()) {
            return Err(Error::NumericAtJump { index: j, detail: "non-finite contribution".into() });
        }
        contributions.push(JumpContribution { index: j, time: event.time, matrix: m });
    }
    psd_or_internal(GammaMatrix::from_contributions(d, Provenance::Engine, contributions))
}

/// Σ_j D_j W(U_j) D_jᵀ with D_j = ∂X_t/∂U_j from full re-solves under
/// central differences in each mark; the drift step is fixed to the one
/// accepted for the unperturbed configuration.
pub fn sde_gamma_oracle<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
    spec: &LevyMeasureSpec<T>,
    rule: &FdRule,
    control: &StepControl,
) -> Result<GammaMatrix<T>> {
    if spec.dim() != model.mark_dim() {
        return Err(Error::Input(format!(
            "spec dimension {} differs from model mark dimension {}",
            spec.dim(),
            model.mark_dim()
        )));
    }
    let base = solve_sde(model, config, z, control)?;
    let drift = base.drift_handling();
    let d = model.state_dim();
    let initial = model.initial();
    let mut contributions = Vec::new();
    for (j, p) in config.points().iter().enumerate() {
        let eval = |m: &DVector<T>| terminal_with_step(model, &config.with_mark(j, m.clone()), z, &initial, drift);
        let dj = rule.jacobian(&p.mark, d, eval)?;
        let w = gamma_weight(spec, &p.mark)?;
        contributions.push(JumpContribution { index: j, time: p.time, matrix: symmetrize(&dj * w * dj.transpose()) });
    }
    Ok(GammaMatrix::from_contributions(d, Provenance::Oracle, contributions))
}

/// Solves, builds K and K̄, and evaluates Γ[X_t] in one call.
pub fn solve_and_gamma<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
    spec: &LevyMeasureSpec<T>,
    control: &StepControl,
) -> Result<(Trajectory<T>, FlowState<T>, GammaMatrix<T>)> {
    let trajectory = solve_sde(model, config, z, control)?;
    let flow = super::solver::inverse_flow(model, &trajectory, config, z)?;
    let gamma = sde_gamma(model, &trajectory, &flow, config, spec)?;
    Ok((trajectory, flow, gamma))
}
