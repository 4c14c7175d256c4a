//! Turns parsed config sections into core objects.

use lentlab_core::functional_calculus::{
    DegenerateSdeZ, DoleansPair, Functional, RunningSup, StochasticIntegralPhi, TerminalValue,
};
use lentlab_core::jump_sde::{DegenerateZModel, LinearModel, LinearScalarModel, SdeModel};
use lentlab_core::LevyMeasureSpec64;
use nalgebra::{DMatrix, DVector};

use crate::config::{Family, FunctionalConfig, ModelConfig, Phi, SpecConfig};
use crate::error::CliError;

pub fn build_spec(c: &SpecConfig) -> Result<LevyMeasureSpec64, CliError> {
    let one = || -> Result<LevyMeasureSpec64, CliError> {
        let spec = match c.family {
            Family::CompoundPoisson { lambda, low, high, gap } => {
                LevyMeasureSpec64::compound_poisson_uniform(lambda, low, high, gap)?
            }
            Family::TruncatedPower { beta, epsilon_cut } => LevyMeasureSpec64::truncated_power(beta, epsilon_cut)?,
        };
        Ok(if c.compensated { spec } else { spec.uncompensated() })
    };
    if c.axes == 1 {
        return one();
    }
    let components = (0..c.axes).map(|_| one()).collect::<Result<Vec<_>, _>>()?;
    Ok(LevyMeasureSpec64::independent_axes(components)?)
}

pub fn build_functional(c: &FunctionalConfig) -> Box<dyn Functional<f64>> {
    match *c {
        FunctionalConfig::TerminalValue { t } => Box::new(TerminalValue::new(t, 1)),
        FunctionalConfig::StochasticIntegralPhi { t, phi } => Box::new(match phi {
            Phi::Identity => StochasticIntegralPhi::identity(t),
            Phi::Sine => StochasticIntegralPhi::sine(t),
            Phi::Affine { a, b } => StochasticIntegralPhi::affine(t, a, b),
        }),
        FunctionalConfig::DoleansPair { t } => Box::new(DoleansPair::new(t)),
        FunctionalConfig::RunningSup { t } => Box::new(RunningSup::new(t)),
        FunctionalConfig::DegenerateSdeZ { t, start } => Box::new(DegenerateSdeZ::new(t, start)),
    }
}

pub fn build_model(c: &ModelConfig) -> Result<Box<dyn SdeModel<f64>>, CliError> {
    Ok(match *c {
        ModelConfig::LinearScalar { a, x0 } => Box::new(LinearScalarModel::new(a, x0)),
        ModelConfig::Linear { matrix, x0 } => {
            Box::new(LinearModel::new(DMatrix::from_row_slice(2, 2, &matrix), DVector::from_column_slice(&x0))?)
        }
        ModelConfig::DegenerateZ { start } => Box::new(DegenerateZModel::new(start)),
    })
}

/// Probe marks for spec validation: both signs across scales on each axis,
/// plus one off-axis point when there are several axes.
pub fn default_probes(dim: usize) -> Vec<DVector<f64>> {
    let scales = [1e-3, 5e-3, 2e-2, 0.1, 0.5, 0.99, 2.0];
    let mut probes = Vec::new();
    for k in 0..dim {
        for s in scales {
            for sign in [-1.0, 1.0] {
                let mut u = DVector::zeros(dim);
                u[k] = sign * s;
                probes.push(u);
            }
        }
    }
    if dim > 1 {
        probes.push(DVector::from_element(dim, 0.3));
    }
    probes
}

pub const SPEC_FAMILIES: [(&str, &str); 2] = [
    ("compound-poisson", "λ·Uniform[low, high] without (-gap, gap); keys lambda, low, high, gap"),
    ("truncated-power", "|u|^(-1-β) on 0 < |u| < 1, sampled above epsilon_cut; keys beta in (0, 2), epsilon_cut"),
];

pub const FUNCTIONALS: [(&str, &str); 5] = [
    ("terminal_value", "Y_t; key t"),
    ("stochastic_integral_phi", "∫ φ(Y_s-) dY_s; keys t, phi = identity | sine | affine (a, b)"),
    ("doleans_pair", "(Y_t, E(Y)_t), Doléans exponential; key t"),
    ("running_sup", "sup_{s ≤ t} Y_s; key t"),
    ("degenerate_sde_z", "Z¹ = Y¹, Z² = ∫2Z¹ dY¹ + Y², Z³ = ∫Z¹ dY¹ + 2Y²; keys t, start; needs axes = 2"),
];

pub const MODELS: [(&str, &str); 3] = [
    ("linear_scalar", "dX = a X dY; keys a, x0"),
    ("linear", "dX = A X dY in two dimensions; keys matrix (row-major), x0"),
    ("degenerate_z", "jump SDE with c(x, u) = (u₁, 2x₁u₁ + u₂, x₁u₁ + 2u₂); key start; needs axes = 2"),
];
