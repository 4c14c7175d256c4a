//! Poisson functionals with analytic mark derivatives.
//!
//! Every driver path starts at zero and carries the configuration's
//! compensator drift.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::functional_calculus::engine::Functional;
use crate::levy_sim::{stochastic_integral, stochastic_integral_scalar, CadlagPath, JumpConfiguration};
use crate::scalar::Scalar;

fn check_time<T: Scalar>(t: T, config: &JumpConfiguration<T>) -> Result<()> {
    if t < T::zero() || t > config.horizon() {
        return Err(Error::Domain(format!("evaluation time {t} outside [0, {}]", config.horizon())));
    }
    Ok(())
}

fn check_mark_dim<T: Scalar>(expected: usize, config: &JumpConfiguration<T>) -> Result<()> {
    if config.mark_dim() != expected {
        return Err(Error::Input(format!(
            "functional expects {expected}-dimensional marks, configuration has {}",
            config.mark_dim()
        )));
    }
    Ok(())
}

/// F = Y_t.
#[derive(Debug, Clone)]
pub struct TerminalValue<T: Scalar> {
    t: T,
    dim: usize,
}

impl<T: Scalar> TerminalValue<T> {
    pub fn new(t: T, dim: usize) -> Self {
        Self { t, dim }
    }
}

impl<T: Scalar> Functional<T> for TerminalValue<T> {
    fn name(&self) -> &str {
        "terminal_value"
    }
    fn output_dim(&self) -> usize {
        self.dim
    }
    fn mark_dim(&self) -> usize {
        self.dim
    }
    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        check_mark_dim(self.dim, config)?;
        check_time(self.t, config)?;
        Ok(CadlagPath::from_config(config).value(self.t))
    }
    fn mark_derivative(&self, config: &JumpConfiguration<T>, index: usize) -> Option<Result<DMatrix<T>>> {
        let active = config.points()[index].time <= self.t;
        Some(Ok(if active { DMatrix::identity(self.dim, self.dim) } else { DMatrix::zeros(self.dim, self.dim) }))
    }
}

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
pub type VectorFn<T, R> = Arc<dyn Fn(&DVector<T>) -> R + Send + Sync>;

/// F = ∫₀ᵗ φ(Y_{s−}) dY_s for a scalar driver.
#[derive(Clone)]
pub struct StochasticIntegralPhi<T: Scalar> {
    name: String,
    t: T,
    phi: ScalarFn<T>,
    dphi: ScalarFn<T>,
}

impl<T: Scalar> std::fmt::Debug for StochasticIntegralPhi<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StochasticIntegralPhi").field("name", &self.name).field("t", &self.t).finish()
    }
}

impl<T: Scalar> StochasticIntegralPhi<T> {
    pub fn new(name: impl Into<String>, t: T, phi: ScalarFn<T>, dphi: ScalarFn<T>) -> Self {
        Self { name: name.into(), t, phi, dphi }
    }

    pub fn identity(t: T) -> Self {
        Self::new("stochastic_integral_phi[identity]", t, Arc::new(|y| y), Arc::new(|_| T::one()))
    }

    pub fn sine(t: T) -> Self {
        Self::new("stochastic_integral_phi[sin]", t, Arc::new(|y: T| y.sin()), Arc::new(|y: T| y.cos()))
    }

    /// φ(y) = a·y + b.
    pub fn affine(t: T, a: T, b: T) -> Self {
        Self::new("stochastic_integral_phi[affine]", t, Arc::new(move |y| a * y + b), Arc::new(move |_| a))
    }

    pub fn phi(&self, y: T) -> T {
        (self.phi)(y)
    }

    pub fn dphi(&self, y: T) -> T {
        (self.dphi)(y)
    }

    pub fn time(&self) -> T {
        self.t
    }
}

impl<T: Scalar> Functional<T> for StochasticIntegralPhi<T> {
    fn name(&self) -> &str {
        &self.name
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn mark_dim(&self) -> usize {
        1
    }
    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        check_mark_dim(1, config)?;
        check_time(self.t, config)?;
        let path = CadlagPath::from_config(config);
        let v = stochastic_integral_scalar(|y| self.phi(y), &path, self.t)?;
        Ok(DVector::from_element(1, v))
    }
    /// φ(Y_{α−}) + ∫_{]α,t]} φ′(Y_{s−}) dY_s at the jump time α.
    fn mark_derivative(&self, config: &JumpConfiguration<T>, index: usize) -> Option<Result<DMatrix<T>>> {
        let alpha = config.points()[index].time;
        if alpha > self.t {
            return Some(Ok(DMatrix::zeros(1, 1)));
        }
        let path = CadlagPath::from_config(config);
        let result = (|| {
            let after = stochastic_integral_scalar(|y| self.dphi(y), &path, self.t)?
                - stochastic_integral_scalar(|y| self.dphi(y), &path, alpha)?;
            Ok(DMatrix::from_element(1, 1, self.phi(path.left_limit(alpha)[0]) + after))
        })();
        Some(result)
    }
}

/// Jumps closer than this to −1 make the Doléans exponential singular.
pub const SINGULAR_JUMP_TOL: f64 = 1e-12;

/// F = (Y_t, Exp(Y)_t) with Exp(Y)_t = e^{Y_t} Π (1 + ΔY_s) e^{−ΔY_s}.
#[derive(Debug, Clone)]
pub struct DoleansPair<T: Scalar> {
    t: T,
}

impl<T: Scalar> DoleansPair<T> {
    pub fn new(t: T) -> Self {
        Self { t }
    }

    fn check_jumps(&self, config: &JumpConfiguration<T>) -> Result<()> {
        for (i, p) in config.points().iter().enumerate() {
            let v = T::one() + p.mark[0];
            if v.abs() < T::lit(SINGULAR_JUMP_TOL) {
                return Err(Error::SingularJump { index: i, value: v.as_f64() });
            }
        }
        Ok(())
    }

    pub fn exponential(&self, config: &JumpConfiguration<T>) -> Result<T> {
        self.check_jumps(config)?;
        let path = CadlagPath::from_config(config);
        let y = path.value(self.t)[0];
        let product = path
            .jumps()
            .filter(|(s, _)| *s <= self.t)
            .fold(T::one(), |acc, (_, j)| acc * (T::one() + j[0]) * (-j[0]).exp());
        Ok(y.exp() * product)
    }
}

impl<T: Scalar> Functional<T> for DoleansPair<T> {
    fn name(&self) -> &str {
        "doleans_pair"
    }
    fn output_dim(&self) -> usize {
        2
    }
    fn mark_dim(&self) -> usize {
        1
    }
    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        check_mark_dim(1, config)?;
        check_time(self.t, config)?;
        let y = CadlagPath::from_config(config).value(self.t)[0];
        Ok(DVector::from_vec(vec![y, self.exponential(config)?]))
    }
    /// (1, Exp(Y)_t (1 + ΔY_j)⁻¹)ᵀ.
    fn mark_derivative(&self, config: &JumpConfiguration<T>, index: usize) -> Option<Result<DMatrix<T>>> {
        let p = &config.points()[index];
        if p.time > self.t {
            return Some(Ok(DMatrix::zeros(2, 1)));
        }
        Some(
            self.exponential(config).map(|e| DMatrix::from_column_slice(2, 1, &[T::one(), e / (T::one() + p.mark[0])])),
        )
    }
}

/// Which side of an event time attains the running supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SupSide {
    LeftLimit,
    Value,
}

/// F = sup_{s ≤ t} (Y_s + K_s) for an independent càdlàg K.
#[derive(Debug, Clone)]
pub struct RunningSup<T: Scalar> {
    t: T,
    aux: Option<CadlagPath<T>>,
}

impl<T: Scalar> RunningSup<T> {
    pub fn new(t: T) -> Self {
        Self { t, aux: None }
    }

    /// K must be one-dimensional; it is piecewise affine between its jumps.
    pub fn with_aux(t: T, aux: CadlagPath<T>) -> Result<Self> {
        if aux.dim() != 1 {
            return Err(Error::Input("auxiliary process must be one-dimensional".into()));
        }
        Ok(Self { t, aux: Some(aux) })
    }

    fn aux_value(&self, s: T) -> T {
        self.aux.as_ref().map_or(T::zero(), |k| k.value(s)[0])
    }

    fn aux_left(&self, s: T) -> T {
        self.aux.as_ref().map_or(T::zero(), |k| k.left_limit(s)[0])
    }

    /// Supremum and the last (time, side) attaining it.
    ///
    /// H is affine between event times, so the supremum is attained among
    /// the values and left limits at events, at 0 and at t. Ties go to the
    /// latest candidate, a left limit ranking before the value at the same
    /// time.
    pub fn argmax(&self, config: &JumpConfiguration<T>) -> Result<(T, T, SupSide)> {
        check_mark_dim(1, config)?;
        check_time(self.t, config)?;
        let path = CadlagPath::from_config(config);
        let mut events: Vec<T> = path.jump_times().iter().copied().filter(|s| *s <= self.t).collect();
        if let Some(k) = &self.aux {
            events.extend(k.jump_times().iter().copied().filter(|s| *s > T::zero() && *s <= self.t));
        }
        events.push(self.t);
        events.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        events.dedup();

        let mut best = (path.value(T::zero())[0] + self.aux_value(T::zero()), T::zero(), SupSide::Value);
        for s in events {
            if s <= T::zero() {
                continue;
            }
            let left = path.left_limit(s)[0] + self.aux_left(s);
            if left >= best.0 {
                best = (left, s, SupSide::LeftLimit);
            }
            let value = path.value(s)[0] + self.aux_value(s);
            if value >= best.0 {
                best = (value, s, SupSide::Value);
            }
        }
        Ok(best)
    }
}

impl<T: Scalar> Functional<T> for RunningSup<T> {
    fn name(&self) -> &str {
        "running_sup"
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn mark_dim(&self) -> usize {
        1
    }
    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        Ok(DVector::from_element(1, self.argmax(config)?.0))
    }
    /// 1 when the maximizing candidate already contains the jump, else 0.
    fn mark_derivative(&self, config: &JumpConfiguration<T>, index: usize) -> Option<Result<DMatrix<T>>> {
        let tj = config.points()[index].time;
        Some(self.argmax(config).map(|(_, tau, side)| {
            let includes = match side {
                SupSide::Value => tj <= tau,
                SupSide::LeftLimit => tj < tau,
            };
            DMatrix::from_element(1, 1, if includes && tj <= self.t { T::one() } else { T::zero() })
        }))
    }
}

/// Z_t ∈ ℝ³ solving the degenerate system driven by (Y¹, Y²):
/// Z¹ = z₁ + Y¹, Z² = z₂ + ∫2Z¹_{s−}dY¹ + Y², Z³ = z₃ + ∫Z¹_{s−}dY¹ + 2Y².
#[derive(Debug, Clone)]
pub struct DegenerateSdeZ<T: Scalar> {
    t: T,
    start: [T; 3],
}

impl<T: Scalar> DegenerateSdeZ<T> {
    pub fn new(t: T, start: [T; 3]) -> Self {
        Self { t, start }
    }

    pub fn from_origin(t: T) -> Self {
        Self::new(t, [T::zero(); 3])
    }

    /// Z¹_t − ΔY¹_j, the coefficient appearing in the per-jump derivative.
    pub fn shifted_first(&self, config: &JumpConfiguration<T>, index: usize) -> T {
        let path = CadlagPath::from_config(config);
        self.start[0] + path.value(self.t)[0] - config.points()[index].mark[0]
    }
}

impl<T: Scalar> Functional<T> for DegenerateSdeZ<T> {
    fn name(&self) -> &str {
        "degenerate_sde_z"
    }
    fn output_dim(&self) -> usize {
        3
    }
    fn mark_dim(&self) -> usize {
        2
    }
    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        check_mark_dim(2, config)?;
        check_time(self.t, config)?;
        let path = CadlagPath::from_config(config);
        let z1 = self.start[0];
        // ∫ Z¹_{s−} dY¹_s
        let integral = stochastic_integral(
            |y: &DVector<T>| DMatrix::from_row_slice(1, 2, &[z1 + y[0], T::zero()]),
            &path,
            self.t,
            1,
        )?[0];
        let y = path.value(self.t);
        let two = T::lit(2.0);
        Ok(DVector::from_vec(vec![
            z1 + y[0],
            self.start[1] + two * integral + y[1],
            self.start[2] + integral + two * y[1],
        ]))
    }
    fn mark_derivative(&self, config: &JumpConfiguration<T>, index: usize) -> Option<Result<DMatrix<T>>> {
        if config.points()[index].time > self.t {
            return Some(Ok(DMatrix::zeros(3, 2)));
        }
        let c = self.shifted_first(config, index);
        let (zero, one, two) = (T::zero(), T::one(), T::lit(2.0));
        Some(Ok(DMatrix::from_row_slice(3, 2, &[one, zero, two * c, one, c, two])))
    }
}

/// H = Φ(F) for a scalar Φ with known gradient; the mark derivative
/// follows the chain rule ∇Φ(F)ᵀ ∂F/∂U_j.
pub struct Composed<T: Scalar, F> {
    inner: F,
    name: String,
    phi: VectorFn<T, T>,
    grad: VectorFn<T, DVector<T>>,
}

impl<T: Scalar, F: Functional<T>> Composed<T, F> {
    pub fn new(inner: F, phi: VectorFn<T, T>, grad: VectorFn<T, DVector<T>>) -> Self {
        let name = format!("composed[{}]", inner.name());
        Self { inner, name, phi, grad }
    }

    /// Φ(x) = ½ xᵀ A x + bᵀ x, ∇Φ(x) = ½ (A + Aᵀ) x + b.
    pub fn quadratic(inner: F, a: DMatrix<T>, b: DVector<T>) -> Self {
        let a2 = a.clone();
        let b2 = b.clone();
        let half = T::lit(0.5);
        Self::new(
            inner,
            Arc::new(move |x: &DVector<T>| half * x.dot(&(&a * x)) + b.dot(x)),
            Arc::new(move |x: &DVector<T>| (&a2 + a2.transpose()) * x * half + &b2),
        )
    }

    pub fn gradient_at(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        Ok((self.grad)(&self.inner.evaluate(config)?))
    }
}

impl<T: Scalar, F: Functional<T>> Functional<T> for Composed<T, F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn mark_dim(&self) -> usize {
        self.inner.mark_dim()
    }
    fn evaluate(&self, config: &JumpConfiguration<T>) -> Result<DVector<T>> {
        Ok(DVector::from_element(1, (self.phi)(&self.inner.evaluate(config)?)))
    }
    fn mark_derivative(&self, config: &JumpConfiguration<T>, index: usize) -> Option<Result<DMatrix<T>>> {
        let inner = self.inner.mark_derivative(config, index)?;
        Some(inner.and_then(|d| {
            let row = self.gradient_at(config)?.transpose() * d;
            Ok(DMatrix::from_row_slice(1, row.len(), row.as_slice()))
        }))
    }
}
