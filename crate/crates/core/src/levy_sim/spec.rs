use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type MarkFn<T, R> = Arc<dyn Fn(&DVector<T>) -> R + Send + Sync>;

/// Draws marks from the normalized restriction of ν to `{|u| > ε_cut}`.
pub trait MarkSampler<T: Scalar>: Send + Sync {
    /// ν({|u| > ε_cut}), the intensity of the sampled jumps per unit time.
    fn truncated_mass(&self) -> T;

    /// ∫_{|u| > ε_cut} u ν(du); drift removed by the compensated integral.
    fn first_moment(&self) -> DVector<T>;

    fn sample_mark(&self, rng: &mut dyn RngCore) -> Result<DVector<T>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TotalMass<T> {
    Finite(T),
    Infinite,
}

/// The bottom measure ν = k dx on ℝʳ together with the data of the
/// bottom carré du champ: open set `O`, dominated weight ψ and
/// coefficient field ξ.
#[derive(Clone)]
pub struct LevyMeasureSpec<T: Scalar> {
    pub(crate) name: String,
    pub(crate) dim: usize,
    pub(crate) density: MarkFn<T, T>,
    pub(crate) domain: MarkFn<T, bool>,
    pub(crate) psi: MarkFn<T, T>,
    pub(crate) xi: MarkFn<T, DMatrix<T>>,
    pub(crate) total_mass: TotalMass<T>,
    pub(crate) truncation_cut: T,
    pub(crate) compensated: bool,
    /// Marks live on the coordinate axes; ξ is only required to be
    /// elliptic along the active axis.
    pub(crate) on_axes: bool,
    pub(crate) sampler: Arc<dyn MarkSampler<T>>,
}

impl<T: Scalar> fmt::Debug for LevyMeasureSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyMeasureSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("total_mass", &self.total_mass)
            .field("truncation_cut", &self.truncation_cut)
            .field("compensated", &self.compensated)
            .finish_non_exhaustive()
    }
}

/// Coefficient fields ξ used by the built-in families.
pub mod coefficient {
    use super::*;

    /// ξ(u) = diag(u₁², …, u_r²), giving γ[f] = Σ u_i² (∂_i f)² ψ/k.
    pub fn squared_coordinates<T: Scalar>() -> MarkFn<T, DMatrix<T>> {
        Arc::new(|u: &DVector<T>| DMatrix::from_diagonal(&u.map(|x| x * x)))
    }

    /// ξ(u) = |u|² I, the choice that makes γ[f] = (ψ/k) Σu_i² Σ(∂_i f)².
    pub fn radial_squared<T: Scalar>() -> MarkFn<T, DMatrix<T>> {
        Arc::new(|u: &DVector<T>| DMatrix::identity(u.len(), u.len()) * u.norm_squared())
    }

    pub fn identity<T: Scalar>() -> MarkFn<T, DMatrix<T>> {
        Arc::new(|u: &DVector<T>| DMatrix::identity(u.len(), u.len()))
    }
}

impl<T: Scalar> LevyMeasureSpec<T> {
    /// Assembles a spec from its parts. `truncation_cut` is ignored for
    /// sampling when the mass is finite.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        density: MarkFn<T, T>,
        domain: MarkFn<T, bool>,
        psi: MarkFn<T, T>,
        xi: MarkFn<T, DMatrix<T>>,
        total_mass: TotalMass<T>,
        truncation_cut: T,
        sampler: Arc<dyn MarkSampler<T>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Configuration("mark dimension must be positive".into()));
        }
        if truncation_cut < T::zero() || !truncation_cut.is_finite_value() {
            return Err(Error::Configuration(format!(
                "truncation cut must be finite and nonnegative, got {truncation_cut}"
            )));
        }
        if let TotalMass::Finite(m) = total_mass {
            if m < T::zero() || !m.is_finite_value() {
                return Err(Error::Configuration(format!("finite total mass must be >= 0, got {m}")));
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            density,
            domain,
            psi,
            xi,
            total_mass,
            truncation_cut,
            compensated: true,
            on_axes: false,
            sampler,
        })
    }

    /// Drive paths by the raw sum of marks instead of the compensated integral.
    pub fn uncompensated(mut self) -> Self {
        self.compensated = false;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_mass(&self) -> TotalMass<T> {
        self.total_mass
    }

    pub fn truncation_cut(&self) -> T {
        self.truncation_cut
    }

    pub fn on_axes(&self) -> bool {
        self.on_axes
    }

    pub fn is_compensated(&self) -> bool {
        self.compensated
    }

    pub fn density(&self, u: &DVector<T>) -> T {
        (self.density)(u)
    }

    pub fn in_domain(&self, u: &DVector<T>) -> bool {
        (self.domain)(u)
    }

    /// ψ(u), forced to zero off `O`.
    pub fn psi(&self, u: &DVector<T>) -> T {
        if self.in_domain(u) {
            (self.psi)(u)
        } else {
            T::zero()
        }
    }

    /// Raw ψ callback, without the off-`O` convention; used by validation.
    pub(crate) fn psi_raw(&self, u: &DVector<T>) -> T {
        (self.psi)(u)
    }

    pub fn xi(&self, u: &DVector<T>) -> DMatrix<T> {
        (self.xi)(u)
    }

    pub fn sampler(&self) -> &dyn MarkSampler<T> {
        self.sampler.as_ref()
    }

    /// Intensity of the sampled (truncated) jumps per unit time.
    pub fn sampled_intensity(&self) -> Result<T> {
        if self.total_mass == TotalMass::Infinite && self.truncation_cut <= T::zero() {
            return Err(Error::Configuration("infinite-activity measure requires a positive truncation cut".into()));
        }
        let mass = self.sampler.truncated_mass();
        if !mass.is_finite_value() || mass < T::zero() {
            return Err(Error::Configuration(format!("truncated mass is not finite: {mass}")));
        }
        Ok(mass)
    }

    /// Per-unit-time drift subtracted from the mark sum.
    pub fn compensator_drift(&self) -> DVector<T> {
        if self.compensated {
            self.sampler.first_moment()
        } else {
            DVector::zeros(self.dim)
        }
    }

    /// Finite-activity compound Poisson with intensity `lambda` and marks
    /// uniform on `[low, high]` minus the gap `(-gap, gap)`.
    pub fn compound_poisson_uniform(lambda: T, low: T, high: T, gap: T) -> Result<Self> {
        if lambda < T::zero() || !lambda.is_finite_value() {
            return Err(Error::Configuration(format!("lambda must be >= 0, got {lambda}")));
        }
        if !(low < high) {
            return Err(Error::Configuration(format!("empty mark interval [{low}, {high}]")));
        }
        if gap < T::zero() {
            return Err(Error::Configuration(format!("gap must be >= 0, got {gap}")));
        }
        let law = UniformMarks::new(low, high, gap);
        let length = law.length();
        if length <= T::zero() && lambda > T::zero() {
            return Err(Error::Sampler("mark law has empty support".into()));
        }
        let k = if length > T::zero() { lambda / length } else { T::zero() };
        let support = law.clone();
        let domain: MarkFn<T, bool> = Arc::new(move |u: &DVector<T>| support.contains_open(u[0]));
        let inside = law.clone();
        let density: MarkFn<T, T> =
            Arc::new(move |u: &DVector<T>| if inside.contains_closed(u[0]) { k } else { T::zero() });
        let psi_law = law.clone();
        let psi: MarkFn<T, T> = Arc::new(move |u: &DVector<T>| if psi_law.contains_open(u[0]) { k } else { T::zero() });
        let sampler = CompoundPoissonSampler { lambda, law };
        Self::new(
            "compound-poisson",
            1,
            density,
            domain,
            psi,
            coefficient::squared_coordinates(),
            TotalMass::Finite(lambda),
            T::zero(),
            Arc::new(sampler),
        )
    }

    /// Symmetric infinite-activity measure k(x) = |x|^{-1-β} on
    /// `O = {0 < |x| < 1}`, sampled on `{ε_cut < |x| < 1}`.
    pub fn truncated_power(beta: T, truncation_cut: T) -> Result<Self> {
        if !(beta > T::zero() && beta < T::lit(2.0)) {
            return Err(Error::Configuration(format!("beta must lie in (0, 2), got {beta}")));
        }
        if !(truncation_cut > T::zero() && truncation_cut < T::one()) {
            return Err(Error::Configuration(format!("epsilon_cut must lie in (0, 1), got {truncation_cut}")));
        }
        let in_o = |x: T| x != T::zero() && x.abs() < T::one();
        let density: MarkFn<T, T> = Arc::new(move |u: &DVector<T>| {
            let x = u[0];
            if in_o(x) {
                x.abs().powf(-(T::one() + beta))
            } else {
                T::zero()
            }
        });
        let psi = density.clone();
        let domain: MarkFn<T, bool> = Arc::new(move |u: &DVector<T>| in_o(u[0]));
        Self::new(
            "truncated-power",
            1,
            density,
            domain,
            psi,
            coefficient::squared_coordinates(),
            TotalMass::Infinite,
            truncation_cut,
            Arc::new(PowerSampler { beta, cut: truncation_cut }),
        )
    }

    /// Joint measure of independent one-dimensional components placed on
    /// the coordinate axes of ℝʳ: a mark has exactly one nonzero entry.
    pub fn independent_axes(components: Vec<LevyMeasureSpec<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Configuration("independent_axes needs at least one component".into()));
        }
        if let Some(bad) = components.iter().find(|c| c.dim != 1) {
            return Err(Error::Configuration(format!("axis component {} is not one-dimensional", bad.name)));
        }
        let r = components.len();
        let parts = Arc::new(components);
        let axis_of = |u: &DVector<T>| -> Option<usize> {
            let mut nonzero = u.iter().enumerate().filter(|(_, x)| **x != T::zero());
            match (nonzero.next(), nonzero.next()) {
                (Some((i, _)), None) => Some(i),
                _ => None,
            }
        };
        let p = parts.clone();
        let density: MarkFn<T, T> = Arc::new(move |u: &DVector<T>| match axis_of(u) {
            Some(i) => p[i].density(&DVector::from_element(1, u[i])),
            None => T::zero(),
        });
        let p = parts.clone();
        let domain: MarkFn<T, bool> = Arc::new(move |u: &DVector<T>| match axis_of(u) {
            Some(i) => p[i].in_domain(&DVector::from_element(1, u[i])),
            None => false,
        });
        let p = parts.clone();
        let psi: MarkFn<T, T> = Arc::new(move |u: &DVector<T>| match axis_of(u) {
            Some(i) => p[i].psi(&DVector::from_element(1, u[i])),
            None => T::zero(),
        });
        let total_mass = if parts.iter().any(|c| c.total_mass == TotalMass::Infinite) {
            TotalMass::Infinite
        } else {
            TotalMass::Finite(parts.iter().fold(T::zero(), |acc, c| match c.total_mass {
                TotalMass::Finite(m) => acc + m,
                TotalMass::Infinite => acc,
            }))
        };
        let cut = parts.iter().fold(T::zero(), |acc, c| if c.truncation_cut > acc { c.truncation_cut } else { acc });
        let compensated = parts.iter().all(|c| c.compensated);
        let name = format!("axes({})", parts.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(","));
        let mut spec = Self::new(
            name,
            r,
            density,
            domain,
            psi,
            coefficient::squared_coordinates(),
            total_mass,
            cut,
            Arc::new(AxesSampler { parts }),
        )?;
        spec.compensated = compensated;
        spec.on_axes = true;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
struct UniformMarks<T> {
    low: T,
    high: T,
    gap: T,
}

impl<T: Scalar> UniformMarks<T> {
    fn new(low: T, high: T, gap: T) -> Self {
        Self { low, high, gap }
    }

    /// Pieces of `[low, high] \ (-gap, gap)` as closed intervals.
    fn pieces(&self) -> Vec<(T, T)> {
        let g = self.gap;
        let mut out = Vec::with_capacity(2);
        if g <= T::zero() {
            out.push((self.low, self.high));
            return out;
        }
        let left_hi = if self.high < -g { self.high } else { -g };
        if self.low < left_hi {
            out.push((self.low, left_hi));
        }
        let right_lo = if self.low > g { self.low } else { g };
        if right_lo < self.high {
            out.push((right_lo, self.high));
        }
        out
    }

    fn length(&self) -> T {
        self.pieces().iter().fold(T::zero(), |acc, (a, b)| acc + (*b - *a))
    }

    fn contains_closed(&self, x: T) -> bool {
        self.pieces().iter().any(|(a, b)| x >= *a && x <= *b)
    }

    fn contains_open(&self, x: T) -> bool {
        x != T::zero() && self.pieces().iter().any(|(a, b)| x > *a && x < *b)
    }

    fn mean(&self) -> T {
        let len = self.length();
        if len <= T::zero() {
            return T::zero();
        }
        let two = T::lit(2.0);
        self.pieces().iter().fold(T::zero(), |acc, (a, b)| acc + (*b * *b - *a * *a) / two) / len
    }

    fn sample(&self, uniform: f64) -> T {
        let pieces = self.pieces();
        let mut remaining = T::lit(uniform) * self.length();
        for (a, b) in &pieces {
            let w = *b - *a;
            if remaining <= w {
                return *a + remaining;
            }
            remaining -= w;
        }
        pieces.last().map(|p| p.1).unwrap_or(self.low)
    }
}

struct CompoundPoissonSampler<T> {
    lambda: T,
    law: UniformMarks<T>,
}

impl<T: Scalar> MarkSampler<T> for CompoundPoissonSampler<T> {
    fn truncated_mass(&self) -> T {
        self.lambda
    }

    fn first_moment(&self) -> DVector<T> {
        DVector::from_element(1, self.lambda * self.law.mean())
    }

    fn sample_mark(&self, rng: &mut dyn RngCore) -> Result<DVector<T>> {
        if self.law.length() <= T::zero() {
            return Err(Error::Sampler("mark law has empty support".into()));
        }
        let x = self.law.sample(rng.random::<f64>());
        Ok(DVector::from_element(1, x))
    }
}

struct PowerSampler<T> {
    beta: T,
    cut: T,
}

impl<T: Scalar> MarkSampler<T> for PowerSampler<T> {
    fn truncated_mass(&self) -> T {
        // 2 ∫_ε^1 x^{-1-β} dx
        T::lit(2.0) * (self.cut.powf(-self.beta) - T::one()) / self.beta
    }

    fn first_moment(&self) -> DVector<T> {
        DVector::zeros(1)
    }

    fn sample_mark(&self, rng: &mut dyn RngCore) -> Result<DVector<T>> {
        // inverse CDF of the magnitude on (ε, 1): x^{-β} = ε^{-β} - U (ε^{-β} - 1)
        let upper = self.cut.powf(-self.beta);
        let uniform = T::lit(rng.random::<f64>());
        let magnitude = (upper - uniform * (upper - T::one())).powf(-T::one() / self.beta);
        let sign = if rng.random::<bool>() { T::one() } else { -T::one() };
        if !(magnitude > T::zero()) {
            return Err(Error::Sampler(format!("power sampler produced magnitude {magnitude}")));
        }
        Ok(DVector::from_element(1, sign * magnitude))
    }
}

struct AxesSampler<T: Scalar> {
    parts: Arc<Vec<LevyMeasureSpec<T>>>,
}

impl<T: Scalar> MarkSampler<T> for AxesSampler<T> {
    fn truncated_mass(&self) -> T {
        self.parts.iter().fold(T::zero(), |acc, c| acc + c.sampler.truncated_mass())
    }

    fn first_moment(&self) -> DVector<T> {
        DVector::from_iterator(self.parts.len(), self.parts.iter().map(|c| c.sampler.first_moment()[0]))
    }

    fn sample_mark(&self, rng: &mut dyn RngCore) -> Result<DVector<T>> {
        let total = self.truncated_mass();
        if !(total > T::zero()) {
            return Err(Error::Sampler("axes sampler has zero mass".into()));
        }
        let mut target = T::lit(rng.random::<f64>()) * total;
        let last = self.parts.len() - 1;
        let mut axis = last;
        for (i, c) in self.parts.iter().enumerate() {
            let m = c.sampler.truncated_mass();
            if target < m {
                axis = i;
                break;
            }
            target -= m;
        }
        let x = self.parts[axis].sampler.sample_mark(rng)?[0];
        let mut u = DVector::zeros(self.parts.len());
        u[axis] = x;
        Ok(u)
    }
}
