use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

type RateFn<T> = Arc<dyn Fn(T) -> DVector<T> + Send + Sync>;

/// A realized auxiliary semimartingale Z: a jump list, an optional
/// absolutely continuous part dZ = z'(t) dt, and optional increments
/// (e.g. Brownian) applied at the right end of their sub-intervals.
#[derive(Clone)]
pub struct ZPath<T: Scalar> {
    dim: usize,
    jumps: Vec<(T, DVector<T>)>,
    rate: Option<RateFn<T>>,
    increments: Vec<(T, DVector<T>)>,
}

impl<T: Scalar> std::fmt::Debug for ZPath<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZPath")
            .field("dim", &self.dim)
            .field("jumps", &self.jumps.len())
            .field("rate", &self.rate.is_some())
            .field("increments", &self.increments.len())
            .finish()
    }
}

fn check_times<T: Scalar>(dim: usize, list: &[(T, DVector<T>)], what: &str) -> Result<()> {
    for (i, (t, v)) in list.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::Input(format!("{what} {i} has dimension {}, expected {dim}", v.len())));
        }
        if !(*t > T::zero()) {
            return Err(Error::Input(format!("{what} {i} at non-positive time {t}")));
        }
        if i > 0 && !(list[i - 1].0 < *t) {
            return Err(Error::Input(format!("{what} times must be strictly increasing")));
        }
    }
    Ok(())
}

impl<T: Scalar> ZPath<T> {
    /// Z ≡ 0 of dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        Self { dim, jumps: Vec::new(), rate: None, increments: Vec::new() }
    }

    pub fn pure_jump(dim: usize, jumps: Vec<(T, DVector<T>)>) -> Result<Self> {
        check_times(dim, &jumps, "Z-jump")?;
        Ok(Self { dim, jumps, rate: None, increments: Vec::new() })
    }

    pub fn with_rate(mut self, rate: RateFn<T>) -> Self {
        self.rate = Some(rate);
        self
    }

    /// Increments ΔZ over consecutive sub-intervals ending at the given times.
    pub fn with_increments(mut self, increments: Vec<(T, DVector<T>)>) -> Result<Self> {
        check_times(self.dim, &increments, "Z-increment")?;
        self.increments = increments;
        Ok(self)
    }

    /// Builds increments on the uniform grid of `n` cells over `[0, horizon]`
    /// from a generator `(t0, t1) -> ΔZ`.
    pub fn from_generator<G>(dim: usize, horizon: T, n: usize, mut generator: G) -> Result<Self>
    where
        G: FnMut(T, T) -> DVector<T>,
    {
        let n_t = T::from_usize(n).ok_or_else(|| Error::Input("grid too large".into()))?;
        let increments = (1..=n)
            .map(|k| {
                let t0 = horizon * T::lit((k - 1) as f64) / n_t;
                let t1 = horizon * T::lit(k as f64) / n_t;
                (t1, generator(t0, t1))
            })
            .collect();
        Self::zero(dim).with_increments(increments)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jumps(&self) -> &[(T, DVector<T>)] {
        &self.jumps
    }

    pub fn increments(&self) -> &[(T, DVector<T>)] {
        &self.increments
    }

    pub fn rate(&self, t: T) -> Option<DVector<T>> {
        self.rate.as_ref().map(|r| r(t))
    }

    pub fn has_rate(&self) -> bool {
        self.rate.is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.jumps.is_empty() && self.rate.is_none() && self.increments.is_empty()
    }
}
