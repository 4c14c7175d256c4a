use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::levy_sim::spec::LevyMeasureSpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct JumpPoint<T: Scalar> {
    pub time: T,
    pub mark: DVector<T>,
}

impl<T: Scalar> JumpPoint<T> {
    pub fn new(time: T, mark: DVector<T>) -> Self {
        Self { time, mark }
    }

    pub fn scalar(time: T, mark: T) -> Self {
        Self { time, mark: DVector::from_element(1, mark) }
    }
}

/// One finite realization of the Poisson measure on `(0, horizon] × ℝʳ`.
///
/// Times are strictly increasing and marks are nonzero. The driving
/// process built on it is `Σ marks − t · compensator_drift`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpConfiguration<T: Scalar> {
    horizon: T,
    mark_dim: usize,
    points: Vec<JumpPoint<T>>,
    compensator_drift: DVector<T>,
}

impl<T: Scalar> JumpConfiguration<T> {
    pub fn new(horizon: T, mark_dim: usize, points: Vec<JumpPoint<T>>, compensator_drift: DVector<T>) -> Result<Self> {
        if !(horizon > T::zero()) || !horizon.is_finite_value() {
            return Err(Error::Configuration(format!("horizon must be positive, got {horizon}")));
        }
        if compensator_drift.len() != mark_dim {
            return Err(Error::Configuration(format!(
                "compensator drift has dimension {}, expected {mark_dim}",
                compensator_drift.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.mark.len() != mark_dim {
                return Err(Error::Configuration(format!(
                    "point {i} has mark dimension {}, expected {mark_dim}",
                    p.mark.len()
                )));
            }
            if !(p.time > T::zero() && p.time <= horizon) {
                return Err(Error::Configuration(format!("point {i} time {} outside (0, {horizon}]", p.time)));
            }
            if p.mark.iter().all(|x| *x == T::zero()) {
                return Err(Error::Configuration(format!("point {i} has a zero mark")));
            }
            if p.mark.iter().any(|x| !x.is_finite_value()) {
                return Err(Error::Configuration(format!("point {i} has a non-finite mark")));
            }
            if i > 0 && !(points[i - 1].time < p.time) {
                return Err(Error::Configuration(format!("times not strictly increasing at point {i}")));
            }
        }
        Ok(Self { horizon, mark_dim, points, compensator_drift })
    }

    /// Configuration with zero compensator drift.
    pub fn pure_jump(horizon: T, mark_dim: usize, points: Vec<JumpPoint<T>>) -> Result<Self> {
        Self::new(horizon, mark_dim, points, DVector::zeros(mark_dim))
    }

    /// One-dimensional pure-jump configuration from `(time, mark)` pairs.
    pub fn scalar_jumps(horizon: T, jumps: &[(T, T)]) -> Result<Self> {
        Self::pure_jump(horizon, 1, jumps.iter().map(|&(t, u)| JumpPoint::scalar(t, u)).collect())
    }

    pub fn empty(horizon: T, mark_dim: usize) -> Result<Self> {
        Self::pure_jump(horizon, mark_dim, Vec::new())
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn mark_dim(&self) -> usize {
        self.mark_dim
    }

    pub fn points(&self) -> &[JumpPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn compensator_drift(&self) -> &DVector<T> {
        &self.compensator_drift
    }

    pub fn with_compensator_drift(mut self, drift: DVector<T>) -> Result<Self> {
        if drift.len() != self.mark_dim {
            return Err(Error::Configuration("compensator drift dimension mismatch".into()));
        }
        self.compensator_drift = drift;
        Ok(self)
    }

    /// Index of the point exactly equal to `(time, mark)`, if any.
    pub fn find(&self, time: T, mark: &DVector<T>) -> Option<usize> {
        let idx = self.points.partition_point(|p| p.time < time);
        self.points.get(idx).filter(|p| p.time == time && &p.mark == mark).map(|_| idx)
    }

    /// Copy with the mark of point `index` replaced; no zero-mark check,
    /// since finite-difference perturbations may pass through zero.
    pub(crate) fn with_mark(&self, index: usize, mark: DVector<T>) -> Self {
        let mut out = self.clone();
        out.points[index].mark = mark;
        out
    }

    pub(crate) fn insert_unchecked(&mut self, index: usize, point: JumpPoint<T>) {
        self.points.insert(index, point);
    }

    pub(crate) fn remove_unchecked(&mut self, index: usize) -> JumpPoint<T> {
        self.points.remove(index)
    }

    /// Restriction to points with time ≤ `t` (horizon becomes `t`).
    pub fn truncated_at(&self, t: T) -> Result<Self> {
        let keep = self.points.iter().filter(|p| p.time <= t).cloned().collect();
        Self::new(t, self.mark_dim, keep, self.compensator_drift.clone())
    }
}

/// Deterministic RNG for path `path_index` under `master_seed`.
///
/// ChaCha8 keyed by the master seed with the path index as stream id, so a
/// path's draws do not depend on how many paths run or in which order.
pub fn path_rng(master_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}

/// Samples one configuration on `(0, horizon]` with seed `seed` (stream 0).
pub fn sample_configuration<T: Scalar>(
    spec: &LevyMeasureSpec<T>,
    horizon: T,
    seed: u64,
) -> Result<JumpConfiguration<T>> {
    sample_configuration_for_path(spec, horizon, seed, 0)
}

pub fn sample_configuration_for_path<T: Scalar>(
    spec: &LevyMeasureSpec<T>,
    horizon: T,
    master_seed: u64,
    path_index: u64,
) -> Result<JumpConfiguration<T>> {
    let mut rng = path_rng(master_seed, path_index);
    sample_configuration_with(spec, horizon, &mut rng)
}

pub fn sample_configuration_with<T: Scalar, R: Rng>(
    spec: &LevyMeasureSpec<T>,
    horizon: T,
    rng: &mut R,
) -> Result<JumpConfiguration<T>> {
    if !(horizon > T::zero()) || !horizon.is_finite_value() {
        return Err(Error::Configuration(format!("horizon must be positive, got {horizon}")));
    }
    let intensity = spec.sampled_intensity()?;
    let mean = (intensity * horizon).as_f64();
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean).map_err(|e| Error::Configuration(format!("poisson mean {mean}: {e}")))?;
        poisson.sample(rng) as usize
    } else {
        0
    };

    let uniform_time = |rng: &mut R| -> T {
        // (0, horizon]
        horizon * T::lit(1.0 - rng.random::<f64>())
    };
    let mut times: Vec<T> = (0..count).map(|_| uniform_time(rng)).collect();
    sort_scalars(&mut times);
    // ties have probability zero; resample the later time until none remain
    while let Some(i) = (1..times.len()).find(|&i| times[i] == times[i - 1]) {
        times[i] = uniform_time(rng);
        sort_scalars(&mut times);
    }

    let mut points = Vec::with_capacity(count);
    for time in times {
        let mark = spec.sampler().sample_mark(rng)?;
        if mark.len() != spec.dim() {
            return Err(Error::Sampler(format!(
                "sampler returned a mark of dimension {}, expected {}",
                mark.len(),
                spec.dim()
            )));
        }
        if mark.iter().all(|x| *x == T::zero()) || mark.iter().any(|x| !x.is_finite_value()) {
            return Err(Error::Sampler(format!("degenerate mark {:?}", mark.as_slice())));
        }
        points.push(JumpPoint { time, mark });
    }
    JumpConfiguration::new(horizon, spec.dim(), points, spec.compensator_drift())
}

fn sort_scalars<T: Scalar>(v: &mut [T]) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
}
