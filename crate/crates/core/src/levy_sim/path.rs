use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::levy_sim::config::JumpConfiguration;
use crate::levy_sim::quadrature;
use crate::scalar::Scalar;

/// Right-continuous path `initial + Σ_{Tᵢ ≤ t} Uᵢ − t · drift`.
#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath<T: Scalar> {
    horizon: T,
    initial: DVector<T>,
    drift: DVector<T>,
    times: Vec<T>,
    jumps: Vec<DVector<T>>,
    /// `initial + Σ_{k ≤ i} U_k` (without drift)
    partial_sums: Vec<DVector<T>>,
}

/// Builds the driving path of a configuration.
pub fn build_path<T: Scalar>(config: &JumpConfiguration<T>, initial: DVector<T>) -> Result<CadlagPath<T>> {
    if initial.len() != config.mark_dim() {
        return Err(Error::Input(format!(
            "initial value has dimension {}, configuration marks have {}",
            initial.len(),
            config.mark_dim()
        )));
    }
    let mut partial_sums = Vec::with_capacity(config.len());
    let mut acc = initial.clone();
    for p in config.points() {
        acc += &p.mark;
        partial_sums.push(acc.clone());
    }
    Ok(CadlagPath {
        horizon: config.horizon(),
        initial,
        drift: config.compensator_drift().clone(),
        times: config.points().iter().map(|p| p.time).collect(),
        jumps: config.points().iter().map(|p| p.mark.clone()).collect(),
        partial_sums,
    })
}

impl<T: Scalar> CadlagPath<T> {
    /// Path started at zero.
    pub fn from_config(config: &JumpConfiguration<T>) -> Self {
        build_path(config, DVector::zeros(config.mark_dim())).expect("dimensions agree")
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn initial(&self) -> &DVector<T> {
        &self.initial
    }

    pub fn drift(&self) -> &DVector<T> {
        &self.drift
    }

    pub fn jump_times(&self) -> &[T] {
        &self.times
    }

    /// `(time, ΔY)` for every jump, in time order.
    pub fn jumps(&self) -> impl Iterator<Item = (T, &DVector<T>)> + '_ {
        self.times.iter().copied().zip(self.jumps.iter())
    }

    fn sum_through(&self, count: usize) -> DVector<T> {
        if count == 0 {
            self.initial.clone()
        } else {
            self.partial_sums[count - 1].clone()
        }
    }

    /// Y_t (right-continuous value).
    pub fn value(&self, t: T) -> DVector<T> {
        let n = self.times.partition_point(|s| *s <= t);
        self.sum_through(n) - &self.drift * t
    }

    /// Y_{t−}; equals the initial value at t = 0.
    pub fn left_limit(&self, t: T) -> DVector<T> {
        let n = self.times.partition_point(|s| *s < t);
        self.sum_through(n) - &self.drift * t
    }

    /// Values on `points` equally spaced times in `[0, horizon]`.
    pub fn sample_grid(&self, points: usize) -> Vec<(T, DVector<T>)> {
        let n = points.max(2);
        (0..n)
            .map(|i| {
                let t = self.horizon * T::lit(i as f64 / (n - 1) as f64);
                (t, self.value(t))
            })
            .collect()
    }
}

/// Absolute tolerance of the drift quadrature between jumps.
pub const DRIFT_QUADRATURE_TOL: f64 = 1e-12;

/// `∫₀ᵗ φ(Y_{s−}) dY_s` for a matrix-valued integrand `φ: ℝᵈ → ℝ^{m×d}`.
///
/// Jump part `Σ_{Tᵢ ≤ t} φ(Y_{Tᵢ−}) ΔYᵢ`; the compensator part
/// `∫₀ᵗ φ(Y_s) drift ds` is integrated by quadrature on each inter-jump
/// interval, where the path is affine in s.
pub fn stochastic_integral<T, F>(integrand: F, driver: &CadlagPath<T>, t: T, out_dim: usize) -> Result<DVector<T>>
where
    T: Scalar,
    F: Fn(&DVector<T>) -> DMatrix<T>,
{
    let mut total = DVector::zeros(out_dim);
    let mut prev_time = T::zero();
    let drift_is_zero = driver.drift.iter().all(|x| *x == T::zero());
    let tol = quadrature_tol::<T>();

    let drift_piece = |from: T, to: T, total: &mut DVector<T>| -> Result<()> {
        if drift_is_zero || to <= from {
            return Ok(());
        }
        let g = |s: T| integrand(&driver.value(s)) * &driver.drift;
        let piece = quadrature::integrate(g, from, to, out_dim, tol)?;
        *total -= piece;
        Ok(())
    };

    for (time, jump) in driver.jumps() {
        if time > t {
            break;
        }
        drift_piece(prev_time, time, &mut total)?;
        let phi = integrand(&driver.left_limit(time));
        check_shape(&phi, out_dim, driver.dim())?;
        total += phi * jump;
        prev_time = time;
    }
    drift_piece(prev_time, t, &mut total)?;
    if total.iter().any(|x| !x.is_finite_value()) {
        return Err(Error::Numeric("stochastic integral is not finite".into()));
    }
    Ok(total)
}

/// Scalar convenience form of [`stochastic_integral`] for one-dimensional drivers.
pub fn stochastic_integral_scalar<T, F>(phi: F, driver: &CadlagPath<T>, t: T) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if driver.dim() != 1 {
        return Err(Error::Input("scalar stochastic integral needs a one-dimensional driver".into()));
    }
    let v = stochastic_integral(|y: &DVector<T>| DMatrix::from_element(1, 1, phi(y[0])), driver, t, 1)?;
    Ok(v[0])
}

fn check_shape<T: Scalar>(phi: &DMatrix<T>, rows: usize, cols: usize) -> Result<()> {
    if phi.nrows() != rows || phi.ncols() != cols {
        return Err(Error::Input(format!(
            "integrand returned a {}x{} matrix, expected {rows}x{cols}",
            phi.nrows(),
            phi.ncols()
        )));
    }
    Ok(())
}

fn quadrature_tol<T: Scalar>() -> T {
    let eps = T::default_epsilon() * T::lit(100.0);
    let tol = T::lit(DRIFT_QUADRATURE_TOL);
    if eps > tol {
        eps
    } else {
        tol
    }
}
