use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients of X_t = x + ∫∫ c(s, X_{s−}, u) Ñ(ds, du) + ∫ σ(s, X_{s−}) dZ_s.
pub trait SdeModel<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn state_dim(&self) -> usize;

    fn mark_dim(&self) -> usize;

    /// Dimension n of the auxiliary semimartingale Z.
    fn aux_dim(&self) -> usize {
        0
    }

    fn initial(&self) -> DVector<T>;

    /// c(t, x, u).
    fn jump(&self, t: T, x: &DVector<T>, u: &DVector<T>) -> DVector<T>;

    /// D_x c(t, x, u), d×d.
    fn jump_jacobian(&self, t: T, x: &DVector<T>, u: &DVector<T>) -> DMatrix<T>;

    /// ∇_u c(t, x, u), d×r; `None` falls back to finite differences.
    fn jump_mark_gradient(&self, _t: T, _x: &DVector<T>, _u: &DVector<T>) -> Option<DMatrix<T>> {
        None
    }

    /// ∫ c(t, x, u) ν(du) given `mark_mean = ∫ u ν(du)`.
    ///
    /// The default `c(t, x, mark_mean)` is exact when c is linear in the
    /// mark; models with nonlinear mark dependence must override it.
    fn compensator(&self, t: T, x: &DVector<T>, mark_mean: &DVector<T>) -> DVector<T> {
        self.jump(t, x, mark_mean)
    }

    /// D_x of [`SdeModel::compensator`].
    fn compensator_jacobian(&self, t: T, x: &DVector<T>, mark_mean: &DVector<T>) -> DMatrix<T> {
        self.jump_jacobian(t, x, mark_mean)
    }

    /// σ(t, x), d×n.
    fn sigma(&self, _t: T, _x: &DVector<T>) -> DMatrix<T> {
        DMatrix::zeros(self.state_dim(), self.aux_dim())
    }

    /// D_x σ_{·,j}(t, x), d×d.
    fn sigma_jacobian(&self, _t: T, _x: &DVector<T>, _column: usize) -> DMatrix<T> {
        DMatrix::zeros(self.state_dim(), self.state_dim())
    }
}

/// d = r = 1, c(s, x, u) = a·x·u.
#[derive(Debug, Clone)]
pub struct LinearScalarModel<T: Scalar> {
    pub a: T,
    pub x0: T,
}

impl<T: Scalar> LinearScalarModel<T> {
    pub fn new(a: T, x0: T) -> Self {
        Self { a, x0 }
    }
}

impl<T: Scalar> SdeModel<T> for LinearScalarModel<T> {
    fn name(&self) -> &str {
        "linear_scalar"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn mark_dim(&self) -> usize {
        1
    }
    fn initial(&self) -> DVector<T> {
        DVector::from_element(1, self.x0)
    }
    fn jump(&self, _t: T, x: &DVector<T>, u: &DVector<T>) -> DVector<T> {
        DVector::from_element(1, self.a * x[0] * u[0])
    }
    fn jump_jacobian(&self, _t: T, _x: &DVector<T>, u: &DVector<T>) -> DMatrix<T> {
        DMatrix::from_element(1, 1, self.a * u[0])
    }
    fn jump_mark_gradient(&self, _t: T, x: &DVector<T>, _u: &DVector<T>) -> Option<DMatrix<T>> {
        Some(DMatrix::from_element(1, 1, self.a * x[0]))
    }
}

/// c(s, x, u) = A x u with scalar marks, σ_{·,j}(s, x) = B_j x.
#[derive(Debug, Clone)]
pub struct LinearModel<T: Scalar> {
    jump_matrix: DMatrix<T>,
    sigma_matrices: Vec<DMatrix<T>>,
    x0: DVector<T>,
}

impl<T: Scalar> LinearModel<T> {
    pub fn new(jump_matrix: DMatrix<T>, x0: DVector<T>) -> Result<Self> {
        if !jump_matrix.is_square() || jump_matrix.nrows() != x0.len() {
            return Err(Error::Input("jump matrix must be square and match the state".into()));
        }
        Ok(Self { jump_matrix, sigma_matrices: Vec::new(), x0 })
    }

    pub fn with_sigma(mut self, sigma_matrices: Vec<DMatrix<T>>) -> Result<Self> {
        let d = self.x0.len();
        if sigma_matrices.iter().any(|b| b.nrows() != d || b.ncols() != d) {
            return Err(Error::Input("sigma matrices must be d×d".into()));
        }
        self.sigma_matrices = sigma_matrices;
        Ok(self)
    }

    pub fn jump_matrix(&self) -> &DMatrix<T> {
        &self.jump_matrix
    }
}

impl<T: Scalar> SdeModel<T> for LinearModel<T> {
    fn name(&self) -> &str {
        "linear"
    }
    fn state_dim(&self) -> usize {
        self.x0.len()
    }
    fn mark_dim(&self) -> usize {
        1
    }
    fn aux_dim(&self) -> usize {
        self.sigma_matrices.len()
    }
    fn initial(&self) -> DVector<T> {
        self.x0.clone()
    }
    fn jump(&self, _t: T, x: &DVector<T>, u: &DVector<T>) -> DVector<T> {
        &self.jump_matrix * x * u[0]
    }
    fn jump_jacobian(&self, _t: T, _x: &DVector<T>, u: &DVector<T>) -> DMatrix<T> {
        &self.jump_matrix * u[0]
    }
    fn jump_mark_gradient(&self, _t: T, x: &DVector<T>, _u: &DVector<T>) -> Option<DMatrix<T>> {
        let col = &self.jump_matrix * x;
        Some(DMatrix::from_column_slice(col.len(), 1, col.as_slice()))
    }
    fn sigma(&self, _t: T, x: &DVector<T>) -> DMatrix<T> {
        let d = self.x0.len();
        let mut s = DMatrix::zeros(d, self.sigma_matrices.len());
        for (j, b) in self.sigma_matrices.iter().enumerate() {
            s.set_column(j, &(b * x));
        }
        s
    }
    fn sigma_jacobian(&self, _t: T, _x: &DVector<T>, column: usize) -> DMatrix<T> {
        self.sigma_matrices[column].clone()
    }
}

/// The three-dimensional degenerate system driven by a two-dimensional
/// Lévy process: c(x, u) = (u₁, 2x₁u₁ + u₂, x₁u₁ + 2u₂).
#[derive(Debug, Clone)]
pub struct DegenerateZModel<T: Scalar> {
    start: [T; 3],
}

impl<T: Scalar> DegenerateZModel<T> {
    pub fn new(start: [T; 3]) -> Self {
        Self { start }
    }
}

impl<T: Scalar> SdeModel<T> for DegenerateZModel<T> {
    fn name(&self) -> &str {
        "degenerate_z"
    }
    fn state_dim(&self) -> usize {
        3
    }
    fn mark_dim(&self) -> usize {
        2
    }
    fn initial(&self) -> DVector<T> {
        DVector::from_column_slice(&self.start)
    }
    fn jump(&self, _t: T, x: &DVector<T>, u: &DVector<T>) -> DVector<T> {
        let two = T::lit(2.0);
        DVector::from_vec(vec![u[0], two * x[0] * u[0] + u[1], x[0] * u[0] + two * u[1]])
    }
    fn jump_jacobian(&self, _t: T, _x: &DVector<T>, u: &DVector<T>) -> DMatrix<T> {
        let z = T::zero();
        DMatrix::from_row_slice(3, 3, &[z, z, z, T::lit(2.0) * u[0], z, z, u[0], z, z])
    }
    fn jump_mark_gradient(&self, _t: T, x: &DVector<T>, _u: &DVector<T>) -> Option<DMatrix<T>> {
        let (z, one, two) = (T::zero(), T::one(), T::lit(2.0));
        Some(DMatrix::from_row_slice(3, 2, &[one, z, two * x[0], one, x[0], two]))
    }
}

type JumpFn<T> = Arc<dyn Fn(T, &DVector<T>, &DVector<T>) -> DVector<T> + Send + Sync>;
type JumpMatFn<T> = Arc<dyn Fn(T, &DVector<T>, &DVector<T>) -> DMatrix<T> + Send + Sync>;

/// Model assembled from closures; no σ part.
#[derive(Clone)]
pub struct FnModel<T: Scalar> {
    name: String,
    state_dim: usize,
    mark_dim: usize,
    x0: DVector<T>,
    jump: JumpFn<T>,
    jump_jacobian: JumpMatFn<T>,
    jump_mark_gradient: Option<JumpMatFn<T>>,
}

impl<T: Scalar> FnModel<T> {
    pub fn new(
        name: impl Into<String>,
        mark_dim: usize,
        x0: DVector<T>,
        jump: JumpFn<T>,
        jump_jacobian: JumpMatFn<T>,
    ) -> Self {
        Self { name: name.into(), state_dim: x0.len(), mark_dim, x0, jump, jump_jacobian, jump_mark_gradient: None }
    }

    pub fn with_mark_gradient(mut self, gradient: JumpMatFn<T>) -> Self {
        self.jump_mark_gradient = Some(gradient);
        self
    }
}

impl<T: Scalar> SdeModel<T> for FnModel<T> {
    fn name(&self) -> &str {
        &self.name
    }
    fn state_dim(&self) -> usize {
        self.state_dim
    }
    fn mark_dim(&self) -> usize {
        self.mark_dim
    }
    fn initial(&self) -> DVector<T> {
        self.x0.clone()
    }
    fn jump(&self, t: T, x: &DVector<T>, u: &DVector<T>) -> DVector<T> {
        (self.jump)(t, x, u)
    }
    fn jump_jacobian(&self, t: T, x: &DVector<T>, u: &DVector<T>) -> DMatrix<T> {
        (self.jump_jacobian)(t, x, u)
    }
    fn jump_mark_gradient(&self, t: T, x: &DVector<T>, u: &DVector<T>) -> Option<DMatrix<T>> {
        self.jump_mark_gradient.as_ref().map(|g| g(t, x, u))
    }
}

/// A probe point (t, x, u) for Jacobian checks.
#[derive(Debug, Clone)]
pub struct ModelProbe<T: Scalar> {
    pub t: T,
    pub x: DVector<T>,
    pub u: DVector<T>,
}

/// Compares supplied Jacobians with central differences at the probes;
/// relative tolerance `rel_tol` (1e-5 by default in callers).
pub fn check_model_jacobians<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    probes: &[ModelProbe<T>],
    rel_tol: f64,
) -> Result<()> {
    let rel = T::lit(rel_tol);
    let close = |a: &DMatrix<T>, b: &DMatrix<T>| {
        let diff = (a - b).amax();
        diff <= rel * (T::one() + b.amax())
    };
    let two = T::lit(2.0);
    for (i, p) in probes.iter().enumerate() {
        let d = model.state_dim();
        let h = T::lit(1e-6) * (T::one() + p.x.amax());
        let mut fd = DMatrix::zeros(d, d);
        for k in 0..d {
            let mut xp = p.x.clone();
            let mut xm = p.x.clone();
            xp[k] += h;
            xm[k] -= h;
            fd.set_column(k, &((model.jump(p.t, &xp, &p.u) - model.jump(p.t, &xm, &p.u)) / (two * h)));
        }
        if !close(&model.jump_jacobian(p.t, &p.x, &p.u), &fd) {
            return Err(Error::Input(format!("D_x c disagrees with finite differences at probe {i}")));
        }
        if let Some(g) = model.jump_mark_gradient(p.t, &p.x, &p.u) {
            let r = model.mark_dim();
            let hu = T::lit(1e-6) * (T::one() + p.u.amax());
            let mut fdu = DMatrix::zeros(d, r);
            for k in 0..r {
                let mut up = p.u.clone();
                let mut um = p.u.clone();
                up[k] += hu;
                um[k] -= hu;
                fdu.set_column(k, &((model.jump(p.t, &p.x, &up) - model.jump(p.t, &p.x, &um)) / (two * hu)));
            }
            if !close(&g, &fdu) {
                return Err(Error::Input(format!("grad_u c disagrees with finite differences at probe {i}")));
            }
        }
        for j in 0..model.aux_dim() {
            let mut fds = DMatrix::zeros(d, d);
            for k in 0..d {
                let mut xp = p.x.clone();
                let mut xm = p.x.clone();
                xp[k] += h;
                xm[k] -= h;
                let col = (model.sigma(p.t, &xp).column(j) - model.sigma(p.t, &xm).column(j)) / (two * h);
                fds.set_column(k, &col);
            }
            if !close(&model.sigma_jacobian(p.t, &p.x, j), &fds) {
                return Err(Error::Input(format!("D_x sigma column {j} disagrees at probe {i}")));
            }
        }
    }
    Ok(())
}
