use nalgebra::{DMatrix, DVector};

use super::driver::ZPath;
use super::model::SdeModel;
use crate::error::{Error, Result};
use crate::levy_sim::JumpConfiguration;
use crate::scalar::Scalar;

/// Step control for the drift part between events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub max_step: f64,
    /// Tolerance on the change of every event state under step halving.
    pub tol: f64,
    pub max_halvings: u32,
    pub adaptive: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { max_step: 1e-2, tol: 1e-9, max_halvings: 14, adaptive: true }
    }
}

impl StepControl {
    pub fn fixed(step: f64) -> Self {
        Self { max_step: step, adaptive: false, ..Self::default() }
    }
}

/// Largest number of sub-steps a single pass may take.
const MAX_SUBSTEPS: f64 = 5e7;

/// Condition number beyond which I + D_x c (or I + ΔU) counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Jump of N; carries the index of the point in the configuration.
    NJump(usize),
    ZJump(usize),
    ZIncrement(usize),
    Horizon,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::NJump(_) => "n_jump",
            EventKind::ZJump(_) => "z_jump",
            EventKind::ZIncrement(_) => "z_increment",
            EventKind::Horizon => "horizon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEvent<T: Scalar> {
    pub time: T,
    pub kind: EventKind,
    /// X_{t−}
    pub left: DVector<T>,
    /// X_t
    pub value: DVector<T>,
}

/// How the compensator of Ñ and the continuous part of Z were handled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftHandling<T> {
    /// No drift between events; the solution is exact.
    Exact,
    /// Classical RK4 with the given step.
    Rk4 { step: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Scalar> {
    initial: DVector<T>,
    horizon: T,
    events: Vec<TrajectoryEvent<T>>,
    drift: DriftHandling<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn initial(&self) -> &DVector<T> {
        &self.initial
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    /// Time-ordered events; the last one is always the horizon.
    pub fn events(&self) -> &[TrajectoryEvent<T>] {
        &self.events
    }

    pub fn drift_handling(&self) -> DriftHandling<T> {
        self.drift
    }

    pub fn terminal(&self) -> &DVector<T> {
        &self.events.last().expect("trajectory has a horizon event").value
    }

    fn step(&self) -> Option<T> {
        match self.drift {
            DriftHandling::Exact => None,
            DriftHandling::Rk4 { step } => Some(step),
        }
    }
}

/// K_t and (optionally) K̄_t after one event.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord<T: Scalar> {
    pub time: T,
    pub kind: EventKind,
    pub k: DMatrix<T>,
    pub kbar: Option<DMatrix<T>>,
    /// ΔU at Z events.
    pub delta_u: Option<DMatrix<T>>,
}

/// Derivative of the flow and its inverse on the trajectory's event grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState<T: Scalar> {
    records: Vec<FlowRecord<T>>,
}

impl<T: Scalar> FlowState<T> {
    pub fn records(&self) -> &[FlowRecord<T>] {
        &self.records
    }

    pub fn terminal_k(&self) -> &DMatrix<T> {
        &self.records.last().expect("flow has a horizon record").k
    }

    pub fn terminal_kbar(&self) -> Option<&DMatrix<T>> {
        self.records.last().and_then(|r| r.kbar.as_ref())
    }

    pub fn has_inverse(&self) -> bool {
        self.records.iter().all(|r| r.kbar.is_some())
    }

    /// max over events of ‖K̄K − I‖_∞ / max(1, ‖K‖_∞‖K̄‖_∞).
    pub fn max_identity_ratio(&self) -> Option<T> {
        let mut worst = T::zero();
        for r in &self.records {
            let kbar = r.kbar.as_ref()?;
            let d = r.k.nrows();
            let res = inf_norm(&(kbar * &r.k - DMatrix::identity(d, d)));
            let cond = inf_norm(&r.k) * inf_norm(kbar);
            let scale = if cond > T::one() { cond } else { T::one() };
            let ratio = res / scale;
            if ratio > worst {
                worst = ratio;
            }
        }
        Some(worst)
    }

    /// Checks ‖K̄K − I‖_∞ ≤ tol·cond at every event.
    pub fn check_identity(&self, tol: f64) -> Result<()> {
        let ratio = self.max_identity_ratio().ok_or_else(|| Error::Input("flow state has no inverse flow".into()))?;
        if ratio.as_f64() > tol {
            return Err(Error::Numeric(format!("K̄K − I residual ratio {:e} exceeds {tol:e}", ratio.as_f64())));
        }
        Ok(())
    }
}

pub(crate) fn inf_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    m.row_iter()
        .map(|r| r.iter().fold(T::zero(), |acc, x| acc + x.abs()))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

fn condition<T: Scalar>(m: &DMatrix<T>) -> T {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
    let min = sv.iter().copied().fold(max, |a, b| if b < a { b } else { a });
    if min > T::zero() {
        max / min
    } else {
        T::lit(f64::INFINITY)
    }
}

fn is_zero_vec<T: Scalar>(v: &DVector<T>) -> bool {
    v.iter().all(|x| *x == T::zero())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum FlowMode {
    None,
    Forward,
    WithInverse,
}

struct Pass<T: Scalar> {
    events: Vec<TrajectoryEvent<T>>,
    flow: Vec<FlowRecord<T>>,
}

struct Ctx<'a, T: Scalar, M: SdeModel<T> + ?Sized> {
    model: &'a M,
    z: &'a ZPath<T>,
    mean: &'a DVector<T>,
    compensated: bool,
}

impl<T: Scalar, M: SdeModel<T> + ?Sized> Ctx<'_, T, M> {
    fn field(&self, t: T, x: &DVector<T>) -> DVector<T> {
        let mut f = DVector::zeros(x.len());
        if self.compensated {
            f -= self.model.compensator(t, x, self.mean);
        }
        if let Some(rate) = self.z.rate(t) {
            f += self.model.sigma(t, x) * rate;
        }
        f
    }

    fn field_jacobian(&self, t: T, x: &DVector<T>) -> DMatrix<T> {
        let d = x.len();
        let mut m = DMatrix::zeros(d, d);
        if self.compensated {
            m -= self.model.compensator_jacobian(t, x, self.mean);
        }
        if let Some(rate) = self.z.rate(t) {
            for (j, r) in rate.iter().enumerate() {
                m += self.model.sigma_jacobian(t, x, j) * *r;
            }
        }
        m
    }

    /// One RK4 step; also returns the derivative of the step map when asked.
    fn rk4(&self, t: T, h: T, x: &DVector<T>, flow: bool) -> (DVector<T>, Option<DMatrix<T>>) {
        let two = T::lit(2.0);
        let six = T::lit(6.0);
        let half = h / two;
        let k1 = self.field(t, x);
        let x2 = x + &k1 * half;
        let k2 = self.field(t + half, &x2);
        let x3 = x + &k2 * half;
        let k3 = self.field(t + half, &x3);
        let x4 = x + &k3 * h;
        let k4 = self.field(t + h, &x4);
        let next = x + (&k1 + &k2 * two + &k3 * two + &k4) * (h / six);
        if !flow {
            return (next, None);
        }
        let d = x.len();
        let id = DMatrix::<T>::identity(d, d);
        let p1 = self.field_jacobian(t, x);
        let p2 = self.field_jacobian(t + half, &x2) * (&id + &p1 * half);
        let p3 = self.field_jacobian(t + half, &x3) * (&id + &p2 * half);
        let p4 = self.field_jacobian(t + h, &x4) * (&id + &p3 * h);
        let phi = &id + (p1 + p2 * two + p3 * two + p4) * (h / six);
        (next, Some(phi))
    }
}

struct FlowAcc<T: Scalar> {
    k: DMatrix<T>,
    kbar: Option<DMatrix<T>>,
}

impl<T: Scalar> FlowAcc<T> {
    /// K ← J K, K̄ ← K̄ J⁻¹.
    fn apply(&mut self, j: &DMatrix<T>, index: usize, what: &str) -> Result<()> {
        self.k = j * &self.k;
        if let Some(kbar) = self.kbar.as_mut() {
            let cond = condition(j);
            if !(cond.as_f64() <= SINGULAR_CONDITION) {
                return Err(Error::HypothesisViolation {
                    index,
                    detail: format!("I + {what} has condition number {:e}", cond.as_f64()),
                });
            }
            let inv = j
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::HypothesisViolation { index, detail: format!("I + {what} is singular") })?;
            *kbar = &*kbar * inv;
        }
        Ok(())
    }
}

fn check_state<T: Scalar>(x: &DVector<T>, event: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite_value()) {
        Ok(())
    } else {
        Err(Error::NumericAtJump { index: event, detail: "non-finite state".into() })
    }
}

fn event_list<T: Scalar>(config: &JumpConfiguration<T>, z: &ZPath<T>) -> Vec<(T, EventKind)> {
    let mut ev: Vec<(T, EventKind)> = Vec::new();
    ev.extend(config.points().iter().enumerate().map(|(i, p)| (p.time, EventKind::NJump(i))));
    ev.extend(z.jumps().iter().enumerate().map(|(i, p)| (p.0, EventKind::ZJump(i))));
    ev.extend(z.increments().iter().enumerate().map(|(i, p)| (p.0, EventKind::ZIncrement(i))));
    let rank = |k: &EventKind| match k {
        EventKind::NJump(_) => 0,
        EventKind::ZJump(_) => 1,
        EventKind::ZIncrement(_) => 2,
        EventKind::Horizon => 3,
    };
    // stable sort keeps index order within a kind
    ev.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(rank(&a.1).cmp(&rank(&b.1))));
    ev.push((config.horizon(), EventKind::Horizon));
    ev
}

fn validate<T: Scalar, M: SdeModel<T> + ?Sized>(model: &M, config: &JumpConfiguration<T>, z: &ZPath<T>) -> Result<()> {
    if model.mark_dim() != config.mark_dim() {
        return Err(Error::Input(format!(
            "model mark dimension {} differs from configuration mark dimension {}",
            model.mark_dim(),
            config.mark_dim()
        )));
    }
    if !z.is_zero() && z.dim() != model.aux_dim() {
        return Err(Error::Input(format!("Z has dimension {}, model expects {}", z.dim(), model.aux_dim())));
    }
    let horizon = config.horizon();
    if z.jumps().iter().chain(z.increments()).any(|(t, _)| *t > horizon) {
        return Err(Error::Input("Z events lie beyond the horizon".into()));
    }
    if model.initial().len() != model.state_dim() {
        return Err(Error::Input("initial state has the wrong dimension".into()));
    }
    Ok(())
}

fn needs_drift<T: Scalar>(config: &JumpConfiguration<T>, z: &ZPath<T>) -> bool {
    !is_zero_vec(config.compensator_drift()) || z.has_rate()
}

fn propagate<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
    initial: &DVector<T>,
    step: Option<T>,
    mode: FlowMode,
) -> Result<Pass<T>> {
    let ctx = Ctx { model, z, mean: config.compensator_drift(), compensated: !is_zero_vec(config.compensator_drift()) };
    let d = initial.len();
    let with_flow = mode != FlowMode::None;
    let mut acc =
        FlowAcc { k: DMatrix::identity(d, d), kbar: (mode == FlowMode::WithInverse).then(|| DMatrix::identity(d, d)) };
    let mut x = initial.clone();
    let mut t = T::zero();
    let mut events = Vec::new();
    let mut flow = Vec::new();
    for (event_index, (time, kind)) in event_list(config, z).into_iter().enumerate() {
        if let Some(h) = step {
            let span = time - t;
            if span > T::zero() {
                let n = (span / h).ceil().as_f64().max(1.0);
                if n > MAX_SUBSTEPS {
                    return Err(Error::Stiffness(format!("{n} sub-steps needed before event {event_index}")));
                }
                let hh = span / T::lit(n);
                for s in 0..n as usize {
                    let ts = t + hh * T::lit(s as f64);
                    let (next, phi) = ctx.rk4(ts, hh, &x, with_flow);
                    x = next;
                    if let Some(phi) = phi {
                        acc.k = &phi * &acc.k;
                        if let Some(kbar) = acc.kbar.as_mut() {
                            let inv = phi.try_inverse().ok_or_else(|| Error::NumericAtJump {
                                index: event_index,
                                detail: "drift step propagator is singular".into(),
                            })?;
                            *kbar = &*kbar * inv;
                        }
                    }
                }
                check_state(&x, event_index)?;
            }
        }
        t = time;
        let left = x.clone();
        let mut delta_u = None;
        match kind {
            EventKind::NJump(i) => {
                let u = &config.points()[i].mark;
                x = &left + model.jump(time, &left, u);
                if with_flow {
                    let j = DMatrix::identity(d, d) + model.jump_jacobian(time, &left, u);
                    acc.apply(&j, i, "D_x c")?;
                }
            }
            EventKind::ZJump(i) | EventKind::ZIncrement(i) => {
                let dz = if matches!(kind, EventKind::ZJump(_)) { &z.jumps()[i].1 } else { &z.increments()[i].1 };
                x = &left + model.sigma(time, &left) * dz;
                if with_flow {
                    let mut du = DMatrix::zeros(d, d);
                    for (col, v) in dz.iter().enumerate() {
                        du += model.sigma_jacobian(time, &left, col) * *v;
                    }
                    let j = DMatrix::identity(d, d) + &du;
                    acc.apply(&j, event_index, "ΔU")?;
                    delta_u = Some(du);
                }
            }
            EventKind::Horizon => {}
        }
        check_state(&x, event_index)?;
        if with_flow {
            flow.push(FlowRecord { time, kind, k: acc.k.clone(), kbar: acc.kbar.clone(), delta_u });
        }
        events.push(TrajectoryEvent { time, kind, left, value: x.clone() });
    }
    Ok(Pass { events, flow })
}

fn max_event_gap<T: Scalar>(a: &[TrajectoryEvent<T>], b: &[TrajectoryEvent<T>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(p, q)| {
            p.value.iter().zip(q.value.iter()).map(|(u, v)| ((*u - *v).abs() / (T::one() + v.abs())).as_f64())
        })
        .fold(0.0, f64::max)
}

/// Solves the SDE from the model's initial state.
pub fn solve_sde<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
    control: &StepControl,
) -> Result<Trajectory<T>> {
    solve_sde_from(model, &model.initial(), config, z, control)
}

/// Solves the SDE from an explicit initial state.
pub fn solve_sde_from<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    initial: &DVector<T>,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
    control: &StepControl,
) -> Result<Trajectory<T>> {
    validate(model, config, z)?;
    if initial.len() != model.state_dim() {
        return Err(Error::Input("initial state has the wrong dimension".into()));
    }
    let build = |events, drift| Trajectory { initial: initial.clone(), horizon: config.horizon(), events, drift };
    if !needs_drift(config, z) {
        let pass = propagate(model, config, z, initial, None, FlowMode::None)?;
        return Ok(build(pass.events, DriftHandling::Exact));
    }
    if !(control.max_step > 0.0) {
        return Err(Error::Input(format!("max step must be positive, got {}", control.max_step)));
    }
    let mut h = T::lit(control.max_step.min(config.horizon().as_f64()));
    let mut coarse = propagate(model, config, z, initial, Some(h), FlowMode::None)?;
    if !control.adaptive {
        return Ok(build(coarse.events, DriftHandling::Rk4 { step: h }));
    }
    for _ in 0..control.max_halvings {
        let half = h / T::lit(2.0);
        let fine = propagate(model, config, z, initial, Some(half), FlowMode::None)?;
        if max_event_gap(&coarse.events, &fine.events) <= control.tol {
            return Ok(build(fine.events, DriftHandling::Rk4 { step: half }));
        }
        h = half;
        coarse = fine;
    }
    Err(Error::Stiffness(format!(
        "no agreement within {:e} after {} halvings (step {h})",
        control.tol, control.max_halvings
    )))
}

fn flow_pass<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    trajectory: &Trajectory<T>,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
    mode: FlowMode,
) -> Result<FlowState<T>> {
    validate(model, config, z)?;
    let pass = propagate(model, config, z, trajectory.initial(), trajectory.step(), mode)?;
    let consistent = pass.events.len() == trajectory.events.len()
        && max_event_gap(&pass.events, &trajectory.events) <= 100.0 * T::epsilon_f64();
    if !consistent {
        return Err(Error::Input("trajectory was not produced from these inputs".into()));
    }
    Ok(FlowState { records: pass.flow })
}

/// K_t on the trajectory's event grid.
pub fn flow_derivative<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    trajectory: &Trajectory<T>,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
) -> Result<FlowState<T>> {
    flow_pass(model, trajectory, config, z, FlowMode::Forward)
}

/// K_t and K̄_t on the trajectory's event grid, with the identity
/// K̄K = I checked at every event.
pub fn inverse_flow<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    trajectory: &Trajectory<T>,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
) -> Result<FlowState<T>> {
    let flow = flow_pass(model, trajectory, config, z, FlowMode::WithInverse)?;
    flow.check_identity(identity_tolerance::<T>())?;
    Ok(flow)
}

pub(crate) fn identity_tolerance<T: Scalar>() -> f64 {
    (1000.0 * T::epsilon_f64()).max(1e-10)
}

/// Terminal value of a re-solve with the step of an existing trajectory.
pub(crate) fn terminal_with_step<T: Scalar, M: SdeModel<T> + ?Sized>(
    model: &M,
    config: &JumpConfiguration<T>,
    z: &ZPath<T>,
    initial: &DVector<T>,
    drift: DriftHandling<T>,
) -> Result<DVector<T>> {
    let step = match drift {
        DriftHandling::Exact => None,
        DriftHandling::Rk4 { step } => Some(step),
    };
    let pass = propagate(model, config, z, initial, step, FlowMode::None)?;
    Ok(pass.events.last().expect("horizon event").value.clone())
}
