//! Creation and annihilation operators ε⁺, ε⁻ on configurations.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::levy_sim::{JumpConfiguration, JumpPoint};
use crate::scalar::Scalar;

/// ε⁺_{(t,u)}: adds the point unless it is already present.
///
/// A different point at the same time would break the strictly
/// increasing time invariant and is a domain error.
pub fn add_particle<T: Scalar>(config: &JumpConfiguration<T>, t: T, u: &DVector<T>) -> Result<JumpConfiguration<T>> {
    if !(t > T::zero() && t <= config.horizon()) {
        return Err(Error::Domain(format!("time {t} outside (0, {}]", config.horizon())));
    }
    if u.len() != config.mark_dim() {
        return Err(Error::Domain(format!(
            "mark dimension {} != configuration mark dimension {}",
            u.len(),
            config.mark_dim()
        )));
    }
    if u.iter().any(|x| !x.is_finite_value()) {
        return Err(Error::Domain("mark is not finite".into()));
    }
    if u.iter().all(|x| *x == T::zero()) {
        return Err(Error::Domain("cannot add a zero mark".into()));
    }
    let idx = config.points().partition_point(|p| p.time < t);
    if let Some(existing) = config.points().get(idx).filter(|p| p.time == t) {
        if &existing.mark == u {
            return Ok(config.clone());
        }
        return Err(Error::Domain(format!("time {t} already carries a different mark")));
    }
    let mut out = config.clone();
    out.insert_unchecked(idx, JumpPoint::new(t, u.clone()));
    Ok(out)
}

/// ε⁻_{(t,u)}: removes the point if present, identity otherwise.
pub fn remove_particle<T: Scalar>(config: &JumpConfiguration<T>, t: T, u: &DVector<T>) -> JumpConfiguration<T> {
    match config.find(t, u) {
        Some(idx) => {
            let mut out = config.clone();
            out.remove_unchecked(idx);
            out
        }
        None => config.clone(),
    }
}
