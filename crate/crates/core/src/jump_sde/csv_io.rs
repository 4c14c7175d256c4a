use std::io::Write;

use super::solver::{FlowState, Trajectory};
use crate::csv_util::{fmt_scalar, write_rows};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One row per event: time, kind, X, then K and K̄ row-major when a flow
/// state is given.
pub fn write_trajectory_csv<T: Scalar, W: Write>(
    trajectory: &Trajectory<T>,
    flow: Option<&FlowState<T>>,
    out: W,
) -> Result<()> {
    let d = trajectory.initial().len();
    if let Some(f) = flow {
        if f.records().len() != trajectory.events().len() {
            return Err(Error::Input("flow state does not match the trajectory".into()));
        }
    }
    let with_kbar = flow.is_some_and(|f| f.has_inverse());
    let mut header = vec!["event_time".to_string(), "kind".to_string()];
    header.extend((0..d).map(|i| format!("x_{i}")));
    if flow.is_some() {
        header.extend((0..d * d).map(|i| format!("k_{}_{}", i / d, i % d)));
    }
    if with_kbar {
        header.extend((0..d * d).map(|i| format!("kbar_{}_{}", i / d, i % d)));
    }
    let rows = trajectory.events().iter().enumerate().map(|(n, e)| {
        let mut row = vec![fmt_scalar(e.time), e.kind.label().to_string()];
        row.extend(e.value.iter().map(|x| fmt_scalar(*x)));
        if let Some(f) = flow {
            let r = &f.records()[n];
            row.extend((0..d * d).map(|i| fmt_scalar(r.k[(i / d, i % d)])));
            if let Some(kb) = r.kbar.as_ref().filter(|_| with_kbar) {
                row.extend((0..d * d).map(|i| fmt_scalar(kb[(i / d, i % d)])));
            }
        }
        row
    });
    write_rows(out, &header, rows)
}
