use std::io::Write;

use crate::csv_util::{fmt_scalar, write_rows};
use crate::error::Result;
use crate::levy_sim::config::JumpConfiguration;
use crate::levy_sim::path::CadlagPath;
use crate::scalar::Scalar;

/// Columns `time, mark_1..mark_r`.
pub fn write_configuration_csv<T: Scalar, W: Write>(config: &JumpConfiguration<T>, out: W) -> Result<()> {
    let mut header = vec!["time".to_string()];
    header.extend((1..=config.mark_dim()).map(|i| format!("mark_{i}")));
    let rows = config.points().iter().map(|p| {
        let mut row = vec![fmt_scalar(p.time)];
        row.extend(p.mark.iter().map(|x| fmt_scalar(*x)));
        row
    });
    write_rows(out, &header, rows)
}

/// Columns `t, value_1..value_d` on an equally spaced grid of `points` times.
pub fn write_path_grid_csv<T: Scalar, W: Write>(path: &CadlagPath<T>, points: usize, out: W) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=path.dim()).map(|i| format!("value_{i}")));
    let rows = path.sample_grid(points).into_iter().map(|(t, v)| {
        let mut row = vec![fmt_scalar(t)];
        row.extend(v.iter().map(|x| fmt_scalar(*x)));
        row
    });
    write_rows(out, &header, rows)
}
