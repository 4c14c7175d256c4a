//! Shared CSV conventions: mandatory header row, 17 significant digits.

use std::io::Write;

use crate::error::Result;
use crate::scalar::Scalar;

/// Formats with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_scalar<T: Scalar>(x: T) -> String {
    fmt_real(x.as_f64())
}

pub fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

pub fn write_rows<W: Write>(out: W, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
