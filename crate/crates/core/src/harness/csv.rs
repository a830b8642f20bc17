//! CSV helpers: comma separated, header row, 17 significant digits.

use std::io::Write;

use crate::error::Result;

/// Scientific notation with 17 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_row<W: Write + ?Sized>(w: &mut W, fields: &[String]) -> Result<()> {
    writeln!(w, "{}", fields.join(","))?;
    Ok(())
}

pub fn write_header<W: Write + ?Sized>(w: &mut W, columns: &[&str]) -> Result<()> {
    writeln!(w, "{}", columns.join(","))?;
    Ok(())
}
