//! WGL1 binary and CSV encodings of scalar fields.
//!
//! WGL1 layout: one ASCII header line `WGL1 nx ny h x0 y0 boundary_mode\n`
//! followed by `nx*ny` little-endian IEEE-754 doubles, `y` outer, `x` inner.

use std::io::{BufRead, Write};

use super::{Boundary, Field, Grid};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn write_wgl1<T: Real, W: Write>(field: &Field<T>, mut out: W) -> Result<()> {
    let g = field.grid();
    writeln!(
        out,
        "WGL1 {} {} {} {} {} {}",
        g.nx,
        g.ny,
        g.h.as_f64(),
        g.x0.as_f64(),
        g.y0.as_f64(),
        g.boundary.as_str()
    )?;
    let mut buf = Vec::with_capacity(8 * g.len());
    for v in field.values() {
        buf.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_wgl1<R: BufRead>(mut input: R) -> Result<Field<f64>> {
    let mut header = String::new();
    input.read_line(&mut header)?;
    let header = header.strip_suffix('\n').ok_or_else(|| Error::Format("header line not terminated".into()))?;
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 7 || parts[0] != "WGL1" {
        return Err(Error::Format(format!("bad header '{header}'")));
    }
    let count = |s: &str| s.parse::<usize>().map_err(|e| Error::Format(format!("{s}: {e}")));
    let real = |s: &str| s.parse::<f64>().map_err(|e| Error::Format(format!("{s}: {e}")));
    let boundary =
        Boundary::parse(parts[6]).ok_or_else(|| Error::Format(format!("unknown boundary mode '{}'", parts[6])))?;
    let grid =
        Grid::new(count(parts[1])?, count(parts[2])?, real(parts[3])?, real(parts[4])?, real(parts[5])?, boundary)?;
    let mut bytes = vec![0u8; 8 * grid.len()];
    input.read_exact(&mut bytes).map_err(|_| Error::Format("payload shorter than nx*ny doubles".into()))?;
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    Field::new(grid, values)
}

/// `x,y,value` rows with a header line.
pub fn write_csv<T: Real, W: Write>(field: &Field<T>, mut out: W) -> Result<()> {
    let g = field.grid();
    writeln!(out, "x,y,value")?;
    for j in 0..g.ny {
        for i in 0..g.nx {
            writeln!(out, "{},{},{}", g.x(i).as_f64(), g.y(j).as_f64(), field.at(i, j).as_f64())?;
        }
    }
    Ok(())
}
