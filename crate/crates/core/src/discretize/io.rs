//! GridFunction files: a JSON header followed by little-endian `f64` samples,
//! and a CSV form for small grids.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::{Alignment, GridBox, GridFunction};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"GRIDF64\0";
pub const FORMAT_VERSION: u32 = 1;
/// Largest grid written as CSV.
pub const CSV_MAX_SAMPLES: usize = 1 << 20;

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    lower: Vec<f64>,
    upper: Vec<f64>,
    h: Vec<f64>,
    alignment: Alignment,
    samples: usize,
    provenance: String,
    inner_supported: bool,
}

/// Layout: 8-byte magic, `u64` LE header length, JSON header, then the
/// samples as `f64` LE in row-major order.
pub fn write_binary(g: &GridFunction, mut w: impl Write) -> Result<()> {
    let grid = g.grid();
    let header = Header {
        version: FORMAT_VERSION,
        lower: grid.lower().to_vec(),
        upper: grid.upper().to_vec(),
        h: grid.spacing().to_vec(),
        alignment: grid.alignment(),
        samples: g.samples().len(),
        provenance: g.provenance().to_string(),
        inner_supported: g.is_inner_supported(),
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(8 * g.samples().len());
    for v in g.samples() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<GridFunction> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::param("not a grid function file (bad magic)"));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;
    if header.version != FORMAT_VERSION {
        return Err(Error::param(format!(
            "unsupported grid file version {}",
            header.version
        )));
    }
    let grid = GridBox::new(header.lower, header.upper, header.h, header.alignment)?;
    let mut raw = vec![0u8; 8 * header.samples];
    r.read_exact(&mut raw)?;
    let samples = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let mut g = GridFunction::new(grid, samples, header.provenance)?;
    if header.inner_supported {
        g.set_inner_supported();
    }
    Ok(g)
}

pub fn save_binary(g: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_binary(g, std::io::BufWriter::new(f))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<GridFunction> {
    let f = std::fs::File::open(path)?;
    read_binary(std::io::BufReader::new(f))
}

/// Rows `x_1, .., x_n, value` in storage order.
pub fn write_csv(g: &GridFunction, w: impl Write) -> Result<()> {
    if g.samples().len() > CSV_MAX_SAMPLES {
        return Err(Error::param(format!(
            "grid has {} samples; CSV export is limited to {CSV_MAX_SAMPLES}",
            g.samples().len()
        )));
    }
    let n = g.grid().dim();
    let mut out = csv::Writer::from_writer(w);
    let mut head: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    head.push("value".into());
    out.write_record(&head)?;
    let mut err = None;
    g.grid().for_each_point(|lin, x| {
        if err.is_some() {
            return;
        }
        let mut row: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
        row.push(format!("{:e}", g.samples()[lin]));
        if let Err(e) = out.write_record(&row) {
            err = Some(e);
        }
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::expr::{Aabb, FnExpr};
    use crate::discretize::grid::sample;

    #[test]
    fn binary_roundtrip() {
        let grid = GridBox::uniform(&Aabb::cube(2, 1.0), 0.125, Alignment::NodeCentered).unwrap();
        let f = FnExpr::new(2, "zg", |x| x[1] * (-(x[0] * x[0] + x[1] * x[1])).exp())
            .with_support(Aabb::cube(2, 0.5));
        let g = sample(&f, &grid).unwrap();
        let mut buf = Vec::new();
        write_binary(&g, &mut buf).unwrap();
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        assert!(read_binary(&buf[1..]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let grid = GridBox::uniform(&Aabb::cube(1, 1.0), 0.5, Alignment::CellCentered).unwrap();
        let g = sample(&FnExpr::new(1, "x", |x| x[0]), &grid).unwrap();
        let mut buf = Vec::new();
        write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,value");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "-7.5e-1,-7.5e-1");
    }
}
