//! Binary snapshots and CSV export.
//!
//! Snapshot layout (little endian): `b"FSC1"`, `u32 n_points`, `f64 x_min`,
//! `f64 dx`, `f64 time`, then `n_points` pairs of `f64 re, f64 im`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::Grid1D;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"FSC1";

pub fn write_snapshot<W: Write>(mut w: W, field: &WaveField) -> Result<()> {
    let g = field.grid();
    let n = u32::try_from(g.n_points())
        .map_err(|_| Error::Format("grid too large for snapshot header".into()))?;
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&g.x_min().to_le_bytes())?;
    w.write_all(&g.dx().to_le_bytes())?;
    w.write_all(&field.time().to_le_bytes())?;
    for z in field.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<WaveField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Format(format!("bad snapshot magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let x_min = read_f64(&mut r)?;
    let dx = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let grid = Grid1D::new(x_min, dx, n)?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(Complex64::new(re, im));
    }
    WaveField::new(grid, values, time)
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn save_snapshot(path: impl AsRef<Path>, field: &WaveField) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), field)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<WaveField> {
    read_snapshot(BufReader::new(File::open(path)?))
}

/// Minimal CSV writer: header row, ',' separator, LF endings, shortest
/// round-trip formatting for floats.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) -> Result<()> {
        if cells.len() != self.columns {
            return Err(Error::Format(format!(
                "row has {} cells, header has {}",
                cells.len(),
                self.columns
            )));
        }
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn floats(&mut self, values: &[f64]) -> Result<()> {
        let cells: Vec<Cell<'_>> = values.iter().map(|v| Cell::F(*v)).collect();
        self.row(&cells)
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

impl CsvWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, header: &[&str]) -> Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), header)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    F(f64),
    I(i64),
    S(&'a str),
}

impl Cell<'_> {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format!("{v}"),
            Cell::I(v) => format!("{v}"),
            Cell::S(s) => s.to_string(),
        }
    }
}

/// Columns `x, re, im, abs2`.
pub fn write_field_csv<W: Write>(out: W, field: &WaveField) -> Result<()> {
    let mut csv = CsvWriter::new(out, &["x", "re", "im", "abs2"])?;
    let g = field.grid();
    for (i, z) in field.values().iter().enumerate() {
        csv.floats(&[g.x(i), z.re, z.im, z.norm_sqr()])?;
    }
    csv.finish()?;
    Ok(())
}

pub fn save_field_csv(path: impl AsRef<Path>, field: &WaveField) -> Result<()> {
    write_field_csv(BufWriter::new(File::create(path)?), field)
}

/// Reads a headered numeric CSV into rows; the header must equal `expected`.
pub fn read_numeric_csv<R: Read>(input: R, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    if header != expected {
        return Err(Error::Format(format!(
            "CSV header {header:?}, expected {expected:?}"
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| {
                c.trim().parse::<f64>().map_err(|e| {
                    Error::Format(format!("line {}: cannot parse {c:?}: {e}", lineno + 2))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != expected.len() {
            return Err(Error::Format(format!(
                "line {}: {} cells, expected {}",
                lineno + 2,
                row.len(),
                expected.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let g = Grid1D::new(-3.5, 0.25, 32).unwrap();
        let f = WaveField::from_fn(g, 1.75, |x| Complex64::new(x.sin(), -x * 0.1)).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 24 + 32 * 16);
        assert_eq!(&buf[..4], b"FSC1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 32);
        let back = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn snapshot_rejects_garbage() {
        assert!(matches!(
            read_snapshot(&b"FSC2\0\0\0\0"[..]),
            Err(Error::Format(_))
        ));
        assert!(read_snapshot(&b"FSC1\x10\0"[..]).is_err());
    }

    #[test]
    fn field_csv_columns() {
        let g = Grid1D::new(0.0, 0.5, 16).unwrap();
        let f = WaveField::from_fn(g, 0.0, |x| Complex64::new(x, 1.0)).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,re,im,abs2"));
        assert_eq!(lines.next(), Some("0,0,1,1"));
        assert_eq!(lines.next(), Some("0.5,0.5,1,1.25"));
        assert!(!text.contains('\r'));
        let rows = read_numeric_csv(text.as_bytes(), &["x", "re", "im", "abs2"]).unwrap();
        assert_eq!(rows.len(), 16);
        assert_eq!(rows[3], vec![1.5, 1.5, 1.0, 3.25]);
    }
}
