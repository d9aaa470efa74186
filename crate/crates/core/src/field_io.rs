//! SpinorField import/export.
//!
//! JSON: `{"n", "M", "L", "N", "space", "values": [[re, im], ...]}`.
//! Binary: magic `SPINOR01`, then little-endian `u32 n, u32 M, f64 L, u32 N,
//! u8 space` (0 position, 1 momentum), then `f64` pairs. Values are row-major
//! over sites (axis 0 slowest, centered ordering) with the `N` components of a
//! site contiguous.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec, Space, SpinorField};
use crate::linalg::C64;

const MAGIC: &[u8; 8] = b"SPINOR01";

#[derive(Debug, Serialize, Deserialize)]
pub struct FieldJson {
    pub n: usize,
    #[serde(rename = "M")]
    pub points: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub ncomp: usize,
    pub space: Space,
    pub values: Vec<[f64; 2]>,
}

impl From<&SpinorField> for FieldJson {
    fn from(f: &SpinorField) -> Self {
        let spec = f.grid().spec();
        Self {
            n: spec.n,
            points: spec.points,
            length: spec.length,
            ncomp: f.ncomp(),
            space: f.space(),
            values: f.values().iter().map(|v| [v.re, v.im]).collect(),
        }
    }
}

impl FieldJson {
    pub fn into_field(self) -> Result<SpinorField> {
        let grid = Grid::new(GridSpec::new(self.n, self.points, self.length)?)?;
        let values = self.values.iter().map(|&[re, im]| C64::new(re, im)).collect();
        SpinorField::from_values(&grid, self.ncomp, self.space, values)
    }
}

pub fn write_json<W: Write>(f: &SpinorField, w: W) -> Result<()> {
    serde_json::to_writer(w, &FieldJson::from(f))?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> Result<SpinorField> {
    let j: FieldJson = serde_json::from_reader(r)?;
    j.into_field()
}

pub fn write_binary<W: Write>(f: &SpinorField, mut w: W) -> Result<()> {
    let spec = f.grid().spec();
    w.write_all(MAGIC)?;
    w.write_all(&(spec.n as u32).to_le_bytes())?;
    w.write_all(&(spec.points as u32).to_le_bytes())?;
    w.write_all(&spec.length.to_le_bytes())?;
    w.write_all(&(f.ncomp() as u32).to_le_bytes())?;
    w.write_all(&[match f.space() {
        Space::Position => 0u8,
        Space::Momentum => 1u8,
    }])?;
    for v in f.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SpinorField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("not a spinor field file".into()));
    }
    let n = read_u32(&mut r)? as usize;
    let m = read_u32(&mut r)? as usize;
    let l = read_f64(&mut r)?;
    let ncomp = read_u32(&mut r)? as usize;
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let space = match tag[0] {
        0 => Space::Position,
        1 => Space::Momentum,
        t => return Err(Error::Parse(format!("unknown space tag {t}"))),
    };
    let grid = Grid::new(GridSpec::new(n, m, l)?)?;
    let count = grid.sites() * ncomp;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(C64::new(re, im));
    }
    SpinorField::from_values(&grid, ncomp, space, values)
}
