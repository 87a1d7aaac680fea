//! Grid snapshots: `H`, `W`, `C` as u32, the simulation time as f64, then
//! `H·W·C` f32 values in row-major cell order.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nca_core::{CellGrid, GridShape};

use super::{dim, put_f32s, FormatError, Reader};

pub const STATE_HEADER_LEN: usize = 20;

pub fn encode_state(grid: &CellGrid) -> Result<Vec<u8>, FormatError> {
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| FormatError::Oversized);
    let mut out = Vec::with_capacity(STATE_HEADER_LEN + 4 * grid.data().len());
    out.extend_from_slice(&to_u32(grid.height())?.to_le_bytes());
    out.extend_from_slice(&to_u32(grid.width())?.to_le_bytes());
    out.extend_from_slice(&to_u32(grid.channels())?.to_le_bytes());
    out.extend_from_slice(&grid.time().to_le_bytes());
    put_f32s(&mut out, grid.data());
    Ok(out)
}

pub fn decode_state(bytes: &[u8]) -> Result<CellGrid, FormatError> {
    let mut r = Reader::new(bytes, "state snapshot");
    let height = dim(r.u32()?)?;
    let width = dim(r.u32()?)?;
    let channels = dim(r.u32()?)?;
    let time = r.f64()?;
    let shape = GridShape::new(height, width, channels)?;
    let len = height
        .checked_mul(width)
        .and_then(|v| v.checked_mul(channels))
        .ok_or(FormatError::Oversized)?;
    let data = r.f32s(len)?;
    r.finish()?;
    if !time.is_finite() {
        return Err(FormatError::Invalid(nca_core::Error::InvalidParameter(
            "snapshot time must be finite",
        )));
    }
    Ok(CellGrid::from_vec(shape, data, time)?)
}

pub fn write_state(grid: &CellGrid, mut sink: impl Write) -> Result<(), FormatError> {
    sink.write_all(&encode_state(grid)?)?;
    Ok(())
}

pub fn read_state(mut source: impl Read) -> Result<CellGrid, FormatError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode_state(&bytes)
}

pub fn save_state(grid: &CellGrid, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, encode_state(grid)?)?;
    Ok(())
}

pub fn load_state(path: impl AsRef<Path>) -> Result<CellGrid, FormatError> {
    decode_state(&fs::read(path)?)
}
