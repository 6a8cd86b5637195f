use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{Field, GridSpec, Representation};
use crate::error::{Error, Result};

pub const FIELD_MAGIC: &[u8; 4] = b"FRSF";
pub const FIELD_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

/// Writes `field` as a 32-byte header followed by little-endian `(re, im)`
/// pairs in row-major order.
pub fn write_field<W: Write>(mut w: W, field: &Field) -> Result<()> {
    let g = field.grid();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(FIELD_MAGIC);
    header[4..8].copy_from_slice(&FIELD_VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&(g.dim() as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(g.size() as u32).to_le_bytes());
    header[16..24].copy_from_slice(&g.length().to_le_bytes());
    header[24] = match field.representation() {
        Representation::Physical => 0,
        Representation::Spectral => 1,
    };
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(field.data().len() * 16);
    for c in field.data() {
        body.extend_from_slice(&c.re.to_le_bytes());
        body.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&body)?;
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field`].
pub fn read_field<R: Read>(mut r: R) -> Result<Field> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("short header: {e}")))?;
    if &header[0..4] != FIELD_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != FIELD_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32_at(8) as usize;
    let size = u32_at(12) as usize;
    let length = f64::from_le_bytes(header[16..24].try_into().unwrap());
    let repr = match header[24] {
        0 => Representation::Physical,
        1 => Representation::Spectral,
        b => return Err(Error::Format(format!("unknown representation tag {b}"))),
    };
    let grid = GridSpec::new(dim, size, length).map_err(|e| Error::Format(e.to_string()))?;
    let mut body = vec![0u8; grid.len() * 16];
    r.read_exact(&mut body)
        .map_err(|e| Error::Format(format!("truncated data: {e}")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after data".into()));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Field::from_data(Arc::new(grid), repr, data)
}
