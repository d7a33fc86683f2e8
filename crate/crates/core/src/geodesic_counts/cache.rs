//! Binary cache of a [`TraceTable`].
//!
//! Layout, all little-endian: magic `GLTT`, version `u32`, `t_max: u64`, then
//! one `(t, h*, primitive)` triple of `u64` per trace from 3 to `t_max`.

use std::io::{Read, Write};

use super::{TraceTable, FIRST_TRACE};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: [u8; 4] = *b"GLTT";
pub const CACHE_VERSION: u32 = 1;

pub fn write_cache<W: Write>(table: &TraceTable, mut out: W) -> Result<()> {
    out.write_all(&CACHE_MAGIC)?;
    out.write_all(&CACHE_VERSION.to_le_bytes())?;
    out.write_all(&table.t_max().to_le_bytes())?;
    for r in table.records() {
        for v in [r.t, r.total_classes, r.primitive_classes] {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_cache<R: Read>(mut input: R) -> Result<TraceTable> {
    let mut magic = [0u8; 4];
    read_exact(&mut input, &mut magic)?;
    if magic != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let mut word = [0u8; 4];
    read_exact(&mut input, &mut word)?;
    let version = u32::from_le_bytes(word);
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let t_max = read_u64(&mut input)?;
    if t_max < FIRST_TRACE {
        return Err(Error::Cache(format!("t_max = {t_max} is too small")));
    }
    let mut counts = Vec::new();
    for t in FIRST_TRACE..=t_max {
        let stored = read_u64(&mut input)?;
        if stored != t {
            return Err(Error::Cache(format!("expected trace {t}, found {stored}")));
        }
        counts.push((t, read_u64(&mut input)?, read_u64(&mut input)?));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Cache("trailing bytes".into()));
    }
    TraceTable::from_counts(&counts).map_err(|e| Error::Cache(e.to_string()))
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<()> {
    input.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Cache("truncated file".into())
        } else {
            Error::Io(e)
        }
    })
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_exact(input, &mut buf)?;
    Ok(u64::from_le_bytes(buf))
}
