//! Little-endian framing helpers shared by the index snapshot formats.
//!
//! Every snapshot starts with a 4-byte magic and a 1-byte format version.

use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot I/O: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported snapshot version {found} (expected {expected})")]
    Version { expected: u8, found: u8 },
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

pub(crate) fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], version: u8) -> io::Result<()> {
    w.write_all(magic)?;
    w.write_u8(version)
}

pub(crate) fn read_header<R: Read>(r: &mut R, magic: &[u8; 4], version: u8) -> Result<(), SnapshotError> {
    let mut found = [0u8; 4];
    r.read_exact(&mut found)?;
    if &found != magic {
        return Err(SnapshotError::BadMagic { expected: *magic, found });
    }
    let v = r.read_u8()?;
    if v != version {
        return Err(SnapshotError::Version { expected: version, found: v });
    }
    Ok(())
}

pub(crate) fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

pub(crate) fn read_str<R: Read>(r: &mut R) -> Result<String, SnapshotError> {
    let len = r.read_u32::<LittleEndian>()? as usize;
    if len > 1 << 24 {
        return Err(SnapshotError::Corrupt(format!("string length {len}")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| SnapshotError::Corrupt(e.to_string()))
}

pub(crate) fn write_len<W: Write>(w: &mut W, n: usize) -> io::Result<()> {
    w.write_u64::<LittleEndian>(n as u64)
}

pub(crate) fn read_len<R: Read>(r: &mut R, limit: usize) -> Result<usize, SnapshotError> {
    let n = r.read_u64::<LittleEndian>()? as usize;
    if n > limit {
        return Err(SnapshotError::Corrupt(format!("count {n} exceeds {limit}")));
    }
    Ok(n)
}
