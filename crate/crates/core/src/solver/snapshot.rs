//! Field persistence.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! b"DLAB" | version: u32 | nodes: u64 | times: u64
//! coords: nodes × f64 | times: times × f64 | values: nodes·times × f64 (time-major)
//! ```

use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use super::SpaceTimeField;

pub const MAGIC: [u8; 4] = *b"DLAB";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed data: {0}")]
    Malformed(String),
}

/// Lattice data read back from disk, detached from any model space.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub coords: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn of(field: &SpaceTimeField) -> Self {
        Self {
            coords: field.grid().coordinates(),
            times: field.times(),
            values: field.values().to_vec(),
        }
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[k * self.coords.len() + i]
    }
}

pub fn write_snapshot<W: Write>(field: &SpaceTimeField, mut w: W) -> io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(field.nodes() as u64).to_le_bytes())?;
    w.write_all(&(field.n_times() as u64).to_le_bytes())?;
    let coords = field.grid().coordinates();
    for v in coords
        .iter()
        .chain(field.times().iter())
        .chain(field.values())
    {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, SnapshotError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>, SnapshotError> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot, SnapshotError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(SnapshotError::BadMagic(magic));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    let version = u32::from_le_bytes(v);
    if version != FORMAT_VERSION {
        return Err(SnapshotError::UnsupportedVersion(version));
    }
    let nodes = read_u64(&mut r)? as usize;
    let times = read_u64(&mut r)? as usize;
    let total = nodes
        .checked_mul(times)
        .filter(|t| *t <= (1 << 34))
        .ok_or_else(|| SnapshotError::Malformed(format!("dims {nodes} x {times}")))?;
    let coords = read_f64s(&mut r, nodes)?;
    let t = read_f64s(&mut r, times)?;
    let values = read_f64s(&mut r, total)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(SnapshotError::Malformed("trailing bytes".into()));
    }
    Ok(Snapshot {
        coords,
        times: t,
        values,
    })
}

/// One `x t u` row per lattice point, time-major, after a `# x t u` header.
pub fn write_columns<W: Write>(field: &SpaceTimeField, mut w: W) -> io::Result<()> {
    writeln!(w, "# x t u")?;
    let xs = field.grid().coordinates();
    for k in 0..field.n_times() {
        let t = field.time(k);
        for (x, u) in xs.iter().zip(field.slice(k)) {
            writeln!(w, "{x:e} {t:e} {u:e}")?;
        }
    }
    w.flush()
}

pub fn read_columns<R: BufRead>(r: R) -> Result<Snapshot, SnapshotError> {
    let mut coords = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
        let row = parsed
            .ok()
            .filter(|r| r.len() == 3)
            .ok_or_else(|| SnapshotError::Malformed(format!("line {}: {line:?}", lineno + 1)))?;
        if times.last() != Some(&row[1]) {
            times.push(row[1]);
        }
        if times.len() == 1 {
            coords.push(row[0]);
        }
        values.push(row[2]);
    }
    if coords.is_empty() || values.len() != coords.len() * times.len() {
        return Err(SnapshotError::Malformed(format!(
            "{} values for {} nodes and {} times",
            values.len(),
            coords.len(),
            times.len()
        )));
    }
    Ok(Snapshot {
        coords,
        times,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, ModelSpace, Weight};

    fn field() -> SpaceTimeField {
        let s = ModelSpace::line(1, Weight::Zero, Domain::neumann(0.0, 1.0)).unwrap();
        let g = s.grid(6).unwrap();
        let values = (0..18).map(|i| (i as f64 * 0.37).sin()).collect();
        SpaceTimeField::new(s, g, 0.5, 0.25, values).unwrap()
    }

    #[test]
    fn binary_round_trip_is_bitwise() {
        let f = field();
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"DLAB");
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 8 * (6 + 3 + 18));
        let s = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(s, Snapshot::of(&f));
    }

    #[test]
    fn header_errors() {
        let f = field();
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_snapshot(bad.as_slice()),
            Err(SnapshotError::BadMagic(_))
        ));
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(
            read_snapshot(bad.as_slice()),
            Err(SnapshotError::UnsupportedVersion(9))
        ));
        assert!(matches!(
            read_snapshot(&buf[..40]),
            Err(SnapshotError::Io(_))
        ));
    }

    #[test]
    fn columns_round_trip() {
        let f = field();
        let mut buf = Vec::new();
        write_columns(&f, &mut buf).unwrap();
        let s = read_columns(buf.as_slice()).unwrap();
        assert_eq!(s, Snapshot::of(&f));
    }
}
