//! Binary vector files: magic `LKV1`, 4 reserved zero bytes, `u64` length,
//! then little-endian `f64` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const MAGIC: &[u8; 4] = b"LKV1";
pub const HEADER_LEN: usize = 16;

pub fn write_vector_to<W: Write>(v: &[f64], mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[0u8; 4])?;
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vector_from<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).context("truncated header")?;
    if &header[..4] != MAGIC {
        bail!("bad magic {:?}, expected \"LKV1\"", &header[..4]);
    }
    let len = u64::from_le_bytes(header[8..].try_into().expect("8 bytes"));
    let len = usize::try_from(len).context("vector length overflows usize")?;
    let mut out = Vec::with_capacity(len.min(1 << 24));
    let mut buf = [0u8; 8];
    for i in 0..len {
        r.read_exact(&mut buf)
            .with_context(|| format!("truncated data: {i} of {len} values"))?;
        out.push(f64::from_le_bytes(buf));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        bail!("trailing bytes after {len} values");
    }
    Ok(out)
}

pub fn write_vector(v: &[f64], path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_vector_to(v, BufWriter::new(f))
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_vector_from(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let v = vec![1.5, -0.0, f64::MIN_POSITIVE, 1e300];
        let mut buf = Vec::new();
        write_vector_to(&v, &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 8 * v.len());
        assert_eq!(&buf[..4], b"LKV1");
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 4);
        let back = read_vector_from(buf.as_slice()).unwrap();
        assert_eq!(back.len(), v.len());
        for (a, b) in back.iter().zip(&v) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_malformed() {
        let mut buf = Vec::new();
        write_vector_to(&[1.0, 2.0], &mut buf).unwrap();
        assert!(read_vector_from(&buf[..20]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_vector_from(extra.as_slice()).is_err());
        let mut bad = buf;
        bad[0] = b'X';
        assert!(read_vector_from(bad.as_slice()).is_err());
    }
}
