//! Raw field dump: 32-byte header (magic `MHDF1`, u32 grid size, u8 component
//! count, u8 flags, zero padding), then little-endian f64 samples x-fastest.

use super::{Field3, Grid, ScalarField, TensorField3};
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 5] = b"MHDF1";
pub const HEADER_LEN: usize = 32;

pub const FLAG_MEAN_FREE: u8 = 0b0000_0001;

pub fn write_header(w: &mut impl Write, n: u32, ncomp: u8, flags: u8) -> Result<()> {
    let mut hdr = [0u8; HEADER_LEN];
    hdr[..5].copy_from_slice(MAGIC);
    hdr[5..9].copy_from_slice(&n.to_le_bytes());
    hdr[9] = ncomp;
    hdr[10] = flags;
    w.write_all(&hdr)?;
    Ok(())
}

pub fn read_header(r: &mut impl Read) -> Result<(u32, u8, u8)> {
    let mut hdr = [0u8; HEADER_LEN];
    r.read_exact(&mut hdr)?;
    if &hdr[..5] != MAGIC {
        return Err(Error::BadDump(format!("bad magic {:?}", &hdr[..5])));
    }
    let n = u32::from_le_bytes(hdr[5..9].try_into().unwrap());
    let ncomp = hdr[9];
    let flags = hdr[10];
    if hdr[11..].iter().any(|&b| b != 0) {
        return Err(Error::BadDump("nonzero header padding".into()));
    }
    if n == 0 || !(n as usize).is_power_of_two() {
        return Err(Error::BadDump(format!("grid size {n} not a power of two")));
    }
    Ok((n, ncomp, flags))
}

fn write_samples(w: &mut impl Write, data: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(data.len() * 8);
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_samples(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn write_field3(path: &Path, f: &Field3, flags: u8) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, f.grid.n as u32, 3, flags)?;
    for c in &f.comps {
        write_samples(&mut w, c)?;
    }
    Ok(())
}

pub fn read_field3(path: &Path) -> Result<(Field3, u8)> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let (n, ncomp, flags) = read_header(&mut r)?;
    if ncomp != 3 {
        return Err(Error::BadDump(format!("expected 3 components, found {ncomp}")));
    }
    let grid = Grid::new(n as usize)?;
    let comps = [
        read_samples(&mut r, grid.len())?,
        read_samples(&mut r, grid.len())?,
        read_samples(&mut r, grid.len())?,
    ];
    Ok((Field3::from_components(grid, comps), flags))
}

pub fn write_scalar(path: &Path, f: &ScalarField, flags: u8) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, f.grid.n as u32, 1, flags)?;
    write_samples(&mut w, &f.data)
}

pub fn write_tensor(path: &Path, t: &TensorField3, flags: u8) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, t.grid.n as u32, 9, flags)?;
    for c in &t.comps {
        write_samples(&mut w, c)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_validation() {
        let dir = std::env::temp_dir().join(format!("mhdf1-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.mhdf");
        let grid = Grid::new(8).unwrap();
        let f = Field3::from_fn(grid, |x, y, z| [x.sin(), (y + z).cos(), 0.25]);
        write_field3(&path, &f, FLAG_MEAN_FREE).unwrap();
        let (g, flags) = read_field3(&path).unwrap();
        assert_eq!(flags, FLAG_MEAN_FREE);
        assert!(g.sub(&f).l2_mean() == 0.0);
        // corrupt the magic
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(read_field3(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
