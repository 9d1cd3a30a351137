use std::io::{Read, Write};

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::{make_grid, Grid};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RWAV";

/// Lattice points in lexicographic order of `m`, each axis ascending from `-n/2`.
fn lexicographic(grid: &Grid) -> impl Iterator<Item = usize> + '_ {
    let n = grid.resolution() as i64;
    let dim = grid.dim();
    let total = grid.len();
    (0..total).map(move |rank| {
        let mut m = [0i64; 3];
        let mut rest = rank as i64;
        for a in (0..dim).rev() {
            m[a] = rest % n - n / 2;
            rest /= n;
        }
        grid.index_of(m).expect("lexicographic lattice point is on the grid")
    })
}

/// Write `"RWAV"`, `dim` and `resolution` as u32, `box_scale` as f64, then
/// interleaved re/im coefficients, all little-endian.
pub fn write_snapshot<W: Write>(field: &SpectralField, mut out: W) -> Result<()> {
    let g = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&(g.dim() as u32).to_le_bytes())?;
    out.write_all(&(g.resolution() as u32).to_le_bytes())?;
    out.write_all(&g.box_scale().to_le_bytes())?;
    let c = field.coeffs();
    let mut buf = Vec::with_capacity(16 * c.len());
    for i in lexicographic(g) {
        buf.extend_from_slice(&c[i].re.to_le_bytes());
        buf.extend_from_slice(&c[i].im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Read a snapshot. The real flag is restored when the coefficients are
/// conjugate symmetric to round-off.
pub fn read_snapshot<R: Read>(mut input: R) -> Result<SpectralField> {
    let mut head = [0u8; 20];
    input
        .read_exact(&mut head)
        .map_err(|_| Error::Snapshot("truncated header".into()))?;
    if &head[..4] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let dim = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let res = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let scale = f64::from_le_bytes(head[12..20].try_into().unwrap());
    let grid = make_grid(dim, scale, res).map_err(|e| Error::Snapshot(e.to_string()))?;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != 16 * grid.len() {
        return Err(Error::Snapshot(format!(
            "expected {} payload bytes, found {}",
            16 * grid.len(),
            body.len()
        )));
    }
    let mut coeffs = vec![Complex64::default(); grid.len()];
    for (rank, i) in lexicographic(&grid).enumerate() {
        let o = 16 * rank;
        let re = f64::from_le_bytes(body[o..o + 8].try_into().unwrap());
        let im = f64::from_le_bytes(body[o + 8..o + 16].try_into().unwrap());
        coeffs[i] = Complex64::new(re, im);
    }
    let field = SpectralField::from_coeffs(&grid, coeffs, false)?;
    let real = field.conjugate_defect() < 1e-13;
    Ok(field.with_real(real))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = make_grid(3, 1.0, 8).unwrap();
        let f = SpectralField::from_fn(&g, |x| (x[0] - 2.0 * x[1]).sin() * (x[2]).cos());
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"RWAV");
        assert_eq!(buf.len(), 20 + 16 * 512);
        let back = read_snapshot(&buf[..]).unwrap();
        assert!(back.is_real());
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn bad_magic_fails() {
        let buf = b"RWAX\x01\0\0\0\x08\0\0\0\0\0\0\0\0\0\xf0\x3f".to_vec();
        assert!(matches!(read_snapshot(&buf[..]), Err(Error::Snapshot(_))));
        assert!(read_snapshot(&b"RWAV"[..]).is_err());
    }
}
