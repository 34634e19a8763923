//! File formats: WFGRID fields, PGM masks, gnuplot data and atomic writes.
//!
//! WFGRID layout (little-endian): `b"WFG1"`, `u32 nx`, `u32 ny`, `f64 pitch`,
//! then `nx * ny` pairs of `f64 re, f64 im`, row-major with y outer.

use std::f64::consts::PI;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::reconstruct::ReconstructionResult;
use crate::wavefield::{GridSpec, TransverseWavefunction};

pub const WFGRID_MAGIC: &[u8; 4] = b"WFG1";
const WFGRID_HEADER_LEN: usize = 4 + 4 + 4 + 8;

pub fn encode_wfgrid(f: &TransverseWavefunction) -> Vec<u8> {
    let g = f.grid();
    let mut buf = Vec::with_capacity(WFGRID_HEADER_LEN + 16 * g.len());
    buf.extend_from_slice(WFGRID_MAGIC);
    buf.extend_from_slice(&(g.nx() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.ny() as u32).to_le_bytes());
    buf.extend_from_slice(&g.pitch().to_le_bytes());
    for a in f.amps() {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    buf
}

pub fn decode_wfgrid(bytes: &[u8]) -> Result<TransverseWavefunction> {
    if bytes.len() < WFGRID_HEADER_LEN {
        return Err(Error::format("WFGRID payload shorter than its header"));
    }
    if &bytes[..4] != WFGRID_MAGIC {
        return Err(Error::format("bad WFGRID magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny, pitch) = (u32_at(4), u32_at(8), f64_at(12));
    let cells = nx.checked_mul(ny).ok_or_else(|| Error::format("WFGRID dimensions overflow"))?;
    let expected = WFGRID_HEADER_LEN + 16 * cells;
    if bytes.len() != expected {
        return Err(Error::format(format!("WFGRID payload is {} bytes, header implies {expected}", bytes.len())));
    }
    let grid = GridSpec::new(nx, ny, pitch).map_err(|e| Error::format(e.to_string()))?;
    let amps = (0..cells)
        .map(|i| {
            let o = WFGRID_HEADER_LEN + 16 * i;
            Complex64::new(f64_at(o), f64_at(o + 8))
        })
        .collect();
    TransverseWavefunction::new(grid, amps).map_err(|e| Error::format(e.to_string()))
}

pub fn read_wfgrid(path: impl AsRef<Path>) -> Result<TransverseWavefunction> {
    decode_wfgrid(&fs::read(path)?)
}

pub fn write_wfgrid(path: impl AsRef<Path>, f: &TransverseWavefunction) -> Result<()> {
    write_atomic(path, &encode_wfgrid(f))
}

/// Writes via a sibling temp file and rename, so readers never see a
/// partially written file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let name = path.file_name().ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// 8-bit binary grayscale image (PGM `P5`).
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    /// Row-major, top row first.
    pub pixels: Vec<u8>,
}

/// How gray levels map onto a complex mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    /// `v / maxval` in [0, 1].
    Amplitude,
    /// `exp(i 2 pi v / (maxval + 1))`, phase in [0, 2 pi).
    Phase,
}

impl Pgm {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut token = || -> Result<String> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::format("truncated PGM header"));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P5" {
            return Err(Error::format("only binary PGM (P5) is supported"));
        }
        let num = |s: String| s.parse::<usize>().map_err(|_| Error::format(format!("bad PGM number {s:?}")));
        let width = num(token()?)?;
        let height = num(token()?)?;
        let maxval = num(token()?)?;
        if width == 0 || height == 0 || maxval == 0 || maxval > 255 {
            return Err(Error::format("PGM must be 8-bit with non-zero size"));
        }
        // Exactly one whitespace byte separates the header from the raster.
        let data_start = pos + 1;
        let end = data_start + width * height;
        if bytes.len() < end {
            return Err(Error::format("truncated PGM raster"));
        }
        Ok(Self { width, height, maxval: maxval as u8, pixels: bytes[data_start..end].to_vec() })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Complex mask on `grid`; image rows are flipped so the picture is upright
    /// in the y-up grid convention.
    pub fn to_mask(&self, grid: &GridSpec, kind: MaskKind) -> Result<Vec<Complex64>> {
        if self.width != grid.nx() || self.height != grid.ny() {
            return Err(Error::invalid(format!(
                "PGM is {}x{}, grid is {}x{}",
                self.width,
                self.height,
                grid.nx(),
                grid.ny()
            )));
        }
        let m = self.maxval as f64;
        let mut mask = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny() {
            let row = grid.ny() - 1 - iy;
            for ix in 0..grid.nx() {
                let v = self.pixels[row * self.width + ix] as f64;
                mask.push(match kind {
                    MaskKind::Amplitude => Complex64::new(v / m, 0.0),
                    MaskKind::Phase => Complex64::from_polar(1.0, 2.0 * PI * v / (m + 1.0)),
                });
            }
        }
        Ok(mask)
    }
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Pgm> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    Pgm::parse(&bytes)
}

/// gnuplot `splot`-ready text: `x_m y_m value` per line, blank line between rows.
pub fn grid_data(grid: &GridSpec, values: &[f64]) -> String {
    let mut out = String::new();
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let (x, y) = grid.coords(ix, iy);
            out.push_str(&format!("{x:.6e} {y:.6e} {:.12e}\n", values[grid.index(ix, iy)]));
        }
        out.push('\n');
    }
    out
}

/// Writes `density.dat` and `phase.dat` for a reconstruction into `dir`.
pub fn write_plot_data(dir: impl AsRef<Path>, rec: &ReconstructionResult) -> Result<()> {
    let dir = dir.as_ref();
    write_atomic(dir.join("density.dat"), grid_data(&rec.grid, &rec.density_map).as_bytes())?;
    write_atomic(dir.join("phase.dat"), grid_data(&rec.grid, &rec.phase_map).as_bytes())?;
    Ok(())
}
