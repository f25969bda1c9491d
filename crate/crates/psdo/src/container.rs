//! Binary operator container.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `PSDO` |
//! | 4 | format version (`u32`) |
//! | 4 x 7 | geometry: kind (0 circle, 1 cone, 2 edge), `q`, `n_x`, `n_t`, base (0 point, 1 circle), `n_omega`, mode (0 interval, 1 periodic) |
//! | 8 | `t_half` (`f64`) |
//! | 8 | parameter `v` (`f64`) |
//! | 8 + 8 | rows, cols (`u64`) |
//! | 16 x rows x cols | row-major entries as `(re, im)` `f64` pairs |
//!
//! Fields that do not apply to the geometry are zero.

use std::io::Write;
use std::path::Path;

use psdo_core::geometry::{Base, BoundaryMode, ConeSpec, Geometry, Kind};
use psdo_core::quantize::DiscretizedOperator;
use psdo_core::{CMat, C64};

use crate::CliError;

pub const MAGIC: &[u8; 4] = b"PSDO";
pub const VERSION: u32 = 1;

fn cone_words(c: &ConeSpec) -> [u32; 4] {
    let (base, n_omega) = match c.base {
        Base::Point => (0, 0),
        Base::Circle(n) => (1, n as u32),
    };
    let mode = match c.mode {
        BoundaryMode::Interval => 0,
        BoundaryMode::Periodic => 1,
    };
    [c.n_t as u32, base, n_omega, mode]
}

pub fn encode(op: &DiscretizedOperator) -> Vec<u8> {
    let g = &op.geometry;
    let (kind, n_x, cone) = match &g.kind {
        Kind::Circle { n } => (0u32, *n as u32, None),
        Kind::Cone(c) => (1, 0, Some(c)),
        Kind::Edge { n_x, cone } => (2, *n_x as u32, Some(cone)),
    };
    let [n_t, base, n_omega, mode] = cone.map(cone_words).unwrap_or([0; 4]);
    let t_half = cone.map(|c| c.t_half).unwrap_or(0.0);
    let (rows, cols) = op.matrix.shape();
    let mut out = Vec::with_capacity(72 + 16 * rows * cols);
    out.extend_from_slice(MAGIC);
    for w in [VERSION, kind, g.q as u32, n_x, n_t, base, n_omega, mode] {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&t_half.to_le_bytes());
    out.extend_from_slice(&op.v.to_le_bytes());
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for i in 0..rows {
        for j in 0..cols {
            let z = op.matrix[(i, j)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K], CliError> {
        let end = self.pos + K;
        let s = self.buf.get(self.pos..end).ok_or_else(|| CliError::Io(format!("container truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s.try_into().expect("slice has length K"))
    }
    fn u32(&mut self) -> Result<u32, CliError> {
        self.take::<4>().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> Result<u64, CliError> {
        self.take::<8>().map(u64::from_le_bytes)
    }
    fn f64(&mut self) -> Result<f64, CliError> {
        self.take::<8>().map(f64::from_le_bytes)
    }
}

pub fn decode(buf: &[u8]) -> Result<DiscretizedOperator, CliError> {
    let bad = |m: String| CliError::Io(m);
    let mut r = Reader { buf, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(bad("not a PSDO container".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(bad(format!("unsupported container version {version}")));
    }
    let [kind, q, n_x, n_t, base, n_omega, mode] = [r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?];
    let t_half = r.f64()?;
    let v = r.f64()?;
    let (rows, cols) = (r.u64()? as usize, r.u64()? as usize);
    let cone = || -> Result<ConeSpec, CliError> {
        let base = match base {
            0 => Base::Point,
            1 => Base::Circle(n_omega as usize),
            b => return Err(bad(format!("unknown base code {b}"))),
        };
        let mode = match mode {
            0 => BoundaryMode::Interval,
            1 => BoundaryMode::Periodic,
            m => return Err(bad(format!("unknown mode code {m}"))),
        };
        Ok(ConeSpec::new(base, t_half, n_t as usize, mode))
    };
    let kind = match kind {
        0 => Kind::Circle { n: n_x as usize },
        1 => Kind::Cone(cone()?),
        2 => Kind::Edge { n_x: n_x as usize, cone: cone()? },
        k => return Err(bad(format!("unknown geometry code {k}"))),
    };
    let geometry = Geometry::build(kind, q as usize).map_err(|e| bad(e.to_string()))?;
    if geometry.dim() != rows || rows != cols {
        return Err(bad(format!("matrix {rows}x{cols} does not fit geometry of dimension {}", geometry.dim())));
    }
    if buf.len() != r.pos + 16 * rows * cols {
        return Err(bad(format!("expected {} payload bytes, found {}", 16 * rows * cols, buf.len() - r.pos)));
    }
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = C64::new(r.f64()?, r.f64()?);
        }
    }
    Ok(DiscretizedOperator::new(geometry, v, m))
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn write(path: &Path, op: &DiscretizedOperator) -> Result<(), CliError> {
    write_atomic(path, &encode(op))
}

pub fn read(path: &Path) -> Result<DiscretizedOperator, CliError> {
    let buf = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    decode(&buf)
}
