//! Raw binary checkpoint of a [`SolverState`].
//!
//! Layout (all multi-byte values little-endian):
//!
//! ```text
//! magic        8 bytes  "T3LABCKP"
//! endianness   u32      0x0A0B0C0D
//! version      u32
//! N            u64
//! L            f64
//! iterations   u64
//! converged    u8
//! kT           f64
//! residual     f64      equilibrium residual
//! ebar         6 × f64  xx yy zz yz xz xy
//! field count  u32
//! names        count × (u16 length, UTF-8 bytes)
//! fields       count × N³ × f64, in the declared order
//! history      u64 count, then count × (increment, free energy, kT) as f64
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::energy::PhaseField;
use crate::error::{Error, Result};
use crate::grid::{Grid3, TensorField3, COMPONENT_NAMES};
use crate::tensor::SymMat3;

use super::{IterRecord, SolverState};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"T3LABCKP";
pub const CHECKPOINT_VERSION: u32 = 1;
const ENDIAN_MARK: u32 = 0x0A0B_0C0D;

fn field_names() -> Vec<String> {
    let mut v: Vec<String> = COMPONENT_NAMES.iter().map(|c| format!("e_{c}")).collect();
    v.extend((1..=3).map(|a| format!("chi_{a}")));
    v.extend(COMPONENT_NAMES.iter().map(|c| format!("tau_{c}")));
    v
}

pub fn write_checkpoint(state: &SolverState, path: impl AsRef<Path>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&ENDIAN_MARK.to_le_bytes())?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(state.grid.n as u64).to_le_bytes())?;
    w.write_all(&state.grid.l.to_le_bytes())?;
    w.write_all(&(state.iterations as u64).to_le_bytes())?;
    w.write_all(&[state.converged as u8])?;
    w.write_all(&state.kt.to_le_bytes())?;
    w.write_all(&state.equilibrium_residual.to_le_bytes())?;
    for c in state.ebar.components() {
        w.write_all(&c.to_le_bytes())?;
    }
    let names = field_names();
    w.write_all(&(names.len() as u32).to_le_bytes())?;
    for name in &names {
        w.write_all(&(name.len() as u16).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    let fields = state
        .e
        .comps
        .iter()
        .chain(state.chi.chi.iter())
        .chain(state.tau.comps.iter());
    for f in fields {
        for v in f {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.write_all(&(state.history.len() as u64).to_le_bytes())?;
    for r in &state.history {
        for v in [r.increment, r.free_energy, r.kt] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut b = [0u8; K];
        self.0
            .read_exact(&mut b)
            .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
        Ok(b)
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut raw = vec![0u8; n * 8];
        self.0
            .read_exact(&mut raw)
            .map_err(|e| Error::Checkpoint(format!("truncated field data: {e}")))?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<SolverState> {
    let mut r = Reader(std::io::BufReader::new(std::fs::File::open(path)?));
    if &r.bytes::<8>()? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mark = r.u32()?;
    if mark != ENDIAN_MARK {
        return Err(Error::Checkpoint(format!("unexpected endianness marker {mark:#010x}")));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let n = r.u64()? as usize;
    let l = r.f64()?;
    let grid = Grid3::new(n, l).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let iterations = r.u64()? as usize;
    let converged = r.bytes::<1>()?[0] != 0;
    let kt = r.f64()?;
    let equilibrium_residual = r.f64()?;
    let mut ebar = [0.0; 6];
    for c in &mut ebar {
        *c = r.f64()?;
    }
    let count = r.u32()? as usize;
    let mut names = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.u16()? as usize;
        let mut buf = vec![0u8; len];
        r.0.read_exact(&mut buf)?;
        names.push(String::from_utf8(buf).map_err(|_| Error::Checkpoint("field name is not UTF-8".into()))?);
    }
    let mut fields: Vec<Option<Vec<f64>>> = vec![None; field_names().len()];
    for name in &names {
        let data = r.f64_vec(grid.len())?;
        if let Some(slot) = field_names().iter().position(|f| f == name) {
            fields[slot] = Some(data);
        }
    }
    let mut take = |i: usize| {
        fields[i]
            .take()
            .ok_or_else(|| Error::Checkpoint(format!("missing field {}", field_names()[i])))
    };
    let e = TensorField3 {
        grid,
        comps: [take(0)?, take(1)?, take(2)?, take(3)?, take(4)?, take(5)?],
    };
    let chi = PhaseField::relaxed(grid, [take(6)?, take(7)?, take(8)?])?;
    let tau = TensorField3 {
        grid,
        comps: [take(9)?, take(10)?, take(11)?, take(12)?, take(13)?, take(14)?],
    };
    let hlen = r.u64()? as usize;
    let mut history = Vec::with_capacity(hlen);
    for _ in 0..hlen {
        history.push(IterRecord {
            increment: r.f64()?,
            free_energy: r.f64()?,
            kt: r.f64()?,
        });
    }
    Ok(SolverState {
        grid,
        ebar: SymMat3::from_components(ebar),
        e,
        chi,
        tau,
        iterations,
        converged,
        kt,
        history,
        equilibrium_residual,
    })
}
