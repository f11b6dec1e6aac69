//! Legacy VTK and CSV exporters.

use std::io::Write;
use std::path::Path;

use crate::energy::EnergyReport;
use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::laminate::ScalingRow;

fn vtk_header(grid: &Grid3, title: &str) -> String {
    let n = grid.n;
    let h = grid.h();
    format!(
        "# vtk DataFile Version 3.0\n{title}\nBINARY\nDATASET STRUCTURED_POINTS\n\
         DIMENSIONS {n} {n} {n}\nORIGIN 0 0 0\nSPACING {h} {h} {h}\nPOINT_DATA {}\n",
        grid.len()
    )
}

fn vtk_field_header(name: &str) -> String {
    format!("SCALARS {name} float 1\nLOOKUP_TABLE default\n")
}

/// Number of text bytes [`write_vtk`] emits around the binary payload.
pub fn vtk_text_len(grid: &Grid3, title: &str, names: &[&str]) -> usize {
    // one newline terminates each binary block
    vtk_header(grid, title).len() + names.iter().map(|n| vtk_field_header(n).len() + 1).sum::<usize>()
}

/// Legacy structured-points file with one big-endian `float` array per field,
/// x index fastest.
pub fn write_vtk(path: impl AsRef<Path>, grid: &Grid3, title: &str, fields: &[(&str, &[f64])]) -> Result<()> {
    for (name, data) in fields {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field {name} has {} values, grid has {}",
                data.len(),
                grid.len()
            )));
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::param("field name", format!("{name:?} is not a valid VTK array name")));
        }
    }
    if title.contains('\n') {
        return Err(Error::param("title", "must be a single line"));
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(vtk_header(grid, title).as_bytes())?;
    let n = grid.n;
    for (name, data) in fields {
        w.write_all(vtk_field_header(name).as_bytes())?;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    w.write_all(&(data[grid.idx(i, j, k)] as f32).to_be_bytes())?;
                }
            }
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub const ENERGY_HEADER: [&str; 14] = [
    "N", "L", "eta1", "eta2", "eta3", "ebar_xx", "ebar_yy", "ebar_zz", "ebar_yz", "ebar_xz", "ebar_xy", "E_el", "E_surf",
    "E_total",
];

fn energy_record(r: &EnergyReport) -> Vec<String> {
    let mut v = vec![r.n.to_string(), format!("{:e}", r.l)];
    v.extend(r.eta.iter().map(|x| format!("{x:e}")));
    v.extend(r.ebar.components().iter().map(|x| format!("{x:e}")));
    v.extend([r.e_el, r.e_surf, r.e_total].iter().map(|x| format!("{x:e}")));
    v
}

/// CSV with a header row and one row per report. `eps` is included as a column.
pub fn write_energy_csv(path: impl AsRef<Path>, reports: &[EnergyReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = ENERGY_HEADER.to_vec();
    header.insert(11, "eps");
    w.write_record(&header)?;
    for r in reports {
        let mut rec = energy_record(r);
        rec.insert(11, format!("{:e}", r.eps));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub const SCALING_HEADER: [&str; 8] = ["eps", "j", "r", "E_el", "E_surf", "E_total", "r1", "r2"];

pub fn write_scaling_csv(path: impl AsRef<Path>, rows: &[ScalingRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SCALING_HEADER)?;
    for r in rows {
        w.write_record([
            format!("{:e}", r.eps),
            r.j.to_string(),
            format!("{:e}", r.r),
            format!("{:e}", r.e_el),
            format!("{:e}", r.e_surf),
            format!("{:e}", r.e_total),
            format!("{:e}", r.r1),
            format!("{:e}", r.r2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vtk_size_is_header_plus_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.vtk");
        let g = Grid3::unit(4);
        let a = vec![1.0; g.len()];
        let b = vec![2.0; g.len()];
        write_vtk(&path, &g, "test", &[("chi_1", &a), ("chi_2", &b)]).unwrap();
        let len = std::fs::metadata(&path).unwrap().len() as usize;
        assert_eq!(len, vtk_text_len(&g, "test", &["chi_1", "chi_2"]) + g.len() * 2 * 4);
    }

    #[test]
    fn vtk_rejects_mismatched_field() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid3::unit(4);
        let a = vec![1.0; 5];
        assert!(write_vtk(dir.path().join("a.vtk"), &g, "t", &[("a", &a)]).is_err());
    }
}
