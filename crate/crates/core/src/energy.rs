//! Elastic, surface and total energies on periodic grids.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{WellSystem, TWIN_SETS};
use crate::error::{Error, Result};
use crate::grid::{Fft3, Grid3, ScalarField3, SpectralTensor, TensorField3, COMPONENT_WEIGHTS};
use crate::tensor::{dot, norm, SymMat3, Vec3};

/// Chunk length for reductions; partial sums are combined in chunk order so the
/// result does not depend on the thread count.
const SUM_CHUNK: usize = 4096;

/// Deterministic parallel sum of `f(p)` over `0..len`.
pub fn ordered_sum(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let chunks = len.div_ceil(SUM_CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * SUM_CHUNK).min(len);
            (c * SUM_CHUNK..end).map(&f).sum()
        })
        .collect();
    partial.iter().sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseMode {
    /// Indicator values in {0, 1}.
    Sharp,
    /// Volume fractions in [0, 1].
    Relaxed,
}

/// Phase indicators `χ1, χ2, χ3` summing to one pointwise.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    pub grid: Grid3,
    pub chi: [Vec<f64>; 3],
    pub mode: PhaseMode,
}

impl PhaseField {
    /// Sharp field from per-point well labels in `0..3`.
    pub fn from_labels(grid: Grid3, labels: &[u8]) -> Result<Self> {
        if labels.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} labels for {} points", labels.len(), grid.len())));
        }
        if let Some(bad) = labels.iter().find(|l| **l > 2) {
            return Err(Error::InvalidPhase(format!("label {bad} out of range")));
        }
        let chi = std::array::from_fn(|a| labels.iter().map(|l| if *l as usize == a { 1.0 } else { 0.0 }).collect());
        Ok(Self {
            grid,
            chi,
            mode: PhaseMode::Sharp,
        })
    }

    /// Relaxed field; validates range and the partition of unity.
    pub fn relaxed(grid: Grid3, chi: [Vec<f64>; 3]) -> Result<Self> {
        if chi.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch("phase component length".into()));
        }
        for p in 0..grid.len() {
            let v = [chi[0][p], chi[1][p], chi[2][p]];
            if v.iter().any(|x| !(-1e-14..=1.0 + 1e-14).contains(x)) {
                return Err(Error::InvalidPhase(format!("value out of [0,1] at point {p}")));
            }
            if (v.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidPhase(format!("fractions do not sum to 1 at point {p}")));
            }
        }
        Ok(Self {
            grid,
            chi,
            mode: PhaseMode::Relaxed,
        })
    }

    pub fn constant(grid: Grid3, fractions: [f64; 3]) -> Result<Self> {
        if fractions.iter().all(|f| *f == 0.0 || *f == 1.0) {
            let label = fractions.iter().position(|f| *f == 1.0).unwrap_or(0) as u8;
            if fractions.iter().sum::<f64>() == 1.0 {
                return Self::from_labels(grid, &vec![label; grid.len()]);
            }
        }
        Self::relaxed(grid, fractions.map(|f| vec![f; grid.len()]))
    }

    pub fn is_sharp(&self) -> bool {
        self.mode == PhaseMode::Sharp
    }

    /// Pointwise argmax, ties to the lowest index.
    pub fn labels(&self) -> Vec<u8> {
        (0..self.grid.len())
            .map(|p| {
                let mut best = 0;
                for a in 1..3 {
                    if self.chi[a][p] > self.chi[best][p] {
                        best = a;
                    }
                }
                best as u8
            })
            .collect()
    }

    /// Sharp projection by pointwise argmax.
    pub fn sharpen(&self) -> Self {
        Self::from_labels(self.grid, &self.labels()).expect("labels in range")
    }

    pub fn volume_fractions(&self) -> [f64; 3] {
        let n = self.grid.len() as f64;
        std::array::from_fn(|a| self.chi[a].iter().sum::<f64>() / n)
    }

    pub fn component(&self, a: usize) -> ScalarField3 {
        ScalarField3 {
            grid: self.grid,
            data: self.chi[a].clone(),
        }
    }
}

/// Energy record attached to every experiment row.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub e_el: f64,
    pub e_surf: f64,
    pub eps: f64,
    pub e_total: f64,
    pub n: usize,
    pub l: f64,
    pub eta: [f64; 3],
    pub ebar: SymMat3,
}

impl EnergyReport {
    pub fn new(e_el: f64, e_surf: f64, eps: f64, grid: &Grid3, ws: &WellSystem, ebar: &SymMat3) -> Self {
        Self {
            e_el,
            e_surf,
            eps,
            e_total: e_el + eps * e_surf,
            n: grid.n,
            l: grid.l,
            eta: ws.eta,
            ebar: *ebar,
        }
    }
}

/// Pointwise `Σ_α χ_α e(α)`.
pub fn strain_from_phase(chi: &PhaseField, ws: &WellSystem) -> TensorField3 {
    let d: [Vec<f64>; 3] = std::array::from_fn(|i| {
        let w = [ws.wells[0].get(i, i), ws.wells[1].get(i, i), ws.wells[2].get(i, i)];
        (0..chi.grid.len())
            .map(|p| w[0] * chi.chi[0][p] + w[1] * chi.chi[1][p] + w[2] * chi.chi[2][p])
            .collect()
    });
    TensorField3::diagonal(chi.grid, d).expect("lengths match")
}

fn solve3_real(m: [[f64; 3]; 3], rhs: [Complex64; 3]) -> Option<[Complex64; 3]> {
    let mut a = m;
    let mut b = rhs;
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= b[col] * f;
        }
    }
    let mut x = [Complex64::default(); 3];
    for r in (0..3).rev() {
        let mut s = b[r];
        for c in r + 1..3 {
            s -= x[c] * a[r][c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

fn mode_matrix(x: &[Complex64; 6]) -> [[Complex64; 3]; 3] {
    [[x[0], x[5], x[4]], [x[5], x[1], x[3]], [x[4], x[3], x[2]]]
}

/// Residual `min_û |sym(i k ⊗ û) − X|²` of a single Fourier mode; the
/// displacement amplitude comes from the 3×3 normal equations
/// `½(|k|² I + k kᵀ) û = −i X k`.
pub fn mode_energy(k: &Vec3, x: &[Complex64; 6]) -> f64 {
    let total: f64 = (0..6).map(|c| COMPONENT_WEIGHTS[c] * x[c].norm_sqr()).sum();
    let k2 = dot(k, k);
    if k2 == 0.0 {
        return total;
    }
    let xm = mode_matrix(x);
    let mut r = [Complex64::default(); 3];
    for (b, rb) in r.iter_mut().enumerate() {
        let xk: Complex64 = (0..3).map(|a| xm[b][a] * k[a]).sum();
        *rb = Complex64::new(0.0, -1.0) * xk;
    }
    let m: [[f64; 3]; 3] =
        std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (if i == j { k2 } else { 0.0 } + k[i] * k[j])));
    let Some(u) = solve3_real(m, r) else {
        return total;
    };
    let gain: f64 = (0..3).map(|i| (r[i].conj() * u[i]).re).sum();
    (total - gain).max(0.0)
}

/// `inf_v ∫ |e(v) − χ̃|²` over periodic displacements, computed mode by mode.
pub fn elastic_energy(chi_tilde: &TensorField3) -> f64 {
    let grid = chi_tilde.grid;
    let fft = Fft3::for_grid(&grid);
    let spec = SpectralTensor::from_field(chi_tilde, &fft);
    elastic_energy_spectral(&spec) * grid.volume()
}

/// Same as [`elastic_energy`] for an already transformed field (unit volume).
pub fn elastic_energy_spectral(spec: &SpectralTensor) -> f64 {
    let grid = spec.grid;
    ordered_sum(grid.len(), |p| mode_energy(&grid.derivative_k(p), &spec.mode(p)))
}

/// Face-jump total variation `Σ_faces |Δf| h²` with periodic wrap.
pub fn total_variation(f: &ScalarField3) -> f64 {
    let g = f.grid;
    let h2 = g.h() * g.h();
    ordered_sum(g.len(), |p| (0..3).map(|ax| (f.data[g.shift(p, ax, 1)] - f.data[p]).abs()).sum()) * h2
}

/// `Σ_j |Dχ_j|` of a sharp phase field.
pub fn surface_energy(chi: &PhaseField) -> Result<f64> {
    if !chi.is_sharp() {
        return Err(Error::RelaxedInput);
    }
    Ok(relaxed_surface_energy(chi))
}

/// Anisotropic total variation of a possibly relaxed phase field. This is a
/// diagnostic only: for relaxed fields it is not the interfacial area.
pub fn relaxed_surface_energy(chi: &PhaseField) -> f64 {
    (0..3).map(|a| total_variation(&chi.component(a))).sum()
}

/// `E_el(strain_from_phase(χ) − ē) + ε E_surf(χ)`.
///
/// Accumulation order: modes in storage order, chunked as in [`ordered_sum`];
/// surface terms per phase, then per point, then per axis.
pub fn total_energy(chi: &PhaseField, ws: &WellSystem, ebar: &SymMat3, eps: f64) -> Result<EnergyReport> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", format!("need eps > 0, got {eps}")));
    }
    let e_surf = surface_energy(chi)?;
    let e_el = elastic_energy(&strain_from_phase(chi, ws).sub_constant(ebar));
    Ok(EnergyReport::new(e_el, e_surf, eps, &chi.grid, ws, ebar))
}

/// `min_{b ∈ set} dist²(k̂, ±b)`.
pub fn dist_sq_to_set(khat: &Vec3, set: &[Vec3]) -> f64 {
    set.iter().map(|b| 2.0 - 2.0 * dot(khat, b).abs()).fold(f64::INFINITY, f64::min).max(0.0)
}

/// `Σ_j Σ_k dist²(k̂, 𝓑_j) |χ̂_jj(k)|²` with unit weight at `k = 0`.
///
/// Modes whose derivative symbol vanishes (the zero mode and pure Nyquist
/// modes) take weight one, matching their treatment in [`elastic_energy`].
pub fn multiplier_lower_bound(chi_tilde: &TensorField3) -> f64 {
    let grid = chi_tilde.grid;
    let fft = Fft3::for_grid(&grid);
    let mut total = 0.0;
    for j in 0..3 {
        let spec = fft.forward_real(&chi_tilde.comps[j]);
        total += ordered_sum(grid.len(), |p| {
            let k = grid.derivative_k(p);
            let kn = norm(&k);
            let w = if kn == 0.0 {
                1.0
            } else {
                dist_sq_to_set(&[k[0] / kn, k[1] / kn, k[2] / kn], &TWIN_SETS[j])
            };
            w * spec[p].norm_sqr()
        });
    }
    total * grid.volume()
}
