use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid3, SpectralTensor};
use crate::tensor::SymMat3;

use super::hooke::IsotropicHooke;

const MODE_CHUNK: usize = 2048;

/// Evaluates `f` on every mode and scatters the six outputs into component arrays.
pub(crate) fn map_modes(len: usize, f: impl Fn(usize) -> [Complex64; 6] + Sync) -> [Vec<Complex64>; 6] {
    let blocks: Vec<Vec<[Complex64; 6]>> = (0..len.div_ceil(MODE_CHUNK))
        .into_par_iter()
        .map(|c| (c * MODE_CHUNK..((c + 1) * MODE_CHUNK).min(len)).map(&f).collect())
        .collect();
    let mut out: [Vec<Complex64>; 6] = std::array::from_fn(|_| Vec::with_capacity(len));
    for block in blocks {
        for v in block {
            for c in 0..6 {
                out[c].push(v[c]);
            }
        }
    }
    out
}

/// Strain response of one mode: `ê_ij = ½(A⁻¹_ik k_j + A⁻¹_jk k_i) τ̂_kl k_l`.
pub fn green_mode(k: &[f64; 3], tau: &[Complex64; 6], c: &IsotropicHooke) -> Result<[Complex64; 6]> {
    if k == &[0.0; 3] {
        return Ok([Complex64::default(); 6]);
    }
    let ainv = c.acoustic_inverse(k).ok_or(Error::SingularAcoustic(*k))?;
    let t = [[tau[0], tau[5], tau[4]], [tau[5], tau[1], tau[3]], [tau[4], tau[3], tau[2]]];
    let v: [Complex64; 3] = std::array::from_fn(|i| (0..3).map(|l| t[i][l] * k[l]).sum());
    let w: [Complex64; 3] = std::array::from_fn(|i| (0..3).map(|m| v[m] * ainv[i][m]).sum());
    let e = |i: usize, j: usize| (w[i] * k[j] + w[j] * k[i]) * 0.5;
    Ok([e(0, 0), e(1, 1), e(2, 2), e(1, 2), e(0, 2), e(0, 1)])
}

/// Applies the periodic Green operator to a polarization spectrum. The zero
/// mode is replaced by the imposed mean strain.
pub fn green_apply(tau_hat: &SpectralTensor, ebar: &SymMat3, c: &IsotropicHooke) -> SpectralTensor {
    let grid: Grid3 = tau_hat.grid;
    let mut comps = map_modes(grid.len(), |p| {
        green_mode(&grid.derivative_k(p), &tau_hat.mode(p), c).expect("isotropic acoustic tensor is invertible")
    });
    for (k, v) in ebar.components().into_iter().enumerate() {
        comps[k][0] = Complex64::new(v, 0.0);
    }
    SpectralTensor { grid, comps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Fft3, TensorField3};
    use std::f64::consts::PI;

    #[test]
    fn zero_mode_returns_mean_strain() {
        let g = Grid3::unit(4);
        let mut tau = SpectralTensor::zeros(g);
        tau.comps[0][0] = Complex64::new(5.0, 0.0);
        let ebar = SymMat3::diag(0.04, 0.03, 0.03);
        let e = green_apply(&tau, &ebar, &IsotropicHooke::reference());
        for (k, v) in ebar.components().iter().enumerate() {
            assert_eq!(e.comps[k][0], Complex64::new(*v, 0.0));
        }
    }

    #[test]
    fn output_of_real_input_is_real() {
        let g = Grid3::unit(8);
        let fft = Fft3::for_grid(&g);
        let tau = TensorField3::from_fn(g, |x| {
            SymMat3::new(
                (2.0 * PI * x[0]).sin() + x[1],
                (2.0 * PI * (x[1] + 2.0 * x[2])).cos(),
                x[0] * x[2],
                0.3 * (2.0 * PI * x[2]).sin(),
                0.0,
                x[1] * x[1],
            )
        });
        let e = green_apply(&SpectralTensor::from_field(&tau, &fft), &SymMat3::ZERO, &IsotropicHooke::reference());
        for comp in &e.comps {
            let (_, im) = fft.inverse_real_checked(comp.clone());
            assert!(im < 1e-12);
        }
    }

    #[test]
    fn idempotent_on_compatible_fields() {
        // τ = C e_c with e_c = sym ∇u reproduces e_c (plus the mean)
        let g = Grid3::unit(8);
        let fft = Fft3::for_grid(&g);
        let c = IsotropicHooke::reference();
        let tp = 2.0 * PI;
        let ec = TensorField3::from_fn(g, |x| {
            // u = (sin 2πx2, cos 2π(x1+x3), sin 4πx1)
            let d12 = tp * (tp * x[1]).cos();
            let d21 = -tp * (tp * (x[0] + x[2])).sin();
            let d23 = -tp * (tp * (x[0] + x[2])).sin();
            let d31 = 2.0 * tp * (2.0 * tp * x[0]).cos();
            SymMat3::new(0.0, 0.0, 0.0, 0.5 * d23, 0.5 * d31, 0.5 * (d12 + d21))
        });
        let tau = TensorField3::from_fn(g, |x| {
            let p = g.idx(
                (x[0] / g.h()).round() as usize,
                (x[1] / g.h()).round() as usize,
                (x[2] / g.h()).round() as usize,
            );
            c.apply(&ec.at(p))
        });
        let ebar = SymMat3::diag(0.01, 0.02, 0.03);
        let out = green_apply(&SpectralTensor::from_field(&tau, &fft), &ebar, &c).to_field(&fft);
        for p in 0..g.len() {
            assert!((out.at(p) - ec.at(p) - ebar).max_abs() < 1e-12);
        }
    }
}
