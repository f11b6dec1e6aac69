use crate::algebra::twin;
use crate::energy::{elastic_energy, total_variation};
use crate::error::{Error, Result};
use crate::grid::{Fft3, ScalarField3, TensorField3};

use super::multiplier::{apply_multiplier, ConeSpec};

/// Pairs `(i, j)` with `i < j`, zero-based, in the order 12, 13, 23.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Cone projections of the diagonal components and the residuals `σ_jj`.
///
/// With `f_ij = m_{b_ij}(D) χ̃_ii` and `g_ij = m_{b_ji}(D) χ̃_ii`:
///
/// ```text
/// χ̃11 =  f12 + g12 + f13 + g13 + σ11
/// χ̃22 = −f12 − g12 + f23 + g23 + σ22
/// χ̃33 = −f13 − g13 − f23 − g23 + σ33
/// ```
#[derive(Clone, Debug)]
pub struct WaveDecomposition {
    pub f12: ScalarField3,
    pub g12: ScalarField3,
    pub f13: ScalarField3,
    pub g13: ScalarField3,
    pub f23: ScalarField3,
    pub g23: ScalarField3,
    pub sigma11: ScalarField3,
    pub sigma22: ScalarField3,
    pub sigma33: ScalarField3,
    pub mu: f64,
    pub mu1: f64,
    pub eps: f64,
    /// `E_el(χ̃) + ε Σ_j |Dχ̃_jj|`.
    pub e_eps: f64,
    /// `Σ_j ‖σ_jj‖²`.
    pub sigma_l2_sq: f64,
    /// `(μ⁻² + μ₁⁻¹ ε⁻¹) E_ε`.
    pub bound_shape: f64,
}

impl WaveDecomposition {
    pub fn waves(&self) -> [(&ScalarField3, &ScalarField3); 3] {
        [(&self.f12, &self.g12), (&self.f13, &self.g13), (&self.f23, &self.g23)]
    }

    pub fn sigma(&self) -> [&ScalarField3; 3] {
        [&self.sigma11, &self.sigma22, &self.sigma33]
    }

    /// Largest pointwise violation of the three reconstruction identities.
    pub fn reconstruction_error(&self, chi_tilde: &TensorField3) -> f64 {
        let s = |f: &ScalarField3, p: usize| f.data[p];
        let mut worst: f64 = 0.0;
        for p in 0..chi_tilde.grid.len() {
            let w12 = s(&self.f12, p) + s(&self.g12, p);
            let w13 = s(&self.f13, p) + s(&self.g13, p);
            let w23 = s(&self.f23, p) + s(&self.g23, p);
            let r = [
                chi_tilde.comps[0][p] - (w12 + w13 + s(&self.sigma11, p)),
                chi_tilde.comps[1][p] - (-w12 + w23 + s(&self.sigma22, p)),
                chi_tilde.comps[2][p] - (-w13 - w23 + s(&self.sigma33, p)),
            ];
            worst = r.iter().fold(worst, |m, v| m.max(v.abs()));
        }
        worst
    }
}

/// Splits a trace-free diagonal field into the six cone waves and the residuals.
pub fn six_wave_decomposition(chi_tilde: &TensorField3, mu: f64, mu1: f64, eps: f64) -> Result<WaveDecomposition> {
    if !chi_tilde.is_diagonal() {
        return Err(Error::param("chi_tilde", "field must be diagonal"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps", format!("need eps > 0, got {eps}")));
    }
    let tr = chi_tilde.trace().max_abs();
    if tr > 1e-12 * chi_tilde.max_norm().max(1.0) {
        return Err(Error::NonzeroTrace(tr));
    }
    let grid = chi_tilde.grid;
    let fft = Fft3::for_grid(&grid);
    let mut waves: Vec<ScalarField3> = Vec::with_capacity(6);
    for (i, j) in PAIRS {
        for b in [twin(i, j), twin(j, i)] {
            let m = ConeSpec::new(b, mu, mu1)?.on_grid(&grid);
            let data = apply_multiplier(&chi_tilde.comps[i], &m, &fft);
            waves.push(ScalarField3 { grid, data });
        }
    }
    let len = grid.len();
    let w = |a: usize, p: usize| waves[2 * a].data[p] + waves[2 * a + 1].data[p];
    let c = &chi_tilde.comps;
    let sigma11: Vec<f64> = (0..len).map(|p| c[0][p] - w(0, p) - w(1, p)).collect();
    let sigma22: Vec<f64> = (0..len).map(|p| c[1][p] + w(0, p) - w(2, p)).collect();
    let sigma33: Vec<f64> = (0..len).map(|p| c[2][p] + w(1, p) + w(2, p)).collect();
    let sig = [sigma11, sigma22, sigma33].map(|data| ScalarField3 { grid, data });
    let sigma_l2_sq = sig.iter().map(|s| s.l2_sq()).sum();
    let tv: f64 = (0..3).map(|a| total_variation(&chi_tilde.component(a))).sum();
    let e_eps = elastic_energy(chi_tilde) + eps * tv;
    let bound_shape = (mu.powi(-2) + 1.0 / (mu1 * eps)) * e_eps;
    let [sigma11, sigma22, sigma33] = sig;
    let mut it = waves.into_iter();
    let mut next = || it.next().expect("six waves");
    Ok(WaveDecomposition {
        f12: next(),
        g12: next(),
        f13: next(),
        g13: next(),
        f23: next(),
        g23: next(),
        sigma11,
        sigma22,
        sigma33,
        mu,
        mu1,
        eps,
        e_eps,
        sigma_l2_sq,
        bound_shape,
    })
}
