//! Fourier-side diagnostics: cone multipliers, the six-wave split, frequency
//! shell energies, and checks of the finite-difference determinedness relation.

mod decomposition;
pub mod harness;
mod multiplier;

pub use decomposition::{six_wave_decomposition, WaveDecomposition, PAIRS};
pub use harness::{LemmaReport, LemmaRow, Stability};
pub use multiplier::{apply_multiplier, mu0, phi, twin_mu0, ConeSpec, Radial};

use crate::algebra::{determinedness_polynomial, WellSystem, TWIN_DIRECTIONS};
use crate::energy::{ordered_sum, strain_from_phase, PhaseField};
use crate::error::{Error, Result};
use crate::grid::{Fft3, ScalarField3, TensorField3, COMPONENT_WEIGHTS};
use crate::tensor::{line_angle, Vec3};

/// `Σ_{|k| ≥ μ₁} |𝓕χ̃(k)|²` over all components, in integer-lattice units.
pub fn high_frequency_mass(chi_tilde: &TensorField3, mu1: f64) -> f64 {
    let grid = chi_tilde.grid;
    let fft = Fft3::for_grid(&grid);
    let mut total = 0.0;
    for (c, w) in COMPONENT_WEIGHTS.iter().enumerate() {
        if chi_tilde.comps[c].iter().all(|v| *v == 0.0) {
            continue;
        }
        let spec = fft.forward_real(&chi_tilde.comps[c]);
        total += w * ordered_sum(grid.len(), |p| {
            let k = grid.lattice_k(p);
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if k2.sqrt() >= mu1 {
                spec[p].norm_sqr()
            } else {
                0.0
            }
        });
    }
    total * grid.volume()
}

/// `‖χ_{b,μ,[μ_lo,μ_hi]}(D) w‖²`.
pub fn shell_energy(w: &ScalarField3, b: &Vec3, mu: f64, mu_lo: f64, mu_hi: f64) -> Result<f64> {
    let cone = ConeSpec::annular(*b, mu, mu_lo, mu_hi)?;
    let grid = w.grid;
    let m = cone.on_grid(&grid);
    let spec = Fft3::for_grid(&grid).forward_real(&w.data);
    Ok(ordered_sum(grid.len(), |p| m[p] * m[p] * spec[p].norm_sqr()) * grid.volume())
}

/// Shells `[μ_{m+1}, μ_m]` of the geometric schedule `μ_m = q^m μ₁`, `q ∈ (0, 1)`,
/// stopping before the inner radius drops below one lattice unit.
pub fn shell_schedule(mu1: f64, q: f64) -> Result<Vec<(f64, f64)>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("q", format!("need ratio in (0, 1), got {q}")));
    }
    let mut out = Vec::new();
    let mut hi = mu1;
    while hi * q >= 1.0 {
        out.push((hi * q, hi));
        hi *= q;
    }
    Ok(out)
}

/// Outcome of checking `Δχ_jj = P_ij(Δχ_ii)` along every axis and step.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminednessReport {
    /// Largest pointwise violation.
    pub max_violation: f64,
    /// Root-mean-square violation over all checked points.
    pub rms_violation: f64,
    /// Number of point relations checked.
    pub checked: usize,
    pub steps: Vec<usize>,
}

impl DeterminednessReport {
    pub fn exact(&self) -> bool {
        self.max_violation == 0.0
    }
}

/// Evaluates the finite-difference relation on the strain of `chi` for all
/// axes, all ordered component pairs, and the step sizes in `steps`.
pub fn determinedness_check(chi: &PhaseField, ws: &WellSystem, steps: &[usize]) -> Result<DeterminednessReport> {
    let e = strain_from_phase(chi, ws);
    let grid = chi.grid;
    let mut max_violation: f64 = 0.0;
    let mut sum_sq = 0.0;
    let mut checked = 0;
    for i in 0..3 {
        for j in (0..3).filter(|&j| j != i) {
            let poly = determinedness_polynomial(ws, i, j)?;
            for &h in steps {
                for axis in 0..3 {
                    for p in 0..grid.len() {
                        let q = grid.shift(p, axis, h as isize);
                        let di = e.comps[i][q] - e.comps[i][p];
                        let dj = e.comps[j][q] - e.comps[j][p];
                        let v = (dj - poly.eval(di)).abs();
                        max_violation = max_violation.max(v);
                        sum_sq += v * v;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(DeterminednessReport {
        max_violation,
        rms_violation: (sum_sq / checked.max(1) as f64).sqrt(),
        checked,
        steps: steps.to_vec(),
    })
}

/// Strongest nonzero Fourier mode of the majority phase's indicator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominantMode {
    pub phase: usize,
    pub k: [i64; 3],
    pub power: f64,
    /// Closest twin direction and the line angle to it, in degrees.
    pub nearest_twin: Vec3,
    pub angle_deg: f64,
}

/// Majority phase is the one with the largest volume fraction of the sharpened
/// field; ties go to the lower index, and so do ties between modes.
pub fn dominant_mode(chi: &PhaseField) -> DominantMode {
    let sharp = chi.sharpen();
    let fr = sharp.volume_fractions();
    let phase = (0..3).fold(0, |best, a| if fr[a] > fr[best] { a } else { best });
    let grid = chi.grid;
    let spec = Fft3::for_grid(&grid).forward_real(&sharp.chi[phase]);
    let mut best = (1usize, -1.0);
    for (p, s) in spec.iter().enumerate().skip(1) {
        let pw = s.norm_sqr();
        if pw > best.1 {
            best = (p, pw);
        }
    }
    let k = grid.lattice_k(best.0);
    let kf = k.map(|c| c as f64);
    let (nearest_twin, angle) = nearest_twin_direction(&kf);
    DominantMode {
        phase,
        k,
        power: best.1,
        nearest_twin,
        angle_deg: angle.to_degrees(),
    }
}

/// Twin direction closest to the line through `v`, with the angle in radians.
pub fn nearest_twin_direction(v: &Vec3) -> (Vec3, f64) {
    TWIN_DIRECTIONS
        .iter()
        .map(|b| (*b, line_angle(v, b)))
        .fold((TWIN_DIRECTIONS[0], f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}
