//! FFT fixed-point solver for the entropy-regularized three-well problem.
//!
//! Each sweep evaluates the softmax phase fractions in real space, forms the
//! polarization `τ = C Σ_α χ*_α e(α)`, and maps it back to a compatible strain
//! with mean `ē` through the periodic Green operator. The iteration is a
//! preconditioned gradient step on `∫ E*`, so the free energy does not increase
//! once the iterate is compatible.

mod checkpoint;
mod green;
mod hooke;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use green::{green_apply, green_mode};
pub use hooke::IsotropicHooke;

use crate::algebra::{WellOrdering, WellSystem};
use crate::energy::{ordered_sum, total_energy, EnergyReport, PhaseField};
use crate::error::{Error, Result};
use crate::grid::{Fft3, Grid3, SpectralTensor, TensorField3, COMPONENT_WEIGHTS};
use crate::tensor::SymMat3;

/// Geometric temperature schedule: `kT` is multiplied by `factor` every `every`
/// iterations until it reaches `floor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anneal {
    pub every: usize,
    pub factor: f64,
    pub floor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub n: usize,
    pub l: f64,
    pub kt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub ebar: SymMat3,
    pub seed: u64,
    /// Label convention of the χ outputs; computations are always canonical.
    pub ordering: WellOrdering,
    /// Amplitude of the seeded initial perturbation.
    pub perturbation: f64,
    /// ε used for the energy report of the sharp projection.
    pub report_eps: f64,
    pub anneal: Option<Anneal>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let ws = WellSystem::reference();
        Self {
            n: 128,
            l: 1.0,
            kt: 1e-4,
            tol: 1e-6,
            max_iter: 10_000,
            ebar: ws.aux[0],
            seed: 0,
            ordering: WellOrdering::Canonical,
            perturbation: 5e-3,
            report_eps: 1e-3,
            anneal: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        Grid3::new(self.n, self.l)?;
        if !(self.kt > 0.0 && self.kt.is_finite()) {
            return Err(Error::param("kT", format!("need kT > 0, got {}", self.kt)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", format!("need tol > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "need at least one iteration"));
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return Err(Error::param("perturbation", "need a finite amplitude >= 0"));
        }
        if !(self.report_eps > 0.0) {
            return Err(Error::param("report_eps", "need eps > 0"));
        }
        if let Some(a) = self.anneal {
            if a.every == 0 || !(a.factor > 0.0 && a.factor < 1.0) || !(a.floor > 0.0) {
                return Err(Error::param("anneal", "need every >= 1, factor in (0,1), floor > 0"));
            }
        }
        if self.ebar.components().iter().any(|c| !c.is_finite()) {
            return Err(Error::param("ebar", "components must be finite"));
        }
        Ok(())
    }

    fn kt_at(&self, iteration: usize) -> f64 {
        match self.anneal {
            None => self.kt,
            Some(a) => (self.kt * a.factor.powi((iteration / a.every) as i32)).max(a.floor.min(self.kt)),
        }
    }
}

/// Pointwise constitutive response.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constitutive {
    /// `E_α = ½(e − e(α)):C:(e − e(α))`.
    pub energies: [f64; 3],
    /// Softmax of `−E_α / kT`.
    pub chi: [f64; 3],
    /// `−kT log Σ exp(−E_α / kT)`.
    pub free_energy: f64,
    pub stress: SymMat3,
}

fn softmax(energies: &[f64; 3], kt: f64) -> ([f64; 3], f64) {
    let emin = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w = energies.map(|e| (-(e - emin) / kt).exp());
    let z: f64 = w.iter().sum();
    (w.map(|x| x / z), emin - kt * z.ln())
}

pub fn constitutive_update(e: &SymMat3, ws: &WellSystem, c: &IsotropicHooke, kt: f64) -> Constitutive {
    let energies = std::array::from_fn(|a| c.energy(&(*e - ws.wells[a])));
    let (chi, free_energy) = softmax(&energies, kt);
    let mut stress = SymMat3::ZERO;
    for a in 0..3 {
        stress += c.apply(&(*e - ws.wells[a])) * chi[a];
    }
    Constitutive {
        energies,
        chi,
        free_energy,
        stress,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterRecord {
    /// `‖eⁿ⁺¹ − eⁿ‖₂ / ‖ē‖`.
    pub increment: f64,
    /// `∫ E*(eⁿ)`.
    pub free_energy: f64,
    pub kt: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub grid: Grid3,
    pub ebar: SymMat3,
    pub e: TensorField3,
    /// Relaxed phase fractions evaluated at `e`, canonical order.
    pub chi: PhaseField,
    pub tau: TensorField3,
    pub iterations: usize,
    pub converged: bool,
    pub kt: f64,
    pub history: Vec<IterRecord>,
    /// `√(Σ_{k≠0} |σ̂(k) k̂|²) / |C ē|`.
    pub equilibrium_residual: f64,
}

impl SolverState {
    /// Phase-fraction arrays relabelled into `ordering`.
    pub fn chi_in(&self, ordering: WellOrdering) -> [&Vec<f64>; 3] {
        std::array::from_fn(|label| &self.chi.chi[ordering.to_canonical(label)])
    }
}

struct Sweep {
    chi: [Vec<f64>; 3],
    tau: [Vec<f64>; 3],
    free_energy_diag: f64,
}

/// Real-space sweep on a diagonal strain. Off-diagonal strain shifts every `E_α`
/// by the same amount, so the phase fractions only see the diagonal.
fn sweep(e: &[Vec<f64>; 3], ws: &WellSystem, c: &IsotropicHooke, kt: f64) -> Sweep {
    let len = e[0].len();
    let wd = ws.wells.map(|w| w.diagonal());
    let trace_w = ws.trace();
    let point = |p: usize| {
        let d = [e[0][p], e[1][p], e[2][p]];
        let tr = d[0] + d[1] + d[2] - trace_w;
        let energies = wd.map(|w| {
            let s: f64 = (0..3).map(|i| (d[i] - w[i]) * (d[i] - w[i])).sum();
            0.5 * c.lambda * tr * tr + c.mu * s
        });
        let (chi, fe) = softmax(&energies, kt);
        let es: [f64; 3] = std::array::from_fn(|i| (0..3).map(|a| chi[a] * wd[a][i]).sum());
        let t = c.lambda * (es[0] + es[1] + es[2]);
        (chi, es.map(|x| t + 2.0 * c.mu * x), fe)
    };
    let out: Vec<([f64; 3], [f64; 3], f64)> = (0..len).into_par_iter().map(point).collect();
    let free_energy_diag = ordered_sum(len, |p| out[p].2) / len as f64;
    Sweep {
        chi: std::array::from_fn(|a| out.iter().map(|o| o.0[a]).collect()),
        tau: std::array::from_fn(|i| out.iter().map(|o| o.1[i]).collect()),
        free_energy_diag,
    }
}

fn weighted_distance(a: &SpectralTensor, b: &SpectralTensor) -> f64 {
    let s: f64 = (0..6)
        .map(|c| {
            COMPONENT_WEIGHTS[c]
                * ordered_sum(a.grid.len(), |p| (a.comps[c][p] - b.comps[c][p]).norm_sqr())
        })
        .sum();
    s.sqrt()
}

fn off_diagonal_power(a: &SpectralTensor) -> f64 {
    (3..6)
        .map(|c| COMPONENT_WEIGHTS[c] * ordered_sum(a.grid.len(), |p| a.comps[c][p].norm_sqr()))
        .sum()
}

fn diagonal_spectrum(grid: Grid3, fft: &Fft3, d: &[Vec<f64>; 3]) -> SpectralTensor {
    let mut s = SpectralTensor::zeros(grid);
    for i in 0..3 {
        s.comps[i] = fft.forward_real(&d[i]);
    }
    s
}

/// Normalisation of the increment: `‖ē‖`, or the strain norm when `ē = 0`.
fn increment_scale(ebar: &SymMat3, e_hat: &SpectralTensor) -> f64 {
    let n = ebar.norm();
    if n > 0.0 {
        n
    } else {
        e_hat.power().sqrt().max(f64::MIN_POSITIVE)
    }
}

fn equilibrium_residual(e: &TensorField3, tau: &TensorField3, ebar: &SymMat3, c: &IsotropicHooke, fft: &Fft3) -> f64 {
    let grid = e.grid;
    let mut sigma = TensorField3::zeros(grid);
    for p in 0..grid.len() {
        sigma.set(p, &(c.apply(&e.at(p)) - tau.at(p)));
    }
    let s = SpectralTensor::from_field(&sigma, fft);
    let r2 = ordered_sum(grid.len(), |p| {
        let k = grid.derivative_k(p);
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        if kn == 0.0 {
            return 0.0;
        }
        let m = s.mode(p);
        let t = [[m[0], m[5], m[4]], [m[5], m[1], m[3]], [m[4], m[3], m[2]]];
        (0..3)
            .map(|i| (0..3).map(|j| t[i][j] * (k[j] / kn)).sum::<Complex64>().norm_sqr())
            .sum()
    });
    r2.sqrt() / c.apply(ebar).norm().max(f64::MIN_POSITIVE)
}

fn initial_strain(cfg: &SolverConfig, grid: Grid3) -> TensorField3 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let base = cfg.ebar.components();
    let comps = std::array::from_fn(|k| {
        (0..grid.len())
            .map(|_| base[k] + cfg.perturbation * (2.0 * rng.random::<f64>() - 1.0))
            .collect()
    });
    TensorField3 { grid, comps }
}

/// Runs the fixed-point iteration to convergence.
///
/// On `max_iter` without convergence the last state is returned inside
/// [`Error::NonConvergence`].
pub fn solve_equilibrium(
    cfg: &SolverConfig,
    ws: &WellSystem,
    c: &IsotropicHooke,
) -> Result<(SolverState, EnergyReport)> {
    cfg.validate()?;
    let grid = Grid3::new(cfg.n, cfg.l)?;
    let fft = Fft3::for_grid(&grid);
    let e0 = initial_strain(cfg, grid);
    let mut e_hat = SpectralTensor::from_field(&e0, &fft);
    let [d0, d1, d2, ..] = e0.comps;
    let mut e_diag = [d0, d1, d2];
    let mut history = Vec::new();
    let mut converged = false;
    let mut kt = cfg.kt;

    for it in 0..cfg.max_iter {
        kt = cfg.kt_at(it);
        let sw = sweep(&e_diag, ws, c, kt);
        let free_energy = (sw.free_energy_diag + c.mu * off_diagonal_power(&e_hat)) * grid.volume();
        if !free_energy.is_finite() {
            return Err(Error::NonFinite {
                iteration: it,
                what: "free energy".into(),
            });
        }
        let tau_hat = diagonal_spectrum(grid, &fft, &sw.tau);
        let new_hat = green_apply(&tau_hat, &cfg.ebar, c);
        let increment = weighted_distance(&new_hat, &e_hat) / increment_scale(&cfg.ebar, &new_hat);
        if !increment.is_finite() {
            return Err(Error::NonFinite {
                iteration: it,
                what: "strain increment".into(),
            });
        }
        e_hat = new_hat;
        e_diag = std::array::from_fn(|i| fft.inverse_real(e_hat.comps[i].clone()));
        history.push(IterRecord {
            increment,
            free_energy,
            kt,
        });
        if increment <= cfg.tol {
            converged = true;
            break;
        }
    }

    let e = e_hat.to_field(&fft);
    let sw = sweep(&e_diag, ws, c, kt);
    let tau = TensorField3::diagonal(grid, sw.tau)?;
    let chi = PhaseField::relaxed(grid, sw.chi)?;
    let equilibrium_residual = equilibrium_residual(&e, &tau, &cfg.ebar, c, &fft);
    let state = SolverState {
        grid,
        ebar: cfg.ebar,
        e,
        chi,
        tau,
        iterations: history.len(),
        converged,
        kt,
        history,
        equilibrium_residual,
    };
    if !converged {
        let last_increment = state.history.last().map_or(f64::NAN, |r| r.increment);
        return Err(Error::NonConvergence {
            iterations: state.iterations,
            last_increment,
            state: Box::new(state),
        });
    }
    let report = total_energy(&state.chi.sharpen(), ws, &cfg.ebar, cfg.report_eps)?;
    Ok((state, report))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrozenSolution {
    pub strain: TensorField3,
    pub iterations: usize,
    pub increments: Vec<f64>,
}

/// Fixed point with a prescribed eigenstrain: `τ = C ε*` does not depend on
/// the strain, so the iteration settles after the first Green application.
pub fn solve_frozen(
    eigenstrain: &TensorField3,
    ebar: &SymMat3,
    c: &IsotropicHooke,
    tol: f64,
    max_iter: usize,
) -> Result<FrozenSolution> {
    let grid = eigenstrain.grid;
    let fft = Fft3::for_grid(&grid);
    let mut tau = TensorField3::zeros(grid);
    for p in 0..grid.len() {
        tau.set(p, &c.apply(&eigenstrain.at(p)));
    }
    let mut e_hat = SpectralTensor::from_field(&TensorField3::constant(grid, ebar), &fft);
    let tau_hat = SpectralTensor::from_field(&tau, &fft);
    let mut increments = Vec::new();
    for _ in 0..max_iter.max(1) {
        let new_hat = green_apply(&tau_hat, ebar, c);
        let inc = weighted_distance(&new_hat, &e_hat) / increment_scale(ebar, &new_hat);
        e_hat = new_hat;
        increments.push(inc);
        if inc <= tol {
            return Ok(FrozenSolution {
                strain: e_hat.to_field(&fft),
                iterations: increments.len(),
                increments,
            });
        }
    }
    let state = SolverState {
        grid,
        ebar: *ebar,
        e: e_hat.to_field(&fft),
        chi: PhaseField::constant(grid, [1.0, 0.0, 0.0])?,
        tau,
        iterations: increments.len(),
        converged: false,
        kt: 0.0,
        history: Vec::new(),
        equilibrium_residual: f64::NAN,
    };
    Err(Error::NonConvergence {
        iterations: increments.len(),
        last_increment: *increments.last().unwrap_or(&f64::NAN),
        state: Box::new(state),
    })
}
