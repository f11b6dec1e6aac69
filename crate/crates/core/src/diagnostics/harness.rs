//! Empirical checks of the quantitative lemmas.
//!
//! Each harness produces rows `(parameters, LHS, RHS shape, LHS / RHS)`. The
//! constant is fitted as the median ratio over the even rows; the odd rows form
//! the test set, and the check passes when their largest ratio stays within a
//! factor [`STABILITY_LIMIT`] of the fitted constant.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::WellSystem;
use crate::energy::{elastic_energy, multiplier_lower_bound, strain_from_phase, total_variation, PhaseField};
use crate::error::{Error, Result};
use crate::grid::{Grid3, TensorField3};

use super::{high_frequency_mass, six_wave_decomposition};

pub const STABILITY_LIMIT: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaRow {
    pub params: String,
    pub lhs: f64,
    pub rhs_shape: f64,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stability {
    pub constant: f64,
    pub test_max: f64,
    pub test_median: f64,
    /// `test_max / constant`.
    pub spread: f64,
    pub stable: bool,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl Stability {
    pub fn from_ratios(ratios: &[f64]) -> Result<Self> {
        if ratios.len() < 2 {
            return Err(Error::param("ratios", "need at least two samples"));
        }
        if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::param("ratios", "ratios must be finite and non-negative"));
        }
        let mut cal: Vec<f64> = ratios.iter().step_by(2).copied().collect();
        let mut test: Vec<f64> = ratios.iter().skip(1).step_by(2).copied().collect();
        let constant = median(&mut cal);
        let test_max = test.iter().copied().fold(0.0, f64::max);
        let test_median = median(&mut test);
        let spread = test_max / constant;
        Ok(Self {
            constant,
            test_max,
            test_median,
            spread,
            stable: spread.is_finite() && spread <= STABILITY_LIMIT,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub lemma: String,
    pub rows: Vec<LemmaRow>,
    pub stability: Stability,
}

impl LemmaReport {
    pub fn new(lemma: &str, rows: Vec<LemmaRow>) -> Result<Self> {
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        Ok(Self {
            lemma: lemma.to_string(),
            stability: Stability::from_ratios(&ratios)?,
            rows,
        })
    }

    /// One CSV row per sample; the fitted constant is repeated on every row.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["lemma", "params", "set", "lhs", "rhs_shape", "ratio", "fitted_constant"])?;
        for (i, r) in self.rows.iter().enumerate() {
            w.write_record([
                self.lemma.clone(),
                r.params.clone(),
                if i % 2 == 0 { "calibration" } else { "test" }.to_string(),
                format!("{:e}", r.lhs),
                format!("{:e}", r.rhs_shape),
                format!("{:e}", r.ratio),
                format!("{:e}", self.stability.constant),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn row(params: String, lhs: f64, rhs_shape: f64) -> LemmaRow {
    LemmaRow {
        params,
        lhs,
        rhs_shape,
        ratio: lhs / rhs_shape,
    }
}

/// Random sharp phase fields, cycling through three families: independent
/// labels, planar laminates with random lattice normals, and coarse blocks.
pub fn random_phase_fields(grid: &Grid3, count: usize, seed: u64) -> Vec<PhaseField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n;
    (0..count)
        .map(|s| {
            let labels: Vec<u8> = match s % 3 {
                0 => (0..grid.len()).map(|_| rng.random_range(0..3u8)).collect(),
                1 => {
                    let m: [i64; 3] = loop {
                        let m = [0; 3].map(|_| rng.random_range(-2..=2i64));
                        if m != [0; 3] {
                            break m;
                        }
                    };
                    let periods = rng.random_range(1..=4i64);
                    let first = rng.random_range(0..3u8);
                    let pair = [first, (first + rng.random_range(1..3u8)) % 3];
                    let frac = rng.random_range(0.2..0.8);
                    (0..grid.len())
                        .map(|p| {
                            let ijk = grid.ijk(p);
                            let t: i64 = (0..3).map(|d| m[d] * ijk[d] as i64).sum();
                            let s = ((periods * t).rem_euclid(n as i64) as f64 + 0.5) / n as f64;
                            if s < frac {
                                pair[0]
                            } else {
                                pair[1]
                            }
                        })
                        .collect()
                }
                _ => {
                    let b = 4.max(n / 4);
                    let nb = n.div_ceil(b);
                    let blocks: Vec<u8> = (0..nb * nb * nb).map(|_| rng.random_range(0..3u8)).collect();
                    (0..grid.len())
                        .map(|p| {
                            let [i, j, k] = grid.ijk(p).map(|c| c / b);
                            blocks[(i * nb + j) * nb + k]
                        })
                        .collect()
                }
            };
            PhaseField::from_labels(*grid, &labels).expect("labels in range")
        })
        .collect()
}

/// `χ̃ = strain(χ) − ⟨strain(χ)⟩`.
pub fn centered_strain(chi: &PhaseField, ws: &WellSystem) -> TensorField3 {
    let e = strain_from_phase(chi, ws);
    let m = e.mean();
    e.sub_constant(&m)
}

/// Multiplier lower bound against the elastic energy: ratio `LB / E_el`.
pub fn elastic_lower_bound_harness(fields: &[TensorField3]) -> Result<LemmaReport> {
    let rows = fields
        .iter()
        .enumerate()
        .map(|(s, f)| row(format!("sample={s}"), multiplier_lower_bound(f), elastic_energy(f)))
        .collect();
    LemmaReport::new("elastic_lower_bound", rows)
}

/// High-frequency mass of simple laminates against `‖χ̃‖_∞ E_surf / μ₁`,
/// swept over stripe counts, normals and cutoffs `μ₁ = 1, 2, 4, …, N/4`.
pub fn high_frequency_harness(grid: &Grid3, ws: &WellSystem, periods: &[i64]) -> Result<LemmaReport> {
    let normals: [[i64; 3]; 4] = [[1, 0, 0], [1, 1, 0], [1, 0, -1], [1, 1, 1]];
    let n = grid.n as i64;
    let mut rows = Vec::new();
    for &periods in periods {
        for (a, m) in normals.iter().enumerate() {
            let pair = [a % 3, (a + 1) % 3].map(|x| x as u8);
            let labels: Vec<u8> = (0..grid.len())
                .map(|p| {
                    let ijk = grid.ijk(p);
                    let t: i64 = (0..3).map(|d| m[d] * ijk[d] as i64).sum();
                    if (periods * t).rem_euclid(n) < n / 2 {
                        pair[0]
                    } else {
                        pair[1]
                    }
                })
                .collect();
            let chi = PhaseField::from_labels(*grid, &labels)?;
            let f = centered_strain(&chi, ws);
            let sup = f.max_norm();
            let surf: f64 = (0..3).map(|c| total_variation(&f.component(c))).sum();
            let mut mu1 = 1.0;
            while mu1 <= grid.n as f64 / 4.0 {
                rows.push(row(
                    format!("periods={periods};normal={m:?};mu1={mu1}"),
                    high_frequency_mass(&f, mu1),
                    sup * surf / mu1,
                ));
                mu1 *= 2.0;
            }
        }
    }
    LemmaReport::new("high_frequency", rows)
}

/// Residual mass of the six-wave split against `(μ⁻² + μ₁⁻¹ε⁻¹) E_ε` over a
/// grid of apertures and cutoffs.
pub fn decomposition_harness(chi_tilde: &TensorField3, eps: f64, mus: &[f64], mu1s: &[f64]) -> Result<LemmaReport> {
    let mut rows = Vec::new();
    for &mu in mus {
        for &mu1 in mu1s {
            let d = six_wave_decomposition(chi_tilde, mu, mu1, eps)?;
            rows.push(row(format!("mu={mu};mu1={mu1};eps={eps}"), d.sigma_l2_sq, d.bound_shape));
        }
    }
    LemmaReport::new("six_wave_residual", rows)
}
