//! Periodic sample grids, real fields, and the normalised 3D FFT.
//!
//! Layout: point `(i0, i1, i2)` lives at `(i0 * N + i1) * N + i2`; axis 0 is x1.
//! Spectra are Fourier coefficients, `f̂(k) = N⁻³ Σ_x f(x) e^{−ik·x}`, so the mean
//! over the torus of `|f|²` equals `Σ_k |f̂(k)|²`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::SymMat3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid3 {
    pub n: usize,
    pub l: f64,
}

impl Grid3 {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("N", format!("need N >= 2, got {n}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::param("L", format!("need L > 0, got {l}")));
        }
        Ok(Self { n, l })
    }

    /// Unit torus with `n` points per axis.
    pub fn unit(n: usize) -> Self {
        Self::new(n, 1.0).expect("valid grid size")
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.l * self.l * self.l
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn ijk(&self, p: usize) -> [usize; 3] {
        let n = self.n;
        [p / (n * n), (p / n) % n, p % n]
    }

    /// Index of the neighbour `offset` steps along `axis`, with periodic wrap.
    #[inline]
    pub fn shift(&self, p: usize, axis: usize, offset: isize) -> usize {
        let mut c = self.ijk(p);
        let n = self.n as isize;
        c[axis] = (c[axis] as isize + offset).rem_euclid(n) as usize;
        self.idx(c[0], c[1], c[2])
    }

    /// Signed frequency of FFT index `i`; the Nyquist index maps to `−N/2`.
    #[inline]
    pub fn fold(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if 2 * i < n {
            i
        } else {
            i - n
        }
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        self.n % 2 == 0 && 2 * i == self.n
    }

    /// Integer-lattice frequency of mode `p`.
    pub fn lattice_k(&self, p: usize) -> [i64; 3] {
        self.ijk(p).map(|i| self.fold(i))
    }

    /// Frequency vector used for spectral derivatives: `2π/L` times the folded
    /// index, with the Nyquist component set to zero so real fields stay real.
    pub fn derivative_k(&self, p: usize) -> [f64; 3] {
        let s = 2.0 * PI / self.l;
        self.ijk(p)
            .map(|i| if self.is_nyquist(i) { 0.0 } else { s * self.fold(i) as f64 })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField3 {
    pub grid: Grid3,
    pub data: Vec<f64>,
}

impl ScalarField3 {
    pub fn zeros(grid: Grid3) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid3, v: f64) -> Self {
        Self {
            grid,
            data: vec![v; grid.len()],
        }
    }

    pub fn from_vec(grid: Grid3, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Samples `f(x)` at the grid points `x = h·(i0, i1, i2)`.
    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        let h = grid.h();
        let data = (0..grid.len())
            .into_par_iter()
            .map(|p| f(grid.ijk(p).map(|i| i as f64 * h)))
            .collect();
        Self { grid, data }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// `∫ f²` over the torus.
    pub fn l2_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64 * self.grid.volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Symmetric-tensor field stored as six component arrays (`xx, yy, zz, yz, xz, xy`).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField3 {
    pub grid: Grid3,
    pub comps: [Vec<f64>; 6],
}

pub const COMPONENT_NAMES: [&str; 6] = ["xx", "yy", "zz", "yz", "xz", "xy"];

/// Frobenius weight of each stored component.
pub const COMPONENT_WEIGHTS: [f64; 6] = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];

impl TensorField3 {
    pub fn zeros(grid: Grid3) -> Self {
        Self::constant(grid, &SymMat3::ZERO)
    }

    pub fn constant(grid: Grid3, m: &SymMat3) -> Self {
        let c = m.components();
        Self {
            grid,
            comps: std::array::from_fn(|k| vec![c[k]; grid.len()]),
        }
    }

    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> SymMat3 + Sync) -> Self {
        let h = grid.h();
        let vals: Vec<[f64; 6]> = (0..grid.len())
            .into_par_iter()
            .map(|p| f(grid.ijk(p).map(|i| i as f64 * h)).components())
            .collect();
        Self {
            grid,
            comps: std::array::from_fn(|k| vals.iter().map(|v| v[k]).collect()),
        }
    }

    /// Diagonal field from three component arrays.
    pub fn diagonal(grid: Grid3, d: [Vec<f64>; 3]) -> Result<Self> {
        if d.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch("diagonal component length".into()));
        }
        let [a, b, c] = d;
        let z = vec![0.0; grid.len()];
        Ok(Self {
            grid,
            comps: [a, b, c, z.clone(), z.clone(), z],
        })
    }

    pub fn at(&self, p: usize) -> SymMat3 {
        SymMat3::from_components(std::array::from_fn(|k| self.comps[k][p]))
    }

    pub fn set(&mut self, p: usize, m: &SymMat3) {
        for (k, v) in m.components().into_iter().enumerate() {
            self.comps[k][p] = v;
        }
    }

    pub fn mean(&self) -> SymMat3 {
        let n = self.grid.len() as f64;
        SymMat3::from_components(std::array::from_fn(|k| self.comps[k].iter().sum::<f64>() / n))
    }

    pub fn is_diagonal(&self) -> bool {
        self.comps[3..].iter().all(|c| c.iter().all(|v| *v == 0.0))
    }

    /// Returns `self − m` pointwise.
    pub fn sub_constant(&self, m: &SymMat3) -> Self {
        let c = m.components();
        Self {
            grid: self.grid,
            comps: std::array::from_fn(|k| self.comps[k].iter().map(|v| v - c[k]).collect()),
        }
    }

    /// Pointwise trace.
    pub fn trace(&self) -> ScalarField3 {
        let data = (0..self.grid.len())
            .map(|p| self.comps[0][p] + self.comps[1][p] + self.comps[2][p])
            .collect();
        ScalarField3 { grid: self.grid, data }
    }

    /// `sup_x |f(x)|` in the Frobenius norm.
    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len()).fold(0.0, |m, p| m.max(self.at(p).norm()))
    }

    /// `∫ |f|²` over the torus, Frobenius norm.
    pub fn l2_sq(&self) -> f64 {
        let s: f64 = (0..6)
            .map(|k| COMPONENT_WEIGHTS[k] * self.comps[k].iter().map(|v| v * v).sum::<f64>())
            .sum();
        s / self.grid.len() as f64 * self.grid.volume()
    }

    pub fn component(&self, k: usize) -> ScalarField3 {
        ScalarField3 {
            grid: self.grid,
            data: self.comps[k].clone(),
        }
    }
}

/// Normalised complex 3D FFT on an `N³` grid.
#[derive(Clone)]
pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn for_grid(grid: &Grid3) -> Self {
        Self::new(grid.n)
    }

    fn lines(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let n = self.n;
        let scratch_len = plan.get_inplace_scratch_len();
        // a plane of lines per task keeps scheduling overhead small
        data.par_chunks_mut(n * n).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, plane| plan.process_with_scratch(plane, scratch),
        );
    }

    /// Cyclic axis rotation `(a, b, c) -> (c, a, b)`.
    fn rotate(&self, src: &[Complex64], dst: &mut [Complex64]) {
        let n = self.n;
        dst.par_chunks_mut(n * n).enumerate().for_each(|(c, plane)| {
            for a in 0..n {
                for b in 0..n {
                    plane[a * n + b] = src[(a * n + b) * n + c];
                }
            }
        });
    }

    fn transform(&self, plan: &Arc<dyn Fft<f64>>, data: &mut Vec<Complex64>) {
        assert_eq!(data.len(), self.n * self.n * self.n, "FFT buffer length");
        let mut buf = vec![Complex64::default(); data.len()];
        for _ in 0..3 {
            self.lines(plan, data);
            self.rotate(data, &mut buf);
            std::mem::swap(data, &mut buf);
        }
    }

    /// In-place forward transform including the `N⁻³` normalisation.
    pub fn forward(&self, data: &mut Vec<Complex64>) {
        self.transform(&self.fwd, data);
        let s = 1.0 / (self.n * self.n * self.n) as f64;
        data.par_iter_mut().for_each(|v| *v *= s);
    }

    /// In-place inverse transform (synthesis from Fourier coefficients).
    pub fn inverse(&self, data: &mut Vec<Complex64>) {
        self.transform(&self.inv, data);
    }

    pub fn forward_real(&self, f: &[f64]) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = f.par_iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut d);
        d
    }

    /// Inverse transform returning the real part.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut spec);
        spec.into_par_iter().map(|v| v.re).collect()
    }

    /// Inverse transform returning the real part and the largest imaginary residue.
    pub fn inverse_real_checked(&self, mut spec: Vec<Complex64>) -> (Vec<f64>, f64) {
        self.inverse(&mut spec);
        let im = spec.par_iter().map(|v| v.im.abs()).reduce(|| 0.0, f64::max);
        (spec.into_par_iter().map(|v| v.re).collect(), im)
    }
}

/// Spectrum of a symmetric-tensor field, one coefficient array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTensor {
    pub grid: Grid3,
    pub comps: [Vec<Complex64>; 6],
}

impl SpectralTensor {
    pub fn zeros(grid: Grid3) -> Self {
        Self {
            grid,
            comps: std::array::from_fn(|_| vec![Complex64::default(); grid.len()]),
        }
    }

    /// Transforms a real tensor field; identically zero components are skipped.
    pub fn from_field(field: &TensorField3, fft: &Fft3) -> Self {
        let grid = field.grid;
        Self {
            grid,
            comps: std::array::from_fn(|k| {
                if field.comps[k].iter().all(|v| *v == 0.0) {
                    vec![Complex64::default(); grid.len()]
                } else {
                    fft.forward_real(&field.comps[k])
                }
            }),
        }
    }

    pub fn to_field(&self, fft: &Fft3) -> TensorField3 {
        TensorField3 {
            grid: self.grid,
            comps: std::array::from_fn(|k| fft.inverse_real(self.comps[k].clone())),
        }
    }

    pub fn mode(&self, p: usize) -> [Complex64; 6] {
        std::array::from_fn(|k| self.comps[k][p])
    }

    /// `Σ_k |f̂(k)|²` with Frobenius weights, i.e. the torus mean of `|f|²`.
    pub fn power(&self) -> f64 {
        (0..6)
            .map(|k| COMPONENT_WEIGHTS[k] * self.comps[k].iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }
}
