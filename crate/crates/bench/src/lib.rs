//! Shared fixtures for the criterion benches.

use t3lab::diagnostics::harness::{centered_strain, random_phase_fields};
use t3lab::grid::{Fft3, SpectralTensor};
use t3lab::{Grid3, PhaseField, TensorField3, WellSystem};

/// Grid sizes swept by the size-dependent benches.
pub const SIZES: [usize; 3] = [16, 32, 64];

/// A seeded random sharp phase field and its centred strain.
pub fn strain_fixture(n: usize) -> (PhaseField, TensorField3) {
    let ws = WellSystem::reference();
    let chi = random_phase_fields(&Grid3::unit(n), 1, 42).remove(0);
    let f = centered_strain(&chi, &ws);
    (chi, f)
}

/// Spectrum of the polarization `C e(χ)` for the Green-operator bench.
pub fn polarization_fixture(n: usize) -> SpectralTensor {
    let (_, f) = strain_fixture(n);
    SpectralTensor::from_field(&f, &Fft3::for_grid(&f.grid))
}
