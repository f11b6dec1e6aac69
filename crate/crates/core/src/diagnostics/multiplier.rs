use crate::algebra::TWIN_DIRECTIONS;
use crate::error::{Error, Result};
use crate::grid::{Fft3, Grid3};
use crate::tensor::{dot, line_angle, normalized, Vec3};

/// `35s⁴ − 84s⁵ + 70s⁶ − 20s⁷`, clamped to [0, 1].
fn smootherstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let s4 = s * s * s * s;
    s4 * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)))
}

/// Bump profile: 1 on [−1, 1], 0 outside (−2, 2), C³ in between.
pub fn phi(t: f64) -> f64 {
    1.0 - smootherstep(t.abs() - 1.0)
}

/// Largest aperture for which the dilated cones around `dirs` are pairwise
/// disjoint away from the origin: `sin(θ_min / 2) / 2`.
pub fn mu0(dirs: &[Vec3]) -> f64 {
    let mut theta = std::f64::consts::FRAC_PI_2;
    for (a, da) in dirs.iter().enumerate() {
        for db in &dirs[a + 1..] {
            theta = theta.min(line_angle(da, db));
        }
    }
    (theta / 2.0).sin() / 2.0
}

/// `μ₀` of the six twin directions.
pub fn twin_mu0() -> f64 {
    mu0(&TWIN_DIRECTIONS)
}

/// Frequency cutoff of a cone: a smooth ball of radius `μ₁`, or a smooth
/// annulus `[μ_lo, μ_hi]` with half-octave ramps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Radial {
    Ball { mu1: f64 },
    Annulus { mu_lo: f64, mu_hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeSpec {
    pub b: Vec3,
    pub mu: f64,
    pub radial: Radial,
}

impl ConeSpec {
    pub fn new(b: Vec3, mu: f64, mu1: f64) -> Result<Self> {
        if !(mu1 >= 0.5) {
            return Err(Error::param("mu1", format!("need mu1 >= 1/2, got {mu1}")));
        }
        Self::build(b, mu, Radial::Ball { mu1 })
    }

    pub fn annular(b: Vec3, mu: f64, mu_lo: f64, mu_hi: f64) -> Result<Self> {
        if !(mu_lo > 0.0 && mu_lo < mu_hi) {
            return Err(Error::param("mu_lo", format!("need 0 < mu_lo < mu_hi, got [{mu_lo}, {mu_hi}]")));
        }
        Self::build(b, mu, Radial::Annulus { mu_lo, mu_hi })
    }

    fn build(b: Vec3, mu: f64, radial: Radial) -> Result<Self> {
        let b = normalized(&b).ok_or_else(|| Error::param("b", "zero direction"))?;
        let m0 = twin_mu0();
        if !(mu > 0.0 && mu < m0) {
            return Err(Error::param("mu", format!("need mu in (0, {m0}), got {mu}")));
        }
        Ok(Self { b, mu, radial })
    }

    /// Multiplier value at a frequency in integer-lattice units.
    pub fn eval(&self, k: &Vec3) -> f64 {
        let k2 = dot(k, k);
        if k2 == 0.0 {
            return 0.0;
        }
        let kn = k2.sqrt();
        let bk = dot(&self.b, k);
        let perp = (k2 - bk * bk).max(0.0).sqrt();
        let angular = phi(perp / (self.mu * kn));
        if angular == 0.0 {
            return 0.0;
        }
        let radial = match self.radial {
            Radial::Ball { mu1 } => phi(kn / mu1),
            Radial::Annulus { mu_lo, mu_hi } => {
                let r = std::f64::consts::SQRT_2;
                let inner = smootherstep((kn - mu_lo / r) / (mu_lo - mu_lo / r));
                let outer = 1.0 - smootherstep((kn - mu_hi) / (mu_hi * r - mu_hi));
                inner * outer
            }
        };
        angular * radial * (1.0 - phi(4.0 * kn))
    }

    /// Values on every mode of `grid`. Modes with a Nyquist component are set
    /// to zero so that the multiplier stays even on the lattice.
    pub fn on_grid(&self, grid: &Grid3) -> Vec<f64> {
        (0..grid.len())
            .map(|p| {
                if grid.ijk(p).iter().any(|&i| grid.is_nyquist(i)) {
                    0.0
                } else {
                    self.eval(&grid.lattice_k(p).map(|c| c as f64))
                }
            })
            .collect()
    }
}

/// `m(D) f` for a real field `f`.
pub fn apply_multiplier(f: &[f64], mult: &[f64], fft: &Fft3) -> Vec<f64> {
    let mut spec = fft.forward_real(f);
    for (s, m) in spec.iter_mut().zip(mult) {
        *s *= *m;
    }
    fft.inverse_real(spec)
}
