use crate::error::{Error, Result};
use crate::tensor::{SymMat3, Vec3};

/// Isotropic stiffness `C_ijkl = λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsotropicHooke {
    pub lambda: f64,
    pub mu: f64,
}

impl IsotropicHooke {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !lambda.is_finite() || !mu.is_finite() {
            return Err(Error::param("mu_e", format!("need mu_e > 0, got {mu}")));
        }
        if !(3.0 * lambda + 2.0 * mu > 0.0) {
            return Err(Error::param(
                "lambda_e",
                format!("need 3 lambda_e + 2 mu_e > 0, got lambda_e = {lambda}"),
            ));
        }
        Ok(Self { lambda, mu })
    }

    /// λ = 7/3, μ = 1.
    pub fn reference() -> Self {
        Self {
            lambda: 7.0 / 3.0,
            mu: 1.0,
        }
    }

    /// λ = 0, μ = ½, so that `C(A) = A`.
    pub fn identity() -> Self {
        Self { lambda: 0.0, mu: 0.5 }
    }

    pub fn apply(&self, a: &SymMat3) -> SymMat3 {
        *a * (2.0 * self.mu) + SymMat3::IDENTITY * (self.lambda * a.trace())
    }

    /// `½ A:C:A`.
    pub fn energy(&self, a: &SymMat3) -> f64 {
        let t = a.trace();
        0.5 * self.lambda * t * t + self.mu * a.norm_sq()
    }

    /// Full fourth-order entry `C_ijkl`.
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        self.lambda * d(i, j) * d(k, l) + self.mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
    }

    /// Acoustic tensor `A_ik(k) = C_ijkl k_j k_l`.
    pub fn acoustic(&self, k: &Vec3) -> [[f64; 3]; 3] {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        std::array::from_fn(|i| {
            std::array::from_fn(|m| {
                self.mu * if i == m { k2 } else { 0.0 } + (self.lambda + self.mu) * k[i] * k[m]
            })
        })
    }

    /// Closed-form inverse `(μ|k|²)⁻¹ (I − (λ+μ)/(λ+2μ) k kᵀ/|k|²)`; `None` at `k = 0`.
    pub fn acoustic_inverse(&self, k: &Vec3) -> Option<[[f64; 3]; 3]> {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            return None;
        }
        let a = 1.0 / (self.mu * k2);
        let b = (self.lambda + self.mu) / (self.lambda + 2.0 * self.mu) / k2;
        Some(std::array::from_fn(|i| {
            std::array::from_fn(|m| a * (if i == m { 1.0 } else { 0.0 } - b * k[i] * k[m]))
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn acoustic_tensor_along_axis() {
        let c = IsotropicHooke::reference();
        let k = [2.0 * PI, 0.0, 0.0];
        let k2 = 4.0 * PI * PI;
        let a = c.acoustic(&k);
        let ai = c.acoustic_inverse(&k).unwrap();
        let want = [13.0 / 3.0, 1.0, 1.0];
        for i in 0..3 {
            assert!((a[i][i] / k2 - want[i]).abs() < 1e-14);
            assert!((ai[i][i] * k2 - 1.0 / want[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_inverse_matches_generic_inverse() {
        let c = IsotropicHooke::new(1.3, 0.7).unwrap();
        let k = [0.4, -1.1, 2.5];
        let a = c.acoustic(&k);
        let m = nalgebra::Matrix3::from_fn(|i, j| a[i][j]);
        let inv = m.try_inverse().unwrap();
        let ai = c.acoustic_inverse(&k).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((inv[(i, j)] - ai[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn acoustic_tensor_from_entries() {
        let c = IsotropicHooke::reference();
        let k = [0.3, 0.2, -0.9];
        let a = c.acoustic(&k);
        for i in 0..3 {
            for m in 0..3 {
                let mut s = 0.0;
                for j in 0..3 {
                    for l in 0..3 {
                        s += c.entry(i, j, m, l) * k[j] * k[l];
                    }
                }
                assert!((s - a[i][m]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_law_is_identity() {
        let a = SymMat3::new(0.1, 0.2, 0.3, 0.4, 0.5, 0.6);
        assert_eq!(IsotropicHooke::identity().apply(&a), a);
    }

    #[test]
    fn moduli_validation() {
        assert!(IsotropicHooke::new(1.0, 0.0).is_err());
        assert!(IsotropicHooke::new(-1.0, 1.0).is_err());
        assert!(IsotropicHooke::new(-0.5, 1.0).is_ok());
    }
}
