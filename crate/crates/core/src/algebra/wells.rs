use crate::error::{Error, Result};
use crate::tensor::{SymMat3, Vec3};

use super::sym_outer;

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Twin directions `b_ij`, indexed by ordered zero-based pairs.
pub const B12: Vec3 = [S, S, 0.0];
pub const B21: Vec3 = [-S, S, 0.0];
pub const B13: Vec3 = [S, 0.0, -S];
pub const B31: Vec3 = [S, 0.0, S];
pub const B23: Vec3 = [0.0, S, S];
pub const B32: Vec3 = [0.0, -S, S];

/// All six twin directions in the order b12, b21, b13, b31, b23, b32.
pub const TWIN_DIRECTIONS: [Vec3; 6] = [B12, B21, B13, B31, B23, B32];

/// The direction sets attached to the diagonal components:
/// component 1 sees {b12, b21, b13, b31}, component 2 {b12, b21, b23, b32},
/// component 3 {b13, b31, b23, b32}.
pub const TWIN_SETS: [[Vec3; 4]; 3] = [[B12, B21, B13, B31], [B12, B21, B23, B32], [B13, B31, B23, B32]];

/// Twin direction `b_ij` for zero-based `i != j`.
pub fn twin(i: usize, j: usize) -> Vec3 {
    match (i, j) {
        (0, 1) => B12,
        (1, 0) => B21,
        (0, 2) => B13,
        (2, 0) => B31,
        (1, 2) => B23,
        (2, 1) => B32,
        _ => panic!("no twin direction for ({i}, {j})"),
    }
}

/// Label convention for the three wells.
///
/// `Canonical` is the ordering used internally. `Reversed` is the alternative
/// numbering in which e1 and e3 (and J1 and J3) are swapped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WellOrdering {
    #[default]
    Canonical,
    Reversed,
}

impl WellOrdering {
    /// Maps a zero-based label in this convention to the canonical index.
    pub fn to_canonical(self, label: usize) -> usize {
        assert!(label < 3, "well label {label} out of range");
        match self {
            WellOrdering::Canonical => label,
            WellOrdering::Reversed => 2 - label,
        }
    }

    /// Inverse of [`to_canonical`](Self::to_canonical); the map is an involution.
    pub fn from_canonical(self, index: usize) -> usize {
        self.to_canonical(index)
    }
}

/// The three diagonal wells, the auxiliary matrices J and the twin directions.
#[derive(Clone, Debug, PartialEq)]
pub struct WellSystem {
    pub eta: [f64; 3],
    pub kappa: f64,
    pub wells: [SymMat3; 3],
    pub aux: [SymMat3; 3],
}

/// Residuals of the rank-one identities linking wells and auxiliary matrices.
#[derive(Clone, Debug)]
pub struct RankOneResiduals {
    /// `J_l - J_i` identities for (i, l) = (1,2), (1,3), (2,3).
    pub aux_pairs: [f64; 3],
    /// `e(i) - J_i` identities.
    pub well_aux: [f64; 3],
    /// `J_j - e(i)` identities with `j = i - 1 mod 3`.
    pub aux_well: [f64; 3],
}

impl RankOneResiduals {
    pub fn max(&self) -> f64 {
        self.aux_pairs
            .iter()
            .chain(&self.well_aux)
            .chain(&self.aux_well)
            .fold(0.0, |m, r| m.max(*r))
    }
}

pub const IDENTITY_TOL: f64 = 1e-12;

/// Builds and validates the well system for `(η1, η2, η3)`.
pub fn wells_from_etas(eta1: f64, eta2: f64, eta3: f64) -> Result<WellSystem> {
    if ![eta1, eta2, eta3].iter().all(|e| e.is_finite()) {
        return Err(Error::param("eta", "components must be finite"));
    }
    if !(eta2 < eta1) {
        return Err(Error::EllipticityViolation("eta2 < eta1"));
    }
    if !(eta1 < eta3) {
        return Err(Error::EllipticityViolation("eta1 < eta3"));
    }
    if !(eta2 + eta3 > 2.0 * eta1) {
        return Err(Error::EllipticityViolation("eta2 + eta3 > 2 eta1"));
    }
    let kappa = eta2 + eta3 - eta1;
    let ws = WellSystem {
        eta: [eta1, eta2, eta3],
        kappa,
        wells: [
            SymMat3::diag(eta3, eta1, eta2),
            SymMat3::diag(eta2, eta3, eta1),
            SymMat3::diag(eta1, eta2, eta3),
        ],
        aux: [
            SymMat3::diag(kappa, eta1, eta1),
            SymMat3::diag(eta1, kappa, eta1),
            SymMat3::diag(eta1, eta1, kappa),
        ],
    };
    let scale = eta1.abs().max(eta2.abs()).max(eta3.abs()).max(f64::MIN_POSITIVE);
    let res = ws.rank_one_residuals();
    if res.max() > IDENTITY_TOL * scale.max(1.0) {
        return Err(Error::Degenerate(format!(
            "rank-one identities fail (max residual {:e})",
            res.max()
        )));
    }
    Ok(ws)
}

impl WellSystem {
    /// Reference parameters η = (0.03, 0.01, 0.06).
    pub fn reference() -> Self {
        wells_from_etas(0.03, 0.01, 0.06).expect("reference parameters are elliptic")
    }

    pub fn trace(&self) -> f64 {
        self.eta.iter().sum()
    }

    /// Barycentre of the auxiliary triangle, (J1 + J2 + J3) / 3.
    pub fn barycenter(&self) -> SymMat3 {
        (self.aux[0] + self.aux[1] + self.aux[2]) * (1.0 / 3.0)
    }

    /// Index of the well closest to `m` in Frobenius norm, ties to the lowest index.
    pub fn nearest_well(&self, m: &SymMat3) -> usize {
        let mut best = 0;
        let mut best_d = (self.wells[0] - *m).norm_sq();
        for k in 1..3 {
            let d = (self.wells[k] - *m).norm_sq();
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    pub fn dist_sq_to_wells(&self, m: &SymMat3) -> f64 {
        (self.wells[self.nearest_well(m)] - *m).norm_sq()
    }

    pub fn rank_one_residuals(&self) -> RankOneResiduals {
        let (e, j) = (&self.wells, &self.aux);
        let c = self.kappa - self.eta[0];
        let two_sym = |a: Vec3, b: Vec3| sym_outer(&a, &b) * 2.0;
        // epsilon_{i l m} for (1,2,3), (1,3,2), (2,3,1)
        let aux_pairs = [
            ((j[1] - j[0]) - two_sym(B12, B21) * c).max_abs(),
            ((j[2] - j[0]) - two_sym(B13, B31) * (-c)).max_abs(),
            ((j[2] - j[1]) - two_sym(B23, B32) * c).max_abs(),
        ];
        let mut well_aux = [0.0; 3];
        let mut aux_well = [0.0; 3];
        for i in 0..3 {
            let jj = (i + 2) % 3;
            let t = two_sym(twin(i, jj), twin(jj, i));
            well_aux[i] = ((e[i] - j[i]) - t * (self.eta[0] - self.eta[1])).max_abs();
            aux_well[i] = ((j[jj] - e[i]) - t * (self.eta[0] - self.eta[2])).max_abs();
        }
        RankOneResiduals {
            aux_pairs,
            well_aux,
            aux_well,
        }
    }
}
