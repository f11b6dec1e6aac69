use crate::grid::{ScalarField3, TensorField3};

/// Discrete Saint-Venant compatibility residual of a strain field.
#[derive(Clone, Debug)]
pub struct CompatibilityResidual {
    /// Pointwise root-sum-square of the three mixed conditions
    /// (`∂23 e11`, `∂13 e22`, `∂12 e33` and their shear corrections).
    pub mixed: ScalarField3,
    /// Pointwise root-sum-square of the three in-plane conditions
    /// (`∂22 e11 + ∂11 e22 − 2∂12 e12` and cyclic).
    pub planar: ScalarField3,
    pub mixed_l2: f64,
    pub planar_l2: f64,
}

impl CompatibilityResidual {
    pub fn total_l2(&self) -> f64 {
        self.mixed_l2.hypot(self.planar_l2)
    }
}

/// Evaluates all six compatibility conditions with second-order centred
/// differences and periodic wrap. For diagonal fields the shear terms vanish
/// and the classical six diagonal conditions remain.
pub fn compatibility_residual(e: &TensorField3) -> CompatibilityResidual {
    let g = e.grid;
    let h = g.h();
    let inv_h2 = 1.0 / (h * h);
    let at = |c: usize, p: usize| e.comps[c][p];
    // component index of (i, j)
    let comp = |i: usize, j: usize| match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        _ => 5,
    };
    let d2 = |c: usize, p: usize, a: usize, b: usize| -> f64 {
        if a == b {
            (at(c, g.shift(p, a, 1)) - 2.0 * at(c, p) + at(c, g.shift(p, a, -1))) * inv_h2
        } else {
            let pp = g.shift(g.shift(p, a, 1), b, 1);
            let pm = g.shift(g.shift(p, a, 1), b, -1);
            let mp = g.shift(g.shift(p, a, -1), b, 1);
            let mm = g.shift(g.shift(p, a, -1), b, -1);
            (at(c, pp) - at(c, pm) - at(c, mp) + at(c, mm)) * 0.25 * inv_h2
        }
    };
    let n = g.len();
    let mut mixed = vec![0.0; n];
    let mut planar = vec![0.0; n];
    for p in 0..n {
        let mut ms = 0.0;
        let mut ps = 0.0;
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            // ∂jj e_ii + ∂ii e_jj − 2 ∂ij e_ij
            let r = d2(comp(i, i), p, j, j) + d2(comp(j, j), p, i, i) - 2.0 * d2(comp(i, j), p, i, j);
            ps += r * r;
            // ∂jk e_ii − ∂i(−∂i e_jk + ∂j e_ik + ∂k e_ij)
            let r = d2(comp(i, i), p, j, k) + d2(comp(j, k), p, i, i)
                - d2(comp(i, k), p, i, j)
                - d2(comp(i, j), p, i, k);
            ms += r * r;
        }
        mixed[p] = ms.sqrt();
        planar[p] = ps.sqrt();
    }
    let mixed = ScalarField3 { grid: g, data: mixed };
    let planar = ScalarField3 { grid: g, data: planar };
    CompatibilityResidual {
        mixed_l2: mixed.l2_sq().sqrt(),
        planar_l2: planar.l2_sq().sqrt(),
        mixed,
        planar,
    }
}
