use crate::error::{Error, Result};
use crate::tensor::{SymMat2, SymMat3, Vec3};

/// `½(a⊗b + b⊗a)`.
pub fn sym_outer(a: &Vec3, b: &Vec3) -> SymMat3 {
    SymMat3::new(
        a[0] * b[0],
        a[1] * b[1],
        a[2] * b[2],
        0.5 * (a[1] * b[2] + a[2] * b[1]),
        0.5 * (a[0] * b[2] + a[2] * b[0]),
        0.5 * (a[0] * b[1] + a[1] * b[0]),
    )
}

/// A symmetric matrix of dimension two or three.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymMat {
    Two(SymMat2),
    Three(SymMat3),
}

impl SymMat {
    pub fn dim(&self) -> usize {
        match self {
            SymMat::Two(_) => 2,
            SymMat::Three(_) => 3,
        }
    }

    /// The matrix embedded in 3×3 (2D matrices fill the upper-left block).
    pub fn as_3d(&self) -> SymMat3 {
        match self {
            SymMat::Two(m) => m.embed(),
            SymMat::Three(m) => *m,
        }
    }
}

impl From<SymMat2> for SymMat {
    fn from(m: SymMat2) -> Self {
        SymMat::Two(m)
    }
}

impl From<SymMat3> for SymMat {
    fn from(m: SymMat3) -> Self {
        SymMat::Three(m)
    }
}

/// Witness that `A − B = ½(a⊗b + b⊗a)`.
///
/// For 2D inputs the vectors carry a zero third component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatCertificate {
    pub a: Vec3,
    pub b: Vec3,
    /// Max-norm of `A − B − sym_outer(a, b)`.
    pub residual: f64,
}

impl CompatCertificate {
    /// Unit directions of `a` and `b` (zero vectors stay zero).
    pub fn directions(&self) -> (Vec3, Vec3) {
        let unit = |v: &Vec3| crate::tensor::normalized(v).unwrap_or([0.0; 3]);
        (unit(&self.a), unit(&self.b))
    }
}

/// Relative tolerance on the middle eigenvalue in the 3D test.
pub const EIG_TOL: f64 = 1e-10;

fn certificate_from_eigen(d: &SymMat3, lo: f64, v_lo: &Vec3, hi: f64, v_hi: &Vec3) -> CompatCertificate {
    let p = hi.max(0.0).sqrt();
    let q = (-lo).max(0.0).sqrt();
    let a = [
        p * v_hi[0] + q * v_lo[0],
        p * v_hi[1] + q * v_lo[1],
        p * v_hi[2] + q * v_lo[2],
    ];
    let b = [
        p * v_hi[0] - q * v_lo[0],
        p * v_hi[1] - q * v_lo[1],
        p * v_hi[2] - q * v_lo[2],
    ];
    let residual = (*d - sym_outer(&a, &b)).max_abs();
    CompatCertificate { a, b, residual }
}

/// 3D compatibility: the sorted spectrum of `A − B` must be `{μ₋ ≤ 0, 0, μ₊ ≥ 0}`.
pub fn compatible3(a: &SymMat3, b: &SymMat3) -> Option<CompatCertificate> {
    let d = *a - *b;
    let (vals, vecs) = d.eigen_sorted();
    if vals[1].abs() > EIG_TOL * (1.0 + d.norm()) || vals[0] * vals[2] > 0.0 {
        return None;
    }
    let cert = certificate_from_eigen(&d, vals[0], &vecs[0], vals[2], &vecs[2]);
    (cert.residual <= 10.0 * EIG_TOL * (1.0 + d.norm())).then_some(cert)
}

/// 2D compatibility: `A − B = sym(a⊗b)` iff `det(A − B) ≤ 0`, tested exactly.
pub fn compatible2(a: &SymMat2, b: &SymMat2) -> Option<CompatCertificate> {
    let d = *a - *b;
    if d.det() > 0.0 {
        return None;
    }
    let (vals, vecs) = d.eigen_sorted();
    let lift = |v: [f64; 2]| [v[0], v[1], 0.0];
    Some(certificate_from_eigen(
        &d.embed(),
        vals[0].min(0.0),
        &lift(vecs[0]),
        vals[1].max(0.0),
        &lift(vecs[1]),
    ))
}

/// Dimension-dispatching compatibility test.
pub fn compatible(a: &SymMat, b: &SymMat) -> Result<Option<CompatCertificate>> {
    match (a, b) {
        (SymMat::Two(a), SymMat::Two(b)) => Ok(compatible2(a, b)),
        (SymMat::Three(a), SymMat::Three(b)) => Ok(compatible3(a, b)),
        _ => Err(Error::DimensionMismatch(format!(
            "compatible() got {}D and {}D matrices",
            a.dim(),
            b.dim()
        ))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct T3Certificate {
    /// `aux[j] = λ_j A_{j+1} + (1 − λ_j) A_{j+2}` (indices mod 3).
    pub lambdas: [f64; 3],
    pub aux: [SymMat; 3],
    /// Certificate for `aux[j]` against `A_j`.
    pub certs: [CompatCertificate; 3],
}

const SCAN_POINTS: usize = 64;
const BISECT_TOL: f64 = 1e-12;

fn combo(a: &SymMat, b: &SymMat, lambda: f64) -> SymMat {
    match (a, b) {
        (SymMat::Two(a), SymMat::Two(b)) => SymMat::Two(*a * lambda + *b * (1.0 - lambda)),
        (SymMat::Three(a), SymMat::Three(b)) => SymMat::Three(*a * lambda + *b * (1.0 - lambda)),
        _ => unreachable!("dimensions checked by caller"),
    }
}

fn degenerate_check(m: &[SymMat; 3]) -> Result<()> {
    let v: Vec<[f64; 6]> = m.iter().map(|x| x.as_3d().components()).collect();
    let scale = v
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |s, x| s.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let diff = |i: usize, j: usize| -> [f64; 6] { std::array::from_fn(|k| v[i][k] - v[j][k]) };
    let ip = |x: &[f64; 6], y: &[f64; 6]| -> f64 {
        // Frobenius weights: off-diagonals count twice
        (0..6).map(|k| if k < 3 { x[k] * y[k] } else { 2.0 * x[k] * y[k] }).sum()
    };
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let d = diff(i, j);
        if ip(&d, &d).sqrt() <= 1e-14 * scale {
            return Err(Error::Degenerate(format!("matrices {i} and {j} coincide")));
        }
    }
    let (u, w) = (diff(1, 0), diff(2, 0));
    let (uu, ww, uw) = (ip(&u, &u), ip(&w, &w), ip(&u, &w));
    if uu * ww - uw * uw <= 1e-12 * uu * ww {
        return Err(Error::Degenerate("matrices are collinear".into()));
    }
    Ok(())
}

/// Finds λ in (0, 1) with `λ p + (1 − λ) q` compatible with `target` (3D).
fn segment_root3(p: &SymMat3, q: &SymMat3, target: &SymMat3) -> Option<f64> {
    let f = |l: f64| (*p * l + *q * (1.0 - l) - *target).eigenvalues_sorted()[1];
    let mut prev_l = 0.0;
    let mut prev_f = f(0.0);
    for s in 1..=SCAN_POINTS {
        let l = s as f64 / SCAN_POINTS as f64;
        let fl = f(l);
        let in_open = |x: f64| x > 0.0 && x < 1.0;
        if fl == 0.0 && in_open(l) {
            return Some(l);
        }
        if prev_f * fl < 0.0 {
            let (mut lo, mut hi, mut flo) = (prev_l, l, prev_f);
            while hi - lo > BISECT_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if in_open(root) {
                return Some(root);
            }
        }
        prev_l = l;
        prev_f = fl;
    }
    None
}

/// Finds λ in (0, 1) with `det(λ p + (1 − λ) q − target) ≤ 0` (2D); the
/// determinant is an exact quadratic in λ, minimised in closed form.
fn segment_root2(p: &SymMat2, q: &SymMat2, target: &SymMat2) -> Option<f64> {
    let m0 = *q - *target;
    let m1 = *p - *q;
    let c0 = m0.det();
    let c1 = m0.xx * m1.yy + m1.xx * m0.yy - 2.0 * m0.xy * m1.xy;
    let c2 = m1.det();
    let g = |l: f64| c0 + l * (c1 + l * c2);
    let mut candidates = vec![0.5];
    if c2 != 0.0 {
        candidates.push(-c1 / (2.0 * c2));
    }
    // roots of the quadratic, where the sign can change
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if c2 != 0.0 && disc >= 0.0 {
        let sq = disc.sqrt();
        let r1 = (-c1 - sq) / (2.0 * c2);
        let r2 = (-c1 + sq) / (2.0 * c2);
        candidates.extend([r1, r2, 0.5 * (r1 + r2)]);
    } else if c2 == 0.0 && c1 != 0.0 {
        candidates.push(-c0 / c1);
    }
    candidates
        .into_iter()
        .filter(|l| *l > 0.0 && *l < 1.0)
        .find(|l| g(*l) <= 0.0 && (*p * *l + *q * (1.0 - *l) - *target).det() <= 0.0)
}

/// T3 detection: pairwise incompatible inputs whose connecting segments each
/// contain a point compatible with the opposite matrix.
pub fn is_t3(m: &[SymMat; 3]) -> Result<Option<T3Certificate>> {
    let dim = m[0].dim();
    if m.iter().any(|x| x.dim() != dim) {
        return Err(Error::DimensionMismatch("is_t3() needs matrices of one dimension".into()));
    }
    degenerate_check(m)?;
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        if compatible(&m[i], &m[j])?.is_some() {
            return Ok(None);
        }
    }
    let mut lambdas = [0.0; 3];
    let mut aux = [m[0]; 3];
    let mut certs = Vec::with_capacity(3);
    for j in 0..3 {
        let (p, q) = (&m[(j + 1) % 3], &m[(j + 2) % 3]);
        let root = match (p, q, &m[j]) {
            (SymMat::Three(p), SymMat::Three(q), SymMat::Three(t)) => segment_root3(p, q, t),
            (SymMat::Two(p), SymMat::Two(q), SymMat::Two(t)) => segment_root2(p, q, t),
            _ => unreachable!(),
        };
        let Some(l) = root else { return Ok(None) };
        let a = combo(p, q, l);
        let Some(cert) = compatible(&a, &m[j])? else {
            return Ok(None);
        };
        lambdas[j] = l;
        aux[j] = a;
        certs.push(cert);
    }
    let certs: [CompatCertificate; 3] = certs.try_into().expect("three certificates");
    Ok(Some(T3Certificate { lambdas, aux, certs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::wells::{WellSystem, B12, B21};
    use crate::tensor::line_angle;

    #[test]
    fn sym_outer_examples() {
        assert_eq!(sym_outer(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]), SymMat3::diag(1.0, 0.0, 0.0));
        assert_eq!(
            sym_outer(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
            SymMat3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.5)
        );
        let m = sym_outer(&B12, &B21);
        assert!((m - SymMat3::diag(-0.5, 0.5, 0.0)).max_abs() < 1e-15);
    }

    #[test]
    fn aux_pair_certificate_spans_twin_pair() {
        let ws = WellSystem::reference();
        let cert = compatible3(&ws.aux[1], &ws.aux[0]).expect("J2 - J1 compatible");
        let (a, b) = cert.directions();
        let hits = |v: &Vec3| line_angle(v, &B12) < 1e-8 || line_angle(v, &B21) < 1e-8;
        assert!(hits(&a) && hits(&b));
        assert!(line_angle(&a, &b) > 1.0);
    }

    #[test]
    fn well_pair_incompatible() {
        let ws = WellSystem::reference();
        let d = ws.wells[0] - ws.wells[1];
        assert!((d - SymMat3::diag(0.05, -0.03, -0.02)).max_abs() < 1e-16);
        assert!(compatible3(&ws.wells[0], &ws.wells[1]).is_none());
    }

    #[test]
    fn two_d_examples() {
        let a = SymMat2::new(1.0, -1.0, 0.0);
        let cert = compatible2(&a, &SymMat2::default()).expect("det = -1");
        assert!(cert.residual < 1e-14);
        assert!(compatible2(&SymMat2::new(1.0, 1.0, 0.0), &SymMat2::default()).is_none());
    }

    #[test]
    fn coincident_matrices_are_trivially_compatible() {
        let a = SymMat3::diag(0.1, 0.2, 0.3);
        let cert = compatible3(&a, &a).unwrap();
        assert_eq!(cert.residual, 0.0);
    }

    #[test]
    fn mismatched_dimensions_error() {
        let r = compatible(&SymMat2::default().into(), &SymMat3::ZERO.into());
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn k3_is_t3_with_root_at_two_fifths() {
        let ws = WellSystem::reference();
        let m = ws.wells.map(SymMat::Three);
        let cert = is_t3(&m).unwrap().expect("K3 is a T3 structure");
        assert!((cert.lambdas[0] - 0.4).abs() < 1e-11);
        for j in 0..3 {
            assert!(cert.lambdas[j] > 0.0 && cert.lambdas[j] < 1.0);
        }
    }

    #[test]
    fn degenerate_triples_error() {
        let a = SymMat3::diag(1.0, 0.0, 0.0);
        let b = SymMat3::diag(2.0, 0.0, 0.0);
        let c = SymMat3::diag(3.0, 0.0, 0.0);
        assert!(matches!(is_t3(&[a.into(), b.into(), c.into()]), Err(Error::Degenerate(_))));
        assert!(matches!(is_t3(&[a.into(), a.into(), c.into()]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn compatible_pair_fails_condition_one() {
        let ws = WellSystem::reference();
        let m = [ws.aux[0].into(), ws.aux[1].into(), ws.wells[2].into()];
        assert_eq!(is_t3(&m).unwrap(), None);
    }
}
