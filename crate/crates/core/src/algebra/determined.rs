use crate::error::{Error, Result};
use crate::tensor::SymMat3;

use super::wells::WellSystem;

/// Relative tolerance used to decide whether two difference values coincide.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Candidate finite-difference values, per diagonal component.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceSet {
    /// Per component: the 7 well differences, followed by `±(η_k − ē_ii)` when a mean strain was given.
    pub values: [Vec<f64>; 3],
    /// Number of distinct values per component.
    pub distinct: [usize; 3],
    pub exceptional: bool,
}

impl DifferenceSet {
    /// The component-independent base set of well differences.
    pub fn base(&self) -> &[f64] {
        &self.values[0][..7]
    }
}

fn count_distinct(values: &[f64], scale: f64) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let tol = COINCIDENCE_TOL * scale;
    1 + v.windows(2).filter(|w| w[1] - w[0] > tol).count()
}

fn well_differences(ws: &WellSystem, comp: usize) -> Vec<f64> {
    // ordered well pairs; zero first so that each nonzero difference appears once
    let mut out = vec![0.0];
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                out.push(ws.wells[a].get(comp, comp) - ws.wells[b].get(comp, comp));
            }
        }
    }
    out
}

/// Enumerates the difference values. Without a mean strain this is the 7-element
/// base set; with one, each component gets the 13-element multiset.
pub fn difference_values(ws: &WellSystem, ebar: Option<&SymMat3>) -> Result<DifferenceSet> {
    let scale = ws.eta.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(f64::MIN_POSITIVE);
    let mut values: [Vec<f64>; 3] = std::array::from_fn(|i| well_differences(ws, i));
    if let Some(e) = ebar {
        if !e.is_diagonal() {
            return Err(Error::param("ebar", "mean strain must be diagonal"));
        }
        let expected = ws.trace();
        if (e.trace() - expected).abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::TraceViolation {
                found: e.trace(),
                expected,
            });
        }
        for (i, v) in values.iter_mut().enumerate() {
            let eii = e.get(i, i);
            for &eta in &ws.eta {
                v.push(eta - eii);
                v.push(eii - eta);
            }
        }
    }
    let distinct = std::array::from_fn(|i| count_distinct(&values[i], scale));
    let exceptional = distinct.iter().zip(&values).any(|(d, v)| *d < v.len());
    Ok(DifferenceSet {
        values,
        distinct,
        exceptional,
    })
}

/// Interpolating polynomial stored by its nodes, evaluated in barycentric form.
///
/// Evaluation at a node returns the node value bit-for-bit, which is what makes
/// the determinedness relation exact on sharp fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    weights: Vec<f64>,
    /// Newton divided-difference coefficients.
    pub newton: Vec<f64>,
}

impl Polynomial {
    pub fn interpolate(nodes: &[f64], values: &[f64]) -> Result<Self> {
        assert_eq!(nodes.len(), values.len());
        let n = nodes.len();
        let scale = nodes.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let mut weights = vec![1.0; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = nodes[i] - nodes[j];
                    if d.abs() <= COINCIDENCE_TOL * scale {
                        return Err(Error::CoincidentNodes(nodes[i]));
                    }
                    weights[i] /= d;
                }
            }
        }
        let mut newton = values.to_vec();
        for level in 1..n {
            for i in (level..n).rev() {
                newton[i] = (newton[i] - newton[i - 1]) / (nodes[i] - nodes[i - level]);
            }
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            values: values.to_vec(),
            weights,
            newton,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xi, &yi), &wi) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            if x == xi {
                return yi;
            }
            let t = wi / (x - xi);
            num += t * yi;
            den += t;
        }
        num / den
    }

    /// Degree, read off the Newton coefficients with a relative cutoff.
    pub fn degree(&self) -> usize {
        let scale = self.values.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        if scale == 0.0 {
            return 0;
        }
        let xs = self.nodes.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        (0..self.newton.len())
            .rev()
            .find(|&k| self.newton[k].abs() * xs.powi(k as i32) > 1e-10 * scale)
            .unwrap_or(0)
    }
}

/// The polynomial sending the `i`-component difference of any ordered well
/// pair to the `j`-component difference of the same pair.
pub fn determinedness_polynomial(ws: &WellSystem, i: usize, j: usize) -> Result<Polynomial> {
    if i == j || i > 2 || j > 2 {
        return Err(Error::param("component", format!("need distinct indices in 0..3, got ({i}, {j})")));
    }
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                xs.push(ws.wells[a].get(i, i) - ws.wells[b].get(i, i));
                ys.push(ws.wells[a].get(j, j) - ws.wells[b].get(j, j));
            }
        }
    }
    Polynomial::interpolate(&xs, &ys)
}
