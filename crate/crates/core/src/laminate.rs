//! Nested branching laminates and the `exp(−c√|log ε|)` energy scaling.
//!
//! Every auxiliary matrix splits as `J_i = λ e(i) + (1 − λ) J_{i−1}` across the
//! twin plane with normal `b_{i,i−1}`. Repeating the split inside the `J`
//! regions on finer and finer stripes gives the depth-`j` construction; the
//! residual `J` regions are finally projected onto the nearest well.

use crate::algebra::{compatible3, twin, WellSystem};
use crate::energy::{total_energy, EnergyReport, PhaseField};
use crate::error::{Error, Result};
use crate::grid::{Grid3, TensorField3};
use crate::tensor::{SymMat3, Vec3};

/// Which closed form the numerically solved stage fraction agrees with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    /// `(η2 + η3 − 2η1) / (η3 − η1)`.
    Componentwise,
    /// `(η1 + η3 − 2η2) / (η3 − η1)`.
    Alternative,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageFraction {
    pub lambda: f64,
    /// Max over the three stages of `|J_i − λ e(i) − (1 − λ) J_{i−1}|`.
    pub residual: f64,
    pub closed_form: ClosedForm,
}

/// Solves `J_i = λ e(i) + (1 − λ) J_{i−1}` in the least-squares sense for each
/// stage and checks that all three stages share one exact solution.
pub fn stage_fraction(ws: &WellSystem) -> Result<StageFraction> {
    let mut lambdas = [0.0; 3];
    let mut residual: f64 = 0.0;
    for i in 0..3 {
        let prev = ws.aux[(i + 2) % 3];
        let d = ws.aux[i] - prev;
        let u = ws.wells[i] - prev;
        let l = d.ddot(&u) / u.norm_sq();
        lambdas[i] = l;
        residual = residual.max((d - u * l).max_abs());
    }
    let lambda = lambdas[0];
    let scale = ws.eta.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if residual > 1e-12 * scale.max(1.0) || lambdas.iter().any(|l| (l - lambda).abs() > 1e-12) {
        return Err(Error::Degenerate(format!(
            "stage split has no exact solution (residual {residual:e})"
        )));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Degenerate(format!("stage fraction {lambda} outside (0, 1)")));
    }
    let [e1, e2, e3] = ws.eta;
    let close = |x: f64| (x - lambda).abs() <= 1e-12;
    let closed_form = if close((e2 + e3 - 2.0 * e1) / (e3 - e1)) {
        ClosedForm::Componentwise
    } else if close((e1 + e3 - 2.0 * e2) / (e3 - e1)) {
        ClosedForm::Alternative
    } else {
        ClosedForm::Neither
    };
    Ok(StageFraction {
        lambda,
        residual,
        closed_form,
    })
}

/// One simple-laminate split `parent = λ a + (1 − λ) b` across `normal`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaminationStep {
    pub level: usize,
    pub parent: SymMat3,
    pub a: SymMat3,
    pub b: SymMat3,
    pub lambda: f64,
    pub normal: Vec3,
}

const MEMBERSHIP_TOL: f64 = 1e-12;

fn step(level: usize, parent: SymMat3, a: SymMat3, b: SymMat3, lambda: f64, normal: Vec3) -> Result<LaminationStep> {
    if compatible3(&a, &b).is_none() {
        return Err(Error::Degenerate(format!("lamination pair at level {level} is incompatible")));
    }
    Ok(LaminationStep {
        level,
        parent,
        a,
        b,
        lambda,
        normal,
    })
}

/// Expresses `ē` through at most two levels of simple laminates whose leaves
/// are auxiliary matrices or wells.
///
/// Reachable means `ē ∈ conv{J1, J2, J3}` or `ē` on a segment `[J_j, e(j)]`.
pub fn decompose_macro_strain(ebar: &SymMat3, ws: &WellSystem) -> Result<Vec<LaminationStep>> {
    let scale = ws.eta.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
    let tol = MEMBERSHIP_TOL * scale;
    if !ebar.is_diagonal() || (ebar.trace() - ws.trace()).abs() > tol {
        return Err(Error::NotReachable("mean strain must be diagonal with the wells' trace".into()));
    }
    let eta1 = ws.eta[0];
    let mu: [f64; 3] = std::array::from_fn(|i| (ebar.get(i, i) - eta1) / (ws.kappa - eta1));
    if mu.iter().all(|m| *m >= -1e-12) {
        let mu = mu.map(|m| m.max(0.0));
        let support: Vec<usize> = (0..3).filter(|&i| mu[i] > 1e-12).collect();
        return match support.as_slice() {
            [_] => Ok(Vec::new()),
            [a, b] => {
                let t = mu[*a] / (mu[*a] + mu[*b]);
                Ok(vec![step(0, *ebar, ws.aux[*a], ws.aux[*b], t, twin(*a, *b))?])
            }
            _ => {
                let s = mu[1] + mu[2];
                let p = ws.aux[0] * (1.0 - s) + ws.aux[1] * s;
                let q = ws.aux[0] * (1.0 - s) + ws.aux[2] * s;
                Ok(vec![
                    step(0, *ebar, p, q, mu[1] / s, twin(1, 2))?,
                    step(1, p, ws.aux[0], ws.aux[1], 1.0 - s, twin(0, 1))?,
                    step(1, q, ws.aux[0], ws.aux[2], 1.0 - s, twin(0, 2))?,
                ])
            }
        };
    }
    for j in 0..3 {
        let u = ws.wells[j] - ws.aux[j];
        let t = (*ebar - ws.aux[j]).ddot(&u) / u.norm_sq();
        let off = (*ebar - ws.aux[j] - u * t).max_abs();
        if off <= tol && (-1e-12..=1.0 + 1e-12).contains(&t) {
            let t = t.clamp(0.0, 1.0);
            return Ok(vec![step(0, *ebar, ws.wells[j], ws.aux[j], t, twin(j, (j + 2) % 3))?]);
        }
    }
    Err(Error::NotReachable(format!("{ebar:?} is outside the auxiliary triangle and the well segments")))
}

/// Recursive description of the construction.
#[derive(Clone, Debug, PartialEq)]
pub struct LaminateTree {
    pub matrix: SymMat3,
    /// Interface normal of this node's stripes; `None` for leaves.
    pub normal: Option<Vec3>,
    /// Volume fraction of the first child.
    pub fraction: f64,
    /// Stripe period; one over the stripe frequency on the unit torus.
    pub period: f64,
    pub children: Vec<LaminateTree>,
}

impl LaminateTree {
    fn leaf(matrix: SymMat3) -> Self {
        Self {
            matrix,
            normal: None,
            fraction: 1.0,
            period: 1.0,
            children: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }

    /// Number of stripes per unit length.
    pub fn frequency(&self) -> u64 {
        (1.0 / self.period).round() as u64
    }

    /// Visits every node.
    pub fn walk(&self, f: &mut impl FnMut(&LaminateTree)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}

/// Stripe frequencies `n_ℓ ≈ base·r^{−ℓ}`, bumped so each exceeds twice its predecessor.
fn nesting_frequencies(base: u64, r: f64, depth: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(depth);
    let mut prev = base;
    for level in 1..=depth {
        let target = (base as f64 * r.powi(-(level as i32))).round() as u64;
        let n = target.max(2 * prev + 1);
        out.push(n);
        prev = n;
    }
    out
}

fn j_index(ws: &WellSystem, m: &SymMat3) -> Option<usize> {
    ws.aux.iter().position(|a| (*a - *m).max_abs() <= 1e-15 * ws.kappa.abs().max(1.0))
}

fn nest(ws: &WellSystem, k: usize, lambda: f64, freqs: &[u64]) -> LaminateTree {
    let Some((&n, rest)) = freqs.split_first() else {
        return LaminateTree::leaf(ws.aux[k]);
    };
    let prev = (k + 2) % 3;
    LaminateTree {
        matrix: ws.aux[k],
        normal: Some(twin(k, prev)),
        fraction: lambda,
        period: 1.0 / n as f64,
        children: vec![LaminateTree::leaf(ws.wells[k]), nest(ws, prev, lambda, rest)],
    }
}

/// Builds the depth-`j` tree for `ē` with period ratio `r`.
pub fn laminate_tree(ws: &WellSystem, ebar: &SymMat3, j: usize, r: f64) -> Result<LaminateTree> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::param("r", format!("need r in (0, 1/2), got {r}")));
    }
    let lambda = stage_fraction(ws)?.lambda;
    let steps = decompose_macro_strain(ebar, ws)?;
    let prefix_levels = steps.iter().map(|s| s.level + 1).max().unwrap_or(0);
    // prefix levels use frequencies 1, 3, 9, ...
    let prefix_freq = |level: usize| 3u64.pow(level as u32);
    let base = if prefix_levels == 0 { 1 } else { prefix_freq(prefix_levels - 1) };
    let freqs = nesting_frequencies(base, r, j);

    fn expand(m: SymMat3, steps: &[LaminationStep], ws: &WellSystem, lambda: f64, freqs: &[u64], pf: &dyn Fn(usize) -> u64) -> LaminateTree {
        if let Some(s) = steps.iter().find(|s| s.parent == m) {
            return LaminateTree {
                matrix: m,
                normal: Some(s.normal),
                fraction: s.lambda,
                period: 1.0 / pf(s.level) as f64,
                children: vec![
                    expand(s.a, steps, ws, lambda, freqs, pf),
                    expand(s.b, steps, ws, lambda, freqs, pf),
                ],
            };
        }
        match j_index(ws, &m) {
            Some(k) => nest(ws, k, lambda, freqs),
            None => LaminateTree::leaf(m),
        }
    }
    Ok(expand(*ebar, &steps, ws, lambda, &freqs, &prefix_freq))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LaminateOptions {
    /// Keep the box-domain cut-off: within one period of the cube boundary a
    /// node is not laminated further. Off on the torus.
    pub dirichlet_cutoff: bool,
}

fn lattice_direction(normal: &Vec3) -> [i64; 3] {
    let m = normal.map(|c| (c * std::f64::consts::SQRT_2).round() as i64);
    debug_assert!(m.iter().any(|c| *c != 0));
    m
}

/// Leaf matrix reached at point `idx`, or the node where a cut-off stopped.
fn locate<'a>(tree: &'a LaminateTree, grid: &Grid3, idx: [usize; 3], opts: &LaminateOptions) -> &'a LaminateTree {
    let n = grid.n as i64;
    let mut node = tree;
    while let (Some(normal), false) = (node.normal, node.is_leaf()) {
        if opts.dirichlet_cutoff {
            let h = 1.0 / grid.n as f64;
            let dist = idx
                .iter()
                .map(|&i| {
                    let x = (i as f64 + 0.5) * h;
                    x.min(1.0 - x)
                })
                .fold(f64::INFINITY, f64::min);
            if dist < node.period {
                return node;
            }
        }
        let m = lattice_direction(&normal);
        let proj: i64 = (0..3).map(|d| m[d] * idx[d] as i64).sum();
        let t = (node.frequency() as i64 * proj).rem_euclid(n);
        let s = (t as f64 + 0.5) / n as f64;
        node = if s < node.fraction { &node.children[0] } else { &node.children[1] };
    }
    node
}

/// Samples the construction without projecting auxiliary regions.
pub fn laminate_strain(tree: &LaminateTree, grid: &Grid3, opts: &LaminateOptions) -> TensorField3 {
    let mut f = TensorField3::zeros(*grid);
    for p in 0..grid.len() {
        f.set(p, &locate(tree, grid, grid.ijk(p), opts).matrix);
    }
    f
}

/// Sharp phase field of the construction; leaves that are not wells go to the
/// nearest well (ties to the lowest index).
pub fn laminate_phase(tree: &LaminateTree, ws: &WellSystem, grid: &Grid3, opts: &LaminateOptions) -> PhaseField {
    let labels: Vec<u8> = (0..grid.len())
        .map(|p| ws.nearest_well(&locate(tree, grid, grid.ijk(p), opts).matrix) as u8)
        .collect();
    PhaseField::from_labels(*grid, &labels).expect("labels in range")
}

fn check_resolvable(tree: &LaminateTree, grid: &Grid3) -> Result<()> {
    let mut finest = 1u64;
    tree.walk(&mut |node| {
        if !node.is_leaf() {
            finest = finest.max(node.frequency());
        }
    });
    if (grid.n as u64) < 2 * finest {
        return Err(Error::Unresolvable(format!(
            "finest stripe frequency {finest} needs N >= {}, grid has N = {}",
            2 * finest,
            grid.n
        )));
    }
    Ok(())
}

/// Depth-`j` laminate for `ē` on `grid`, with `ε = r^{j+1}` in the report.
pub fn build_nested_laminate(
    ws: &WellSystem,
    ebar: &SymMat3,
    j: usize,
    r: f64,
    grid: &Grid3,
) -> Result<(PhaseField, EnergyReport)> {
    build_nested_laminate_with(ws, ebar, j, r, grid, r.powi(j as i32 + 1), &LaminateOptions::default())
}

pub fn build_nested_laminate_with(
    ws: &WellSystem,
    ebar: &SymMat3,
    j: usize,
    r: f64,
    grid: &Grid3,
    eps: f64,
    opts: &LaminateOptions,
) -> Result<(PhaseField, EnergyReport)> {
    let tree = laminate_tree(ws, ebar, j, r)?;
    check_resolvable(&tree, grid)?;
    let chi = laminate_phase(&tree, ws, grid, opts);
    let report = total_energy(&chi, ws, ebar, eps)?;
    Ok((chi, report))
}

/// One row of an ε sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub eps: f64,
    pub j: usize,
    pub r: f64,
    pub e_el: f64,
    pub e_surf: f64,
    pub e_total: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Free constants of the envelope functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub nu: f64,
    pub c_nu: f64,
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            nu: 0.1,
            c_nu: 1.0,
            c1: 1.0,
            c2: 1.0,
            c: 3f64.ln().sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingOptions {
    /// Constant of the analytic bound `C(λ^j + r + ε r^{−j})`.
    pub c: f64,
    /// Depths `j* − w ..= j* + w` are tried around the predicted optimum.
    pub j_window: usize,
    pub bounds: BoundParams,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            c: 1.0,
            j_window: 2,
            bounds: BoundParams::default(),
        }
    }
}

/// `r1 = C1 exp(−c_ν |log ε|^{1/2+ν})`, `r2 = C2 exp(−C |log ε|^{1/2})`.
pub fn theoretical_bounds(eps: f64, nu: f64, c_nu: f64, c1: f64, c2: f64, c: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("need eps in (0, 1), got {eps}")));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::param("nu", format!("need nu in (0, 1), got {nu}")));
    }
    let a = eps.ln().abs();
    Ok((c1 * (-c_nu * a.powf(0.5 + nu)).exp(), c2 * (-c * a.sqrt()).exp()))
}

/// Analytic bound at depth `j` with `r = ε^{1/(j+1)}`: `(E_el, E_surf, E_total)`.
pub fn analytic_energy(lambda: f64, eps: f64, j: usize, c: f64) -> (f64, f64, f64, f64) {
    let r = eps.powf(1.0 / (j as f64 + 1.0));
    let e_el = c * (lambda.powi(j as i32) + r);
    let e_surf = c * r.powi(-(j as i32));
    (r, e_el, e_surf, e_el + eps * e_surf)
}

/// Minimises the analytic bound over depths near `j* = √|log ε / log λ|`.
pub fn optimize_scaling(
    ws: &WellSystem,
    ebar: &SymMat3,
    eps_list: &[f64],
    opts: &ScalingOptions,
) -> Result<Vec<ScalingRow>> {
    decompose_macro_strain(ebar, ws)?;
    let lambda = stage_fraction(ws)?.lambda;
    let b = opts.bounds;
    eps_list
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps < 0.25) {
                return Err(Error::param("eps", format!("need eps in (0, 1/4), got {eps}")));
            }
            let jstar = ((eps.ln() / lambda.ln()).abs().sqrt().round() as usize).max(1);
            let (r1, r2) = theoretical_bounds(eps, b.nu, b.c_nu, b.c1, b.c2, b.c)?;
            let best = (jstar.saturating_sub(opts.j_window).max(1)..=jstar + opts.j_window)
                .map(|j| (j, analytic_energy(lambda, eps, j, opts.c)))
                .filter(|(_, (r, ..))| *r < 0.5)
                .min_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
                .ok_or_else(|| Error::param("eps", format!("no admissible depth for eps = {eps}")))?;
            let (j, (r, e_el, e_surf, e_total)) = best;
            Ok(ScalingRow {
                eps,
                j,
                r,
                e_el,
                e_surf,
                e_total,
                r1,
                r2,
            })
        })
        .collect()
}

/// Measured energy of the depth-`j` construction with `r = ε^{1/(j+1)}`.
pub fn grid_scaling_row(
    ws: &WellSystem,
    ebar: &SymMat3,
    eps: f64,
    j: usize,
    grid: &Grid3,
    bounds: &BoundParams,
) -> Result<ScalingRow> {
    let r = eps.powf(1.0 / (j as f64 + 1.0));
    let (_, rep) = build_nested_laminate_with(ws, ebar, j, r, grid, eps, &LaminateOptions::default())?;
    let (r1, r2) = theoretical_bounds(eps, bounds.nu, bounds.c_nu, bounds.c1, bounds.c2, bounds.c)?;
    Ok(ScalingRow {
        eps,
        j,
        r,
        e_el: rep.e_el,
        e_surf: rep.e_surf,
        e_total: rep.e_total,
        r1,
        r2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared: if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) },
    }
}

/// Fit of `log E_total` against `√|log ε|`.
pub fn fit_scaling(rows: &[ScalingRow]) -> LineFit {
    let x: Vec<f64> = rows.iter().map(|r| r.eps.ln().abs().sqrt()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.e_total.ln()).collect();
    fit_line(&x, &y)
}
