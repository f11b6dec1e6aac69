use t3lab::laminate::{
    build_nested_laminate, build_nested_laminate_with, decompose_macro_strain, fit_scaling, grid_scaling_row,
    laminate_strain, laminate_tree, optimize_scaling, BoundParams, LaminateOptions, ScalingOptions,
};
use t3lab::{Error, Grid3, SymMat3, WellSystem};

#[test]
fn optimized_energy_decreases_with_eps() {
    let ws = WellSystem::reference();
    let eps: Vec<f64> = (2..=12).map(|k| 10f64.powi(-k)).collect();
    let rows = optimize_scaling(&ws, &ws.aux[0], &eps, &ScalingOptions::default()).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].e_total < w[0].e_total);
        assert!(w[1].j >= w[0].j);
    }
    let fit = fit_scaling(&rows);
    assert!(fit.r_squared > 0.95);
    assert!(fit.slope < 0.0);
}

#[test]
fn unreachable_mean_strain_is_rejected() {
    let ws = WellSystem::reference();
    let outside = SymMat3::diag(0.1, 0.0, 0.0);
    assert!(matches!(
        optimize_scaling(&ws, &outside, &[1e-3], &ScalingOptions::default()),
        Err(Error::NotReachable(_))
    ));
    let sheared = ws.aux[0] + SymMat3::new(0.0, 0.0, 0.0, 0.01, 0.0, 0.0);
    assert!(decompose_macro_strain(&sheared, &ws).is_err());
}

#[test]
fn barycentre_construction_recovers_the_mean() {
    let ws = WellSystem::reference();
    let b = ws.barycenter();
    // N = 54 samples the prefix fractions 1/2 and 1/3 exactly on each stripe family
    let g = Grid3::unit(54);
    let tree = laminate_tree(&ws, &b, 0, 0.3).unwrap();
    let f = laminate_strain(&tree, &g, &LaminateOptions::default());
    assert!((f.mean() - b).max_abs() < 1e-3);
    let leaves = {
        let mut v = Vec::new();
        tree.walk(&mut |n| {
            if n.is_leaf() {
                v.push(n.matrix);
            }
        });
        v
    };
    assert!(leaves.iter().all(|m| ws.aux.iter().any(|a| (*a - *m).max_abs() < 1e-15)));
}

#[test]
fn deeper_laminates_lower_the_elastic_energy() {
    let ws = WellSystem::reference();
    let g = Grid3::unit(64);
    let r = 1.0 / 3.0;
    let e: Vec<f64> = (0..=2)
        .map(|j| build_nested_laminate(&ws, &ws.aux[0], j, r, &g).unwrap().1.e_el)
        .collect();
    assert!(e[1] < e[0] && e[2] < e[1], "{e:?}");
}

#[test]
fn grid_rows_carry_bounds() {
    let ws = WellSystem::reference();
    let row = grid_scaling_row(&ws, &ws.aux[0], 1e-2, 1, &Grid3::unit(32), &BoundParams::default()).unwrap();
    assert_eq!(row.j, 1);
    assert!((row.r - 0.1).abs() < 1e-15);
    assert!(row.r1 > 0.0 && row.r2 > 0.0);
    assert!((row.e_total - row.e_el - 1e-2 * row.e_surf).abs() < 1e-15);
}

#[test]
fn dirichlet_cutoff_keeps_boundary_layer_unlaminated() {
    let ws = WellSystem::reference();
    let g = Grid3::unit(32);
    let opts = LaminateOptions { dirichlet_cutoff: true };
    let (chi, _) = build_nested_laminate_with(&ws, &ws.aux[0], 1, 0.25, &g, 1e-2, &opts).unwrap();
    // the cell at the corner is within one period of the boundary: projected J1 = e(1)
    assert_eq!(chi.labels()[0], 0);
    let (free, _) = build_nested_laminate_with(&ws, &ws.aux[0], 1, 0.25, &g, 1e-2, &LaminateOptions::default()).unwrap();
    assert_ne!(chi.labels(), free.labels());
}
