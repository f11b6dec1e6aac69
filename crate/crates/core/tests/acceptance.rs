#![allow(clippy::needless_range_loop)]

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use t3lab::algebra::wells::{B13, B31};
use t3lab::algebra::{compatibility_residual, twin};
use t3lab::diagnostics::harness::{
    centered_strain, decomposition_harness, elastic_lower_bound_harness, high_frequency_harness,
    random_phase_fields,
};
use t3lab::diagnostics::{determinedness_check, dominant_mode, LemmaReport};
use t3lab::energy::elastic_energy;
use t3lab::io::write_vtk;
use t3lab::laminate::{
    analytic_energy, build_nested_laminate_with, fit_scaling, optimize_scaling, stage_fraction,
    LaminateOptions, ScalingOptions,
};
use t3lab::solver::{solve_equilibrium, solve_frozen};
use t3lab::tensor::line_angle;
use t3lab::{
    compatible3, is_t3, Grid3, IsotropicHooke, PhaseField, SolverConfig, SolverState, SymMat, SymMat2,
    SymMat3, TensorField3, WellSystem,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn out_dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&d).expect("create output dir");
    d
}

fn algebra_exactness() -> Outcome {
    let t0 = Instant::now();
    let ws = WellSystem::reference();
    let res = ws.rank_one_residuals().max();
    let wells_incompatible = (0..3).all(|i| (i + 1..3).all(|j| compatible3(&ws.wells[i], &ws.wells[j]).is_none()));
    let mut twins_ok = true;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let Some(cert) = compatible3(&ws.aux[a], &ws.aux[b]) else {
            twins_ok = false;
            continue;
        };
        let (u, v) = cert.directions();
        let hit = |x: &[f64; 3]| line_angle(x, &twin(a, b)) < 1e-6 || line_angle(x, &twin(b, a)) < 1e-6;
        twins_ok &= hit(&u) && hit(&v) && line_angle(&u, &v) > 1.0;
    }
    let t3 = is_t3(&ws.wells.map(SymMat::from)).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    check(
        res <= 1e-12 && wells_incompatible && twins_ok && t3.is_some() && elapsed < Duration::from_secs(1),
        format!(
            "identity residual {res:.1e}, wells incompatible {wells_incompatible}, twin certificates {twins_ok}, \
             T3 {:?}, {elapsed:.2?}",
            t3.map(|c| c.lambdas)
        ),
    )
}

fn two_d_nonexistence() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut found = 0usize;
    let mut errors = 0usize;
    let trials = 100_000;
    for _ in 0..trials {
        let triple = loop {
            let m: [SymMat2; 3] = std::array::from_fn(|_| {
                SymMat2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            if [(0, 1), (1, 2), (0, 2)].iter().all(|&(i, j)| (m[i] - m[j]).det() > 0.0) {
                break m;
            }
        };
        match is_t3(&triple.map(SymMat::from)) {
            Ok(Some(_)) => found += 1,
            Ok(None) => {}
            Err(_) => errors += 1,
        }
    }
    let elapsed = t0.elapsed();
    check(
        found == 0 && errors == 0 && elapsed < Duration::from_secs(30),
        format!("{trials} triples, {found} certificates, {errors} errors, {elapsed:.2?}"),
    )
}

fn energy_oracle() -> Outcome {
    let t0 = Instant::now();
    let g = Grid3::unit(16);
    let c = IsotropicHooke::identity();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: [Vec<f64>; 3] = std::array::from_fn(|_| (0..g.len()).map(|_| rng.random_range(-0.05..0.05)).collect());
        let chi = TensorField3::diagonal(g, d).map_err(|e| e.to_string())?;
        let frozen = solve_frozen(&chi, &SymMat3::ZERO, &c, 1e-12, 10).map_err(|e| e.to_string())?;
        let mut diff = frozen.strain.clone();
        for k in 0..6 {
            for (x, y) in diff.comps[k].iter_mut().zip(&chi.comps[k]) {
                *x -= y;
            }
        }
        let solver = diff.l2_sq();
        let oracle = elastic_energy(&chi);
        worst = worst.max((solver - oracle).abs() / oracle);
    }
    let elapsed = t0.elapsed();
    check(
        worst <= 1e-6 && elapsed < Duration::from_secs(60),
        format!("max relative error {worst:.2e} over 20 fields, {elapsed:.2?}"),
    )
}

/// Periodic spectral differentiation matrix on `[0, 1)`; the Nyquist mode is
/// annihilated, as in the FFT derivative.
fn diff_matrix(n: usize) -> DMatrix<f64> {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            let d = j as f64 - k as f64;
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            2.0 * std::f64::consts::PI * 0.5 * sign / (d * h / 2.0).tan()
        }
    })
}

/// `D` acting along `axis` of an `n³` grid with index `(i n + j) n + k`.
fn axis_diff(d: &DMatrix<f64>, n: usize, axis: usize) -> DMatrix<f64> {
    let len = n * n * n;
    let ijk = |p: usize| [p / (n * n), (p / n) % n, p % n];
    DMatrix::from_fn(len, len, |p, q| {
        let (a, b) = (ijk(p), ijk(q));
        if (0..3).all(|x| x == axis || a[x] == b[x]) {
            d[(a[axis], b[axis])]
        } else {
            0.0
        }
    })
}

fn dense_equilibrium_oracle() -> Outcome {
    let t0 = Instant::now();
    let n = 8;
    let g = Grid3::unit(n);
    let len = g.len();
    let c = IsotropicHooke::reference();
    let d1 = diff_matrix(n);
    let d: Vec<DMatrix<f64>> = (0..3).map(|a| axis_diff(&d1, n, a)).collect();
    let dd: Vec<Vec<DMatrix<f64>>> = (0..3).map(|i| (0..3).map(|k| &d[i] * &d[k]).collect()).collect();
    let delta = 1e-9;
    let mut m = DMatrix::<f64>::zeros(3 * len, 3 * len);
    for i in 0..3 {
        for k in 0..3 {
            let mut block = &dd[i][k] * (-(c.lambda + c.mu));
            if i == k {
                block -= (&dd[0][0] + &dd[1][1] + &dd[2][2]) * c.mu;
                block += DMatrix::identity(len, len) * delta;
            }
            m.view_mut((i * len, k * len), (len, len)).copy_from(&block);
        }
    }
    let chol = m.cholesky().ok_or("dense operator is not positive definite")?;
    let ws = WellSystem::reference();
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut eig = TensorField3::zeros(g);
        for comp in eig.comps.iter_mut() {
            for v in comp.iter_mut() {
                *v = rng.random_range(-0.05..0.05);
            }
        }
        let ebar = ws.aux[seed as usize % 3];
        let solver = solve_frozen(&eig, &ebar, &c, 1e-14, 10).map_err(|e| e.to_string())?;
        let tau: Vec<SymMat3> = (0..len).map(|p| c.apply(&eig.at(p))).collect();
        let mut rhs = DVector::<f64>::zeros(3 * len);
        for i in 0..3 {
            for j in 0..3 {
                let t = DVector::from_iterator(len, tau.iter().map(|s| s.get(i, j)));
                let dt = &d[j] * t;
                for p in 0..len {
                    rhs[i * len + p] -= dt[p];
                }
            }
        }
        let u = chol.solve(&rhs);
        let du: Vec<Vec<DVector<f64>>> = (0..3)
            .map(|i| {
                let ui = DVector::from_iterator(len, (0..len).map(|p| u[i * len + p]));
                (0..3).map(|j| &d[j] * &ui).collect()
            })
            .collect();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for p in 0..len {
            let e = SymMat3::from_matrix(&nalgebra::Matrix3::from_fn(|i, j| {
                ebar.get(i, j) + 0.5 * (du[i][j][p] + du[j][i][p])
            }));
            num = num.max((e - solver.strain.at(p)).max_abs());
            den = den.max(e.max_abs());
        }
        worst = worst.max(num / den);
    }
    let elapsed = t0.elapsed();
    check(worst <= 1e-8, format!("max relative deviation {worst:.2e} over 5 cases, {elapsed:.2?}"))
}

fn upper_bound_scaling() -> Outcome {
    let t0 = Instant::now();
    let ws = WellSystem::reference();
    let ebar = ws.aux[0];
    let lambda = stage_fraction(&ws).map_err(|e| e.to_string())?.lambda;
    let eps: Vec<f64> = (2..=12).map(|k| 10f64.powi(-k)).collect();
    let opts = ScalingOptions::default();
    let rows = optimize_scaling(&ws, &ebar, &eps, &opts).map_err(|e| e.to_string())?;
    let fit = fit_scaling(&rows);
    let target = -lambda.ln().abs().sqrt();
    let slope_ok = ((fit.slope - target) / target).abs() <= 0.3;
    let g = Grid3::unit(128);
    let mut ratios = Vec::new();
    for (e, j) in [(1e-2f64, 1usize), (1e-2, 2), (1e-2, 3), (1e-3, 1)] {
        let r = e.powf(1.0 / (j as f64 + 1.0));
        let (_, rep) = build_nested_laminate_with(&ws, &ebar, j, r, &g, e, &LaminateOptions::default())
            .map_err(|e| e.to_string())?;
        let (.., analytic) = analytic_energy(lambda, e, j, opts.c);
        ratios.push(rep.e_total / analytic);
    }
    let grid_ok = ratios.iter().all(|q| (1.0 / 3.0..=3.0).contains(q));
    let elapsed = t0.elapsed();
    check(
        fit.r_squared >= 0.95 && slope_ok && grid_ok && elapsed < Duration::from_secs(300),
        format!(
            "slope {:.4} (target {target:.4}), R² {:.4}, grid/analytic {:?}, {elapsed:.2?}",
            fit.slope,
            fit.r_squared,
            ratios.iter().map(|q| format!("{q:.2}")).collect::<Vec<_>>()
        ),
    )
}

fn run_solver(ebar: SymMat3) -> Result<SolverState, String> {
    let cfg = SolverConfig {
        n: 64,
        ebar,
        ..SolverConfig::default()
    };
    solve_equilibrium(&cfg, &WellSystem::reference(), &IsotropicHooke::reference())
        .map(|(s, _)| s)
        .map_err(|e| e.to_string())
}

fn microstructure(j1: &Result<SolverState, String>, b: &Result<SolverState, String>) -> Outcome {
    let ws = WellSystem::reference();
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, state, ebar) in [("J1", j1, ws.aux[0]), ("B", b, ws.barycenter())] {
        let s = state.as_ref().map_err(|e| format!("{name}: {e}"))?;
        let mean_err = (s.e.mean() - ebar).max_abs();
        let dom = dominant_mode(&s.chi);
        let angle = if name == "J1" {
            line_angle(&dom.k.map(|c| c as f64), &B13).min(line_angle(&dom.k.map(|c| c as f64), &B31)).to_degrees()
        } else {
            dom.angle_deg
        };
        let path = out_dir().join(format!("solver_{name}.vtk"));
        let e = &s.e.comps;
        write_vtk(
            &path,
            &s.grid,
            &format!("ebar = {name}"),
            &[
                ("chi_1", &s.chi.chi[0]),
                ("chi_2", &s.chi.chi[1]),
                ("chi_3", &s.chi.chi[2]),
                ("e_xx", &e[0]),
                ("e_yy", &e[1]),
                ("e_zz", &e[2]),
            ],
        )
        .map_err(|e| e.to_string())?;
        ok &= s.converged && mean_err <= 1e-14 && angle <= 15.0;
        lines.push(format!(
            "{name}: {} iterations, |<e> - ebar| {mean_err:.1e}, mode {:?} at {angle:.1} deg",
            s.iterations, dom.k
        ));
    }
    check(ok, lines.join("; "))
}

fn report_line(r: &LemmaReport) -> String {
    format!(
        "{} constant {:.3e} spread {:.2} over {} rows",
        r.lemma,
        r.stability.constant,
        r.stability.spread,
        r.rows.len()
    )
}

fn lemma_harnesses(j1: &Result<SolverState, String>) -> Outcome {
    let ws = WellSystem::reference();
    let g16 = Grid3::unit(16);
    let fields: Vec<TensorField3> =
        random_phase_fields(&g16, 100, 7).iter().map(|chi| centered_strain(chi, &ws)).collect();
    let a = elastic_lower_bound_harness(&fields).map_err(|e| e.to_string())?;
    let b = high_frequency_harness(&Grid3::unit(32), &ws, &[1, 2, 4, 8]).map_err(|e| e.to_string())?;
    let s = j1.as_ref().map_err(|e| e.clone())?;
    let chi = centered_strain(&s.chi.sharpen(), &ws);
    let c = decomposition_harness(&chi, 1e-3, &[0.05, 0.1, 0.2], &[2.0, 4.0, 8.0, 16.0]).map_err(|e| e.to_string())?;
    let dir = out_dir();
    for (r, f) in [(&a, "lemma_elastic.csv"), (&b, "lemma_high_frequency.csv"), (&c, "lemma_decomposition.csv")] {
        r.write_csv(dir.join(f)).map_err(|e| e.to_string())?;
    }
    check(
        a.stability.stable && b.stability.stable && c.stability.stable,
        [&a, &b, &c].map(report_line).join("; "),
    )
}

fn determinedness(j1: &Result<SolverState, String>) -> Outcome {
    let ws = WellSystem::reference();
    let mut fields: Vec<PhaseField> = random_phase_fields(&Grid3::unit(16), 6, 11);
    if let Ok(s) = j1 {
        fields.push(s.chi.sharpen());
    }
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for chi in &fields {
        let r = determinedness_check(chi, &ws, &[1, 2, 3, 4]).map_err(|e| e.to_string())?;
        worst = worst.max(r.max_violation);
        checked += r.checked;
    }
    check(
        worst == 0.0 && j1.is_ok(),
        format!("{} fields, {checked} relations, max violation {worst:e}", fields.len()),
    )
}

fn rigidity() -> Outcome {
    let ws = WellSystem::reference();
    let tp = 2.0 * std::f64::consts::PI;
    let mut lines = Vec::new();
    let constant = compatibility_residual(&TensorField3::constant(Grid3::unit(16), &ws.aux[0])).total_l2();
    lines.push(format!("constant {constant:.1e}"));
    // e = sym ∇u for u = (sin 2πy cos 2πz, sin 2π(x+z), cos 2πx sin 2πy)
    let grad = |x: [f64; 3]| {
        let (s, c) = (|t: f64| t.sin(), |t: f64| t.cos());
        let du = [
            [0.0, tp * c(tp * x[1]) * c(tp * x[2]), -tp * s(tp * x[1]) * s(tp * x[2])],
            [tp * c(tp * (x[0] + x[2])), 0.0, tp * c(tp * (x[0] + x[2]))],
            [-tp * s(tp * x[0]) * s(tp * x[1]), tp * c(tp * x[0]) * c(tp * x[1]), 0.0],
        ];
        SymMat3::from_matrix(&nalgebra::Matrix3::from_fn(|i, j| 0.5 * (du[i][j] + du[j][i])))
    };
    let mut smooth = Vec::new();
    let mut laminate = Vec::new();
    for n in [16, 32, 64] {
        let g = Grid3::unit(n);
        smooth.push(compatibility_residual(&TensorField3::from_fn(g, grad)).total_l2());
        let labels: Vec<u8> = (0..g.len()).map(|p| u8::from(g.ijk(p)[0] < n / 2)).collect();
        let chi = PhaseField::from_labels(g, &labels).map_err(|e| e.to_string())?;
        let e = t3lab::energy::strain_from_phase(&chi, &ws);
        laminate.push(compatibility_residual(&e).total_l2());
    }
    let order = (smooth[1] / smooth[2]).log2();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ");
    lines.push(format!("gradient [{}] (order {order:.2})", fmt(&smooth)));
    lines.push(format!("laminate [{}]", fmt(&laminate)));
    let ok = constant <= 1e-12
        && smooth.windows(2).all(|w| w[1] < w[0] / 3.0)
        && laminate.iter().all(|v| *v >= 0.5 * laminate[0]);
    check(ok, lines.join("; "))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id} [{name}]: {tag} ({detail})");
    };
    report(1, "algebra exactness", algebra_exactness());
    report(2, "2D non-existence", two_d_nonexistence());
    report(3, "elastic-energy oracle", energy_oracle());
    report(4, "frozen equilibrium oracle", dense_equilibrium_oracle());
    report(5, "upper-bound scaling", upper_bound_scaling());
    let ws = WellSystem::reference();
    let t0 = Instant::now();
    let j1 = run_solver(ws.aux[0]);
    let b = run_solver(ws.barycenter());
    let solve_time = t0.elapsed();
    report(6, "microstructure", microstructure(&j1, &b).map(|d| format!("{d}; {solve_time:.1?}")));
    report(7, "lemma harnesses", lemma_harnesses(&j1));
    report(8, "determinedness", determinedness(&j1));
    report(9, "rigidity residual", rigidity());
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
