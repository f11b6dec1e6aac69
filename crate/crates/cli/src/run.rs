use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use t3lab::algebra::{determinedness_polynomial, difference_values, TWIN_SETS};
use t3lab::diagnostics::harness::{
    centered_strain, decomposition_harness, elastic_lower_bound_harness, high_frequency_harness, random_phase_fields,
};
use t3lab::diagnostics::{determinedness_check, dominant_mode, shell_energy, shell_schedule, twin_mu0, LemmaReport};
use t3lab::energy::total_energy;
use t3lab::grid::COMPONENT_NAMES;
use t3lab::io::{write_energy_csv, write_scaling_csv, write_vtk, ENERGY_HEADER, SCALING_HEADER};
use t3lab::laminate::{fit_scaling, grid_scaling_row, optimize_scaling, stage_fraction, BoundParams, ScalingOptions};
use t3lab::solver::{read_checkpoint, solve_equilibrium, write_checkpoint, SolverState};
use t3lab::{compatible3, is_t3, Error, Grid3, SymMat, SymMat3, WellSystem};

use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::manifest::Manifest;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Simulate,
    Scaling,
    /// Diagnostics on a solver checkpoint; overrides `diagnose.checkpoint`.
    Diagnose { checkpoint: Option<PathBuf> },
    Algebra,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Scaling => "scaling",
            Command::Diagnose { .. } => "diagnose",
            Command::Algebra => "algebra",
        }
    }
}

/// Runs `cmd` and writes its artifacts and `manifest.toml` into `out`.
///
/// A solver that stops at `max_iter` still writes its partial artifacts and a
/// manifest with status `not_converged` before returning the error.
pub fn run(cmd: &Command, cfg: &ExperimentConfig, out: &Path) -> Result<Manifest, RunError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|source| RunError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let mut m = Manifest::new(cmd.name(), cfg);
    let res = match cmd {
        Command::Simulate => simulate(cfg, out, &mut m),
        Command::Scaling => scaling(cfg, out, &mut m),
        Command::Diagnose { checkpoint } => diagnose(cfg, checkpoint.as_deref(), out, &mut m),
        Command::Algebra => algebra(cfg, out, &mut m),
    };
    match res {
        Ok(()) => {
            m.write(out)?;
            Ok(m)
        }
        Err(e) => {
            m.run.status = match e {
                RunError::NotConverged { .. } => "not_converged".into(),
                _ => "failed".into(),
            };
            m.note("error", e.to_string());
            m.write(out)?;
            Err(e)
        }
    }
}

fn write_state(state: &SolverState, cfg: &ExperimentConfig, out: &Path, m: &mut Manifest) -> Result<(), RunError> {
    let ordering = cfg.ordering();
    let chi = state.chi_in(ordering);
    let mut names: Vec<String> = (1..=3).map(|a| format!("chi_{a}")).collect();
    let mut fields: Vec<&[f64]> = chi.iter().map(|c| c.as_slice()).collect();
    if cfg.simulate.write_strain {
        names.extend(COMPONENT_NAMES.iter().map(|c| format!("e_{c}")));
        fields.extend(state.e.comps.iter().map(|c| c.as_slice()));
    }
    let pairs: Vec<(&str, &[f64])> = names.iter().map(String::as_str).zip(fields).collect();
    let title = format!("t3lab simulate config {}", &m.run.config_sha256[..16]);
    write_vtk(out.join("fields.vtk"), &state.grid, &title, &pairs)?;
    m.add("fields.vtk", "vtk", names);

    write_checkpoint(state, out.join("state.ckpt"))?;
    m.add("state.ckpt", "checkpoint", Vec::<String>::new());

    let header = ["iteration", "increment", "free_energy", "kT"];
    let mut w = csv::Writer::from_path(out.join("history.csv"))?;
    w.write_record(header)?;
    for (i, r) in state.history.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            format!("{:e}", r.increment),
            format!("{:e}", r.free_energy),
            format!("{:e}", r.kt),
        ])?;
    }
    w.flush().map_err(|source| RunError::Io {
        path: out.join("history.csv"),
        source,
    })?;
    m.add("history.csv", "csv", header);
    Ok(())
}

fn energy_columns() -> Vec<&'static str> {
    let mut h = ENERGY_HEADER.to_vec();
    h.insert(11, "eps");
    h
}

fn simulate(cfg: &ExperimentConfig, out: &Path, m: &mut Manifest) -> Result<(), RunError> {
    let ws = cfg.well_system()?;
    let c = cfg.hooke()?;
    let scfg = cfg.solver_config()?;
    let (state, converged) = match solve_equilibrium(&scfg, &ws, &c) {
        Ok((state, _)) => (state, true),
        Err(Error::NonConvergence { state, .. }) => (*state, false),
        Err(e) => return Err(e.into()),
    };
    write_state(&state, cfg, out, m)?;
    let report = total_energy(&state.chi.sharpen(), &ws, &scfg.ebar, scfg.report_eps)?;
    write_energy_csv(out.join("energy.csv"), std::slice::from_ref(&report))?;
    m.add("energy.csv", "csv", energy_columns());

    m.note("iterations", state.iterations as i64);
    m.note("converged", converged);
    m.note("last_increment", state.history.last().map_or(f64::NAN, |r| r.increment));
    m.note("equilibrium_residual", state.equilibrium_residual);
    m.note("E_el", report.e_el);
    m.note("E_surf", report.e_surf);
    m.note("E_total", report.e_total);
    let fr = state.chi.sharpen().volume_fractions();
    m.note(
        "volume_fractions",
        (0..3).map(|a| fr[cfg.ordering().to_canonical(a)]).collect::<Vec<_>>(),
    );
    if !converged {
        return Err(RunError::NotConverged {
            iterations: state.iterations,
            out: out.to_path_buf(),
        });
    }
    Ok(())
}

fn bounds(cfg: &ExperimentConfig) -> BoundParams {
    let s = &cfg.scaling;
    BoundParams {
        nu: s.nu,
        c_nu: s.c_nu,
        c1: s.c1,
        c2: s.c2,
        ..BoundParams::default()
    }
}

fn scaling(cfg: &ExperimentConfig, out: &Path, m: &mut Manifest) -> Result<(), RunError> {
    let ws = cfg.well_system()?;
    let ebar = cfg.scaling_mean_strain()?;
    let opts = ScalingOptions {
        c: cfg.scaling.c,
        j_window: cfg.scaling.j_window,
        bounds: bounds(cfg),
    };
    let rows = optimize_scaling(&ws, &ebar, &cfg.scaling.eps, &opts)?;
    write_scaling_csv(out.join("scaling.csv"), &rows)?;
    m.add("scaling.csv", "csv", SCALING_HEADER);
    let fit = fit_scaling(&rows);
    let lambda = stage_fraction(&ws)?.lambda;
    m.note("lambda", lambda);
    m.note("slope", fit.slope);
    m.note("intercept", fit.intercept);
    m.note("r_squared", fit.r_squared);
    m.note("slope_target", -lambda.ln().abs().sqrt());

    if cfg.scaling.grid_n > 0 {
        let grid = Grid3::new(cfg.scaling.grid_n, 1.0)?;
        let mut grid_rows = Vec::new();
        let mut skipped = Vec::new();
        for r in &rows {
            match grid_scaling_row(&ws, &ebar, r.eps, r.j, &grid, &opts.bounds) {
                Ok(g) => grid_rows.push(g),
                Err(Error::Unresolvable(_)) => skipped.push(r.eps),
                Err(e) => return Err(e.into()),
            }
        }
        write_scaling_csv(out.join("scaling_grid.csv"), &grid_rows)?;
        m.add("scaling_grid.csv", "csv", SCALING_HEADER);
        m.note("grid_rows", grid_rows.len() as i64);
        m.note("grid_unresolvable_eps", skipped);
    }
    Ok(())
}

fn write_lemma(report: &LemmaReport, file: &str, out: &Path, m: &mut Manifest) -> Result<(), RunError> {
    report.write_csv(out.join(file))?;
    m.add(file, "csv", ["lemma", "params", "set", "lhs", "rhs_shape", "ratio", "fitted_constant"]);
    let key = &report.lemma;
    m.note(&format!("{key}_constant"), report.stability.constant);
    m.note(&format!("{key}_spread"), report.stability.spread);
    m.note(&format!("{key}_stable"), report.stability.stable);
    Ok(())
}

fn diagnose(cfg: &ExperimentConfig, checkpoint: Option<&Path>, out: &Path, m: &mut Manifest) -> Result<(), RunError> {
    let ws = cfg.well_system()?;
    let d = &cfg.diagnose;
    let path = checkpoint
        .map(Path::to_path_buf)
        .or_else(|| d.checkpoint.clone())
        .ok_or(RunError::MissingCheckpoint)?;
    let state = read_checkpoint(&path)?;
    m.note("checkpoint", path.display().to_string());
    let grid = state.grid;
    let sharp = state.chi.sharpen();

    let mode = dominant_mode(&state.chi);
    m.note("dominant_phase", (cfg.ordering().from_canonical(mode.phase) + 1) as i64);
    m.note("dominant_k", mode.k.to_vec());
    m.note("nearest_twin", mode.nearest_twin.to_vec());
    m.note("twin_angle_deg", mode.angle_deg);
    m.note("mu0", twin_mu0());

    let sharp_check = determinedness_check(&sharp, &ws, &d.steps)?;
    let relaxed_check = determinedness_check(&state.chi, &ws, &d.steps)?;
    m.note("determinedness_sharp_max", sharp_check.max_violation);
    m.note("determinedness_relaxed_max", relaxed_check.max_violation);
    m.note("determinedness_relaxed_rms", relaxed_check.rms_violation);

    let chi_tilde = centered_strain(&sharp, &ws);
    write_lemma(&decomposition_harness(&chi_tilde, d.eps, &d.mu, &d.mu1)?, "lemma_six_wave.csv", out, m)?;
    let periods: Vec<i64> = [1, 2, 4, 8].into_iter().filter(|p| 4 * p <= grid.n as i64).collect();
    if !periods.is_empty() && grid.n >= 8 {
        write_lemma(&high_frequency_harness(&grid, &ws, &periods)?, "lemma_high_frequency.csv", out, m)?;
    }
    if d.random_fields >= 2 {
        let fields: Vec<_> = random_phase_fields(&grid, d.random_fields, cfg.seed)
            .iter()
            .map(|chi| centered_strain(chi, &ws))
            .collect();
        write_lemma(&elastic_lower_bound_harness(&fields)?, "lemma_elastic_bound.csv", out, m)?;
    }

    // shell energies of each diagonal component in the cones of its twin set
    let mu = d.mu[0];
    let mu1 = d.mu1.iter().copied().fold(0.0, f64::max);
    let shells = shell_schedule(mu1, d.shell_ratio)?;
    let header = ["component", "b_x", "b_y", "b_z", "mu", "mu_lo", "mu_hi", "energy"];
    let mut w = csv::Writer::from_path(out.join("shells.csv"))?;
    w.write_record(header)?;
    for (i, dirs) in TWIN_SETS.iter().enumerate() {
        let comp = chi_tilde.component(i);
        for b in dirs {
            for &(lo, hi) in &shells {
                let e = shell_energy(&comp, b, mu, lo, hi)?;
                let mut rec = vec![COMPONENT_NAMES[i].to_string()];
                rec.extend(b.iter().map(|x| format!("{x:e}")));
                rec.extend([mu, lo, hi, e].iter().map(|x| format!("{x:e}")));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush().map_err(|source| RunError::Io {
        path: out.join("shells.csv"),
        source,
    })?;
    m.add("shells.csv", "csv", header);
    Ok(())
}

fn fmt_mat(a: &SymMat3) -> String {
    let c = a.components();
    format!(
        "[[{:.6}, {:.6}, {:.6}], [{:.6}, {:.6}, {:.6}], [{:.6}, {:.6}, {:.6}]]",
        c[0], c[5], c[4], c[5], c[1], c[3], c[4], c[3], c[2]
    )
}

fn fmt_vec(v: &[f64; 3]) -> String {
    format!("({:.6}, {:.6}, {:.6})", v[0], v[1], v[2])
}

fn algebra_report(ws: &WellSystem, cfg: &ExperimentConfig, m: &mut Manifest) -> Result<String, RunError> {
    let ord = cfg.ordering();
    let mut s = String::new();
    let res = ws.rank_one_residuals();
    let stage = stage_fraction(ws)?;
    let t3 = is_t3(&ws.wells.map(SymMat::from))?;
    let [e1, e2, e3] = ws.eta;
    writeln!(s, "eta = ({e1}, {e2}, {e3})").unwrap();
    writeln!(s, "kappa = {}", ws.kappa).unwrap();
    writeln!(s, "ordering = {:?}", cfg.wells.ordering).unwrap();
    writeln!(s, "\n[wells]").unwrap();
    for a in 0..3 {
        let k = ord.to_canonical(a);
        writeln!(s, "e{} = {}", a + 1, fmt_mat(&ws.wells[k])).unwrap();
        writeln!(s, "J{} = {}", a + 1, fmt_mat(&ws.aux[k])).unwrap();
    }
    writeln!(s, "barycenter = {}", fmt_mat(&ws.barycenter())).unwrap();

    writeln!(s, "\n[rank_one_residuals]").unwrap();
    writeln!(s, "J_l - J_i = {:?}", res.aux_pairs).unwrap();
    writeln!(s, "e_i - J_i = {:?}", res.well_aux).unwrap();
    writeln!(s, "J_j - e_i = {:?}", res.aux_well).unwrap();
    writeln!(s, "max = {:e}", res.max()).unwrap();

    writeln!(s, "\n[compatibility]").unwrap();
    for a in 0..3 {
        for b in a + 1..3 {
            let (i, j) = (ord.to_canonical(a), ord.to_canonical(b));
            let verdict = |x: &SymMat3, y: &SymMat3| match compatible3(x, y) {
                Some(c) => {
                    let (u, v) = c.directions();
                    format!("compatible, normals {} {}", fmt_vec(&u), fmt_vec(&v))
                }
                None => "incompatible".into(),
            };
            writeln!(s, "e{} ~ e{}: {}", a + 1, b + 1, verdict(&ws.wells[i], &ws.wells[j])).unwrap();
            writeln!(s, "J{} ~ J{}: {}", a + 1, b + 1, verdict(&ws.aux[i], &ws.aux[j])).unwrap();
        }
    }

    writeln!(s, "\n[t3]").unwrap();
    match &t3 {
        Some(c) => {
            writeln!(s, "structure = true").unwrap();
            writeln!(s, "lambdas = {:?}", c.lambdas).unwrap();
            for (k, cert) in c.certs.iter().enumerate() {
                let (u, v) = cert.directions();
                writeln!(
                    s,
                    "aux{} = {}, normals {} {}, residual {:e}",
                    k + 1,
                    fmt_mat(&c.aux[k].as_3d()),
                    fmt_vec(&u),
                    fmt_vec(&v),
                    cert.residual
                )
                .unwrap();
            }
        }
        None => writeln!(s, "structure = false").unwrap(),
    }
    writeln!(s, "stage_fraction = {} ({:?}, residual {:e})", stage.lambda, stage.closed_form, stage.residual).unwrap();

    writeln!(s, "\n[determinedness]").unwrap();
    let diffs = difference_values(ws, None)?;
    writeln!(s, "differences = {:?}", diffs.base()).unwrap();
    writeln!(s, "distinct = {:?}, exceptional = {}", diffs.distinct, diffs.exceptional).unwrap();
    for i in 0..3 {
        for j in (0..3).filter(|&j| j != i) {
            let p = determinedness_polynomial(ws, i, j)?;
            writeln!(s, "P_{}{}: degree {}, newton {:?}", i + 1, j + 1, p.degree(), p.newton).unwrap();
        }
    }
    writeln!(s, "mu0 = {}", twin_mu0()).unwrap();

    m.note("kappa", ws.kappa);
    m.note("rank_one_max_residual", res.max());
    m.note("t3", t3.is_some());
    m.note("stage_fraction", stage.lambda);
    m.note("mu0", twin_mu0());
    Ok(s)
}

fn algebra(cfg: &ExperimentConfig, out: &Path, m: &mut Manifest) -> Result<(), RunError> {
    let ws = cfg.well_system()?;
    let text = algebra_report(&ws, cfg, m)?;
    let path = out.join("algebra.txt");
    std::fs::write(&path, text).map_err(|source| RunError::Io { path, source })?;
    m.add("algebra.txt", "report", Vec::<String>::new());
    Ok(())
}
