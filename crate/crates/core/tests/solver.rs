use t3lab::solver::{read_checkpoint, solve_equilibrium, write_checkpoint};
use t3lab::{Error, IsotropicHooke, SolverConfig, WellOrdering, WellSystem};

fn small(n: usize) -> SolverConfig {
    SolverConfig {
        n,
        ..SolverConfig::default()
    }
}

#[test]
fn free_energy_never_increases_after_the_first_step() {
    let ws = WellSystem::reference();
    let (state, _) = solve_equilibrium(&small(16), &ws, &IsotropicHooke::reference()).unwrap();
    assert!(state.converged);
    let fe: Vec<f64> = state.history.iter().map(|h| h.free_energy).collect();
    for w in fe.windows(2).skip(1) {
        assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn mean_strain_is_imposed_exactly() {
    let ws = WellSystem::reference();
    let cfg = SolverConfig {
        ebar: ws.barycenter(),
        ..small(16)
    };
    let (state, report) = solve_equilibrium(&cfg, &ws, &IsotropicHooke::reference()).unwrap();
    assert!((state.e.mean() - cfg.ebar).max_abs() <= 1e-14);
    assert_eq!(report.ebar, cfg.ebar);
    assert!(report.e_total >= report.e_el);
}

#[test]
fn identical_seeds_give_identical_states() {
    let ws = WellSystem::reference();
    let c = IsotropicHooke::reference();
    let (a, ra) = solve_equilibrium(&small(16), &ws, &c).unwrap();
    let (b, rb) = solve_equilibrium(&small(16), &ws, &c).unwrap();
    assert_eq!(a.e, b.e);
    assert_eq!(ra, rb);
}

#[test]
fn non_convergence_returns_the_last_state() {
    let ws = WellSystem::reference();
    let cfg = SolverConfig {
        max_iter: 2,
        ..small(8)
    };
    match solve_equilibrium(&cfg, &ws, &IsotropicHooke::reference()) {
        Err(Error::NonConvergence { iterations, state, .. }) => {
            assert_eq!(iterations, 2);
            assert!(!state.converged);
            assert_eq!(state.history.len(), 2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn invalid_configuration_is_rejected_before_compute() {
    let ws = WellSystem::reference();
    let c = IsotropicHooke::reference();
    for cfg in [
        SolverConfig { kt: 0.0, ..small(8) },
        SolverConfig { tol: -1.0, ..small(8) },
        SolverConfig { n: 1, ..small(8) },
    ] {
        assert!(matches!(
            solve_equilibrium(&cfg, &ws, &c),
            Err(Error::InvalidParameter { .. })
        ));
    }
}

#[test]
fn checkpoint_round_trip() {
    let ws = WellSystem::reference();
    let (state, _) = solve_equilibrium(&small(8), &ws, &IsotropicHooke::reference()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.ckp");
    write_checkpoint(&state, &path).unwrap();
    let back = read_checkpoint(&path).unwrap();
    assert_eq!(back.e, state.e);
    assert_eq!(back.tau, state.tau);
    assert_eq!(back.chi.chi, state.chi.chi);
    assert_eq!(back.history, state.history);
    assert_eq!(back.iterations, state.iterations);
    assert_eq!(back.ebar, state.ebar);

    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_checkpoint(&path), Err(Error::Checkpoint(_))));
}

#[test]
fn reversed_ordering_relabels_fractions() {
    let ws = WellSystem::reference();
    let (state, _) = solve_equilibrium(&small(8), &ws, &IsotropicHooke::reference()).unwrap();
    let p3 = state.chi_in(WellOrdering::Reversed);
    assert_eq!(p3[0], &state.chi.chi[2]);
    assert_eq!(p3[1], &state.chi.chi[1]);
    assert_eq!(p3[2], &state.chi.chi[0]);
}
