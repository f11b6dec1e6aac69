//! Experiment configuration: a TOML file with one section per subcommand.
//!
//! Every key is optional; missing keys take the reference parameters. Unknown keys
//! are rejected so that typos do not silently fall back to a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use t3lab::algebra::WellOrdering;
use t3lab::solver::Anneal;
use t3lab::{wells_from_etas, IsotropicHooke, SolverConfig, SymMat3, WellSystem};

use crate::error::ConfigError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub wells: WellsSection,
    pub elastic: ElasticSection,
    pub simulate: SimulateSection,
    pub scaling: ScalingSection,
    pub diagnose: DiagnoseSection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    #[default]
    Canonical,
    Reversed,
}

impl From<Ordering> for WellOrdering {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Canonical => WellOrdering::Canonical,
            Ordering::Reversed => WellOrdering::Reversed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellsSection {
    pub eta: [f64; 3],
    /// Label convention for keywords and output arrays.
    pub ordering: Ordering,
}

impl Default for WellsSection {
    fn default() -> Self {
        Self {
            eta: [0.03, 0.01, 0.06],
            ordering: Ordering::Canonical,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElasticSection {
    pub lambda: f64,
    pub mu: f64,
}

impl Default for ElasticSection {
    fn default() -> Self {
        Self {
            lambda: 7.0 / 3.0,
            mu: 1.0,
        }
    }
}

/// Mean strain: a keyword (`J1`, `J2`, `J3`, `e1`, `e2`, `e3`, `B`), a diagonal
/// `[xx, yy, zz]`, or all six components `[xx, yy, zz, yz, xz, xy]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeanStrain {
    Keyword(String),
    Components(Vec<f64>),
}

impl Default for MeanStrain {
    fn default() -> Self {
        MeanStrain::Keyword("J1".into())
    }
}

impl MeanStrain {
    /// Resolves against `ws`; keyword indices follow `ordering`.
    pub fn resolve(&self, ws: &WellSystem, ordering: WellOrdering, field: &'static str) -> Result<SymMat3, ConfigError> {
        let bad = |reason: String| ConfigError::Range { field, reason };
        match self {
            MeanStrain::Keyword(k) => {
                let k = k.trim();
                if k.eq_ignore_ascii_case("B") {
                    return Ok(ws.barycenter());
                }
                let (kind, idx) = k.split_at(1.min(k.len()));
                let label = match idx.parse::<usize>() {
                    Ok(i @ 1..=3) => ordering.to_canonical(i - 1),
                    _ => return Err(bad(format!("unknown keyword {k:?}; use J1..J3, e1..e3 or B"))),
                };
                match kind {
                    "J" | "j" => Ok(ws.aux[label]),
                    "e" | "E" => Ok(ws.wells[label]),
                    _ => Err(bad(format!("unknown keyword {k:?}; use J1..J3, e1..e3 or B"))),
                }
            }
            MeanStrain::Components(c) => {
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(bad("components must be finite".into()));
                }
                match c.len() {
                    3 => Ok(SymMat3::diag(c[0], c[1], c[2])),
                    6 => Ok(SymMat3::from_components([c[0], c[1], c[2], c[3], c[4], c[5]])),
                    n => Err(bad(format!("expected 3 or 6 components, got {n}"))),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSection {
    pub every: usize,
    pub factor: f64,
    pub floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub n: usize,
    pub l: f64,
    pub kt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub ebar: MeanStrain,
    pub perturbation: f64,
    pub report_eps: f64,
    /// Also export the six strain components to the VTK file.
    pub write_strain: bool,
    pub anneal: Option<AnnealSection>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            n: d.n,
            l: d.l,
            kt: d.kt,
            tol: d.tol,
            max_iter: d.max_iter,
            ebar: MeanStrain::default(),
            perturbation: d.perturbation,
            report_eps: d.report_eps,
            write_strain: false,
            anneal: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub ebar: MeanStrain,
    pub eps: Vec<f64>,
    /// Prefactor of the analytic energy.
    pub c: f64,
    pub j_window: usize,
    /// Grid size for measured rows; 0 skips the grid sweep.
    pub grid_n: usize,
    pub nu: f64,
    pub c_nu: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            ebar: MeanStrain::default(),
            eps: (2..=12).map(|k| 10f64.powi(-k)).collect(),
            c: 1.0,
            j_window: 2,
            grid_n: 0,
            nu: 0.1,
            c_nu: 1.0,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseSection {
    pub checkpoint: Option<PathBuf>,
    pub eps: f64,
    pub mu: Vec<f64>,
    pub mu1: Vec<f64>,
    /// Step sizes for the finite-difference relation.
    pub steps: Vec<usize>,
    /// Ratio of the geometric shell schedule.
    pub shell_ratio: f64,
    /// Random fields for the elastic lower-bound harness; 0 skips it.
    pub random_fields: usize,
}

impl Default for DiagnoseSection {
    fn default() -> Self {
        Self {
            checkpoint: None,
            eps: 1e-3,
            mu: vec![0.05, 0.1, 0.2],
            mu1: vec![2.0, 4.0, 8.0, 16.0],
            steps: vec![1, 2, 3, 4],
            shell_ratio: 0.5,
            random_fields: 20,
        }
    }
}

fn range(field: &'static str, ok: bool, reason: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Range {
            field,
            reason: reason(),
        })
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Normalised TOML text; its hash identifies the run.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// Checks every numeric field before any computation starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.well_system()?;
        self.hooke()?;
        let s = &self.simulate;
        range("simulate.n", s.n >= 2, || format!("need N >= 2, got {}", s.n))?;
        range("simulate.l", s.l > 0.0 && s.l.is_finite(), || format!("need L > 0, got {}", s.l))?;
        range("simulate.kt", s.kt > 0.0 && s.kt.is_finite(), || format!("need kT > 0, got {}", s.kt))?;
        range("simulate.tol", s.tol > 0.0, || format!("need tol > 0, got {}", s.tol))?;
        range("simulate.max_iter", s.max_iter >= 1, || "need at least one iteration".into())?;
        range("simulate.perturbation", s.perturbation >= 0.0 && s.perturbation.is_finite(), || {
            format!("need a finite amplitude >= 0, got {}", s.perturbation)
        })?;
        range("simulate.report_eps", s.report_eps > 0.0, || format!("need eps > 0, got {}", s.report_eps))?;
        if let Some(a) = &s.anneal {
            range("simulate.anneal.every", a.every >= 1, || "need every >= 1".into())?;
            range("simulate.anneal.factor", a.factor > 0.0 && a.factor < 1.0, || {
                format!("need factor in (0, 1), got {}", a.factor)
            })?;
            range("simulate.anneal.floor", a.floor > 0.0, || format!("need floor > 0, got {}", a.floor))?;
        }
        self.mean_strain()?;

        self.scaling_mean_strain()?;
        let sc = &self.scaling;
        range("scaling.eps", !sc.eps.is_empty(), || "need at least one eps".into())?;
        for e in &sc.eps {
            range("scaling.eps", *e > 0.0 && *e < 0.25, || format!("need every eps in (0, 1/4), got {e}"))?;
        }
        range("scaling.c", sc.c > 0.0 && sc.c.is_finite(), || format!("need c > 0, got {}", sc.c))?;
        range("scaling.grid_n", sc.grid_n != 1, || "need 0 or N >= 2, got 1".into())?;
        range("scaling.nu", sc.nu > 0.0 && sc.nu < 0.5, || format!("need nu in (0, 1/2), got {}", sc.nu))?;
        for (name, v) in [("scaling.c_nu", sc.c_nu), ("scaling.c1", sc.c1), ("scaling.c2", sc.c2)] {
            range(name, v > 0.0 && v.is_finite(), || format!("need a positive constant, got {v}"))?;
        }

        let d = &self.diagnose;
        range("diagnose.eps", d.eps > 0.0, || format!("need eps > 0, got {}", d.eps))?;
        range("diagnose.mu", !d.mu.is_empty(), || "need at least one aperture".into())?;
        let m0 = t3lab::diagnostics::twin_mu0();
        for m in &d.mu {
            range("diagnose.mu", *m > 0.0 && *m < m0, || format!("need every mu in (0, {m0}), got {m}"))?;
        }
        range("diagnose.mu1", !d.mu1.is_empty(), || "need at least one radius".into())?;
        for m in &d.mu1 {
            range("diagnose.mu1", *m >= 0.5 && m.is_finite(), || format!("need every mu1 >= 1/2, got {m}"))?;
        }
        range("diagnose.steps", d.steps.iter().all(|h| *h >= 1), || "steps must be >= 1".into())?;
        range("diagnose.shell_ratio", d.shell_ratio > 0.0 && d.shell_ratio < 1.0, || {
            format!("need a ratio in (0, 1), got {}", d.shell_ratio)
        })?;
        Ok(())
    }

    pub fn ordering(&self) -> WellOrdering {
        self.wells.ordering.into()
    }

    pub fn well_system(&self) -> Result<WellSystem, ConfigError> {
        let [e1, e2, e3] = self.wells.eta;
        wells_from_etas(e1, e2, e3).map_err(|e| ConfigError::Range {
            field: "wells.eta",
            reason: e.to_string(),
        })
    }

    pub fn hooke(&self) -> Result<IsotropicHooke, ConfigError> {
        IsotropicHooke::new(self.elastic.lambda, self.elastic.mu).map_err(|e| ConfigError::Range {
            field: "elastic",
            reason: e.to_string(),
        })
    }

    pub fn mean_strain(&self) -> Result<SymMat3, ConfigError> {
        self.simulate.ebar.resolve(&self.well_system()?, self.ordering(), "simulate.ebar")
    }

    pub fn scaling_mean_strain(&self) -> Result<SymMat3, ConfigError> {
        self.scaling.ebar.resolve(&self.well_system()?, self.ordering(), "scaling.ebar")
    }

    pub fn solver_config(&self) -> Result<SolverConfig, ConfigError> {
        let s = &self.simulate;
        Ok(SolverConfig {
            n: s.n,
            l: s.l,
            kt: s.kt,
            tol: s.tol,
            max_iter: s.max_iter,
            ebar: self.mean_strain()?,
            seed: self.seed,
            ordering: self.ordering(),
            perturbation: s.perturbation,
            report_eps: s.report_eps,
            anneal: s.anneal.as_ref().map(|a| Anneal {
                every: a.every,
                factor: a.factor,
                floor: a.floor,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.wells.eta, [0.03, 0.01, 0.06]);
        assert_eq!(cfg.hooke().unwrap(), IsotropicHooke::reference());
        assert_eq!(cfg.simulate.kt, 1e-4);
        assert_eq!(cfg.simulate.l, 1.0);
    }

    #[test]
    fn normalised_text_round_trips() {
        let cfg = ExperimentConfig::from_toml("seed = 3\n[simulate]\nebar = [0.04, 0.03, 0.03]\n").unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn keywords_follow_the_ordering() {
        let ws = WellSystem::reference();
        let at = |m: MeanStrain, o| m.resolve(&ws, o, "ebar");
        let j1 = || MeanStrain::Keyword("J1".into());
        assert_eq!(at(j1(), WellOrdering::Canonical).unwrap(), ws.aux[0]);
        assert!((ws.aux[0] - SymMat3::diag(0.04, 0.03, 0.03)).max_abs() < 1e-15);
        assert_eq!(at(j1(), WellOrdering::Reversed).unwrap(), ws.aux[2]);
        assert_eq!(at(MeanStrain::Keyword("e3".into()), WellOrdering::Canonical).unwrap(), ws.wells[2]);
        assert!(at(MeanStrain::Keyword("J4".into()), WellOrdering::Canonical).is_err());
        assert!(at(MeanStrain::Components(vec![0.0; 4]), WellOrdering::Canonical).is_err());
    }
}
