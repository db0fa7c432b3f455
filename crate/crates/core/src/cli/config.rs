//! JSON run configuration and its resolution against built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::numerics::QuadConfig;
use crate::potentials::Potential;

pub const DEFAULT_ALPHA: f64 = 1.5;
pub const DEFAULT_POINCARE_ALPHA: f64 = 1.5;
pub const DEFAULT_COUNTEREXAMPLE_ALPHA: f64 = 0.5;
pub const DEFAULT_N: usize = 512;
pub const DEFAULT_M: usize = 6;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUTPUT_DIR: &str = "fracspec_output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Gap,
    Poincare,
    Counterexample,
    Simulate,
    Phi,
    All,
}

/// Potential as written in the config: either a bare kind name or an
/// object with a `kind` tag and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialConfig {
    Zero {
        offset: f64,
    },
    PowerWell {
        kappa: f64,
        p: f64,
        offset: f64,
    },
    InverseBoundaryWell {
        beta: f64,
    },
    Tabulated {
        path: PathBuf,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TaggedPotential {
    Zero {
        #[serde(default)]
        offset: f64,
    },
    PowerWell {
        kappa: f64,
        p: f64,
        #[serde(default)]
        offset: f64,
    },
    InverseBoundaryWell {
        beta: f64,
    },
    Tabulated {
        path: PathBuf,
    },
}

impl<'de> Deserialize<'de> for PotentialConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mut value = serde_json::Value::deserialize(d)?;
        if let serde_json::Value::String(kind) = &value {
            value = serde_json::json!({ "kind": kind });
        }
        let tagged = TaggedPotential::deserialize(value).map_err(serde::de::Error::custom)?;
        Ok(match tagged {
            TaggedPotential::Zero { offset } => PotentialConfig::Zero { offset },
            TaggedPotential::PowerWell { kappa, p, offset } => PotentialConfig::PowerWell { kappa, p, offset },
            TaggedPotential::InverseBoundaryWell { beta } => PotentialConfig::InverseBoundaryWell { beta },
            TaggedPotential::Tabulated { path } => PotentialConfig::Tabulated { path },
        })
    }
}

impl PotentialConfig {
    pub fn build(&self, alpha: f64, a: f64, b: f64) -> crate::Result<Potential<f64>> {
        match self {
            PotentialConfig::Zero { offset } => Potential::constant(a, b, *offset),
            PotentialConfig::PowerWell { kappa, p, offset } => Potential::power_well(*kappa, *p, a, b, *offset),
            PotentialConfig::InverseBoundaryWell { beta } => Potential::inverse_boundary_well(*beta, alpha, a, b),
            PotentialConfig::Tabulated { path } => Potential::from_csv(path, a, b),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOverrides {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_panels: Option<usize>,
    pub grading_exponent: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McOverrides {
    pub t: Option<f64>,
    pub n_steps: Option<usize>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub n_points: Option<usize>,
    pub laplace_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareOverrides {
    pub alpha: Option<f64>,
    pub n_functions: Option<usize>,
    pub max_knots: Option<usize>,
    pub root_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleOverrides {
    pub alpha: Option<f64>,
    pub n_list: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiOverrides {
    pub s: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub n_points: Option<usize>,
}

/// The config file as written.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: Option<f64>,
    pub interval: Option<[f64; 2]>,
    pub potential: Option<PotentialConfig>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub quadrature: Option<QuadOverrides>,
    pub mc: Option<McOverrides>,
    pub poincare: Option<PoincareOverrides>,
    pub counterexample: Option<CounterexampleOverrides>,
    /// Shorthand for `counterexample.n_list`.
    pub n_list: Option<Vec<usize>>,
    pub phi: Option<PhiOverrides>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSettings {
    pub t: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub n_points: usize,
    pub laplace_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareSettings {
    pub alpha: f64,
    pub n_functions: usize,
    pub max_knots: usize,
    pub root_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleSettings {
    pub alpha: f64,
    pub n_list: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiSettings {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub n_points: usize,
}

/// Fully resolved settings; echoed into the run summary. The output
/// directory is left out so that runs into different directories compare
/// equal byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub command: Command,
    pub alpha: f64,
    pub interval: [f64; 2],
    pub potential: PotentialConfig,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub quadrature: QuadConfig<f64>,
    pub mc: McSettings,
    pub poincare: PoincareSettings,
    pub counterexample: CounterexampleSettings,
    pub phi: PhiSettings,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

/// Reads and parses a config file. Errors name the offending key.
pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        if key == "." {
            format!("invalid config: {}", e.inner())
        } else {
            format!("invalid config key `{key}`: {}", e.inner())
        }
    })
}

fn in_open(x: f64, lo: f64, hi: f64) -> bool {
    x > lo && x < hi
}

impl RunConfig {
    /// Applies defaults and validates everything that does not need a
    /// numerical computation. `base_dir` anchors relative paths in the file.
    pub fn resolve(&self, base_dir: &Path, seed: Option<u64>, output_dir: Option<&Path>) -> Result<Resolved, String> {
        let cmd = self.command;
        let alpha = self.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(format!("invalid config key `alpha`: must lie in (0, 2], got {alpha}"));
        }
        let [a, b] = self.interval.unwrap_or([-1.0, 1.0]);
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(format!("invalid config key `interval`: need finite a < b, got [{a}, {b}]"));
        }
        let n = self.n.unwrap_or(DEFAULT_N);
        if n < 16 {
            return Err(format!("invalid config key `N`: must be at least 16, got {n}"));
        }
        let m = self.m.unwrap_or(DEFAULT_M.min(n));
        if m < 2 || m > n {
            return Err(format!("invalid config key `m`: must lie in [2, N], got {m}"));
        }
        let mut potential = self.potential.clone().unwrap_or(PotentialConfig::Zero { offset: 0.0 });
        if let PotentialConfig::Tabulated { path } = &mut potential {
            if path.is_relative() {
                *path = base_dir.join(&*path);
            }
        }

        let q = self.quadrature.clone().unwrap_or_default();
        let defaults = QuadConfig::<f64>::double();
        let quadrature = QuadConfig {
            abs_tol: q.abs_tol.unwrap_or(defaults.abs_tol),
            rel_tol: q.rel_tol.unwrap_or(defaults.rel_tol),
            max_panels: q.max_panels.unwrap_or(defaults.max_panels),
            grading_exponent: q.grading_exponent.unwrap_or(defaults.grading_exponent),
        };
        quadrature.validate().map_err(|e| format!("invalid config key `quadrature`: {e}"))?;

        let mc_in = self.mc.clone().unwrap_or_default();
        let mc = McSettings {
            t: mc_in.t.unwrap_or(0.5),
            n_steps: mc_in.n_steps.unwrap_or(128),
            n_paths: mc_in.n_paths.unwrap_or(100_000),
            seed: seed.or(mc_in.seed).unwrap_or(DEFAULT_SEED),
            n_points: mc_in.n_points.unwrap_or(21),
            laplace_samples: mc_in.laplace_samples.unwrap_or(1_000_000),
        };
        if !(mc.t > 0.0 && mc.t.is_finite()) {
            return Err(format!("invalid config key `mc.t`: must be positive, got {}", mc.t));
        }
        if mc.n_steps == 0 {
            return Err("invalid config key `mc.n_steps`: must be positive".into());
        }
        if mc.n_paths < 2 {
            return Err("invalid config key `mc.n_paths`: need at least 2 paths".into());
        }
        if mc.n_points < 3 {
            return Err("invalid config key `mc.n_points`: need at least 3 points".into());
        }
        if mc.laplace_samples < 2 {
            return Err("invalid config key `mc.laplace_samples`: need at least 2 samples".into());
        }
        if matches!(cmd, Command::Simulate | Command::All) && !(alpha < 2.0) {
            return Err("invalid config key `alpha`: simulation needs alpha in (0, 2)".into());
        }

        let p_in = self.poincare.clone().unwrap_or_default();
        let poincare_alpha = match (p_in.alpha, cmd) {
            (Some(x), _) => x,
            (None, Command::Poincare) => alpha,
            (None, _) => DEFAULT_POINCARE_ALPHA,
        };
        let poincare = PoincareSettings {
            alpha: poincare_alpha,
            n_functions: p_in.n_functions.unwrap_or(100),
            max_knots: p_in.max_knots.unwrap_or(6),
            root_tol: p_in.root_tol.unwrap_or(crate::poincare::DEFAULT_ROOT_TOL),
        };
        if matches!(cmd, Command::Poincare | Command::All) {
            if !in_open(poincare.alpha, 1.0, 2.0) {
                return Err(format!(
                    "the fractional Poincaré inequality assumes alpha in (1, 2); got alpha = {}",
                    poincare.alpha
                ));
            }
            if poincare.n_functions == 0 || poincare.max_knots == 0 {
                return Err("invalid config key `poincare`: n_functions and max_knots must be positive".into());
            }
            if !(poincare.root_tol > 0.0) {
                return Err("invalid config key `poincare.root_tol`: must be positive".into());
            }
        }

        let c_in = self.counterexample.clone().unwrap_or_default();
        if c_in.n_list.is_some() && self.n_list.is_some() {
            return Err("invalid config key `n_list`: given both at top level and in `counterexample`".into());
        }
        let counterexample = CounterexampleSettings {
            alpha: match (c_in.alpha, cmd) {
                (Some(x), _) => x,
                (None, Command::Counterexample) => self.alpha.unwrap_or(DEFAULT_COUNTEREXAMPLE_ALPHA),
                (None, _) => DEFAULT_COUNTEREXAMPLE_ALPHA,
            },
            n_list: c_in.n_list.or_else(|| self.n_list.clone()).unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32]),
        };
        if matches!(cmd, Command::Counterexample | Command::All) {
            if !in_open(counterexample.alpha, 0.0, 1.0) {
                return Err(format!(
                    "the counterexample family concerns alpha in (0, 1); got alpha = {}",
                    counterexample.alpha
                ));
            }
            let l = &counterexample.n_list;
            if l.len() < 2 || l.contains(&0) || l.windows(2).any(|w| w[1] <= w[0]) {
                return Err("invalid config key `n_list`: need at least two strictly increasing positive entries".into());
            }
        }

        let phi_in = self.phi.clone().unwrap_or_default();
        let phi = PhiSettings {
            s: phi_in.s.unwrap_or_else(|| vec![0.1, 0.2]),
            t: phi_in.t.unwrap_or_else(|| vec![0.3, 0.4]),
            n_points: phi_in.n_points.unwrap_or(41),
        };
        if matches!(cmd, Command::Phi | Command::All) {
            if phi.s.len() < 2 || phi.t.len() < 2 || phi.s.iter().chain(&phi.t).any(|&v| !(v > 0.0)) {
                return Err("invalid config key `phi`: s and t need two positive entries each".into());
            }
            if phi.n_points < 3 {
                return Err("invalid config key `phi.n_points`: need at least 3 points".into());
            }
        }

        let output_dir = output_dir
            .map(Path::to_path_buf)
            .or_else(|| self.output_dir.as_ref().map(|p| if p.is_relative() { base_dir.join(p) } else { p.clone() }))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

        Ok(Resolved {
            command: cmd,
            alpha,
            interval: [a, b],
            potential,
            n,
            m,
            quadrature,
            mc,
            poincare,
            counterexample,
            phi,
            output_dir,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<Resolved, String> {
        parse(text)?.resolve(Path::new("."), None, None)
    }

    #[test]
    fn defaults_fill_in() {
        let r = resolve(r#"{"command": "gap"}"#).unwrap();
        assert_eq!(r.alpha, 1.5);
        assert_eq!(r.interval, [-1.0, 1.0]);
        assert_eq!(r.n, 512);
        assert_eq!(r.potential, PotentialConfig::Zero { offset: 0.0 });
        assert_eq!(r.mc.seed, 42);
    }

    #[test]
    fn potential_forms() {
        let r = resolve(r#"{"command": "gap", "potential": "zero"}"#).unwrap();
        assert_eq!(r.potential, PotentialConfig::Zero { offset: 0.0 });
        let r = resolve(r#"{"command": "gap", "potential": {"kind": "power_well", "kappa": 5, "p": 2}}"#).unwrap();
        assert_eq!(r.potential, PotentialConfig::PowerWell { kappa: 5.0, p: 2.0, offset: 0.0 });
        let e = resolve(r#"{"command": "gap", "potential": {"kind": "power_well", "kappa": 5}}"#).unwrap_err();
        assert!(e.contains("potential") && e.contains("p"), "{e}");
    }

    #[test]
    fn errors_name_the_key() {
        let e = resolve(r#"{"command": "gap", "alhpa": 1.5}"#).unwrap_err();
        assert!(e.contains("alhpa"), "{e}");
        let e = resolve(r#"{"command": "gap", "mc": {"n_paths": "many"}}"#).unwrap_err();
        assert!(e.contains("mc.n_paths"), "{e}");
        let e = resolve(r#"{"command": "gap", "N": 4}"#).unwrap_err();
        assert!(e.contains("`N`"), "{e}");
        let e = resolve(r#"{"alpha": 1.5}"#).unwrap_err();
        assert!(e.contains("command"), "{e}");
    }

    #[test]
    fn alpha_ranges_per_command() {
        let e = resolve(r#"{"command": "poincare", "alpha": 0.9}"#).unwrap_err();
        assert!(e.contains("(1, 2)"), "{e}");
        assert!(resolve(r#"{"command": "counterexample", "alpha": 1.5}"#).is_err());
        let r = resolve(r#"{"command": "counterexample"}"#).unwrap();
        assert_eq!(r.counterexample.alpha, 0.5);
        let r = resolve(r#"{"command": "all", "alpha": 0.8}"#).unwrap();
        assert_eq!((r.poincare.alpha, r.counterexample.alpha), (1.5, 0.5));
    }

    #[test]
    fn seed_flag_wins() {
        let c = parse(r#"{"command": "simulate", "mc": {"seed": 7}}"#).unwrap();
        assert_eq!(c.resolve(Path::new("."), None, None).unwrap().mc.seed, 7);
        assert_eq!(c.resolve(Path::new("."), Some(9), None).unwrap().mc.seed, 9);
    }
}
