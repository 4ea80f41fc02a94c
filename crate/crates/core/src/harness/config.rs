//! Experiment configuration: a flat key-value file with optional per-suite
//! sections, overridden by command-line flags, then validated into a `Plan`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::swap::monte_carlo::MIN_REPLICATES;
use crate::swap::test_function::TestFunction;
use crate::wigner::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Clt,
    Wigner,
    SkFreeEnergy,
    SkGroundState,
    ErdosKac,
    LambdaAudit,
    BoundTable,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Clt,
        Suite::Wigner,
        Suite::SkFreeEnergy,
        Suite::SkGroundState,
        Suite::ErdosKac,
        Suite::LambdaAudit,
        Suite::BoundTable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Clt => "clt",
            Suite::Wigner => "wigner",
            Suite::SkFreeEnergy => "sk_free_energy",
            Suite::SkGroundState => "sk_ground_state",
            Suite::ErdosKac => "erdos_kac",
            Suite::LambdaAudit => "lambda_audit",
            Suite::BoundTable => "bound_table",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|suite| suite.as_str() == s).ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown output format {s:?} (expected csv or json)"))),
        }
    }
}

/// Raw settings; every field is optional until validation fills in suite
/// defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub dist_x: Option<String>,
    pub dist_y: Option<String>,
    /// `n` for walks and sums, `N` for matrices and spin systems.
    pub size: Option<usize>,
    pub z_re: Option<f64>,
    pub z_im: Option<f64>,
    pub beta: Option<f64>,
    pub h: Option<f64>,
    pub a: Option<f64>,
    pub epsilon: Option<f64>,
    pub g: Option<String>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub grid: Option<Vec<usize>>,
    pub threads: Option<usize>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

impl ExperimentConfig {
    /// Sets one key. Keys are case-sensitive; `N` and `n` both set the size.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "dist_x" | "distX" => self.dist_x = Some(value.to_string()),
            "dist_y" | "distY" => self.dist_y = Some(value.to_string()),
            "n" | "N" | "size" => self.size = Some(parse_value(key, value)?),
            "z_re" => self.z_re = Some(parse_value(key, value)?),
            "z_im" => self.z_im = Some(parse_value(key, value)?),
            "beta" => self.beta = Some(parse_value(key, value)?),
            "h" => self.h = Some(parse_value(key, value)?),
            "a" | "A" => self.a = Some(parse_value(key, value)?),
            "epsilon" => self.epsilon = Some(parse_value(key, value)?),
            "g" => self.g = Some(value.to_string()),
            "replicates" => self.replicates = Some(parse_value(key, value)?),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(value.parse()?),
            "grid" => {
                self.grid = Some(
                    value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_value("grid", s))
                        .collect::<Result<_>>()?,
                )
            }
            "threads" => self.threads = Some(parse_value(key, value)?),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &ExperimentConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field.clone(); })*
            };
        }
        take!(dist_x, dist_y, size, z_re, z_im, beta, h, a, epsilon, g, replicates, seed, out, format, grid, threads);
    }

    /// Parses a config file. Keys before any `[section]` header apply to every
    /// suite; keys under `[<suite>]` apply only to that suite.
    pub fn parse_file_text(text: &str, suite: Suite) -> Result<Self> {
        let mut global = ExperimentConfig::default();
        let mut specific = ExperimentConfig::default();
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", lineno + 1)))?
                    .trim();
                name.parse::<Suite>().map_err(|_| Error::Config(format!("line {}: unknown section [{name}]", lineno + 1)))?;
                section = Some(name.to_string());
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let target = match &section {
                None => &mut global,
                Some(s) if s == suite.as_str() => &mut specific,
                // still validate keys of other sections
                Some(_) => &mut ExperimentConfig::default(),
            };
            target.set(key, value).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        global.overlay(&specific);
        Ok(global)
    }

    pub fn from_file(path: &Path, suite: Suite) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse_file_text(&text, suite)
    }

    /// Fills suite defaults and checks every field the suite needs.
    pub fn validate(&self, suite: Suite) -> Result<Plan> {
        let d = SuiteDefaults::of(suite);
        let pick_dist = |v: &Option<String>, default: &str| -> Result<DistributionSpec> {
            v.as_deref().unwrap_or(default).parse().map_err(|e: Error| Error::Config(e.to_string()))
        };
        let dist_x = pick_dist(&self.dist_x, d.dist_x)?;
        let dist_y = pick_dist(&self.dist_y, d.dist_y)?;
        let g = TestFunction::by_name(self.g.as_deref().unwrap_or(d.g)).map_err(|e| Error::Config(e.to_string()))?;
        let size = self.size.unwrap_or(d.size);
        let replicates = self.replicates.unwrap_or(d.replicates);
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        let z = C64::new(self.z_re.unwrap_or(0.0), self.z_im.unwrap_or(2.0));
        let beta = self.beta.unwrap_or(1.0);
        let h = self.h.unwrap_or(0.0);
        let a = self.a.unwrap_or(1.0);
        let epsilon = self.epsilon.unwrap_or(1.0);
        let grid = self.grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec());

        fn bad<T>(msg: String) -> Result<T> {
            Err(Error::Config(msg))
        }
        for (name, v) in [("z_re", z.re), ("z_im", z.im), ("beta", beta), ("h", h), ("a", a), ("epsilon", epsilon)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if let Some(0) = self.threads {
            return bad("threads must be positive".into());
        }
        match suite {
            Suite::Clt | Suite::ErdosKac => {
                if size < 2 {
                    return bad(format!("{suite} needs n ≥ 2, got {size}"));
                }
            }
            Suite::Wigner => {
                if size < 1 {
                    return bad("wigner needs N ≥ 1".into());
                }
                if z.im == 0.0 {
                    return bad("wigner needs z_im ≠ 0".into());
                }
                if epsilon <= 0.0 {
                    return bad("epsilon must be positive".into());
                }
            }
            Suite::SkFreeEnergy | Suite::SkGroundState => {
                if !(2..=crate::sk::MAX_SPINS).contains(&size) {
                    return bad(format!("{suite} needs 2 ≤ N ≤ {}, got {size}", crate::sk::MAX_SPINS));
                }
                if beta <= 0.0 {
                    return bad("beta must be positive".into());
                }
                if suite == Suite::SkGroundState && (a < 1.0 || epsilon <= 0.0) {
                    return bad("sk_ground_state needs A ≥ 1 and epsilon > 0".into());
                }
            }
            Suite::LambdaAudit => {
                if !(2..=12).contains(&size) {
                    return bad(format!("lambda_audit needs 2 ≤ size ≤ 12, got {size}"));
                }
                if replicates == 0 {
                    return bad("lambda_audit needs at least one sample point".into());
                }
                if z.im == 0.0 {
                    return bad("lambda_audit needs z_im ≠ 0".into());
                }
            }
            Suite::BoundTable => {
                if grid.is_empty() {
                    return bad("bound_table needs a nonempty grid".into());
                }
                if grid.iter().any(|&n| n < 2) {
                    return bad("grid sizes must be at least 2".into());
                }
                if a < 1.0 || epsilon <= 0.0 || beta <= 0.0 || z.im == 0.0 {
                    return bad("bound_table needs A ≥ 1, epsilon > 0, beta > 0, z_im ≠ 0".into());
                }
            }
        }
        if d.sampled && replicates < MIN_REPLICATES {
            return bad(format!("{suite} needs at least {MIN_REPLICATES} replicates, got {replicates}"));
        }
        Ok(Plan {
            suite,
            dist_x,
            dist_y,
            size,
            z,
            beta,
            h,
            a,
            epsilon,
            g,
            replicates,
            seed,
            out: self.out.clone(),
            format: self.format.unwrap_or_default(),
            grid,
            threads: self.threads,
        })
    }
}

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_GRID: [usize; 3] = [100, 400, 1600];

struct SuiteDefaults {
    dist_x: &'static str,
    dist_y: &'static str,
    size: usize,
    g: &'static str,
    replicates: usize,
    sampled: bool,
}

impl SuiteDefaults {
    fn of(suite: Suite) -> Self {
        let (dist_x, dist_y, size, g, replicates, sampled) = match suite {
            Suite::Clt => ("rademacher", "gaussian", 400, "sin", 100_000, true),
            Suite::Wigner => ("rademacher", "gaussian", 100, "sin", 500, true),
            Suite::SkFreeEnergy => ("gaussian", "rademacher", 12, "tanh", 2000, true),
            Suite::SkGroundState => ("gaussian", "rademacher", 14, "tanh", 1000, true),
            Suite::ErdosKac => ("rademacher", "gaussian", 400, "sin", 100_000, true),
            Suite::LambdaAudit => ("gaussian", "gaussian", 8, "sin", 20, false),
            Suite::BoundTable => ("rademacher", "gaussian", 0, "sin", 0, false),
        };
        SuiteDefaults { dist_x, dist_y, size, g, replicates, sampled }
    }
}

/// A validated configuration with every field resolved.
#[derive(Debug, Clone)]
pub struct Plan {
    pub suite: Suite,
    pub dist_x: DistributionSpec,
    pub dist_y: DistributionSpec,
    pub size: usize,
    pub z: C64,
    pub beta: f64,
    pub h: f64,
    pub a: f64,
    pub epsilon: f64,
    pub g: TestFunction,
    pub replicates: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub grid: Vec<usize>,
    pub threads: Option<usize>,
}

impl Plan {
    /// Key-value echo of the resolved settings, in a fixed order.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![
            ("suite", self.suite.to_string()),
            ("dist_x", self.dist_x.to_string()),
            ("dist_y", self.dist_y.to_string()),
            ("size", self.size.to_string()),
            ("g", self.g.name().to_string()),
            ("replicates", self.replicates.to_string()),
            ("seed", self.seed.to_string()),
        ];
        match self.suite {
            Suite::Wigner | Suite::LambdaAudit => {
                v.push(("z_re", self.z.re.to_string()));
                v.push(("z_im", self.z.im.to_string()));
                v.push(("epsilon", self.epsilon.to_string()));
            }
            Suite::SkFreeEnergy | Suite::SkGroundState => {
                v.push(("beta", self.beta.to_string()));
                v.push(("h", self.h.to_string()));
                v.push(("a", self.a.to_string()));
                v.push(("epsilon", self.epsilon.to_string()));
            }
            Suite::BoundTable => {
                let grid: Vec<String> = self.grid.iter().map(|n| n.to_string()).collect();
                v.push(("grid", grid.join(",")));
                v.push(("z_re", self.z.re.to_string()));
                v.push(("z_im", self.z.im.to_string()));
                v.push(("beta", self.beta.to_string()));
                v.push(("a", self.a.to_string()));
                v.push(("epsilon", self.epsilon.to_string()));
            }
            Suite::Clt | Suite::ErdosKac => {}
        }
        v.push(("format", format!("{:?}", self.format).to_lowercase()));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_globals() {
        let text = "# shared\nseed = 9\nreplicates=300\n\n[clt]\nn = 64\ndistX = uniform\n[wigner]\nN = 10 # unused here\n";
        let c = ExperimentConfig::parse_file_text(text, Suite::Clt).unwrap();
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.size, Some(64));
        assert_eq!(c.dist_x.as_deref(), Some("uniform"));
        let w = ExperimentConfig::parse_file_text(text, Suite::Wigner).unwrap();
        assert_eq!(w.size, Some(10));
        assert_eq!(w.dist_x, None);
    }

    #[test]
    fn bad_lines_are_config_errors() {
        for text in ["n 5", "[clt\nn=1", "[nope]\n", "colour = red", "n = many"] {
            assert!(matches!(ExperimentConfig::parse_file_text(text, Suite::Clt), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn overlay_prefers_later_values() {
        let mut base = ExperimentConfig { seed: Some(1), size: Some(5), ..Default::default() };
        base.overlay(&ExperimentConfig { seed: Some(2), ..Default::default() });
        assert_eq!((base.seed, base.size), (Some(2), Some(5)));
    }

    #[test]
    fn validation_fills_defaults_and_rejects_bad_fields() {
        let p = ExperimentConfig::default().validate(Suite::Clt).unwrap();
        assert_eq!((p.size, p.replicates, p.g.name()), (400, 100_000, "sin"));
        let cases = [
            (Suite::Clt, ExperimentConfig { replicates: Some(10), ..Default::default() }),
            (Suite::Wigner, ExperimentConfig { z_im: Some(0.0), ..Default::default() }),
            (Suite::SkFreeEnergy, ExperimentConfig { size: Some(30), ..Default::default() }),
            (Suite::SkGroundState, ExperimentConfig { a: Some(0.5), ..Default::default() }),
            (Suite::BoundTable, ExperimentConfig { grid: Some(vec![]), ..Default::default() }),
            (Suite::ErdosKac, ExperimentConfig { dist_x: Some("cauchy".into()), ..Default::default() }),
            (Suite::ErdosKac, ExperimentConfig { g: Some("cos".into()), ..Default::default() }),
            (Suite::Clt, ExperimentConfig { threads: Some(0), ..Default::default() }),
        ];
        for (suite, c) in cases {
            assert!(matches!(c.validate(suite), Err(Error::Config(_))), "{suite} {c:?}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
    }
}
