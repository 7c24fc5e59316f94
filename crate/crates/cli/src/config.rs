//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment. Numeric values accept constant
//! expressions such as `1/2` or `1/e`. Relative output paths are resolved
//! against the directory of the config file.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use fraclangevin::analysis::{GrowthSpec, LipschitzSpec};
use fraclangevin::kernels::OrderParams;
use fraclangevin::solver::{ProblemSpec, DEFAULT_MAX_ITER, DEFAULT_TOL};

use crate::expr::{Expr, ExprForcing};

pub const DEFAULT_N_PANELS: usize = 256;

const KEYS: &[&str] = &[
    "alpha",
    "beta",
    "gamma",
    "forcing",
    "sigma_bound",
    "a1",
    "a2",
    "tau1",
    "tau2",
    "lipschitz_w",
    "n_panels",
    "tol",
    "max_iter",
    "solution_csv",
    "convergence_csv",
    "report",
];

const GROWTH_KEYS: [&str; 5] = ["sigma_bound", "a1", "a2", "tau1", "tau2"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Missing(String),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub orders: OrderParams,
    pub forcing_source: String,
    pub forcing: Expr,
    pub growth: Option<GrowthSpec>,
    pub lipschitz: Option<LipschitzSpec>,
    pub n_panels: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub solution_csv: PathBuf,
    pub convergence_csv: PathBuf,
    pub report: PathBuf,
}

impl RunConfig {
    pub fn problem(&self) -> ProblemSpec {
        let mut p = ProblemSpec::new(self.orders, ExprForcing(self.forcing.clone()));
        p.growth = self.growth;
        p.lipschitz = self.lipschitz;
        p
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        Self::parse(&text, dir, &stem)
    }

    /// Parses config text; `dir` anchors relative paths and `stem` names
    /// the default outputs.
    pub fn parse(text: &str, dir: &Path, stem: &str) -> Result<Self, ConfigError> {
        let entries = parse_entries(text)?;
        let number = |key: &str| -> Result<Option<(f64, &Entry)>, ConfigError> {
            entries
                .get(key)
                .map(|e| {
                    Expr::parse_constant(&e.value)
                        .map(|v| (v, e))
                        .map_err(|err| e.error(err.column - 1, err.message))
                })
                .transpose()
        };
        let required = |key: &str| -> Result<(f64, &Entry), ConfigError> {
            number(key)?
                .ok_or_else(|| ConfigError::Missing(format!("missing required key '{key}'")))
        };

        let (alpha, alpha_e) = required("alpha")?;
        let (beta, beta_e) = required("beta")?;
        let (gamma, gamma_e) = required("gamma")?;
        let orders = OrderParams::new(alpha, beta, gamma).map_err(|err| {
            let entry = match err {
                fraclangevin::Error::OutOfRange { name: "alpha", .. } => alpha_e,
                fraclangevin::Error::OutOfRange { name: "beta", .. } => beta_e,
                _ => gamma_e,
            };
            entry.error(0, err.to_string())
        })?;

        let forcing_entry = entries
            .get("forcing")
            .ok_or_else(|| ConfigError::Missing("missing required key 'forcing'".into()))?;
        let forcing = Expr::parse(&forcing_entry.value)
            .map_err(|err| forcing_entry.error(err.column - 1, err.message))?;

        let present: Vec<&str> = GROWTH_KEYS
            .iter()
            .copied()
            .filter(|k| entries.contains_key(*k))
            .collect();
        let growth = match present.len() {
            0 => None,
            5 => {
                let v: Vec<(f64, &Entry)> = GROWTH_KEYS
                    .iter()
                    .map(|k| required(k))
                    .collect::<Result<_, _>>()?;
                let spec =
                    GrowthSpec::new(v[0].0, v[1].0, v[2].0, v[3].0, v[4].0).map_err(|err| {
                        let entry = match &err {
                            fraclangevin::Error::OutOfRange { name, .. } => GROWTH_KEYS
                                .iter()
                                .position(|k| k == name)
                                .map_or(v[0].1, |i| v[i].1),
                            _ => v[0].1,
                        };
                        entry.error(0, err.to_string())
                    })?;
                Some(spec)
            }
            _ => {
                let missing: Vec<&str> = GROWTH_KEYS
                    .iter()
                    .copied()
                    .filter(|k| !present.contains(k))
                    .collect();
                return Err(ConfigError::Missing(format!(
                    "growth bound is incomplete, missing {}",
                    missing.join(", ")
                )));
            }
        };

        let lipschitz = number("lipschitz_w")?
            .map(|(w, e)| LipschitzSpec::new(w).map_err(|err| e.error(0, err.to_string())))
            .transpose()?;

        let count = |key: &str, default: usize, min: usize| -> Result<usize, ConfigError> {
            match number(key)? {
                None => Ok(default),
                Some((v, e)) => {
                    if v.fract() != 0.0 || v < min as f64 || v > u32::MAX as f64 {
                        Err(e.error(0, format!("{key} must be an integer >= {min}, got {v}")))
                    } else {
                        Ok(v as usize)
                    }
                }
            }
        };
        let n_panels = count(
            "n_panels",
            DEFAULT_N_PANELS,
            fraclangevin::solver::MIN_PANELS,
        )?;
        let max_iter = count("max_iter", DEFAULT_MAX_ITER, 1)?;
        let tol = match number("tol")? {
            None => DEFAULT_TOL,
            Some((v, e)) if !(v > 0.0 && v.is_finite()) => {
                return Err(e.error(0, format!("tol must be positive, got {v}")))
            }
            Some((v, _)) => v,
        };

        let path = |key: &str, suffix: &str| -> PathBuf {
            let raw = entries
                .get(key)
                .map(|e| PathBuf::from(&e.value))
                .unwrap_or_else(|| PathBuf::from(format!("{stem}{suffix}")));
            if raw.is_absolute() {
                raw
            } else {
                dir.join(raw)
            }
        };

        Ok(RunConfig {
            orders,
            forcing_source: forcing_entry.value.clone(),
            forcing,
            growth,
            lipschitz,
            n_panels,
            tol,
            max_iter,
            solution_csv: path("solution_csv", "_solution.csv"),
            convergence_csv: path("convergence_csv", "_convergence.csv"),
            report: path("report", "_report.txt"),
        })
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    /// 1-based column of the first value character.
    column: usize,
}

impl Entry {
    fn error(&self, offset: usize, message: impl Into<String>) -> ConfigError {
        ConfigError::Syntax {
            line: self.line,
            column: self.column + offset,
            message: message.into(),
        }
    }
}

fn parse_entries(text: &str) -> Result<HashMap<String, Entry>, ConfigError> {
    let mut out: HashMap<String, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let key_col = content.chars().take_while(|c| c.is_whitespace()).count() + 1;
        let Some(eq) = content.find('=') else {
            return Err(ConfigError::Syntax {
                line,
                column: key_col,
                message: "expected 'key = value'".into(),
            });
        };
        let key = content[..eq].trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::Syntax {
                line,
                column: key_col,
                message: format!("unknown key '{key}'"),
            });
        }
        if out.contains_key(key) {
            return Err(ConfigError::Syntax {
                line,
                column: key_col,
                message: format!("duplicate key '{key}'"),
            });
        }
        let after = &content[eq + 1..];
        let lead = after.chars().take_while(|c| c.is_whitespace()).count();
        let value = after.trim().to_string();
        let column = content[..eq].chars().count() + 1 + lead + 1;
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                column,
                message: format!("missing value for '{key}'"),
            });
        }
        out.insert(
            key.to_string(),
            Entry {
                value,
                line,
                column,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::parse(text, Path::new("/runs"), "demo")
    }

    const MINIMAL: &str = "alpha = 0.5\nbeta = 2.5\ngamma = 0\nforcing = 1\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.n_panels, DEFAULT_N_PANELS);
        assert_eq!(c.tol, DEFAULT_TOL);
        assert_eq!(c.max_iter, DEFAULT_MAX_ITER);
        assert!(c.growth.is_none() && c.lipschitz.is_none());
        assert_eq!(c.solution_csv, PathBuf::from("/runs/demo_solution.csv"));
        assert_eq!(c.report, PathBuf::from("/runs/demo_report.txt"));
    }

    #[test]
    fn expressions_and_comments() {
        let text = "# header\nalpha = 1/2  # trailing\nbeta=5/2\ngamma = 1/5\n\
                    forcing = arctan(t)\nsigma_bound = 1\na1 = 4/9\na2 = 1/e\n\
                    tau1 = 1/2\ntau2 = 0.5\nsolution_csv = out/s.csv\n";
        let c = parse(text).unwrap();
        assert_eq!(c.orders.alpha(), 0.5);
        assert_eq!(c.orders.gamma(), 0.2);
        let g = c.growth.unwrap();
        assert_eq!(g.a2, 1.0 / std::f64::consts::E);
        assert_eq!(c.solution_csv, PathBuf::from("/runs/out/s.csv"));
    }

    #[test]
    fn out_of_range_order_points_at_its_line() {
        let err = parse("alpha = 1.5\nbeta = 2.5\ngamma = 0\nforcing = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1"), "{msg}");
        assert!(msg.contains("(0, 1]"), "{msg}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("alpha = 0.5\n  beta 2.5\n").unwrap_err();
        assert!(
            matches!(
                err,
                ConfigError::Syntax {
                    line: 2,
                    column: 3,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse("alpha = 0.5\nomega = 1\n").unwrap_err();
        assert!(
            matches!(
                err,
                ConfigError::Syntax {
                    line: 2,
                    column: 1,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse("alpha = 0.5\nalpha = 0.6\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = parse("alpha = 0.5\nbeta = 2.5\ngamma = 0\nforcing = 1 + * t\n").unwrap_err();
        assert!(
            matches!(
                err,
                ConfigError::Syntax {
                    line: 4,
                    column: 15,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse("alpha = 1/(2\n").unwrap_err();
        assert!(
            matches!(
                err,
                ConfigError::Syntax {
                    line: 1,
                    column: 13,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn missing_and_incomplete_entries() {
        assert!(matches!(
            parse("alpha = 0.5\n"),
            Err(ConfigError::Missing(_))
        ));
        let err = parse(&format!("{MINIMAL}a1 = 1\n")).unwrap_err();
        assert!(err.to_string().contains("sigma_bound"));
        assert!(parse(&format!("{MINIMAL}n_panels = 4\n")).is_err());
        assert!(parse(&format!("{MINIMAL}n_panels = 12.5\n")).is_err());
        assert!(parse(&format!("{MINIMAL}tol = 0\n")).is_err());
        assert!(parse(&format!("{MINIMAL}lipschitz_w = -1\n")).is_err());
    }
}
