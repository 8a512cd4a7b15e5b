//! Run configuration: file parsing, flag overrides and resolution into solver inputs.

use std::path::{Path, PathBuf};

use nlbeam_core::analysis::{Comparand, CompareOptions};
use nlbeam_core::{
    BeamProblem, Family, FixedPointConfig, GmresConfig, ModulusModel, OrderDistribution, SolverMethod, Supports,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const OUT_DIR_ENV: &str = "NLBEAM_OUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Value { key: &'static str, message: String },
}

fn bad<T>(key: &'static str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Value {
        key,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Optional overrides for the fixed-point loop.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointSection {
    pub tol_hc: Option<f64>,
    pub tol_chi: Option<f64>,
    pub max_iter: Option<usize>,
    pub relaxation: Option<f64>,
}

/// Optional overrides for the Krylov solver.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmresSection {
    pub tol: Option<f64>,
    pub restart: Option<usize>,
    pub max_iter: Option<usize>,
}

/// Everything a run can be configured with. Every key is optional; unset keys
/// fall back to the selected built-in problem.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<u8>,
    pub length: Option<f64>,
    pub thickness: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub n_alpha: Option<usize>,
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
    pub q: Option<f64>,
    pub supports: Option<String>,
    pub dist: Option<String>,
    /// Constant order for `dist = "uniform"`.
    pub alpha: Option<f64>,
    /// Family parameters replacing the defaults of the named distribution.
    pub family: Option<Family>,
    pub modulus: Option<ModulusModel>,
    pub method: Option<String>,
    pub comparand: Option<Comparand>,
    pub output_dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    #[serde(default)]
    pub fixed_point: FixedPointSection,
    #[serde(default)]
    pub gmres: GmresSection,
}

impl RunConfig {
    /// JSON when the extension is `.json`, TOML otherwise.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: other.$f.or(self.$f),)* ..RunConfig::default() } };
        }
        let mut out = pick!(
            problem, length, thickness, nx, ny, n_alpha, mu, lambda, q, supports, dist, alpha, family, modulus, method,
            comparand, output_dir, formats
        );
        out.fixed_point = FixedPointSection {
            tol_hc: other.fixed_point.tol_hc.or(self.fixed_point.tol_hc),
            tol_chi: other.fixed_point.tol_chi.or(self.fixed_point.tol_chi),
            max_iter: other.fixed_point.max_iter.or(self.fixed_point.max_iter),
            relaxation: other.fixed_point.relaxation.or(self.fixed_point.relaxation),
        };
        out.gmres = GmresSection {
            tol: other.gmres.tol.or(self.gmres.tol),
            restart: other.gmres.restart.or(self.gmres.restart),
            max_iter: other.gmres.max_iter.or(self.gmres.max_iter),
        };
        out
    }

    pub fn resolve(&self, env_out: Option<PathBuf>) -> Result<Resolved, ConfigError> {
        let id = self.problem.unwrap_or(2);
        let dist = self.distribution()?;
        let mut p = match BeamProblem::preset(id, dist) {
            Ok(p) => p,
            Err(e) => return bad("problem", e.to_string()),
        };
        let positive = |key: &'static str, v: Option<f64>, target: &mut f64| -> Result<(), ConfigError> {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(key, format!("{v} must be positive"));
                }
                *target = v;
            }
            Ok(())
        };
        positive("length", self.length, &mut p.length)?;
        positive("thickness", self.thickness, &mut p.thickness)?;
        positive("mu", self.mu, &mut p.mu)?;
        positive("lambda", self.lambda, &mut p.lambda)?;
        let at_least = |key: &'static str, v: Option<usize>, min: usize, target: &mut usize| {
            if let Some(v) = v {
                if v < min {
                    return bad(key, format!("{v} must be at least {min}"));
                }
                *target = v;
            }
            Ok(())
        };
        at_least("nx", self.nx, 3, &mut p.nx)?;
        at_least("ny", self.ny, 3, &mut p.ny)?;
        at_least("n_alpha", self.n_alpha, 1, &mut p.n_alpha)?;
        if self.ny.is_some() && self.n_alpha.is_none() {
            p.n_alpha = p.ny;
        }
        if let Some(q) = self.q {
            if !q.is_finite() {
                return bad("q", "load must be finite");
            }
            p.q = q;
        }
        if let Some(s) = &self.supports {
            p.supports = match Supports::by_name(s) {
                Ok(s) => s,
                Err(e) => return bad("supports", e.to_string()),
            };
        }
        if let Some(m) = self.modulus {
            p.modulus = m;
        }
        if let Err(e) = p.validate() {
            return bad("problem", e.to_string());
        }

        let method = match self.method.as_deref() {
            None | Some("direct") => SolverMethod::Direct,
            Some("iterative") => SolverMethod::Iterative,
            Some(other) => return bad("method", format!("unknown solver {other:?}")),
        };
        let d = FixedPointConfig::default();
        let fs = &self.fixed_point;
        let fixed_point = FixedPointConfig {
            tol_hc: fs.tol_hc.unwrap_or(d.tol_hc),
            tol_chi: fs.tol_chi.unwrap_or(d.tol_chi),
            max_iter: fs.max_iter.unwrap_or(d.max_iter),
            relaxation: fs.relaxation.unwrap_or(d.relaxation),
        };
        if let Err(e) = fixed_point.validate() {
            return bad("fixed_point", e.to_string());
        }
        let g = GmresConfig::default();
        let gmres = GmresConfig {
            tol: self.gmres.tol.unwrap_or(g.tol),
            restart: self.gmres.restart.unwrap_or(g.restart),
            max_iter: self.gmres.max_iter.unwrap_or(g.max_iter),
        };
        if !(gmres.tol > 0.0 && gmres.tol < 1.0) {
            return bad("gmres.tol", format!("{} must lie in (0, 1)", gmres.tol));
        }
        if gmres.restart < 1 {
            return bad("gmres.restart", "must be at least 1");
        }
        let formats = self.formats.clone().unwrap_or_else(|| vec![Format::Csv, Format::Json]);
        if formats.is_empty() {
            return bad("formats", "at least one output format is required");
        }
        let output_dir = env_out
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Resolved {
            problem_id: self.problem.filter(|_| self.custom_geometry().is_none()),
            problem: p,
            opts: CompareOptions {
                method,
                gmres,
                fixed_point,
                comparand: self.comparand.unwrap_or_default(),
            },
            output_dir,
            formats,
        })
    }

    fn custom_geometry(&self) -> Option<()> {
        (self.length.is_some() || self.thickness.is_some() || self.q.is_some()).then_some(())
    }

    fn distribution(&self) -> Result<OrderDistribution, ConfigError> {
        let name = self.dist.as_deref().unwrap_or("linear");
        let mut d = match (name, self.alpha) {
            ("uniform", Some(a)) => {
                if !(a > 0.0 && a <= 1.0) {
                    return bad("alpha", format!("{a} must lie in (0, 1]"));
                }
                if a == 1.0 {
                    OrderDistribution::local()
                } else {
                    OrderDistribution::uniform(a)
                }
            }
            ("uniform", None) => return bad("alpha", "required with dist = \"uniform\""),
            (_, Some(_)) => return bad("alpha", format!("only valid with dist = \"uniform\", not {name:?}")),
            (n, None) => match OrderDistribution::by_name(n) {
                Ok(d) => d,
                Err(e) => return bad("dist", e.to_string()),
            },
        };
        if let Some(f) = &self.family {
            d = match OrderDistribution::new(d.name.clone(), f.clone()) {
                Ok(d) => d,
                Err(e) => return bad("family", e.to_string()),
            };
        }
        Ok(d)
    }
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct Resolved {
    /// Built-in problem number when the geometry was not overridden.
    pub problem_id: Option<u8>,
    pub problem: BeamProblem,
    pub opts: CompareOptions,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Resolved {
    pub fn label(&self) -> String {
        match self.problem_id {
            Some(id) => format!("problem-{id}"),
            None => "custom".into(),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Config echo written into every artifact header.
    pub fn echo(&self) -> serde_json::Value {
        let o = &self.opts;
        serde_json::json!({
            "label": self.label(),
            "problem": self.problem,
            "method": o.method,
            "comparand": o.comparand,
            "fixed_point": o.fixed_point,
            "gmres": { "tol": o.gmres.tol, "restart": o.gmres.restart, "max_iter": o.gmres.max_iter },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_problem_two() {
        let r = RunConfig::default().resolve(None).unwrap();
        assert_eq!((r.problem.nx, r.problem.ny, r.problem.n_alpha), (451, 46, 46));
        assert_eq!(r.problem.dist, OrderDistribution::linear());
        assert_eq!(r.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn merge_prefers_the_override() {
        let a = RunConfig {
            problem: Some(1),
            ny: Some(10),
            ..Default::default()
        };
        let b = RunConfig {
            problem: Some(3),
            ..Default::default()
        };
        let m = a.merge(b);
        assert_eq!((m.problem, m.ny), (Some(3), Some(10)));
    }

    #[test]
    fn errors_name_the_key() {
        let c = RunConfig {
            thickness: Some(-0.1),
            ..Default::default()
        };
        let e = c.resolve(None).unwrap_err().to_string();
        assert!(e.contains("`thickness`"), "{e}");
        let c = RunConfig {
            dist: Some("uniform".into()),
            ..Default::default()
        };
        assert!(c.resolve(None).unwrap_err().to_string().contains("`alpha`"));
    }
}
