//! Through-thickness profiles of the nonlocal order `α(y)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Lowest admissible order; profiles that reach zero are clamped here.
pub const ALPHA_MIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Asymmetric,
}

/// Family and shape parameters. Coordinates are normalized as `s = y/h ∈ [-½, ½]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// `c`
    Uniform { value: f64 },
    /// `base - slope·s`
    Linear { base: f64, slope: f64 },
    /// `base + amplitude·sin(πs)`
    Sine { base: f64, amplitude: f64 },
    /// `base - coeff·s³`
    Cubic { base: f64, coeff: f64 },
    /// `base + coeff·s²`
    Parabolic { base: f64, coeff: f64 },
    /// `base + amplitude·cos(πs)`
    Cosine { base: f64, amplitude: f64 },
    /// `offset + amplitude·√(1 - 4s²)`
    Ellipse { amplitude: f64, offset: f64 },
    /// Piecewise-linear through `(s, α)` knots sorted by `s`, covering `[-½, ½]`.
    Custom { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderDistribution {
    pub name: String,
    pub family: Family,
}

impl OrderDistribution {
    pub fn new(name: impl Into<String>, family: Family) -> Result<Self> {
        let d = Self {
            name: name.into(),
            family,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(value: f64) -> Self {
        Self {
            name: format!("uniform-{value}"),
            family: Family::Uniform { value },
        }
    }

    pub fn local() -> Self {
        Self {
            name: "local".into(),
            family: Family::Uniform { value: 1.0 },
        }
    }

    pub fn linear() -> Self {
        Self {
            name: "linear".into(),
            family: Family::Linear { base: 0.6, slope: 0.6 },
        }
    }

    pub fn sine() -> Self {
        Self {
            name: "sine".into(),
            family: Family::Sine {
                base: 0.5,
                amplitude: 0.5,
            },
        }
    }

    pub fn cubic() -> Self {
        Self {
            name: "cubic".into(),
            family: Family::Cubic { base: 0.6, coeff: 2.4 },
        }
    }

    pub fn parabolic() -> Self {
        Self {
            name: "parabolic".into(),
            family: Family::Parabolic { base: 0.3, coeff: 2.4 },
        }
    }

    pub fn cosine() -> Self {
        Self {
            name: "cosine".into(),
            family: Family::Cosine {
                base: 0.3,
                amplitude: 0.6,
            },
        }
    }

    pub fn ellipse() -> Self {
        Self {
            name: "ellipse".into(),
            family: Family::Ellipse {
                amplitude: 0.40,
                offset: 0.55,
            },
        }
    }

    /// Built-in profile by name: `uniform-<c>`, `local`, or a family name with defaults.
    pub fn by_name(name: &str) -> Result<Self> {
        if let Some(c) = name.strip_prefix("uniform-") {
            let value: f64 = c
                .parse()
                .map_err(|_| crate::error::Error::Domain(format!("cannot parse uniform order in {name:?}")))?;
            let d = Self {
                name: name.to_string(),
                family: Family::Uniform { value },
            };
            d.validate()?;
            return Ok(d);
        }
        Ok(match name {
            "local" => Self::local(),
            "linear" => Self::linear(),
            "sine" => Self::sine(),
            "cubic" => Self::cubic(),
            "parabolic" => Self::parabolic(),
            "cosine" => Self::cosine(),
            "ellipse" => Self::ellipse(),
            _ => return domain(format!("unknown distribution {name:?}")),
        })
    }

    /// The eight profiles of the benchmark study, symmetric set first.
    pub fn benchmark_set() -> Vec<Self> {
        vec![
            Self::uniform(0.5),
            Self::parabolic(),
            Self::cosine(),
            Self::ellipse(),
            Self::uniform(0.8),
            Self::sine(),
            Self::cubic(),
            Self::linear(),
        ]
    }

    pub fn symmetry(&self) -> Symmetry {
        match &self.family {
            Family::Uniform { .. } | Family::Parabolic { .. } | Family::Cosine { .. } | Family::Ellipse { .. } => {
                Symmetry::Symmetric
            }
            Family::Linear { slope, .. } if *slope == 0.0 => Symmetry::Symmetric,
            Family::Sine { amplitude, .. } if *amplitude == 0.0 => Symmetry::Symmetric,
            Family::Cubic { coeff, .. } if *coeff == 0.0 => Symmetry::Symmetric,
            Family::Custom { knots } => {
                let sym = knots.iter().all(|&(s, a)| (Self::interp(knots, -s) - a).abs() <= 1e-12);
                if sym {
                    Symmetry::Symmetric
                } else {
                    Symmetry::Asymmetric
                }
            }
            _ => Symmetry::Asymmetric,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, Family::Uniform { .. })
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match &self.family {
            Family::Uniform { value } => finite(&[*value]) && *value > 0.0 && *value <= 1.0,
            Family::Linear { base, slope } => finite(&[*base, *slope]),
            Family::Sine { base, amplitude } => finite(&[*base, *amplitude]),
            Family::Cubic { base, coeff } => finite(&[*base, *coeff]),
            Family::Parabolic { base, coeff } => finite(&[*base, *coeff]),
            Family::Cosine { base, amplitude } => finite(&[*base, *amplitude]),
            Family::Ellipse { amplitude, offset } => finite(&[*amplitude, *offset]),
            Family::Custom { knots } => {
                knots.len() >= 2
                    && knots.windows(2).all(|w| w[1].0 > w[0].0)
                    && knots.first().is_some_and(|k| k.0 <= -0.5)
                    && knots.last().is_some_and(|k| k.0 >= 0.5)
                    && knots.iter().all(|&(s, a)| s.is_finite() && a.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            domain(format!("invalid parameters for distribution {:?}", self.name))
        }
    }

    fn interp(knots: &[(f64, f64)], s: f64) -> f64 {
        let k = knots.partition_point(|&(ks, _)| ks < s).clamp(1, knots.len() - 1);
        let (s0, a0) = knots[k - 1];
        let (s1, a1) = knots[k];
        a0 + (a1 - a0) * (s - s0) / (s1 - s0)
    }

    fn raw(&self, s: f64) -> f64 {
        match &self.family {
            Family::Uniform { value } => *value,
            Family::Linear { base, slope } => base - slope * s,
            Family::Sine { base, amplitude } => base + amplitude * (PI * s).sin(),
            Family::Cubic { base, coeff } => base - coeff * s * s * s,
            Family::Parabolic { base, coeff } => base + coeff * s * s,
            Family::Cosine { base, amplitude } => base + amplitude * (PI * s).cos(),
            Family::Ellipse { amplitude, offset } => offset + amplitude * (1.0 - 4.0 * s * s).max(0.0).sqrt(),
            Family::Custom { knots } => Self::interp(knots, s),
        }
    }

    /// `α(y)` on a section of thickness `h`, clamped to `[ALPHA_MIN, 1]`.
    pub fn eval(&self, y: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return domain(format!("thickness {h} must be positive"));
        }
        let slack = 1e-12 * h;
        if !(y.abs() <= 0.5 * h + slack) {
            return domain(format!("y = {y} outside the section [-{0}, {0}]", 0.5 * h));
        }
        let s = (y / h).clamp(-0.5, 0.5);
        Ok(self.raw(s).clamp(ALPHA_MIN, 1.0))
    }

    /// Order at the physical coordinate `ỹ`, i.e. `α(ỹ + h_c)`.
    pub fn to_physical(&self, y_tilde: f64, h: f64, h_c: f64) -> Result<f64> {
        self.eval(y_tilde + h_c, h)
    }
}
