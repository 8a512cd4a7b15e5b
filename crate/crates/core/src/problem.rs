//! Beam geometry, material, load and support description shared by both models.

use serde::{Deserialize, Serialize};

use crate::distributions::OrderDistribution;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D};

pub const MU: f64 = 2.5967e10;
pub const LAMBDA: f64 = 5.0973e10;

/// Support condition at one beam end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum End {
    Clamped,
    /// Pinned with prescribed end moment.
    Simple {
        moment: f64,
    },
    /// Prescribed end shear force and moment.
    Free {
        shear: f64,
        moment: f64,
    },
}

impl End {
    pub const SIMPLE: End = End::Simple { moment: 0.0 };
    pub const FREE: End = End::Free {
        shear: 0.0,
        moment: 0.0,
    };

    pub fn fixes_deflection(&self) -> bool {
        !matches!(self, End::Free { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Supports {
    pub left: End,
    pub right: End,
}

impl Supports {
    pub const CLAMPED_CLAMPED: Supports = Supports {
        left: End::Clamped,
        right: End::Clamped,
    };
    pub const CLAMPED_FREE: Supports = Supports {
        left: End::Clamped,
        right: End::FREE,
    };
    pub const SIMPLY_SUPPORTED: Supports = Supports {
        left: End::SIMPLE,
        right: End::SIMPLE,
    };

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "clamped-clamped" => Ok(Self::CLAMPED_CLAMPED),
            "clamped-free" => Ok(Self::CLAMPED_FREE),
            "simply-supported" => Ok(Self::SIMPLY_SUPPORTED),
            "free-free" => Ok(Supports {
                left: End::FREE,
                right: End::FREE,
            }),
            _ => Err(Error::Problem(format!("unknown support family {name:?}"))),
        }
    }

    pub fn name(&self) -> String {
        let end = |e: &End| match e {
            End::Clamped => "clamped",
            End::Simple { .. } => "simple",
            End::Free { .. } => "free",
        };
        match (self.left, self.right) {
            (End::Clamped, End::Clamped) => "clamped-clamped".into(),
            (End::Clamped, End::Free { .. }) => "clamped-free".into(),
            (End::Simple { .. }, End::Simple { .. }) => "simply-supported".into(),
            (l, r) => format!("{}-{}", end(&l), end(&r)),
        }
    }

    /// Rigid-body motion not suppressed.
    pub fn is_under_constrained(&self) -> bool {
        let fixed = [self.left, self.right].iter().filter(|e| e.fixes_deflection()).count();
        let clamped = [self.left, self.right]
            .iter()
            .filter(|e| matches!(e, End::Clamped))
            .count();
        fixed == 0 || (fixed == 1 && clamped == 0)
    }
}

/// Axial modulus used by the beam model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusModel {
    #[default]
    Young,
    PlaneStrain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamProblem {
    pub length: f64,
    pub thickness: f64,
    pub nx: usize,
    pub ny: usize,
    pub n_alpha: usize,
    pub mu: f64,
    pub lambda: f64,
    /// Uniform transverse load per unit length, acting towards `-y`.
    pub q: f64,
    pub supports: Supports,
    pub dist: OrderDistribution,
    pub modulus: ModulusModel,
}

impl BeamProblem {
    /// Benchmark problems 1–4 (slenderness 20, 10, 6.7, 5).
    pub fn preset(id: u8, dist: OrderDistribution) -> Result<Self> {
        let (h, nx, q) = match id {
            1 => (0.05, 901, 2e7),
            2 => (0.10, 451, 1e8),
            3 => (0.15, 301, 5e8),
            4 => (0.20, 226, 1e9),
            _ => return Err(Error::Problem(format!("no built-in problem {id}"))),
        };
        Ok(Self {
            length: 1.0,
            thickness: h,
            nx,
            ny: 46,
            n_alpha: 46,
            mu: MU,
            lambda: LAMBDA,
            q,
            supports: Supports::CLAMPED_CLAMPED,
            dist,
            modulus: ModulusModel::Young,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Problem(what.to_string()));
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad("length must be positive");
        }
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return bad("thickness must be positive");
        }
        if self.nx < 3 || self.ny < 3 {
            return bad("nx and ny must be at least 3");
        }
        if self.n_alpha < 1 {
            return bad("n_alpha must be at least 1");
        }
        if !(self.mu > 0.0 && self.lambda > 0.0) {
            return bad("Lamé parameters must be positive");
        }
        if !self.q.is_finite() {
            return bad("load must be finite");
        }
        Ok(())
    }

    pub fn grid_x(&self) -> Result<Grid1D> {
        Grid1D::new(0.0, self.length, self.nx)
    }

    pub fn grid_2d(&self) -> Result<Grid2D> {
        Grid2D::beam(self.length, self.thickness, self.nx, self.ny)
    }

    pub fn poisson(&self) -> f64 {
        0.5 * self.lambda / (self.lambda + self.mu)
    }

    pub fn young(&self) -> f64 {
        self.mu * (3.0 * self.lambda + 2.0 * self.mu) / (self.lambda + self.mu)
    }

    pub fn plane_strain_modulus(&self) -> f64 {
        let nu = self.poisson();
        self.young() / (1.0 - nu * nu)
    }

    pub fn axial_modulus(&self) -> f64 {
        match self.modulus {
            ModulusModel::Young => self.young(),
            ModulusModel::PlaneStrain => self.plane_strain_modulus(),
        }
    }

    /// Second moment of area about the axis offset by `h_c`, unit width.
    pub fn second_moment(&self, h_c: f64) -> f64 {
        let h = self.thickness;
        h * h * h / 12.0 + h * h_c * h_c
    }

    pub fn with_dist(&self, dist: OrderDistribution) -> Self {
        Self { dist, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_and_moduli() {
        let p = BeamProblem::preset(2, OrderDistribution::linear()).unwrap();
        assert_eq!(2 * p.nx * p.ny, 41_492);
        assert!((p.young() - 6.9137e10).abs() / 6.9137e10 < 1e-4);
        assert!((p.poisson() - 0.33125).abs() < 1e-4);
        assert!(p.plane_strain_modulus() > p.young());
        assert!(BeamProblem::preset(5, OrderDistribution::linear()).is_err());
    }

    #[test]
    fn support_names() {
        for n in ["clamped-clamped", "clamped-free", "simply-supported"] {
            let s = Supports::by_name(n).unwrap();
            assert_eq!(s.name(), n);
            assert!(!s.is_under_constrained());
        }
        assert!(Supports::by_name("free-free").unwrap().is_under_constrained());
        assert!(Supports {
            left: End::SIMPLE,
            right: End::FREE
        }
        .is_under_constrained());
    }

    #[test]
    fn validation() {
        let mut p = BeamProblem::preset(1, OrderDistribution::local()).unwrap();
        assert!(p.validate().is_ok());
        p.thickness = 0.0;
        assert!(p.validate().is_err());
    }
}
