//! Perturbation unknowns and the reconstructed physical flow.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::fields::{c_norms, AnnulusGrid, Field2D, Norms};
use crate::io::fmt_g17;

/// The five perturbation fields `W1 = V1 - U1`, `W2 = Vc - kappa2`, `W3 = V3`,
/// `W4 = A - A0`, `W5 = B - B0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationState {
    pub w: [Field2D; 5],
}

/// Norms of each of the five components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StateNorms {
    pub components: [Norms; 5],
}

impl StateNorms {
    pub fn c0(&self) -> f64 {
        self.components.iter().fold(0.0, |m, n| m.max(n.c0))
    }

    pub fn c1(&self) -> f64 {
        self.components.iter().fold(0.0, |m, n| m.max(n.c1))
    }
}

impl PerturbationState {
    pub fn zeros(grid: AnnulusGrid) -> Self {
        let z = Field2D::zeros(grid);
        Self {
            w: [z.clone(), z.clone(), z.clone(), z.clone(), z],
        }
    }

    pub fn grid(&self) -> AnnulusGrid {
        self.w[0].grid
    }

    pub fn w1(&self) -> &Field2D {
        &self.w[0]
    }
    pub fn w2(&self) -> &Field2D {
        &self.w[1]
    }
    pub fn w3(&self) -> &Field2D {
        &self.w[2]
    }
    pub fn w4(&self) -> &Field2D {
        &self.w[3]
    }
    pub fn w5(&self) -> &Field2D {
        &self.w[4]
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(Field2D::is_finite)
    }

    /// Component-wise `C^0` and `C^1`-proxy norms; the state norm is the maximum over components.
    pub fn norms(&self) -> StateNorms {
        StateNorms {
            components: [
                c_norms(&self.w[0]),
                c_norms(&self.w[1]),
                c_norms(&self.w[2]),
                c_norms(&self.w[3]),
                c_norms(&self.w[4]),
            ],
        }
    }

    pub fn difference(&self, other: &PerturbationState) -> PerturbationState {
        PerturbationState {
            w: std::array::from_fn(|k| &self.w[k] - &other.w[k]),
        }
    }

    pub fn scale(&self, s: f64) -> PerturbationState {
        PerturbationState {
            w: std::array::from_fn(|k| self.w[k].scale(s)),
        }
    }
}

/// Physical flow variables on the annulus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub v1: Field2D,
    pub v2: Field2D,
    pub v3: Field2D,
    pub rho: Field2D,
    pub p: Field2D,
    pub a: Field2D,
    pub b: Field2D,
    pub mach: Field2D,
    pub sigma: f64,
    pub gamma: f64,
}

impl FlowField {
    pub fn grid(&self) -> AnnulusGrid {
        self.v1.grid
    }

    /// Helical swirl `r V2 - sigma V3 / (2 pi)`.
    pub fn swirl(&self) -> Field2D {
        let g = self.grid();
        let k = self.sigma / (2.0 * std::f64::consts::PI);
        let mut out = Field2D::zeros(g);
        for i in 0..g.n_r {
            let r = g.r(i);
            for j in 0..g.n_eta {
                out.values[[i, j]] = r * self.v2.values[[i, j]] - k * self.v3.values[[i, j]];
            }
        }
        out
    }

    /// Writes `r,eta,V1,V2,V3,rho,p,A,B,mach` rows.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "r,eta,V1,V2,V3,rho,p,A,B,mach")?;
        let g = self.grid();
        let cols = [&self.v1, &self.v2, &self.v3, &self.rho, &self.p, &self.a, &self.b, &self.mach];
        for i in 0..g.n_r {
            for j in 0..g.n_eta {
                let mut line = format!("{},{}", fmt_g17(g.r(i)), fmt_g17(g.eta(j)));
                for c in cols {
                    line.push(',');
                    line.push_str(&fmt_g17(c.values[[i, j]]));
                }
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }
}
