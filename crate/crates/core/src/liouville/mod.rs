//! Operator–vector isomorphism and Liouvillian construction.
//!
//! Operators are vectorized by stacking columns, so `vec(M)[j*d + i] = M[i][j]`
//! and `|a><b|` maps to `conj|b> ⊗ |a>`. With that convention the map
//! `rho -> O1 rho O2^†` is the matrix `conj(O2) ⊗ O1`.
//!
//! For a bipartite space `H_A ⊗ H_B` (Hilbert index `a*dB + b`) two vector
//! orderings are used:
//!
//! * `Flat`: the plain column-stacked index over `H`, i.e.
//!   `((a2*dB + b2)*dA + a1)*dB + b1` for `|a1 b1><a2 b2|`.
//! * `Grouped`: `((a2*dA + a1)*dB + b2)*dB + b1`, so that a product state
//!   `rho_A ⊗ rho_B` is `vec(rho_A) ⊗ vec(rho_B)` and local superoperators act
//!   as plain Kronecker products `S_A ⊗ S_B`.

mod state;
mod superop;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use state::{
    embed_product, identity_vec, partial_trace_a, partial_trace_b, steady_state,
    steady_state_with_tol, unvec, vec, DensityVec, SteadyState,
};
pub use superop::{
    grouped_reorder, lindblad_superop, sandwich, BipartiteLindblad, LindbladModel, SuperOp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VecOrdering {
    Flat,
    Grouped,
}

impl VecOrdering {
    pub fn flipped(self) -> Self {
        match self {
            Self::Flat => Self::Grouped,
            Self::Grouped => Self::Flat,
        }
    }
}

/// `H_A ⊗ H_B` with `A` the slow and `B` the fast subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteSpace {
    dim_a: usize,
    dim_b: usize,
}

impl BipartiteSpace {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || dim_a * dim_b < 2 {
            return Err(Error::InvalidInput(format!(
                "bipartite space {dim_a}x{dim_b} must have positive factors and total dimension >= 2"
            )));
        }
        Ok(Self { dim_a, dim_b })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Liouville-space dimension `(dA dB)^2`.
    pub fn liouville_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    /// `perm[f]` is the grouped index of flat index `f`.
    pub fn flat_to_grouped(&self) -> Vec<usize> {
        let (da, db) = (self.dim_a, self.dim_b);
        let mut perm = vec![0; self.liouville_dim()];
        for a2 in 0..da {
            for b2 in 0..db {
                for a1 in 0..da {
                    for b1 in 0..db {
                        let f = ((a2 * db + b2) * da + a1) * db + b1;
                        let g = ((a2 * da + a1) * db + b2) * db + b1;
                        perm[f] = g;
                    }
                }
            }
        }
        perm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Single(usize),
    Bipartite(BipartiteSpace),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Self::Single(d) => *d,
            Self::Bipartite(b) => b.dim(),
        }
    }

    pub fn liouville_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn bipartite(&self) -> Result<BipartiteSpace> {
        match self {
            Self::Bipartite(b) => Ok(*b),
            Self::Single(_) => Err(Error::MissingBipartite),
        }
    }
}

impl From<BipartiteSpace> for Space {
    fn from(b: BipartiteSpace) -> Self {
        Self::Bipartite(b)
    }
}
