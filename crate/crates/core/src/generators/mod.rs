//! Deterministic synthetic instances: Fisher market equilibrium, Lasso, multi-period portfolio.
//!
//! Every generator is keyed by a `u64` seed through `ChaCha8Rng`, so the same spec always
//! produces the same bytes. Each instance comes with a point that satisfies all of its
//! constraints, useful as a warm start or a sanity check.

pub mod fisher;
pub mod lasso;
pub mod mpo;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::ConicProgram;

pub use fisher::{gen_fisher, FisherSpec};
pub use lasso::{gen_lasso, LassoSpec};
pub use mpo::{gen_mpo, MpoSpec};

/// A generated program together with a feasible point.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub program: ConicProgram<f64>,
    pub feasible_x: Vec<f64>,
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-major triplet accumulator.
#[derive(Debug, Default)]
pub(crate) struct Triplets {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Triplets {
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        if v != 0.0 {
            self.rows.push(r);
            self.cols.push(c);
            self.vals.push(v);
        }
    }
}
