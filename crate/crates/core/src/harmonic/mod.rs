//! Harmonic vectors, conformal measures, the level-chain recursion and
//! extensions off hereditary sets.

mod chain;
mod conformal;
pub(crate) mod decompose;
mod extend;
mod vector;

pub use chain::{chain_to_vector, face_mask, solve_level_chain, ChainSolution, LevelChain, DEDUP_TOL};
pub use conformal::{doob_transform, ConformalMeasure, DoobMatrix};
pub use decompose::{bratteli_decompose, Decomposition, Exhaustion};
pub use extend::{extend_from_boundary, extend_from_hereditary, extension_controls, Extension, Feasibility};
pub use vector::{upper_bounds, verify_harmonic, HarmonicMode, HarmonicVector, ResidualReport};
