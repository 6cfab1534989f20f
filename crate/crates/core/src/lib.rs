//! Black-box cryptanalysis workbench for permutation-only image ciphers and
//! the KATAN32 / SIMON32/64 lightweight block ciphers.
//!
//! The crate is organised by capability:
//!
//! * [`permkit`] generates P-boxes from four key-generation patterns (logistic
//!   map, Lorenz system, Gray-code permutation, coupled map lattice) and runs
//!   the multi-round permutation encryption pipeline.
//! * [`lwc`] holds bit-exact KATAN32 and SIMON32/64 implementations plus the
//!   bit/real encodings used by the attack datasets.
//! * [`data`] reads and writes IDX image files and builds the three attack
//!   corpora deterministically from a seed.
//! * [`ndl`] is a small differentiable-computation core: tensors, five layer
//!   kinds, losses, metrics, SGD/Adam, gradient checking and checkpoints.
//! * [`attacks`] builds the fixed attack architectures and runs the training
//!   loop with best-checkpoint retention and transfer learning.
//! * [`eval`] measures attack quality (dissimilarity, histograms, a
//!   measurement classifier).
//! * [`gakey`] is the genetic-algorithm key search with a pluggable
//!   region-of-interest oracle.
//! * [`cli`] wires everything into the `permattack` command.
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`
//! directory.

pub mod attacks;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod gakey;
pub mod lwc;
pub mod ndl;
pub mod parallel;
pub mod permkit;
pub mod rng;

pub use error::{Error, Result};
