//! Lifted-system iterative learning control with two learning players: the
//! feedforward input `u` and the process trajectory `r` fed to a closed
//! feedback loop.
//!
//! The pipeline is: continuous plant and controller ([`lti`]) are sampled
//! and closed into the complementary and process sensitivities, which are
//! lifted over a finite horizon ([`lifted`]). The learning gains and trial
//! updates live in [`ilc`], the cooperative-game bookkeeping in [`game`],
//! trial simulation and orchestration in [`runner`], and file I/O in [`cli`].

// negated comparisons are how NaN fails every guard
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod game;
pub mod ilc;
pub mod lifted;
pub mod linalg;
pub mod lti;
pub mod runner;
pub mod sweep;

pub use error::{IlcError, Result};
