//! Simulation toolkit for single-prover computational tests of contextuality.
//!
//! The crate is layered bottom-up:
//!
//! - [`qsim`]: dense statevector simulation over qudit registers.
//! - [`games`]: contextuality games, strategies and exact values.
//! - [`tcf`]: trapdoor claw-free function backends.
//! - [`qfhe`]: Pauli-pad homomorphic encryption simulation.
//! - [`opad`]: the oblivious Pauli pad.
//! - [`poq`]: the two-round proof of quantumness.
//! - [`compilers`]: the three game compilers with honest and classical provers.
//! - [`reductions`]: rewinding harnesses used by the soundness arguments.
//!
//! Every randomized routine takes an explicit RNG; [`mc`] derives
//! reproducible per-trial streams and runs trials in parallel.

pub mod bits;
pub mod compilers;
pub mod games;
pub mod mc;
pub mod opad;
pub mod poq;
pub mod qfhe;
pub mod qsim;
pub mod reductions;
pub mod tcf;
