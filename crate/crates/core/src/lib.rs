//! Symbolic and numeric tools for classifying Pfaffian systems and
//! control-affine systems up to local equivalence.

// Errors carry the witness point that refutes a check; boxing it would only
// move the allocation.
#![allow(clippy::result_large_err)]

pub mod expr;
pub mod sample;
pub mod forms;
pub mod flags;
pub mod coframe;
pub mod equiv;
pub mod system;
