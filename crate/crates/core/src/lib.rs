//! Backward reachability for array-based transition systems, with monotonic
//! abstraction of universally guarded transitions, acceleration of counter
//! loops, and an explicit-state oracle for finite instances.

pub mod abstraction;
pub mod acceleration;
pub mod cli;
pub mod engine;
pub mod logic;
pub mod oracle;
pub mod solver;
pub mod system;
