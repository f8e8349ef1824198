//! Exterior-calculus kernel for verifying C∞-structures of involutive
//! distributions, converting between symmetrizing and integrating factors,
//! and running the stepwise Pfaffian reduction.

pub mod expr;
pub mod factors;
pub mod forms;
pub mod linalg;
pub mod reduction;
pub mod scenario;
pub mod structures;

pub use expr::{Chart, Certainty, Context, Expr, ExprError, Point, Sym, ZeroTestPolicy, ZeroTester};
pub use forms::{KForm, SmoothMap, VectorField};
