//! Grid-based grand grand Morrey norms and operator verification.
//!
//! The crate builds midpoint-rule meshes on finite unions of boxes
//! ([`grid`]), samples integrands written in a tiny expression language
//! ([`dsl`]), computes Lebesgue, Morrey and grand grand Morrey norms
//! ([`norms`]), applies maximal and truncated singular operators
//! ([`operators`]), evaluates the explicit norm inequalities and their
//! constants ([`constants`]), and packages empirical verification sweeps
//! with machine-readable reports ([`verify`]).

pub mod constants;
pub mod dsl;
pub mod grid;
pub mod norms;
pub mod operators;
pub mod verify;
