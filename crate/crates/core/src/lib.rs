//! Finite group actions on closed handles `#_g (S^2 x S^1)` through finite
//! graphs of finite groups.
//!
//! A graph of groups together with a surjection of its fundamental group onto
//! a finite group `G`, injective on vertex groups, describes an action of `G`
//! on a closed handle whose genus satisfies `g - 1 = -chi * |G|`. This crate
//! builds such data, checks it, searches for it, and cross-checks the genus
//! and faithfulness through the quotient of the Bass–Serre tree.

pub mod admissibility;
pub mod covering;
pub mod error;
pub mod explorer;
pub mod gog;
pub mod groups;
pub mod homsearch;
pub mod io;

pub use error::{Error, Result};
pub use gog::{EdgeId, GraphOfGroups, Rational, VertexId};
pub use groups::{FiniteGroup, GroupHom, GroupSpec};
pub use homsearch::Surjection;
