//! Sketch-driven search over mobile UI screens.
//!
//! A user draws one UI element at a time. Each stroke is classified into one
//! of 23 graphical primitives, committed elements form a partial query, and
//! screens of an indexed corpus are ranked by how well their elements match
//! the query in category, position and shape.

pub mod category;
pub mod classifier;
pub mod corpus;
pub mod doodle;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod query;
pub mod search;
pub mod shapes;
pub mod stroke;
pub mod synth;

pub use category::{Category, QueryCategory};
pub use error::{Error, Result};
