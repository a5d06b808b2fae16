//! Core of the abdl toolkit: the language of ALCHI ontologies with
//! abstraction levels, its text formats, conjunctive queries, model
//! checking and normalization.

pub mod check;
pub mod cq;
pub mod model;
pub mod normalize;
pub mod structure;
pub mod syntax;

pub use model::*;
