//! Core algorithms for building a filtered biomedical ontology, compiling a
//! weakly labelled entity-linking corpus from wiki markup, training a
//! character n-gram string encoder with self-alignment contrastive learning,
//! and linking mentions to concepts through nearest-neighbour search.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, network
//! access and the command line live in the `belforge` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ann;
pub mod corpus;
pub mod encoder;
pub mod eval;
pub mod ids;
pub mod linalg;
pub mod ontology;
pub mod train;

pub use ids::{Cui, IdError, SemanticGroup, Tui};
