//! File formats, wiki dump and SPARQL ingestion, binary artifacts and the
//! `belforge` command line on top of [`belforge_core`].

pub use belforge_core as core;

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod corpus_xml;
pub mod dump;
pub mod error;
pub mod fsutil;
pub mod mapping;
pub mod ontology_io;
pub mod pairs_io;
pub mod pipeline;

pub use error::{Error, Result};
