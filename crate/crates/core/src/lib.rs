//! Evidence acquisition for information extraction, learned with deep
//! Q-learning.
//!
//! A frozen maximum-entropy tagger extracts entity values from a source
//! article. An agent then decides, one retrieved article at a time, which
//! newly extracted values to accept and which query template to issue next.

pub mod corpus;
pub mod dqn;
pub mod error;
pub mod eval;
pub mod extractor;
pub mod mdp;
pub mod pipeline;
pub mod retrieval;
pub mod text;
pub mod util;

pub use error::{Error, Result};
