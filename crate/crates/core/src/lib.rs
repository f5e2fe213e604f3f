//! Feature extraction from legislative committee-hearing transcripts:
//! public commenters' organizational affiliations and stances, legislator
//! engagement scores and absentee detection.

pub mod absentee;
pub mod affiliation;
pub mod analytics;
pub mod augment;
pub mod engagement;
pub mod error;
pub mod evaluation;
pub mod gazetteer;
pub mod pipeline;
pub mod stance;
pub mod transcript;

pub use error::{Error, Result};
