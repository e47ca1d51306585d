//! Braking-scenario mining from recorded driving logs.
//!
//! The pipeline runs [`preprocess`] → [`tagger`] → [`koi`] → [`describer`] →
//! [`llm_gateway`] → [`scenario_store`], with [`eval`] scoring the output and
//! [`synthkit`] producing labelled synthetic logs.

pub mod model;
pub mod preprocess;
pub mod tagger;
pub mod koi;
pub mod describer;
pub mod llm_gateway;
pub mod scenario_store;
pub mod eval;
pub mod synthkit;
