//! Library backing the `spikenet` binary: configuration, experiment
//! execution, report writing, figures, and report verification.
//!
//! The binary is a thin argument-parsing shell; everything it does is
//! callable (and tested) through these modules.

pub mod config;
pub mod report;
pub mod run;
pub mod svg;
pub mod verify;
