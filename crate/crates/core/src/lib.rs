//! Core algorithms for measuring citation confabulation in language models.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers:
//!
//! * [`citeparse`]: splitting raw model output into APA citations, parsing
//!   fields, title normalization and content-word overlap.
//! * [`verify`]: field-level verdicts, the weighted authenticity score,
//!   relevance weighting and verification status.
//! * [`works`]: external bibliographic records and top-candidate matching.
//! * [`refdata`]: the catalog types, deduplication and model×topic cells.
//! * [`fitlab`]: logistic (Levenberg–Marquardt) and least-squares fits,
//!   nested-model F tests, rank correlation, agreement statistics and
//!   bootstrap intervals.
//! * [`zipf`]: power-law exponent estimation.
//! * [`theory`]: the superposition recall-threshold model and the
//!   extrapolation formulas derived from a fitted logistic.
//! * [`citetail`]: the citation-count gradient across model sizes.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod citeparse;
pub mod citetail;
pub mod error;
pub mod fitlab;
pub mod linalg;
pub mod math;
pub mod refdata;
pub mod rng;
pub mod theory;
pub mod verify;
pub mod works;
pub mod zipf;

pub use error::{Error, Result};
