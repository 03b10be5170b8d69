//! IO, file formats, the OpenAlex client and pipeline orchestration around
//! `confab-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dataset;
pub mod demo;
pub mod error;
pub mod openalex;
pub mod output;
pub mod pipeline;
pub mod published;

pub use config::RunConfig;
pub use error::{AppError, AppResult};
pub use pipeline::Pipeline;
