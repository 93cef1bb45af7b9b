//! Building blocks for critique-based video caption curation.

pub mod critique;
pub mod export;
pub mod gateway;
pub mod instructions;
pub mod metrics;
pub mod prompts;
pub mod reward;
pub mod schema;
pub mod seed;
pub mod service;
pub mod triplet;
pub mod workflow;

pub use gateway::{GatewayError, MockModel, ModelClient, ModelRequest, ModelResponse};
pub use schema::{validate_record, AspectKind, PrimitiveLabelRecord, ValidationReport};
pub use triplet::{AspectTriplet, TripletRecord, NO_EDIT_CRITIQUE};
