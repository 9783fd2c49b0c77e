//! Weekly open/closed forecasting for mussel production areas.
//!
//! The crate covers the full desk-scale pipeline: parsing raw monitoring
//! records, engineering the 76 weekly features per zone, two-stage feature
//! selection, four classifier families under 10-fold cross-validated grid
//! search, closure-positive evaluation metrics, a parametric significance
//! suite, and a seeded synthetic-estuary generator that stands in for the
//! proprietary monitoring feeds.

pub mod domain;
pub mod eval;
pub mod featsel;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod stats;
pub mod synth;
