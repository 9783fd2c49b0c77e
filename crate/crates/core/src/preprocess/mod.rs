//! Feature engineering and per-zone design-matrix assembly.
//!
//! Each zone's matrix carries 76 weekly features: per-station water-column
//! aggregates, estuary-wide solar and upwelling means, the week number, and
//! the target zone's Friday open/closed status. The label is the zone's
//! status on the following Monday.

pub mod features;
pub mod matrix;
pub mod scaler;

pub use features::{
    chlorophyll_weekly, column_mean_0_12, friday_status, monday_label, seasonality,
    stratification_differential, weekly_mean_meteo, weekly_mean_upwelling, MeteoField,
    ProfileField,
};
pub use matrix::{
    assemble_zone_matrix, drop_null_rows, load_design_matrix, save_design_matrix, DesignMatrix,
    FeatureVector, LabeledMatrix,
};
pub use scaler::MinMaxScaler;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("all source values missing for {what}")]
    AllMissing { what: &'static str },
    #[error("no values in the {band} band")]
    BandMissing { band: &'static str },
    #[error("no {zone} status recorded for Monday {monday}")]
    LabelMissing { zone: String, monday: String },
    #[error("matrix has missing cells; drop null rows first")]
    IncompleteMatrix,
    #[error("no station records to assemble from")]
    EmptyDataset,
    #[error("{0}")]
    Io(String),
}
