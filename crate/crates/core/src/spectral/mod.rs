//! Power series of the weight matrix A(β) and what they say about recurrence.

mod classify;
mod entropy;
mod matrix;
mod series;

pub use classify::{
    classify_beta_set, classify_recurrence, BetaSetShape, LoopSign, NwStatus, Recurrence, RecurrenceReport,
    TemperatureClassification,
};
pub use entropy::{gurevich_entropy, perron, EntropyEstimate, PerronValue};
pub use matrix::WeightMatrix;
pub use series::{
    first_return_series, green_column, green_function, green_row, simple_path_column, simple_path_sum, Controls,
    SeriesEstimate, SeriesStatus, VectorEstimate,
};
pub(crate) use series::{green_column_with, green_with, run_series, run_vector_series, Monitor, Step, Verdict};
