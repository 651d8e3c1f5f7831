//! Day-ahead LSTM forecaster written from scratch: cell, BPTT, ADAM,
//! windowing, training and a text model format.

pub mod adam;
pub mod lstm;
pub mod model_io;
pub mod params;
pub mod train;
pub mod window;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use lstm::{backward, cell_step, forward, Gradient, LstmState};
pub use model_io::{read_model, write_model};
pub use params::{Gate, LstmDims, LstmParams};
pub use train::{
    predict_day, train, EpochLoss, SplitMode, TrainedModel, TrainingConfig, TrainingOutcome,
};
pub use window::{make_windows, Normalizer, WindowSample, HISTORY_DAYS, HISTORY_SLOTS};

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("insufficient history: need {needed_days} days, got {got_slots} slots")]
    InsufficientHistory {
        needed_days: usize,
        got_slots: usize,
    },
    #[error("corrupt model file (line {line}): {message}")]
    ModelFile { line: usize, message: String },
    #[error("I/O error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
