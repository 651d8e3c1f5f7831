//! Batch-size-1 ADAM training over day-ahead windows.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::series::{YearSeries, SLOTS_PER_DAY};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::lstm::{backward_masked, forward, mse};
use super::params::{LstmDims, LstmParams};
use super::window::{make_windows, window_days, Normalizer, WindowSample, HISTORY_SLOTS};
use super::ForecastError;

/// How window samples are divided into training and validation sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Earliest target days train, latest validate.
    Chronological,
    /// Seeded shuffle before splitting.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub train_fraction: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub hidden_dim: usize,
    pub split: SplitMode,
    /// Global-norm gradient clipping threshold; `None` disables clipping.
    pub clip_norm: Option<f64>,
    /// Inverted-dropout rate on the final hidden state during training.
    pub dropout: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 50,
            batch_size: 1,
            train_fraction: 0.8,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 42,
            hidden_dim: 32,
            split: SplitMode::Chronological,
            clip_norm: Some(5.0),
            dropout: 0.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), ForecastError> {
        let bad = |m: String| Err(ForecastError::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if self.batch_size != 1 {
            return bad(format!(
                "only batch_size 1 is supported, got {}",
                self.batch_size
            ));
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        if matches!(self.clip_norm, Some(c) if !(c > 0.0)) {
            return bad("clip_norm must be positive".into());
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

/// A fitted forecaster: weights plus the scaling they were trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: LstmParams,
    pub normalizer: Normalizer,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub model: TrainedModel,
    /// Entry 0 is the untrained network, then one entry per epoch.
    pub history: Vec<EpochLoss>,
    pub train_days: Vec<u16>,
    pub val_days: Vec<u16>,
}

/// Splits the window target days into (train, validation).
pub fn split_days(
    target_days: &[u16],
    train_fraction: f64,
    mode: SplitMode,
    seed: u64,
) -> (Vec<u16>, Vec<u16>) {
    let n = target_days.len();
    let n_train = ((n as f64 * train_fraction).floor() as usize).clamp(1, n.saturating_sub(1));
    let mut order = target_days.to_vec();
    if mode == SplitMode::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(3);
        order.shuffle(&mut rng);
    }
    let val = order.split_off(n_train);
    (order, val)
}

pub fn mean_loss(params: &LstmParams, samples: &[&WindowSample]) -> Result<f64, ForecastError> {
    if samples.is_empty() {
        return Ok(f64::NAN);
    }
    let mut total = 0.0;
    for s in samples {
        total += mse(&forward(params, &s.input)?, &s.target);
    }
    Ok(total / samples.len() as f64)
}

/// Trains one network on one series.
pub fn train(
    series: &YearSeries,
    config: &TrainingConfig,
) -> Result<TrainingOutcome, ForecastError> {
    config.validate()?;
    let all_days: Vec<u16> =
        (super::window::FIRST_TARGET_DAY..=crate::series::DAYS_PER_YEAR as u16).collect();
    let (train_days, val_days) =
        split_days(&all_days, config.train_fraction, config.split, config.seed);

    let mut touched = vec![false; crate::series::DAYS_PER_YEAR + 1];
    for &d in &train_days {
        for day in window_days(d) {
            touched[day as usize] = true;
        }
    }
    let normalizer = Normalizer::fit(
        (1..=crate::series::DAYS_PER_YEAR as u16)
            .filter(|&d| touched[d as usize])
            .flat_map(|d| series.day(d).iter().copied()),
    )?;

    let windows = make_windows(series, &normalizer);
    let by_day = |d: u16| &windows[(d - super::window::FIRST_TARGET_DAY) as usize];
    let train_set: Vec<&WindowSample> = train_days.iter().map(|&d| by_day(d)).collect();
    let val_set: Vec<&WindowSample> = val_days.iter().map(|&d| by_day(d)).collect();

    let mut params = LstmParams::init(LstmDims::day_ahead(config.hidden_dim), config.seed);
    let mut adam = AdamState::new(&params);
    let adam_cfg = config.adam();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(4);

    let mut history = Vec::with_capacity(config.epochs + 1);
    history.push(EpochLoss {
        epoch: 0,
        train_mse: mean_loss(&params, &train_set)?,
        val_mse: mean_loss(&params, &val_set)?,
    });

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let keep = 1.0 - config.dropout;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let sample = train_set[k];
            let mask: Option<Vec<f64>> = (config.dropout > 0.0).then(|| {
                (0..config.hidden_dim)
                    .map(|_| {
                        if rng.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect()
            });
            let mut g = backward_masked(&params, &sample.input, &sample.target, mask.as_deref())?;
            if let Some(limit) = config.clip_norm {
                let norm = g.grads.sq_norm().sqrt();
                if norm > limit {
                    g.grads.scale(limit / norm);
                }
            }
            adam_step(&mut adam, &mut params, &g.grads, &adam_cfg);
        }
        history.push(EpochLoss {
            epoch,
            train_mse: mean_loss(&params, &train_set)?,
            val_mse: mean_loss(&params, &val_set)?,
        });
    }
    params.validate()?;

    Ok(TrainingOutcome {
        model: TrainedModel { params, normalizer },
        history,
        train_days,
        val_days,
    })
}

impl TrainedModel {
    /// Predicts the day after `history` (kW, clamped at 0). Uses the last 29
    /// days of `history`.
    pub fn predict_day(&self, history: &[f64]) -> Result<Vec<f64>, ForecastError> {
        predict_day(&self.params, &self.normalizer, history)
    }
}

pub fn predict_day(
    params: &LstmParams,
    normalizer: &Normalizer,
    history: &[f64],
) -> Result<Vec<f64>, ForecastError> {
    if history.len() < HISTORY_SLOTS {
        return Err(ForecastError::InsufficientHistory {
            needed_days: HISTORY_SLOTS / SLOTS_PER_DAY,
            got_slots: history.len(),
        });
    }
    let input: Vec<f64> = history[history.len() - HISTORY_SLOTS..]
        .iter()
        .map(|&v| normalizer.normalize(v))
        .collect();
    let out = forward(params, &input)?;
    Ok(out
        .into_iter()
        .map(|y| normalizer.denormalize(y).max(0.0))
        .collect())
}

/// `epoch,train_mse,val_mse` CSV.
pub fn history_csv(history: &[EpochLoss]) -> String {
    let mut s = String::from("epoch,train_mse,val_mse\n");
    for h in history {
        s.push_str(&format!("{},{:e},{:e}\n", h.epoch, h.train_mse, h.val_mse));
    }
    s
}
