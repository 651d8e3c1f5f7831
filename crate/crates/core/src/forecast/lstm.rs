//! LSTM cell, sequence forward pass and backpropagation through time.
//!
//! ```text
//! f = σ(W_f x + U_f h + b_f)      i = σ(W_i x + U_i h + b_i)
//! o = σ(W_o x + U_o h + b_o)      g = tanh(W_c x + U_c h + b_c)
//! c' = f ⊙ c + i ⊙ g              h' = o ⊙ tanh(c')
//! ```
//!
//! The sequence model runs the cell from a zero state over the whole input
//! and maps the last hidden state through a dense head. Loss is the mean
//! squared error over the head's outputs.

use super::params::{Gate, LstmDims, LstmParams};
use super::ForecastError;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Gate activations for one step: `[f, i, o, g]`, each of length H.
fn gate_activations(params: &LstmParams, x: &[f64], h: &[f64], out: &mut [Vec<f64>; 4]) {
    let LstmDims { input, hidden, .. } = params.dims;
    for gate in Gate::ALL {
        let gw = params.gate(gate);
        let dst = &mut out[gate as usize];
        for j in 0..hidden {
            let mut z = gw.b[j];
            let wrow = &gw.w[j * input..(j + 1) * input];
            for (w, xv) in wrow.iter().zip(x) {
                z += w * xv;
            }
            let urow = &gw.u[j * hidden..(j + 1) * hidden];
            for (u, hv) in urow.iter().zip(h) {
                z += u * hv;
            }
            dst[j] = match gate {
                Gate::Candidate => z.tanh(),
                _ => sigmoid(z),
            };
        }
    }
}

fn check_state(params: &LstmParams, state: &LstmState, x: &[f64]) -> Result<(), ForecastError> {
    let d = params.dims;
    if x.len() != d.input || state.h.len() != d.hidden || state.c.len() != d.hidden {
        return Err(ForecastError::Shape(format!(
            "cell expects x[{}], h[{}], c[{}]; got x[{}], h[{}], c[{}]",
            d.input,
            d.hidden,
            d.hidden,
            x.len(),
            state.h.len(),
            state.c.len()
        )));
    }
    Ok(())
}

/// One LSTM step.
pub fn cell_step(
    params: &LstmParams,
    state: &LstmState,
    x: &[f64],
) -> Result<LstmState, ForecastError> {
    check_state(params, state, x)?;
    let hsz = params.dims.hidden;
    let mut acts: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hsz]);
    gate_activations(params, x, &state.h, &mut acts);
    let [f, i, o, g] = &acts;
    let c: Vec<f64> = (0..hsz).map(|j| f[j] * state.c[j] + i[j] * g[j]).collect();
    let h = (0..hsz).map(|j| o[j] * c[j].tanh()).collect();
    Ok(LstmState { h, c })
}

fn check_sequence(params: &LstmParams, input: &[f64]) -> Result<usize, ForecastError> {
    params.validate()?;
    let d = params.dims;
    if input.is_empty() || !input.len().is_multiple_of(d.input) {
        return Err(ForecastError::Shape(format!(
            "input of length {} is not a whole number of {}-wide steps",
            input.len(),
            d.input
        )));
    }
    Ok(input.len() / d.input)
}

fn head(params: &LstmParams, h: &[f64]) -> Vec<f64> {
    let hsz = params.dims.hidden;
    (0..params.dims.output)
        .map(|k| {
            params.head_b[k]
                + params.head_w[k * hsz..(k + 1) * hsz]
                    .iter()
                    .zip(h)
                    .map(|(w, hv)| w * hv)
                    .sum::<f64>()
        })
        .collect()
}

/// Runs the sequence from a zero state and returns the head output.
pub fn forward(params: &LstmParams, input: &[f64]) -> Result<Vec<f64>, ForecastError> {
    let steps = check_sequence(params, input)?;
    let d = params.dims;
    let mut state = LstmState::zeros(d.hidden);
    let mut acts: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; d.hidden]);
    for t in 0..steps {
        let x = &input[t * d.input..(t + 1) * d.input];
        gate_activations(params, x, &state.h, &mut acts);
        let [f, i, o, g] = &acts;
        for j in 0..d.hidden {
            state.c[j] = f[j] * state.c[j] + i[j] * g[j];
            state.h[j] = o[j] * state.c[j].tanh();
        }
    }
    Ok(head(params, &state.h))
}

/// Mean squared error between a prediction and its target.
pub fn mse(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64
}

/// Loss and gradient for one sample.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub loss: f64,
    pub prediction: Vec<f64>,
    pub grads: LstmParams,
}

/// Full BPTT for the MSE loss of one `(input, target)` pair.
pub fn backward(
    params: &LstmParams,
    input: &[f64],
    target: &[f64],
) -> Result<Gradient, ForecastError> {
    backward_masked(params, input, target, None)
}

/// As [`backward`], with an optional multiplicative mask on the final hidden
/// state (inverted dropout in front of the head).
pub fn backward_masked(
    params: &LstmParams,
    input: &[f64],
    target: &[f64],
    head_mask: Option<&[f64]>,
) -> Result<Gradient, ForecastError> {
    let steps = check_sequence(params, input)?;
    let d = params.dims;
    let hsz = d.hidden;
    if target.len() != d.output {
        return Err(ForecastError::Shape(format!(
            "target has {} values, model outputs {}",
            target.len(),
            d.output
        )));
    }
    if let Some(m) = head_mask {
        if m.len() != hsz {
            return Err(ForecastError::Shape("dropout mask length".into()));
        }
    }

    // Per-step caches, H values each: gate activations, cell and hidden.
    let mut cache: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; steps * hsz]);
    let mut cs = vec![0.0; (steps + 1) * hsz];
    let mut hs = vec![0.0; (steps + 1) * hsz];
    let mut acts: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hsz]);
    for t in 0..steps {
        let x = &input[t * d.input..(t + 1) * d.input];
        let (h_prev, h_next) = hs.split_at_mut((t + 1) * hsz);
        gate_activations(params, x, &h_prev[t * hsz..], &mut acts);
        let [f, i, o, g] = &acts;
        for j in 0..hsz {
            let c = f[j] * cs[t * hsz + j] + i[j] * g[j];
            cs[(t + 1) * hsz + j] = c;
            h_next[j] = o[j] * c.tanh();
        }
        for k in 0..4 {
            cache[k][t * hsz..(t + 1) * hsz].copy_from_slice(&acts[k]);
        }
    }

    let h_last = &hs[steps * hsz..];
    let h_used: Vec<f64> = match head_mask {
        Some(m) => h_last.iter().zip(m).map(|(h, m)| h * m).collect(),
        None => h_last.to_vec(),
    };
    let prediction = head(params, &h_used);
    let loss = mse(&prediction, target);

    let mut grads = LstmParams::zeros(d);
    let dy: Vec<f64> = prediction
        .iter()
        .zip(target)
        .map(|(p, t)| 2.0 * (p - t) / d.output as f64)
        .collect();
    let mut dh = vec![0.0; hsz];
    for k in 0..d.output {
        grads.head_b[k] = dy[k];
        for j in 0..hsz {
            grads.head_w[k * hsz + j] = dy[k] * h_used[j];
            dh[j] += dy[k] * params.head_w[k * hsz + j];
        }
    }
    if let Some(m) = head_mask {
        for (g, m) in dh.iter_mut().zip(m) {
            *g *= m;
        }
    }

    let mut dc = vec![0.0; hsz];
    let mut dz: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hsz]);
    let mut dh_prev = vec![0.0; hsz];
    for t in (0..steps).rev() {
        let x = &input[t * d.input..(t + 1) * d.input];
        let h_prev = &hs[t * hsz..(t + 1) * hsz];
        let c_prev = &cs[t * hsz..(t + 1) * hsz];
        let c_now = &cs[(t + 1) * hsz..(t + 2) * hsz];
        let row = t * hsz..(t + 1) * hsz;
        let (f, i, o, g) = (
            &cache[0][row.clone()],
            &cache[1][row.clone()],
            &cache[2][row.clone()],
            &cache[3][row],
        );
        for j in 0..hsz {
            let tc = c_now[j].tanh();
            let d_o = dh[j] * tc;
            dc[j] += dh[j] * o[j] * (1.0 - tc * tc);
            let d_f = dc[j] * c_prev[j];
            let d_i = dc[j] * g[j];
            let d_g = dc[j] * i[j];
            dz[Gate::Forget as usize][j] = d_f * f[j] * (1.0 - f[j]);
            dz[Gate::Input as usize][j] = d_i * i[j] * (1.0 - i[j]);
            dz[Gate::Output as usize][j] = d_o * o[j] * (1.0 - o[j]);
            dz[Gate::Candidate as usize][j] = d_g * (1.0 - g[j] * g[j]);
            dc[j] *= f[j];
        }
        dh_prev.fill(0.0);
        for gate in Gate::ALL {
            let k = gate as usize;
            let gw = params.gate(gate);
            let gg = &mut grads.gates[k];
            for j in 0..hsz {
                let dzj = dz[k][j];
                if dzj == 0.0 {
                    continue;
                }
                gg.b[j] += dzj;
                for (a, xv) in gg.w[j * d.input..(j + 1) * d.input].iter_mut().zip(x) {
                    *a += dzj * xv;
                }
                let urow = &gw.u[j * hsz..(j + 1) * hsz];
                let grow = &mut gg.u[j * hsz..(j + 1) * hsz];
                for m in 0..hsz {
                    grow[m] += dzj * h_prev[m];
                    dh_prev[m] += urow[m] * dzj;
                }
            }
        }
        std::mem::swap(&mut dh, &mut dh_prev);
    }

    Ok(Gradient {
        loss,
        prediction,
        grads,
    })
}
