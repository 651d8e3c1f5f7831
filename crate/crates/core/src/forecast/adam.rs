use super::params::LstmParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: LstmParams,
    pub v: LstmParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(like: &LstmParams) -> Self {
        Self {
            m: LstmParams::zeros(like.dims),
            v: LstmParams::zeros(like.dims),
            t: 0,
        }
    }
}

/// One bias-corrected ADAM update, in place.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut LstmParams,
    grads: &LstmParams,
    cfg: &AdamConfig,
) {
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let mut ps = Vec::with_capacity(14);
    let mut ms = Vec::with_capacity(14);
    let mut vs = Vec::with_capacity(14);
    collect_mut(params, &mut ps);
    collect_mut(&mut state.m, &mut ms);
    collect_mut(&mut state.v, &mut vs);
    for (((p, m), v), (_, g)) in ps.into_iter().zip(ms).zip(vs).zip(grads.arrays()) {
        for k in 0..p.len() {
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            p[k] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
}

fn collect_mut<'a>(p: &'a mut LstmParams, out: &mut Vec<&'a mut [f64]>) {
    for gw in p.gates.iter_mut() {
        out.push(&mut gw.w);
        out.push(&mut gw.u);
        out.push(&mut gw.b);
    }
    out.push(&mut p.head_w);
    out.push(&mut p.head_b);
}
