use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ForecastError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmDims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl LstmDims {
    /// Scalar input, `hidden` units, one day (48 values) out.
    pub fn day_ahead(hidden: usize) -> Self {
        Self {
            input: 1,
            hidden,
            output: crate::series::SLOTS_PER_DAY,
        }
    }
}

/// Gate order used everywhere (storage, gradients, model files).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Forget,
    Input,
    Output,
    Candidate,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Forget, Gate::Input, Gate::Output, Gate::Candidate];

    pub fn name(self) -> &'static str {
        match self {
            Gate::Forget => "forget",
            Gate::Input => "input",
            Gate::Output => "output",
            Gate::Candidate => "candidate",
        }
    }
}

/// Weights of one gate: `w` is hidden×input, `u` hidden×hidden (both
/// row-major), `b` has one entry per hidden unit.
#[derive(Debug, Clone, PartialEq)]
pub struct GateWeights {
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

impl GateWeights {
    fn zeros(dims: LstmDims) -> Self {
        Self {
            w: vec![0.0; dims.hidden * dims.input],
            u: vec![0.0; dims.hidden * dims.hidden],
            b: vec![0.0; dims.hidden],
        }
    }
}

/// Single-layer LSTM with a dense head on the final hidden state. Also used
/// as the gradient and ADAM-moment container, since the shapes match.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub dims: LstmDims,
    /// Indexed by `Gate as usize`.
    pub gates: [GateWeights; 4],
    /// output×hidden, row-major.
    pub head_w: Vec<f64>,
    pub head_b: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(dims: LstmDims) -> Self {
        Self {
            dims,
            gates: std::array::from_fn(|_| GateWeights::zeros(dims)),
            head_w: vec![0.0; dims.output * dims.hidden],
            head_b: vec![0.0; dims.output],
        }
    }

    /// Uniform in `[-1/√H, 1/√H]` for every entry, drawn in storage order from
    /// ChaCha8 seeded with `seed`; the forget-gate bias is then set to 1.
    pub fn init(dims: LstmDims, seed: u64) -> Self {
        let mut p = Self::zeros(dims);
        let bound = 1.0 / (dims.hidden as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        p.for_each_array_mut(|_, a| {
            for v in a.iter_mut() {
                *v = rng.gen_range(-bound..=bound);
            }
        });
        p.gates[Gate::Forget as usize].b.fill(1.0);
        p
    }

    pub fn gate(&self, g: Gate) -> &GateWeights {
        &self.gates[g as usize]
    }

    pub fn gate_mut(&mut self, g: Gate) -> &mut GateWeights {
        &mut self.gates[g as usize]
    }

    /// Named arrays in storage order: `<gate>.w`, `<gate>.u`, `<gate>.b` for
    /// each gate, then `head.w`, `head.b`.
    pub fn arrays(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::with_capacity(14);
        for g in Gate::ALL {
            let gw = self.gate(g);
            out.push((format!("{}.w", g.name()), &gw.w));
            out.push((format!("{}.u", g.name()), &gw.u));
            out.push((format!("{}.b", g.name()), &gw.b));
        }
        out.push(("head.w".into(), &self.head_w));
        out.push(("head.b".into(), &self.head_b));
        out
    }

    pub fn for_each_array_mut(&mut self, mut f: impl FnMut(&str, &mut [f64])) {
        for g in Gate::ALL {
            let name = g.name();
            let gw = &mut self.gates[g as usize];
            f(&format!("{name}.w"), &mut gw.w);
            f(&format!("{name}.u"), &mut gw.u);
            f(&format!("{name}.b"), &mut gw.b);
        }
        f("head.w", &mut self.head_w);
        f("head.b", &mut self.head_b);
    }

    /// Expected length of each named array for these dims.
    pub fn expected_len(dims: LstmDims, name: &str) -> Option<usize> {
        let (h, i, o) = (dims.hidden, dims.input, dims.output);
        match name.rsplit_once('.')? {
            ("head", "w") => Some(o * h),
            ("head", "b") => Some(o),
            (g, suffix) if Gate::ALL.iter().any(|x| x.name() == g) => match suffix {
                "w" => Some(h * i),
                "u" => Some(h * h),
                "b" => Some(h),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn param_count(&self) -> usize {
        self.arrays().iter().map(|(_, a)| a.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.arrays()
            .into_iter()
            .flat_map(|(_, a)| a.iter().copied())
            .collect()
    }

    /// Checks shapes against `dims` and that every entry is finite.
    pub fn validate(&self) -> Result<(), ForecastError> {
        let d = self.dims;
        if d.input == 0 || d.hidden == 0 || d.output == 0 {
            return Err(ForecastError::Shape(format!("zero dimension in {d:?}")));
        }
        for (name, a) in self.arrays() {
            let want = Self::expected_len(d, &name).expect("known array name");
            if a.len() != want {
                return Err(ForecastError::Shape(format!(
                    "{name} has {} entries, expected {want}",
                    a.len()
                )));
            }
            if let Some(v) = a.iter().find(|v| !v.is_finite()) {
                return Err(ForecastError::NonFinite(format!("{name} contains {v}")));
            }
        }
        Ok(())
    }

    pub fn sq_norm(&self) -> f64 {
        self.arrays()
            .iter()
            .flat_map(|(_, a)| a.iter())
            .map(|v| v * v)
            .sum()
    }

    pub fn scale(&mut self, k: f64) {
        self.for_each_array_mut(|_, a| a.iter_mut().for_each(|v| *v *= k));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded_and_bounded() {
        let dims = LstmDims::day_ahead(16);
        let a = LstmParams::init(dims, 11);
        let b = LstmParams::init(dims, 11);
        let c = LstmParams::init(dims, 12);
        assert_eq!(a, b);
        assert_ne!(a, c);
        a.validate().unwrap();
        let bound = 0.25;
        for (name, arr) in a.arrays() {
            if name == "forget.b" {
                assert!(arr.iter().all(|&v| v == 1.0));
            } else {
                assert!(arr.iter().all(|v| v.abs() <= bound), "{name}");
            }
        }
        // 4 gates × (16·1 + 16·16 + 16) + 48·16 + 48
        assert_eq!(a.param_count(), 4 * (16 + 256 + 16) + 768 + 48);
    }

    #[test]
    fn validate_catches_shape_and_nan() {
        let mut p = LstmParams::zeros(LstmDims {
            input: 1,
            hidden: 2,
            output: 3,
        });
        p.validate().unwrap();
        p.head_b.push(0.0);
        assert!(matches!(p.validate(), Err(ForecastError::Shape(_))));
        p.head_b.pop();
        p.gates[2].u[1] = f64::NAN;
        assert!(matches!(p.validate(), Err(ForecastError::NonFinite(_))));
    }
}
