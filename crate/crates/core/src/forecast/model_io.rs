//! Text model container.
//!
//! ```text
//! dispatchkit-lstm 1
//! input_dim 1
//! hidden_dim 32
//! output_dim 48
//! normalizer_min 0.213
//! normalizer_max 0.95
//! array forget.w 32
//! <values, whitespace separated>
//! ...
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so write→read is
//! bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::params::{LstmDims, LstmParams};
use super::train::TrainedModel;
use super::window::Normalizer;
use super::ForecastError;

const MAGIC: &str = "dispatchkit-lstm";
const VERSION: u32 = 1;

pub fn model_to_string(model: &TrainedModel) -> String {
    let p = &model.params;
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(s, "input_dim {}", p.dims.input);
    let _ = writeln!(s, "hidden_dim {}", p.dims.hidden);
    let _ = writeln!(s, "output_dim {}", p.dims.output);
    let _ = writeln!(s, "normalizer_min {:?}", model.normalizer.min());
    let _ = writeln!(s, "normalizer_max {:?}", model.normalizer.max());
    for (name, values) in p.arrays() {
        let _ = writeln!(s, "array {name} {}", values.len());
        let line: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

fn corrupt(line: usize, message: impl Into<String>) -> ForecastError {
    ForecastError::ModelFile {
        line,
        message: message.into(),
    }
}

pub fn model_from_str(text: &str) -> Result<TrainedModel, ForecastError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| corrupt(0, format!("missing {what}")))
    };

    let (n, head) = next("header")?;
    if head != format!("{MAGIC} {VERSION}") {
        return Err(corrupt(n, format!("expected '{MAGIC} {VERSION}'")));
    }
    let mut field = |key: &str| -> Result<(usize, String), ForecastError> {
        let (n, l) = next(key)?;
        let (k, v) = l
            .split_once(' ')
            .ok_or_else(|| corrupt(n, format!("expected '{key} <value>'")))?;
        if k != key {
            return Err(corrupt(n, format!("expected key {key}, found {k}")));
        }
        Ok((n, v.trim().to_string()))
    };
    let parse_usize = |(n, v): (usize, String)| {
        v.parse::<usize>()
            .map_err(|_| corrupt(n, format!("bad integer '{v}'")))
    };
    let parse_f64 = |(n, v): (usize, String)| {
        v.parse::<f64>()
            .map_err(|_| corrupt(n, format!("bad number '{v}'")))
    };
    let dims = LstmDims {
        input: parse_usize(field("input_dim")?)?,
        hidden: parse_usize(field("hidden_dim")?)?,
        output: parse_usize(field("output_dim")?)?,
    };
    let norm_min = parse_f64(field("normalizer_min")?)?;
    let norm_max = parse_f64(field("normalizer_max")?)?;
    let normalizer = Normalizer::new(norm_min, norm_max)?;
    if dims.input == 0 || dims.hidden == 0 || dims.output == 0 || dims.hidden > 4096 {
        return Err(corrupt(2, format!("implausible dimensions {dims:?}")));
    }

    let mut params = LstmParams::zeros(dims);
    let mut result = Ok(());
    params.for_each_array_mut(|name, dst| {
        if result.is_err() {
            return;
        }
        result = (|| {
            let (n, decl) = next("array header")?;
            let parts: Vec<&str> = decl.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "array" || parts[1] != name {
                return Err(corrupt(n, format!("expected 'array {name} <len>'")));
            }
            if parts[2].parse::<usize>().ok() != Some(dst.len()) {
                return Err(corrupt(
                    n,
                    format!("{name} should hold {} values", dst.len()),
                ));
            }
            let (n, body) = next("array values")?;
            let mut count = 0;
            for (slot, tok) in dst.iter_mut().zip(body.split_whitespace()) {
                *slot = tok
                    .parse::<f64>()
                    .map_err(|_| corrupt(n, format!("bad number '{tok}' in {name}")))?;
                count += 1;
            }
            if count != dst.len() || body.split_whitespace().count() != dst.len() {
                return Err(corrupt(n, format!("{name}: wrong number of values")));
            }
            Ok(())
        })();
    });
    result?;
    if let Some((n, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(corrupt(n, format!("trailing content '{extra}'")));
    }
    params.validate()?;
    Ok(TrainedModel { params, normalizer })
}

pub fn write_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), ForecastError> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(model)).map_err(|source| ForecastError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_model(path: impl AsRef<Path>) -> Result<TrainedModel, ForecastError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ForecastError::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_str(&text)
}
