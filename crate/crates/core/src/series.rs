//! Half-hourly power series for one non-leap year.
//!
//! Samples are average power in kW over a 30 minute slot, stored densely by
//! linear index `(day - 1) * 48 + slot`. Values are held at micro-kW
//! resolution so that the canonical CSV form (6 decimals) round-trips
//! bit-exactly.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

pub const DAYS_PER_YEAR: usize = 365;
pub const SLOTS_PER_DAY: usize = 48;
pub const SLOTS_PER_YEAR: usize = DAYS_PER_YEAR * SLOTS_PER_DAY;
/// Slot length in hours.
pub const SLOT_HOURS: f64 = 0.5;

const CSV_HEADER: &str = "day,slot,kw";

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("I/O error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {message}")]
    Parse { row: u64, message: String },
    #[error("row {row}: missing slot (day {day}, slot {slot})")]
    MissingSlot { row: u64, day: u16, slot: u8 },
    #[error("row {row}: duplicate or out-of-order slot (day {day}, slot {slot})")]
    DuplicateSlot { row: u64, day: u16, slot: u8 },
    #[error("row {row}: negative value {value} at day {day}, slot {slot}")]
    NegativeValue {
        row: u64,
        day: u16,
        slot: u8,
        value: f64,
    },
    #[error("row {row}: day {day} slot {slot} is outside the year grid")]
    OutOfRange { row: u64, day: i64, slot: i64 },
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("series must hold {expected} samples, got {found}")]
    Length { expected: usize, found: usize },
    #[error("sample {index} is not a finite non-negative power: {value}")]
    InvalidSample { index: usize, value: f64 },
    #[error("history must contain whole consecutive days, got {rows} rows")]
    PartialDay { rows: usize },
}

/// One half-hour slot of the year. `day` is 1-based, `slot` 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeSlot {
    day: u16,
    slot: u8,
}

impl TimeSlot {
    pub fn new(day: u16, slot: u8) -> Option<Self> {
        if (1..=DAYS_PER_YEAR as u16).contains(&day) && (slot as usize) < SLOTS_PER_DAY {
            Some(Self { day, slot })
        } else {
            None
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        if index >= SLOTS_PER_YEAR {
            return None;
        }
        Some(Self {
            day: (index / SLOTS_PER_DAY) as u16 + 1,
            slot: (index % SLOTS_PER_DAY) as u8,
        })
    }

    pub fn index(self) -> usize {
        (self.day as usize - 1) * SLOTS_PER_DAY + self.slot as usize
    }

    pub fn day(self) -> u16 {
        self.day
    }

    pub fn slot(self) -> u8 {
        self.slot
    }

    /// Start of the slot in hours after midnight.
    pub fn start_hour(self) -> f64 {
        self.slot as f64 * SLOT_HOURS
    }

    pub fn all() -> impl Iterator<Item = TimeSlot> {
        (0..SLOTS_PER_YEAR).map(|i| TimeSlot::from_index(i).expect("index in range"))
    }
}

impl fmt::Display for TimeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "day {}, slot {}", self.day, self.slot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    Load,
    Pv,
}

impl SeriesKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKind::Load => "load",
            SeriesKind::Pv => "pv",
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SeriesKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "load" => Ok(SeriesKind::Load),
            "pv" => Ok(SeriesKind::Pv),
            other => Err(format!(
                "unknown series kind '{other}' (expected load or pv)"
            )),
        }
    }
}

/// Round to the micro-kW grid used by the canonical CSV form.
pub fn quantize(kw: f64) -> f64 {
    // `+ 0.0` folds -0.0 into 0.0
    (kw * 1e6).round() / 1e6 + 0.0
}

/// A complete year of half-hourly average-power samples.
#[derive(Debug, Clone, PartialEq)]
pub struct YearSeries {
    kind: SeriesKind,
    samples: Vec<f64>,
}

impl YearSeries {
    /// Builds a series from exactly 17,520 finite, non-negative samples.
    /// Values are snapped to micro-kW resolution.
    pub fn new(kind: SeriesKind, samples: Vec<f64>) -> Result<Self, SeriesError> {
        if samples.len() != SLOTS_PER_YEAR {
            return Err(SeriesError::Length {
                expected: SLOTS_PER_YEAR,
                found: samples.len(),
            });
        }
        let mut samples = samples;
        for (index, v) in samples.iter_mut().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(SeriesError::InvalidSample { index, value: *v });
            }
            *v = quantize(*v);
        }
        Ok(Self { kind, samples })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn at(&self, slot: TimeSlot) -> f64 {
        self.samples[slot.index()]
    }

    /// The 48 samples of a 1-based day.
    pub fn day(&self, day: u16) -> &[f64] {
        let start = (day as usize - 1) * SLOTS_PER_DAY;
        &self.samples[start..start + SLOTS_PER_DAY]
    }

    /// Samples for the inclusive 1-based day range `first..=last`.
    pub fn days(&self, first: u16, last: u16) -> &[f64] {
        let start = (first as usize - 1) * SLOTS_PER_DAY;
        let end = last as usize * SLOTS_PER_DAY;
        &self.samples[start..end]
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Row {
    line: u64,
    day: u16,
    slot: u8,
    value: f64,
}

fn io_err(path: &Path, source: std::io::Error) -> SeriesError {
    SeriesError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read_rows(path: &Path) -> Result<Vec<Row>, SeriesError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader.headers().map_err(|e| SeriesError::Parse {
        row: 1,
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != ["day", "slot", "kw"] {
        return Err(SeriesError::Parse {
            row: 1,
            message: format!("expected header '{CSV_HEADER}'"),
        });
    }

    let mut rows = Vec::with_capacity(SLOTS_PER_YEAR);
    for record in reader.records() {
        let record = record.map_err(|e| SeriesError::Parse {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(SeriesError::Parse {
                row: line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let int_field = |i: usize, name: &str| -> Result<i64, SeriesError> {
            record[i].parse::<i64>().map_err(|_| SeriesError::Parse {
                row: line,
                message: format!("non-numeric {name} '{}'", &record[i]),
            })
        };
        let day = int_field(0, "day")?;
        let slot = int_field(1, "slot")?;
        let value: f64 = record[2].parse().map_err(|_| SeriesError::Parse {
            row: line,
            message: format!("non-numeric kw '{}'", &record[2]),
        })?;
        let ts = u16::try_from(day)
            .ok()
            .zip(u8::try_from(slot).ok())
            .and_then(|(d, s)| TimeSlot::new(d, s))
            .ok_or(SeriesError::OutOfRange {
                row: line,
                day,
                slot,
            })?;
        if !value.is_finite() {
            return Err(SeriesError::Parse {
                row: line,
                message: format!("non-finite kw '{}'", &record[2]),
            });
        }
        if value < 0.0 {
            return Err(SeriesError::NegativeValue {
                row: line,
                day: ts.day,
                slot: ts.slot,
                value,
            });
        }
        rows.push(Row {
            line,
            day: ts.day,
            slot: ts.slot,
            value,
        });
    }
    Ok(rows)
}

/// Checks that rows run consecutively from `first` and returns their values.
fn consecutive_values(rows: &[Row], first: TimeSlot) -> Result<Vec<f64>, SeriesError> {
    let mut values = Vec::with_capacity(rows.len());
    for (expected, row) in (first.index()..).zip(rows) {
        let got = TimeSlot {
            day: row.day,
            slot: row.slot,
        }
        .index();
        if got > expected {
            let missing = TimeSlot::from_index(expected).expect("expected index in range");
            return Err(SeriesError::MissingSlot {
                row: row.line,
                day: missing.day,
                slot: missing.slot,
            });
        }
        if got < expected {
            return Err(SeriesError::DuplicateSlot {
                row: row.line,
                day: row.day,
                slot: row.slot,
            });
        }
        values.push(row.value);
    }
    Ok(values)
}

/// Reads a full-year series CSV (`day,slot,kw`, 17,520 rows sorted by slot).
pub fn load_series(path: impl AsRef<Path>, kind: SeriesKind) -> Result<YearSeries, SeriesError> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    let start = TimeSlot { day: 1, slot: 0 };
    let values = consecutive_values(&rows, start)?;
    if values.len() != SLOTS_PER_YEAR {
        return Err(SeriesError::RowCount {
            expected: SLOTS_PER_YEAR,
            found: values.len(),
        });
    }
    YearSeries::new(kind, values)
}

/// Reads a partial series in the same CSV schema: whole consecutive days,
/// starting at any day. Returns the flattened samples in time order.
pub fn load_history(path: impl AsRef<Path>) -> Result<Vec<f64>, SeriesError> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let start = TimeSlot::new(first.day, 0).expect("validated day");
    if first.slot != 0 {
        return Err(SeriesError::MissingSlot {
            row: first.line,
            day: first.day,
            slot: 0,
        });
    }
    let values = consecutive_values(&rows, start)?;
    if values.len() % SLOTS_PER_DAY != 0 {
        return Err(SeriesError::PartialDay { rows: values.len() });
    }
    Ok(values)
}

/// Writes rows `day,slot,kw` for `values`, starting at day `first_day`.
pub fn write_days(
    values: &[f64],
    first_day: u16,
    path: impl AsRef<Path>,
) -> Result<(), SeriesError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let offset = (first_day as usize - 1) * SLOTS_PER_DAY;
    let write_all = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for (i, v) in values.iter().enumerate() {
            let ts = TimeSlot::from_index(offset + i).expect("rows fit in the year");
            writeln!(w, "{},{},{:.6}", ts.day, ts.slot, v)?;
        }
        w.flush()
    };
    write_all(&mut w).map_err(|e| io_err(path, e))
}

/// Writes the canonical CSV form of a series.
pub fn write_series(series: &YearSeries, path: impl AsRef<Path>) -> Result<(), SeriesError> {
    write_days(&series.samples, 1, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::fmt::Write as _;

    fn constant_csv(skip: Option<(u16, u8)>, override_value: Option<(usize, &str)>) -> String {
        let mut s = String::from("day,slot,kw\n");
        for ts in TimeSlot::all() {
            if Some((ts.day(), ts.slot())) == skip {
                continue;
            }
            let v = match override_value {
                Some((i, v)) if i == ts.index() => v.to_string(),
                _ => "0.500000".to_string(),
            };
            writeln!(s, "{},{},{}", ts.day(), ts.slot(), v).unwrap();
        }
        s
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn index_bijection_covers_the_year() {
        for i in 0..SLOTS_PER_YEAR {
            let ts = TimeSlot::from_index(i).unwrap();
            assert_eq!(ts.index(), i);
            assert_eq!(TimeSlot::new(ts.day(), ts.slot()), Some(ts));
        }
        assert!(TimeSlot::from_index(SLOTS_PER_YEAR).is_none());
        assert!(TimeSlot::new(0, 0).is_none());
        assert!(TimeSlot::new(366, 0).is_none());
        assert!(TimeSlot::new(1, 48).is_none());
        assert_eq!(TimeSlot::new(365, 47).unwrap().index(), 17_519);
    }

    #[test]
    fn loads_complete_file() {
        let f = write_tmp(&constant_csv(None, None));
        let s = load_series(f.path(), SeriesKind::Load).unwrap();
        assert_eq!(s.samples().len(), 17_520);
        assert!(s.samples().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn missing_slot_is_named() {
        let f = write_tmp(&constant_csv(Some((3, 17)), None));
        let err = load_series(f.path(), SeriesKind::Load).unwrap_err();
        match err {
            SeriesError::MissingSlot { day, slot, .. } => assert_eq!((day, slot), (3, 17)),
            other => panic!("unexpected error {other}"),
        }
        assert!(load_series(f.path(), SeriesKind::Load)
            .unwrap_err()
            .to_string()
            .contains("day 3, slot 17"));
    }

    #[test]
    fn negative_value_rejected() {
        let f = write_tmp(&constant_csv(None, Some((100, "-0.1"))));
        let err = load_series(f.path(), SeriesKind::Load).unwrap_err();
        assert!(
            matches!(err, SeriesError::NegativeValue { row: 102, .. }),
            "{err}"
        );
    }

    #[test]
    fn non_numeric_field_rejected_with_row() {
        let f = write_tmp(&constant_csv(None, Some((5, "abc"))));
        let err = load_series(f.path(), SeriesKind::Load).unwrap_err();
        assert!(matches!(err, SeriesError::Parse { row: 7, .. }), "{err}");
    }

    #[test]
    fn duplicate_slot_rejected() {
        let mut text = constant_csv(None, None);
        text = text.replacen("1,1,0.500000\n", "1,0,0.500000\n", 1);
        let f = write_tmp(&text);
        let err = load_series(f.path(), SeriesKind::Load).unwrap_err();
        assert!(
            matches!(
                err,
                SeriesError::DuplicateSlot {
                    day: 1,
                    slot: 0,
                    row: 3
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn truncated_file_is_a_row_count_error() {
        let text: String = constant_csv(None, None)
            .lines()
            .take(1 + 48 * 10)
            .map(|l| format!("{l}\n"))
            .collect();
        let f = write_tmp(&text);
        let err = load_series(f.path(), SeriesKind::Pv).unwrap_err();
        assert!(
            matches!(err, SeriesError::RowCount { found: 480, .. }),
            "{err}"
        );
    }

    #[test]
    fn empty_path_is_io_error() {
        let s = YearSeries::new(SeriesKind::Load, vec![0.3; SLOTS_PER_YEAR]).unwrap();
        assert!(matches!(write_series(&s, ""), Err(SeriesError::Io { .. })));
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(YearSeries::new(SeriesKind::Load, vec![0.0; 10]).is_err());
        let mut v = vec![0.0; SLOTS_PER_YEAR];
        v[9] = -1.0;
        assert!(matches!(
            YearSeries::new(SeriesKind::Load, v),
            Err(SeriesError::InvalidSample { index: 9, .. })
        ));
    }

    #[test]
    fn history_requires_whole_days() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        write_days(&[0.25; 96], 40, &p).unwrap();
        let h = load_history(&p).unwrap();
        assert_eq!(h.len(), 96);

        let text = std::fs::read_to_string(&p).unwrap();
        let truncated: String = text.lines().take(50).map(|l| format!("{l}\n")).collect();
        std::fs::write(&p, truncated).unwrap();
        assert!(matches!(
            load_history(&p),
            Err(SeriesError::PartialDay { rows: 49 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn write_then_load_is_identity(seed in any::<u64>(), scale in 0.0f64..50.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..SLOTS_PER_YEAR).map(|_| rng.gen::<f64>() * scale).collect();
            let s = YearSeries::new(SeriesKind::Pv, values).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let a = dir.path().join("a.csv");
            let b = dir.path().join("b.csv");
            write_series(&s, &a).unwrap();
            let back = load_series(&a, SeriesKind::Pv).unwrap();
            prop_assert_eq!(&back, &s);
            write_series(&back, &b).unwrap();
            prop_assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        }
    }
}
