//! Long-format panel data: loading, validation, and the within-group
//! (time-demeaning) transformation.
//!
//! Rows are kept grouped by unit, units sorted by id and periods sorted by
//! time. Unbalanced panels are allowed; every unit needs at least two
//! periods because a single demeaned observation is identically zero.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit or time identifier. Integers sort numerically and before text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Text(String),
}

impl Label {
    /// Integers are recognised so that `9 < 10` orders as expected.
    pub fn parse(raw: &str) -> Label {
        let raw = raw.trim();
        match raw.parse::<i64>() {
            Ok(v) => Label::Int(v),
            Err(_) => Label::Text(raw.to_string()),
        }
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Label::Int(a), Label::Int(b)) => a.cmp(b),
            (Label::Int(_), Label::Text(_)) => Ordering::Less,
            (Label::Text(_), Label::Int(_)) => Ordering::Greater,
            (Label::Text(a), Label::Text(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(v) => write!(f, "{v}"),
            Label::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Label {
    fn from(v: i64) -> Self {
        Label::Int(v)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Text(s.to_string())
    }
}

/// Full time series of one unit: `T_i` periods, `k` regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSeries {
    pub id: Label,
    pub times: Vec<Label>,
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
}

impl UnitSeries {
    pub fn periods(&self) -> usize {
        self.times.len()
    }
}

/// Column mapping for long-format CSV input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub unit: String,
    pub time: String,
    pub response: String,
    pub regressors: Vec<String>,
}

impl ColumnSchema {
    pub fn new(
        unit: impl Into<String>,
        time: impl Into<String>,
        response: impl Into<String>,
        regressors: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        ColumnSchema {
            unit: unit.into(),
            time: time.into(),
            response: response.into(),
            regressors: regressors.into_iter().map(Into::into).collect(),
        }
    }
}

/// One long-format observation, before grouping by unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub unit: Label,
    pub time: Label,
    pub y: f64,
    pub x: Vec<f64>,
    /// Source line, used in error messages. Zero when not read from a file.
    pub line: u64,
}

/// A validated panel, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    response: String,
    regressors: Vec<String>,
    units: Vec<UnitSeries>,
}

impl PanelDataset {
    /// Validates and normalises unit-grouped series. Units are sorted by id.
    pub fn new(
        response: impl Into<String>,
        regressors: Vec<String>,
        mut units: Vec<UnitSeries>,
    ) -> Result<Self> {
        let k = regressors.len();
        if k == 0 {
            return Err(Error::InvalidPanel("at least one regressor is required".into()));
        }
        if units.len() < 2 {
            return Err(Error::InvalidPanel(format!(
                "at least 2 units are required, found {}",
                units.len()
            )));
        }
        units.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in units.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::InvalidPanel(format!("unit {} appears twice", pair[0].id)));
            }
        }
        for u in &units {
            let t = u.times.len();
            if u.y.len() != t || u.x.nrows() != t || u.x.ncols() != k {
                return Err(Error::InvalidPanel(format!(
                    "unit {}: inconsistent dimensions (times {}, y {}, x {}x{}, k {})",
                    u.id,
                    t,
                    u.y.len(),
                    u.x.nrows(),
                    u.x.ncols(),
                    k
                )));
            }
            if t < 2 {
                return Err(Error::TooFewPeriods {
                    unit: u.id.clone(),
                    periods: t,
                });
            }
            for w in u.times.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::UnorderedTimes {
                        unit: u.id.clone(),
                        previous: w[0].clone(),
                        next: w[1].clone(),
                    });
                }
            }
            if u.y.iter().chain(u.x.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidPanel(format!("unit {}: non-finite value", u.id)));
            }
        }
        Ok(PanelDataset {
            response: response.into(),
            regressors,
            units,
        })
    }

    /// Groups long-format rows by unit, sorting rows to (unit, time) order.
    pub fn from_observations(
        response: impl Into<String>,
        regressors: Vec<String>,
        observations: Vec<Observation>,
    ) -> Result<Self> {
        let k = regressors.len();
        let mut grouped: BTreeMap<Label, BTreeMap<Label, Observation>> = BTreeMap::new();
        for obs in observations {
            if obs.x.len() != k {
                return Err(Error::InvalidPanel(format!(
                    "line {}: expected {} regressor values, found {}",
                    obs.line,
                    k,
                    obs.x.len()
                )));
            }
            let series = grouped.entry(obs.unit.clone()).or_default();
            if series.contains_key(&obs.time) {
                return Err(Error::DuplicateObservation {
                    line: obs.line,
                    unit: obs.unit,
                    time: obs.time,
                });
            }
            series.insert(obs.time.clone(), obs);
        }
        let units = grouped
            .into_iter()
            .map(|(id, rows)| {
                let t = rows.len();
                let mut times = Vec::with_capacity(t);
                let mut y = DVector::zeros(t);
                let mut x = DMatrix::zeros(t, k);
                for (row, (time, obs)) in rows.into_iter().enumerate() {
                    times.push(time);
                    y[row] = obs.y;
                    for (c, v) in obs.x.iter().enumerate() {
                        x[(row, c)] = *v;
                    }
                }
                UnitSeries { id, times, y, x }
            })
            .collect();
        PanelDataset::new(response, regressors, units)
    }

    pub fn response_name(&self) -> &str {
        &self.response
    }

    pub fn regressor_names(&self) -> &[String] {
        &self.regressors
    }

    pub fn units(&self) -> &[UnitSeries] {
        &self.units
    }

    pub fn unit_ids(&self) -> Vec<Label> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    /// Position of a unit id in the sorted unit list.
    pub fn position(&self, id: &Label) -> Option<usize> {
        self.units.binary_search_by(|u| u.id.cmp(id)).ok()
    }

    /// Number of units, `N`.
    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    /// Number of regressors, `k` (no constant).
    pub fn k(&self) -> usize {
        self.regressors.len()
    }

    pub fn n_obs(&self) -> usize {
        self.units.iter().map(UnitSeries::periods).sum()
    }

    pub fn t_min(&self) -> usize {
        self.units.iter().map(UnitSeries::periods).min().unwrap_or(0)
    }

    pub fn t_max(&self) -> usize {
        self.units.iter().map(UnitSeries::periods).max().unwrap_or(0)
    }

    pub fn is_balanced(&self) -> bool {
        self.t_min() == self.t_max()
    }

    /// Subpanel with the given unit positions removed.
    pub fn without_units(&self, excluded: &BTreeSet<usize>) -> Result<PanelDataset> {
        let units = self
            .units
            .iter()
            .enumerate()
            .filter(|(i, _)| !excluded.contains(i))
            .map(|(_, u)| u.clone())
            .collect();
        PanelDataset::new(self.response.clone(), self.regressors.clone(), units)
    }

    /// Column schema matching what [`PanelDataset::write_csv`] emits.
    pub fn default_schema(&self) -> ColumnSchema {
        ColumnSchema::new("unit", "time", self.response.clone(), self.regressors.clone())
    }

    /// Writes the panel in long format. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["unit".to_string(), "time".to_string(), self.response.clone()];
        header.extend(self.regressors.iter().cloned());
        w.write_record(&header)?;
        for u in &self.units {
            for (t, time) in u.times.iter().enumerate() {
                let mut rec = vec![u.id.to_string(), time.to_string(), u.y[t].to_string()];
                rec.extend((0..self.k()).map(|c| u.x[(t, c)].to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn parse_number(raw: &str, column: &str, line: u64) -> Result<f64> {
    let raw = raw.trim();
    if raw.is_empty() || raw.eq_ignore_ascii_case("na") {
        return Err(Error::MissingValue {
            line,
            column: column.to_string(),
        });
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) if raw.eq_ignore_ascii_case("nan") => Err(Error::MissingValue {
            line,
            column: column.to_string(),
        }),
        _ => Err(Error::NonNumeric {
            line,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

/// Reads a long-format panel from any reader. A header row is required.
pub fn read_csv<R: Read>(reader: R, schema: &ColumnSchema) -> Result<PanelDataset> {
    if schema.regressors.is_empty() {
        return Err(Error::InvalidPanel("schema names no regressor columns".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let unit_col = find(&schema.unit)?;
    let time_col = find(&schema.time)?;
    let y_col = find(&schema.response)?;
    let x_cols = schema
        .regressors
        .iter()
        .map(|c| find(c))
        .collect::<Result<Vec<_>>>()?;

    let mut observations = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let cell = |idx: usize, name: &str| -> Result<&str> {
            match record.get(idx) {
                Some(v) if !v.trim().is_empty() => Ok(v),
                _ => Err(Error::MissingValue {
                    line,
                    column: name.to_string(),
                }),
            }
        };
        let unit = Label::parse(cell(unit_col, &schema.unit)?);
        let time = Label::parse(cell(time_col, &schema.time)?);
        let y = parse_number(record.get(y_col).unwrap_or(""), &schema.response, line)?;
        let x = x_cols
            .iter()
            .zip(&schema.regressors)
            .map(|(&c, name)| parse_number(record.get(c).unwrap_or(""), name, line))
            .collect::<Result<Vec<_>>>()?;
        observations.push(Observation {
            unit,
            time,
            y,
            x,
            line,
        });
    }
    PanelDataset::from_observations(
        schema.response.clone(),
        schema.regressors.clone(),
        observations,
    )
}

/// Loads and validates a long-format CSV panel.
pub fn load_csv(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<PanelDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), schema)
}

/// A unit's series after subtracting its own time means.
#[derive(Debug, Clone, PartialEq)]
pub struct DemeanedUnit {
    pub id: Label,
    pub times: Vec<Label>,
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
}

/// The within-group transformed panel. Unit order matches the source panel.
#[derive(Debug, Clone, PartialEq)]
pub struct DemeanedPanel {
    k: usize,
    units: Vec<DemeanedUnit>,
}

impl DemeanedPanel {
    pub fn units(&self) -> &[DemeanedUnit] {
        &self.units
    }

    pub fn unit(&self, i: usize) -> &DemeanedUnit {
        &self.units[i]
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn unit_ids(&self) -> Vec<Label> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    /// Stacked `NT x k` regressor matrix in unit order.
    pub fn stacked_x(&self) -> DMatrix<f64> {
        let rows: usize = self.units.iter().map(|u| u.x.nrows()).sum();
        let mut out = DMatrix::zeros(rows, self.k);
        let mut r0 = 0;
        for u in &self.units {
            out.rows_mut(r0, u.x.nrows()).copy_from(&u.x);
            r0 += u.x.nrows();
        }
        out
    }

    pub fn stacked_y(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.units.iter().map(|u| u.y.len()).sum(),
            self.units.iter().flat_map(|u| u.y.iter().copied()),
        )
    }
}

fn demean_vector(v: &DVector<f64>) -> DVector<f64> {
    let mean = v.mean();
    v.map(|e| e - mean)
}

fn demean_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.mean();
        col.apply(|e| *e -= mean);
    }
    out
}

/// Replaces each unit's series by deviations from that unit's own mean,
/// which annihilates unit fixed effects and any intercept.
pub fn within_group_transform(data: &PanelDataset) -> DemeanedPanel {
    let units = data
        .units()
        .iter()
        .map(|u| DemeanedUnit {
            id: u.id.clone(),
            times: u.times.clone(),
            y: demean_vector(&u.y),
            x: demean_columns(&u.x),
        })
        .collect();
    DemeanedPanel { k: data.k(), units }
}
