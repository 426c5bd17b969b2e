use std::io::Write;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("no trace rows to write")]
    Empty,
    #[error("label `{name}` repeats or decreases at j = {j}")]
    NotIncreasing { name: String, j: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub j: usize,
    pub name: String,
    pub value: f64,
}

/// Labelled series of measurements; `j` strictly increases per label.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// `values[i]` becomes the row `(i + 1, name, values[i])`.
    pub fn from_series(name: &str, values: &[f64]) -> Self {
        Self {
            rows: values
                .iter()
                .enumerate()
                .map(|(i, &value)| TraceRow {
                    j: i + 1,
                    name: name.to_string(),
                    value,
                })
                .collect(),
        }
    }

    pub fn push(&mut self, j: usize, name: &str, value: f64) -> Result<(), TraceError> {
        if let Some(last) = self.rows.iter().rev().find(|r| r.name == name) {
            if j <= last.j {
                return Err(TraceError::NotIncreasing { name: name.into(), j });
            }
        }
        self.rows.push(TraceRow {
            j,
            name: name.into(),
            value,
        });
        Ok(())
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.rows.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    /// Values of one label in `j` order.
    pub fn series(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.name == name).map(|r| r.value).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// CSV with header `j,name,value`, rows sorted by `(name, j)`. Values use
/// the shortest round-trip representation, so output is deterministic.
pub fn write_traces_csv<W: Write>(traces: &[ConvergenceTrace], out: W) -> Result<(), TraceError> {
    let mut rows: Vec<&TraceRow> = traces.iter().flat_map(|t| t.rows.iter()).collect();
    if rows.is_empty() {
        return Err(TraceError::Empty);
    }
    rows.sort_by(|a, b| a.name.cmp(&b.name).then(a.j.cmp(&b.j)));
    for pair in rows.windows(2) {
        if pair[0].name == pair[1].name && pair[0].j == pair[1].j {
            return Err(TraceError::NotIncreasing {
                name: pair[1].name.clone(),
                j: pair[1].j,
            });
        }
    }
    // The header comes from the `TraceRow` field names.
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
