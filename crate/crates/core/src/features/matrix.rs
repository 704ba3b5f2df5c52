use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::Label;

/// Per-feature min/max fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::invalid("cannot fit scaling on zero rows"))?;
        let mut mins = first.clone();
        let mut maxs = first.clone();
        for r in rows {
            for (j, &v) in r.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Ok(MinMaxScaler { mins, maxs })
    }

    /// Map to [0, 1]; out-of-range values are clamped, constant features map to 0.
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&v, (&lo, &hi))| {
                let span = hi - lo;
                if span > 0.0 {
                    ((v - lo) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// Rows are cycles, columns named features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub cycle_ids: Vec<String>,
    /// Grouping key per row (patient id) for grouped cross-validation.
    pub groups: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub scaling: Option<MinMaxScaler>,
}

impl FeatureMatrix {
    pub fn empty(feature_names: Vec<String>) -> Self {
        FeatureMatrix {
            feature_names,
            cycle_ids: Vec::new(),
            groups: Vec::new(),
            rows: Vec::new(),
            labels: Vec::new(),
            scaling: None,
        }
    }

    pub fn push_row(&mut self, id: String, group: String, row: Vec<f64>, label: Label) -> Result<()> {
        if row.len() != self.feature_names.len() {
            return Err(Error::Format(format!(
                "row {id} has {} values for {} features",
                row.len(),
                self.feature_names.len()
            )));
        }
        self.cycle_ids.push(id);
        self.groups.push(group);
        self.rows.push(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn subset_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            cycle_ids: idx.iter().map(|&i| self.cycle_ids[i].clone()).collect(),
            groups: idx.iter().map(|&i| self.groups[i].clone()).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            scaling: self.scaling.clone(),
        }
    }

    /// Keep the named columns, in the given order.
    pub fn select_named(&self, names: &[String]) -> Result<FeatureMatrix> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::invalid(format!("feature `{n}` not in matrix")))
            })
            .collect::<Result<_>>()?;
        Ok(FeatureMatrix {
            feature_names: names.to_vec(),
            cycle_ids: self.cycle_ids.clone(),
            groups: self.groups.clone(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
            scaling: None,
        })
    }

    /// Write `<stem>.csv` (cycle_id, label, features...) and `<stem>.json`
    /// (names, groups, scaling and caller metadata).
    pub fn save(&self, csv_path: &Path, metadata: serde_json::Value) -> Result<()> {
        if let Some(dir) = csv_path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut w = csv::Writer::from_path(csv_path)?;
        let mut header = vec!["cycle_id".to_string(), "label".to_string()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        for ((id, label), row) in self.cycle_ids.iter().zip(&self.labels).zip(&self.rows) {
            let mut rec = vec![id.clone(), label.to_string()];
            rec.extend(row.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        let sidecar = Sidecar {
            feature_names: self.feature_names.clone(),
            groups: self.groups.clone(),
            scaling: self.scaling.clone(),
            metadata,
        };
        fs::write(csv_path.with_extension("json"), serde_json::to_vec_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(csv_path: &Path) -> Result<(FeatureMatrix, serde_json::Value)> {
        let sidecar_path = csv_path.with_extension("json");
        let sidecar: Option<Sidecar> = match fs::read(&sidecar_path) {
            Ok(bytes) => Some(serde_json::from_slice(&bytes)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(e.into()),
        };
        let mut r = csv::Reader::from_path(csv_path)?;
        let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
        if header.len() < 2 || header[0] != "cycle_id" || header[1] != "label" {
            return Err(Error::Format(format!(
                "{}: feature CSV must start with cycle_id,label",
                csv_path.display()
            )));
        }
        let mut m = FeatureMatrix::empty(header[2..].to_vec());
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let label: Label = rec[1].parse()?;
            let row = rec
                .iter()
                .skip(2)
                .map(|s| s.parse::<f64>().map_err(|_| Error::Format(format!("row {}: bad number `{s}`", i + 1))))
                .collect::<Result<Vec<f64>>>()?;
            let group = sidecar
                .as_ref()
                .and_then(|s| s.groups.get(i).cloned())
                .unwrap_or_else(|| rec[0].to_string());
            m.push_row(rec[0].to_string(), group, row, label)?;
        }
        let metadata = match sidecar {
            Some(s) => {
                if s.feature_names != m.feature_names {
                    return Err(Error::Format("feature sidecar disagrees with CSV header".into()));
                }
                m.scaling = s.scaling;
                s.metadata
            }
            None => serde_json::Value::Null,
        };
        Ok((m, metadata))
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    feature_names: Vec<String>,
    groups: Vec<String>,
    scaling: Option<MinMaxScaler>,
    metadata: serde_json::Value,
}

/// Fit min-max scaling on `train` and store it in the matrix.
pub fn minmax_fit(train: &mut FeatureMatrix) -> Result<MinMaxScaler> {
    let s = MinMaxScaler::fit(&train.rows)?;
    train.scaling = Some(s.clone());
    Ok(s)
}

/// Apply fitted scaling to a matrix. Fails if no scaling has been fitted.
pub fn minmax_apply(m: &FeatureMatrix, scaling: Option<&MinMaxScaler>) -> Result<FeatureMatrix> {
    let s = scaling.ok_or_else(|| Error::NotFitted("min-max scaling has not been fitted".into()))?;
    if s.mins.len() != m.width() {
        return Err(Error::invalid(format!(
            "scaling fitted on {} features, matrix has {}",
            s.mins.len(),
            m.width()
        )));
    }
    Ok(FeatureMatrix { rows: s.transform(&m.rows), scaling: Some(s.clone()), ..m.clone() })
}
