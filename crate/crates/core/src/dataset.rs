//! Labeled n-D datasets: CSV ingest, validation, min-max normalization and
//! the even-length padding used by every paired coordinate system.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{GlcError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeMeta {
    pub name: String,
    pub observed_min: f64,
    pub observed_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_range: Option<[f64; 2]>,
}

impl AttributeMeta {
    /// Range used for normalization: the declared range widened to cover
    /// anything actually observed.
    pub fn effective_range(&self) -> (f64, f64) {
        match self.declared_range {
            Some([lo, hi]) => (lo.min(self.observed_min), hi.max(self.observed_max)),
            None => (self.observed_min, self.observed_max),
        }
    }
}

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelSelector {
    Index(usize),
    Name(String),
}

impl Default for LabelSelector {
    fn default() -> Self {
        LabelSelector::Name("class".to_string())
    }
}

impl std::str::FromStr for LabelSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelSelector::Index(i),
            Err(_) => LabelSelector::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Skip incomplete rows and count them in [`Dataset::dropped_rows`].
    #[default]
    Drop,
    Reject,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvConfig {
    pub label: LabelSelector,
    pub delimiter: u8,
    pub missing: MissingPolicy,
    /// Cell contents treated as a missing value.
    pub missing_tokens: Vec<String>,
    pub row_cap: Option<usize>,
}

impl Default for CsvConfig {
    fn default() -> Self {
        Self {
            label: LabelSelector::default(),
            delimiter: b',',
            missing: MissingPolicy::Drop,
            missing_tokens: vec![String::new(), "?".into(), "NA".into()],
            row_cap: None,
        }
    }
}

impl CsvConfig {
    pub fn with_label(label: LabelSelector) -> Self {
        Self {
            label,
            ..Self::default()
        }
    }
}

/// Immutable labeled dataset. Every row is finite and has one value per
/// attribute; every label is a member of `class_set`, which is kept in
/// order of first appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr")]
pub struct Dataset {
    attributes: Vec<AttributeMeta>,
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    class_set: Vec<String>,
    label_name: String,
    #[serde(default)]
    dropped_rows: usize,
}

#[derive(Deserialize)]
struct DatasetRepr {
    attributes: Vec<AttributeMeta>,
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    label_name: String,
    #[serde(default)]
    dropped_rows: usize,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = GlcError;

    fn try_from(r: DatasetRepr) -> Result<Self> {
        let names = r.attributes.iter().map(|a| a.name.clone()).collect();
        let declared: Vec<_> = r.attributes.iter().map(|a| a.declared_range).collect();
        let mut d = Dataset::new(names, r.rows, r.labels, r.label_name)?;
        d.dropped_rows = r.dropped_rows;
        d.with_declared_ranges(&declared)
    }
}

impl Dataset {
    pub fn new(
        attribute_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<String>,
        label_name: impl Into<String>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(GlcError::EmptyDataset);
        }
        if labels.len() != rows.len() {
            return Err(GlcError::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        let n = attribute_names.len();
        if n == 0 {
            return Err(GlcError::InvalidInput("dataset needs at least one attribute".into()));
        }
        let mut mins = vec![f64::INFINITY; n];
        let mut maxs = vec![f64::NEG_INFINITY; n];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GlcError::Ragged {
                    row: r + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(GlcError::Parse {
                        row: r + 1,
                        column: attribute_names[j].clone(),
                        value: v.to_string(),
                    });
                }
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        let attributes = attribute_names
            .into_iter()
            .zip(mins.into_iter().zip(maxs))
            .map(|(name, (observed_min, observed_max))| AttributeMeta {
                name,
                observed_min,
                observed_max,
                declared_range: None,
            })
            .collect();
        let mut class_set: Vec<String> = Vec::new();
        for l in &labels {
            if !class_set.contains(l) {
                class_set.push(l.clone());
            }
        }
        Ok(Self {
            attributes,
            rows,
            labels,
            class_set,
            label_name: label_name.into(),
            dropped_rows: 0,
        })
    }

    pub fn with_declared_ranges(mut self, ranges: &[Option<[f64; 2]>]) -> Result<Self> {
        if ranges.len() != self.attributes.len() {
            return Err(GlcError::DimensionMismatch {
                expected: self.attributes.len(),
                found: ranges.len(),
            });
        }
        for (attr, range) in self.attributes.iter_mut().zip(ranges) {
            if let Some([lo, hi]) = range {
                if !(lo < hi) {
                    return Err(GlcError::InvalidInput(format!(
                        "declared range for `{}` must satisfy lo < hi",
                        attr.name
                    )));
                }
            }
            attr.declared_range = *range;
        }
        Ok(self)
    }

    pub fn attributes(&self) -> &[AttributeMeta] {
        &self.attributes
    }

    pub fn attribute_names(&self) -> Vec<String> {
        self.attributes.iter().map(|a| a.name.clone()).collect()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn class_set(&self) -> &[String] {
        &self.class_set
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    /// Rows skipped at load time because of missing values.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for l in &self.labels {
            *counts.entry(l.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// The two classes of a binary task as `(negative, positive)`.
    ///
    /// Without an explicit choice the positive class is the second class in
    /// order of appearance.
    pub fn binary_classes(&self, positive: Option<&str>) -> Result<(String, String)> {
        if self.class_set.len() != 2 {
            return Err(GlcError::Class(format!(
                "expected exactly two classes, found {}",
                self.class_set.len()
            )));
        }
        let (a, b) = (&self.class_set[0], &self.class_set[1]);
        match positive {
            None => Ok((a.clone(), b.clone())),
            Some(p) if p == b => Ok((a.clone(), b.clone())),
            Some(p) if p == a => Ok((b.clone(), a.clone())),
            Some(p) => Err(GlcError::Class(format!("unknown class `{p}`"))),
        }
    }

    /// Keeps only rows whose label is one of `classes`.
    pub fn select_classes(&self, classes: &[&str]) -> Result<Dataset> {
        for c in classes {
            if !self.class_set.iter().any(|k| k == c) {
                return Err(GlcError::Class(format!("unknown class `{c}`")));
            }
        }
        let (rows, labels): (Vec<_>, Vec<_>) = self
            .rows
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| classes.contains(&l.as_str()))
            .map(|(r, l)| (r.clone(), l.clone()))
            .unzip();
        let mut d = Dataset::new(self.attribute_names(), rows, labels, self.label_name.clone())?;
        d.dropped_rows = self.dropped_rows;
        let declared: Vec<_> = self.attributes.iter().map(|a| a.declared_range).collect();
        d.with_declared_ranges(&declared)
    }

    /// Projects the dataset onto the given attribute indices, in that order.
    pub fn subset_attributes(&self, keep: &[usize]) -> Result<Dataset> {
        if keep.is_empty() {
            return Err(GlcError::InvalidInput("no attributes selected".into()));
        }
        if let Some(&bad) = keep.iter().find(|&&j| j >= self.n_attributes()) {
            return Err(GlcError::DimensionMismatch {
                expected: self.n_attributes(),
                found: bad + 1,
            });
        }
        let names = keep.iter().map(|&j| self.attributes[j].name.clone()).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| keep.iter().map(|&j| r[j]).collect())
            .collect();
        let mut d = Dataset::new(names, rows, self.labels.clone(), self.label_name.clone())?;
        d.dropped_rows = self.dropped_rows;
        let declared: Vec<_> = keep.iter().map(|&j| self.attributes[j].declared_range).collect();
        d.with_declared_ranges(&declared)
    }

    /// Canonical CSV: header of attribute names followed by the label
    /// column. Values use the shortest representation that parses back to
    /// the same `f64`.
    pub fn to_csv(&self, delimiter: u8) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(Vec::new());
        let mut header = self.attribute_names();
        header.push(self.label_name.clone());
        w.write_record(&header)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(label.clone());
            w.write_record(&rec)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| GlcError::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| GlcError::Csv(e.to_string()))
    }
}

/// Reads a headed CSV. The label column is excluded from the attributes.
/// Rows containing a missing-value token are dropped (and counted) or
/// rejected depending on `config.missing`.
pub fn load_csv<R: Read>(source: R, config: &CsvConfig) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_idx = match &config.label {
        LabelSelector::Index(i) if *i < header.len() => *i,
        LabelSelector::Index(i) => return Err(GlcError::MissingLabelColumn(i.to_string())),
        LabelSelector::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| GlcError::MissingLabelColumn(name.clone()))?,
    };
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0;
    'records: for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = r + 1;
        if record.len() != header.len() {
            return Err(GlcError::Ragged {
                row: row_no,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut values = Vec::with_capacity(names.len());
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            if config.missing_tokens.iter().any(|t| t == cell) {
                match config.missing {
                    MissingPolicy::Drop => {
                        dropped += 1;
                        continue 'records;
                    }
                    MissingPolicy::Reject => {
                        return Err(GlcError::MissingValue {
                            row: row_no,
                            column: header[j].clone(),
                        })
                    }
                }
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(GlcError::Parse {
                        row: row_no,
                        column: header[j].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        let label = &record[label_idx];
        if config.missing_tokens.iter().any(|t| t == label) {
            match config.missing {
                MissingPolicy::Drop => {
                    dropped += 1;
                    continue;
                }
                MissingPolicy::Reject => {
                    return Err(GlcError::MissingValue {
                        row: row_no,
                        column: header[label_idx].clone(),
                    })
                }
            }
        }
        rows.push(values);
        labels.push(label.to_string());
        if let Some(cap) = config.row_cap {
            if rows.len() > cap {
                return Err(GlcError::InvalidInput(format!("more than {cap} rows")));
            }
        }
    }
    let mut d = Dataset::new(names, rows, labels, header[label_idx].clone())?;
    d.dropped_rows = dropped;
    Ok(d)
}

/// Affine map of one attribute into `[0, 1]`: `(raw - offset) * scale`.
/// Constant attributes have `scale == 0` and map to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: f64,
    pub constant: bool,
}

impl AffineMap {
    pub fn apply(&self, raw: f64) -> f64 {
        if self.constant {
            0.0
        } else {
            ((raw - self.offset) * self.scale).clamp(0.0, 1.0)
        }
    }

    /// Same as [`apply`](Self::apply) without clamping, for values outside
    /// the fitted range.
    pub fn apply_unclamped(&self, raw: f64) -> f64 {
        if self.constant {
            0.0
        } else {
            (raw - self.offset) * self.scale
        }
    }

    pub fn invert(&self, normalized: f64) -> f64 {
        if self.constant {
            self.offset
        } else {
            normalized / self.scale + self.offset
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub maps: Vec<AffineMap>,
}

impl NormalizationSpec {
    pub fn fit(d: &Dataset) -> Self {
        let maps = d
            .attributes()
            .iter()
            .map(|a| {
                let (lo, hi) = a.effective_range();
                if hi > lo {
                    AffineMap {
                        scale: 1.0 / (hi - lo),
                        offset: lo,
                        constant: false,
                    }
                } else {
                    AffineMap {
                        scale: 0.0,
                        offset: lo,
                        constant: true,
                    }
                }
            })
            .collect();
        Self { maps }
    }

    pub fn constant_attributes(&self) -> Vec<usize> {
        self.maps
            .iter()
            .enumerate()
            .filter(|(_, m)| m.constant)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(x.iter().zip(&self.maps).map(|(v, m)| m.apply(*v)).collect())
    }

    pub fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(x.iter().zip(&self.maps).map(|(v, m)| m.invert(*v)).collect())
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.maps.len() {
            return Err(GlcError::DimensionMismatch {
                expected: self.maps.len(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Min-max normalizes every attribute into `[0, 1]`.
pub fn normalize(d: &Dataset) -> (Dataset, NormalizationSpec) {
    let spec = NormalizationSpec::fit(d);
    let rows = d
        .rows()
        .iter()
        .map(|r| r.iter().zip(&spec.maps).map(|(v, m)| m.apply(*v)).collect())
        .collect();
    let mut out = Dataset::new(d.attribute_names(), rows, d.labels().to_vec(), d.label_name())
        .expect("normalized rows keep the shape of a valid dataset");
    out.dropped_rows = d.dropped_rows();
    (out, spec)
}

pub fn denormalize(d: &Dataset, spec: &NormalizationSpec) -> Result<Dataset> {
    let rows = d
        .rows()
        .iter()
        .map(|r| spec.invert(r))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Dataset::new(d.attribute_names(), rows, d.labels().to_vec(), d.label_name())?;
    out.dropped_rows = d.dropped_rows();
    Ok(out)
}

/// Repeats the last coordinate when the length is odd.
pub fn pad_even(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    if out.len() % 2 == 1 {
        out.push(*x.last().expect("odd length is non-empty"));
    }
    out
}
