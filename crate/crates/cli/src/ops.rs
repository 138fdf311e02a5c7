//! Operations shared by the CLI and the HTTP service, so both produce the
//! same artifacts for the same inputs.

use std::str::FromStr;

use glc_core::coords::{self, CoordinateSystemSpec, PairingSpec, SystemKind, DEFAULT_PLANE_SPACING};
use glc_core::dataset::{load_csv, normalize, CsvConfig, Dataset, LabelSelector, NormalizationSpec};
use glc_core::glc_l::{self, ExplanationDiff, ModelArtifact, TrainConfig};
use glc_core::render::{self, GraphScene, RenderSpec};
use glc_core::rules::{fsp_search, FspConfig, FspResult, RectRule};
use glc_core::GlcError;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// A dataset in raw units together with its normalized copy.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub raw: Dataset,
    pub normalized: Dataset,
    pub normalization: NormalizationSpec,
}

impl Prepared {
    pub fn new(raw: Dataset) -> Self {
        let (normalized, normalization) = normalize(&raw);
        Self {
            raw,
            normalized,
            normalization,
        }
    }

    pub fn space(&self, normalized: bool) -> &Dataset {
        if normalized {
            &self.normalized
        } else {
            &self.raw
        }
    }
}

pub fn load_text(csv: &str, label: &str, delimiter: u8, row_cap: usize) -> CliResult<Prepared> {
    let config = CsvConfig {
        label: LabelSelector::from_str(label).expect("label selectors always parse"),
        delimiter,
        row_cap: Some(row_cap),
        ..CsvConfig::default()
    };
    Ok(Prepared::new(load_csv(csv.as_bytes(), &config)?))
}

/// Summary printed by `ingest` and returned when a session is created.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub attributes: Vec<String>,
    pub label: String,
    pub classes: Vec<String>,
    pub class_counts: std::collections::BTreeMap<String, usize>,
    pub dropped_rows: usize,
    pub constant_attributes: Vec<String>,
}

pub fn summary(p: &Prepared) -> DatasetSummary {
    let names = p.raw.attribute_names();
    DatasetSummary {
        rows: p.raw.len(),
        label: p.raw.label_name().to_string(),
        classes: p.raw.class_set().to_vec(),
        class_counts: p.raw.class_counts(),
        dropped_rows: p.raw.dropped_rows(),
        constant_attributes: p
            .normalization
            .constant_attributes()
            .into_iter()
            .map(|i| names[i].clone())
            .collect(),
        attributes: names,
    }
}

/// Parses `1-2,3-4` (1-based, one `i-j` per plane).
pub fn parse_pairing(s: &str) -> CliResult<PairingSpec> {
    let pairs = s
        .split(',')
        .map(|p| {
            let (a, b) = p
                .trim()
                .split_once('-')
                .ok_or_else(|| CliError::Usage(format!("pairing element `{p}` is not i-j")))?;
            let parse = |v: &str| -> CliResult<usize> {
                match v.trim().parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(CliError::Usage(format!("pairing index `{v}` must be a positive integer"))),
                }
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(PairingSpec::new(pairs)?)
}

/// Default layout for `kind`. Planes and In-Line segments are spaced by
/// `spacing`, which defaults to 1.2 times the largest absolute value so
/// raw-unit data does not overlap.
pub fn default_system(kind: SystemKind, d: &Dataset, spacing: Option<f64>) -> CoordinateSystemSpec {
    let n = d.n_attributes();
    let extent = d
        .rows()
        .iter()
        .flatten()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let step = spacing.unwrap_or(DEFAULT_PLANE_SPACING * extent);
    match kind {
        SystemKind::Spc => CoordinateSystemSpec::Spc {
            offsets: (0..n.div_ceil(2)).map(|k| [k as f64 * step, 0.0]).collect(),
        },
        SystemKind::InLine => CoordinateSystemSpec::InLine {
            offsets: (0..n).map(|i| i as f64 * step).collect(),
        },
        other => CoordinateSystemSpec::default_for(other, n),
    }
}

pub fn scene(
    d: &Dataset,
    system: &CoordinateSystemSpec,
    pairing: Option<&PairingSpec>,
    rows: Option<&[usize]>,
) -> CliResult<GraphScene> {
    let mut scene = GraphScene::new(system.clone(), pairing.cloned(), d.n_attributes());
    let all: Vec<usize>;
    let rows = match rows {
        Some(r) => r,
        None => {
            all = (0..d.len()).collect();
            &all
        }
    };
    for &row in rows {
        if row >= d.len() {
            return Err(GlcError::InvalidInput(format!("row {row} out of range")).into());
        }
        let g = coords::encode(d.row(row), system, pairing)?;
        scene.push(row, d.labels()[row].clone(), g)?;
    }
    Ok(scene)
}

/// Applies a stored normalization to a dataset with the same attributes.
pub fn normalize_with(d: &Dataset, spec: &NormalizationSpec) -> CliResult<Dataset> {
    let rows = d.rows().iter().map(|r| spec.apply(r)).collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset::new(
        d.attribute_names(),
        rows,
        d.labels().to_vec(),
        d.label_name().to_string(),
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutput {
    pub model: ModelArtifact,
    pub accuracy: f64,
    pub restart: usize,
}

/// Trains on the normalized data; the artifact carries the normalization.
pub fn train(p: &Prepared, cfg: &TrainConfig) -> CliResult<TrainOutput> {
    let t = glc_l::train(&p.normalized, cfg)?;
    let mut model = ModelArtifact::new(&t.model, p.raw.attribute_names(), p.normalization.clone());
    model.training_accuracy = Some(t.accuracy);
    Ok(TrainOutput {
        model,
        accuracy: t.accuracy,
        restart: t.restart,
    })
}

fn check_attributes(model: &ModelArtifact, d: &Dataset) -> CliResult<()> {
    if model.attribute_names != d.attribute_names() {
        return Err(GlcError::DimensionMismatch {
            expected: model.attribute_names.len(),
            found: d.n_attributes(),
        }
        .into());
    }
    Ok(())
}

/// The dataset in the model's normalized space.
pub fn model_space(p: &Prepared, model: &ModelArtifact) -> CliResult<Dataset> {
    check_attributes(model, &p.raw)?;
    normalize_with(&p.raw, &model.normalization)
}

pub fn explain(p: &Prepared, model: &ModelArtifact, row: usize, k: usize) -> CliResult<ExplanationDiff> {
    let d = model_space(p, model)?;
    if row >= d.len() {
        return Err(GlcError::InvalidInput(format!("row {row} out of range")).into());
    }
    let m = model.model()?;
    Ok(glc_l::explain_misclassified(d.row(row), &d.labels()[row], &d, &m, k)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneOutput {
    pub report: glc_l::PruneReport,
    /// Refit over the kept attributes only.
    pub model: ModelArtifact,
}

pub fn prune(p: &Prepared, model: &ModelArtifact, eps: f64, cfg: &TrainConfig) -> CliResult<PruneOutput> {
    let d = model_space(p, model)?;
    let (trained, report) = glc_l::prune_and_refit(&model.model()?, &d, eps, cfg)?;
    let names = p.raw.attribute_names();
    let normalization = NormalizationSpec {
        maps: report.kept.iter().map(|&i| model.normalization.maps[i]).collect(),
    };
    let mut refit = ModelArtifact::new(
        &trained.model,
        report.kept.iter().map(|&i| names[i].clone()).collect(),
        normalization,
    );
    refit.training_accuracy = Some(trained.accuracy);
    Ok(PruneOutput { report, model: refit })
}

/// FSP on the normalized data, so rectangles are in `[0, 1]` units.
pub fn fsp(p: &Prepared, cfg: &FspConfig, positive: Option<&str>) -> CliResult<FspResult> {
    Ok(fsp_search(&p.normalized, positive, cfg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderTarget {
    System(SystemKind),
    Glcl,
}

impl FromStr for RenderTarget {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        if s == "glcl" {
            return Ok(RenderTarget::Glcl);
        }
        SystemKind::from_str(s)
            .map(RenderTarget::System)
            .map_err(|_| CliError::Usage(format!("unknown system `{s}`; use pc, cpc, spc, stars, inline or glcl")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    pub pairing: Option<PairingSpec>,
    pub spacing: Option<f64>,
    pub normalize: bool,
    pub model: Option<ModelArtifact>,
    /// Drawn over SPC/CPC renders; its rectangles are in normalized units,
    /// so it implies `normalize`.
    pub rule: Option<RectRule>,
}

pub fn render(p: &Prepared, target: RenderTarget, opts: &RenderOptions, spec: &RenderSpec) -> CliResult<String> {
    match target {
        RenderTarget::Glcl => {
            let model = opts
                .model
                .as_ref()
                .ok_or_else(|| CliError::Usage("rendering glcl needs a trained model".into()))?;
            let d = model_space(p, model)?;
            Ok(render::render_glc_l(&d, &model.model()?, spec)?.to_svg())
        }
        RenderTarget::System(kind) => {
            let d = p.space(opts.normalize || opts.rule.is_some());
            let system = default_system(kind, d, opts.spacing);
            let s = scene(d, &system, opts.pairing.as_ref(), None)?;
            let doc = render::render_graphs(&s, spec)?;
            let doc = match &opts.rule {
                Some(rule) => render::render_rule_overlay(&doc, rule)?,
                None => doc,
            };
            Ok(doc.to_svg())
        }
    }
}
