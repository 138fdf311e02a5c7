//! Visual knowledge discovery with General Line Coordinates.
//!
//! The crate maps n-D points to 2-D graphs without losing information
//! (Parallel, Collocated Paired, Shifted Paired, CPC-Stars and In-Line
//! coordinates), trains and draws GLC-L linear classifiers, extracts
//! interpretable rules (step rules, rectangle rules over shifted pair
//! planes, arrow dominance regions), encodes points as CPC-R images and
//! measures how much point-to-point projections corrupt distances.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coords;
pub mod cpcr;
pub mod dataset;
pub mod error;
pub mod glc_l;
pub mod jl_bounds;
pub mod render;
pub mod rules;

pub use coords::{
    CoordinateSystemSpec, DistortionReport, GlcGraph, PairingSpec, SystemKind,
};

pub use dataset::{AttributeMeta, CsvConfig, Dataset, LabelSelector, NormalizationSpec};
pub use error::{GlcError, Result};
pub use cpcr::{CollisionEntry, CompositeImage, CpcrImage};
pub use glc_l::{ExplanationDiff, GlcLPolyline, LinearModel, ModelArtifact, TrainConfig, TrainedModel};
pub use jl_bounds::{JlEstimate, ProjectionReport};
pub use render::{GraphScene, RenderSpec, SvgDocument};
pub use rules::{
    AnyRule, ArrowField, ArrowGrid, FspConfig, FspResult, RectRule, RuleEvalReport, StepRuleSet,
};
