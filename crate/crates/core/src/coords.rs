//! Lossless n-D to 2-D graph encodings in General Line Coordinates.
//!
//! Each encoder turns one point into a [`GlcGraph`]: an ordered list of
//! 2-D nodes linked head to tail. Paired systems (CPC, SPC, CPC-Stars) use
//! one node per attribute pair and pad odd-length points by repeating the
//! last coordinate; Parallel and In-Line coordinates use one node per
//! attribute. Every encoder has an exact decoder.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dataset::pad_even;
use crate::error::{GlcError, Result};

/// Ordered attribute pairs over a padded (even length) point. Indices are
/// zero-based and form a permutation of `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, usize)>", into = "Vec<(usize, usize)>")]
pub struct PairingSpec {
    pairs: Vec<(usize, usize)>,
}

impl TryFrom<Vec<(usize, usize)>> for PairingSpec {
    type Error = GlcError;

    fn try_from(pairs: Vec<(usize, usize)>) -> Result<Self> {
        PairingSpec::new(pairs)
    }
}

impl From<PairingSpec> for Vec<(usize, usize)> {
    fn from(p: PairingSpec) -> Self {
        p.pairs
    }
}

impl PairingSpec {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(GlcError::InvalidPairing("no pairs".into()));
        }
        let m = pairs.len() * 2;
        let mut seen = vec![false; m];
        for &(i, j) in &pairs {
            for idx in [i, j] {
                if idx >= m {
                    return Err(GlcError::InvalidPairing(format!(
                        "index {idx} out of range for {m} coordinates"
                    )));
                }
                if std::mem::replace(&mut seen[idx], true) {
                    return Err(GlcError::InvalidPairing(format!("index {idx} used twice")));
                }
            }
        }
        Ok(Self { pairs })
    }

    /// `(x1, x2), (x3, x4), ...` for `m` coordinates (`m` is rounded up to
    /// even).
    pub fn identity(m: usize) -> Self {
        let m = m + m % 2;
        Self {
            pairs: (0..m / 2).map(|k| (2 * k, 2 * k + 1)).collect(),
        }
    }

    /// CPC-Stars chaining: `(x2, x3), (x4, x5), ..., (xm, x1)`.
    pub fn star_chain(m: usize) -> Self {
        let m = m + m % 2;
        Self {
            pairs: (0..m / 2).map(|k| (2 * k + 1, (2 * k + 2) % m)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of coordinates covered (always even).
    pub fn width(&self) -> usize {
        self.pairs.len() * 2
    }

    fn check_width(&self, m: usize) -> Result<()> {
        if self.width() != m {
            return Err(GlcError::InvalidPairing(format!(
                "pairing covers {} coordinates, point has {m} after padding",
                self.width()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for PairingSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .pairs
            .iter()
            .map(|(i, j)| format!("(X{},X{})", i + 1, j + 1))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    #[serde(rename = "pc")]
    ParallelCoords,
    Cpc,
    Spc,
    #[serde(rename = "stars")]
    CpcStars,
    #[serde(rename = "inline")]
    InLine,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::ParallelCoords => "pc",
            SystemKind::Cpc => "cpc",
            SystemKind::Spc => "spc",
            SystemKind::CpcStars => "stars",
            SystemKind::InLine => "inline",
        }
    }

    pub fn is_paired(self) -> bool {
        matches!(self, SystemKind::Cpc | SystemKind::Spc | SystemKind::CpcStars)
    }
}

impl std::str::FromStr for SystemKind {
    type Err = GlcError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pc" | "parallel" => SystemKind::ParallelCoords,
            "cpc" => SystemKind::Cpc,
            "spc" => SystemKind::Spc,
            "stars" | "cpc-stars" => SystemKind::CpcStars,
            "inline" | "in-line" => SystemKind::InLine,
            other => return Err(GlcError::InvalidSpec(format!("unknown system `{other}`"))),
        })
    }
}

/// Spacing between SPC planes and In-Line axes for unit-normalized data.
pub const DEFAULT_PLANE_SPACING: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system")]
pub enum CoordinateSystemSpec {
    #[serde(rename = "pc")]
    ParallelCoords,
    #[serde(rename = "cpc")]
    Cpc,
    /// One 2-D translation per pair plane.
    #[serde(rename = "spc")]
    Spc { offsets: Vec<[f64; 2]> },
    /// One radial axis angle (radians) per pair.
    #[serde(rename = "stars")]
    CpcStars { angles: Vec<f64> },
    /// One horizontal position per attribute.
    #[serde(rename = "inline")]
    InLine { offsets: Vec<f64> },
}

impl CoordinateSystemSpec {
    pub fn kind(&self) -> SystemKind {
        match self {
            CoordinateSystemSpec::ParallelCoords => SystemKind::ParallelCoords,
            CoordinateSystemSpec::Cpc => SystemKind::Cpc,
            CoordinateSystemSpec::Spc { .. } => SystemKind::Spc,
            CoordinateSystemSpec::CpcStars { .. } => SystemKind::CpcStars,
            CoordinateSystemSpec::InLine { .. } => SystemKind::InLine,
        }
    }

    /// Planes at `(k * 1.2, 0)`.
    pub fn default_spc(planes: usize) -> Self {
        CoordinateSystemSpec::Spc {
            offsets: (0..planes)
                .map(|k| [k as f64 * DEFAULT_PLANE_SPACING, 0.0])
                .collect(),
        }
    }

    /// Equally spaced axes at `2πk / axes`.
    pub fn default_stars(axes: usize) -> Self {
        CoordinateSystemSpec::CpcStars {
            angles: (0..axes).map(|k| TAU * k as f64 / axes as f64).collect(),
        }
    }

    pub fn default_inline(n: usize) -> Self {
        CoordinateSystemSpec::InLine {
            offsets: (0..n).map(|i| i as f64 * DEFAULT_PLANE_SPACING).collect(),
        }
    }

    /// Default parameters of `kind` for an `n`-attribute point.
    pub fn default_for(kind: SystemKind, n: usize) -> Self {
        let pairs = n.div_ceil(2);
        match kind {
            SystemKind::ParallelCoords => CoordinateSystemSpec::ParallelCoords,
            SystemKind::Cpc => CoordinateSystemSpec::Cpc,
            SystemKind::Spc => Self::default_spc(pairs),
            SystemKind::CpcStars => Self::default_stars(pairs),
            SystemKind::InLine => Self::default_inline(n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoordinateSystemSpec::Spc { offsets } => {
                for (a, oa) in offsets.iter().enumerate() {
                    if !oa.iter().all(|v| v.is_finite()) {
                        return Err(GlcError::InvalidSpec("non-finite SPC offset".into()));
                    }
                    if let Some(b) = offsets[a + 1..].iter().position(|ob| ob == oa) {
                        return Err(GlcError::InvalidSpec(format!(
                            "SPC planes {a} and {} share offset {oa:?}",
                            a + 1 + b
                        )));
                    }
                }
            }
            CoordinateSystemSpec::CpcStars { angles } => {
                if angles.iter().any(|a| !(0.0..TAU).contains(a)) {
                    return Err(GlcError::InvalidSpec("star angles must lie in [0, 2π)".into()));
                }
                if angles.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(GlcError::InvalidSpec(
                        "star angles must be strictly increasing".into(),
                    ));
                }
            }
            CoordinateSystemSpec::InLine { offsets } => {
                if offsets.iter().any(|o| !o.is_finite()) || offsets.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(GlcError::InvalidSpec(
                        "In-Line offsets must be strictly increasing".into(),
                    ));
                }
            }
            CoordinateSystemSpec::ParallelCoords | CoordinateSystemSpec::Cpc => {}
        }
        Ok(())
    }
}

/// The 2-D directed graph image of one n-D point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlcGraph {
    #[serde(flatten)]
    pub system: CoordinateSystemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<PairingSpec>,
    /// Length of the point before padding.
    pub dim: usize,
    pub nodes: Vec<[f64; 2]>,
    pub plane_index: Vec<usize>,
}

impl GlcGraph {
    pub fn kind(&self) -> SystemKind {
        self.system.kind()
    }

    /// Directed edges between consecutive nodes. A CPC-Stars contour is
    /// closed only when drawn; the graph itself is a path.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.nodes.len()).map(|k| (k - 1, k)).collect()
    }

    /// Node positions relative to their own plane origin. For SPC this
    /// removes the plane offset and yields the raw pair values.
    pub fn local_nodes(&self) -> Vec<[f64; 2]> {
        match &self.system {
            CoordinateSystemSpec::Spc { offsets } => self
                .nodes
                .iter()
                .zip(&self.plane_index)
                .map(|(n, &k)| [n[0] - offsets[k][0], n[1] - offsets[k][1]])
                .collect(),
            _ => self.nodes.clone(),
        }
    }

    fn expect(&self, kind: SystemKind) -> Result<()> {
        if self.kind() != kind {
            return Err(GlcError::WrongSystem {
                expected: kind.name(),
                found: self.kind().name(),
            });
        }
        Ok(())
    }

    fn paired_layout(&self) -> Result<&PairingSpec> {
        let pairing = self
            .pairing
            .as_ref()
            .ok_or_else(|| GlcError::Undecodable("paired graph without pairing".into()))?;
        if self.nodes.is_empty() || self.nodes.len() != pairing.len() {
            return Err(GlcError::Undecodable(format!(
                "{} nodes for {} pairs",
                self.nodes.len(),
                pairing.len()
            )));
        }
        if self.dim > pairing.width() || self.dim + 1 < pairing.width() {
            return Err(GlcError::Undecodable(format!(
                "dimension {} does not fit {} paired coordinates",
                self.dim,
                pairing.width()
            )));
        }
        Ok(pairing)
    }

    fn scatter(&self, pairing: &PairingSpec, local: impl Fn(usize) -> [f64; 2]) -> Vec<f64> {
        let mut x = vec![0.0; pairing.width()];
        for (k, &(i, j)) in pairing.pairs().iter().enumerate() {
            let [u, v] = local(k);
            x[i] = u;
            x[j] = v;
        }
        x.truncate(self.dim);
        x
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(GlcError::InvalidInput("empty point".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(GlcError::InvalidInput("point has non-finite values".into()));
    }
    Ok(())
}

/// Parallel Coordinates: node `i` is `(i, x_i)`.
pub fn encode_pc(x: &[f64]) -> Result<GlcGraph> {
    check_finite(x)?;
    Ok(GlcGraph {
        system: CoordinateSystemSpec::ParallelCoords,
        pairing: None,
        dim: x.len(),
        nodes: x.iter().enumerate().map(|(i, &v)| [i as f64, v]).collect(),
        plane_index: (0..x.len()).collect(),
    })
}

pub fn decode_pc(g: &GlcGraph) -> Result<Vec<f64>> {
    g.expect(SystemKind::ParallelCoords)?;
    if g.nodes.len() != g.dim || g.nodes.is_empty() {
        return Err(GlcError::Undecodable(format!("{} nodes for dimension {}", g.nodes.len(), g.dim)));
    }
    Ok(g.nodes.iter().map(|n| n[1]).collect())
}

fn paired_values(x: &[f64], pairing: &PairingSpec) -> Result<Vec<[f64; 2]>> {
    check_finite(x)?;
    let padded = pad_even(x);
    pairing.check_width(padded.len())?;
    Ok(pairing
        .pairs()
        .iter()
        .map(|&(i, j)| [padded[i], padded[j]])
        .collect())
}

/// Collocated Paired Coordinates: every pair is a point in one shared plane.
pub fn encode_cpc(x: &[f64], pairing: &PairingSpec) -> Result<GlcGraph> {
    let nodes = paired_values(x, pairing)?;
    Ok(GlcGraph {
        system: CoordinateSystemSpec::Cpc,
        pairing: Some(pairing.clone()),
        dim: x.len(),
        plane_index: vec![0; nodes.len()],
        nodes,
    })
}

pub fn decode_cpc(g: &GlcGraph) -> Result<Vec<f64>> {
    g.expect(SystemKind::Cpc)?;
    let pairing = g.paired_layout()?;
    Ok(g.scatter(pairing, |k| g.nodes[k]))
}

/// Shifted Paired Coordinates: pair `k` lives in its own plane translated
/// by `offsets[k]`.
pub fn encode_spc(x: &[f64], pairing: &PairingSpec, offsets: &[[f64; 2]]) -> Result<GlcGraph> {
    let system = CoordinateSystemSpec::Spc {
        offsets: offsets.to_vec(),
    };
    system.validate()?;
    let local = paired_values(x, pairing)?;
    if offsets.len() != local.len() {
        return Err(GlcError::InvalidSpec(format!(
            "{} SPC offsets for {} pairs",
            offsets.len(),
            local.len()
        )));
    }
    let nodes = local
        .iter()
        .zip(offsets)
        .map(|(p, o)| [o[0] + p[0], o[1] + p[1]])
        .collect();
    Ok(GlcGraph {
        system,
        pairing: Some(pairing.clone()),
        dim: x.len(),
        nodes,
        plane_index: (0..local.len()).collect(),
    })
}

pub fn decode_spc(g: &GlcGraph) -> Result<Vec<f64>> {
    g.expect(SystemKind::Spc)?;
    let pairing = g.paired_layout()?;
    if let CoordinateSystemSpec::Spc { offsets } = &g.system {
        if offsets.len() != pairing.len() {
            return Err(GlcError::Undecodable("offset count differs from pair count".into()));
        }
    }
    let local = g.local_nodes();
    Ok(g.scatter(pairing, |k| local[k]))
}

/// CPC-Stars: pair `k` of the star chain is placed in a frame rotated to
/// axis angle `θ_k`, first coordinate radial and second tangential.
pub fn encode_cpc_stars(x: &[f64], spec: &CoordinateSystemSpec) -> Result<GlcGraph> {
    let CoordinateSystemSpec::CpcStars { angles } = spec else {
        return Err(GlcError::WrongSystem {
            expected: SystemKind::CpcStars.name(),
            found: spec.kind().name(),
        });
    };
    spec.validate()?;
    check_finite(x)?;
    let m = x.len() + x.len() % 2;
    if angles.len() != m / 2 {
        return Err(GlcError::InvalidSpec(format!(
            "{} star axes for {} pairs",
            angles.len(),
            m / 2
        )));
    }
    let pairing = PairingSpec::star_chain(m);
    let local = paired_values(x, &pairing)?;
    let nodes = local
        .iter()
        .zip(angles)
        .map(|(&[r, t], &theta)| {
            let (s, c) = theta.sin_cos();
            [r * c - t * s, r * s + t * c]
        })
        .collect();
    Ok(GlcGraph {
        system: spec.clone(),
        pairing: Some(pairing),
        dim: x.len(),
        nodes,
        plane_index: (0..m / 2).collect(),
    })
}

pub fn decode_cpc_stars(g: &GlcGraph) -> Result<Vec<f64>> {
    g.expect(SystemKind::CpcStars)?;
    let pairing = g.paired_layout()?;
    let CoordinateSystemSpec::CpcStars { angles } = &g.system else {
        unreachable!("kind checked above")
    };
    if angles.len() != pairing.len() {
        return Err(GlcError::Undecodable("axis count differs from pair count".into()));
    }
    Ok(g.scatter(pairing, |k| {
        let [u, v] = g.nodes[k];
        let (s, c) = angles[k].sin_cos();
        [u * c + v * s, -u * s + v * c]
    }))
}

/// In-Line coordinates: all axes on one horizontal line, node `i` at
/// `(offset_i + x_i, 0)`.
pub fn encode_inline(x: &[f64], offsets: &[f64]) -> Result<GlcGraph> {
    check_finite(x)?;
    let system = CoordinateSystemSpec::InLine {
        offsets: offsets.to_vec(),
    };
    system.validate()?;
    if offsets.len() != x.len() {
        return Err(GlcError::DimensionMismatch {
            expected: offsets.len(),
            found: x.len(),
        });
    }
    Ok(GlcGraph {
        system,
        pairing: None,
        dim: x.len(),
        nodes: x.iter().zip(offsets).map(|(v, o)| [o + v, 0.0]).collect(),
        plane_index: (0..x.len()).collect(),
    })
}

pub fn decode_inline(g: &GlcGraph) -> Result<Vec<f64>> {
    g.expect(SystemKind::InLine)?;
    let CoordinateSystemSpec::InLine { offsets } = &g.system else {
        unreachable!("kind checked above")
    };
    if g.nodes.is_empty() || g.nodes.len() != offsets.len() || g.nodes.len() != g.dim {
        return Err(GlcError::Undecodable("node count differs from axis count".into()));
    }
    Ok(g.nodes.iter().zip(offsets).map(|(n, o)| n[0] - o).collect())
}

/// Encodes with any system. `pairing` defaults to the identity pairing and
/// is ignored by unpaired systems and CPC-Stars (which always chains).
pub fn encode(x: &[f64], system: &CoordinateSystemSpec, pairing: Option<&PairingSpec>) -> Result<GlcGraph> {
    let identity;
    let pairing = match pairing {
        Some(p) => p,
        None => {
            identity = PairingSpec::identity(x.len());
            &identity
        }
    };
    match system {
        CoordinateSystemSpec::ParallelCoords => encode_pc(x),
        CoordinateSystemSpec::Cpc => encode_cpc(x, pairing),
        CoordinateSystemSpec::Spc { offsets } => encode_spc(x, pairing, offsets),
        CoordinateSystemSpec::CpcStars { .. } => encode_cpc_stars(x, system),
        CoordinateSystemSpec::InLine { offsets } => encode_inline(x, offsets),
    }
}

pub fn decode(g: &GlcGraph) -> Result<Vec<f64>> {
    match g.kind() {
        SystemKind::ParallelCoords => decode_pc(g),
        SystemKind::Cpc => decode_cpc(g),
        SystemKind::Spc => decode_spc(g),
        SystemKind::CpcStars => decode_cpc_stars(g),
        SystemKind::InLine => decode_inline(g),
    }
}

/// Graph distance `D*`: the p-norm over all per-node coordinate
/// differences. For PC, CPC and SPC this equals the n-D L^p distance; the
/// duplicated padding coordinate of odd-length points is not counted.
pub fn graph_distance(g1: &GlcGraph, g2: &GlcGraph, p: u32) -> Result<f64> {
    if p != 1 && p != 2 {
        return Err(GlcError::InvalidInput(format!("p must be 1 or 2, got {p}")));
    }
    if g1.system != g2.system
        || g1.pairing != g2.pairing
        || g1.dim != g2.dim
        || g1.nodes.len() != g2.nodes.len()
    {
        return Err(GlcError::InvalidGeometry(
            "graphs differ in system, pairing or size".into(),
        ));
    }
    let padded_slot = match (&g1.pairing, g1.kind()) {
        (Some(pairing), SystemKind::Cpc | SystemKind::Spc) if g1.dim % 2 == 1 => {
            let last = pairing.width() - 1;
            pairing
                .pairs()
                .iter()
                .enumerate()
                .find_map(|(k, &(i, j))| {
                    if i == last {
                        Some((k, 0))
                    } else if j == last {
                        Some((k, 1))
                    } else {
                        None
                    }
                })
        }
        _ => None,
    };
    let mut acc = 0.0;
    for (k, (a, b)) in g1.nodes.iter().zip(&g2.nodes).enumerate() {
        for c in 0..2 {
            if padded_slot == Some((k, c)) {
                continue;
            }
            let d = (a[c] - b[c]).abs();
            acc += if p == 1 { d } else { d * d };
        }
    }
    Ok(if p == 1 { acc } else { acc.sqrt() })
}

/// How a point-to-point mapping distorts pairwise squared distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Mean of `(ratio - 1)^2` over all pairs.
    pub mean_stress: f64,
    pub pair_count: usize,
}

impl DistortionReport {
    /// Largest `|ratio - 1|`.
    pub fn max_deviation(&self) -> f64 {
        (self.max_ratio - 1.0).max(1.0 - self.min_ratio)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Compares squared distances of every unordered pair before (`high`) and
/// after (`low`) a mapping.
pub fn mapping_distortion(high: &[Vec<f64>], low: &[Vec<f64>]) -> Result<DistortionReport> {
    if high.len() != low.len() {
        return Err(GlcError::DimensionMismatch {
            expected: high.len(),
            found: low.len(),
        });
    }
    if high.len() < 2 {
        return Err(GlcError::InvalidInput("need at least two points".into()));
    }
    for set in [high, low] {
        if let Some(bad) = set.iter().find(|p| p.len() != set[0].len()) {
            return Err(GlcError::DimensionMismatch {
                expected: set[0].len(),
                found: bad.len(),
            });
        }
    }
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut stress = 0.0;
    let mut pairs = 0usize;
    for u in 0..high.len() {
        for v in u + 1..high.len() {
            let denom = squared_distance(&high[u], &high[v]);
            if denom == 0.0 {
                return Err(GlcError::InvalidInput(format!(
                    "points {u} and {v} coincide in the original space"
                )));
            }
            let ratio = squared_distance(&low[u], &low[v]) / denom;
            max_ratio = max_ratio.max(ratio);
            min_ratio = min_ratio.min(ratio);
            stress += (ratio - 1.0) * (ratio - 1.0);
            pairs += 1;
        }
    }
    Ok(DistortionReport {
        max_ratio,
        min_ratio,
        mean_stress: stress / pairs as f64,
        pair_count: pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIG11: [f64; 6] = [0.2, 0.4, 0.1, 0.6, 0.4, 0.8];
    const FIG18: [f64; 6] = [3.0, 2.0, 1.0, 4.0, 2.0, 6.0];

    #[test]
    fn pc_examples() {
        let g = encode_pc(&[0.5, 0.7]).unwrap();
        assert_eq!(g.nodes, vec![[0.0, 0.5], [1.0, 0.7]]);
        let g = encode_pc(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(g.nodes, vec![[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]]);
        assert_eq!(encode_pc(&vec![0.3; 48]).unwrap().nodes.len(), 48);
    }

    #[test]
    fn cpc_examples() {
        let g = encode_cpc(&FIG11, &PairingSpec::identity(6)).unwrap();
        assert_eq!(g.nodes, vec![[0.2, 0.4], [0.1, 0.6], [0.4, 0.8]]);
        assert_eq!(g.edges().len(), 2);
        assert_eq!(decode_cpc(&g).unwrap(), FIG11.to_vec());

        let g = encode_cpc(&[0.0; 4], &PairingSpec::identity(4)).unwrap();
        assert_eq!(g.nodes, vec![[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(g.edges(), vec![(0, 1)]);

        let g = encode_cpc(&[1.0, 2.0, 3.0], &PairingSpec::identity(4)).unwrap();
        assert_eq!(g.nodes, vec![[1.0, 2.0], [3.0, 3.0]]);
        assert_eq!(decode_cpc(&g).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn cpc_rejects_bad_input() {
        assert!(encode_cpc(&FIG11, &PairingSpec::identity(4)).is_err());
        let mut g = encode_cpc(&FIG11, &PairingSpec::identity(6)).unwrap();
        g.nodes.clear();
        assert!(decode_cpc(&g).is_err());
        let pc = encode_pc(&FIG11).unwrap();
        assert!(matches!(decode_cpc(&pc), Err(GlcError::WrongSystem { .. })));
    }

    #[test]
    fn pairing_validation() {
        assert!(PairingSpec::new(vec![(0, 1), (1, 2)]).is_err());
        assert!(PairingSpec::new(vec![(0, 5)]).is_err());
        assert!(PairingSpec::new(vec![]).is_err());
        assert_eq!(PairingSpec::star_chain(6).pairs(), &[(1, 2), (3, 4), (5, 0)]);
        assert!(serde_json::from_str::<PairingSpec>("[[0,0]]").is_err());
    }

    #[test]
    fn spc_fig18_pairings() {
        let offsets = [[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]];
        let g = encode_spc(&FIG18, &PairingSpec::identity(6), &offsets).unwrap();
        assert_eq!(g.local_nodes(), vec![[3.0, 2.0], [1.0, 4.0], [2.0, 6.0]]);
        assert_eq!(g.nodes, vec![[3.0, 2.0], [11.0, 4.0], [22.0, 6.0]]);
        assert_eq!(decode_spc(&g).unwrap(), FIG18.to_vec());

        let alt = PairingSpec::new(vec![(1, 0), (2, 5), (4, 3)]).unwrap();
        let g = encode_spc(&FIG18, &alt, &offsets).unwrap();
        assert_eq!(g.local_nodes(), vec![[2.0, 3.0], [1.0, 6.0], [2.0, 4.0]]);
        assert_eq!(decode_spc(&g).unwrap(), FIG18.to_vec());
    }

    #[test]
    fn spc_zero_vector_sits_on_offsets() {
        let offsets = [[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]];
        let g = encode_spc(&[0.0; 6], &PairingSpec::identity(6), &offsets).unwrap();
        assert_eq!(g.nodes, offsets.to_vec());
    }

    #[test]
    fn spc_rejects_coinciding_planes() {
        let offsets = [[0.0, 0.0], [0.0, 0.0], [4.0, 0.0]];
        assert!(matches!(
            encode_spc(&FIG18, &PairingSpec::identity(6), &offsets),
            Err(GlcError::InvalidSpec(_))
        ));
    }

    #[test]
    fn stars_examples() {
        let spec = CoordinateSystemSpec::default_stars(3);
        let g = encode_cpc_stars(&[0.0; 6], &spec).unwrap();
        assert!(g.nodes.iter().all(|n| n[0] == 0.0 && n[1] == 0.0));
        let big = CoordinateSystemSpec::default_stars(96);
        let g = encode_cpc_stars(&vec![0.5; 192], &big).unwrap();
        assert_eq!(g.nodes.len(), 96);
        assert!(encode_cpc_stars(&[0.0; 8], &spec).is_err());
        // (x2, x3) on the first axis at angle 0: radial x2, tangential x3.
        let g = encode_cpc_stars(&[0.1, 0.2, 0.3, 0.4], &CoordinateSystemSpec::default_stars(2)).unwrap();
        assert!((g.nodes[0][0] - 0.2).abs() < 1e-15 && (g.nodes[0][1] - 0.3).abs() < 1e-15);
        // (x4, x1) on the axis at π: both components flip.
        assert!((g.nodes[1][0] + 0.4).abs() < 1e-15 && (g.nodes[1][1] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn star_angles_validated() {
        let bad = CoordinateSystemSpec::CpcStars {
            angles: vec![1.0, 0.5],
        };
        assert!(bad.validate().is_err());
        let bad = CoordinateSystemSpec::CpcStars { angles: vec![TAU] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn inline_examples() {
        assert_eq!(encode_inline(&[0.5], &[0.0]).unwrap().nodes, vec![[0.5, 0.0]]);
        assert_eq!(
            encode_inline(&[1.0, 1.0], &[0.0, 2.0]).unwrap().nodes,
            vec![[1.0, 0.0], [3.0, 0.0]]
        );
        assert_eq!(
            encode_inline(&[0.0, 0.0], &[0.0, 2.0]).unwrap().nodes,
            vec![[0.0, 0.0], [2.0, 0.0]]
        );
        assert!(encode_inline(&[1.0, 1.0], &[2.0, 2.0]).is_err());
    }

    #[test]
    fn graph_distance_examples() {
        let p = PairingSpec::identity(4);
        let gx = encode_cpc(&[0.0; 4], &p).unwrap();
        let gy = encode_cpc(&[1.0; 4], &p).unwrap();
        assert!((graph_distance(&gx, &gy, 2).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(graph_distance(&gx, &gy, 1).unwrap(), 4.0);
        assert_eq!(graph_distance(&gx, &gx, 2).unwrap(), 0.0);
        let pc = encode_pc(&[0.0; 4]).unwrap();
        assert!(graph_distance(&gx, &pc, 1).is_err());
        assert!(graph_distance(&gx, &gy, 3).is_err());
    }

    #[test]
    fn odd_padding_not_counted_in_distance() {
        let p = PairingSpec::identity(4);
        let gx = encode_cpc(&[0.0, 0.0, 0.0], &p).unwrap();
        let gy = encode_cpc(&[0.0, 0.0, 1.0], &p).unwrap();
        assert_eq!(graph_distance(&gx, &gy, 1).unwrap(), 1.0);
    }

    #[test]
    fn graph_json_shape() {
        let g = encode_spc(&FIG18, &PairingSpec::identity(6), &[[0.0, 0.0], [7.0, 0.0], [14.0, 0.0]]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(v["system"], "spc");
        assert_eq!(v["pairing"][1], serde_json::json!([2, 3]));
        assert_eq!(v["offsets"][1], serde_json::json!([7.0, 0.0]));
        assert_eq!(v["nodes"][0], serde_json::json!([3.0, 2.0]));
        assert_eq!(v["plane_index"], serde_json::json!([0, 1, 2]));
        let back: GlcGraph = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn distortion_examples() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 3.0]];
        let r = mapping_distortion(&pts, &pts).unwrap();
        assert_eq!((r.max_ratio, r.min_ratio, r.mean_stress, r.pair_count), (1.0, 1.0, 0.0, 3));
        let collapsed = vec![vec![5.0]; 3];
        assert_eq!(mapping_distortion(&pts, &collapsed).unwrap().min_ratio, 0.0);
        let dup = vec![vec![1.0], vec![1.0]];
        assert!(mapping_distortion(&dup, &dup).is_err());
    }

    fn point(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        n.prop_flat_map(|n| prop::collection::vec(-5.0f64..5.0, n))
    }

    proptest! {
        #[test]
        fn every_system_round_trips(x in point(1..40)) {
            for kind in [SystemKind::ParallelCoords, SystemKind::Cpc, SystemKind::Spc, SystemKind::CpcStars, SystemKind::InLine] {
                let system = CoordinateSystemSpec::default_for(kind, x.len());
                let g = encode(&x, &system, None).unwrap();
                let expected_nodes = if kind.is_paired() { x.len().div_ceil(2) } else { x.len() };
                prop_assert_eq!(g.nodes.len(), expected_nodes);
                let back = decode(&g).unwrap();
                prop_assert_eq!(back.len(), x.len());
                for (a, b) in back.iter().zip(&x) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn spc_nodes_stay_in_their_square(x in prop::collection::vec(0.0f64..=1.0, 2..20)) {
            let system = CoordinateSystemSpec::default_for(SystemKind::Spc, x.len());
            let g = encode(&x, &system, None).unwrap();
            let CoordinateSystemSpec::Spc { offsets } = &g.system else { unreachable!() };
            for (n, &k) in g.nodes.iter().zip(&g.plane_index) {
                let o = offsets[k];
                prop_assert!(n[0] >= o[0] && n[0] <= o[0] + 1.0);
                prop_assert!(n[1] >= o[1] && n[1] <= o[1] + 1.0);
            }
        }

        #[test]
        fn orthogonal_projection_never_expands(
            pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 3..8)
        ) {
            let low: Vec<Vec<f64>> = pts.iter().map(|p| p[..2].to_vec()).collect();
            if let Ok(r) = mapping_distortion(&pts, &low) {
                prop_assert!(r.max_ratio <= 1.0 + 1e-12);
                prop_assert!(r.min_ratio <= r.max_ratio);
            }
        }
    }
}
