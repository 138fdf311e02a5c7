//! Interpretable rules.
//!
//! * Step rules: a 2-D linear boundary replaced by a staircase, one interval
//!   rule per step, or a single local rule generated for one case.
//! * Rectangle rules over Shifted Paired Coordinate planes, found by the
//!   filter / search / present procedure ([`fsp_search`]).
//! * Arrow fields of consecutive CPC states and per-cell long/short
//!   dominance.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coords::PairingSpec;
use crate::dataset::{pad_even, Dataset};
use crate::error::{GlcError, Result};

fn fmt_num(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

// ---------------------------------------------------------------------------
// Step rules
// ---------------------------------------------------------------------------

/// `a·x1 + b·x2 + c = 0`; `F > 0` is the positive side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearBoundary {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LinearBoundary {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.a * x1 + self.b * x2 + self.c
    }

    /// The boundary's `x2` at `x1`; requires `b != 0`.
    pub fn height(&self, x1: f64) -> f64 {
        -(self.a * x1 + self.c) / self.b
    }

    pub fn slope(&self) -> f64 {
        -self.a / self.b
    }

    /// Sign oracle: `F > 0` is positive, everything else negative.
    pub fn is_positive(&self, x1: f64, x2: f64) -> bool {
        self.eval(x1, x2) > 0.0
    }
}

/// Interval `[lo, hi)` on x1 (the last step is closed) at boundary height
/// `height`, the boundary's value at the interval midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub lo: f64,
    pub hi: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRuleSet {
    pub boundary: LinearBoundary,
    pub domain: [f64; 2],
    pub resolution: f64,
    pub steps: Vec<Step>,
    /// Attribute indices read as `(x1, x2)` when evaluating on a dataset.
    pub attributes: [usize; 2],
    pub class_above: String,
    pub class_below: String,
    /// Optional measurement units for x1 and x2, echoed in rule text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<[String; 2]>,
}

/// Class names attached to the two sides of a boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideClasses {
    pub positive: String,
    pub negative: String,
}

impl Default for SideClasses {
    fn default() -> Self {
        Self {
            positive: "class 1".into(),
            negative: "class 2".into(),
        }
    }
}

fn step_count(domain: [f64; 2], resolution: f64) -> usize {
    (((domain[1] - domain[0]) / resolution) - 1e-9).ceil().max(1.0) as usize
}

fn step_at(boundary: &LinearBoundary, domain: [f64; 2], resolution: f64, i: usize, count: usize) -> Step {
    let lo = domain[0] + i as f64 * resolution;
    let hi = if i + 1 == count {
        domain[1]
    } else {
        (domain[0] + (i + 1) as f64 * resolution).min(domain[1])
    };
    let height = if boundary.a == 0.0 {
        boundary.height(0.0)
    } else {
        boundary.height(lo + (hi - lo) / 2.0)
    };
    Step { lo, hi, height }
}

fn validate_step_inputs(boundary: &LinearBoundary, domain: [f64; 2], resolution: f64) -> Result<()> {
    if boundary.a == 0.0 && boundary.b == 0.0 {
        return Err(GlcError::InvalidInput("boundary has no direction".into()));
    }
    if boundary.b == 0.0 {
        return Err(GlcError::VerticalBoundary {
            threshold: -boundary.c / boundary.a,
        });
    }
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(GlcError::InvalidInput("resolution must be positive".into()));
    }
    if !(domain[0] < domain[1]) {
        return Err(GlcError::InvalidInput("domain must satisfy lo < hi".into()));
    }
    Ok(())
}

fn sides(boundary: &LinearBoundary, classes: &SideClasses) -> (String, String) {
    // F > 0 above the line exactly when b > 0
    if boundary.b > 0.0 {
        (classes.positive.clone(), classes.negative.clone())
    } else {
        (classes.negative.clone(), classes.positive.clone())
    }
}

/// Interpolates the boundary by a step function over `domain` on x1. A
/// horizontal boundary yields a single step; a vertical one is reported as
/// [`GlcError::VerticalBoundary`] carrying the single-attribute threshold.
pub fn linear_to_steps(
    boundary: LinearBoundary,
    domain: [f64; 2],
    resolution: f64,
    classes: &SideClasses,
) -> Result<StepRuleSet> {
    validate_step_inputs(&boundary, domain, resolution)?;
    let count = if boundary.a == 0.0 { 1 } else { step_count(domain, resolution) };
    let steps = if count == 1 {
        vec![Step {
            lo: domain[0],
            hi: domain[1],
            height: step_at(&boundary, domain, domain[1] - domain[0], 0, 1).height,
        }]
    } else {
        (0..count).map(|i| step_at(&boundary, domain, resolution, i, count)).collect()
    };
    let (class_above, class_below) = sides(&boundary, classes);
    Ok(StepRuleSet {
        boundary,
        domain,
        resolution,
        steps,
        attributes: [0, 1],
        class_above,
        class_below,
        units: None,
    })
}

impl StepRuleSet {
    fn step_index(&self, x1: f64) -> Result<usize> {
        if !(x1 >= self.domain[0] && x1 <= self.domain[1]) {
            return Err(GlcError::Domain(format!(
                "x1 = {x1} lies outside [{}, {}]; extend the domain",
                self.domain[0], self.domain[1]
            )));
        }
        let idx = self.steps.partition_point(|s| s.lo <= x1);
        Ok(idx.saturating_sub(1))
    }

    /// `x2 > height` is `class_above`; on or below the step is `class_below`.
    pub fn classify(&self, x1: f64, x2: f64) -> Result<&str> {
        let s = &self.steps[self.step_index(x1)?];
        Ok(if x2 > s.height {
            &self.class_above
        } else {
            &self.class_below
        })
    }

    /// Half-height of the band around the boundary outside which the steps
    /// and the linear rule agree.
    pub fn band_half_height(&self) -> f64 {
        if self.boundary.a == 0.0 {
            0.0
        } else {
            self.boundary.slope().abs() * self.resolution / 2.0
        }
    }

    pub fn to_text(&self) -> Vec<String> {
        let last = self.steps.len() - 1;
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| render_step_rule(self, s, i == last, true))
            .collect()
    }
}

fn unit(rules: &StepRuleSet, k: usize) -> String {
    rules
        .units
        .as_ref()
        .map(|u| format!(" {}", u[k]))
        .unwrap_or_default()
}

fn render_step_rule(rules: &StepRuleSet, s: &Step, closed: bool, above: bool) -> String {
    let (u1, u2) = (unit(rules, 0), unit(rules, 1));
    let upper = if closed { "≤" } else { "<" };
    let (cmp, class) = if above {
        (">", &rules.class_above)
    } else {
        ("≤", &rules.class_below)
    };
    format!(
        "If {}{u1} ≤ x1 {upper} {}{u1} and x2 {cmp} {}{u2} then {class}",
        fmt_num(s.lo),
        fmt_num(s.hi),
        fmt_num(s.height)
    )
}

/// The one interval rule that applies to a single case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRule {
    pub step_index: usize,
    pub step: Step,
    pub upper_closed: bool,
    /// Whether the case lies above the step.
    pub above: bool,
    pub predicted: String,
    pub text: String,
}

/// Builds only the step containing `x[0]`, without materializing the rest
/// of the staircase.
pub fn rule_for_case(
    x: [f64; 2],
    boundary: LinearBoundary,
    domain: [f64; 2],
    resolution: f64,
    classes: &SideClasses,
) -> Result<LocalRule> {
    validate_step_inputs(&boundary, domain, resolution)?;
    let [x1, x2] = x;
    if !(x1 >= domain[0] && x1 <= domain[1]) {
        return Err(GlcError::Domain(format!(
            "x1 = {x1} lies outside [{}, {}]; extend the domain",
            domain[0], domain[1]
        )));
    }
    let count = if boundary.a == 0.0 { 1 } else { step_count(domain, resolution) };
    let width = if count == 1 { domain[1] - domain[0] } else { resolution };
    let mut i = (((x1 - domain[0]) / width).floor().max(0.0) as usize).min(count - 1);
    // floor() can land one step off near an edge; correct against the bounds
    while i > 0 && x1 < step_at(&boundary, domain, width, i, count).lo {
        i -= 1;
    }
    while i + 1 < count && x1 >= step_at(&boundary, domain, width, i + 1, count).lo {
        i += 1;
    }
    let step = step_at(&boundary, domain, width, i, count);
    let (class_above, class_below) = sides(&boundary, classes);
    let above = x2 > step.height;
    let shell = StepRuleSet {
        boundary,
        domain,
        resolution,
        steps: vec![step],
        attributes: [0, 1],
        class_above: class_above.clone(),
        class_below: class_below.clone(),
        units: None,
    };
    let upper_closed = i + 1 == count;
    Ok(LocalRule {
        step_index: i,
        step,
        upper_closed,
        above,
        predicted: if above { class_above } else { class_below },
        text: render_step_rule(&shell, &step, upper_closed, above),
    })
}

// ---------------------------------------------------------------------------
// Rectangle rules
// ---------------------------------------------------------------------------

/// Closed axis-aligned rectangle in one pair plane's local coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let r = Self { x_lo, x_hi, y_lo, y_hi };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.x_lo, self.x_hi, self.y_lo, self.y_hi];
        if vals.iter().any(|v| !v.is_finite()) || !(self.x_lo < self.x_hi) || !(self.y_lo < self.y_hi) {
            return Err(GlcError::InvalidGeometry(format!(
                "rectangle [{}, {}] x [{}, {}] has no area",
                self.x_lo, self.x_hi, self.y_lo, self.y_hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_lo && p[0] <= self.x_hi && p[1] >= self.y_lo && p[1] <= self.y_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    /// Index into the active pairing.
    pub plane: usize,
    pub rect: Rect,
    pub membership: Membership,
}

impl Clause {
    fn holds(&self, p: [f64; 2]) -> bool {
        self.rect.contains(p) == (self.membership == Membership::Inside)
    }
}

/// `If clause_1 & clause_2 & ... then then_class else else_class`. With no
/// clauses every case gets `then_class`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectRule {
    pub clauses: Vec<Clause>,
    pub then_class: String,
    pub else_class: String,
}

impl RectRule {
    pub fn validate(&self, pairing: &PairingSpec) -> Result<()> {
        for c in &self.clauses {
            c.rect.validate()?;
            if c.plane >= pairing.len() {
                return Err(GlcError::InvalidGeometry(format!(
                    "clause plane {} not in a pairing of {} planes",
                    c.plane,
                    pairing.len()
                )));
            }
        }
        Ok(())
    }

    /// Whether every clause holds for the (padded) point.
    pub fn fires(&self, padded: &[f64], pairing: &PairingSpec) -> bool {
        self.clauses.iter().all(|c| {
            let (i, j) = pairing.pairs()[c.plane];
            c.holds([padded[i], padded[j]])
        })
    }

    pub fn predict(&self, x: &[f64], pairing: &PairingSpec) -> Result<&str> {
        let padded = pad_even(x);
        if padded.len() != pairing.width() {
            return Err(GlcError::InvalidPairing(format!(
                "pairing covers {} coordinates, point has {}",
                pairing.width(),
                padded.len()
            )));
        }
        Ok(if self.fires(&padded, pairing) {
            &self.then_class
        } else {
            &self.else_class
        })
    }

    /// Readable form, e.g.
    /// `If (x8,x9) ∈ R1 & (x6,x7) ∉ R2 then x ∈ class Red else x ∈ class Blue`
    /// followed by one line per rectangle.
    pub fn to_text(&self, pairing: &PairingSpec) -> String {
        let mut out = String::from("If ");
        if self.clauses.is_empty() {
            out.push_str("true");
        }
        let parts: Vec<String> = self
            .clauses
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let (i, j) = pairing.pairs().get(c.plane).copied().unwrap_or((0, 0));
                let sym = match c.membership {
                    Membership::Inside => "∈",
                    Membership::Outside => "∉",
                };
                format!("(x{},x{}) {sym} R{}", i + 1, j + 1, k + 1)
            })
            .collect();
        out.push_str(&parts.join(" & "));
        out.push_str(&format!(
            " then x ∈ class {} else x ∈ class {}",
            self.then_class, self.else_class
        ));
        for (k, c) in self.clauses.iter().enumerate() {
            out.push_str(&format!(
                "\n  R{} = [{}, {}] × [{}, {}]",
                k + 1,
                fmt_num(c.rect.x_lo),
                fmt_num(c.rect.x_hi),
                fmt_num(c.rect.y_lo),
                fmt_num(c.rect.y_hi)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnyRule {
    Rect(RectRule),
    Steps(StepRuleSet),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleEvalReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// actual class -> predicted class -> count
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
    /// Rows for which the rule fires (all clauses hold / above the steps).
    pub covered: Vec<usize>,
}

/// Counts by direct evaluation of every row.
pub fn evaluate_rule(rule: &AnyRule, d: &Dataset, pairing: &PairingSpec) -> Result<RuleEvalReport> {
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut covered = Vec::new();
    let mut correct = 0;
    match rule {
        AnyRule::Rect(r) => {
            r.validate(pairing)?;
            let m = d.n_attributes() + d.n_attributes() % 2;
            if m != pairing.width() {
                return Err(GlcError::InvalidPairing(format!(
                    "pairing covers {} coordinates, dataset has {m} after padding",
                    pairing.width()
                )));
            }
            for (row, (x, label)) in d.rows().iter().zip(d.labels()).enumerate() {
                let padded = pad_even(x);
                let fires = r.fires(&padded, pairing);
                let predicted = if fires { &r.then_class } else { &r.else_class };
                if fires {
                    covered.push(row);
                }
                if predicted == label {
                    correct += 1;
                }
                *confusion
                    .entry(label.clone())
                    .or_default()
                    .entry(predicted.clone())
                    .or_insert(0) += 1;
            }
        }
        AnyRule::Steps(s) => {
            let [i, j] = s.attributes;
            if i >= d.n_attributes() || j >= d.n_attributes() {
                return Err(GlcError::DimensionMismatch {
                    expected: d.n_attributes(),
                    found: i.max(j) + 1,
                });
            }
            for (row, (x, label)) in d.rows().iter().zip(d.labels()).enumerate() {
                let predicted = s.classify(x[i], x[j])?;
                if predicted == s.class_above {
                    covered.push(row);
                }
                if predicted == label {
                    correct += 1;
                }
                *confusion
                    .entry(label.clone())
                    .or_default()
                    .entry(predicted.to_string())
                    .or_insert(0) += 1;
            }
        }
    }
    Ok(RuleEvalReport {
        accuracy: correct as f64 / d.len() as f64,
        correct,
        total: d.len(),
        confusion,
        covered,
    })
}

// ---------------------------------------------------------------------------
// FSP search
// ---------------------------------------------------------------------------

/// Per-attribute quantile grid. Inner boundaries sit halfway between
/// consecutive distinct data values, so no training value ever lies on one;
/// the outer boundaries are the observed min and max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileGrid {
    pub bounds: Vec<f64>,
}

impl QuantileGrid {
    pub fn from_values(values: &[f64], levels: usize) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = sorted.clone();
        distinct.dedup();
        let (lo, hi) = (distinct[0], *distinct.last().unwrap());
        if distinct.len() == 1 {
            return Self {
                bounds: vec![lo - 0.5, hi + 0.5],
            };
        }
        let n = sorted.len();
        let mut inner = BTreeSet::new();
        for q in 1..levels.max(1) {
            let idx = ((q * n).div_ceil(levels)).saturating_sub(1).min(n - 1);
            let v = sorted[idx];
            let pos = distinct.partition_point(|d| *d <= v);
            if pos < distinct.len() {
                let cut = v + (distinct[pos] - v) / 2.0;
                inner.insert(cut.to_bits());
            }
        }
        let mut bounds = vec![lo];
        let mut cuts: Vec<f64> = inner.into_iter().map(f64::from_bits).collect();
        cuts.sort_by(f64::total_cmp);
        bounds.extend(cuts.into_iter().filter(|c| *c > lo && *c < hi));
        bounds.push(hi);
        Self { bounds }
    }

    pub fn cells(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn cell_of(&self, v: f64) -> usize {
        let inner = &self.bounds[1..self.bounds.len() - 1];
        inner.partition_point(|c| *c < v)
    }

    /// Closed interval spanned by cells `first..=last`.
    pub fn span(&self, first: usize, last: usize) -> (f64, f64) {
        (self.bounds[first], self.bounds[last + 1])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FspConfig {
    /// Pairings examined; beyond this the pairing space is sampled.
    pub max_pairings: usize,
    /// Quantile levels per attribute grid.
    pub levels: usize,
    pub clause_budget: usize,
    /// Fraction of pairings kept after filtering.
    pub keep_fraction: f64,
    pub seed: u64,
    /// Continue the search from these clauses on this pairing only.
    pub start: Option<FspStart>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FspStart {
    pub pairing: PairingSpec,
    pub clauses: Vec<Clause>,
}

impl Default for FspConfig {
    fn default() -> Self {
        Self {
            max_pairings: 1000,
            levels: 10,
            clause_budget: 3,
            keep_fraction: 0.25,
            seed: 0,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FspResult {
    pub pairing: PairingSpec,
    pub rule: RectRule,
    pub report: RuleEvalReport,
    pub pairings_considered: usize,
    pub pairings_kept: usize,
    pub text: String,
}

/// `(m-1)!!` perfect matchings of `m` coordinates, saturating.
pub fn pairing_count(m: usize) -> u128 {
    let mut acc: u128 = 1;
    let mut k = m.saturating_sub(1);
    while k > 1 {
        acc = acc.saturating_mul(k as u128);
        k -= 2;
    }
    acc
}

fn canonical_pairs(mut pairs: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    for p in pairs.iter_mut() {
        if p.0 > p.1 {
            *p = (p.1, p.0);
        }
    }
    pairs.sort();
    pairs
}

fn enumerate_pairings(m: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut Vec<usize>, acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(acc.clone());
            return;
        }
        let first = free.remove(0);
        for k in 0..free.len() {
            let other = free.remove(k);
            acc.push((first, other));
            rec(free, acc, out);
            acc.pop();
            free.insert(k, other);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    rec(&mut (0..m).collect(), &mut Vec::new(), &mut out);
    out
}

fn candidate_pairings(m: usize, max: usize, seed: u64) -> Vec<Vec<(usize, usize)>> {
    let max = max.max(1);
    if pairing_count(m) <= max as u128 {
        return enumerate_pairings(m);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    set.insert(PairingSpec::identity(m).pairs().to_vec());
    let mut perm: Vec<usize> = (0..m).collect();
    let mut attempts = 0;
    while set.len() < max && attempts < max * 50 {
        perm.shuffle(&mut rng);
        set.insert(canonical_pairs(perm.chunks(2).map(|c| (c[0], c[1])).collect()));
        attempts += 1;
    }
    set.into_iter().collect()
}

/// Training data laid out for the search: per padded coordinate grid and
/// cell index of every row.
struct SearchData {
    grids: Vec<QuantileGrid>,
    cells: Vec<Vec<usize>>,
    padded: Vec<Vec<f64>>,
    positive: Vec<bool>,
    total_pos: usize,
    total_neg: usize,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    correct: usize,
    plane: usize,
    cx: (usize, usize),
    cy: (usize, usize),
    membership: Membership,
    then_positive: bool,
}

impl SearchData {
    fn new(d: &Dataset, positive_class: &str, levels: usize) -> Self {
        let padded: Vec<Vec<f64>> = d.rows().iter().map(|r| pad_even(r)).collect();
        let m = padded[0].len();
        let grids: Vec<QuantileGrid> = (0..m)
            .map(|j| {
                let col: Vec<f64> = padded.iter().map(|r| r[j]).collect();
                QuantileGrid::from_values(&col, levels)
            })
            .collect();
        let cells = (0..m)
            .map(|j| padded.iter().map(|r| grids[j].cell_of(r[j])).collect())
            .collect();
        let positive: Vec<bool> = d.labels().iter().map(|l| l == positive_class).collect();
        let total_pos = positive.iter().filter(|p| **p).count();
        Self {
            grids,
            cells,
            padded,
            total_neg: positive.len() - total_pos,
            total_pos,
            positive,
        }
    }

    fn correct(&self, cov_pos: usize, cov_neg: usize) -> (usize, bool) {
        let as_pos = cov_pos + (self.total_neg - cov_neg);
        let as_neg = cov_neg + (self.total_pos - cov_pos);
        if as_neg > as_pos {
            (as_neg, false)
        } else {
            (as_pos, true)
        }
    }

    /// Best single clause on plane `(i, j)` given the currently covered rows.
    /// Enumeration order: inside before outside, then x span, then y span.
    fn best_clause(&self, plane: usize, (i, j): (usize, usize), covered: &[bool]) -> Option<Candidate> {
        let (gx, gy) = (self.grids[i].cells(), self.grids[j].cells());
        // 2-D prefix counts of covered positives / negatives
        let w = gy + 1;
        let mut pos = vec![0usize; (gx + 1) * w];
        let mut neg = vec![0usize; (gx + 1) * w];
        let (mut cov_pos, mut cov_neg) = (0, 0);
        for (r, _) in covered.iter().enumerate().filter(|(_, c)| **c) {
            let (cx, cy) = (self.cells[i][r], self.cells[j][r]);
            if self.positive[r] {
                pos[(cx + 1) * w + cy + 1] += 1;
                cov_pos += 1;
            } else {
                neg[(cx + 1) * w + cy + 1] += 1;
                cov_neg += 1;
            }
        }
        for a in 1..=gx {
            for b in 1..=gy {
                pos[a * w + b] += pos[(a - 1) * w + b] + pos[a * w + b - 1] - pos[(a - 1) * w + b - 1];
                neg[a * w + b] += neg[(a - 1) * w + b] + neg[a * w + b - 1] - neg[(a - 1) * w + b - 1];
            }
        }
        let sum = |t: &[usize], x0: usize, x1: usize, y0: usize, y1: usize| {
            t[(x1 + 1) * w + y1 + 1] + t[x0 * w + y0] - t[x0 * w + y1 + 1] - t[(x1 + 1) * w + y0]
        };
        let mut best: Option<Candidate> = None;
        for membership in [Membership::Inside, Membership::Outside] {
            for x0 in 0..gx {
                for x1 in x0..gx {
                    for y0 in 0..gy {
                        for y1 in y0..gy {
                            let in_pos = sum(&pos, x0, x1, y0, y1);
                            let in_neg = sum(&neg, x0, x1, y0, y1);
                            let (p, n) = match membership {
                                Membership::Inside => (in_pos, in_neg),
                                Membership::Outside => (cov_pos - in_pos, cov_neg - in_neg),
                            };
                            let (correct, then_positive) = self.correct(p, n);
                            if best.is_none_or(|b| correct > b.correct) {
                                best = Some(Candidate {
                                    correct,
                                    plane,
                                    cx: (x0, x1),
                                    cy: (y0, y1),
                                    membership,
                                    then_positive,
                                });
                            }
                        }
                    }
                }
            }
        }
        best
    }

    fn clause_of(&self, c: &Candidate, (i, j): (usize, usize)) -> Clause {
        let (x_lo, x_hi) = self.grids[i].span(c.cx.0, c.cx.1);
        let (y_lo, y_hi) = self.grids[j].span(c.cy.0, c.cy.1);
        Clause {
            plane: c.plane,
            rect: Rect { x_lo, x_hi, y_lo, y_hi },
            membership: c.membership,
        }
    }

    fn counts(&self, covered: &[bool]) -> (usize, usize) {
        covered
            .iter()
            .zip(&self.positive)
            .filter(|(c, _)| **c)
            .fold((0, 0), |(p, n), (_, pos)| if *pos { (p + 1, n) } else { (p, n + 1) })
    }
}

struct Grown {
    clauses: Vec<Clause>,
    correct: usize,
    then_positive: bool,
}

fn grow(data: &SearchData, pairing: &[(usize, usize)], start: &[Clause], budget: usize) -> Grown {
    let pairing_spec = PairingSpec::new(pairing.to_vec()).expect("candidate pairings are valid");
    let mut clauses = start.to_vec();
    let seed_rule = RectRule {
        clauses: clauses.clone(),
        then_class: String::new(),
        else_class: String::new(),
    };
    let mut covered: Vec<bool> = data.padded.iter().map(|x| seed_rule.fires(x, &pairing_spec)).collect();
    let (p, n) = data.counts(&covered);
    let (mut correct, mut then_positive) = data.correct(p, n);
    while clauses.len() < budget {
        let best = pairing
            .iter()
            .enumerate()
            .filter_map(|(k, &pair)| data.best_clause(k, pair, &covered))
            .fold(None::<Candidate>, |acc, c| match acc {
                Some(a) if a.correct >= c.correct => Some(a),
                _ => Some(c),
            });
        let Some(best) = best else { break };
        if best.correct <= correct {
            break;
        }
        let clause = data.clause_of(&best, pairing[best.plane]);
        let (i, j) = pairing[best.plane];
        for (r, cov) in covered.iter_mut().enumerate() {
            if *cov {
                *cov = clause.holds([data.padded[r][i], data.padded[r][j]]);
            }
        }
        clauses.push(clause);
        correct = best.correct;
        then_positive = best.then_positive;
    }
    Grown {
        clauses,
        correct,
        then_positive,
    }
}

/// Filter / search / present over SPC pairings of a binary dataset.
///
/// Filtering scores each candidate pairing by its best single-plane
/// rectangle and keeps the top `keep_fraction`. Searching greedily adds the
/// clause (rectangle on the quantile grid, inside or outside) that most
/// improves training accuracy, until the clause budget is spent or nothing
/// improves. Presenting returns the best rule by accuracy, then fewer
/// clauses, then lexicographic pairing.
type Pairs = Vec<(usize, usize)>;

pub fn fsp_search(d: &Dataset, positive_class: Option<&str>, cfg: &FspConfig) -> Result<FspResult> {
    let (negative, positive) = d.binary_classes(positive_class)?;
    if d.n_attributes() < 4 {
        return Err(GlcError::InvalidInput("FSP needs at least 4 attributes".into()));
    }
    let data = SearchData::new(d, &positive, cfg.levels.max(1));
    if data.total_pos == 0 || data.total_neg == 0 {
        return Err(GlcError::Class("a class is empty".into()));
    }
    let m = d.n_attributes() + d.n_attributes() % 2;

    let (kept, considered, start): (Vec<Pairs>, usize, Vec<Clause>) = match &cfg.start {
        Some(s) => {
            if s.pairing.width() != m {
                return Err(GlcError::InvalidPairing("start pairing does not fit the dataset".into()));
            }
            let probe = RectRule {
                clauses: s.clauses.clone(),
                then_class: positive.clone(),
                else_class: negative.clone(),
            };
            probe.validate(&s.pairing)?;
            (vec![s.pairing.pairs().to_vec()], 1, s.clauses.clone())
        }
        None => {
            let candidates = candidate_pairings(m, cfg.max_pairings, cfg.seed);
            let all = vec![true; d.len()];
            let mut single: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for p in &candidates {
                for &(i, j) in p {
                    let key = (i.min(j), i.max(j));
                    single
                        .entry(key)
                        .or_insert_with(|| data.best_clause(0, key, &all).map_or(0, |c| c.correct));
                }
            }
            let mut scored: Vec<(usize, &Vec<(usize, usize)>)> = candidates
                .iter()
                .map(|p| {
                    let s = p
                        .iter()
                        .map(|&(i, j)| single[&(i.min(j), i.max(j))])
                        .max()
                        .unwrap_or(0);
                    (s, p)
                })
                .collect();
            scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
            let keep = ((candidates.len() as f64 * cfg.keep_fraction).ceil() as usize).clamp(1, candidates.len());
            let kept = scored.into_iter().take(keep).map(|(_, p)| p.clone()).collect();
            (kept, candidates.len(), Vec::new())
        }
    };

    let grown: Vec<(Vec<(usize, usize)>, Grown)> = kept
        .par_iter()
        .map(|p| (p.clone(), grow(&data, p, &start, cfg.clause_budget.max(start.len()))))
        .collect();
    let (pairs, best) = grown
        .into_iter()
        .reduce(|a, b| {
            let key_a = (std::cmp::Reverse(a.1.correct), a.1.clauses.len());
            let key_b = (std::cmp::Reverse(b.1.correct), b.1.clauses.len());
            match key_a.cmp(&key_b).then_with(|| a.0.cmp(&b.0)) {
                std::cmp::Ordering::Greater => b,
                _ => a,
            }
        })
        .expect("at least one pairing kept");

    let pairing = PairingSpec::new(pairs)?;
    let (then_class, else_class) = if best.then_positive {
        (positive, negative)
    } else {
        (negative, positive)
    };
    let rule = RectRule {
        clauses: best.clauses,
        then_class,
        else_class,
    };
    let report = evaluate_rule(&AnyRule::Rect(rule.clone()), d, &pairing)?;
    debug_assert_eq!(report.correct, best.correct);
    let text = rule.to_text(&pairing);
    Ok(FspResult {
        pairing,
        rule,
        report,
        pairings_considered: considered,
        pairings_kept: kept.len(),
        text,
    })
}

// ---------------------------------------------------------------------------
// Arrow fields
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Long,
    Short,
}

/// From state `(V, Y)` at time i to the state at i+1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    pub tail: [f64; 2],
    pub head: [f64; 2],
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrowField {
    pub arrows: Vec<Arrow>,
}

/// One arrow per consecutive pair of `(V, Y)` states; long iff Y increased.
pub fn build_arrow_field(series: &[[f64; 2]]) -> Result<ArrowField> {
    if series.len() < 2 {
        return Err(GlcError::InvalidInput("need at least two time points".into()));
    }
    let arrows = series
        .windows(2)
        .map(|w| Arrow {
            tail: w[0],
            head: w[1],
            position: if w[1][1] > w[0][1] {
                Position::Long
            } else {
                Position::Short
            },
        })
        .collect();
    Ok(ArrowField { arrows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrowGrid {
    pub origin: [f64; 2],
    pub cell_size: [f64; 2],
    pub cols: usize,
    pub rows: usize,
    /// Cells with `long / (long + short) >= threshold` are flagged.
    pub threshold: f64,
}

impl ArrowGrid {
    /// A `cols × rows` grid over the bounding box of the arrow tails.
    pub fn covering(field: &ArrowField, cols: usize, rows: usize, threshold: f64) -> Result<Self> {
        if field.arrows.is_empty() {
            return Err(GlcError::InvalidInput("empty arrow field".into()));
        }
        if cols == 0 || rows == 0 {
            return Err(GlcError::InvalidInput("grid needs at least one cell".into()));
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for a in &field.arrows {
            for k in 0..2 {
                lo[k] = lo[k].min(a.tail[k]);
                hi[k] = hi[k].max(a.tail[k]);
            }
        }
        let size = |k: usize, count: usize| {
            let span = hi[k] - lo[k];
            if span > 0.0 {
                span / count as f64
            } else {
                1.0
            }
        };
        Ok(Self {
            origin: lo,
            cell_size: [size(0, cols), size(1, rows)],
            cols,
            rows,
            threshold,
        })
    }

    fn cell_of(&self, p: [f64; 2]) -> Result<(usize, usize)> {
        let idx = |k: usize, count: usize| -> Option<usize> {
            let f = (p[k] - self.origin[k]) / self.cell_size[k];
            if !(f >= 0.0) {
                return None;
            }
            let i = f.floor() as usize;
            let top = self.origin[k] + count as f64 * self.cell_size[k];
            match i {
                i if i < count => Some(i),
                // the far edge belongs to the last cell
                i if i == count && p[k] <= top * (1.0 + 1e-12) + 1e-12 => Some(count - 1),
                _ => None,
            }
        };
        match (idx(0, self.cols), idx(1, self.rows)) {
            (Some(c), Some(r)) => Ok((c, r)),
            _ => Err(GlcError::Domain(format!("arrow tail {p:?} lies outside the grid"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub col: usize,
    pub row: usize,
    pub long: usize,
    pub short: usize,
    pub dominance: f64,
    pub flagged: bool,
}

/// Long/short counts per non-empty cell, assigning each arrow to the cell of
/// its tail. Cells are ordered by `(row, col)`.
pub fn arrow_dominance(field: &ArrowField, grid: &ArrowGrid) -> Result<Vec<CellStats>> {
    if field.arrows.is_empty() {
        return Err(GlcError::InvalidInput("empty arrow field".into()));
    }
    let mut counts: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for a in &field.arrows {
        let (c, r) = grid.cell_of(a.tail)?;
        let e = counts.entry((r, c)).or_insert((0, 0));
        match a.position {
            Position::Long => e.0 += 1,
            Position::Short => e.1 += 1,
        }
    }
    Ok(counts
        .into_iter()
        .map(|((row, col), (long, short))| {
            let dominance = long as f64 / (long + short) as f64;
            CellStats {
                col,
                row,
                long,
                short,
                dominance,
                flagged: dominance >= grid.threshold,
            }
        })
        .collect())
}
