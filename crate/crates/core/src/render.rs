//! Deterministic SVG output.
//!
//! Documents are assembled from named layers in a fixed order and every
//! number is printed with six decimals, so the same inputs always give the
//! same bytes. World coordinates map to the canvas through a uniform scale
//! with the y axis flipped; the root element records the map as
//! `data-transform="a b c d e f"` (SVG matrix form) and every drawn graph
//! carries its world-space nodes in `data-nodes`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coords::{CoordinateSystemSpec, GlcGraph, PairingSpec, SystemKind};
use crate::dataset::Dataset;
use crate::error::{GlcError, Result};
use crate::glc_l::{classify, polyline, LinearModel};
use crate::rules::{ArrowField, ArrowGrid, CellStats, Membership, Position, RectRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    /// Colors for classes in order of first appearance; extra classes get
    /// generated hues.
    pub class_colors: Vec<String>,
    pub long_color: String,
    pub short_color: String,
    pub threshold_color: String,
    pub stroke_width: f64,
    pub frames: bool,
    pub legend: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 600.0,
            margin: 40.0,
            class_colors: vec!["#1f4fd8".into(), "#d62728".into(), "#2ca02c".into(), "#9467bd".into()],
            long_color: "#2ca02c".into(),
            short_color: "#d62728".into(),
            threshold_color: "#e6c200".into(),
            stroke_width: 1.0,
            frames: true,
            legend: true,
        }
    }
}

impl RenderSpec {
    pub fn class_color(&self, index: usize) -> String {
        match self.class_colors.get(index) {
            Some(c) => c.clone(),
            None => {
                let k = index - self.class_colors.len();
                // golden-angle hues, never repeating across indices in use
                let hue = (k as f64 * 137.507_764 + 17.0) % 360.0;
                format!("hsl({hue:.3},70%,45%)")
            }
        }
    }
}

fn f6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// `canvas = (scale * x + tx, -scale * y + ty)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasTransform {
    pub scale: f64,
    pub tx: f64,
    pub ty: f64,
}

impl CanvasTransform {
    fn fit(bounds: Bounds, spec: &RenderSpec, reserve_bottom: f64) -> Self {
        let w = (spec.width - 2.0 * spec.margin).max(1.0);
        let h = (spec.height - 2.0 * spec.margin - reserve_bottom).max(1.0);
        let dx = (bounds.max[0] - bounds.min[0]).max(1e-9);
        let dy = (bounds.max[1] - bounds.min[1]).max(1e-9);
        let scale = (w / dx).min(h / dy);
        Self {
            scale,
            tx: spec.margin - bounds.min[0] * scale,
            ty: spec.margin + h + bounds.min[1] * scale,
        }
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [self.scale * p[0] + self.tx, -self.scale * p[1] + self.ty]
    }

    pub fn invert(&self, c: [f64; 2]) -> [f64; 2] {
        [(c[0] - self.tx) / self.scale, (self.ty - c[1]) / self.scale]
    }

    fn pt(&self, p: [f64; 2]) -> String {
        let c = self.apply(p);
        format!("{},{}", f6(c[0]), f6(c[1]))
    }

    fn matrix(&self) -> String {
        format!(
            "{} 0.000000 0.000000 {} {} {}",
            f6(self.scale),
            f6(-self.scale),
            f6(self.tx),
            f6(self.ty)
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    min: [f64; 2],
    max: [f64; 2],
}

impl Bounds {
    fn empty() -> Self {
        Self {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        }
    }

    fn add(&mut self, p: [f64; 2]) {
        for (k, v) in p.into_iter().enumerate() {
            self.min[k] = self.min[k].min(v);
            self.max[k] = self.max[k].max(v);
        }
    }

    fn or_unit(self) -> Self {
        if self.min[0].is_finite() {
            self
        } else {
            Self {
                min: [0.0, 0.0],
                max: [1.0, 1.0],
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub id: String,
    pub elements: Vec<String>,
}

/// What a document was drawn from, kept so overlays can be placed later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneInfo {
    pub system: CoordinateSystemSpec,
    pub pairing: Option<PairingSpec>,
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgDocument {
    pub width: f64,
    pub height: f64,
    pub transform: CanvasTransform,
    pub layers: Vec<Layer>,
    pub scene: Option<SceneInfo>,
    colors: Vec<String>,
}

impl SvgDocument {
    fn new(spec: &RenderSpec, transform: CanvasTransform) -> Self {
        Self {
            width: spec.width,
            height: spec.height,
            transform,
            layers: Vec::new(),
            scene: None,
            colors: Vec::new(),
        }
    }

    pub fn layer(&self, id: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.id == id)
    }

    /// Replaces a layer of the same id in place, or appends it.
    pub fn set_layer(&mut self, layer: Layer) {
        match self.layers.iter_mut().find(|l| l.id == layer.id) {
            Some(l) => *l = layer,
            None => self.layers.push(layer),
        }
    }

    pub fn to_svg(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" data-transform=\"{t}\">",
            w = f6(self.width),
            h = f6(self.height),
            t = self.transform.matrix()
        );
        let _ = writeln!(
            out,
            "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
            f6(self.width),
            f6(self.height)
        );
        for layer in &self.layers {
            let _ = writeln!(out, "<g id=\"{}\">", esc(&layer.id));
            for e in &layer.elements {
                out.push_str(e);
                out.push('\n');
            }
            out.push_str("</g>\n");
        }
        out.push_str("</svg>\n");
        out
    }
}

fn legend_layer(classes: &[(String, String)], spec: &RenderSpec) -> Layer {
    let mut elements = Vec::new();
    let y = spec.height - spec.margin / 2.0;
    let mut x = spec.margin;
    for (name, color) in classes {
        elements.push(format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12.000000\" height=\"12.000000\" fill=\"{color}\"/>",
            f6(x),
            f6(y - 10.0)
        ));
        elements.push(format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>",
            f6(x + 16.0),
            f6(y),
            esc(name)
        ));
        x += 24.0 + 8.0 * name.chars().count() as f64;
    }
    Layer {
        id: "legend".into(),
        elements,
    }
}

fn polyline_el(t: &CanvasTransform, pts: &[[f64; 2]], attrs: &str) -> String {
    let points: Vec<String> = pts.iter().map(|p| t.pt(*p)).collect();
    format!("<polyline {attrs} fill=\"none\" points=\"{}\"/>", points.join(" "))
}

fn line_el(t: &CanvasTransform, a: [f64; 2], b: [f64; 2], attrs: &str) -> String {
    let (ca, cb) = (t.apply(a), t.apply(b));
    format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {attrs}/>",
        f6(ca[0]),
        f6(ca[1]),
        f6(cb[0]),
        f6(cb[1])
    )
}

fn text_el(t: &CanvasTransform, p: [f64; 2], dx: f64, dy: f64, s: &str) -> String {
    let c = t.apply(p);
    format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\">{}</text>",
        f6(c[0] + dx),
        f6(c[1] + dy),
        esc(s)
    )
}

fn data_nodes(nodes: &[[f64; 2]]) -> String {
    nodes
        .iter()
        .map(|p| format!("{},{}", f6(p[0]), f6(p[1])))
        .collect::<Vec<_>>()
        .join(" ")
}

/// A graph with its row id and class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledGraph {
    pub row: usize,
    pub class: String,
    pub graph: GlcGraph,
}

/// Graphs that share one coordinate system, plus what is needed to draw
/// its frames when there are no graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphScene {
    pub system: CoordinateSystemSpec,
    pub pairing: Option<PairingSpec>,
    pub dim: usize,
    pub graphs: Vec<LabeledGraph>,
}

impl GraphScene {
    pub fn new(system: CoordinateSystemSpec, pairing: Option<PairingSpec>, dim: usize) -> Self {
        Self {
            system,
            pairing,
            dim,
            graphs: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, class: impl Into<String>, graph: GlcGraph) -> Result<()> {
        if graph.system != self.system || graph.dim != self.dim {
            return Err(GlcError::WrongSystem {
                expected: self.system.kind().name(),
                found: graph.kind().name(),
            });
        }
        self.graphs.push(LabeledGraph {
            row,
            class: class.into(),
            graph,
        });
        Ok(())
    }
}

fn pair_labels(pairing: Option<&PairingSpec>, dim: usize, plane: usize) -> (String, String) {
    let m = dim + dim % 2;
    let identity = PairingSpec::identity(m.max(2));
    let p = pairing.unwrap_or(&identity);
    match p.pairs().get(plane) {
        Some(&(i, j)) => (format!("X{}", i + 1), format!("X{}", j + 1)),
        None => (String::new(), String::new()),
    }
}

/// Axis frame geometry in world coordinates: `(from, to, label)` per axis.
fn frames(scene: &GraphScene, extent: [f64; 2]) -> Vec<([f64; 2], [f64; 2], String)> {
    let [ex, ey] = extent;
    let mut out = Vec::new();
    let pairing = scene.pairing.as_ref();
    match &scene.system {
        CoordinateSystemSpec::ParallelCoords => {
            for i in 0..scene.dim {
                out.push(([i as f64, 0.0], [i as f64, ey], format!("X{}", i + 1)));
            }
        }
        CoordinateSystemSpec::Cpc => {
            let planes = scene.dim.div_ceil(2);
            let xs: Vec<String> = (0..planes).map(|k| pair_labels(pairing, scene.dim, k).0).collect();
            let ys: Vec<String> = (0..planes).map(|k| pair_labels(pairing, scene.dim, k).1).collect();
            out.push(([0.0, 0.0], [ex, 0.0], xs.join(" ")));
            out.push(([0.0, 0.0], [0.0, ey], ys.join(" ")));
        }
        CoordinateSystemSpec::Spc { offsets } => {
            for (k, o) in offsets.iter().enumerate() {
                let (xl, yl) = pair_labels(pairing, scene.dim, k);
                out.push((*o, [o[0] + ex, o[1]], xl));
                out.push((*o, [o[0], o[1] + ey], yl));
            }
        }
        CoordinateSystemSpec::CpcStars { angles } => {
            let r = ex.max(ey);
            for (k, a) in angles.iter().enumerate() {
                out.push(([0.0, 0.0], [r * a.cos(), r * a.sin()], format!("A{}", k + 1)));
            }
        }
        CoordinateSystemSpec::InLine { offsets } => {
            for (i, o) in offsets.iter().enumerate() {
                out.push(([*o, 0.0], [o + ex, 0.0], format!("X{}", i + 1)));
            }
        }
    }
    out
}

/// Semicircle arcs (above the axis) between consecutive In-Line nodes.
fn inline_path(t: &CanvasTransform, nodes: &[[f64; 2]]) -> String {
    let Some(first) = nodes.first() else {
        return String::new();
    };
    let mut d = format!("M{}", t.pt(*first).replace(',', " "));
    for w in nodes.windows(2) {
        let r = ((w[1][0] - w[0][0]).abs() / 2.0) * t.scale;
        let end = t.pt(w[1]).replace(',', " ");
        let sweep = if w[1][0] >= w[0][0] { 1 } else { 0 };
        if r == 0.0 {
            let _ = write!(d, " L{end}");
        } else {
            let _ = write!(d, " A{} {} 0 0 {sweep} {end}", f6(r), f6(r));
        }
    }
    d
}

fn class_order<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in labels {
        if !out.iter().any(|c| c == l) {
            out.push(l.to_string());
        }
    }
    out
}

/// One curve per graph, colored by class, drawn in row order.
pub fn render_graphs(scene: &GraphScene, spec: &RenderSpec) -> Result<SvgDocument> {
    let mut graphs: Vec<&LabeledGraph> = scene.graphs.iter().collect();
    graphs.sort_by_key(|g| g.row);
    if let Some(bad) = graphs.iter().find(|g| g.graph.system != scene.system) {
        return Err(GlcError::WrongSystem {
            expected: scene.system.kind().name(),
            found: bad.graph.kind().name(),
        });
    }
    let kind = scene.system.kind();

    let mut local = Bounds::empty();
    for g in &graphs {
        for p in g.graph.local_nodes() {
            local.add(p);
        }
    }
    let extent = if local.max[0].is_finite() {
        [local.max[0].max(1.0), local.max[1].max(1.0)]
    } else {
        [1.0, 1.0]
    };
    let frame_lines = if spec.frames { frames(scene, extent) } else { Vec::new() };

    let mut bounds = Bounds::empty();
    for (a, b, _) in &frame_lines {
        bounds.add(*a);
        bounds.add(*b);
    }
    for g in &graphs {
        for p in &g.graph.nodes {
            bounds.add(*p);
        }
        if kind == SystemKind::InLine {
            for w in g.graph.nodes.windows(2) {
                bounds.add([w[0][0], (w[1][0] - w[0][0]).abs() / 2.0]);
            }
        }
    }
    let bounds = bounds.or_unit();
    let reserve = if spec.legend { spec.margin * 0.5 } else { 0.0 };
    let t = CanvasTransform::fit(bounds, spec, reserve);
    let mut doc = SvgDocument::new(spec, t);

    let frame_els = frame_lines
        .iter()
        .flat_map(|(a, b, label)| {
            [
                line_el(&t, *a, *b, "stroke=\"#808080\" stroke-width=\"1.000000\" class=\"frame\""),
                text_el(&t, *b, 3.0, -3.0, label),
            ]
        })
        .collect();
    doc.set_layer(Layer {
        id: "frames".into(),
        elements: frame_els,
    });

    let classes = class_order(graphs.iter().map(|g| g.class.as_str()));
    let color = |c: &str| spec.class_color(classes.iter().position(|k| k == c).unwrap_or(0));
    let mut els = Vec::new();
    for g in &graphs {
        let attrs = format!(
            "class=\"graph\" data-row=\"{}\" data-class=\"{}\" data-nodes=\"{}\" stroke=\"{}\" stroke-width=\"{}\"",
            g.row,
            esc(&g.class),
            data_nodes(&g.graph.nodes),
            color(&g.class),
            f6(spec.stroke_width)
        );
        let attrs = if kind == SystemKind::Spc {
            format!("{attrs} data-local=\"{}\"", data_nodes(&g.graph.local_nodes()))
        } else {
            attrs
        };
        let el = match kind {
            SystemKind::CpcStars => {
                let points: Vec<String> = g.graph.nodes.iter().map(|p| t.pt(*p)).collect();
                format!("<polygon {attrs} fill=\"none\" points=\"{}\"/>", points.join(" "))
            }
            SystemKind::InLine => format!("<path {attrs} fill=\"none\" d=\"{}\"/>", inline_path(&t, &g.graph.nodes)),
            _ => polyline_el(&t, &g.graph.nodes, &attrs),
        };
        els.push(el);
    }
    doc.set_layer(Layer {
        id: "graphs".into(),
        elements: els,
    });
    doc.colors = (0..classes.len()).map(|k| spec.class_color(k)).collect();
    if spec.legend {
        let entries: Vec<(String, String)> = classes.iter().cloned().zip(doc.colors.clone()).collect();
        doc.set_layer(legend_layer(&entries, spec));
    }
    doc.scene = Some(SceneInfo {
        system: scene.system.clone(),
        pairing: scene.pairing.clone(),
        classes,
    });
    Ok(doc)
}

/// Rectangles of `rule` drawn on their planes. Inside clauses are filled in
/// the `then` class color; outside clauses are dashed outlines. Rendering
/// again replaces the previous overlay.
pub fn render_rule_overlay(base: &SvgDocument, rule: &RectRule) -> Result<SvgDocument> {
    let scene = base
        .scene
        .as_ref()
        .ok_or_else(|| GlcError::InvalidInput("document has no coordinate scene".into()))?;
    let offsets: Vec<[f64; 2]> = match &scene.system {
        CoordinateSystemSpec::Spc { offsets } => offsets.clone(),
        CoordinateSystemSpec::Cpc => vec![[0.0, 0.0]; scene.pairing.as_ref().map_or(0, |p| p.len())],
        other => {
            return Err(GlcError::WrongSystem {
                expected: "spc",
                found: other.kind().name(),
            })
        }
    };
    for c in &rule.clauses {
        c.rect.validate()?;
        if c.plane >= offsets.len() {
            return Err(GlcError::InvalidGeometry(format!(
                "clause plane {} not in a scene with {} planes",
                c.plane,
                offsets.len()
            )));
        }
    }
    let color = scene
        .classes
        .iter()
        .position(|c| *c == rule.then_class)
        .and_then(|k| base.colors.get(k).cloned())
        .unwrap_or_else(|| "#1f4fd8".into());
    let t = base.transform;
    let mut els = Vec::new();
    for (k, c) in rule.clauses.iter().enumerate() {
        let o = offsets[c.plane];
        let lo = t.apply([o[0] + c.rect.x_lo, o[1] + c.rect.y_hi]);
        let hi = t.apply([o[0] + c.rect.x_hi, o[1] + c.rect.y_lo]);
        let style = match c.membership {
            Membership::Inside => format!("fill=\"{color}\" fill-opacity=\"0.150000\" stroke=\"{color}\""),
            Membership::Outside => format!("fill=\"none\" stroke=\"{color}\" stroke-dasharray=\"6 3\""),
        };
        let membership = match c.membership {
            Membership::Inside => "inside",
            Membership::Outside => "outside",
        };
        els.push(format!(
            "<rect class=\"rule-rect\" data-clause=\"{}\" data-plane=\"{}\" data-membership=\"{membership}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {style} stroke-width=\"1.500000\"/>",
            k + 1,
            c.plane,
            f6(lo[0]),
            f6(lo[1]),
            f6(hi[0] - lo[0]),
            f6(hi[1] - lo[1])
        ));
        els.push(format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\">R{}</text>",
            f6(lo[0] + 2.0),
            f6(lo[1] + 11.0),
            k + 1
        ));
    }
    let mut doc = base.clone();
    let layer = Layer {
        id: "rules".into(),
        elements: els,
    };
    // keep the legend on top
    if doc.layer("rules").is_none() {
        if let Some(pos) = doc.layers.iter().position(|l| l.id == "legend") {
            doc.layers.insert(pos, layer);
            return Ok(doc);
        }
    }
    doc.set_layer(layer);
    Ok(doc)
}

/// Stacked GLC-L polylines, one per row. The positive class is drawn above
/// the U axis and the negative class mirrored below it; a dotted segment
/// drops each polyline's end onto U, the threshold is a vertical line, and
/// misclassified cases are dashed.
pub fn render_glc_l(d: &Dataset, model: &LinearModel, spec: &RenderSpec) -> Result<SvgDocument> {
    if model.n() != d.n_attributes() {
        return Err(GlcError::DimensionMismatch {
            expected: model.n(),
            found: d.n_attributes(),
        });
    }
    let mut lines = Vec::with_capacity(d.len());
    let mut bounds = Bounds::empty();
    bounds.add([model.threshold, 0.0]);
    for (x, label) in d.rows().iter().zip(d.labels()) {
        let line = polyline(x, model)?;
        let up = *label == model.positive_class;
        let nodes: Vec<[f64; 2]> = line
            .nodes
            .iter()
            .map(|p| if up { *p } else { [p[0], -p[1]] })
            .collect();
        for p in &nodes {
            bounds.add(*p);
        }
        let wrong = classify(x, model)? != label.as_str();
        lines.push((nodes, line.u, wrong, label));
    }
    let mut bounds = bounds.or_unit();
    if bounds.max[1] - bounds.min[1] < 1e-9 {
        bounds.add([bounds.min[0], bounds.min[1] - 0.5]);
        bounds.add([bounds.max[0], bounds.max[1] + 0.5]);
    }
    let reserve = if spec.legend { spec.margin * 0.5 } else { 0.0 };
    let t = CanvasTransform::fit(bounds, spec, reserve);
    let mut doc = SvgDocument::new(spec, t);

    let (ylo, yhi) = (bounds.min[1], bounds.max[1]);
    doc.set_layer(Layer {
        id: "axes".into(),
        elements: vec![
            line_el(
                &t,
                [bounds.min[0], 0.0],
                [bounds.max[0], 0.0],
                "stroke=\"#000000\" stroke-width=\"1.000000\" class=\"u-axis\"",
            ),
            text_el(&t, [bounds.max[0], 0.0], 4.0, 4.0, "U"),
            line_el(
                &t,
                [model.threshold, ylo],
                [model.threshold, yhi],
                &format!(
                    "stroke=\"{}\" stroke-width=\"2.000000\" class=\"threshold\" data-threshold=\"{}\"",
                    spec.threshold_color,
                    f6(model.threshold)
                ),
            ),
        ],
    });

    let classes = class_order(
        [model.positive_class.as_str(), model.negative_class.as_str()]
            .into_iter()
            .chain(d.class_set().iter().map(String::as_str)),
    );
    let color = |c: &str| spec.class_color(classes.iter().position(|k| k == c).unwrap_or(0));
    let mut els = Vec::new();
    for (row, (nodes, u, wrong, label)) in lines.iter().enumerate() {
        let c = color(label);
        let dash = if *wrong { " stroke-dasharray=\"4 2\"" } else { "" };
        let attrs = format!(
            "class=\"case\" data-row=\"{row}\" data-class=\"{}\" data-u=\"{}\" data-misclassified=\"{wrong}\" data-nodes=\"{}\" stroke=\"{c}\" stroke-width=\"{}\"{dash}",
            esc(label),
            f6(*u),
            data_nodes(nodes),
            f6(spec.stroke_width)
        );
        els.push(polyline_el(&t, nodes, &attrs));
        let end = *nodes.last().expect("polyline has nodes");
        els.push(line_el(
            &t,
            end,
            [*u, 0.0],
            &format!("class=\"foot\" stroke=\"{c}\" stroke-width=\"0.500000\" stroke-dasharray=\"1 2\""),
        ));
    }
    doc.set_layer(Layer {
        id: "cases".into(),
        elements: els,
    });
    doc.colors = (0..classes.len()).map(|k| spec.class_color(k)).collect();
    if spec.legend {
        let entries: Vec<(String, String)> = classes.iter().cloned().zip(doc.colors.clone()).collect();
        doc.set_layer(legend_layer(&entries, spec));
    }
    Ok(doc)
}

/// Arrows between consecutive states, green when long and red when short.
/// With cell statistics, flagged cells are shaded.
pub fn render_arrows(
    field: &ArrowField,
    cells: Option<(&ArrowGrid, &[CellStats])>,
    spec: &RenderSpec,
) -> Result<SvgDocument> {
    if field.arrows.is_empty() {
        return Err(GlcError::InvalidInput("empty arrow field".into()));
    }
    let mut bounds = Bounds::empty();
    for a in &field.arrows {
        bounds.add(a.tail);
        bounds.add(a.head);
    }
    if let Some((g, _)) = cells {
        bounds.add(g.origin);
        bounds.add([
            g.origin[0] + g.cols as f64 * g.cell_size[0],
            g.origin[1] + g.rows as f64 * g.cell_size[1],
        ]);
    }
    let t = CanvasTransform::fit(bounds, spec, 0.0);
    let mut doc = SvgDocument::new(spec, t);
    let mut defs = Vec::new();
    for (id, color) in [("long", &spec.long_color), ("short", &spec.short_color)] {
        defs.push(format!(
            "<marker id=\"head-{id}\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\"><path d=\"M0 0 L10 5 L0 10 z\" fill=\"{color}\"/></marker>"
        ));
    }
    doc.set_layer(Layer {
        id: "defs".into(),
        elements: vec![format!("<defs>{}</defs>", defs.join(""))],
    });
    if let Some((g, stats)) = cells {
        let mut els = Vec::new();
        for c in stats.iter().filter(|c| c.flagged) {
            let x0 = g.origin[0] + c.col as f64 * g.cell_size[0];
            let y0 = g.origin[1] + c.row as f64 * g.cell_size[1];
            let lo = t.apply([x0, y0 + g.cell_size[1]]);
            let hi = t.apply([x0 + g.cell_size[0], y0]);
            els.push(format!(
                "<rect class=\"dominant-cell\" data-col=\"{}\" data-row=\"{}\" data-dominance=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.200000\"/>",
                c.col,
                c.row,
                f6(c.dominance),
                f6(lo[0]),
                f6(lo[1]),
                f6(hi[0] - lo[0]),
                f6(hi[1] - lo[1]),
                spec.long_color
            ));
        }
        doc.set_layer(Layer {
            id: "cells".into(),
            elements: els,
        });
    }
    let els = field
        .arrows
        .iter()
        .map(|a| {
            let (id, color) = match a.position {
                Position::Long => ("long", &spec.long_color),
                Position::Short => ("short", &spec.short_color),
            };
            line_el(
                &t,
                a.tail,
                a.head,
                &format!(
                    "class=\"arrow {id}\" stroke=\"{color}\" stroke-width=\"{}\" marker-end=\"url(#head-{id})\"",
                    f6(spec.stroke_width)
                ),
            )
        })
        .collect();
    doc.set_layer(Layer {
        id: "arrows".into(),
        elements: els,
    });
    Ok(doc)
}
