//! Argument parsing and dispatch for the `glc` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use glc_core::coords::mapping_distortion;
use glc_core::cpcr::{self, CpcrImage};
use glc_core::glc_l::{ModelArtifact, TrainConfig};
use glc_core::jl_bounds;
use glc_core::rules::{
    self, ArrowGrid, FspConfig, FspResult, LinearBoundary, RectRule, SideClasses,
};
use glc_core::Dataset;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{FileConfig, FlagConfig, Settings};
use crate::error::{CliError, CliResult};
use crate::ops::{self, Prepared, RenderOptions, RenderTarget};

#[derive(Debug, Parser)]
#[command(name = "glc", version, about = "General Line Coordinates toolkit")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the primary artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Label column: a header name, a 0-based index, or `last`.
    #[arg(long, default_value = "class")]
    pub label: String,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a CSV and summarize it.
    Ingest(DataArgs),
    /// Draw the dataset as SVG.
    Render {
        #[command(flatten)]
        data: DataArgs,
        /// pc, cpc, spc, stars, inline or glcl.
        #[arg(long)]
        system: String,
        /// 1-based attribute pairs, e.g. `1-2,3-4`.
        #[arg(long)]
        pairing: Option<String>,
        /// Distance between SPC planes or In-Line segments.
        #[arg(long)]
        spacing: Option<f64>,
        /// Draw min-max normalized values.
        #[arg(long)]
        normalize: bool,
        /// Model JSON from `train-glcl`, required for `glcl`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Rule JSON from `fsp` to overlay on SPC or CPC.
        #[arg(long)]
        rule: Option<PathBuf>,
    },
    /// Train a GLC-L linear classifier.
    TrainGlcl {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        positive: Option<String>,
        /// Keep every coefficient instead of simplifying.
        #[arg(long)]
        no_simplify: bool,
    },
    /// Drop low-weight attributes from a model and refit.
    Prune {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = glc_core::glc_l::DEFAULT_PRUNE_EPS)]
        eps: f64,
    },
    /// Search attribute pairings for a rectangle rule.
    Fsp {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        positive: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        clause_budget: Option<usize>,
        #[arg(long)]
        max_pairings: Option<usize>,
    },
    /// Turn a linear boundary a·x1 + b·x2 + c = 0 into step rules.
    Steps {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        /// `lo,hi` range of x1.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        domain: [f64; 2],
        #[arg(long)]
        resolution: f64,
        /// Print only the rule for this `x1,x2` case.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        case: Option<[f64; 2]>,
        /// Class on the positive side of the boundary.
        #[arg(long, default_value = "class 1")]
        positive: String,
        #[arg(long, default_value = "class 2")]
        negative: String,
    },
    /// Compare a case with its nearest neighbors under a model.
    Explain {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// 0-based row.
        #[arg(long)]
        row: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Johnson-Lindenstrauss dimension bounds.
    #[command(subcommand)]
    Jl(JlCommand),
    /// CPC-R image encodings.
    #[command(subcommand)]
    Cpcr(CpcrCommand),
    /// Distance distortion between two point sets of equal size.
    Distortion {
        /// Numeric CSV of high-dimensional points.
        #[arg(long)]
        high: PathBuf,
        /// Numeric CSV of the mapped points, same row order.
        #[arg(long)]
        low: PathBuf,
    },
    /// Long/short arrow dominance for a 2-D time series.
    Arrows {
        /// Numeric CSV with two columns, one row per time point.
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value_t = 4)]
        cols: usize,
        #[arg(long, default_value_t = 4)]
        rows: usize,
        #[arg(long, default_value_t = 0.75)]
        threshold: f64,
        /// Also write an SVG of the field.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        state_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum JlCommand {
    /// Smallest k that satisfies the bound; lists give a table.
    MinDim {
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Also list the published estimates next to the bound.
        #[arg(long)]
        published: bool,
    },
    /// Largest m the bound allows for k dimensions.
    MaxPoints {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        eps: f64,
    },
    /// Check random projections of a dataset against the bound.
    Verify {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Target dimension; defaults to the bound.
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CpcrCommand {
    /// Encode one point; `--out` takes a .pgm or .png path and a .json
    /// sidecar is written beside it.
    Encode {
        /// Normalized values in [0, 1].
        #[arg(long, value_delimiter = ',', conflicts_with = "levels")]
        values: Option<Vec<f64>>,
        /// Grid levels in 1..=grid.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<u32>>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1)]
        cell_size: usize,
    },
    /// Recover levels from an image JSON written by `encode`.
    Decode {
        #[arg(long)]
        image: PathBuf,
    },
    /// Two-class mean image as PNG, optionally with a target case.
    Composite {
        #[command(flatten)]
        data: DataArgs,
        /// `a,b`; defaults to the first two classes.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<String>>,
        /// Row drawn on top of both panels.
        #[arg(long)]
        target_row: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 2)]
        gutter: usize,
    },
    /// One PGM and sidecar per row, plus labels.csv, into a directory.
    Export {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 4)]
        cell_size: usize,
    },
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([p(a)?, p(b)?])
}

/// What a command produced: JSON for `--json`, text for humans, and
/// optionally a file artifact for `--out`.
struct Output {
    json: Value,
    text: String,
    artifact: Option<Vec<u8>>,
}

impl Output {
    fn new(json: Value, text: impl Into<String>) -> Self {
        Self {
            json,
            text: text.into(),
            artifact: None,
        }
    }

    fn of<T: Serialize>(v: &T, text: impl Into<String>) -> CliResult<Self> {
        Ok(Self::new(serde_json::to_value(v)?, text))
    }

    fn with_artifact(mut self, bytes: Vec<u8>) -> Self {
        self.artifact = Some(bytes);
        self
    }
}

fn pretty<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn delimiter(c: char) -> CliResult<u8> {
    u8::try_from(c).map_err(|_| CliError::Usage(format!("delimiter `{c}` is not a single byte")))
}

fn load(a: &DataArgs, settings: &Settings) -> CliResult<Prepared> {
    let text = std::fs::read_to_string(&a.data)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.data.display())))?;
    ops::load_text(&text, &a.label, delimiter(a.delimiter)?, settings.row_cap)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Accepts either a bare rule or a whole `fsp` result.
fn read_rule(path: &Path) -> CliResult<(RectRule, Option<glc_core::PairingSpec>)> {
    let v: Value = read_json(path)?;
    if v.get("rule").is_some() {
        let r: FspResult = serde_json::from_value(v)?;
        Ok((r.rule, Some(r.pairing)))
    } else {
        Ok((serde_json::from_value(v)?, None))
    }
}

/// Headerless numeric CSV; a first row that does not parse is taken as a
/// header and skipped.
fn read_points(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(e.to_string()))?;
        let row: Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        match row {
            Ok(r) => out.push(r),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(CliError::Usage(format!("{} row {}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

pub fn settings(cli: &Cli, env: impl Fn(&str) -> Option<String>) -> CliResult<Settings> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut flags = FlagConfig {
        seed: cli.seed,
        ..FlagConfig::default()
    };
    match &cli.command {
        Command::Serve { host, port, state_dir } => {
            flags.host = host.clone();
            flags.port = *port;
            flags.state_dir = state_dir.clone();
        }
        Command::TrainGlcl { restarts, .. } => flags.restarts = *restarts,
        _ => {}
    }
    Settings::resolve(&flags, env, &file)
}

/// Runs one command and writes its output.
pub fn run(cli: Cli) -> CliResult<()> {
    let settings = settings(&cli, |k| std::env::var(k).ok())?;
    if let Command::Serve { .. } = cli.command {
        let rt = tokio::runtime::Runtime::new()?;
        return rt.block_on(crate::server::serve(settings));
    }
    let out = execute(&cli.command, &settings, cli.out.as_deref())?;
    match &cli.out {
        Some(path) => {
            let bytes = match out.artifact {
                Some(b) => b,
                None => serde_json::to_vec_pretty(&out.json)?,
            };
            std::fs::write(path, bytes)?;
            if cli.json {
                print_line(&json!({ "written": path, "result": out.json }).to_string())?;
            }
        }
        None if cli.json => print_line(&serde_json::to_string(&out.json)?)?,
        None => {
            let text = out.text.trim_end();
            if !text.is_empty() {
                print_line(text)?;
            }
        }
    }
    Ok(())
}

/// Like `println!`, but a closed pipe (`glc ... | head`) is not an error.
fn print_line(s: &str) -> CliResult<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{s}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn execute(cmd: &Command, settings: &Settings, out: Option<&Path>) -> CliResult<Output> {
    match cmd {
        Command::Ingest(a) => {
            let s = ops::summary(&load(a, settings)?);
            let text = pretty(&s)?;
            Output::of(&s, text)
        }
        Command::Render {
            data,
            system,
            pairing,
            spacing,
            normalize,
            model,
            rule,
        } => {
            let target: RenderTarget = system.parse()?;
            let p = load(data, settings)?;
            let model = model.as_deref().map(read_json::<ModelArtifact>).transpose()?;
            let (rule, rule_pairing) = match rule {
                Some(path) => {
                    let (r, p) = read_rule(path)?;
                    (Some(r), p)
                }
                None => (None, None),
            };
            let opts = RenderOptions {
                pairing: match pairing {
                    Some(s) => Some(ops::parse_pairing(s)?),
                    None => rule_pairing,
                },
                spacing: *spacing,
                normalize: *normalize,
                model,
                rule,
            };
            let svg = ops::render(&p, target, &opts, &settings.render)?;
            Ok(Output::new(json!({ "svg": svg }), svg.clone()).with_artifact(svg.into_bytes()))
        }
        Command::TrainGlcl {
            data,
            max_iters,
            positive,
            no_simplify,
            ..
        } => {
            let p = load(data, settings)?;
            let base = TrainConfig::default();
            let cfg = TrainConfig {
                seed: settings.seed,
                restarts: settings.restarts,
                max_iters: max_iters.unwrap_or(base.max_iters),
                positive_class: positive.clone(),
                simplify: !no_simplify,
                ..base
            };
            let t = ops::train(&p, &cfg)?;
            let text = format!(
                "accuracy {:.4} (restart {})\n{}",
                t.accuracy,
                t.restart,
                pretty(&t.model)?
            );
            let artifact = serde_json::to_vec_pretty(&t.model)?;
            Ok(Output::of(&t, text)?.with_artifact(artifact))
        }
        Command::Prune { data, model, eps } => {
            let p = load(data, settings)?;
            let model: ModelArtifact = read_json(model)?;
            let cfg = TrainConfig {
                seed: settings.seed,
                restarts: settings.restarts,
                ..TrainConfig::default()
            };
            let r = ops::prune(&p, &model, *eps, &cfg)?;
            let text = format!(
                "removed {:?}\naccuracy {:.4} -> {:.4}",
                r.report.removed_names, r.report.accuracy_before, r.report.accuracy_after
            );
            let artifact = serde_json::to_vec_pretty(&r.model)?;
            Ok(Output::of(&r, text)?.with_artifact(artifact))
        }
        Command::Fsp {
            data,
            positive,
            levels,
            clause_budget,
            max_pairings,
        } => {
            let p = load(data, settings)?;
            let base: FspConfig = settings.fsp.clone();
            let cfg = FspConfig {
                levels: levels.unwrap_or(base.levels),
                clause_budget: clause_budget.unwrap_or(base.clause_budget),
                max_pairings: max_pairings.unwrap_or(base.max_pairings),
                ..base
            };
            let r = ops::fsp(&p, &cfg, positive.as_deref())?;
            let text = format!(
                "{}\naccuracy {:.4} ({}/{} pairings kept)",
                r.text, r.report.accuracy, r.pairings_kept, r.pairings_considered
            );
            Output::of(&r, text)
        }
        Command::Steps {
            a,
            b,
            c,
            domain,
            resolution,
            case,
            positive,
            negative,
        } => {
            let boundary = LinearBoundary { a: *a, b: *b, c: *c };
            let classes = SideClasses {
                positive: positive.clone(),
                negative: negative.clone(),
            };
            match case {
                Some(x) => {
                    let r = rules::rule_for_case(*x, boundary, *domain, *resolution, &classes)?;
                    let text = r.text.clone();
                    Output::of(&r, text)
                }
                None => {
                    let s = rules::linear_to_steps(boundary, *domain, *resolution, &classes)?;
                    let text = s.to_text().join("\n");
                    Output::of(&s, text)
                }
            }
        }
        Command::Explain { data, model, row, k } => {
            let p = load(data, settings)?;
            let model: ModelArtifact = read_json(model)?;
            let e = ops::explain(&p, &model, *row, *k)?;
            let text = pretty(&e)?;
            Output::of(&e, text)
        }
        Command::Jl(j) => jl(j, settings),
        Command::Cpcr(c) => cpcr_cmd(c, settings, out),
        Command::Distortion { high, low } => {
            let r = mapping_distortion(&read_points(high)?, &read_points(low)?)?;
            let text = pretty(&r)?;
            Output::of(&r, text)
        }
        Command::Arrows {
            series,
            cols,
            rows,
            threshold,
            svg,
        } => {
            let pts = read_points(series)?
                .into_iter()
                .map(|r| match r.as_slice() {
                    [x, y] => Ok([*x, *y]),
                    _ => Err(CliError::Usage("series rows need exactly two values".into())),
                })
                .collect::<CliResult<Vec<_>>>()?;
            let field = rules::build_arrow_field(&pts)?;
            let grid = ArrowGrid::covering(&field, *cols, *rows, *threshold)?;
            let cells = rules::arrow_dominance(&field, &grid)?;
            if let Some(path) = svg {
                let doc = glc_core::render::render_arrows(&field, Some((&grid, &cells)), &settings.render)?;
                std::fs::write(path, doc.to_svg())?;
            }
            let flagged: Vec<_> = cells.iter().filter(|c| c.flagged).collect();
            let text = flagged
                .iter()
                .map(|c| format!("cell ({}, {}): {} long, {} short", c.col, c.row, c.long, c.short))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::new(
                json!({ "field": field, "grid": grid, "cells": cells }),
                text,
            ))
        }
        Command::Serve { .. } => unreachable!("handled by run"),
    }
}

fn jl(cmd: &JlCommand, settings: &Settings) -> CliResult<Output> {
    match cmd {
        JlCommand::MinDim { m, eps, published } => {
            let mut rows = Vec::new();
            for &m in m {
                for &e in eps {
                    rows.push(jl_bounds::min_dimension(m, e)?);
                }
            }
            let mut text = format!("{:>12} {:>8} {:>10}\n", "m", "eps", "k_min");
            for r in &rows {
                text.push_str(&format!("{:>12} {:>8} {:>10}\n", r.m, r.epsilon, r.k_min));
            }
            let mut json = if rows.len() == 1 {
                serde_json::to_value(rows[0])?
            } else {
                json!({ "rows": rows })
            };
            if *published {
                let refs = jl_bounds::reference_comparison();
                text.push_str("\npublished estimates (quoted, not computed by this bound):\n");
                for r in &refs {
                    text.push_str(&format!(
                        "  m={} eps={}: published {}, bound gives {}\n",
                        r.m, r.epsilon, r.published_k, r.bound_k
                    ));
                }
                json["published"] = serde_json::to_value(&refs)?;
            }
            Ok(Output::new(json, text))
        }
        JlCommand::MaxPoints { k, eps } => {
            let m = jl_bounds::max_points(*k, *eps)?;
            Ok(Output::new(json!({ "k": k, "epsilon": eps, "max_points": m }), m.to_string()))
        }
        JlCommand::Verify { data, eps, trials, k } => {
            let p = load(data, settings)?;
            // repeated rows have no distance to preserve; keep the first copy
            let mut seen = std::collections::HashSet::new();
            let pts: Vec<Vec<f64>> = p
                .raw
                .rows()
                .iter()
                .filter(|r| seen.insert(r.iter().map(|v| v.to_bits()).collect::<Vec<_>>()))
                .cloned()
                .collect();
            let removed = p.raw.len() - pts.len();
            let r = match k {
                Some(k) => jl_bounds::verify_random_projection_at(&pts, *k, *eps, *trials, settings.seed)?,
                None => jl_bounds::verify_random_projection(&pts, *eps, *trials, settings.seed)?,
            };
            let text = format!(
                "m={} ({removed} duplicates removed) k={} identity={} success={} best_trial={:?}",
                r.m, r.k_used, r.identity, r.success, r.best_trial
            );
            let mut json = serde_json::to_value(&r)?;
            json["duplicates_removed"] = json!(removed);
            Ok(Output::new(json, text))
        }
    }
}

fn cpcr_cmd(cmd: &CpcrCommand, settings: &Settings, out: Option<&Path>) -> CliResult<Output> {
    match cmd {
        CpcrCommand::Encode {
            values,
            levels,
            grid,
            cell_size,
        } => {
            let grid = grid.unwrap_or(settings.grid);
            let levels = match (values, levels) {
                (Some(v), None) => cpcr::quantize_row(v, grid),
                (None, Some(l)) => l.clone(),
                _ => return Err(CliError::Usage("give --values or --levels".into())),
            };
            let img = cpcr::encode_cpcr_sized(&levels, grid, *cell_size)?;
            let text = pretty(&img.sidecar())?;
            let bytes = match out.and_then(|p| p.extension()) {
                Some(e) if e.eq_ignore_ascii_case("png") => img.to_png()?,
                _ => img.to_pgm(),
            };
            if let Some(path) = out {
                std::fs::write(path.with_extension("json"), serde_json::to_vec_pretty(&img)?)?;
            }
            Ok(Output::of(&img, text)?.with_artifact(bytes))
        }
        CpcrCommand::Decode { image } => {
            let img: CpcrImage = read_json(image)?;
            let levels = cpcr::decode_cpcr(&img)?;
            let text = levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",");
            Ok(Output::new(json!({ "levels": levels }), text))
        }
        CpcrCommand::Composite {
            data,
            classes,
            target_row,
            grid,
            gutter,
        } => {
            let p = load(data, settings)?;
            let d: &Dataset = &p.raw;
            let classes = match classes {
                Some(c) if c.len() == 2 => [c[0].clone(), c[1].clone()],
                Some(_) => return Err(CliError::Usage("--classes takes exactly two names".into())),
                None => match d.class_set() {
                    [a, b, ..] => [a.clone(), b.clone()],
                    _ => return Err(CliError::Usage("dataset has fewer than two classes".into())),
                },
            };
            let target = match target_row {
                Some(r) if *r < d.len() => Some(d.row(*r)),
                Some(r) => return Err(CliError::Usage(format!("row {r} out of range"))),
                None => None,
            };
            let img = cpcr::mean_class_composite(
                d,
                [&classes[0], &classes[1]],
                target,
                grid.unwrap_or(settings.grid),
                *gutter,
            )?;
            let png = img.to_png()?;
            let meta = json!({ "grid": img.grid, "width": img.width, "height": img.height, "classes": img.classes });
            Ok(Output::new(meta, format!("{}x{} composite", img.width, img.height)).with_artifact(png))
        }
        CpcrCommand::Export {
            data,
            dir,
            grid,
            cell_size,
        } => {
            let p = load(data, settings)?;
            let n = cpcr::export_dataset(&p.raw, grid.unwrap_or(settings.grid), *cell_size, dir)?;
            Ok(Output::new(json!({ "images": n, "dir": dir }), format!("wrote {n} images to {}", dir.display())))
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn pairs_parse() {
        assert_eq!(parse_pair("0, 4").unwrap(), [0.0, 4.0]);
        assert_eq!(parse_pair("-1,2.5").unwrap(), [-1.0, 2.5]);
        assert!(parse_pair("3").is_err());
    }

    #[test]
    fn global_flags_reach_settings() {
        let cli = Cli::try_parse_from(["glc", "serve", "--port", "9001", "--seed", "7"]).unwrap();
        let s = settings(&cli, |k| (k == "GLC_PORT").then(|| "9100".to_string())).unwrap();
        assert_eq!((s.port, s.seed), (9001, 7));
        let cli = Cli::try_parse_from(["glc", "serve"]).unwrap();
        let s = settings(&cli, |k| (k == "GLC_PORT").then(|| "9100".to_string())).unwrap();
        assert_eq!(s.port, 9100);
    }

    #[test]
    fn unknown_flags_are_rejected() {
        let e = Cli::try_parse_from(["glc", "ingest", "--data", "x.csv", "--nope"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn points_skip_a_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        std::fs::write(&p, "a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(read_points(&p).unwrap(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        std::fs::write(&p, "1,2\nx,4\n").unwrap();
        assert!(read_points(&p).is_err());
    }
}
