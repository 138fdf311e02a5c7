//! CPC-R: n-D points as small grayscale images.
//!
//! Consecutive attribute pairs become cells `(x_i, x_j)` of a `G × G` grid.
//! Pair `k` of `P` gets intensity `k / (P + 1)`, so earlier pairs are darker
//! and the intensity order restores the pair order. The background is white
//! (1.0). A pair landing on an occupied cell is moved to the nearest free
//! cell along an outward spiral (right, down, left, up, growing) and the
//! move is logged, which keeps decoding exact.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{normalize, Dataset, NormalizationSpec};
use crate::error::{GlcError, Result};

pub const BACKGROUND: f64 = 1.0;
pub const DEFAULT_GRID: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionEntry {
    /// 1-based pair index.
    pub pair: usize,
    pub intended: [u32; 2],
    pub placed: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpcrImage {
    pub grid: usize,
    /// Row-major, `cells[(y - 1) * grid + (x - 1)]` for 1-based `(x, y)`.
    pub cells: Vec<f64>,
    /// Pixels per cell when exported.
    pub cell_size: usize,
    pub pair_count: usize,
    /// Length of the original vector before padding.
    pub dim: usize,
    pub collision_log: Vec<CollisionEntry>,
}

impl CpcrImage {
    pub fn intensity(&self, x: u32, y: u32) -> f64 {
        self.cells[self.index(x, y)]
    }

    fn index(&self, x: u32, y: u32) -> usize {
        (y as usize - 1) * self.grid + (x as usize - 1)
    }

    /// Non-background cells as `(x, y, intensity)`, darkest first.
    pub fn marked(&self) -> Vec<(u32, u32, f64)> {
        let mut out: Vec<(u32, u32, f64)> = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < BACKGROUND)
            .map(|(i, v)| ((i % self.grid) as u32 + 1, (i / self.grid) as u32 + 1, *v))
            .collect();
        out.sort_by(|a, b| a.2.total_cmp(&b.2));
        out
    }

    /// Gray levels, top image row first (y = G at the top).
    fn pixels(&self) -> Vec<u8> {
        let side = self.grid * self.cell_size;
        let mut out = Vec::with_capacity(side * side);
        for py in 0..side {
            let y = self.grid - py / self.cell_size;
            for px in 0..side {
                let x = px / self.cell_size + 1;
                out.push(gray(self.intensity(x as u32, y as u32)));
            }
        }
        out
    }

    /// Binary PGM (P5), bit-exact for a given image.
    pub fn to_pgm(&self) -> Vec<u8> {
        let side = self.grid * self.cell_size;
        let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
        out.extend(self.pixels());
        out
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let side = (self.grid * self.cell_size) as u32;
        encode_png(side, side, png::ColorType::Grayscale, &self.pixels())
    }

    /// Pair order and collision log; enough with the PGM to rebuild the
    /// image's meaning.
    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            grid: self.grid,
            dim: self.dim,
            pair_count: self.pair_count,
            pair_cells: self.marked().into_iter().map(|(x, y, _)| [x, y]).collect(),
            collision_log: self.collision_log.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub grid: usize,
    pub dim: usize,
    pub pair_count: usize,
    pub pair_cells: Vec<[u32; 2]>,
    pub collision_log: Vec<CollisionEntry>,
}

fn gray(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn encode_png(width: u32, height: u32, color: png::ColorType, data: &[u8]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, width, height);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc
            .write_header()
            .map_err(|e| GlcError::InvalidInput(format!("png: {e}")))?;
        w.write_image_data(data)
            .map_err(|e| GlcError::InvalidInput(format!("png: {e}")))?;
    }
    Ok(buf)
}

/// Offsets of the outward spiral, excluding the start.
fn spiral(limit: usize) -> impl Iterator<Item = (i64, i64)> {
    let dirs = [(1i64, 0i64), (0, -1), (-1, 0), (0, 1)];
    let (mut x, mut y) = (0i64, 0i64);
    let mut out = Vec::new();
    let mut len = 1;
    let mut d = 0;
    while len <= 2 * limit + 2 {
        for _ in 0..2 {
            let (dx, dy) = dirs[d % 4];
            for _ in 0..len {
                x += dx;
                y += dy;
                out.push((x, y));
            }
            d += 1;
        }
        len += 1;
    }
    out.into_iter()
}

/// Maps a normalized value in `[0, 1]` to a level in `1..=grid`.
pub fn quantize(v: f64, grid: usize) -> u32 {
    (v.clamp(0.0, 1.0) * (grid as f64 - 1.0)).round() as u32 + 1
}

pub fn encode_cpcr(x: &[u32], grid: usize) -> Result<CpcrImage> {
    encode_cpcr_sized(x, grid, 1)
}

pub fn encode_cpcr_sized(x: &[u32], grid: usize, cell_size: usize) -> Result<CpcrImage> {
    if x.is_empty() {
        return Err(GlcError::InvalidInput("empty point".into()));
    }
    if grid == 0 || cell_size == 0 {
        return Err(GlcError::InvalidInput("grid and cell size must be positive".into()));
    }
    if let Some(v) = x.iter().find(|v| **v < 1 || **v as usize > grid) {
        return Err(GlcError::Domain(format!("value {v} outside 1..={grid}; grid too small")));
    }
    let padded: Vec<u32> = if x.len() % 2 == 1 {
        let mut p = x.to_vec();
        p.push(*x.last().unwrap());
        p
    } else {
        x.to_vec()
    };
    let pair_count = padded.len() / 2;
    if pair_count > grid * grid {
        return Err(GlcError::Domain(format!(
            "{pair_count} pairs cannot fit a {grid}x{grid} grid"
        )));
    }
    let mut img = CpcrImage {
        grid,
        cells: vec![BACKGROUND; grid * grid],
        cell_size,
        pair_count,
        dim: x.len(),
        collision_log: Vec::new(),
    };
    for (k, pair) in padded.chunks(2).enumerate() {
        let intended = [pair[0], pair[1]];
        let intensity = (k + 1) as f64 / (pair_count + 1) as f64;
        let mut placed = intended;
        if img.intensity(intended[0], intended[1]) < BACKGROUND {
            placed = spiral(grid)
                .map(|(dx, dy)| (intended[0] as i64 + dx, intended[1] as i64 + dy))
                .filter(|&(cx, cy)| cx >= 1 && cy >= 1 && cx <= grid as i64 && cy <= grid as i64)
                .map(|(cx, cy)| [cx as u32, cy as u32])
                .find(|c| img.intensity(c[0], c[1]) >= BACKGROUND)
                .expect("a free cell exists when pairs fit the grid");
            img.collision_log.push(CollisionEntry {
                pair: k + 1,
                intended,
                placed,
            });
        }
        let i = img.index(placed[0], placed[1]);
        img.cells[i] = intensity;
    }
    Ok(img)
}

pub fn decode_cpcr(img: &CpcrImage) -> Result<Vec<u32>> {
    if img.cells.len() != img.grid * img.grid {
        return Err(GlcError::Undecodable("cell buffer does not match the grid".into()));
    }
    let marked = img.marked();
    if marked.is_empty() || img.pair_count == 0 {
        return Err(GlcError::Undecodable("blank image".into()));
    }
    if marked.len() != img.pair_count {
        return Err(GlcError::Undecodable(format!(
            "{} marked cells for {} pairs",
            marked.len(),
            img.pair_count
        )));
    }
    let denom = (img.pair_count + 1) as f64;
    let mut out = vec![0u32; 2 * img.pair_count];
    let mut seen = vec![false; img.pair_count];
    for (x, y, v) in marked {
        let k = (v * denom).round() as usize;
        if k == 0 || k > img.pair_count || (v * denom - k as f64).abs() > 1e-6 || seen[k - 1] {
            return Err(GlcError::Undecodable(format!(
                "intensity {v} at ({x},{y}) does not identify a unique pair"
            )));
        }
        seen[k - 1] = true;
        let cell = match img.collision_log.iter().find(|c| c.pair == k) {
            Some(c) if c.placed == [x, y] => c.intended,
            Some(c) => {
                return Err(GlcError::Undecodable(format!(
                    "collision log places pair {k} at {:?}, image has it at ({x},{y})",
                    c.placed
                )))
            }
            None => [x, y],
        };
        out[2 * (k - 1)] = cell[0];
        out[2 * (k - 1) + 1] = cell[1];
    }
    if img.dim == 0 || img.dim > out.len() || img.dim + 1 < out.len() {
        return Err(GlcError::Undecodable(format!("dimension {} inconsistent with pairs", img.dim)));
    }
    out.truncate(img.dim);
    Ok(out)
}

/// Quantizes a normalized row to grid levels.
pub fn quantize_row(x: &[f64], grid: usize) -> Vec<u32> {
    x.iter().map(|v| quantize(*v, grid)).collect()
}

/// Normalizes `d` and encodes every row, in parallel.
pub fn encode_dataset(d: &Dataset, grid: usize) -> Result<(Vec<CpcrImage>, NormalizationSpec)> {
    let (norm, spec) = normalize(d);
    let images = norm
        .rows()
        .par_iter()
        .map(|r| encode_cpcr(&quantize_row(r, grid), grid))
        .collect::<Result<Vec<_>>>()?;
    Ok((images, spec))
}

/// Two class-mean panels side by side, RGB in `[0, 1]`, row-major with the
/// top image row (y = G) first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeImage {
    pub grid: usize,
    pub gutter: usize,
    pub width: usize,
    pub height: usize,
    pub classes: [String; 2],
    pub pixels: Vec<[f64; 3]>,
}

impl CompositeImage {
    pub fn pixel(&self, col: usize, row: usize) -> [f64; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let data: Vec<u8> = self.pixels.iter().flat_map(|p| p.map(gray)).collect();
        encode_png(self.width as u32, self.height as u32, png::ColorType::Rgb, &data)
    }
}

/// Cell-wise mean of each image group, optionally with the target's cells
/// drawn in red on both panels (red channel full, green and blue at the
/// target's intensity).
pub fn composite_from_images(
    groups: [(&str, &[CpcrImage]); 2],
    target: Option<&CpcrImage>,
    gutter: usize,
) -> Result<CompositeImage> {
    let grid = groups[0]
        .1
        .first()
        .or_else(|| groups[1].1.first())
        .map(|i| i.grid)
        .ok_or_else(|| GlcError::Class("both classes are empty".into()))?;
    for (name, imgs) in groups {
        if imgs.is_empty() {
            return Err(GlcError::Class(format!("class {name} has no cases")));
        }
        if imgs.iter().any(|i| i.grid != grid) {
            return Err(GlcError::DimensionMismatch {
                expected: grid,
                found: imgs.iter().find(|i| i.grid != grid).unwrap().grid,
            });
        }
    }
    if let Some(t) = target {
        if t.grid != grid {
            return Err(GlcError::DimensionMismatch {
                expected: grid,
                found: t.grid,
            });
        }
    }
    let width = 2 * grid + gutter;
    let mut pixels = vec![[BACKGROUND; 3]; width * grid];
    for (p, (_, imgs)) in groups.iter().enumerate() {
        let mut mean = vec![0.0; grid * grid];
        for img in imgs.iter() {
            for (m, v) in mean.iter_mut().zip(&img.cells) {
                *m += v;
            }
        }
        let left = p * (grid + gutter);
        for y in 1..=grid {
            for x in 1..=grid {
                let cell = (y - 1) * grid + (x - 1);
                let mut px = [mean[cell] / imgs.len() as f64; 3];
                if let Some(t) = target {
                    let v = t.cells[cell];
                    if v < BACKGROUND {
                        px = [1.0, v, v];
                    }
                }
                pixels[(grid - y) * width + left + x - 1] = px;
            }
        }
    }
    Ok(CompositeImage {
        grid,
        gutter,
        width,
        height: grid,
        classes: [groups[0].0.to_string(), groups[1].0.to_string()],
        pixels,
    })
}

/// Class-mean composite of a dataset. The target case, if any, is given in
/// raw units and normalized with the dataset's own ranges.
pub fn mean_class_composite(
    d: &Dataset,
    classes: [&str; 2],
    target: Option<&[f64]>,
    grid: usize,
    gutter: usize,
) -> Result<CompositeImage> {
    let (images, spec) = encode_dataset(d, grid)?;
    let pick = |c: &str| -> Vec<CpcrImage> {
        images
            .iter()
            .zip(d.labels())
            .filter(|(_, l)| *l == c)
            .map(|(i, _)| i.clone())
            .collect()
    };
    let (a, b) = (pick(classes[0]), pick(classes[1]));
    let target = target
        .map(|t| spec.apply(t).and_then(|n| encode_cpcr(&quantize_row(&n, grid), grid)))
        .transpose()?;
    composite_from_images([(classes[0], &a), (classes[1], &b)], target.as_ref(), gutter)
}

/// Writes one PGM and sidecar per row plus `labels.csv`, a layout external
/// image classifiers can consume.
pub fn export_dataset(d: &Dataset, grid: usize, cell_size: usize, dir: &Path) -> Result<usize> {
    std::fs::create_dir_all(dir)?;
    let (images, _) = encode_dataset(d, grid)?;
    let mut labels = std::fs::File::create(dir.join("labels.csv"))?;
    writeln!(labels, "file,class")?;
    for (row, (img, label)) in images.into_iter().zip(d.labels()).enumerate() {
        let img = CpcrImage { cell_size, ..img };
        let name = format!("{row:06}.pgm");
        std::fs::write(dir.join(&name), img.to_pgm())?;
        let sidecar = serde_json::to_vec_pretty(&img.sidecar()).expect("sidecar serializes");
        std::fs::write(dir.join(format!("{row:06}.json")), sidecar)?;
        writeln!(labels, "{name},{label}")?;
    }
    Ok(d.len())
}
