//! Patch correspondence between a target and a generated image.
//!
//! The target is cut into a uniform 4x4 grid; patches of the same size are
//! sampled at random positions in the generated image. Every patch is
//! reduced to a feature vector and each generated patch is matched to the
//! grid cell with the highest cosine similarity.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, norm};

pub const GRID: usize = 4;
pub const DEFAULT_RANDOM_PATCHES: usize = 8;
pub const FEATURE_DIM: usize = 22;

/// RGB raster, row-major, channel values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::BadDimensions {
                width,
                height,
                reason: "image is empty",
            });
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::invalid(
                "pixels",
                format!(
                    "expected {} values, got {}",
                    width * height * 3,
                    pixels.len()
                ),
            ));
        }
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("pixels", "values must lie in [0, 1]"));
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for r in 0..height {
            for c in 0..width {
                pixels.extend_from_slice(&f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn crop(&self, row: usize, col: usize, h: usize, w: usize) -> Image {
        assert!(
            row + h <= self.height && col + w <= self.width,
            "crop out of bounds"
        );
        let mut pixels = Vec::with_capacity(h * w * 3);
        for r in row..row + h {
            let start = (r * self.width + col) * 3;
            pixels.extend_from_slice(&self.pixels[start..start + w * 3]);
        }
        Image {
            width: w,
            height: h,
            pixels,
        }
    }

    /// Grid-cell size `(h, w)` after checking that a 4x4 grid fits exactly.
    pub fn cell_size(&self) -> Result<(usize, usize)> {
        let bad = |reason| Error::BadDimensions {
            width: self.width,
            height: self.height,
            reason,
        };
        if self.width < 8 || self.height < 8 {
            return Err(bad("width and height must be at least 8"));
        }
        if !self.width.is_multiple_of(GRID) || !self.height.is_multiple_of(GRID) {
            return Err(bad("width and height must be divisible by 4"));
        }
        Ok((self.height / GRID, self.width / GRID))
    }

    /// Binary PPM (P6, maxval 255). Byte `p` maps to `p / 255`.
    pub fn read_ppm(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::decode_ppm(BufReader::new(file)).map_err(|e| match e {
            Error::Invalid { field, reason } => Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                reason: format!("{field}: {reason}"),
            },
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn decode_ppm(mut reader: impl BufRead) -> Result<Self> {
        let io = |e| Error::io("<ppm>", e);
        let magic = ppm_token(&mut reader).map_err(io)?;
        if magic != "P6" {
            return Err(Error::invalid(
                "ppm",
                format!("expected magic P6, found {magic:?}"),
            ));
        }
        let mut header = [0usize; 3];
        for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
            let tok = ppm_token(&mut reader).map_err(io)?;
            *slot = tok
                .parse()
                .map_err(|_| Error::invalid("ppm", format!("bad {name} {tok:?}")))?;
        }
        let [width, height, maxval] = header;
        if maxval != 255 {
            return Err(Error::invalid(
                "ppm",
                format!("maxval must be 255, found {maxval}"),
            ));
        }
        let mut bytes = vec![0u8; width * height * 3];
        reader
            .read_exact(&mut bytes)
            .map_err(|_| Error::invalid("ppm", "pixel data is truncated"))?;
        Image::new(
            width,
            height,
            bytes.iter().map(|&b| b as f64 / 255.0).collect(),
        )
    }

    /// Each value is written as `round(p * 255)` clamped to [0, 255].
    pub fn encode_ppm(&self, mut out: impl Write) -> std::io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|p| (p * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        out.write_all(&bytes)
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.encode_ppm(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Next whitespace-delimited header token, skipping `#` comments. Consumes
/// exactly one whitespace byte after the token.
fn ppm_token(reader: &mut impl BufRead) -> std::io::Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if reader.read(&mut byte)? == 0 {
            return Ok(tok);
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut skip = Vec::new();
            reader.read_until(b'\n', &mut skip)?;
        } else if c.is_ascii_whitespace() {
            if !tok.is_empty() {
                return Ok(tok);
            }
        } else {
            tok.push(c as char);
        }
    }
}

/// Maps an image patch to a fixed-length descriptor.
pub trait PatchFeaturizer {
    fn dim(&self) -> usize;
    fn featurize(&self, patch: &Image) -> Vec<f64>;
}

/// Color statistics plus a coarse luminance layout: per-channel mean (3),
/// per-channel standard deviation (3), and 4x4 block-averaged luminance (16)
/// with `Y = 0.299 R + 0.587 G + 0.114 B`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ColorLayoutFeaturizer;

impl PatchFeaturizer for ColorLayoutFeaturizer {
    fn dim(&self) -> usize {
        FEATURE_DIM
    }

    fn featurize(&self, patch: &Image) -> Vec<f64> {
        featurize(patch)
    }
}

pub fn luminance([r, g, b]: [f64; 3]) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Overlap of pixel `[i, i+1)` with block `k` of `[0, len)` split in 4.
fn overlap(i: usize, k: usize, len: usize) -> f64 {
    let lo = (k * len) as f64 / GRID as f64;
    let hi = ((k + 1) * len) as f64 / GRID as f64;
    ((i + 1) as f64).min(hi) - (i as f64).max(lo)
}

/// Feature vector of length 22, see [`ColorLayoutFeaturizer`]. Luminance
/// blocks are area-weighted so patches whose sides are not multiples of 4
/// are handled.
pub fn featurize(patch: &Image) -> Vec<f64> {
    let (h, w) = (patch.height, patch.width);
    let count = (h * w) as f64;
    let mut mean = [0.0; 3];
    for px in patch.pixels.chunks_exact(3) {
        for c in 0..3 {
            mean[c] += px[c];
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = [0.0; 3];
    for px in patch.pixels.chunks_exact(3) {
        for c in 0..3 {
            var[c] += (px[c] - mean[c]).powi(2);
        }
    }

    let mut blocks = [0.0; GRID * GRID];
    for r in 0..h {
        for c in 0..w {
            let y = luminance(patch.pixel(r, c));
            for br in 0..GRID {
                let wr = overlap(r, br, h);
                if wr <= 0.0 {
                    continue;
                }
                for bc in 0..GRID {
                    let wc = overlap(c, bc, w);
                    if wc > 0.0 {
                        blocks[br * GRID + bc] += wr * wc * y;
                    }
                }
            }
        }
    }
    let block_area = (h as f64 / GRID as f64) * (w as f64 / GRID as f64);

    let mut out = Vec::with_capacity(FEATURE_DIM);
    out.extend_from_slice(&mean);
    out.extend(var.iter().map(|v| (v / count).sqrt()));
    out.extend(blocks.iter().map(|b| b / block_area));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchFeature {
    pub origin: (usize, usize),
    pub size: (usize, usize),
    pub feature: Vec<f64>,
}

/// The 16 grid cells of `img` in row-major order.
pub fn uniform_partition(img: &Image) -> Result<Vec<PatchFeature>> {
    uniform_partition_with(img, &ColorLayoutFeaturizer)
}

pub fn uniform_partition_with(
    img: &Image,
    featurizer: &impl PatchFeaturizer,
) -> Result<Vec<PatchFeature>> {
    let (h, w) = img.cell_size()?;
    let mut out = Vec::with_capacity(GRID * GRID);
    for i in 0..GRID {
        for j in 0..GRID {
            let origin = (i * h, j * w);
            out.push(PatchFeature {
                origin,
                size: (h, w),
                feature: featurizer.featurize(&img.crop(origin.0, origin.1, h, w)),
            });
        }
    }
    Ok(out)
}

/// `n_patches` grid-cell-sized patches at uniformly drawn positions.
pub fn random_patches(img: &Image, n_patches: usize, seed: u64) -> Result<Vec<PatchFeature>> {
    random_patches_with(img, n_patches, seed, &ColorLayoutFeaturizer)
}

pub fn random_patches_with(
    img: &Image,
    n_patches: usize,
    seed: u64,
    featurizer: &impl PatchFeaturizer,
) -> Result<Vec<PatchFeature>> {
    if n_patches == 0 {
        return Err(Error::invalid("n_patches", "must be at least 1"));
    }
    let (h, w) = img.cell_size()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_patches)
        .map(|_| {
            let row = rng.random_range(0..=img.height - h);
            let col = rng.random_range(0..=img.width - w);
            PatchFeature {
                origin: (row, col),
                size: (h, w),
                feature: featurizer.featurize(&img.crop(row, col, h, w)),
            }
        })
        .collect())
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchMatch {
    pub gen: usize,
    pub tgt: usize,
    pub similarity: f64,
}

/// For each generated patch, the target patch of highest cosine similarity
/// (lowest index on ties). Many generated patches may share a target.
pub fn match_patches(gen: &[PatchFeature], tgt: &[PatchFeature]) -> Result<Vec<PatchMatch>> {
    if gen.is_empty() || tgt.is_empty() {
        return Err(Error::invalid(
            "patches",
            "both patch sets must be nonempty",
        ));
    }
    let check = |side, set: &[PatchFeature]| {
        set.iter()
            .position(|p| norm(&p.feature).is_nan() || norm(&p.feature) <= 0.0)
            .map_or(Ok(()), |index| {
                Err(Error::DegenerateFeature { side, index })
            })
    };
    check("generated", gen)?;
    check("target", tgt)?;

    Ok(gen
        .iter()
        .enumerate()
        .map(|(g, gp)| {
            let mut best = PatchMatch {
                gen: g,
                tgt: 0,
                similarity: f64::NEG_INFINITY,
            };
            for (t, tp) in tgt.iter().enumerate() {
                let s = cosine_similarity(&gp.feature, &tp.feature);
                if s > best.similarity {
                    best.tgt = t;
                    best.similarity = s;
                }
            }
            best
        })
        .collect())
}

/// Mean squared feature distance over matched pairs.
pub fn patch_style_distance(
    matches: &[PatchMatch],
    gen: &[PatchFeature],
    tgt: &[PatchFeature],
) -> Result<f64> {
    if matches.is_empty() {
        return Err(Error::EmptyMatches);
    }
    let mut total = 0.0;
    for m in matches {
        let (g, t) = gen.get(m.gen).zip(tgt.get(m.tgt)).ok_or_else(|| {
            Error::invalid(
                "matches",
                format!("pair ({}, {}) out of range", m.gen, m.tgt),
            )
        })?;
        total += dist_sq(&g.feature, &t.feature);
    }
    Ok(total / matches.len() as f64)
}

/// Match table as CSV: `gen_idx,tgt_idx,similarity`.
pub fn matches_csv(matches: &[PatchMatch]) -> String {
    let mut out = String::from("gen_idx,tgt_idx,similarity\n");
    for m in matches {
        out.push_str(&format!(
            "{},{},{}\n",
            m.gen,
            m.tgt,
            crate::data::fmt_f64(m.similarity)
        ));
    }
    out
}
