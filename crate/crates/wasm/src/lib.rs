//! Browser bindings. Every function returns a JSON string so the page can
//! draw with plain canvas calls.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use styleplane::cli::compare_paths;
use styleplane::interp::PathReport;
use styleplane::learn::{learn_plane, smoothed, TrainConfig};
use styleplane::manifold::{
    pca_plane_oracle, principal_angles, sample_dataset, ManifoldConfig, ManifoldSpec,
};
use styleplane::patch::{match_patches, random_patches, uniform_partition, Image};
use styleplane::{DomainChart, LabeledStyleDataset, RotationPlane};

const DEMO_DIM: usize = 16;
const DEMO_SAMPLES: usize = 60;

#[derive(Serialize)]
struct PathView {
    /// In-plane coordinates relative to the circle center, per point.
    xy: Vec<[f64; 2]>,
    norms: Vec<f64>,
    reached: Vec<bool>,
}

#[derive(Serialize)]
struct CompareView {
    labels: Vec<String>,
    angles: Vec<f64>,
    radius: f64,
    samples: Vec<[f64; 2]>,
    sample_domains: Vec<usize>,
    linear: PathView,
    rotation: PathView,
}

fn fixture(
    seed: u64,
    noise: f64,
) -> Result<(ManifoldSpec, LabeledStyleDataset, DomainChart), JsError> {
    let cfg = ManifoldConfig {
        dim: DEMO_DIM,
        samples_per_domain: DEMO_SAMPLES,
        noise_sigma: noise,
        seed,
        ..ManifoldConfig::default()
    };
    let spec = cfg.resolve()?;
    let chart = DomainChart::seasons();
    let data = sample_dataset(&spec, &chart)?;
    Ok((spec, data, chart))
}

fn planar(plane: &RotationPlane, center: &[f64], v: &[f64]) -> Result<[f64; 2], JsError> {
    let shifted: Vec<f64> = v.iter().zip(center).map(|(a, c)| a - c).collect();
    let (a, b) = plane.coords(&shifted)?;
    Ok([a, b])
}

fn view(
    path: &PathReport,
    reached: &[(usize, bool)],
    plane: &RotationPlane,
    center: &[f64],
) -> Result<PathView, JsError> {
    Ok(PathView {
        xy: path
            .points
            .iter()
            .map(|p| planar(plane, center, p))
            .collect::<Result<_, _>>()?,
        norms: path.norms.clone(),
        reached: reached.iter().map(|(_, r)| *r).collect(),
    })
}

/// Rotation path and straight line between two seasons on a synthetic
/// circle, projected into the true plane.
#[wasm_bindgen]
pub fn compare_demo(
    seed: u64,
    noise: f64,
    src: &str,
    tgt: &str,
    steps: usize,
) -> Result<String, JsError> {
    let (spec, data, chart) = fixture(seed, noise)?;
    let plane = spec.true_plane()?;
    let truth = spec.ground_truth();
    let (s, t) = (chart.index_of(src)?, chart.index_of(tgt)?);
    let c = compare_paths(&plane, &data, &chart, Some(&truth), s, t, steps)?;
    let out = CompareView {
        labels: chart.labels().to_vec(),
        angles: chart.angles().to_vec(),
        radius: c.radius,
        samples: data
            .samples()
            .map(|(v, _)| planar(&plane, &spec.center, v))
            .collect::<Result<_, _>>()?,
        sample_domains: data.samples().map(|(_, d)| d).collect(),
        linear: view(&c.linear, &c.linear_reached, &plane, &spec.center)?,
        rotation: view(&c.rotation, &c.rotation_reached, &plane, &spec.center)?,
    };
    Ok(serde_json::to_string(&out)?)
}

#[derive(Serialize)]
struct LearnView {
    loss: Vec<f64>,
    smoothed: Vec<f64>,
    angles: [f64; 2],
    pca_angles: [f64; 2],
    stopped_early: bool,
}

/// Fit a plane to a small synthetic circle and report the loss curve and
/// the principal angles to the true plane.
#[wasm_bindgen]
pub fn learn_demo(
    seed: u64,
    noise: f64,
    learning_rate: f64,
    max_steps: usize,
) -> Result<String, JsError> {
    let (spec, data, chart) = fixture(seed, noise)?;
    let config = TrainConfig {
        learning_rate,
        max_steps,
        seed,
        ..TrainConfig::default()
    };
    let outcome = learn_plane(&data, &chart, &config, None)?;
    let truth = spec.true_plane()?;
    let (a1, a2) = principal_angles(&outcome.plane, &truth)?;
    let (p1, p2) = principal_angles(&pca_plane_oracle(&data)?, &truth)?;
    let out = LearnView {
        loss: outcome.trace.iter().map(|p| p.loss).collect(),
        smoothed: smoothed(&outcome.trace, 50),
        angles: [a1, a2],
        pca_angles: [p1, p2],
        stopped_early: outcome.stopped_early,
    };
    Ok(serde_json::to_string(&out)?)
}

#[derive(Serialize)]
struct MatchView {
    size: usize,
    /// RGB of every pixel, row-major, 0..=255.
    generated: Vec<u8>,
    target: Vec<u8>,
    patches: Vec<[usize; 4]>,
    cells: Vec<[usize; 4]>,
    matches: Vec<(usize, usize, f64)>,
}

fn demo_image(size: usize, shift: f64) -> Result<Image, JsError> {
    let cell = size / 4;
    Ok(Image::from_fn(size, size, |r, c| {
        let (i, j) = (r / cell, c / cell);
        let fx = (c % cell) as f64 / cell as f64;
        let fy = (r % cell) as f64 / cell as f64;
        [
            (0.15 + 0.22 * i as f64 + 0.1 * fx * shift).min(1.0),
            (0.85 - 0.2 * j as f64 + 0.1 * fy * shift).clamp(0.0, 1.0),
            ((0.3 + 0.13 * (i * 4 + j) as f64) % 1.0).min(1.0),
        ]
    })?)
}

fn bytes(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.width() * img.height() * 3);
    for r in 0..img.height() {
        for c in 0..img.width() {
            out.extend(
                img.pixel(r, c)
                    .iter()
                    .map(|p| (p * 255.0).round().clamp(0.0, 255.0) as u8),
            );
        }
    }
    out
}

/// Random patches of a generated image matched to the 4x4 grid of a
/// target image by cosine similarity of their features.
#[wasm_bindgen]
pub fn match_demo(seed: u64, n_patches: usize) -> Result<String, JsError> {
    let size = 64;
    let target = demo_image(size, 0.0)?;
    let generated = demo_image(size, 1.0)?;
    let gen = random_patches(&generated, n_patches, seed)?;
    let tgt = uniform_partition(&target)?;
    let matches = match_patches(&gen, &tgt)?;
    let rect = |p: &styleplane::patch::PatchFeature| [p.origin.0, p.origin.1, p.size.0, p.size.1];
    let out = MatchView {
        size,
        generated: bytes(&generated),
        target: bytes(&target),
        patches: gen.iter().map(rect).collect(),
        cells: tgt.iter().map(rect).collect(),
        matches: matches
            .iter()
            .map(|m| (m.gen, m.tgt, m.similarity))
            .collect(),
    };
    Ok(serde_json::to_string(&out)?)
}
