//! Domain charts and labeled style datasets, with their file formats.
//!
//! Chart file: `{"labels": [...], "angles": [...]}`.
//! Dataset file: CSV with header `domain,v0,v1,...` and one sample per row.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::wrap_angle;
use crate::plane::StyleVector;

/// Position of every domain on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartFile")]
pub struct DomainChart {
    labels: Vec<String>,
    angles: Vec<f64>,
}

#[derive(Deserialize)]
struct ChartFile {
    labels: Vec<String>,
    angles: Option<Vec<f64>>,
}

impl TryFrom<ChartFile> for DomainChart {
    type Error = Error;

    fn try_from(file: ChartFile) -> Result<Self> {
        match file.angles {
            Some(angles) => DomainChart::new(file.labels, angles),
            None => DomainChart::uniform(file.labels),
        }
    }
}

impl DomainChart {
    pub fn new(labels: Vec<String>, angles: Vec<f64>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::invalid("labels", "a chart needs at least 2 domains"));
        }
        if labels.len() != angles.len() {
            return Err(Error::invalid(
                "angles",
                format!("{} angles for {} labels", angles.len(), labels.len()),
            ));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::invalid("labels", format!("duplicate label {l:?}")));
            }
        }
        if let Some(a) = angles.iter().find(|a| !(0.0..TAU).contains(*a)) {
            return Err(Error::invalid(
                "angles",
                format!("{a} is outside [0, 2*pi)"),
            ));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("angles", "must be strictly increasing"));
        }
        Ok(DomainChart { labels, angles })
    }

    /// Evenly spaced chart: domain `i` of `N` sits at `2*pi*i/N`.
    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let k = labels.len() as f64;
        let angles = (0..labels.len()).map(|i| TAU * i as f64 / k).collect();
        Self::new(labels, angles)
    }

    /// Uniform four-season chart: spring, summer, autumn, winter.
    pub fn seasons() -> Self {
        Self::uniform(
            ["spring", "summer", "autumn", "winter"]
                .into_iter()
                .map(String::from)
                .collect(),
        )
        .expect("season chart is valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angle(&self, domain: usize) -> f64 {
        self.angles[domain]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::invalid("domain", format!("unknown domain label {label:?}")))
    }

    /// Shortest signed rotation from `src` to `tgt`, wrapped to (-pi, pi].
    pub fn theta(&self, src: usize, tgt: usize) -> f64 {
        wrap_angle(self.angles[tgt] - self.angles[src])
    }

    /// Rotation from `src` to `tgt` following the chart's cyclic order,
    /// in [0, 2*pi). Passes through every domain listed between them.
    pub fn forward_theta(&self, src: usize, tgt: usize) -> f64 {
        (self.angles[tgt] - self.angles[src]).rem_euclid(TAU)
    }

    /// Domain whose angle is circularly closest to `angle`.
    pub fn nearest(&self, angle: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, a) in self.angles.iter().enumerate() {
            let d = wrap_angle(angle - a).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Same chart with every angle shifted by `delta` (re-sorted so the
    /// angles stay increasing in [0, 2*pi)).
    pub fn shifted(&self, delta: f64) -> Self {
        let mut pairs: Vec<(String, f64)> = self
            .labels
            .iter()
            .cloned()
            .zip(self.angles.iter().map(|a| (a + delta).rem_euclid(TAU)))
            .collect();
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (labels, angles) = pairs.into_iter().unzip();
        Self::new(labels, angles).expect("shifted chart stays valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chart serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Style vectors tagged with a domain index.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStyleDataset {
    dim: usize,
    vectors: Vec<StyleVector>,
    domains: Vec<usize>,
}

impl LabeledStyleDataset {
    pub fn new(dim: usize) -> Self {
        LabeledStyleDataset {
            dim,
            vectors: Vec::new(),
            domains: Vec::new(),
        }
    }

    pub fn push(&mut self, vector: StyleVector, domain: usize) -> Result<()> {
        crate::linalg::check_dim(self.dim, vector.dim())?;
        self.vectors.push(vector);
        self.domains.push(domain);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &StyleVector {
        &self.vectors[i]
    }

    pub fn domain(&self, i: usize) -> usize {
        self.domains[i]
    }

    pub fn samples(&self) -> impl Iterator<Item = (&StyleVector, usize)> {
        self.vectors.iter().zip(self.domains.iter().copied())
    }

    /// Sample indices grouped by domain, one list per chart domain.
    pub fn by_domain(&self, chart: &DomainChart) -> Result<Vec<Vec<usize>>> {
        let mut groups = vec![Vec::new(); chart.len()];
        for (i, &d) in self.domains.iter().enumerate() {
            groups
                .get_mut(d)
                .ok_or_else(|| {
                    Error::invalid(
                        "domain",
                        format!(
                            "sample {i} has domain {d} but the chart has {}",
                            chart.len()
                        ),
                    )
                })?
                .push(i);
        }
        Ok(groups)
    }

    /// Like [`by_domain`](Self::by_domain) but every domain must be populated.
    pub fn require_all_domains(&self, chart: &DomainChart) -> Result<Vec<Vec<usize>>> {
        let groups = self.by_domain(chart)?;
        if let Some(d) = groups.iter().position(Vec::is_empty) {
            return Err(Error::EmptyDomain(chart.labels()[d].clone()));
        }
        Ok(groups)
    }

    pub fn mean(&self, indices: &[usize]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for &i in indices {
            crate::linalg::axpy(1.0, &self.vectors[i], &mut acc);
        }
        let k = indices.len().max(1) as f64;
        acc.iter_mut().for_each(|v| *v /= k);
        acc
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("domain");
        for j in 0..self.dim {
            let _ = write!(out, ",v{j}");
        }
        out.push('\n');
        for (v, d) in self.samples() {
            let _ = write!(out, "{d}");
            for x in v.iter() {
                let _ = write!(out, ",{}", fmt_f64(*x));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: u64, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if headers.get(0) != Some("domain") || headers.len() < 3 {
            return Err(parse_err(1, "header must be domain,v0,v1,...".into()));
        }
        for (j, h) in headers.iter().skip(1).enumerate() {
            if h != format!("v{j}") {
                return Err(parse_err(1, format!("expected column v{j}, found {h:?}")));
            }
        }
        let dim = headers.len() - 1;
        let mut data = LabeledStyleDataset::new(dim);
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let domain: usize = record[0]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad domain index {:?}", &record[0])))?;
            let values = record
                .iter()
                .skip(1)
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(line, format!("bad value: {e}")))?;
            let v = StyleVector::new(values).map_err(|e| parse_err(line, e.to_string()))?;
            data.push(v, domain)?;
        }
        Ok(data)
    }
}

/// Scientific notation with 17 significant digits; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
