//! Fitting a rotation plane to domain-labeled style vectors.
//!
//! Pairs of samples from different domains are aligned by rotating the
//! source by the chart angle between the two domains; the plane parameters
//! are trained with Adam on the mean squared alignment error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{DomainChart, LabeledStyleDataset};
use crate::error::{Error, Result};
use crate::grad::{batch_loss, loss_gradient, Pair, PlaneGradient};
use crate::linalg::{dot, norm};
use crate::plane::{gram_schmidt, RotationPlane};

/// Window for the loss-plateau stopping rule.
pub const PLATEAU_WINDOW: usize = 50;

const MAX_INIT_ATTEMPTS: usize = 10;
const PAIR_STREAM: u64 = 0x9a1e_5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_steps: usize,
    /// Pairs per step. The pair pool holds `max(batch_size, samples)` pairs
    /// and is walked in fixed windows; a batch at least the pool size means
    /// full-batch descent.
    pub batch_size: usize,
    pub seed: u64,
    /// A plateau is a loss improvement of less than this over
    /// [`PLATEAU_WINDOW`] steps.
    pub tolerance: f64,
    /// On a plateau the learning rate is multiplied by this factor, up to
    /// `max_decays` times; the next plateau after that stops training.
    pub lr_decay: f64,
    pub max_decays: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            beta1: 0.0,
            beta2: 0.99,
            epsilon: 1e-8,
            max_steps: 5000,
            batch_size: 2048,
            seed: 42,
            tolerance: 1e-10,
            lr_decay: 0.3,
            max_decays: 6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be positive, got {v}")))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        positive("epsilon", self.epsilon)?;
        positive("tolerance", self.tolerance)?;
        for (field, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::invalid(
                    field,
                    format!("must lie in [0, 1), got {b}"),
                ));
            }
        }
        if !(self.lr_decay > 0.0 && self.lr_decay < 1.0) {
            return Err(Error::invalid(
                "lr_decay",
                format!("must lie in (0, 1), got {}", self.lr_decay),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be positive"));
        }
        Ok(())
    }
}

/// Draw `count` cross-domain pairs. The source sample is uniform over the
/// dataset, the target domain uniform over the other domains, and the target
/// sample uniform within it. `theta` is the chart angle from source to
/// target domain wrapped to (-pi, pi].
pub fn make_pairs(
    data: &LabeledStyleDataset,
    chart: &DomainChart,
    count: usize,
    seed: u64,
) -> Result<Vec<Pair>> {
    let groups = data.require_all_domains(chart)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = chart.len();
    let pairs = (0..count)
        .map(|_| {
            let src = rng.random_range(0..data.len());
            let d_src = data.domain(src);
            let mut d_tgt = rng.random_range(0..k - 1);
            if d_tgt >= d_src {
                d_tgt += 1;
            }
            let members = &groups[d_tgt];
            let tgt = members[rng.random_range(0..members.len())];
            Pair {
                src,
                tgt,
                theta: chart.theta(d_src, d_tgt),
            }
        })
        .collect();
    Ok(pairs)
}

/// Adam moment accumulators for the concatenated parameters `[mu, nu]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub step: u32,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState {
            first: vec![0.0; 2 * dim],
            second: vec![0.0; 2 * dim],
            step: 0,
        }
    }
}

/// One Adam update of `(mu, nu)` in place.
pub fn adam_step(
    state: &mut AdamState,
    mu: &mut [f64],
    nu: &mut [f64],
    grad: &PlaneGradient,
    config: &TrainConfig,
) {
    debug_assert_eq!(state.first.len(), mu.len() + nu.len());
    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - config.beta1.powi(t);
    let bias2 = 1.0 - config.beta2.powi(t);

    let params = mu.iter_mut().chain(nu.iter_mut());
    let grads = grad.d_mu.iter().chain(&grad.d_nu);
    for (((p, g), m), v) in params
        .zip(grads)
        .zip(state.first.iter_mut())
        .zip(state.second.iter_mut())
    {
        *m = config.beta1 * *m + (1.0 - config.beta1) * g;
        *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub step: usize,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub plane: RotationPlane,
    /// Loss at each step, evaluated before that step's update.
    pub trace: Vec<TracePoint>,
    pub stopped_early: bool,
}

impl TrainOutcome {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,loss\n");
        for p in &self.trace {
            out.push_str(&format!("{},{}\n", p.step, crate::data::fmt_f64(p.loss)));
        }
        out
    }
}

/// Gaussian entries scaled by `1/sqrt(n)`, retried on a degenerate draw.
pub fn random_plane(dim: usize, rng: &mut impl Rng) -> Result<RotationPlane> {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut last = Error::DegeneratePlane("no initialization attempted");
    for _ in 0..MAX_INIT_ATTEMPTS {
        let mut draw = || -> Vec<f64> {
            (0..dim)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut *rng);
                    scale * z
                })
                .collect()
        };
        let mu = draw();
        let nu = draw();
        match gram_schmidt(&mu, &nu) {
            Ok(p) => return Ok(p),
            Err(e @ Error::DegeneratePlane(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// The plane [`learn_plane`] starts from when no initialization is given.
pub fn initial_plane(dim: usize, seed: u64) -> Result<RotationPlane> {
    random_plane(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Fit a plane to `data` under `chart`. Deterministic for a fixed
/// `config.seed`.
pub fn learn_plane(
    data: &LabeledStyleDataset,
    chart: &DomainChart,
    config: &TrainConfig,
    init: Option<(&[f64], &[f64])>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut plane = match init {
        Some((mu, nu)) => {
            crate::linalg::check_dim(data.dim(), mu.len())?;
            gram_schmidt(mu, nu)?
        }
        None => initial_plane(data.dim(), config.seed)?,
    };
    let pool_size = config.batch_size.max(data.len());
    let pool = make_pairs(data, chart, pool_size, config.seed ^ PAIR_STREAM)?;
    let batch = config.batch_size.min(pool_size);

    let mut mu = plane.mu().to_vec();
    let mut nu = plane.nu().to_vec();
    let mut state = AdamState::new(data.dim());
    let mut trace = Vec::with_capacity(config.max_steps);
    let mut stopped_early = false;
    let mut cursor = 0;
    let mut step_config = config.clone();
    let mut decays = 0;
    let mut window_start = 0;

    for step in 0..config.max_steps {
        let window: Vec<Pair> = (0..batch).map(|k| pool[(cursor + k) % pool_size]).collect();
        cursor = (cursor + batch) % pool_size;

        let (grad, loss) = loss_gradient(data, &window, &plane)?;
        if !loss.is_finite() || !grad.is_finite() {
            return Err(Error::NonFinite { step });
        }
        trace.push(TracePoint { step, loss });
        if plateaued(&trace[window_start..], config.tolerance) {
            window_start = trace.len();
            // Reversed orientation is a spurious minimum: same span, rotation
            // runs backwards. Flipping nu reverses it.
            let flipped_nu: Vec<f64> = nu.iter().map(|v| -v).collect();
            let flipped = gram_schmidt(&mu, &flipped_nu)?;
            if batch_loss(data, &window, &flipped)? < loss {
                nu = flipped_nu;
                plane = flipped;
                let dim = data.dim();
                state.first[dim..].iter_mut().for_each(|m| *m = -*m);
                continue;
            }
            if decays == config.max_decays {
                stopped_early = true;
                break;
            }
            decays += 1;
            step_config.learning_rate *= config.lr_decay;
        }

        adam_step(&mut state, &mut mu, &mut nu, &grad, &step_config);
        if !norm(&mu).is_finite() || !norm(&nu).is_finite() {
            return Err(Error::NonFinite { step });
        }
        plane = gram_schmidt(&mu, &nu)?;
    }

    Ok(TrainOutcome {
        plane,
        trace,
        stopped_early,
    })
}

/// True once the mean loss over the last [`PLATEAU_WINDOW`] steps improves
/// on the mean over the window before it by less than `tolerance`.
fn plateaued(trace: &[TracePoint], tolerance: f64) -> bool {
    let w = PLATEAU_WINDOW;
    if trace.len() < 2 * w {
        return false;
    }
    let tail = &trace[trace.len() - 2 * w..];
    let mean = |s: &[TracePoint]| s.iter().map(|p| p.loss).sum::<f64>() / w as f64;
    mean(&tail[..w]) - mean(&tail[w..]) < tolerance
}

/// Mean alignment loss for one ordered domain pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMetric {
    pub src: String,
    pub tgt: String,
    pub theta: f64,
    pub pairs: usize,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalMetrics {
    pub per_pair: Vec<PairMetric>,
    /// Mean over every cross-domain sample pair.
    pub overall: f64,
}

/// Mean alignment loss over all cross-domain sample pairs, grouped by
/// ordered domain pair (source-major order).
///
/// Uses the exact identity
/// `mean_{i in A, j in B} |R s_i - s_j|^2 = mean_A |s_i|^2 + mean_B |s_j|^2 - 2 (R mean_A).mean_B`,
/// which holds because rotation is linear and norm-preserving.
pub fn evaluate(
    plane: &RotationPlane,
    data: &LabeledStyleDataset,
    chart: &DomainChart,
) -> Result<EvalMetrics> {
    crate::linalg::check_dim(plane.dim(), data.dim())?;
    let groups = data.require_all_domains(chart)?;
    let stats: Vec<(Vec<f64>, f64)> = groups
        .iter()
        .map(|g| {
            let sq = g
                .iter()
                .map(|&i| dot(data.vector(i), data.vector(i)))
                .sum::<f64>()
                / g.len() as f64;
            (data.mean(g), sq)
        })
        .collect();

    let mut per_pair = Vec::new();
    let mut total = 0.0;
    let mut count = 0usize;
    for a in 0..chart.len() {
        for b in 0..chart.len() {
            if a == b {
                continue;
            }
            let theta = chart.theta(a, b);
            let rotated = plane.rotate(&stats[a].0, theta)?;
            let mean_loss = (stats[a].1 + stats[b].1 - 2.0 * dot(&rotated, &stats[b].0)).max(0.0);
            let pairs = groups[a].len() * groups[b].len();
            total += mean_loss * pairs as f64;
            count += pairs;
            per_pair.push(PairMetric {
                src: chart.labels()[a].clone(),
                tgt: chart.labels()[b].clone(),
                theta,
                pairs,
                mean_loss,
            });
        }
    }
    Ok(EvalMetrics {
        per_pair,
        overall: total / count as f64,
    })
}

/// Trailing moving average with the given window.
pub fn smoothed(trace: &[TracePoint], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(trace.len());
    let mut sum = 0.0;
    for (i, p) in trace.iter().enumerate() {
        sum += p.loss;
        if i >= window {
            sum -= trace[i - window].loss;
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// Euclidean norm of the concatenated raw parameters.
pub fn param_norm(plane: &RotationPlane) -> f64 {
    norm(plane.mu()).hypot(norm(plane.nu()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::StyleVector;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn square_dataset() -> LabeledStyleDataset {
        // four points on the unit circle in the (e1, e2) plane, plus residual
        let mut d = LabeledStyleDataset::new(3);
        for k in 0..4 {
            let a = FRAC_PI_2 * k as f64;
            d.push(StyleVector::new(vec![a.cos(), a.sin(), 0.5]).unwrap(), k)
                .unwrap();
        }
        d
    }

    #[test]
    fn pairs_are_cross_domain_and_deterministic() {
        let d = square_dataset();
        let c = DomainChart::seasons();
        let a = make_pairs(&d, &c, 200, 3).unwrap();
        let b = make_pairs(&d, &c, 200, 3).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert_ne!(d.domain(p.src), d.domain(p.tgt));
            assert_eq!(p.theta, c.theta(d.domain(p.src), d.domain(p.tgt)));
        }
        // spring -> winter wraps to -pi/2
        let sw = a.iter().find(|p| p.src == 0 && p.tgt == 3).unwrap();
        assert!((sw.theta + FRAC_PI_2).abs() < 1e-15);
        assert_ne!(a, make_pairs(&d, &c, 200, 4).unwrap());
    }

    #[test]
    fn make_pairs_needs_every_domain() {
        let mut d = LabeledStyleDataset::new(2);
        d.push(StyleVector::new(vec![1.0, 0.0]).unwrap(), 0)
            .unwrap();
        assert!(matches!(
            make_pairs(&d, &DomainChart::seasons(), 5, 0),
            Err(Error::EmptyDomain(_))
        ));
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let cfg = TrainConfig::default();
        let mut st = AdamState::new(2);
        let mut mu = vec![0.3, -0.1];
        let mut nu = vec![0.7, 0.2];
        adam_step(&mut st, &mut mu, &mut nu, &PlaneGradient::zeros(2), &cfg);
        assert_eq!(mu, vec![0.3, -0.1]);
        assert_eq!(nu, vec![0.7, 0.2]);
    }

    #[test]
    fn adam_first_step_uses_raw_gradient_when_beta1_zero() {
        let cfg = TrainConfig::default();
        let mut st = AdamState::new(1);
        let mut mu = vec![1.0];
        let mut nu = vec![1.0];
        let g = PlaneGradient {
            d_mu: vec![0.5],
            d_nu: vec![-2.0],
        };
        adam_step(&mut st, &mut mu, &mut nu, &g, &cfg);
        assert_eq!(st.first, vec![0.5, -2.0]);
        // m_hat / sqrt(v_hat) = sign(g) on the first step
        assert!((mu[0] - (1.0 - cfg.learning_rate * 0.5 / (0.5 + cfg.epsilon))).abs() < 1e-15);
        assert!((nu[0] - (1.0 + cfg.learning_rate * 2.0 / (2.0 + cfg.epsilon))).abs() < 1e-15);
    }

    #[test]
    fn adam_two_steps_match_reference() {
        // f(mu, nu) = 0.5 * sum(a_i * x_i^2) on x = [mu, nu], n = 2.
        // Reference values from an independent script of the same update
        // (lr 0.1, beta1 0.0, beta2 0.99, eps 1e-8).
        let a = [1.0, 3.0, 0.5, 2.0];
        let cfg = TrainConfig {
            learning_rate: 0.1,
            ..TrainConfig::default()
        };
        let mut st = AdamState::new(2);
        let mut mu = vec![1.0, -2.0];
        let mut nu = vec![0.5, 0.25];
        for _ in 0..2 {
            let g = PlaneGradient {
                d_mu: vec![a[0] * mu[0], a[1] * mu[1]],
                d_nu: vec![a[2] * nu[0], a[3] * nu[1]],
            };
            adam_step(&mut st, &mut mu, &mut nu, &g, &cfg);
        }
        let expected = ADAM_REFERENCE;
        for (got, want) in mu.iter().chain(&nu).zip(expected) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    const ADAM_REFERENCE: [f64; 4] = [
        0.8053691401636449,
        -1.8025835727105428,
        0.31160602039952134,
        0.07715313169848705,
    ];

    #[test]
    fn zero_steps_returns_init() {
        let d = square_dataset();
        let cfg = TrainConfig {
            max_steps: 0,
            ..TrainConfig::default()
        };
        let init_mu = [1.0, 0.2, 0.0];
        let init_nu = [0.0, 1.0, 0.3];
        let out = learn_plane(
            &d,
            &DomainChart::seasons(),
            &cfg,
            Some((&init_mu, &init_nu)),
        )
        .unwrap();
        assert!(out.trace.is_empty());
        assert_eq!(out.plane.mu(), &init_mu);
        assert_eq!(out.plane.nu(), &init_nu);
    }

    #[test]
    fn divergent_learning_rate_reports_non_finite() {
        let d = square_dataset();
        let cfg = TrainConfig {
            learning_rate: 1e308,
            max_steps: 10,
            ..TrainConfig::default()
        };
        assert!(matches!(
            learn_plane(&d, &DomainChart::seasons(), &cfg, None),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn evaluate_matches_enumeration() {
        let d = square_dataset();
        let c = DomainChart::seasons();
        let w = gram_schmidt(&[0.3, 1.0, 0.2], &[-0.5, 0.1, 0.9]).unwrap();
        let m = evaluate(&w, &d, &c).unwrap();
        let mut total = 0.0;
        let mut n = 0;
        for i in 0..d.len() {
            for j in 0..d.len() {
                let (a, b) = (d.domain(i), d.domain(j));
                if a != b {
                    let r = w.rotate(d.vector(i), c.theta(a, b)).unwrap();
                    total += crate::linalg::dist_sq(&r, d.vector(j));
                    n += 1;
                }
            }
        }
        assert!((m.overall - total / n as f64).abs() < 1e-12);
        assert_eq!(m.per_pair.len(), 12);
        assert_eq!(
            (m.per_pair[0].src.as_str(), m.per_pair[0].tgt.as_str()),
            ("spring", "summer")
        );

        let truth = gram_schmidt(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!(evaluate(&truth, &d, &c).unwrap().overall <= 1e-10);
    }

    #[test]
    fn evaluate_single_domain_is_empty_domain() {
        let mut d = LabeledStyleDataset::new(2);
        d.push(StyleVector::new(vec![1.0, 0.0]).unwrap(), 0)
            .unwrap();
        d.push(StyleVector::new(vec![0.0, 1.0]).unwrap(), 0)
            .unwrap();
        let c = DomainChart::uniform(vec!["a".into(), "b".into()]).unwrap();
        let w = gram_schmidt(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(matches!(evaluate(&w, &d, &c), Err(Error::EmptyDomain(l)) if l == "b"));
    }

    #[test]
    fn learns_square_exactly() {
        let d = square_dataset();
        let c = DomainChart::seasons();
        let cfg = TrainConfig {
            max_steps: 3000,
            ..TrainConfig::default()
        };
        let out = learn_plane(&d, &c, &cfg, None).unwrap();
        let m = evaluate(&out.plane, &d, &c).unwrap();
        assert!(m.overall < 1e-6, "{}", m.overall);
        let _ = PI;
    }

    #[test]
    fn smoothing_window() {
        let t: Vec<TracePoint> = [4.0, 2.0, 0.0]
            .iter()
            .enumerate()
            .map(|(step, &loss)| TracePoint { step, loss })
            .collect();
        assert_eq!(smoothed(&t, 2), vec![4.0, 3.0, 1.0]);
    }
}
