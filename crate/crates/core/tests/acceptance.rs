//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use styleplane::cli::{compare_paths, grad_reports, run_with};
use styleplane::learn::{evaluate, initial_plane, learn_plane, TrainConfig};
use styleplane::manifold::{pca_plane_oracle, principal_angles, sample_dataset, ManifoldConfig};
use styleplane::patch::{
    match_patches, patch_style_distance, uniform_partition, Image, PatchFeature,
};
use styleplane::{gram_schmidt, DomainChart, RotationPlane};

const ROTATION_TRIALS: usize = 1000;
const ROTATION_DIMS: [usize; 5] = [2, 3, 8, 64, 512];
const ROTATION_TOL: f64 = 1e-9;
const ROTATION_BUDGET: Duration = Duration::from_secs(10);

const GRAD_DIMS: [usize; 3] = [3, 8, 64];
const GRAD_TRIALS: usize = 100;
const GRAD_TOL: f64 = 1e-5;
const GRAD_BUDGET: Duration = Duration::from_secs(20);

const RECOVERY_MAX_STEPS: usize = 5000;
const RECOVERY_ANGLE: f64 = 1e-2;
const RECOVERY_LOSS_RATIO: f64 = 0.01;
const RECOVERY_PCA_FACTOR: f64 = 2.0;
const RECOVERY_BUDGET: Duration = Duration::from_secs(60);

const CONTRAST_STEPS: usize = 101;
const CONTRAST_NORM_TOL: f64 = 1e-9;
const CONTRAST_MIDPOINT_FRACTION: f64 = 0.05;
const CONTRAST_BUDGET: Duration = Duration::from_secs(5);

const CLOSURE_TOL: f64 = 1e-9;
const UNEVEN_ANGLES: [f64; 4] = [0.0, 2.0, 3.6, 4.9];

const PATCH_SIM_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn gaussian(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

fn rel_dist(a: &[f64], b: &[f64], scale: f64) -> f64 {
    let d: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    d / scale.max(f64::MIN_POSITIVE)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn random_plane(dim: usize, rng: &mut impl Rng) -> RotationPlane {
    loop {
        if let Ok(p) = gram_schmidt(&gaussian(dim, rng), &gaussian(dim, rng)) {
            return p;
        }
    }
}

fn rotation_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 6];
    for &dim in &ROTATION_DIMS {
        for _ in 0..ROTATION_TRIALS {
            let s = gaussian(dim, &mut rng);
            let w = random_plane(dim, &mut rng);
            let t1 = rng.random_range(-10.0..10.0);
            let t2 = rng.random_range(-10.0..10.0);
            let ns = norm(&s);
            let r1 = w.rotate(&s, t1).unwrap();
            let checks = [
                (norm(&r1) - ns).abs() / ns,
                rel_dist(
                    &w.rotate(&r1, t2).unwrap(),
                    &w.rotate(&s, t1 + t2).unwrap(),
                    ns,
                ),
                rel_dist(&w.rotate(&s, t1 + TAU).unwrap(), &r1, ns),
                rel_dist(&w.rotate(&r1, -t1).unwrap(), &s, ns),
                rel_dist(&w.residual(&r1).unwrap(), &w.residual(&s).unwrap(), ns),
                {
                    let p = w.project(&s).unwrap();
                    let q = w.residual(&s).unwrap();
                    let sum: Vec<f64> = p.iter().zip(q.iter()).map(|(a, b)| a + b).collect();
                    rel_dist(&sum, &s, ns)
                },
            ];
            for (acc, c) in worst.iter_mut().zip(checks) {
                *acc = acc.max(c);
            }
        }
    }
    let elapsed = start.elapsed();
    let max = worst.iter().cloned().fold(0.0, f64::max);
    Outcome {
        pass: max <= ROTATION_TOL && elapsed < ROTATION_BUDGET,
        detail: format!(
            "norm {:.1e}, additivity {:.1e}, periodicity {:.1e}, inverse {:.1e}, residual {:.1e}, decomposition {:.1e} (tol {ROTATION_TOL:.0e}); {:.2?}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5], elapsed
        ),
    }
}

fn gradient_fidelity() -> Outcome {
    let start = Instant::now();
    let reports = grad_reports(&GRAD_DIMS, GRAD_TRIALS, 42, false).unwrap();
    let elapsed = start.elapsed();
    let mut worst = [0.0f64; 3];
    for (_, _, r) in &reports {
        worst[0] = worst[0].max(r.theta.rel_error);
        worst[1] = worst[1].max(r.mu.rel_error);
        worst[2] = worst[2].max(r.nu.rel_error);
    }
    let max = worst.iter().cloned().fold(0.0, f64::max);
    Outcome {
        pass: reports.len() == GRAD_DIMS.len() * GRAD_TRIALS && max <= GRAD_TOL && elapsed < GRAD_BUDGET,
        detail: format!(
            "{} trials, max rel error theta {:.2e}, mu {:.2e}, nu {:.2e} (tol {GRAD_TOL:.0e}); {:.2?}",
            reports.len(),
            worst[0],
            worst[1],
            worst[2],
            elapsed
        ),
    }
}

struct Fixture {
    data: styleplane::LabeledStyleDataset,
    chart: DomainChart,
    spec: styleplane::manifold::ManifoldSpec,
}

fn fixture() -> Fixture {
    let spec = ManifoldConfig::default().resolve().unwrap();
    let chart = DomainChart::seasons();
    let data = sample_dataset(&spec, &chart).unwrap();
    Fixture { data, chart, spec }
}

fn plane_recovery(fx: &Fixture) -> (Outcome, RotationPlane) {
    let start = Instant::now();
    let config = TrainConfig {
        max_steps: RECOVERY_MAX_STEPS,
        ..TrainConfig::default()
    };
    let init = initial_plane(fx.data.dim(), config.seed).unwrap();
    let outcome = learn_plane(&fx.data, &fx.chart, &config, None).unwrap();
    let elapsed = start.elapsed();
    let truth = fx.spec.true_plane().unwrap();
    let (a1, a2) = principal_angles(&outcome.plane, &truth).unwrap();
    let learned = a1.max(a2);
    let (p1, p2) = principal_angles(&pca_plane_oracle(&fx.data).unwrap(), &truth).unwrap();
    let pca = p1.max(p2);
    let initial = evaluate(&init, &fx.data, &fx.chart).unwrap().overall;
    let last = evaluate(&outcome.plane, &fx.data, &fx.chart)
        .unwrap()
        .overall;
    let pass = learned <= RECOVERY_ANGLE
        && outcome.trace.len() <= RECOVERY_MAX_STEPS
        && last <= RECOVERY_LOSS_RATIO * initial
        && learned <= RECOVERY_PCA_FACTOR * pca
        && elapsed < RECOVERY_BUDGET;
    let detail = format!(
        "angle {learned:.2e} (tol {RECOVERY_ANGLE:.0e}), pca {pca:.2e}, ratio to pca {:.2} (tol {RECOVERY_PCA_FACTOR}), loss {initial:.3e} -> {last:.3e} (ratio {:.2e}, tol {RECOVERY_LOSS_RATIO}), {} steps; {:.2?}",
        learned / pca,
        last / initial,
        outcome.trace.len(),
        elapsed
    );
    (Outcome { pass, detail }, outcome.plane)
}

fn path_contrast(fx: &Fixture, plane: &RotationPlane) -> Outcome {
    let start = Instant::now();
    let truth = fx.spec.ground_truth();
    let (spring, summer, autumn, winter) = (0, 1, 2, 3);
    let c = compare_paths(
        plane,
        &fx.data,
        &fx.chart,
        Some(&truth),
        spring,
        winter,
        CONTRAST_STEPS,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let norm_dev = c.rotation.max_norm_deviation();
    let rot = |d: usize| c.rotation_reached[d].1;
    let lin = |d: usize| c.linear_reached[d].1;
    let midpoint = c.linear_midpoint_magnitude() / c.radius;
    let checks = [
        norm_dev <= CONTRAST_NORM_TOL,
        rot(summer) && rot(autumn),
        !lin(summer) && !lin(autumn),
        midpoint <= CONTRAST_MIDPOINT_FRACTION,
        elapsed < CONTRAST_BUDGET,
    ];
    // Spring and autumn are the antipodal pair on the uniform four-domain chart.
    let antipodal = compare_paths(
        plane,
        &fx.data,
        &fx.chart,
        Some(&truth),
        spring,
        autumn,
        CONTRAST_STEPS,
    )
    .unwrap();
    Outcome {
        pass: checks.iter().all(|c| *c),
        detail: format!(
            "rotation norm deviation {norm_dev:.1e} [{}], rotation reaches summer {} autumn {} [{}], linear reaches summer {} autumn {} [{}], linear midpoint magnitude {midpoint:.4} r (tol {CONTRAST_MIDPOINT_FRACTION}) [{}]; spring->autumn midpoint {:.4} r; {:.2?}",
            ok(checks[0]),
            rot(summer),
            rot(autumn),
            ok(checks[1]),
            lin(summer),
            lin(autumn),
            ok(checks[2]),
            ok(checks[3]),
            antipodal.linear_midpoint_magnitude() / antipodal.radius,
            elapsed
        ),
    }
}

fn closure(plane: &RotationPlane) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let uneven = DomainChart::new(
        ["spring", "summer", "autumn", "winter"]
            .map(String::from)
            .to_vec(),
        UNEVEN_ANGLES.to_vec(),
    )
    .unwrap();
    let mut worst_direct = 0.0f64;
    let mut worst_chart = [0.0f64; 2];
    let mut planes: Vec<RotationPlane> = vec![plane.clone()];
    for dim in [3, 8, 64] {
        planes.push(random_plane(dim, &mut rng));
    }
    for w in &planes {
        for _ in 0..100 {
            let s = gaussian(w.dim(), &mut rng);
            let ns = norm(&s);
            worst_direct = worst_direct.max(rel_dist(&w.rotate(&s, TAU).unwrap(), &s, ns));
            for (k, chart) in [DomainChart::seasons(), uneven.clone()].iter().enumerate() {
                let mut v = styleplane::StyleVector::new(s.clone()).unwrap();
                for d in 0..chart.len() {
                    v = w
                        .rotate(&v, chart.forward_theta(d, (d + 1) % chart.len()))
                        .unwrap();
                }
                worst_chart[k] = worst_chart[k].max(rel_dist(&v, &s, ns));
            }
        }
    }
    let max = worst_direct.max(worst_chart[0]).max(worst_chart[1]);
    Outcome {
        pass: max <= CLOSURE_TOL,
        detail: format!(
            "2*pi turn {worst_direct:.1e}, uniform chart loop {:.1e}, uneven chart loop {:.1e} (tol {CLOSURE_TOL:.0e})",
            worst_chart[0], worst_chart[1]
        ),
    }
}

fn patch_matching() -> Outcome {
    // sixteen colors, no two proportional
    let color = |k: usize| -> [f64; 3] {
        let (i, j) = (k / 4, k % 4);
        [
            0.1 + 0.2 * i as f64,
            0.9 - 0.2 * j as f64,
            0.15 + 0.05 * (i * 4 + j) as f64 % 0.8,
        ]
    };
    let img = Image::from_fn(64, 64, |r, c| color((r / 16) * 4 + c / 16)).unwrap();
    let grid = uniform_partition(&img).unwrap();
    let gen: Vec<PatchFeature> = grid.clone();
    let matches = match_patches(&gen, &grid).unwrap();
    let own = matches.iter().all(|m| m.tgt == m.gen);
    let sim = matches
        .iter()
        .map(|m| (m.similarity - 1.0).abs())
        .fold(0.0, f64::max);
    let distance = patch_style_distance(&matches, &gen, &grid).unwrap();

    let flat = Image::from_fn(64, 64, |_, _| [0.3, 0.5, 0.7]).unwrap();
    let ties = match_patches(&gen, &uniform_partition(&flat).unwrap()).unwrap();
    let tie_break = ties.iter().all(|m| m.tgt == 0);

    let scaled: Vec<PatchFeature> = gen
        .iter()
        .map(|p| PatchFeature {
            feature: p.feature.iter().map(|x| 2.0 * x).collect(),
            ..p.clone()
        })
        .collect();
    let rescaled = match_patches(&scaled, &grid).unwrap();
    let scale_inv = rescaled.iter().zip(&matches).all(|(a, b)| a.tgt == b.tgt);

    Outcome {
        pass: own && sim <= PATCH_SIM_TOL && distance == 0.0 && tie_break && scale_inv,
        detail: format!(
            "own-cell matches {own}, max |sim - 1| {sim:.1e} (tol {PATCH_SIM_TOL:.0e}), identity distance {distance}, tie-break {tie_break}, scale invariance {scale_inv}"
        ),
    }
}

fn run_cli(args: &[&str]) -> i32 {
    let mut sink = Vec::new();
    let mut full = vec!["styleplane"];
    full.extend_from_slice(args);
    run_with(full, &mut sink)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    let mut codes = Vec::new();
    for d in &dirs {
        let d = d.to_str().unwrap();
        let data = format!("{d}/dataset.csv");
        codes.push(run_cli(&["--seed", "7", "--out-dir", d, "gen-data"]));
        codes.push(run_cli(&[
            "--seed",
            "7",
            "--out-dir",
            d,
            "learn",
            "--data",
            &data,
            "--max-steps",
            "200",
        ]));
    }
    let identical = ["dataset.csv", "truth.json", "plane.json", "trace.csv"]
        .iter()
        .all(|f| {
            std::fs::read(dirs[0].join(f)).unwrap() == std::fs::read(dirs[1].join(f)).unwrap()
        });

    let plane = RotationPlane::read(&dirs[0].join("plane.json")).unwrap();
    let copy = tmp.path().join("copy.json");
    plane.write(&copy).unwrap();
    let back = RotationPlane::read(&copy).unwrap();
    let digits = |p: &RotationPlane| -> Vec<String> {
        p.mu()
            .iter()
            .chain(p.nu())
            .chain(p.m())
            .chain(p.n())
            .map(|x| format!("{x:.16e}"))
            .collect()
    };
    let round_trip = digits(&plane) == digits(&back) && plane == back;
    Outcome {
        pass: codes.iter().all(|c| *c == 0) && identical && round_trip,
        detail: format!("exit codes {codes:?}, byte-identical outputs {identical}, plane round trip {round_trip}"),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn main() {
    let fx = fixture();
    let (recovery, learned) = plane_recovery(&fx);
    let results = [
        ("1 rotation algebra", rotation_algebra()),
        ("2 gradient fidelity", gradient_fidelity()),
        ("3 plane recovery", recovery),
        ("4 rotation vs linear path", path_contrast(&fx, &learned)),
        ("5 closure", closure(&learned)),
        ("6 patch matching", patch_matching()),
        ("7 determinism and round trip", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
