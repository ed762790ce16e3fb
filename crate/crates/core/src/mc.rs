//! Monte Carlo estimation of the Girsanov expectations for the hull transform.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{
    convex_hull, density_phi_with_hull, integrate_phi, phi_sup, sample_ppp_with, tau_with_hull,
    HullTransform, Point, PointConfiguration, WINDOW_AREA,
};
use crate::numeric::{poisson_pmf_table, NeumaierSum};
use crate::report::{decimal, BatchPoint, CheckReport, Status};
use crate::rng::stream;
use crate::{Error, Result};

/// Identity acceptance threshold on `|z|`.
pub const Z_THRESHOLD: f64 = 4.0;

/// Every this-many samples the quadrature is repeated on a doubled grid.
pub const REFINE_EVERY: usize = 16;

pub const MIN_QUAD: usize = 64;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "GIRSANOV_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityValue {
    pub value: f64,
    /// `∫ φ dσ` on the `quad_n` grid.
    pub integral: f64,
    /// `∫φ dσ` at `2·quad_n` minus the value at `quad_n`, when refined.
    pub refinement_delta: Option<f64>,
    /// Configuration points skipped for lying on the medial axis.
    pub excluded: usize,
}

fn density_impl(
    omega: &PointConfiguration,
    u: &HullTransform,
    rate: f64,
    quad_n: usize,
    refine: bool,
) -> Result<DensityValue> {
    if quad_n < MIN_QUAD {
        return Err(Error::arg(format!("quad_n must be >= {MIN_QUAD}")));
    }
    let hull = convex_hull(omega);
    if u.is_zero() || hull.is_degenerate() {
        return Ok(DensityValue {
            value: 1.0,
            integral: 0.0,
            refinement_delta: refine.then_some(0.0),
            excluded: 0,
        });
    }
    let integral = rate * integrate_phi(&hull, u, quad_n);
    let refinement_delta = refine.then(|| rate * integrate_phi(&hull, u, 2 * quad_n) - integral);
    let mut prod = 1.0;
    let mut excluded = 0;
    for x in omega.points() {
        let phi = density_phi_with_hull(&hull, x, u);
        if phi.flagged {
            excluded += 1;
            continue;
        }
        if 1.0 + phi.value <= 0.0 {
            return Err(Error::Domain(format!(
                "1 + phi = {} <= 0 at {x:?}",
                1.0 + phi.value
            )));
        }
        prod *= 1.0 + phi.value;
    }
    Ok(DensityValue {
        value: (-integral).exp() * prod,
        integral,
        refinement_delta,
        excluded,
    })
}

/// `exp(−∫ φ dσ) Π_{x∈ω} (1 + φ(ω, x))` for `σ = rate · Lebesgue`.
pub fn girsanov_density(
    omega: &PointConfiguration,
    u: &HullTransform,
    rate: f64,
    quad_n: usize,
) -> Result<DensityValue> {
    density_impl(omega, u, rate, quad_n, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub rate: f64,
    pub u: HullTransform,
    pub n_samples: usize,
    pub seed: u64,
    pub quad_n: usize,
    /// Worker count; `None` reads [`THREADS_ENV`], falling back to rayon's default.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(rate: f64, u: [f64; 2], n_samples: usize, seed: u64, quad_n: usize) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::arg("rate must be finite and >= 0"));
        }
        if n_samples < 2 {
            return Err(Error::arg("need at least 2 samples"));
        }
        if quad_n < MIN_QUAD {
            return Err(Error::arg(format!("quad_n must be >= {MIN_QUAD}")));
        }
        Ok(Self {
            rate,
            u: HullTransform::new(u)?,
            n_samples,
            seed,
            quad_n,
            threads: None,
        })
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
}

/// Evaluates `f` on every sample index; results come back in index order,
/// so later reductions do not depend on the worker count.
fn per_sample<T: Send>(
    threads: Option<usize>,
    n: usize,
    f: impl Fn(usize) -> T + Sync + Send,
) -> Result<Vec<T>> {
    let threads = threads.or_else(threads_from_env);
    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Configuration(e.to_string()))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCReport {
    pub label: String,
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub excluded: usize,
    pub domain_errors: usize,
    pub target: f64,
    pub z_score: f64,
    pub quad_n: usize,
    pub refinement_samples: usize,
    pub mean_abs_refinement_delta: f64,
    pub phi_bound: f64,
    #[serde(skip)]
    pub runtime_ms: Option<u64>,
}

impl MCReport {
    pub fn passed(&self) -> bool {
        self.z_score.abs() <= Z_THRESHOLD
    }

    /// Quadrature error small against the statistical error.
    pub fn quadrature_ok(&self) -> bool {
        self.mean_abs_refinement_delta < 0.1 * self.std_error || self.std_error == 0.0
    }

    /// Runtime is left out unless `timing`, so reruns produce identical reports.
    pub fn to_report(&self, timing: bool) -> CheckReport {
        let mut r = CheckReport::new(self.label.clone(), Status::from_bool(self.passed()))
            .estimate_target(decimal(self.estimate), decimal(self.target))
            .radius(decimal(Z_THRESHOLD * self.std_error))
            .meta("std_error", decimal(self.std_error))
            .meta("z_score", decimal(self.z_score))
            .meta("n_samples", self.n_samples)
            .meta("seed", self.seed)
            .meta("excluded", self.excluded)
            .meta("domain_errors", self.domain_errors)
            .meta("quad_n", self.quad_n)
            .meta("refinement_samples", self.refinement_samples)
            .meta(
                "mean_abs_refinement_delta",
                decimal(self.mean_abs_refinement_delta),
            )
            .meta("phi_bound", decimal(self.phi_bound));
        if let (true, Some(ms)) = (timing, self.runtime_ms) {
            r = r.meta("runtime_ms", ms);
        }
        r
    }
}

/// Mean, unbiased standard error, both by compensated sums in index order.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<NeumaierSum>().value() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<NeumaierSum>()
        .value();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

fn z_score(estimate: f64, target: f64, se: f64) -> f64 {
    let d = estimate - target;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

/// Running mean and standard error after each of (up to) `batches` batches.
pub fn batch_series(xs: &[f64], batches: usize) -> Vec<BatchPoint> {
    if xs.is_empty() || batches == 0 {
        return Vec::new();
    }
    let size = xs.len().div_ceil(batches);
    let mut out = Vec::new();
    let (mut count, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
    for (b, chunk) in xs.chunks(size).enumerate() {
        for &x in chunk {
            count += 1;
            let d = x - mean;
            mean += d / count as f64;
            m2 += d * (x - mean);
        }
        let se = if count > 1 {
            (m2 / (count - 1) as f64 / count as f64).sqrt()
        } else {
            0.0
        };
        out.push(BatchPoint {
            batch: b,
            running_mean: mean,
            running_se: se,
        });
    }
    out
}

struct Sample {
    omega: PointConfiguration,
    density: Option<DensityValue>,
}

fn draw(cfg: &McConfig, i: usize) -> Result<Sample> {
    let mut rng = stream(cfg.seed, i as u64);
    let omega = sample_ppp_with(cfg.rate, &mut rng)?;
    let density = match density_impl(
        &omega,
        &cfg.u,
        cfg.rate,
        cfg.quad_n,
        i.is_multiple_of(REFINE_EVERY),
    ) {
        Ok(d) => Some(d),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(Sample { omega, density })
}

struct Pass {
    weights: Vec<f64>,
    samples: Vec<Sample>,
    excluded: usize,
    domain_errors: usize,
    refinement: Vec<f64>,
}

fn run_pass(cfg: &McConfig) -> Result<Pass> {
    let samples = per_sample(cfg.threads, cfg.n_samples, |i| draw(cfg, i))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut weights = Vec::with_capacity(samples.len());
    let (mut excluded, mut domain_errors) = (0, 0);
    let mut refinement = Vec::new();
    for s in &samples {
        match &s.density {
            Some(d) => {
                weights.push(d.value);
                excluded += d.excluded;
                if let Some(r) = d.refinement_delta {
                    refinement.push(r.abs());
                }
            }
            None => {
                domain_errors += 1;
                weights.push(0.0);
            }
        }
    }
    Ok(Pass {
        weights,
        samples,
        excluded,
        domain_errors,
        refinement,
    })
}

fn build_report(
    label: &str,
    cfg: &McConfig,
    values: &[f64],
    target: f64,
    pass: &Pass,
    start: Instant,
) -> MCReport {
    let (estimate, se) = mean_and_se(values);
    let mean_delta = if pass.refinement.is_empty() {
        0.0
    } else {
        pass.refinement
            .iter()
            .copied()
            .collect::<NeumaierSum>()
            .value()
            / pass.refinement.len() as f64
    };
    MCReport {
        label: label.to_string(),
        estimate,
        std_error: se,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        excluded: pass.excluded,
        domain_errors: pass.domain_errors,
        target,
        z_score: z_score(estimate, target, se),
        quad_n: cfg.quad_n,
        refinement_samples: pass.refinement.len(),
        mean_abs_refinement_delta: mean_delta,
        phi_bound: phi_sup(&cfg.u),
        runtime_ms: Some(start.elapsed().as_millis() as u64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitRun {
    pub report: MCReport,
    pub series: Vec<BatchPoint>,
}

/// `E[density] = 1`.
pub fn verify_girsanov_unit(cfg: &McConfig) -> Result<UnitRun> {
    let start = Instant::now();
    let pass = run_pass(cfg)?;
    let report = build_report("girsanov.unit", cfg, &pass.weights, 1.0, &pass, start);
    Ok(UnitRun {
        series: batch_series(&pass.weights, 100),
        report,
    })
}

/// Test functionals on configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Functional {
    /// `exp(−Σ_{x∈ω} ‖x‖²)`
    F1,
    /// `min(ω(X), 10)`
    F2,
    /// `ω(B)` for the box `[x0, x1] × [y0, y1]`
    F3 { b: [f64; 4] },
}

impl Functional {
    pub const UNIT_BOX: [f64; 4] = [0.0, 1.0, 0.0, 1.0];

    pub fn parse(s: &str) -> Result<Option<Self>> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "none" => None,
            "f1" => Some(Functional::F1),
            "f2" => Some(Functional::F2),
            "f3" => Some(Functional::F3 { b: Self::UNIT_BOX }),
            other => return Err(Error::arg(format!("unknown functional {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::F1 => "f1",
            Functional::F2 => "f2",
            Functional::F3 { .. } => "f3",
        }
    }

    pub fn eval(&self, points: &[Point]) -> f64 {
        match self {
            Functional::F1 => (-points
                .iter()
                .map(|p| p[0] * p[0] + p[1] * p[1])
                .sum::<f64>())
            .exp(),
            Functional::F2 => points.len().min(10) as f64,
            Functional::F3 { b } => points
                .iter()
                .filter(|p| p[0] >= b[0] && p[0] <= b[1] && p[1] >= b[2] && p[1] <= b[3])
                .count() as f64,
        }
    }

    /// `E[F]` under the Poisson process with intensity `rate` on `[−1, 1]²`.
    pub fn expectation(&self, rate: f64) -> f64 {
        match self {
            Functional::F1 => {
                // Laplace functional: exp(−rate ∫ (1 − e^{−‖x‖²}) dx)
                let g = gauss_integral_unit();
                (-rate * (WINDOW_AREA - g * g)).exp()
            }
            Functional::F2 => {
                let pmf = poisson_pmf_table(WINDOW_AREA * rate, 9);
                let head: f64 = pmf.iter().sum();
                let partial: f64 = pmf.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
                partial + 10.0 * (1.0 - head)
            }
            Functional::F3 { b } => {
                let w = (b[1].min(1.0) - b[0].max(-1.0)).max(0.0);
                let h = (b[3].min(1.0) - b[2].max(-1.0)).max(0.0);
                rate * w * h
            }
        }
    }
}

/// `∫_{−1}^{1} e^{−t²} dt` by its alternating series.
fn gauss_integral_unit() -> f64 {
    let mut total = NeumaierSum::new();
    let mut fact = 1.0;
    for n in 0..40 {
        if n > 0 {
            fact *= n as f64;
        }
        let term = 1.0 / (fact * (2 * n + 1) as f64);
        total.add(if n % 2 == 0 { term } else { -term });
    }
    2.0 * total.value()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub functional: Functional,
    /// `F(τ_* ω) · density(ω)`
    pub transformed: MCReport,
    /// `F(ω)` on the same configurations.
    pub plain: MCReport,
    pub pooled_std_error: f64,
    pub z_pooled: f64,
    pub paired_std_error: f64,
    pub z_paired: f64,
}

impl FunctionalReport {
    pub fn passed(&self) -> bool {
        self.z_pooled.abs() <= Z_THRESHOLD
    }

    pub fn to_reports(&self, timing: bool) -> Vec<CheckReport> {
        let diff = CheckReport::new(
            format!("girsanov.functional.{}", self.functional.name()),
            Status::from_bool(self.passed()),
        )
        .estimate_target(
            decimal(self.transformed.estimate),
            decimal(self.plain.estimate),
        )
        .radius(decimal(Z_THRESHOLD * self.pooled_std_error))
        .meta("pooled_std_error", decimal(self.pooled_std_error))
        .meta("z_pooled", decimal(self.z_pooled))
        .meta("paired_std_error", decimal(self.paired_std_error))
        .meta("z_paired", decimal(self.z_paired));
        vec![
            diff,
            self.transformed.to_report(timing),
            self.plain.to_report(timing),
        ]
    }
}

/// `E[F(τ_* ω) density(ω)] = E[F(ω)]`, both sides estimated on the same samples.
pub fn verify_girsanov_functional(f: Functional, cfg: &McConfig) -> Result<FunctionalReport> {
    let start = Instant::now();
    let pass = run_pass(cfg)?;
    Ok(functional_from_pass(f, cfg, &pass, start))
}

/// The unit identity and each functional in `fs` from a single sampling pass.
pub fn verify_girsanov_suite(
    cfg: &McConfig,
    fs: &[Functional],
) -> Result<(UnitRun, Vec<FunctionalReport>)> {
    let start = Instant::now();
    let pass = run_pass(cfg)?;
    let report = build_report("girsanov.unit", cfg, &pass.weights, 1.0, &pass, start);
    let unit = UnitRun {
        series: batch_series(&pass.weights, 100),
        report,
    };
    let reports = fs
        .iter()
        .map(|&f| functional_from_pass(f, cfg, &pass, start))
        .collect();
    Ok((unit, reports))
}

fn functional_from_pass(
    f: Functional,
    cfg: &McConfig,
    pass: &Pass,
    start: Instant,
) -> FunctionalReport {
    let transformed: Vec<f64> = pass
        .samples
        .iter()
        .zip(&pass.weights)
        .map(|(s, w)| {
            if *w == 0.0 {
                return 0.0;
            }
            let hull = convex_hull(&s.omega);
            let moved: Vec<Point> = s
                .omega
                .points()
                .iter()
                .map(|x| tau_with_hull(&hull, x, &cfg.u))
                .collect();
            f.eval(&moved) * w
        })
        .collect();
    let plain: Vec<f64> = pass
        .samples
        .iter()
        .map(|s| f.eval(s.omega.points()))
        .collect();
    let target = f.expectation(cfg.rate);
    let name = f.name();
    let t_rep = build_report(
        &format!("girsanov.{name}.transformed"),
        cfg,
        &transformed,
        target,
        pass,
        start,
    );
    let p_rep = build_report(
        &format!("girsanov.{name}.plain"),
        cfg,
        &plain,
        target,
        pass,
        start,
    );
    let pooled = t_rep.std_error.hypot(p_rep.std_error);
    let diffs: Vec<f64> = transformed.iter().zip(&plain).map(|(a, b)| a - b).collect();
    let (dmean, dse) = mean_and_se(&diffs);
    FunctionalReport {
        functional: f,
        z_pooled: z_score(t_rep.estimate, p_rep.estimate, pooled),
        pooled_std_error: pooled,
        paired_std_error: dse,
        z_paired: z_score(dmean, 0.0, dse),
        transformed: t_rep,
        plain: p_rep,
    }
}

/// Piecewise-constant test functions `f = Σ c_j 1_{B_j}` for the sampler check
/// `E[exp(∫ f d(ω − σ))] = exp(∫ (e^f − f − 1) dσ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceCase {
    pub name: &'static str,
    /// `(c, [x0, x1, y0, y1])`, disjoint boxes in the window.
    pub pieces: Vec<(f64, [f64; 4])>,
}

impl LaplaceCase {
    pub fn standard() -> Vec<LaplaceCase> {
        vec![
            LaplaceCase {
                name: "unit_box",
                pieces: vec![(1.0, [0.0, 1.0, 0.0, 1.0])],
            },
            LaplaceCase {
                name: "negative_half",
                pieces: vec![(-0.5, [-1.0, 0.0, -1.0, 1.0])],
            },
            LaplaceCase {
                name: "two_level",
                pieces: vec![(0.3, [-1.0, 0.0, -1.0, 1.0]), (0.7, [0.0, 1.0, -1.0, 0.0])],
            },
        ]
    }

    fn area(b: &[f64; 4]) -> f64 {
        (b[1] - b[0]) * (b[3] - b[2])
    }

    fn eval(&self, p: &Point) -> f64 {
        self.pieces
            .iter()
            .filter(|(_, b)| p[0] >= b[0] && p[0] <= b[1] && p[1] >= b[2] && p[1] <= b[3])
            .map(|(c, _)| *c)
            .next()
            .unwrap_or(0.0)
    }

    pub fn target(&self, rate: f64) -> f64 {
        let e: f64 = self
            .pieces
            .iter()
            .map(|(c, b)| (c.exp() - c - 1.0) * rate * Self::area(b))
            .sum();
        e.exp()
    }

    fn compensator(&self, rate: f64) -> f64 {
        self.pieces
            .iter()
            .map(|(c, b)| c * rate * Self::area(b))
            .sum()
    }
}

/// Sampler ground truth against the Laplace transform.
pub fn verify_laplace(
    case: &LaplaceCase,
    rate: f64,
    n_samples: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<MCReport> {
    let start = Instant::now();
    let comp = case.compensator(rate);
    let values = per_sample(threads, n_samples, |i| {
        let omega = sample_ppp_with(rate, &mut stream(seed, i as u64))?;
        let s: f64 = omega.points().iter().map(|p| case.eval(p)).sum();
        Ok::<f64, Error>((s - comp).exp())
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (estimate, se) = mean_and_se(&values);
    let target = case.target(rate);
    Ok(MCReport {
        label: format!("laplace.{}", case.name),
        estimate,
        std_error: se,
        n_samples,
        seed,
        excluded: 0,
        domain_errors: 0,
        target,
        z_score: z_score(estimate, target, se),
        quad_n: 0,
        refinement_samples: 0,
        mean_abs_refinement_delta: 0.0,
        phi_bound: 0.0,
        runtime_ms: Some(start.elapsed().as_millis() as u64),
    })
}

/// Mean number of points against `4 · rate`.
pub fn verify_mean_count(
    rate: f64,
    n_samples: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<MCReport> {
    let start = Instant::now();
    let values = per_sample(threads, n_samples, |i| {
        sample_ppp_with(rate, &mut stream(seed, i as u64)).map(|w| w.len() as f64)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (estimate, se) = mean_and_se(&values);
    let target = WINDOW_AREA * rate;
    Ok(MCReport {
        label: "sampler.mean_count".into(),
        estimate,
        std_error: se,
        n_samples,
        seed,
        excluded: 0,
        domain_errors: 0,
        target,
        z_score: z_score(estimate, target, se),
        quad_n: 0,
        refinement_samples: 0,
        mean_abs_refinement_delta: 0.0,
        phi_bound: 0.0,
        runtime_ms: Some(start.elapsed().as_millis() as u64),
    })
}
