//! Planar Poisson configurations and the convex-hull transformation.
//!
//! `τ(ω, x) = x + ψ(ω_e, x)` moves points of the open hull of `ω` by
//! `u · d²/(1 + d²)`, `d` the distance to the hull boundary, and leaves
//! everything else fixed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use robust::{orient2d, Coord};
use serde::Serialize;

use crate::rng::stream;
use crate::{Error, Result};

pub type Point = [f64; 2];

/// Observation window `[−1, 1]²`.
pub const WINDOW_AREA: f64 = 4.0;

/// Finite-difference step for `∇ψ`.
pub const FD_STEP: f64 = 1e-6;

/// One-sided derivative disagreement above which a point counts as lying on
/// the medial axis.
pub const MEDIAL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointConfiguration {
    points: Vec<Point>,
}

impl PointConfiguration {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        for p in &points {
            if !(p[0].abs() <= 1.0 && p[1].abs() <= 1.0) {
                return Err(Error::Domain(format!("point {p:?} outside [-1,1]^2")));
            }
        }
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("configuration points must be distinct"));
        }
        Ok(Self { points })
    }

    pub fn empty() -> Self {
        Self { points: Vec::new() }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.contains(p)
    }

    /// `ω ∪ {p}`; a point already present is not duplicated.
    pub fn with_point(&self, p: Point) -> Self {
        let mut points = self.points.clone();
        if !points.contains(&p) {
            points.push(p);
        }
        Self { points }
    }

    pub fn without(&self, i: usize) -> Self {
        let mut points = self.points.clone();
        points.remove(i);
        Self { points }
    }
}

/// Homogeneous Poisson process with intensity `rate` on `[−1, 1]²`.
pub fn sample_ppp(rate: f64, seed: u64) -> Result<PointConfiguration> {
    sample_ppp_with(rate, &mut stream(seed, 0))
}

pub fn sample_ppp_with(rate: f64, rng: &mut ChaCha8Rng) -> Result<PointConfiguration> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::arg("rate must be finite and >= 0"));
    }
    if rate == 0.0 {
        return Ok(PointConfiguration::empty());
    }
    let n = Poisson::new(WINDOW_AREA * rate)
        .map_err(|e| Error::arg(e.to_string()))?
        .sample(rng) as usize;
    let mut points: Vec<Point> = Vec::with_capacity(n);
    while points.len() < n {
        let p = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        if !points.contains(&p) {
            points.push(p);
        }
    }
    Ok(PointConfiguration { points })
}

fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    orient2d(
        Coord { x: a[0], y: a[1] },
        Coord { x: b[0], y: b[1] },
        Coord { x: c[0], y: c[1] },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexHull {
    /// Counterclockwise, starting from the lexicographically smallest vertex.
    vertices: Vec<Point>,
    degenerate: bool,
}

/// Andrew's monotone chain with exact orientation tests; collinear boundary
/// points are not vertices.
pub fn convex_hull(omega: &PointConfiguration) -> ConvexHull {
    hull_of(omega.points())
}

fn hull_of(points: &[Point]) -> ConvexHull {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return ConvexHull {
            vertices: pts,
            degenerate: true,
        };
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && orient(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && orient(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        // all collinear: keep the two extremes
        return ConvexHull {
            vertices: vec![pts[0], pts[pts.len() - 1]],
            degenerate: true,
        };
    }
    ConvexHull {
        vertices: lower,
        degenerate: false,
    }
}

impl ConvexHull {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Fewer than three vertices: the hull has empty interior.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    fn edges(&self) -> impl Iterator<Item = (&Point, &Point)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    /// Closed hull membership, exact.
    pub fn contains(&self, p: &Point) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0] == *p,
            2 if self.degenerate => {
                let (a, b) = (&self.vertices[0], &self.vertices[1]);
                orient(a, b, p) == 0.0
                    && p[0] >= a[0].min(b[0])
                    && p[0] <= a[0].max(b[0])
                    && p[1] >= a[1].min(b[1])
                    && p[1] <= a[1].max(b[1])
            }
            _ => self.edges().all(|(a, b)| orient(a, b, p) >= 0.0),
        }
    }

    /// Open interior membership, exact.
    pub fn contains_open(&self, p: &Point) -> bool {
        !self.degenerate && self.edges().all(|(a, b)| orient(a, b, p) > 0.0)
    }

    /// Euclidean distance to the boundary polygon.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn area(&self) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        0.5 * self
            .edges()
            .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
            .sum::<f64>()
    }

    /// `[xmin, xmax, ymin, ymax]`.
    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ];
        for v in &self.vertices {
            b[0] = b[0].min(v[0]);
            b[1] = b[1].max(v[0]);
            b[2] = b[2].min(v[1]);
            b[3] = b[3].max(v[1]);
        }
        b
    }

    /// Inward unit normals `n_e` and offsets `c_e` with `d_e(x) = n_e·x + c_e`,
    /// the distance to the line of edge `e` (positive inside).
    pub fn edge_lines(&self) -> Vec<([f64; 2], f64)> {
        if self.degenerate {
            return Vec::new();
        }
        self.edges()
            .map(|(a, b)| {
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = dx.hypot(dy);
                let n = [-dy / len, dx / len];
                (n, -(n[0] * a[0] + n[1] * a[1]))
            })
            .collect()
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HullTransform {
    u: [f64; 2],
}

impl HullTransform {
    pub fn new(u: [f64; 2]) -> Result<Self> {
        let norm = u[0].hypot(u[1]);
        if !(norm < 0.25) {
            return Err(Error::arg(format!("need |u| < 1/4, got {norm}")));
        }
        Ok(Self { u })
    }

    pub fn u(&self) -> [f64; 2] {
        self.u
    }

    pub fn is_zero(&self) -> bool {
        self.u == [0.0, 0.0]
    }
}

fn bump(d: f64) -> f64 {
    let d2 = d * d;
    d2 / (1.0 + d2)
}

fn bump_derivative(d: f64) -> f64 {
    let q = 1.0 + d * d;
    2.0 * d / (q * q)
}

/// `ψ(ω_e, x) = u 1_C(x) d²/(1 + d²)`.
pub fn psi(hull: &ConvexHull, x: &Point, u: &HullTransform) -> Point {
    if hull.degenerate || !hull.contains(x) {
        return [0.0, 0.0];
    }
    let f = bump(hull.boundary_distance(x));
    [u.u[0] * f, u.u[1] * f]
}

/// `τ` with a precomputed hull.
pub fn tau_with_hull(hull: &ConvexHull, x: &Point, u: &HullTransform) -> Point {
    if !hull.contains_open(x) {
        return *x;
    }
    let s = psi(hull, x, u);
    [x[0] + s[0], x[1] + s[1]]
}

pub fn tau(omega: &PointConfiguration, x: &Point, u: &HullTransform) -> Point {
    tau_with_hull(&convex_hull(omega), x, u)
}

/// `τ_* ω`, the image configuration.
pub fn push_forward(omega: &PointConfiguration, u: &HullTransform) -> Vec<Point> {
    let hull = convex_hull(omega);
    omega
        .points()
        .iter()
        .map(|x| tau_with_hull(&hull, x, u))
        .collect()
}

/// `D_x τ(ω, y) = τ(ω ∪ {x}, y) − τ(ω, y)`.
pub fn finite_difference_tau(
    omega: &PointConfiguration,
    x: &Point,
    y: &Point,
    u: &HullTransform,
) -> Point {
    let after = tau(&omega.with_point(*x), y, u);
    let before = tau(omega, y, u);
    [after[0] - before[0], after[1] - before[1]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiValue {
    pub value: f64,
    /// Near a point where the nearest edge switches; excluded from products.
    pub flagged: bool,
}

/// `φ = det(I + ∇ψ) − 1` by central differences with step [`FD_STEP`].
pub fn density_phi_with_hull(hull: &ConvexHull, x: &Point, u: &HullTransform) -> PhiValue {
    if u.is_zero() || !hull.contains_open(x) {
        return PhiValue {
            value: 0.0,
            flagged: false,
        };
    }
    let h = FD_STEP;
    let at = |p: Point| psi(hull, &p, u);
    let base = at(*x);
    let mut jac = [[0.0; 2]; 2];
    let mut flagged = false;
    for j in 0..2 {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (at(xp), at(xm));
        for i in 0..2 {
            let fwd = (fp[i] - base[i]) / h;
            let bwd = (base[i] - fm[i]) / h;
            if (fwd - bwd).abs() > MEDIAL_TOL {
                flagged = true;
            }
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let det = (1.0 + jac[0][0]) * (1.0 + jac[1][1]) - jac[0][1] * jac[1][0];
    PhiValue {
        value: det - 1.0,
        flagged,
    }
}

pub fn density_phi(omega: &PointConfiguration, x: &Point, u: &HullTransform) -> PhiValue {
    density_phi_with_hull(&convex_hull(omega), x, u)
}

/// Closed form `φ = h'(d) u·n`, `n` the inward normal of the nearest edge,
/// valid off the medial axis. `det(I + u ⊗ ∇g) = 1 + u·∇g` for rank one.
pub fn phi_analytic(hull: &ConvexHull, x: &Point, u: &HullTransform) -> f64 {
    if u.is_zero() || !hull.contains_open(x) {
        return 0.0;
    }
    let (n, d) = hull
        .edge_lines()
        .into_iter()
        .map(|(n, c)| (n, n[0] * x[0] + n[1] * x[1] + c))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    bump_derivative(d) * (u.u[0] * n[0] + u.u[1] * n[1])
}

/// Upper bound on `|φ|`: `max h' · |u| = (3√3/8)|u|`.
pub fn phi_sup(u: &HullTransform) -> f64 {
    3.0 * 3f64.sqrt() / 8.0 * u.u[0].hypot(u.u[1])
}

/// Sub-cells per axis used on cells that meet the boundary or the medial axis.
pub const CUT_CELL_SPLIT: usize = 4;

/// Midpoint rule for `∫_C φ(x) dx` on an `n × n` grid over `[−1, 1]²`, using
/// the closed form of `φ`. Cells on which `φ` may fail to be smooth (cut by
/// `∂C`, or close to a switch of nearest edge) are split into
/// [`CUT_CELL_SPLIT`]² sub-cells.
pub fn integrate_phi(hull: &ConvexHull, u: &HullTransform, n: usize) -> f64 {
    if hull.degenerate || u.is_zero() {
        return 0.0;
    }
    let lines = hull.edge_lines();
    let step = 2.0 / n as f64;
    let reach = step * std::f64::consts::FRAC_1_SQRT_2;
    let bb = hull.bbox();
    let col = |x: f64| (((x + 1.0) / step).floor().max(0.0) as usize).min(n - 1);
    let (i0, i1) = (col(bb[0]), col(bb[1]));
    let (j0, j1) = (col(bb[2]), col(bb[3]));
    let un = |e: usize| u.u[0] * lines[e].0[0] + u.u[1] * lines[e].0[1];
    // edges further than `best + 2·reach` at the cell centre cannot be nearest
    // anywhere in the cell, and are positive there
    let point_value = |cand: &[usize], x: f64, y: f64| {
        let (mut best, mut arg) = (f64::INFINITY, 0);
        for &e in cand {
            let (nv, c) = lines[e];
            let d = nv[0] * x + nv[1] * y + c;
            if d < best {
                best = d;
                arg = e;
            }
        }
        if best > 0.0 {
            bump_derivative(best) * un(arg)
        } else {
            0.0
        }
    };
    let sub = CUT_CELL_SPLIT;
    let sub_step = step / sub as f64;
    let mut total = crate::numeric::NeumaierSum::new();
    let mut dists = vec![0.0; lines.len()];
    let mut cand = Vec::with_capacity(lines.len());
    for j in j0..=j1 {
        let y = -1.0 + (j as f64 + 0.5) * step;
        let mut row = 0.0;
        let mut x = -1.0 + (i0 as f64 + 0.5) * step;
        for (e, (nv, c)) in lines.iter().enumerate() {
            dists[e] = nv[0] * x + nv[1] * y + c;
        }
        for _ in i0..=i1 {
            let (mut best, mut arg) = (f64::INFINITY, 0);
            for (e, &d) in dists.iter().enumerate() {
                if d < best {
                    best = d;
                    arg = e;
                }
            }
            let nb = lines[arg].0;
            let switches = best > -reach
                && dists.iter().enumerate().any(|(e, &d)| {
                    e != arg
                        && d - best <= 2.0 * reach
                        && d - best <= (lines[e].0[0] - nb[0]).hypot(lines[e].0[1] - nb[1]) * reach
                });
            if best.abs() < reach || switches {
                cand.clear();
                cand.extend((0..lines.len()).filter(|&e| dists[e] - best <= 2.0 * reach));
                let mut acc = 0.0;
                for a in 0..sub {
                    let sy = y - 0.5 * step + (a as f64 + 0.5) * sub_step;
                    for b in 0..sub {
                        let sx = x - 0.5 * step + (b as f64 + 0.5) * sub_step;
                        acc += point_value(&cand, sx, sy);
                    }
                }
                row += acc / (sub * sub) as f64;
            } else if best > 0.0 {
                row += bump_derivative(best) * un(arg);
            }
            for (e, (nv, _)) in lines.iter().enumerate() {
                dists[e] += nv[0] * step;
            }
            x += step;
        }
        total.add(row);
    }
    total.value() * step * step
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub kind: String,
    pub omega: Vec<Point>,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NilpotenceReport {
    pub samples: usize,
    pub k_max: usize,
    pub seed: u64,
    pub cyclic_products: usize,
    pub nonzero_cyclic_products: usize,
    /// Factors `D_{t_i}τ(ω, t_{i+1})` that were nonzero: shows the sampler
    /// exercises moving points rather than trivially fixed ones.
    pub nonzero_factors: usize,
    pub factors: usize,
    pub f1_checked: usize,
    pub f1_violations: usize,
    pub f2_checked: usize,
    pub f2_violations: usize,
    /// Implications checked with the hypothesis `y ∈ C(ω ∪ {x})` unnegated.
    pub f2_unnegated_checked: usize,
    pub f2_unnegated_violations: usize,
    pub inside_checked: usize,
    pub inside_violations: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl NilpotenceReport {
    pub fn passed(&self) -> bool {
        self.nonzero_cyclic_products == 0
            && self.f1_violations == 0
            && self.f2_violations == 0
            && self.inside_violations == 0
    }
}

const MAX_DUMPS: usize = 5;

fn norm(v: &Point) -> f64 {
    v[0].hypot(v[1])
}

fn uniform(rng: &mut ChaCha8Rng) -> Point {
    [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]
}

/// Draws a probe point from a mix aimed at the cases that matter: inside the
/// hull, just outside, in the cap between the hull and the previous point,
/// repeated, or a configuration point itself.
fn probe(
    rng: &mut ChaCha8Rng,
    omega: &PointConfiguration,
    hull: &ConvexHull,
    prev: Option<Point>,
) -> Point {
    let verts = hull.vertices();
    let clamp = |p: Point| [p[0].clamp(-1.0, 1.0), p[1].clamp(-1.0, 1.0)];
    match rng.random_range(0..7u32) {
        0 if !verts.is_empty() => {
            // convex combination of vertices
            let mut w: Vec<f64> = verts.iter().map(|_| rng.random::<f64>()).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            let mut p = [0.0, 0.0];
            for (v, wi) in verts.iter().zip(&w) {
                p[0] += wi * v[0];
                p[1] += wi * v[1];
            }
            clamp(p)
        }
        1 if !verts.is_empty() => {
            // vertex pushed outward from the hull centroid
            let v = verts[rng.random_range(0..verts.len())];
            let c = verts
                .iter()
                .fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
            let c = [c[0] / verts.len() as f64, c[1] / verts.len() as f64];
            let t = 1.0 + rng.random_range(0.01..0.6);
            clamp([c[0] + t * (v[0] - c[0]), c[1] + t * (v[1] - c[1])])
        }
        2 if prev.is_some() && !verts.is_empty() => {
            // between the previous probe and a vertex: inside C(ω ∪ {prev})
            let p = prev.unwrap();
            let v = verts[rng.random_range(0..verts.len())];
            let t = rng.random_range(0.05..0.95);
            [p[0] + t * (v[0] - p[0]), p[1] + t * (v[1] - p[1])]
        }
        3 if prev.is_some() => prev.unwrap(),
        4 if !omega.is_empty() => omega.points()[rng.random_range(0..omega.len())],
        _ => uniform(rng),
    }
}

/// Samples configurations and probe tuples and checks that every cyclic
/// product `Π |D_{t_i} τ(ω, t_{i+1 mod k})|` vanishes exactly, together with
/// the single-pair implications behind it.
pub fn check_nilpotence(
    samples: usize,
    k_max: usize,
    seed: u64,
    rate: f64,
    u: &HullTransform,
) -> Result<NilpotenceReport> {
    if k_max < 2 {
        return Err(Error::arg("k_max must be at least 2"));
    }
    let mut rep = NilpotenceReport {
        samples,
        k_max,
        seed,
        cyclic_products: 0,
        nonzero_cyclic_products: 0,
        nonzero_factors: 0,
        factors: 0,
        f1_checked: 0,
        f1_violations: 0,
        f2_checked: 0,
        f2_violations: 0,
        f2_unnegated_checked: 0,
        f2_unnegated_violations: 0,
        inside_checked: 0,
        inside_violations: 0,
        counterexamples: Vec::new(),
    };
    for s in 0..samples {
        let mut rng = stream(seed, s as u64);
        let omega = sample_ppp_with(rate, &mut rng)?;
        let hull = convex_hull(&omega);
        let k = rng.random_range(2..=k_max);
        let mut ts: Vec<Point> = Vec::with_capacity(k);
        for _ in 0..k {
            let prev = ts.last().copied();
            ts.push(probe(&mut rng, &omega, &hull, prev));
        }
        let dump = |rep: &mut NilpotenceReport, kind: &str, pts: Vec<Point>| {
            if rep.counterexamples.len() < MAX_DUMPS {
                rep.counterexamples.push(Counterexample {
                    kind: kind.into(),
                    omega: omega.points().to_vec(),
                    points: pts,
                });
            }
        };
        // cyclic product
        let mut prod = 1.0;
        for i in 0..k {
            let f = norm(&finite_difference_tau(&omega, &ts[i], &ts[(i + 1) % k], u));
            rep.factors += 1;
            if f != 0.0 {
                rep.nonzero_factors += 1;
            }
            prod *= f;
        }
        rep.cyclic_products += 1;
        if prod != 0.0 {
            rep.nonzero_cyclic_products += 1;
            dump(&mut rep, "cyclic", ts.clone());
        }
        // pairwise implications over ordered probe pairs
        let hulls: Vec<ConvexHull> = ts
            .iter()
            .map(|t| convex_hull(&omega.with_point(*t)))
            .collect();
        for (a, x) in ts.iter().enumerate() {
            for (b, y) in ts.iter().enumerate() {
                let zero = norm(&finite_difference_tau(&omega, x, y, u)) == 0.0;
                if hulls[b].contains(x) {
                    rep.f1_checked += 1;
                    if !zero {
                        rep.f1_violations += 1;
                        dump(&mut rep, "f1", vec![*x, *y]);
                    }
                }
                if hulls[a].contains(y) {
                    rep.f2_unnegated_checked += 1;
                    if !zero {
                        rep.f2_unnegated_violations += 1;
                    }
                } else {
                    rep.f2_checked += 1;
                    if !zero {
                        rep.f2_violations += 1;
                        dump(&mut rep, "f2", vec![*x, *y]);
                    }
                }
                if hull.contains(x) {
                    rep.inside_checked += 1;
                    if !zero {
                        rep.inside_violations += 1;
                        dump(&mut rep, "inside", vec![*x, *y]);
                    }
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(h: f64) -> PointConfiguration {
        PointConfiguration::new(vec![[-h, -h], [h, -h], [h, h], [-h, h]]).unwrap()
    }

    #[test]
    fn hull_examples() {
        let sq = convex_hull(&square(0.5));
        assert_eq!(sq.vertices().len(), 4);
        assert!(!sq.is_degenerate());
        let tri =
            PointConfiguration::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.2]]).unwrap();
        assert_eq!(convex_hull(&tri).vertices().len(), 3);
        let line = PointConfiguration::new(vec![[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]]).unwrap();
        let h = convex_hull(&line);
        assert!(h.is_degenerate());
        assert!(h.contains(&[0.25, 0.25]));
        assert!(!h.contains(&[0.25, 0.26]));
        assert!(convex_hull(&PointConfiguration::empty()).is_degenerate());
    }

    #[test]
    fn hull_is_counterclockwise_and_contains_input() {
        let mut rng = stream(3, 0);
        for _ in 0..200 {
            let w = sample_ppp_with(3.0, &mut rng).unwrap();
            let h = convex_hull(&w);
            if h.is_degenerate() {
                continue;
            }
            assert!(h.area() > 0.0);
            for p in w.points() {
                assert!(h.contains(p));
            }
            for v in h.vertices() {
                assert!(w.contains(v));
                assert!(!h.contains_open(v));
            }
        }
    }

    #[test]
    fn psi_and_tau_examples() {
        let sq = convex_hull(&square(0.5));
        let u = HullTransform::new([0.2, 0.0]).unwrap();
        let p = psi(&sq, &[0.0, 0.0], &u);
        assert!((p[0] - 0.04).abs() < 1e-15 && p[1] == 0.0);
        assert_eq!(psi(&sq, &[0.9, 0.0], &u), [0.0, 0.0]);
        assert_eq!(psi(&sq, &[0.5, 0.5], &u), [0.0, 0.0]);
        let t = tau(&square(0.5), &[0.0, 0.0], &u);
        assert!((t[0] - 0.04).abs() < 1e-15);
        assert_eq!(tau(&square(0.5), &[0.5, -0.5], &u), [0.5, -0.5]);
        let line = PointConfiguration::new(vec![[0.0, 0.0], [0.5, 0.5]]).unwrap();
        assert_eq!(tau(&line, &[0.1, 0.1], &u), [0.1, 0.1]);
        assert!(HullTransform::new([0.25, 0.0]).is_err());
        assert!(HullTransform::new([0.2, 0.2]).is_err());
    }

    #[test]
    fn fd_density_matches_closed_form() {
        let sq = convex_hull(&square(0.5));
        let u = HullTransform::new([0.2, 0.0]).unwrap();
        // (0.1, 0.1) is equidistant from two edges, hence on the medial axis
        assert!(density_phi_with_hull(&sq, &[0.1, 0.1], &u).flagged);
        let x = [0.1, 0.05];
        let fd = density_phi_with_hull(&sq, &x, &u);
        assert!(!fd.flagged);
        // nearest edge is x = 1/2, inward normal (−1, 0), d = 0.4
        let d: f64 = 0.4;
        let expected = -0.2 * 2.0 * d / (1.0 + d * d).powi(2);
        assert!(
            (fd.value - expected).abs() < 1e-4,
            "{} vs {expected}",
            fd.value
        );
        assert!((phi_analytic(&sq, &x, &u) - expected).abs() < 1e-14);
        let zero = HullTransform::new([0.0, 0.0]).unwrap();
        assert_eq!(density_phi_with_hull(&sq, &x, &zero).value, 0.0);
        assert_eq!(density_phi_with_hull(&sq, &[0.7, 0.0], &u).value, 0.0);
    }

    #[test]
    fn medial_axis_is_flagged() {
        let sq = convex_hull(&square(0.5));
        let u = HullTransform::new([0.2, 0.1]).unwrap();
        assert!(density_phi_with_hull(&sq, &[0.2, 0.2], &u).flagged);
        assert!(density_phi_with_hull(&sq, &[0.0, 0.0], &u).flagged);
    }

    #[test]
    fn phi_integrates_to_zero() {
        // φ = div(u g) with g = 0 on the boundary
        let sq = convex_hull(&square(0.5));
        let u = HullTransform::new([0.2, 0.1]).unwrap();
        let coarse = integrate_phi(&sq, &u, 64).abs();
        let fine = integrate_phi(&sq, &u, 512).abs();
        assert!(fine < 1e-4, "{fine}");
        assert!(fine <= coarse + 1e-12);
    }

    #[test]
    fn sampler_reproducible() {
        assert_eq!(sample_ppp(2.0, 9).unwrap(), sample_ppp(2.0, 9).unwrap());
        assert!(sample_ppp(0.0, 1).unwrap().is_empty());
        assert!(sample_ppp(-1.0, 1).is_err());
    }

    #[test]
    fn nilpotence_small_run() {
        let u = HullTransform::new([0.2, 0.0]).unwrap();
        let rep = check_nilpotence(500, 4, 11, 2.0, &u).unwrap();
        assert!(rep.passed(), "{:?}", rep.counterexamples);
        assert!(rep.nonzero_factors > 0);
        assert!(rep.f2_unnegated_violations > 0);
    }
}
