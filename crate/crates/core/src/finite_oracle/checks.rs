//! Identity checks on a truncated cell space.

use num_traits::Signed;
use serde_json::{json, Map, Value};

use super::envelope::Envelope;
use super::expr::{CellProcess, Expr};
use super::space::{CellSpace, Estimate};
use super::table::{Scalar, Table};
use crate::combinatorics::table as stirling;
use crate::exact::{binomial, from_bigint, to_f64, ExactRational};
use crate::polynomials::charlier;
use crate::report::{decimal, exact, CheckReport, Status};
use crate::{Error, Result};

/// Largest truncation at which exact rational cross-checks run.
pub const MAX_EXACT_TRUNC: usize = 5;

#[derive(Debug, Clone, Copy, Default)]
pub struct OracleOptions {
    /// Also evaluate every truncated sum in exact rationals.
    pub exact: bool,
}

/// Exact truncated sums, unnormalized: multiply by `e^{−Σσ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactComparison {
    pub lhs: ExactRational,
    pub rhs: ExactRational,
    pub float_discrepancy: f64,
}

#[derive(Debug, Clone)]
pub struct OracleRow {
    pub check_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub radius: f64,
    pub status: Status,
    pub exact: Option<ExactComparison>,
    pub details: Map<String, Value>,
}

impl OracleRow {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_report(&self) -> CheckReport {
        let mut r = CheckReport::new(self.check_id.clone(), self.status)
            .sides(decimal(self.lhs), decimal(self.rhs))
            .radius(decimal(self.radius))
            .meta("gap", decimal(self.gap()));
        for (k, v) in &self.details {
            r = r.meta(k, v.clone());
        }
        if let Some(e) = &self.exact {
            r = r
                .meta("exact_lhs_unnormalized", exact(&e.lhs))
                .meta("exact_rhs_unnormalized", exact(&e.rhs))
                .meta("exact_float_discrepancy", decimal(e.float_discrepancy));
        }
        r
    }
}

fn sigma_t<T: Scalar>(space: &CellSpace) -> Vec<T> {
    space.sigma().iter().map(T::from_rational).collect()
}

fn require_exact(space: &CellSpace, opts: OracleOptions) -> Result<bool> {
    if opts.exact && space.trunc() > MAX_EXACT_TRUNC {
        return Err(Error::arg(format!(
            "exact mode needs truncation <= {MAX_EXACT_TRUNC}, got {}",
            space.trunc()
        )));
    }
    Ok(opts.exact)
}

struct Sides<T> {
    lhs: Table<T>,
    rhs: Table<T>,
}

#[allow(clippy::too_many_arguments)]
fn finish(
    space: &CellSpace,
    id: String,
    sides: Sides<f64>,
    env_l: &Envelope,
    env_r: &Envelope,
    extra_radius: f64,
    exact_sides: Option<Sides<ExactRational>>,
    details: Map<String, Value>,
) -> OracleRow {
    let l: Estimate = space.expectation(&sides.lhs, env_l);
    let r: Estimate = space.expectation(&sides.rhs, env_r);
    let radius = l.radius + r.radius + extra_radius;
    let exact = exact_sides.map(|s| {
        let el = space.expectation_exact(&s.lhs);
        let er = space.expectation_exact(&s.rhs);
        let disc = (space.normalize_exact(&el) - l.value)
            .abs()
            .max((space.normalize_exact(&er) - r.value).abs());
        ExactComparison {
            lhs: el,
            rhs: er,
            float_discrepancy: disc,
        }
    });
    let mut details = details;
    details.insert("lhs_radius".into(), json!(decimal(l.radius)));
    details.insert("rhs_radius".into(), json!(decimal(r.radius)));
    details.insert("tail_bound".into(), json!(decimal(space.tail_bound())));
    details.insert("trunc".into(), json!(space.trunc()));
    OracleRow {
        check_id: id,
        lhs: l.value,
        rhs: r.value,
        radius,
        status: Status::from_bool((l.value - r.value).abs() <= radius),
        exact,
        details,
    }
}

/// Truncated `E[F]` with its error radius.
pub fn expectation(space: &CellSpace, f: &Expr) -> Result<Estimate> {
    f.validate(space.m())?;
    let t = f.tabulate::<f64>(space.m(), space.trunc());
    Ok(space.expectation(&t, &f.envelope(space.m())))
}

/// `(D_i F)(k) = F(k + e_i) − F(k)`, tabulated on `{0..=extent-1}^m`.
pub fn finite_difference<T: Scalar>(f: &Table<T>, i: usize) -> Table<T> {
    f.diff(i)
}

/// Cell Skorohod integral of a tabulated process.
pub fn skorohod_delta<T: Scalar>(space: &CellSpace, u: &[Table<T>]) -> Table<T> {
    Table::skorohod(u, &sigma_t::<T>(space))
}

fn delta_envelope(space: &CellSpace, envs: &[Envelope]) -> Envelope {
    let m = space.m();
    envs.iter()
        .enumerate()
        .fold(Envelope::zero(m), |acc, (i, e)| {
            acc.add(&e.times_count(i)).add(&e.scale(space.sigma_f()[i]))
        })
}

fn diff_envelope(e: &Envelope, i: usize) -> Envelope {
    e.shift(i, 1).add(e)
}

fn duality_sides<T: Scalar>(space: &CellSpace, u: &CellProcess, f: &Expr) -> Sides<T> {
    let m = space.m();
    let ext = space.trunc() + 1;
    let sig = sigma_t::<T>(space);
    let ut = u.tabulate::<T>(ext);
    let ft = f.tabulate::<T>(m, ext);
    let mut lhs = Table::constant(m, ext, T::zero());
    for i in 0..m {
        lhs = lhs.add(&ut[i].mul(&ft.diff(i)).scale(&sig[i]));
    }
    let rhs = ft.mul(&Table::skorohod(&ut, &sig));
    Sides { lhs, rhs }
}

/// `E[Σ_i σ_i u_i D_i F] = E[F δ(u)]`.
pub fn check_duality(
    space: &CellSpace,
    u: &CellProcess,
    f: &Expr,
    opts: OracleOptions,
) -> Result<OracleRow> {
    let m = space.m();
    u.validate(m)?;
    f.validate(m)?;
    let exact = require_exact(space, opts)?;
    let envs = u.envelopes();
    let ef = f.envelope(m);
    let env_l = envs
        .iter()
        .enumerate()
        .fold(Envelope::zero(m), |acc, (i, e)| {
            acc.add(&e.mul(&diff_envelope(&ef, i)).scale(space.sigma_f()[i]))
        });
    let env_r = ef.mul(&delta_envelope(space, &envs));
    let mut details = Map::new();
    details.insert("process".into(), json!(u.name));
    details.insert("functional".into(), json!(f.to_string()));
    Ok(finish(
        space,
        format!("duality/{}", u.name),
        duality_sides::<f64>(space, u, f),
        &env_l,
        &env_r,
        0.0,
        exact.then(|| duality_sides::<ExactRational>(space, u, f)),
        details,
    ))
}

fn isometry_sides<T: Scalar>(space: &CellSpace, u: &CellProcess) -> Sides<T> {
    let m = space.m();
    let ext = space.trunc() + 1;
    let sig = sigma_t::<T>(space);
    let ut = u.tabulate::<T>(ext);
    let d = Table::skorohod(&ut, &sig);
    let lhs = d.mul(&d);
    let mut rhs = Table::constant(m, ext, T::zero());
    for i in 0..m {
        rhs = rhs.add(&ut[i].mul(&ut[i]).scale(&sig[i]));
        for j in 0..m {
            let cross = ut[j].diff(i).mul(&ut[i].diff(j));
            rhs = rhs.add(&cross.scale(&sig[i].mul(&sig[j])));
        }
    }
    Sides { lhs, rhs }
}

/// `E[δ(u)²] = E[Σ σ_i u_i²] + E[Σ_{ij} σ_i σ_j D_i u_j D_j u_i]`.
pub fn check_isometry(
    space: &CellSpace,
    u: &CellProcess,
    opts: OracleOptions,
) -> Result<OracleRow> {
    let m = space.m();
    u.validate(m)?;
    let exact = require_exact(space, opts)?;
    let envs = u.envelopes();
    let ed = delta_envelope(space, &envs);
    let env_l = ed.mul(&ed);
    let mut env_r = Envelope::zero(m);
    for i in 0..m {
        env_r = env_r.add(&envs[i].mul(&envs[i]).scale(space.sigma_f()[i]));
        for j in 0..m {
            let c = diff_envelope(&envs[j], i).mul(&diff_envelope(&envs[i], j));
            env_r = env_r.add(&c.scale(space.sigma_f()[i] * space.sigma_f()[j]));
        }
    }
    let mut details = Map::new();
    details.insert("process".into(), json!(u.name));
    Ok(finish(
        space,
        format!("isometry/{}", u.name),
        isometry_sides::<f64>(space, u),
        &env_l,
        &env_r,
        0.0,
        exact.then(|| isometry_sides::<ExactRational>(space, u)),
        details,
    ))
}

/// `E[δ(u)] = 0`.
pub fn check_zero_mean(space: &CellSpace, u: &CellProcess) -> Result<OracleRow> {
    let m = space.m();
    u.validate(m)?;
    let ext = space.trunc() + 1;
    let d = skorohod_delta(space, &u.tabulate::<f64>(ext));
    let env = delta_envelope(space, &u.envelopes());
    let mut details = Map::new();
    details.insert("process".into(), json!(u.name));
    Ok(finish(
        space,
        format!("zero_mean/{}", u.name),
        Sides {
            lhs: d,
            rhs: Table::constant(m, ext, 0.0),
        },
        &env,
        &Envelope::zero(m),
        0.0,
        None,
        details,
    ))
}

fn pointwise_row(
    id: String,
    points: usize,
    mismatches: Vec<Vec<usize>>,
    mut details: Map<String, Value>,
) -> OracleRow {
    details.insert("points_checked".into(), json!(points));
    details.insert("mismatches".into(), json!(mismatches.len()));
    if let Some(first) = mismatches.first() {
        details.insert("first_mismatch".into(), json!(first));
    }
    OracleRow {
        check_id: id,
        lhs: mismatches.len() as f64,
        rhs: 0.0,
        radius: 0.0,
        status: Status::from_bool(mismatches.is_empty()),
        exact: None,
        details,
    }
}

/// `D_i δ(u) = δ(D_i u) + u_i` at every lattice point, in exact arithmetic.
pub fn check_commutation(space: &CellSpace, u: &CellProcess) -> Result<OracleRow> {
    let m = space.m();
    u.validate(m)?;
    let k = space.trunc();
    let ut = u.tabulate::<ExactRational>(k + 1);
    let sig = sigma_t::<ExactRational>(space);
    let d = Table::skorohod(&ut, &sig);
    let mut bad = Vec::new();
    for i in 0..m {
        let lhs = d.diff(i);
        let du: Vec<_> = ut.iter().map(|t| t.diff(i)).collect();
        let rhs = Table::skorohod(&du, &sig).add(&ut[i]);
        bad.extend(lhs.mismatches(&rhs, k).into_iter().map(|mut p| {
            p.push(i);
            p
        }));
    }
    let mut details = Map::new();
    details.insert("process".into(), json!(u.name));
    Ok(pointwise_row(
        format!("commutation/{}", u.name),
        m * space.lattice_size(),
        bad,
        details,
    ))
}

/// `D_i(FG) = F D_i G + G D_i F + D_i F D_i G` at every lattice point.
pub fn check_product_rule(space: &CellSpace, f: &Expr, g: &Expr) -> Result<OracleRow> {
    let m = space.m();
    f.validate(m)?;
    g.validate(m)?;
    let k = space.trunc();
    let ft = f.tabulate::<ExactRational>(m, k + 1);
    let gt = g.tabulate::<ExactRational>(m, k + 1);
    let fg = ft.mul(&gt);
    let mut bad = Vec::new();
    for i in 0..m {
        let (df, dg) = (ft.diff(i), gt.diff(i));
        let rhs = ft.mul(&dg).add(&gt.mul(&df)).add(&df.mul(&dg));
        bad.extend(fg.diff(i).mismatches(&rhs, k));
    }
    let mut details = Map::new();
    details.insert("f".into(), json!(f.to_string()));
    details.insert("g".into(), json!(g.to_string()));
    Ok(pointwise_row(
        "product_rule".into(),
        m * space.lattice_size(),
        bad,
        details,
    ))
}

fn validate_indicators(
    rules: &[&CellProcess],
    m: usize,
    extent: usize,
    disjoint: bool,
) -> Result<()> {
    let tables: Vec<Vec<Table<ExactRational>>> = rules.iter().map(|r| r.tabulate(extent)).collect();
    let one = ExactRational::from_integer(1.into());
    let zero = ExactRational::from_integer(0.into());
    let len = (extent + 1).pow(m as u32);
    for idx in 0..len {
        for c in 0..m {
            let mut count = 0;
            for (r, t) in rules.iter().zip(&tables) {
                let v = &t[c].data()[idx];
                if *v == one {
                    count += 1;
                } else if *v != zero {
                    return Err(Error::arg(format!(
                        "rule {} is not an indicator (value {v})",
                        r.name
                    )));
                }
            }
            if disjoint && count > 1 {
                return Err(Error::arg(format!(
                    "random sets overlap in cell {} at lattice index {idx}",
                    c + 1
                )));
            }
        }
    }
    Ok(())
}

fn all_tuples(m: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..m).map(move |c| {
                    let mut t2 = t.clone();
                    t2.push(c);
                    t2
                })
            })
            .collect();
    }
    out
}

/// `σ(A)(k) = Σ_c σ_c 1_A(k, c)`.
fn random_mass<T: Scalar>(tables: &[Table<T>], sig: &[T]) -> Table<T> {
    tables.iter().zip(sig).fold(
        Table::constant(tables[0].m(), tables[0].extent(), T::zero()),
        |acc, (t, s)| acc.add(&t.scale(s)),
    )
}

/// With `printed` the roles of the singleton count and the block count in
/// the shifted integral are as in the commonly quoted form; otherwise the
/// `(I + D)` shifts run over the block variables, which is what the general
/// moment formula gives for `u = 1_A`.
fn l221_sides<T: Scalar>(
    space: &CellSpace,
    f: &Expr,
    a: &CellProcess,
    n: usize,
    printed: bool,
) -> Sides<T> {
    let m = space.m();
    let ext = space.trunc() + n;
    let sig = sigma_t::<T>(space);
    let at = a.tabulate::<T>(ext);
    let ft = f.tabulate::<T>(m, ext);
    let mass = random_mass(&at, &sig);
    let d = Table::skorohod(&at, &sig);
    let lhs = (0..n).fold(ft.clone(), |acc, _| acc.mul(&d));
    let mut rhs = Table::constant(m, ext, T::zero());
    let s1 = stirling();
    for c in 0..=n {
        for aa in 0..=c {
            let mut coef = binomial(n, aa) * s1.second(n - aa, c - aa);
            if coef == 0.into() {
                continue;
            }
            if aa % 2 == 1 {
                coef = -coef;
            }
            let coef = T::from_rational(&from_bigint(coef));
            let (dim, power) = if printed { (aa, c - aa) } else { (c - aa, aa) };
            let g = (0..power).fold(ft.clone(), |acc, _| acc.mul(&mass));
            for s in all_tuples(m, dim) {
                let mut offset = vec![0usize; m];
                let mut weight = T::one();
                for &c in &s {
                    offset[c] += 1;
                    weight = weight.mul(&sig[c]);
                }
                let mut term = g.shifted(&offset);
                for &sp in &s {
                    let mut o = offset.clone();
                    o[sp] -= 1;
                    term = term.mul(&at[sp].shifted(&o));
                }
                rhs = rhs.add(&term.scale(&weight.mul(&coef)));
            }
        }
    }
    Sides { lhs, rhs }
}

/// `E[F δ(1_A)^n]` against the `(c, a)` expansion with `(I + D)` shifts.
pub fn check_prop_l221(
    space: &CellSpace,
    f: &Expr,
    a: &CellProcess,
    n: usize,
    opts: OracleOptions,
) -> Result<OracleRow> {
    let m = space.m();
    if n > 4 {
        return Err(Error::arg("order n must be at most 4"));
    }
    f.validate(m)?;
    a.validate(m)?;
    validate_indicators(&[a], m, space.trunc() + n, false)?;
    let exact = require_exact(space, opts)?;
    let s = to_f64(&space.total_mass());
    let ef = f.envelope(m);
    let ind = vec![Envelope::constant(m, 1.0); m];
    let env_l = ef.mul(&delta_envelope(space, &ind).pow(n as u32));
    let s1 = stirling();
    let mut scale = 0.0;
    for c in 0..=n {
        for aa in 0..=c {
            let coef = to_f64(&from_bigint(binomial(n, aa) * s1.second(n - aa, c - aa)));
            scale += coef * s.powi(c as i32);
        }
    }
    let env_r = ef.shift_all(n).scale(scale);
    let mut details = Map::new();
    details.insert("functional".into(), json!(f.to_string()));
    details.insert("set".into(), json!(a.name));
    details.insert("n".into(), json!(n));
    let mut row = finish(
        space,
        format!("l221/{}/n={n}", a.name),
        l221_sides::<f64>(space, f, a, n, false),
        &env_l,
        &env_r,
        0.0,
        exact.then(|| l221_sides::<ExactRational>(space, f, a, n, false)),
        details,
    );
    let printed = l221_sides::<f64>(space, f, a, n, true);
    let alt = space.expectation(&printed.rhs, &env_r);
    row.details
        .insert("rhs_with_swapped_shifts".into(), json!(decimal(alt.value)));
    row.details.insert(
        "swapped_shifts_gap".into(),
        json!(decimal((alt.value - row.lhs).abs())),
    );
    Ok(row)
}

fn eval_charlier<T: Scalar>(n: usize, x: &T, lambda: &T) -> T {
    charlier(n).terms().fold(T::zero(), |acc, (&(dy, dl), c)| {
        acc.add(&T::from_rational(c).mul(&x.powu(dy)).mul(&lambda.powu(dl)))
    })
}

struct Plan {
    terms: Vec<(bool, Vec<usize>)>,
}

/// Sign and per-factor storage offsets for each subset `V` of the tuple.
fn subset_plan(s: &[usize], stride: &[usize], exclude_self: bool) -> Plan {
    let n = s.len();
    let mut terms = Vec::with_capacity(1 << n);
    for v in 0u32..(1 << n) {
        let neg = (n - v.count_ones() as usize) % 2 == 1;
        let base: usize = (0..n)
            .filter(|j| v & (1 << j) != 0)
            .map(|j| stride[s[j]])
            .sum();
        let offs = (0..n)
            .map(|p| {
                if exclude_self && v & (1 << p) != 0 {
                    base - stride[s[p]]
                } else {
                    base
                }
            })
            .collect();
        terms.push((neg, offs));
    }
    Plan { terms }
}

fn eval_plan<T: Scalar>(plan: &Plan, tables: &[&Table<T>], idx: usize) -> T {
    let mut total = T::zero();
    for (neg, offs) in &plan.terms {
        let mut prod = T::one();
        for (t, o) in tables.iter().zip(offs) {
            let v = &t.data()[idx + o];
            if v.is_zero_value() {
                prod = T::zero();
                break;
            }
            prod = prod.mul(v);
        }
        if !prod.is_zero_value() {
            total = if *neg {
                total.sub(&prod)
            } else {
                total.add(&prod)
            };
        }
    }
    total
}

/// Storage indices of `{0..=bound}^m` inside a table of the given extent.
fn box_points(m: usize, extent: usize, bound: usize) -> Vec<usize> {
    let probe = Table::<f64>::constant(m, extent, 0.0);
    let mut pts = Vec::with_capacity((bound + 1).pow(m as u32));
    let mut k = vec![0usize; m];
    for _ in 0..(bound + 1).pow(m as u32) {
        pts.push(probe.index(&k));
        super::table::advance(&mut k, bound);
    }
    pts
}

fn strides(m: usize, extent: usize) -> Vec<usize> {
    (0..m).map(|i| (extent + 1).pow(i as u32)).collect()
}

/// `Σ_s σ_s Σ_{V ⊆ [N]} (−1)^{N−|V|} Π_p u_p(k + Σ_{j ∈ V∖{p}} e_{s_j})`
/// over cell tuples `s` of length `n`; `factor(p, c)` is the table of `u_p`
/// at cell `c`. With `exclude_self` false the own index stays in, which
/// gives the plain iterated difference of the product.
fn delta_product_sum<'a, T: Scalar + 'a>(
    space: &CellSpace,
    n: usize,
    ext: usize,
    exclude_self: bool,
    factor: impl Fn(usize, usize) -> &'a Table<T>,
) -> Table<T> {
    let m = space.m();
    let kk = space.trunc();
    let sig = sigma_t::<T>(space);
    let stride = strides(m, ext);
    let points = box_points(m, ext, kk);
    let mut acc = vec![T::zero(); (ext + 1).pow(m as u32)];
    for s in all_tuples(m, n) {
        let weight = s.iter().fold(T::one(), |w, &c| w.mul(&sig[c]));
        if weight.is_zero_value() {
            continue;
        }
        let tables: Vec<&Table<T>> = (0..n).map(|p| factor(p, s[p])).collect();
        let plan = subset_plan(&s, &stride, exclude_self);
        for &idx in &points {
            let total = eval_plan(&plan, &tables, idx);
            if !total.is_zero_value() {
                acc[idx] = acc[idx].add(&total.mul(&weight));
            }
        }
    }
    Table::from_raw(m, ext, kk, acc)
}

fn p12_sides<T: Scalar>(space: &CellSpace, rules: &[CellProcess], orders: &[usize]) -> Sides<T> {
    let m = space.m();
    let n_total: usize = orders.iter().sum();
    let ext = space.trunc() + n_total;
    let sig = sigma_t::<T>(space);
    let tables: Vec<Vec<Table<T>>> = rules.iter().map(|r| r.tabulate::<T>(ext)).collect();
    let mut lhs = Table::constant(m, ext, T::one());
    for (t, &k) in tables.iter().zip(orders) {
        let mass = random_mass(t, &sig);
        let x = Table::skorohod(t, &sig).add(&mass);
        let c = x.zip(&mass, |xv, lv| eval_charlier(k, xv, lv));
        lhs = lhs.mul(&c);
    }
    let owner: Vec<usize> = orders
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
        .collect();
    let rhs = if n_total == 0 {
        Table::constant(m, ext, T::one())
    } else {
        delta_product_sum(space, n_total, ext, true, |p, cell| &tables[owner[p]][cell])
    };
    Sides { lhs, rhs }
}

/// `E[Π C_{k_i}(δ(1_{A_i}) + σ(A_i), σ(A_i))]` against the `Δ`-product integral.
pub fn check_prop_p12(
    space: &CellSpace,
    rules: &[CellProcess],
    orders: &[usize],
    opts: OracleOptions,
) -> Result<OracleRow> {
    let m = space.m();
    if rules.len() != orders.len() || rules.is_empty() {
        return Err(Error::arg("need one order per random set"));
    }
    let n_total: usize = orders.iter().sum();
    if n_total > 5 {
        return Err(Error::arg("total order must be at most 5"));
    }
    for r in rules {
        r.validate(m)?;
    }
    let refs: Vec<&CellProcess> = rules.iter().collect();
    validate_indicators(&refs, m, space.trunc() + n_total, true)?;
    let exact = require_exact(space, opts)?;
    let s = to_f64(&space.total_mass());
    let base = (0..m).fold(Envelope::constant(m, s), |acc, c| {
        acc.add(&Envelope::count(m, c))
    });
    let env_l = base.pow(n_total as u32);
    let env_r = Envelope::constant(m, (2.0 * s).powi(n_total as i32));
    let names: Vec<&str> = rules.iter().map(|r| r.name.as_str()).collect();
    let mut details = Map::new();
    details.insert("sets".into(), json!(names));
    details.insert("orders".into(), json!(orders));
    Ok(finish(
        space,
        format!("p12/{}/k={:?}", names.join("+"), orders),
        p12_sides::<f64>(space, rules, orders),
        &env_l,
        &env_r,
        0.0,
        exact.then(|| p12_sides::<ExactRational>(space, rules, orders)),
        details,
    ))
}

/// A label-valued transformation `τ(k, i)` on cells.
#[derive(Debug, Clone)]
pub struct TauRule {
    pub name: String,
    pub labels: Vec<Expr>,
    /// Claims the cyclic condition holds; a violation is then a configuration error.
    pub declared_adapted: bool,
}

fn label_tables(
    space: &CellSpace,
    tau: &TauRule,
    n_labels: usize,
    extent: usize,
) -> Result<Vec<Vec<usize>>> {
    let m = space.m();
    let mut out = Vec::with_capacity(m);
    for e in &tau.labels {
        let t = e.tabulate::<ExactRational>(m, extent);
        let mut v = Vec::with_capacity(t.data().len());
        for q in t.data() {
            if !q.is_integer() || q.is_negative() || to_f64(q) as usize >= n_labels {
                return Err(Error::arg(format!(
                    "label {q} of {} outside 0..{n_labels}",
                    tau.name
                )));
            }
            v.push(to_f64(q) as usize);
        }
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
struct CycleScan {
    first_order: usize,
    higher: usize,
    example: Option<(Vec<usize>, Vec<usize>)>,
}

fn scan_cycles(
    space: &CellSpace,
    labels: &[Vec<usize>],
    extent: usize,
    max_len: usize,
) -> CycleScan {
    let m = space.m();
    let kk = space.trunc();
    let probe = Table::<f64>::constant(m, extent, 0.0);
    let stride: Vec<usize> = (0..m).map(|i| (extent + 1).pow(i as u32)).collect();
    let mut scan = CycleScan::default();
    let mut k = vec![0usize; m];
    for _ in 0..(kk + 1).pow(m as u32) {
        let idx = probe.index(&k);
        let changes = |t: usize, s: usize| labels[s][idx + stride[t]] != labels[s][idx];
        for len in 1..=max_len {
            for tuple in all_tuples(m, len) {
                if (0..len).all(|j| changes(tuple[j], tuple[(j + 1) % len])) {
                    if len == 1 {
                        scan.first_order += 1;
                    } else {
                        scan.higher += 1;
                    }
                    if scan.example.is_none() {
                        scan.example = Some((k.clone(), tuple.clone()));
                    }
                }
            }
        }
        super::table::advance(&mut k, kk);
    }
    scan
}

fn compose_g<T: Scalar>(
    labels: &[Vec<usize>],
    g: &[ExactRational],
    m: usize,
    extent: usize,
) -> Vec<Table<T>> {
    let gs: Vec<T> = g.iter().map(T::from_rational).collect();
    labels
        .iter()
        .map(|lab| {
            let mut it = lab.iter();
            Table::from_fn(m, extent, |_| gs[*it.next().unwrap()].clone())
        })
        .collect()
}

/// Cyclic-condition scan, vanishing of iterated differences of `Π g(τ)`,
/// and the exponential series identity truncated after `n_max` terms.
pub fn check_lemma_l12_and_t11(
    space: &CellSpace,
    tau: &TauRule,
    g: &[ExactRational],
    n_max: usize,
) -> Result<Vec<OracleRow>> {
    let m = space.m();
    if !(1..=4).contains(&n_max) {
        return Err(Error::arg("n_max must be between 1 and 4"));
    }
    if tau.labels.len() != m {
        return Err(Error::arg("one label expression per cell required"));
    }
    let kk = space.trunc();
    let extent = kk + n_max.max(1);
    let labels = label_tables(space, tau, g.len(), extent)?;
    let scan = scan_cycles(space, &labels, extent, n_max.max(2));
    let violated = scan.first_order + scan.higher > 0;
    if violated && tau.declared_adapted {
        let (k, t) = scan.example.clone().unwrap();
        return Err(Error::Configuration(format!(
            "{} is declared adapted but has a nonzero cyclic product at k = {k:?}, cells {t:?}",
            tau.name
        )));
    }
    let mut rows = Vec::new();
    let mut details = Map::new();
    details.insert("tau".into(), json!(tau.name));
    details.insert("first_order_violations".into(), json!(scan.first_order));
    details.insert("cyclic_violations".into(), json!(scan.higher));
    if let Some((k, t)) = &scan.example {
        details.insert("counterexample_counts".into(), json!(k));
        details.insert("counterexample_cells".into(), json!(t));
    }
    rows.push(OracleRow {
        check_id: format!("l12.cyclic/{}", tau.name),
        lhs: (scan.first_order + scan.higher) as f64,
        rhs: 0.0,
        radius: 0.0,
        status: Status::from_bool(!violated),
        exact: None,
        details: details.clone(),
    });

    // iterated differences of Π_p g(τ(k, s_p)), exact
    let gq = compose_g::<ExactRational>(&labels, g, m, extent);
    let mut nonzero = 0usize;
    let mut checked = 0usize;
    let stride = strides(m, extent);
    let points = box_points(m, extent, kk);
    for n in 1..=n_max {
        for tuple in all_tuples(m, n) {
            let plan = subset_plan(&tuple, &stride, false);
            let tables: Vec<&Table<ExactRational>> = tuple.iter().map(|&c| &gq[c]).collect();
            for &idx in &points {
                checked += 1;
                if !eval_plan(&plan, &tables, idx).is_zero_value() {
                    nonzero += 1;
                }
            }
        }
    }
    let mut vd = Map::new();
    vd.insert("tau".into(), json!(tau.name));
    vd.insert("nonzero_points".into(), json!(nonzero));
    vd.insert("points_checked".into(), json!(checked));
    rows.push(OracleRow {
        check_id: format!("l12.vanish/{}", tau.name),
        lhs: nonzero as f64,
        rhs: 0.0,
        radius: 0.0,
        status: if violated {
            Status::Flagged
        } else {
            Status::from_bool(nonzero == 0)
        },
        exact: None,
        details: vd,
    });

    // series identity, float
    let gf = compose_g::<f64>(&labels, g, m, extent);
    let sig = space.sigma_f();
    let big_g = g.iter().map(|q| to_f64(&q.abs())).fold(0.0, f64::max);
    let s: f64 = sig.iter().sum();
    let lhs = Table::from_fn(m, extent, |k| {
        let mut expo = 0.0;
        let mut prod = 1.0;
        for i in 0..m {
            let gi = *gf[i].get(k);
            expo -= sig[i] * gi;
            prod *= (1.0 + gi).powi(k[i] as i32);
        }
        expo.exp() * prod
    });
    let env_l = Envelope::geometric((big_g * s).exp(), vec![1.0 + big_g; m]);
    let mut rhs = Table::constant(m, extent, 1.0);
    let mut env_r_coef = 1.0;
    let mut fact = 1.0;
    for n in 1..=n_max {
        fact *= n as f64;
        let t = delta_product_sum(space, n, extent, false, |_, cell| &gf[cell]);
        rhs = rhs.add(&t.scale(&(1.0 / fact)));
        env_r_coef += (2.0 * big_g * s).powi(n as i32) / fact;
    }
    let x = 2.0 * big_g * s;
    let mut remainder = 0.0;
    let mut term = (0..=n_max).fold(1.0, |t, j| if j == 0 { t } else { t * x / j as f64 });
    for j in n_max + 1..n_max + 80 {
        term *= x / j as f64;
        remainder += term;
    }
    let mut sd = Map::new();
    sd.insert("tau".into(), json!(tau.name));
    sd.insert("n_max".into(), json!(n_max));
    sd.insert("series_remainder_bound".into(), json!(decimal(remainder)));
    let mut row = finish(
        space,
        format!("t11.series/{}", tau.name),
        Sides { lhs, rhs },
        &env_l,
        &Envelope::constant(m, env_r_coef),
        remainder,
        None,
        sd,
    );
    if scan.first_order > 0 {
        row.status = Status::Flagged;
        row.details.insert(
            "note".into(),
            json!("tau moves its own point; series identity not applicable"),
        );
    }
    rows.push(row);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use crate::finite_oracle::expr::Cond;

    fn space2(k: usize) -> CellSpace {
        CellSpace::new(vec![ratio(1, 2), ratio(1, 3)], k).unwrap()
    }

    /// `D_Θ f(k) = Σ_{W ⊆ Θ} (−1)^{|Θ|−|W|} f(k + e_W)` for a multiset of cells.
    fn d_theta(f: &Table<ExactRational>, k: &[usize], cells: &[usize]) -> ExactRational {
        let mut acc = int(0);
        for w in 0u32..(1 << cells.len()) {
            let mut kk = k.to_vec();
            for (j, &c) in cells.iter().enumerate() {
                if w & (1 << j) != 0 {
                    kk[c] += 1;
                }
            }
            let v = f.get(&kk).clone();
            if (cells.len() - w.count_ones() as usize) % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        acc
    }

    /// Sum over assignments `Θ_0, …, Θ_{N−1}` covering `[N]`, optionally with
    /// `p ∉ Θ_p`, of `Π_p D_{Θ_p} u_p(k, s_p)`.
    fn assignment_sum(
        tables: &[&Table<ExactRational>],
        s: &[usize],
        k: &[usize],
        exclude_self: bool,
    ) -> ExactRational {
        let n = s.len();
        let full = (1u32 << n) - 1;
        let mut total = int(0);
        let mut choice = vec![0u32; n];
        loop {
            let ok = choice.iter().fold(0, |a, &c| a | c) == full
                && (!exclude_self || (0..n).all(|p| choice[p] & (1 << p) == 0));
            if ok {
                let mut prod = int(1);
                for p in 0..n {
                    let cells: Vec<usize> = (0..n)
                        .filter(|j| choice[p] & (1 << j) != 0)
                        .map(|j| s[j])
                        .collect();
                    prod *= d_theta(tables[p], k, &cells);
                }
                total += prod;
            }
            let mut i = 0;
            while i < n {
                choice[i] += 1;
                if choice[i] <= full {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        total
    }

    #[test]
    fn subset_formula_matches_explicit_assignments() {
        let m = 2;
        let ext = 8;
        let u0 = (Expr::count(1) + Expr::int(1)) * Expr::ind(Cond::Ge(0, 1));
        let u1 = Expr::count(0).pow(2) - Expr::count(1);
        let tabs = [
            u0.tabulate::<ExactRational>(m, ext),
            u1.tabulate::<ExactRational>(m, ext),
        ];
        let stride = strides(m, ext);
        for n in 1..=4 {
            for s in all_tuples(m, n) {
                // factor p reads component s_p
                let tables: Vec<&Table<ExactRational>> = s.iter().map(|&c| &tabs[c]).collect();
                for exclude in [true, false] {
                    let plan = subset_plan(&s, &stride, exclude);
                    for k in [[0, 0], [1, 2], [3, 1], [2, 3]] {
                        let idx = tabs[0].index(&k);
                        assert_eq!(
                            eval_plan(&plan, &tables, idx),
                            assignment_sum(&tables, &s, &k, exclude),
                            "n={n} s={s:?} k={k:?} exclude={exclude}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn second_order_delta_is_cross_difference() {
        // Δ_{s,t}(u v) = D_t u(s) D_s v(t)
        let m = 2;
        let ext = 6;
        let u = (Expr::count(1) * Expr::count(0)).tabulate::<ExactRational>(m, ext);
        let v = Expr::ind(Cond::Ge(0, 2)).tabulate::<ExactRational>(m, ext);
        let plan = subset_plan(&[0, 1], &strides(m, ext), true);
        for k in [[0, 0], [1, 1], [2, 0], [1, 3]] {
            let lhs = eval_plan(&plan, &[&u, &v], u.index(&k));
            let rhs = u.diff(1).get(&k) * v.diff(0).get(&k);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn exact_mode_guard() {
        let u = CellProcess::new("u", vec![Expr::int(1), Expr::int(0)]);
        let opts = OracleOptions { exact: true };
        assert!(check_isometry(&space2(MAX_EXACT_TRUNC), &u, opts).is_ok());
        assert!(matches!(
            check_isometry(&space2(MAX_EXACT_TRUNC + 1), &u, opts),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn swapped_l221_form_differs_for_shift_sensitive_sets() {
        let space = CellSpace::new(vec![int(1), ratio(3, 4), ratio(1, 2)], 14).unwrap();
        let a = CellProcess::new(
            "mixed",
            vec![
                Expr::ind(Cond::Ge(1, 1)),
                Expr::int(0),
                Expr::ind(Cond::Lt(0, 2)),
            ],
        );
        let row = check_prop_l221(&space, &Expr::int(1), &a, 3, OracleOptions::default()).unwrap();
        assert!(row.passed());
        let alt: f64 = row.details["swapped_shifts_gap"]
            .as_str()
            .unwrap()
            .parse()
            .unwrap();
        assert!(alt > 1e-3, "{alt}");
    }

    #[test]
    fn row_serializes_with_gap() {
        let space = space2(6);
        let u = CellProcess::new("u", vec![Expr::count(1), Expr::int(1)]);
        let rep = check_duality(&space, &u, &Expr::count(0), OracleOptions::default())
            .unwrap()
            .to_report();
        assert_eq!(rep.check_id, "duality/u");
        assert!(rep.metadata.contains_key("gap"));
        assert!(rep.tolerance_or_radius.is_some());
    }
}
