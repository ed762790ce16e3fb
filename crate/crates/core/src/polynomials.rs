//! Exact Charlier, generalized Bell and Touchard polynomials.
//!
//! Polynomials live in two symbols, written `y` (or `x`) and `λ`, with rational
//! coefficients. A small truncated power-series engine provides independent
//! generating-function expansions for cross-checking.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::combinatorics::table;
use crate::exact::{binomial, from_bigint, int, pow, ratio, ExactRational};

/// Sparse polynomial in `(y, λ)`; keys are `(deg_y, deg_λ)`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BivariatePolynomial {
    coeffs: BTreeMap<(u32, u32), ExactRational>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(ExactRational::one())
    }

    pub fn constant(c: ExactRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: ExactRational, deg_y: u32, deg_lambda: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(deg_y, deg_lambda, c);
        p
    }

    pub fn y() -> Self {
        Self::monomial(ExactRational::one(), 1, 0)
    }

    pub fn lambda() -> Self {
        Self::monomial(ExactRational::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, deg_y: u32, deg_lambda: u32) -> ExactRational {
        self.coeffs
            .get(&(deg_y, deg_lambda))
            .cloned()
            .unwrap_or_else(ExactRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &ExactRational)> {
        self.coeffs.iter()
    }

    pub fn degree_y(&self) -> u32 {
        self.coeffs.keys().map(|k| k.0).max().unwrap_or(0)
    }

    fn add_term(&mut self, dy: u32, dl: u32, c: ExactRational) {
        if c.is_zero() {
            return;
        }
        let slot = self
            .coeffs
            .entry((dy, dl))
            .or_insert_with(ExactRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&(dy, dl));
        }
    }

    pub fn scale(&self, c: &ExactRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, y: &ExactRational, lambda: &ExactRational) -> ExactRational {
        self.coeffs
            .iter()
            .map(|(&(dy, dl), c)| c * pow(y, dy as usize) * pow(lambda, dl as usize))
            .sum()
    }

    /// Substitutes `y ↦ y_for` and `λ ↦ lambda_for`.
    pub fn compose(&self, y_for: &Self, lambda_for: &Self) -> Self {
        let mut y_pows = vec![Self::one()];
        let mut l_pows = vec![Self::one()];
        let mut out = Self::zero();
        for (&(dy, dl), c) in &self.coeffs {
            while y_pows.len() <= dy as usize {
                let next = y_pows.last().unwrap() * y_for;
                y_pows.push(next);
            }
            while l_pows.len() <= dl as usize {
                let next = l_pows.last().unwrap() * lambda_for;
                l_pows.push(next);
            }
            out = out + (&y_pows[dy as usize] * &l_pows[dl as usize]).scale(c);
        }
        out
    }

    /// `p(y + shift·λ, λ)`.
    pub fn shift_y_by_lambda(&self, shift: i64) -> Self {
        let y_for = Self::y() + Self::lambda().scale(&int(shift));
        self.compose(&y_for, &Self::lambda())
    }

    /// Coefficients as a univariate polynomial in λ when `y` does not occur.
    pub fn as_lambda_polynomial(&self) -> Option<Vec<ExactRational>> {
        if self.coeffs.keys().any(|k| k.0 != 0) {
            return None;
        }
        let deg = self.coeffs.keys().map(|k| k.1).max().unwrap_or(0) as usize;
        let mut v = vec![ExactRational::zero(); deg + 1];
        for (&(_, dl), c) in &self.coeffs {
            v[dl as usize] = c.clone();
        }
        Some(v)
    }
}

impl fmt::Debug for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(dy, dl), c) in self.coeffs.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut factors = Vec::new();
            if !mag.is_one() || (dy == 0 && dl == 0) {
                factors.push(mag.to_string());
            }
            match dy {
                0 => {}
                1 => factors.push("y".into()),
                d => factors.push(format!("y^{d}")),
            }
            match dl {
                0 => {}
                1 => factors.push("λ".into()),
                d => factors.push(format!("λ^{d}")),
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl Add for BivariatePolynomial {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for ((dy, dl), c) in rhs.coeffs {
            self.add_term(dy, dl, c);
        }
        self
    }
}

impl Sub for BivariatePolynomial {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for BivariatePolynomial {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            coeffs: self.coeffs.into_iter().map(|(k, v)| (k, -v)).collect(),
        }
    }
}

impl Mul for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn mul(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        let mut out = BivariatePolynomial::zero();
        for (&(ay, al), ac) in &self.coeffs {
            for (&(by, bl), bc) in &rhs.coeffs {
                out.add_term(ay + by, al + bl, ac * bc);
            }
        }
        out
    }
}

/// Power series in an auxiliary variable `t`, truncated after `t^order`,
/// with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    pub coeffs: Vec<BivariatePolynomial>,
}

impl TruncatedSeries {
    pub fn new(order: usize) -> Self {
        Self {
            coeffs: vec![BivariatePolynomial::zero(); order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = Self::new(order);
        for i in 0..=order {
            for j in 0..=order - i {
                if self.coeffs[i].is_zero() || other.coeffs[j].is_zero() {
                    continue;
                }
                let term = &self.coeffs[i] * &other.coeffs[j];
                out.coeffs[i + j] = std::mem::take(&mut out.coeffs[i + j]) + term;
            }
        }
        out
    }

    /// `exp(s)` for a series with zero constant term.
    pub fn exp(&self) -> Self {
        assert!(self.coeffs[0].is_zero(), "exp needs a zero constant term");
        let order = self.order();
        let mut e = Self::new(order);
        e.coeffs[0] = BivariatePolynomial::one();
        // n e_n = Σ_{k=1}^{n} k s_k e_{n-k}
        for n in 1..=order {
            let mut acc = BivariatePolynomial::zero();
            for k in 1..=n {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                acc = acc + (&self.coeffs[k] * &e.coeffs[n - k]).scale(&int(k as i64));
            }
            e.coeffs[n] = acc.scale(&ratio(1, n as i64));
        }
        e
    }
}

/// Charlier polynomial `Cₙ(x, λ) = Σ_k C(n,k) (−λ)^{n−k} Σ_l s(k,l) x^l`,
/// with `x` stored in the `y` slot.
pub fn charlier(n: usize) -> BivariatePolynomial {
    let t = table();
    let mut p = BivariatePolynomial::zero();
    for k in 0..=n {
        for l in 0..=k {
            let s = t.first(k, l);
            if s.is_zero() {
                continue;
            }
            let mut c = binomial(n, k) * s;
            if (n - k) % 2 == 1 {
                c = -c;
            }
            p.add_term(l as u32, (n - k) as u32, from_bigint(c));
        }
    }
    p
}

/// `Bₙ(0, λ) = Σ_a (−λ)^a S₂(n, a)` as coefficients in λ.
fn gen_bell_at_zero(m: usize) -> Vec<BigInt> {
    let t = table();
    (0..=m / 2)
        .map(|a| {
            let c = t.assoc(m, a).clone();
            if a % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect()
}

/// Generalized Bell polynomial `Bₙ(y, λ) = Σ_k C(n,k) y^k B_{n−k}(0, λ)`.
pub fn gen_bell(n: usize) -> BivariatePolynomial {
    let mut p = BivariatePolynomial::zero();
    for k in 0..=n {
        let base = gen_bell_at_zero(n - k);
        let b = binomial(n, k);
        for (a, c) in base.into_iter().enumerate() {
            p.add_term(k as u32, a as u32, from_bigint(&b * c));
        }
    }
    p
}

/// Touchard polynomial `Bₙ(λ) = Σ_c λ^c S(n,c)`, coefficients in increasing degree.
pub fn touchard(n: usize) -> Vec<BigInt> {
    let t = table();
    (0..=n).map(|c| t.second(n, c).clone()).collect()
}

pub fn eval_univariate(coeffs: &[BigInt], x: &ExactRational) -> ExactRational {
    coeffs.iter().rev().fold(ExactRational::zero(), |acc, c| {
        acc * x + from_bigint(c.clone())
    })
}

/// `n! [t^n] exp(t y − λ (e^t − t − 1))`.
pub fn gen_bell_from_series(order: usize) -> Vec<BivariatePolynomial> {
    let mut s = TruncatedSeries::new(order);
    if order >= 1 {
        s.coeffs[1] = BivariatePolynomial::y();
    }
    let mut fact = BigInt::one();
    for m in 1..=order {
        fact *= BigInt::from(m);
        if m >= 2 {
            let c = ExactRational::new(-BigInt::one(), fact.clone());
            s.coeffs[m] = s.coeffs[m].clone() + BivariatePolynomial::monomial(c, 0, 1);
        }
    }
    scale_to_exponential(s.exp())
}

/// `n! [r^n] e^{−rλ} (1+r)^x`, written as `exp(−rλ + x log(1+r))`.
pub fn charlier_from_series(order: usize) -> Vec<BivariatePolynomial> {
    let mut s = TruncatedSeries::new(order);
    for m in 1..=order {
        let sign = if m % 2 == 1 { 1 } else { -1 };
        s.coeffs[m] = BivariatePolynomial::monomial(ratio(sign, m as i64), 1, 0);
    }
    if order >= 1 {
        s.coeffs[1] = s.coeffs[1].clone() - BivariatePolynomial::lambda();
    }
    scale_to_exponential(s.exp())
}

fn scale_to_exponential(e: TruncatedSeries) -> Vec<BivariatePolynomial> {
    let mut fact = BigInt::one();
    e.coeffs
        .into_iter()
        .enumerate()
        .map(|(n, c)| {
            if n > 0 {
                fact *= BigInt::from(n);
            }
            c.scale(&from_bigint(fact.clone()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMismatch {
    pub direction: &'static str,
    pub monomial: (u32, u32),
    pub lhs: ExactRational,
    pub rhs: ExactRational,
}

#[derive(Debug, Clone)]
pub struct DualityReport {
    pub n: usize,
    /// `Cₙ(y,λ)` recovered from Bell polynomials.
    pub charlier_side: bool,
    /// `Bₙ(y,λ)` recovered from Charlier polynomials.
    pub bell_side: bool,
    pub mismatches: Vec<CoefficientMismatch>,
}

impl DualityReport {
    pub fn holds(&self) -> bool {
        self.charlier_side && self.bell_side
    }
}

fn diff(
    direction: &'static str,
    lhs: &BivariatePolynomial,
    rhs: &BivariatePolynomial,
) -> Vec<CoefficientMismatch> {
    let delta = lhs.clone() - rhs.clone();
    delta
        .terms()
        .map(|(&k, _)| CoefficientMismatch {
            direction,
            monomial: k,
            lhs: lhs.coeff(k.0, k.1),
            rhs: rhs.coeff(k.0, k.1),
        })
        .collect()
}

/// `Cₙ(y,λ) = Σ_k s(n,k) B_k(y−λ, λ)` and `Bₙ(y,λ) = Σ_k S(n,k) C_k(y+λ, λ)`.
pub fn check_duality(n: usize) -> DualityReport {
    let t = table();
    let mut from_bell = BivariatePolynomial::zero();
    let mut from_charlier = BivariatePolynomial::zero();
    for k in 0..=n {
        let s1 = t.first(n, k);
        if !s1.is_zero() {
            from_bell = from_bell
                + gen_bell(k)
                    .shift_y_by_lambda(-1)
                    .scale(&from_bigint(s1.clone()));
        }
        let s2 = t.second(n, k);
        if !s2.is_zero() {
            from_charlier = from_charlier
                + charlier(k)
                    .shift_y_by_lambda(1)
                    .scale(&from_bigint(s2.clone()));
        }
    }
    let mut mismatches = diff("charlier", &charlier(n), &from_bell);
    let bell_mismatches = diff("bell", &gen_bell(n), &from_charlier);
    let charlier_side = mismatches.is_empty();
    let bell_side = bell_mismatches.is_empty();
    mismatches.extend(bell_mismatches);
    DualityReport {
        n,
        charlier_side,
        bell_side,
        mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(terms: &[(i64, i64, u32, u32)]) -> BivariatePolynomial {
        terms
            .iter()
            .fold(BivariatePolynomial::zero(), |acc, &(p, q, dy, dl)| {
                acc + BivariatePolynomial::monomial(ratio(p, q), dy, dl)
            })
    }

    #[test]
    fn charlier_low_orders() {
        assert_eq!(charlier(0), BivariatePolynomial::one());
        assert_eq!(charlier(1), poly(&[(1, 1, 1, 0), (-1, 1, 0, 1)]));
        // x² − x(1+2λ) + λ²
        let c2 = poly(&[(1, 1, 2, 0), (-1, 1, 1, 0), (-2, 1, 1, 1), (1, 1, 0, 2)]);
        assert_eq!(charlier(2), c2);
    }

    #[test]
    fn gen_bell_low_orders() {
        assert_eq!(gen_bell(0), BivariatePolynomial::one());
        assert_eq!(gen_bell(1), BivariatePolynomial::y());
        assert_eq!(gen_bell(2), poly(&[(1, 1, 2, 0), (-1, 1, 0, 1)]));
        assert_eq!(
            gen_bell(3),
            poly(&[(1, 1, 3, 0), (-3, 1, 1, 1), (-1, 1, 0, 1)])
        );
    }

    #[test]
    fn touchard_values() {
        assert_eq!(
            touchard(2),
            vec![BigInt::zero(), BigInt::one(), BigInt::one()]
        );
        assert_eq!(eval_univariate(&touchard(3), &int(1)), int(5));
        assert_eq!(touchard(0), vec![BigInt::one()]);
    }

    #[test]
    fn touchard_is_bell_at_negative_lambda() {
        let l = BivariatePolynomial::lambda();
        for n in 0..=12 {
            let sub = gen_bell(n).compose(&l, &(-l.clone()));
            let coeffs = sub.as_lambda_polynomial().unwrap();
            let expected: Vec<ExactRational> = touchard(n).into_iter().map(from_bigint).collect();
            let mut padded = coeffs.clone();
            padded.resize(expected.len().max(coeffs.len()), ExactRational::zero());
            assert_eq!(padded, expected, "n={n}");
        }
    }

    #[test]
    fn generating_functions_agree() {
        let bell = gen_bell_from_series(12);
        let ch = charlier_from_series(12);
        for n in 0..=12 {
            assert_eq!(bell[n], gen_bell(n), "bell n={n}");
            assert_eq!(ch[n], charlier(n), "charlier n={n}");
        }
    }

    #[test]
    fn duality_small_and_at_scale() {
        for n in 0..=12 {
            let r = check_duality(n);
            assert!(r.holds(), "n={n}: {:?}", r.mismatches);
            assert!(r.mismatches.is_empty());
        }
    }

    #[test]
    fn charlier_bound_by_negated_intensity() {
        for lambda in [ratio(1, 2), int(1), int(3)] {
            for n in 0..=10 {
                let c = charlier(n);
                for x in 0..=10 {
                    let xv = int(x);
                    let lhs = c.eval(&xv, &lambda).abs();
                    let rhs = c.eval(&xv, &(-lambda.clone()));
                    assert!(lhs <= rhs, "n={n} x={x} λ={lambda}");
                }
            }
        }
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(charlier(1).to_string(), "y - λ");
        assert_eq!(BivariatePolynomial::zero().to_string(), "0");
    }

    proptest! {
        #[test]
        fn evaluation_is_a_ring_homomorphism(
            a in proptest::collection::vec((-5i64..5, 0u32..3, 0u32..3), 0..5),
            b in proptest::collection::vec((-5i64..5, 0u32..3, 0u32..3), 0..5),
            y in -4i64..4, l in 1i64..4,
        ) {
            let mk = |v: &[(i64, u32, u32)]| v.iter().fold(BivariatePolynomial::zero(), |acc, &(c, dy, dl)| {
                acc + BivariatePolynomial::monomial(int(c), dy, dl)
            });
            let (pa, pb) = (mk(&a), mk(&b));
            let (yv, lv) = (int(y), ratio(l, 3));
            prop_assert_eq!((&pa * &pb).eval(&yv, &lv), pa.eval(&yv, &lv) * pb.eval(&yv, &lv));
            prop_assert_eq!((pa.clone() + pb.clone()).eval(&yv, &lv), pa.eval(&yv, &lv) + pb.eval(&yv, &lv));
            prop_assert!(pa.terms().all(|(_, c)| !c.is_zero()));
        }

        #[test]
        fn shift_round_trip(n in 0usize..9) {
            let p = charlier(n);
            prop_assert_eq!(p.shift_y_by_lambda(2).shift_y_by_lambda(-2), p);
        }
    }
}
