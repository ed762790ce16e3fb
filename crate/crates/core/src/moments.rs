//! Moments of compensated Poisson integrals `δ(h) = ∫ h d(ω − σ)` for step
//! functions `h`, plus Poisson central moments and Charlier expectations.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{table, GappedSequences, SetPartitions};
use crate::exact::{binomial, from_bigint, parse_rational, pow, to_f64, ExactRational};
use crate::numeric::{compensated_sum, poisson_poly_tail};
use crate::polynomials::charlier;
use crate::{Error, Result};

/// Largest order accepted by [`moment_cumulant`].
pub const MAX_CUMULANT_ORDER: usize = 12;

/// `h = Σ cᵢ 1_{Aᵢ}` over disjoint cells with `σ(Aᵢ) = σᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    cells: Vec<(ExactRational, ExactRational)>,
}

impl StepFunction {
    /// Cells as `(value, mass)` pairs; masses must be nonnegative.
    pub fn new(cells: Vec<(ExactRational, ExactRational)>) -> Result<Self> {
        if let Some((_, m)) = cells.iter().find(|(_, m)| m.is_negative()) {
            return Err(Error::arg(format!("negative cell mass {m}")));
        }
        Ok(Self { cells })
    }

    pub fn single(value: ExactRational, mass: ExactRational) -> Result<Self> {
        Self::new(vec![(value, mass)])
    }

    pub fn cells(&self) -> &[(ExactRational, ExactRational)] {
        &self.cells
    }

    /// Parses `{"cells": [[c, σ], ...]}` where entries are numbers or
    /// strings such as `"3/4"`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            cells: Vec<(serde_json::Value, serde_json::Value)>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "step function JSON",
            input: e.to_string(),
        })?;
        let conv = |v: &serde_json::Value| -> Result<ExactRational> {
            match v {
                serde_json::Value::String(s) => parse_rational(s),
                serde_json::Value::Number(n) => parse_rational(&n.to_string()),
                other => Err(Error::Parse {
                    what: "rational",
                    input: other.to_string(),
                }),
            }
        };
        let cells = raw
            .cells
            .iter()
            .map(|(c, m)| Ok((conv(c)?, conv(m)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cells)
    }

    pub fn total_mass(&self) -> ExactRational {
        self.cells.iter().map(|(_, m)| m.clone()).sum()
    }
}

/// `∫ h^p dσ = Σ cᵢ^p σᵢ`.
pub fn power_integral(h: &StepFunction, p: usize) -> ExactRational {
    h.cells.iter().map(|(c, m)| pow(c, p) * m).sum()
}

fn power_integrals(h: &StepFunction, n: usize) -> Vec<ExactRational> {
    (0..=n).map(|p| power_integral(h, p)).collect()
}

/// `E[δ(h)^n]` from `E[δ^{j+1}] = Σ_{k=1}^{j} C(j,k) ∫h^{k+1} E[δ^{j−k}]`.
pub fn moment_recursive(h: &StepFunction, n: usize) -> ExactRational {
    let ints = power_integrals(h, n + 1);
    let mut m = vec![ExactRational::one()];
    for j in 0..n {
        let next: ExactRational = (1..=j)
            .map(|k| from_bigint(binomial(j, k)) * &ints[k + 1] * &m[j - k])
            .sum();
        m.push(next);
    }
    m.swap_remove(n)
}

/// `E[δ(h)^n]` as a sum over `a` and gapped sequences `0 = k₁ ≪ … ≪ k_{a+1} = n`
/// of `Π C(k_{l+1}−1, k_l) ∫h^{k_{l+1}−k_l} dσ`.
pub fn moment_closed(h: &StepFunction, n: usize) -> ExactRational {
    let ints = power_integrals(h, n);
    let mut total = ExactRational::zero();
    for a in 0..=n / 2 {
        let mut seqs = GappedSequences::new(n, a);
        while let Some(k) = seqs.next_seq() {
            let mut coef = BigInt::one();
            let mut prod = ExactRational::one();
            for w in k.windows(2) {
                coef *= binomial(w[1] - 1, w[0]);
                prod *= &ints[w[1] - w[0]];
            }
            total += from_bigint(coef) * prod;
        }
    }
    total
}

/// `E[δ(h)^n]` as `Σ_partitions Π κ_{|B|}` with `κ₁ = 0` and `κ_m = ∫h^m dσ`.
pub fn moment_cumulant(h: &StepFunction, n: usize) -> Result<ExactRational> {
    if n > MAX_CUMULANT_ORDER {
        return Err(Error::Size(format!(
            "cumulant route enumerates Bell({n}) partitions; limit is n = {MAX_CUMULANT_ORDER}"
        )));
    }
    let ints = power_integrals(h, n);
    let mut total = ExactRational::zero();
    let mut parts = SetPartitions::new(n);
    while let Some(p) = parts.next_partition() {
        let sizes = SetPartitions::block_sizes(p);
        if sizes.contains(&1) {
            continue;
        }
        total += sizes
            .iter()
            .fold(ExactRational::one(), |acc, &s| acc * &ints[s]);
    }
    Ok(total)
}

/// `E[(Z − λ)^n] = Σ_a λ^a S₂(n,a)` for `Z ~ Poisson(λ)`.
pub fn central_poisson_moment(n: usize, lambda: &ExactRational) -> Result<ExactRational> {
    if lambda.is_negative() {
        return Err(Error::arg("λ must be nonnegative"));
    }
    let t = table();
    Ok((0..=n / 2)
        .map(|a| from_bigint(t.assoc(n, a).clone()) * pow(lambda, a))
        .sum())
}

/// Tail budget used when choosing a truncation automatically.
pub const CHARLIER_TAIL_TOL: f64 = 1e-14;

/// Upper bound on `Σ_{k>trunc} P(Z=k) |Cₙ(k,λ)|`, from `|Cₙ(k,λ)| ≤ (k+λ)^n`.
pub fn charlier_tail_bound(n: usize, lambda: f64, trunc: usize) -> f64 {
    poisson_poly_tail(lambda, 1.0, lambda, n as u32, trunc)
}

/// Smallest truncation whose tail bound is below [`CHARLIER_TAIL_TOL`].
pub fn charlier_truncation(n: usize, lambda: f64) -> usize {
    let mut k = 0;
    while charlier_tail_bound(n, lambda, k) >= CHARLIER_TAIL_TOL {
        k += 1;
    }
    k
}

/// Truncated `E[Cₙ(Z,λ)]`: the sum `Σ_{k≤trunc} λ^k/k! Cₙ(k,λ)` is formed
/// exactly, then multiplied by `e^{−λ}` once in floating point.
pub fn charlier_mean(n: usize, lambda: f64, trunc: usize) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::arg("λ must be positive and finite"));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let bound = charlier_tail_bound(n, lambda, trunc);
    if !(bound < CHARLIER_TAIL_TOL) {
        return Err(Error::arg(format!(
            "truncation {trunc} leaves tail bound {bound:e}; need at least {}",
            charlier_truncation(n, lambda)
        )));
    }
    let lam = ExactRational::from_float(lambda).ok_or_else(|| Error::arg("λ not representable"))?;
    let c = charlier(n);
    let mut weight = ExactRational::one();
    let mut acc = ExactRational::zero();
    for k in 0..=trunc {
        if k > 0 {
            weight = weight * &lam / ExactRational::from_integer(BigInt::from(k));
        }
        acc += &weight * c.eval(&ExactRational::from_integer(BigInt::from(k)), &lam);
    }
    Ok(to_f64(&acc) * (-lambda).exp())
}

/// Exponent of the Laplace functional
/// `E[exp(∫ f d(ω − σ))] = exp(Σ σᵢ (e^{cᵢ} − cᵢ − 1))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceExponent {
    pub exponent: f64,
    /// Symbolic form such as `1*(e^1 - 1 - 1)`.
    pub symbolic: String,
}

impl LaplaceExponent {
    pub fn functional(&self) -> f64 {
        self.exponent.exp()
    }
}

pub fn laplace_functional(f: &StepFunction) -> LaplaceExponent {
    let mut parts = Vec::new();
    let mut terms = Vec::new();
    for (c, m) in &f.cells {
        let cv = to_f64(c);
        terms.push(to_f64(m) * (cv.exp_m1() - cv));
        parts.push(format!("{m}*(e^{c} - {c} - 1)"));
    }
    LaplaceExponent {
        exponent: compensated_sum(terms),
        symbolic: if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        },
    }
}

/// Float-valued variant for irrational cell values such as `ln 2`.
pub fn laplace_exponent_f64(cells: &[(f64, f64)]) -> f64 {
    compensated_sum(cells.iter().map(|&(c, m)| m * (c.exp_m1() - c)))
}
