//! Truncated cell discretization of the Poisson space.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::envelope::Envelope;
use super::table::{advance, Scalar, Table};
use crate::exact::{to_f64, ExactRational};
use crate::numeric::{poisson_pmf_table, poisson_poly_tail, NeumaierSum};
use crate::{Error, Result};

/// Largest truncated lattice the oracle accepts.
pub const MAX_STATES: usize = 10_000_000;

/// Fixed summation chunk; results never depend on the thread count.
const CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct CellSpace {
    sigma: Vec<ExactRational>,
    sigma_f: Vec<f64>,
    trunc: usize,
    pmf: Vec<Vec<f64>>,
    cell_tails: Vec<f64>,
    tail_bound: f64,
}

/// Truncated expectation with a rigorous error radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub radius: f64,
}

impl CellSpace {
    pub fn new(sigma: Vec<ExactRational>, trunc: usize) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::arg("need at least one cell"));
        }
        if let Some(s) = sigma.iter().find(|s| s.is_negative()) {
            return Err(Error::arg(format!("negative intensity {s}")));
        }
        let states = (trunc + 1)
            .checked_pow(sigma.len() as u32)
            .filter(|&s| s <= MAX_STATES)
            .ok_or_else(|| {
                Error::Size(format!(
                    "lattice {{0..{trunc}}}^{} exceeds {MAX_STATES} states",
                    sigma.len()
                ))
            })?;
        debug_assert!(states <= MAX_STATES);
        let sigma_f: Vec<f64> = sigma.iter().map(to_f64).collect();
        let pmf: Vec<Vec<f64>> = sigma_f
            .iter()
            .map(|&s| poisson_pmf_table(s, trunc))
            .collect();
        let cell_tails: Vec<f64> = sigma_f.iter().map(|&s| poisson_tail(s, trunc)).collect();
        let log_keep: f64 = cell_tails.iter().map(|q| (-q).ln_1p()).sum();
        let tail_bound = -log_keep.exp_m1();
        Ok(Self {
            sigma,
            sigma_f,
            trunc,
            pmf,
            cell_tails,
            tail_bound,
        })
    }

    pub fn m(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[ExactRational] {
        &self.sigma
    }

    pub fn sigma_f(&self) -> &[f64] {
        &self.sigma_f
    }

    pub fn total_mass(&self) -> ExactRational {
        self.sigma.iter().cloned().sum()
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn lattice_size(&self) -> usize {
        (self.trunc + 1).pow(self.m() as u32)
    }

    /// `P(N_i = j)` for `j <= K`.
    pub fn pmf(&self, i: usize) -> &[f64] {
        &self.pmf[i]
    }

    pub fn cell_tails(&self) -> &[f64] {
        &self.cell_tails
    }

    /// `1 − Π_i P(Poisson(σ_i) <= K)`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    fn check_table<T: Scalar>(&self, f: &Table<T>) {
        assert_eq!(f.m(), self.m(), "table has wrong cell count");
        assert!(
            f.valid() >= self.trunc,
            "table not valid on the truncated lattice"
        );
    }

    /// `Σ_{k ∈ {0..K}^m} w(k) F(k)` with radius from `env` plus rounding slack.
    pub fn expectation(&self, f: &Table<f64>, env: &Envelope) -> Estimate {
        self.check_table(f);
        let m = self.m();
        let kk = self.trunc;
        let n = self.lattice_size();
        let chunks: Vec<(NeumaierSum, NeumaierSum)> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(n);
                let mut k = decode(start, m, kk);
                let mut s = NeumaierSum::new();
                let mut abs = NeumaierSum::new();
                for _ in start..end {
                    let w: f64 = (0..m).map(|i| self.pmf[i][k[i]]).product();
                    let v = w * f.get(&k);
                    s.add(v);
                    abs.add(v.abs());
                    advance(&mut k, kk);
                }
                (s, abs)
            })
            .collect();
        let mut s = NeumaierSum::new();
        let mut abs = NeumaierSum::new();
        for (a, b) in chunks {
            s.add(a.value());
            abs.add(b.value());
        }
        let slack = 16.0 * f64::EPSILON * (m as f64 + 2.0) * abs.value() + f64::MIN_POSITIVE;
        Estimate {
            value: s.value(),
            radius: env.tail_mass(self) + slack,
        }
    }

    /// `Σ_{k ∈ {0..K}^m} Π σ_i^{k_i}/k_i! · F(k)`; multiply by `e^{−Σσ}` to
    /// obtain the truncated expectation.
    pub fn expectation_exact(&self, f: &Table<ExactRational>) -> ExactRational {
        self.check_table(f);
        let m = self.m();
        let kk = self.trunc;
        let weights: Vec<Vec<ExactRational>> = self
            .sigma
            .iter()
            .map(|s| {
                let mut w = vec![ExactRational::from_integer(BigInt::from(1))];
                for j in 1..=kk {
                    let next = w[j - 1].clone() * s / ExactRational::from_integer(BigInt::from(j));
                    w.push(next);
                }
                w
            })
            .collect();
        let mut k = vec![0usize; m];
        let mut acc = <ExactRational as Zero>::zero();
        for _ in 0..self.lattice_size() {
            let v = f.get(&k);
            if !v.is_zero() {
                let w = (0..m).fold(v.clone(), |a, i| a * &weights[i][k[i]]);
                acc += w;
            }
            advance(&mut k, kk);
        }
        acc
    }

    /// Converts an unnormalized exact sum to the float scale.
    pub fn normalize_exact(&self, q: &ExactRational) -> f64 {
        to_f64(q) * (-self.sigma_f.iter().sum::<f64>()).exp()
    }
}

fn decode(mut idx: usize, m: usize, extent: usize) -> Vec<usize> {
    let mut k = vec![0; m];
    for x in k.iter_mut() {
        *x = idx % (extent + 1);
        idx /= extent + 1;
    }
    k
}

/// `P(Poisson(σ) > K)` summed directly, with a geometric bound on the remainder.
fn poisson_tail(sigma: f64, k: usize) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let mut p = poisson_pmf_table(sigma, k)[k];
    let mut sum = 0.0;
    let mut j = k;
    loop {
        p *= sigma / (j + 1) as f64;
        j += 1;
        sum += p;
        if p < sum * 1e-18 && (j as f64) > 2.0 * sigma {
            break;
        }
    }
    sum + poisson_poly_tail(sigma, 1.0, 1.0, 0, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use crate::finite_oracle::expr::Expr;

    #[test]
    fn constant_expectation() {
        let space = CellSpace::new(vec![int(1), ratio(3, 4), ratio(1, 2)], 8).unwrap();
        let one = Expr::int(1);
        let est = space.expectation(&one.tabulate(3, 8), &one.envelope(3));
        assert!(est.value <= 1.0 && est.value >= 1.0 - space.tail_bound() - 1e-15);
        assert!((1.0 - est.value - space.tail_bound()).abs() < 1e-13);
        assert!(est.radius >= space.tail_bound());
    }

    #[test]
    fn poisson_mean_and_variance() {
        let space = CellSpace::new(vec![int(1)], 20).unwrap();
        let f = Expr::count(0);
        let est = space.expectation(&f.tabulate(1, 20), &f.envelope(1));
        assert!((est.value - 1.0).abs() < 1e-12);
        let v = (Expr::count(0) - Expr::int(1)).pow(2);
        let est = space.expectation(&v.tabulate(1, 20), &v.envelope(1));
        assert!((est.value - 1.0).abs() < 1e-12);
        assert!(est.radius < 1e-12);
    }

    #[test]
    fn tail_bound_matches_partial_sums() {
        // independent route: 1 − Π Σ_{j<=K} pmf
        let space = CellSpace::new(vec![int(1), ratio(3, 4), ratio(1, 2)], 8).unwrap();
        let keep: f64 = (0..3).map(|i| space.pmf(i).iter().sum::<f64>()).product();
        assert!(((1.0 - keep) - space.tail_bound()).abs() < 1e-14);
        assert!(
            space.tail_bound() > 1.23e-6 && space.tail_bound() < 1.24e-6,
            "{}",
            space.tail_bound()
        );
    }

    #[test]
    fn lattice_cap() {
        assert!(matches!(
            CellSpace::new(vec![int(1); 8], 8),
            Err(Error::Size(_))
        ));
        assert!(CellSpace::new(vec![int(-1)], 3).is_err());
        assert!(CellSpace::new(vec![], 3).is_err());
    }

    #[test]
    fn exact_matches_float() {
        let space = CellSpace::new(vec![ratio(1, 2), int(1)], 5).unwrap();
        let f = Expr::count(0) * Expr::count(1) - Expr::ratio(1, 3);
        let fl = space.expectation(&f.tabulate(2, 5), &f.envelope(2));
        let ex = space.expectation_exact(&f.tabulate(2, 5));
        assert!((space.normalize_exact(&ex) - fl.value).abs() < 1e-15);
    }
}
