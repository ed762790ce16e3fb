//! Growth envelopes `Σ coef · Π_i (1 + k_i)^{d_i} ρ_i^{k_i}` and the Poisson
//! tail masses they carry beyond a truncated lattice.

use super::space::CellSpace;
use crate::numeric::poisson_poly_tail;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvTerm {
    pub coef: f64,
    pub degree: Vec<u32>,
    /// Per-cell geometric growth, always at least one.
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    m: usize,
    terms: Vec<EnvTerm>,
}

impl Envelope {
    pub fn zero(m: usize) -> Self {
        Self {
            m,
            terms: Vec::new(),
        }
    }

    pub fn constant(m: usize, c: f64) -> Self {
        assert!(c >= 0.0);
        if c == 0.0 {
            return Self::zero(m);
        }
        Self {
            m,
            terms: vec![EnvTerm {
                coef: c,
                degree: vec![0; m],
                rho: vec![1.0; m],
            }],
        }
    }

    /// `1 + k_i`, which dominates `k_i`.
    pub fn count(m: usize, i: usize) -> Self {
        let mut degree = vec![0; m];
        degree[i] = 1;
        Self {
            m,
            terms: vec![EnvTerm {
                coef: 1.0,
                degree,
                rho: vec![1.0; m],
            }],
        }
    }

    /// `coef · Π ρ_i^{k_i}`.
    pub fn geometric(coef: f64, rho: Vec<f64>) -> Self {
        assert!(rho.iter().all(|&r| r >= 1.0));
        let m = rho.len();
        Self {
            m,
            terms: vec![EnvTerm {
                coef,
                degree: vec![0; m],
                rho,
            }],
        }
    }

    pub fn terms(&self) -> &[EnvTerm] {
        &self.terms
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { m: self.m, terms }.normalized()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                terms.push(EnvTerm {
                    coef: a.coef * b.coef,
                    degree: a.degree.iter().zip(&b.degree).map(|(x, y)| x + y).collect(),
                    rho: a.rho.iter().zip(&b.rho).map(|(x, y)| x * y).collect(),
                });
            }
        }
        Self { m: self.m, terms }.normalized()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.m, 1.0);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, c: f64) -> Self {
        assert!(c >= 0.0);
        if c == 0.0 {
            return Self::zero(self.m);
        }
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef *= c;
        }
        out
    }

    /// Envelope of `k ↦ F(k + s e_i)`, using `(2 + k)/(1 + k) <= 2` style bounds.
    pub fn shift(&self, i: usize, s: usize) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef *= (1.0 + s as f64).powi(t.degree[i] as i32) * t.rho[i].powi(s as i32);
        }
        out
    }

    pub fn shift_all(&self, s: usize) -> Self {
        (0..self.m).fold(self.clone(), |acc, i| acc.shift(i, s))
    }

    /// Multiplies by `1 + k_i`.
    pub fn times_count(&self, i: usize) -> Self {
        self.mul(&Self::count(self.m, i))
    }

    pub fn eval(&self, k: &[usize]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coef
                    * k.iter()
                        .enumerate()
                        .map(|(i, &ki)| {
                            (1.0 + ki as f64).powi(t.degree[i] as i32) * t.rho[i].powi(ki as i32)
                        })
                        .product::<f64>()
            })
            .sum()
    }

    fn normalized(mut self) -> Self {
        let mut merged: Vec<EnvTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged
                .iter_mut()
                .find(|u| u.degree == t.degree && u.rho == t.rho)
            {
                Some(u) => u.coef += t.coef,
                None => merged.push(t),
            }
        }
        self.terms = merged;
        self
    }

    /// Upper bound on `E[env(k) 1{k ∉ {0..=K}^m}]`.
    ///
    /// For one term with per-cell head `H_i` and tail `T_i`,
    /// `E[Π f_i 1{some k_i > K}] = Σ_{S ≠ ∅} Π_{i∈S} T_i Π_{i∉S} H_i`.
    pub fn tail_mass(&self, space: &CellSpace) -> f64 {
        let m = self.m;
        let k = space.trunc();
        let mut total = 0.0;
        for t in &self.terms {
            let mut head = Vec::with_capacity(m);
            let mut tail = Vec::with_capacity(m);
            for i in 0..m {
                let sigma = space.sigma_f()[i];
                let pmf = space.pmf(i);
                let h: f64 = pmf
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        p * (1.0 + j as f64).powi(t.degree[i] as i32) * t.rho[i].powi(j as i32)
                    })
                    .sum();
                head.push(h * (1.0 + 1e-13));
                tail.push(poisson_poly_tail(sigma, t.rho[i], 1.0, t.degree[i], k));
            }
            for mask in 1u32..(1 << m) {
                let mut p = t.coef;
                for i in 0..m {
                    p *= if mask & (1 << i) != 0 {
                        tail[i]
                    } else {
                        head[i]
                    };
                }
                total += p;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    #[test]
    fn bounded_envelope_gives_sup_times_tail() {
        let space = CellSpace::new(vec![int(1), ratio(3, 4), ratio(1, 2)], 8).unwrap();
        let env = Envelope::constant(3, 2.5);
        let t = env.tail_mass(&space);
        let expected = 2.5 * space.tail_bound();
        assert!((t - expected).abs() <= 2e-3 * expected, "{t} vs {expected}");
        assert!(t >= expected * (1.0 - 1e-12));
    }

    #[test]
    fn tail_mass_dominates_direct_sum() {
        let space = CellSpace::new(vec![int(1), ratio(1, 2)], 6).unwrap();
        let env = Envelope::count(2, 0)
            .mul(&Envelope::count(2, 1))
            .add(&Envelope::geometric(0.5, vec![1.2, 1.0]));
        // direct sum over a large box outside {0..6}^2
        let pmf0 = crate::numeric::poisson_pmf_table(1.0, 60);
        let pmf1 = crate::numeric::poisson_pmf_table(0.5, 60);
        let mut direct = 0.0;
        for a in 0..=60 {
            for b in 0..=60 {
                if a > 6 || b > 6 {
                    direct += pmf0[a] * pmf1[b] * env.eval(&[a, b]);
                }
            }
        }
        let bound = env.tail_mass(&space);
        assert!(
            bound >= direct && bound <= 2.0 * direct,
            "{bound} vs {direct}"
        );
    }

    #[test]
    fn shift_dominates() {
        let env = Envelope::count(1, 0)
            .pow(3)
            .add(&Envelope::geometric(1.0, vec![1.5]));
        let sh = env.shift(0, 2);
        for k in 0..30 {
            assert!(env.eval(&[k + 2]) <= sh.eval(&[k]) * (1.0 + 1e-12));
        }
    }
}
