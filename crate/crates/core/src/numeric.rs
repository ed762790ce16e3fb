//! Floating-point helpers: compensated summation and Poisson tail bounds.

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// `ln k!` by direct summation for small k, Stirling series beyond.
pub fn ln_factorial(k: usize) -> f64 {
    if k < 64 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        let x = k as f64 + 1.0;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
    }
}

/// Poisson probabilities `P(N = k)` for `k = 0..=kmax`.
pub fn poisson_pmf_table(lambda: f64, kmax: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(kmax + 1);
    let mut p = (-lambda).exp();
    for k in 0..=kmax {
        w.push(p);
        p *= lambda / (k + 1) as f64;
    }
    w
}

/// Log of the term `e^{−σ} (σρ)^j / j! · (j + shift)^degree`.
fn ln_term(sigma: f64, rho: f64, shift: f64, degree: u32, j: usize) -> f64 {
    let sr = sigma * rho;
    let base = if j == 0 { 0.0 } else { j as f64 * sr.ln() };
    let poly = if degree == 0 {
        0.0
    } else {
        degree as f64 * (j as f64 + shift).ln()
    };
    -sigma + base - ln_factorial(j) + poly
}

/// Upper bound on `Σ_{j>k} e^{−σ} (σρ)^j / j! · (j + shift)^degree`.
///
/// The term ratio `σρ/(j+1) · ((j+1+shift)/(j+shift))^degree` decreases in
/// `j`, so once it drops below one the tail is dominated by a geometric
/// series started at `j = k + 1`. Returns infinity when the ratio at `k + 1`
/// is still at least one. Requires `shift > 0`.
pub fn poisson_poly_tail(sigma: f64, rho: f64, shift: f64, degree: u32, k: usize) -> f64 {
    assert!(shift > 0.0, "shift must be positive");
    if sigma == 0.0 || rho == 0.0 {
        return 0.0;
    }
    let j = (k + 1) as f64;
    let ratio = sigma * rho / (j + 1.0) * ((j + 1.0 + shift) / (j + shift)).powi(degree as i32);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let first = ln_term(sigma, rho, shift, degree, k + 1).exp();
    first / (1.0 - ratio) * (1.0 + 1e-12)
}

/// Smallest `k` with [`poisson_poly_tail`] below `tol`.
pub fn poisson_poly_truncation(sigma: f64, rho: f64, shift: f64, degree: u32, tol: f64) -> usize {
    let mut k = 0;
    while poisson_poly_tail(sigma, rho, shift, degree, k) >= tol {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn ln_factorial_matches_product() {
        for k in [0usize, 1, 5, 20, 63, 64, 100, 170] {
            let direct: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
            assert!(
                (ln_factorial(k) - direct).abs() < 1e-9 * direct.max(1.0),
                "k={k}"
            );
        }
    }

    #[test]
    fn tail_bound_dominates_direct_tail() {
        for &(sigma, rho, shift, degree) in &[
            (1.0, 1.0, 1.0, 0u32),
            (3.0, 1.0, 3.0, 10),
            (0.5, 2.0, 1.0, 2),
        ] {
            for k in [10usize, 20, 30] {
                let bound = poisson_poly_tail(sigma, rho, shift, degree, k);
                let direct: f64 = (k + 1..k + 400)
                    .map(|j| ln_term(sigma, rho, shift, degree, j).exp())
                    .sum();
                assert!(bound >= direct, "σ={sigma} k={k}: {bound} < {direct}");
                if bound.is_finite() {
                    assert!(bound <= 10.0 * direct + 1e-300);
                }
            }
        }
    }

    #[test]
    fn truncation_meets_tolerance() {
        let k = poisson_poly_truncation(1.0, 1.0, 1.0, 0, 1e-12);
        assert!(poisson_poly_tail(1.0, 1.0, 1.0, 0, k) < 1e-12);
        assert!(poisson_poly_tail(1.0, 1.0, 1.0, 0, k - 1) >= 1e-12);
    }

    #[test]
    fn pmf_sums_to_one() {
        let w = poisson_pmf_table(2.5, 60);
        assert!((compensated_sum(w) - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn neumaier_is_order_insensitive(mut xs in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            let a = compensated_sum(xs.iter().copied());
            xs.reverse();
            let b = compensated_sum(xs.iter().copied());
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
