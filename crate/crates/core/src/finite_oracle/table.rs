//! Functionals tabulated on a box `{0..=extent}^m` of count vectors.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exact::{to_f64, ExactRational};

/// Arithmetic needed by the oracle, implemented for `f64` and exact rationals.
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(q: &ExactRational) -> Self;
    fn from_i64(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero_value(&self) -> bool;
    fn abs_value(&self) -> Self;

    fn powu(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(q: &ExactRational) -> Self {
        to_f64(q)
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(q: &ExactRational) -> Self {
        q.clone()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

/// Values on `{0..=extent}^m`; entries with every coordinate `<= valid` are
/// meaningful, the rest are placeholders left by shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    m: usize,
    extent: usize,
    valid: usize,
    data: Vec<T>,
}

impl<T: Scalar> Table<T> {
    pub fn from_fn(m: usize, extent: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len = (extent + 1).pow(m as u32);
        let mut data = Vec::with_capacity(len);
        let mut k = vec![0usize; m];
        for _ in 0..len {
            data.push(f(&k));
            advance(&mut k, extent);
        }
        Table {
            m,
            extent,
            valid: extent,
            data,
        }
    }

    /// Wraps storage-order data; entries outside `{0..=valid}^m` are zeroed.
    pub(crate) fn from_raw(m: usize, extent: usize, valid: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), (extent + 1).pow(m as u32), "data length");
        let mut t = Table {
            m,
            extent,
            valid: valid.min(extent),
            data,
        };
        t.clear_invalid();
        t
    }

    pub fn constant(m: usize, extent: usize, c: T) -> Self {
        Self::from_fn(m, extent, |_| c.clone())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    /// Largest coordinate bound on which the values are meaningful.
    pub fn valid(&self) -> usize {
        self.valid
    }

    pub fn index(&self, k: &[usize]) -> usize {
        k.iter()
            .rev()
            .fold(0, |acc, &ki| acc * (self.extent + 1) + ki)
    }

    pub fn get(&self, k: &[usize]) -> &T {
        &self.data[self.index(k)]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    fn map_points(&self, valid: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let mut out = Self::from_fn(self.m, self.extent, |k| {
            if k.iter().all(|&x| x <= valid) {
                f(k)
            } else {
                T::zero()
            }
        });
        out.valid = valid;
        out
    }

    /// `k ↦ F(k + offset)`.
    pub fn shifted(&self, offset: &[usize]) -> Self {
        let s = offset.iter().copied().max().unwrap_or(0);
        let valid = self.valid.saturating_sub(s);
        let mut buf = vec![0usize; self.m];
        self.map_points(valid, |k| {
            for i in 0..k.len() {
                buf[i] = k[i] + offset[i];
            }
            self.get(&buf).clone()
        })
    }

    /// Forward difference `(D_i F)(k) = F(k + e_i) − F(k)`.
    pub fn diff(&self, i: usize) -> Self {
        let mut e = vec![0; self.m];
        e[i] = 1;
        self.shifted(&e).zip(self, |a, b| a.sub(b))
    }

    pub fn zip(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        assert_eq!(
            (self.m, self.extent),
            (other.m, other.extent),
            "table shapes differ"
        );
        let valid = self.valid.min(other.valid);
        let mut out = Table {
            m: self.m,
            extent: self.extent,
            valid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        };
        out.clear_invalid();
        out
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Table {
            m: self.m,
            extent: self.extent,
            valid: self.valid,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.mul(b))
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.mul(c))
    }

    fn clear_invalid(&mut self) {
        if self.valid == self.extent {
            return;
        }
        let mut k = vec![0usize; self.m];
        for v in self.data.iter_mut() {
            if k.iter().any(|&x| x > self.valid) {
                *v = T::zero();
            }
            advance(&mut k, self.extent);
        }
    }

    /// Cell form of the Skorohod integral:
    /// `δ(u)(k) = Σ_i k_i u_i(k − e_i) − Σ_i σ_i u_i(k)`.
    pub fn skorohod(u: &[Self], sigma: &[T]) -> Self {
        let first = &u[0];
        let m = first.m;
        let valid = u.iter().map(|t| t.valid).min().unwrap();
        let mut buf = vec![0usize; m];
        first.map_points(valid, |k| {
            let mut acc = T::zero();
            for (i, ui) in u.iter().enumerate() {
                if k[i] > 0 {
                    buf.copy_from_slice(k);
                    buf[i] -= 1;
                    acc = acc.add(&T::from_i64(k[i] as i64).mul(ui.get(&buf)));
                }
                acc = acc.sub(&sigma[i].mul(ui.get(k)));
            }
            acc
        })
    }

    /// Points of `{0..=bound}^m` where the two tables differ.
    pub fn mismatches(&self, other: &Self, bound: usize) -> Vec<Vec<usize>> {
        assert!(
            bound <= self.valid && bound <= other.valid,
            "comparison outside valid region"
        );
        let mut out = Vec::new();
        let mut k = vec![0usize; self.m];
        for idx in 0..self.data.len() {
            if k.iter().all(|&x| x <= bound) && self.data[idx] != other.data[idx] {
                out.push(k.clone());
            }
            advance(&mut k, self.extent);
        }
        out
    }
}

/// Steps a count vector through `{0..=extent}^m` in storage order.
pub(crate) fn advance(k: &mut [usize], extent: usize) {
    for x in k.iter_mut() {
        if *x < extent {
            *x += 1;
            return;
        }
        *x = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    #[test]
    fn diff_examples() {
        let f = Table::<f64>::from_fn(2, 5, |k| k[0] as f64);
        let d = f.diff(0);
        assert_eq!(d.valid(), 4);
        assert_eq!(*d.get(&[3, 2]), 1.0);
        let sq = Table::<f64>::from_fn(2, 5, |k| (k[0] * k[0]) as f64);
        assert_eq!(*sq.diff(0).get(&[3, 1]), 7.0);
        let ind = Table::<f64>::from_fn(2, 5, |k| if k[1] >= 1 { 1.0 } else { 0.0 });
        assert!(ind.diff(0).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn skorohod_of_constant_is_compensated_count() {
        let sigma = vec![ratio(1, 2), int(2)];
        let u = vec![Table::<BigRational>::constant(2, 4, int(1)); 2];
        let d = Table::skorohod(&u, &sigma);
        assert_eq!(d.get(&[3, 1]), &(int(4) - ratio(5, 2)));
    }

    #[test]
    fn skorohod_cross_cell() {
        // u(k,1) = k_2, u(k,2) = 0: δ(u) = k_1 k_2 − σ_1 k_2
        let sigma = vec![int(1), ratio(3, 4)];
        let u = vec![
            Table::<BigRational>::from_fn(2, 4, |k| int(k[1] as i64)),
            Table::<BigRational>::constant(2, 4, int(0)),
        ];
        let d = Table::skorohod(&u, &sigma);
        for a in 0..=4 {
            for b in 0..=4 {
                assert_eq!(d.get(&[a, b]), &int((a * b) as i64 - b as i64));
            }
        }
    }

    #[test]
    fn index_is_storage_order() {
        let t = Table::<f64>::from_fn(3, 2, |k| (k[0] + 3 * k[1] + 9 * k[2]) as f64);
        for (i, v) in t.data().iter().enumerate() {
            assert_eq!(*v as usize, i);
        }
        assert_eq!(t.index(&[2, 1, 1]), 2 + 3 + 9);
    }
}
