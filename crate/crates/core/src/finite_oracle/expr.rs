//! Small expression language for count-vector functionals and processes.
//!
//! Expressions know which cells they read and how fast they can grow, which
//! gives locality declarations and truncation envelopes for free.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Signed;

use super::envelope::Envelope;
use super::table::{Scalar, Table};
use crate::exact::{int, ratio, to_f64, ExactRational};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    /// `k_cell >= t`
    Ge(usize, usize),
    /// `k_cell < t`
    Lt(usize, usize),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
}

impl Cond {
    pub fn holds(&self, k: &[usize]) -> bool {
        match self {
            Cond::Ge(i, t) => k[*i] >= *t,
            Cond::Lt(i, t) => k[*i] < *t,
            Cond::And(a, b) => a.holds(k) && b.holds(k),
            Cond::Or(a, b) => a.holds(k) || b.holds(k),
            Cond::Not(a) => !a.holds(k),
        }
    }

    pub fn and(self, o: Cond) -> Cond {
        Cond::And(Box::new(self), Box::new(o))
    }

    pub fn or(self, o: Cond) -> Cond {
        Cond::Or(Box::new(self), Box::new(o))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Cond {
        Cond::Not(Box::new(self))
    }

    fn collect_cells(&self, out: &mut BTreeSet<usize>) {
        match self {
            Cond::Ge(i, _) | Cond::Lt(i, _) => {
                out.insert(*i);
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.collect_cells(out);
                b.collect_cells(out);
            }
            Cond::Not(a) => a.collect_cells(out),
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Ge(i, t) => write!(f, "k{} >= {t}", i + 1),
            Cond::Lt(i, t) => write!(f, "k{} < {t}", i + 1),
            Cond::And(a, b) => write!(f, "({a} and {b})"),
            Cond::Or(a, b) => write!(f, "({a} or {b})"),
            Cond::Not(a) => write!(f, "not {a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(ExactRational),
    Count(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Ind(Cond),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(int(n))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::Const(ratio(p, q))
    }

    /// Count in cell `i` (zero based).
    pub fn count(i: usize) -> Expr {
        Expr::Count(i)
    }

    pub fn ind(c: Cond) -> Expr {
        Expr::Ind(c)
    }

    pub fn pow(self, e: u32) -> Expr {
        Expr::Pow(Box::new(self), e)
    }

    pub fn eval<T: Scalar>(&self, k: &[usize]) -> T {
        match self {
            Expr::Const(c) => T::from_rational(c),
            Expr::Count(i) => T::from_i64(k[*i] as i64),
            Expr::Add(a, b) => a.eval::<T>(k).add(&b.eval(k)),
            Expr::Sub(a, b) => a.eval::<T>(k).sub(&b.eval(k)),
            Expr::Mul(a, b) => a.eval::<T>(k).mul(&b.eval(k)),
            Expr::Neg(a) => T::zero().sub(&a.eval(k)),
            Expr::Pow(a, e) => a.eval::<T>(k).powu(*e),
            Expr::Ind(c) => {
                if c.holds(k) {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Cells whose counts the expression depends on syntactically.
    pub fn cells_read(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_cells(&mut out);
        out
    }

    fn collect_cells(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Count(i) => {
                out.insert(*i);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_cells(out);
                b.collect_cells(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_cells(out),
            Expr::Ind(c) => c.collect_cells(out),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        match self.cells_read().last() {
            Some(&i) if i >= m => Err(Error::arg(format!(
                "expression {self} reads cell {} but the space has {m} cells",
                i + 1
            ))),
            _ => Ok(()),
        }
    }

    /// Bound `|F(k)| <= env(k)` valid for every count vector.
    pub fn envelope(&self, m: usize) -> Envelope {
        match self {
            Expr::Const(c) => Envelope::constant(m, to_f64(&c.abs()) * (1.0 + 1e-15)),
            Expr::Count(i) => Envelope::count(m, *i),
            Expr::Add(a, b) | Expr::Sub(a, b) => a.envelope(m).add(&b.envelope(m)),
            Expr::Mul(a, b) => a.envelope(m).mul(&b.envelope(m)),
            Expr::Neg(a) => a.envelope(m),
            Expr::Pow(a, e) => a.envelope(m).pow(*e),
            Expr::Ind(_) => Envelope::constant(m, 1.0),
        }
    }

    pub fn tabulate<T: Scalar>(&self, m: usize, extent: usize) -> Table<T> {
        Table::from_fn(m, extent, |k| self.eval(k))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Count(i) => write!(f, "k{}", i + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Neg(a) => write!(f, "-{a}"),
            Expr::Pow(a, e) => write!(f, "{a}^{e}"),
            Expr::Ind(c) => write!(f, "1{{{c}}}"),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// A process `u(k, i)`: one expression per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProcess {
    pub name: String,
    pub components: Vec<Expr>,
}

impl CellProcess {
    pub fn new(name: impl Into<String>, components: Vec<Expr>) -> Self {
        Self {
            name: name.into(),
            components,
        }
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    /// For each cell `i`, the cells that `u(·, i)` reads.
    pub fn locality(&self) -> Vec<BTreeSet<usize>> {
        self.components.iter().map(Expr::cells_read).collect()
    }

    /// Whether `u(·, i)` ignores cells `j >= i` for every `i`.
    pub fn is_forward_adapted(&self) -> bool {
        self.locality()
            .iter()
            .enumerate()
            .all(|(i, cells)| cells.iter().all(|&j| j < i))
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.components.len() != m {
            return Err(Error::arg(format!(
                "process {} has {} components for {m} cells",
                self.name,
                self.components.len()
            )));
        }
        self.components.iter().try_for_each(|e| e.validate(m))
    }

    pub fn tabulate<T: Scalar>(&self, extent: usize) -> Vec<Table<T>> {
        let m = self.m();
        self.components
            .iter()
            .map(|e| e.tabulate(m, extent))
            .collect()
    }

    pub fn envelopes(&self) -> Vec<Envelope> {
        let m = self.m();
        self.components.iter().map(|e| e.envelope(m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn evaluation_and_locality() {
        let e = Expr::count(0) * Expr::count(2) + Expr::ratio(1, 2) - Expr::ind(Cond::Ge(1, 2));
        assert_eq!(e.eval::<ExactRational>(&[3, 2, 5]), ratio(29, 2));
        assert_eq!(e.eval::<f64>(&[3, 1, 5]), 15.5);
        assert_eq!(
            e.cells_read().into_iter().collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        assert!(e.validate(3).is_ok());
        assert!(e.validate(2).is_err());
    }

    #[test]
    fn envelope_dominates() {
        let e = (Expr::count(0) - Expr::int(3)).pow(2) * Expr::count(1) + Expr::ratio(-5, 2);
        let env = e.envelope(2);
        for a in 0..12 {
            for b in 0..12 {
                let v: f64 = e.eval(&[a, b]);
                assert!(v.abs() <= env.eval(&[a, b]), "{a} {b}");
            }
        }
    }

    #[test]
    fn adaptedness() {
        let adapted = CellProcess::new(
            "a",
            vec![
                Expr::int(1),
                Expr::count(0),
                Expr::count(0) * Expr::count(1),
            ],
        );
        assert!(adapted.is_forward_adapted());
        let anticipating = CellProcess::new("b", vec![Expr::count(1), Expr::int(0)]);
        assert!(!anticipating.is_forward_adapted());
    }
}
