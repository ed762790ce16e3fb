//! Built-in processes, random sets and label rules used by the CLI and tests.

use super::checks::{
    check_commutation, check_duality, check_isometry, check_lemma_l12_and_t11, check_prop_l221,
    check_prop_p12, OracleOptions, OracleRow, TauRule,
};
use super::expr::{CellProcess, Cond, Expr};
use super::space::CellSpace;
use crate::exact::{ratio, ExactRational};
use crate::{Error, Result};

fn c(i: usize, m: usize) -> Expr {
    Expr::count(i.min(m - 1))
}

fn ind(cond: Cond) -> Expr {
    Expr::ind(cond)
}

fn cell(i: usize, m: usize) -> usize {
    i.min(m - 1)
}

fn pad(mut v: Vec<Expr>, m: usize) -> Vec<Expr> {
    v.truncate(m);
    while v.len() < m {
        v.push(Expr::int(0));
    }
    v
}

/// A process paired with the functional used in its duality check.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub process: CellProcess,
    pub functional: Expr,
}

/// Processes for the operator checks; most read other cells, several read
/// their own cell or later cells and are therefore anticipating.
pub fn standard_processes(m: usize) -> Vec<CatalogEntry> {
    assert!(m >= 1);
    let e = |name: &str, comps: Vec<Expr>, f: Expr| CatalogEntry {
        process: CellProcess::new(name, pad(comps, m)),
        functional: f,
    };
    vec![
        e("unit", vec![Expr::int(1); m], c(0, m)),
        e(
            "step",
            vec![Expr::ratio(1, 2), Expr::int(-1), Expr::int(2)],
            ind(Cond::Ge(cell(2, m), 1)) + Expr::ratio(1, 3),
        ),
        e("cross", vec![c(1, m)], ind(Cond::Lt(cell(1, m), 2))),
        e(
            "swap",
            vec![c(1, m), c(0, m)],
            ind(Cond::Ge(cell(0, m), 1)) * ind(Cond::Ge(cell(1, m), 1)),
        ),
        e(
            "indicator",
            vec![
                ind(Cond::Ge(cell(1, m), 1)),
                ind(Cond::Ge(cell(2, m), 2)),
                ind(Cond::Lt(0, 1)),
            ],
            ind(Cond::Ge(0, 1)) - ind(Cond::Ge(cell(2, m), 1)),
        ),
        e(
            "self_reading",
            vec![
                ind(Cond::Ge(0, 1)),
                c(0, m) * ind(Cond::Ge(cell(2, m), 1)),
                ind(Cond::Lt(cell(2, m), 2)),
            ],
            ind(Cond::Lt(cell(1, m), 2)),
        ),
        e(
            "polynomial",
            vec![c(1, m) * c(2, m), Expr::int(1), c(0, m) - c(1, m)],
            c(2, m) * ind(Cond::Lt(0, 3)),
        ),
    ]
}

/// `(F, A, n)` triples for the random-indicator moment check.
pub fn l221_cases(m: usize) -> Vec<(Expr, CellProcess, usize)> {
    let det = CellProcess::new("det_first", pad(vec![Expr::int(1)], m));
    let rnd = CellProcess::new(
        "first_if_second",
        pad(vec![ind(Cond::Ge(cell(1, m), 1))], m),
    );
    let both = CellProcess::new(
        "mixed",
        pad(
            vec![
                ind(Cond::Ge(cell(1, m), 1)),
                Expr::int(0),
                ind(Cond::Lt(0, 2)),
            ],
            m,
        ),
    );
    let mutual = CellProcess::new(
        "mutual",
        pad(vec![ind(Cond::Ge(cell(1, m), 1)), ind(Cond::Ge(0, 1))], m),
    );
    let one = Expr::int(1);
    let bounded = ind(Cond::Ge(cell(1, m), 1)) + Expr::ratio(1, 2);
    let mut out = Vec::new();
    for n in 1..=4 {
        out.push((one.clone(), det.clone(), n));
    }
    for n in 2..=4 {
        out.push((one.clone(), rnd.clone(), n));
        out.push((bounded.clone(), both.clone(), n));
        out.push((bounded.clone(), mutual.clone(), n));
    }
    out
}

/// `(A_1..A_r, k_1..k_r)` for the random Charlier check.
pub fn p12_cases(m: usize) -> Vec<(Vec<CellProcess>, Vec<usize>)> {
    let det = CellProcess::new("det_first", pad(vec![Expr::int(1)], m));
    let rnd = CellProcess::new(
        "first_if_second",
        pad(vec![ind(Cond::Ge(cell(1, m), 1))], m),
    );
    let mutual = CellProcess::new(
        "mutual",
        pad(vec![ind(Cond::Ge(cell(1, m), 1)), ind(Cond::Ge(0, 1))], m),
    );
    let a1 = CellProcess::new(
        "first_if_second_busy",
        pad(vec![ind(Cond::Ge(cell(1, m), 1))], m),
    );
    let mut comps = vec![ind(Cond::Lt(cell(1, m), 1))];
    if m >= 3 {
        comps.push(Expr::int(0));
        comps.push(ind(Cond::Ge(0, 1)));
    }
    let a2 = CellProcess::new("complement", pad(comps, m));
    vec![
        (vec![det.clone()], vec![1]),
        (vec![det.clone()], vec![2]),
        (vec![rnd.clone()], vec![2]),
        (vec![rnd], vec![3]),
        (vec![mutual.clone()], vec![2]),
        (vec![mutual], vec![4]),
        (vec![a1.clone(), a2.clone()], vec![1, 1]),
        (vec![a1.clone(), a2.clone()], vec![2, 1]),
        (vec![a1, a2], vec![2, 3]),
    ]
}

/// Label rules with their `g` tables.
pub fn tau_cases(m: usize) -> Vec<(TauRule, Vec<ExactRational>)> {
    let identity = TauRule {
        name: "identity".into(),
        labels: (0..m).map(|i| Expr::int(i as i64)).collect(),
        declared_adapted: true,
    };
    let g_id: Vec<_> = (0..m).map(|i| ratio(2 * i as i64 - 1, 10)).collect();
    let mut adapted = vec![Expr::int(0)];
    if m >= 2 {
        adapted.push(Expr::int(1) + ind(Cond::Ge(0, 1)));
    }
    if m >= 3 {
        adapted.push(Expr::int(3) + ind(Cond::Ge(1, 1)) * ind(Cond::Lt(0, 2)));
    }
    adapted.truncate(m);
    let adapted = TauRule {
        name: "adapted".into(),
        labels: adapted,
        declared_adapted: true,
    };
    let g_ad = vec![
        ratio(1, 5),
        ratio(-1, 10),
        ratio(3, 10),
        ratio(3, 20),
        ratio(-1, 4),
    ];
    let mut out = vec![(identity, g_id), (adapted, g_ad)];
    if m >= 2 {
        out.push(cyclic_counterexample(m));
    }
    out
}

/// Two cells whose labels read each other: the second-order cyclic product
/// is nonzero while each cell ignores its own count.
pub fn cyclic_counterexample(m: usize) -> (TauRule, Vec<ExactRational>) {
    assert!(m >= 2);
    let mut labels = vec![ind(Cond::Ge(1, 1)), Expr::int(2) + ind(Cond::Ge(0, 1))];
    labels.extend((2..m).map(|_| Expr::int(4)));
    (
        TauRule {
            name: "cyclic_pair".into(),
            labels,
            declared_adapted: false,
        },
        vec![
            ratio(1, 10),
            ratio(-1, 5),
            ratio(3, 20),
            ratio(1, 4),
            ratio(1, 20),
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleCheck {
    Duality,
    Isometry,
    Commutation,
    L221,
    P12,
    L12,
    T11,
}

impl OracleCheck {
    pub const ALL: [OracleCheck; 7] = [
        OracleCheck::Duality,
        OracleCheck::Isometry,
        OracleCheck::Commutation,
        OracleCheck::L221,
        OracleCheck::P12,
        OracleCheck::L12,
        OracleCheck::T11,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "duality" => OracleCheck::Duality,
            "isometry" => OracleCheck::Isometry,
            "commutation" => OracleCheck::Commutation,
            "l221" => OracleCheck::L221,
            "p12" => OracleCheck::P12,
            "l12" => OracleCheck::L12,
            "t11" => OracleCheck::T11,
            other => return Err(Error::arg(format!("unknown oracle check {other:?}"))),
        })
    }

    /// Truncation used when none is given.
    pub fn default_trunc(self) -> usize {
        match self {
            OracleCheck::Duality | OracleCheck::Isometry | OracleCheck::Commutation => 8,
            _ => 16,
        }
    }
}

/// Runs one family of checks over the built-in catalog.
pub fn run_check(
    check: OracleCheck,
    space: &CellSpace,
    opts: OracleOptions,
) -> Result<Vec<OracleRow>> {
    let m = space.m();
    let mut rows = Vec::new();
    match check {
        OracleCheck::Duality => {
            for e in standard_processes(m) {
                rows.push(check_duality(space, &e.process, &e.functional, opts)?);
            }
        }
        OracleCheck::Isometry => {
            for e in standard_processes(m) {
                rows.push(check_isometry(space, &e.process, opts)?);
            }
        }
        OracleCheck::Commutation => {
            for e in standard_processes(m) {
                rows.push(check_commutation(space, &e.process)?);
            }
        }
        OracleCheck::L221 => {
            for (f, a, n) in l221_cases(m) {
                rows.push(check_prop_l221(space, &f, &a, n, opts)?);
            }
        }
        OracleCheck::P12 => {
            for (sets, orders) in p12_cases(m) {
                rows.push(check_prop_p12(space, &sets, &orders, opts)?);
            }
        }
        OracleCheck::L12 | OracleCheck::T11 => {
            let prefix = if check == OracleCheck::L12 {
                "l12."
            } else {
                "t11."
            };
            for (tau, g) in tau_cases(m) {
                let n_max = 4;
                for r in check_lemma_l12_and_t11(space, &tau, &g, n_max)? {
                    if r.check_id.starts_with(prefix) {
                        rows.push(r);
                    }
                }
            }
        }
    }
    Ok(rows)
}
