//! Exact integer combinatorics: Stirling numbers, associated Stirling numbers,
//! partition counts and the identities linking them.
//!
//! Everything in this module is arbitrary precision; there is no floating
//! point. Tables are memoized once up to [`DEFAULT_MAX_N`].

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact::{binomial, factorial};
use crate::{Error, Result};

/// Largest index served by the shared memoized table.
pub const DEFAULT_MAX_N: usize = 64;

/// Triangular tables of s(n,k), S(n,k) and S₂(n,a) for `0 <= n <= max_n`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    max_n: usize,
    s1: Vec<Vec<BigInt>>,
    s2: Vec<Vec<BigInt>>,
    s2_assoc: Vec<Vec<BigInt>>,
}

impl StirlingTable {
    pub fn new(max_n: usize) -> Self {
        let mut s1 = vec![vec![BigInt::zero(); max_n + 1]; max_n + 1];
        let mut s2 = s1.clone();
        let mut s2_assoc = s1.clone();
        s1[0][0] = BigInt::one();
        s2[0][0] = BigInt::one();
        s2_assoc[0][0] = BigInt::one();
        for n in 1..=max_n {
            let m = BigInt::from(n - 1);
            for k in 1..=n {
                // s(n,k) = s(n-1,k-1) - (n-1) s(n-1,k)
                s1[n][k] = &s1[n - 1][k - 1] - &m * &s1[n - 1][k];
                // S(n,k) = k S(n-1,k) + S(n-1,k-1)
                s2[n][k] = BigInt::from(k) * &s2[n - 1][k] + &s2[n - 1][k - 1];
            }
            // S2(n,a) = a S2(n-1,a) + (n-1) S2(n-2,a-1)
            for a in 1..=n / 2 {
                let keep = BigInt::from(a) * &s2_assoc[n - 1][a];
                let new_block = if n >= 2 {
                    &m * &s2_assoc[n - 2][a - 1]
                } else {
                    BigInt::zero()
                };
                s2_assoc[n][a] = keep + new_block;
            }
        }
        StirlingTable {
            max_n,
            s1,
            s2,
            s2_assoc,
        }
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// Signed Stirling number of the first kind; zero outside `k <= n`.
    pub fn first(&self, n: usize, k: usize) -> &BigInt {
        self.lookup(&self.s1, n, k)
    }

    /// Stirling number of the second kind; zero outside `k <= n`.
    pub fn second(&self, n: usize, k: usize) -> &BigInt {
        self.lookup(&self.s2, n, k)
    }

    /// Partitions of an n-set into `a` blocks of size at least two.
    pub fn assoc(&self, n: usize, a: usize) -> &BigInt {
        self.lookup(&self.s2_assoc, n, a)
    }

    fn lookup<'a>(&'a self, t: &'a [Vec<BigInt>], n: usize, k: usize) -> &'a BigInt {
        static ZERO: OnceLock<BigInt> = OnceLock::new();
        assert!(
            n <= self.max_n,
            "index {n} beyond table size {}",
            self.max_n
        );
        if k > n {
            ZERO.get_or_init(BigInt::zero)
        } else {
            &t[n][k]
        }
    }
}

/// Shared table, built on first use.
pub fn table() -> &'static StirlingTable {
    static TABLE: OnceLock<StirlingTable> = OnceLock::new();
    TABLE.get_or_init(|| StirlingTable::new(DEFAULT_MAX_N))
}

fn check_range(n: usize, k: usize) -> Result<()> {
    if n > DEFAULT_MAX_N {
        return Err(Error::arg(format!(
            "n = {n} exceeds the table cap {DEFAULT_MAX_N}"
        )));
    }
    if k > n {
        return Err(Error::arg(format!("need k <= n, got n = {n}, k = {k}")));
    }
    Ok(())
}

pub fn stirling_first(n: usize, k: usize) -> Result<BigInt> {
    check_range(n, k)?;
    Ok(table().first(n, k).clone())
}

pub fn stirling_second(n: usize, k: usize) -> Result<BigInt> {
    check_range(n, k)?;
    Ok(table().second(n, k).clone())
}

/// S₂(n,a); zero whenever `n < 2a`.
pub fn stirling_s2_assoc(n: usize, a: usize) -> Result<BigInt> {
    if n > DEFAULT_MAX_N {
        return Err(Error::arg(format!(
            "n = {n} exceeds the table cap {DEFAULT_MAX_N}"
        )));
    }
    Ok(table().assoc(n, a).clone())
}

/// S(n,k) from the alternating sum `(1/k!) Σ_l (-1)^{k-l} C(k,l) l^n`,
/// independent of the triangular recurrence used by [`StirlingTable`].
pub fn stirling_second_explicit(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for l in 0..=k {
        let term = binomial(k, l) * num_traits::pow(BigInt::from(l), n);
        if (k - l).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc / factorial(k)
}

/// Sequences `0 = k_1 << k_2 << ... << k_{a+1} = n` where `x << y` means
/// `x < y - 1`, i.e. consecutive gaps of at least two.
///
/// Yields each sequence as a slice of length `a + 1`.
#[derive(Debug, Clone)]
pub struct GappedSequences {
    n: usize,
    seq: Vec<usize>,
    started: bool,
    done: bool,
}

impl GappedSequences {
    pub fn new(n: usize, a: usize) -> Self {
        let mut it = GappedSequences {
            n,
            seq: vec![0; a + 1],
            started: false,
            done: false,
        };
        if a == 0 {
            // only the one-element sequence (0) with end n = 0
            it.done = n != 0;
        } else if 2 * a > n {
            it.done = true;
        } else {
            for i in 1..a {
                it.seq[i] = 2 * i;
            }
            it.seq[a] = n;
        }
        it
    }

    /// Advances to the next sequence; returns `None` when exhausted.
    pub fn next_seq(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.seq);
        }
        let a = self.seq.len() - 1;
        // bump the rightmost free interior position that still leaves room
        let mut i = a;
        while i > 1 {
            i -= 1;
            let limit = self.n - 2 * (a - i);
            if self.seq[i] < limit {
                self.seq[i] += 1;
                for j in i + 1..a {
                    self.seq[j] = self.seq[j - 1] + 2;
                }
                return Some(&self.seq);
            }
        }
        self.done = true;
        None
    }
}

/// S₂(n,a) from the gapped-sequence sum `Σ Π_l C(k_{l+1}-1, k_l)`.
pub fn s2_assoc_gapped(n: usize, a: usize) -> BigInt {
    let mut total = BigInt::zero();
    let mut seqs = GappedSequences::new(n, a);
    while let Some(k) = seqs.next_seq() {
        let mut prod = BigInt::one();
        for w in k.windows(2) {
            prod *= binomial(w[1] - 1, w[0]);
        }
        total += prod;
    }
    total
}

/// Restricted-growth strings: `labels[0] = 0` and
/// `labels[i] <= 1 + max(labels[..i])`, one per set partition of `0..n`.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    labels: Vec<usize>,
    maxes: Vec<usize>,
    started: bool,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        SetPartitions {
            labels: vec![0; n],
            maxes: vec![0; n],
            started: false,
            done: false,
        }
    }

    pub fn next_partition(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.labels);
        }
        let n = self.labels.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            if self.labels[i] <= self.maxes[i - 1] {
                self.labels[i] += 1;
                self.maxes[i] = self.maxes[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.maxes[j] = self.maxes[i];
                }
                return Some(&self.labels);
            }
        }
        self.done = true;
        None
    }

    /// Block sizes of a restricted-growth string.
    pub fn block_sizes(labels: &[usize]) -> Vec<usize> {
        let blocks = labels.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0; blocks];
        for &l in labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Shape of a partition counted by [`partition_count`]: ordered sizes
/// `l_1, ..., l_a` of the listed blocks plus `b` designated singletons.
///
/// The listed blocks are ordered by their largest element, so `[2, 1]` and
/// `[1, 2]` are different shapes. Designated singletons are size-one blocks
/// kept apart from listed blocks of size one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionShape {
    pub block_sizes: Vec<usize>,
    pub singleton_count: usize,
}

impl PartitionShape {
    pub fn new(block_sizes: Vec<usize>, singleton_count: usize) -> Self {
        PartitionShape {
            block_sizes,
            singleton_count,
        }
    }

    pub fn ground_size(&self) -> usize {
        self.block_sizes.iter().sum::<usize>() + self.singleton_count
    }
}

/// Number of partitions of a set of `Σ l_i + b` elements with the given shape.
///
/// Sums over the positions `0 = r_{b+1} < ... < r_0 = a+b+1` of the singletons
/// among the blocks (ordered by largest element); a listed block preceded by
/// `s` singletons contributes `C(l_1+..+l_p+s-1, l_1+..+l_{p-1}+s)`.
pub fn partition_count(shape: &PartitionShape) -> Result<BigInt> {
    let b = shape.singleton_count;
    let a = shape.block_sizes.len();
    if shape.block_sizes.contains(&0) {
        return Err(Error::arg("block sizes must be at least 1"));
    }
    if a == 0 {
        return if b == 0 {
            Ok(BigInt::one())
        } else {
            Err(Error::arg(
                "shape without listed blocks but with a nonempty ground set",
            ))
        };
    }
    let mut prefix = vec![0usize; a + 1];
    for (p, &l) in shape.block_sizes.iter().enumerate() {
        prefix[p + 1] = prefix[p] + l;
    }
    let slots = a + b;
    let mut total = BigInt::zero();
    // choose the b singleton ranks among 1..=a+b (increasing)
    let mut mids: Vec<usize> = (1..=b).collect();
    loop {
        // r_0 = a+b+1 > r_1 > ... > r_b > r_{b+1} = 0
        let mut r = Vec::with_capacity(b + 2);
        r.push(slots + 1);
        r.extend(mids.iter().rev().copied());
        r.push(0);
        let mut prod = BigInt::one();
        for q in 0..=b {
            let lo = r[q + 1] + q + 1 - b;
            let hi = r[q] + q - 1 - b;
            let before = b - q;
            for p in lo..=hi {
                prod *= binomial(prefix[p] + before - 1, prefix[p - 1] + before);
            }
        }
        total += prod;
        // next combination
        let mut i = b;
        loop {
            if i == 0 {
                return Ok(total);
            }
            i -= 1;
            if mids[i] < slots - (b - 1 - i) {
                mids[i] += 1;
                for j in i + 1..b {
                    mids[j] = mids[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Brute-force counterparts used as independent oracles.
pub mod enumerate {
    use num_bigint::BigInt;

    use super::{PartitionShape, SetPartitions};

    /// Counts partitions of `0..n` into `k` blocks by enumeration.
    pub fn count_blocks(n: usize, k: usize) -> BigInt {
        let mut it = SetPartitions::new(n);
        let mut count = 0u64;
        while let Some(p) = it.next_partition() {
            if SetPartitions::block_sizes(p).len() == k {
                count += 1;
            }
        }
        BigInt::from(count)
    }

    /// Counts partitions of `0..n` into `a` blocks, all of size at least two.
    pub fn count_assoc(n: usize, a: usize) -> BigInt {
        let mut it = SetPartitions::new(n);
        let mut count = 0u64;
        while let Some(p) = it.next_partition() {
            let sizes = SetPartitions::block_sizes(p);
            if sizes.len() == a && sizes.iter().all(|&s| s >= 2) {
                count += 1;
            }
        }
        BigInt::from(count)
    }

    /// Counts shapes directly: every partition into `a + b` blocks, every
    /// choice of `b` singleton blocks to designate, listed blocks sorted by
    /// their largest element must have exactly the requested sizes.
    pub fn count_shape(shape: &PartitionShape) -> BigInt {
        let n = shape.ground_size();
        let a = shape.block_sizes.len();
        let b = shape.singleton_count;
        let mut it = SetPartitions::new(n);
        let mut count = 0u64;
        while let Some(p) = it.next_partition() {
            let nblocks = p.iter().max().map_or(0, |m| m + 1);
            if nblocks != a + b {
                continue;
            }
            let mut sizes = vec![0usize; nblocks];
            let mut maxes = vec![0usize; nblocks];
            for (elem, &l) in p.iter().enumerate() {
                sizes[l] += 1;
                maxes[l] = elem;
            }
            let singles: Vec<usize> = (0..nblocks).filter(|&i| sizes[i] == 1).collect();
            if singles.len() < b {
                continue;
            }
            for_each_subset(singles.len(), b, &mut |chosen: &[usize]| {
                let designated: Vec<usize> = chosen.iter().map(|&c| singles[c]).collect();
                let mut rest: Vec<usize> =
                    (0..nblocks).filter(|i| !designated.contains(i)).collect();
                rest.sort_by_key(|&i| maxes[i]);
                if rest
                    .iter()
                    .map(|&i| sizes[i])
                    .eq(shape.block_sizes.iter().copied())
                {
                    count += 1;
                }
            });
        }
        BigInt::from(count)
    }

    fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
        fn rec(
            start: usize,
            n: usize,
            k: usize,
            cur: &mut Vec<usize>,
            f: &mut dyn FnMut(&[usize]),
        ) {
            if cur.len() == k {
                f(cur);
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, f);
                cur.pop();
            }
        }
        rec(0, n, k, &mut Vec::with_capacity(k), f);
    }
}

/// One evaluated instance of an exact identity.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCase {
    pub identity: &'static str,
    pub indices: Vec<(&'static str, usize)>,
    pub lhs: BigInt,
    pub rhs: BigInt,
}

impl IdentityCase {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

#[derive(Debug, Clone, Default)]
pub struct IdentityReport {
    pub cases: Vec<IdentityCase>,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.cases.iter().all(IdentityCase::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCase> {
        self.cases.iter().filter(|c| !c.holds())
    }

    pub fn extend(&mut self, other: IdentityReport) {
        self.cases.extend(other.cases);
    }
}

fn signed(term: BigInt, negative: bool) -> BigInt {
    if negative {
        -term
    } else {
        term
    }
}

fn require_table(max_n: usize) -> Result<&'static StirlingTable> {
    if max_n > DEFAULT_MAX_N {
        return Err(Error::arg(format!(
            "max_n = {max_n} exceeds the table cap {DEFAULT_MAX_N}"
        )));
    }
    Ok(table())
}

/// `Σ_{k=l}^{n} S(n,k) s(k,l) = 1{n = l}` for all `0 <= l <= n <= max_n`.
pub fn check_identity_inv(max_n: usize) -> Result<IdentityReport> {
    let t = require_table(max_n)?;
    let mut report = IdentityReport::default();
    for n in 0..=max_n {
        for l in 0..=n {
            let lhs: BigInt = (l..=n).map(|k| t.second(n, k) * t.first(k, l)).sum();
            let rhs = if n == l {
                BigInt::one()
            } else {
                BigInt::zero()
            };
            report.cases.push(IdentityCase {
                identity: "stirling_inversion",
                indices: vec![("n", n), ("l", l)],
                lhs,
                rhs,
            });
        }
    }
    Ok(report)
}

/// S₂ in terms of S and its inverse, for every `n <= max_n`:
///
/// * `S₂(n,c) = Σ_a (-1)^a C(n,a) S(n-a, c-a)`
/// * `S(n,a) = Σ_c C(n,c) S₂(n-c, a-c)`
pub fn check_identity_id_fd(max_n: usize) -> Result<IdentityReport> {
    let t = require_table(max_n)?;
    let mut report = IdentityReport::default();
    for n in 0..=max_n {
        for c in 0..=n {
            let rhs: BigInt = (0..=c)
                .map(|a| signed(binomial(n, a) * t.second(n - a, c - a), a % 2 == 1))
                .sum();
            report.cases.push(IdentityCase {
                identity: "assoc_from_second",
                indices: vec![("n", n), ("c", c)],
                lhs: t.assoc(n, c).clone(),
                rhs,
            });
        }
        for a in 0..=n {
            let rhs: BigInt = (0..=a)
                .map(|c| binomial(n, c) * t.assoc(n - c, a - c))
                .sum();
            report.cases.push(IdentityCase {
                identity: "second_from_assoc",
                indices: vec![("n", n), ("a", a)],
                lhs: t.second(n, a).clone(),
                rhs,
            });
        }
    }
    Ok(report)
}

fn lemma_ll_case(t: &StirlingTable, a: usize, b: usize, n: usize) -> IdentityCase {
    let lhs = binomial(a + b, a) * t.second(n, a + b);
    let mut rhs = BigInt::zero();
    for l in 0..=b {
        for k in l..=n {
            let s = t.second(k - l, a);
            let s2 = t.assoc(n - k, b - l);
            if s.is_zero() || s2.is_zero() {
                continue;
            }
            rhs += binomial(n, k) * binomial(k, l) * s * s2;
        }
    }
    IdentityCase {
        identity: "binomial_stirling_split",
        indices: vec![("a", a), ("b", b), ("n", n)],
        lhs,
        rhs,
    }
}

/// `C(a+b,a) S(n,a+b) = Σ_{l<=b} Σ_{k=l}^{n} C(n,k) C(k,l) S(k-l,a) S₂(n-k,b-l)`.
pub fn check_lemma_ll(a: usize, b: usize, n: usize) -> Result<IdentityReport> {
    let t = require_table(n.max(a + b))?;
    Ok(IdentityReport {
        cases: vec![lemma_ll_case(t, a, b, n)],
    })
}

/// [`check_lemma_ll`] for every `a, b <= n <= max_n`.
pub fn check_lemma_ll_all(max_n: usize) -> Result<IdentityReport> {
    let t = require_table(2 * max_n)?;
    let mut report = IdentityReport::default();
    for n in 0..=max_n {
        for a in 0..=n {
            for b in 0..=n {
                report.cases.push(lemma_ll_case(t, a, b, n));
            }
        }
    }
    Ok(report)
}

/// Coefficients of the falling factorial `x(x-1)...(x-n+1)` in powers of x.
pub fn falling_factorial_coefficients(n: usize) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::one()];
    for i in 0..n {
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        let shift = BigInt::from(i);
        for (d, c) in coeffs.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= c * &shift;
        }
        coeffs = next;
    }
    coeffs
}

/// Convenience for tests and reports: `|s(n,k)|`, the cycle count.
pub fn unsigned_first(n: usize, k: usize) -> Result<BigInt> {
    Ok(stirling_first(n, k)?.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts permutations of `0..n` with exactly `k` cycles.
    fn count_permutations_by_cycles(n: usize, k: usize) -> u64 {
        fn permute(p: &mut Vec<usize>, i: usize, n: usize, k: usize, count: &mut u64) {
            if i == n {
                let mut seen = vec![false; n];
                let mut cycles = 0;
                for s in 0..n {
                    if !seen[s] {
                        cycles += 1;
                        let mut j = s;
                        while !seen[j] {
                            seen[j] = true;
                            j = p[j];
                        }
                    }
                }
                if cycles == k {
                    *count += 1;
                }
                return;
            }
            for j in i..n {
                p.swap(i, j);
                permute(p, i + 1, n, k, count);
                p.swap(i, j);
            }
        }
        let mut p: Vec<usize> = (0..n).collect();
        let mut count = 0;
        permute(&mut p, 0, n, k, &mut count);
        count
    }

    #[test]
    fn first_kind_examples() {
        assert_eq!(stirling_first(0, 0).unwrap(), BigInt::one());
        assert_eq!(stirling_first(3, 1).unwrap(), BigInt::from(2));
        assert_eq!(stirling_first(4, 2).unwrap(), BigInt::from(11));
        assert_eq!(stirling_first(4, 3).unwrap(), BigInt::from(-6));
        assert!(stirling_first(2, 3).is_err());
        assert!(stirling_first(65, 1).is_err());
    }

    #[test]
    fn first_kind_counts_cycles() {
        for n in 0..=6 {
            for k in 0..=n {
                let expected = count_permutations_by_cycles(n, k);
                assert_eq!(
                    unsigned_first(n, k).unwrap(),
                    BigInt::from(expected),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn first_kind_matches_falling_factorial() {
        for n in 0..=18 {
            let coeffs = falling_factorial_coefficients(n);
            for (k, c) in coeffs.iter().enumerate() {
                assert_eq!(table().first(n, k), c, "n={n} k={k}");
            }
            assert_eq!(table().first(n, n), &BigInt::one());
            if n >= 1 {
                assert!(table().first(n, 0).is_zero());
            }
        }
    }

    #[test]
    fn second_kind_examples() {
        assert_eq!(stirling_second(4, 2).unwrap(), BigInt::from(7));
        assert_eq!(stirling_second(3, 2).unwrap(), BigInt::from(3));
        for n in 0..10 {
            assert_eq!(stirling_second(n, n).unwrap(), BigInt::one());
        }
        assert!(stirling_second(1, 2).is_err());
    }

    #[test]
    fn second_kind_two_routes_agree() {
        for n in 0..=18 {
            for k in 0..=n {
                assert_eq!(
                    &stirling_second_explicit(n, k),
                    table().second(n, k),
                    "n={n} k={k}"
                );
                assert!(!table().second(n, k).is_negative());
            }
        }
    }

    #[test]
    fn second_kind_matches_enumeration() {
        for n in 0..=8 {
            for k in 0..=n {
                assert_eq!(
                    &enumerate::count_blocks(n, k),
                    table().second(n, k),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn assoc_examples() {
        assert_eq!(stirling_s2_assoc(2, 1).unwrap(), BigInt::one());
        assert_eq!(stirling_s2_assoc(4, 2).unwrap(), BigInt::from(3));
        assert_eq!(stirling_s2_assoc(6, 2).unwrap(), BigInt::from(25));
        assert!(stirling_s2_assoc(5, 3).unwrap().is_zero());
        assert_eq!(stirling_s2_assoc(0, 0).unwrap(), BigInt::one());
    }

    #[test]
    fn assoc_three_routes_agree() {
        for n in 0..=14 {
            for a in 0..=n {
                let rec = table().assoc(n, a).clone();
                assert_eq!(s2_assoc_gapped(n, a), rec, "gapped n={n} a={a}");
                if n <= 10 {
                    assert_eq!(enumerate::count_assoc(n, a), rec, "enum n={n} a={a}");
                }
                if n < 2 * a {
                    assert!(rec.is_zero());
                }
            }
        }
    }

    #[test]
    fn gapped_sequences_are_gapped() {
        let mut it = GappedSequences::new(9, 3);
        let mut count = 0;
        while let Some(s) = it.next_seq() {
            assert_eq!(s[0], 0);
            assert_eq!(*s.last().unwrap(), 9);
            assert!(s.windows(2).all(|w| w[0] + 1 < w[1]));
            count += 1;
        }
        // interior (k2, k3) with 2 <= k2, k2 + 2 <= k3 <= 7
        assert_eq!(count, 10);
        assert!(GappedSequences::new(3, 2).next_seq().is_none());
    }

    #[test]
    fn set_partitions_count_bell_numbers() {
        let bell = [1u64, 1, 2, 5, 15, 52, 203, 877];
        for (n, &b) in bell.iter().enumerate() {
            let mut it = SetPartitions::new(n);
            let mut count = 0;
            while it.next_partition().is_some() {
                count += 1;
            }
            assert_eq!(count, b, "n={n}");
        }
    }

    #[test]
    fn partition_count_examples() {
        let count = |l: Vec<usize>, b| partition_count(&PartitionShape::new(l, b)).unwrap();
        assert_eq!(count(vec![2], 0), BigInt::one());
        assert_eq!(count(vec![2], 1), BigInt::from(3));
        assert_eq!(count(vec![2, 2], 0), BigInt::from(3));
        // order of distinct sizes matters: blocks are ranked by largest element
        assert_eq!(count(vec![2, 1], 0), BigInt::one());
        assert_eq!(count(vec![1, 2], 0), BigInt::from(2));
        assert!(partition_count(&PartitionShape::new(vec![], 2)).is_err());
        assert!(partition_count(&PartitionShape::new(vec![0], 0)).is_err());
    }

    #[test]
    fn partition_count_matches_enumeration() {
        fn compositions(m: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if parts == 0 {
                if m == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for f in 1..=m {
                cur.push(f);
                compositions(m - f, parts - 1, cur, out);
                cur.pop();
            }
        }
        for n in 1..=9 {
            for b in 0..n {
                for a in 1..=n - b {
                    let mut shapes = Vec::new();
                    compositions(n - b, a, &mut Vec::new(), &mut shapes);
                    let mut sum = BigInt::zero();
                    for l in shapes {
                        let shape = PartitionShape::new(l, b);
                        let c = partition_count(&shape).unwrap();
                        if n <= 7 {
                            assert_eq!(c, enumerate::count_shape(&shape), "{shape:?}");
                        }
                        sum += c;
                    }
                    assert_eq!(
                        sum,
                        binomial(n, b) * table().second(n - b, a),
                        "n={n} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn inversion_examples() {
        let report = check_identity_inv(8).unwrap();
        let find = |n, l| {
            report
                .cases
                .iter()
                .find(|c| c.indices == vec![("n", n), ("l", l)])
                .unwrap()
                .clone()
        };
        assert_eq!(find(5, 5).lhs, BigInt::one());
        assert!(find(5, 3).lhs.is_zero());
        assert!(find(8, 1).lhs.is_zero());
        assert!(report.all_hold());
    }

    #[test]
    fn id_fd_examples() {
        let t = table();
        // n=2, c=1: S2(2,1) = S(2,1) - 2 S(1,0)
        assert_eq!(
            t.assoc(2, 1),
            &(t.second(2, 1) - BigInt::from(2) * t.second(1, 0))
        );
        // n=4, a=2: S(4,2) = S2(4,2) + 4 S2(3,1)
        assert_eq!(
            t.second(4, 2),
            &(t.assoc(4, 2) + BigInt::from(4) * t.assoc(3, 1))
        );
        let report = check_identity_id_fd(6).unwrap();
        assert!(report.all_hold());
        let zero_case: Vec<_> = report
            .cases
            .iter()
            .filter(|c| c.indices[0] == ("n", 0))
            .collect();
        assert!(zero_case.iter().all(|c| c.lhs == BigInt::one()));
    }

    #[test]
    fn lemma_ll_examples() {
        let case = |a, b, n| check_lemma_ll(a, b, n).unwrap().cases[0].clone();
        let c = case(1, 0, 3);
        assert_eq!(c.lhs, BigInt::one());
        assert!(c.holds());
        let c = case(0, 1, 2);
        assert_eq!(c.lhs, BigInt::one());
        assert!(c.holds());
        let c = case(2, 1, 5);
        assert_eq!(c.lhs, BigInt::from(75));
        assert!(c.holds());
    }

    #[test]
    fn table_cap_enforced() {
        assert!(check_identity_inv(65).is_err());
        assert!(stirling_s2_assoc(70, 1).is_err());
    }
}
