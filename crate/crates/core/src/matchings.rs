//! Noncrossing perfect matchings of `g` points on a circle.
//!
//! Matchings are ranked within the lexicographic order on `pair_of`, which
//! gives every matching on `g` points a dense index in `0..catalan(g/2)`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use thiserror::Error;

use crate::int::Int;

/// Largest frontier whose matchings can be ranked in a `u64`.
pub const MAX_RANKED_G: usize = 70;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("boundary size {0} is odd")]
    OddBoundary(usize),
    #[error("matchings have different sizes ({0} and {1})")]
    SizeMismatch(usize, usize),
    #[error("not a noncrossing perfect matching: {0}")]
    Invalid(String),
    #[error("frontier of {0} points exceeds the supported maximum of {MAX_RANKED_G}")]
    TooLarge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    pair_of: Vec<u32>,
}

/// Exact Catalan number `binom(2m, m) / (m + 1)`.
pub fn catalan(m: u64) -> Int {
    let mut c = BigInt::from(1u32);
    // C_{k+1} = C_k * 2(2k+1) / (k+2)
    for k in 0..m {
        c = c * BigInt::from(2 * (2 * k + 1)) / BigInt::from(k + 2);
    }
    Int::from(c)
}

fn catalan_table() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![1u64];
        for m in 1..=MAX_RANKED_G / 2 {
            let mut s: u128 = 0;
            for i in 0..m {
                s += t[i] as u128 * t[m - 1 - i] as u128;
            }
            t.push(u64::try_from(s).expect("catalan table overflow"));
        }
        t
    })
}

/// `C_m` as a machine word, for `m <= MAX_RANKED_G / 2`.
pub fn catalan_u64(m: usize) -> u64 {
    catalan_table()[m]
}

impl Matching {
    pub fn empty() -> Self {
        Matching { pair_of: Vec::new() }
    }

    pub fn from_pair_of(pair_of: Vec<u32>) -> Result<Self, MatchingError> {
        let m = Matching { pair_of };
        m.validate()?;
        Ok(m)
    }

    pub fn from_pairs(g: usize, pairs: &[(usize, usize)]) -> Result<Self, MatchingError> {
        let mut pair_of = vec![u32::MAX; g];
        for &(a, b) in pairs {
            if a >= g || b >= g || pair_of[a] != u32::MAX || pair_of[b] != u32::MAX || a == b {
                return Err(MatchingError::Invalid(format!("bad pair ({a} {b})")));
            }
            pair_of[a] = b as u32;
            pair_of[b] = a as u32;
        }
        Self::from_pair_of(pair_of)
    }

    pub(crate) fn from_pair_of_unchecked(pair_of: Vec<u32>) -> Self {
        debug_assert!(Matching { pair_of: pair_of.clone() }.validate().is_ok());
        Matching { pair_of }
    }

    pub fn validate(&self) -> Result<(), MatchingError> {
        let g = self.pair_of.len();
        if g % 2 == 1 {
            return Err(MatchingError::OddBoundary(g));
        }
        for (i, &j) in self.pair_of.iter().enumerate() {
            let j = j as usize;
            if j >= g || j == i || self.pair_of[j] as usize != i {
                return Err(MatchingError::Invalid(format!("point {i} is not properly paired")));
            }
        }
        // noncrossing: scanning left to right, pair closings form a balanced bracket word
        let mut stack = Vec::new();
        for i in 0..g {
            let j = self.pair_of[i] as usize;
            if j > i {
                stack.push(i);
            } else if stack.pop() != Some(j) {
                return Err(MatchingError::Invalid(format!("pairs cross at point {i}")));
            }
        }
        Ok(())
    }

    pub fn g(&self) -> usize {
        self.pair_of.len()
    }

    pub fn pair_of(&self) -> &[u32] {
        &self.pair_of
    }

    pub fn partner(&self, i: usize) -> usize {
        self.pair_of[i] as usize
    }

    /// Pairs `(i, j)` with `i < j`, ordered by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.pair_of
            .iter()
            .enumerate()
            .filter(|(i, &j)| *i < j as usize)
            .map(|(i, &j)| (i, j as usize))
            .collect()
    }

    pub fn rank(&self) -> u64 {
        let g = self.g();
        assert!(g <= MAX_RANKED_G, "frontier too large to rank");
        rank_range(&self.pair_of, 0, g)
    }

    pub fn unrank(g: usize, rank: u64) -> Result<Self, MatchingError> {
        if g % 2 == 1 {
            return Err(MatchingError::OddBoundary(g));
        }
        if g > MAX_RANKED_G {
            return Err(MatchingError::TooLarge(g));
        }
        if rank >= catalan_u64(g / 2) {
            return Err(MatchingError::Invalid(format!("rank {rank} out of range for g={g}")));
        }
        let mut pair_of = vec![0u32; g];
        unrank_range(&mut pair_of, 0, g, rank);
        Ok(Matching { pair_of })
    }
}

fn rank_range(p: &[u32], lo: usize, hi: usize) -> u64 {
    if lo == hi {
        return 0;
    }
    let cat = catalan_table();
    let m = (hi - lo) / 2;
    let j = p[lo] as usize;
    let k = (j - lo - 1) / 2;
    let mut offset = 0u64;
    for kk in 0..k {
        offset += cat[kk] * cat[m - 1 - kk];
    }
    offset + rank_range(p, lo + 1, j) * cat[m - 1 - k] + rank_range(p, j + 1, hi)
}

fn unrank_range(p: &mut [u32], lo: usize, hi: usize, mut r: u64) {
    if lo == hi {
        return;
    }
    let cat = catalan_table();
    let m = (hi - lo) / 2;
    let mut k = 0;
    loop {
        let block = cat[k] * cat[m - 1 - k];
        if r < block {
            break;
        }
        r -= block;
        k += 1;
    }
    let j = lo + 2 * k + 1;
    p[lo] = j as u32;
    p[j] = lo as u32;
    let outer = cat[m - 1 - k];
    unrank_range(p, lo + 1, j, r / outer);
    unrank_range(p, j + 1, hi, r % outer);
}

/// All noncrossing matchings on `g` points in canonical order.
pub fn enumerate(g: usize) -> Result<Vec<Matching>, MatchingError> {
    if g % 2 == 1 {
        return Err(MatchingError::OddBoundary(g));
    }
    if g > MAX_RANKED_G {
        return Err(MatchingError::TooLarge(g));
    }
    (0..catalan_u64(g / 2)).map(|r| Matching::unrank(g, r)).collect()
}

/// Number of loops in the closure of `b` against the mirror image of `b2`.
pub fn glue_loop_count(b: &Matching, b2: &Matching) -> Result<usize, MatchingError> {
    if b.g() != b2.g() {
        return Err(MatchingError::SizeMismatch(b.g(), b2.g()));
    }
    let g = b.g();
    let mut seen = vec![false; g];
    let mut loops = 0;
    for start in 0..g {
        if seen[start] {
            continue;
        }
        loops += 1;
        let mut i = start;
        loop {
            seen[i] = true;
            let j = b.partner(i);
            seen[j] = true;
            i = b2.partner(j);
            if i == start {
                break;
            }
        }
    }
    Ok(loops)
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pair_of.is_empty() {
            return write!(f, "()");
        }
        for (i, j) in self.pairs() {
            write!(f, "({i} {j})")?;
        }
        Ok(())
    }
}

impl FromStr for Matching {
    type Err = MatchingError;

    /// Parses `(0 1)(2 3)`; `()` is the empty matching.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MatchingError::Invalid(s.to_string());
        let t = s.trim();
        if t == "()" || t.is_empty() {
            return Ok(Matching::empty());
        }
        let mut pairs = Vec::new();
        for chunk in t.split(')') {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                continue;
            }
            let inner = chunk.strip_prefix('(').ok_or_else(bad)?;
            let nums: Vec<usize> = inner
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            if nums.len() != 2 {
                return Err(bad());
            }
            pairs.push((nums[0], nums[1]));
        }
        Matching::from_pairs(2 * pairs.len(), &pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(s: &str) -> Matching {
        s.parse().unwrap()
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate(0).unwrap(), vec![Matching::empty()]);
        assert_eq!(enumerate(4).unwrap(), vec![m("(0 1)(2 3)"), m("(0 3)(1 2)")]);
        assert_eq!(enumerate(6).unwrap().len(), 5);
        assert_eq!(enumerate(3), Err(MatchingError::OddBoundary(3)));
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(0), Int::from(1));
        assert_eq!(catalan(3), Int::from(5));
        assert_eq!(catalan(10), Int::from(16796));
        // recurrence check, well past the u64 table
        let mut c: Vec<BigInt> = vec![BigInt::from(1)];
        for k in 0..60usize {
            let s: BigInt = (0..=k).map(|i| &c[i] * &c[k - i]).sum();
            c.push(s);
        }
        for (k, ck) in c.iter().enumerate() {
            assert_eq!(catalan(k as u64), Int::from(ck.clone()));
        }
    }

    #[test]
    fn enumeration_counts_and_order() {
        for g in (0..=16).step_by(2) {
            let all = enumerate(g).unwrap();
            assert_eq!(Int::from(all.len() as i64), catalan(g as u64 / 2));
            for (r, x) in all.iter().enumerate() {
                x.validate().unwrap();
                assert_eq!(x.rank(), r as u64);
            }
            for w in all.windows(2) {
                assert!(w[0].pair_of() < w[1].pair_of());
            }
        }
    }

    #[test]
    fn exhaustive_against_brute_force_g8() {
        // every fixed-point-free involution of 8 points that passes validation
        let g = 8;
        let mut count = 0;
        fn rec(p: &mut Vec<u32>, count: &mut usize) {
            match p.iter().position(|&x| x == u32::MAX) {
                None => {
                    if Matching::from_pair_of(p.clone()).is_ok() {
                        *count += 1;
                    }
                }
                Some(i) => {
                    for j in i + 1..p.len() {
                        if p[j] == u32::MAX {
                            p[i] = j as u32;
                            p[j] = i as u32;
                            rec(p, count);
                            p[i] = u32::MAX;
                            p[j] = u32::MAX;
                        }
                    }
                }
            }
        }
        rec(&mut vec![u32::MAX; g], &mut count);
        assert_eq!(count, 14);
    }

    #[test]
    fn glue_examples() {
        let a = m("(0 1)(2 3)");
        let b = m("(0 3)(1 2)");
        assert_eq!(glue_loop_count(&a, &b).unwrap(), 1);
        assert_eq!(glue_loop_count(&a, &a).unwrap(), 2);
        assert_eq!(glue_loop_count(&Matching::empty(), &Matching::empty()).unwrap(), 0);
        assert!(matches!(
            glue_loop_count(&a, &m("(0 1)")),
            Err(MatchingError::SizeMismatch(4, 2))
        ));
    }

    #[test]
    fn rejects_crossing_pairs() {
        assert!(Matching::from_pairs(4, &[(0, 2), (1, 3)]).is_err());
        assert!(Matching::from_pair_of(vec![1, 0, 2]).is_err());
    }

    #[test]
    fn text_round_trip() {
        for x in enumerate(8).unwrap() {
            assert_eq!(x.to_string().parse::<Matching>().unwrap(), x);
        }
        assert_eq!(Matching::empty().to_string(), "()");
    }

    proptest! {
        #[test]
        fn glue_bounds(half in 0usize..7, r1 in any::<u64>(), r2 in any::<u64>()) {
            let g = 2 * half;
            let c = catalan_u64(half);
            let a = Matching::unrank(g, r1 % c).unwrap();
            let b = Matching::unrank(g, r2 % c).unwrap();
            let ab = glue_loop_count(&a, &b).unwrap();
            prop_assert_eq!(ab, glue_loop_count(&b, &a).unwrap());
            prop_assert!(ab <= half);
            prop_assert_eq!(ab == half, a == b);
            if g > 0 {
                prop_assert!(ab >= 1);
            }
        }

        #[test]
        fn rank_round_trip(half in 0usize..20, r in any::<u64>()) {
            let g = 2 * half;
            let r = r % catalan_u64(half);
            let x = Matching::unrank(g, r).unwrap();
            x.validate().unwrap();
            prop_assert_eq!(x.rank(), r);
        }
    }
}
