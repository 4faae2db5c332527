//! Skein-module states over noncrossing matchings and the elementary events
//! that fold a diagram into them.
//!
//! Every event is a frontier surgery: `k` consecutive frontier points
//! starting at `at` are removed, `e` new points are inserted in their place,
//! and a set of local pairs joins removed points and new points. Following
//! old matching edges and local pairs gives the new matching and the number of
//! closed loops.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::matchings::{Matching, MAX_RANKED_G};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bracket,
    Pkbp,
}

/// Deliberate defects used to check that verification notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Loops are worth `A^2 + A^-2` in bracket mode.
    DeltaSign,
    /// The A and A^-1 smoothings trade weights.
    SmoothingSwap,
    /// The storage bound is taken from the wrong Catalan number.
    CatalanIndex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkeinConfig {
    pub mode: Mode,
    pub mutation: Option<Mutation>,
    /// States with at least this many entries are updated in parallel.
    pub parallel_threshold: usize,
}

impl SkeinConfig {
    pub fn new(mode: Mode) -> Self {
        SkeinConfig {
            mode,
            mutation: None,
            parallel_threshold: 512,
        }
    }

    pub fn loop_value(&self) -> LaurentPoly {
        match (self.mode, self.mutation) {
            (Mode::Pkbp, _) | (Mode::Bracket, Some(Mutation::DeltaSign)) => LaurentPoly::delta_plus(),
            (Mode::Bracket, _) => LaurentPoly::delta(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkeinError {
    #[error("cap needs at least two frontier points")]
    EmptyFrontier,
    #[error("event absorbs {need} points but the frontier has {have}")]
    FrontierTooSmall { need: usize, have: usize },
    #[error("position {at} is outside a frontier of {g} points")]
    BadPosition { at: usize, g: usize },
    #[error("frontier of {0} points is too large")]
    TooLarge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    Birth { at: usize },
    Cap { at: usize },
    Cross { at: usize, absorb: usize, over_first: bool },
}

/// Where the points go when `k` points at `at` are replaced by `e` new ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splice {
    pub old_g: usize,
    pub new_g: usize,
    /// New position of every old point, `None` if it was absorbed.
    pub old_to_new: Vec<Option<usize>>,
    /// Old position of absorbed point `i`, i.e. `(at + i) mod g`.
    pub absorbed: Vec<usize>,
    pub emitted: Vec<usize>,
}

/// Without wrap-around the new frontier is `old[..at] ++ new ++ old[at+k..]`;
/// when the absorbed run wraps past the end it is `new ++ old[at+k-g..at]`.
pub fn splice(g: usize, at: usize, k: usize, e: usize) -> Splice {
    assert!(k <= g);
    assert!(if k == 0 { at <= g } else { at < g });
    let new_g = g - k + e;
    let mut old_to_new = vec![None; g];
    let absorbed: Vec<usize> = (0..k).map(|i| (at + i) % g.max(1)).collect();
    let emitted: Vec<usize>;
    if at + k <= g {
        for (i, slot) in old_to_new.iter_mut().enumerate() {
            if i < at {
                *slot = Some(i);
            } else if i >= at + k {
                *slot = Some(i - k + e);
            }
        }
        emitted = (0..e).map(|j| at + j).collect();
    } else {
        let first = at + k - g;
        for (i, slot) in old_to_new.iter_mut().enumerate().take(at).skip(first) {
            *slot = Some(e + i - first);
        }
        emitted = (0..e).collect();
    }
    Splice {
        old_g: g,
        new_g,
        old_to_new,
        absorbed,
        emitted,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Absorbed(usize),
    Emitted(usize),
}

/// A crossingless frontier surgery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surgery {
    pub at: usize,
    pub absorb: usize,
    pub emit: usize,
    pub pairs: Vec<(End, End)>,
}

impl Surgery {
    pub fn birth(at: usize) -> Self {
        Surgery {
            at,
            absorb: 0,
            emit: 2,
            pairs: vec![(End::Emitted(0), End::Emitted(1))],
        }
    }

    pub fn cap(at: usize) -> Self {
        Surgery {
            at,
            absorb: 2,
            emit: 0,
            pairs: vec![(End::Absorbed(0), End::Absorbed(1))],
        }
    }

    /// The two smoothings of a crossing, A-weighted first.
    ///
    /// Crossing ends are numbered by offset from the slot met by the first
    /// absorbed point (or, with nothing absorbed, from the corner facing the
    /// frontier): absorbed point `i` is offset `-i`, emitted point `j` is
    /// offset `j + 1`. `over_first` puts the over strand through offsets 0
    /// and 2.
    pub fn smoothings(at: usize, absorb: usize, over_first: bool) -> [Surgery; 2] {
        let k = absorb;
        let end = |r: usize| -> End {
            let r = r % 4;
            if k == 0 {
                End::Emitted((r + 3) % 4)
            } else if r == 0 {
                End::Absorbed(0)
            } else if r <= 4 - k {
                End::Emitted(r - 1)
            } else {
                End::Absorbed(4 - r)
            }
        };
        let o = if over_first { 0 } else { 1 };
        let a_pairs = vec![(end(o), end(o + 3)), (end(o + 1), end(o + 2))];
        let b_pairs = vec![(end(o), end(o + 1)), (end(o + 2), end(o + 3))];
        let mk = |pairs| Surgery {
            at,
            absorb: k,
            emit: 4 - k,
            pairs,
        };
        [mk(a_pairs), mk(b_pairs)]
    }

    fn local(&self) -> (Vec<End>, Vec<End>) {
        let mut abs = vec![End::Absorbed(usize::MAX); self.absorb];
        let mut em = vec![End::Emitted(usize::MAX); self.emit];
        for &(x, y) in &self.pairs {
            for (p, q) in [(x, y), (y, x)] {
                match p {
                    End::Absorbed(i) => abs[i] = q,
                    End::Emitted(j) => em[j] = q,
                }
            }
        }
        (abs, em)
    }

    /// New matching and number of closed loops.
    pub fn apply_to(&self, m: &Matching) -> (Matching, usize) {
        let g = m.g();
        let sp = splice(g, self.at, self.absorb, self.emit);
        let (loc_abs, loc_em) = self.local();
        let mut abs_index = vec![usize::MAX; g];
        for (i, &pos) in sp.absorbed.iter().enumerate() {
            abs_index[pos] = i;
        }
        let mut new_pair = vec![u32::MAX; sp.new_g];
        let mut visited = vec![false; self.absorb];

        // walk from an old point through its matching edge until a path end
        let follow_from_old = |mut x: usize, visited: &mut Vec<bool>| -> usize {
            loop {
                let y = m.partner(x);
                match sp.old_to_new[y] {
                    Some(p) => return p,
                    None => {
                        let i = abs_index[y];
                        visited[i] = true;
                        match loc_abs[i] {
                            End::Emitted(j) => return sp.emitted[j],
                            End::Absorbed(i2) => {
                                visited[i2] = true;
                                x = sp.absorbed[i2];
                            }
                        }
                    }
                }
            }
        };
        for x in 0..g {
            if let Some(p) = sp.old_to_new[x] {
                if new_pair[p] == u32::MAX {
                    let q = follow_from_old(x, &mut visited);
                    new_pair[p] = q as u32;
                    new_pair[q] = p as u32;
                }
            }
        }
        for j in 0..self.emit {
            let p = sp.emitted[j];
            if new_pair[p] != u32::MAX {
                continue;
            }
            let q = match loc_em[j] {
                End::Emitted(j2) => sp.emitted[j2],
                End::Absorbed(i) => {
                    visited[i] = true;
                    follow_from_old(sp.absorbed[i], &mut visited)
                }
            };
            new_pair[p] = q as u32;
            new_pair[q] = p as u32;
        }
        let mut loops = 0;
        for start in 0..self.absorb {
            if visited[start] {
                continue;
            }
            loops += 1;
            let mut i = start;
            loop {
                visited[i] = true;
                let y = m.partner(sp.absorbed[i]);
                let iy = abs_index[y];
                visited[iy] = true;
                match loc_abs[iy] {
                    End::Absorbed(next) => i = next,
                    End::Emitted(_) => unreachable!("closed loop reached an emitted end"),
                }
                if i == start {
                    break;
                }
            }
        }
        (Matching::from_pair_of_unchecked(new_pair), loops)
    }
}

/// Sparse map from matchings (by rank) to coefficients, on `g` frontier points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeinState {
    g: usize,
    coeffs: BTreeMap<u64, LaurentPoly>,
    config: SkeinConfig,
}

impl SkeinState {
    pub fn init(config: SkeinConfig) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, LaurentPoly::one());
        SkeinState { g: 0, coeffs, config }
    }

    pub fn from_coeffs(
        config: SkeinConfig,
        g: usize,
        coeffs: impl IntoIterator<Item = (Matching, LaurentPoly)>,
    ) -> Self {
        let mut map: BTreeMap<u64, LaurentPoly> = BTreeMap::new();
        for (m, p) in coeffs {
            assert_eq!(m.g(), g);
            map.entry(m.rank()).or_default().add_assign(&p);
        }
        map.retain(|_, p| !p.is_zero());
        SkeinState {
            g,
            coeffs: map,
            config,
        }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn config(&self) -> SkeinConfig {
        self.config
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Matching, &LaurentPoly)> + '_ {
        let g = self.g;
        self.coeffs
            .iter()
            .map(move |(&r, p)| (Matching::unrank(g, r).expect("stored rank is valid"), p))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = &LaurentPoly> + '_ {
        self.coeffs.values()
    }

    pub fn to_map(&self) -> BTreeMap<Matching, LaurentPoly> {
        self.iter().map(|(m, p)| (m, p.clone())).collect()
    }

    /// Coefficient of the empty matching once the frontier is closed.
    pub fn scalar(&self) -> Option<LaurentPoly> {
        if self.g != 0 {
            return None;
        }
        Some(self.coeffs.get(&0).cloned().unwrap_or_default())
    }

    /// Applies weighted surgeries to every entry and sums the results.
    pub fn apply_surgeries(&self, surgeries: &[(Surgery, LaurentPoly)]) -> Result<Self, SkeinError> {
        let Some((first, _)) = surgeries.first() else {
            return Ok(self.clone());
        };
        let g = self.g;
        let (at, k, e) = (first.at, first.absorb, first.emit);
        if k > g {
            return Err(SkeinError::FrontierTooSmall { need: k, have: g });
        }
        if (k == 0 && at > g) || (k > 0 && at >= g) {
            return Err(SkeinError::BadPosition { at, g });
        }
        let new_g = g - k + e;
        if new_g > MAX_RANKED_G {
            return Err(SkeinError::TooLarge(new_g));
        }
        let delta = self.config.loop_value();
        let mut delta_pow = vec![LaurentPoly::one()];
        for _ in 0..(k / 2 + 1) {
            let next = delta_pow.last().unwrap().mul(&delta);
            delta_pow.push(next);
        }
        let factors: Vec<Vec<LaurentPoly>> = surgeries
            .iter()
            .map(|(_, w)| delta_pow.iter().map(|d| w.mul(d)).collect())
            .collect();
        let update = |(&rank, poly): (&u64, &LaurentPoly)| -> Vec<(u64, LaurentPoly)> {
            let m = Matching::unrank(g, rank).expect("stored rank is valid");
            surgeries
                .iter()
                .zip(&factors)
                .map(|((s, _), f)| {
                    let (nm, loops) = s.apply_to(&m);
                    let f = &f[loops];
                    let p = match f.terms() {
                        [(e, c)] if c.is_one() => poly.shift(*e),
                        _ => poly.mul(f),
                    };
                    (nm.rank(), p)
                })
                .collect()
        };
        let parts: Vec<Vec<(u64, LaurentPoly)>> = if self.coeffs.len() >= self.config.parallel_threshold {
            self.coeffs.par_iter().map(update).collect()
        } else {
            self.coeffs.iter().map(update).collect()
        };
        let mut out: BTreeMap<u64, LaurentPoly> = BTreeMap::new();
        for (r, p) in parts.into_iter().flatten() {
            match out.entry(r) {
                Entry::Vacant(v) => {
                    v.insert(p);
                }
                Entry::Occupied(mut o) => o.get_mut().add_assign(&p),
            }
        }
        out.retain(|_, p| !p.is_zero());
        Ok(SkeinState {
            g: new_g,
            coeffs: out,
            config: self.config,
        })
    }

    pub fn apply_birth(&self, at: usize) -> Result<Self, SkeinError> {
        self.apply_surgeries(&[(Surgery::birth(at), LaurentPoly::one())])
    }

    pub fn apply_cap(&self, at: usize) -> Result<Self, SkeinError> {
        if self.g < 2 {
            return Err(SkeinError::EmptyFrontier);
        }
        if at >= self.g {
            return Err(SkeinError::BadPosition { at, g: self.g });
        }
        self.apply_surgeries(&[(Surgery::cap(at), LaurentPoly::one())])
    }

    pub fn apply_cross(&self, at: usize, absorb: usize, over_first: bool) -> Result<Self, SkeinError> {
        if absorb > 4 {
            return Err(SkeinError::FrontierTooSmall { need: absorb, have: 4 });
        }
        let at = if absorb > 0 && self.g > 0 { at % self.g } else { at };
        let [sa, sb] = Surgery::smoothings(at, absorb, over_first);
        let (wa, wb) = match self.config.mutation {
            Some(Mutation::SmoothingSwap) => (LaurentPoly::monomial(1, -1), LaurentPoly::a()),
            _ => (LaurentPoly::a(), LaurentPoly::monomial(1, -1)),
        };
        self.apply_surgeries(&[(sa, wa), (sb, wb)])
    }

    pub fn apply(&self, ev: &Event) -> Result<Self, SkeinError> {
        match *ev {
            Event::Birth { at } => self.apply_birth(at),
            Event::Cap { at } => self.apply_cap(at),
            Event::Cross {
                at,
                absorb,
                over_first,
            } => self.apply_cross(at, absorb, over_first),
        }
    }

    /// Renumbers positions so that old position `r` becomes 0.
    pub fn rotate(&self, r: usize) -> Self {
        let g = self.g;
        if g == 0 || r.is_multiple_of(g) {
            return self.clone();
        }
        let mut out: BTreeMap<u64, LaurentPoly> = BTreeMap::new();
        for (m, p) in self.iter() {
            let mut pair_of = vec![0u32; g];
            for i in 0..g {
                let j = m.partner(i);
                pair_of[(i + g - r) % g] = ((j + g - r) % g) as u32;
            }
            let nm = Matching::from_pair_of_unchecked(pair_of);
            out.entry(nm.rank()).or_default().add_assign(p);
        }
        SkeinState {
            g,
            coeffs: out,
            config: self.config,
        }
    }

    /// One line per matching, `(pairs) : polynomial`, in canonical order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (m, p) in self.iter() {
            let _ = writeln!(s, "{m} : {p}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    fn m(s: &str) -> Matching {
        s.parse().unwrap()
    }

    fn bracket() -> SkeinConfig {
        SkeinConfig::new(Mode::Bracket)
    }

    fn state(g: usize, entries: &[(&str, &str)]) -> SkeinState {
        SkeinState::from_coeffs(bracket(), g, entries.iter().map(|(a, b)| (m(a), p(b))))
    }

    #[test]
    fn init_is_one() {
        for mode in [Mode::Bracket, Mode::Pkbp] {
            let s = SkeinState::init(SkeinConfig::new(mode));
            assert_eq!(s.scalar(), Some(LaurentPoly::one()));
        }
    }

    #[test]
    fn births() {
        let s = SkeinState::init(bracket()).apply_birth(0).unwrap();
        assert_eq!(s, state(2, &[("(0 1)", "1")]));
        let s2 = s.apply_birth(0).unwrap();
        assert_eq!(s2, state(4, &[("(0 1)(2 3)", "1")]));
        let s3 = s.apply_birth(1).unwrap();
        assert_eq!(s3, state(4, &[("(0 3)(1 2)", "1")]));
    }

    #[test]
    fn caps() {
        let s = state(2, &[("(0 1)", "1")]);
        assert_eq!(s.apply_cap(0).unwrap().scalar(), Some(LaurentPoly::delta()));
        let sp = SkeinState::from_coeffs(SkeinConfig::new(Mode::Pkbp), 2, [(m("(0 1)"), p("1"))]);
        assert_eq!(sp.apply_cap(0).unwrap().scalar(), Some(LaurentPoly::delta_plus()));
        // partners 0 and 3 reconnect
        let s = state(4, &[("(0 1)(2 3)", "1")]);
        assert_eq!(s.apply_cap(1).unwrap(), state(2, &[("(0 1)", "1")]));
        // wrap-around cap joins points 3 and 0
        let s = state(4, &[("(0 3)(1 2)", "A")]);
        assert_eq!(s.apply_cap(3).unwrap().to_map()[&m("(0 1)")], p("A^3 + A^-1").neg());
        assert_eq!(SkeinState::init(bracket()).apply_cap(0), Err(SkeinError::EmptyFrontier));
    }

    #[test]
    fn single_crossing_expansion() {
        let s = SkeinState::init(bracket()).apply_cross(0, 0, false).unwrap();
        assert_eq!(s.g(), 4);
        assert_eq!(s.len(), 2);
        let mut coeffs: Vec<String> = s.coeffs().map(|x| x.to_string()).collect();
        coeffs.sort();
        assert_eq!(coeffs, vec!["A", "A^-1"]);
    }

    #[test]
    fn kink_closure() {
        // close one strand of a crossing onto itself: A*delta + A^-1 = -A^3
        for over_first in [false, true] {
            let s = SkeinState::init(bracket()).apply_cross(0, 0, over_first).unwrap();
            let capped = s.apply_cap(0).unwrap();
            assert_eq!(capped.len(), 1);
            let c = capped.coeffs().next().unwrap().clone();
            assert!(c == p("-A^3") || c == p("-A^-3"), "{c}");
        }
    }

    #[test]
    fn cross_is_linear_combination_of_smoothings() {
        let s = state(6, &[("(0 1)(2 3)(4 5)", "A^2"), ("(0 5)(1 4)(2 3)", "-1"), ("(0 3)(1 2)(4 5)", "A^-6")]);
        for k in 0..=4usize {
            for at in 0..6 {
                for of in [false, true] {
                    let direct = s.apply_cross(at, k, of).unwrap();
                    let [sa, sb] = Surgery::smoothings(at, k, of);
                    let first = s.apply_surgeries(&[(sa, LaurentPoly::one())]).unwrap();
                    let second = s.apply_surgeries(&[(sb, LaurentPoly::one())]).unwrap();
                    let mut sum = first.to_map();
                    for x in sum.values_mut() {
                        *x = x.mul(&LaurentPoly::a());
                    }
                    for (mm, x) in second.to_map() {
                        sum.entry(mm).or_default().add_assign(&x.shift(-1));
                    }
                    sum.retain(|_, x| !x.is_zero());
                    assert_eq!(direct.to_map(), sum);
                }
            }
        }
    }

    #[test]
    fn splice_layouts() {
        let sp = splice(6, 2, 2, 3);
        assert_eq!(sp.old_to_new, vec![Some(0), Some(1), None, None, Some(5), Some(6)]);
        assert_eq!(sp.emitted, vec![2, 3, 4]);
        let sp = splice(6, 5, 2, 1);
        assert_eq!(sp.absorbed, vec![5, 0]);
        assert_eq!(sp.old_to_new, vec![None, Some(1), Some(2), Some(3), Some(4), None]);
        assert_eq!(sp.emitted, vec![0]);
        let sp = splice(4, 0, 0, 2);
        assert_eq!(sp.emitted, vec![0, 1]);
        assert_eq!(sp.old_to_new, vec![Some(2), Some(3), Some(4), Some(5)]);
    }

    #[test]
    fn parallel_path_matches_sequential() {
        let mut seq = SkeinState::init(bracket());
        let mut cfg = bracket();
        cfg.parallel_threshold = 1;
        let mut par = SkeinState::init(cfg);
        let events = [
            Event::Cross { at: 0, absorb: 0, over_first: true },
            Event::Cross { at: 1, absorb: 1, over_first: false },
            Event::Cross { at: 3, absorb: 0, over_first: true },
            Event::Cross { at: 2, absorb: 2, over_first: false },
            Event::Cap { at: 1 },
        ];
        for ev in events {
            seq = seq.apply(&ev).unwrap();
            par = par.apply(&ev).unwrap();
            assert_eq!(seq.to_map(), par.to_map());
        }
    }

    #[test]
    fn dump_format() {
        let s = state(4, &[("(0 1)(2 3)", "A"), ("(0 3)(1 2)", "A^-1")]);
        assert_eq!(s.dump(), "(0 1)(2 3) : A\n(0 3)(1 2) : A^-1\n");
    }

    proptest! {
        #[test]
        fn surgery_preserves_validity(half in 1usize..5, r in any::<u64>(), at in 0usize..10, k in 0usize..5, of in any::<bool>()) {
            let g = 2 * half;
            prop_assume!(k <= g);
            let at = if k == 0 { at % (g + 1) } else { at % g };
            let c = crate::matchings::catalan_u64(half);
            let mm = Matching::unrank(g, r % c).unwrap();
            for s in Surgery::smoothings(at, k, of) {
                let (nm, loops) = s.apply_to(&mm);
                prop_assert!(nm.validate().is_ok());
                prop_assert_eq!(nm.g(), g + 4 - 2 * k);
                prop_assert!(loops <= k / 2);
            }
        }

        #[test]
        fn rotation_round_trip(half in 1usize..5, r in any::<u64>(), rot in 0usize..10) {
            let g = 2 * half;
            let c = crate::matchings::catalan_u64(half);
            let s = SkeinState::from_coeffs(bracket(), g, [(Matching::unrank(g, r % c).unwrap(), LaurentPoly::a())]);
            let back = s.rotate(rot % g).rotate((g - rot % g) % g);
            prop_assert_eq!(back, s);
        }
    }
}
