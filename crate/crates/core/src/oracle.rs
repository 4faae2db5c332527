//! Brute-force state sums over all `2^n` smoothings.
//!
//! Deliberately shares nothing with the scanning engine beyond the diagram
//! type: endpoints are joined in a union-find and components are counted.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::matchings::Matching;
use crate::planar::Diagram;
use crate::skein::Mode;

pub const MAX_BRACKET_N: usize = 22;
pub const MAX_TANGLE_N: usize = 18;
pub const MAX_TANGLE_G: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the oracle limit of {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("the oracle expects a {0} diagram")]
    WrongShape(&'static str),
}

/// Bitmask over crossings: bit set means the A-smoothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmoothingAssignment(pub u64);

struct Layout {
    nodes: usize,
    /// Pairs of nodes joined by an arc.
    arcs: Vec<(usize, usize)>,
    over: Vec<usize>,
    /// Boundary node of each boundary position.
    boundary_nodes: Vec<usize>,
}

fn layout(d: &Diagram) -> Layout {
    let n = d.n();
    let mut ends: HashMap<u64, Vec<usize>> = HashMap::new();
    for (c, x) in d.crossings().iter().enumerate() {
        for (s, &a) in x.arcs.iter().enumerate() {
            ends.entry(a).or_default().push(4 * c + s);
        }
    }
    let mut boundary_nodes = Vec::new();
    for (j, &a) in d.boundary().iter().enumerate() {
        ends.entry(a).or_default().push(4 * n + j);
        boundary_nodes.push(4 * n + j);
    }
    let mut arcs: Vec<(usize, usize)> = ends.values().map(|e| (e[0], e[1])).collect();
    arcs.sort_unstable();
    Layout {
        nodes: 4 * n + d.g(),
        arcs,
        over: d.crossings().iter().map(|x| x.over as usize).collect(),
        boundary_nodes,
    }
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

fn join(p: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(p, a), find(p, b));
    if ra != rb {
        p[ra] = rb;
    }
}

/// Joins the arcs and the smoothing pairs chosen by `mask`.
fn smooth(l: &Layout, mask: u64, parent: &mut Vec<usize>) {
    parent.clear();
    parent.extend(0..l.nodes);
    for &(a, b) in &l.arcs {
        join(parent, a, b);
    }
    for (c, &o) in l.over.iter().enumerate() {
        let base = 4 * c;
        let s = |k: usize| base + (o + k) % 4;
        if mask >> c & 1 == 1 {
            // A-smoothing opens the corners swept by the over strand turning counterclockwise
            join(parent, s(0), s(3));
            join(parent, s(1), s(2));
        } else {
            join(parent, s(0), s(1));
            join(parent, s(2), s(3));
        }
    }
}

fn components(parent: &mut [usize]) -> usize {
    (0..parent.len()).filter(|&x| find(parent, x) == x).count()
}

fn loop_value(mode: Mode) -> LaurentPoly {
    let sign = match mode {
        Mode::Bracket => -1i64,
        Mode::Pkbp => 1,
    };
    LaurentPoly::from_terms([(2, sign), (-2, sign)])
}

/// `sum_k c_k * A^(a_k - b_k) * delta^(loops_k)` from a histogram keyed by
/// `(number of A-smoothings, loops)`.
fn assemble(n: usize, hist: &BTreeMap<(usize, usize), u64>, delta: &LaurentPoly, shift: usize) -> LaurentPoly {
    let max_loops = hist.keys().map(|k| k.1).max().unwrap_or(0);
    let mut powers = vec![LaurentPoly::one()];
    for _ in 0..max_loops {
        let next = powers.last().unwrap().mul(delta);
        powers.push(next);
    }
    let mut out = LaurentPoly::zero();
    for (&(a, loops), &count) in hist {
        let e = a as i64 - (n - a) as i64;
        let term = powers[loops - shift.min(loops)].mul(&LaurentPoly::monomial(count as i64, e));
        out.add_assign(&term);
    }
    out
}

fn histogram<F>(n: usize, per_state: F) -> BTreeMap<(usize, usize), u64>
where
    F: Fn(u64, &mut Vec<usize>) -> (usize, usize) + Sync,
{
    let total: u64 = 1u64 << n;
    let chunk: u64 = 1 << 12;
    let chunks = total.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut parent = Vec::new();
            let mut h: BTreeMap<(usize, usize), u64> = BTreeMap::new();
            for mask in k * chunk..((k + 1) * chunk).min(total) {
                *h.entry(per_state(mask, &mut parent)).or_default() += 1;
            }
            h
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

/// Normalized bracket (or pKBP) of a closed diagram: `delta^(loops - 1)` per state.
pub fn brute_force(d: &Diagram, mode: Mode) -> Result<LaurentPoly, OracleError> {
    if !d.is_closed() {
        return Err(OracleError::WrongShape("closed"));
    }
    let n = d.n();
    if n > MAX_BRACKET_N {
        return Err(OracleError::TooLarge {
            what: "n",
            value: n,
            limit: MAX_BRACKET_N,
        });
    }
    if n == 0 && d.free_loops() == 0 {
        return Ok(LaurentPoly::one());
    }
    let l = layout(d);
    let free = d.free_loops();
    let hist = histogram(n, |mask, parent| {
        smooth(&l, mask, parent);
        (mask.count_ones() as usize, components(parent) + free)
    });
    Ok(assemble(n, &hist, &loop_value(mode), 1))
}

pub fn brute_force_bracket(d: &Diagram) -> Result<LaurentPoly, OracleError> {
    brute_force(d, Mode::Bracket)
}

/// Full skein expansion of a tangle: each state is a matching of the
/// boundary points plus closed loops, weighted `A^(a-b) * delta^loops`.
pub fn brute_force_tangle_expansion(
    d: &Diagram,
    mode: Mode,
) -> Result<BTreeMap<Matching, LaurentPoly>, OracleError> {
    let (n, g) = (d.n(), d.g());
    if n > MAX_TANGLE_N {
        return Err(OracleError::TooLarge {
            what: "n",
            value: n,
            limit: MAX_TANGLE_N,
        });
    }
    if g > MAX_TANGLE_G {
        return Err(OracleError::TooLarge {
            what: "g",
            value: g,
            limit: MAX_TANGLE_G,
        });
    }
    let l = layout(d);
    let free = d.free_loops();
    let total: u64 = 1u64 << n;
    // per matching rank, a histogram of (A count, loops)
    let per: BTreeMap<u64, BTreeMap<(usize, usize), u64>> = (0..total)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<u64, BTreeMap<(usize, usize), u64>>, mask| {
            let mut parent = Vec::new();
            smooth(&l, mask, &mut parent);
            let mut partner = vec![0usize; g];
            let mut by_root: HashMap<usize, usize> = HashMap::new();
            for (j, &node) in l.boundary_nodes.iter().enumerate() {
                let r = find(&mut parent, node);
                if let Some(i) = by_root.remove(&r) {
                    partner[i] = j;
                    partner[j] = i;
                } else {
                    by_root.insert(r, j);
                }
            }
            let loops = components(&mut parent) - g / 2 + free;
            let m = Matching::from_pair_of(partner.iter().map(|&x| x as u32).collect())
                .expect("smoothing of a planar tangle is a noncrossing matching");
            *acc.entry(m.rank())
                .or_default()
                .entry((mask.count_ones() as usize, loops))
                .or_default() += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (r, h) in b {
                let slot = a.entry(r).or_default();
                for (k, v) in h {
                    *slot.entry(k).or_default() += v;
                }
            }
            a
        });
    let delta = loop_value(mode);
    let mut out = BTreeMap::new();
    for (rank, hist) in per {
        let p = assemble(n, &hist, &delta, 0);
        if !p.is_zero() {
            out.insert(Matching::unrank(g, rank).unwrap(), p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::parse_pd;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    fn bracket(pd: &str) -> LaurentPoly {
        brute_force_bracket(&parse_pd(pd).unwrap()).unwrap()
    }

    #[test]
    fn unknot_and_unlinks() {
        assert_eq!(bracket("O"), LaurentPoly::one());
        assert_eq!(bracket("O O"), LaurentPoly::delta());
        assert_eq!(bracket(""), LaurentPoly::one());
        let two = brute_force(&parse_pd("O O").unwrap(), Mode::Pkbp).unwrap();
        assert_eq!(two, LaurentPoly::delta_plus());
    }

    #[test]
    fn hopf_by_hand() {
        // A^2 delta + 1 + 1 + A^-2 delta
        let d = LaurentPoly::delta();
        let hand = p("A^2").mul(&d).add(&p("2")).add(&p("A^-2").mul(&d));
        assert_eq!(hand, p("-A^4 - A^-4"));
        assert_eq!(bracket("X[1,3,2,4] X[3,1,4,2]"), hand);
    }

    #[test]
    fn trefoil_by_hand() {
        // each of the 8 states, counted by number of A-smoothings and loops
        let t = parse_pd("X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]").unwrap();
        let got = bracket("X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]");
        let mirror = brute_force_bracket(&t.mirror()).unwrap();
        assert_eq!(got.mirror(), mirror);
        let a = p("-A^5 - A^-3 + A^-7");
        assert!(got == a || got == a.mirror(), "{got}");
    }

    #[test]
    fn kink_values() {
        let k = bracket("X[1,2,2,1]");
        assert!(k == p("-A^3") || k == p("-A^-3"), "{k}");
        assert_eq!(bracket("X[1,2,2,1]o0"), k.mirror());
    }

    #[test]
    fn single_crossing_tangle() {
        let d = parse_pd("X[1,2,3,4]o0 B[1,2,3,4]").unwrap();
        let e = brute_force_tangle_expansion(&d, Mode::Bracket).unwrap();
        assert_eq!(e.len(), 2);
        let mut coeffs: Vec<String> = e.values().map(|x| x.to_string()).collect();
        coeffs.sort();
        assert_eq!(coeffs, vec!["A", "A^-1"]);
    }

    #[test]
    fn crossingless_tangle() {
        let d = parse_pd("B[1,1,2,2]").unwrap();
        let e = brute_force_tangle_expansion(&d, Mode::Bracket).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[&"(0 1)(2 3)".parse::<Matching>().unwrap()], LaurentPoly::one());
    }

    #[test]
    fn limits() {
        let mut pd = String::new();
        for i in 0..23u64 {
            // 23-crossing chain of kinks
            let a = 2 * i + 1;
            let b = 2 * i + 2;
            let next = if i == 22 { 1 } else { 2 * i + 3 };
            pd.push_str(&format!("X[{a},{b},{b},{next}] "));
        }
        let d = parse_pd(&pd).unwrap();
        assert!(matches!(brute_force_bracket(&d), Err(OracleError::TooLarge { .. })));
    }
}
