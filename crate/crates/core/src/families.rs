//! Diagram families: braid closures and braid tangles, torus links, kinks.
//!
//! A braid runs upward. Each generator is a crossing with slots
//! bottom-left 0, bottom-right 1, top-right 2, top-left 3; `σ_i` puts the
//! strand from bottom-left over, `σ_i^-1` the other one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::planar::{Crossing, Diagram};

/// Generator `i` (1-based) with sign; `-i` is the inverse.
pub type Letter = i32;

struct Woven {
    crossings: Vec<Crossing>,
    bottom: Vec<u64>,
    top: Vec<u64>,
    touched: Vec<bool>,
}

fn weave(strands: usize, word: &[Letter]) -> Woven {
    assert!(strands >= 1);
    let mut next = 1u64;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let bottom: Vec<u64> = (0..strands).map(|_| fresh()).collect();
    let mut cur = bottom.clone();
    let mut touched = vec![false; strands];
    let mut crossings = Vec::with_capacity(word.len());
    for &l in word {
        let i = l.unsigned_abs() as usize - 1;
        assert!(l != 0 && i + 1 < strands, "generator {l} on {strands} strands");
        let (tl, tr) = (fresh(), fresh());
        let over = if l > 0 { 0 } else { 1 };
        crossings.push(Crossing::new([cur[i], cur[i + 1], tr, tl], over));
        cur[i] = tl;
        cur[i + 1] = tr;
        touched[i] = true;
        touched[i + 1] = true;
    }
    Woven {
        crossings,
        bottom,
        top: cur,
        touched,
    }
}

/// Closure of a braid; untouched strands become free loops.
pub fn braid_closure(strands: usize, word: &[Letter]) -> Diagram {
    let w = weave(strands, word);
    let mut rename = std::collections::HashMap::new();
    for j in 0..strands {
        if w.touched[j] {
            rename.insert(w.top[j], w.bottom[j]);
        }
    }
    let crossings = w
        .crossings
        .into_iter()
        .map(|mut c| {
            for a in c.arcs.iter_mut() {
                if let Some(&b) = rename.get(a) {
                    *a = b;
                }
            }
            c
        })
        .collect();
    let free = w.touched.iter().filter(|t| !**t).count();
    Diagram::new(crossings, free, Vec::new()).expect("braid closures are diagrams")
}

/// The braid as a tangle: bottom points left to right, then top points
/// right to left.
pub fn braid_tangle(strands: usize, word: &[Letter]) -> Diagram {
    let w = weave(strands, word);
    let mut boundary = w.bottom.clone();
    boundary.extend(w.top.iter().rev());
    Diagram::new(w.crossings, 0, boundary).expect("braid tangles are diagrams")
}

/// `(2, k)` torus link as the closure of `σ_1^k`; negative `k` uses inverses.
pub fn torus_2(k: i64) -> Diagram {
    let l = if k >= 0 { 1 } else { -1 };
    braid_closure(2, &vec![l; k.unsigned_abs() as usize])
}

pub fn random_word(strands: usize, len: usize, seed: u64) -> Vec<Letter> {
    assert!(strands >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let i = rng.gen_range(1..strands as i32);
            if rng.gen_bool(0.5) {
                i
            } else {
                -i
            }
        })
        .collect()
}

pub fn random_braid_closure(strands: usize, len: usize, seed: u64) -> Diagram {
    braid_closure(strands, &random_word(strands, len, seed))
}

/// Chain of `k` twist regions, each `σ_1^{±t}` or `σ_2^{±t}` on 3 strands,
/// with region signs and lengths drawn from the seed.
pub fn random_twist_chain(k: usize, seed: u64) -> Diagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut word = Vec::new();
    for r in 0..k {
        let g = if r % 2 == 0 { 1 } else { 2 };
        let s = if rng.gen_bool(0.5) { g } else { -g };
        let t = rng.gen_range(1..=3);
        word.extend(std::iter::repeat_n(s, t));
    }
    braid_closure(3, &word)
}

/// Adds a kink on arc `label`. `side` chooses which slots hold the loop and
/// `over` is the crossing's over flag; the four combinations give both
/// signs on both sides of the arc.
pub fn with_kink(d: &Diagram, label: u64, side: bool, over: u8) -> Diagram {
    let k = d.max_label() + 1;
    let a2 = k + 1;
    let mut crossings = d.crossings().to_vec();
    let mut boundary = d.boundary().to_vec();
    // rename the last occurrence so the arc now runs through the kink
    let mut renamed = false;
    'outer: for c in crossings.iter_mut().rev() {
        for s in (0..4).rev() {
            if c.arcs[s] == label {
                c.arcs[s] = a2;
                renamed = true;
                break 'outer;
            }
        }
    }
    if !renamed {
        let j = boundary.iter().position(|&b| b == label).expect("arc exists");
        boundary[j] = a2;
    }
    let arcs = if side { [label, k, k, a2] } else { [label, a2, k, k] };
    crossings.push(Crossing::new(arcs, over));
    Diagram::new(crossings, d.free_loops(), boundary).expect("kink keeps a diagram")
}

/// Standard diagrams used across the tests and benchmarks.
pub mod standard {
    use super::*;
    use crate::planar::parse_pd;

    pub const TREFOIL_PD: &str = "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]";
    pub const FIGURE_EIGHT_PD: &str = "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]";
    pub const HOPF_PD: &str = "X[1,3,2,4] X[3,1,4,2]";

    pub fn trefoil() -> Diagram {
        parse_pd(TREFOIL_PD).unwrap()
    }

    pub fn figure_eight() -> Diagram {
        parse_pd(FIGURE_EIGHT_PD).unwrap()
    }

    pub fn hopf() -> Diagram {
        parse_pd(HOPF_PD).unwrap()
    }

    pub fn unknot() -> Diagram {
        parse_pd("O").unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_force_bracket, brute_force_tangle_expansion};
    use crate::planar::{stats, PlanarMap};
    use crate::skein::Mode;
    use crate::{LaurentPoly, Matching};

    #[test]
    fn closures_are_planar() {
        for (s, w) in [(2, vec![1, 1, 1]), (3, vec![1, -2, 1, -2]), (4, vec![1, 2, 3, -1]), (3, vec![1])] {
            let d = braid_closure(s, &w);
            PlanarMap::build(&d).unwrap();
            assert_eq!(d.n(), w.len());
        }
        assert_eq!(braid_closure(3, &[1]).free_loops(), 1);
    }

    #[test]
    fn torus_links() {
        assert_eq!(stats(&torus_2(2)).unwrap().c, 1);
        let hopf = brute_force_bracket(&torus_2(2)).unwrap();
        assert_eq!(hopf, "-A^4 - A^-4".parse::<LaurentPoly>().unwrap());
        let t = brute_force_bracket(&torus_2(3)).unwrap();
        assert_eq!(t.mirror(), brute_force_bracket(&torus_2(-3)).unwrap());
    }

    #[test]
    fn inverse_pair_is_identity() {
        let d = braid_tangle(2, &[1, -1]);
        let e = brute_force_tangle_expansion(&d, Mode::Bracket).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[&"(0 3)(1 2)".parse::<Matching>().unwrap()], LaurentPoly::one());
    }

    #[test]
    fn kinks_multiply_by_a_cubed() {
        let t = standard::trefoil();
        let base = brute_force_bracket(&t).unwrap();
        let mut seen = Vec::new();
        for side in [false, true] {
            for over in [0, 1] {
                let k = with_kink(&t, 1, side, over);
                PlanarMap::build(&k).unwrap();
                let v = brute_force_bracket(&k).unwrap();
                let q = v.exact_div(&base).unwrap();
                assert!(q == LaurentPoly::monomial(-1, 3) || q == LaurentPoly::monomial(-1, -3), "{q}");
                seen.push(q);
            }
        }
        seen.sort_by_key(|q| q.max_exp());
        seen.dedup();
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn random_families_are_deterministic() {
        assert_eq!(random_word(4, 20, 9), random_word(4, 20, 9));
        let d = random_twist_chain(5, 3);
        PlanarMap::build(&d).unwrap();
        assert_eq!(d, random_twist_chain(5, 3));
    }
}
