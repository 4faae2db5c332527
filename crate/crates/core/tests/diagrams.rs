use std::path::Path;

use tanglescan_core::engine::{self, EngineOptions, Order};
use tanglescan_core::families::standard;
use tanglescan_core::oracle::{brute_force_bracket, brute_force_tangle_expansion};
use tanglescan_core::planar::{
    checkerboard, checkerboard_of, dark_surface_euler, parse_pd, stats, trace_faces, Color,
    DiagramStats, PlanarMap, Regions,
};
use tanglescan_core::skein::Mode;
use tanglescan_core::verify::load_corpus;
use tanglescan_core::LaurentPoly;

/// Twist with two negative crossings, nested arcs and an outer arc.
const TWIST_WITH_ARCS: &str = "X[1,2,4,3]o1 X[3,4,6,5]o1 B[1,8,8,7,7,2,6,5,20,20]";
/// A two-crossing twist, a direct arc and a separate Hopf diagram.
const THREE_PIECES: &str = "X[1,2,4,3]o0 X[3,4,6,5]o0 X[7,9,8,10] X[9,7,10,8] B[1,2,6,5,11,11]";

fn corpus_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn twist_colorings() {
    let d = parse_pd(TWIST_WITH_ARCS).unwrap();
    let light = checkerboard(&d, Color::Light).unwrap();
    let dark = checkerboard(&d, Color::Dark).unwrap();
    assert_eq!((light.e, light.w), (2, -2));
    assert_eq!((dark.e, dark.w), (2, 2));
    let r = engine::expand(&d, &EngineOptions::new(Mode::Bracket).deep()).unwrap();
    assert!(r.checks.mod4.passed);
    assert_eq!((light.w + 2 * light.e).rem_euclid(4), 2);
}

#[test]
fn three_piece_counts() {
    let s = stats(&parse_pd(THREE_PIECES).unwrap()).unwrap();
    assert_eq!(s, DiagramStats { n: 4, g: 6, c: 3, c_prime: 1, i: 4 });
}

#[test]
fn three_piece_expansion() {
    let d = parse_pd(THREE_PIECES).unwrap();
    let want = brute_force_tangle_expansion(&d, Mode::Bracket).unwrap();
    for order in [Order::default(), Order::Exact] {
        assert_eq!(engine::expand_tangle(&d, order).unwrap(), want);
    }
    let hopf = brute_force_bracket(&standard::hopf()).unwrap();
    for p in want.values() {
        assert!(p.exact_div(&hopf).is_ok());
    }
}

#[test]
fn hopf_counts() {
    let h = standard::hopf();
    assert_eq!(trace_faces(&h).unwrap().len(), 4);
    let s = stats(&h).unwrap();
    assert_eq!((s.n, s.g, s.c, s.i), (2, 0, 1, 3));
}

#[test]
fn known_brackets() {
    let t: LaurentPoly = "-A^5 - A^-3 + A^-7".parse().unwrap();
    let h: LaurentPoly = "-A^4 - A^-4".parse().unwrap();
    assert_eq!(brute_force_bracket(&standard::trefoil()).unwrap(), t);
    assert_eq!(brute_force_bracket(&standard::hopf()).unwrap(), h);
    assert_eq!(engine::compute_bracket(&standard::trefoil(), Order::Exact).unwrap().polynomial, t);
    assert_eq!(engine::compute_bracket(&standard::unknot(), Order::Exact).unwrap().polynomial, LaurentPoly::one());
}

#[test]
fn corpus_faces_and_surfaces() {
    let corpus = load_corpus(&corpus_dir()).unwrap();
    assert!(corpus.len() >= 50);
    for e in &corpus {
        let d = &e.diagram;
        let map = PlanarMap::build(d).unwrap();
        let faces = trace_faces(d).unwrap().len();
        if d.free_loops() == 0 && d.n() > 0 && stats(d).unwrap().c == 1 {
            // a connected 4-valent map: V - E + F = 2 with E = 2V
            assert_eq!(faces as i64 - d.n() as i64, 2, "{}", e.name);
        }
        let s = stats(d).unwrap();
        assert_eq!(s.i, s.n + s.c - s.g / 2, "{}", e.name);
        let regions = Regions::compute(&map);
        for seed in [Color::Light, Color::Dark] {
            let cb = checkerboard_of(&map, &regions, seed).unwrap();
            assert_eq!(dark_surface_euler(&map, &regions, &cb), cb.e, "{}", e.name);
        }
    }
}
