//! Bracket, pKBP, tangle expansion and Jones polynomial by folding a
//! cutting through the skein state.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::cutorder::{self, AnnealOptions, CutError, Cutting, Frontier, GreedyOptions, Step};
use crate::laurent::{Grade, LaurentError, LaurentPoly};
use crate::matchings::{catalan_u64, Matching};
use crate::planar::{
    base_dark_regions, checkerboard_of, segment_colors, stats_of, writhe, Color, Diagram, PlanarError,
    PlanarMap, Regions,
};
use crate::skein::{Mode, Mutation, SkeinConfig, SkeinError, SkeinState};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Skein(#[from] SkeinError),
    #[error("final division by the loop value failed: {0}")]
    NotDivisible(LaurentError),
    #[error("expected a {0} diagram")]
    WrongShape(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Order {
    Greedy(GreedyOptions),
    Anneal(AnnealOptions),
    Exact,
    Explicit(Cutting),
}

impl Default for Order {
    fn default() -> Self {
        Order::Greedy(GreedyOptions::default())
    }
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub order: Order,
    pub config: SkeinConfig,
    /// Also check the grading of every coefficient against the
    /// checkerboard formula of each intermediate tangle.
    pub deep_checks: bool,
    pub trace: bool,
}

impl EngineOptions {
    pub fn new(mode: Mode) -> Self {
        EngineOptions {
            order: Order::default(),
            config: SkeinConfig::new(mode),
            deep_checks: false,
            trace: false,
        }
    }

    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn with_mutation(mut self, m: Option<Mutation>) -> Self {
        self.config.mutation = m;
        self
    }

    pub fn deep(mut self) -> Self {
        self.deep_checks = true;
        self
    }
}

const EXAMPLES: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub checked: u64,
    pub violations: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub examples: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            passed: true,
            ..Default::default()
        }
    }

    fn record(&mut self, ok: bool, why: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            self.violations += 1;
            if self.examples.len() < EXAMPLES {
                self.examples.push(why());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Checks {
    /// Exponents of every coefficient in one class mod 4, matching the
    /// checkerboard grading where it is evaluated.
    pub mod4: Check,
    /// Per-coefficient span at most `4(n + c) - 2g`; total span at most
    /// `4(n + c)`; spans are multiples of 4.
    pub span: Check,
    /// Entries at most `C_{g/2}` and terms per coefficient at most
    /// `n + c - g/2 + 1`.
    pub storage: Check,
    /// Terms per coefficient at most `n - g/2 + 1`, the count that leaves
    /// the components out. Reported, not enforced.
    pub terms_literal: Check,
    pub sqrt_bound: Check,
}

impl Checks {
    fn new() -> Self {
        Checks {
            mod4: Check::new(),
            span: Check::new(),
            storage: Check::new(),
            terms_literal: Check::new(),
            sqrt_bound: Check::new(),
        }
    }

    /// Names of the enforced checks that failed.
    pub fn failed(&self) -> Vec<&'static str> {
        [
            ("mod4", &self.mod4),
            ("span", &self.span),
            ("storage", &self.storage),
            ("sqrt_bound", &self.sqrt_bound),
        ]
        .into_iter()
        .filter(|(_, c)| !c.passed)
        .map(|(n, _)| n)
        .collect()
    }

    pub fn all_passed(&self) -> bool {
        self.failed().is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub step: Step,
    pub g: usize,
    pub entries: usize,
    pub max_terms: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub cutting_ms: f64,
    pub fold_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketResult {
    pub polynomial: LaurentPoly,
    /// Fold result before the final division by the loop value.
    pub raw: LaurentPoly,
    pub mode: Mode,
    pub n: usize,
    pub girth: usize,
    pub peak_state_size: usize,
    pub checks: Checks,
    #[serde(skip)]
    pub cutting: Cutting,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
    pub timings: Timings,
}

#[derive(Clone, Debug, Serialize)]
pub struct TangleResult {
    #[serde(serialize_with = "expansion_json")]
    pub expansion: BTreeMap<Matching, LaurentPoly>,
    pub mode: Mode,
    pub girth: usize,
    pub peak_state_size: usize,
    pub checks: Checks,
    #[serde(skip)]
    pub cutting: Cutting,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
    pub timings: Timings,
}

fn expansion_json<S: serde::Serializer>(e: &BTreeMap<Matching, LaurentPoly>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(e.iter().map(|(m, p)| (m.to_string(), p.to_string())))
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub fn cutting_for(map: &PlanarMap, order: &Order) -> Result<Cutting, CutError> {
    match order {
        Order::Greedy(o) => cutorder::greedy(map, *o),
        Order::Exact => cutorder::exact(map),
        Order::Anneal(o) => {
            let start = cutorder::greedy(map, GreedyOptions::default())?;
            cutorder::anneal(map, &start, *o)
        }
        Order::Explicit(c) => {
            c.validate(map)?;
            Ok(c.clone())
        }
    }
}

struct Fold {
    state: SkeinState,
    peak: usize,
    checks: Checks,
    trace: Vec<TraceRow>,
}

fn residue(e: i64) -> i64 {
    e.rem_euclid(4)
}

fn grading_checks(d: &Diagram, fr: &Frontier, state: &SkeinState, check: &mut Check) -> Result<(), EngineError> {
    let t = fr.partial_tangle(d);
    let tmap = PlanarMap::build(&t)?;
    let regions = Regions::compute(&tmap);
    for seed in [Color::Light, Color::Dark] {
        let cb = checkerboard_of(&tmap, &regions, seed)?;
        let segs = segment_colors(&tmap, &regions, &cb);
        for (m, p) in state.iter() {
            let e_b = base_dark_regions(&segs, cb.outer_color, &m) as i64;
            let want = residue(cb.w + 2 * cb.e - 2 * e_b);
            let bad = p.terms().iter().find(|(e, _)| residue(*e) != want);
            check.record(bad.is_none(), || {
                format!(
                    "{} crossings absorbed, {m}: {p} has exponents outside {want} mod 4 (outer {seed:?})",
                    fr.n_processed()
                )
            });
        }
    }
    Ok(())
}

fn fold(d: &Diagram, map: &PlanarMap, cutting: &Cutting, opts: &EngineOptions) -> Result<Fold, EngineError> {
    let mut fr = Frontier::new(map);
    let mut state = SkeinState::init(opts.config);
    let mut checks = Checks::new();
    let mut peak = state.len();
    let mut trace = Vec::new();
    let catalan_index = |g: usize| match opts.config.mutation {
        Some(Mutation::CatalanIndex) => (g / 2).saturating_sub(1),
        _ => g / 2,
    };
    for (index, step) in cutting.steps.iter().enumerate() {
        fr.apply(step).map_err(|reason| CutError::InvalidStep { index, reason })?;
        state = state.apply(&step.event())?;
        let (g, n_t, c_t) = (fr.g() as i64, fr.n_processed() as i64, fr.components() as i64);
        peak = peak.max(state.len());
        let cap = catalan_u64(catalan_index(fr.g()));
        checks.storage.record(state.len() as u64 <= cap, || {
            format!("step {index}: {} entries exceed C_{} = {cap}", state.len(), catalan_index(fr.g()))
        });
        let mut max_terms = 0;
        for (m, p) in state.iter() {
            let terms = p.term_count() as i64;
            max_terms = max_terms.max(p.term_count());
            let sg = p.span_and_grade().expect("stored coefficients are nonzero");
            checks.mod4.record(matches!(sg.grade, Grade::Residue(_)), || {
                format!("step {index}, {m}: {p} mixes residues mod 4")
            });
            let bound = 4 * (n_t + c_t) - 2 * g;
            checks.span.record(sg.span as i64 <= bound && sg.span % 4 == 0, || {
                format!("step {index}, {m}: span {} of {p} exceeds {bound}", sg.span)
            });
            let derived = n_t + c_t - g / 2 + 1;
            checks.storage.record(terms <= derived, || {
                format!("step {index}, {m}: {terms} terms exceed {derived}")
            });
            let literal = n_t - g / 2 + 1;
            checks.terms_literal.record(terms <= literal, || {
                format!("step {index}, {m}: {terms} terms exceed {literal}")
            });
        }
        if opts.deep_checks {
            grading_checks(d, &fr, &state, &mut checks.mod4)?;
        }
        if opts.trace {
            trace.push(TraceRow {
                step: *step,
                g: fr.g(),
                entries: state.len(),
                max_terms,
            });
        }
    }
    let state = state.rotate(cutting.rotation);
    Ok(Fold {
        state,
        peak,
        checks,
        trace,
    })
}

fn sqrt_check(checks: &mut Checks, n: usize, girth: usize) {
    let bound = cutorder::sqrt_bound(n).ceil() as usize;
    checks.sqrt_bound.record(n == 0 || girth <= bound, || {
        format!("girth {girth} exceeds {bound} for {n} crossings")
    });
}

/// Bracket (or pKBP) of a closed diagram, normalized so the unknot is 1.
pub fn compute(d: &Diagram, opts: &EngineOptions) -> Result<BracketResult, EngineError> {
    if !d.is_closed() {
        return Err(EngineError::WrongShape("closed"));
    }
    let map = PlanarMap::build(d)?;
    let t0 = Instant::now();
    let cutting = cutting_for(&map, &opts.order)?;
    let cutting_ms = ms(t0);
    let t1 = Instant::now();
    let Fold {
        state,
        peak,
        mut checks,
        trace,
    } = fold(d, &map, &cutting, opts)?;
    let raw = state.scalar().unwrap_or_default();
    let polynomial = if d.n() == 0 && d.free_loops() == 0 {
        raw.clone()
    } else {
        raw.exact_div(&opts.config.loop_value()).map_err(EngineError::NotDivisible)?
    };
    let fold_ms = ms(t1);
    let c = stats_of(&map).c as i64;
    let n = d.n() as i64;
    if !raw.is_zero() {
        let span = raw.span() as i64;
        checks.span.record(span <= 4 * (n + c), || {
            format!("total span {span} exceeds {}", 4 * (n + c))
        });
    }
    link_grading(&map, &raw, &mut checks.mod4)?;
    sqrt_check(&mut checks, d.n(), cutting.girth);
    Ok(BracketResult {
        polynomial,
        raw,
        mode: opts.config.mode,
        n: d.n(),
        girth: cutting.girth,
        peak_state_size: peak,
        checks,
        cutting,
        trace,
        timings: Timings { cutting_ms, fold_ms },
    })
}

/// Raw closed-diagram value against `w + 2e - 2e_B` under both colorings,
/// where `e_B` counts the dark disk of the empty closure.
fn link_grading(map: &PlanarMap, raw: &LaurentPoly, check: &mut Check) -> Result<(), EngineError> {
    let regions = Regions::compute(map);
    for seed in [Color::Light, Color::Dark] {
        let cb = checkerboard_of(map, &regions, seed)?;
        let e_b = i64::from(cb.outer_color == Color::Dark);
        let want = residue(cb.w + 2 * cb.e - 2 * e_b);
        let bad: Vec<i64> = raw
            .terms()
            .iter()
            .map(|(e, _)| *e)
            .filter(|&e| residue(e) != want)
            .collect();
        check.record(bad.is_empty(), || {
            format!("raw exponents {bad:?} not {want} mod 4 (w {}, e {}, outer {seed:?})", cb.w, cb.e)
        });
    }
    Ok(())
}

pub fn compute_bracket(d: &Diagram, order: Order) -> Result<BracketResult, EngineError> {
    compute(d, &EngineOptions::new(Mode::Bracket).with_order(order))
}

pub fn compute_pkbp(d: &Diagram, order: Order) -> Result<BracketResult, EngineError> {
    compute(d, &EngineOptions::new(Mode::Pkbp).with_order(order))
}

/// Full expansion of a tangle over noncrossing matchings of its boundary.
pub fn expand(d: &Diagram, opts: &EngineOptions) -> Result<TangleResult, EngineError> {
    let map = PlanarMap::build(d)?;
    let t0 = Instant::now();
    let cutting = cutting_for(&map, &opts.order)?;
    let cutting_ms = ms(t0);
    let t1 = Instant::now();
    let Fold {
        state,
        peak,
        mut checks,
        trace,
    } = fold(d, &map, &cutting, opts)?;
    let fold_ms = ms(t1);
    sqrt_check(&mut checks, d.n(), cutting.girth);
    Ok(TangleResult {
        expansion: state.to_map(),
        mode: opts.config.mode,
        girth: cutting.girth,
        peak_state_size: peak,
        checks,
        cutting,
        trace,
        timings: Timings { cutting_ms, fold_ms },
    })
}

pub fn expand_tangle(d: &Diagram, order: Order) -> Result<BTreeMap<Matching, LaurentPoly>, EngineError> {
    Ok(expand(d, &EngineOptions::new(Mode::Bracket).with_order(order))?.expansion)
}

#[derive(Clone, Debug, Serialize)]
pub struct JonesResult {
    /// `(-A)^(-3w)` times the bracket.
    pub polynomial: LaurentPoly,
    pub writhe: i64,
    /// The same polynomial in `t = A^-4`, when every exponent is even.
    pub in_t: Option<String>,
    pub bracket: BracketResult,
}

/// `flips` reverses strands as in [`crate::planar::crossing_signs`]; knots
/// need none.
pub fn jones(d: &Diagram, flips: Option<&[bool]>, opts: &EngineOptions) -> Result<JonesResult, EngineError> {
    let w = writhe(d, flips)?;
    let mut o = opts.clone();
    o.config.mode = Mode::Bracket;
    let bracket = compute(d, &o)?;
    let sign = if w.rem_euclid(2) == 0 { 1 } else { -1 };
    let polynomial = bracket.polynomial.mul(&LaurentPoly::monomial(sign, -3 * w));
    let in_t = format_in_t(&polynomial);
    Ok(JonesResult {
        polynomial,
        writhe: w,
        in_t,
        bracket,
    })
}

pub fn compute_jones(d: &Diagram, flips: Option<&[bool]>) -> Result<LaurentPoly, EngineError> {
    Ok(jones(d, flips, &EngineOptions::new(Mode::Bracket))?.polynomial)
}

/// Renders a polynomial in `A` as one in `t = A^-4`; exponents `2 mod 4`
/// give half-integer powers. `None` if some exponent is odd.
pub fn format_in_t(p: &LaurentPoly) -> Option<String> {
    if p.terms().iter().any(|(e, _)| e % 2 != 0) {
        return None;
    }
    if p.is_zero() {
        return Some("0".into());
    }
    let mut out = String::new();
    for (i, (e, c)) in p.terms().iter().enumerate() {
        // ascending A exponent is descending t exponent
        let half = -e / 2;
        let neg = !c.is_positive();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let power = match (half % 2 == 0, half / 2) {
            (true, 0) => String::new(),
            (true, 1) => "t".into(),
            (true, k) => format!("t^{k}"),
            (false, _) => format!("t^({half}/2)"),
        };
        match (mag.is_one(), power.is_empty()) {
            (true, true) => out.push('1'),
            (true, false) => out.push_str(&power),
            (false, true) => out.push_str(&mag.to_string()),
            (false, false) => out.push_str(&format!("{mag}*{power}")),
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_force, brute_force_tangle_expansion};
    use crate::planar::parse_pd;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    fn d(pd: &str) -> Diagram {
        parse_pd(pd).unwrap()
    }

    const TREFOIL: &str = "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]";
    const FIGURE_EIGHT: &str = "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]";
    const HOPF: &str = "X[1,3,2,4] X[3,1,4,2]";

    #[test]
    fn small_brackets() {
        let b = |pd: &str| compute_bracket(&d(pd), Order::default()).unwrap().polynomial;
        assert_eq!(b("O"), LaurentPoly::one());
        assert_eq!(b("O O"), LaurentPoly::delta());
        assert_eq!(b(HOPF), p("-A^4 - A^-4"));
        let t = b(TREFOIL);
        assert!(t == p("-A^5 - A^-3 + A^-7") || t == p("-A^5 - A^-3 + A^-7").mirror());
        assert_eq!(compute_pkbp(&d("O O"), Order::default()).unwrap().polynomial, LaurentPoly::delta_plus());
    }

    #[test]
    fn agrees_with_oracle_under_every_order() {
        for pd in ["O", HOPF, TREFOIL, FIGURE_EIGHT, "X[1,2,2,1]", "X[1,2,2,1] O", "X[1,2,2,3] X[3,4,4,1]"] {
            let dg = d(pd);
            for mode in [Mode::Bracket, Mode::Pkbp] {
                let want = brute_force(&dg, mode).unwrap();
                for order in [Order::default(), Order::Exact, Order::Anneal(AnnealOptions { iterations: 20, ..Default::default() })] {
                    let r = compute(&dg, &EngineOptions::new(mode).with_order(order).deep()).unwrap();
                    assert_eq!(r.polynomial, want, "{pd} {mode:?}");
                    assert!(r.checks.all_passed(), "{pd}: {:?}", r.checks);
                }
            }
        }
    }

    #[test]
    fn tangles_agree_with_oracle() {
        for pd in [
            "X[1,2,3,4] B[1,2,3,4]",
            "X[1,2,3,4]o0 B[1,2,3,4]",
            "B[1,1]",
            "B[1,2,2,1]",
            "X[1,2,3,4] X[4,3,5,6] B[1,2,5,6]",
            "X[1,2,3,4] X[3,5,6,4] B[1,2,5,6]",
            "X[1,2,2,1] B[3,3]",
            "X[1,2,2,1] O B[3,4,4,3]",
        ] {
            let dg = d(pd);
            for mode in [Mode::Bracket, Mode::Pkbp] {
                let want = brute_force_tangle_expansion(&dg, mode).unwrap();
                let r = expand(&dg, &EngineOptions::new(mode).deep()).unwrap();
                assert_eq!(r.expansion, want, "{pd} {mode:?}");
                assert!(r.checks.all_passed(), "{pd}: {:?}", r.checks);
            }
        }
    }

    #[test]
    fn jones_values() {
        assert_eq!(compute_jones(&d("O"), None).unwrap(), LaurentPoly::one());
        let j = compute_jones(&d(TREFOIL), None).unwrap();
        assert_eq!(j.term_count(), 3);
        let m = compute_jones(&d(TREFOIL).mirror(), None).unwrap();
        assert_eq!(m, j.mirror());
        assert!(compute_jones(&d(HOPF), None).is_err());
        assert!(compute_jones(&d(HOPF), Some(&[false, false])).is_ok());
    }

    #[test]
    fn t_rendering() {
        assert_eq!(format_in_t(&p("A^-12 + A^-4 - A^-16")).unwrap(), "-t^4 + t^3 + t");
        assert_eq!(format_in_t(&p("-A^2")).unwrap(), "-t^(-1/2)");
        assert_eq!(format_in_t(&p("A")), None);
    }

    #[test]
    fn literal_term_count_is_exceeded_by_one_crossing() {
        let r = expand(&d("X[1,2,3,4] B[1,2,3,4]"), &EngineOptions::new(Mode::Bracket)).unwrap();
        assert!(!r.checks.terms_literal.passed);
        assert!(r.checks.storage.passed);
    }

    #[test]
    fn mutations_are_noticed() {
        let dg = d(TREFOIL);
        let want = brute_force(&dg, Mode::Bracket).unwrap();
        let run = |m| compute(&dg, &EngineOptions::new(Mode::Bracket).with_mutation(Some(m)).deep());
        assert_ne!(run(Mutation::DeltaSign).map(|r| r.polynomial).ok(), Some(want.clone()));
        assert_ne!(run(Mutation::SmoothingSwap).unwrap().polynomial, want);
        assert!(!run(Mutation::CatalanIndex).unwrap().checks.storage.passed);
    }
}
