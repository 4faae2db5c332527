//! Corpus verification: engine against the brute-force oracle, order
//! independence, structural checks, girth, Jones values and invariance.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cutorder::{exact, AnnealOptions, EXACT_MAX_N};
use crate::engine::{compute, expand, jones, Checks, EngineError, EngineOptions, Order};
use crate::families::with_kink;
use crate::laurent::LaurentPoly;
use crate::oracle::{brute_force, brute_force_tangle_expansion};
use crate::planar::{parse_pd, strands, Diagram, PlanarMap};
use crate::skein::{Mode, Mutation};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{path}: {message}")]
    Corpus { path: PathBuf, message: String },
    #[error("corpus directory {0} holds no diagrams")]
    Empty(PathBuf),
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    /// Subdirectory of the corpus, e.g. `knots`.
    pub group: String,
    pub path: PathBuf,
    pub diagram: Diagram,
    /// `# key: value` header lines.
    pub meta: BTreeMap<String, String>,
}

impl CorpusEntry {
    pub fn expected(&self, key: &str) -> Option<LaurentPoly> {
        self.meta.get(key).and_then(|s| s.parse().ok())
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for e in fs::read_dir(dir)? {
        let p = e?.path();
        if p.is_dir() {
            collect_files(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "pd") {
            out.push(p);
        }
    }
    Ok(())
}

pub fn load_entry(path: &Path, group: &str) -> Result<CorpusEntry, VerifyError> {
    let err = |message: String| VerifyError::Corpus {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut meta = BTreeMap::new();
    for line in text.lines() {
        if let Some(rest) = line.trim().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
    }
    let diagram = parse_pd(&text).map_err(|e| err(e.to_string()))?;
    let name = meta
        .get("name")
        .cloned()
        .unwrap_or_else(|| path.file_stem().unwrap().to_string_lossy().into_owned());
    Ok(CorpusEntry {
        name,
        group: group.to_string(),
        path: path.to_path_buf(),
        diagram,
        meta,
    })
}

/// Every `.pd` file below `dir`, sorted by group then name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, VerifyError> {
    let mut files = Vec::new();
    collect_files(dir, &mut files).map_err(|e| VerifyError::Corpus {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    for f in files {
        let group = f
            .parent()
            .and_then(|p| p.strip_prefix(dir).ok())
            .map(|p| p.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push(load_entry(&f, &group)?);
    }
    if out.is_empty() {
        return Err(VerifyError::Empty(dir.to_path_buf()));
    }
    out.sort_by(|a, b| (&a.group, natural_key(&a.name)).cmp(&(&b.group, natural_key(&b.name))));
    Ok(out)
}

/// Sort key treating digit runs as numbers, so `9_2` precedes `9_10`.
fn natural_key(s: &str) -> Vec<(u64, String)> {
    let mut out = Vec::new();
    let mut num = String::new();
    let mut text = String::new();
    for ch in s.chars() {
        if ch.is_ascii_digit() {
            if !text.is_empty() {
                out.push((u64::MAX, std::mem::take(&mut text)));
            }
            num.push(ch);
        } else {
            if !num.is_empty() {
                out.push((num.parse().unwrap_or(u64::MAX), String::new()));
                num.clear();
            }
            text.push(ch);
        }
    }
    if !num.is_empty() {
        out.push((num.parse().unwrap_or(u64::MAX), String::new()));
    }
    if !text.is_empty() {
        out.push((u64::MAX, text));
    }
    out
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Entries with more crossings are skipped.
    pub max_n: usize,
    pub oracle_max_n: usize,
    pub tangle_max_n: usize,
    pub tangle_max_g: usize,
    pub exact_max_n: usize,
    pub invariance_max_n: usize,
    pub seed: u64,
    pub anneal_iterations: usize,
    pub mutation: Option<Mutation>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_n: usize::MAX,
            oracle_max_n: 12,
            tangle_max_n: 10,
            tangle_max_g: 8,
            exact_max_n: 12,
            invariance_max_n: 10,
            seed: 7,
            anneal_iterations: 200,
            mutation: None,
        }
    }
}

pub const SUITES: [&str; 9] = [
    "oracle",
    "orders",
    "mod4",
    "span",
    "storage",
    "girth",
    "jones",
    "invariance",
    "tangles",
];

const KEPT_FAILURES: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub failed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryReport {
    pub name: String,
    pub group: String,
    pub n: usize,
    pub girth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_girth: Option<usize>,
    pub anneal_girth: usize,
    pub peak_state_size: usize,
    pub bracket: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyTimings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub seed: u64,
    pub max_n: Option<usize>,
    pub diagrams: usize,
    pub suites: Vec<SuiteReport>,
    pub entries: Vec<EntryReport>,
    pub timings: VerifyTimings,
}

impl VerifyReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }
}

/// Outcomes of one entry, keyed by suite.
#[derive(Default)]
struct Tally {
    results: BTreeMap<&'static str, (u64, Vec<String>)>,
}

impl Tally {
    fn record(&mut self, suite: &'static str, ok: bool, why: impl FnOnce() -> String) {
        let e = self.results.entry(suite).or_default();
        e.0 += 1;
        if !ok {
            e.1.push(why());
        }
    }

    fn checks(&mut self, name: &str, what: &str, c: &Checks) {
        for (suite, check) in [("mod4", &c.mod4), ("span", &c.span), ("storage", &c.storage), ("girth", &c.sqrt_bound)] {
            self.record(suite, check.passed, || {
                format!("{name} ({what}): {}", check.examples.first().cloned().unwrap_or_default())
            });
        }
    }

    fn error(&mut self, suite: &'static str, name: &str, e: &EngineError) {
        self.record(suite, false, || format!("{name}: {e}"));
    }

    fn failed(&self) -> bool {
        self.results.values().any(|(_, f)| !f.is_empty())
    }
}

struct EntryOutcome {
    report: EntryReport,
    tally: Tally,
}

fn opts(mode: Mode, order: Order, v: &VerifyOptions) -> EngineOptions {
    EngineOptions::new(mode).with_order(order).with_mutation(v.mutation).deep()
}

/// Jones polynomials agree up to `A <-> A^-1`, since tables list one chirality.
fn jones_match(got: &LaurentPoly, want: &LaurentPoly) -> bool {
    got == want || got.mirror() == *want
}

fn verify_entry(e: &CorpusEntry, v: &VerifyOptions) -> EntryOutcome {
    let d = &e.diagram;
    let name = e.name.as_str();
    let n = d.n();
    let mut t = Tally::default();
    let mut report = EntryReport {
        name: e.name.clone(),
        group: e.group.clone(),
        n,
        girth: 0,
        exact_girth: None,
        anneal_girth: 0,
        peak_state_size: 0,
        bracket: String::new(),
        passed: false,
    };
    if !d.is_closed() {
        verify_tangle(name, d, v, &mut t);
        report.passed = !t.failed();
        return EntryOutcome { report, tally: t };
    }
    let anneal = Order::Anneal(AnnealOptions {
        seed: v.seed,
        iterations: v.anneal_iterations,
        ..Default::default()
    });
    for mode in [Mode::Bracket, Mode::Pkbp] {
        let greedy = match compute(d, &opts(mode, Order::default(), v)) {
            Ok(r) => r,
            Err(err) => {
                t.error("oracle", name, &err);
                continue;
            }
        };
        t.checks(name, "greedy", &greedy.checks);
        if mode == Mode::Bracket {
            report.girth = greedy.girth;
            report.peak_state_size = greedy.peak_state_size;
            report.bracket = greedy.polynomial.to_string();
        }
        if n <= v.oracle_max_n {
            match brute_force(d, mode) {
                Ok(want) => t.record("oracle", greedy.polynomial == want, || {
                    format!("{name} {mode:?}: engine {} oracle {want}", greedy.polynomial)
                }),
                Err(err) => t.record("oracle", false, || format!("{name}: {err}")),
            }
        }
        if mode == Mode::Bracket {
            if let Some(want) = e.expected("bracket") {
                t.record("oracle", greedy.polynomial == want, || {
                    format!("{name}: engine {} annotated {want}", greedy.polynomial)
                });
            }
        }
        if mode == Mode::Pkbp {
            let all_pos = greedy.polynomial.all_positive();
            t.record("span", all_pos, || format!("{name}: pKBP has a negative coefficient"));
        }
        let mut orders = vec![("anneal", anneal.clone())];
        if n <= v.exact_max_n.min(EXACT_MAX_N) {
            orders.push(("exact", Order::Exact));
        }
        for (label, order) in orders {
            match compute(d, &opts(mode, order, v)) {
                Ok(r) => {
                    t.record("orders", r.polynomial == greedy.polynomial, || {
                        format!("{name} {mode:?}: {label} gives {} greedy {}", r.polynomial, greedy.polynomial)
                    });
                    t.record("girth", r.girth <= greedy.girth, || {
                        format!("{name}: {label} girth {} above greedy {}", r.girth, greedy.girth)
                    });
                    t.checks(name, label, &r.checks);
                    if mode == Mode::Bracket {
                        match label {
                            "exact" => report.exact_girth = Some(r.girth),
                            _ => report.anneal_girth = r.girth,
                        }
                    }
                }
                Err(err) => t.error("orders", name, &err),
            }
        }
    }
    verify_jones(e, v, &mut t);
    if n <= v.invariance_max_n {
        verify_invariance(name, d, v, &mut t);
    }
    if n <= v.tangle_max_n {
        verify_subtangles(name, d, v, &mut t);
    }
    report.passed = !t.failed();
    EntryOutcome { report, tally: t }
}

fn verify_jones(e: &CorpusEntry, v: &VerifyOptions, t: &mut Tally) {
    let d = &e.diagram;
    let name = e.name.as_str();
    let o = opts(Mode::Bracket, Order::default(), v);
    if let Some(want) = e.expected("jones_a") {
        match jones(d, None, &o) {
            Ok(j) => t.record("jones", jones_match(&j.polynomial, &want), || {
                format!("{name}: Jones {} expected {want} or its mirror", j.polynomial)
            }),
            Err(err) => t.error("jones", name, &err),
        }
    }
    if let Some(want) = e.expected("jones_oriented_a") {
        let map = match PlanarMap::build(d) {
            Ok(m) => m,
            Err(err) => return t.error("jones", name, &err.into()),
        };
        let flips = vec![false; strands(d, &map).len()];
        match jones(d, Some(&flips), &o) {
            Ok(j) => t.record("jones", j.polynomial == want, || {
                format!("{name}: oriented Jones {} expected {want}", j.polynomial)
            }),
            Err(err) => t.error("jones", name, &err),
        }
    }
}

fn bracket(d: &Diagram, v: &VerifyOptions) -> Result<LaurentPoly, EngineError> {
    Ok(compute(d, &opts(Mode::Bracket, Order::default(), v))?.polynomial)
}

fn verify_invariance(name: &str, d: &Diagram, v: &VerifyOptions, t: &mut Tally) {
    let base = match bracket(d, v) {
        Ok(b) => b,
        Err(err) => return t.error("invariance", name, &err),
    };
    match bracket(&d.mirror(), v) {
        Ok(m) => t.record("invariance", m == base.mirror(), || {
            format!("{name}: mirror gives {m}, expected {}", base.mirror())
        }),
        Err(err) => t.error("invariance", name, &err),
    }
    match bracket(&d.with_free_loops(1), v) {
        Ok(u) => {
            let want = base.mul(&LaurentPoly::delta());
            t.record("invariance", u == want, || format!("{name}: extra unknot gives {u}, expected {want}"));
        }
        Err(err) => t.error("invariance", name, &err),
    }
    let Some(&label) = d.crossings().first().map(|c| &c.arcs[0]) else {
        return;
    };
    let o = opts(Mode::Bracket, Order::default(), v);
    let knot = d.is_closed() && PlanarMap::build(d).map(|m| strands(d, &m).len() == 1).unwrap_or(false);
    let base_jones = if knot { jones(d, None, &o).ok().map(|j| j.polynomial) } else { None };
    for side in [false, true] {
        for over in [0u8, 1] {
            let k = with_kink(d, label, side, over);
            match bracket(&k, v) {
                Ok(kb) => {
                    let ok = kb == base.mul(&LaurentPoly::monomial(-1, 3)) || kb == base.mul(&LaurentPoly::monomial(-1, -3));
                    t.record("invariance", ok, || format!("{name}: kink gives {kb} from {base}"));
                }
                Err(err) => t.error("invariance", name, &err),
            }
            if let Some(bj) = &base_jones {
                match jones(&k, None, &o) {
                    Ok(kj) => t.record("invariance", kj.polynomial == *bj, || {
                        format!("{name}: Jones with a kink {} differs from {bj}", kj.polynomial)
                    }),
                    Err(err) => t.error("invariance", name, &err),
                }
            }
        }
    }
}

fn verify_tangle(name: &str, d: &Diagram, v: &VerifyOptions, t: &mut Tally) {
    for mode in [Mode::Bracket, Mode::Pkbp] {
        match expand(d, &opts(mode, Order::default(), v)) {
            Ok(r) => {
                t.checks(name, "tangle", &r.checks);
                if d.n() <= v.tangle_max_n && d.g() <= v.tangle_max_g {
                    match brute_force_tangle_expansion(d, mode) {
                        Ok(want) => t.record("tangles", r.expansion == want, || {
                            format!("{name} {mode:?}: tangle expansion differs from the oracle")
                        }),
                        Err(err) => t.record("tangles", false, || format!("{name}: {err}")),
                    }
                }
            }
            Err(err) => t.error("tangles", name, &err),
        }
    }
}

/// Intermediate tangles of the greedy cutting, expanded on their own.
fn verify_subtangles(name: &str, d: &Diagram, v: &VerifyOptions, t: &mut Tally) {
    let Ok(map) = PlanarMap::build(d) else { return };
    let Ok(c) = crate::cutorder::greedy(&map, Default::default()) else { return };
    let mut fr = crate::cutorder::Frontier::new(&map);
    let mut picked: Vec<Diagram> = Vec::new();
    for s in &c.steps {
        if fr.apply(s).is_err() {
            break;
        }
        let (g, nt) = (fr.g(), fr.n_processed());
        if nt > 0 && nt < d.n() && g > 0 && g <= v.tangle_max_g && nt % 3 == 1 {
            picked.push(fr.partial_tangle(d));
        }
    }
    picked.dedup();
    for (i, sub) in picked.iter().enumerate() {
        verify_tangle(&format!("{name}/part{i}"), sub, v, t);
    }
}

/// Runs every suite over the corpus; entries run in parallel and are
/// reported in corpus order.
pub fn run(corpus: &[CorpusEntry], v: &VerifyOptions) -> VerifyReport {
    let t0 = Instant::now();
    let selected: Vec<&CorpusEntry> = corpus.iter().filter(|e| e.diagram.n() <= v.max_n).collect();
    let outcomes: Vec<EntryOutcome> = selected.par_iter().map(|e| verify_entry(e, v)).collect();
    let mut suites: Vec<SuiteReport> = SUITES
        .iter()
        .map(|s| SuiteReport {
            name: s.to_string(),
            passed: true,
            ..Default::default()
        })
        .collect();
    for o in &outcomes {
        for (name, (checked, failures)) in &o.tally.results {
            let s = suites.iter_mut().find(|s| s.name == *name).expect("known suite");
            s.checked += checked;
            s.failed += failures.len() as u64;
            for f in failures {
                if s.failures.len() < KEPT_FAILURES {
                    s.failures.push(f.clone());
                }
            }
        }
    }
    if let Some(fig8) = selected.iter().find(|e| e.name == "4_1") {
        let girth = PlanarMap::build(&fig8.diagram).ok().and_then(|m| exact(&m).ok()).map(|c| c.girth);
        let s = suites.iter_mut().find(|s| s.name == "girth").unwrap();
        s.checked += 1;
        if girth != Some(4) {
            s.failed += 1;
            s.failures.push(format!("4_1: exact girth {girth:?}, expected 4"));
        }
    }
    for s in &mut suites {
        s.passed = s.failed == 0;
    }
    let passed = suites.iter().all(|s| s.passed);
    VerifyReport {
        passed,
        seed: v.seed,
        max_n: (v.max_n != usize::MAX).then_some(v.max_n),
        diagrams: selected.len(),
        suites,
        entries: outcomes.into_iter().map(|o| o.report).collect(),
        timings: VerifyTimings {
            total_ms: t0.elapsed().as_secs_f64() * 1e3,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str, pd: &str) -> CorpusEntry {
        CorpusEntry {
            name: name.into(),
            group: "test".into(),
            path: PathBuf::new(),
            diagram: parse_pd(pd).unwrap(),
            meta: BTreeMap::new(),
        }
    }

    #[test]
    fn natural_order() {
        let mut v = vec!["9_10", "9_2", "10_1", "3_1"];
        v.sort_by_key(|s| natural_key(s));
        assert_eq!(v, vec!["3_1", "9_2", "9_10", "10_1"]);
    }

    #[test]
    fn small_corpus_passes_and_mutation_fails() {
        let corpus = vec![
            entry("O", "O"),
            entry("3_1", "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]"),
            entry("4_1", "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]"),
            entry("twist", "X[1,2,3,4] X[4,3,5,6] B[1,2,5,6]"),
        ];
        let v = VerifyOptions {
            anneal_iterations: 20,
            ..Default::default()
        };
        let r = run(&corpus, &v);
        assert!(r.passed, "{:#?}", r.suites);
        for m in [Mutation::DeltaSign, Mutation::SmoothingSwap, Mutation::CatalanIndex] {
            let bad = run(&corpus, &VerifyOptions { mutation: Some(m), ..v.clone() });
            assert!(!bad.passed, "{m:?} went unnoticed");
        }
    }
}
