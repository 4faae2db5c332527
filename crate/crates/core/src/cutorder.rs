//! Cutting sequences: the order in which a scan absorbs the crossings of a
//! diagram, and the frontier bookkeeping needed to check one.
//!
//! The frontier is the list of points where arcs cross the boundary of the
//! absorbed region, counterclockwise around it. Each point remembers its
//! *target*, the dart at the far (unabsorbed) end of its arc.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planar::{Crossing, Diagram, PlanarError, PlanarMap};
use crate::skein::Event;

/// Upper limit for the exact search.
pub const EXACT_MAX_N: usize = 20;

/// Constant in the square-root girth bound for planar diagrams.
pub fn djidjev_vrto() -> f64 {
    6.0 * 2f64.sqrt() + 5.0 * 3f64.sqrt()
}

pub fn sqrt_bound(n: usize) -> f64 {
    djidjev_vrto() * (n as f64).sqrt()
}

/// The empty diagram is exempt.
pub fn within_sqrt_bound(n: usize, girth: usize) -> bool {
    n == 0 || girth as f64 <= sqrt_bound(n)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error("step {index} is invalid: {reason}")]
    InvalidStep { index: usize, reason: String },
    #[error("cutting is incomplete: {0}")]
    Incomplete(String),
    #[error("recorded {what} {recorded} does not match the replayed {actual}")]
    Mismatch {
        what: &'static str,
        recorded: usize,
        actual: usize,
    },
    #[error("exact search is limited to {limit} crossings, diagram has {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("malformed cutting: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Step {
    /// New arc at position `at`: a free loop, or the direct boundary arc
    /// with index `arc` in [`PlanarMap::direct_arcs`].
    Birth {
        at: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arc: Option<usize>,
    },
    Cap {
        at: usize,
    },
    /// Absorb `crossing`; the point at `at` meets slot `slot`, the next
    /// absorbed points meet `slot - 1`, `slot - 2`, ...
    Cross {
        at: usize,
        absorb: usize,
        over_first: bool,
        crossing: usize,
        slot: usize,
    },
}

impl Step {
    pub fn event(&self) -> Event {
        match *self {
            Step::Birth { at, .. } => Event::Birth { at },
            Step::Cap { at } => Event::Cap { at },
            Step::Cross {
                at,
                absorb,
                over_first,
                ..
            } => Event::Cross {
                at,
                absorb,
                over_first,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutting {
    pub steps: Vec<Step>,
    pub girth: usize,
    /// Final frontier position of boundary point 0.
    pub rotation: usize,
}

impl Cutting {
    /// Crossings in the order they are absorbed.
    pub fn source_order(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Cross { crossing, .. } => Some(*crossing),
                _ => None,
            })
            .collect()
    }

    pub fn events(&self) -> Vec<Event> {
        self.steps.iter().map(Step::event).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("cutting serializes")
    }

    pub fn from_json(text: &str) -> Result<Cutting, CutError> {
        serde_json::from_str(text).map_err(|e| CutError::Json(e.to_string()))
    }

    /// Replays against `map` and checks the recorded girth and rotation.
    pub fn validate(&self, map: &PlanarMap) -> Result<Replay, CutError> {
        let r = replay(map, &self.steps)?;
        if r.girth != self.girth {
            return Err(CutError::Mismatch {
                what: "girth",
                recorded: self.girth,
                actual: r.girth,
            });
        }
        if r.rotation != self.rotation {
            return Err(CutError::Mismatch {
                what: "rotation",
                recorded: self.rotation,
                actual: r.rotation,
            });
        }
        Ok(r)
    }
}

// ---------------------------------------------------------------------------
// frontier

#[derive(Clone, Debug)]
pub struct Frontier<'a> {
    map: &'a PlanarMap,
    /// Target dart of each point; `free_base + i` for the free loop `i`.
    points: Vec<usize>,
    free_base: usize,
    processed: Vec<bool>,
    n_processed: usize,
    free_born: usize,
    free_closed: usize,
    direct_born: Vec<bool>,
    started: Vec<bool>,
    /// Union-find over crossings, free loops and direct arcs.
    parent: Vec<usize>,
    components: usize,
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

impl<'a> Frontier<'a> {
    pub fn new(map: &'a PlanarMap) -> Self {
        let n = map.n();
        let items = n + map.free_loops() + map.direct_arcs().len();
        Frontier {
            map,
            points: Vec::new(),
            free_base: map.dart_count(),
            processed: vec![false; n],
            n_processed: 0,
            free_born: 0,
            free_closed: 0,
            direct_born: vec![false; map.direct_arcs().len()],
            started: vec![false; map.component_count()],
            parent: (0..items).collect(),
            components: 0,
        }
    }

    pub fn map(&self) -> &'a PlanarMap {
        self.map
    }

    pub fn g(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn is_processed(&self, c: usize) -> bool {
        self.processed[c]
    }

    pub fn processed(&self) -> &[bool] {
        &self.processed
    }

    pub fn n_processed(&self) -> usize {
        self.n_processed
    }

    /// Connected components of the absorbed part, free loops included.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn free_closed(&self) -> usize {
        self.free_closed
    }

    fn is_free(&self, t: usize) -> bool {
        t >= self.free_base
    }

    fn slot_of(&self, t: usize) -> Option<(usize, usize)> {
        (t < 4 * self.map.n()).then_some((t / 4, t % 4))
    }

    fn boundary_index(&self, t: usize) -> Option<usize> {
        (!self.is_free(t) && self.map.is_boundary_dart(t)).then(|| t - 4 * self.map.n())
    }

    fn join(&mut self, a: usize, b: usize) {
        let (ra, rb) = (find(&mut self.parent, a), find(&mut self.parent, b));
        if ra != rb {
            self.parent[ra] = rb;
            self.components -= 1;
        }
    }

    /// Whether points `p` and `p + 1` are the two ends of one absorbed arc.
    pub fn closable(&self, p: usize) -> bool {
        let g = self.g();
        if g < 2 || p >= g {
            return false;
        }
        let (s, t) = (self.points[p], self.points[(p + 1) % g]);
        if self.is_free(s) || self.is_free(t) {
            return s == t;
        }
        match (self.slot_of(s), self.slot_of(t)) {
            (Some((x, _)), Some((y, _))) => {
                self.processed[x] && self.processed[y] && self.map.alpha(s) == t
            }
            _ => false,
        }
    }

    /// Whether a gap from target `s` to target `t` lies in one face.
    fn gap_fits(&self, s: usize, t: usize) -> bool {
        self.is_free(s) || self.is_free(t) || self.map.face_of(s) == self.map.face_of(self.map.alpha(t))
    }

    /// Every gap sees the same face from both of its points.
    pub fn consistent(&self) -> bool {
        let g = self.g();
        (0..g).all(|p| self.gap_fits(self.points[p], self.points[(p + 1) % g]))
    }

    /// Boundary darts of direct arc `i` in the order they enter the gap
    /// before `at`, if the arc borders that gap's face.
    fn birth_darts(&self, at: usize, i: usize) -> Option<[usize; 2]> {
        let (a, b) = self.map.direct_arcs()[i];
        let g = self.g();
        let order = if g == 0 || self.gap_holds(at, &[a, b]) {
            [a, b]
        } else if self.gap_holds(at, &[b, a]) {
            [b, a]
        } else {
            return None;
        };
        let new = order.map(|j| self.map.boundary_dart(j));
        if g > 0 {
            let (prev, next) = (self.points[(at + g - 1) % g], self.points[at % g]);
            let fits = self.gap_fits(prev, new[0]) && self.gap_fits(new[0], new[1]) && self.gap_fits(new[1], next);
            if !fits {
                return None;
            }
        }
        Some(new)
    }

    fn all_boundary(&self) -> bool {
        self.points.iter().all(|&t| self.boundary_index(t).is_some())
    }

    /// Whether the cyclic gap ending just before position `at` (between
    /// points `at - 1` and `at`) has every index of `inside` strictly inside
    /// its boundary interval, in the order given.
    fn gap_holds(&self, at: usize, inside: &[usize]) -> bool {
        let g = self.g();
        if g == 0 {
            return true;
        }
        let total = self.map.g();
        let lo = self.boundary_index(self.points[(at + g - 1) % g]).unwrap();
        let hi = self.boundary_index(self.points[at % g]).unwrap();
        let rel = |x: usize| (x + total - lo) % total;
        let span = if g == 1 || lo == hi { total } else { rel(hi) };
        let mut last = 0;
        for &x in inside {
            let r = rel(x);
            if r <= last || r >= span {
                return false;
            }
            last = r;
        }
        true
    }

    fn check(&self, step: &Step) -> Result<(), String> {
        let g = self.g();
        match *step {
            Step::Birth { at, arc: None } => {
                if self.free_born >= self.map.free_loops() {
                    return Err("no free loop left to birth".into());
                }
                if at > g {
                    return Err(format!("position {at} beyond frontier of {g}"));
                }
            }
            Step::Birth { at, arc: Some(i) } => {
                let Some(&(a, b)) = self.map.direct_arcs().get(i) else {
                    return Err(format!("no direct arc {i}"));
                };
                if self.direct_born[i] {
                    return Err(format!("direct arc {i} already born"));
                }
                if at > g {
                    return Err(format!("position {at} beyond frontier of {g}"));
                }
                if !self.all_boundary() {
                    return Err("direct arcs need a frontier of boundary points".into());
                }
                if self.birth_darts(at, i).is_none() {
                    return Err(format!("arc ({a} {b}) does not fit the gap before {at}"));
                }
            }
            Step::Cap { at } => {
                if !self.closable(at) {
                    return Err(format!("points {at} and {} are not one arc", at + 1));
                }
            }
            Step::Cross {
                at,
                absorb,
                over_first,
                crossing,
                slot,
            } => {
                if crossing >= self.map.n() {
                    return Err(format!("no crossing {crossing}"));
                }
                if self.processed[crossing] {
                    return Err(format!("crossing {crossing} already absorbed"));
                }
                if slot > 3 || absorb > 4 || absorb > g {
                    return Err("bad slot or absorb count".into());
                }
                if over_first != ((slot as u8 & 1) == self.map.over(crossing)) {
                    return Err("over_first disagrees with the crossing".into());
                }
                if absorb == 0 {
                    let comp = self.map.crossing_component(crossing);
                    if self.started[comp] {
                        return Err("component already started".into());
                    }
                    if g > 0 {
                        if at == 0 || at > g {
                            return Err(format!("insertion gap {at} out of range"));
                        }
                        if !self.all_boundary() {
                            return Err("new component needs a frontier of boundary points".into());
                        }
                        let inside = self.map.component_boundary_indices(comp);
                        let rot = self.rotate_indices(at, &inside);
                        if !self.gap_holds(at, &rot) {
                            return Err("component does not lie in this gap".into());
                        }
                        let gap_face = self.map.face_of(self.points[at - 1]);
                        if self.map.corner_face(crossing, slot) != gap_face {
                            return Err("corner does not face the gap".into());
                        }
                    }
                } else {
                    if at >= g {
                        return Err(format!("position {at} beyond frontier of {g}"));
                    }
                    for i in 0..absorb {
                        let want = self.map.slot_dart(crossing, (slot + 4 - i) % 4);
                        if self.points[(at + i) % g] != want {
                            return Err(format!("point {} does not meet crossing {crossing}", (at + i) % g));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `inside` sorted by distance from the boundary index before `at`.
    fn rotate_indices(&self, at: usize, inside: &[usize]) -> Vec<usize> {
        let g = self.g();
        let total = self.map.g().max(1);
        let lo = self.boundary_index(self.points[(at + g - 1) % g]).unwrap_or(0);
        let mut v = inside.to_vec();
        v.sort_by_key(|&x| (x + total - lo) % total);
        v
    }

    fn splice_points(&mut self, at: usize, k: usize, new: Vec<usize>) {
        let g = self.g();
        if k == 0 {
            self.points.splice(at..at, new);
        } else if at + k <= g {
            self.points.splice(at..at + k, new);
        } else {
            let first = at + k - g;
            let mut v = new;
            v.extend_from_slice(&self.points[first..at]);
            self.points = v;
        }
    }

    pub fn apply(&mut self, step: &Step) -> Result<(), String> {
        self.check(step)?;
        match *step {
            Step::Birth { at, arc: None } => {
                let t = self.free_base + self.free_born;
                self.splice_points(at, 0, vec![t, t]);
                self.free_born += 1;
                self.components += 1;
            }
            Step::Birth { at, arc: Some(i) } => {
                let new = self.birth_darts(at, i).expect("checked").to_vec();
                self.splice_points(at, 0, new);
                self.direct_born[i] = true;
                self.components += 1;
            }
            Step::Cap { at } => {
                let g = self.g();
                let (s, t) = (self.points[at], self.points[(at + 1) % g]);
                if self.is_free(s) {
                    self.free_closed += 1;
                } else {
                    self.join(s / 4, t / 4);
                }
                if at + 1 < g {
                    self.points.drain(at..at + 2);
                } else {
                    self.points.pop();
                    self.points.remove(0);
                }
            }
            Step::Cross {
                at,
                absorb,
                crossing,
                slot,
                ..
            } => {
                self.processed[crossing] = true;
                self.n_processed += 1;
                self.components += 1;
                self.started[self.map.crossing_component(crossing)] = true;
                for i in 0..absorb {
                    let near = self.map.alpha(self.map.slot_dart(crossing, (slot + 4 - i) % 4));
                    self.join(crossing, near / 4);
                }
                let new: Vec<usize> = (1..=4 - absorb)
                    .map(|r| self.map.alpha(self.map.slot_dart(crossing, slot + r)))
                    .collect();
                self.splice_points(at, absorb, new);
            }
        }
        debug_assert!(self.consistent(), "frontier lost face consistency after {step:?}");
        Ok(())
    }

    /// Positions where a cap is legal.
    pub fn cap_positions(&self) -> Vec<usize> {
        (0..self.g()).filter(|&p| self.closable(p)).collect()
    }

    /// Applies caps until none is legal; returns them.
    pub fn cap_all(&mut self) -> Vec<Step> {
        let mut out = Vec::new();
        while let Some(p) = self.cap_positions().first().copied() {
            let s = Step::Cap { at: p };
            self.apply(&s).expect("closable position caps");
            out.push(s);
        }
        out
    }

    /// Crossing steps absorbing a maximal run of points that meet one
    /// unabsorbed crossing.
    pub fn runs(&self) -> Vec<Step> {
        let g = self.g();
        let meets = |p: usize| -> Option<(usize, usize)> {
            let (x, s) = self.slot_of(self.points[p % g])?;
            (!self.processed[x]).then_some((x, s))
        };
        let mut out = Vec::new();
        let mut seen_full = HashSet::new();
        for p in 0..g {
            let Some((x, s)) = meets(p) else { continue };
            let prev = meets(p + g - 1);
            let mut len = 1;
            while len < 4.min(g) && meets(p + len) == Some((x, (s + 4 - len) % 4)) {
                len += 1;
            }
            let continues = prev == Some((x, (s + 1) % 4));
            if continues && !(len == g && len == 4) {
                continue;
            }
            if len == 4 && len == g && !seen_full.insert(x) {
                continue;
            }
            out.push(Step::Cross {
                at: p,
                absorb: len,
                over_first: (s as u8 & 1) == self.map.over(x),
                crossing: x,
                slot: s,
            });
        }
        out
    }

    /// Steps that start component `comp` with nothing absorbed.
    pub fn starts(&self, comp: usize) -> Vec<Step> {
        let g = self.g();
        let mut out = Vec::new();
        for x in self.map.component_crossings(comp) {
            for slot in 0..4 {
                let at_range: Vec<usize> = if g == 0 {
                    if slot > 0 {
                        break;
                    }
                    vec![0]
                } else {
                    (1..=g).collect()
                };
                for at in at_range {
                    let s = Step::Cross {
                        at,
                        absorb: 0,
                        over_first: (slot as u8 & 1) == self.map.over(x),
                        crossing: x,
                        slot,
                    };
                    if self.check(&s).is_ok() {
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    /// Gap accepting direct arc `i`.
    pub fn direct_birth(&self, i: usize) -> Option<Step> {
        let g = self.g();
        (0..=g).map(|at| Step::Birth { at, arc: Some(i) }).find(|s| self.check(s).is_ok())
    }

    /// Whether everything is absorbed and the frontier is the boundary in
    /// cyclic order; returns the position of boundary point 0.
    pub fn finish(&self) -> Result<usize, String> {
        if self.n_processed < self.map.n() {
            return Err(format!("{} crossings left", self.map.n() - self.n_processed));
        }
        if self.free_closed < self.map.free_loops() {
            return Err("free loops left open".into());
        }
        if self.direct_born.iter().any(|b| !b) {
            return Err("direct arcs left".into());
        }
        let g = self.g();
        if g != self.map.g() {
            return Err(format!("frontier has {g} points, boundary has {}", self.map.g()));
        }
        if g == 0 {
            return Ok(0);
        }
        let idx: Vec<usize> = match self.points.iter().map(|&t| self.boundary_index(t)).collect() {
            Some(v) => v,
            None => return Err("frontier still meets crossings".into()),
        };
        let r = idx.iter().position(|&j| j == 0).ok_or("boundary point 0 missing")?;
        for k in 0..g {
            if idx[(r + k) % g] != k {
                return Err("frontier is not the boundary in order".into());
            }
        }
        Ok(r)
    }

    /// The absorbed part as a tangle whose boundary is the frontier.
    pub fn partial_tangle(&self, d: &Diagram) -> Diagram {
        let map = self.map;
        let g = self.g();
        let mut next = d.max_label() + 1;
        let mut label_of_point: Vec<u64> = vec![0; g];
        for p in 0..g {
            if label_of_point[p] != 0 {
                continue;
            }
            let t = self.points[p];
            let mate = if self.is_free(t) {
                (0..g).find(|&q| q != p && self.points[q] == t)
            } else if self.boundary_index(t).is_some() && map.is_boundary_dart(map.alpha(t)) {
                let u = map.alpha(t);
                (0..g).find(|&q| self.points[q] == u)
            } else {
                None
            };
            label_of_point[p] = next;
            if let Some(q) = mate {
                label_of_point[q] = next;
            }
            next += 1;
        }
        let mut crossings = Vec::new();
        for x in 0..map.n() {
            if !self.processed[x] {
                continue;
            }
            let mut c: Crossing = d.crossings()[x].clone();
            for s in 0..4 {
                let far = map.alpha(map.slot_dart(x, s));
                if let Some(p) = self.points.iter().position(|&t| t == far) {
                    c.arcs[s] = label_of_point[p];
                }
            }
            crossings.push(c);
        }
        Diagram::new(crossings, self.free_closed, label_of_point).expect("absorbed part is a diagram")
    }
}

// ---------------------------------------------------------------------------
// replay

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayStep {
    pub g: usize,
    pub n_t: usize,
    pub c_t: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub steps: Vec<ReplayStep>,
    pub girth: usize,
    pub rotation: usize,
}

pub fn replay(map: &PlanarMap, steps: &[Step]) -> Result<Replay, CutError> {
    let mut fr = Frontier::new(map);
    let mut out = Vec::with_capacity(steps.len());
    let mut girth = 0;
    for (index, s) in steps.iter().enumerate() {
        fr.apply(s).map_err(|reason| CutError::InvalidStep { index, reason })?;
        girth = girth.max(fr.g());
        out.push(ReplayStep {
            g: fr.g(),
            n_t: fr.n_processed(),
            c_t: fr.components(),
        });
    }
    let rotation = fr.finish().map_err(CutError::Incomplete)?;
    Ok(Replay {
        steps: out,
        girth,
        rotation,
    })
}

// ---------------------------------------------------------------------------
// search driver

/// Forced steps plus a fixed component order; the strategies only choose
/// among [`Scan::options`].
#[derive(Clone, Debug)]
struct Scan<'a> {
    fr: Frontier<'a>,
    order: Vec<usize>,
    cursor: usize,
    /// Unabsorbed crossings per component.
    remaining: Vec<usize>,
    steps: Vec<Step>,
    girth: usize,
    sum_g: usize,
}

impl<'a> Scan<'a> {
    fn new(map: &'a PlanarMap) -> Self {
        let mut fr = Frontier::new(map);
        let mut steps = Vec::new();
        for _ in 0..map.free_loops() {
            for s in [Step::Birth { at: 0, arc: None }, Step::Cap { at: 0 }] {
                fr.apply(&s).expect("free loop at an empty frontier");
                steps.push(s);
            }
        }
        let mut closed = Vec::new();
        let mut open = Vec::new();
        for comp in 0..map.component_count() {
            let Some(min) = map.component_min_crossing(comp) else { continue };
            if map.component_touches_boundary(comp) {
                open.push((map.component_boundary_indices(comp)[0], comp));
            } else {
                closed.push((min, comp));
            }
        }
        closed.sort_unstable();
        open.sort_unstable();
        let order = closed.into_iter().chain(open).map(|x| x.1).collect();
        let girth = if map.free_loops() > 0 { 2 } else { 0 };
        let mut remaining = vec![0; map.component_count()];
        for x in 0..map.n() {
            remaining[map.crossing_component(x)] += 1;
        }
        Scan {
            fr,
            order,
            cursor: 0,
            remaining,
            steps,
            girth,
            sum_g: 0,
        }
    }

    fn options(&self) -> Vec<Step> {
        let Some(&comp) = self.order.get(self.cursor) else {
            return Vec::new();
        };
        let runs = self.fr.runs();
        if runs.is_empty() {
            self.fr.starts(comp)
        } else {
            runs
        }
    }

    fn take(&mut self, s: Step) {
        self.fr.apply(&s).expect("option is legal");
        self.girth = self.girth.max(self.fr.g());
        self.sum_g += self.fr.g();
        self.steps.push(s);
        if let Step::Cross { crossing, .. } = s {
            self.remaining[self.fr.map().crossing_component(crossing)] -= 1;
        }
        let caps = self.fr.cap_all();
        self.steps.extend(caps);
        while self.order.get(self.cursor).is_some_and(|&c| self.remaining[c] == 0) {
            self.cursor += 1;
        }
    }

    /// Copy without the step history, for looking ahead.
    fn probe(&self) -> Scan<'a> {
        Scan {
            fr: self.fr.clone(),
            order: self.order.clone(),
            cursor: self.cursor,
            remaining: self.remaining.clone(),
            steps: Vec::new(),
            girth: self.girth,
            sum_g: self.sum_g,
        }
    }

    fn finish(mut self) -> Result<Cutting, CutError> {
        // an arc nested inside another must be born first
        let arcs = self.fr.map().direct_arcs().len();
        for _ in 0..arcs {
            let s = (0..arcs)
                .filter(|&i| !self.fr.direct_born[i])
                .find_map(|i| self.fr.direct_birth(i))
                .ok_or_else(|| CutError::Incomplete("no gap for the remaining direct arcs".into()))?;
            self.fr.apply(&s).expect("direct birth is legal");
            self.girth = self.girth.max(self.fr.g());
            self.steps.push(s);
        }
        let rotation = self.fr.finish().map_err(CutError::Incomplete)?;
        Ok(Cutting {
            steps: self.steps,
            girth: self.girth,
            rotation,
        })
    }
}

fn step_key(s: &Step) -> (usize, usize, usize) {
    match *s {
        Step::Cross {
            crossing, at, slot, ..
        } => (crossing, at, slot),
        _ => (usize::MAX, 0, 0),
    }
}

/// Frontier size right after `s` and its caps.
fn settle(scan: &Scan, s: Step) -> (usize, usize) {
    let mut fr = scan.fr.clone();
    fr.apply(&s).expect("option is legal");
    let peak = fr.g();
    fr.cap_all();
    (peak, fr.g())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Extra levels of lookahead used to break ties.
    pub lookahead: usize,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions { lookahead: 1 }
    }
}

/// Largest settled frontier along the best continuation `depth` steps deep.
fn lookahead(scan: &Scan, s: Step, settled: usize, depth: usize) -> usize {
    if depth == 0 {
        return settled;
    }
    let mut next = scan.probe();
    next.take(s);
    let best = next
        .options()
        .into_iter()
        .map(|t| {
            let (_, settled) = settle(&next, t);
            lookahead(&next, t, settled, depth - 1)
        })
        .min()
        .unwrap_or(0);
    settled.max(best)
}

/// Absorbs whatever keeps the frontier smallest.
pub fn greedy(map: &PlanarMap, opts: GreedyOptions) -> Result<Cutting, CutError> {
    let mut scan = Scan::new(map);
    loop {
        let options = scan.options();
        if options.is_empty() {
            break;
        }
        let best = options
            .into_iter()
            .min_by_key(|&s| {
                let (peak, settled) = settle(&scan, s);
                let ahead = lookahead(&scan, s, settled, opts.lookahead);
                (peak.max(ahead), settled, peak, step_key(&s))
            })
            .unwrap();
        scan.take(best);
    }
    scan.finish()
}

fn canonical(points: &[usize]) -> Vec<usize> {
    let g = points.len();
    (0..g.max(1))
        .map(|r| (0..g).map(|i| points[(r + i) % g]).collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

fn state_key(scan: &Scan) -> (Vec<u64>, Vec<usize>) {
    let mut mask = vec![0u64; scan.fr.processed().len().div_ceil(64)];
    for (x, &p) in scan.fr.processed().iter().enumerate() {
        if p {
            mask[x / 64] |= 1 << (x % 64);
        }
    }
    (mask, canonical(scan.fr.points()))
}

fn dfs<'a>(scan: Scan<'a>, bound: usize, failed: &mut HashSet<(Vec<u64>, Vec<usize>)>) -> Option<Scan<'a>> {
    let options = scan.options();
    if options.is_empty() {
        return Some(scan);
    }
    let key = state_key(&scan);
    if failed.contains(&key) {
        return None;
    }
    let mut ranked: Vec<(usize, Step)> = options
        .into_iter()
        .filter_map(|s| {
            let (peak, settled) = settle(&scan, s);
            (peak <= bound).then_some((settled, s))
        })
        .collect();
    ranked.sort_by_key(|&(settled, s)| (settled, step_key(&s)));
    for (_, s) in ranked {
        let mut next = scan.clone();
        next.take(s);
        if let Some(done) = dfs(next, bound, failed) {
            return Some(done);
        }
    }
    failed.insert(key);
    None
}

/// Girth-minimal cutting among those built from maximal absorptions, with
/// components taken one at a time.
pub fn exact(map: &PlanarMap) -> Result<Cutting, CutError> {
    if map.n() > EXACT_MAX_N {
        return Err(CutError::TooLarge {
            n: map.n(),
            limit: EXACT_MAX_N,
        });
    }
    let fallback = greedy(map, GreedyOptions::default())?;
    let mut bound = lower_bound(map);
    while bound < fallback.girth {
        let mut failed = HashSet::new();
        if let Some(done) = dfs(Scan::new(map), bound, &mut failed) {
            let c = done.finish()?;
            if c.girth <= bound {
                return Ok(c);
            }
        }
        bound += 2;
    }
    Ok(fallback)
}

fn lower_bound(map: &PlanarMap) -> usize {
    let mut b = map.g();
    if map.n() > 0 {
        b = b.max(4);
    }
    if map.free_loops() > 0 {
        b = b.max(2);
    }
    b
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealOptions {
    pub seed: u64,
    pub iterations: usize,
    pub start_temperature: f64,
    pub end_temperature: f64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        AnnealOptions {
            seed: 0,
            iterations: 2000,
            start_temperature: 1.0,
            end_temperature: 0.02,
        }
    }
}

/// Greedy decoding of a crossing priority list.
fn decode(map: &PlanarMap, rank: &[usize]) -> Result<Cutting, CutError> {
    let mut scan = Scan::new(map);
    loop {
        let options = scan.options();
        if options.is_empty() {
            break;
        }
        let best = options
            .into_iter()
            .min_by_key(|s| match *s {
                Step::Cross {
                    crossing,
                    absorb,
                    at,
                    slot,
                    ..
                } => (rank[crossing], 4 - absorb, at, slot),
                _ => unreachable!(),
            })
            .unwrap();
        scan.take(best);
    }
    scan.finish()
}

fn energy(c: &Cutting, map: &PlanarMap) -> f64 {
    let r = replay(map, &c.steps).expect("decoded cutting replays");
    let mean = r.steps.iter().map(|s| s.g).sum::<usize>() as f64 / r.steps.len().max(1) as f64;
    c.girth as f64 + mean / (c.girth as f64 + 1.0)
}

/// Simulated annealing over crossing priorities; never returns a cutting
/// with larger girth than `start`.
pub fn anneal(map: &PlanarMap, start: &Cutting, opts: AnnealOptions) -> Result<Cutting, CutError> {
    let n = map.n();
    if n < 2 || opts.iterations == 0 {
        return Ok(start.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order = start.source_order();
    for x in 0..n {
        if !order.contains(&x) {
            order.push(x);
        }
    }
    let to_rank = |order: &[usize]| {
        let mut rank = vec![0; n];
        for (i, &x) in order.iter().enumerate() {
            rank[x] = i;
        }
        rank
    };
    let mut cur = decode(map, &to_rank(&order))?;
    let mut cur_e = energy(&cur, map);
    let mut best = if cur.girth < start.girth { Some(cur.clone()) } else { None };
    let mut best_girth = start.girth;
    for it in 0..opts.iterations {
        let frac = it as f64 / opts.iterations as f64;
        let temp = opts.start_temperature * (opts.end_temperature / opts.start_temperature).powf(frac);
        let mut cand = order.clone();
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if rng.gen_bool(0.5) {
            cand.swap(i, j);
        } else {
            let x = cand.remove(i);
            cand.insert(j, x);
        }
        let c = decode(map, &to_rank(&cand))?;
        let e = energy(&c, map);
        if e <= cur_e || rng.gen::<f64>() < ((cur_e - e) / temp).exp() {
            order = cand;
            cur = c;
            cur_e = e;
            if cur.girth < best_girth {
                best_girth = cur.girth;
                best = Some(cur.clone());
            }
        }
    }
    Ok(best.unwrap_or_else(|| start.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::parse_pd;

    fn map(pd: &str) -> PlanarMap {
        PlanarMap::build(&parse_pd(pd).unwrap()).unwrap()
    }

    const TREFOIL: &str = "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]";
    const FIGURE_EIGHT: &str = "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]";
    const HOPF: &str = "X[1,3,2,4] X[3,1,4,2]";

    #[test]
    fn small_girths() {
        for (pd, want) in [("O", 2), ("", 0), (TREFOIL, 4), (FIGURE_EIGHT, 4), (HOPF, 4), ("X[1,2,2,1]", 4)] {
            let m = map(pd);
            let c = greedy(&m, GreedyOptions::default()).unwrap();
            assert_eq!(c.girth, want, "{pd}");
            c.validate(&m).unwrap();
            let e = exact(&m).unwrap();
            assert_eq!(e.girth, want, "{pd}");
        }
    }

    #[test]
    fn tangles_end_in_boundary_order() {
        for pd in [
            "X[1,2,3,4] B[1,2,3,4]",
            "B[1,1,2,2]",
            "B[1,2,2,1]",
            "X[1,2,3,4] X[4,3,5,6] B[1,2,5,6]",
            "X[1,2,3,4] X[3,5,6,4] B[1,2,5,6]",
            "X[1,2,2,1] B[3,3]",
            "O B[1,2,2,1]",
        ] {
            let d = parse_pd(pd).unwrap();
            let m = PlanarMap::build(&d).unwrap_or_else(|e| panic!("{pd}: {e}"));
            let c = greedy(&m, GreedyOptions::default()).unwrap_or_else(|e| panic!("{pd}: {e}"));
            let r = c.validate(&m).unwrap();
            assert!(c.girth >= m.g(), "{pd}");
            assert_eq!(r.steps.last().map(|s| s.g).unwrap_or(0), m.g(), "{pd}");
        }
    }

    #[test]
    fn replay_rejects_bad_steps() {
        let m = map(TREFOIL);
        let c = greedy(&m, GreedyOptions::default()).unwrap();
        let mut bad = c.clone();
        bad.steps.pop();
        assert!(matches!(bad.validate(&m), Err(CutError::Incomplete(_))));
        let mut bad = c.clone();
        bad.steps.insert(0, Step::Cap { at: 0 });
        assert!(matches!(bad.validate(&m), Err(CutError::InvalidStep { index: 0, .. })));
        let mut bad = c.clone();
        bad.girth += 2;
        assert!(matches!(bad.validate(&m), Err(CutError::Mismatch { .. })));
    }

    #[test]
    fn json_round_trip() {
        let m = map(FIGURE_EIGHT);
        let c = greedy(&m, GreedyOptions::default()).unwrap();
        let text = c.to_json().to_string();
        assert_eq!(Cutting::from_json(&text).unwrap(), c);
    }

    #[test]
    fn anneal_never_worse() {
        let m = map(FIGURE_EIGHT);
        let c = greedy(&m, GreedyOptions { lookahead: 0 }).unwrap();
        let a = anneal(&m, &c, AnnealOptions { iterations: 50, ..Default::default() }).unwrap();
        assert!(a.girth <= c.girth);
        a.validate(&m).unwrap();
    }

    #[test]
    fn partial_tangles_are_diagrams() {
        let d = parse_pd(FIGURE_EIGHT).unwrap();
        let m = PlanarMap::build(&d).unwrap();
        let c = greedy(&m, GreedyOptions::default()).unwrap();
        let mut fr = Frontier::new(&m);
        for s in &c.steps {
            fr.apply(s).unwrap();
            let t = fr.partial_tangle(&d);
            assert_eq!(t.g(), fr.g());
            assert_eq!(t.n(), fr.n_processed());
            PlanarMap::build(&t).unwrap();
        }
    }

    #[test]
    fn sqrt_bound_exempts_empty() {
        assert!(within_sqrt_bound(0, 2));
        assert!(within_sqrt_bound(1, 4));
        assert!((djidjev_vrto() - 17.1455).abs() < 1e-3);
    }
}
