//! PD-coded diagrams and their planar structure.
//!
//! A crossing lists four arc labels counterclockwise. `over` selects the
//! over strand: `over == k` means the strand through slots `k` and `k + 2`.
//! Tangles additionally list boundary arcs counterclockwise around the disk.
//!
//! The combinatorial map has one dart per crossing slot (`4c + s`) and, for a
//! tangle, one dart per boundary point (`4n + j`) sitting on a virtual vertex
//! at infinity. `sigma` turns counterclockwise around a vertex and `alpha`
//! follows an arc to its other end. Faces are orbits of `sigma . alpha`; the
//! face of a dart is the face on its right when travelling away from its
//! vertex. The corner between slots `s` and `s + 1` of a crossing lies in the
//! face of dart `s + 1`.
//!
//! ```text
//!        slot 2
//!          |
//!   slot 3 -+- slot 1      corner R_s sits between slot s and slot s+1
//!          |
//!        slot 0
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matchings::Matching;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanarError {
    #[error("parse error at `{token}`: {message}")]
    Parse { token: String, message: String },
    #[error("arc {arc} is used {count} times (expected exactly 2)")]
    ArcMultiplicity { arc: u64, count: usize },
    #[error("diagram is not planar: {0}")]
    NonPlanar(String),
    #[error("faces cannot be checkerboarded: {0}")]
    Coloring(String),
    #[error("orientation required: {0}")]
    MissingOrientation(String),
}

fn parse_err(token: &str, message: impl Into<String>) -> PlanarError {
    PlanarError::Parse {
        token: token.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub arcs: [u64; 4],
    /// 0: over strand through slots 0 and 2; 1: through slots 1 and 3.
    pub over: u8,
    /// Set when the over strand came from the "slot 0 is the incoming under
    /// strand" dialect rather than an explicit suffix.
    pub over_defaulted: bool,
}

impl Crossing {
    pub fn new(arcs: [u64; 4], over: u8) -> Self {
        Crossing {
            arcs,
            over: over & 1,
            over_defaulted: false,
        }
    }

    /// Crossing in the common dialect where slot 0 is the incoming under strand.
    pub fn standard(arcs: [u64; 4]) -> Self {
        Crossing {
            arcs,
            over: 1,
            over_defaulted: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Diagram {
    crossings: Vec<Crossing>,
    free_loops: usize,
    boundary: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct CrossingJson {
    arcs: [u64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    over: Option<u8>,
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    #[serde(default)]
    crossings: Vec<CrossingJson>,
    #[serde(default)]
    free_loops: usize,
    #[serde(default)]
    boundary: Vec<u64>,
}

impl Diagram {
    pub fn new(
        crossings: Vec<Crossing>,
        free_loops: usize,
        boundary: Vec<u64>,
    ) -> Result<Self, PlanarError> {
        let d = Diagram {
            crossings,
            free_loops,
            boundary,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), PlanarError> {
        let mut count: BTreeMap<u64, usize> = BTreeMap::new();
        for x in &self.crossings {
            for &a in &x.arcs {
                *count.entry(a).or_default() += 1;
            }
            if x.over > 1 {
                return Err(parse_err("o", "over flag must be 0 or 1"));
            }
        }
        for &a in &self.boundary {
            *count.entry(a).or_default() += 1;
        }
        for (&arc, &c) in &count {
            if c != 2 {
                return Err(PlanarError::ArcMultiplicity { arc, count: c });
            }
        }
        Ok(())
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn free_loops(&self) -> usize {
        self.free_loops
    }

    pub fn boundary(&self) -> &[u64] {
        &self.boundary
    }

    pub fn n(&self) -> usize {
        self.crossings.len()
    }

    pub fn g(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn max_label(&self) -> u64 {
        self.crossings
            .iter()
            .flat_map(|x| x.arcs.iter().copied())
            .chain(self.boundary.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Swaps over and under at every crossing.
    pub fn mirror(&self) -> Diagram {
        let crossings = self
            .crossings
            .iter()
            .map(|x| Crossing {
                arcs: x.arcs,
                over: 1 - x.over,
                over_defaulted: x.over_defaulted,
            })
            .collect();
        Diagram {
            crossings,
            free_loops: self.free_loops,
            boundary: self.boundary.clone(),
        }
    }

    /// Side-by-side union of two closed diagrams; arcs of `other` are relabelled.
    pub fn disjoint_union(&self, other: &Diagram) -> Diagram {
        assert!(self.is_closed() && other.is_closed());
        let shift = self.max_label();
        let mut crossings = self.crossings.clone();
        for x in &other.crossings {
            let mut y = x.clone();
            for a in &mut y.arcs {
                *a += shift;
            }
            crossings.push(y);
        }
        Diagram {
            crossings,
            free_loops: self.free_loops + other.free_loops,
            boundary: Vec::new(),
        }
    }

    /// Adds `k` free loops.
    pub fn with_free_loops(&self, k: usize) -> Diagram {
        let mut d = self.clone();
        d.free_loops += k;
        d
    }

    /// The PD text form, with explicit over suffixes.
    pub fn to_pd(&self) -> String {
        let mut parts: Vec<String> = self
            .crossings
            .iter()
            .map(|x| {
                format!(
                    "X[{},{},{},{}]o{}",
                    x.arcs[0], x.arcs[1], x.arcs[2], x.arcs[3], x.over
                )
            })
            .collect();
        parts.extend(std::iter::repeat_n("O".to_string(), self.free_loops));
        if !self.boundary.is_empty() {
            let b: Vec<String> = self.boundary.iter().map(|a| a.to_string()).collect();
            parts.push(format!("B[{}]", b.join(",")));
        }
        parts.join(" ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = DiagramJson {
            crossings: self
                .crossings
                .iter()
                .map(|x| CrossingJson {
                    arcs: x.arcs,
                    over: Some(x.over),
                })
                .collect(),
            free_loops: self.free_loops,
            boundary: self.boundary.clone(),
        };
        serde_json::to_value(j).expect("diagram serializes")
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_pd())
    }
}

/// Parses PD text or, if the input starts with `{`, the JSON form.
pub fn parse_pd(text: &str) -> Result<Diagram, PlanarError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return parse_json(trimmed);
    }
    let mut crossings = Vec::new();
    let mut free_loops = 0;
    let mut boundary = Vec::new();
    let mut saw_boundary = false;
    let b = text.as_bytes();
    let mut i = 0;
    let mut wrapper_depth = 0usize;
    while i < b.len() {
        let ch = b[i] as char;
        if ch.is_whitespace() || ch == ',' {
            i += 1;
            continue;
        }
        if ch == '#' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let token_end = |from: usize| {
            let mut j = from;
            while j < b.len() && !(b[j] as char).is_whitespace() && b[j] != b',' {
                j += 1;
            }
            j
        };
        match ch {
            'P' if text[i..].starts_with("PD[") => {
                wrapper_depth += 1;
                i += 3;
            }
            ']' if wrapper_depth > 0 => {
                wrapper_depth -= 1;
                i += 1;
            }
            'O' => {
                i += 1;
                if i < b.len() && (b[i] as char).is_alphanumeric() {
                    let j = token_end(start);
                    return Err(parse_err(&text[start..j], "unknown token"));
                }
                free_loops += 1;
            }
            'X' | 'B' => {
                i += 1;
                if i >= b.len() || b[i] != b'[' {
                    let j = token_end(start);
                    return Err(parse_err(&text[start..j], "expected `[`"));
                }
                let close = match text[i..].find(']') {
                    Some(k) => i + k,
                    None => return Err(parse_err(&text[start..], "missing `]`")),
                };
                let body = &text[i + 1..close];
                let mut labels = Vec::new();
                for piece in body.split(|c: char| c == ',' || c.is_whitespace()) {
                    if piece.is_empty() {
                        continue;
                    }
                    let v: u64 = piece.parse().map_err(|_| {
                        parse_err(&text[start..=close], format!("bad arc label `{piece}`"))
                    })?;
                    if v == 0 {
                        return Err(parse_err(&text[start..=close], "arc labels must be positive"));
                    }
                    labels.push(v);
                }
                i = close + 1;
                if ch == 'X' {
                    if labels.len() != 4 {
                        return Err(parse_err(
                            &text[start..i],
                            format!("a crossing needs 4 arcs, found {}", labels.len()),
                        ));
                    }
                    let arcs = [labels[0], labels[1], labels[2], labels[3]];
                    let mut x = Crossing::standard(arcs);
                    if i < b.len() && b[i] == b'o' {
                        let over = match b.get(i + 1) {
                            Some(b'0') => 0,
                            Some(b'1') => 1,
                            _ => {
                                let j = token_end(start);
                                return Err(parse_err(&text[start..j], "over suffix must be o0 or o1"));
                            }
                        };
                        x = Crossing::new(arcs, over);
                        i += 2;
                    }
                    if i < b.len() && !(b[i] as char).is_whitespace() && b[i] != b',' && b[i] != b']'
                    {
                        let j = token_end(start);
                        return Err(parse_err(&text[start..j], "unexpected trailing characters"));
                    }
                    crossings.push(x);
                } else {
                    if saw_boundary {
                        return Err(parse_err(&text[start..i], "boundary given twice"));
                    }
                    saw_boundary = true;
                    boundary = labels;
                }
            }
            _ => {
                let j = token_end(start);
                return Err(parse_err(&text[start..j], "unknown token"));
            }
        }
    }
    if wrapper_depth != 0 {
        return Err(parse_err("PD[", "unclosed wrapper"));
    }
    Diagram::new(crossings, free_loops, boundary)
}

fn parse_json(text: &str) -> Result<Diagram, PlanarError> {
    let j: DiagramJson =
        serde_json::from_str(text).map_err(|e| parse_err("{", format!("invalid JSON: {e}")))?;
    let crossings = j
        .crossings
        .into_iter()
        .map(|c| match c.over {
            None => Ok(Crossing::standard(c.arcs)),
            Some(o) if o <= 1 => Ok(Crossing::new(c.arcs, o)),
            Some(_) => Err(parse_err("over", "over flag must be 0 or 1")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Diagram::new(crossings, j.free_loops, j.boundary)
}

// ---------------------------------------------------------------------------
// combinatorial map

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DartKind {
    Slot { crossing: usize, slot: usize },
    Boundary { index: usize },
}

/// One face as a cyclic sequence of darts; each dart stands for the side of
/// its arc that faces this region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub darts: Vec<usize>,
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

#[derive(Clone, Debug)]
pub struct PlanarMap {
    n: usize,
    g: usize,
    free_loops: usize,
    alpha: Vec<usize>,
    label: Vec<u64>,
    face_of: Vec<usize>,
    faces: Vec<Face>,
    /// Graph component of each crossing.
    crossing_comp: Vec<usize>,
    /// Boundary index pairs `(a, b)`, `a < b`, of arcs joining two boundary points.
    direct_arcs: Vec<(usize, usize)>,
    /// Component list: crossing components first, then direct arcs.
    comp_touches_boundary: Vec<bool>,
    comp_min_crossing: Vec<Option<usize>>,
    over: Vec<u8>,
}

impl PlanarMap {
    pub fn build(d: &Diagram) -> Result<PlanarMap, PlanarError> {
        let n = d.n();
        let g = d.g();
        let nd = 4 * n + g;
        let mut label = vec![0u64; nd];
        let mut ends: HashMap<u64, Vec<usize>> = HashMap::new();
        for (c, x) in d.crossings.iter().enumerate() {
            for s in 0..4 {
                label[4 * c + s] = x.arcs[s];
                ends.entry(x.arcs[s]).or_default().push(4 * c + s);
            }
        }
        for (j, &a) in d.boundary.iter().enumerate() {
            label[4 * n + j] = a;
            ends.entry(a).or_default().push(4 * n + j);
        }
        let mut alpha = vec![usize::MAX; nd];
        for (arc, e) in &ends {
            if e.len() != 2 {
                return Err(PlanarError::ArcMultiplicity {
                    arc: *arc,
                    count: e.len(),
                });
            }
            alpha[e[0]] = e[1];
            alpha[e[1]] = e[0];
        }
        let sigma = |dart: usize| -> usize {
            if dart < 4 * n {
                4 * (dart / 4) + (dart % 4 + 1) % 4
            } else {
                let j = dart - 4 * n;
                4 * n + (j + g - 1) % g
            }
        };
        let mut face_of = vec![usize::MAX; nd];
        let mut faces = Vec::new();
        for start in 0..nd {
            if face_of[start] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let mut darts = Vec::new();
            let mut x = start;
            while face_of[x] == usize::MAX {
                face_of[x] = id;
                darts.push(x);
                x = sigma(alpha[x]);
            }
            faces.push(Face { darts });
        }

        // graph components (the vertex at infinity does not join them)
        let mut dsu = Dsu::new(n.max(1));
        let mut touches = vec![false; n];
        let mut direct_arcs = Vec::new();
        for dart in 0..nd {
            let other = alpha[dart];
            match (dart < 4 * n, other < 4 * n) {
                (true, true) => {
                    dsu.union(dart / 4, other / 4);
                }
                (true, false) => touches[dart / 4] = true,
                (false, false) if dart < other => {
                    direct_arcs.push((dart - 4 * n, other - 4 * n));
                }
                _ => {}
            }
        }
        let mut root_to_comp: BTreeMap<usize, usize> = BTreeMap::new();
        let mut crossing_comp = vec![0; n];
        let mut comp_touches_boundary = Vec::new();
        let mut comp_min_crossing = Vec::new();
        for c in 0..n {
            let r = dsu.find(c);
            let id = *root_to_comp.entry(r).or_insert_with(|| {
                comp_touches_boundary.push(false);
                comp_min_crossing.push(Some(c));
                comp_touches_boundary.len() - 1
            });
            crossing_comp[c] = id;
            if touches[c] {
                comp_touches_boundary[id] = true;
            }
        }
        for _ in &direct_arcs {
            comp_touches_boundary.push(true);
            comp_min_crossing.push(None);
        }

        let map = PlanarMap {
            n,
            g,
            free_loops: d.free_loops,
            alpha,
            label,
            face_of,
            faces,
            crossing_comp,
            direct_arcs,
            comp_touches_boundary,
            comp_min_crossing,
            over: d.crossings.iter().map(|x| x.over).collect(),
        };
        map.euler_check()?;
        Ok(map)
    }

    /// V - E + F = 2 on every connected piece of the map (infinity included).
    fn euler_check(&self) -> Result<(), PlanarError> {
        let nd = self.alpha.len();
        let n = self.n;
        let inf = n; // vertex index of infinity
        let mut dsu = Dsu::new(n + 1);
        for dart in 0..nd {
            let v = self.vertex_of(dart);
            let w = self.vertex_of(self.alpha[dart]);
            dsu.union(v, w);
        }
        let mut v_count: BTreeMap<usize, i64> = BTreeMap::new();
        let mut e_count: BTreeMap<usize, i64> = BTreeMap::new();
        let mut f_count: BTreeMap<usize, i64> = BTreeMap::new();
        for v in 0..n {
            *v_count.entry(dsu.find(v)).or_default() += 1;
        }
        if self.g > 0 {
            *v_count.entry(dsu.find(inf)).or_default() += 1;
        }
        for dart in 0..nd {
            if dart < self.alpha[dart] {
                *e_count.entry(dsu.find(self.vertex_of(dart))).or_default() += 1;
            }
        }
        for f in &self.faces {
            *f_count.entry(dsu.find(self.vertex_of(f.darts[0]))).or_default() += 1;
        }
        for (root, v) in &v_count {
            let e = e_count.get(root).copied().unwrap_or(0);
            let f = f_count.get(root).copied().unwrap_or(0);
            if e == 0 && f == 0 {
                // a bare vertex at infinity cannot occur, a bare crossing cannot either
                continue;
            }
            if v - e + f != 2 {
                return Err(PlanarError::NonPlanar(format!(
                    "component has V={v}, E={e}, F={f} (V-E+F={})",
                    v - e + f
                )));
            }
        }
        Ok(())
    }

    fn vertex_of(&self, dart: usize) -> usize {
        if dart < 4 * self.n {
            dart / 4
        } else {
            self.n
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn free_loops(&self) -> usize {
        self.free_loops
    }

    pub fn dart_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self, dart: usize) -> usize {
        self.alpha[dart]
    }

    pub fn label(&self, dart: usize) -> u64 {
        self.label[dart]
    }

    pub fn kind(&self, dart: usize) -> DartKind {
        if dart < 4 * self.n {
            DartKind::Slot {
                crossing: dart / 4,
                slot: dart % 4,
            }
        } else {
            DartKind::Boundary {
                index: dart - 4 * self.n,
            }
        }
    }

    pub fn slot_dart(&self, crossing: usize, slot: usize) -> usize {
        4 * crossing + slot % 4
    }

    pub fn boundary_dart(&self, index: usize) -> usize {
        4 * self.n + index
    }

    pub fn is_boundary_dart(&self, dart: usize) -> bool {
        dart >= 4 * self.n
    }

    pub fn face_of(&self, dart: usize) -> usize {
        self.face_of[dart]
    }

    /// Face containing the corner between `slot` and `slot + 1` of `crossing`.
    pub fn corner_face(&self, crossing: usize, slot: usize) -> usize {
        self.face_of[4 * crossing + (slot + 1) % 4]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Number of traced faces plus two per free loop.
    pub fn face_count(&self) -> usize {
        self.faces.len() + 2 * self.free_loops
    }

    pub fn crossing_component(&self, c: usize) -> usize {
        self.crossing_comp[c]
    }

    pub fn direct_arcs(&self) -> &[(usize, usize)] {
        &self.direct_arcs
    }

    /// Graph components with crossings or direct arcs (free loops excluded).
    pub fn component_count(&self) -> usize {
        self.comp_touches_boundary.len()
    }

    pub fn component_touches_boundary(&self, comp: usize) -> bool {
        self.comp_touches_boundary[comp]
    }

    pub fn component_min_crossing(&self, comp: usize) -> Option<usize> {
        self.comp_min_crossing[comp]
    }

    pub fn component_crossings(&self, comp: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&c| self.crossing_comp[c] == comp)
            .collect()
    }

    /// Boundary indices reached by arcs of a component, ascending.
    pub fn component_boundary_indices(&self, comp: usize) -> Vec<usize> {
        let ndc = self.comp_touches_boundary.len() - self.direct_arcs.len();
        if comp >= ndc {
            let (a, b) = self.direct_arcs[comp - ndc];
            return vec![a, b];
        }
        (0..self.g)
            .filter(|&j| {
                let other = self.alpha[4 * self.n + j];
                other < 4 * self.n && self.crossing_comp[other / 4] == comp
            })
            .collect()
    }

    /// Over flag of a crossing.
    pub fn over(&self, c: usize) -> u8 {
        self.over[c]
    }
}

/// Faces of a diagram; a free loop contributes its inside and outside.
pub fn trace_faces(d: &Diagram) -> Result<Vec<Face>, PlanarError> {
    let map = PlanarMap::build(d)?;
    let mut faces = map.faces.clone();
    for _ in 0..2 * d.free_loops {
        faces.push(Face { darts: Vec::new() });
    }
    Ok(faces)
}

// ---------------------------------------------------------------------------
// regions

/// Regions of the diagram in its disk. Split components are placed side by
/// side: for a link every component's designated face merges into one outer
/// region, and for a tangle closed components sit in the host region, the
/// face to the right of the last boundary dart.
#[derive(Clone, Debug)]
pub struct Regions {
    /// Region of each traced face, then the inside and outside of each free loop.
    pub region_of_face: Vec<usize>,
    pub chi: Vec<i64>,
    pub touches_boundary: Vec<bool>,
    pub outer: usize,
    /// Region pairs on the two sides of each arc, then of each free loop.
    pub sides: Vec<(usize, usize)>,
    /// Number of boundary walks merged into each region.
    pub walks: Vec<usize>,
}

impl Regions {
    pub fn compute(map: &PlanarMap) -> Regions {
        let nf = map.faces.len();
        let total = nf + 2 * map.free_loops;
        let mut dsu = Dsu::new(total.max(1));
        let loop_inside = |k: usize| nf + 2 * k;
        let loop_outside = |k: usize| nf + 2 * k + 1;

        let mut designated = Vec::new();
        for comp in 0..map.component_count() {
            if map.comp_touches_boundary[comp] {
                continue;
            }
            let c = map.comp_min_crossing[comp].expect("closed component has a crossing");
            designated.push(map.face_of[4 * c]);
        }
        for k in 0..map.free_loops {
            designated.push(loop_outside(k));
        }
        let root_face = if map.g > 0 {
            Some(map.face_of[4 * map.n + map.g - 1])
        } else {
            designated.first().copied()
        };
        if let Some(root) = root_face {
            for &f in &designated {
                dsu.union(root, f);
            }
        }

        let mut region_id: BTreeMap<usize, usize> = BTreeMap::new();
        let mut region_of_face = vec![0; total];
        for f in 0..total {
            let r = dsu.find(f);
            let next = region_id.len();
            region_of_face[f] = *region_id.entry(r).or_insert(next);
        }
        let nr = region_id.len().max(1);
        let mut walks = vec![0usize; nr];
        for f in 0..total {
            walks[region_of_face[f]] += 1;
        }
        let outer = root_face.map(|f| region_of_face[f]).unwrap_or(0);
        if total == 0 {
            // empty diagram: the whole disk, no walks
            return Regions {
                region_of_face,
                chi: vec![1],
                touches_boundary: vec![true],
                outer: 0,
                sides: Vec::new(),
                walks: vec![0],
            };
        }
        let mut chi: Vec<i64> = walks.iter().map(|&w| 2 - w as i64).collect();
        let mut touches_boundary = vec![false; nr];
        if map.g == 0 {
            chi[outer] -= 1;
            touches_boundary[outer] = true;
        } else {
            for (f, face) in map.faces.iter().enumerate() {
                if face.darts.iter().any(|&d| map.is_boundary_dart(d)) {
                    touches_boundary[region_of_face[f]] = true;
                }
            }
        }
        let mut sides = Vec::new();
        for dart in 0..map.alpha.len() {
            let other = map.alpha[dart];
            if dart < other {
                sides.push((
                    region_of_face[map.face_of[dart]],
                    region_of_face[map.face_of[other]],
                ));
            }
        }
        for k in 0..map.free_loops {
            sides.push((region_of_face[loop_inside(k)], region_of_face[loop_outside(k)]));
        }
        Regions {
            region_of_face,
            chi,
            touches_boundary,
            outer,
            sides,
            walks,
        }
    }

    pub fn count(&self) -> usize {
        self.chi.len()
    }

    pub fn interior_count(&self) -> usize {
        self.touches_boundary.iter().filter(|t| !**t).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Dark,
    Light,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Dark => Color::Light,
            Color::Light => Color::Dark,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramStats {
    pub n: usize,
    pub g: usize,
    pub c: usize,
    pub c_prime: usize,
    pub i: usize,
}

/// Counts for a diagram. `c` counts connected components of the diagram as a
/// graph, free loops included.
pub fn stats(d: &Diagram) -> Result<DiagramStats, PlanarError> {
    let map = PlanarMap::build(d)?;
    Ok(stats_of(&map))
}

pub fn stats_of(map: &PlanarMap) -> DiagramStats {
    let regions = Regions::compute(map);
    let c = map.component_count() + map.free_loops;
    let c_prime = map
        .comp_touches_boundary
        .iter()
        .filter(|t| !**t)
        .count()
        + map.free_loops;
    let i = if map.faces.is_empty() && map.free_loops == 0 {
        0
    } else {
        regions.interior_count()
    };
    let s = DiagramStats {
        n: map.n,
        g: map.g,
        c,
        c_prime,
        i,
    };
    debug_assert_eq!(
        s.i as i64,
        s.n as i64 + s.c as i64 - s.g as i64 / 2,
        "interior faces must equal n + c - g/2"
    );
    s
}

// ---------------------------------------------------------------------------
// checkerboarding

#[derive(Clone, Debug)]
pub struct Checkerboarding {
    pub region_colors: Vec<Color>,
    /// Color of every traced face, then the inside and outside of each free loop.
    pub face_colors: Vec<Color>,
    pub e: i64,
    pub w: i64,
    /// Sign of each crossing relative to the dark surface.
    pub crossing_signs: Vec<i8>,
    pub outer_color: Color,
}

/// Proper 2-coloring of the regions with the outer (or host) region colored `seed`.
pub fn checkerboard(d: &Diagram, seed: Color) -> Result<Checkerboarding, PlanarError> {
    let map = PlanarMap::build(d)?;
    let regions = Regions::compute(&map);
    checkerboard_of(&map, &regions, seed)
}

pub fn checkerboard_of(
    map: &PlanarMap,
    regions: &Regions,
    seed: Color,
) -> Result<Checkerboarding, PlanarError> {
    let nr = regions.count();
    let mut adj = vec![Vec::new(); nr];
    for &(a, b) in &regions.sides {
        if a == b {
            return Err(PlanarError::Coloring(format!(
                "an arc has region {a} on both sides"
            )));
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut color: Vec<Option<Color>> = vec![None; nr];
    let mut queue = std::collections::VecDeque::new();
    for start in std::iter::once(regions.outer).chain(0..nr) {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(seed);
        queue.push_back(start);
        while let Some(r) = queue.pop_front() {
            let cr = color[r].unwrap();
            for &s in &adj[r] {
                match color[s] {
                    None => {
                        color[s] = Some(cr.flip());
                        queue.push_back(s);
                    }
                    Some(cs) if cs == cr => {
                        return Err(PlanarError::Coloring(format!(
                            "regions {r} and {s} share an arc and a color"
                        )));
                    }
                    _ => {}
                }
            }
        }
    }
    let region_colors: Vec<Color> = color.into_iter().map(|c| c.unwrap()).collect();
    let face_colors = regions
        .region_of_face
        .iter()
        .map(|&r| region_colors[r])
        .collect();
    let dark_chi: i64 = (0..nr)
        .filter(|&r| region_colors[r] == Color::Dark)
        .map(|r| regions.chi[r])
        .sum();
    let e = dark_chi - map.n as i64;
    // crossing is positive when its dark corners are the ones swept by turning
    // the over strand counterclockwise
    let mut crossing_signs = Vec::with_capacity(map.n);
    for c in 0..map.n {
        let over = over_of(map, c);
        let face = map.corner_face(c, over);
        let r = regions.region_of_face[face];
        crossing_signs.push(if region_colors[r] == Color::Dark { 1 } else { -1 });
    }
    let w = crossing_signs.iter().map(|&s| s as i64).sum();
    Ok(Checkerboarding {
        outer_color: region_colors[regions.outer],
        region_colors,
        face_colors,
        e,
        w,
        crossing_signs,
    })
}

fn over_of(map: &PlanarMap, c: usize) -> usize {
    map.over[c] as usize
}

/// Euler characteristic of the dark surface computed directly as V - E + F of
/// a cell structure: crossings, boundary points and one point per free loop
/// as vertices; arcs, dark boundary segments and cuts joining the boundary
/// walks of each dark region as edges; dark regions as faces.
pub fn dark_surface_euler(map: &PlanarMap, regions: &Regions, cb: &Checkerboarding) -> i64 {
    let dark = |r: usize| cb.region_colors[r] == Color::Dark;
    let outer_disk = map.g == 0 && dark(regions.outer) && !regions.sides.is_empty();
    let mut v = (map.n + map.g + map.free_loops) as i64;
    let mut e = (map.dart_count() / 2 + map.free_loops) as i64;
    if outer_disk {
        // the circle bounding the disk that holds the link
        v += 1;
        e += 1;
    }
    for j in 0..map.g {
        let r = regions.region_of_face[map.face_of(map.boundary_dart(j))];
        if dark(r) {
            e += 1;
        }
    }
    let mut f = 0i64;
    for r in 0..regions.count() {
        if !dark(r) {
            continue;
        }
        f += 1;
        let mut walks = regions.walks[r] as i64;
        if map.g == 0 && r == regions.outer {
            walks += 1;
        }
        e += walks - 1;
    }
    v - e + f
}

/// Color of each boundary segment; segment `j` runs from boundary point `j`
/// to boundary point `j + 1`.
pub fn segment_colors(map: &PlanarMap, regions: &Regions, cb: &Checkerboarding) -> Vec<Color> {
    (0..map.g)
        .map(|j| cb.region_colors[regions.region_of_face[map.face_of(map.boundary_dart(j))]])
        .collect()
}

/// Number of dark regions of a crossingless tangle whose boundary segments
/// carry the given colors. With no boundary points the answer is whether the
/// disk itself is dark.
pub fn base_dark_regions(segments: &[Color], outer: Color, b: &Matching) -> usize {
    let g = b.g();
    assert_eq!(segments.len(), g);
    if g == 0 {
        return usize::from(outer == Color::Dark);
    }
    let mut seen = vec![false; g];
    let mut count = 0;
    for start in 0..g {
        if seen[start] {
            continue;
        }
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = b.partner((j + 1) % g);
        }
        if segments[start] == Color::Dark {
            count += 1;
        }
    }
    count
}

// ---------------------------------------------------------------------------
// strands, orientation and writhe

/// One link component traced along its strand. `leaving` lists darts in
/// travel order; each is left along its arc, which then enters `alpha` of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strand {
    pub leaving: Vec<usize>,
    pub closed: bool,
    pub min_label: u64,
}

fn opposite(dart: usize) -> usize {
    4 * (dart / 4) + (dart % 4 + 2) % 4
}

fn reverse_strand(map: &PlanarMap, leaving: &[usize]) -> Vec<usize> {
    leaving.iter().rev().map(|&l| map.alpha(l)).collect()
}

/// Strands of the diagram with their canonical directions, sorted by
/// smallest arc label. Open strands run from their lower boundary end. A
/// closed strand through a slot-0 passage of a crossing given in the
/// "incoming under" dialect follows that dialect; otherwise it leaves its
/// smallest arc towards the smaller neighbouring label.
pub fn strands(d: &Diagram, map: &PlanarMap) -> Vec<Strand> {
    let n = map.n();
    let mut visited = vec![false; map.dart_count()];
    let mut out = Vec::new();
    for j in 0..map.g() {
        let start = map.boundary_dart(j);
        if visited[start] {
            continue;
        }
        let mut leaving = Vec::new();
        let mut cur = start;
        loop {
            leaving.push(cur);
            let e = map.alpha(cur);
            visited[cur] = true;
            visited[e] = true;
            if map.is_boundary_dart(e) {
                break;
            }
            cur = opposite(e);
        }
        let min_label = leaving.iter().map(|&l| map.label(l)).min().unwrap();
        out.push(Strand {
            leaving,
            closed: false,
            min_label,
        });
    }
    for start in 0..4 * n {
        if visited[start] {
            continue;
        }
        let mut leaving = Vec::new();
        let mut cur = start;
        while !visited[cur] {
            leaving.push(cur);
            visited[cur] = true;
            let e = map.alpha(cur);
            visited[e] = true;
            cur = opposite(e);
        }
        let min_label = leaving.iter().map(|&l| map.label(l)).min().unwrap();
        let forward = canonical_forward(d, map, &leaving, min_label);
        let leaving = if forward {
            leaving
        } else {
            reverse_strand(map, &leaving)
        };
        out.push(Strand {
            leaving,
            closed: true,
            min_label,
        });
    }
    out.sort_by_key(|s| s.min_label);
    out
}

/// Whether the traversal already runs in the canonical direction.
fn canonical_forward(d: &Diagram, map: &PlanarMap, leaving: &[usize], min_label: u64) -> bool {
    // dialect rule: first crossing (by index) where the strand uses slots 0/2
    let mut best: Option<(usize, bool)> = None;
    for &l in leaving {
        let e = map.alpha(l);
        let (c, s) = (e / 4, e % 4);
        if s % 2 == 0 && d.crossings[c].over_defaulted && best.is_none_or(|(bc, _)| c < bc) {
            best = Some((c, s == 0));
        }
    }
    if let Some((_, enters_at_zero)) = best {
        return enters_at_zero;
    }
    // leave the smallest arc towards the smaller next label
    let darts: Vec<usize> = (0..4 * map.n())
        .filter(|&x| map.label(x) == min_label)
        .collect();
    let (d1, d2) = (darts[0], darts[1]);
    let next_fwd = map.label(opposite(d2));
    let next_rev = map.label(opposite(d1));
    let leave_from = if next_fwd <= next_rev { d1 } else { d2 };
    leaving.contains(&leave_from)
}

/// Per-crossing sign under the right-hand rule. `flips[k]` reverses strand
/// `k` of [`strands`]; without it the signs must not depend on the relative
/// orientation of different components.
pub fn crossing_signs(d: &Diagram, flips: Option<&[bool]>) -> Result<Vec<i8>, PlanarError> {
    let map = PlanarMap::build(d)?;
    let strands = strands(d, &map);
    if let Some(f) = flips {
        if f.len() != strands.len() {
            return Err(PlanarError::MissingOrientation(format!(
                "{} orientation signs given for {} components",
                f.len(),
                strands.len()
            )));
        }
    }
    let n = map.n();
    let mut over_in = vec![usize::MAX; n];
    let mut under_in = vec![usize::MAX; n];
    let mut over_comp = vec![0; n];
    let mut under_comp = vec![0; n];
    for (k, s) in strands.iter().enumerate() {
        let leaving = if flips.is_some_and(|f| f[k]) {
            reverse_strand(&map, &s.leaving)
        } else {
            s.leaving.clone()
        };
        for &l in &leaving {
            let e = map.alpha(l);
            if map.is_boundary_dart(e) {
                continue;
            }
            let (c, slot) = (e / 4, e % 4);
            if slot % 2 == d.crossings[c].over as usize {
                over_in[c] = slot;
                over_comp[c] = k;
            } else {
                under_in[c] = slot;
                under_comp[c] = k;
            }
        }
    }
    if flips.is_none() {
        if let Some(c) = (0..n).find(|&c| over_comp[c] != under_comp[c]) {
            return Err(PlanarError::MissingOrientation(format!(
                "crossing {c} joins two components; give one sign per component"
            )));
        }
    }
    Ok((0..n)
        .map(|c| {
            if (over_in[c] + 1) % 4 == under_in[c] {
                1
            } else {
                -1
            }
        })
        .collect())
}

pub fn writhe(d: &Diagram, flips: Option<&[bool]>) -> Result<i64, PlanarError> {
    Ok(crossing_signs(d, flips)?.iter().map(|&s| s as i64).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOPF: &str = "X[1,3,2,4] X[3,1,4,2]";
    const TREFOIL: &str = "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]";

    #[test]
    fn parse_examples() {
        let h = parse_pd(HOPF).unwrap();
        assert_eq!(h.n(), 2);
        let o = parse_pd("O").unwrap();
        assert_eq!((o.n(), o.free_loops()), (0, 1));
        assert!(matches!(parse_pd("X[1,2,3]"), Err(PlanarError::Parse { .. })));
        assert!(matches!(
            parse_pd("X[1,2,3,4]"),
            Err(PlanarError::ArcMultiplicity { .. })
        ));
        assert!(matches!(parse_pd("Y[1]"), Err(PlanarError::Parse { .. })));
        let t = parse_pd("# comment\nPD[X[1, 5, 2, 4], X[3,1,4,6]o1, X[5,3,6,2]]").unwrap();
        assert_eq!(t.n(), 3);
        assert!(t.crossings()[0].over_defaulted && !t.crossings()[1].over_defaulted);
    }

    #[test]
    fn json_round_trip() {
        let t = parse_pd("X[1,2,3,4]o0 B[1,2,3,4]").unwrap();
        let j = t.to_json().to_string();
        assert_eq!(parse_pd(&j).unwrap(), t);
        assert_eq!(parse_pd(&t.to_pd()).unwrap(), t);
    }

    #[test]
    fn face_counts() {
        assert_eq!(trace_faces(&parse_pd(HOPF).unwrap()).unwrap().len(), 4);
        assert_eq!(trace_faces(&parse_pd("O").unwrap()).unwrap().len(), 2);
        assert_eq!(trace_faces(&parse_pd("X[1,2,2,1]").unwrap()).unwrap().len(), 3);
        assert_eq!(trace_faces(&parse_pd(TREFOIL).unwrap()).unwrap().len(), 5);
    }

    #[test]
    fn rejects_nonplanar() {
        assert!(matches!(
            parse_pd("X[1,2,1,2]").and_then(|d| trace_faces(&d)),
            Err(PlanarError::NonPlanar(_))
        ));
    }

    #[test]
    fn stats_examples() {
        let o = stats(&parse_pd("O").unwrap()).unwrap();
        assert_eq!(o, DiagramStats { n: 0, g: 0, c: 1, c_prime: 1, i: 1 });
        let h = stats(&parse_pd(HOPF).unwrap()).unwrap();
        assert_eq!(h, DiagramStats { n: 2, g: 0, c: 1, c_prime: 1, i: 3 });
        let arc = stats(&parse_pd("B[1,1]").unwrap()).unwrap();
        assert_eq!(arc, DiagramStats { n: 0, g: 2, c: 1, c_prime: 0, i: 0 });
    }

    #[test]
    fn checkerboard_free_loop() {
        let o = parse_pd("O").unwrap();
        let cb = checkerboard(&o, Color::Light).unwrap();
        assert_eq!((cb.e, cb.w), (1, 0));
        let cb = checkerboard(&o, Color::Dark).unwrap();
        assert_eq!((cb.e, cb.w), (0, 0));
    }

    #[test]
    fn swapped_coloring() {
        for pd in [HOPF, TREFOIL, "X[1,2,2,1]", "O O", "X[1,2,3,4]o0 B[1,2,3,4]"] {
            let d = parse_pd(pd).unwrap();
            let map = PlanarMap::build(&d).unwrap();
            let regions = Regions::compute(&map);
            let a = checkerboard_of(&map, &regions, Color::Light).unwrap();
            let b = checkerboard_of(&map, &regions, Color::Dark).unwrap();
            assert_eq!(a.w, -b.w, "{pd}");
            for (x, y) in a.face_colors.iter().zip(&b.face_colors) {
                assert_eq!(*x, y.flip());
            }
            let light_chi: i64 = (0..regions.count())
                .filter(|&r| a.region_colors[r] == Color::Light)
                .map(|r| regions.chi[r])
                .sum();
            assert_eq!(b.e, light_chi - d.n() as i64);
            assert_eq!(dark_surface_euler(&map, &regions, &a), a.e, "{pd}");
            assert_eq!(dark_surface_euler(&map, &regions, &b), b.e, "{pd}");
        }
    }

    #[test]
    fn writhe_examples() {
        let t = parse_pd(TREFOIL).unwrap();
        assert_eq!(writhe(&t, None).unwrap().abs(), 3);
        assert_eq!(writhe(&t, None).unwrap(), writhe(&t, Some(&[true])).unwrap());
        assert_eq!(writhe(&t.mirror(), None).unwrap(), -writhe(&t, None).unwrap());
        let h = parse_pd(HOPF).unwrap();
        assert!(matches!(writhe(&h, None), Err(PlanarError::MissingOrientation(_))));
        let par = writhe(&h, Some(&[false, false])).unwrap();
        assert_eq!(par.abs(), 2);
        assert_eq!(writhe(&h, Some(&[false, true])).unwrap(), -par);
    }

    #[test]
    fn base_regions() {
        let m: Matching = "(0 1)(2 3)".parse().unwrap();
        let segs = [Color::Dark, Color::Light, Color::Dark, Color::Light];
        // regions: {seg0}, {seg1, seg3}, {seg2}
        assert_eq!(base_dark_regions(&segs, Color::Light, &m), 2);
        let m: Matching = "(0 3)(1 2)".parse().unwrap();
        assert_eq!(base_dark_regions(&segs, Color::Light, &m), 1);
        assert_eq!(base_dark_regions(&[], Color::Dark, &Matching::empty()), 1);
    }
}
