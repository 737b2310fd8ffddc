//! Shortest cycles through the fixed edge, their sibling structure, the gaps
//! between them, and the arc and symmetry searches inside the gap `R0`.
//!
//! Everything here works on a finite level `G^k` of a tower and is labelled
//! with that depth.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branched_cover::{lifts_of_path, CoverError, Tower};
use crate::per2::{critical_loop, GasketType, Per2Core, Per2Error};
use crate::plane_graph::{
    bfs_distances, cycles_through_edge, find_embedded_automorphism, EdgeId, EmbeddedCycle, FaceId, PlaneGraph,
    VertexId,
};

/// Longest path the geodesic searches accept.
pub const MAX_GEODESIC_LEN: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnchoredError {
    #[error(transparent)]
    Per2(#[from] Per2Error),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("cycle {0} never maps onto the critical loop")]
    OrbitEscape(String),
    #[error("need at least two anchored cycles, found {0}")]
    NotEnoughCycles(usize),
    #[error("sibling pattern violated: {0}")]
    PatternViolation(String),
    #[error("path length limit is {MAX_GEODESIC_LEN}, got {0}")]
    LimitExceeded(usize),
    #[error("gap structure: {0}")]
    GapStructure(String),
    #[error("operation needs a Type I core, got Type {0}")]
    NotTypeI(GasketType),
    #[error("endpoints must differ")]
    SameEndpoints,
}

impl AnchoredError {
    pub fn code(&self) -> String {
        match self {
            AnchoredError::Per2(e) => e.code(),
            AnchoredError::Cover(e) => e.code(),
            AnchoredError::OrbitEscape(_) => "OrbitEscape".into(),
            AnchoredError::NotEnoughCycles(_) => "NotEnoughCycles".into(),
            AnchoredError::PatternViolation(_) => "PatternViolation".into(),
            AnchoredError::LimitExceeded(_) => "LimitExceeded".into(),
            AnchoredError::GapStructure(_) => "GapStructure".into(),
            AnchoredError::NotTypeI(_) => "NotTypeI".into(),
            AnchoredError::SameEndpoints => "SameEndpoints".into(),
        }
    }
}

/// One shortest cycle through the fixed edge.
#[derive(Debug, Clone)]
pub struct AnchoredCycle {
    pub cycle: EmbeddedCycle,
    /// Number of iterates taking it onto the critical loop.
    pub iterate: usize,
    /// Lowest level containing the whole cycle.
    pub level: usize,
}

#[derive(Debug, Clone)]
pub struct AnchoredCycleSet {
    pub depth: usize,
    pub l: usize,
    /// The critical loop comes first.
    pub cycles: Vec<AnchoredCycle>,
    /// Pairs `(i, j)`, `i < j`, sharing more than the fixed edge.
    pub siblings: Vec<(usize, usize)>,
}

impl AnchoredCycleSet {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn sibling_count(&self, i: usize) -> usize {
        self.siblings.iter().filter(|&&(x, y)| x == i || y == i).count()
    }

    pub fn siblings_of(&self, i: usize) -> Vec<usize> {
        self.siblings
            .iter()
            .filter_map(|&(x, y)| if x == i { Some(y) } else if y == i { Some(x) } else { None })
            .collect()
    }

    /// Cycles lying in `G^(k-1)`, whose whole preimage is present at depth `k`.
    pub fn is_resolved(&self, i: usize) -> bool {
        self.cycles[i].level < self.depth
    }
}

/// The critical loop as tower vertex ids, in the order `a0, a1, .., b0`.
pub fn critical_loop_in_tower(t: &Tower, core: &Per2Core) -> Result<(Vec<VertexId>, usize), AnchoredError> {
    let lp = critical_loop(core)?;
    let g1 = t.level(1);
    let seq = lp
        .names(core.g1())
        .iter()
        .map(|n| g1.vertex(n).ok_or_else(|| AnchoredError::GapStructure(format!("`{n}` missing from tower"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((seq, lp.l))
}

fn fixed_edge_in(t: &Tower, g: &PlaneGraph) -> EdgeId {
    let (a, b) = t.fixed;
    g.edge_between(a, b).expect("fixed edge present at every level")
}

/// All cycles of length `2l` through the fixed edge in `G^k`.
pub fn shortest_anchored_cycles(t: &Tower, core: &Per2Core, k: usize) -> Result<AnchoredCycleSet, AnchoredError> {
    if t.depth() < k {
        return Err(CoverError::TooShallow { have: t.depth(), need: k }.into());
    }
    let (loop_seq, l) = critical_loop_in_tower(t, core)?;
    let g = t.level(k);
    let e0 = fixed_edge_in(t, g);
    let loop_edges: BTreeSet<(VertexId, VertexId)> = edge_keys(&loop_seq);
    let mut found = cycles_through_edge(g, e0, 2 * l);
    if let Some(short) = found.iter().find(|c| c.len() < 2 * l) {
        return Err(AnchoredError::Per2(Per2Error::Inconsistent(format!(
            "cycle of length {} through the fixed edge at depth {k}",
            short.len()
        ))));
    }
    found.retain(|c| c.len() == 2 * l);
    let mut cycles = Vec::with_capacity(found.len());
    for c in found {
        let mut seq = c.vertices().to_vec();
        let mut iterate = None;
        for j in 0..=k {
            if edge_keys(&seq) == loop_edges {
                iterate = Some(j);
                break;
            }
            seq = seq.iter().map(|&v| t.f(v)).collect();
        }
        let Some(iterate) = iterate else {
            return Err(AnchoredError::OrbitEscape(c.names(g).join("-")));
        };
        let level = c.vertices().iter().map(|&v| t.birth_level(v)).max().unwrap_or(0);
        cycles.push(AnchoredCycle { cycle: c, iterate, level });
    }
    cycles.sort_by(|x, y| {
        (x.iterate, x.level, x.cycle.vertices()).cmp(&(y.iterate, y.level, y.cycle.vertices()))
    });
    let mut siblings = Vec::new();
    for i in 0..cycles.len() {
        for j in i + 1..cycles.len() {
            if cycles[i].cycle.common_edges(&cycles[j].cycle).len() > 1 {
                siblings.push((i, j));
            }
        }
    }
    Ok(AnchoredCycleSet { depth: k, l, cycles, siblings })
}

fn edge_keys(seq: &[VertexId]) -> BTreeSet<(VertexId, VertexId)> {
    let n = seq.len();
    (0..n)
        .map(|i| {
            let (x, y) = (seq[i], seq[(i + 1) % n]);
            if x < y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiblingReport {
    pub depth: usize,
    pub gasket_type: GasketType,
    pub cycle_count: usize,
    pub pairs: Vec<(usize, usize)>,
    /// Sibling count per cycle, indexed like the cycle set.
    pub counts: Vec<usize>,
    /// Cycles whose preimage is fully present (checked against the pattern).
    pub resolved: Vec<usize>,
    /// Cycles left out because their preimage is cut off by the truncation.
    pub boundary: Vec<usize>,
    pub verdict_ok: bool,
    pub violation: Option<String>,
}

/// Compares observed siblings with the pattern predicted for the type: none
/// for Type I; for IIA the critical loop has one sibling and no other
/// resolved cycle has any; for IIB the critical loop has two and every other
/// resolved cycle apart from those two has exactly one.
pub fn sibling_report(s: &AnchoredCycleSet, ty: GasketType) -> SiblingReport {
    let n = s.cycles.len();
    let counts: Vec<usize> = (0..n).map(|i| s.sibling_count(i)).collect();
    let resolved: Vec<usize> = (0..n).filter(|&i| s.is_resolved(i)).collect();
    let boundary: Vec<usize> = (0..n).filter(|&i| !s.is_resolved(i)).collect();
    let loop_siblings = if n > 0 { s.siblings_of(0) } else { Vec::new() };
    let mut violation = None;
    let (loop_want, other_want) = match ty {
        GasketType::I => (0, 0),
        GasketType::IIA => (1, 0),
        GasketType::IIB => (2, 1),
    };
    for &i in &resolved {
        let want = if i == 0 {
            loop_want
        } else if loop_siblings.contains(&i) {
            continue;
        } else {
            other_want
        };
        if counts[i] != want {
            let partner = s.siblings_of(i).first().copied();
            violation = Some(match partner {
                Some(j) => format!("cycle {i} has {} siblings (expected {want}), e.g. cycle {j}", counts[i]),
                None => format!("cycle {i} has no siblings (expected {want})"),
            });
            break;
        }
    }
    SiblingReport {
        depth: s.depth,
        gasket_type: ty,
        cycle_count: n,
        pairs: s.siblings.clone(),
        counts,
        resolved,
        boundary,
        verdict_ok: violation.is_none(),
        violation,
    }
}

/// One region cut out by the union of anchored cycles.
#[derive(Debug, Clone)]
pub struct Gap {
    /// Index `n` of `R_n`.
    pub label: i64,
    /// Touches the fixed edge, so it still contains unresolved gaps.
    pub open: bool,
    /// Cycles whose arcs bound this gap.
    pub bounding_cycles: Vec<usize>,
    pub faces: Vec<FaceId>,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Clone)]
pub struct GapDecomposition {
    pub depth: usize,
    /// Cycle `i` minus the fixed edge, as a path from `a` to `b`.
    pub arcs: Vec<Vec<VertexId>>,
    /// Index in the cycle set of `C1`, the cycle mapped onto the loop.
    pub c1: usize,
    pub gaps: Vec<Gap>,
    /// Index of `R0` in `gaps`.
    pub r0: usize,
    /// Number of faces of the union subgraph.
    pub union_faces: usize,
}

impl GapDecomposition {
    pub fn r0(&self) -> &Gap {
        &self.gaps[self.r0]
    }

    pub fn gap(&self, label: i64) -> Option<&Gap> {
        self.gaps.iter().find(|g| g.label == label)
    }
}

/// Arc of a cycle from `a` to `b` avoiding the edge `[a, b]`.
fn arc_of(c: &EmbeddedCycle, a: VertexId, b: VertexId) -> Vec<VertexId> {
    let vs = c.vertices();
    let n = vs.len();
    let i = vs.iter().position(|&v| v == a).expect("anchored cycle contains a");
    let forward = vs[(i + 1) % n] != b;
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let j = if forward { (i + s) % n } else { (i + n - s) % n };
        out.push(vs[j]);
    }
    debug_assert_eq!(*out.last().unwrap(), b);
    out
}

/// Faces of the union of anchored cycles, labelled counterclockwise at `a`
/// starting from the gap between the critical loop and `C1`.
pub fn gap_decomposition(t: &Tower, s: &AnchoredCycleSet) -> Result<GapDecomposition, AnchoredError> {
    if s.cycles.len() < 2 {
        return Err(AnchoredError::NotEnoughCycles(s.cycles.len()));
    }
    let k = s.depth;
    let g = t.level(k);
    let (a, b) = t.critical().map(|(a0, _)| a0).map_or(t.fixed, |a0| {
        if a0 == t.fixed.0 {
            t.fixed
        } else {
            (t.fixed.1, t.fixed.0)
        }
    });
    let e0 = fixed_edge_in(t, g);
    let c1 = s
        .cycles
        .iter()
        .position(|c| c.iterate == 1)
        .ok_or_else(|| AnchoredError::GapStructure("no cycle maps onto the critical loop in one step".into()))?;
    let arcs: Vec<Vec<VertexId>> = s.cycles.iter().map(|c| arc_of(&c.cycle, a, b)).collect();

    let in_union: HashSet<EdgeId> = s.cycles.iter().flat_map(|c| c.cycle.edges().iter().copied()).collect();
    let (u, back) = g
        .edge_subgraph(|e| in_union.contains(&e))
        .map_err(|e| AnchoredError::GapStructure(e.to_string()))?;
    let to_u = |v: VertexId| -> VertexId { VertexId(back.iter().position(|&x| x == v).unwrap() as u32) };
    let ua = to_u(a);
    let ub = to_u(b);

    // which cycles bound each face of U
    let cycle_of_edge = |x: VertexId, y: VertexId| -> Vec<usize> {
        let e = g.edge_between(back[x.idx()], back[y.idx()]).unwrap();
        if e == e0 {
            return Vec::new();
        }
        (0..s.cycles.len()).filter(|&i| s.cycles[i].cycle.contains_edge(e)).collect()
    };
    let mut face_cycles: Vec<BTreeSet<usize>> = Vec::new();
    let mut face_open = Vec::new();
    for walk in u.faces() {
        let mut set = BTreeSet::new();
        let mut open = false;
        for &d in walk {
            let (x, y) = (u.tail(d), u.head(d));
            if (x == ua && y == ub) || (x == ub && y == ua) {
                open = true;
            }
            let cs = cycle_of_edge(x, y);
            // an edge shared by several cycles does not identify one arc
            if cs.len() == 1 {
                set.insert(cs[0]);
            }
        }
        if !walk.iter().any(|&d| u.tail(d) == ua) || !walk.iter().any(|&d| u.tail(d) == ub) {
            return Err(AnchoredError::GapStructure("a gap boundary misses a or b".into()));
        }
        face_cycles.push(set);
        face_open.push(open);
    }
    let r0_face = (0..u.face_count())
        .find(|&f| !face_open[f] && face_cycles[f].contains(&0) && face_cycles[f].contains(&c1))
        .ok_or_else(|| AnchoredError::GapStructure("no gap is bounded by the critical loop and C1".into()))?;

    // corners at a in counterclockwise order, starting at R0
    let rot = u.rotation(ua);
    let corner_face = |i: usize| u.face_of(rot[i].rev()).0.idx();
    let deg = rot.len();
    let start = (0..deg)
        .find(|&i| corner_face(i) == r0_face)
        .ok_or_else(|| AnchoredError::GapStructure("R0 does not touch a".into()))?;
    let e0_slot = rot.iter().position(|&d| u.head(d) == ub).unwrap();
    // corner i sits between rot[i] and rot[i+1]; the last positive one ends at E0
    let last_positive = (e0_slot + deg - 1 - start) % deg;
    let mut label = vec![None; u.face_count()];
    for step in 0..deg {
        let f = corner_face((start + step) % deg);
        let n = if step <= last_positive { step as i64 } else { step as i64 - deg as i64 };
        if label[f].is_none() {
            label[f] = Some(n);
        }
    }

    // put every face of G^k into the face of U containing it
    let mut owner = vec![usize::MAX; g.face_count()];
    for (fi, walk) in g.faces().iter().enumerate() {
        for &d in walk {
            if in_union.contains(&d.edge()) {
                let (x, y) = (to_u(g.tail(d)), to_u(g.head(d)));
                let ud = u.dart_between(x, y).unwrap();
                owner[fi] = u.face_of(ud).0.idx();
                break;
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..g.face_count()).filter(|&f| owner[f] != usize::MAX).collect();
    while let Some(fi) = queue.pop_front() {
        for &d in g.face(FaceId(fi as u32)) {
            if in_union.contains(&d.edge()) {
                continue;
            }
            let other = g.face_of(d.rev()).0.idx();
            if owner[other] == usize::MAX {
                owner[other] = owner[fi];
                queue.push_back(other);
            }
        }
    }

    let mut gaps = Vec::with_capacity(u.face_count());
    for uf in 0..u.face_count() {
        let faces: Vec<FaceId> = (0..g.face_count()).filter(|&f| owner[f] == uf).map(|f| FaceId(f as u32)).collect();
        let mut vs = BTreeSet::new();
        let mut es = BTreeSet::new();
        for &f in &faces {
            for &d in g.face(f) {
                vs.insert(g.tail(d));
                es.insert(d.edge());
            }
        }
        gaps.push(Gap {
            label: label[uf].unwrap_or(i64::MIN),
            open: face_open[uf],
            bounding_cycles: face_cycles[uf].iter().copied().collect(),
            faces,
            vertices: vs.into_iter().collect(),
            edges: es.into_iter().collect(),
        });
    }
    gaps.sort_by_key(|g| g.label);
    let r0 = gaps.iter().position(|g| g.label == 0).unwrap();
    Ok(GapDecomposition { depth: k, arcs, c1, gaps, r0, union_faces: u.face_count() })
}

/// Constraints for a geodesic search inside a level.
struct ArcRules<'a> {
    /// Interior vertices must pass this.
    interior: &'a dyn Fn(VertexId) -> bool,
    /// Every edge must pass this.
    edge: &'a dyn Fn(EdgeId) -> bool,
}

/// Local geodesics from `u` to `v` of length at most `max_len`, shortest
/// first. Chords are checked against all of `g`.
fn geodesics_with(
    g: &PlaneGraph,
    u: VertexId,
    v: VertexId,
    max_len: usize,
    rules: &ArcRules<'_>,
) -> Result<Vec<Vec<VertexId>>, AnchoredError> {
    if u == v {
        return Err(AnchoredError::SameEndpoints);
    }
    if max_len > MAX_GEODESIC_LEN {
        return Err(AnchoredError::LimitExceeded(max_len));
    }
    let to_v = bfs_distances(g, v);
    let mut out = Vec::new();
    let mut path = vec![u];
    let mut on_path = vec![false; g.vertex_count()];
    on_path[u.idx()] = true;

    fn rec(
        g: &PlaneGraph,
        v: VertexId,
        max_len: usize,
        rules: &ArcRules<'_>,
        to_v: &[usize],
        path: &mut Vec<VertexId>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<VertexId>>,
    ) {
        let x = *path.last().unwrap();
        let used = path.len() - 1;
        for w in g.sorted_neighbors(x) {
            if on_path[w.idx()] || !(rules.edge)(g.edge_between(x, w).unwrap()) {
                continue;
            }
            if used + 1 + to_v[w.idx()] > max_len {
                continue;
            }
            // no chord back to anything but the last vertex
            if path[..path.len() - 1].iter().any(|&p| g.adjacent(p, w)) {
                continue;
            }
            if w == v {
                let mut done = path.clone();
                done.push(w);
                out.push(done);
                continue;
            }
            if !(rules.interior)(w) {
                continue;
            }
            on_path[w.idx()] = true;
            path.push(w);
            rec(g, v, max_len, rules, to_v, path, on_path, out);
            path.pop();
            on_path[w.idx()] = false;
        }
    }
    rec(g, v, max_len, rules, &to_v, &mut path, &mut on_path, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// All local geodesics from `u` to `v` of length at most `max_len`.
pub fn local_geodesics(g: &PlaneGraph, u: VertexId, v: VertexId, max_len: usize) -> Result<Vec<Vec<VertexId>>, AnchoredError> {
    let any_v = |_: VertexId| true;
    let any_e = |_: EdgeId| true;
    geodesics_with(g, u, v, max_len, &ArcRules { interior: &any_v, edge: &any_e })
}

/// Closed gap `R0` as a plane graph with its two boundary arcs.
#[derive(Debug, Clone)]
pub struct GapDisk {
    pub graph: PlaneGraph,
    /// Ids in the ambient level, by disk vertex id.
    pub back: Vec<VertexId>,
    /// Boundary arc along the critical loop, from `a` to `b`, disk ids.
    pub arc0: Vec<VertexId>,
    /// Boundary arc along `C1`, from `a` to `b`, disk ids.
    pub arc1: Vec<VertexId>,
}

impl GapDisk {
    pub fn interior_vertices(&self) -> usize {
        let on_boundary: HashSet<VertexId> = self.arc0.iter().chain(&self.arc1).copied().collect();
        self.graph.vertices().filter(|v| !on_boundary.contains(v)).count()
    }
}

pub fn r0_disk(t: &Tower, gaps: &GapDecomposition) -> Result<GapDisk, AnchoredError> {
    let g = t.level(gaps.depth);
    let r0 = gaps.r0();
    let keep: HashSet<EdgeId> = r0.edges.iter().copied().collect();
    let (graph, back) = g
        .edge_subgraph(|e| keep.contains(&e))
        .map_err(|e| AnchoredError::GapStructure(e.to_string()))?;
    let local = |v: VertexId| VertexId(back.iter().position(|&x| x == v).unwrap() as u32);
    let arc0 = gaps.arcs[0].iter().map(|&v| local(v)).collect();
    let arc1 = gaps.arcs[gaps.c1].iter().map(|&v| local(v)).collect();
    Ok(GapDisk { graph, back, arc0, arc1 })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryVerdict {
    pub depth: usize,
    pub symmetric: bool,
    /// `(vertex, image)` names when a symmetry exists.
    pub witness: Option<Vec<(String, String)>>,
    pub disk_vertices: usize,
    pub interior_vertices: usize,
    pub caveat: Option<String>,
}

/// Looks for an orientation-preserving symmetry of a disk graph swapping
/// the ends of its two boundary arcs: the arcs are exchanged with their
/// order reversed, and rotations are kept everywhere.
pub fn disk_symmetry(graph: &PlaneGraph, arc0: &[VertexId], arc1: &[VertexId]) -> Option<Vec<VertexId>> {
    if arc0.len() != arc1.len() || arc0.is_empty() {
        return None;
    }
    let m = arc0.len() - 1;
    let mut pins = Vec::with_capacity(2 * m);
    for i in 0..=m {
        pins.push((arc0[i], arc1[m - i]));
        if i != 0 && i != m {
            pins.push((arc1[i], arc0[m - i]));
        }
    }
    find_embedded_automorphism(graph, &pins)
}

/// Searches the closed gap `R0` at the given depth for a symmetry exchanging
/// `a` and `b`.
pub fn gap_symmetry_test(t: &Tower, gaps: &GapDecomposition) -> Result<SymmetryVerdict, AnchoredError> {
    let disk = r0_disk(t, gaps)?;
    let found = disk_symmetry(&disk.graph, &disk.arc0, &disk.arc1);
    let interior = disk.interior_vertices();
    let caveat = (interior == 0).then(|| "R0 has no interior vertices; verdict rests on the boundary arcs alone".to_string());
    Ok(SymmetryVerdict {
        depth: gaps.depth,
        symmetric: found.is_some(),
        witness: found.map(|m| {
            disk.graph
                .vertices()
                .map(|v| (disk.graph.name(v).to_string(), disk.graph.name(m[v.idx()]).to_string()))
                .collect()
        }),
        disk_vertices: disk.graph.vertex_count(),
        interior_vertices: interior,
        caveat,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcReport {
    pub depth: usize,
    /// Length of the shortest qualifying arc from `a_l` to some `b_i`.
    pub k: Option<usize>,
    pub k_witness: Option<Vec<String>>,
    /// Length of the shortest `R0`-arc from `a_l` to `a0` lifting to an arc
    /// from `b_l` to `a1`.
    pub n: Option<usize>,
    pub n_witness: Option<Vec<String>>,
    pub lift_witness: Option<Vec<String>>,
    /// `N <= K + 2l - 1`, when both are known.
    pub bound_holds: Option<bool>,
    /// Longest arc length searched.
    pub search_limit: usize,
    /// Same `(N, K)` as the previous depth; set by [`r0_arc_series`].
    pub stabilized: bool,
}

/// Labels used by the arc search: loop vertices `a_i`, `C1` vertices `b_i`.
struct GapLabels {
    a: Vec<VertexId>,
    b: Vec<VertexId>,
}

fn gap_labels(t: &Tower, core: &Per2Core, gaps: &GapDecomposition) -> Result<GapLabels, AnchoredError> {
    let (loop_seq, l) = critical_loop_in_tower(t, core)?;
    // loop_seq = a0, a1, .., a(2l-2), b0
    let a: Vec<VertexId> = loop_seq[..2 * l - 1].to_vec();
    let b0 = loop_seq[2 * l - 1];
    let c1_arc = &gaps.arcs[gaps.c1];
    let mut b = vec![b0];
    for i in 1..2 * l - 1 {
        let hit = c1_arc
            .iter()
            .copied()
            .find(|&v| v != a[0] && v != b0 && t.f(v) == a[i])
            .ok_or_else(|| AnchoredError::GapStructure(format!("no vertex of C1 over a{i}")))?;
        b.push(hit);
    }
    Ok(GapLabels { a, b })
}

/// Searches `R0` at depth `k` for the arcs defining `K` and `N`. Needs the
/// tower one level deeper for the lift. Arcs up to `limit` edges are tried;
/// `None` uses `K + 4l` (or `8l` without `K`).
pub fn r0_arc_search(
    t: &Tower,
    core: &Per2Core,
    gaps: &GapDecomposition,
    limit: Option<usize>,
) -> Result<ArcReport, AnchoredError> {
    let k = gaps.depth;
    if t.depth() < k + 1 {
        return Err(CoverError::TooShallow { have: t.depth(), need: k + 1 }.into());
    }
    let g = t.level(k);
    let labels = gap_labels(t, core, gaps)?;
    let l = labels.a.len().div_ceil(2);
    let a0 = labels.a[0];
    let al = labels.a[l];
    let bl = labels.b[l];
    let a1 = labels.a[1];

    let r0 = gaps.r0();
    let r0_edges: HashSet<EdgeId> = r0.edges.iter().copied().collect();
    let boundary: HashSet<VertexId> = gaps.arcs[0].iter().chain(&gaps.arcs[gaps.c1]).copied().collect();
    let boundary_edges: HashSet<EdgeId> = [&gaps.arcs[0], &gaps.arcs[gaps.c1]]
        .iter()
        .flat_map(|arc| arc.windows(2).map(|w| g.edge_between(w[0], w[1]).unwrap()))
        .collect();
    let r0_vertices: HashSet<VertexId> = r0.vertices.iter().copied().collect();
    let loop_vertices: HashSet<VertexId> = gaps.arcs[0].iter().copied().collect();
    let names = |p: &[VertexId]| p.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>();

    // K: interior strictly inside R0, away from a0
    let k_interior = |v: VertexId| r0_vertices.contains(&v) && !boundary.contains(&v) && !g.adjacent(v, a0);
    let k_edge = |e: EdgeId| r0_edges.contains(&e) && !boundary_edges.contains(&e);
    let k_rules = ArcRules { interior: &k_interior, edge: &k_edge };
    let first_limit = limit.unwrap_or(8 * l).min(MAX_GEODESIC_LEN);
    let mut best_k: Option<Vec<VertexId>> = None;
    for &bi in &labels.b[1..] {
        let cap = best_k.as_ref().map_or(first_limit, |p| p.len() - 1);
        if let Some(p) = geodesics_with(g, al, bi, cap, &k_rules)?.into_iter().next() {
            if best_k.as_ref().is_none_or(|q| p.len() < q.len()) {
                best_k = Some(p);
            }
        }
    }
    let k_value = best_k.as_ref().map(|p| p.len() - 1);

    // N: R0-arcs from a_l to a0 with interior off the critical loop
    let search_limit = limit
        .unwrap_or_else(|| k_value.map_or(8 * l, |kv| kv + 4 * l))
        .min(MAX_GEODESIC_LEN);
    let n_interior = |v: VertexId| r0_vertices.contains(&v) && !loop_vertices.contains(&v);
    let n_edge = |e: EdgeId| r0_edges.contains(&e);
    let n_rules = ArcRules { interior: &n_interior, edge: &n_edge };
    let mut n_value = None;
    let mut n_witness = None;
    let mut lift_witness = None;
    for arc in geodesics_with(g, al, a0, search_limit, &n_rules)? {
        let lifts = lifts_of_path(t, k, &arc, bl)?;
        if let Some(lift) = lifts.into_iter().find(|p| *p.last().unwrap() == a1) {
            n_value = Some(arc.len() - 1);
            n_witness = Some(names(&arc));
            lift_witness = Some(lift.iter().map(|&v| t.level(k + 1).name(v).to_string()).collect());
            break;
        }
    }
    let bound_holds = match (n_value, k_value) {
        (Some(n), Some(kv)) => Some(n < kv + 2 * l),
        _ => None,
    };
    Ok(ArcReport {
        depth: k,
        k: k_value,
        k_witness: best_k.as_deref().map(names),
        n: n_value,
        n_witness,
        lift_witness,
        bound_holds,
        search_limit,
        stabilized: false,
    })
}

/// Requires a Type I core.
pub fn require_type_i(core: &Per2Core) -> Result<(), AnchoredError> {
    let ty = crate::per2::classify_type(core)?;
    if ty == GasketType::I {
        Ok(())
    } else {
        Err(AnchoredError::NotTypeI(ty))
    }
}

/// Runs the arc search at each depth, marking values that agree with the
/// previous depth. Depths without two anchored cycles are skipped.
pub fn r0_arc_series(core: &Per2Core, depths: &[usize]) -> Result<Vec<ArcReport>, AnchoredError> {
    require_type_i(core)?;
    let max = depths.iter().copied().max().unwrap_or(0);
    let t = Tower::build(&core.spec, max + 1)?;
    let mut out: Vec<ArcReport> = Vec::new();
    for &k in depths {
        let s = shortest_anchored_cycles(&t, core, k)?;
        if s.len() < 2 {
            continue;
        }
        let gaps = gap_decomposition(&t, &s)?;
        let mut r = r0_arc_search(&t, core, &gaps, None)?;
        if let Some(prev) = out.last() {
            r.stabilized = prev.depth + 1 == k && prev.n == r.n && prev.k == r.k && r.n.is_some() && r.k.is_some();
        }
        out.push(r);
    }
    Ok(out)
}

/// Symmetry verdicts at each depth, with a flag when the verdict changes.
pub fn symmetry_series(core: &Per2Core, depths: &[usize]) -> Result<(Vec<SymmetryVerdict>, bool), AnchoredError> {
    require_type_i(core)?;
    let max = depths.iter().copied().max().unwrap_or(0);
    let t = Tower::build(&core.spec, max)?;
    let mut out: Vec<SymmetryVerdict> = Vec::new();
    for &k in depths {
        let s = shortest_anchored_cycles(&t, core, k)?;
        let gaps = gap_decomposition(&t, &s)?;
        out.push(gap_symmetry_test(&t, &gaps)?);
    }
    let changed = out.windows(2).any(|w| w[0].symmetric != w[1].symmetric);
    Ok((out, changed))
}

/// Square grid disk with `a` and `b` at opposite corners; its half-turn
/// exchanges them, so the symmetry search must succeed.
pub fn grid_disk(n: usize) -> (PlaneGraph, Vec<VertexId>, Vec<VertexId>) {
    use crate::plane_graph::RotationTable;
    let name = |i: usize, j: usize| format!("g{i}_{j}");
    let mut vertices = Vec::new();
    let mut table = RotationTable::new();
    for i in 0..=n {
        for j in 0..=n {
            vertices.push(name(i, j));
            // counterclockwise: east, north, west, south
            let mut rot = Vec::new();
            if i < n {
                rot.push(name(i + 1, j));
            }
            if j < n {
                rot.push(name(i, j + 1));
            }
            if i > 0 {
                rot.push(name(i - 1, j));
            }
            if j > 0 {
                rot.push(name(i, j - 1));
            }
            table.insert(name(i, j), rot);
        }
    }
    let g = PlaneGraph::build(&vertices, &table).expect("grid is planar");
    let id = |i: usize, j: usize| g.vertex(&name(i, j)).unwrap();
    let mut arc0: Vec<VertexId> = (0..=n).map(|i| id(i, 0)).collect();
    arc0.extend((1..=n).map(|j| id(n, j)));
    let mut arc1: Vec<VertexId> = (0..=n).map(|j| id(0, j)).collect();
    arc1.extend((1..=n).map(|i| id(i, n)));
    (g, arc0, arc1)
}
