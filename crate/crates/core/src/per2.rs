//! Quadratic cores of captured type: a superattracting 2-cycle `a0 <-> b0`
//! with `a0` critical, and a second critical vertex `c` that lands on the
//! cycle after finitely many steps.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branched_cover::{validate_core, CoreJson, CoreSpec, CoverError};
use crate::plane_graph::{graph_distance, EmbeddedCycle, GraphJson, PlaneGraph, RotationTable, VertexId};

/// Largest `G1` the enumerator accepts.
pub const MAX_ENUMERATION_VERTICES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Per2Error {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("not a quadratic captured-type core: {0}")]
    NotPer2(String),
    #[error("g1 has {0} independent cycles, expected exactly one")]
    NotUnique(usize),
    #[error("critical distance mismatch: loop gives l = {loop_l}, distance(a0, c) = {distance}")]
    DistanceMismatch { loop_l: usize, distance: usize },
    #[error("inconsistent loop: {0}")]
    Inconsistent(String),
    #[error("enumeration limit is {MAX_ENUMERATION_VERTICES} vertices, got {0}")]
    LimitExceeded(usize),
}

impl Per2Error {
    pub fn code(&self) -> String {
        match self {
            Per2Error::Cover(e) => e.code(),
            Per2Error::NotPer2(_) => "NotPer2".into(),
            Per2Error::NotUnique(_) => "NotUnique".into(),
            Per2Error::DistanceMismatch { .. } => "DistanceMismatch".into(),
            Per2Error::Inconsistent(_) => "Inconsistent".into(),
            Per2Error::LimitExceeded(_) => "LimitExceeded".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GasketType {
    I,
    IIA,
    IIB,
}

impl std::fmt::Display for GasketType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GasketType::I => "I",
            GasketType::IIA => "IIA",
            GasketType::IIB => "IIB",
        })
    }
}

/// A validated quadratic core. Vertex ids refer to `spec.g1`.
#[derive(Debug, Clone)]
pub struct Per2Core {
    pub spec: CoreSpec,
    pub a0: VertexId,
    pub b0: VertexId,
    pub c: VertexId,
    /// Steps for `c` to reach the fixed edge.
    pub q: usize,
    /// Names along the orbit of `c` until it hits `{a0, b0}`.
    pub orbit: Vec<String>,
}

impl Per2Core {
    pub fn new(spec: CoreSpec) -> Result<Per2Core, Per2Error> {
        if spec.degree != 2 {
            return Err(Per2Error::NotPer2(format!("degree {}", spec.degree)));
        }
        validate_core(&spec).into_result()?;
        let g1 = &spec.g1;
        let (fa, fb) = spec.fixed_edge_g1().expect("validated");
        let Some((a0, c)) = spec.critical else {
            return Err(Per2Error::NotPer2("no critical vertices designated".into()));
        };
        let b0 = if a0 == fa {
            fb
        } else if a0 == fb {
            fa
        } else {
            return Err(Per2Error::NotPer2("first critical vertex is not on the fixed edge".into()));
        };
        if spec.local_degree[a0.idx()] != 2 || spec.local_degree[c.idx()] != 2 {
            return Err(Per2Error::NotPer2("designated critical vertices need local degree 2".into()));
        }
        let f = |v: VertexId| spec.image_in_g1(v).expect("g0 inside g1");
        if f(a0) != b0 || f(b0) != a0 {
            return Err(Per2Error::NotPer2("a0 and b0 do not form a 2-cycle".into()));
        }
        let mut orbit = vec![g1.name(c).to_string()];
        let mut x = c;
        let mut q = 0;
        while x != a0 && x != b0 {
            x = f(x);
            q += 1;
            orbit.push(g1.name(x).to_string());
            if x == c || q > g1.vertex_count() {
                return Err(Per2Error::NotPer2("second critical vertex is periodic".into()));
            }
        }
        if q == 0 {
            return Err(Per2Error::NotPer2("second critical vertex lies on the 2-cycle".into()));
        }
        if spec.g0.edge_count() + 1 != spec.g0.vertex_count() {
            return Err(Per2Error::NotPer2("g0 is not a tree".into()));
        }
        let cycles = g1.edge_count() + 1 - g1.vertex_count();
        if cycles != 1 {
            return Err(Per2Error::NotUnique(cycles));
        }
        Ok(Per2Core { spec, a0, b0, c, q, orbit })
    }

    pub fn from_json_str(s: &str) -> Result<Per2Core, Per2Error> {
        let spec = CoreSpec::from_json_str(s).map_err(CoverError::from)?;
        Per2Core::new(spec)
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn g1(&self) -> &PlaneGraph {
        &self.spec.g1
    }

    fn f(&self, v: VertexId) -> VertexId {
        self.spec.image_in_g1(v).expect("validated")
    }
}

/// The unique cycle of `G1`, starting `a0, a1, ..`, ending at `b0`.
#[derive(Debug, Clone)]
pub struct CriticalLoop {
    pub cycle: EmbeddedCycle,
    pub l: usize,
    /// `f(C)`, starting at `f(a0) = b0`.
    pub image_path: Vec<VertexId>,
}

impl CriticalLoop {
    pub fn names(&self, g: &PlaneGraph) -> Vec<String> {
        self.cycle.names(g)
    }
}

pub fn critical_loop(core: &Per2Core) -> Result<CriticalLoop, Per2Error> {
    let g = core.g1();
    // peel leaves down to the cycle
    let mut deg: Vec<usize> = g.vertices().map(|v| g.degree(v)).collect();
    let mut alive = vec![true; g.vertex_count()];
    let mut stack: Vec<VertexId> = g.vertices().filter(|v| deg[v.idx()] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive[v.idx()] {
            continue;
        }
        alive[v.idx()] = false;
        for w in g.neighbors(v) {
            if alive[w.idx()] {
                deg[w.idx()] -= 1;
                if deg[w.idx()] == 1 {
                    stack.push(w);
                }
            }
        }
    }
    let on_loop = |v: VertexId| alive[v.idx()];
    if !on_loop(core.a0) || !on_loop(core.b0) {
        return Err(Per2Error::Inconsistent("the loop misses the fixed edge".into()));
    }
    if g.vertices().any(|v| on_loop(v) && deg[v.idx()] != 2) {
        return Err(Per2Error::NotUnique(2));
    }
    let mut seq = vec![core.a0];
    let mut prev = core.b0;
    let mut cur = core.a0;
    loop {
        let next = g.neighbors(cur).find(|&w| on_loop(w) && w != prev).unwrap();
        if next == core.a0 {
            break;
        }
        seq.push(next);
        prev = cur;
        cur = next;
    }
    if *seq.last().unwrap() != core.b0 {
        return Err(Per2Error::Inconsistent("loop does not close through b0".into()));
    }
    let len = seq.len();
    if len % 2 != 0 {
        return Err(Per2Error::Inconsistent(format!("loop length {len} is odd")));
    }
    let l = len / 2;
    if l < 2 {
        return Err(Per2Error::Inconsistent("critical distance below 2".into()));
    }
    let cycle = EmbeddedCycle::from_vertices(g, seq.clone()).expect("loop is simple");

    let image_path = image_path(core, &seq)?;
    if image_path.len() != l + 1 {
        return Err(Per2Error::Inconsistent(format!(
            "f(C) has {} edges, expected {l}",
            image_path.len().saturating_sub(1)
        )));
    }
    let distance = graph_distance(g, core.a0, core.c).map_err(|e| Per2Error::Inconsistent(e.to_string()))?;
    if distance != l {
        return Err(Per2Error::DistanceMismatch { loop_l: l, distance });
    }
    Ok(CriticalLoop { cycle, l, image_path })
}

/// Image of the loop as an ordered simple path, or an error if the image
/// edges do not form one.
fn image_path(core: &Per2Core, seq: &[VertexId]) -> Result<Vec<VertexId>, Per2Error> {
    let g = core.g1();
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    for i in 0..seq.len() {
        let (x, y) = (core.f(seq[i]), core.f(seq[(i + 1) % seq.len()]));
        let key = if x < y { (x, y) } else { (y, x) };
        if !edges.contains(&key) {
            edges.push(key);
        }
    }
    let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for &(x, y) in &edges {
        adj.entry(x).or_default().push(y);
        adj.entry(y).or_default().push(x);
    }
    if adj.values().any(|n| n.len() > 2) {
        return Err(Per2Error::Inconsistent("f(C) branches".into()));
    }
    let start = core.f(core.a0);
    if adj.get(&start).map_or(0, Vec::len) != 1 {
        return Err(Per2Error::Inconsistent(format!("f(C) is not a path ending at `{}`", g.name(start))));
    }
    let mut path = vec![start];
    let mut prev = None;
    let mut cur = start;
    loop {
        let next = adj[&cur].iter().copied().find(|&w| Some(w) != prev);
        match next {
            Some(n) if !path.contains(&n) => {
                path.push(n);
                prev = Some(cur);
                cur = n;
            }
            Some(_) => return Err(Per2Error::Inconsistent("f(C) closes up".into())),
            None => break,
        }
    }
    if path.len() != edges.len() + 1 {
        return Err(Per2Error::Inconsistent("f(C) is disconnected".into()));
    }
    Ok(path)
}

/// Edge sets `C ∩ f(C)` and `f(C)`, as sorted name pairs.
pub fn loop_intersection(core: &Per2Core, lp: &CriticalLoop) -> (Vec<[String; 2]>, Vec<[String; 2]>) {
    let g = core.g1();
    let pair = |x: VertexId, y: VertexId| {
        let (a, b) = (g.name(x).to_string(), g.name(y).to_string());
        if a < b {
            [a, b]
        } else {
            [b, a]
        }
    };
    let mut image: Vec<[String; 2]> = lp.image_path.windows(2).map(|w| pair(w[0], w[1])).collect();
    image.sort();
    let mut both: Vec<[String; 2]> = image
        .iter()
        .filter(|p| {
            let x = g.vertex(&p[0]).unwrap();
            let y = g.vertex(&p[1]).unwrap();
            g.edge_between(x, y).is_some_and(|e| lp.cycle.contains_edge(e))
        })
        .cloned()
        .collect();
    both.sort();
    (both, image)
}

pub fn classify_type(core: &Per2Core) -> Result<GasketType, Per2Error> {
    let lp = critical_loop(core)?;
    let (both, image) = loop_intersection(core, &lp);
    let e0 = {
        let (a, b) = (core.g1().name(core.a0).to_string(), core.g1().name(core.b0).to_string());
        if a < b {
            [a, b]
        } else {
            [b, a]
        }
    };
    if !both.contains(&e0) {
        return Err(Per2Error::Inconsistent("C ∩ f(C) does not contain the fixed edge".into()));
    }
    Ok(if both.len() == 1 {
        GasketType::I
    } else if both.len() == image.len() {
        GasketType::IIB
    } else {
        GasketType::IIA
    })
}

const BUNDLED: [(&str, &str); 3] = [
    ("iib_l2", include_str!("../cores/iib_l2.json")),
    ("typeI_min", include_str!("../cores/typeI_min.json")),
    ("typeIIA_min", include_str!("../cores/typeIIA_min.json")),
];

/// Raw JSON text of a bundled core.
pub fn bundled_core_json(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn bundled_core_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled_cores() -> Vec<(String, Per2Core)> {
    BUNDLED
        .iter()
        .map(|(n, s)| (n.to_string(), Per2Core::from_json_str(s).expect("bundled core is valid")))
        .collect()
}

pub fn bundled_core(name: &str) -> Option<Per2Core> {
    bundled_core_json(name).map(|s| Per2Core::from_json_str(s).expect("bundled core is valid"))
}

/// One enumerated core with its summary data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumeratedCore {
    pub gasket_type: GasketType,
    pub l: usize,
    pub q: usize,
    pub g1_vertices: usize,
    pub g0_edges: usize,
    pub core: CoreJson,
}

/// Sort key for picking the smallest core of a type.
fn selection_key(e: &EnumeratedCore) -> (usize, usize, String) {
    (e.g1_vertices, e.g0_edges, serde_json::to_string(&e.core).unwrap())
}

/// Every valid quadratic captured-type core with at most `max_vertices_g1`
/// vertices in `G1`, one per orientation-preserving isomorphism class, in
/// selection order.
///
/// Candidates are generated rather than filtered from all rotation systems:
/// `G0` runs over plane trees rooted at the dart `a0 -> b0`, `F` over
/// simplicial self-maps of the tree swapping `a0` and `b0`, the second
/// critical value over tree vertices, and `G1` is the double cover of the tree
/// branched over `b0` and that value, with `G0` placed inside it.
pub fn enumerate_small_cores(max_vertices_g1: usize) -> Result<Vec<EnumeratedCore>, Per2Error> {
    if max_vertices_g1 > MAX_ENUMERATION_VERTICES {
        return Err(Per2Error::LimitExceeded(max_vertices_g1));
    }
    // |V(G1)| = 2 |V(G0)| - 2
    let max_v0 = (max_vertices_g1 + 2) / 2;
    let mut trees = Vec::new();
    for v0 in 2..=max_v0 {
        trees.extend(plane_trees(v0 - 1));
    }
    let found: Vec<(Vec<u32>, EnumeratedCore)> = trees
        .par_iter()
        .flat_map_iter(cores_over_tree)
        .collect();
    let mut unique: BTreeMap<Vec<u32>, EnumeratedCore> = BTreeMap::new();
    for (code, core) in found {
        unique.entry(code).or_insert(core);
    }
    let mut out: Vec<EnumeratedCore> = unique.into_values().collect();
    out.sort_by_cached_key(selection_key);
    Ok(out)
}

/// Smallest enumerated core of the given type.
pub fn minimal_core(max_vertices_g1: usize, ty: GasketType) -> Result<Option<EnumeratedCore>, Per2Error> {
    Ok(enumerate_small_cores(max_vertices_g1)?.into_iter().find(|e| e.gasket_type == ty))
}

/// Plane tree as rotation lists; vertex 0 is the root and vertex 1 its first
/// child.
#[derive(Debug, Clone)]
struct Tree {
    rot: Vec<Vec<usize>>,
}

/// All plane trees with `m >= 1` edges rooted at a dart, via Dyck words.
fn plane_trees(m: usize) -> Vec<Tree> {
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(2 * m);
    fn rec(m: usize, open: usize, depth: usize, word: &mut Vec<bool>, out: &mut Vec<Tree>) {
        if word.len() == 2 * m {
            out.push(tree_from_dyck(word));
            return;
        }
        if open < m {
            word.push(true);
            rec(m, open + 1, depth + 1, word, out);
            word.pop();
        }
        if depth > 0 {
            word.push(false);
            rec(m, open, depth - 1, word, out);
            word.pop();
        }
    }
    rec(m, 0, 0, &mut word, &mut out);
    out
}

fn tree_from_dyck(word: &[bool]) -> Tree {
    let mut rot: Vec<Vec<usize>> = vec![Vec::new()];
    let mut stack = vec![0usize];
    for &up in word {
        if up {
            let child = rot.len();
            let parent = *stack.last().unwrap();
            rot.push(vec![parent]);
            rot[parent].push(child);
            stack.push(child);
        } else {
            stack.pop();
        }
    }
    Tree { rot }
}

/// Simplicial self-maps of the tree with `0 <-> 1`.
fn tree_maps(t: &Tree) -> Vec<Vec<usize>> {
    let n = t.rot.len();
    // parents come before children in vertex order
    let parent: Vec<usize> = (0..n).map(|v| if v == 0 { 0 } else { t.rot[v][0] }).collect();
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    map[0] = 1;
    map[1] = 0;
    fn rec(v: usize, t: &Tree, parent: &[usize], map: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if v == map.len() {
            out.push(map.clone());
            return;
        }
        let img_parent = map[parent[v]];
        for &w in &t.rot[img_parent] {
            map[v] = w;
            rec(v + 1, t, parent, map, out);
        }
        map[v] = usize::MAX;
    }
    rec(2, t, &parent, &mut map, &mut out);
    out.retain(|m| (0..n).all(|v| reaches_edge(m, v)));
    out
}

fn reaches_edge(map: &[usize], v: usize) -> bool {
    let mut x = v;
    for _ in 0..=map.len() {
        if x <= 1 {
            return true;
        }
        x = map[x];
    }
    false
}

/// Vertex of the double cover: a base vertex and a sheet (branch points use
/// sheet 0 only).
type Lift = (usize, u8);

struct Cover {
    vertices: Vec<Lift>,
    index: HashMap<Lift, usize>,
    rot: Vec<Vec<usize>>,
}

fn double_cover(t: &Tree, branch: [usize; 2]) -> Cover {
    let n = t.rot.len();
    let is_branch = |x: usize| branch.contains(&x);
    let mut vertices = Vec::new();
    for x in 0..n {
        vertices.push((x, 0));
        if !is_branch(x) {
            vertices.push((x, 1));
        }
    }
    let index: HashMap<Lift, usize> = vertices.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let lift = |x: usize, s: u8| if is_branch(x) { index[&(x, 0)] } else { index[&(x, s)] };
    let rot = vertices
        .iter()
        .map(|&(x, s)| {
            if is_branch(x) {
                let mut r: Vec<usize> = t.rot[x].iter().map(|&y| lift(y, 0)).collect();
                r.extend(t.rot[x].iter().map(|&y| lift(y, 1)));
                r
            } else {
                t.rot[x].iter().map(|&y| lift(y, s)).collect()
            }
        })
        .collect();
    Cover { vertices, index, rot }
}

/// Embeddings of the tree into the cover with `a0` on the lift of `b0`,
/// lying over the map and keeping rotations.
fn embeddings(t: &Tree, map: &[usize], cover: &Cover) -> Vec<Vec<usize>> {
    let n = t.rot.len();
    let parent: Vec<usize> = (0..n).map(|v| if v == 0 { 0 } else { t.rot[v][0] }).collect();
    let mut out = Vec::new();
    let mut iota = vec![usize::MAX; n];
    let mut used = vec![false; cover.vertices.len()];
    let start = cover.index[&(1, 0)];
    iota[0] = start;
    used[start] = true;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        v: usize,
        t: &Tree,
        map: &[usize],
        parent: &[usize],
        cover: &Cover,
        iota: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == iota.len() {
            out.push(iota.clone());
            return;
        }
        let p = iota[parent[v]];
        for &w in &cover.rot[p] {
            if used[w] || cover.vertices[w].0 != map[v] {
                continue;
            }
            iota[v] = w;
            used[w] = true;
            rec(v + 1, t, map, parent, cover, iota, used, out);
            used[w] = false;
        }
        iota[v] = usize::MAX;
    }
    rec(1, t, map, &parent, cover, &mut iota, &mut used, &mut out);
    out.retain(|iota| {
        (0..n).all(|x| {
            let own: Vec<usize> = t.rot[x].iter().map(|&y| iota[y]).collect();
            let img = iota[x];
            let restricted: Vec<usize> = cover.rot[img].iter().copied().filter(|w| own.contains(w)).collect();
            own.len() == restricted.len()
                && restricted
                    .iter()
                    .position(|&w| w == own[0])
                    .is_some_and(|s| (0..own.len()).all(|i| own[i] == restricted[(s + i) % own.len()]))
        })
    });
    out
}

fn cores_over_tree(t: &Tree) -> Vec<(Vec<u32>, EnumeratedCore)> {
    let n = t.rot.len();
    let mut out = Vec::new();
    for map in tree_maps(t) {
        for v in 0..n {
            // v == 1 is b0; neighbours of b0 would give a double edge
            if v == 1 || t.rot[1].contains(&v) {
                continue;
            }
            let cover = double_cover(t, [1, v]);
            for iota in embeddings(t, &map, &cover) {
                if let Some(found) = assemble(t, v, &cover, &iota) {
                    out.push(found);
                }
            }
        }
    }
    out
}

/// Turns one candidate into a named core, or `None` if it fails any check.
fn assemble(t: &Tree, v: usize, cover: &Cover, iota: &[usize]) -> Option<(Vec<u32>, EnumeratedCore)> {
    let n0 = t.rot.len();
    let m = cover.vertices.len();
    let mut in_g0 = vec![usize::MAX; m];
    for (x, &w) in iota.iter().enumerate() {
        in_g0[w] = x;
    }
    let a0 = iota[0];
    let b0 = iota[1];
    let c = cover.index[&(v, 0)];
    // covering map as cover-vertex -> cover-vertex (through the embedding)
    let f: Vec<usize> = cover.vertices.iter().map(|&(x, _)| iota[x]).collect();
    let ld: Vec<u32> = (0..m).map(|w| if w == a0 || w == c { 2 } else { 1 }).collect();
    let g0_edge = |p: usize, q: usize| in_g0[p] != usize::MAX && in_g0[q] != usize::MAX && t.rot[in_g0[p]].contains(&in_g0[q]);

    let code = canonical_code(cover, a0, b0, &f, &ld, &in_g0, &g0_edge);
    let names = core_names(cover, a0, b0)?;

    let mut g1_rot = RotationTable::new();
    for w in 0..m {
        g1_rot.insert(names[w].clone(), cover.rot[w].iter().map(|&u| names[u].clone()).collect());
    }
    let mut g0_rot = RotationTable::new();
    for x in 0..n0 {
        g0_rot.insert(names[iota[x]].clone(), t.rot[x].iter().map(|&y| names[iota[y]].clone()).collect());
    }
    let mut g1_vertices: Vec<String> = names.clone();
    g1_vertices.sort_by_key(|a| name_order(a));
    let mut g0_vertices: Vec<String> = iota.iter().map(|&w| names[w].clone()).collect();
    g0_vertices.sort_by_key(|a| name_order(a));
    let core = CoreJson {
        name: String::new(),
        degree: 2,
        g0: GraphJson { vertices: g0_vertices, rotation: g0_rot },
        g1: GraphJson { vertices: g1_vertices, rotation: g1_rot },
        vertex_map: (0..m).map(|w| (names[w].clone(), names[f[w]].clone())).collect(),
        local_degree: (0..m).filter(|&w| ld[w] != 1).map(|w| (names[w].clone(), ld[w])).collect(),
        fixed_edge: [names[a0].clone(), names[b0].clone()],
        critical: Some([names[a0].clone(), names[c].clone()]),
    };
    let spec = CoreSpec::from_json(&core).ok()?;
    let core_p2 = Per2Core::new(spec).ok()?;
    let lp = critical_loop(&core_p2).ok()?;
    let ty = classify_type(&core_p2).ok()?;
    let mut core = core;
    core.g0.rotation = core_p2.spec.g0.canonical_rotation_table();
    core.g1.rotation = core_p2.spec.g1.canonical_rotation_table();
    Some((
        code,
        EnumeratedCore {
            gasket_type: ty,
            l: lp.l,
            q: core_p2.q,
            g1_vertices: m,
            g0_edges: n0 - 1,
            core,
        },
    ))
}

/// Sort names so that `a0, a1, .., a10, b0, v1, ..` come out in that order.
fn name_order(s: &str) -> (char, usize) {
    let head = s.chars().next().unwrap_or(' ');
    let num = s[head.len_utf8()..].parse().unwrap_or(usize::MAX);
    (head, num)
}

/// Loop vertices become `a0 .. a(2l-2), b0`; the rest `v1, v2, ..` in BFS
/// order from `a0`.
fn core_names(cover: &Cover, a0: usize, b0: usize) -> Option<Vec<String>> {
    let m = cover.vertices.len();
    let mut deg: Vec<usize> = cover.rot.iter().map(Vec::len).collect();
    let mut alive = vec![true; m];
    let mut stack: Vec<usize> = (0..m).filter(|&w| deg[w] <= 1).collect();
    while let Some(w) = stack.pop() {
        if !alive[w] {
            continue;
        }
        alive[w] = false;
        for &u in &cover.rot[w] {
            if alive[u] {
                deg[u] -= 1;
                if deg[u] == 1 {
                    stack.push(u);
                }
            }
        }
    }
    if !alive[a0] || !alive[b0] {
        return None;
    }
    let mut names = vec![String::new(); m];
    let mut prev = b0;
    let mut cur = a0;
    let mut i = 0;
    loop {
        names[cur] = format!("a{i}");
        i += 1;
        let next = *cover.rot[cur].iter().find(|&&u| alive[u] && u != prev)?;
        prev = cur;
        cur = next;
        if cur == b0 {
            break;
        }
        if cur == a0 {
            return None;
        }
    }
    names[b0] = "b0".into();
    let mut counter = 0;
    let mut seen = vec![false; m];
    seen[a0] = true;
    let mut queue = VecDeque::from([a0]);
    while let Some(w) = queue.pop_front() {
        if names[w].is_empty() {
            counter += 1;
            names[w] = format!("v{counter}");
        }
        for &u in &cover.rot[w] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    Some(names)
}

/// Labels vertices by BFS from the dart `a0 -> b0`, reading each rotation
/// from the dart back to the discovering vertex, and encodes the whole core.
/// Equal codes mean the cores agree up to an orientation-preserving
/// isomorphism fixing `a0` and `b0`.
fn canonical_code(
    cover: &Cover,
    a0: usize,
    b0: usize,
    f: &[usize],
    ld: &[u32],
    in_g0: &[usize],
    g0_edge: &dyn Fn(usize, usize) -> bool,
) -> Vec<u32> {
    let m = cover.vertices.len();
    let mut label = vec![u32::MAX; m];
    let mut from = vec![usize::MAX; m];
    let mut order = Vec::with_capacity(m);
    label[a0] = 0;
    from[a0] = b0;
    order.push(a0);
    let mut head = 0;
    while head < order.len() {
        let w = order[head];
        head += 1;
        let rot = &cover.rot[w];
        let s = rot.iter().position(|&u| u == from[w]).unwrap();
        for i in 0..rot.len() {
            let u = rot[(s + i) % rot.len()];
            if label[u] == u32::MAX {
                label[u] = order.len() as u32;
                from[u] = w;
                order.push(u);
            }
        }
    }
    let mut code = Vec::new();
    for &w in &order {
        let rot = &cover.rot[w];
        let s = rot.iter().position(|&u| u == from[w]).unwrap();
        code.push(rot.len() as u32);
        code.push(ld[w]);
        code.push(label[f[w]]);
        code.push((in_g0[w] != usize::MAX) as u32);
        for i in 0..rot.len() {
            let u = rot[(s + i) % rot.len()];
            code.push(label[u]);
            code.push(g0_edge(w, u) as u32);
        }
    }
    code
}
