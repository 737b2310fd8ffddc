//! Simple plane graphs stored as rotation systems.
//!
//! Every edge is split into two darts (`2e` and `2e + 1`); each vertex keeps
//! the counterclockwise cyclic order of its outgoing darts. Faces are the
//! orbits of `d -> next_ccw(rev(d))`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart(pub u32);

impl Dart {
    #[inline]
    pub fn rev(self) -> Dart {
        Dart(self.0 ^ 1)
    }

    #[inline]
    pub fn edge(self) -> EdgeId {
        EdgeId(self.0 >> 1)
    }

    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }

    /// The dart of this edge that was created first.
    #[inline]
    pub fn dart(self) -> Dart {
        Dart(self.0 << 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId(pub u32);

impl FaceId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex `{0}` listed twice")]
    DuplicateVertex(String),
    #[error("rotation refers to unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("not simple: {0}")]
    NotSimple(String),
    #[error("rotation is not symmetric: `{0}` lists `{1}` but not conversely")]
    InconsistentRotation(String, String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("not spherical: V - E + F = {v} - {e} + {f} != 2")]
    NotSpherical { v: usize, e: usize, f: usize },
    #[error("`{0}` and `{1}` are not connected")]
    Unreachable(String, String),
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::Empty => "EmptyGraph",
            GraphError::DuplicateVertex(_) => "DuplicateVertex",
            GraphError::UnknownVertex(_) => "UnknownVertex",
            GraphError::NotSimple(_) => "NotSimple",
            GraphError::InconsistentRotation(..) => "InconsistentRotation",
            GraphError::Disconnected => "Disconnected",
            GraphError::NotSpherical { .. } => "NotSpherical",
            GraphError::Unreachable(..) => "Unreachable",
        }
    }
}

/// Rotation table keyed by vertex name: neighbors in counterclockwise order.
pub type RotationTable = BTreeMap<String, Vec<String>>;

/// Serialized form of a plane graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub rotation: RotationTable,
}

/// Styling for [`PlaneGraph::to_dot`].
#[derive(Debug, Clone, Default)]
pub struct DotStyle<'a> {
    pub name: &'a str,
    /// Two-coloring by vertex id.
    pub colors: Option<&'a [u8]>,
    pub highlight: Option<EdgeId>,
    /// Extra per-vertex label lines by vertex id.
    pub notes: Option<&'a [String]>,
}

/// A connected simple graph embedded in the sphere.
#[derive(Clone)]
pub struct PlaneGraph {
    names: Vec<String>,
    lookup: HashMap<String, VertexId>,
    origin: Vec<VertexId>,
    rotation: Vec<Vec<Dart>>,
    slot: Vec<u32>,
    dart_index: HashMap<(VertexId, VertexId), Dart>,
    faces: Vec<Vec<Dart>>,
    face_of: Vec<(FaceId, u32)>,
    rank: Vec<u32>,
}

impl fmt::Debug for PlaneGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlaneGraph")
            .field("v", &self.vertex_count())
            .field("e", &self.edge_count())
            .field("f", &self.face_count())
            .finish()
    }
}

impl PartialEq for PlaneGraph {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_string() == other.canonical_string()
    }
}

impl Eq for PlaneGraph {}

impl PlaneGraph {
    /// Builds a plane graph from vertex names and a rotation table.
    pub fn build<S: AsRef<str>>(
        vertices: &[S],
        rotation: &RotationTable,
    ) -> Result<PlaneGraph, GraphError> {
        let names: Vec<String> = vertices.iter().map(|s| s.as_ref().to_string()).collect();
        let mut lookup = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if lookup.insert(n.clone(), VertexId(i as u32)).is_some() {
                return Err(GraphError::DuplicateVertex(n.clone()));
            }
        }
        for key in rotation.keys() {
            if !lookup.contains_key(key) {
                return Err(GraphError::UnknownVertex(key.clone()));
            }
        }
        let mut adjacency = Vec::with_capacity(names.len());
        for n in &names {
            let mut row = Vec::new();
            for w in rotation.get(n).map(|r| r.as_slice()).unwrap_or(&[]) {
                let id = *lookup
                    .get(w)
                    .ok_or_else(|| GraphError::UnknownVertex(w.clone()))?;
                row.push(id);
            }
            adjacency.push(row);
        }
        PlaneGraph::from_adjacency(names, adjacency)
    }

    /// Builds a plane graph from ids: `adjacency[v]` lists the neighbors of `v`
    /// in counterclockwise order.
    pub fn from_adjacency(
        names: Vec<String>,
        adjacency: Vec<Vec<VertexId>>,
    ) -> Result<PlaneGraph, GraphError> {
        let n = names.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        assert_eq!(adjacency.len(), n, "adjacency must cover every vertex");
        let mut lookup = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if lookup.insert(name.clone(), VertexId(i as u32)).is_some() {
                return Err(GraphError::DuplicateVertex(name.clone()));
            }
        }

        let mut origin = Vec::new();
        let mut dart_index: HashMap<(VertexId, VertexId), Dart> = HashMap::new();
        for (u, row) in adjacency.iter().enumerate() {
            let u = VertexId(u as u32);
            for &w in row {
                if w.idx() >= n {
                    return Err(GraphError::UnknownVertex(format!("#{}", w.0)));
                }
                if w == u {
                    return Err(GraphError::NotSimple(format!("loop at `{}`", names[u.idx()])));
                }
                if dart_index.contains_key(&(u, w)) {
                    if u < w || !adjacency[w.idx()].contains(&u) {
                        return Err(GraphError::NotSimple(format!(
                            "parallel edges between `{}` and `{}`",
                            names[u.idx()],
                            names[w.idx()]
                        )));
                    }
                    continue;
                }
                let d = Dart(origin.len() as u32);
                origin.push(u);
                origin.push(w);
                dart_index.insert((u, w), d);
                dart_index.insert((w, u), d.rev());
            }
        }

        let mut rotation = vec![Vec::new(); n];
        let mut slot = vec![0u32; origin.len()];
        for (u, row) in adjacency.iter().enumerate() {
            let uid = VertexId(u as u32);
            let mut seen = std::collections::HashSet::with_capacity(row.len());
            for &w in row {
                if !seen.insert(w) {
                    return Err(GraphError::NotSimple(format!(
                        "parallel edges between `{}` and `{}`",
                        names[u],
                        names[w.idx()]
                    )));
                }
                let d = dart_index[&(uid, w)];
                slot[d.idx()] = rotation[u].len() as u32;
                rotation[u].push(d);
            }
        }
        for (u, row) in adjacency.iter().enumerate() {
            for &w in row {
                if !adjacency[w.idx()].contains(&VertexId(u as u32)) {
                    return Err(GraphError::InconsistentRotation(
                        names[u].clone(),
                        names[w.idx()].clone(),
                    ));
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| names[a].cmp(&names[b]));
        let mut rank = vec![0u32; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r as u32;
        }

        let mut g = PlaneGraph {
            names,
            lookup,
            origin,
            rotation,
            slot,
            dart_index,
            faces: Vec::new(),
            face_of: Vec::new(),
            rank,
        };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        g.trace_faces();
        let (v, e, f) = (g.vertex_count(), g.edge_count(), g.face_count());
        if v as i64 - e as i64 + f as i64 != 2 {
            return Err(GraphError::NotSpherical { v, e, f });
        }
        Ok(g)
    }

    fn trace_faces(&mut self) {
        let m = self.origin.len();
        let mut face_of = vec![(FaceId(u32::MAX), 0u32); m];
        let mut faces = Vec::new();
        for start in 0..m {
            if face_of[start].0 .0 != u32::MAX {
                continue;
            }
            let fid = FaceId(faces.len() as u32);
            let mut walk = Vec::new();
            let mut d = Dart(start as u32);
            loop {
                face_of[d.idx()] = (fid, walk.len() as u32);
                walk.push(d);
                d = self.face_next(d);
                if d.idx() == start {
                    break;
                }
            }
            faces.push(walk);
        }
        self.faces = faces;
        self.face_of = face_of;
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = vec![VertexId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for w in self.neighbors(u) {
                if !seen[w.idx()] {
                    seen[w.idx()] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.origin.len() / 2
    }

    pub fn dart_count(&self) -> usize {
        self.origin.len()
    }

    /// Number of faces. A single vertex has one face.
    pub fn face_count(&self) -> usize {
        if self.origin.is_empty() {
            1
        } else {
            self.faces.len()
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.names.len() as u32).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edge_count() as u32).map(EdgeId)
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        (0..self.origin.len() as u32).map(Dart)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.idx()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.lookup.get(name).copied()
    }

    /// Position of `v` in lexicographic name order.
    pub fn rank(&self, v: VertexId) -> u32 {
        self.rank[v.idx()]
    }

    pub fn tail(&self, d: Dart) -> VertexId {
        self.origin[d.idx()]
    }

    pub fn head(&self, d: Dart) -> VertexId {
        self.origin[d.rev().idx()]
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        let d = e.dart();
        (self.tail(d), self.head(d))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rotation[v.idx()].len()
    }

    pub fn rotation(&self, v: VertexId) -> &[Dart] {
        &self.rotation[v.idx()]
    }

    /// Index of `d` inside the rotation of its tail.
    pub fn slot(&self, d: Dart) -> usize {
        self.slot[d.idx()] as usize
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.rotation[v.idx()].iter().map(move |&d| self.head(d))
    }

    /// Neighbors sorted by name, for deterministic traversals.
    pub fn sorted_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut ns: Vec<VertexId> = self.neighbors(v).collect();
        ns.sort_by_key(|w| self.rank[w.idx()]);
        ns
    }

    pub fn dart_between(&self, u: VertexId, v: VertexId) -> Option<Dart> {
        self.dart_index.get(&(u, v)).copied()
    }

    pub fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.dart_index.contains_key(&(u, v))
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.dart_between(u, v).map(Dart::edge)
    }

    /// Next dart counterclockwise around the tail of `d`.
    pub fn next_ccw(&self, d: Dart) -> Dart {
        let rot = &self.rotation[self.tail(d).idx()];
        rot[(self.slot(d) + 1) % rot.len()]
    }

    pub fn prev_ccw(&self, d: Dart) -> Dart {
        let rot = &self.rotation[self.tail(d).idx()];
        rot[(self.slot(d) + rot.len() - 1) % rot.len()]
    }

    /// Face permutation: reverse the dart, then step counterclockwise.
    pub fn face_next(&self, d: Dart) -> Dart {
        self.next_ccw(d.rev())
    }

    pub fn faces(&self) -> &[Vec<Dart>] {
        &self.faces
    }

    pub fn face(&self, f: FaceId) -> &[Dart] {
        &self.faces[f.idx()]
    }

    /// Face containing `d` and the position of `d` in that face's walk.
    pub fn face_of(&self, d: Dart) -> (FaceId, usize) {
        let (f, p) = self.face_of[d.idx()];
        (f, p as usize)
    }

    pub fn rotation_table(&self) -> RotationTable {
        self.vertices()
            .map(|v| {
                (
                    self.name(v).to_string(),
                    self.neighbors(v).map(|w| self.name(w).to_string()).collect(),
                )
            })
            .collect()
    }

    /// Rotation table with every cyclic list started at its smallest name.
    pub fn canonical_rotation_table(&self) -> RotationTable {
        let mut table = self.rotation_table();
        for row in table.values_mut() {
            if let Some(pos) = row.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|p| p.0) {
                row.rotate_left(pos);
            }
        }
        table
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson { vertices: self.names.clone(), rotation: self.canonical_rotation_table() }
    }

    pub fn from_json(g: &GraphJson) -> Result<PlaneGraph, GraphError> {
        PlaneGraph::build(&g.vertices, &g.rotation)
    }

    pub fn to_dot(&self, style: &DotStyle<'_>) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let name = if style.name.is_empty() { "G" } else { style.name };
        let _ = writeln!(out, "graph \"{}\" {{", name.replace('"', "'"));
        let _ = writeln!(out, "  node [shape=circle, style=filled, fontsize=10];");
        for v in self.vertices() {
            let fill = match style.colors.map(|c| c[v.idx()]) {
                Some(0) => "#f4c27a",
                Some(1) => "#8fb8de",
                _ => "#dddddd",
            };
            let mut label = self.name(v).to_string();
            if let Some(notes) = style.notes {
                if !notes[v.idx()].is_empty() {
                    label.push_str("\\n");
                    label.push_str(&notes[v.idx()]);
                }
            }
            let _ = writeln!(
                out,
                "  v{} [label=\"{}\", fillcolor=\"{}\"];",
                v.0,
                label.replace('"', "'"),
                fill
            );
        }
        for e in self.edges() {
            let (a, b) = self.endpoints(e);
            if Some(e) == style.highlight {
                let _ = writeln!(out, "  v{} -- v{} [color=red, penwidth=3];", a.0, b.0);
            } else {
                let _ = writeln!(out, "  v{} -- v{};", a.0, b.0);
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn canonical_string(&self) -> String {
        serde_json::to_string(&self.canonical_rotation_table()).expect("rotation table serializes")
    }

    /// Vertex names in lexicographic order.
    pub fn sorted_names(&self) -> Vec<String> {
        let mut v = self.names.clone();
        v.sort();
        v
    }

    /// Plane subgraph on the edges accepted by `keep`, with rotations
    /// restricted. Vertices without kept edges are dropped unless they are the
    /// only vertex. Returns the subgraph and, for each of its vertices, the
    /// vertex of `self` it came from.
    pub fn edge_subgraph(
        &self,
        mut keep: impl FnMut(EdgeId) -> bool,
    ) -> Result<(PlaneGraph, Vec<VertexId>), GraphError> {
        let kept: Vec<bool> = self.edges().map(&mut keep).collect();
        let mut new_id = vec![None; self.vertex_count()];
        let mut back = Vec::new();
        for v in self.vertices() {
            if self.rotation(v).iter().any(|d| kept[d.edge().idx()]) {
                new_id[v.idx()] = Some(VertexId(back.len() as u32));
                back.push(v);
            }
        }
        let names = back.iter().map(|&v| self.name(v).to_string()).collect();
        let adjacency = back
            .iter()
            .map(|&v| {
                self.rotation(v)
                    .iter()
                    .filter(|d| kept[d.edge().idx()])
                    .map(|&d| new_id[self.head(d).idx()].expect("kept edge endpoint"))
                    .collect()
            })
            .collect();
        Ok((PlaneGraph::from_adjacency(names, adjacency)?, back))
    }
}

/// A simple closed curve in a plane graph, given by its cyclic vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmbeddedCycle {
    vertices: Vec<VertexId>,
    darts: Vec<Dart>,
    edges: Vec<EdgeId>,
}

impl EmbeddedCycle {
    /// Builds a cycle from a closed vertex sequence (first vertex not repeated).
    pub fn from_vertices(g: &PlaneGraph, vertices: Vec<VertexId>) -> Option<EmbeddedCycle> {
        let n = vertices.len();
        if n < 3 {
            return None;
        }
        let mut seen = std::collections::HashSet::with_capacity(n);
        if !vertices.iter().all(|v| seen.insert(*v)) {
            return None;
        }
        let mut darts = Vec::with_capacity(n);
        for i in 0..n {
            darts.push(g.dart_between(vertices[i], vertices[(i + 1) % n])?);
        }
        let mut edges: Vec<EdgeId> = darts.iter().map(|d| d.edge()).collect();
        edges.sort();
        Some(EmbeddedCycle { vertices, darts, edges })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }

    /// Sorted edge ids; two cycles are the same curve iff these agree.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    /// Edges shared with `other`.
    pub fn common_edges(&self, other: &EmbeddedCycle) -> Vec<EdgeId> {
        self.edges.iter().copied().filter(|e| other.contains_edge(*e)).collect()
    }

    pub fn names(&self, g: &PlaneGraph) -> Vec<String> {
        self.vertices.iter().map(|&v| g.name(v).to_string()).collect()
    }
}

/// BFS distances from `source` (`usize::MAX` when unreachable), visiting
/// neighbors in name order.
pub fn bfs_distances(g: &PlaneGraph, source: VertexId) -> Vec<usize> {
    bfs_distances_avoiding(g, source, None)
}

fn bfs_distances_avoiding(g: &PlaneGraph, source: VertexId, skip: Option<EdgeId>) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    dist[source.idx()] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for d in g.rotation(u) {
            if Some(d.edge()) == skip {
                continue;
            }
            let w = g.head(*d);
            if dist[w.idx()] == usize::MAX {
                dist[w.idx()] = dist[u.idx()] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn graph_distance(g: &PlaneGraph, u: VertexId, v: VertexId) -> Result<usize, GraphError> {
    let d = bfs_distances(g, u)[v.idx()];
    if d == usize::MAX {
        Err(GraphError::Unreachable(g.name(u).into(), g.name(v).into()))
    } else {
        Ok(d)
    }
}

/// A shortest path from `u` to `v`, ties broken by name order.
pub fn shortest_path(g: &PlaneGraph, u: VertexId, v: VertexId) -> Option<Vec<VertexId>> {
    let mut parent = vec![None; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    seen[u.idx()] = true;
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        if x == v {
            let mut path = vec![v];
            let mut cur = v;
            while let Some(p) = parent[cur.idx()] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for w in g.sorted_neighbors(x) {
            if !seen[w.idx()] {
                seen[w.idx()] = true;
                parent[w.idx()] = Some(x);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Length of a shortest cycle, or `None` for a tree.
pub fn girth(g: &PlaneGraph) -> Option<usize> {
    let n = g.vertex_count();
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![u32::MAX; n];
    for s in g.vertices() {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s.idx()] = 0;
        parent[s.idx()] = u32::MAX;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(u) = queue.pop_front() {
            if 2 * dist[u.idx()] + 1 >= best {
                break;
            }
            for w in g.neighbors(u) {
                if dist[w.idx()] == usize::MAX {
                    dist[w.idx()] = dist[u.idx()] + 1;
                    parent[w.idx()] = u.0;
                    queue.push_back(w);
                } else if parent[u.idx()] != w.0 {
                    best = best.min(dist[u.idx()] + dist[w.idx()] + 1);
                    if best == 3 {
                        break 'bfs;
                    }
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bipartition {
    /// `color[v]` is 0 or 1.
    Bipartite { color: Vec<u8> },
    /// Closed vertex sequence of odd length.
    OddCycle { cycle: Vec<VertexId> },
}

impl Bipartition {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Bipartition::Bipartite { .. })
    }

    /// The two color classes, each sorted by name.
    pub fn classes(&self, g: &PlaneGraph) -> Option<[Vec<String>; 2]> {
        let Bipartition::Bipartite { color } = self else {
            return None;
        };
        let mut out = [Vec::new(), Vec::new()];
        for v in g.vertices() {
            out[color[v.idx()] as usize].push(g.name(v).to_string());
        }
        out[0].sort();
        out[1].sort();
        Some(out)
    }
}

/// BFS two-coloring from the lexicographically smallest vertex; on failure
/// returns the odd cycle closed by the first conflicting edge.
pub fn is_bipartite(g: &PlaneGraph) -> Bipartition {
    let n = g.vertex_count();
    let root = g.vertices().min_by_key(|v| g.rank(*v)).expect("nonempty graph");
    let mut color = vec![u8::MAX; n];
    let mut parent = vec![None; n];
    let mut depth = vec![0usize; n];
    color[root.idx()] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for w in g.sorted_neighbors(u) {
            if color[w.idx()] == u8::MAX {
                color[w.idx()] = 1 - color[u.idx()];
                parent[w.idx()] = Some(u);
                depth[w.idx()] = depth[u.idx()] + 1;
                queue.push_back(w);
            } else if color[w.idx()] == color[u.idx()] {
                let (mut x, mut y) = (u, w);
                let mut left = vec![x];
                let mut right = vec![y];
                while depth[x.idx()] > depth[y.idx()] {
                    x = parent[x.idx()].unwrap();
                    left.push(x);
                }
                while depth[y.idx()] > depth[x.idx()] {
                    y = parent[y.idx()].unwrap();
                    right.push(y);
                }
                while x != y {
                    x = parent[x.idx()].unwrap();
                    y = parent[y.idx()].unwrap();
                    left.push(x);
                    right.push(y);
                }
                right.pop();
                right.reverse();
                left.extend(right);
                return Bipartition::OddCycle { cycle: left };
            }
        }
    }
    Bipartition::Bipartite { color }
}

/// Result of a cycle search through a fixed edge.
#[derive(Debug, Clone)]
pub struct CycleSearch {
    /// Minimal length of a simple cycle through the edge, if one was found
    /// within the length limit.
    pub shortest_len: Option<usize>,
    /// All cycles of that minimal length.
    pub shortest: Vec<EmbeddedCycle>,
    pub girth: Option<usize>,
}

/// All simple cycles of minimal length through `e`, considering lengths up to
/// `max_len`; also reports the girth of the whole graph.
pub fn shortest_cycles_through_edge(g: &PlaneGraph, e: EdgeId, max_len: usize) -> CycleSearch {
    let (u, v) = g.endpoints(e);
    let dist = bfs_distances_avoiding(g, u, Some(e));
    let girth = girth(g);
    let span = dist[v.idx()];
    if span == usize::MAX || span + 1 > max_len {
        return CycleSearch { shortest_len: None, shortest: Vec::new(), girth };
    }
    let len = span + 1;
    CycleSearch { shortest_len: Some(len), shortest: cycles_through_edge(g, e, len), girth }
}

/// All simple cycles through `e` of length at most `max_len`, one per edge
/// set, ordered by length and then by vertex sequence.
pub fn cycles_through_edge(g: &PlaneGraph, e: EdgeId, max_len: usize) -> Vec<EmbeddedCycle> {
    let (u, v) = g.endpoints(e);
    if max_len < 3 {
        return Vec::new();
    }
    // simple paths v -> u in g - e, of length <= max_len - 1
    let to_u = bfs_distances_avoiding(g, u, Some(e));
    let mut on_path = vec![false; g.vertex_count()];
    let mut path = vec![v];
    on_path[v.idx()] = true;
    let mut found = Vec::new();

    fn dfs(
        g: &PlaneGraph,
        e: EdgeId,
        target: VertexId,
        budget: usize,
        to_target: &[usize],
        path: &mut Vec<VertexId>,
        on_path: &mut [bool],
        found: &mut Vec<Vec<VertexId>>,
    ) {
        let x = *path.last().unwrap();
        for d in g.rotation(x) {
            if d.edge() == e {
                continue;
            }
            let w = g.head(*d);
            if w == target {
                if path.len() >= 2 {
                    let mut cyc = path.clone();
                    cyc.push(target);
                    found.push(cyc);
                }
                continue;
            }
            if on_path[w.idx()] || to_target[w.idx()] == usize::MAX {
                continue;
            }
            // edges used so far: path.len() - 1, plus x->w, plus w..target
            if path.len() + to_target[w.idx()] > budget {
                continue;
            }
            on_path[w.idx()] = true;
            path.push(w);
            dfs(g, e, target, budget, to_target, path, on_path, found);
            path.pop();
            on_path[w.idx()] = false;
        }
    }

    let mut raw = Vec::new();
    dfs(g, e, u, max_len - 1, &to_u, &mut path, &mut on_path, &mut raw);
    for seq in raw {
        // seq runs v .. u; the cycle closes with u -> v through e
        let mut cyc: Vec<VertexId> = Vec::with_capacity(seq.len());
        cyc.push(u);
        cyc.extend(seq[..seq.len() - 1].iter().copied());
        if let Some(c) = EmbeddedCycle::from_vertices(g, cyc) {
            found.push(c);
        }
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.vertices.cmp(&b.vertices)));
    found.dedup_by(|a, b| a.edges == b.edges);
    found
}

/// A vertex permutation: `image[v]` is where `v` goes.
pub type Automorphism = Vec<VertexId>;

/// Orientation-preserving automorphisms extending `pins`.
///
/// An automorphism must preserve adjacency and the cyclic rotation at every
/// vertex of degree at least three; rotations at vertices of degree two or
/// less impose nothing. Candidates are pruned by degree and neighbor-degree
/// signatures and, once one neighbor of a vertex is placed, by the rotation.
pub fn embedded_automorphisms(g: &PlaneGraph, pins: &[(VertexId, VertexId)]) -> Vec<Automorphism> {
    let mut found = Vec::new();
    AutSearch::new(g, pins).run(&mut |a| {
        found.push(a.to_vec());
        true
    });
    found
}

/// First orientation-preserving automorphism extending `pins`, if any.
pub fn find_embedded_automorphism(g: &PlaneGraph, pins: &[(VertexId, VertexId)]) -> Option<Automorphism> {
    let mut found = None;
    AutSearch::new(g, pins).run(&mut |a| {
        found = Some(a.to_vec());
        false
    });
    found
}

/// Checks adjacency, bijectivity and rotation preservation of `map`.
pub fn is_embedded_automorphism(g: &PlaneGraph, map: &[VertexId]) -> bool {
    let n = g.vertex_count();
    if map.len() != n {
        return false;
    }
    let mut hit = vec![false; n];
    for &y in map {
        if y.idx() >= n || std::mem::replace(&mut hit[y.idx()], true) {
            return false;
        }
    }
    for e in g.edges() {
        let (u, v) = g.endpoints(e);
        if !g.adjacent(map[u.idx()], map[v.idx()]) {
            return false;
        }
    }
    g.vertices().all(|v| rotation_preserved(g, map, v))
}

fn rotation_preserved(g: &PlaneGraph, map: &[VertexId], v: VertexId) -> bool {
    let deg = g.degree(v);
    if deg < 3 {
        return true;
    }
    let w = map[v.idx()];
    if g.degree(w) != deg {
        return false;
    }
    let src: Vec<VertexId> = g.neighbors(v).map(|x| map[x.idx()]).collect();
    let dst: Vec<VertexId> = g.neighbors(w).collect();
    let Some(shift) = dst.iter().position(|&y| y == src[0]) else {
        return false;
    };
    (0..deg).all(|i| src[i] == dst[(i + shift) % deg])
}

struct AutSearch<'a> {
    g: &'a PlaneGraph,
    order: Vec<VertexId>,
    parent: Vec<Option<VertexId>>,
    pinned: Vec<Option<VertexId>>,
    signature: Vec<(usize, Vec<usize>)>,
    image: Vec<Option<VertexId>>,
    used: Vec<bool>,
}

impl<'a> AutSearch<'a> {
    fn new(g: &'a PlaneGraph, pins: &[(VertexId, VertexId)]) -> Self {
        let n = g.vertex_count();
        let mut pinned = vec![None; n];
        for &(a, b) in pins {
            pinned[a.idx()] = Some(b);
        }
        let signature = g
            .vertices()
            .map(|v| {
                let mut nd: Vec<usize> = g.neighbors(v).map(|w| g.degree(w)).collect();
                nd.sort_unstable();
                (g.degree(v), nd)
            })
            .collect();
        // BFS order from the first pinned vertex (or vertex 0)
        let root = pins.first().map(|p| p.0).unwrap_or(VertexId(0));
        let mut order = Vec::with_capacity(n);
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[root.idx()] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for w in g.neighbors(u) {
                if !seen[w.idx()] {
                    seen[w.idx()] = true;
                    parent[w.idx()] = Some(u);
                    queue.push_back(w);
                }
            }
        }
        AutSearch {
            g,
            order,
            parent,
            pinned,
            signature,
            image: vec![None; n],
            used: vec![false; n],
        }
    }

    fn run(mut self, emit: &mut dyn FnMut(&[VertexId]) -> bool) {
        // pins must be injective and signature-compatible
        let mut targets = std::collections::HashSet::new();
        for (v, p) in self.pinned.iter().enumerate() {
            if let Some(p) = p {
                if !targets.insert(*p) || self.signature[v] != self.signature[p.idx()] {
                    return;
                }
            }
        }
        self.assign(0, emit);
    }

    fn candidates(&self, x: VertexId) -> Vec<VertexId> {
        let g = self.g;
        if let Some(p) = self.pinned[x.idx()] {
            return vec![p];
        }
        let Some(p) = self.parent[x.idx()] else {
            return g.vertices().collect();
        };
        let p_img = self.image[p.idx()].expect("parent assigned first");
        let deg = g.degree(p);
        if deg >= 3 {
            let rot = g.rotation(p);
            let pos_x = rot.iter().position(|&d| g.head(d) == x).unwrap();
            for (i, &d) in rot.iter().enumerate() {
                let q = g.head(d);
                if q == x {
                    continue;
                }
                if let Some(q_img) = self.image[q.idx()] {
                    let img_rot = g.rotation(p_img);
                    let j = img_rot.iter().position(|&dd| g.head(dd) == q_img);
                    let Some(j) = j else { return Vec::new() };
                    let k = (j + deg + pos_x - i) % deg;
                    return vec![g.head(img_rot[k])];
                }
            }
        }
        g.neighbors(p_img).collect()
    }

    fn assign(&mut self, depth: usize, emit: &mut dyn FnMut(&[VertexId]) -> bool) -> bool {
        let g = self.g;
        if depth == self.order.len() {
            let map: Vec<VertexId> = self.image.iter().map(|x| x.unwrap()).collect();
            if g.vertices().all(|v| rotation_preserved(g, &map, v)) {
                return emit(&map);
            }
            return true;
        }
        let x = self.order[depth];
        for y in self.candidates(x) {
            if self.used[y.idx()] || self.signature[x.idx()] != self.signature[y.idx()] {
                continue;
            }
            let consistent = g.neighbors(x).all(|z| match self.image[z.idx()] {
                Some(zi) => g.adjacent(zi, y),
                None => true,
            });
            if !consistent {
                continue;
            }
            self.image[x.idx()] = Some(y);
            self.used[y.idx()] = true;
            let go_on = self.assign(depth + 1, emit);
            self.image[x.idx()] = None;
            self.used[y.idx()] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
}
