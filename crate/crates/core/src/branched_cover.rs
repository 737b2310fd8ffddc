//! Finite cores of simplicial branched coverings and their pullback towers.
//!
//! A core is a pair of nested plane graphs `G0 ⊆ G1` with a simplicial map
//! `F: G1 -> G0`. Iterated preimages are built face by face: each face `u` of
//! `G^k` maps onto a face `F(u)` of `G^(k-1)`, and whatever `G^k` draws inside
//! `F(u)` is copied into `u`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plane_graph::{Dart, EdgeId, FaceId, GraphError, GraphJson, PlaneGraph, VertexId};

/// Hard cap on tower depth.
pub const MAX_DEPTH: usize = 12;

/// On-disk core description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreJson {
    pub name: String,
    pub degree: u32,
    pub g0: GraphJson,
    pub g1: GraphJson,
    pub vertex_map: BTreeMap<String, String>,
    /// Vertices not listed have local degree 1.
    #[serde(default)]
    pub local_degree: BTreeMap<String, u32>,
    pub fixed_edge: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{which}: {source}")]
    Graph {
        which: &'static str,
        #[source]
        source: GraphError,
    },
    #[error("degree must be at least 2, got {0}")]
    BadDegree(u32),
    #[error("vertex `{0}` of g1 has no image under vertex_map")]
    MissingImage(String),
    #[error("vertex_map sends `{0}` to `{1}`, which is not a vertex of g0")]
    ImageOutsideG0(String, String),
    #[error("vertex_map or local_degree mentions unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("local degree of `{0}` must be positive")]
    ZeroLocalDegree(String),
    #[error("fixed edge [{0}, {1}] is not an edge of g0")]
    BadFixedEdge(String, String),
    #[error("critical vertex `{0}` is not a vertex of g1")]
    BadCritical(String),
}

impl CoreError {
    pub fn code(&self) -> &'static str {
        match self {
            CoreError::Schema(_) => "SchemaError",
            CoreError::Graph { source, .. } => source.code(),
            CoreError::BadDegree(_) => "BadDegree",
            CoreError::MissingImage(_) => "MissingImage",
            CoreError::ImageOutsideG0(..) => "ImageOutsideG0",
            CoreError::UnknownVertex(_) => "UnknownVertex",
            CoreError::ZeroLocalDegree(_) => "ZeroLocalDegree",
            CoreError::BadFixedEdge(..) => "BadFixedEdge",
            CoreError::BadCritical(_) => "BadCritical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("core fails validation rule {rule}: {detail}")]
    InvalidCore { rule: String, code: String, detail: String },
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("depth {0} exceeds the cap of {MAX_DEPTH}")]
    DepthExceeded(usize),
    #[error("tower has depth {have}, level {need} is required")]
    TooShallow { have: usize, need: usize },
    #[error("no lift: {0}")]
    NoLift(String),
    #[error("not a path in level {0}")]
    NotAPath(usize),
    #[error("no fixed edge")]
    NoFixedEdge,
    #[error("{0} fixed edges")]
    MultipleFixedEdges(usize),
    #[error("edge [{0}, {1}] is not absorbed by the fixed edge within {2} steps")]
    EdgeNotAbsorbed(String, String, usize),
}

impl CoverError {
    pub fn code(&self) -> String {
        match self {
            CoverError::Core(e) => e.code().into(),
            CoverError::InvalidCore { code, .. } => code.clone(),
            CoverError::PatternMismatch(_) => "PatternMismatch".into(),
            CoverError::DepthExceeded(_) => "DepthExceeded".into(),
            CoverError::TooShallow { .. } => "TooShallow".into(),
            CoverError::NoLift(_) => "NoLift".into(),
            CoverError::NotAPath(_) => "NotAPath".into(),
            CoverError::NoFixedEdge => "NoFixedEdge".into(),
            CoverError::MultipleFixedEdges(_) => "MultipleFixedEdges".into(),
            CoverError::EdgeNotAbsorbed(..) => "EdgeNotAbsorbed".into(),
        }
    }
}

/// A finite core with names resolved to ids.
#[derive(Debug, Clone)]
pub struct CoreSpec {
    pub name: String,
    pub degree: u32,
    pub g0: PlaneGraph,
    pub g1: PlaneGraph,
    /// Indexed by g1 vertex; values are g0 vertices.
    pub vertex_map: Vec<VertexId>,
    /// Indexed by g1 vertex.
    pub local_degree: Vec<u32>,
    /// Endpoints of the fixed edge, as g0 vertices.
    pub fixed_edge: (VertexId, VertexId),
    /// Designated critical vertices of g1, if any.
    pub critical: Option<(VertexId, VertexId)>,
}

impl CoreSpec {
    pub fn from_json_str(s: &str) -> Result<CoreSpec, CoreError> {
        let raw: CoreJson = serde_json::from_str(s).map_err(|e| CoreError::Schema(e.to_string()))?;
        CoreSpec::from_json(&raw)
    }

    pub fn from_json(raw: &CoreJson) -> Result<CoreSpec, CoreError> {
        if raw.degree < 2 {
            return Err(CoreError::BadDegree(raw.degree));
        }
        let g0 = PlaneGraph::from_json(&raw.g0).map_err(|source| CoreError::Graph { which: "g0", source })?;
        let g1 = PlaneGraph::from_json(&raw.g1).map_err(|source| CoreError::Graph { which: "g1", source })?;
        for k in raw.vertex_map.keys().chain(raw.local_degree.keys()) {
            if g1.vertex(k).is_none() {
                return Err(CoreError::UnknownVertex(k.clone()));
            }
        }
        let mut vertex_map = Vec::with_capacity(g1.vertex_count());
        let mut local_degree = Vec::with_capacity(g1.vertex_count());
        for v in g1.vertices() {
            let name = g1.name(v);
            let img = raw.vertex_map.get(name).ok_or_else(|| CoreError::MissingImage(name.into()))?;
            let id = g0
                .vertex(img)
                .ok_or_else(|| CoreError::ImageOutsideG0(name.into(), img.clone()))?;
            vertex_map.push(id);
            let ld = raw.local_degree.get(name).copied().unwrap_or(1);
            if ld == 0 {
                return Err(CoreError::ZeroLocalDegree(name.into()));
            }
            local_degree.push(ld);
        }
        let [a, b] = &raw.fixed_edge;
        let fixed_edge = match (g0.vertex(a), g0.vertex(b)) {
            (Some(x), Some(y)) if g0.adjacent(x, y) => (x, y),
            _ => return Err(CoreError::BadFixedEdge(a.clone(), b.clone())),
        };
        let critical = match &raw.critical {
            None => None,
            Some([p, q]) => {
                let p = g1.vertex(p).ok_or_else(|| CoreError::BadCritical(p.clone()))?;
                let q = g1.vertex(q).ok_or_else(|| CoreError::BadCritical(q.clone()))?;
                Some((p, q))
            }
        };
        Ok(CoreSpec {
            name: raw.name.clone(),
            degree: raw.degree,
            g0,
            g1,
            vertex_map,
            local_degree,
            fixed_edge,
            critical,
        })
    }

    pub fn to_json(&self) -> CoreJson {
        let vertex_map = self
            .g1
            .vertices()
            .map(|v| (self.g1.name(v).to_string(), self.g0.name(self.vertex_map[v.idx()]).to_string()))
            .collect();
        let local_degree = self
            .g1
            .vertices()
            .filter(|v| self.local_degree[v.idx()] != 1)
            .map(|v| (self.g1.name(v).to_string(), self.local_degree[v.idx()]))
            .collect();
        CoreJson {
            name: self.name.clone(),
            degree: self.degree,
            g0: self.g0.to_json(),
            g1: self.g1.to_json(),
            vertex_map,
            local_degree,
            fixed_edge: [
                self.g0.name(self.fixed_edge.0).to_string(),
                self.g0.name(self.fixed_edge.1).to_string(),
            ],
            critical: self
                .critical
                .map(|(p, q)| [self.g1.name(p).to_string(), self.g1.name(q).to_string()]),
        }
    }

    /// Image under `F` of a g1 vertex, as a g1 vertex (g0 sits inside g1).
    pub fn image_in_g1(&self, v: VertexId) -> Option<VertexId> {
        self.g1.vertex(self.g0.name(self.vertex_map[v.idx()]))
    }

    /// The fixed edge as g1 vertices.
    pub fn fixed_edge_g1(&self) -> Option<(VertexId, VertexId)> {
        let a = self.g1.vertex(self.g0.name(self.fixed_edge.0))?;
        let b = self.g1.vertex(self.g0.name(self.fixed_edge.1))?;
        Some((a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    Containment,
    Simplicial,
    RiemannHurwitz,
    FiberSaturation,
    RotationCompatibility,
    FaceCovering,
    FixedEdge,
    EdgeAbsorption,
    CriticalCycles,
    LevyObstruction,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::Containment,
        Rule::Simplicial,
        Rule::RiemannHurwitz,
        Rule::FiberSaturation,
        Rule::RotationCompatibility,
        Rule::FaceCovering,
        Rule::FixedEdge,
        Rule::EdgeAbsorption,
        Rule::CriticalCycles,
        Rule::LevyObstruction,
    ];

    /// Error code reported when the rule fails.
    pub fn failure_code(self) -> &'static str {
        match self {
            Rule::Containment => "ContainmentViolation",
            Rule::Simplicial => "NotSimplicial",
            Rule::RiemannHurwitz => "RiemannHurwitzViolation",
            Rule::FiberSaturation => "FiberSaturationViolation",
            Rule::RotationCompatibility => "RotationIncompatible",
            Rule::FaceCovering => "FaceCoveringViolation",
            Rule::FixedEdge => "FixedEdgeViolation",
            Rule::EdgeAbsorption => "EdgeNotAbsorbed",
            Rule::CriticalCycles => "CriticalCycleMissing",
            Rule::LevyObstruction => "LevyObstruction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: Rule,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub core: String,
    pub passed: bool,
    pub rules: Vec<RuleOutcome>,
}

impl ValidationReport {
    pub fn outcome(&self, rule: Rule) -> &RuleOutcome {
        self.rules.iter().find(|r| r.rule == rule).expect("every rule is reported")
    }

    pub fn first_failure(&self) -> Option<&RuleOutcome> {
        self.rules.iter().find(|r| r.status == Status::Fail)
    }

    pub fn into_result(self) -> Result<ValidationReport, CoverError> {
        match self.first_failure() {
            None => Ok(self),
            Some(f) => Err(CoverError::InvalidCore {
                rule: format!("{:?}", f.rule),
                code: f.code.clone().unwrap_or_default(),
                detail: f.detail.clone(),
            }),
        }
    }
}

type Check = Result<String, String>;

/// Runs every rule that can run and reports each separately.
pub fn validate_core(spec: &CoreSpec) -> ValidationReport {
    let mut rules = Vec::new();
    let mut push = |rule: Rule, r: Option<Check>| {
        let (status, code, detail) = match r {
            None => (Status::Skipped, None, "skipped: an earlier rule failed".to_string()),
            Some(Ok(d)) => (Status::Pass, None, d),
            Some(Err(d)) => (Status::Fail, Some(rule.failure_code().to_string()), d),
        };
        rules.push(RuleOutcome { rule, status, code, detail });
    };

    let containment = check_containment(spec);
    let contained = containment.is_ok();
    push(Rule::Containment, Some(containment));
    let simplicial = if contained { Some(check_simplicial(spec)) } else { None };
    let is_simplicial = matches!(simplicial, Some(Ok(_)));
    push(Rule::Simplicial, simplicial);
    push(Rule::RiemannHurwitz, Some(check_riemann_hurwitz(spec)));
    push(Rule::FiberSaturation, Some(check_fibers(spec)));
    let rotation = is_simplicial.then(|| check_rotation(spec));
    let rotation_ok = matches!(rotation, Some(Ok(_)));
    push(Rule::RotationCompatibility, rotation);
    push(Rule::FaceCovering, rotation_ok.then(|| check_faces(spec)));
    let fixed = is_simplicial.then(|| check_fixed_edge(spec));
    let fixed_ok = matches!(fixed, Some(Ok(_)));
    push(Rule::FixedEdge, fixed);
    push(Rule::EdgeAbsorption, fixed_ok.then(|| check_absorption(spec)));
    push(Rule::CriticalCycles, contained.then(|| check_critical_cycles(spec)));
    push(Rule::LevyObstruction, contained.then(|| check_levy(spec)));

    let passed = rules.iter().all(|r| r.status == Status::Pass);
    ValidationReport { core: spec.name.clone(), passed, rules }
}

fn check_containment(spec: &CoreSpec) -> Check {
    let (g0, g1) = (&spec.g0, &spec.g1);
    for v in g0.vertices() {
        let Some(w) = g1.vertex(g0.name(v)) else {
            return Err(format!("g0 vertex `{}` missing from g1", g0.name(v)));
        };
        let restricted: Vec<&str> = g1
            .neighbors(w)
            .map(|x| g1.name(x))
            .filter(|n| g0.vertex(n).is_some_and(|y| g0.adjacent(v, y)))
            .collect();
        let own: Vec<&str> = g0.neighbors(v).map(|x| g0.name(x)).collect();
        if restricted.len() != own.len() {
            return Err(format!("g0 edges at `{}` are not all edges of g1", g0.name(v)));
        }
        if !same_cyclic_order(&own, &restricted) {
            return Err(format!("rotation of g1 at `{}` does not restrict to that of g0", g0.name(v)));
        }
    }
    Ok(format!("g0 ({} vertices, {} edges) is a plane subgraph of g1", g0.vertex_count(), g0.edge_count()))
}

fn same_cyclic_order<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    match b.iter().position(|x| *x == a[0]) {
        None => false,
        Some(s) => (0..a.len()).all(|i| a[i] == b[(s + i) % b.len()]),
    }
}

fn check_simplicial(spec: &CoreSpec) -> Check {
    for e in spec.g1.edges() {
        let (v, w) = spec.g1.endpoints(e);
        let (fv, fw) = (spec.vertex_map[v.idx()], spec.vertex_map[w.idx()]);
        if fv == fw {
            return Err(format!(
                "edge [{}, {}] collapses to `{}`",
                spec.g1.name(v),
                spec.g1.name(w),
                spec.g0.name(fv)
            ));
        }
        if !spec.g0.adjacent(fv, fw) {
            return Err(format!(
                "edge [{}, {}] maps to non-edge [{}, {}]",
                spec.g1.name(v),
                spec.g1.name(w),
                spec.g0.name(fv),
                spec.g0.name(fw)
            ));
        }
    }
    Ok(format!("all {} edges of g1 map to edges of g0", spec.g1.edge_count()))
}

fn check_riemann_hurwitz(spec: &CoreSpec) -> Check {
    let total: u64 = spec.local_degree.iter().map(|&l| (l - 1) as u64).sum();
    let want = 2 * spec.degree as u64 - 2;
    if total == want {
        Ok(format!("sum of (local degree - 1) = {total} = 2d - 2"))
    } else {
        Err(format!("sum of (local degree - 1) = {total}, expected {want}"))
    }
}

fn check_fibers(spec: &CoreSpec) -> Check {
    let mut sums = vec![0u32; spec.g0.vertex_count()];
    for v in spec.g1.vertices() {
        sums[spec.vertex_map[v.idx()].idx()] += spec.local_degree[v.idx()];
    }
    for u in spec.g0.vertices() {
        if sums[u.idx()] != spec.degree {
            return Err(format!(
                "fiber over `{}` has total local degree {}, expected {}",
                spec.g0.name(u),
                sums[u.idx()],
                spec.degree
            ));
        }
    }
    Ok(format!("every fiber has total local degree {}", spec.degree))
}

fn check_rotation(spec: &CoreSpec) -> Check {
    let (g0, g1) = (&spec.g0, &spec.g1);
    for v in g1.vertices() {
        let fv = spec.vertex_map[v.idx()];
        let ld = spec.local_degree[v.idx()] as usize;
        if g1.degree(v) != ld * g0.degree(fv) {
            return Err(format!(
                "deg(`{}`) = {} but local degree {} times deg(`{}`) = {}",
                g1.name(v),
                g1.degree(v),
                ld,
                g0.name(fv),
                ld * g0.degree(fv)
            ));
        }
        let rot = g1.rotation(v);
        for (i, &d) in rot.iter().enumerate() {
            let next = rot[(i + 1) % rot.len()];
            let img = g0.dart_between(fv, spec.vertex_map[g1.head(d).idx()]).unwrap();
            let img_next = g0.dart_between(fv, spec.vertex_map[g1.head(next).idx()]).unwrap();
            if g0.next_ccw(img) != img_next {
                return Err(format!("rotation at `{}` does not follow rotation at `{}`", g1.name(v), g0.name(fv)));
            }
        }
    }
    Ok("every rotation wraps its image rotation local-degree many times".into())
}

fn map_dart(spec: &CoreSpec, d: Dart) -> Dart {
    let (x, y) = (spec.g1.tail(d), spec.g1.head(d));
    spec.g0
        .dart_between(spec.vertex_map[x.idx()], spec.vertex_map[y.idx()])
        .expect("simplicial map")
}

fn check_faces(spec: &CoreSpec) -> Check {
    let (g0, g1) = (&spec.g0, &spec.g1);
    let mut preimages = vec![0u32; g0.face_count()];
    for (fi, walk) in g1.faces().iter().enumerate() {
        let (w, p) = g0.face_of(map_dart(spec, walk[0]));
        let target = g0.face(w);
        if target.len() != walk.len() {
            return Err(format!("face {fi} of g1 has length {} but its image has length {}", walk.len(), target.len()));
        }
        for (i, &d) in walk.iter().enumerate() {
            if map_dart(spec, d) != target[(p + i) % target.len()] {
                return Err(format!("face {fi} of g1 does not map onto a face of g0"));
            }
        }
        preimages[w.idx()] += 1;
    }
    if let Some(w) = preimages.iter().position(|&c| c != spec.degree) {
        return Err(format!("face {w} of g0 has {} preimage faces, expected {}", preimages[w], spec.degree));
    }
    Ok(format!("each of the {} faces of g0 has {} preimage faces", g0.face_count(), spec.degree))
}

/// Induced map on g1 edges, as g1 edges.
fn edge_image(spec: &CoreSpec, e: EdgeId) -> Option<EdgeId> {
    let (v, w) = spec.g1.endpoints(e);
    let fv = spec.image_in_g1(v)?;
    let fw = spec.image_in_g1(w)?;
    spec.g1.edge_between(fv, fw)
}

fn fixed_edges(spec: &CoreSpec) -> Vec<EdgeId> {
    spec.g1.edges().filter(|&e| edge_image(spec, e) == Some(e)).collect()
}

fn edge_name(g: &PlaneGraph, e: EdgeId) -> String {
    let (a, b) = g.endpoints(e);
    format!("[{}, {}]", g.name(a), g.name(b))
}

fn check_fixed_edge(spec: &CoreSpec) -> Check {
    let fixed = fixed_edges(spec);
    let declared = spec.fixed_edge_g1().and_then(|(a, b)| spec.g1.edge_between(a, b));
    match fixed.as_slice() {
        [] => Err("no edge is fixed by the induced edge map".into()),
        [e] if Some(*e) == declared => Ok(format!("{} is the unique fixed edge", edge_name(&spec.g1, *e))),
        [e] => Err(format!("the unique fixed edge is {}, not the declared one", edge_name(&spec.g1, *e))),
        many => Err(format!(
            "{} fixed edges: {}",
            many.len(),
            many.iter().map(|e| edge_name(&spec.g1, *e)).collect::<Vec<_>>().join(" ")
        )),
    }
}

/// Per-edge absorption data for a core.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeOrbit {
    pub edge: [String; 2],
    pub image: [String; 2],
    /// Number of steps to reach the fixed edge; `None` if never.
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDynamics {
    pub fixed_edge: [String; 2],
    pub edges: Vec<EdgeOrbit>,
    pub max_steps: usize,
}

fn absorption_steps(spec: &CoreSpec, e: EdgeId, target: EdgeId, limit: usize) -> Option<usize> {
    let mut cur = e;
    for step in 0..=limit {
        if cur == target {
            return Some(step);
        }
        cur = edge_image(spec, cur)?;
    }
    None
}

/// Induced edge map of a core and the number of steps each edge needs to
/// reach the fixed edge.
pub fn edge_dynamics(spec: &CoreSpec) -> Result<EdgeDynamics, CoverError> {
    check_simplicial(spec).map_err(|detail| CoverError::InvalidCore {
        rule: "Simplicial".into(),
        code: Rule::Simplicial.failure_code().into(),
        detail,
    })?;
    let fixed = fixed_edges(spec);
    let e0 = match fixed.as_slice() {
        [] => return Err(CoverError::NoFixedEdge),
        [e] => *e,
        many => return Err(CoverError::MultipleFixedEdges(many.len())),
    };
    let limit = spec.g1.edge_count();
    let g1 = &spec.g1;
    let mut edges = Vec::new();
    let mut max_steps = 0;
    for e in g1.edges() {
        let (a, b) = g1.endpoints(e);
        let img = edge_image(spec, e).expect("simplicial");
        let (c, d) = g1.endpoints(img);
        let steps = absorption_steps(spec, e, e0, limit);
        match steps {
            Some(s) => max_steps = max_steps.max(s),
            None => {
                return Err(CoverError::EdgeNotAbsorbed(g1.name(a).into(), g1.name(b).into(), limit));
            }
        }
        edges.push(EdgeOrbit {
            edge: [g1.name(a).into(), g1.name(b).into()],
            image: [g1.name(c).into(), g1.name(d).into()],
            steps,
        });
    }
    let (a, b) = g1.endpoints(e0);
    Ok(EdgeDynamics { fixed_edge: [g1.name(a).into(), g1.name(b).into()], edges, max_steps })
}

fn check_absorption(spec: &CoreSpec) -> Check {
    match edge_dynamics(spec) {
        Ok(d) => Ok(format!("every edge reaches the fixed edge within {} steps", d.max_steps)),
        Err(e) => Err(e.to_string()),
    }
}

fn check_critical_cycles(spec: &CoreSpec) -> Check {
    let Some((a, b)) = spec.fixed_edge_g1() else {
        return Err("fixed edge not in g1".into());
    };
    for v in [a, b] {
        let mut cur = v;
        let mut has_critical = false;
        let mut returned = false;
        for _ in 0..spec.g1.vertex_count() {
            has_critical |= spec.local_degree[cur.idx()] >= 2;
            match spec.image_in_g1(cur) {
                Some(n) => cur = n,
                None => break,
            }
            if cur == v {
                returned = true;
                break;
            }
        }
        if !returned {
            return Err(format!("`{}` is not periodic", spec.g1.name(v)));
        }
        if !has_critical {
            return Err(format!("the cycle of `{}` contains no critical vertex", spec.g1.name(v)));
        }
    }
    Ok("both ends of the fixed edge lie on critical cycles".into())
}

fn check_levy(spec: &CoreSpec) -> Check {
    let Some((a, b)) = spec.fixed_edge_g1() else {
        return Err("fixed edge not in g1".into());
    };
    let g = &spec.g1;
    let skip = g.edge_between(a, b);
    let mut seen = vec![false; g.vertex_count()];
    let mut stack = vec![a];
    seen[a.idx()] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &d in g.rotation(u) {
            if Some(d.edge()) == skip {
                continue;
            }
            let w = g.head(d);
            if !seen[w.idx()] {
                seen[w.idx()] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    if count == g.vertex_count() {
        Ok("g1 minus the interior of the fixed edge is connected".into())
    } else {
        Err(format!("removing the fixed edge disconnects g1 ({} of {} vertices reachable)", count, g.vertex_count()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Corner(u32),
    Interior(u32),
}

/// What g1 draws inside one face of g0, with attachment points given by
/// corner index along the face walk.
#[derive(Debug, Clone)]
struct Pattern {
    /// Pattern darts leaving each corner, counterclockwise.
    corners: Vec<Vec<u32>>,
    /// Rotation of each interior vertex, as pattern darts.
    interior: Vec<Vec<u32>>,
    /// Pattern dart `2e` runs from `edges[e][0]` to `edges[e][1]`.
    edges: Vec<[End; 2]>,
    /// g1 names of the interior vertices.
    names: Vec<String>,
}

impl Pattern {
    fn far_end(&self, pd: u32) -> End {
        self.edges[(pd >> 1) as usize][1 - (pd & 1) as usize]
    }
}

fn extract_patterns(g0: &PlaneGraph, g1: &PlaneGraph) -> Result<Vec<Pattern>, CoverError> {
    let in_g0 = |v: VertexId| g0.vertex(g1.name(v));
    let g0_dart = |d: Dart| -> Option<Dart> {
        let a = in_g0(g1.tail(d))?;
        let b = in_g0(g1.head(d))?;
        g0.dart_between(a, b)
    };
    let lift = |d: Dart| -> Dart {
        let a = g1.vertex(g0.name(g0.tail(d))).unwrap();
        let b = g1.vertex(g0.name(g0.head(d))).unwrap();
        g1.dart_between(a, b).unwrap()
    };
    if g0.edge_count() == 0 {
        return Err(CoverError::PatternMismatch("g0 has no edges".into()));
    }

    // every g1 dart leaving a g0 vertex off g0 sits in one corner of one face
    let mut corner_of: HashMap<Dart, (FaceId, u32)> = HashMap::new();
    let mut corner_lists: Vec<Vec<Vec<Dart>>> = Vec::new();
    for (fi, walk) in g0.faces().iter().enumerate() {
        let mut lists = Vec::with_capacity(walk.len());
        for i in 0..walk.len() {
            let start = lift(walk[i].rev());
            let stop = lift(walk[(i + 1) % walk.len()]);
            let mut list = Vec::new();
            let mut x = g1.next_ccw(start);
            while x != stop {
                if g0_dart(x).is_some() {
                    return Err(CoverError::PatternMismatch(format!(
                        "rotation of g1 at `{}` interleaves g0 darts",
                        g1.name(g1.tail(x))
                    )));
                }
                corner_of.insert(x, (FaceId(fi as u32), i as u32));
                list.push(x);
                x = g1.next_ccw(x);
            }
            lists.push(list);
        }
        corner_lists.push(lists);
    }

    let mut patterns = Vec::with_capacity(g0.face_count());
    for (fi, lists) in corner_lists.iter().enumerate() {
        let mut interior_id: HashMap<VertexId, u32> = HashMap::new();
        let mut interior_vs: Vec<VertexId> = Vec::new();
        let mut edge_id: HashMap<EdgeId, u32> = HashMap::new();
        let mut edges: Vec<[End; 2]> = Vec::new();
        let mut edge_dart: Vec<Dart> = Vec::new();
        let mut queue = VecDeque::new();

        let end_of = |d: Dart,
                      interior_id: &mut HashMap<VertexId, u32>,
                      interior_vs: &mut Vec<VertexId>,
                      queue: &mut VecDeque<VertexId>|
         -> Result<End, CoverError> {
            let v = g1.tail(d);
            if in_g0(v).is_some() {
                match corner_of.get(&d) {
                    Some(&(f, c)) if f.idx() == fi => Ok(End::Corner(c)),
                    _ => Err(CoverError::PatternMismatch(format!(
                        "dart out of `{}` leaves face {fi} of g0",
                        g1.name(v)
                    ))),
                }
            } else {
                let next = interior_vs.len() as u32;
                let id = *interior_id.entry(v).or_insert_with(|| {
                    interior_vs.push(v);
                    queue.push_back(v);
                    next
                });
                Ok(End::Interior(id))
            }
        };

        let mut visit = |d: Dart,
                         interior_id: &mut HashMap<VertexId, u32>,
                         interior_vs: &mut Vec<VertexId>,
                         queue: &mut VecDeque<VertexId>|
         -> Result<(), CoverError> {
            if edge_id.contains_key(&d.edge()) {
                return Ok(());
            }
            let a = end_of(d, interior_id, interior_vs, queue)?;
            let b = end_of(d.rev(), interior_id, interior_vs, queue)?;
            edge_id.insert(d.edge(), edges.len() as u32);
            edges.push([a, b]);
            edge_dart.push(d);
            Ok(())
        };

        for list in lists {
            for &d in list {
                visit(d, &mut interior_id, &mut interior_vs, &mut queue)?;
            }
        }
        while let Some(v) = queue.pop_front() {
            for &d in g1.rotation(v) {
                visit(d, &mut interior_id, &mut interior_vs, &mut queue)?;
            }
        }

        let pdart = |d: Dart| -> u32 {
            let e = edge_id[&d.edge()];
            if edge_dart[e as usize] == d {
                2 * e
            } else {
                2 * e + 1
            }
        };
        let corners = lists.iter().map(|l| l.iter().map(|&d| pdart(d)).collect()).collect();
        let interior = interior_vs
            .iter()
            .map(|&v| g1.rotation(v).iter().map(|&d| pdart(d)).collect())
            .collect();
        let names = interior_vs.iter().map(|&v| g1.name(v).to_string()).collect();
        patterns.push(Pattern { corners, interior, edges, names });
    }
    Ok(patterns)
}

/// One level `G^k` of a tower.
#[derive(Debug, Clone)]
pub struct Level {
    pub graph: PlaneGraph,
    /// For each face, its image face one level down and the walk offset:
    /// the image of dart `i` is dart `i + offset` of the image face.
    face_image: Vec<(FaceId, usize)>,
    /// Face of `G^0` reached by iterating the face map, with accumulated offset.
    face_root: Vec<(FaceId, usize)>,
    /// Indexed by faces of the level below: first vertex id created inside it.
    paste_first: Vec<u32>,
}

impl Level {
    pub fn face_image(&self, f: FaceId) -> Option<(FaceId, usize)> {
        self.face_image.get(f.idx()).copied()
    }
}

/// The nested sequence `G^0 ⊆ G^1 ⊆ ...` with the extended covering map.
///
/// Vertex ids are stable: the vertices of `G^j` are exactly the ids below
/// `G^j.vertex_count()` at every higher level.
#[derive(Debug, Clone)]
pub struct Tower {
    pub core_name: String,
    pub degree: u32,
    levels: Vec<Level>,
    /// Covering map on vertex ids, valid for all levels.
    map: Vec<VertexId>,
    local_degree: Vec<u32>,
    /// Fixed edge endpoints `(a, b)`.
    pub fixed: (VertexId, VertexId),
    patterns: Vec<Pattern>,
    critical: Option<(VertexId, VertexId)>,
}

impl Tower {
    /// Builds `G^0` and `G^1` from a core that passes validation.
    pub fn new(spec: &CoreSpec) -> Result<Tower, CoverError> {
        validate_core(spec).into_result()?;
        let patterns = extract_patterns(&spec.g0, &spec.g1)?;
        let g0 = spec.g0.clone();
        let root: Vec<(FaceId, usize)> = (0..g0.face_count() as u32).map(|f| (FaceId(f), 0)).collect();
        let level0 = Level {
            face_image: Vec::new(),
            face_root: root.clone(),
            paste_first: Vec::new(),
            graph: g0,
        };
        let (g1, paste_first) = paste(&level0.graph, &root, &patterns, |_, p, i| p.names[i].clone())?;
        if g1 != spec.g1 {
            return Err(CoverError::PatternMismatch("reassembled g1 differs from the given g1".into()));
        }
        let mut map = Vec::with_capacity(g1.vertex_count());
        let mut local_degree = Vec::with_capacity(g1.vertex_count());
        for v in g1.vertices() {
            let orig = spec.g1.vertex(g1.name(v)).unwrap();
            let img = spec.g0.name(spec.vertex_map[orig.idx()]);
            map.push(level0.graph.vertex(img).unwrap());
            local_degree.push(spec.local_degree[orig.idx()]);
        }
        let critical = spec.critical.map(|(p, q)| {
            (g1.vertex(spec.g1.name(p)).unwrap(), g1.vertex(spec.g1.name(q)).unwrap())
        });
        let (face_image, face_root) = face_maps(&g1, &level0, &map, spec.degree)?;
        let level1 = Level { graph: g1, face_image, face_root, paste_first };
        Ok(Tower {
            core_name: spec.name.clone(),
            degree: spec.degree,
            levels: vec![level0, level1],
            map,
            local_degree,
            fixed: spec.fixed_edge,
            patterns,
            critical,
        })
    }

    /// Tower with levels `G^0 ..= G^depth`.
    pub fn build(spec: &CoreSpec, depth: usize) -> Result<Tower, CoverError> {
        if depth > MAX_DEPTH {
            return Err(CoverError::DepthExceeded(depth));
        }
        let mut t = Tower::new(spec)?;
        while t.depth() < depth {
            t.push_level()?;
        }
        Ok(t)
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &PlaneGraph {
        &self.levels[k].graph
    }

    pub fn level_data(&self, k: usize) -> &Level {
        &self.levels[k]
    }

    pub fn top(&self) -> &PlaneGraph {
        &self.levels.last().unwrap().graph
    }

    /// Covering map on vertex ids (image lies one level down).
    pub fn f(&self, v: VertexId) -> VertexId {
        self.map[v.idx()]
    }

    pub fn local_degree(&self, v: VertexId) -> u32 {
        self.local_degree[v.idx()]
    }

    /// Critical vertices `(a0, c)` if the core designates them.
    pub fn critical(&self) -> Option<(VertexId, VertexId)> {
        self.critical
    }

    /// Level at which `v` first appears.
    pub fn birth_level(&self, v: VertexId) -> usize {
        self.levels.iter().position(|l| v.idx() < l.graph.vertex_count()).expect("vertex in tower")
    }

    /// Extends the tower by one level in place.
    pub fn push_level(&mut self) -> Result<(), CoverError> {
        let k = self.depth();
        if k + 1 > MAX_DEPTH {
            return Err(CoverError::DepthExceeded(k + 1));
        }
        let cur = &self.levels[k];
        let prefix = format!("F{}.", k + 1);
        let (next, paste_first) = paste(&cur.graph, &cur.face_root, &self.patterns, |u, _, i| {
            let (w, _) = cur.face_image[u.idx()];
            let src = VertexId(cur.paste_first[w.idx()] + i as u32);
            format!("{prefix}{}:{}", u.0, cur.graph.name(src))
        })?;
        let mut map = self.map.clone();
        map.resize(next.vertex_count(), VertexId(0));
        let mut local_degree = self.local_degree.clone();
        local_degree.resize(next.vertex_count(), 1);
        for (u, walk_first) in paste_first.iter().enumerate() {
            let (w, _) = cur.face_image[u];
            let src_first = cur.paste_first[w.idx()];
            let (root, _) = cur.face_root[u];
            let n = self.patterns[root.idx()].interior.len() as u32;
            for i in 0..n {
                map[(walk_first + i) as usize] = VertexId(src_first + i);
            }
        }
        let (face_image, face_root) = face_maps(&next, cur, &map, self.degree)?;
        self.map = map;
        self.local_degree = local_degree;
        self.levels.push(Level { graph: next, face_image, face_root, paste_first });
        Ok(())
    }

    /// Edge map `(u, v) -> (F u, F v)` applied to an edge of level `k >= 1`.
    pub fn edge_image(&self, k: usize, e: EdgeId) -> EdgeId {
        let g = self.level(k);
        let (u, v) = g.endpoints(e);
        self.level(k - 1)
            .edge_between(self.f(u), self.f(v))
            .map(|e| {
                let (x, y) = self.level(k - 1).endpoints(e);
                g.edge_between(x, y).unwrap()
            })
            .expect("simplicial")
    }
}

/// Returns the next level and, per face of `g`, the first new vertex id.
fn paste(
    g: &PlaneGraph,
    face_root: &[(FaceId, usize)],
    patterns: &[Pattern],
    mut name_new: impl FnMut(FaceId, &Pattern, usize) -> String,
) -> Result<(PlaneGraph, Vec<u32>), CoverError> {
    let mut names: Vec<String> = g.names().to_vec();
    let mut first = Vec::with_capacity(g.face_count());
    for (u, &(root, _)) in face_root.iter().enumerate() {
        let p = &patterns[root.idx()];
        first.push(names.len() as u32);
        for i in 0..p.interior.len() {
            names.push(name_new(FaceId(u as u32), p, i));
        }
    }

    let resolve = |u: usize, end: End| -> VertexId {
        match end {
            End::Interior(i) => VertexId(first[u] + i),
            End::Corner(c) => {
                let walk = g.face(FaceId(u as u32));
                let (_, t) = face_root[u];
                let l = walk.len();
                let q = (c as usize + l - t % l) % l;
                g.head(walk[q])
            }
        }
    };

    let mut adjacency: Vec<Vec<VertexId>> = Vec::with_capacity(names.len());
    for v in g.vertices() {
        let mut row = Vec::new();
        for &x in g.rotation(v) {
            row.push(g.head(x));
            let (u, pos) = g.face_of(x.rev());
            let (root, t) = face_root[u.idx()];
            let p = &patterns[root.idx()];
            let c = (pos + t) % p.corners.len();
            for &pd in &p.corners[c] {
                row.push(resolve(u.idx(), p.far_end(pd)));
            }
        }
        adjacency.push(row);
    }
    for (u, &(root, _)) in face_root.iter().enumerate() {
        let p = &patterns[root.idx()];
        if p.corners.len() != g.face(FaceId(u as u32)).len() {
            return Err(CoverError::PatternMismatch(format!(
                "face {u} has length {} but its pattern has {} corners",
                g.face(FaceId(u as u32)).len(),
                p.corners.len()
            )));
        }
        for rot in &p.interior {
            adjacency.push(rot.iter().map(|&pd| resolve(u, p.far_end(pd))).collect());
        }
    }
    let next = PlaneGraph::from_adjacency(names, adjacency)
        .map_err(|e| CoverError::PatternMismatch(format!("pasted graph invalid: {e}")))?;
    Ok((next, first))
}

/// Face correspondence from `g` (one level up) onto `below`.
fn face_maps(
    g: &PlaneGraph,
    below: &Level,
    map: &[VertexId],
    degree: u32,
) -> Result<(Vec<(FaceId, usize)>, Vec<(FaceId, usize)>), CoverError> {
    let h = &below.graph;
    let image = |d: Dart| -> Result<Dart, CoverError> {
        let (x, y) = (map[g.tail(d).idx()], map[g.head(d).idx()]);
        h.dart_between(x, y).ok_or_else(|| {
            CoverError::PatternMismatch(format!("edge [{}, {}] is not mapped to an edge", g.name(g.tail(d)), g.name(g.head(d))))
        })
    };
    let mut face_image = Vec::with_capacity(g.face_count());
    let mut face_root = Vec::with_capacity(g.face_count());
    let mut count = vec![0u32; h.face_count()];
    for (fi, walk) in g.faces().iter().enumerate() {
        let (w, p) = h.face_of(image(walk[0])?);
        let target = h.face(w);
        if target.len() != walk.len() {
            return Err(CoverError::PatternMismatch(format!("face {fi} maps onto a face of different length")));
        }
        for (i, &d) in walk.iter().enumerate() {
            if image(d)? != target[(p + i) % target.len()] {
                return Err(CoverError::PatternMismatch(format!("face {fi} does not map onto a single face")));
            }
        }
        count[w.idx()] += 1;
        face_image.push((w, p));
        let (root, t) = below.face_root[w.idx()];
        face_root.push((root, (p + t) % walk.len()));
    }
    if let Some(w) = count.iter().position(|&c| c != degree) {
        return Err(CoverError::PatternMismatch(format!("face {w} has {} preimages, expected {degree}", count[w])));
    }
    Ok((face_image, face_root))
}

/// Extends a tower by one level.
pub fn pullback(t: &Tower) -> Result<Tower, CoverError> {
    let mut next = t.clone();
    next.push_level()?;
    Ok(next)
}

fn lift_candidates(t: &Tower, k: usize, x: VertexId, target: VertexId) -> Vec<Dart> {
    let g = t.level(k + 1);
    g.rotation(x).iter().copied().filter(|&d| t.f(g.head(d)) == target).collect()
}

fn check_lift_input(t: &Tower, k: usize, path: &[VertexId], start: VertexId) -> Result<(), CoverError> {
    if t.depth() < k + 1 {
        return Err(CoverError::TooShallow { have: t.depth(), need: k + 1 });
    }
    let g = t.level(k);
    if path.is_empty() || path.iter().any(|v| v.idx() >= g.vertex_count()) {
        return Err(CoverError::NotAPath(k));
    }
    if path.windows(2).any(|w| !g.adjacent(w[0], w[1])) {
        return Err(CoverError::NotAPath(k));
    }
    if start.idx() >= t.level(k + 1).vertex_count() || t.f(start) != path[0] {
        return Err(CoverError::NoLift(format!(
            "`{}` does not lie over `{}`",
            t.top().names().get(start.idx()).map(String::as_str).unwrap_or("?"),
            g.name(path[0])
        )));
    }
    Ok(())
}

/// Lift of a path in `G^k` to `G^(k+1)` starting at `start`.
///
/// Away from critical vertices the lift is unique. At a critical vertex the
/// continuation keeps the turn: it leaves the same number of rotation steps
/// after the incoming dart as the path does below. A critical start vertex
/// takes the candidate earliest in its rotation.
pub fn lift_path(t: &Tower, k: usize, path: &[VertexId], start: VertexId) -> Result<Vec<VertexId>, CoverError> {
    check_lift_input(t, k, path, start)?;
    let up = t.level(k + 1);
    let down = t.level(k);
    let mut out = vec![start];
    for i in 0..path.len() - 1 {
        let x = *out.last().unwrap();
        let cands = lift_candidates(t, k, x, path[i + 1]);
        let chosen = match cands.len() {
            0 => return Err(CoverError::NoLift(format!("stuck at `{}`", up.name(x)))),
            1 => cands[0],
            _ if i == 0 => *cands.iter().min_by_key(|d| up.slot(**d)).unwrap(),
            _ => {
                let back = up.dart_between(x, out[out.len() - 2]).unwrap();
                let back_img = down.dart_between(path[i], path[i - 1]).unwrap();
                let fwd_img = down.dart_between(path[i], path[i + 1]).unwrap();
                let deg = down.degree(path[i]);
                let turn = (down.slot(fwd_img) + deg - down.slot(back_img)) % deg;
                let rot = up.rotation(x);
                rot[(up.slot(back) + turn) % rot.len()]
            }
        };
        out.push(up.head(chosen));
    }
    Ok(out)
}

/// Every lift of a path starting at `start`, branching at critical vertices.
pub fn lifts_of_path(t: &Tower, k: usize, path: &[VertexId], start: VertexId) -> Result<Vec<Vec<VertexId>>, CoverError> {
    check_lift_input(t, k, path, start)?;
    let up = t.level(k + 1);
    let mut partial = vec![vec![start]];
    for i in 0..path.len() - 1 {
        let mut next = Vec::new();
        for p in partial {
            let x = *p.last().unwrap();
            for d in lift_candidates(t, k, x, path[i + 1]) {
                let mut q = p.clone();
                q.push(up.head(d));
                next.push(q);
            }
        }
        partial = next;
    }
    partial.sort();
    partial.dedup();
    Ok(partial)
}

/// Per-level statistics used by reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub level: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl Tower {
    pub fn counts(&self) -> Vec<LevelCounts> {
        self.levels
            .iter()
            .enumerate()
            .map(|(k, l)| LevelCounts {
                level: k,
                vertices: l.graph.vertex_count(),
                edges: l.graph.edge_count(),
                faces: l.graph.face_count(),
            })
            .collect()
    }

    /// Edges of `G^k` fixed by the edge map.
    pub fn fixed_edges(&self, k: usize) -> Vec<EdgeId> {
        let g = self.level(k);
        g.edges()
            .filter(|&e| {
                let (u, v) = g.endpoints(e);
                let (fu, fv) = (self.f(u), self.f(v));
                (fu == u && fv == v) || (fu == v && fv == u)
            })
            .collect()
    }

    /// Steps for each edge of `G^k` to reach the fixed edge, `None` if it is
    /// not reached within `limit` steps.
    pub fn absorption_steps(&self, k: usize, limit: usize) -> Vec<Option<usize>> {
        let g = self.level(k);
        let (a, b) = self.fixed;
        g.edges()
            .map(|e| {
                let (mut u, mut v) = g.endpoints(e);
                for s in 0..=limit {
                    if (u == a && v == b) || (u == b && v == a) {
                        return Some(s);
                    }
                    u = self.f(u);
                    v = self.f(v);
                }
                None
            })
            .collect()
    }

    /// Two classes by eventual image: a vertex joins the class of the
    /// endpoint of the fixed edge it reaches after an even number of steps.
    pub fn eventual_image_classes(&self, k: usize) -> Vec<u8> {
        let g = self.level(k);
        let (a, b) = self.fixed;
        let swaps = self.f(a) == b;
        let limit = 4 * g.vertex_count() + 4;
        g.vertices()
            .map(|v| {
                let mut x = v;
                for n in 0..limit {
                    if x == a || x == b {
                        let odd = swaps && n % 2 == 1;
                        return ((x == b) ^ odd) as u8;
                    }
                    x = self.f(x);
                }
                u8::MAX
            })
            .collect()
    }

    /// Vertex names of `G^k` with their images, for export.
    pub fn level_map_names(&self, k: usize) -> BTreeMap<String, String> {
        let g = self.level(k);
        let lower = if k == 0 { g } else { self.level(k - 1) };
        g.vertices().map(|v| (g.name(v).to_string(), lower.name(self.f(v)).to_string())).collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub const IIB_L2: &str = r#"{
        "name": "iib_l2",
        "degree": 2,
        "g0": {"vertices": ["b0", "a0", "a1"],
               "rotation": {"b0": ["a0"], "a0": ["b0", "a1"], "a1": ["a0"]}},
        "g1": {"vertices": ["a0", "a1", "a2", "b0"],
               "rotation": {"a0": ["a1", "b0"], "a1": ["a2", "a0"], "a2": ["b0", "a1"], "b0": ["a0", "a2"]}},
        "vertex_map": {"a0": "b0", "b0": "a0", "a1": "a0", "a2": "a1"},
        "local_degree": {"a0": 2, "a2": 2},
        "fixed_edge": ["a0", "b0"],
        "critical": ["a0", "a2"]
    }"#;

    pub fn iib() -> CoreSpec {
        CoreSpec::from_json_str(IIB_L2).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::plane_graph::shortest_cycles_through_edge;

    fn vid(g: &PlaneGraph, n: &str) -> VertexId {
        g.vertex(n).unwrap()
    }

    #[test]
    fn iib_validates() {
        let r = validate_core(&iib());
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn extra_preimage_breaks_fibers() {
        let mut raw: CoreJson = serde_json::from_str(IIB_L2).unwrap();
        raw.g1.vertices.push("x".into());
        raw.g1.rotation.get_mut("a1").unwrap().push("x".into());
        raw.g1.rotation.insert("x".into(), vec!["a1".into()]);
        raw.vertex_map.insert("x".into(), "a0".into());
        let spec = CoreSpec::from_json(&raw).unwrap();
        let r = validate_core(&spec);
        assert_eq!(r.outcome(Rule::FiberSaturation).status, Status::Fail);
    }

    #[test]
    fn bad_image_breaks_simplicial() {
        let mut raw: CoreJson = serde_json::from_str(IIB_L2).unwrap();
        raw.vertex_map.insert("a1".into(), "a1".into());
        let spec = CoreSpec::from_json(&raw).unwrap();
        let r = validate_core(&spec);
        assert!(!r.passed);
        let simp = r.outcome(Rule::Simplicial).status;
        let fixed = r.outcome(Rule::FixedEdge).status;
        assert!(simp == Status::Fail || fixed == Status::Fail);
    }

    #[test]
    fn unknown_field_rejected() {
        let bad = IIB_L2.replacen("\"degree\"", "\"degre\"", 1);
        assert!(matches!(CoreSpec::from_json_str(&bad), Err(CoreError::Schema(_))));
    }

    #[test]
    fn iib_edge_dynamics() {
        let d = edge_dynamics(&iib()).unwrap();
        let steps = |a: &str, b: &str| {
            d.edges
                .iter()
                .find(|o| (o.edge[0] == a && o.edge[1] == b) || (o.edge[0] == b && o.edge[1] == a))
                .unwrap()
                .steps
        };
        assert_eq!(steps("a1", "a2"), Some(2));
        assert_eq!(steps("a2", "b0"), Some(2));
        assert_eq!(steps("a0", "b0"), Some(0));
        assert_eq!(steps("a0", "a1"), Some(1));
    }

    #[test]
    fn iib_counts() {
        let t = Tower::build(&iib(), 3).unwrap();
        let c: Vec<(usize, usize, usize)> = t.counts().iter().map(|c| (c.vertices, c.edges, c.faces)).collect();
        assert_eq!(c, vec![(3, 2, 1), (4, 4, 2), (6, 8, 4), (10, 16, 8)]);
    }

    #[test]
    fn iib_level_two_has_three_anchored_squares() {
        let t = Tower::build(&iib(), 2).unwrap();
        let g = t.level(2);
        let e0 = g.edge_between(vid(g, "a0"), vid(g, "b0")).unwrap();
        let r = shortest_cycles_through_edge(g, e0, 4);
        assert_eq!(r.shortest_len, Some(4));
        assert_eq!(r.shortest.len(), 3);
    }

    #[test]
    fn pullback_is_deterministic() {
        let a = Tower::build(&iib(), 4).unwrap();
        let b = pullback(&Tower::build(&iib(), 3).unwrap()).unwrap();
        assert_eq!(a.top().canonical_string(), b.top().canonical_string());
        assert_eq!(a.top().names(), b.top().names());
    }

    #[test]
    fn lifts_of_fixed_edge() {
        let t = Tower::build(&iib(), 1).unwrap();
        let g0 = t.level(0);
        let g1 = t.level(1);
        let path = [vid(g0, "a0"), vid(g0, "b0")];
        let from_b = lift_path(&t, 0, &path, vid(g1, "b0")).unwrap();
        assert_eq!(from_b, vec![vid(g1, "b0"), vid(g1, "a0")]);
        let from_a1 = lift_path(&t, 0, &path, vid(g1, "a1")).unwrap();
        assert_eq!(from_a1, vec![vid(g1, "a1"), vid(g1, "a0")]);
        let single = lift_path(&t, 0, &[vid(g0, "a1")], vid(g1, "a2")).unwrap();
        assert_eq!(single, vec![vid(g1, "a2")]);
        assert!(matches!(lift_path(&t, 0, &path, vid(g1, "a0")), Err(CoverError::NoLift(_))));
    }

    #[test]
    fn level_map_is_simplicial_and_saturated() {
        let t = Tower::build(&iib(), 4).unwrap();
        for k in 1..=4 {
            let g = t.level(k);
            let h = t.level(k - 1);
            let mut fiber = vec![0u32; h.vertex_count()];
            for v in g.vertices() {
                fiber[t.f(v).idx()] += t.local_degree(v);
                assert_eq!(g.degree(v), t.local_degree(v) as usize * h.degree(t.f(v)));
            }
            assert!(fiber.iter().all(|&s| s == 2));
            for e in g.edges() {
                let (u, v) = g.endpoints(e);
                assert!(h.adjacent(t.f(u), t.f(v)));
            }
        }
    }
}
