//! Apollonian circle packings by Descartes reflection and their contact graphs.

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plane_graph::{is_bipartite, Bipartition, PlaneGraph, VertexId};

/// Relative tolerance for tangency and deduplication.
pub const TOLERANCE: f64 = 1e-9;
/// Largest allowed distance of a curvature from an integer.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;
/// Circles generated before giving up.
pub const MAX_CIRCLES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PackingError {
    #[error("no real fourth curvature for ({0}, {1}, {2})")]
    NoRealSolution(f64, f64, f64),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("invalid root: {0}")]
    InvalidRoot(String),
    #[error("contact graph embedding failed: {0}")]
    EmbeddingFailure(String),
    #[error("packing is empty")]
    Empty,
    #[error("more than {MAX_CIRCLES} circles below the bound")]
    TooManyCircles,
}

impl PackingError {
    pub fn code(&self) -> &'static str {
        match self {
            PackingError::NoRealSolution(..) => "NoRealSolution",
            PackingError::DegenerateConfiguration(_) => "DegenerateConfiguration",
            PackingError::InvalidRoot(_) => "InvalidRoot",
            PackingError::EmbeddingFailure(_) => "EmbeddingFailure",
            PackingError::Empty => "Empty",
            PackingError::TooManyCircles => "TooManyCircles",
        }
    }
}

/// Circle with signed curvature; negative curvature encloses the others.
/// Zero curvature is a line `{z : Re(z * conj(normal)) = offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedCircle {
    pub curvature: f64,
    #[serde(with = "complex_pair")]
    pub center: Complex64,
    /// Unit normal of a line; zero for proper circles.
    #[serde(default, skip_serializing_if = "is_zero", with = "complex_pair")]
    pub normal: Complex64,
    #[serde(default, skip_serializing_if = "is_zero_f")]
    pub offset: f64,
}

fn is_zero(z: &Complex64) -> bool {
    *z == Complex64::new(0.0, 0.0)
}

fn is_zero_f(x: &f64) -> bool {
    *x == 0.0
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

impl OrientedCircle {
    pub fn new(curvature: f64, center: Complex64) -> OrientedCircle {
        OrientedCircle { curvature, center, normal: Complex64::new(0.0, 0.0), offset: 0.0 }
    }

    pub fn line(normal: Complex64, offset: f64) -> OrientedCircle {
        OrientedCircle { curvature: 0.0, center: Complex64::new(0.0, 0.0), normal: normal / normal.norm(), offset }
    }

    pub fn is_line(&self) -> bool {
        self.curvature == 0.0
    }

    pub fn radius(&self) -> f64 {
        1.0 / self.curvature.abs()
    }

    /// Radius with the sign of the curvature.
    pub fn signed_radius(&self) -> f64 {
        1.0 / self.curvature
    }

    /// Relative tangency defect with another proper circle.
    pub fn tangency_residual(&self, other: &OrientedCircle) -> f64 {
        let d = (self.center - other.center).norm();
        let want = (self.signed_radius() + other.signed_radius()).abs();
        (d - want).abs() / self.radius().max(other.radius())
    }
}

/// `(Σk)² − 2Σk²`, divided by `max(1, Σk²)`.
pub fn descartes_residual(k: [f64; 4]) -> f64 {
    let s: f64 = k.iter().sum();
    let q: f64 = k.iter().map(|x| x * x).sum();
    (s * s - 2.0 * q).abs() / q.max(1.0)
}

/// Both curvatures of a circle tangent to three mutually tangent circles.
pub fn descartes_fourth(k1: f64, k2: f64, k3: f64) -> Result<(f64, f64), PackingError> {
    let rad = k1 * k2 + k2 * k3 + k3 * k1;
    let scale = (k1 * k1 + k2 * k2 + k3 * k3).max(1.0);
    if rad < -TOLERANCE * scale {
        return Err(PackingError::NoRealSolution(k1, k2, k3));
    }
    let root = 2.0 * rad.max(0.0).sqrt();
    let s = k1 + k2 + k3;
    Ok((s + root, s - root))
}

/// Fourth circle tangent to three mutually tangent proper circles; `plus`
/// picks the larger curvature root.
pub fn solve_tangent_circle(
    c1: &OrientedCircle,
    c2: &OrientedCircle,
    c3: &OrientedCircle,
    plus: bool,
) -> Result<OrientedCircle, PackingError> {
    if c1.is_line() || c2.is_line() || c3.is_line() {
        return Err(PackingError::DegenerateConfiguration("lines are not supported here".into()));
    }
    for (x, y) in [(c1, c2), (c2, c3), (c1, c3)] {
        if x.tangency_residual(y) > 1e-6 {
            return Err(PackingError::DegenerateConfiguration("the three circles are not mutually tangent".into()));
        }
    }
    let (kp, km) = descartes_fourth(c1.curvature, c2.curvature, c3.curvature)?;
    let k4 = if plus { kp } else { km };
    if k4.abs() < TOLERANCE {
        return Err(PackingError::DegenerateConfiguration("fourth circle is a line".into()));
    }
    let w = [c1, c2, c3].map(|c| c.center * c.curvature);
    let s = w[0] + w[1] + w[2];
    let root = 2.0 * (w[0] * w[1] + w[1] * w[2] + w[2] * w[0]).sqrt();
    let mut best: Option<(f64, OrientedCircle)> = None;
    for cand in [s + root, s - root] {
        let c = OrientedCircle::new(k4, cand / k4);
        let r = [c1, c2, c3].iter().map(|x| c.tangency_residual(x)).fold(0.0, f64::max);
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, c));
        }
    }
    let (_, mut c) = best.unwrap();
    c.center = refine_center(c.center, k4, [c1, c2, c3]);
    let r = [c1, c2, c3].iter().map(|x| c.tangency_residual(x)).fold(0.0, f64::max);
    if r > 1e-6 {
        return Err(PackingError::DegenerateConfiguration(format!("tangency residual {r:e}")));
    }
    Ok(c)
}

/// Center of radius `1/k` at the right distance from all three circles,
/// starting from the estimate `z`.
fn refine_center(z: Complex64, k: f64, cs: [&OrientedCircle; 3]) -> Complex64 {
    let r = 1.0 / k;
    let want = cs.map(|c| (c.signed_radius() + r).abs());
    let worst = |p: Complex64| (0..3).map(|i| ((p - cs[i].center).norm() - want[i]).abs()).fold(0.0, f64::max);
    let mut best = z;
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let (p, q) = (cs[i].center, cs[j].center);
        let base = (q - p).norm();
        if base == 0.0 {
            continue;
        }
        let u = (q - p) / base;
        let x = (want[i] * want[i] - want[j] * want[j] + base * base) / (2.0 * base);
        let h = (want[i] * want[i] - x * x).max(0.0).sqrt();
        let foot = p + u * x;
        let n = u * Complex64::i();
        for cand in [foot + n * h, foot - n * h] {
            if (cand - z).norm() <= 1e-3 * want.iter().copied().fold(f64::MIN_POSITIVE, f64::max) && worst(cand) < worst(best) {
                best = cand;
            }
        }
    }
    // Gauss-Newton on the three distance equations
    for _ in 0..3 {
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..3 {
            let d = best - cs[i].center;
            let n = d.norm();
            if n == 0.0 {
                return best;
            }
            let (gx, gy) = (d.re / n, d.im / n);
            let res = n - want[i];
            a11 += gx * gx;
            a12 += gx * gy;
            a22 += gy * gy;
            b1 += gx * res;
            b2 += gy * res;
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-14 {
            break;
        }
        let step = Complex64::new((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det);
        let next = best - step;
        if worst(next) >= worst(best) {
            break;
        }
        best = next;
    }
    best
}

/// Places a Descartes quadruple of curvatures as circles: the first at the
/// origin, the second on the positive real axis, the third above it.
pub fn root_circles(k: [f64; 4]) -> Result<[OrientedCircle; 4], PackingError> {
    if k.iter().any(|&x| !x.is_finite() || x.abs() < TOLERANCE) {
        return Err(PackingError::InvalidRoot("curvatures must be finite and nonzero".into()));
    }
    if k.iter().filter(|&&x| x < 0.0).count() > 1 {
        return Err(PackingError::InvalidRoot("at most one enclosing circle".into()));
    }
    if descartes_residual(k) > TOLERANCE {
        return Err(PackingError::InvalidRoot(format!("{k:?} violates the Descartes relation")));
    }
    let r = k.map(|x| 1.0 / x);
    let d12 = (r[0] + r[1]).abs();
    let d13 = (r[0] + r[2]).abs();
    let d23 = (r[1] + r[2]).abs();
    let c1 = OrientedCircle::new(k[0], Complex64::new(0.0, 0.0));
    let c2 = OrientedCircle::new(k[1], Complex64::new(d12, 0.0));
    let x = (d12 * d12 + d13 * d13 - d23 * d23) / (2.0 * d12);
    let y2 = d13 * d13 - x * x;
    let y = if y2 <= 64.0 * f64::EPSILON * d13 * d13 { 0.0 } else { y2.sqrt() };
    let c3 = OrientedCircle::new(k[2], Complex64::new(x, y));
    let (kp, km) = descartes_fourth(k[0], k[1], k[2])?;
    let plus = (kp - k[3]).abs() <= (km - k[3]).abs();
    let c4 = solve_tangent_circle(&c1, &c2, &c3, plus)?;
    Ok([c1, c2, c3, c4])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CirclePacking {
    pub circles: Vec<OrientedCircle>,
    /// Index pairs `(i, j)`, `i < j`, tangent by construction.
    pub tangencies: Vec<(usize, usize)>,
    /// Every Descartes quadruple used during generation.
    pub quadruples: Vec<[usize; 4]>,
    pub root: Option<[f64; 4]>,
    pub curvature_bound: Option<f64>,
    /// Reflection generations below the bound.
    pub generations: usize,
}

impl CirclePacking {
    /// Packing from a given circle list; every tangency is audited.
    pub fn from_circles(circles: Vec<OrientedCircle>, tangencies: Vec<(usize, usize)>) -> Result<CirclePacking, PackingError> {
        if circles.is_empty() {
            return Err(PackingError::Empty);
        }
        let mut pairs = Vec::with_capacity(tangencies.len());
        for (i, j) in tangencies {
            if i == j || i >= circles.len() || j >= circles.len() {
                return Err(PackingError::DegenerateConfiguration(format!("bad tangency ({i}, {j})")));
            }
            let r = circles[i].tangency_residual(&circles[j]);
            if r > TOLERANCE {
                return Err(PackingError::DegenerateConfiguration(format!("circles {i} and {j} are not tangent ({r:e})")));
            }
            pairs.push((i.min(j), i.max(j)));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(CirclePacking { circles, tangencies: pairs, quadruples: Vec::new(), root: None, curvature_bound: None, generations: 0 })
    }

    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    pub fn max_descartes_residual(&self) -> f64 {
        self.quadruples
            .iter()
            .map(|q| descartes_residual(q.map(|i| self.circles[i].curvature)))
            .fold(0.0, f64::max)
    }

    pub fn max_tangency_residual(&self) -> f64 {
        self.tangencies
            .iter()
            .map(|&(i, j)| self.circles[i].tangency_residual(&self.circles[j]))
            .fold(0.0, f64::max)
    }

    pub fn max_integrality_residual(&self) -> f64 {
        self.circles.iter().map(|c| (c.curvature - c.curvature.round()).abs()).fold(0.0, f64::max)
    }
}

fn dedup_key(c: &OrientedCircle) -> (i64, i64, i64) {
    let q = |x: f64| (x / 1e-7).round() as i64;
    (q(c.curvature), q(c.center.re), q(c.center.im))
}

/// Breadth-first Apollonian generation from a root quadruple, keeping
/// circles with curvature at most `bound`.
pub fn generate_apollonian(root: [f64; 4], bound: f64) -> Result<CirclePacking, PackingError> {
    let start = root_circles(root)?;
    let mut circles: Vec<OrientedCircle> = Vec::new();
    let mut seen: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut tangencies = Vec::new();
    let mut quadruples = Vec::new();
    let mut ids = [0usize; 4];
    for (slot, c) in start.iter().enumerate() {
        ids[slot] = circles.len();
        seen.insert(dedup_key(c), circles.len());
        circles.push(*c);
    }
    for i in 0..4 {
        for j in i + 1..4 {
            tangencies.push((ids[i], ids[j]));
        }
    }
    quadruples.push(ids);
    if root.iter().any(|&k| k > bound) {
        return Err(PackingError::InvalidRoot(format!("root curvature above bound {bound}")));
    }
    // each entry: quadruple and the slot that must not be reflected back
    let mut queue: VecDeque<([usize; 4], Option<usize>, usize)> = VecDeque::new();
    queue.push_back((ids, None, 0));
    let mut generations = 0;
    while let Some((q, newest, depth)) = queue.pop_front() {
        for slot in 0..4 {
            if Some(slot) == newest {
                continue;
            }
            let others: Vec<usize> = (0..4).filter(|&s| s != slot).map(|s| q[s]).collect();
            let old = circles[q[slot]];
            let k: f64 = 2.0 * others.iter().map(|&i| circles[i].curvature).sum::<f64>() - old.curvature;
            if k > bound * (1.0 + TOLERANCE) {
                continue;
            }
            let w: Complex64 = others.iter().map(|&i| circles[i].center * circles[i].curvature).sum::<Complex64>() * 2.0
                - old.center * old.curvature;
            let k = k.round_if_close();
            let mut c = OrientedCircle::new(k, w / k);
            c.center = refine_center(c.center, k, [&circles[others[0]], &circles[others[1]], &circles[others[2]]]);
            let key = dedup_key(&c);
            if seen.contains_key(&key) {
                continue;
            }
            if circles.len() >= MAX_CIRCLES {
                return Err(PackingError::TooManyCircles);
            }
            let id = circles.len();
            seen.insert(key, id);
            circles.push(c);
            for &o in &others {
                tangencies.push((o.min(id), o.max(id)));
            }
            let mut next = q;
            next[slot] = id;
            quadruples.push(next);
            generations = generations.max(depth + 1);
            queue.push_back((next, Some(slot), depth + 1));
        }
    }
    tangencies.sort_unstable();
    tangencies.dedup();
    Ok(CirclePacking {
        circles,
        tangencies,
        quadruples,
        root: Some(root),
        curvature_bound: Some(bound),
        generations,
    })
}

trait RoundIfClose {
    fn round_if_close(self) -> f64;
}

impl RoundIfClose for f64 {
    /// Snaps to an integer within 1e-12 relative.
    fn round_if_close(self) -> f64 {
        let r = self.round();
        if (self - r).abs() <= 1e-12 * self.abs().max(1.0) {
            r
        } else {
            self
        }
    }
}

/// Plane contact graph: vertex `c{i}` per circle, rotations from the
/// angular order of tangency points. The enclosing circle sees its
/// neighbours from outside, so its order is reversed.
pub fn contact_graph_of_packing(p: &CirclePacking) -> Result<PlaneGraph, PackingError> {
    if p.circles.is_empty() {
        return Err(PackingError::Empty);
    }
    let n = p.circles.len();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in &p.tangencies {
        nbrs[i].push(j);
        nbrs[j].push(i);
    }
    let mut adjacency = Vec::with_capacity(n);
    for (i, list) in nbrs.iter_mut().enumerate() {
        let c = p.circles[i];
        let angle = |j: usize| {
            let d = p.circles[j].center - c.center;
            // an internally tangent circle touches on the far side of its offset
            let d = if p.circles[j].curvature < 0.0 { -d } else { d };
            d.im.atan2(d.re)
        };
        list.sort_by(|&x, &y| angle(x).total_cmp(&angle(y)));
        if c.curvature < 0.0 {
            list.reverse();
        }
        adjacency.push(list.iter().map(|&j| VertexId(j as u32)).collect());
    }
    let names = (0..n).map(|i| format!("c{i}")).collect();
    PlaneGraph::from_adjacency(names, adjacency).map_err(|e| PackingError::EmbeddingFailure(e.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackingCertificate {
    pub kind: String,
    pub root: Option<[f64; 4]>,
    pub curvature_bound: Option<f64>,
    pub circles: usize,
    pub edges: usize,
    pub faces: usize,
    pub simple: bool,
    pub planar: bool,
    pub bipartite: bool,
    pub triangle: Option<[String; 3]>,
    pub odd_cycle: Option<Vec<String>>,
    pub max_descartes_residual: f64,
    pub max_tangency_residual: f64,
    pub max_integrality_residual: f64,
}

/// A triangle through the lowest-numbered possible vertex.
pub fn find_triangle(g: &PlaneGraph) -> Option<[VertexId; 3]> {
    for u in g.vertices() {
        let ns = g.sorted_neighbors(u);
        for (x, &v) in ns.iter().enumerate() {
            if v < u {
                continue;
            }
            for &w in &ns[x + 1..] {
                if g.adjacent(v, w) {
                    return Some([u, v, w]);
                }
            }
        }
    }
    None
}

pub fn packing_certificate(p: &CirclePacking) -> Result<(PlaneGraph, PackingCertificate), PackingError> {
    let g = contact_graph_of_packing(p)?;
    let triangle = find_triangle(&g).map(|t| t.map(|v| g.name(v).to_string()));
    let (bipartite, odd_cycle) = match is_bipartite(&g) {
        Bipartition::Bipartite { .. } => (true, None),
        Bipartition::OddCycle { cycle } => (false, Some(cycle.iter().map(|&v| g.name(v).to_string()).collect())),
    };
    let cert = PackingCertificate {
        kind: "packing".into(),
        root: p.root,
        curvature_bound: p.curvature_bound,
        circles: p.circles.len(),
        edges: g.edge_count(),
        faces: g.face_count(),
        simple: true,
        planar: true,
        bipartite,
        triangle,
        odd_cycle,
        max_descartes_residual: p.max_descartes_residual(),
        max_tangency_residual: p.max_tangency_residual(),
        max_integrality_residual: p.max_integrality_residual(),
    };
    Ok((g, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn descartes_examples() {
        let (p, m) = descartes_fourth(-1.0, 2.0, 2.0).unwrap();
        assert!(close(p, 3.0) && close(m, 3.0));
        assert_eq!(descartes_fourth(2.0, 2.0, 3.0).unwrap(), (15.0, -1.0));
        let (p, m) = descartes_fourth(1.0, 1.0, 1.0).unwrap();
        assert!(close(p, 3.0 + 2.0 * 3f64.sqrt()) && close(m, 3.0 - 2.0 * 3f64.sqrt()));
        assert!(descartes_residual([1.0, 1.0, 1.0, p]) < 1e-12);
        assert!(matches!(descartes_fourth(-1.0, -1.0, 1.0), Err(PackingError::NoRealSolution(..))));
    }

    #[test]
    fn tangent_circle_in_unit_disk() {
        let outer = OrientedCircle::new(-1.0, Complex64::new(0.0, 0.0));
        let a = OrientedCircle::new(2.0, Complex64::new(0.5, 0.0));
        let b = OrientedCircle::new(2.0, Complex64::new(-0.5, 0.0));
        for plus in [true, false] {
            let c = solve_tangent_circle(&outer, &a, &b, plus).unwrap();
            assert!(close(c.curvature, 3.0));
            assert!(close(c.center.re, 0.0) && close(c.center.im.abs(), 2.0 / 3.0));
            assert!(close((a.center - c.center).norm(), 5.0 / 6.0));
        }
    }

    #[test]
    fn symmetric_triple_gives_centroid() {
        let r = 1.0;
        let pts: Vec<Complex64> = (0..3).map(|i| Complex64::from_polar(2.0 * r / 3f64.sqrt(), i as f64 * 2.0 * std::f64::consts::PI / 3.0)).collect();
        let cs: Vec<OrientedCircle> = pts.iter().map(|&z| OrientedCircle::new(1.0, z)).collect();
        for plus in [true, false] {
            let c = solve_tangent_circle(&cs[0], &cs[1], &cs[2], plus).unwrap();
            assert!(c.center.norm() < 1e-9);
            assert!(cs.iter().all(|x| c.tangency_residual(x) < TOLERANCE));
        }
    }

    #[test]
    fn stage_zero_packing() {
        let p = generate_apollonian([-1.0, 2.0, 2.0, 3.0], 3.0).unwrap();
        let mut ks: Vec<f64> = p.circles.iter().map(|c| c.curvature).collect();
        ks.sort_by(f64::total_cmp);
        assert_eq!(ks, vec![-1.0, 2.0, 2.0, 3.0, 3.0]);
        let (g, cert) = packing_certificate(&p).unwrap();
        assert!(!cert.bipartite);
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 9);
        let inner = |n: &str| p.circles[n[1..].parse::<usize>().unwrap()].curvature > 0.0;
        assert!(find_triangle(&g).is_some());
        let t = cert.triangle.unwrap();
        assert!(t.iter().filter(|n| inner(n)).count() >= 2);
    }

    #[test]
    fn integral_and_planar_to_bound_100() {
        let p = generate_apollonian([-1.0, 2.0, 2.0, 3.0], 100.0).unwrap();
        assert!(p.max_integrality_residual() < INTEGRALITY_TOLERANCE);
        assert!(p.max_descartes_residual() < 1e-9);
        assert!(p.max_tangency_residual() < TOLERANCE);
        let g = contact_graph_of_packing(&p).unwrap();
        assert_eq!(g.vertex_count() + g.face_count(), g.edge_count() + 2);
    }

    #[test]
    fn two_circles_make_one_edge() {
        let a = OrientedCircle::new(1.0, Complex64::new(0.0, 0.0));
        let b = OrientedCircle::new(1.0, Complex64::new(2.0, 0.0));
        let p = CirclePacking::from_circles(vec![a, b], vec![(0, 1)]).unwrap();
        let (g, cert) = packing_certificate(&p).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(cert.bipartite);
        assert!(cert.triangle.is_none());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_apollonian([-1.0, 2.0, 2.0, 3.0], 40.0).unwrap();
        let b = generate_apollonian([-1.0, 2.0, 2.0, 3.0], 40.0).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
