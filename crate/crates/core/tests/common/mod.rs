#![allow(dead_code)]

use std::collections::BTreeSet;

use gasket_lab::branched_cover::Tower;
use gasket_lab::per2::{bundled_cores, enumerate_small_cores};
use gasket_lab::plane_graph::{EdgeId, PlaneGraph, RotationTable, VertexId};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn graph(rows: &[(&str, &[&str])]) -> PlaneGraph {
    let vertices: Vec<&str> = rows.iter().map(|(v, _)| *v).collect();
    let table: RotationTable = rows
        .iter()
        .map(|(v, ns)| (v.to_string(), ns.iter().map(|s| s.to_string()).collect()))
        .collect();
    PlaneGraph::build(&vertices, &table).unwrap()
}

/// Plane graph from adjacency lists in counterclockwise order.
pub fn from_lists(adj: &[Vec<usize>]) -> PlaneGraph {
    let names = (0..adj.len()).map(|i| format!("v{i}")).collect();
    let lists = adj.iter().map(|l| l.iter().map(|&j| VertexId(j as u32)).collect()).collect();
    PlaneGraph::from_adjacency(names, lists).unwrap()
}

/// Random plane tree on `n` vertices with `chords` face-splitting edges added.
pub fn random_plane_graph(seed: u64, n: usize, chords: usize) -> PlaneGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n.max(1)];
    for i in 1..n {
        let p = rng.gen_range(0..i);
        let at = rng.gen_range(0..=adj[p].len());
        adj[p].insert(at, i);
        adj[i].push(p);
    }
    for _ in 0..chords {
        let g = from_lists(&adj);
        let faces = g.faces();
        if faces.is_empty() {
            break;
        }
        let walk = &faces[rng.gen_range(0..faces.len())];
        let m = walk.len();
        let mut options = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let (x, y) = (g.head(walk[i]), g.head(walk[j]));
                if x != y && !g.adjacent(x, y) {
                    options.push((i, j));
                }
            }
        }
        if options.is_empty() {
            continue;
        }
        let (i, j) = options[rng.gen_range(0..options.len())];
        // corner i sits after rev(walk[i]) in counterclockwise order
        let x = g.head(walk[i]).idx();
        let y = g.head(walk[j]).idx();
        let px = g.tail(walk[i]).idx();
        let py = g.tail(walk[j]).idx();
        let sx = adj[x].iter().position(|&w| w == px).unwrap();
        adj[x].insert(sx + 1, y);
        let sy = adj[y].iter().position(|&w| w == py).unwrap();
        adj[y].insert(sy + 1, x);
    }
    from_lists(&adj)
}

fn named() -> Vec<(String, PlaneGraph)> {
    let k4 = graph(&[("a", &["b", "c", "d"]), ("b", &["a", "d", "c"]), ("c", &["a", "b", "d"]), ("d", &["a", "c", "b"])]);
    let octa = graph(&[
        ("n", &["1", "2", "3", "4"]),
        ("s", &["4", "3", "2", "1"]),
        ("1", &["n", "4", "s", "2"]),
        ("2", &["n", "1", "s", "3"]),
        ("3", &["n", "2", "s", "4"]),
        ("4", &["n", "3", "s", "1"]),
    ]);
    let cube = graph(&[
        ("0", &["1", "3", "4"]),
        ("1", &["2", "0", "5"]),
        ("2", &["3", "1", "6"]),
        ("3", &["0", "2", "7"]),
        ("4", &["7", "5", "0"]),
        ("5", &["4", "6", "1"]),
        ("6", &["5", "7", "2"]),
        ("7", &["6", "4", "3"]),
    ]);
    let wheel = graph(&[
        ("h", &["1", "2", "3", "4", "5"]),
        ("1", &["h", "5", "2"]),
        ("2", &["h", "1", "3"]),
        ("3", &["h", "2", "4"]),
        ("4", &["h", "3", "5"]),
        ("5", &["h", "4", "1"]),
    ]);
    let prism = graph(&[
        ("a", &["b", "c", "x"]),
        ("b", &["c", "a", "y"]),
        ("c", &["a", "b", "z"]),
        ("x", &["z", "y", "a"]),
        ("y", &["x", "z", "b"]),
        ("z", &["y", "x", "c"]),
    ]);
    let (grid, _, _) = gasket_lab::anchored::grid_disk(2);
    vec![
        ("edge".into(), graph(&[("a", &["b"]), ("b", &["a"])])),
        ("triangle".into(), graph(&[("x", &["y", "z"]), ("y", &["z", "x"]), ("z", &["x", "y"])])),
        ("k4".into(), k4),
        ("octahedron".into(), octa),
        ("cube".into(), cube),
        ("wheel5".into(), wheel),
        ("prism".into(), prism),
        ("grid2".into(), grid),
    ]
}

/// Plane graphs with at most 12 edges: hand-built solids, tower levels of
/// the bundled and small enumerated cores, and seeded random graphs.
pub fn corpus() -> Vec<(String, PlaneGraph)> {
    let mut out = named();
    let mut push_tower = |name: &str, t: &Tower| {
        for k in 0..=t.depth() {
            let g = t.level(k);
            if g.edge_count() <= 12 {
                out.push((format!("{name}/G{k}"), g.clone()));
            }
        }
    };
    for (name, core) in bundled_cores() {
        push_tower(&name, &Tower::build(&core.spec, 2).unwrap());
    }
    for (i, e) in enumerate_small_cores(8).unwrap().iter().enumerate() {
        let spec = gasket_lab::branched_cover::CoreSpec::from_json(&e.core).unwrap();
        push_tower(&format!("enum{i}"), &Tower::build(&spec, 1).unwrap());
    }
    for seed in 0..40u64 {
        let n = 3 + (seed as usize % 8);
        let g = random_plane_graph(seed, n, (seed as usize * 7) % 6);
        if g.edge_count() <= 12 {
            out.push((format!("random{seed}"), g));
        }
    }
    out
}

/// Simple cycles through `e` with at most `max_len` edges, as edge sets,
/// found by testing every edge subset.
pub fn brute_cycles_through(g: &PlaneGraph, e: EdgeId, max_len: usize) -> BTreeSet<BTreeSet<EdgeId>> {
    let others: Vec<EdgeId> = g.edges().filter(|&x| x != e).collect();
    assert!(others.len() <= 20, "too many edges for subset enumeration");
    let mut found = BTreeSet::new();
    for mask in 0u32..(1u32 << others.len()) {
        let size = mask.count_ones() as usize + 1;
        if size < 3 || size > max_len {
            continue;
        }
        let mut set: BTreeSet<EdgeId> = (0..others.len()).filter(|i| mask >> i & 1 == 1).map(|i| others[i]).collect();
        set.insert(e);
        if is_single_cycle(g, &set) {
            found.insert(set);
        }
    }
    found
}

fn is_single_cycle(g: &PlaneGraph, set: &BTreeSet<EdgeId>) -> bool {
    let mut deg = vec![0usize; g.vertex_count()];
    for &x in set {
        let (a, b) = g.endpoints(x);
        deg[a.idx()] += 1;
        deg[b.idx()] += 1;
    }
    if deg.iter().any(|&d| d != 0 && d != 2) {
        return false;
    }
    // connected: walk from one edge
    let start = g.endpoints(*set.iter().next().unwrap()).0;
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in set {
            let (a, b) = g.endpoints(y);
            let other = if a == x { b } else if b == x { a } else { continue };
            if seen.insert(other) {
                stack.push(other);
            }
        }
    }
    seen.len() == deg.iter().filter(|&&d| d == 2).count()
}

/// Every simple path from `u` to `v` with at most `max_len` edges and no
/// chord between vertices two or more apart.
pub fn brute_local_geodesics(g: &PlaneGraph, u: VertexId, v: VertexId, max_len: usize) -> BTreeSet<Vec<VertexId>> {
    let mut all = Vec::new();
    let mut path = vec![u];
    fn walk(g: &PlaneGraph, v: VertexId, max_len: usize, path: &mut Vec<VertexId>, all: &mut Vec<Vec<VertexId>>) {
        let x = *path.last().unwrap();
        if x == v {
            all.push(path.clone());
            return;
        }
        if path.len() > max_len {
            return;
        }
        for w in g.neighbors(x).collect::<Vec<_>>() {
            if !path.contains(&w) {
                path.push(w);
                walk(g, v, max_len, path, all);
                path.pop();
            }
        }
    }
    walk(g, v, max_len, &mut path, &mut all);
    all.into_iter()
        .filter(|p| {
            (0..p.len()).all(|i| (i + 2..p.len()).all(|j| !g.adjacent(p[i], p[j])))
        })
        .collect()
}
