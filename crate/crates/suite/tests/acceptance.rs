#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use gasket_lab::anchored::{
    disk_symmetry, grid_disk, local_geodesics, r0_arc_series, shortest_anchored_cycles, sibling_report, symmetry_series,
};
use gasket_lab::branched_cover::{lifts_of_path, CoreJson, CoreSpec, Tower};
use gasket_lab::packing::{generate_apollonian, packing_certificate, INTEGRALITY_TOLERANCE, TOLERANCE};
use gasket_lab::per2::{bundled_core, bundled_core_json, bundled_cores, classify_type, critical_loop, enumerate_small_cores, GasketType};
use gasket_lab::plane_graph::{
    cycles_through_edge, girth, graph_distance, is_bipartite, shortest_cycles_through_edge, Bipartition, EdgeId,
    PlaneGraph, VertexId,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn count_recursions() -> Outcome {
    for (name, core) in bundled_cores() {
        let t = Tower::build(&core.spec, 10).map_err(|e| e.to_string())?;
        let c = t.counts();
        for (k, l) in c.iter().enumerate() {
            ensure(l.vertices + l.faces == l.edges + 2, || format!("{name}: Euler fails at level {k}"))?;
        }
        for k in 1..10 {
            let (a, b) = (&c[k], &c[k + 1]);
            ensure(
                b.edges == 2 * a.edges && b.vertices == 2 * a.vertices - 2 && b.faces == 2 * a.faces,
                || format!("{name}: recursion fails from level {k}: {a:?} -> {b:?}"),
            )?;
        }
    }
    Ok("Euler and doubling hold for k = 1..10 on all bundled cores".into())
}

fn fixed_edge_absorption_bipartite() -> Outcome {
    let mut worst = Vec::new();
    let mut failures = Vec::new();
    for (name, core) in bundled_cores() {
        let bound = core.g1().edge_count();
        let t = Tower::build(&core.spec, 10).map_err(|e| e.to_string())?;
        let mut max_steps = Vec::new();
        for k in 1..=10 {
            let fixed = t.fixed_edges(k).len();
            ensure(fixed == 1, || format!("{name}: level {k} has {fixed} fixed edges"))?;
            let ev = t.eventual_image_classes(k);
            match is_bipartite(t.level(k)) {
                Bipartition::Bipartite { color } => {
                    let same = color.iter().zip(&ev).all(|(x, y)| x == y);
                    let flip = color.iter().zip(&ev).all(|(x, y)| x != y);
                    ensure(same || flip, || format!("{name}: level {k} coloring disagrees with eventual images"))?;
                }
                Bipartition::OddCycle { .. } => return Err(format!("{name}: level {k} is not bipartite")),
            }
            let steps = t.absorption_steps(k, 4 * t.level(k).edge_count());
            let m = steps.iter().map(|s| s.unwrap_or(usize::MAX)).max().unwrap_or(0);
            max_steps.push(m);
            if m > bound {
                failures.push(format!("{name} level {k}: {m} steps > |E(G1)| = {bound}"));
            }
        }
        worst.push(format!("{name} max steps by level {max_steps:?}"));
    }
    if failures.is_empty() {
        Ok(format!("one fixed edge, bipartite by eventual image, absorption within |E(G1)|; {}", worst.join("; ")))
    } else {
        Err(format!(
            "fixed edge and bipartition hold at every level, but the absorption bound fails ({} cases, first: {}); {}",
            failures.len(),
            failures[0],
            worst.join("; ")
        ))
    }
}

fn girth_and_distance() -> Outcome {
    for (name, core) in bundled_cores() {
        let l = critical_loop(&core).map_err(|e| e.to_string())?.l;
        let t = Tower::build(&core.spec, 6).map_err(|e| e.to_string())?;
        let (a0, c) = t.critical().ok_or("no critical vertices")?;
        for k in 1..=6 {
            let g = girth(t.level(k));
            ensure(g == Some(2 * l), || format!("{name} level {k}: girth {g:?}, want {}", 2 * l))?;
            let d = graph_distance(t.level(k), a0, c).map_err(|e| e.to_string())?;
            ensure(d == l, || format!("{name} level {k}: distance {d}, want {l}"))?;
        }
    }
    Ok("girth 2l and distance l for k = 1..6".into())
}

fn anchored_cycles() -> Outcome {
    let iib = bundled_core("iib_l2").ok_or("missing iib_l2")?;
    let t = Tower::build(&iib.spec, 3).map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for k in 1..=3 {
        let s = shortest_anchored_cycles(&t, &iib, k).map_err(|e| e.to_string())?;
        ensure(s.cycles.iter().all(|c| c.iterate <= k), || format!("iib_l2 depth {k}: iterate above depth"))?;
        let r = sibling_report(&s, GasketType::IIB);
        ensure(r.verdict_ok, || format!("iib_l2 depth {k}: {}", r.violation.clone().unwrap_or_default()))?;
        if s.len() > 1 {
            ensure(s.sibling_count(0) == 2, || format!("iib_l2 depth {k}: loop has {} siblings", s.sibling_count(0)))?;
        }
        counts.push(s.len());
    }
    ensure(counts == [1, 3, 5], || format!("iib_l2 counts {counts:?}, want [1, 3, 5]"))?;
    for (name, want_pairs) in [("typeI_min", 0usize), ("typeIIA_min", 1)] {
        let core = bundled_core(name).ok_or("missing core")?;
        let ty = classify_type(&core).map_err(|e| e.to_string())?;
        let t = Tower::build(&core.spec, 5).map_err(|e| e.to_string())?;
        for k in 3..=5 {
            let s = shortest_anchored_cycles(&t, &core, k).map_err(|e| e.to_string())?;
            ensure(s.siblings.len() == want_pairs, || format!("{name} depth {k}: {} sibling pairs", s.siblings.len()))?;
            ensure(s.siblings.iter().all(|&(i, j)| i == 0 || j == 0), || format!("{name} depth {k}: pair misses the loop"))?;
            let r = sibling_report(&s, ty);
            ensure(r.verdict_ok, || format!("{name} depth {k}: {}", r.violation.clone().unwrap_or_default()))?;
        }
    }
    Ok(format!("iib_l2 counts {counts:?}; typeI_min 0 pairs and typeIIA_min 1 pair at depths 3..5"))
}

fn arc_bound() -> Outcome {
    let core = bundled_core("typeI_min").ok_or("missing typeI_min")?;
    let l = critical_loop(&core).map_err(|e| e.to_string())?.l;
    let series = r0_arc_series(&core, &[2, 3, 4, 5, 6]).map_err(|e| e.to_string())?;
    let mut seen = Vec::new();
    for r in &series {
        if let (true, Some(n), Some(k)) = (r.stabilized, r.n, r.k) {
            ensure(n < k + 2 * l, || format!("depth {}: N = {n} > K + 2l - 1 = {}", r.depth, k + 2 * l - 1))?;
            seen.push(format!("depth {} N={n} K={k}", r.depth));
        }
    }
    ensure(!seen.is_empty(), || "no stabilized depth with both N and K".to_string())?;
    Ok(seen.join(", "))
}

fn gap_symmetry() -> Outcome {
    let core = bundled_core("typeI_min").ok_or("missing typeI_min")?;
    let (verdicts, _) = symmetry_series(&core, &[3, 4, 5]).map_err(|e| e.to_string())?;
    for v in &verdicts {
        ensure(!v.symmetric, || format!("depth {}: symmetry found", v.depth))?;
        ensure(v.caveat.is_none(), || format!("depth {}: {}", v.depth, v.caveat.clone().unwrap_or_default()))?;
    }
    let (g, arc0, arc1) = grid_disk(3);
    ensure(disk_symmetry(&g, &arc0, &arc1).is_some(), || "grid control has no witness".to_string())?;
    let sizes: Vec<usize> = verdicts.iter().map(|v| v.interior_vertices).collect();
    Ok(format!("no symmetry at depths 3..5 (interior vertices {sizes:?}); grid control has a witness"))
}

fn cli(args: &[&str]) -> gasket_lab_cli::Execution {
    let mut full = vec!["gasket-lab"];
    full.extend_from_slice(args);
    gasket_lab_cli::execute(full)
}

fn apollonian_certificate() -> Outcome {
    let p = generate_apollonian([-1.0, 2.0, 2.0, 3.0], 100.0).map_err(|e| e.to_string())?;
    let (dr, tr, ir) = (p.max_descartes_residual(), p.max_tangency_residual(), p.max_integrality_residual());
    ensure(dr < TOLERANCE, || format!("Descartes residual {dr:e}"))?;
    ensure(tr < TOLERANCE, || format!("tangency residual {tr:e}"))?;
    ensure(ir < INTEGRALITY_TOLERANCE, || format!("integrality residual {ir:e}"))?;
    let (_, cert) = packing_certificate(&p).map_err(|e| e.to_string())?;
    ensure(cert.simple && cert.planar, || "contact graph not simple and planar".to_string())?;
    let tri = cert.triangle.clone().ok_or("no 3-cycle")?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let packing = dir.path().join("packing.json");
    let packing = packing.to_str().unwrap();
    let run = cli(&["apollonian", "--root", "-1,2,2,3", "--bound", "100", "-o", packing]);
    ensure(run.status == 0, || format!("apollonian exited {}: {}", run.status, run.stderr))?;
    for name in gasket_lab::per2::bundled_core_names() {
        let core = dir.path().join(format!("{name}.core.json"));
        std::fs::write(&core, bundled_core_json(name).unwrap()).map_err(|e| e.to_string())?;
        let cert = dir.path().join(format!("{name}.cert.json"));
        let run = cli(&["certify", core.to_str().unwrap(), "--depth", "3", "--deterministic", "-o", cert.to_str().unwrap()]);
        ensure(cert.exists(), || format!("certify {name} exited {}: {}", run.status, run.stderr))?;
        let run = cli(&["compare", cert.to_str().unwrap(), packing]);
        let first = run.stdout.lines().next().unwrap_or("");
        ensure(first == "non-equivalent: bipartite vs odd cycle", || format!("compare {name}: `{first}`"))?;
    }
    Ok(format!(
        "{} circles, {} tangencies, triangle {}-{}-{}, residuals {dr:.1e} / {tr:.1e} / {ir:.1e}",
        cert.circles, cert.edges, tri[0], tri[1], tri[2]
    ))
}

fn edge_sets(cs: &[gasket_lab::plane_graph::EmbeddedCycle]) -> BTreeSet<BTreeSet<EdgeId>> {
    cs.iter().map(|c| c.edges().iter().copied().collect()).collect()
}

fn check_graph(name: &str, g: &PlaneGraph) -> Result<(), String> {
    let m = g.edge_count();
    for e in g.edges() {
        let brute = common::brute_cycles_through(g, e, m);
        ensure(edge_sets(&cycles_through_edge(g, e, m)) == brute, || format!("{name}: cycles through {e:?}"))?;
        let min = brute.iter().map(|s| s.len()).min();
        let want: BTreeSet<_> = brute.iter().filter(|s| Some(s.len()) == min).cloned().collect();
        let fast = shortest_cycles_through_edge(g, e, m);
        ensure(fast.shortest_len == min && edge_sets(&fast.shortest) == want, || format!("{name}: shortest through {e:?}"))?;
    }
    for u in g.vertices() {
        for v in g.vertices().filter(|&v| v != u) {
            let fast: BTreeSet<_> = local_geodesics(g, u, v, 6).map_err(|e| e.to_string())?.into_iter().collect();
            ensure(fast == common::brute_local_geodesics(g, u, v, 6), || format!("{name}: geodesics {u:?} -> {v:?}"))?;
        }
    }
    Ok(())
}

fn simple_paths(g: &PlaneGraph, max_edges: usize) -> Vec<Vec<VertexId>> {
    let mut layer: Vec<Vec<VertexId>> = g.vertices().map(|v| vec![v]).collect();
    let mut all = layer.clone();
    for _ in 0..max_edges {
        let mut next = Vec::new();
        for p in &layer {
            for w in g.neighbors(*p.last().unwrap()) {
                if !p.contains(&w) {
                    let mut q = p.clone();
                    q.push(w);
                    next.push(q);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

fn oracle_equivalence() -> Outcome {
    let corpus = common::corpus();
    for (name, g) in &corpus {
        check_graph(name, g)?;
    }
    let mut checked = 0usize;
    for (name, core) in bundled_cores() {
        let t = Tower::build(&core.spec, 4).map_err(|e| e.to_string())?;
        for k in 0..4 {
            let up = t.level(k + 1);
            for p in simple_paths(t.level(k), 6) {
                for start in up.vertices().filter(|&x| t.f(x) == p[0]) {
                    let lifts = lifts_of_path(&t, k, &p, start).map_err(|e| format!("{name} level {k}: {e}"))?;
                    ensure(!lifts.is_empty(), || format!("{name} level {k}: path without lift"))?;
                    for l in &lifts {
                        let down: Vec<VertexId> = l.iter().map(|&x| t.f(x)).collect();
                        ensure(down == p, || format!("{name} level {k}: lift does not project back"))?;
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{} corpus graphs match brute force; {checked} path lifts project back", corpus.len()))
}

fn enumerator() -> Outcome {
    let iib: CoreJson = serde_json::from_str(bundled_core_json("iib_l2").unwrap()).map_err(|e| e.to_string())?;
    let want = CoreSpec::from_json(&iib).map_err(|e| e.to_string())?;
    let found = enumerate_small_cores(4).map_err(|e| e.to_string())?;
    let hit = found.iter().any(|e| {
        CoreSpec::from_json(&e.core).is_ok_and(|s| {
            s.g0.canonical_string() == want.g0.canonical_string()
                && s.g1.canonical_string() == want.g1.canonical_string()
                && e.core.vertex_map == iib.vertex_map
        })
    });
    ensure(hit, || "iib_l2 not among enumerated cores".to_string())?;
    ensure(found.iter().all(|e| e.gasket_type != GasketType::I), || "a Type I core has at most 4 vertices".to_string())?;
    Ok(format!("{} core(s) with |V(G1)| <= 4, iib_l2 among them, none of Type I", found.len()))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("count recursions and Euler", 10, count_recursions),
        ("fixed edge, absorption, bipartition", 10, fixed_edge_absorption_bipartite),
        ("girth and critical distance", 60, girth_and_distance),
        ("anchored cycles and siblings", 60, anchored_cycles),
        ("R0 arc bound", 60, arc_bound),
        ("gap symmetry", 120, gap_symmetry),
        ("Apollonian certificate and compare", 30, apollonian_certificate),
        ("oracle equivalence", 120, oracle_equivalence),
        ("enumerator sanity", 60, enumerator),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > Duration::from_secs(limit) => Err(format!("took {took:.2?}, limit {limit} s")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {}. {name} [{took:.2?}]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name} [{took:.2?}]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
