use std::collections::BTreeSet;

use gasket_lab::anchored::{
    critical_loop_in_tower, disk_symmetry, gap_decomposition, gap_symmetry_test, grid_disk, local_geodesics,
    r0_arc_search, r0_arc_series, shortest_anchored_cycles, sibling_report, symmetry_series, AnchoredError,
};
use gasket_lab::branched_cover::Tower;
use gasket_lab::per2::{bundled_core, bundled_cores, classify_type, GasketType};
use gasket_lab::plane_graph::{embedded_automorphisms, VertexId};

fn cycle_names(t: &Tower, k: usize, name: &str) -> Vec<BTreeSet<String>> {
    let core = bundled_core(name).unwrap();
    let g = t.level(k);
    shortest_anchored_cycles(t, &core, k)
        .unwrap()
        .cycles
        .iter()
        .map(|c| c.cycle.names(g).into_iter().collect())
        .collect()
}

#[test]
fn iib_cycle_counts() {
    let core = bundled_core("iib_l2").unwrap();
    let t = Tower::build(&core.spec, 3).unwrap();
    let counts: Vec<usize> = (1..=3).map(|k| shortest_anchored_cycles(&t, &core, k).unwrap().len()).collect();
    assert_eq!(counts, vec![1, 3, 5]);
}

#[test]
fn anchored_sets_grow_and_persist() {
    for (name, core) in bundled_cores() {
        let t = Tower::build(&core.spec, 5).unwrap();
        for k in 1..5 {
            let lo: BTreeSet<_> = cycle_names(&t, k, &name).into_iter().collect();
            let hi: BTreeSet<_> = cycle_names(&t, k + 1, &name).into_iter().collect();
            assert!(lo.is_subset(&hi), "{name} depth {k}");
            let s = shortest_anchored_cycles(&t, &core, k).unwrap();
            assert!(s.cycles.iter().all(|c| c.iterate < k.max(1)), "{name}");
            assert!(s.cycles.iter().all(|c| c.cycle.len() == 2 * s.l));
        }
    }
}

#[test]
fn sibling_patterns_for_type_i_and_iia() {
    for name in ["typeI_min", "typeIIA_min"] {
        let core = bundled_core(name).unwrap();
        let ty = classify_type(&core).unwrap();
        let t = Tower::build(&core.spec, 5).unwrap();
        for k in 3..=5 {
            let s = shortest_anchored_cycles(&t, &core, k).unwrap();
            let r = sibling_report(&s, ty);
            assert!(r.verdict_ok, "{name} depth {k}: {:?}", r.violation);
            match ty {
                GasketType::I => assert!(s.siblings.is_empty()),
                GasketType::IIA => assert_eq!(s.siblings, vec![(0, 1)]),
                GasketType::IIB => unreachable!(),
            }
        }
    }
}

#[test]
fn iib_siblings_form_a_chain() {
    let core = bundled_core("iib_l2").unwrap();
    let t = Tower::build(&core.spec, 5).unwrap();
    let s2 = shortest_anchored_cycles(&t, &core, 2).unwrap();
    assert_eq!(s2.sibling_count(0), 2);
    let r3 = sibling_report(&shortest_anchored_cycles(&t, &core, 3).unwrap(), GasketType::IIB);
    assert!(r3.verdict_ok);
    for k in 4..=5 {
        let s = shortest_anchored_cycles(&t, &core, k).unwrap();
        assert_eq!(s.sibling_count(0), 2);
        let near = s.siblings_of(0);
        for &i in &near {
            assert_eq!(s.sibling_count(i), 3, "depth {k}");
        }
        // beyond the loop and its two siblings, pullbacks on each side form a path
        for i in 1..s.len() {
            if near.contains(&i) {
                continue;
            }
            let want = if s.cycles[i].iterate == k - 1 { 1 } else { 2 };
            assert_eq!(s.sibling_count(i), want, "depth {k} cycle {i}");
        }
        let r = sibling_report(&s, GasketType::IIB);
        assert!(!r.verdict_ok);
        assert!(r.violation.is_some());
    }
}

#[test]
fn type_ii_symmetries_fix_the_critical_loop() {
    for name in ["iib_l2", "typeIIA_min"] {
        let core = bundled_core(name).unwrap();
        let t = Tower::build(&core.spec, 4).unwrap();
        let (loop_seq, _) = critical_loop_in_tower(&t, &core).unwrap();
        let loop_set: BTreeSet<VertexId> = loop_seq.iter().copied().collect();
        let (a, b) = t.fixed;
        for k in 1..=4 {
            let g = t.level(k);
            for pins in [[(a, a), (b, b)], [(a, b), (b, a)]] {
                for m in embedded_automorphisms(g, &pins) {
                    let image: BTreeSet<VertexId> = loop_seq.iter().map(|v| m[v.idx()]).collect();
                    assert_eq!(image, loop_set, "{name} depth {k}");
                }
            }
        }
    }
}

#[test]
fn gaps_of_type_i() {
    let core = bundled_core("typeI_min").unwrap();
    let t = Tower::build(&core.spec, 5).unwrap();
    let (a, b) = t.fixed;
    for k in 2..=5 {
        let s = shortest_anchored_cycles(&t, &core, k).unwrap();
        let gaps = gap_decomposition(&t, &s).unwrap();
        assert_eq!(gaps.gaps.len(), gaps.union_faces);
        // union of cycles sharing only the fixed edge: V = 2 + |s|(2l - 2), E = 1 + |s|(2l - 1)
        let (n, l) = (s.len(), s.l);
        assert_eq!(gaps.union_faces, (1 + n * (2 * l - 1)) + 2 - (2 + n * (2 * l - 2)));
        assert_eq!(gaps.union_faces, n + 1);
        let g = t.level(k);
        let mut owned = 0;
        let mut labels = BTreeSet::new();
        for gap in &gaps.gaps {
            assert!(gap.vertices.contains(&a) && gap.vertices.contains(&b));
            owned += gap.faces.len();
            labels.insert(gap.label);
        }
        assert_eq!(owned, g.face_count());
        let all: BTreeSet<_> = gaps.gaps.iter().flat_map(|x| x.faces.iter().copied()).collect();
        assert_eq!(all.len(), g.face_count());
        assert!(labels.contains(&0));
        let lo = *labels.iter().next().unwrap();
        assert_eq!(labels, (lo..lo + labels.len() as i64).collect());
        assert_eq!(gaps.gaps.iter().filter(|x| x.open).count(), 2);
        assert!(!gaps.r0().open);
    }
    let s = shortest_anchored_cycles(&t, &core, 2).unwrap();
    let gaps = gap_decomposition(&t, &s).unwrap();
    assert_eq!(gaps.r0().bounding_cycles, vec![0, gaps.c1]);
    assert_eq!(gaps.gaps.len(), 3);
}

#[test]
fn one_cycle_is_not_enough() {
    let core = bundled_core("typeI_min").unwrap();
    let t = Tower::build(&core.spec, 1).unwrap();
    let s = shortest_anchored_cycles(&t, &core, 1).unwrap();
    assert!(s.siblings.is_empty());
    assert!(matches!(gap_decomposition(&t, &s), Err(AnchoredError::NotEnoughCycles(1))));
}

#[test]
fn arcs_of_type_i() {
    let core = bundled_core("typeI_min").unwrap();
    let series = r0_arc_series(&core, &[2, 3, 4, 5, 6]).unwrap();
    let by_depth: Vec<(usize, Option<usize>, Option<usize>, bool)> =
        series.iter().map(|r| (r.depth, r.n, r.k, r.stabilized)).collect();
    assert_eq!(
        by_depth,
        vec![
            (2, None, None, false),
            (3, None, None, false),
            (4, Some(4), Some(2), false),
            (5, Some(4), Some(2), true),
            (6, Some(4), Some(2), true),
        ]
    );
    for r in &series {
        if let (Some(n), Some(k)) = (r.n, r.k) {
            assert_eq!(r.bound_holds, Some(n <= k + 3));
        }
    }
}

#[test]
fn arc_witnesses_are_valid() {
    let core = bundled_core("typeI_min").unwrap();
    let t = Tower::build(&core.spec, 5).unwrap();
    let s = shortest_anchored_cycles(&t, &core, 4).unwrap();
    let gaps = gap_decomposition(&t, &s).unwrap();
    let r = r0_arc_search(&t, &core, &gaps, None).unwrap();
    let g = t.level(4);
    let ids = |names: &[String]| names.iter().map(|n| g.vertex(n).unwrap()).collect::<Vec<_>>();
    let kw = ids(r.k_witness.as_ref().unwrap());
    let paths = local_geodesics(g, kw[0], *kw.last().unwrap(), kw.len() - 1).unwrap();
    assert!(paths.contains(&kw));
    let nw = ids(r.n_witness.as_ref().unwrap());
    assert_eq!(g.name(*nw.last().unwrap()), "a0");
    let up = t.level(5);
    let lift = r.lift_witness.as_ref().unwrap();
    assert_eq!(lift.last().unwrap(), "a1");
    let projected: Vec<String> = lift.iter().map(|n| g.name(t.f(up.vertex(n).unwrap())).to_string()).collect();
    assert_eq!(&projected, r.n_witness.as_ref().unwrap());
}

#[test]
fn arcs_need_type_i() {
    let core = bundled_core("iib_l2").unwrap();
    assert!(matches!(r0_arc_series(&core, &[3]), Err(AnchoredError::NotTypeI(GasketType::IIB))));
}

#[test]
fn no_gap_symmetry_for_type_i() {
    let core = bundled_core("typeI_min").unwrap();
    let (verdicts, changed) = symmetry_series(&core, &[2, 3, 4, 5]).unwrap();
    assert!(!changed);
    assert!(verdicts.iter().all(|v| !v.symmetric && v.witness.is_none()));
    assert!(verdicts.iter().all(|v| v.interior_vertices > 0 && v.caveat.is_none()));
}

#[test]
fn grid_control_has_a_witness() {
    for n in 1..=5 {
        let (g, arc0, arc1) = grid_disk(n);
        let m = disk_symmetry(&g, &arc0, &arc1).expect("planted half-turn");
        assert_eq!(m[arc0[0].idx()], *arc1.last().unwrap());
        assert_eq!(m[arc1.last().unwrap().idx()], arc0[0]);
    }
}

#[test]
fn symmetry_report_names_the_depth() {
    let core = bundled_core("typeI_min").unwrap();
    let t = Tower::build(&core.spec, 3).unwrap();
    let s = shortest_anchored_cycles(&t, &core, 3).unwrap();
    let v = gap_symmetry_test(&t, &gap_decomposition(&t, &s).unwrap()).unwrap();
    assert_eq!(v.depth, 3);
    assert!(!v.symmetric);
}
