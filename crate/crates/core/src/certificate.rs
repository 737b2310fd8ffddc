//! Machine-readable summaries for a core and a packing, and their comparison.

use serde::{Deserialize, Serialize};

use crate::anchored::{
    gap_decomposition, gap_symmetry_test, r0_arc_search, shortest_anchored_cycles, sibling_report, AnchoredError,
    ArcReport, SiblingReport, SymmetryVerdict,
};
use crate::branched_cover::{LevelCounts, Tower, MAX_DEPTH};
use crate::packing::PackingCertificate;
use crate::per2::{classify_type, critical_loop, GasketType, Per2Core};
use crate::plane_graph::{girth, graph_distance, is_bipartite, Bipartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCount {
    pub depth: usize,
    pub count: usize,
    pub sibling_pairs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreCertificate {
    pub kind: String,
    pub core: String,
    pub degree: u32,
    pub gasket_type: GasketType,
    pub l: usize,
    pub q: usize,
    pub critical_loop: Vec<String>,
    pub depth: usize,
    pub fixed_edge: [String; 2],
    pub levels: Vec<LevelCounts>,
    pub girth: Option<usize>,
    pub critical_distance: usize,
    pub bipartite: bool,
    /// Whether the 2-coloring matches the classes by eventual image.
    pub classes_match_eventual_image: bool,
    pub bipartite_classes: Option<[Vec<String>; 2]>,
    pub odd_cycle: Option<Vec<String>>,
    pub anchored_cycles: Vec<CycleCount>,
    pub siblings: SiblingReport,
    /// Type I only, depths where `R0` exists.
    pub arcs: Vec<ArcReport>,
    pub symmetry: Vec<SymmetryVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
}

pub fn core_certificate(core: &Per2Core, depth: usize, deterministic: bool) -> Result<CoreCertificate, AnchoredError> {
    let ty = classify_type(core)?;
    let lp = critical_loop(core)?;
    let tower_depth = (depth + 1).min(MAX_DEPTH);
    let t = Tower::build(&core.spec, tower_depth.max(depth))?;
    let g = t.level(depth);
    let (a, b) = t.fixed;
    let (a0, c) = t.critical().expect("per2 cores name critical vertices");
    let critical_distance = graph_distance(g, a0, c).map_err(|e| AnchoredError::GapStructure(e.to_string()))?;
    let (bipartite, classes, odd_cycle, agree) = match is_bipartite(g) {
        Bipartition::Bipartite { color } => {
            let ev = t.eventual_image_classes(depth);
            let same = color.iter().zip(&ev).all(|(x, y)| x == y);
            let flipped = color.iter().zip(&ev).all(|(x, y)| *x != *y);
            let classes = Bipartition::Bipartite { color }.classes(g);
            (true, classes, None, same || flipped)
        }
        Bipartition::OddCycle { cycle } => {
            (false, None, Some(cycle.iter().map(|&v| g.name(v).to_string()).collect()), false)
        }
    };

    let mut anchored = Vec::new();
    let mut arcs = Vec::new();
    let mut symmetry = Vec::new();
    let mut last = None;
    for k in 1..=depth {
        let s = shortest_anchored_cycles(&t, core, k)?;
        anchored.push(CycleCount { depth: k, count: s.len(), sibling_pairs: s.siblings.len() });
        if ty == GasketType::I && s.len() >= 2 {
            let gaps = gap_decomposition(&t, &s)?;
            symmetry.push(gap_symmetry_test(&t, &gaps)?);
            if k < t.depth() {
                let mut r = r0_arc_search(&t, core, &gaps, None)?;
                if let Some(prev) = arcs.last() {
                    let prev: &ArcReport = prev;
                    r.stabilized = prev.depth + 1 == k && prev.n == r.n && prev.k == r.k && r.n.is_some() && r.k.is_some();
                }
                arcs.push(r);
            }
        }
        last = Some(s);
    }
    let siblings = sibling_report(&last.expect("depth at least one"), ty);
    let generated_unix = (!deterministic).then(|| {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    });
    Ok(CoreCertificate {
        kind: "core".into(),
        core: core.name().to_string(),
        degree: core.spec.degree,
        gasket_type: ty,
        l: lp.l,
        q: core.q,
        critical_loop: lp.names(core.g1()),
        depth,
        fixed_edge: [g.name(a).to_string(), g.name(b).to_string()],
        levels: t.counts().into_iter().take(depth + 1).collect(),
        girth: girth(g),
        critical_distance,
        bipartite,
        classes_match_eventual_image: agree,
        bipartite_classes: classes,
        odd_cycle,
        anchored_cycles: anchored,
        siblings,
        arcs,
        symmetry,
        generated_unix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub core: String,
    pub gasket_type: GasketType,
    pub depth: usize,
    pub fatou_bipartite: bool,
    pub packing_bipartite: bool,
    pub triangle: Option<[String; 3]>,
    pub equivalent_possible: bool,
    pub verdict: String,
    pub note: String,
}

pub const NON_EQUIVALENT: &str = "non-equivalent: bipartite vs odd cycle";

pub fn compare(core: &CoreCertificate, packing: &PackingCertificate) -> Comparison {
    let (possible, verdict) = match (core.bipartite, packing.bipartite) {
        (true, false) => (false, NON_EQUIVALENT.to_string()),
        (true, true) => (true, "inconclusive: both contact graphs are bipartite".to_string()),
        (false, _) => (true, "inconclusive: the Fatou graph truncation is not bipartite".to_string()),
    };
    let pattern = match core.gasket_type {
        GasketType::I => "no sibling pairs",
        GasketType::IIA => "one sibling pair through the critical loop",
        GasketType::IIB => "a sibling chain through the critical loop",
    };
    let note = format!(
        "Type {} core `{}` at depth {}: {} shortest anchored cycles of length {}, {}; \
         every cycle in a bipartite graph is even, while the packing's contact graph has {}",
        core.gasket_type,
        core.core,
        core.depth,
        core.anchored_cycles.last().map_or(0, |c| c.count),
        2 * core.l,
        pattern,
        match &packing.triangle {
            Some(t) => format!("the triangle {}-{}-{}", t[0], t[1], t[2]),
            None => "no triangle".to_string(),
        }
    );
    Comparison {
        core: core.core.clone(),
        gasket_type: core.gasket_type,
        depth: core.depth,
        fatou_bipartite: core.bipartite,
        packing_bipartite: packing.bipartite,
        triangle: packing.triangle.clone(),
        equivalent_possible: possible,
        verdict,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{generate_apollonian, packing_certificate};
    use crate::per2::bundled_core;

    #[test]
    fn iib_certificate_at_depth_three() {
        let core = bundled_core("iib_l2").unwrap();
        let cert = core_certificate(&core, 3, true).unwrap();
        assert_eq!(cert.gasket_type, GasketType::IIB);
        assert_eq!(cert.l, 2);
        assert!(cert.bipartite && cert.classes_match_eventual_image);
        assert_eq!(cert.anchored_cycles.iter().map(|c| c.count).collect::<Vec<_>>(), vec![1, 3, 5]);
        assert!(cert.generated_unix.is_none());
        assert!(cert.arcs.is_empty() && cert.symmetry.is_empty());
    }

    #[test]
    fn compare_reports_odd_cycle() {
        let core = bundled_core("typeI_min").unwrap();
        let cert = core_certificate(&core, 4, true).unwrap();
        let p = generate_apollonian([-1.0, 2.0, 2.0, 3.0], 10.0).unwrap();
        let (_, pc) = packing_certificate(&p).unwrap();
        let c = compare(&cert, &pc);
        assert_eq!(c.verdict, NON_EQUIVALENT);
        assert!(!c.equivalent_possible);
    }
}
