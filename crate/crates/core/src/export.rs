//! Output formats, looked up by name.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::packing::CirclePacking;
use crate::plane_graph::{bfs_distances, DotStyle, PlaneGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("unknown format `{0}` (known: {1})")]
    UnknownFormat(String, String),
    #[error("format `{0}` cannot render {1}")]
    Unsupported(&'static str, &'static str),
}

impl ExportError {
    pub fn code(&self) -> &'static str {
        match self {
            ExportError::UnknownFormat(..) => "UnknownFormat",
            ExportError::Unsupported(..) => "UnsupportedFormat",
        }
    }
}

/// Something that can be written out.
pub enum Artifact<'a> {
    /// One level of a tower, with optional coloring and map to the level below.
    Level {
        graph: &'a PlaneGraph,
        style: DotStyle<'a>,
        images: Option<&'a BTreeMap<String, String>>,
    },
    Packing {
        packing: &'a CirclePacking,
        contact: &'a PlaneGraph,
    },
    Report(&'a serde_json::Value),
}

impl Artifact<'_> {
    fn kind(&self) -> &'static str {
        match self {
            Artifact::Level { .. } => "graphs",
            Artifact::Packing { .. } => "packings",
            Artifact::Report(_) => "reports",
        }
    }
}

pub trait Exporter: Send + Sync {
    fn format(&self) -> &'static str;
    fn extension(&self) -> &'static str {
        self.format()
    }
    fn render(&self, artifact: &Artifact<'_>) -> Result<String, ExportError>;
}

#[derive(Serialize)]
struct LevelJson<'a> {
    name: &'a str,
    vertices: usize,
    edges: usize,
    faces: usize,
    graph: crate::plane_graph::GraphJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    colors: Option<BTreeMap<&'a str, u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<&'a BTreeMap<String, String>>,
}

pub struct JsonExporter;

impl Exporter for JsonExporter {
    fn format(&self) -> &'static str {
        "json"
    }

    fn render(&self, artifact: &Artifact<'_>) -> Result<String, ExportError> {
        let value = match artifact {
            Artifact::Level { graph, style, images } => serde_json::to_value(LevelJson {
                name: style.name,
                vertices: graph.vertex_count(),
                edges: graph.edge_count(),
                faces: graph.face_count(),
                graph: graph.to_json(),
                colors: style.colors.map(|c| graph.vertices().map(|v| (graph.name(v), c[v.idx()])).collect()),
                map: *images,
            }),
            Artifact::Packing { packing, .. } => serde_json::to_value(packing),
            Artifact::Report(v) => Ok((*v).clone()),
        };
        let mut s = serde_json::to_string_pretty(&value.expect("artifact serializes")).expect("value prints");
        s.push('\n');
        Ok(s)
    }
}

pub struct DotExporter;

impl Exporter for DotExporter {
    fn format(&self) -> &'static str {
        "dot"
    }

    fn extension(&self) -> &'static str {
        "gv"
    }

    fn render(&self, artifact: &Artifact<'_>) -> Result<String, ExportError> {
        match artifact {
            Artifact::Level { graph, style, .. } => Ok(graph.to_dot(style)),
            Artifact::Packing { contact, .. } => Ok(contact.to_dot(&DotStyle { name: "contact", ..Default::default() })),
            Artifact::Report(_) => Err(ExportError::Unsupported("dot", artifact.kind())),
        }
    }
}

pub struct SvgExporter;

const SVG_SIZE: f64 = 800.0;

fn svg_header(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">",
        s = SVG_SIZE
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
}

/// Vertices on concentric rings by distance from the first vertex, in
/// rotation order around it.
fn ring_layout(g: &PlaneGraph) -> Vec<(f64, f64)> {
    let root = VertexId(0);
    let dist = bfs_distances(g, root);
    let depth = dist.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0).max(1);
    let mut rings: Vec<Vec<VertexId>> = vec![Vec::new(); depth + 1];
    // order each ring by discovery along rotations
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = std::collections::VecDeque::from([root]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        rings[dist[v.idx()]].push(v);
        for &d in g.rotation(v) {
            let w = g.head(d);
            if !seen[w.idx()] {
                seen[w.idx()] = true;
                queue.push_back(w);
            }
        }
    }
    let mut pos = vec![(SVG_SIZE / 2.0, SVG_SIZE / 2.0); g.vertex_count()];
    let step = (SVG_SIZE / 2.0 - 40.0) / depth as f64;
    for (r, ring) in rings.iter().enumerate().skip(1) {
        for (i, &v) in ring.iter().enumerate() {
            let t = 2.0 * PI * i as f64 / ring.len() as f64;
            let rad = step * r as f64;
            pos[v.idx()] = (SVG_SIZE / 2.0 + rad * t.cos(), SVG_SIZE / 2.0 - rad * t.sin());
        }
    }
    pos
}

impl Exporter for SvgExporter {
    fn format(&self) -> &'static str {
        "svg"
    }

    fn render(&self, artifact: &Artifact<'_>) -> Result<String, ExportError> {
        let mut out = String::new();
        match artifact {
            Artifact::Level { graph, style, .. } => {
                svg_header(&mut out);
                let pos = ring_layout(graph);
                for e in graph.edges() {
                    let (a, b) = graph.endpoints(e);
                    let (stroke, width) = if Some(e) == style.highlight { ("red", 3) } else { ("#555", 1) };
                    let _ = writeln!(
                        out,
                        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
                        pos[a.idx()].0, pos[a.idx()].1, pos[b.idx()].0, pos[b.idx()].1
                    );
                }
                for v in graph.vertices() {
                    let fill = match style.colors.map(|c| c[v.idx()]) {
                        Some(0) => "#f4c27a",
                        Some(1) => "#8fb8de",
                        _ => "#dddddd",
                    };
                    let (x, y) = pos[v.idx()];
                    let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"6\" fill=\"{fill}\" stroke=\"black\"><title>{}</title></circle>", xml_escape(graph.name(v)));
                }
            }
            Artifact::Packing { packing, contact } => {
                svg_header(&mut out);
                let extent = packing
                    .circles
                    .iter()
                    .map(|c| c.center.norm() + c.radius())
                    .fold(0.0, f64::max)
                    .max(f64::MIN_POSITIVE);
                let scale = (SVG_SIZE / 2.0 - 10.0) / extent;
                let at = |z: num_complex::Complex64| (SVG_SIZE / 2.0 + scale * z.re, SVG_SIZE / 2.0 - scale * z.im);
                for c in &packing.circles {
                    let (x, y) = at(c.center);
                    let _ = writeln!(
                        out,
                        "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.6\"/>",
                        scale * c.radius()
                    );
                }
                for e in contact.edges() {
                    let (a, b) = contact.endpoints(e);
                    let (ca, cb) = (packing.circles[a.idx()], packing.circles[b.idx()]);
                    if ca.curvature < 0.0 || cb.curvature < 0.0 {
                        continue;
                    }
                    let ((x1, y1), (x2, y2)) = (at(ca.center), at(cb.center));
                    let _ = writeln!(out, "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#c33\" stroke-width=\"0.4\"/>");
                }
            }
            Artifact::Report(_) => return Err(ExportError::Unsupported("svg", artifact.kind())),
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub struct ExporterRegistry {
    exporters: Vec<Box<dyn Exporter>>,
}

impl Default for ExporterRegistry {
    fn default() -> Self {
        let mut r = ExporterRegistry { exporters: Vec::new() };
        r.register(Box::new(JsonExporter));
        r.register(Box::new(DotExporter));
        r.register(Box::new(SvgExporter));
        r
    }
}

impl ExporterRegistry {
    pub fn register(&mut self, e: Box<dyn Exporter>) {
        self.exporters.retain(|x| x.format() != e.format());
        self.exporters.push(e);
    }

    pub fn formats(&self) -> Vec<&'static str> {
        self.exporters.iter().map(|e| e.format()).collect()
    }

    pub fn get(&self, format: &str) -> Result<&dyn Exporter, ExportError> {
        self.exporters
            .iter()
            .find(|e| e.format() == format)
            .map(|e| e.as_ref())
            .ok_or_else(|| ExportError::UnknownFormat(format.to_string(), self.formats().join(", ")))
    }
}
