//! ε-thickness repair by crossing subdivision, vertex fusion and
//! vertex–edge splitting.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point2};
use crate::graph::{check_constraints, ConstraintViolation, Edge, EmbeddedGraph, Vertex, VertexId};
use crate::spectral::{graph_spectrum, spectral_distance};

/// Multiple of `|V| + |E|` allowed as the edit budget.
pub const EDIT_BUDGET_FACTOR: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EdgeCrossing,
    VertexCollision,
    VertexEdgeContact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Crossing: both edges' endpoints; collision: the two vertices;
    /// contact: the vertex then the edge endpoints.
    pub primitives: Vec<VertexId>,
    /// `ε − distance`; crossings count as distance 0.
    pub severity: f64,
    /// Intersection point of a crossing.
    pub point: Option<Point2>,
}

/// Every clearance violation, most severe first, ties by kind then ids.
pub fn detect_violations(graph: &EmbeddedGraph, epsilon: f64) -> Result<Vec<Violation>> {
    let report = check_constraints(graph, epsilon, 0.0)?;
    let mut out: Vec<Violation> = report
        .violations
        .into_iter()
        .filter_map(|v| match v {
            ConstraintViolation::Crossing {
                first,
                second,
                point,
            } => Some(Violation {
                kind: ViolationKind::EdgeCrossing,
                primitives: vec![first.u, first.v, second.u, second.v],
                severity: epsilon.max(f64::MIN_POSITIVE),
                point: Some(point),
            }),
            ConstraintViolation::Collision { a, b, distance } => Some(Violation {
                kind: ViolationKind::VertexCollision,
                primitives: vec![a, b],
                severity: epsilon - distance,
                point: None,
            }),
            ConstraintViolation::Contact {
                vertex,
                edge,
                distance,
            } => Some(Violation {
                kind: ViolationKind::VertexEdgeContact,
                primitives: vec![vertex, edge.u, edge.v],
                severity: epsilon - distance,
                point: None,
            }),
            ConstraintViolation::Separation { .. } => None,
        })
        .collect();
    out.sort_by(|a, b| {
        b.severity
            .total_cmp(&a.severity)
            .then(a.kind.cmp(&b.kind))
            .then(a.primitives.cmp(&b.primitives))
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    /// Split an edge at a vertex lying too close to it.
    Split,
    /// Insert a subdivision vertex at a crossing and split both edges.
    Subdivide,
    /// Merge two colliding vertices at their midpoint.
    Fuse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairEdit {
    pub kind: EditKind,
    pub vertices_before: Vec<VertexId>,
    pub vertices_after: Vec<VertexId>,
    pub edges_removed: Vec<[VertexId; 2]>,
    pub edges_added: Vec<[VertexId; 2]>,
    pub position: Option<Point2>,
}

/// Potential `Φ = |V₀| + C` after an edit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiState {
    /// Original (non-subdivision) vertices.
    pub original_vertices: usize,
    /// Outstanding violations.
    pub violations: usize,
    pub phi: usize,
}

impl PhiState {
    fn of(graph: &EmbeddedGraph, violations: usize) -> Self {
        let original_vertices = graph.vertices().iter().filter(|v| !v.subdivision).count();
        Self {
            original_vertices,
            violations,
            phi: original_vertices + violations,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepairLog {
    pub edits: Vec<RepairEdit>,
    /// Initial state followed by the state after each edit.
    pub phi_trace: Vec<PhiState>,
}

impl RepairLog {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Each edit lowers `|V₀|` or the violation count.
    pub fn is_monotone(&self) -> bool {
        self.phi_trace.windows(2).all(|w| {
            w[1].original_vertices < w[0].original_vertices || w[1].violations < w[0].violations
        })
    }
}

struct Workspace {
    vertices: BTreeMap<VertexId, Vertex>,
    edges: BTreeSet<Edge>,
    next_id: VertexId,
}

impl Workspace {
    fn from_graph(g: &EmbeddedGraph) -> Self {
        let vertices: BTreeMap<VertexId, Vertex> =
            g.vertices().iter().map(|v| (v.id, v.clone())).collect();
        let next_id = vertices.keys().next_back().map_or(0, |&m| m + 1);
        Self {
            vertices,
            edges: g.edges().iter().copied().collect(),
            next_id,
        }
    }

    fn build(&self, template: &EmbeddedGraph) -> Result<EmbeddedGraph> {
        EmbeddedGraph::new(
            self.vertices.values().cloned().collect(),
            self.edges.iter().map(|e| (e.u, e.v)),
            template.kernel(),
        )
    }

    fn point(&self, id: VertexId) -> Point2 {
        let c = &self.vertices[&id].coords;
        [c[0], c[1]]
    }

    fn add_edge(&mut self, a: VertexId, b: VertexId, added: &mut Vec<[VertexId; 2]>) {
        if a != b && self.edges.insert(Edge::new(a, b)) {
            let e = Edge::new(a, b);
            added.push([e.u, e.v]);
        }
    }

    fn remove_edge(&mut self, e: Edge, removed: &mut Vec<[VertexId; 2]>) {
        if self.edges.remove(&e) {
            removed.push([e.u, e.v]);
        }
    }

    fn fuse(&mut self, a: VertexId, b: VertexId) -> RepairEdit {
        let (keep, drop) = (a.min(b), a.max(b));
        let pos = geometry::midpoint(self.point(keep), self.point(drop));
        let dropped = self.vertices.remove(&drop).expect("violation ids exist");
        let kept = self.vertices.get_mut(&keep).expect("violation ids exist");
        kept.coords = pos.to_vec();
        kept.subdivision = kept.subdivision && dropped.subdivision;
        let (mut removed, mut added) = (Vec::new(), Vec::new());
        let incident: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| e.contains(drop))
            .copied()
            .collect();
        for e in incident {
            self.remove_edge(e, &mut removed);
            let other = e.other(drop).expect("incident");
            self.add_edge(keep, other, &mut added);
        }
        RepairEdit {
            kind: EditKind::Fuse,
            vertices_before: vec![keep, drop],
            vertices_after: vec![keep],
            edges_removed: removed,
            edges_added: added,
            position: Some(pos),
        }
    }

    fn split(&mut self, x: VertexId, e: Edge) -> RepairEdit {
        let (mut removed, mut added) = (Vec::new(), Vec::new());
        self.remove_edge(e, &mut removed);
        self.add_edge(e.u, x, &mut added);
        self.add_edge(x, e.v, &mut added);
        RepairEdit {
            kind: EditKind::Split,
            vertices_before: vec![x, e.u, e.v],
            vertices_after: vec![x, e.u, e.v],
            edges_removed: removed,
            edges_added: added,
            position: None,
        }
    }

    fn subdivide(&mut self, e: Edge, f: Edge, point: Point2) -> RepairEdit {
        let s = self.next_id;
        self.next_id += 1;
        self.vertices.insert(
            s,
            Vertex {
                id: s,
                coords: point.to_vec(),
                subdivision: true,
            },
        );
        let (mut removed, mut added) = (Vec::new(), Vec::new());
        for edge in [e, f] {
            self.remove_edge(edge, &mut removed);
            self.add_edge(edge.u, s, &mut added);
            self.add_edge(s, edge.v, &mut added);
        }
        RepairEdit {
            kind: EditKind::Subdivide,
            vertices_before: vec![e.u, e.v, f.u, f.v],
            vertices_after: vec![e.u, e.v, f.u, f.v, s],
            edges_removed: removed,
            edges_added: added,
            position: Some(point),
        }
    }
}

/// Repairs every clearance violation, worst first. Aborts with a
/// dense-violation error when the edit budget `10·(|V|+|E|)` is exhausted or
/// violations outnumber `|V| + |E|`.
pub fn repair(graph: &EmbeddedGraph, epsilon: f64) -> Result<(EmbeddedGraph, RepairLog)> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!(
            "epsilon must be finite and nonnegative, got {epsilon}"
        )));
    }
    let budget = EDIT_BUDGET_FACTOR * (graph.vertex_count() + graph.edge_count());
    let mut current = graph.clone();
    let mut violations = detect_violations(&current, epsilon)?;
    let mut log = RepairLog {
        edits: Vec::new(),
        phi_trace: vec![PhiState::of(&current, violations.len())],
    };
    while let Some(top) = violations.first() {
        let size = current.vertex_count() + current.edge_count();
        if violations.len() > size {
            return Err(Error::DenseViolation {
                reason: format!("{} violations on a graph of size {size}", violations.len()),
            });
        }
        if log.edits.len() >= budget {
            return Err(Error::DenseViolation {
                reason: format!("edit budget {budget} exhausted"),
            });
        }
        let mut ws = Workspace::from_graph(&current);
        let p = &top.primitives;
        let edit = match top.kind {
            ViolationKind::VertexCollision => ws.fuse(p[0], p[1]),
            ViolationKind::VertexEdgeContact => ws.split(p[0], Edge::new(p[1], p[2])),
            ViolationKind::EdgeCrossing => ws.subdivide(
                Edge::new(p[0], p[1]),
                Edge::new(p[2], p[3]),
                top.point.expect("crossings carry their point"),
            ),
        };
        current = ws.build(&current)?;
        violations = detect_violations(&current, epsilon)?;
        log.edits.push(edit);
        log.phi_trace.push(PhiState::of(&current, violations.len()));
    }
    Ok((current, log))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairDistortion {
    pub spectral_distance: f64,
    pub edit_count: usize,
    pub rows_touched: usize,
}

/// Spectral distance between the original and repaired graphs and the
/// number of Laplacian rows whose vertex, neighbourhood or weights changed.
pub fn repair_distortion(
    original: &EmbeddedGraph,
    repaired: &EmbeddedGraph,
    log: &RepairLog,
) -> Result<RepairDistortion> {
    let d = spectral_distance(&graph_spectrum(original)?, &graph_spectrum(repaired)?)?;
    type Row = (Vec<f64>, Vec<(VertexId, u64)>);
    let row = |g: &EmbeddedGraph, id: VertexId| -> Option<Row> {
        let v = g.vertex(id).ok()?;
        let mut nb: Vec<(VertexId, u64)> = g
            .edges()
            .iter()
            .filter_map(|e| e.other(id).map(|o| (o, g.edge_weight(e).to_bits())))
            .collect();
        nb.sort_unstable();
        Some((v.coords.clone(), nb))
    };
    let ids: BTreeSet<VertexId> = original.vertex_ids().chain(repaired.vertex_ids()).collect();
    let rows_touched = ids
        .into_iter()
        .filter(|&id| row(original, id) != row(repaired, id))
        .count();
    Ok(RepairDistortion {
        spectral_distance: d,
        edit_count: log.edits.len(),
        rows_touched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::WeightKernel;
    use crate::reference::{default_reference_graph, ReferenceVariant};

    fn x_cross() -> EmbeddedGraph {
        EmbeddedGraph::from_points(
            &[[-0.5, -0.5], [0.5, 0.5], [-0.5, 0.5], [0.5, -0.5]],
            [(0, 1), (2, 3)],
            WeightKernel::Identity,
        )
        .unwrap()
    }

    #[test]
    fn thick_graph_is_untouched() {
        let g = default_reference_graph(ReferenceVariant::Heterogeneous);
        assert!(detect_violations(&g, 10.0).unwrap().is_empty());
        let (h, log) = repair(&g, 10.0).unwrap();
        assert_eq!(h, g);
        assert!(log.edits.is_empty());
        let d = repair_distortion(&g, &h, &log).unwrap();
        assert_eq!(d.spectral_distance, 0.0);
        assert_eq!(d.rows_touched, 0);
    }

    #[test]
    fn x_crossing_gets_one_subdivision_vertex() {
        let g = x_cross();
        let v = detect_violations(&g, 0.1).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::EdgeCrossing);
        let (h, log) = repair(&g, 0.1).unwrap();
        assert_eq!(h.vertex_count(), 5);
        assert_eq!(h.edge_count(), 4);
        let s = h.vertices().iter().find(|v| v.subdivision).unwrap();
        assert!(geometry::norm([s.coords[0], s.coords[1]]) < 1e-12);
        assert!(log.phi_trace[1].phi < log.phi_trace[0].phi);
        assert!(log.is_monotone());
        assert!(detect_violations(&h, 0.1).unwrap().is_empty());
    }

    #[test]
    fn close_pair_is_fused_at_midpoint() {
        let eps = 1.0;
        let g = EmbeddedGraph::from_points(
            &[[0.0, 0.0], [0.5, 0.0], [-10.0, 0.0], [10.0, 5.0]],
            [(0, 2), (1, 3)],
            WeightKernel::Identity,
        )
        .unwrap();
        let (h, log) = repair(&g, eps).unwrap();
        assert_eq!(h.vertex_count(), 3);
        assert_eq!(h.coords(0).unwrap(), &[0.25, 0.0]);
        assert_eq!(log.edits[0].kind, EditKind::Fuse);
        assert!(h.contains_edge(0, 3) && h.contains_edge(0, 2));
    }

    #[test]
    fn single_split_touches_three_rows() {
        let g = EmbeddedGraph::from_points(
            &[[0.0, 0.0], [10.0, 0.0], [5.0, 0.2], [5.0, 10.0]],
            [(0, 1), (2, 3)],
            WeightKernel::Identity,
        )
        .unwrap();
        let (h, log) = repair(&g, 1.0).unwrap();
        assert_eq!(log.edits.len(), 1);
        assert_eq!(log.edits[0].kind, EditKind::Split);
        let d = repair_distortion(&g, &h, &log).unwrap();
        assert!(d.rows_touched <= 3, "{d:?}");
        assert!(d.spectral_distance > 0.0);
    }

    #[test]
    fn unconstrained_reference_repairs() {
        let g = default_reference_graph(ReferenceVariant::Unconstrained);
        assert!(!detect_violations(&g, 10.0).unwrap().is_empty());
        let (h, log) = repair(&g, 10.0).unwrap();
        assert!(detect_violations(&h, 10.0).unwrap().is_empty());
        assert!(log.is_monotone());
        assert!(log.phi_trace.len() <= log.phi_trace[0].phi + 1);
        for e in h.edges() {
            let len = geometry::dist(h.point(e.u), h.point(e.v));
            assert!((h.edge_weight(e) - len).abs() < 1e-12);
        }
        let back = RepairLog::from_json(&log.to_json().unwrap()).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn dense_collapse_trips_the_guard() {
        let pts: Vec<Point2> = (0..12)
            .map(|i| geometry::polar(0.1 + 0.01 * i as f64, i as f64 * 0.5))
            .collect();
        let g = EmbeddedGraph::from_points(&pts, [(0, 6), (3, 9)], WeightKernel::Identity).unwrap();
        assert!(matches!(repair(&g, 1.0), Err(Error::DenseViolation { .. })));
    }
}
