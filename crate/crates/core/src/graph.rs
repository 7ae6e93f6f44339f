//! Straight-line embedded graphs with distance-derived edge weights.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ctpl::{perturb_point, CtplParams};
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::geometry::{self, Point2, SegmentContact};
use crate::kernel::WeightKernel;

pub type VertexId = u32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub coords: Vec<f64>,
    /// Inserted by constraint repair; exempt from vertex noise by default.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub subdivision: bool,
}

impl Vertex {
    pub fn new(id: VertexId, coords: Vec<f64>) -> Self {
        Self {
            id,
            coords,
            subdivision: false,
        }
    }
}

/// Undirected edge stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Self { u: a, v: b }
        } else {
            Self { u: b, v: a }
        }
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }

    pub fn shares_endpoint(&self, other: &Edge) -> bool {
        self.contains(other.u) || self.contains(other.v)
    }

    pub fn other(&self, x: VertexId) -> Option<VertexId> {
        if self.u == x {
            Some(self.v)
        } else if self.v == x {
            Some(self.u)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug)]
pub struct EmbeddedGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    kernel: WeightKernel,
    dim: usize,
    index: HashMap<VertexId, usize>,
}

impl PartialEq for EmbeddedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges && self.kernel == other.kernel
    }
}

impl EmbeddedGraph {
    /// Builds and validates a graph. Edge endpoints may be given in either
    /// order; self-loops, parallel edges and non-positive weights are rejected.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        kernel: WeightKernel,
    ) -> Result<Self> {
        if !kernel.is_valid() {
            return Err(Error::InvalidGraph(format!(
                "invalid kernel parameters {kernel:?}"
            )));
        }
        let dim = vertices.first().map_or(2, |v| v.coords.len());
        if dim == 0 {
            return Err(Error::InvalidGraph(
                "coordinates must have at least one component".into(),
            ));
        }
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if v.coords.len() != dim {
                return Err(Error::InvalidGraph(format!(
                    "vertex {} has dimension {}, expected {dim}",
                    v.id,
                    v.coords.len()
                )));
            }
            if v.coords.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {} has non-finite coordinates",
                    v.id
                )));
            }
            if index.insert(v.id, i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            for x in [a, b] {
                if !index.contains_key(&x) {
                    return Err(Error::InvalidGraph(format!(
                        "edge references unknown vertex {x}"
                    )));
                }
            }
            let e = Edge::new(a, b);
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "parallel edge {}-{}",
                    e.u, e.v
                )));
            }
            list.push(e);
        }
        let g = Self {
            vertices,
            edges: list,
            kernel,
            dim,
            index,
        };
        for e in &g.edges {
            let w = g.edge_weight(e);
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {}-{} has non-positive weight {w}",
                    e.u, e.v
                )));
            }
        }
        Ok(g)
    }

    /// Planar convenience constructor with ids `0..n`.
    pub fn from_points(
        points: &[Point2],
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        kernel: WeightKernel,
    ) -> Result<Self> {
        let vertices = points
            .iter()
            .enumerate()
            .map(|(i, p)| Vertex::new(i as VertexId, p.to_vec()))
            .collect();
        Self::new(vertices, edges, kernel)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kernel(&self) -> WeightKernel {
        self.kernel
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().map(|v| v.id)
    }

    /// Row/column of `id` in [`EmbeddedGraph::laplacian`].
    pub fn index_of(&self, id: VertexId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownVertex(id))
    }

    pub fn vertex(&self, id: VertexId) -> Result<&Vertex> {
        Ok(&self.vertices[self.index_of(id)?])
    }

    pub fn coords(&self, id: VertexId) -> Result<&[f64]> {
        Ok(&self.vertex(id)?.coords)
    }

    /// Planar position; panics on non-planar graphs or unknown ids.
    pub fn point(&self, id: VertexId) -> Point2 {
        let c = &self.vertices[self.index[&id]].coords;
        [c[0], c[1]]
    }

    pub fn contains_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains(&Edge::new(a, b))
    }

    pub fn distance(&self, a: VertexId, b: VertexId) -> f64 {
        let x = &self.vertices[self.index[&a]].coords;
        let y = &self.vertices[self.index[&b]].coords;
        x.iter()
            .zip(y)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn edge_length(&self, e: &Edge) -> f64 {
        self.distance(e.u, e.v)
    }

    pub fn edge_weight(&self, e: &Edge) -> f64 {
        self.kernel.evaluate(self.edge_length(e))
    }

    pub fn neighbors(&self, id: VertexId) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self.edges.iter().filter_map(|e| e.other(id)).collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, id: VertexId) -> usize {
        self.edges.iter().filter(|e| e.contains(id)).count()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            deg[self.index[&e.u]] += 1;
            deg[self.index[&e.v]] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let ids: Vec<VertexId> = self.vertex_ids().collect();
        let mut best = 0.0f64;
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                best = best.max(self.distance(a, b));
            }
        }
        best
    }

    /// Combinatorial Laplacian `D - A` with `A_uv = φ(|x_u - x_v|)`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.vertices.len();
        let mut l = DMatrix::zeros(n, n);
        for e in &self.edges {
            let (i, j) = (self.index[&e.u], self.index[&e.v]);
            let w = self.edge_weight(e);
            l[(i, j)] -= w;
            l[(j, i)] -= w;
            l[(i, i)] += w;
            l[(j, j)] += w;
        }
        l
    }

    pub fn weighted_degree(&self, id: VertexId) -> Result<f64> {
        self.index_of(id)?;
        Ok(self
            .edges
            .iter()
            .filter(|e| e.contains(id))
            .map(|e| self.edge_weight(e))
            .sum())
    }

    /// Same vertex ids (in order) and same edge list.
    pub fn same_combinatorics(&self, other: &EmbeddedGraph) -> bool {
        self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| a.id == b.id)
            && self.edges == other.edges
    }

    /// Copy with replaced coordinates (same order as [`EmbeddedGraph::vertices`]).
    pub fn with_coords(&self, coords: Vec<Vec<f64>>) -> Result<EmbeddedGraph> {
        if coords.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch {
                left: self.vertices.len(),
                right: coords.len(),
            });
        }
        let vertices = self
            .vertices
            .iter()
            .zip(coords)
            .map(|(v, c)| Vertex {
                id: v.id,
                coords: c,
                subdivision: v.subdivision,
            })
            .collect();
        EmbeddedGraph::new(vertices, self.edges.iter().map(|e| (e.u, e.v)), self.kernel)
    }

    pub fn with_kernel(&self, kernel: WeightKernel) -> Result<EmbeddedGraph> {
        EmbeddedGraph::new(
            self.vertices.clone(),
            self.edges.iter().map(|e| (e.u, e.v)),
            kernel,
        )
    }

    /// Displaces every vertex in `mask` by an independent CTPL draw. Without a
    /// mask, all original (non-subdivision) vertices move.
    pub fn apply_vertex_noise<R: Rng + ?Sized>(
        &self,
        params: &CtplParams,
        rng: &mut R,
        mask: Option<&BTreeSet<VertexId>>,
    ) -> Result<EmbeddedGraph> {
        let mut coords = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let moves = match mask {
                Some(m) => m.contains(&v.id),
                None => !v.subdivision,
            };
            if moves {
                coords.push(perturb_point(&v.coords, params, rng)?);
            } else {
                coords.push(v.coords.clone());
            }
        }
        self.with_coords(coords)
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|e| [e.u, e.v]).collect(),
            kernel: self.kernel,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<EmbeddedGraph> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        doc.into_graph()
    }

    /// `u,v,length,weight` rows.
    pub fn edge_table_csv(&self) -> String {
        let mut out = String::from("u,v,length,weight\n");
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                e.u,
                e.v,
                sig6(self.edge_length(e)),
                sig6(self.edge_weight(e))
            );
        }
        out
    }
}

/// On-disk graph schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<[VertexId; 2]>,
    #[serde(default)]
    pub kernel: WeightKernel,
}

impl GraphDocument {
    pub fn into_graph(self) -> Result<EmbeddedGraph> {
        EmbeddedGraph::new(
            self.vertices,
            self.edges.into_iter().map(|[u, v]| (u, v)),
            self.kernel,
        )
    }
}

/// Signed relative weighted-degree change `(WD' - WD) / WD` at `v`.
pub fn relative_wd_change(
    g: &EmbeddedGraph,
    perturbed: &EmbeddedGraph,
    v: VertexId,
) -> Result<f64> {
    if !g.same_combinatorics(perturbed) {
        return Err(Error::CombinatoricsMismatch(
            "relative weighted-degree change needs identical vertex and edge sets".into(),
        ));
    }
    let before = g.weighted_degree(v)?;
    if before == 0.0 {
        return Err(Error::ZeroWeightedDegree(v));
    }
    Ok((perturbed.weighted_degree(v)? - before) / before)
}

/// Lower bound `2 arcsin(ε / 2k)` on the angle between neighbours of a hub
/// at distance `k` that are `ε`-separated.
pub fn min_angle_bound(epsilon: f64, k: f64) -> Result<f64> {
    if !(epsilon > 0.0 && k > 0.0 && epsilon.is_finite() && k.is_finite()) {
        return Err(Error::Domain(format!(
            "need epsilon > 0 and k > 0, got {epsilon}, {k}"
        )));
    }
    if epsilon > 2.0 * k {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} exceeds 2k = {}",
            2.0 * k
        )));
    }
    Ok(2.0 * (epsilon / (2.0 * k)).asin())
}

/// One failed clearance or separation test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintViolation {
    /// Two edges without shared endpoints cross in their interiors.
    Crossing {
        first: Edge,
        second: Edge,
        point: Point2,
    },
    /// Two vertices closer than ε.
    Collision {
        a: VertexId,
        b: VertexId,
        distance: f64,
    },
    /// A vertex closer than ε to an edge not incident to it.
    Contact {
        vertex: VertexId,
        edge: Edge,
        distance: f64,
    },
    /// Two vertices at least ε apart but closer than the identifiability
    /// scale `k_min`.
    Separation {
        a: VertexId,
        b: VertexId,
        distance: f64,
    },
}

impl ConstraintViolation {
    /// Achieved distance (0 for crossings).
    pub fn distance(&self) -> f64 {
        match self {
            Self::Crossing { .. } => 0.0,
            Self::Collision { distance, .. }
            | Self::Contact { distance, .. }
            | Self::Separation { distance, .. } => *distance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub epsilon: f64,
    pub k_min: f64,
    pub min_vertex_vertex: f64,
    pub min_vertex_edge: f64,
    pub min_edge_edge: f64,
    pub violations: Vec<ConstraintViolation>,
}

impl ConstraintReport {
    /// All non-incident primitives ε-separated and no crossings.
    pub fn is_thick(&self) -> bool {
        self.min_vertex_vertex >= self.epsilon
            && self.min_vertex_edge >= self.epsilon
            && self.min_edge_edge >= self.epsilon
            && !self
                .violations
                .iter()
                .any(|v| matches!(v, ConstraintViolation::Crossing { .. }))
    }

    /// Every vertex pair at least `k_min` apart.
    pub fn is_identifiable(&self) -> bool {
        self.min_vertex_vertex >= self.k_min
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Absolute tolerance for degeneracy decisions: 1e-9 of the scene diameter.
pub fn scene_tolerance(g: &EmbeddedGraph) -> f64 {
    1e-9 * g.diameter().max(f64::MIN_POSITIVE)
}

/// Clearance (ε-thickness) and separation (`k_min`) checks over every pair
/// of non-incident primitives. Edge tests need planar coordinates.
pub fn check_constraints(g: &EmbeddedGraph, epsilon: f64, k_min: f64) -> Result<ConstraintReport> {
    if !(epsilon >= 0.0 && k_min >= 0.0) {
        return Err(Error::Parameter(
            "epsilon and k_min must be nonnegative".into(),
        ));
    }
    if g.dim() != 2 && g.edge_count() > 0 {
        return Err(Error::Domain(format!(
            "segment clearance tests are planar; graph has dimension {}",
            g.dim()
        )));
    }
    let tol = scene_tolerance(g);
    let ids: Vec<VertexId> = g.vertex_ids().collect();
    let mut violations = Vec::new();

    let mut min_vv = f64::INFINITY;
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let d = g.distance(a, b);
            min_vv = min_vv.min(d);
            let (a, b) = (a.min(b), a.max(b));
            if d < epsilon {
                violations.push(ConstraintViolation::Collision { a, b, distance: d });
            } else if d < k_min {
                violations.push(ConstraintViolation::Separation { a, b, distance: d });
            }
        }
    }

    let mut min_ve = f64::INFINITY;
    let mut min_ee = f64::INFINITY;
    if g.edge_count() > 0 {
        for &x in &ids {
            let p = g.point(x);
            for e in g.edges() {
                if e.contains(x) {
                    continue;
                }
                let d = geometry::point_segment_distance(p, g.point(e.u), g.point(e.v));
                min_ve = min_ve.min(d);
                if d < epsilon {
                    violations.push(ConstraintViolation::Contact {
                        vertex: x,
                        edge: *e,
                        distance: d,
                    });
                }
            }
        }
        let edges = g.edges();
        for (i, e) in edges.iter().enumerate() {
            for f in &edges[i + 1..] {
                if e.shares_endpoint(f) {
                    continue;
                }
                let (a, b, c, d) = (g.point(e.u), g.point(e.v), g.point(f.u), g.point(f.v));
                let contact = geometry::segment_contact(a, b, c, d, tol);
                let dist = match contact {
                    SegmentContact::Proper(point) => {
                        let (first, second) = if e < f { (*e, *f) } else { (*f, *e) };
                        violations.push(ConstraintViolation::Crossing {
                            first,
                            second,
                            point,
                        });
                        0.0
                    }
                    _ => geometry::segment_segment_distance(a, b, c, d),
                };
                min_ee = min_ee.min(dist);
            }
        }
    }

    Ok(ConstraintReport {
        epsilon,
        k_min,
        min_vertex_vertex: min_vv,
        min_vertex_edge: min_ve,
        min_edge_edge: min_ee,
        violations,
    })
}
