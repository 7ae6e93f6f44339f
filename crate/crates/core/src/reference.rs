//! Deterministic reference scaffolds built from witness motifs.
//!
//! Motif hubs sit on a regular hexagon of radius `spacing` around the
//! origin, motif `m` at angle `60°·m`. Each motif's spokes follow the
//! canonical 60° layout rotated so that spoke 0 (the connector) points at
//! the origin.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point2};
use crate::graph::{EmbeddedGraph, Vertex, VertexId};
use crate::kernel::WeightKernel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceVariant {
    /// Motifs of degree 1..6 joined through a central hub.
    Heterogeneous,
    /// Central hub removed; connectors rewired with crossing chords.
    Unconstrained,
    /// Six degree-4 motifs joined in a chain.
    Uniform,
}

impl ReferenceVariant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Heterogeneous => "heterogeneous",
            Self::Unconstrained => "unconstrained",
            Self::Uniform => "uniform",
        }
    }
}

pub const DEFAULT_K: f64 = 100.0;
pub const DEFAULT_SPACING: f64 = 300.0;

struct Layout {
    vertices: Vec<Vertex>,
    edges: Vec<(VertexId, VertexId)>,
    /// Connector vertex of each motif.
    connectors: Vec<VertexId>,
}

fn place_motifs(degrees: &[usize], k: f64, spacing: f64, first_id: VertexId) -> Layout {
    let mut layout = Layout {
        vertices: Vec::new(),
        edges: Vec::new(),
        connectors: Vec::new(),
    };
    let mut next = first_id;
    for (m, &deg) in degrees.iter().enumerate() {
        let theta = m as f64 * PI / 3.0;
        let hub: Point2 = geometry::polar(spacing, theta);
        let hub_id = next;
        layout.vertices.push(Vertex::new(hub_id, hub.to_vec()));
        next += 1;
        for j in 0..deg {
            let d = geometry::polar(k, theta + PI + j as f64 * PI / 3.0);
            layout
                .vertices
                .push(Vertex::new(next, vec![hub[0] + d[0], hub[1] + d[1]]));
            layout.edges.push((hub_id, next));
            if j == 0 {
                layout.connectors.push(next);
            }
            next += 1;
        }
    }
    layout
}

/// Builds one of the reference graphs with hub–spoke length `k` and hub
/// spacing `spacing`.
pub fn build_reference_graph(
    variant: ReferenceVariant,
    k: f64,
    spacing: f64,
) -> Result<EmbeddedGraph> {
    if !(k > 0.0 && spacing > 2.0 * k && k.is_finite() && spacing.is_finite()) {
        return Err(Error::Parameter(format!(
            "reference layout needs 0 < 2k < spacing, got k = {k}, spacing = {spacing}"
        )));
    }
    let layout = match variant {
        ReferenceVariant::Heterogeneous => {
            let mut l = place_motifs(&[1, 2, 3, 4, 5, 6], k, spacing, 1);
            l.vertices.insert(0, Vertex::new(0, vec![0.0, 0.0]));
            for &c in &l.connectors[1..] {
                l.edges.push((0, c));
            }
            l.edges.push((l.connectors[0], l.connectors[5]));
            l
        }
        ReferenceVariant::Unconstrained => {
            let mut l = place_motifs(&[1, 2, 3, 4, 5, 6], k, spacing, 1);
            let c = l.connectors.clone();
            l.edges.push((c[0], c[5]));
            for (a, b) in [(1, 4), (2, 5), (1, 3), (3, 5), (2, 4)] {
                l.edges.push((c[a], c[b]));
            }
            l
        }
        ReferenceVariant::Uniform => {
            let mut l = place_motifs(&[4; 6], k, spacing, 0);
            let c = l.connectors.clone();
            for w in c.windows(2) {
                l.edges.push((w[0], w[1]));
            }
            l
        }
    };
    EmbeddedGraph::new(layout.vertices, layout.edges, WeightKernel::Identity)
}

pub fn default_reference_graph(variant: ReferenceVariant) -> EmbeddedGraph {
    build_reference_graph(variant, DEFAULT_K, DEFAULT_SPACING).expect("default layout is valid")
}
