//! Hub–spoke witness motifs: canonical layouts, extremal displacements,
//! angular sweeps, greedy disjoint tilings and the motif-packing bound.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point2};
use crate::graph::{Edge, EmbeddedGraph, VertexId};
use crate::kernel::WeightKernel;
use crate::spectral::{self, frobenius_norm};

/// Kissing number in the plane.
pub const MAX_DEGREE: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifConfiguration {
    pub hub: Point2,
    pub spokes: Vec<Point2>,
    pub k: f64,
    pub r_max: f64,
    /// Spoke directions seen from the hub.
    pub spoke_angles: Vec<f64>,
}

impl MotifConfiguration {
    /// Motif from explicit positions; `k` is the shortest hub–spoke length.
    pub fn from_points(hub: Point2, spokes: Vec<Point2>, r_max: f64) -> Result<Self> {
        if spokes.is_empty() || spokes.len() > MAX_DEGREE {
            return Err(Error::Catalogue(spokes.len()));
        }
        let spoke_angles = spokes
            .iter()
            .map(|&s| geometry::angle_of(geometry::sub(s, hub)))
            .collect();
        let k = spokes
            .iter()
            .map(|&s| geometry::dist(s, hub))
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            hub,
            spokes,
            k,
            r_max,
            spoke_angles,
        })
    }

    pub fn degree(&self) -> usize {
        self.spokes.len()
    }

    /// Smallest angle between two spoke directions.
    pub fn min_angular_separation(&self) -> f64 {
        let mut a = self.spoke_angles.clone();
        if a.len() < 2 {
            return TAU;
        }
        a.sort_by(f64::total_cmp);
        let mut best = a[0] + TAU - a[a.len() - 1];
        for w in a.windows(2) {
            best = best.min(w[1] - w[0]);
        }
        best
    }

    /// Direction bisecting the largest angular gap between spokes. Ties go to
    /// the gap that wraps through angle 0.
    pub fn unoccupied_bisector(&self) -> f64 {
        let mut a = self.spoke_angles.clone();
        a.sort_by(f64::total_cmp);
        let last = a.len() - 1;
        let mut gap = a[0] + TAU - a[last];
        let mut dir = a[last] + 0.5 * gap;
        for w in a.windows(2) {
            let g = w[1] - w[0];
            if g > gap + 1e-12 {
                gap = g;
                dir = w[0] + 0.5 * g;
            }
        }
        dir.rem_euclid(TAU)
    }

    /// Star graph: hub id 0, spokes `1..=n`.
    pub fn star_graph(&self, kernel: WeightKernel) -> Result<EmbeddedGraph> {
        let mut pts = vec![self.hub];
        pts.extend(&self.spokes);
        EmbeddedGraph::from_points(
            &pts,
            (1..=self.degree() as VertexId).map(|i| (0, i)),
            kernel,
        )
    }
}

/// Tightest admissible layout: spokes at consecutive 60° steps, the
/// unoccupied arc bisected by the extremal hub direction.
pub fn canonical_motif(n: usize, k: f64, r_max: f64) -> Result<MotifConfiguration> {
    if !(1..=MAX_DEGREE).contains(&n) {
        return Err(Error::Catalogue(n));
    }
    if !(k > 0.0 && r_max >= 0.0 && k.is_finite() && r_max.is_finite()) {
        return Err(Error::Parameter(format!(
            "need k > 0 and r_max >= 0, got {k}, {r_max}"
        )));
    }
    if k < 2.0 * r_max * (1.0 - 1e-12) {
        return Err(Error::Parameter(format!(
            "k = {k} is below 2 r_max = {}",
            2.0 * r_max
        )));
    }
    let angles: Vec<f64> = (0..n).map(|j| j as f64 * PI / 3.0).collect();
    Ok(MotifConfiguration {
        hub: [0.0, 0.0],
        spokes: angles.iter().map(|&a| geometry::polar(k, a)).collect(),
        k,
        r_max,
        spoke_angles: angles,
    })
}

fn require_extremal_kernel(kernel: WeightKernel) -> Result<()> {
    if kernel.supports_extremality() {
        Ok(())
    } else {
        Err(Error::ExtremalityAssumption(format!(
            "kernel {} is not nondecreasing and convex",
            kernel.name()
        )))
    }
}

fn check_radius(motif: &MotifConfiguration, r: f64) -> Result<()> {
    if !(r >= 0.0 && r <= motif.r_max * (1.0 + 1e-12)) {
        return Err(Error::Parameter(format!(
            "radius {r} outside [0, r_max = {}]",
            motif.r_max
        )));
    }
    Ok(())
}

/// Spokes pushed by `r` along the rays from `hub` through them.
fn conditional_spokes(motif: &MotifConfiguration, hub: Point2, r: f64) -> Vec<Point2> {
    motif
        .spokes
        .iter()
        .map(|&x| {
            let d = geometry::sub(x, hub);
            let len = geometry::norm(d);
            if len == 0.0 {
                x
            } else {
                [x[0] + r * d[0] / len, x[1] + r * d[1] / len]
            }
        })
        .collect()
}

fn weight_change(
    motif: &MotifConfiguration,
    hub: Point2,
    spokes: &[Point2],
    kernel: WeightKernel,
) -> f64 {
    motif
        .spokes
        .iter()
        .zip(spokes)
        .map(|(&x, &e)| {
            kernel.evaluate(geometry::dist(e, hub)) - kernel.evaluate(geometry::dist(x, motif.hub))
        })
        .sum()
}

/// Hub weighted-degree change with the hub moved by `r` in `direction` and
/// every spoke at its conditional extremum.
pub fn directional_delta_wd(
    motif: &MotifConfiguration,
    r: f64,
    direction: f64,
    kernel: WeightKernel,
) -> f64 {
    let u = geometry::polar(r, direction);
    let hub = [motif.hub[0] + u[0], motif.hub[1] + u[1]];
    let spokes = conditional_spokes(motif, hub, r);
    weight_change(motif, hub, &spokes, kernel)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalDisplacement {
    pub perturbed: MotifConfiguration,
    pub delta_wd: f64,
}

/// Worst-case weighted-degree increase: hub on the boundary of its ball
/// along the unoccupied bisector, spokes pushed outward along the rays from
/// the displaced hub.
pub fn extremal_displacement(
    motif: &MotifConfiguration,
    r: f64,
    kernel: WeightKernel,
) -> Result<ExtremalDisplacement> {
    require_extremal_kernel(kernel)?;
    check_radius(motif, r)?;
    let u = geometry::polar(r, motif.unoccupied_bisector());
    let hub = [motif.hub[0] + u[0], motif.hub[1] + u[1]];
    let spokes = conditional_spokes(motif, hub, r);
    let delta_wd = weight_change(motif, hub, &spokes, kernel);
    let perturbed = MotifConfiguration {
        spoke_angles: spokes
            .iter()
            .map(|&s| geometry::angle_of(geometry::sub(s, hub)))
            .collect(),
        hub,
        spokes,
        k: motif.k,
        r_max: motif.r_max,
    };
    Ok(ExtremalDisplacement {
        perturbed,
        delta_wd,
    })
}

/// Brute-force maximum of the weighted-degree change over a polar grid of
/// `grid_density × grid_density` hub positions (radii `r·i/(G-1)`, angles
/// `2πj/G`), spokes at their conditional extrema.
pub fn numeric_extremal_oracle(
    motif: &MotifConfiguration,
    r: f64,
    kernel: WeightKernel,
    grid_density: usize,
) -> Result<f64> {
    check_radius(motif, r)?;
    if grid_density < 2 {
        return Err(Error::Parameter("grid density must be at least 2".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..grid_density {
        let rho = r * i as f64 / (grid_density - 1) as f64;
        for j in 0..grid_density {
            let theta = TAU * j as f64 / grid_density as f64;
            let u = geometry::polar(rho, theta);
            let hub = [motif.hub[0] + u[0], motif.hub[1] + u[1]];
            let spokes = conditional_spokes(motif, hub, r);
            best = best.max(weight_change(motif, hub, &spokes, kernel));
            if rho == 0.0 {
                break;
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Hub direction relative to the unoccupied bisector.
    pub offset: f64,
    /// Change with spokes at their conditional extrema.
    pub delta_wd: f64,
    /// Best change over random spoke endpoints on their boundary circles.
    pub jitter_max: f64,
}

/// Weighted-degree change as the hub direction rotates away from the
/// extremal bisector.
pub fn angular_sweep<R: Rng + ?Sized>(
    motif: &MotifConfiguration,
    r: f64,
    kernel: WeightKernel,
    offsets: &[f64],
    n_random_spoke_jitters: usize,
    rng: &mut R,
) -> Result<Vec<SweepPoint>> {
    require_extremal_kernel(kernel)?;
    check_radius(motif, r)?;
    let axis = motif.unoccupied_bisector();
    let mut out = Vec::with_capacity(offsets.len());
    for &offset in offsets {
        let u = geometry::polar(r, axis + offset);
        let hub = [motif.hub[0] + u[0], motif.hub[1] + u[1]];
        let spokes = conditional_spokes(motif, hub, r);
        let delta_wd = weight_change(motif, hub, &spokes, kernel);
        let mut jitter_max = f64::NEG_INFINITY;
        let mut jittered = vec![[0.0; 2]; motif.degree()];
        for _ in 0..n_random_spoke_jitters {
            for (slot, &x) in jittered.iter_mut().zip(&motif.spokes) {
                let d = geometry::polar(r, rng.random::<f64>() * TAU);
                *slot = [x[0] + d[0], x[1] + d[1]];
            }
            jitter_max = jitter_max.max(weight_change(motif, hub, &jittered, kernel));
        }
        out.push(SweepPoint {
            offset,
            delta_wd,
            jitter_max,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub degree: usize,
    /// `δWD / r`.
    pub delta_wd_coefficient: f64,
    /// Largest sorted-eigenvalue shift.
    pub actual_shift: f64,
    pub lambda_n_shift: f64,
    /// `‖L' − L‖₂`.
    pub weyl_limit: f64,
    pub ratio: f64,
}

/// Extremal displacement and Weyl tightness of the canonical motif of degree
/// `n` as an isolated star graph.
pub fn table1_row(n: usize, k: f64, r: f64, kernel: WeightKernel) -> Result<Table1Row> {
    let motif = canonical_motif(n, k, r)?;
    let ext = extremal_displacement(&motif, r, kernel)?;
    let before = motif.star_graph(kernel)?;
    let after = ext.perturbed.star_graph(kernel)?;
    let cert = spectral::weyl_certificate(&before.laplacian(), &after.laplacian())?;
    Ok(Table1Row {
        degree: n,
        delta_wd_coefficient: if r > 0.0 { ext.delta_wd / r } else { 0.0 },
        actual_shift: cert.max_eigen_shift,
        lambda_n_shift: cert.lambda_n_shift,
        weyl_limit: cert.op_norm_e,
        ratio: cert.weyl_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifInstance {
    pub hub: VertexId,
    pub spokes: Vec<VertexId>,
    pub degree: usize,
    /// Per-motif worst-case `‖E_m‖_F`, once evaluated.
    pub worst_case_frob: Option<f64>,
}

impl MotifInstance {
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        std::iter::once(self.hub).chain(self.spokes.iter().copied())
    }
}

/// Greedy vertex-disjoint motif selection: degrees 6 down to 1, candidates
/// in ascending id, a hub accepted when its closed neighbourhood is
/// uncovered.
pub fn greedy_tiling(graph: &EmbeddedGraph) -> Vec<MotifInstance> {
    let mut ids: Vec<VertexId> = graph.vertex_ids().collect();
    ids.sort_unstable();
    let mut neighbors: BTreeMap<VertexId, Vec<VertexId>> =
        ids.iter().map(|&v| (v, Vec::new())).collect();
    for e in graph.edges() {
        neighbors.get_mut(&e.u).expect("validated").push(e.v);
        neighbors.get_mut(&e.v).expect("validated").push(e.u);
    }
    let mut covered = BTreeSet::new();
    let mut out = Vec::new();
    for degree in (1..=MAX_DEGREE).rev() {
        for &v in &ids {
            let nb = &neighbors[&v];
            if nb.len() != degree || covered.contains(&v) || nb.iter().any(|u| covered.contains(u))
            {
                continue;
            }
            covered.insert(v);
            covered.extend(nb.iter().copied());
            let mut spokes = nb.clone();
            spokes.sort_unstable();
            out.push(MotifInstance {
                hub: v,
                spokes,
                degree,
                worst_case_frob: None,
            });
        }
    }
    out
}

/// Radial steps of the hub grid used for per-motif envelopes.
const ENVELOPE_RADII: usize = 32;
/// Angular steps of the hub grid used for per-motif envelopes.
const ENVELOPE_ANGLES: usize = 720;

/// Frobenius envelope for edge sets where each weight moves by at most
/// `b`: `Σ_e 2b² + Σ_u (Σ_{e∋u} b)²`.
fn lipschitz_envelope(edges: &[Edge], b: f64) -> f64 {
    let mut deg: BTreeMap<VertexId, usize> = BTreeMap::new();
    for e in edges {
        *deg.entry(e.u).or_default() += 1;
        *deg.entry(e.v).or_default() += 1;
    }
    let off = 2.0 * edges.len() as f64 * b * b;
    let diag: f64 = deg.values().map(|&d| (d as f64 * b).powi(2)).sum();
    (off + diag).sqrt()
}

/// Largest star-motif `‖E_m‖_F` for hub displacements inside the disc of
/// radius `r` and spokes anywhere in theirs. For a fixed hub the squared norm
/// `3Σδw² + (Σδw)²` is convex in the weight changes, so each spoke sits at its
/// nearest or farthest point; hub positions are scanned on a polar grid and
/// the grid spacing is charged through the kernel Lipschitz constant.
pub fn star_frobenius_envelope(
    hub: Point2,
    spokes: &[Point2],
    r: f64,
    kernel: WeightKernel,
    lipschitz: f64,
) -> f64 {
    let n = spokes.len();
    let base: Vec<f64> = spokes
        .iter()
        .map(|&x| kernel.evaluate(geometry::dist(x, hub)))
        .collect();
    let mut best = 0.0f64;
    let mut options = vec![[0.0f64; 2]; n];
    for i in 0..=ENVELOPE_RADII {
        let rho = r * i as f64 / ENVELOPE_RADII as f64;
        for j in 0..ENVELOPE_ANGLES {
            let h = geometry::polar(rho, TAU * j as f64 / ENVELOPE_ANGLES as f64);
            let h = [hub[0] + h[0], hub[1] + h[1]];
            for (slot, (&x, &w0)) in options.iter_mut().zip(spokes.iter().zip(&base)) {
                let d = geometry::dist(x, h);
                *slot = [
                    kernel.evaluate(d + r) - w0,
                    kernel.evaluate((d - r).max(0.0)) - w0,
                ];
            }
            for mask in 0u32..(1 << n) {
                let (mut sq, mut sum) = (0.0, 0.0);
                for (s, o) in options.iter().enumerate() {
                    let dw = o[((mask >> s) & 1) as usize];
                    sq += dw * dw;
                    sum += dw;
                }
                best = best.max(3.0 * sq + sum * sum);
            }
            if rho == 0.0 {
                break;
            }
        }
    }
    // every weight moves by at most L·h when the hub moves by h
    let spacing = r / (2.0 * ENVELOPE_RADII as f64) + r * PI / ENVELOPE_ANGLES as f64;
    let slack = ((3 * n + n * n) as f64).sqrt() * lipschitz * spacing;
    best.sqrt() + slack
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingBound {
    pub per_motif: Vec<f64>,
    /// `(Σ ‖E_m‖_F²)^{1/2}`.
    pub motif_term: f64,
    /// Envelope of `‖E_R‖_F` over edges outside every motif.
    pub residual_term: f64,
    pub total: f64,
    pub p: usize,
    pub realized_frob: Option<f64>,
    pub holds: Option<bool>,
}

fn motif_internal_edges(graph: &EmbeddedGraph, inst: &MotifInstance) -> Vec<Edge> {
    let set: BTreeSet<VertexId> = inst.vertices().collect();
    graph
        .edges()
        .iter()
        .filter(|e| set.contains(&e.u) && set.contains(&e.v))
        .copied()
        .collect()
}

fn check_disjoint(tiling: &[MotifInstance]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for inst in tiling {
        for v in inst.vertices() {
            if !seen.insert(v) {
                return Err(Error::Disjointness(v));
            }
        }
    }
    Ok(())
}

/// Per-motif worst-case Frobenius norm at radius `r`.
pub fn motif_envelope(graph: &EmbeddedGraph, inst: &MotifInstance, r: f64) -> Result<f64> {
    let kernel = graph.kernel();
    let lipschitz = kernel.bounds(graph.diameter() + 2.0 * r).lipschitz;
    let internal = motif_internal_edges(graph, inst);
    let is_star =
        internal.len() == inst.spokes.len() && internal.iter().all(|e| e.contains(inst.hub));
    if !is_star || graph.dim() != 2 {
        return Ok(lipschitz_envelope(&internal, 2.0 * r * lipschitz));
    }
    let hub = graph.point(inst.hub);
    let spokes: Vec<Point2> = inst.spokes.iter().map(|&s| graph.point(s)).collect();
    let local = star_frobenius_envelope(hub, &spokes, r, kernel, lipschitz);
    let motif = MotifConfiguration::from_points(hub, spokes, r)?;
    let admissible = kernel.supports_extremality()
        && motif.k >= 2.0 * r
        && (motif.degree() < 2 || motif.min_angular_separation() >= PI / 3.0 - 1e-9);
    if admissible {
        return Ok(local);
    }
    let canon = canonical_motif(inst.degree, 2.0 * r.max(f64::MIN_POSITIVE), r)?;
    let fallback = star_frobenius_envelope(canon.hub, &canon.spokes, r, kernel, lipschitz);
    Ok(local.max(fallback))
}

/// Laplacian perturbation restricted to the internal edges of `inst`.
pub fn motif_block(
    before: &EmbeddedGraph,
    after: &EmbeddedGraph,
    inst: &MotifInstance,
) -> Result<DMatrix<f64>> {
    edge_block(before, after, &motif_internal_edges(before, inst))
}

/// `L' − L` contributed by `edges` alone.
pub fn edge_block(
    before: &EmbeddedGraph,
    after: &EmbeddedGraph,
    edges: &[Edge],
) -> Result<DMatrix<f64>> {
    if !before.same_combinatorics(after) {
        return Err(Error::CombinatoricsMismatch(
            "perturbation blocks need identical combinatorics".into(),
        ));
    }
    let n = before.vertex_count();
    let mut e_mat = DMatrix::zeros(n, n);
    for e in edges {
        let dw = after.edge_weight(e) - before.edge_weight(e);
        let (i, j) = (before.index_of(e.u)?, before.index_of(e.v)?);
        e_mat[(i, j)] -= dw;
        e_mat[(j, i)] -= dw;
        e_mat[(i, i)] += dw;
        e_mat[(j, j)] += dw;
    }
    Ok(e_mat)
}

/// Mixed motif-packing bound `‖E‖_F ≤ (Σ‖E_m‖_F²)^{1/2} + ‖E_R‖_F`. With a
/// realization, the realized `‖E‖_F` is checked against it.
pub fn packing_bound_estimate(
    graph: &EmbeddedGraph,
    tiling: &[MotifInstance],
    r: f64,
    realization: Option<&EmbeddedGraph>,
) -> Result<TilingBound> {
    check_disjoint(tiling)?;
    let per_motif = tiling
        .iter()
        .map(|inst| {
            inst.worst_case_frob
                .map_or_else(|| motif_envelope(graph, inst, r), Ok)
        })
        .collect::<Result<Vec<f64>>>()?;
    let motif_term = per_motif.iter().map(|v| v * v).sum::<f64>().sqrt();
    let internal: BTreeSet<Edge> = tiling
        .iter()
        .flat_map(|m| motif_internal_edges(graph, m))
        .collect();
    let residual: Vec<Edge> = graph
        .edges()
        .iter()
        .filter(|e| !internal.contains(e))
        .copied()
        .collect();
    let lipschitz = graph.kernel().bounds(graph.diameter() + 2.0 * r).lipschitz;
    let residual_term = if residual.is_empty() {
        0.0
    } else {
        lipschitz_envelope(&residual, 2.0 * r * lipschitz)
    };
    let total = motif_term + residual_term;
    let (realized_frob, holds) = match realization {
        Some(after) => {
            if !graph.same_combinatorics(after) {
                return Err(Error::CombinatoricsMismatch(
                    "realization differs combinatorially".into(),
                ));
            }
            let f = frobenius_norm(&(after.laplacian() - graph.laplacian()));
            (Some(f), Some(f <= total * (1.0 + 1e-12) + 1e-12))
        }
        None => (None, None),
    };
    Ok(TilingBound {
        per_motif,
        motif_term,
        residual_term,
        total,
        p: tiling.len(),
        realized_frob,
        holds,
    })
}

/// Fills `worst_case_frob` for every instance.
pub fn evaluate_envelopes(
    graph: &EmbeddedGraph,
    tiling: &mut [MotifInstance],
    r: f64,
) -> Result<()> {
    for inst in tiling.iter_mut() {
        inst.worst_case_frob = Some(motif_envelope(graph, inst, r)?);
    }
    Ok(())
}
