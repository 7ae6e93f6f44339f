#![allow(dead_code)]

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use vnoise_core::geometry::Point2;
use vnoise_core::{EmbeddedGraph, WeightKernel};

/// Points in a `span × span` box and an edge subset chosen by `mask`.
pub fn graph_from(points: &[(f64, f64)], mask: &[bool], kernel: WeightKernel) -> EmbeddedGraph {
    let pts: Vec<Point2> = points.iter().map(|&(x, y)| [x, y]).collect();
    let n = pts.len() as u32;
    let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    let edges: Vec<(u32, u32)> = pairs
        .zip(mask.iter().cycle())
        .filter(|(_, &keep)| keep)
        .map(|(p, _)| p)
        .collect();
    EmbeddedGraph::from_points(&pts, edges, kernel).expect("random graph")
}

pub fn kernel_strategy() -> impl Strategy<Value = WeightKernel> {
    prop_oneof![
        Just(WeightKernel::Identity),
        (0.1..3.0f64, 0.0..5.0f64)
            .prop_map(|(slope, offset)| WeightKernel::Affine { slope, offset }),
        (0.01..1.0f64, 1.0..2.5f64)
            .prop_map(|(scale, exponent)| WeightKernel::Power { scale, exponent }),
    ]
}

/// Random planar graph with 3..=n_max vertices in `[0, span]²`.
pub fn graph_strategy(n_max: usize, span: f64) -> impl Strategy<Value = EmbeddedGraph> {
    (3..=n_max)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec((0.0..span, 0.0..span), n),
                prop::collection::vec(any::<bool>(), n * (n - 1) / 2),
                kernel_strategy(),
            )
        })
        .prop_map(|(pts, mask, kernel)| graph_from(&pts, &mask, kernel))
}

/// Jittered grid with axis-parallel edges, a few crossing cell diagonals and
/// optionally a colliding vertex pair.
pub fn sparse_violation_graph(rng: &mut impl Rng, epsilon: f64) -> EmbeddedGraph {
    let (w, h, spacing) = (5usize, 4usize, 100.0);
    let mut pts: Vec<Point2> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            pts.push([
                x as f64 * spacing + rng.random_range(-5.0..5.0),
                y as f64 * spacing + rng.random_range(-5.0..5.0),
            ]);
        }
    }
    let id = |x: usize, y: usize| (y * w + x) as u32;
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w && rng.random_bool(0.6) {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h && rng.random_bool(0.6) {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    let mut cells: Vec<(usize, usize)> = (0..w - 1)
        .flat_map(|x| (0..h - 1).map(move |y| (x, y)))
        .collect();
    cells.shuffle(rng);
    for &(x, y) in cells.iter().take(rng.random_range(1..=3)) {
        edges.push((id(x, y), id(x + 1, y + 1)));
        edges.push((id(x + 1, y), id(x, y + 1)));
    }
    if rng.random_bool(0.5) {
        let &(x, y) = cells.last().expect("cells");
        let base = [(x as f64 + 0.5) * spacing, (y as f64 + 0.5) * spacing];
        pts.push(base);
        pts.push([base[0] + 0.4 * epsilon, base[1]]);
    }
    EmbeddedGraph::from_points(&pts, edges, WeightKernel::Identity).expect("grid graph")
}
