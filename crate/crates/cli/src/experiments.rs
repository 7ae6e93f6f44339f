//! Experiment runners. Each is a pure function of its resolved config.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::output::{CsvTable, ExperimentOutput};
use crate::row;
use vnoise_core::ctpl::{self, AutotuneOptions, CalibrationRecord, CtplDensity, CtplParams};
use vnoise_core::graph::{check_constraints, EmbeddedGraph};
use vnoise_core::metrics::{self, pearson, Regime, S3iResult};
use vnoise_core::motif::{self, canonical_motif, Table1Row};
use vnoise_core::reference::{build_reference_graph, ReferenceVariant};
use vnoise_core::repair::{detect_violations, repair, repair_distortion};
use vnoise_core::{geometry, SeedTree, WeightKernel};

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.experiment {
        Experiment::Table1 => run_table1(cfg),
        Experiment::EdgeCorrelation => run_edge_correlation(cfg),
        Experiment::S3iPanelA
        | Experiment::S3iPanelB
        | Experiment::S3iPanelC
        | Experiment::S3iPanelD => run_s3i_panel(cfg),
        Experiment::AngularSweep => run_angular_sweep(cfg),
        Experiment::RepairDemo => run_repair_demo(cfg),
        Experiment::Calibrate => run_calibrate(cfg),
        Experiment::ExportGraphs => run_export_graphs(cfg),
    }
}

/// Published rows at `k = 2`, `r = 1`: coefficient, shift, Weyl limit, ratio.
pub const TABLE1_EXPECTED: [(f64, f64, f64, f64); 6] = [
    (2.0, 4.0, 4.0, 1.0),
    (3.82, 5.7279, 5.7279, 1.0),
    (5.29, 7.0653, 7.0768, 0.9984),
    (6.29, 7.9030, 7.9523, 0.9938),
    (6.76, 8.2030, 8.3373, 0.9839),
    (6.77, 8.0702, 8.3460, 0.9670),
];
pub const TABLE1_COEFFICIENT_TOL: f64 = 0.01;
pub const TABLE1_VALUE_TOL: f64 = 5e-3;

pub fn table1_rows(k: f64, r: f64) -> Result<Vec<Table1Row>> {
    (1..=6)
        .map(|n| Ok(motif::table1_row(n, k, r, WeightKernel::Identity)?))
        .collect()
}

/// Mismatches against the published table. Shifts scale with `r`; values
/// are only comparable when `k = 2r`.
pub fn table1_mismatches(rows: &[Table1Row], k: f64, r: f64) -> Vec<String> {
    let mut out = Vec::new();
    if (k - 2.0 * r).abs() > 1e-12 * k {
        return out;
    }
    for (row, &(coef, shift, weyl, ratio)) in rows.iter().zip(&TABLE1_EXPECTED) {
        let checks = [
            (
                "delta_wd_coefficient",
                row.delta_wd_coefficient,
                coef,
                TABLE1_COEFFICIENT_TOL,
            ),
            (
                "actual_shift",
                row.actual_shift,
                shift * r,
                TABLE1_VALUE_TOL * r,
            ),
            ("weyl_limit", row.weyl_limit, weyl * r, TABLE1_VALUE_TOL * r),
            ("ratio", row.ratio, ratio, TABLE1_VALUE_TOL),
        ];
        for (name, got, want, tol) in checks {
            if !((got - want).abs() <= tol) {
                out.push(format!(
                    "degree {}: {name} = {got:.6}, expected {want} ± {tol}",
                    row.degree
                ));
            }
        }
    }
    for w in rows.windows(2) {
        if w[1].ratio > w[0].ratio + TABLE1_VALUE_TOL {
            out.push(format!(
                "ratio increases from degree {} to {}",
                w[0].degree, w[1].degree
            ));
        }
    }
    out
}

pub fn run_table1(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rows = table1_rows(cfg.k, cfg.radius)?;
    let comparable = (cfg.k - 2.0 * cfg.radius).abs() <= 1e-12 * cfg.k;
    let mut out = ExperimentOutput {
        failures: table1_mismatches(&rows, cfg.k, cfg.radius),
        ..Default::default()
    };
    let mut t = CsvTable::new(&[
        "degree",
        "delta_wd_coefficient",
        "actual_shift",
        "lambda_n_shift",
        "weyl_limit",
        "ratio",
        "expected_coefficient",
        "expected_shift",
        "expected_weyl",
        "expected_ratio",
        "status",
    ]);
    for (row, &(coef, shift, weyl, ratio)) in rows.iter().zip(&TABLE1_EXPECTED) {
        let tag = format!("degree {}:", row.degree);
        let status = if !comparable {
            "unchecked"
        } else if out.failures.iter().any(|f| f.starts_with(&tag)) {
            "mismatch"
        } else {
            "ok"
        };
        t.push(row!(
            row.degree,
            row.delta_wd_coefficient,
            row.actual_shift,
            row.lambda_n_shift,
            row.weyl_limit,
            row.ratio,
            coef,
            shift * cfg.radius,
            weyl * cfg.radius,
            ratio,
            status
        ));
    }
    out.csv("table1.csv", &t, cfg);
    Ok(out)
}

/// Memoized `λ` calibrations keyed by `(c, r_max)`. Each pair draws from its
/// own named substream, so results do not depend on request order.
pub struct Calibrator {
    root: SeedTree,
    delta: f64,
    options: AutotuneOptions,
    cache: BTreeMap<(u64, u64), CalibrationRecord>,
}

impl Calibrator {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            root: SeedTree::new(cfg.seed).named("calibration"),
            delta: cfg.delta,
            options: AutotuneOptions {
                tol: cfg.calibration_tol,
                max_iter: 40,
                n_mc: cfg.n_mc,
            },
            cache: BTreeMap::new(),
        }
    }

    pub fn params(&mut self, c: f64, r_max: f64) -> Result<CtplParams> {
        Ok(self.record(c, r_max)?.params()?)
    }

    pub fn record(&mut self, c: f64, r_max: f64) -> Result<CalibrationRecord> {
        let key = (c.to_bits(), r_max.to_bits());
        if let Some(r) = self.cache.get(&key) {
            return Ok(r.clone());
        }
        let seed = self.root.named(&format!("{c}/{r_max}")).seed();
        let (_, rec) = ctpl::calibrate(c, r_max, self.delta, &self.options, seed)?;
        self.cache.insert(key, rec.clone());
        Ok(rec)
    }

    pub fn records(&self) -> Vec<CalibrationRecord> {
        self.cache.values().cloned().collect()
    }
}

/// Spoke directions of the asymmetric three-spoke motif.
pub const CORRELATION_SPOKE_ANGLES_DEG: [f64; 3] = [0.0, 60.0, 210.0];

pub fn three_spoke_motif(k: f64) -> Result<EmbeddedGraph> {
    let mut pts = vec![[0.0, 0.0]];
    for a in CORRELATION_SPOKE_ANGLES_DEG {
        pts.push(geometry::polar(k, a.to_radians()));
    }
    Ok(EmbeddedGraph::from_points(
        &pts,
        [(0, 1), (0, 2), (0, 3)],
        WeightKernel::Identity,
    )?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub i: usize,
    pub j: usize,
    pub rho: f64,
    pub null_mean: f64,
    pub null_sd: f64,
    pub z: f64,
    pub distinguishable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationCondition {
    pub sweep: &'static str,
    pub c: f64,
    pub epsilon: f64,
    pub k: f64,
    pub lambda: f64,
    pub samples: usize,
    pub matrix: [[f64; 3]; 3],
    pub pairs: Vec<PairCorrelation>,
}

/// Edge-length correlations of the three-spoke motif under vertex noise,
/// each off-diagonal entry compared with a shuffled-pairing null.
pub fn correlation_condition(
    sweep: &'static str,
    epsilon: f64,
    params: &CtplParams,
    samples: usize,
    permutations: usize,
    seeds: SeedTree,
) -> Result<CorrelationCondition> {
    use rand::seq::SliceRandom;

    let k = 2.0 * params.r_max + epsilon;
    let g = three_spoke_motif(k)?;
    let mut rng = seeds.named("noise").rng();
    let mut lengths: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(samples));
    for _ in 0..samples {
        let h = g.apply_vertex_noise(params, &mut rng, None)?;
        for (col, e) in lengths.iter_mut().zip(h.edges()) {
            col.push(h.edge_length(e));
        }
    }
    let mut matrix = [[1.0; 3]; 3];
    let mut pairs = Vec::new();
    let mut null_rng = seeds.named("null").rng();
    for i in 0..3 {
        for j in i + 1..3 {
            let rho = pearson(&lengths[i], &lengths[j]);
            matrix[i][j] = rho;
            matrix[j][i] = rho;
            let mut shuffled = lengths[j].clone();
            let null: Vec<f64> = (0..permutations)
                .map(|_| {
                    shuffled.shuffle(&mut null_rng);
                    pearson(&lengths[i], &shuffled)
                })
                .collect();
            let null_mean = metrics::mean(&null);
            let null_sd = metrics::sample_variance(&null).sqrt();
            let z = (rho - null_mean) / null_sd;
            pairs.push(PairCorrelation {
                i,
                j,
                rho,
                null_mean,
                null_sd,
                z,
                distinguishable: z.abs() > 3.0,
            });
        }
    }
    Ok(CorrelationCondition {
        sweep,
        c: params.c,
        epsilon,
        k,
        lambda: params.lambda,
        samples,
        matrix,
        pairs,
    })
}

pub fn edge_correlation_conditions(cfg: &ExperimentConfig) -> Result<Vec<CorrelationCondition>> {
    let mut cal = Calibrator::new(cfg);
    let r_max = cfg.r_max_values[0];
    let root = SeedTree::new(cfg.seed).named("edge_correlation");
    let mut out = Vec::new();
    for (i, &c) in cfg.c_values.iter().enumerate() {
        let p = cal.params(c, r_max)?;
        out.push(correlation_condition(
            "c",
            0.0,
            &p,
            cfg.samples,
            cfg.permutations,
            root.named("c").child(i as u64),
        )?);
    }
    let p = cal.params(cfg.c_values[0], r_max)?;
    for (i, &eps) in cfg.epsilon_values.iter().enumerate() {
        out.push(correlation_condition(
            "epsilon",
            eps,
            &p,
            cfg.samples,
            cfg.permutations,
            root.named("epsilon").child(i as u64),
        )?);
    }
    Ok(out)
}

pub fn run_edge_correlation(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let conditions = edge_correlation_conditions(cfg)?;
    let mut out = ExperimentOutput::default();
    let mut m = CsvTable::new(&[
        "sweep", "c", "epsilon", "k", "lambda", "row", "e0", "e1", "e2",
    ]);
    let mut p = CsvTable::new(&[
        "sweep",
        "c",
        "epsilon",
        "i",
        "j",
        "rho",
        "null_mean",
        "null_sd",
        "z",
        "distinguishable",
    ]);
    for cond in &conditions {
        for (r, line) in cond.matrix.iter().enumerate() {
            m.push(row!(
                cond.sweep,
                cond.c,
                cond.epsilon,
                cond.k,
                cond.lambda,
                r,
                line[0],
                line[1],
                line[2]
            ));
        }
        for pc in &cond.pairs {
            p.push(row!(
                cond.sweep,
                cond.c,
                cond.epsilon,
                pc.i,
                pc.j,
                pc.rho,
                pc.null_mean,
                pc.null_sd,
                pc.z,
                pc.distinguishable
            ));
        }
    }
    out.csv("edge_correlation_matrices.csv", &m, cfg);
    out.csv("edge_correlation_null.csv", &p, cfg);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PanelComparison {
    pub label: String,
    pub regime_a: String,
    pub regime_b: String,
    pub c_a: f64,
    pub c_b: f64,
    pub r_max_a: f64,
    pub r_max_b: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub result: S3iResult,
}

struct Side {
    name: String,
    graph: EmbeddedGraph,
    c: f64,
    r_max: f64,
}

fn reference(cfg: &ExperimentConfig, v: ReferenceVariant) -> Result<EmbeddedGraph> {
    Ok(build_reference_graph(v, cfg.k, cfg.spacing)?)
}

fn panel_sides(cfg: &ExperimentConfig) -> Result<Vec<(Side, Side)>> {
    let het = reference(cfg, ReferenceVariant::Heterogeneous)?;
    let r0 = cfg.r_max_values[0];
    let c0 = cfg.c_values[0];
    let side = |name: String, graph: &EmbeddedGraph, c: f64, r_max: f64| Side {
        name,
        graph: graph.clone(),
        c,
        r_max,
    };
    let mut out = Vec::new();
    match cfg.experiment {
        Experiment::S3iPanelA => {
            for &c in &cfg.c_values[1..] {
                out.push((
                    side(format!("heterogeneous c={c0}"), &het, c0, r0),
                    side(format!("heterogeneous c={c}"), &het, c, r0),
                ));
            }
        }
        Experiment::S3iPanelB => {
            for &r in &cfg.r_max_values[1..] {
                out.push((
                    side(format!("heterogeneous r_max={r0}"), &het, c0, r0),
                    side(format!("heterogeneous r_max={r}"), &het, c0, r),
                ));
            }
        }
        Experiment::S3iPanelC => {
            let uni = reference(cfg, ReferenceVariant::Uniform)?;
            for &c in &cfg.c_values {
                out.push((
                    side(format!("heterogeneous c={c}"), &het, c, r0),
                    side(format!("uniform c={c}"), &uni, c, r0),
                ));
            }
        }
        Experiment::S3iPanelD => {
            let unc = reference(cfg, ReferenceVariant::Unconstrained)?;
            let (rep, _) = repair(&unc, cfg.epsilon)?;
            for &c in &cfg.c_values {
                out.push((
                    side(format!("unconstrained c={c}"), &unc, c, r0),
                    side(format!("repaired c={c}"), &rep, c, r0),
                ));
            }
        }
        _ => unreachable!("not a panel experiment"),
    }
    Ok(out)
}

pub fn s3i_panel(cfg: &ExperimentConfig) -> Result<(Vec<PanelComparison>, Vec<CalibrationRecord>)> {
    let mut cal = Calibrator::new(cfg);
    let root = SeedTree::new(cfg.seed).named(cfg.experiment.name());
    let mut out = Vec::new();
    for (i, (a, b)) in panel_sides(cfg)?.into_iter().enumerate() {
        let pa = cal.params(a.c, a.r_max)?;
        let pb = cal.params(b.c, b.r_max)?;
        let result = metrics::s3i_replicated(
            Regime {
                graph: &a.graph,
                noise: &pa,
            },
            Regime {
                graph: &b.graph,
                noise: &pb,
            },
            cfg.runs,
            cfg.samples,
            cfg.alpha,
            cfg.oracle,
            root.child(i as u64),
        )?;
        out.push(PanelComparison {
            label: format!("{} vs {}", a.name, b.name),
            regime_a: a.name,
            regime_b: b.name,
            c_a: a.c,
            c_b: b.c,
            r_max_a: a.r_max,
            r_max_b: b.r_max,
            lambda_a: pa.lambda,
            lambda_b: pb.lambda,
            result,
        });
    }
    Ok((out, cal.records()))
}

pub fn run_s3i_panel(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (comparisons, records) = s3i_panel(cfg)?;
    let mut t = CsvTable::new(&[
        "regime_a",
        "regime_b",
        "c_a",
        "c_b",
        "r_max_a",
        "r_max_b",
        "lambda_a",
        "lambda_b",
        "point",
        "ci_lower",
        "ci_upper",
        "signed_lo",
        "signed_hi",
        "runs",
        "dropped",
        "samples_per_run",
        "alpha",
        "separable",
    ]);
    for p in &comparisons {
        let r = &p.result;
        t.push(row!(
            p.regime_a.as_str(),
            p.regime_b.as_str(),
            p.c_a,
            p.c_b,
            p.r_max_a,
            p.r_max_b,
            p.lambda_a,
            p.lambda_b,
            r.point,
            r.ci_lower,
            r.ci_upper,
            r.signed_ci[0],
            r.signed_ci[1],
            r.runs,
            r.dropped,
            r.samples_per_run,
            r.alpha,
            r.separable
        ));
    }
    let name = cfg.experiment.name();
    let mut out = ExperimentOutput::default();
    out.csv(&format!("{name}.csv"), &t, cfg);
    out.json(&format!("{name}.json"), &comparisons)?;
    out.json("calibration.json", &records)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub degree: usize,
    pub argmax_offset_deg: f64,
    pub value_at_zero: f64,
    pub max_value: f64,
    /// Largest `|f(θ) − f(−θ)|` over the grid.
    pub asymmetry: f64,
    /// `|f(60°) − f(0°)|`.
    pub edge_gap: f64,
}

pub fn sweep_offsets(grid_points: usize) -> Vec<f64> {
    let span = PI / 3.0;
    (0..grid_points)
        .map(|i| -span + 2.0 * span * i as f64 / (grid_points - 1) as f64)
        .collect()
}

pub fn angular_sweeps(
    cfg: &ExperimentConfig,
) -> Result<Vec<(Vec<motif::SweepPoint>, SweepSummary)>> {
    let offsets = sweep_offsets(cfg.grid_points);
    let root = SeedTree::new(cfg.seed).named("angular_sweep");
    let mut out = Vec::new();
    for n in 1..=motif::MAX_DEGREE {
        let m = canonical_motif(n, cfg.k, cfg.radius)?;
        let mut rng = root.child(n as u64).rng();
        let curve = motif::angular_sweep(
            &m,
            cfg.radius,
            WeightKernel::Identity,
            &offsets,
            cfg.jitters,
            &mut rng,
        )?;
        let (mut arg, mut best) = (0, f64::NEG_INFINITY);
        for (i, p) in curve.iter().enumerate() {
            // ties keep the offset closest to zero
            let closer = p.offset.abs() < curve[arg].offset.abs();
            if p.delta_wd > best + 1e-12 || ((p.delta_wd - best).abs() <= 1e-12 && closer) {
                best = p.delta_wd;
                arg = i;
            }
        }
        let len = curve.len();
        let asymmetry = (0..len)
            .map(|i| (curve[i].delta_wd - curve[len - 1 - i].delta_wd).abs())
            .fold(0.0, f64::max);
        let at = |theta: f64| {
            motif::directional_delta_wd(
                &m,
                cfg.radius,
                m.unoccupied_bisector() + theta,
                WeightKernel::Identity,
            )
        };
        let summary = SweepSummary {
            degree: n,
            argmax_offset_deg: curve[arg].offset.to_degrees(),
            value_at_zero: at(0.0),
            max_value: best,
            asymmetry,
            edge_gap: (at(PI / 3.0) - at(0.0)).abs(),
        };
        out.push((curve, summary));
    }
    Ok(out)
}

pub fn run_angular_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sweeps = angular_sweeps(cfg)?;
    let mut t = CsvTable::new(&["degree", "offset_deg", "delta_wd", "jitter_max"]);
    let mut s = CsvTable::new(&[
        "degree",
        "argmax_offset_deg",
        "value_at_zero",
        "max_value",
        "asymmetry",
        "edge_gap",
    ]);
    for (curve, sum) in &sweeps {
        for p in curve {
            t.push(row!(
                sum.degree,
                p.offset.to_degrees(),
                p.delta_wd,
                p.jitter_max
            ));
        }
        s.push(row!(
            sum.degree,
            sum.argmax_offset_deg,
            sum.value_at_zero,
            sum.max_value,
            sum.asymmetry,
            sum.edge_gap
        ));
    }
    let mut out = ExperimentOutput::default();
    out.csv("angular_sweep.csv", &t, cfg);
    out.csv("angular_sweep_summary.csv", &s, cfg);
    Ok(out)
}

pub fn run_repair_demo(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let g = reference(cfg, ReferenceVariant::Unconstrained)?;
    let before = detect_violations(&g, cfg.epsilon)?;
    let (h, log) = repair(&g, cfg.epsilon)?;
    let after = detect_violations(&h, cfg.epsilon)?;
    let d = repair_distortion(&g, &h, &log)?;
    let mut t = CsvTable::new(&[
        "epsilon",
        "vertices_before",
        "edges_before",
        "vertices_after",
        "edges_after",
        "violations_before",
        "violations_after",
        "edit_count",
        "rows_touched",
        "spectral_distance",
        "phi_initial",
        "phi_final",
        "phi_monotone",
    ]);
    t.push(row!(
        cfg.epsilon,
        g.vertex_count(),
        g.edge_count(),
        h.vertex_count(),
        h.edge_count(),
        before.len(),
        after.len(),
        d.edit_count,
        d.rows_touched,
        d.spectral_distance,
        log.phi_trace[0].phi,
        log.phi_trace[log.phi_trace.len() - 1].phi,
        log.is_monotone()
    ));
    let mut out = ExperimentOutput::default();
    out.csv("repair_summary.csv", &t, cfg);
    out.text("unconstrained_graph.json", g.to_json()? + "\n");
    out.text("repaired_graph.json", h.to_json()? + "\n");
    out.text("repair_log.json", log.to_json()? + "\n");
    Ok(out)
}

pub fn run_calibrate(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut cal = Calibrator::new(cfg);
    let check = SeedTree::new(cfg.seed).named("calibration_check");
    let mut t = CsvTable::new(&[
        "c",
        "r_max",
        "delta",
        "lambda",
        "tail_check",
        "tail_quadrature",
    ]);
    let mut i = 0u64;
    for &r in &cfg.r_max_values {
        for &c in &cfg.c_values {
            let p = cal.params(c, r)?;
            let mut rng = check.child(i).rng();
            i += 1;
            let tail = ctpl::estimate_tail(&p, r, cfg.n_mc, &mut rng)?;
            let exact = CtplDensity::new(p)?.survival(r)?;
            t.push(row!(c, r, cfg.delta, p.lambda, tail, exact));
        }
    }
    let mut out = ExperimentOutput::default();
    out.csv("calibration.csv", &t, cfg);
    out.json("calibration.json", &cal.records())?;
    Ok(out)
}

pub fn run_export_graphs(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    let k_min = 2.0 * cfg.r_max_values[0] + cfg.epsilon;
    for v in [
        ReferenceVariant::Heterogeneous,
        ReferenceVariant::Unconstrained,
        ReferenceVariant::Uniform,
    ] {
        let g = reference(cfg, v)?;
        out.text(&format!("{}_graph.json", v.name()), g.to_json()? + "\n");
        let mut csv = format!(
            "# experiment={} seed={} config_sha256={}\n",
            cfg.experiment.name(),
            cfg.seed,
            cfg.hash()
        );
        csv.push_str(&g.edge_table_csv());
        out.text(&format!("{}_edges.csv", v.name()), csv);
        out.json(
            &format!("{}_constraints.json", v.name()),
            &check_constraints(&g, cfg.epsilon, k_min)?,
        )?;
    }
    Ok(out)
}
