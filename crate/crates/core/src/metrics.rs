//! Stochastic co-spectrality moments, Cantelli observability and the S3I
//! separation index.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctpl::CtplParams;
use crate::error::{Error, Result};
use crate::graph::EmbeddedGraph;
use crate::rng::SeedTree;
use crate::spectral::{graph_spectrum, spectral_distance, Spectrum};

/// Largest fraction of degenerate runs tolerated by [`s3i_replicated`].
pub const MAX_DROPPED_FRACTION: f64 = 0.10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    /// Distances to the noise-free graph.
    #[default]
    Strong,
    /// Distances between two independent noisy copies.
    Weak,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub values: Vec<f64>,
    pub oracle: Oracle,
    pub seed: u64,
}

impl DistanceSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (`n − 1` denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Percentile `q ∈ [0, 1]` with linear interpolation between order
/// statistics at position `q (n − 1)`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    percentile(&s, 0.5)
}

/// Pearson correlation; NaN when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// One spectral distance draw under `oracle`.
pub fn draw_distance<R: Rng + ?Sized>(
    graph: &EmbeddedGraph,
    base: &Spectrum,
    noise: &CtplParams,
    oracle: Oracle,
    rng: &mut R,
) -> Result<f64> {
    let first = graph_spectrum(&graph.apply_vertex_noise(noise, rng, None)?)?;
    match oracle {
        Oracle::Strong => spectral_distance(base, &first),
        Oracle::Weak => {
            let second = graph_spectrum(&graph.apply_vertex_noise(noise, rng, None)?)?;
            spectral_distance(&first, &second)
        }
    }
}

/// `n` distance draws from the stream of `seeds`.
pub fn sample_distances(
    graph: &EmbeddedGraph,
    noise: &CtplParams,
    n: usize,
    oracle: Oracle,
    seeds: SeedTree,
) -> Result<DistanceSample> {
    let base = graph_spectrum(graph)?;
    let mut rng = seeds.rng();
    let values = (0..n)
        .map(|_| draw_distance(graph, &base, noise, oracle, &mut rng))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DistanceSample {
        values,
        oracle,
        seed: seeds.seed(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScMoments {
    /// `SC_1 .. SC_kmax`.
    pub raw: Vec<f64>,
    pub mean: f64,
    /// `SC_2 − SC_1²`, clipped at 0.
    pub variance: f64,
}

/// Monte Carlo raw moments of the strong-oracle distance.
pub fn sc_moments<R: Rng + ?Sized>(
    graph: &EmbeddedGraph,
    noise: &CtplParams,
    k_max: usize,
    n_samples: usize,
    rng: &mut R,
) -> Result<ScMoments> {
    if n_samples < 2 || k_max == 0 {
        return Err(Error::Parameter(
            "sc_moments needs k_max >= 1 and n_samples >= 2".into(),
        ));
    }
    let base = graph_spectrum(graph)?;
    let mut raw = vec![0.0; k_max.max(2)];
    for _ in 0..n_samples {
        let d = draw_distance(graph, &base, noise, Oracle::Strong, rng)?;
        let mut p = 1.0;
        for m in raw.iter_mut() {
            p *= d;
            *m += p;
        }
    }
    for m in raw.iter_mut() {
        *m /= n_samples as f64;
    }
    let variance = (raw[1] - raw[0] * raw[0]).max(0.0);
    let mean = raw[0];
    raw.truncate(k_max);
    Ok(ScMoments {
        raw,
        mean,
        variance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservedSc {
    /// Mean pairwise distance between independent noisy copies.
    pub mean: f64,
    pub std_error: f64,
    pub n_pairs: usize,
}

/// Weak-oracle co-spectrality `E[d_SD(G_i, G_j)]`.
pub fn sc_observed<R: Rng + ?Sized>(
    graph: &EmbeddedGraph,
    noise: &CtplParams,
    n_pairs: usize,
    rng: &mut R,
) -> Result<ObservedSc> {
    if n_pairs == 0 {
        return Err(Error::Parameter("sc_observed needs n_pairs >= 1".into()));
    }
    let base = graph_spectrum(graph)?;
    let d = (0..n_pairs)
        .map(|_| draw_distance(graph, &base, noise, Oracle::Weak, rng))
        .collect::<Result<Vec<f64>>>()?;
    let std_error = if n_pairs > 1 {
        (sample_variance(&d) / n_pairs as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(ObservedSc {
        mean: mean(&d),
        std_error,
        n_pairs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observability {
    pub threshold: f64,
    pub observable: bool,
}

/// Cantelli test: observable when `D* > μ + σ·sqrt((1 − α)/α)`.
pub fn observability_test(
    d_star: f64,
    mu_d: f64,
    sigma_d: f64,
    alpha: f64,
) -> Result<Observability> {
    if !(sigma_d > 0.0) {
        return Err(Error::DegenerateSample(format!(
            "sigma must be positive, got {sigma_d}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let threshold = mu_d + sigma_d * ((1.0 - alpha) / alpha).sqrt();
    Ok(Observability {
        threshold,
        observable: d_star > threshold,
    })
}

/// Signed effect size `(μ_a − μ_b) / sqrt((σ_a² + σ_b²)/2)`.
pub fn s3i_signed(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateSample(
            "S3I needs at least two values per sample".into(),
        ));
    }
    let pooled = 0.5 * (sample_variance(a) + sample_variance(b));
    if !(pooled > 0.0) {
        return Err(Error::DegenerateSample("pooled variance is zero".into()));
    }
    Ok((mean(a) - mean(b)) / pooled.sqrt())
}

pub fn s3i(a: &DistanceSample, b: &DistanceSample) -> Result<f64> {
    Ok(s3i_signed(&a.values, &b.values)?.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S3iResult {
    /// Median of run-level `|S3I|`.
    pub point: f64,
    /// Magnitude interval: `[min(|lo|,|hi|), max(|lo|,|hi|)]` when the signed
    /// percentile interval excludes zero, otherwise `[0, max(|lo|,|hi|)]`.
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Percentile interval of the signed run-level values.
    pub signed_ci: [f64; 2],
    pub runs: usize,
    pub dropped: usize,
    pub samples_per_run: usize,
    pub alpha: f64,
    pub separable: bool,
    pub seed: u64,
}

/// One regime of a replicated comparison.
#[derive(Clone, Copy, Debug)]
pub struct Regime<'a> {
    pub graph: &'a EmbeddedGraph,
    pub noise: &'a CtplParams,
}

/// S3I over `runs` independent Monte Carlo runs. Run `i` draws regime `a`
/// from `seeds.child(i).child(0)` and regime `b` from `.child(1)`.
pub fn s3i_replicated(
    a: Regime<'_>,
    b: Regime<'_>,
    runs: usize,
    samples_per_run: usize,
    alpha: f64,
    oracle: Oracle,
    seeds: SeedTree,
) -> Result<S3iResult> {
    if runs < 2 || samples_per_run < 2 {
        return Err(Error::Parameter(
            "s3i_replicated needs runs >= 2 and samples_per_run >= 2".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let outcomes: Vec<Result<Option<f64>>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let run = seeds.child(i as u64);
            let sa = sample_distances(a.graph, a.noise, samples_per_run, oracle, run.child(0))?;
            let sb = sample_distances(b.graph, b.noise, samples_per_run, oracle, run.child(1))?;
            match s3i_signed(&sa.values, &sb.values) {
                Ok(v) => Ok(Some(v)),
                Err(Error::DegenerateSample(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut signed = Vec::with_capacity(runs);
    for o in outcomes {
        if let Some(v) = o? {
            signed.push(v);
        }
    }
    let dropped = runs - signed.len();
    if dropped as f64 > MAX_DROPPED_FRACTION * runs as f64 || signed.len() < 2 {
        return Err(Error::Reliability { dropped, runs });
    }
    let magnitudes: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
    signed.sort_by(f64::total_cmp);
    let lo = percentile(&signed, alpha / 2.0);
    let hi = percentile(&signed, 1.0 - alpha / 2.0);
    let excludes_zero = lo > 0.0 || hi < 0.0;
    let ci_upper = lo.abs().max(hi.abs());
    let ci_lower = if excludes_zero {
        lo.abs().min(hi.abs())
    } else {
        0.0
    };
    Ok(S3iResult {
        point: median(&magnitudes),
        ci_lower,
        ci_upper,
        signed_ci: [lo, hi],
        runs,
        dropped,
        samples_per_run,
        alpha,
        separable: ci_lower > 0.0,
        seed: seeds.seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{default_reference_graph, ReferenceVariant};

    #[test]
    fn hand_computed_s3i() {
        let a = [0.0, 0.0, 2.0, 2.0];
        let b = [4.0, 4.0, 6.0, 6.0];
        let v = s3i_signed(&a, &b).unwrap();
        assert!((v + 3.464_101_615_137_754_6).abs() < 1e-12);
        assert_eq!(s3i_signed(&a, &a).unwrap(), 0.0);
        let scaled: Vec<f64> = a.iter().map(|x| 7.5 * x).collect();
        let scaled_b: Vec<f64> = b.iter().map(|x| 7.5 * x).collect();
        assert!((s3i_signed(&scaled, &scaled_b).unwrap() - v).abs() < 1e-12);
        assert!(matches!(
            s3i_signed(&[1.0, 1.0], &[1.0, 1.0]),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn cantelli_thresholds() {
        let o = observability_test(0.0, 0.0, 1.0, 0.04).unwrap();
        assert!((o.threshold - 24f64.sqrt()).abs() < 1e-12);
        let half = observability_test(3.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(half.threshold, 3.0);
        assert!(!half.observable);
        assert!(!observability_test(1.0, 1.0, 1.0, 0.999).unwrap().observable);
        assert!(observability_test(1.0, 0.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn percentile_interpolates() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&s, 0.0), 1.0);
        assert_eq!(percentile(&s, 1.0), 4.0);
        assert!((percentile(&s, 0.5) - 2.5).abs() < 1e-15);
        assert!((percentile(&s, 0.025) - 1.075).abs() < 1e-12);
    }

    #[test]
    fn vanishing_noise_gives_vanishing_moments() {
        let g = default_reference_graph(ReferenceVariant::Heterogeneous);
        let p = CtplParams::new(1.0, 0.0, 1e-9, 0.05).unwrap();
        let mut rng = SeedTree::new(3).rng();
        let m = sc_moments(&g, &p, 3, 20, &mut rng).unwrap();
        assert!(m.raw[0] < 1e-9);
        assert!(m.raw[1] >= m.raw[0] * m.raw[0] - 1e-18);
        let obs = sc_observed(&g, &p, 5, &mut rng).unwrap();
        assert!(obs.mean < 1e-9);
    }

    #[test]
    fn replication_is_deterministic() {
        let g = default_reference_graph(ReferenceVariant::Heterogeneous);
        let pa = CtplParams::new(1.0, 0.00615, 40.0, 0.05).unwrap();
        let pb = CtplParams::new(5.0, 0.02069, 40.0, 0.05).unwrap();
        let run = || {
            s3i_replicated(
                Regime {
                    graph: &g,
                    noise: &pa,
                },
                Regime {
                    graph: &g,
                    noise: &pb,
                },
                8,
                20,
                0.05,
                Oracle::Strong,
                SeedTree::new(11),
            )
            .unwrap()
        };
        let (x, y) = (run(), run());
        assert_eq!(x, y);
        assert!(x.ci_lower <= x.point && x.point <= x.ci_upper);
    }
}
