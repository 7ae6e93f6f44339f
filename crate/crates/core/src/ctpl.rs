//! Calibrated, exponentially tempered power-law (CTPL) radial noise.
//!
//! The untempered kernel is the Lévy density with location `mu` and scale `c`.
//! Multiplying by `exp(-lambda * x)` and renormalizing gives a law with all
//! moments finite that still behaves like `x^{-3/2}` for `x << 1/lambda`.
//! `lambda` is tuned so that `P[X > r_max] <= delta`, and draws are clipped at
//! `r_max`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::rng::SeedTree;

/// Rejection iterations allowed per draw before reporting a stall.
pub const SAMPLER_STALL_CAP: u64 = 1_000_000;

/// Upper end of the tempering bisection bracket.
pub const LAMBDA_BRACKET_HIGH: f64 = 2.0;

/// Quadrature tolerance for the normalizing constant.
pub const NORMALIZATION_REL_TOL: f64 = 1e-10;

// Truncation of the tempered integral at mu + TEMPERED_SPAN / lambda.
const TEMPERED_SPAN: f64 = 50.0;
// Below u = c / LEFT_CUTOFF the Lévy factor exp(-c / 2u) is under e^-800.
const LEFT_CUTOFF: f64 = 1600.0;

/// Parameters of the CTPL radial law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtplParams {
    /// Lévy scale.
    pub c: f64,
    /// Exponential tempering rate.
    pub lambda: f64,
    /// Location; radial displacements use 0.
    #[serde(default)]
    pub mu: f64,
    /// Clip radius.
    pub r_max: f64,
    /// Tail tolerance the tempering was (or will be) tuned for.
    pub delta: f64,
}

impl CtplParams {
    pub fn new(c: f64, lambda: f64, r_max: f64, delta: f64) -> Result<Self> {
        Self::with_location(c, lambda, 0.0, r_max, delta)
    }

    pub fn with_location(c: f64, lambda: f64, mu: f64, r_max: f64, delta: f64) -> Result<Self> {
        let p = Self {
            c,
            lambda,
            mu,
            r_max,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Parameter(format!(
                "scale c must be positive, got {}",
                self.c
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Parameter(format!(
                "tempering lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::Parameter("location mu must be finite".into()));
        }
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(Error::Parameter(format!(
                "r_max must be positive, got {}",
                self.r_max
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Parameter(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }
}

/// Lévy density `sqrt(c/2π) (x-μ)^{-3/2} exp(-c / (2(x-μ)))` for `x > μ`.
pub fn levy_pdf(x: f64, c: f64, mu: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Parameter(format!(
            "scale c must be positive, got {c}"
        )));
    }
    Ok(levy_shifted(x - mu, c))
}

fn levy_shifted(u: f64, c: f64) -> f64 {
    if u.is_nan() || u <= 0.0 || u.is_infinite() {
        return 0.0;
    }
    (c / (2.0 * PI)).sqrt() * u.powf(-1.5) * (-c / (2.0 * u)).exp()
}

/// Normalized CTPL density with a cached normalizing constant.
///
/// Everything is computed in the shifted variable `u = x - mu`; the factor
/// `exp(-lambda * mu)` cancels between numerator and normalizer.
#[derive(Clone, Debug)]
pub struct CtplDensity {
    params: CtplParams,
    mass: f64,
    mass_error: f64,
}

impl CtplDensity {
    pub fn new(params: CtplParams) -> Result<Self> {
        params.validate()?;
        let (mass, mass_error) = if params.lambda == 0.0 {
            (1.0, 0.0)
        } else {
            let upper = TEMPERED_SPAN / params.lambda;
            let body = shifted_mass(params.c, params.lambda, 0.0, upper)?;
            let remainder = tempered_remainder(params.c, params.lambda, upper);
            (body.value, body.abs_error + remainder)
        };
        if !(mass > 0.0) {
            return Err(Error::Quadrature(format!(
                "normalizing constant underflowed for c = {}, lambda = {}",
                params.c, params.lambda
            )));
        }
        Ok(Self {
            params,
            mass,
            mass_error,
        })
    }

    pub fn params(&self) -> &CtplParams {
        &self.params
    }

    /// Normalizing constant `Z` with the location factor removed.
    pub fn normalization(&self) -> f64 {
        self.mass
    }

    pub fn normalization_error(&self) -> f64 {
        self.mass_error
    }

    /// Unnormalized tempered Lévy density in the shifted variable.
    fn kernel(&self, u: f64) -> f64 {
        levy_shifted(u, self.params.c) * (-self.params.lambda * u).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.kernel(x - self.params.mu) / self.mass
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let u = x - self.params.mu;
        if u <= 0.0 {
            return Ok(0.0);
        }
        if self.params.lambda == 0.0 {
            return Ok(levy_cdf_shifted(u, self.params.c));
        }
        let upper = TEMPERED_SPAN / self.params.lambda;
        if u >= upper {
            return Ok((1.0 - self.survival(x)?).clamp(0.0, 1.0));
        }
        let m = shifted_mass(self.params.c, self.params.lambda, 0.0, u)?;
        Ok((m.value / self.mass).clamp(0.0, 1.0))
    }

    /// `P[X > x]` under the untruncated (unclipped) law.
    pub fn survival(&self, x: f64) -> Result<f64> {
        let u = x - self.params.mu;
        if u <= 0.0 {
            return Ok(1.0);
        }
        let (c, lambda) = (self.params.c, self.params.lambda);
        if lambda == 0.0 {
            return Ok(1.0 - levy_cdf_shifted(u, c));
        }
        let upper = TEMPERED_SPAN / lambda;
        let body = if u < upper {
            shifted_mass(c, lambda, u, upper)?.value
        } else {
            0.0
        };
        let remainder = tempered_remainder(c, lambda, u.max(upper));
        Ok(((body + remainder) / self.mass).clamp(0.0, 1.0))
    }

    /// CDF at each point of an ascending slice, integrating only between
    /// consecutive points.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut prev_u = 0.0_f64;
        let mut acc = 0.0_f64;
        for &x in xs {
            let u = x - self.params.mu;
            if u < prev_u {
                return Err(Error::Input("cdf_sorted expects ascending input".into()));
            }
            if u <= 0.0 {
                out.push(0.0);
                continue;
            }
            if self.params.lambda == 0.0 {
                out.push(levy_cdf_shifted(u, self.params.c));
                prev_u = u;
                continue;
            }
            let piece = shifted_mass(self.params.c, self.params.lambda, prev_u, u)?;
            acc += piece.value;
            prev_u = u;
            out.push((acc / self.mass).clamp(0.0, 1.0));
        }
        Ok(out)
    }
}

/// Normalized CTPL density at `x`.
pub fn ctpl_pdf(x: f64, params: &CtplParams) -> Result<f64> {
    Ok(CtplDensity::new(*params)?.pdf(x))
}

fn levy_cdf_shifted(u: f64, c: f64) -> f64 {
    libm::erfc((c / (2.0 * u)).sqrt())
}

// ∫_{lo}^{hi} levy(u) exp(-lambda u) du, integrated in t = ln u where the
// integrand is smooth and decays on both sides.
fn shifted_mass(c: f64, lambda: f64, lo: f64, hi: f64) -> Result<quadrature::Integral> {
    if hi <= lo || hi <= 0.0 {
        return Ok(quadrature::Integral {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let t_hi = hi.ln();
    let floor = (c / LEFT_CUTOFF).ln().min(t_hi - 10.0);
    let t_lo = if lo > 0.0 { lo.ln().max(floor) } else { floor };
    if t_lo >= t_hi {
        return Ok(quadrature::Integral {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let norm = (c / (2.0 * PI)).sqrt();
    let g = |t: f64| {
        let u = t.exp();
        norm * (-0.5 * t - c / (2.0 * u) - lambda * u).exp()
    };
    quadrature::integrate(g, t_lo, t_hi, 1e-300, NORMALIZATION_REL_TOL * 1e-2, 4000)
}

// ∫_T^∞ levy(u) e^{-λu} du ≤ sqrt(c/2π) T^{-3/2} e^{-λT} / λ.
fn tempered_remainder(c: f64, lambda: f64, t: f64) -> f64 {
    (c / (2.0 * PI)).sqrt() * t.powf(-1.5) * (-lambda * t).exp() / lambda
}

/// A clipped radial draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialSample {
    pub radius: f64,
    pub clipped: bool,
}

/// One draw from the unclipped tempered law by rejection from the Lévy
/// proposal `mu + c / z^2`.
pub fn sample_raw<R: Rng + ?Sized>(params: &CtplParams, rng: &mut R) -> Result<f64> {
    for _ in 0..SAMPLER_STALL_CAP {
        let z: f64 = rng.sample(StandardNormal);
        let u = params.c / (z * z);
        if !u.is_finite() || u <= 0.0 {
            continue;
        }
        // target / proposal density ratio; shifted so it never exceeds one
        let accept = (-params.lambda * u).exp();
        let v: f64 = rng.random();
        if v < accept {
            return Ok(params.mu + u);
        }
    }
    Err(Error::SamplerStall {
        iterations: SAMPLER_STALL_CAP,
    })
}

/// One draw clipped at `r_max`.
pub fn sample_radius<R: Rng + ?Sized>(params: &CtplParams, rng: &mut R) -> Result<RadialSample> {
    let x = sample_raw(params, rng)?;
    Ok(if x > params.r_max {
        RadialSample {
            radius: params.r_max,
            clipped: true,
        }
    } else {
        RadialSample {
            radius: x,
            clipped: false,
        }
    })
}

/// Monte Carlo estimate of `P[X > threshold]` from raw (unclipped) draws.
pub fn estimate_tail<R: Rng + ?Sized>(
    params: &CtplParams,
    threshold: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Parameter("n_samples must be at least 1".into()));
    }
    let mut count = 0usize;
    for _ in 0..n_samples {
        if sample_raw(params, rng)? > threshold {
            count += 1;
        }
    }
    Ok(count as f64 / n_samples as f64)
}

/// Bisection settings for [`autotune_tempering`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutotuneOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub n_mc: usize,
}

impl Default for AutotuneOptions {
    fn default() -> Self {
        Self {
            tol: 2e-4,
            max_iter: 40,
            n_mc: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Autotuned {
    pub lambda: f64,
    /// Tail estimate at the returned `lambda`.
    pub tail: f64,
    pub iterations: usize,
    /// Whether `|tail - delta| < tol` was reached before `max_iter`.
    pub converged: bool,
}

/// Bisects `lambda` on `[0, 2]` until the Monte Carlo tail probability at
/// `r_max` is within `tol` of `delta`. Each midpoint draws from its own
/// substream of `seeds`.
pub fn autotune_tempering(
    c: f64,
    mu: f64,
    r_max: f64,
    delta: f64,
    options: &AutotuneOptions,
    seeds: SeedTree,
) -> Result<Autotuned> {
    let base = CtplParams::with_location(c, 0.0, mu, r_max, delta)?;
    if !(options.tol > 0.0) || options.max_iter == 0 || options.n_mc == 0 {
        return Err(Error::Parameter(
            "autotune needs tol > 0, max_iter >= 1 and n_mc >= 1".into(),
        ));
    }
    // no tempering needed when the pure Lévy tail already meets delta
    let mut rng = seeds.named("untempered").rng();
    let untempered = estimate_tail(&base, r_max, options.n_mc, &mut rng)?;
    if untempered <= delta {
        return Ok(Autotuned {
            lambda: 0.0,
            tail: untempered,
            iterations: 0,
            converged: true,
        });
    }
    let mut low = 0.0;
    let mut high = LAMBDA_BRACKET_HIGH;
    let mut best = Autotuned {
        lambda: f64::NAN,
        tail: f64::NAN,
        iterations: 0,
        converged: false,
    };
    for i in 0..options.max_iter {
        let mid = 0.5 * (low + high);
        let params = base.with_lambda(mid)?;
        let mut rng = seeds.child(i as u64).rng();
        let tail = estimate_tail(&params, r_max, options.n_mc, &mut rng)?;
        if best.lambda.is_nan() || (tail - delta).abs() < (best.tail - delta).abs() {
            best = Autotuned {
                lambda: mid,
                tail,
                iterations: i + 1,
                converged: false,
            };
        }
        if (tail - delta).abs() < options.tol {
            return Ok(Autotuned {
                lambda: mid,
                tail,
                iterations: i + 1,
                converged: true,
            });
        }
        if tail > delta {
            low = mid;
        } else {
            high = mid;
        }
    }
    if high == LAMBDA_BRACKET_HIGH && best.tail > delta {
        let params = base.with_lambda(LAMBDA_BRACKET_HIGH)?;
        let mut rng = seeds.named("bracket").rng();
        let tail = estimate_tail(&params, r_max, options.n_mc, &mut rng)?;
        if tail > delta {
            return Err(Error::Bracket {
                lambda_high: LAMBDA_BRACKET_HIGH,
                tail,
                delta,
            });
        }
    }
    best.iterations = options.max_iter;
    Ok(best)
}

/// Cacheable record of one calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub c: f64,
    pub mu: f64,
    pub r_max: f64,
    pub delta: f64,
    pub lambda: f64,
    pub n_mc: usize,
    pub seed: u64,
}

impl CalibrationRecord {
    pub fn params(&self) -> Result<CtplParams> {
        CtplParams::with_location(self.c, self.lambda, self.mu, self.r_max, self.delta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: Self = serde_json::from_str(text)?;
        rec.params()?;
        Ok(rec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Tunes `lambda` and returns ready-to-use parameters plus their record.
pub fn calibrate(
    c: f64,
    r_max: f64,
    delta: f64,
    options: &AutotuneOptions,
    seed: u64,
) -> Result<(CtplParams, CalibrationRecord)> {
    let tuned = autotune_tempering(c, 0.0, r_max, delta, options, SeedTree::new(seed))?;
    let params = CtplParams::new(c, tuned.lambda, r_max, delta)?;
    let record = CalibrationRecord {
        c,
        mu: 0.0,
        r_max,
        delta,
        lambda: tuned.lambda,
        n_mc: options.n_mc,
        seed,
    };
    Ok((params, record))
}

/// Displaces `point` by `R * U` with `R` a clipped CTPL radius and `U`
/// uniform on the unit sphere of the point's dimension.
pub fn perturb_point<R: Rng + ?Sized>(
    point: &[f64],
    params: &CtplParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let d = point.len();
    if d == 0 {
        return Err(Error::Parameter(
            "point must have at least one coordinate".into(),
        ));
    }
    let radius = sample_radius(params, rng)?.radius;
    let direction = uniform_direction(d, rng);
    Ok(point
        .iter()
        .zip(direction)
        .map(|(x, u)| x + radius * u)
        .collect())
}

fn uniform_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    match d {
        1 => vec![if rng.random::<bool>() { 1.0 } else { -1.0 }],
        2 => {
            let theta = rng.random::<f64>() * 2.0 * PI;
            vec![theta.cos(), theta.sin()]
        }
        _ => loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        },
    }
}

/// Gaussian and Gamma laws sharing the first two sample moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentMatched {
    pub gaussian_mean: f64,
    pub gaussian_variance: f64,
    pub gamma_shape: f64,
    pub gamma_scale: f64,
}

impl MomentMatched {
    pub fn gaussian_survival(&self, x: f64) -> f64 {
        let sd = self.gaussian_variance.sqrt();
        0.5 * libm::erfc((x - self.gaussian_mean) / (sd * std::f64::consts::SQRT_2))
    }

    pub fn gamma_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        upper_regularized_gamma(self.gamma_shape, x / self.gamma_scale)
    }
}

pub fn moment_matched_comparators(samples: &[f64]) -> Result<MomentMatched> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSample("need at least two samples".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateSample("sample variance is zero".into()));
    }
    Ok(MomentMatched {
        gaussian_mean: mean,
        gaussian_variance: var,
        gamma_shape: mean * mean / var,
        gamma_scale: var / mean,
    })
}

/// Empirical survival function `#{x_i > x} / n`.
pub fn empirical_survival(samples: &[f64], x: f64) -> f64 {
    samples.iter().filter(|&&s| s > x).count() as f64 / samples.len() as f64
}

// Q(a, x) by series for x < a + 1, continued fraction otherwise.
fn upper_regularized_gamma(a: f64, x: f64) -> f64 {
    let log_prefactor = a * x.ln() - x - libm::lgamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (1.0 - sum * log_prefactor.exp()).clamp(0.0, 1.0)
    } else {
        // modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (log_prefactor.exp() * h).clamp(0.0, 1.0)
    }
}
