//! Radial edge-weight kernels `w = φ(ρ)`.

use serde::{Deserialize, Serialize};

/// A distance-to-weight map. `Identity` is the default.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum WeightKernel {
    /// φ(ρ) = ρ
    #[default]
    Identity,
    /// φ(ρ) = slope·ρ + offset
    Affine { slope: f64, offset: f64 },
    /// φ(ρ) = scale·ρ^exponent, exponent ≥ 1
    Power { scale: f64, exponent: f64 },
    /// φ(ρ) = exp(-ρ² / 2σ²). A similarity kernel: decreasing, not convex.
    Gaussian { sigma: f64 },
}

/// Bounds from the weight regularity assumption on `[0, rho_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBounds {
    pub rho_max: f64,
    pub w_max: f64,
    pub lipschitz: f64,
}

impl WeightKernel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Affine { .. } => "affine",
            Self::Power { .. } => "power",
            Self::Gaussian { .. } => "gaussian",
        }
    }

    pub fn evaluate(&self, rho: f64) -> f64 {
        match *self {
            Self::Identity => rho,
            Self::Affine { slope, offset } => slope * rho + offset,
            Self::Power { scale, exponent } => scale * rho.powf(exponent),
            Self::Gaussian { sigma } => (-rho * rho / (2.0 * sigma * sigma)).exp(),
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        match *self {
            Self::Identity => true,
            Self::Affine { slope, .. } => slope >= 0.0,
            Self::Power { scale, .. } => scale >= 0.0,
            Self::Gaussian { .. } => false,
        }
    }

    pub fn is_convex(&self) -> bool {
        match *self {
            Self::Identity | Self::Affine { .. } => true,
            Self::Power { scale, exponent } => scale >= 0.0 && exponent >= 1.0,
            Self::Gaussian { .. } => false,
        }
    }

    /// Whether hub–spoke extremality applies (nondecreasing and convex).
    pub fn supports_extremality(&self) -> bool {
        self.is_nondecreasing() && self.is_convex()
    }

    /// Parameter sanity: finite, and positive where positivity is structural.
    pub fn is_valid(&self) -> bool {
        match *self {
            Self::Identity => true,
            Self::Affine { slope, offset } => slope.is_finite() && offset.is_finite(),
            Self::Power { scale, exponent } => {
                scale.is_finite() && scale > 0.0 && exponent.is_finite() && exponent > 0.0
            }
            Self::Gaussian { sigma } => sigma.is_finite() && sigma > 0.0,
        }
    }

    /// `w_max` and `L_w` on the operating range `[0, rho_max]`.
    pub fn bounds(&self, rho_max: f64) -> KernelBounds {
        let rho_max = rho_max.max(0.0);
        let (w_max, lipschitz) = match *self {
            Self::Identity => (rho_max, 1.0),
            Self::Affine { slope, offset } => (
                (slope * rho_max + offset).abs().max(offset.abs()),
                slope.abs(),
            ),
            Self::Power { scale, exponent } => {
                let w = scale * rho_max.powf(exponent);
                let l = if exponent >= 1.0 {
                    scale * exponent * rho_max.powf(exponent - 1.0)
                } else {
                    // derivative unbounded at 0
                    f64::INFINITY
                };
                (w, l)
            }
            Self::Gaussian { sigma } => (1.0, (-0.5f64).exp() / sigma),
        };
        KernelBounds {
            rho_max,
            w_max,
            lipschitz,
        }
    }
}
