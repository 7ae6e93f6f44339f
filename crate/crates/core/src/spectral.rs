//! Laplacian spectra, spectral distances and perturbation certificates.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EmbeddedGraph;

/// Relative asymmetry accepted by [`spectrum`].
pub const SYMMETRY_REL_TOL: f64 = 1e-9;

/// Sorted real eigenvalues with multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
}

impl Spectrum {
    /// Sorts `values` ascending.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn largest(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

fn max_abs_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Input(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let scale = max_abs_entry(m).max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_REL_TOL * scale {
                return Err(Error::Input(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Full eigendecomposition of the symmetrized matrix.
pub fn spectrum(m: &DMatrix<f64>) -> Result<Spectrum> {
    check_symmetric(m)?;
    if m.nrows() == 0 {
        return Ok(Spectrum { values: Vec::new() });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    Ok(Spectrum::from_values(
        eig.eigenvalues.iter().copied().collect(),
    ))
}

pub fn graph_spectrum(g: &EmbeddedGraph) -> Result<Spectrum> {
    spectrum(&g.laplacian())
}

/// Spectral norm of a symmetric matrix.
pub fn operator_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(spectrum(m)?.max_abs())
}

pub fn frobenius_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Absolute tolerance for eigenvalue comparisons on a matrix of norm `norm`.
pub fn solver_tolerance(norm: f64) -> f64 {
    1e-8 * norm.max(1.0)
}

/// 2-Wasserstein distance between the empirical eigenvalue measures.
///
/// Both quantile functions are step functions with breakpoints `i/n` and
/// `j/m`; the integral is summed exactly over the common refinement.
pub fn wasserstein2(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Input("wasserstein2 needs nonempty spectra".into()));
    }
    let (x, y) = (&a.values, &b.values);
    let (n, m) = (x.len(), y.len());
    if n == m {
        let s: f64 = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum();
        return Ok((s / n as f64).sqrt());
    }
    // positions measured in units of 1/(n m)
    let (nn, mm) = (n as u128, m as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev: u128 = 0;
    let mut acc = 0.0;
    while i < n && j < m {
        let next_a = (i as u128 + 1) * mm;
        let next_b = (j as u128 + 1) * nn;
        let next = next_a.min(next_b);
        acc += (x[i] - y[j]).powi(2) * (next - prev) as f64;
        prev = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    Ok((acc / (nn * mm) as f64).sqrt())
}

/// Scale used to normalize spectral distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Normalization {
    /// `max(‖λ‖∞, ‖λ'‖∞)`.
    #[default]
    MaxSup,
    /// A caller-supplied constant.
    Fixed { scale: f64 },
}

impl Normalization {
    pub fn scale(&self, a: &Spectrum, b: &Spectrum) -> f64 {
        match *self {
            Self::MaxSup => a.max_abs().max(b.max_abs()),
            Self::Fixed { scale } => scale,
        }
    }
}

/// `W₂ / λ_ref` with the max-sup reference.
pub fn spectral_distance(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    spectral_distance_with(a, b, Normalization::MaxSup)
}

pub fn spectral_distance_with(a: &Spectrum, b: &Spectrum, norm: Normalization) -> Result<f64> {
    let w = wasserstein2(a, b)?;
    let scale = norm.scale(a, b);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Normalization);
    }
    Ok(w / scale)
}

/// ℓ² norm of indexwise sorted-eigenvalue differences.
pub fn l2_spectral_shift(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(p, q)| (p - q).powi(2))
        .sum::<f64>()
        .sqrt())
}

fn max_shift(a: &Spectrum, b: &Spectrum) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCertificate {
    /// Largest indexwise shift of sorted eigenvalues.
    pub max_eigen_shift: f64,
    /// Shift of the largest eigenvalue.
    pub lambda_n_shift: f64,
    pub l2_shift: f64,
    pub op_norm_e: f64,
    pub frob_norm_e: f64,
    /// `max_eigen_shift / op_norm_e`, 1 when both vanish.
    pub weyl_ratio: f64,
}

impl PerturbationCertificate {
    /// Weyl and Hoffman–Wielandt orderings within solver tolerance.
    pub fn chain_holds(&self, tol: f64) -> bool {
        self.max_eigen_shift <= self.op_norm_e + tol
            && self.op_norm_e <= self.frob_norm_e + tol
            && self.l2_shift <= self.frob_norm_e + tol
    }
}

pub fn weyl_certificate(
    l: &DMatrix<f64>,
    l_perturbed: &DMatrix<f64>,
) -> Result<PerturbationCertificate> {
    if l.shape() != l_perturbed.shape() {
        return Err(Error::DimensionMismatch {
            left: l.nrows(),
            right: l_perturbed.nrows(),
        });
    }
    let before = spectrum(l)?;
    let after = spectrum(l_perturbed)?;
    let e = l_perturbed - l;
    let op = operator_norm(&e)?;
    let frob = frobenius_norm(&e);
    let shift = max_shift(&before, &after);
    let lambda_n_shift = match (before.largest(), after.largest()) {
        (Some(p), Some(q)) => (q - p).abs(),
        _ => 0.0,
    };
    let weyl_ratio = if op == 0.0 {
        if shift == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        shift / op
    };
    Ok(PerturbationCertificate {
        max_eigen_shift: shift,
        lambda_n_shift,
        l2_shift: l2_spectral_shift(&before, &after)?,
        op_norm_e: op,
        frob_norm_e: frob,
        weyl_ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedBound {
    /// `λ_max` of the induced-subgraph Laplacian.
    pub bound: f64,
    /// `λ_max` of the principal submatrix `L[S,S]`, between `bound` and `lambda_n`.
    pub principal: f64,
    /// `λ_n` of the full Laplacian.
    pub lambda_n: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Interlacing lower bound `λ_n(L) ≥ λ_max(L_H)` for the induced subgraph on
/// `subset`, after checking `L[S,S] = L_H + Δ` with `Δ` diagonal and PSD.
pub fn induced_lower_bound(
    l_full: &DMatrix<f64>,
    subset: &[usize],
    l_sub: &DMatrix<f64>,
) -> Result<InducedBound> {
    let n = l_full.nrows();
    if let Some(&bad) = subset.iter().find(|&&i| i >= n) {
        return Err(Error::Input(format!(
            "subset index {bad} out of range for {n} vertices"
        )));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() {
        return Err(Error::Input("subset has repeated indices".into()));
    }
    if l_sub.nrows() != subset.len() || l_sub.ncols() != subset.len() {
        return Err(Error::DimensionMismatch {
            left: subset.len(),
            right: l_sub.nrows(),
        });
    }
    let full = spectrum(l_full)?;
    let tol = solver_tolerance(full.max_abs());
    for (a, &i) in subset.iter().enumerate() {
        for (b, &j) in subset.iter().enumerate() {
            let delta = l_full[(i, j)] - l_sub[(a, b)];
            if a != b && delta.abs() > tol {
                return Err(Error::Construction(format!(
                    "principal submatrix differs from the induced Laplacian off the diagonal at ({i}, {j})"
                )));
            }
            if a == b && delta < -tol {
                return Err(Error::Construction(format!(
                    "boundary degree term is negative at vertex index {i}"
                )));
            }
        }
    }
    let bound = spectrum(l_sub)?.largest().unwrap_or(0.0);
    let principal_block = l_full.select_rows(subset).select_columns(subset);
    let principal = spectrum(&principal_block)?.largest().unwrap_or(0.0);
    let lambda_n = full.largest().unwrap_or(0.0);
    Ok(InducedBound {
        bound,
        principal,
        lambda_n,
        slack: lambda_n - bound,
        holds: lambda_n >= principal - tol && principal >= bound - tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeBound {
    /// `S(H) = Σ δw²` over edges.
    pub s_h: f64,
    /// Maximum combinatorial degree.
    pub max_degree: usize,
    pub frob_bound: f64,
    pub l2_bound: f64,
    pub frob_actual: f64,
    pub l2_actual: f64,
    pub holds: bool,
}

/// Degree-controlled Frobenius bound `‖Δ_H‖_F² ≤ (2 + 2Δ(H)) S(H)` and the
/// implied `S₂ ≤ ‖Δ_H‖_F`.
pub fn degree_controlled_bound(
    before: &EmbeddedGraph,
    after: &EmbeddedGraph,
) -> Result<DegreeBound> {
    if !before.same_combinatorics(after) {
        return Err(Error::CombinatoricsMismatch(
            "degree-controlled bound needs identical vertex and edge sets".into(),
        ));
    }
    let s_h: f64 = before
        .edges()
        .iter()
        .map(|e| (after.edge_weight(e) - before.edge_weight(e)).powi(2))
        .sum();
    let max_degree = before.max_degree();
    let frob_bound = ((2.0 + 2.0 * max_degree as f64) * s_h).sqrt();
    let (l, lp) = (before.laplacian(), after.laplacian());
    let frob_actual = frobenius_norm(&(&lp - &l));
    let l2_actual = l2_spectral_shift(&spectrum(&l)?, &spectrum(&lp)?)?;
    let tol = solver_tolerance(frob_actual) + 1e-12 * frob_bound;
    Ok(DegreeBound {
        s_h,
        max_degree,
        frob_bound,
        l2_bound: frob_bound,
        frob_actual,
        l2_actual,
        holds: frob_actual <= frob_bound + tol && l2_actual <= frob_actual + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::WeightKernel;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::from_values(v.to_vec())
    }

    #[test]
    fn closed_form_spectra() {
        assert_eq!(
            spectrum(&DMatrix::zeros(3, 3)).unwrap().values,
            vec![0.0; 3]
        );
        let edge = DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]);
        let s = spectrum(&edge).unwrap();
        assert!(s.values[0].abs() < 1e-12 && (s.values[1] - 4.0).abs() < 1e-12);
        let p3 = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        let s = spectrum(&p3).unwrap();
        for (got, want) in s.values.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(spectrum(&m), Err(Error::Input(_))));
    }

    #[test]
    fn wasserstein_examples() {
        let a = spec(&[0.0, 4.0]);
        let b = spec(&[0.0, 8.0]);
        assert_eq!(wasserstein2(&a, &a).unwrap(), 0.0);
        assert!((wasserstein2(&a, &b).unwrap() - 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            wasserstein2(&spec(&[0.0]), &spec(&[0.0, 0.0])).unwrap(),
            0.0
        );
        assert!(wasserstein2(&spec(&[]), &a).is_err());
        // {0,1,2} vs {0,2}: quantile pieces of width 1/3, 1/6, 1/6, 1/3
        let w = wasserstein2(&spec(&[0.0, 1.0, 2.0]), &spec(&[0.0, 2.0])).unwrap();
        assert!((w - (1.0f64 / 6.0 + 1.0 / 6.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spectral_distance_examples() {
        let a = spec(&[0.0, 4.0]);
        let b = spec(&[0.0, 8.0]);
        assert!((spectral_distance(&a, &b).unwrap() - 0.353_553_390_593).abs() < 1e-9);
        assert_eq!(
            spectral_distance(&a, &b).unwrap(),
            spectral_distance(&b, &a).unwrap()
        );
        assert!(matches!(
            spectral_distance(&spec(&[0.0]), &spec(&[0.0])),
            Err(Error::Normalization)
        ));
        let fixed = spectral_distance_with(&a, &b, Normalization::Fixed { scale: 1.0 }).unwrap();
        assert!((fixed - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l2_shift_examples() {
        let a = spec(&[0.0, 4.0]);
        assert_eq!(l2_spectral_shift(&a, &spec(&[0.0, 8.0])).unwrap(), 4.0);
        assert!(l2_spectral_shift(&a, &spec(&[0.0])).is_err());
    }

    #[test]
    fn identity_perturbation_certificate() {
        let l = DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]);
        let c = weyl_certificate(&l, &l).unwrap();
        assert_eq!(c.max_eigen_shift, 0.0);
        assert_eq!(c.op_norm_e, 0.0);
        assert_eq!(c.frob_norm_e, 0.0);
        assert_eq!(c.weyl_ratio, 1.0);
        assert!(weyl_certificate(&l, &DMatrix::zeros(3, 3)).is_err());
    }

    fn path3() -> EmbeddedGraph {
        EmbeddedGraph::from_points(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 2.0]],
            [(0, 1), (1, 2)],
            WeightKernel::Identity,
        )
        .unwrap()
    }

    #[test]
    fn induced_bounds() {
        let g = path3();
        let l = g.laplacian();
        let all = induced_lower_bound(&l, &[0, 1, 2], &l).unwrap();
        assert!((all.bound - all.lambda_n).abs() < 1e-12 && all.holds);
        let single = induced_lower_bound(&l, &[1], &DMatrix::zeros(1, 1)).unwrap();
        assert_eq!(single.bound, 0.0);
        assert!((single.principal - g.weighted_degree(1).unwrap()).abs() < 1e-12);
        assert!(single.principal <= single.lambda_n);
        assert!(single.holds);
        assert!(induced_lower_bound(&l, &[3], &DMatrix::zeros(1, 1)).is_err());
        // the principal submatrix itself is not an induced Laplacian of a sub-edge-set with PSD remainder
        let wrong = DMatrix::from_row_slice(1, 1, &[5.0]);
        assert!(matches!(
            induced_lower_bound(&l, &[1], &wrong),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn degree_bound_examples() {
        let g =
            EmbeddedGraph::from_points(&[[0.0, 0.0], [1.0, 0.0]], [(0, 1)], WeightKernel::Identity)
                .unwrap();
        let same = degree_controlled_bound(&g, &g).unwrap();
        assert_eq!(same.s_h, 0.0);
        assert_eq!(same.frob_bound, 0.0);
        assert!(same.holds);
        let h =
            EmbeddedGraph::from_points(&[[0.0, 0.0], [3.0, 0.0]], [(0, 1)], WeightKernel::Identity)
                .unwrap();
        let b = degree_controlled_bound(&g, &h).unwrap();
        assert_eq!(b.s_h, 4.0);
        assert_eq!(b.max_degree, 1);
        assert!((b.frob_bound - 4.0).abs() < 1e-12);
        assert!((b.frob_actual - 4.0).abs() < 1e-12);
        assert!(b.holds);
        assert!(degree_controlled_bound(&g, &path3()).is_err());
    }
}
