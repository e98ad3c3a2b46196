//! Linear fields `z ↦ Az`: spectra, compact orbits and the interval hypothesis.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::{is_interval_domain, AggregateReport, AggregateVerdict, DomainError, DomainSpec, IntersectConfig, INSIDE_MARGIN};
use crate::fields::{detect_period, FlowError, PeriodConfig, VectorFieldSpec};
use crate::form::{matrix_to_json, MatrixJson};
use crate::types::ComplexVec;

pub const DET_FLOOR: f64 = 1e-12;
pub const IMAGINARY_FLOOR: f64 = 1e-9;
pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("matrix is singular: |det| = {0:e}")]
    SingularMatrix(f64),
    #[error("matrix must be square and nonempty")]
    NotSquare,
    #[error("seed dimension {got} does not match matrix size {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("seed must be nonzero")]
    ZeroSeed,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Commensurability {
    Commensurable { period: f64 },
    Incommensurable,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct LinearFieldAnalysis {
    pub a: DMatrix<Complex64>,
    pub eigenvalues: Vec<Complex64>,
    /// Columns are eigenvectors when `diagonalizable`.
    pub eigenvectors: Option<DMatrix<Complex64>>,
    pub diagonalizable: bool,
    pub imaginary_spectrum_indices: Vec<usize>,
    /// `None` when no eigenvalue is imaginary.
    pub commensurability: Option<Commensurability>,
    /// Largest `‖Av − λv‖` over the eigenpairs.
    pub max_residual: f64,
    /// Error estimate for the eigenvalues.
    pub eigen_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearAnalysisSummary {
    pub matrix: MatrixJson,
    pub eigenvalues: Vec<[f64; 2]>,
    pub diagonalizable: bool,
    pub imaginary_spectrum_indices: Vec<usize>,
    pub commensurability: Option<Commensurability>,
    pub max_residual: f64,
}

impl LinearFieldAnalysis {
    pub fn field(&self) -> VectorFieldSpec {
        VectorFieldSpec::LinearComplex(self.a.clone())
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn summary(&self) -> LinearAnalysisSummary {
        LinearAnalysisSummary {
            matrix: matrix_to_json(&self.a),
            eigenvalues: self.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
            diagonalizable: self.diagonalizable,
            imaginary_spectrum_indices: self.imaginary_spectrum_indices.clone(),
            commensurability: self.commensurability,
            max_residual: self.max_residual,
        }
    }

    /// Spectral prediction for the orbit of `z`.
    pub fn predict(&self, z: &ComplexVec) -> SpectralPrediction {
        let v = match (&self.eigenvectors, self.diagonalizable) {
            (Some(v), true) => v,
            _ => return SpectralPrediction::Unknown,
        };
        let Some(c) = v.clone().lu().solve(&z.to_dvector()) else {
            return SpectralPrediction::Unknown;
        };
        let cmax = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if cmax == 0.0 {
            return SpectralPrediction::NotCompact;
        }
        let active: Vec<usize> = (0..c.len()).filter(|&j| c[j].norm() > 1e-10 * cmax).collect();
        if active.iter().any(|&j| !self.imaginary_spectrum_indices.contains(&j)) {
            return SpectralPrediction::NotCompact;
        }
        let omegas: Vec<f64> = active.iter().map(|&j| self.eigenvalues[j].im).collect();
        match common_period(&omegas, self.eigen_error) {
            Commensurability::Commensurable { period } => SpectralPrediction::Compact { period },
            Commensurability::Incommensurable => SpectralPrediction::NotCompact,
            Commensurability::Unknown => SpectralPrediction::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralPrediction {
    Compact { period: f64 },
    NotCompact,
    Unknown,
}

/// Best rational `p/q` with `q ≤ max_den` from the continued-fraction
/// convergents of `x`, if one lies within `tol`.
pub fn rationalize(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > max_den as i128 {
            break;
        }
        if (x - p2 as f64 / q2 as f64).abs() <= tol {
            return Some((p2 as i64, q2 as u64));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `T > 0` with `T ω_j ∈ 2πℤ` for all `j`.
fn common_period(omegas: &[f64], eigen_error: f64) -> Commensurability {
    let w0 = omegas[0];
    if w0.abs() < IMAGINARY_FLOOR {
        return Commensurability::Unknown;
    }
    let rel_err = eigen_error / w0.abs();
    if rel_err > 1e-10 {
        return Commensurability::Unknown;
    }
    let mut l = 1u64;
    for &w in &omegas[1..] {
        let x = w / w0;
        let tol = 5e-14 * x.abs().max(1.0) + 4.0 * rel_err * (1.0 + x.abs());
        match rationalize(x, MAX_DENOMINATOR, tol) {
            Some((_, q)) => {
                l = l / gcd(l, q) * q;
                if l > MAX_DENOMINATOR {
                    return Commensurability::Unknown;
                }
            }
            None => return Commensurability::Incommensurable,
        }
    }
    Commensurability::Commensurable {
        period: TAU * l as f64 / w0.abs(),
    }
}

fn is_diagonal(a: &DMatrix<Complex64>) -> bool {
    (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// Eigen-decomposition with diagonalizability and commensurability checks.
pub fn analyze_linear(a: &DMatrix<Complex64>) -> Result<LinearFieldAnalysis, LinearError> {
    let n = a.nrows();
    if n == 0 || !a.is_square() {
        return Err(LinearError::NotSquare);
    }
    let det = a.determinant().norm();
    if det <= DET_FLOOR {
        return Err(LinearError::SingularMatrix(det));
    }
    let scale = a.norm().max(1.0);
    let (eigenvalues, eigenvectors, eigen_error) = if is_diagonal(a) {
        (a.diagonal().iter().copied().collect::<Vec<_>>(), Some(DMatrix::identity(n, n)), 0.0)
    } else {
        let (_, t) = a.clone().schur().unpack();
        let raw: Vec<Complex64> = t.diagonal().iter().copied().collect();
        let vecs = eigenvectors_by_nullspace(a, &raw, scale);
        let err = match &vecs {
            Some(v) => {
                let sv = v.clone().svd(false, false).singular_values;
                let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
                64.0 * f64::EPSILON * scale * smax / smin
            }
            None => f64::INFINITY,
        };
        (raw, vecs, err)
    };
    let diagonalizable = eigenvectors.is_some();
    let max_residual = match &eigenvectors {
        Some(v) => (0..n)
            .map(|j| {
                let col = v.column(j).into_owned();
                (a * &col - col * eigenvalues[j]).norm()
            })
            .fold(0.0, f64::max),
        None => f64::NAN,
    };
    let imaginary_spectrum_indices: Vec<usize> = (0..n).filter(|&j| eigenvalues[j].re.abs() < IMAGINARY_FLOOR).collect();
    let commensurability = if imaginary_spectrum_indices.is_empty() {
        None
    } else if !diagonalizable {
        Some(Commensurability::Unknown)
    } else {
        let omegas: Vec<f64> = imaginary_spectrum_indices.iter().map(|&j| eigenvalues[j].im).collect();
        Some(common_period(&omegas, eigen_error))
    };
    Ok(LinearFieldAnalysis {
        a: a.clone(),
        eigenvalues,
        eigenvectors,
        diagonalizable,
        imaginary_spectrum_indices,
        commensurability,
        max_residual,
        eigen_error,
    })
}

/// Null-space eigenvectors per eigenvalue cluster; `None` when some
/// cluster's geometric multiplicity falls short.
fn eigenvectors_by_nullspace(a: &DMatrix<Complex64>, eig: &[Complex64], scale: f64) -> Option<DMatrix<Complex64>> {
    let n = a.nrows();
    let cluster_tol = 1e-8 * scale;
    let mut assigned = vec![false; n];
    let mut cols: Vec<(usize, nalgebra::DVector<Complex64>)> = Vec::with_capacity(n);
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..n).filter(|&j| !assigned[j] && (eig[j] - eig[i]).norm() <= cluster_tol).collect();
        let lambda = members.iter().map(|&j| eig[j]).sum::<Complex64>() / members.len() as f64;
        let shifted = a - DMatrix::<Complex64>::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&p, &q| svd.singular_values[p].total_cmp(&svd.singular_values[q]));
        let null: Vec<usize> = order
            .iter()
            .copied()
            .take(members.len())
            .filter(|&k| svd.singular_values[k] <= 1e-8 * scale)
            .collect();
        if null.len() < members.len() {
            return None;
        }
        for (&j, &k) in members.iter().zip(&null) {
            assigned[j] = true;
            cols.push((j, v_t.row(k).adjoint()));
        }
    }
    cols.sort_by_key(|(j, _)| *j);
    let vecs: Vec<_> = cols.into_iter().map(|(_, v)| v).collect();
    Some(DMatrix::from_columns(&vecs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactOrbitReport {
    pub seed: ComplexVec,
    pub detected_period: Option<f64>,
    pub prediction: SpectralPrediction,
    /// The numerical and spectral answers agree (vacuous for `Unknown`).
    pub consistent: bool,
    pub compact: bool,
    pub t_max: f64,
    pub tol: f64,
}

/// Numerical recurrence search up to `t_max`, cross-checked with the spectrum.
pub fn compact_orbit_test(analysis: &LinearFieldAnalysis, z: &ComplexVec, t_max: f64, tol: f64) -> Result<CompactOrbitReport, LinearError> {
    check_seed(analysis, z)?;
    let cfg = PeriodConfig {
        tol,
        ..PeriodConfig::default()
    };
    let detected = detect_period(&analysis.field(), z, t_max, &cfg)?;
    let prediction = analysis.predict(z);
    let consistent = match prediction {
        SpectralPrediction::Compact { period } if period <= t_max * (1.0 - 1e-9) => {
            detected.is_some_and(|t| (t - period).abs() <= 1e-6 * period.max(1.0))
        }
        SpectralPrediction::Compact { .. } | SpectralPrediction::NotCompact => detected.is_none(),
        SpectralPrediction::Unknown => true,
    };
    Ok(CompactOrbitReport {
        seed: z.clone(),
        detected_period: detected,
        prediction,
        consistent,
        compact: detected.is_some(),
        t_max,
        tol,
    })
}

fn check_seed(analysis: &LinearFieldAnalysis, z: &ComplexVec) -> Result<(), LinearError> {
    if z.dim() != analysis.dim() {
        return Err(LinearError::DimensionMismatch {
            expected: analysis.dim(),
            got: z.dim(),
        });
    }
    if z.norm() == 0.0 {
        return Err(LinearError::ZeroSeed);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactContainment {
    pub seed: ComplexVec,
    pub period: f64,
    pub contained: bool,
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearIntervalReport {
    pub verdict: AggregateVerdict,
    pub intervals: AggregateReport,
    pub compact_orbits: Vec<CompactContainment>,
}

/// Samples per period when testing that a compact orbit stays in the domain.
const CONTAINMENT_SAMPLES: usize = 720;

/// Interval-domain check for the linear field plus containment of every
/// compact orbit found among the seeds.
pub fn certify_interval_hypothesis(
    analysis: &LinearFieldAnalysis,
    domain: &DomainSpec,
    seeds: &[ComplexVec],
    t_range: (f64, f64),
    cfg: &IntersectConfig,
) -> Result<LinearIntervalReport, LinearError> {
    let field = analysis.field();
    let intervals = is_interval_domain(&field, domain, seeds, t_range, cfg)?;
    let mut compact_orbits = Vec::new();
    for z in seeds {
        check_seed(analysis, z)?;
        let period = match analysis.predict(z) {
            SpectralPrediction::Compact { period } => Some(period),
            SpectralPrediction::NotCompact => None,
            SpectralPrediction::Unknown => detect_period(&field, z, t_range.1 - t_range.0, &PeriodConfig::default())?,
        };
        let Some(period) = period else { continue };
        let mut min_margin = f64::INFINITY;
        for k in 0..CONTAINMENT_SAMPLES {
            let t = period * k as f64 / CONTAINMENT_SAMPLES as f64;
            let p = field.flow(z, t, &cfg.flow)?;
            min_margin = min_margin.min(domain.margin(&p).unwrap_or(f64::NEG_INFINITY));
        }
        compact_orbits.push(CompactContainment {
            seed: z.clone(),
            period,
            contained: min_margin > INSIDE_MARGIN,
            min_margin,
        });
    }
    let verdict = if compact_orbits.iter().any(|c| !c.contained) {
        AggregateVerdict::Refuted
    } else {
        intervals.verdict
    };
    Ok(LinearIntervalReport {
        verdict,
        intervals,
        compact_orbits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn diag(d: &[Complex64]) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d))
    }
    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rationalize_basics() {
        assert_eq!(rationalize(0.75, 100, 1e-14), Some((3, 4)));
        assert_eq!(rationalize(-2.0, 100, 1e-14), Some((-2, 1)));
        assert_eq!(rationalize(2f64.sqrt(), MAX_DENOMINATOR, 5e-14), None);
        assert_eq!(rationalize(PI, 1000, 1e-14), None);
    }

    #[test]
    fn imaginary_commensurable() {
        let a = analyze_linear(&diag(&[c(0.0, 1.0), c(0.0, 2.0)])).unwrap();
        assert_eq!(a.imaginary_spectrum_indices, vec![0, 1]);
        match a.commensurability {
            Some(Commensurability::Commensurable { period }) => assert!((period - TAU).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let r = compact_orbit_test(&a, &ComplexVec::from_reals(&[1.0, 1.0]), 10.0, 1e-6).unwrap();
        assert!(r.compact && r.consistent);
        assert!((r.detected_period.unwrap() - TAU).abs() < 1e-6);
        let r = compact_orbit_test(&a, &ComplexVec::from_reals(&[1.0, 0.0]), 10.0, 1e-6).unwrap();
        assert!((r.detected_period.unwrap() - TAU).abs() < 1e-6 && r.consistent);
    }

    #[test]
    fn hyperbolic_and_irrational() {
        let a = analyze_linear(&diag(&[c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        assert!(a.imaginary_spectrum_indices.is_empty() && a.commensurability.is_none());
        let r = compact_orbit_test(&a, &ComplexVec::from_reals(&[1.0, 1.0]), 50.0, 1e-6).unwrap();
        assert!(!r.compact && r.consistent);
        let a = analyze_linear(&diag(&[c(0.0, 1.0), c(0.0, 2f64.sqrt())])).unwrap();
        assert_eq!(a.commensurability, Some(Commensurability::Incommensurable));
    }

    #[test]
    fn singular_is_rejected() {
        assert!(matches!(analyze_linear(&diag(&[c(1.0, 0.0), c(0.0, 0.0)])), Err(LinearError::SingularMatrix(_))));
    }

    #[test]
    fn non_diagonal_spectrum() {
        // conjugate of diag(i, 2i)
        let p = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let a = &p * diag(&[c(0.0, 1.0), c(0.0, 2.0)]) * p.clone().try_inverse().unwrap();
        let an = analyze_linear(&a).unwrap();
        assert!(an.diagonalizable && an.max_residual < 1e-8);
        assert!(matches!(an.commensurability, Some(Commensurability::Commensurable { period }) if (period - TAU).abs() < 1e-9));
        // Jordan block with imaginary eigenvalue: unbounded orbits
        let j = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        let an = analyze_linear(&j).unwrap();
        assert!(!an.diagonalizable);
        assert_eq!(an.commensurability, Some(Commensurability::Unknown));
        let r = compact_orbit_test(&an, &ComplexVec::from_reals(&[0.3, 1.0]), 30.0, 1e-6).unwrap();
        assert!(!r.compact);
    }

    #[test]
    fn interval_hypothesis_examples() {
        let cfg = IntersectConfig::default();
        let ball = DomainSpec::Ball {
            center: ComplexVec::zeros(2),
            radius: 1.0,
        };
        let id = analyze_linear(&DMatrix::identity(2, 2)).unwrap();
        let seeds = vec![ComplexVec::from_reals(&[0.5, 0.5]), ComplexVec::from_pairs(&[(0.1, -0.7), (0.2, 0.0)])];
        let r = certify_interval_hypothesis(&id, &ball, &seeds, (-6.0, 6.0), &cfg).unwrap();
        assert_eq!(r.verdict, AggregateVerdict::CertifiedOnSamples);

        let hyp = analyze_linear(&diag(&[c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        let r = certify_interval_hypothesis(&hyp, &ball, &seeds[..1], (-6.0, 6.0), &cfg).unwrap();
        assert_eq!(r.verdict, AggregateVerdict::CertifiedOnSamples);

        let rot = analyze_linear(&diag(&[c(0.0, 1.0), c(0.0, 2.0)])).unwrap();
        let seed = vec![ComplexVec::from_reals(&[0.6, 0.0])];
        for centre in [0.0, 0.6] {
            let small = DomainSpec::Ball {
                center: ComplexVec::from_reals(&[centre, 0.0]),
                radius: 0.5,
            };
            let r = certify_interval_hypothesis(&rot, &small, &seed, (-10.0, 10.0), &cfg).unwrap();
            assert_eq!(r.verdict, AggregateVerdict::Refuted);
            assert_eq!(r.compact_orbits.len(), 1);
            assert!(!r.compact_orbits[0].contained);
        }
    }
}
