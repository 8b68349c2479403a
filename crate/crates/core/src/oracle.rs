//! Finite self-adjoint matrix models with a marked vector: the desk-scale
//! testbed that validates the Herglotz machinery, the parameter maps, and the
//! eigenvalue criterion against direct diagonalization.
//!
//! Two independent routes compute the spectrum of `A + alpha phi phi^T`:
//! dense symmetric diagonalization and the classical secular equation
//! `1 + alpha sum w_k/(lambda_k - y) = 0`. The third route goes through the
//! extension machinery: normalize `phi` so the deficiency vector has unit
//! norm, read off `c`, map `(alpha', c)` to `theta`, and collect the
//! eigenvalues from the boundary-value criterion. All three must agree.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

use crate::ad::{eigenvalues_for_extension_with, AdError, AdProblem};
use crate::herglotz::Tolerances;
use crate::measure::{merge_tolerance, Atom, Measure, Window};
use crate::params::{theta_from_coupling, Coupling, ExtensionParam};

pub const ORACLE_SCHEMA: &str = "oracle-suite/1";

/// Largest model dimension; everything stays dense and deterministic.
pub const MAX_DIM: usize = 64;

const SYMMETRY_TOL: f64 = 1e-12;
const NORMALIZED_TOL: f64 = 1e-12;
const MIN_EIGEN_GAP: f64 = 1e-6;
const MIN_OVERLAP: f64 = 1e-3;
const KRYLOV_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("model dimension must lie in 2..={MAX_DIM}, got {0}")]
    DimensionOutOfRange(usize),
    #[error("matrix must be square with phi of matching length")]
    ShapeMismatch,
    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds {SYMMETRY_TOL:e}*|A|")]
    NotSymmetric { asymmetry: f64 },
    #[error("phi must be nonzero")]
    ZeroPhi,
    #[error("no admissible model found after {0} regeneration attempts")]
    SeedExhaustion(u32),
    #[error("model is not normalized; call normalize_pair first")]
    NotNormalized,
    #[error("eigenvalue gap below merge tolerance persists after one merge pass")]
    DegenerateSpectrum,
    #[error("decomposition denominator <phi,u+> + e^(-2 i theta) <phi,u-> is degenerate")]
    DegenerateDenominator,
    #[error(transparent)]
    Ad(#[from] AdError),
}

/// Self-adjoint matrix with a marked vector `phi`.
///
/// The eigendecomposition is computed once at construction (ascending
/// eigenvalues) and shared by every operation; models are immutable.
#[derive(Debug, Clone)]
pub struct MatrixModel {
    a: DMatrix<f64>,
    phi: DVector<f64>,
    normalized: bool,
    eigvals: Vec<f64>,
    eigvecs: DMatrix<f64>,
    overlaps: Vec<f64>,
}

impl MatrixModel {
    pub fn new(a: DMatrix<f64>, phi: DVector<f64>) -> Result<Self, OracleError> {
        let n = a.nrows();
        if n == 0 || n > MAX_DIM {
            return Err(OracleError::DimensionOutOfRange(n));
        }
        if a.ncols() != n || phi.len() != n {
            return Err(OracleError::ShapeMismatch);
        }
        let scale = a.amax().max(f64::MIN_POSITIVE);
        let mut asymmetry = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asymmetry = asymmetry.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        if asymmetry > SYMMETRY_TOL * scale {
            return Err(OracleError::NotSymmetric { asymmetry });
        }
        if phi.norm() == 0.0 {
            return Err(OracleError::ZeroPhi);
        }
        let sym = nalgebra::linalg::SymmetricEigen::new(a.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| sym.eigenvalues[i].total_cmp(&sym.eigenvalues[j]));
        let eigvals: Vec<f64> = order.iter().map(|&i| sym.eigenvalues[i]).collect();
        let eigvecs = DMatrix::from_fn(n, n, |r, c| sym.eigenvectors[(r, order[c])]);
        let overlaps: Vec<f64> = (0..n).map(|k| eigvecs.column(k).dot(&phi)).collect();
        let s = resolvent_norm(&eigvals, &overlaps);
        Ok(MatrixModel {
            a,
            phi,
            normalized: (s - 1.0).abs() <= NORMALIZED_TOL,
            eigvals,
            eigvecs,
            overlaps,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn phi(&self) -> &DVector<f64> {
        &self.phi
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    /// Overlaps `<e_k, phi>` in the ascending eigenbasis.
    pub fn overlaps(&self) -> &[f64] {
        &self.overlaps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `|(A - iI)^{-1} phi|`.
    pub fn resolvent_norm(&self) -> f64 {
        resolvent_norm(&self.eigvals, &self.overlaps)
    }

    /// Deficiency vectors `u_+ = (A - iI)^{-1} phi` and `u_- = (A + iI)^{-1} phi`,
    /// with no extra phase.
    pub fn deficiency_vectors(&self) -> (DVector<Complex64>, DVector<Complex64>) {
        let n = self.dim();
        let mut up = DVector::from_element(n, Complex64::new(0.0, 0.0));
        let mut um = up.clone();
        for k in 0..n {
            let cp = self.overlaps[k] / Complex64::new(self.eigvals[k], -1.0);
            let cm = self.overlaps[k] / Complex64::new(self.eigvals[k], 1.0);
            for r in 0..n {
                let e = self.eigvecs[(r, k)];
                up[r] += cp * e;
                um[r] += cm * e;
            }
        }
        (up, um)
    }

    fn min_eigen_gap(&self) -> f64 {
        self.eigvals
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

fn resolvent_norm(eigvals: &[f64], overlaps: &[f64]) -> f64 {
    eigvals
        .iter()
        .zip(overlaps)
        .map(|(&l, &o)| o * o / (1.0 + l * l))
        .sum::<f64>()
        .sqrt()
}

/// Reproducible random model: real symmetric `A` with simple spectrum
/// (minimum gap `1e-6`, regenerated otherwise) and unit `phi` with every
/// eigenbasis overlap at least `1e-3`, which guarantees cyclicity.
pub fn random_model(seed: u64, n: usize) -> Result<MatrixModel, OracleError> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(OracleError::DimensionOutOfRange(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const ATTEMPTS: u32 = 100;
    for _ in 0..ATTEMPTS {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = (&g + g.transpose()) * 0.5;
        let mut phi = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = phi.norm();
        if norm == 0.0 {
            continue;
        }
        phi /= norm;
        let model = MatrixModel::new(a, phi)?;
        let gap_ok = model.min_eigen_gap() >= MIN_EIGEN_GAP;
        let overlap_ok = model.overlaps.iter().all(|o| o.abs() >= MIN_OVERLAP);
        if gap_ok && overlap_ok {
            return Ok(model);
        }
    }
    Err(OracleError::SeedExhaustion(ATTEMPTS))
}

/// Rescales `(phi, alpha) -> (phi/s, alpha s^2)` with `s = |(A-iI)^{-1}phi|`,
/// leaving the perturbation `alpha <phi,.> phi` unchanged while giving the
/// deficiency vector unit norm. The extension-angle map assumes this
/// normalization.
pub fn normalize_pair(m: &MatrixModel, alpha: f64) -> (MatrixModel, f64) {
    let s = m.resolvent_norm();
    let model = MatrixModel::new(m.a.clone(), &m.phi / s).expect("rescaling preserves validity");
    (model, alpha * s * s)
}

/// Spectral measure of `phi`: atoms at the eigenvalues with weights
/// `|<phi, e_k>|^2`; total mass `|phi|^2`.
pub fn spectral_measure(m: &MatrixModel) -> Result<Measure, OracleError> {
    let atoms: Vec<Atom> = m
        .eigvals
        .iter()
        .zip(&m.overlaps)
        .map(|(&x, &o)| Atom { x, w: o * o })
        .collect();
    let measure = Measure::from_atoms(atoms);
    let merged = measure.atoms();
    for pair in merged.windows(2) {
        if pair[1].x - pair[0].x <= merge_tolerance(pair[0].x) {
            return Err(OracleError::DegenerateSpectrum);
        }
    }
    Ok(measure)
}

/// The measure `dmu0(x) = (1+x^2) d<u_+, E0(x) u_+>` of the unperturbed
/// extension; with the unit-deficiency normalization it coincides with the
/// spectral measure of `phi`.
pub fn mu_zero(m: &MatrixModel) -> Result<Measure, OracleError> {
    if !m.normalized {
        return Err(OracleError::NotNormalized);
    }
    let atoms: Vec<Atom> = m
        .eigvals
        .iter()
        .zip(&m.overlaps)
        .map(|(&l, &o)| {
            let up_overlap = Complex64::new(o, 0.0) / Complex64::new(l, -1.0);
            Atom {
                x: l,
                w: (1.0 + l * l) * up_overlap.norm_sqr(),
            }
        })
        .collect();
    Ok(Measure::from_atoms(atoms))
}

/// The renormalization constant the model itself selects:
/// `c = <phi, A(A^2+I)^{-1} phi> = Re F_{mu_phi}(i)` after normalization.
pub fn natural_c(m: &MatrixModel) -> Result<f64, OracleError> {
    if !m.normalized {
        return Err(OracleError::NotNormalized);
    }
    Ok(m.eigvals
        .iter()
        .zip(&m.overlaps)
        .map(|(&l, &o)| o * o * l / (1.0 + l * l))
        .sum())
}

/// Eigenvalues of `A + alpha phi phi^T` by direct diagonalization, ascending.
pub fn perturb_direct(m: &MatrixModel, alpha: f64) -> Vec<f64> {
    assert!(alpha.is_finite(), "perturb_direct requires finite alpha");
    let b = &m.a + &m.phi * m.phi.transpose() * alpha;
    let sym = nalgebra::linalg::SymmetricEigen::new(b);
    let mut vals: Vec<f64> = sym.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Roots of the secular equation `1 + alpha sum w_k/(lambda_k - y) = 0` by
/// per-gap bisection: the fully independent route to the perturbed spectrum.
pub fn secular_roots(m: &MatrixModel, alpha: f64) -> Vec<f64> {
    assert!(
        alpha != 0.0 && alpha.is_finite(),
        "secular equation needs alpha != 0"
    );
    let lam = &m.eigvals;
    let w: Vec<f64> = m.overlaps.iter().map(|o| o * o).collect();
    let n = lam.len();
    let total_w: f64 = w.iter().sum();
    let f = |y: f64| -> f64 {
        1.0 / alpha
            + lam
                .iter()
                .zip(&w)
                .map(|(&l, &wk)| wk / (l - y))
                .sum::<f64>()
    };
    let tol = 1e-11;
    let mut roots = Vec::with_capacity(n);
    // interior gaps: f runs from -inf to +inf
    for k in 0..n.saturating_sub(1) {
        let (lo, hi) = (lam[k], lam[k + 1]);
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            continue;
        }
        let mut a = lo + (hi - lo) * 1e-3;
        let mut b = hi - (hi - lo) * 1e-3;
        let mut guard = 0;
        while f(a) > 0.0 && guard < 80 {
            a = lo + (a - lo) / 16.0;
            guard += 1;
        }
        while f(b) < 0.0 && guard < 160 {
            b = hi - (hi - b) / 16.0;
            guard += 1;
        }
        roots.push(bisect(&f, a, b, tol));
    }
    // one exterior root: above the top eigenvalue for alpha > 0, below the
    // bottom one for alpha < 0, within |alpha| * total weight
    if alpha > 0.0 {
        let lo0 = lam[n - 1];
        let hi = lam[n - 1] + alpha * total_w + 1.0;
        let mut a = lo0 + (hi - lo0) * 1e-3;
        let mut guard = 0;
        while f(a) > 0.0 && guard < 80 {
            a = lo0 + (a - lo0) / 16.0;
            guard += 1;
        }
        roots.push(bisect(&f, a, hi, tol));
    } else {
        let hi0 = lam[0];
        let lo = lam[0] + alpha * total_w - 1.0;
        let mut b = hi0 - (hi0 - lo) * 1e-3;
        let mut guard = 0;
        while f(b) < 0.0 && guard < 80 {
            b = hi0 - (hi0 - b) / 16.0;
            guard += 1;
        }
        roots.push(bisect(&f, lo, b, tol));
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Hausdorff distance of two sorted lists.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == b.len() {
        return a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
    }
    let one_sided = |from: &[f64], to: &[f64]| -> f64 {
        from.iter()
            .map(|x| {
                to.iter()
                    .map(|y| (x - y).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Outcome of running the extension-machinery route against diagonalization.
#[derive(Debug, Clone)]
pub struct AdConsistency {
    pub deviation: f64,
    pub theta: f64,
    pub c: f64,
    pub direct: Vec<f64>,
    pub ad_route: Vec<f64>,
    pub near_atom_hits: usize,
}

/// Full pipeline: normalize, compute `c`, map `(alpha', c)` to `theta`, find
/// the eigenvalues of `T_theta` from `mu0` by the boundary-value criterion,
/// and compare with direct diagonalization of `A + alpha phi phi^T`.
pub fn ad_consistency_check(m: &MatrixModel, alpha: f64) -> Result<AdConsistency, OracleError> {
    let (normalized, alpha_n) = normalize_pair(m, alpha);
    let c = natural_c(&normalized)?;
    let theta = theta_from_coupling(&Coupling::new(alpha_n, c));
    let measure = mu_zero(&normalized)?;
    let direct = perturb_direct(m, alpha);
    let lam = normalized.eigenvalues();
    let pad = alpha.abs() * m.phi.norm_squared() + 1.0;
    let w = Window::new(lam[0] - pad, lam[lam.len() - 1] + pad).expect("pad > 0");
    let problem = AdProblem::new(measure, ExtensionParam::new(FRAC_PI_2));
    let hits = eigenvalues_for_extension_with(&problem, &theta, &w, &Tolerances::default())?;
    let ad_route: Vec<f64> = hits.iter().map(|h| h.y).collect();
    let near_atom_hits = hits.iter().filter(|h| h.near_atom).count();
    let deviation = hausdorff(&direct, &ad_route);
    Ok(AdConsistency {
        deviation,
        theta: theta.theta,
        c,
        direct,
        ad_route,
        near_atom_hits,
    })
}

/// Eigenvector split `y = x + c e^{i theta} u_+ + c e^{-i theta} u_-` with
/// `<phi, x> = 0`; inner products are conjugate-linear in the first slot.
#[derive(Debug, Clone)]
pub struct EigvecDecomposition {
    pub x_part: DVector<Complex64>,
    pub c: Complex64,
    pub theta: f64,
}

pub fn decompose_eigenvector(
    m: &MatrixModel,
    theta: f64,
    y: &DVector<f64>,
) -> Result<EigvecDecomposition, OracleError> {
    if !m.normalized {
        return Err(OracleError::NotNormalized);
    }
    let (up, um) = m.deficiency_vectors();
    let phi_up: Complex64 = m.phi.iter().zip(up.iter()).map(|(&p, u)| p * u).sum();
    let phi_um: Complex64 = m.phi.iter().zip(um.iter()).map(|(&p, u)| p * u).sum();
    let twist = Complex64::new(0.0, -2.0 * theta).exp();
    let denom = phi_up + twist * phi_um;
    if denom.norm() <= 1e-12 * (phi_up.norm() + phi_um.norm()).max(1.0) {
        return Err(OracleError::DegenerateDenominator);
    }
    let phi_y: f64 = m.phi.dot(y);
    let a = Complex64::new(phi_y, 0.0) / denom;
    let c = a * Complex64::new(0.0, -theta).exp();
    let n = m.dim();
    let x_part = DVector::from_fn(n, |r, _| {
        Complex64::new(y[r], 0.0) - a * up[r] - a * twist * um[r]
    });
    Ok(EigvecDecomposition { x_part, c, theta })
}

/// Residual of the bilinear identity
/// `-4 c1 conj(c2) sin(theta1 - theta2) = (E1 - E2) <y1, y2>`
/// coupling two decomposable eigenpairs.
pub fn eigenpair_identity_residual(
    m: &MatrixModel,
    pair1: (f64, f64, &DVector<f64>),
    pair2: (f64, f64, &DVector<f64>),
) -> Result<f64, OracleError> {
    let (theta1, e1, y1) = pair1;
    let (theta2, e2, y2) = pair2;
    let d1 = decompose_eigenvector(m, theta1, y1)?;
    let d2 = decompose_eigenvector(m, theta2, y2)?;
    let lhs = -4.0 * d1.c * d2.c.conj() * (theta1 - theta2).sin();
    let rhs = Complex64::new((e1 - e2) * y1.dot(y2), 0.0);
    Ok((lhs - rhs).norm())
}

/// Compresses the model to the cyclic subspace of `phi` by orthonormalizing
/// the Krylov sequence `{phi, A phi, A^2 phi, ...}`; the output marked vector
/// is cyclic, so its spectral measure has all-positive weights.
pub fn krylov_cyclic_reduce(m: &MatrixModel) -> MatrixModel {
    let n = m.dim();
    let scale = m.eigvals.iter().fold(1.0f64, |s, &l| s.max(l.abs()));
    let mut basis: Vec<DVector<f64>> = vec![&m.phi / m.phi.norm()];
    loop {
        if basis.len() == n {
            break;
        }
        let mut w = &m.a * basis.last().unwrap();
        // two rounds of Gram-Schmidt keep the basis orthonormal to machine precision
        for _ in 0..2 {
            for v in &basis {
                let proj = v.dot(&w);
                w -= v * proj;
            }
        }
        let beta = w.norm();
        if beta <= KRYLOV_TOL * scale {
            break;
        }
        basis.push(w / beta);
    }
    let r = basis.len();
    let v = DMatrix::from_fn(n, r, |row, col| basis[col][row]);
    let compressed = v.transpose() * &m.a * &v;
    let sym = (&compressed + compressed.transpose()) * 0.5;
    let phi_r = v.transpose() * &m.phi;
    MatrixModel::new(sym, phi_r).expect("compression preserves validity")
}

/// One suite entry, serialized into the "oracle-suite/1" report.
#[derive(Debug, Clone)]
pub struct OracleCase {
    pub seed: u64,
    pub n: usize,
    pub alpha: f64,
    pub deviation: f64,
    pub flags: Vec<String>,
}

/// Runs the AD-vs-diagonalization pipeline for every `(seed, alpha)` pair;
/// `deviation` additionally covers the secular route.
pub fn consistency_suite(
    seeds: &[u64],
    dims: impl Fn(u64) -> usize + Sync,
    alphas: &[f64],
) -> Result<Vec<OracleCase>, OracleError> {
    let pairs: Vec<(u64, f64)> = seeds
        .iter()
        .flat_map(|&s| alphas.iter().map(move |&a| (s, a)))
        .collect();
    pairs
        .par_iter()
        .map(|&(seed, alpha)| {
            let n = dims(seed);
            let model = random_model(seed, n)?;
            let mut flags = Vec::new();
            let deviation = if alpha == 0.0 {
                flags.push("same-extension".to_string());
                0.0
            } else {
                let check = ad_consistency_check(&model, alpha)?;
                if check.near_atom_hits > 0 {
                    flags.push("near-atom".to_string());
                }
                let secular = secular_roots(&model, alpha);
                let direct = perturb_direct(&model, alpha);
                check.deviation.max(hausdorff(&direct, &secular))
            };
            Ok(OracleCase {
                seed,
                n,
                alpha,
                deviation,
                flags,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_level() -> MatrixModel {
        MatrixModel::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0])),
            DVector::from_vec(vec![1.0, 1.0]),
        )
        .unwrap()
    }

    fn one_by_one() -> MatrixModel {
        MatrixModel::new(
            DMatrix::from_element(1, 1, 2.0),
            DVector::from_element(1, 5.0f64.sqrt()),
        )
        .unwrap()
    }

    #[test]
    fn random_model_is_deterministic() {
        let a = random_model(1, 4).unwrap();
        let b = random_model(1, 4).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(a.phi(), b.phi());
        assert_eq!(a.dim(), 4);
        assert!(a.min_eigen_gap() >= MIN_EIGEN_GAP);
        assert!(a.overlaps().iter().all(|o| o.abs() >= MIN_OVERLAP));
    }

    #[test]
    fn random_model_rejects_bad_dims() {
        assert!(matches!(
            random_model(1, 1),
            Err(OracleError::DimensionOutOfRange(1))
        ));
        assert!(matches!(
            random_model(1, 65),
            Err(OracleError::DimensionOutOfRange(65))
        ));
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = 1.0;
        assert!(matches!(
            MatrixModel::new(a, DVector::from_vec(vec![1.0, 1.0])),
            Err(OracleError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn one_by_one_is_already_normalized() {
        // |(2-i)^{-1} sqrt(5)|^2 = 5/5 = 1
        let m = one_by_one();
        assert!(m.is_normalized());
        let (m2, a2) = normalize_pair(&m, 0.5);
        assert_abs_diff_eq!(m2.phi()[0], m.phi()[0], epsilon = 1e-14);
        assert_abs_diff_eq!(a2, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn normalize_pair_two_level() {
        let m = MatrixModel::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0])),
            DVector::from_vec(vec![1.0 / 2.0f64.sqrt(), 1.0 / 2.0f64.sqrt()]),
        )
        .unwrap();
        // s^2 = (1/2)/2 + (1/2)/2 = 1/2
        assert_abs_diff_eq!(m.resolvent_norm(), 0.5f64.sqrt(), epsilon = 1e-14);
        let (m2, a2) = normalize_pair(&m, 1.0);
        assert!(m2.is_normalized());
        assert_abs_diff_eq!(m2.phi()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a2, 0.5, epsilon = 1e-14);
        // the perturbation operator is unchanged
        let before = perturb_direct(&m, 1.0);
        let after = perturb_direct(&m2, a2);
        assert!(hausdorff(&before, &after) < 1e-12);
    }

    #[test]
    fn spectral_measure_fixtures() {
        let m = MatrixModel::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0])),
            DVector::from_vec(vec![1.0 / 2.0f64.sqrt(), 1.0 / 2.0f64.sqrt()]),
        )
        .unwrap();
        let mu = spectral_measure(&m).unwrap();
        assert_eq!(mu.atoms().len(), 2);
        assert_abs_diff_eq!(mu.atoms()[0].x, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mu.atoms()[0].w, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(mu.mass(), m.phi().norm_squared(), epsilon = 1e-12);

        let single = spectral_measure(&one_by_one()).unwrap();
        assert_abs_diff_eq!(single.atoms()[0].x, 2.0);
        assert_abs_diff_eq!(single.atoms()[0].w, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn near_degenerate_eigenvalues_merge() {
        let m = MatrixModel::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0 + 1e-14, 2.0])),
            DVector::from_vec(vec![0.6, 0.48, 0.64]),
        )
        .unwrap();
        let mu = spectral_measure(&m).unwrap();
        assert_eq!(mu.atoms().len(), 2);
        assert_abs_diff_eq!(mu.mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mu_zero_equals_spectral_measure_when_normalized() {
        let m = two_level();
        assert!(m.is_normalized());
        let mz = mu_zero(&m).unwrap();
        let sm = spectral_measure(&m).unwrap();
        assert_eq!(mz.atoms().len(), sm.atoms().len());
        for (a, b) in mz.atoms().iter().zip(sm.atoms()) {
            assert_abs_diff_eq!(a.x, b.x, epsilon = 1e-14);
            assert_abs_diff_eq!(a.w, b.w, epsilon = 1e-12);
        }
        // diag(-1,1) with phi=(1,1): atoms of mass 1 at +-1
        assert_abs_diff_eq!(mz.mass(), 2.0, epsilon = 1e-12);

        // A = [2], phi = [sqrt 5]: mu0 = 5 delta_2
        let single = mu_zero(&one_by_one()).unwrap();
        assert_eq!(single.atoms().len(), 1);
        assert_abs_diff_eq!(single.atoms()[0].x, 2.0);
        assert_abs_diff_eq!(single.atoms()[0].w, 5.0, epsilon = 1e-12);

        let un = MatrixModel::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0])),
            DVector::from_vec(vec![1.0, 2.0]),
        )
        .unwrap();
        assert!(matches!(mu_zero(&un), Err(OracleError::NotNormalized)));
    }

    #[test]
    fn natural_c_fixtures() {
        assert_abs_diff_eq!(natural_c(&one_by_one()).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(natural_c(&two_level()).unwrap(), 0.0, epsilon = 1e-14);
        // c = sum w_k lambda_k / (1 + lambda_k^2) by definition
        let m = normalize_pair(&random_model(7, 5).unwrap(), 1.0).0;
        let by_def: f64 = m
            .eigenvalues()
            .iter()
            .zip(m.overlaps())
            .map(|(&l, &o)| o * o * l / (1.0 + l * l))
            .sum();
        assert_abs_diff_eq!(natural_c(&m).unwrap(), by_def, epsilon = 1e-14);
    }

    #[test]
    fn perturb_direct_fixtures() {
        let vals = perturb_direct(&two_level(), 1.0);
        assert_abs_diff_eq!(vals[0], 1.0 - 2.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0 + 2.0f64.sqrt(), epsilon = 1e-12);
        let at_zero = perturb_direct(&two_level(), 0.0);
        assert_abs_diff_eq!(at_zero[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(at_zero[1], 1.0, epsilon = 1e-12);
        let single = perturb_direct(&one_by_one(), 0.5);
        assert_abs_diff_eq!(single[0], 4.5, epsilon = 1e-12);
    }

    #[test]
    fn secular_roots_fixtures() {
        let roots = secular_roots(&two_level(), 1.0);
        assert_abs_diff_eq!(roots[0], 1.0 - 2.0f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(roots[1], 1.0 + 2.0f64.sqrt(), epsilon = 1e-10);
        let single = secular_roots(&one_by_one(), 0.5);
        assert_eq!(single.len(), 1);
        assert_abs_diff_eq!(single[0], 4.5, epsilon = 1e-10);
    }

    #[test]
    fn ad_consistency_worked_examples() {
        let c1 = ad_consistency_check(&one_by_one(), 0.5).unwrap();
        assert!(c1.deviation < 1e-9, "deviation {}", c1.deviation);
        assert_abs_diff_eq!(c1.theta, 4.0f64.atan(), epsilon = 1e-12);
        assert_abs_diff_eq!(c1.ad_route[0], 4.5, epsilon = 1e-9);

        let c2 = ad_consistency_check(&two_level(), 1.0).unwrap();
        assert!(c2.deviation < 1e-9, "deviation {}", c2.deviation);

        assert!(matches!(
            ad_consistency_check(&two_level(), 0.0),
            Err(OracleError::Ad(AdError::SameExtension { .. }))
        ));
    }

    #[test]
    fn interlacing_for_positive_coupling() {
        let m = random_model(11, 6).unwrap();
        let base = m.eigenvalues();
        let moved = perturb_direct(&m, 2.0);
        for k in 0..base.len() {
            assert!(moved[k] >= base[k] - 1e-12);
            if k + 1 < base.len() {
                assert!(moved[k] <= base[k + 1] + 1e-12);
            }
        }
    }

    #[test]
    fn eigenvector_decomposition_invariants() {
        let (m, alpha_n) = normalize_pair(&random_model(3, 5).unwrap(), 1.5);
        let c = natural_c(&m).unwrap();
        let theta = theta_from_coupling(&Coupling::new(alpha_n, c)).theta;
        let b = m.matrix() + m.phi() * m.phi().transpose() * alpha_n;
        let sym = nalgebra::linalg::SymmetricEigen::new(b);
        let (up, _) = m.deficiency_vectors();
        for k in 0..m.dim() {
            let y = DVector::from_fn(m.dim(), |r, _| sym.eigenvectors[(r, k)]);
            let d = decompose_eigenvector(&m, theta, &y).unwrap();
            // <phi, x> = 0 by construction
            let phi_x: Complex64 = m
                .phi()
                .iter()
                .zip(d.x_part.iter())
                .map(|(&p, x)| p * x)
                .sum();
            assert!(phi_x.norm() < 1e-10, "phi-x overlap {}", phi_x.norm());
            // reconstruction
            let (up2, um2) = m.deficiency_vectors();
            let e_it = Complex64::new(0.0, theta).exp();
            let e_mit = Complex64::new(0.0, -theta).exp();
            let mut resid = 0.0f64;
            for r in 0..m.dim() {
                let rec = d.x_part[r] + d.c * e_it * up2[r] + d.c * e_mit * um2[r];
                resid += (rec - Complex64::new(y[r], 0.0)).norm_sqr();
            }
            assert!(resid.sqrt() < 1e-9, "reconstruction residual {resid}");
            // on a cyclic model no eigenvector is orthogonal to u+
            let y_up: Complex64 = y.iter().zip(up.iter()).map(|(&a, u)| a * u).sum();
            assert!(y_up.norm() > 1e-8);
        }
    }

    #[test]
    fn pair_identity_residual_small_on_random_pairs() {
        let base = random_model(5, 4).unwrap();
        let (m, _) = normalize_pair(&base, 1.0);
        let c = natural_c(&m).unwrap();
        let mut pairs = Vec::new();
        for &alpha in &[0.7, -2.0] {
            let s2 = base.resolvent_norm().powi(2);
            let theta = theta_from_coupling(&Coupling::new(alpha * s2, c)).theta;
            let b = m.matrix() + m.phi() * m.phi().transpose() * (alpha * s2);
            let sym = nalgebra::linalg::SymmetricEigen::new(b);
            let mut order: Vec<usize> = (0..m.dim()).collect();
            order.sort_by(|&i, &j| sym.eigenvalues[i].total_cmp(&sym.eigenvalues[j]));
            for &k in &order {
                let y = DVector::from_fn(m.dim(), |r, _| sym.eigenvectors[(r, k)]);
                pairs.push((theta, sym.eigenvalues[k], y));
            }
        }
        for (i, p1) in pairs.iter().enumerate() {
            for p2 in pairs.iter().skip(i) {
                let res =
                    eigenpair_identity_residual(&m, (p1.0, p1.1, &p1.2), (p2.0, p2.1, &p2.2))
                        .unwrap();
                let scale = 1.0f64.max(p1.1.abs()).max(p2.1.abs());
                assert!(res < 1e-8 * scale, "residual {res} vs scale {scale}");
            }
        }
    }

    #[test]
    fn krylov_reduce_keeps_cyclic_models() {
        let m = random_model(9, 6).unwrap();
        let red = krylov_cyclic_reduce(&m);
        assert_eq!(red.dim(), 6);
    }

    #[test]
    fn krylov_reduce_compresses_degenerate_spectrum() {
        let m = MatrixModel::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 2.0])),
            DVector::from_vec(vec![1.0, 0.0, 1.0]) / 2.0f64.sqrt(),
        )
        .unwrap();
        let red = krylov_cyclic_reduce(&m);
        assert_eq!(red.dim(), 2);
        let mu = spectral_measure(&red).unwrap();
        assert_abs_diff_eq!(mu.atoms()[0].x, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mu.atoms()[1].x, 2.0, epsilon = 1e-10);
        // the reduced perturbed spectrum embeds into the full one
        let full = perturb_direct(&m, 0.8);
        let reduced = perturb_direct(&red, 0.8);
        for r in &reduced {
            assert!(
                full.iter().any(|f| (f - r).abs() < 1e-9),
                "root {r} missing from {full:?}"
            );
        }
    }

    #[test]
    fn suite_runs_clean() {
        let cases = consistency_suite(&[1, 2, 3], |s| 2 + (s % 5) as usize, &[0.5, -1.0]).unwrap();
        assert_eq!(cases.len(), 6);
        for c in &cases {
            assert!(c.deviation < 1e-8, "case {c:?}");
        }
    }
}
