//! Finite representations of positive Borel measures: point masses plus
//! piecewise-polynomial densities of degree at most three.
//!
//! Restricting densities to cubics keeps every singular integral downstream
//! in closed form. Any measure of this shape automatically satisfies the
//! integrability condition `int dmu/(1+x^2) < infinity`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{self, Cubic, KahanSum};

/// Relative tolerance under which two atom locations are considered equal.
pub const MERGE_TOL: f64 = 1e-12;

/// Hard caps on representation size.
pub const MAX_ATOMS: usize = 1_000_000;
pub const MAX_PIECES: usize = 10_000;

pub fn merge_tolerance(x: f64) -> f64 {
    MERGE_TOL * x.abs().max(1.0)
}

/// Point mass of weight `w` at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// Density `coeffs[0] + coeffs[1] x + coeffs[2] x^2 + coeffs[3] x^3` on `[a,b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcPiece {
    pub a: f64,
    pub b: f64,
    pub coeffs: [f64; 4],
}

impl AcPiece {
    pub fn density(&self) -> Cubic {
        Cubic::new(self.coeffs)
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.a && y <= self.b
    }

    /// True when the density has a zero of order >= 2 at `y`, decided from
    /// the coefficients rather than numerically. Only such points inside a
    /// piece can carry a finite inverse-square moment.
    pub fn density_doubly_vanishes_at(&self, y: f64) -> bool {
        let p = self.density();
        let tol = 1e-14 * p.scale_on(self.a, self.b);
        p.eval(y).abs() <= tol && p.eval_deriv(y).abs() <= tol
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// Search interval for scans and root brackets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self, MeasureError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(MeasureError::InvalidWindow { lo, hi });
        }
        Ok(Window { lo, hi })
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.lo && y <= self.hi
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Window { lo, hi })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("window requires lo < hi, got [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("dyadic benchmark depth must be >= 1, got {0}")]
    InvalidDepth(u32),
    #[error("dyadic benchmark decay must be > 1, got {0}")]
    InvalidDecay(f64),
    #[error("depth {depth} would produce {atoms} atoms, above the cap of {MAX_ATOMS}")]
    DepthTooLarge { depth: u32, atoms: usize },
    #[error("failed to parse measure JSON: {0}")]
    Json(String),
}

/// Kernels available to [`weighted_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `1/(1+x^2)`
    InvOnePlusSq,
    /// `x/(1+x^2)`
    IdentityOverOnePlusSq,
}

/// A measure `mu = sum_j w_j delta_{x_j} + sum_k p_k(x) 1_{[a_k,b_k]} dx`.
///
/// Construction sorts atoms and merges locations closer than the relative
/// merge tolerance (eigendecompositions produce near-duplicates). Identically
/// zero density pieces are dropped. Immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    atoms: Vec<Atom>,
    ac_pieces: Vec<AcPiece>,
}

impl Measure {
    pub fn new(mut atoms: Vec<Atom>, ac_pieces: Vec<AcPiece>) -> Self {
        atoms.sort_by(|p, q| p.x.total_cmp(&q.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if (a.x - last.x).abs() <= merge_tolerance(last.x) => {
                    last.w += a.w;
                }
                _ => merged.push(a),
            }
        }
        let pieces = ac_pieces
            .into_iter()
            .filter(|p| !p.density().is_zero())
            .collect();
        Measure {
            atoms: merged,
            ac_pieces: pieces,
        }
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        Self::new(atoms, Vec::new())
    }

    /// Single point mass `w delta_x`.
    pub fn dirac(x: f64, w: f64) -> Self {
        Self::from_atoms(vec![Atom { x, w }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn ac_pieces(&self) -> &[AcPiece] {
        &self.ac_pieces
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.ac_pieces.is_empty()
    }

    /// Total mass `mu(R)`.
    pub fn mass(&self) -> f64 {
        let mut s = KahanSum::new();
        for a in &self.atoms {
            s.add(a.w);
        }
        for p in &self.ac_pieces {
            let q = p.density().shifted(0.0);
            let int = q[0] * (p.b - p.a)
                + q[1] * (p.b * p.b - p.a * p.a) / 2.0
                + q[2] * (p.b.powi(3) - p.a.powi(3)) / 3.0
                + q[3] * (p.b.powi(4) - p.a.powi(4)) / 4.0;
            s.add(int);
        }
        s.value()
    }

    /// Hull `[min, max]` of the support, `None` for the zero measure.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.x);
            hi = hi.max(a.x);
        }
        for p in &self.ac_pieces {
            lo = lo.min(p.a);
            hi = hi.max(p.b);
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Atom nearest to `y` together with its index, if any.
    pub fn nearest_atom(&self, y: f64) -> Option<(usize, &Atom)> {
        // atoms are sorted; binary search for the insertion point
        if self.atoms.is_empty() {
            return None;
        }
        let idx = self.atoms.partition_point(|a| a.x < y);
        let mut best: Option<(usize, &Atom)> = None;
        for i in [idx.wrapping_sub(1), idx] {
            if let Some(a) = self.atoms.get(i) {
                match best {
                    Some((_, b)) if (b.x - y).abs() <= (a.x - y).abs() => {}
                    _ => best = Some((i, a)),
                }
            }
        }
        best
    }

    pub fn atom_at(&self, y: f64) -> Option<&Atom> {
        self.nearest_atom(y)
            .filter(|(_, a)| (a.x - y).abs() <= merge_tolerance(y))
            .map(|(_, a)| a)
    }
}

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonpositiveWeight { index: usize, x: f64, w: f64 },
    NonfiniteAtom { index: usize },
    NegativeDensity { piece: usize, x: f64, value: f64 },
    InvalidInterval { piece: usize, a: f64, b: f64 },
    NonfinitePiece { piece: usize },
    ZeroMass,
    AtomCapExceeded { count: usize },
    PieceCapExceeded { count: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonpositiveWeight { index, x, w } => {
                write!(f, "atom {index} at x={x} has nonpositive weight {w}")
            }
            Violation::NonfiniteAtom { index } => write!(f, "atom {index} has nonfinite data"),
            Violation::NegativeDensity { piece, x, value } => {
                write!(f, "piece {piece} density is negative at x={x}: {value}")
            }
            Violation::InvalidInterval { piece, a, b } => {
                write!(f, "piece {piece} interval [{a}, {b}] is not increasing")
            }
            Violation::NonfinitePiece { piece } => write!(f, "piece {piece} has nonfinite data"),
            Violation::ZeroMass => write!(f, "measure has zero mass"),
            Violation::AtomCapExceeded { count } => {
                write!(f, "{count} atoms exceed the cap of {MAX_ATOMS}")
            }
            Violation::PieceCapExceeded { count } => {
                write!(f, "{count} pieces exceed the cap of {MAX_PIECES}")
            }
        }
    }
}

/// Result of checking every measure invariant; report-style, never an error.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// `int dmu/(1+x^2)`, always finite for this representation.
    pub integral_inv_one_plus_sq: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks atom positivity, density nonnegativity (at Chebyshev sample points
/// plus endpoints), representation caps, and positivity of the defining
/// integral.
pub fn validate(m: &Measure) -> ValidationReport {
    let mut violations = Vec::new();
    for (index, a) in m.atoms().iter().enumerate() {
        if !(a.x.is_finite() && a.w.is_finite()) {
            violations.push(Violation::NonfiniteAtom { index });
        } else if a.w <= 0.0 {
            violations.push(Violation::NonpositiveWeight {
                index,
                x: a.x,
                w: a.w,
            });
        }
    }
    for (piece, p) in m.ac_pieces().iter().enumerate() {
        if !(p.a.is_finite() && p.b.is_finite() && p.coeffs.iter().all(|c| c.is_finite())) {
            violations.push(Violation::NonfinitePiece { piece });
            continue;
        }
        if p.a >= p.b {
            violations.push(Violation::InvalidInterval {
                piece,
                a: p.a,
                b: p.b,
            });
            continue;
        }
        let density = p.density();
        let tol = 1e-12 * density.scale_on(p.a, p.b);
        let mid = 0.5 * (p.a + p.b);
        let half = 0.5 * (p.b - p.a);
        // Chebyshev points cos(j pi / 8), j = 0..=8, include both endpoints.
        for j in 0..=8 {
            let x = mid + half * (std::f64::consts::PI * j as f64 / 8.0).cos();
            let v = density.eval(x);
            if v < -tol {
                violations.push(Violation::NegativeDensity { piece, x, value: v });
                break;
            }
        }
    }
    if m.atoms().len() > MAX_ATOMS {
        violations.push(Violation::AtomCapExceeded {
            count: m.atoms().len(),
        });
    }
    if m.ac_pieces().len() > MAX_PIECES {
        violations.push(Violation::PieceCapExceeded {
            count: m.ac_pieces().len(),
        });
    }
    let integral = weighted_integral(m, Kernel::InvOnePlusSq);
    if integral <= 0.0 {
        violations.push(Violation::ZeroMass);
    }
    ValidationReport {
        violations,
        integral_inv_one_plus_sq: integral,
    }
}

/// `int k(x) dmu(x)` for the two kernels appearing in the Herglotz transform.
/// Exact on atoms, piecewise-analytic antiderivatives on density pieces.
pub fn weighted_integral(m: &Measure, kernel: Kernel) -> f64 {
    let mut s = KahanSum::new();
    for a in m.atoms() {
        let v = match kernel {
            Kernel::InvOnePlusSq => a.w / (1.0 + a.x * a.x),
            Kernel::IdentityOverOnePlusSq => a.w * a.x / (1.0 + a.x * a.x),
        };
        s.add(v);
    }
    for p in m.ac_pieces() {
        let d = p.density();
        let v = match kernel {
            Kernel::InvOnePlusSq => poly::integral_inv_one_plus_sq(&d, p.a, p.b),
            Kernel::IdentityOverOnePlusSq => poly::integral_x_over_one_plus_sq(&d, p.a, p.b),
        };
        s.add(v);
    }
    s.value()
}

/// Atomic benchmark family with support dense in `[-1,1]` as depth grows:
/// atoms at `k/2^m` for `m = 1..=depth` and odd `k`, weight proportional to
/// `decay^-m`, normalized to total mass one.
pub fn dyadic_benchmark(depth: u32, decay: f64) -> Result<Measure, MeasureError> {
    if depth < 1 {
        return Err(MeasureError::InvalidDepth(depth));
    }
    if decay.is_nan() || decay <= 1.0 {
        return Err(MeasureError::InvalidDecay(decay));
    }
    let count = 2usize
        .checked_pow(depth + 1)
        .map(|c| c - 2)
        .unwrap_or(usize::MAX);
    if count > MAX_ATOMS {
        return Err(MeasureError::DepthTooLarge {
            depth,
            atoms: count,
        });
    }
    let mut atoms = Vec::with_capacity(count);
    let mut total = KahanSum::new();
    for m in 1..=depth {
        let w = decay.powi(-(m as i32));
        let denom = (1u64 << m) as f64;
        let mut k = 1i64;
        while (k as f64) < denom {
            atoms.push(Atom {
                x: k as f64 / denom,
                w,
            });
            atoms.push(Atom {
                x: -(k as f64) / denom,
                w,
            });
            total.add(2.0 * w);
            k += 2;
        }
    }
    let t = total.value();
    for a in &mut atoms {
        a.w /= t;
    }
    Ok(Measure::from_atoms(atoms))
}

// ---------------------------------------------------------------------------
// JSON schema: {"atoms":[{"x":r,"w":r}...],"ac":[{"a":r,"b":r,"coeffs":[...]}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PieceJson {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    atoms: Vec<Atom>,
    ac: Vec<PieceJson>,
}

impl Measure {
    pub fn to_json(&self) -> String {
        let doc = MeasureJson {
            atoms: self.atoms.clone(),
            ac: self
                .ac_pieces
                .iter()
                .map(|p| PieceJson {
                    a: p.a,
                    b: p.b,
                    coeffs: p.coeffs.to_vec(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("measure serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        let doc: MeasureJson =
            serde_json::from_str(text).map_err(|e| MeasureError::Json(e.to_string()))?;
        let mut pieces = Vec::with_capacity(doc.ac.len());
        for (i, p) in doc.ac.into_iter().enumerate() {
            if p.coeffs.len() > 4 {
                return Err(MeasureError::Json(format!(
                    "piece {i}: density degree above 3 ({} coefficients)",
                    p.coeffs.len()
                )));
            }
            let mut coeffs = [0.0; 4];
            coeffs[..p.coeffs.len()].copy_from_slice(&p.coeffs);
            pieces.push(AcPiece {
                a: p.a,
                b: p.b,
                coeffs,
            });
        }
        Ok(Measure::new(doc.atoms, pieces))
    }
}
