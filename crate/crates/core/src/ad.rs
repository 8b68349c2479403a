//! Aronszajn-Donoghue engine: eigenvalues of the extension family from the
//! base spectral data `(mu0, theta0)`, the inverse energy-to-angle map, and
//! the forbidden-energy / coupling scans.
//!
//! The criterion: for `theta != theta0`, `y` is an eigenvalue of `T_theta`
//! exactly when `int dmu0/(x-y)^2 < infinity` and
//! `F_mu0(y + i0) = cot(theta - theta0)`. Since `F' = I(y) > 0` wherever it
//! converges, `F` is strictly increasing on every gap of the support, so
//! per-gap bisection is unconditionally convergent.

use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

use crate::herglotz::{
    boundary_value_unchecked, inverse_square_moment_with, EnergyClass, Tolerances,
};
use crate::measure::{merge_tolerance, Measure, Window};
use crate::params::{
    angle_distance_mod_pi, reduce_mod_pi, theta_from_coupling, Coupling, ExtensionParam, ANGLE_TOL,
};

pub const SCAN_SCHEMA: &str = "ad-scan/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdError {
    #[error("theta = {theta} coincides with the base extension theta0 = {theta0}; the criterion applies only to theta != theta0")]
    SameExtension { theta: f64, theta0: f64 },
    #[error("inverse-square moment of mu0 diverges at y = {y}: forbidden energy")]
    ForbiddenEnergy { y: f64 },
    #[error("scan grid needs at least 2 points, got {0}")]
    InvalidGrid(usize),
    #[error("coupling sweep requires theta0 = pi/2 (the unperturbed operator), got {0}")]
    BaseNotUnperturbed(f64),
}

/// Base extension data: `mu0` is the spectral measure
/// `(1+x^2) d<u_+, E0(x) u_+>` of `T_theta0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdProblem {
    pub mu0: Measure,
    pub theta0: ExtensionParam,
}

impl AdProblem {
    pub fn new(mu0: Measure, theta0: ExtensionParam) -> Self {
        AdProblem { mu0, theta0 }
    }

    /// Point spectrum of the base extension itself: the atoms of `mu0`. The
    /// criterion never covers `theta = theta0`, so this is exposed as a
    /// separate accessor rather than through the root finder.
    pub fn base_point_spectrum(&self, w: &Window) -> Vec<f64> {
        self.mu0
            .atoms()
            .iter()
            .map(|a| a.x)
            .filter(|&x| w.contains(x))
            .collect()
    }
}

/// One detected eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenHit {
    pub y: f64,
    /// Root lies inside the merge-tolerance neighborhood of a support point;
    /// finite precision cannot separate it from the support there.
    pub near_atom: bool,
}

/// Grid point together with its convergent/divergent classification.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub y: f64,
    pub class: EnergyClass,
}

/// Eigenvalues detected for one extension parameter (optionally labelled by
/// the coupling that produced it).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub alpha: Option<f64>,
    pub alpha_infinite: bool,
    /// The row's parameter coincided with `theta0`; no criterion applies.
    pub same_extension: bool,
    pub eigenvalues: Vec<SweepHit>,
}

/// Eigen hit plus the classification of its own location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepHit {
    pub y: f64,
    pub near_atom: bool,
    pub convergent: bool,
}

/// Grid classification of energies plus detected eigenvalues per extension.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub window: Window,
    pub theta0: f64,
    pub grid: Vec<GridPoint>,
    pub eigen_hits: Vec<SweepRow>,
    pub forbidden_fraction: f64,
}

impl ScanReport {
    /// Every unflagged eigen hit sits at a convergent-classified energy.
    pub fn hits_consistent(&self) -> bool {
        self.eigen_hits
            .iter()
            .flat_map(|r| r.eigenvalues.iter())
            .all(|h| h.near_atom || h.convergent)
    }
}

// --------------------------------------------------------------------------
// Gap decomposition of the window
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct GapEnd {
    x: f64,
    /// `F` blows up when approaching this endpoint from inside the gap.
    pole: bool,
}

#[derive(Debug, Clone, Copy)]
struct Blocker {
    start: f64,
    end: f64,
    left_pole: bool,
    right_pole: bool,
}

fn support_blockers(m: &Measure, w: &Window) -> Vec<Blocker> {
    let mut blockers: Vec<Blocker> = Vec::new();
    for a in m.atoms() {
        if a.x >= w.lo && a.x <= w.hi {
            blockers.push(Blocker {
                start: a.x,
                end: a.x,
                left_pole: true,
                right_pole: true,
            });
        }
    }
    for p in m.ac_pieces() {
        if p.b < w.lo || p.a > w.hi {
            continue;
        }
        let d = p.density();
        let ztol = 1e-14 * d.scale_on(p.a, p.b);
        blockers.push(Blocker {
            start: p.a,
            end: p.b,
            left_pole: d.eval(p.a).abs() > ztol,
            right_pole: d.eval(p.b).abs() > ztol,
        });
    }
    blockers.sort_by(|x, y| x.start.total_cmp(&y.start));
    // merge overlaps; an atom inside a piece disappears into it, while an
    // atom exactly on a boundary keeps that boundary a pole
    let mut merged: Vec<Blocker> = Vec::new();
    for b in blockers {
        match merged.last_mut() {
            Some(last) if b.start <= last.end => {
                if b.start == last.start {
                    last.left_pole = last.left_pole || b.left_pole;
                }
                if b.end > last.end {
                    last.end = b.end;
                    last.right_pole = b.right_pole;
                } else if b.end == last.end {
                    last.right_pole = last.right_pole || b.right_pole;
                }
            }
            _ => merged.push(b),
        }
    }
    merged
}

/// Maximal open intervals of the window avoiding atoms and density pieces.
fn support_gaps(m: &Measure, w: &Window) -> Vec<(GapEnd, GapEnd)> {
    let blockers = support_blockers(m, w);
    let mut gaps = Vec::with_capacity(blockers.len() + 1);
    let mut cursor = GapEnd {
        x: w.lo,
        pole: false,
    };
    for b in &blockers {
        if b.start > cursor.x {
            gaps.push((
                cursor,
                GapEnd {
                    x: b.start.min(w.hi),
                    pole: b.left_pole,
                },
            ));
        }
        if b.end > cursor.x || (b.end == cursor.x && b.right_pole) {
            cursor = GapEnd {
                x: b.end,
                pole: b.right_pole,
            };
        }
        if cursor.x >= w.hi {
            return gaps;
        }
    }
    if cursor.x < w.hi {
        gaps.push((
            cursor,
            GapEnd {
                x: w.hi,
                pole: false,
            },
        ));
    }
    gaps
}

fn bisect_increasing(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
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

/// Eigenvalues of `T_theta` inside the window, to absolute accuracy
/// `tol.root_tol`. Roots that cannot be separated from the support at
/// machine precision come back flagged `near_atom`.
pub fn eigenvalues_for_extension_with(
    p: &AdProblem,
    theta: &ExtensionParam,
    w: &Window,
    tol: &Tolerances,
) -> Result<Vec<EigenHit>, AdError> {
    if angle_distance_mod_pi(theta.theta, p.theta0.theta) < ANGLE_TOL {
        return Err(AdError::SameExtension {
            theta: theta.theta,
            theta0: p.theta0.theta,
        });
    }
    let delta = theta.theta - p.theta0.theta;
    let target = delta.cos() / delta.sin();
    let f = |y: f64| boundary_value_unchecked(&p.mu0, y) - target;

    let mut hits: Vec<EigenHit> = Vec::new();
    let refine = if p.mu0.ac_pieces().is_empty() { 1 } else { 64 };
    for (left, right) in support_gaps(&p.mu0, w) {
        let lo = if left.pole || left.x > w.lo {
            left.x + merge_tolerance(left.x)
        } else {
            left.x
        };
        let hi = if right.pole || right.x < w.hi {
            right.x - merge_tolerance(right.x)
        } else {
            right.x
        };
        if lo >= hi {
            continue;
        }
        let f_lo = f(lo);
        let f_hi = f(hi);
        if f_lo > 0.0 {
            // F is increasing, so the target was crossed inside the clipped
            // sliver next to the left endpoint (only possible at a pole)
            if left.pole {
                hits.push(EigenHit {
                    y: lo,
                    near_atom: true,
                });
            }
            continue;
        }
        if f_hi < 0.0 {
            if right.pole {
                hits.push(EigenHit {
                    y: hi,
                    near_atom: true,
                });
            }
            continue;
        }
        if refine == 1 {
            hits.push(EigenHit {
                y: bisect_increasing(&f, lo, hi, tol.root_tol),
                near_atom: false,
            });
        } else {
            // bracket on a refinement grid first; with density pieces around
            // we avoid betting everything on a single global bracket
            let step = (hi - lo) / refine as f64;
            let mut prev_x = lo;
            let mut prev_f = f_lo;
            for i in 1..=refine {
                let x = if i == refine {
                    hi
                } else {
                    lo + i as f64 * step
                };
                let fx = if i == refine { f_hi } else { f(x) };
                if prev_f <= 0.0 && fx >= 0.0 {
                    hits.push(EigenHit {
                        y: bisect_increasing(&f, prev_x, x, tol.root_tol),
                        near_atom: false,
                    });
                }
                prev_x = x;
                prev_f = fx;
            }
        }
    }

    // isolated double zeros of a density are the only points inside a piece
    // where the moment can converge; check them directly
    for piece in p.mu0.ac_pieces() {
        let d = piece.density();
        let ztol = 1e-14 * d.scale_on(piece.a, piece.b);
        for r in quadratic_roots(3.0 * d.coeffs[3], 2.0 * d.coeffs[2], d.coeffs[1]) {
            if !(r >= piece.a && r <= piece.b && w.contains(r)) {
                continue;
            }
            if d.eval(r).abs() > ztol {
                continue;
            }
            if !inverse_square_moment_with(&p.mu0, r, tol).is_convergent() {
                continue;
            }
            if f(r).abs() <= tol.root_tol * target.abs().max(1.0) {
                hits.push(EigenHit {
                    y: r,
                    near_atom: false,
                });
            }
        }
    }

    hits.sort_by(|a, b| a.y.total_cmp(&b.y));
    hits.dedup_by(|a, b| (a.y - b.y).abs() <= 2.0 * tol.root_tol);
    Ok(hits)
}

pub fn eigenvalues_for_extension(
    p: &AdProblem,
    theta: &ExtensionParam,
    w: &Window,
) -> Result<Vec<EigenHit>, AdError> {
    eigenvalues_for_extension_with(p, theta, w, &Tolerances::default())
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    // citardauq form for the small root keeps precision
    let q = -0.5 * (b + b.signum() * s);
    if q == 0.0 {
        return vec![0.0];
    }
    let r1 = q / a;
    let r2 = c / q;
    if (r1 - r2).abs() < 1e-15 * r1.abs().max(1.0) {
        vec![r1]
    } else {
        vec![r1.min(r2), r1.max(r2)]
    }
}

/// The unique `theta != theta0` whose extension has `y` as an eigenvalue:
/// solves `cot(theta - theta0) = F_mu0(y + i0)`.
pub fn extension_for_energy_with(
    p: &AdProblem,
    y: f64,
    tol: &Tolerances,
) -> Result<ExtensionParam, AdError> {
    match inverse_square_moment_with(&p.mu0, y, tol) {
        EnergyClass::Divergent { .. } => Err(AdError::ForbiddenEnergy { y }),
        EnergyClass::Convergent { .. } => {
            let fv = boundary_value_unchecked(&p.mu0, y);
            // arccot maps R onto (0, pi)
            let theta = reduce_mod_pi(p.theta0.theta + FRAC_PI_2 - fv.atan());
            Ok(ExtensionParam { theta })
        }
    }
}

pub fn extension_for_energy(p: &AdProblem, y: f64) -> Result<ExtensionParam, AdError> {
    extension_for_energy_with(p, y, &Tolerances::default())
}

fn classify_grid(m: &Measure, w: &Window, grid_n: usize, tol: &Tolerances) -> Vec<GridPoint> {
    (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let frac = i as f64 / (grid_n - 1) as f64;
            let y = w.lo + (w.hi - w.lo) * frac;
            GridPoint {
                y,
                class: inverse_square_moment_with(m, y, tol),
            }
        })
        .collect()
}

/// Attaches the convergent/divergent classification of each hit's location.
pub fn classify_hits(p: &AdProblem, hits: Vec<EigenHit>, tol: &Tolerances) -> Vec<SweepHit> {
    hits.into_iter()
        .map(|h| SweepHit {
            y: h.y,
            near_atom: h.near_atom,
            convergent: inverse_square_moment_with(&p.mu0, h.y, tol).is_convergent(),
        })
        .collect()
}

fn forbidden_fraction(grid: &[GridPoint]) -> f64 {
    if grid.is_empty() {
        return 0.0;
    }
    let divergent = grid.iter().filter(|g| !g.class.is_convergent()).count();
    divergent as f64 / grid.len() as f64
}

/// Classifies `grid_n` uniformly spaced energies and, for each angle in
/// `thetas`, locates the eigenvalues of `T_theta` in the window and checks
/// they sit at convergent points.
pub fn forbidden_energy_scan_with(
    p: &AdProblem,
    w: &Window,
    grid_n: usize,
    thetas: &[f64],
    tol: &Tolerances,
) -> Result<ScanReport, AdError> {
    if grid_n < 2 {
        return Err(AdError::InvalidGrid(grid_n));
    }
    let grid = classify_grid(&p.mu0, w, grid_n, tol);
    let eigen_hits: Vec<SweepRow> = thetas
        .par_iter()
        .map(|&t| {
            let theta = ExtensionParam::new(t);
            match eigenvalues_for_extension_with(p, &theta, w, tol) {
                Ok(hits) => SweepRow {
                    theta: theta.theta,
                    alpha: None,
                    alpha_infinite: false,
                    same_extension: false,
                    eigenvalues: classify_hits(p, hits, tol),
                },
                Err(AdError::SameExtension { .. }) => SweepRow {
                    theta: theta.theta,
                    alpha: None,
                    alpha_infinite: false,
                    same_extension: true,
                    eigenvalues: Vec::new(),
                },
                Err(_) => unreachable!("root finder only fails on SameExtension"),
            }
        })
        .collect();
    let fraction = forbidden_fraction(&grid);
    Ok(ScanReport {
        window: *w,
        theta0: p.theta0.theta,
        grid,
        eigen_hits,
        forbidden_fraction: fraction,
    })
}

pub fn forbidden_energy_scan(
    p: &AdProblem,
    w: &Window,
    grid_n: usize,
    thetas: &[f64],
) -> Result<ScanReport, AdError> {
    forbidden_energy_scan_with(p, w, grid_n, thetas, &Tolerances::default())
}

/// Maps each coupling to its extension angle through `Psi_c` and detects
/// eigenvalues inside the window intersected with the support hull of `mu0`.
/// A coupling with an empty row is an empirical member of the forbidden set
/// `Gamma_c` at this resolution. Requires the base extension `theta0 = pi/2`.
///
/// `include_infinite` appends the `alpha = infinity` extension, which the
/// coupling family itself never reaches.
pub fn coupling_sweep_with(
    p: &AdProblem,
    c: f64,
    alphas: &[f64],
    w: &Window,
    grid_n: usize,
    include_infinite: bool,
    tol: &Tolerances,
) -> Result<ScanReport, AdError> {
    if grid_n < 2 {
        return Err(AdError::InvalidGrid(grid_n));
    }
    if angle_distance_mod_pi(p.theta0.theta, FRAC_PI_2) > ANGLE_TOL {
        return Err(AdError::BaseNotUnperturbed(p.theta0.theta));
    }
    let grid = classify_grid(&p.mu0, w, grid_n, tol);
    let scan_window = p
        .mu0
        .support_hull()
        .and_then(|(lo, hi)| Window::new(lo, hi).ok())
        .and_then(|hull| w.intersect(&hull));

    let mut couplings: Vec<Coupling> = alphas.iter().map(|&a| Coupling::new(a, c)).collect();
    if include_infinite {
        couplings.push(Coupling::infinite(c));
    }
    let eigen_hits: Vec<SweepRow> = couplings
        .par_iter()
        .map(|k| {
            let theta = theta_from_coupling(k);
            let (alpha, alpha_infinite) = match k.alpha {
                crate::params::CouplingStrength::Finite(a) => (Some(a), false),
                crate::params::CouplingStrength::Infinite => (None, true),
            };
            let same = angle_distance_mod_pi(theta.theta, p.theta0.theta) < ANGLE_TOL;
            let eigenvalues = match (&scan_window, same) {
                (Some(sw), false) => {
                    let hits = eigenvalues_for_extension_with(p, &theta, sw, tol)
                        .expect("theta != theta0 checked above");
                    classify_hits(p, hits, tol)
                }
                _ => Vec::new(),
            };
            SweepRow {
                theta: theta.theta,
                alpha,
                alpha_infinite,
                same_extension: same,
                eigenvalues,
            }
        })
        .collect();
    let fraction = forbidden_fraction(&grid);
    Ok(ScanReport {
        window: *w,
        theta0: p.theta0.theta,
        grid,
        eigen_hits,
        forbidden_fraction: fraction,
    })
}

pub fn coupling_sweep(
    p: &AdProblem,
    c: f64,
    alphas: &[f64],
    w: &Window,
    grid_n: usize,
) -> Result<ScanReport, AdError> {
    coupling_sweep_with(p, c, alphas, w, grid_n, false, &Tolerances::default())
}
