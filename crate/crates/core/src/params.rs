//! The bijective parameter chain between couplings `(alpha, c)`, the extended
//! real parameter `gamma`, the unimodular number `v`, and the extension angle
//! `theta` in `[0, pi)`.
//!
//! Conventions: `arg` is taken in `[0, 2pi)` and angles are reduced mod pi
//! into `[0, pi)`. The coupling `alpha = infinity` is a first-class value; it
//! reaches the angle chart through `gamma = -c`.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Absolute tolerance (radians) for comparisons against excluded angles.
pub const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("|v| = {modulus} is not unimodular within 1e-12")]
    NotUnimodular { modulus: f64 },
    #[error("theta = {theta} is excluded for c = {c} (corresponds to alpha = infinity)")]
    ExcludedAngle { theta: f64, c: f64 },
}

/// Coupling constant and renormalization parameter of `A_{alpha,c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub alpha: CouplingStrength,
    pub c: f64,
}

/// `alpha` may be the symbol infinity: the extension missing from the
/// regular family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingStrength {
    Finite(f64),
    Infinite,
}

impl Coupling {
    pub fn new(alpha: f64, c: f64) -> Self {
        Coupling {
            alpha: CouplingStrength::Finite(alpha),
            c,
        }
    }

    pub fn infinite(c: f64) -> Self {
        Coupling {
            alpha: CouplingStrength::Infinite,
            c,
        }
    }
}

/// Extension angle, invariant `0 <= theta < pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionParam {
    pub theta: f64,
}

impl ExtensionParam {
    pub fn new(theta: f64) -> Self {
        ExtensionParam {
            theta: reduce_mod_pi(theta),
        }
    }
}

/// Extended real parameter of the `A^gamma` family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaParam {
    Finite(f64),
    Infinite,
}

/// Unimodular complex number labelling the `A(v)` family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnimodularV {
    pub v: Complex64,
}

/// Reduce an angle into `[0, pi)`.
pub fn reduce_mod_pi(theta: f64) -> f64 {
    let mut t = theta % PI;
    if t < 0.0 {
        t += PI;
    }
    // -1e-17 % pi can round back up to pi
    if t >= PI {
        t -= PI;
    }
    t
}

/// Distance between two angles on the mod-pi circle.
pub fn angle_distance_mod_pi(a: f64, b: f64) -> f64 {
    let d = (reduce_mod_pi(a) - reduce_mod_pi(b)).abs();
    d.min(PI - d)
}

fn arg_in_0_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// `gamma = -(1/alpha + c)`, with `alpha = 0 -> gamma = infinity` and
/// `alpha = infinity -> gamma = -c`.
pub fn gamma_from_coupling(k: &Coupling) -> GammaParam {
    match k.alpha {
        CouplingStrength::Infinite => GammaParam::Finite(-k.c),
        CouplingStrength::Finite(alpha) => {
            if alpha == 0.0 {
                GammaParam::Infinite
            } else {
                GammaParam::Finite(-(1.0 / alpha + k.c))
            }
        }
    }
}

/// `v = (gamma + i)/(gamma - i)`, with `gamma = infinity -> v = 1`.
pub fn v_from_gamma(g: &GammaParam) -> UnimodularV {
    match g {
        GammaParam::Infinite => UnimodularV {
            v: Complex64::new(1.0, 0.0),
        },
        GammaParam::Finite(gamma) => {
            let v = Complex64::new(*gamma, 1.0) / Complex64::new(*gamma, -1.0);
            UnimodularV { v }
        }
    }
}

/// `theta = arg(-v)/2` with `arg` valued in `[0, 2pi)`, so `theta` lands in
/// `[0, pi)`.
pub fn theta_from_v(u: &UnimodularV) -> Result<ExtensionParam, ParamError> {
    let modulus = u.v.norm();
    if (modulus - 1.0).abs() > ANGLE_TOL {
        return Err(ParamError::NotUnimodular { modulus });
    }
    let theta = 0.5 * arg_in_0_2pi(-u.v);
    Ok(ExtensionParam {
        theta: reduce_mod_pi(theta),
    })
}

/// The map `Psi_c`: `theta = arg[-(1 + alpha(c-i)) / (1 + alpha(c+i))] / 2`
/// for finite `alpha`; `alpha = infinity` is routed through the gamma chart.
pub fn theta_from_coupling(k: &Coupling) -> ExtensionParam {
    match k.alpha {
        CouplingStrength::Infinite => {
            let v = v_from_gamma(&gamma_from_coupling(k));
            theta_from_v(&v).expect("gamma chart produces unimodular v")
        }
        CouplingStrength::Finite(alpha) => {
            let num = Complex64::new(1.0 + alpha * k.c, -alpha);
            let den = Complex64::new(1.0 + alpha * k.c, alpha);
            let theta = 0.5 * arg_in_0_2pi(-num / den);
            ExtensionParam {
                theta: reduce_mod_pi(theta),
            }
        }
    }
}

/// The angle excluded from the image of `Psi_c`: `arg(-(c-i)/(c+i))/2`, the
/// limit of `theta` as `alpha -> infinity`. For `c = 0` this is `0`.
pub fn excluded_angle(c: f64) -> f64 {
    let r = -Complex64::new(c, -1.0) / Complex64::new(c, 1.0);
    reduce_mod_pi(0.5 * arg_in_0_2pi(r))
}

/// The inverse map `Psi_c^{-1}(theta) = -(1 + e^{2 i theta}) /
/// (c - i + (c + i) e^{2 i theta})`, evaluated in the equivalent real form
/// `cos(theta) / (sin(theta) - c cos(theta))` (multiply numerator and
/// denominator by `e^{-i theta}`), which carries no imaginary residue.
///
/// `theta = 0 (mod pi)` and `theta = excluded_angle(c)` are poles
/// corresponding to `alpha = infinity`.
pub fn coupling_from_theta(theta: &ExtensionParam, c: f64) -> Result<Coupling, ParamError> {
    let t = theta.theta;
    if angle_distance_mod_pi(t, 0.0) < ANGLE_TOL
        || angle_distance_mod_pi(t, excluded_angle(c)) < ANGLE_TOL
    {
        return Err(ParamError::ExcludedAngle { theta: t, c });
    }
    let alpha = t.cos() / (t.sin() - c * t.cos());
    Ok(Coupling::new(alpha, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn gamma_value(g: &GammaParam) -> f64 {
        match g {
            GammaParam::Finite(x) => *x,
            GammaParam::Infinite => panic!("expected finite gamma"),
        }
    }

    #[test]
    fn gamma_from_coupling_cases() {
        assert_abs_diff_eq!(
            gamma_value(&gamma_from_coupling(&Coupling::new(1.0, 0.0))),
            -1.0
        );
        assert!(matches!(
            gamma_from_coupling(&Coupling::new(0.0, 7.0)),
            GammaParam::Infinite
        ));
        assert_abs_diff_eq!(
            gamma_value(&gamma_from_coupling(&Coupling::new(-1.0, 2.0))),
            -1.0
        );
        assert_abs_diff_eq!(
            gamma_value(&gamma_from_coupling(&Coupling::infinite(3.0))),
            -3.0
        );
    }

    #[test]
    fn v_from_gamma_cases() {
        let v_inf = v_from_gamma(&GammaParam::Infinite).v;
        assert_abs_diff_eq!(v_inf.re, 1.0);
        assert_abs_diff_eq!(v_inf.im, 0.0);
        let v0 = v_from_gamma(&GammaParam::Finite(0.0)).v;
        assert_abs_diff_eq!(v0.re, -1.0);
        assert_abs_diff_eq!(v0.im, 0.0);
        // (-1+i)/(-1-i) = -i
        let vm1 = v_from_gamma(&GammaParam::Finite(-1.0)).v;
        assert_abs_diff_eq!(vm1.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(vm1.im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn theta_from_v_cases() {
        let t = |re: f64, im: f64| {
            theta_from_v(&UnimodularV {
                v: Complex64::new(re, im),
            })
            .unwrap()
            .theta
        };
        assert_abs_diff_eq!(t(1.0, 0.0), FRAC_PI_2);
        assert_abs_diff_eq!(t(-1.0, 0.0), 0.0);
        // arg(i) = pi/2
        assert_abs_diff_eq!(t(0.0, -1.0), PI / 4.0);
        assert!(matches!(
            theta_from_v(&UnimodularV {
                v: Complex64::new(0.5, 0.0)
            }),
            Err(ParamError::NotUnimodular { .. })
        ));
    }

    #[test]
    fn theta_from_coupling_fixtures() {
        assert_abs_diff_eq!(
            theta_from_coupling(&Coupling::new(0.0, 7.0)).theta,
            FRAC_PI_2
        );
        // -(1-i)/(1+i) = i, half its argument is pi/4
        assert_abs_diff_eq!(
            theta_from_coupling(&Coupling::new(1.0, 0.0)).theta,
            PI / 4.0,
            epsilon = 1e-15
        );
        // tan(theta) = 1/alpha + c
        assert_abs_diff_eq!(
            theta_from_coupling(&Coupling::new(0.5, 2.0)).theta,
            4.0f64.atan(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn coupling_from_theta_fixtures() {
        let alpha = |theta: f64, c: f64| match coupling_from_theta(&ExtensionParam::new(theta), c)
            .unwrap()
            .alpha
        {
            CouplingStrength::Finite(a) => a,
            CouplingStrength::Infinite => panic!("finite expected"),
        };
        assert_abs_diff_eq!(alpha(PI / 4.0, 0.0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(alpha(FRAC_PI_2, 3.7), 0.0, epsilon = 1e-14);
        let c = 1.0;
        let t_excl = excluded_angle(c);
        assert!(matches!(
            coupling_from_theta(&ExtensionParam::new(t_excl), c),
            Err(ParamError::ExcludedAngle { .. })
        ));
        assert!(matches!(
            coupling_from_theta(&ExtensionParam::new(0.0), 2.0),
            Err(ParamError::ExcludedAngle { .. })
        ));
    }

    #[test]
    fn chain_matches_direct_map() {
        let samples = [
            (1.0, 0.0),
            (0.5, 2.0),
            (-3.0, 1.5),
            (1e-6, -4.0),
            (250.0, 0.3),
            (-0.75, -0.75),
        ];
        for (alpha, c) in samples {
            let k = Coupling::new(alpha, c);
            let direct = theta_from_coupling(&k).theta;
            let chained = theta_from_v(&v_from_gamma(&gamma_from_coupling(&k)))
                .unwrap()
                .theta;
            assert!(
                angle_distance_mod_pi(direct, chained) < 1e-12,
                "alpha {alpha} c {c}: {direct} vs {chained}"
            );
        }
    }

    #[test]
    fn alpha_infinite_reaches_excluded_angle() {
        for c in [0.0, 1.0, -2.5] {
            let theta = theta_from_coupling(&Coupling::infinite(c)).theta;
            assert!(angle_distance_mod_pi(theta, excluded_angle(c)) < 1e-12);
        }
    }

    #[test]
    fn real_form_matches_complex_inverse() {
        // oracle: the mobius form -(1+e^{2 i theta})/(c-i+(c+i)e^{2 i theta})
        for (t, c) in [(0.3, 0.0), (1.1, 2.0), (2.9, -4.5), (FRAC_PI_2, 1.0)] {
            let e = Complex64::new(0.0, 2.0 * t).exp();
            let mobius = -(Complex64::new(1.0, 0.0) + e)
                / (Complex64::new(c, -1.0) + Complex64::new(c, 1.0) * e);
            let real_form = match coupling_from_theta(&ExtensionParam::new(t), c)
                .unwrap()
                .alpha
            {
                CouplingStrength::Finite(a) => a,
                CouplingStrength::Infinite => panic!("finite expected"),
            };
            assert_abs_diff_eq!(real_form, mobius.re, epsilon = 1e-12);
            assert!(mobius.im.abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_through_theta() {
        for (alpha, c) in [(1.0, 0.0), (-0.2, 4.0), (42.0, -1.0), (1e-3, 0.1)] {
            let theta = theta_from_coupling(&Coupling::new(alpha, c));
            let back = coupling_from_theta(&theta, c).unwrap();
            match back.alpha {
                CouplingStrength::Finite(a) => {
                    assert!(
                        (a - alpha).abs() <= 1e-10 * alpha.abs().max(1e-30),
                        "alpha {alpha} c {c} -> {a}"
                    );
                }
                CouplingStrength::Infinite => panic!("finite expected"),
            }
        }
    }
}
