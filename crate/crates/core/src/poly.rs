//! Closed-form integrals of cubic polynomials against the singular kernels
//! used throughout the crate.
//!
//! Every absolutely continuous piece of a measure carries a density
//! `p(x) = c0 + c1 x + c2 x^2 + c3 x^3`, so all integrals of the form
//! `int p(x) k(x) dx` with `k` one of `1/(1+x^2)`, `x/(1+x^2)`, `1/(x-z)`,
//! `1/((x-l)^2 + e^2)`, `1/(x-y)^2` have explicit antiderivatives. Keeping
//! them here avoids free-form quadrature near singularities.

use num_complex::Complex64;

/// Cubic polynomial in the monomial basis, `coeffs[k]` multiplying `x^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub coeffs: [f64; 4],
}

impl Cubic {
    pub fn new(coeffs: [f64; 4]) -> Self {
        Cubic { coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        c[0] + x * (c[1] + x * (c[2] + x * c[3]))
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        c[1] + x * (2.0 * c[2] + x * 3.0 * c[3])
    }

    /// Largest coefficient magnitude after scaling by `max(1,|a|,|b|)^k`;
    /// used as the reference scale for "is this value effectively zero".
    pub fn scale_on(&self, a: f64, b: f64) -> f64 {
        let m = a.abs().max(b.abs()).max(1.0);
        let mut s = 0.0f64;
        let mut mk = 1.0;
        for &c in &self.coeffs {
            s = s.max(c.abs() * mk);
            mk *= m;
        }
        s.max(f64::MIN_POSITIVE)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Coefficients of `p(u + shift)` in powers of `u` (real Taylor shift).
    pub fn shifted(&self, shift: f64) -> [f64; 4] {
        let c = &self.coeffs;
        let q0 = self.eval(shift);
        let q1 = self.eval_deriv(shift);
        let q2 = c[2] + 3.0 * c[3] * shift;
        let q3 = c[3];
        [q0, q1, q2, q3]
    }

    /// Coefficients of `p(u + shift)` for complex `shift`.
    pub fn shifted_complex(&self, shift: Complex64) -> [Complex64; 4] {
        let c = &self.coeffs;
        let q0 = Complex64::new(c[0], 0.0) + shift * (c[1] + shift * (c[2] + shift * c[3]));
        let q1 = Complex64::new(c[1], 0.0) + shift * (2.0 * c[2] + shift * (3.0 * c[3]));
        let q2 = Complex64::new(c[2], 0.0) + shift * (3.0 * c[3]);
        let q3 = Complex64::new(c[3], 0.0);
        [q0, q1, q2, q3]
    }
}

/// `arctan(hi) - arctan(lo)` without cancellation for large same-sign args.
pub fn atan_diff(hi: f64, lo: f64) -> f64 {
    (hi - lo).atan2(1.0 + hi * lo)
}

/// `int_a^b p(x) / (1 + x^2) dx`.
pub fn integral_inv_one_plus_sq(p: &Cubic, a: f64, b: f64) -> f64 {
    let c = &p.coeffs;
    // p/(1+x^2) = (c3 x + c2) + ((c1-c3) x + (c0-c2))/(1+x^2)
    let poly = c[3] * (b * b - a * a) / 2.0 + c[2] * (b - a);
    let log = (c[1] - c[3]) / 2.0 * ((1.0 + b * b) / (1.0 + a * a)).ln();
    let atan = (c[0] - c[2]) * atan_diff(b, a);
    poly + log + atan
}

/// `int_a^b x p(x) / (1 + x^2) dx`.
pub fn integral_x_over_one_plus_sq(p: &Cubic, a: f64, b: f64) -> f64 {
    let c = &p.coeffs;
    // x^4/(1+x^2) -> x^3/3 - x + arctan x, x^3/(1+x^2) -> x^2/2 - ln(1+x^2)/2,
    // x^2/(1+x^2) -> x - arctan x,          x/(1+x^2)  -> ln(1+x^2)/2
    let du = b - a;
    let du2 = (b * b - a * a) / 2.0;
    let du3 = (b * b * b - a * a * a) / 3.0;
    let dlog = ((1.0 + b * b) / (1.0 + a * a)).ln() / 2.0;
    let datan = atan_diff(b, a);
    c[3] * (du3 - du + datan) + c[2] * (du2 - dlog) + c[1] * (du - datan) + c[0] * dlog
}

/// `int_a^b p(x) / (x - z) dx` for `Im z != 0`.
///
/// The segment `[a,b] - z` stays strictly inside one half-plane, so the
/// principal log is analytic along it.
pub fn integral_cauchy_complex(p: &Cubic, a: f64, b: f64, z: Complex64) -> Complex64 {
    let q = p.shifted_complex(z);
    let ua = Complex64::new(a, 0.0) - z;
    let ub = Complex64::new(b, 0.0) - z;
    let dlog = (ub / ua).ln();
    q[0] * dlog
        + q[1] * (ub - ua)
        + q[2] * (ub * ub - ua * ua) / 2.0
        + q[3] * (ub * ub * ub - ua * ua * ua) / 3.0
}

/// `int_a^b p(x) / (x - y) dx` for real `y`.
///
/// When `y` lies in `[a,b]` the caller must ensure `p(y) = 0`; the log term
/// is then absent and the integrand is a polynomial in `x - y`.
pub fn integral_cauchy_real(p: &Cubic, a: f64, b: f64, y: f64) -> f64 {
    let q = p.shifted(y);
    let ua = a - y;
    let ub = b - y;
    let inside = y >= a && y <= b;
    let dlog = if inside { 0.0 } else { (ub / ua).ln() };
    q[0] * dlog
        + q[1] * (ub - ua)
        + q[2] * (ub * ub - ua * ua) / 2.0
        + q[3] * (ub * ub * ub - ua * ua * ua) / 3.0
}

/// `int_a^b p(x) / ((x - l)^2 + eps^2) dx` for `eps > 0`.
pub fn integral_poisson(p: &Cubic, a: f64, b: f64, l: f64, eps: f64) -> f64 {
    let q = p.shifted(l);
    let ua = a - l;
    let ub = b - l;
    // arctan(ub/eps) - arctan(ua/eps), scale-free form of atan_diff
    let datan = (eps * (ub - ua)).atan2(eps * eps + ua * ub);
    let dlog = ((ub * ub + eps * eps) / (ua * ua + eps * eps)).ln() / 2.0;
    q[0] / eps * datan
        + q[1] * dlog
        + q[2] * ((ub - ua) - eps * datan)
        + q[3] * ((ub * ub - ua * ua) / 2.0 - eps * eps * dlog)
}

/// `int_a^b p(x) / (x - y)^2 dx`.
///
/// Finite only when `y` is outside `[a,b]`, or inside with
/// `p(y) = p'(y) = 0`; the caller is responsible for that classification.
pub fn integral_inv_square(p: &Cubic, a: f64, b: f64, y: f64) -> f64 {
    let q = p.shifted(y);
    let ua = a - y;
    let ub = b - y;
    let inside = y >= a && y <= b;
    let (lead, dlog) = if inside {
        (0.0, 0.0)
    } else {
        (-q[0] * (1.0 / ub - 1.0 / ua), q[1] * (ub / ua).ln())
    };
    lead + dlog + q[2] * (ub - ua) + q[3] * (ub * ub - ua * ua) / 2.0
}

/// Compensated (Neumaier) summation; keeps atom sums accurate for the
/// 1e-14-level mass checks even with 10^6 terms.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
