//! Evaluation of the special functions underlying the spectral bases.
//!
//! Everything here is pure pointwise evaluation: the Maxwellian weight,
//! probabilists' Hermite polynomials, generalized Laguerre polynomials,
//! spherical harmonics, and the Burnett polynomials that combine the latter
//! two.  All polynomial families are evaluated by three-term recurrences —
//! never by closed-form factorial ratios — so values stay finite and accurate
//! up to the degrees the solver uses (see e.g. Numerical Recipes §6.7 on why
//! recurrences are the stable choice for orthogonal polynomials).
//!
//! Conventions, fixed once and used everywhere:
//! - Hermite polynomials are the probabilists' family He_n (weight
//!   e^{−x²/2}), with ∫ H^α H^β M dv = δ_{αβ} α!.
//! - Spherical harmonics carry the Condon–Shortley phase inside the
//!   associated Legendre function and satisfy conj(Y_l^m) = (−1)^m Y_l^{−m}.
//! - Burnett polynomials B_{(l,m,n)}(v) = N_{l,n} L_n^{(l+1/2)}(|v|²/2)
//!   |v|^l Y_l^m(v/|v|) are orthonormal against the Maxwellian:
//!   ∫ conj(B_{α̂}) B_{β̂} M dv = δ_{α̂β̂}.  The radial–angular product
//!   |v|^l Y_l^m(v/|v|) is evaluated as a solid-harmonic polynomial, so
//!   v = 0 needs no special casing.

use num_complex::Complex64;

use crate::index_space::{BurnettIndex, MultiIndex};
use crate::numeric::{factorial, gamma};
use crate::{Error, Result};

/// A velocity-space point (nondimensional components).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3 {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        v1: 0.0,
        v2: 0.0,
        v3: 0.0,
    };

    pub fn new(v1: f64, v2: f64, v3: f64) -> Self {
        Point3 { v1, v2, v3 }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Point3 {
            v1: v[0],
            v2: v[1],
            v3: v[2],
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v1, self.v2, self.v3]
    }

    /// Component along `axis` ∈ {0, 1, 2}.
    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.v1,
            1 => self.v2,
            _ => self.v3,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.v1 * self.v1 + self.v2 * self.v2 + self.v3 * self.v3
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// A direction on the unit sphere, θ ∈ [0, π] measured from the v₃ axis and
/// azimuth φ ∈ [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalDirection {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalDirection {
    pub fn new(theta: f64, phi: f64) -> Self {
        SphericalDirection { theta, phi }
    }

    /// The unit vector n = (sin θ cos φ, sin θ sin φ, cos θ).
    pub fn unit_vector(self) -> Point3 {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        Point3::new(st * cp, st * sp, ct)
    }
}

/// The normalized standard Maxwellian M(v) = (2π)^{−3/2} exp(−|v|²/2).
pub fn maxwellian(v: Point3) -> f64 {
    let norm = (2.0 * std::f64::consts::PI).powf(-1.5);
    norm * (-0.5 * v.norm_sq()).exp()
}

/// One-dimensional Maxwellian factor (2π)^{−1/2} exp(−x²/2), the weight that
/// appears in marginal distributions.
pub fn maxwellian_1d(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-0.5) * (-0.5 * x * x).exp()
}

/// Probabilists' Hermite polynomial He_n(x) by the three-term recurrence
/// He_{n+1}(x) = x·He_n(x) − n·He_{n−1}(x).
pub fn hermite_1d(n: usize, x: f64) -> f64 {
    let (mut prev, mut curr) = (0.0, 1.0);
    for k in 0..n {
        (prev, curr) = (curr, x * curr - k as f64 * prev);
    }
    curr
}

/// All values He_0(x) … He_{n_max}(x) in one recurrence sweep.
pub fn hermite_values(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(x);
    for k in 1..n_max {
        out.push(x * out[k] - k as f64 * out[k - 1]);
    }
    out
}

/// Tensor Hermite polynomial H^α(v) = He_{α₁}(v₁) He_{α₂}(v₂) He_{α₃}(v₃).
pub fn hermite_eval(alpha: MultiIndex, v: Point3) -> f64 {
    hermite_1d(alpha.component(0), v.v1)
        * hermite_1d(alpha.component(1), v.v2)
        * hermite_1d(alpha.component(2), v.v3)
}

/// Generalized Laguerre polynomial L_n^{(β)}(x) for β > −1, x ≥ 0, via
/// (n+1) L_{n+1} = (2n+1+β−x) L_n − (n+β) L_{n−1}.
pub fn laguerre_eval(n: usize, beta: f64, x: f64) -> f64 {
    let (mut prev, mut curr) = (0.0, 1.0);
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + beta - x) * curr - (kf + beta) * prev) / (kf + 1.0);
        (prev, curr) = (curr, next);
    }
    curr
}

/// Associated Legendre values P_l^m(x) for fixed m ≥ 0, all l in m..=l_max,
/// with the Condon–Shortley phase: P_m^m(x) = (−1)^m (2m−1)!! (1−x²)^{m/2}.
fn legendre_column(l_max: usize, m: usize, x: f64) -> Vec<f64> {
    debug_assert!(m <= l_max);
    let mut pmm = 1.0;
    if m > 0 {
        let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
        for k in 1..=m {
            pmm *= -((2 * k - 1) as f64) * s;
        }
    }
    let mut out = Vec::with_capacity(l_max - m + 1);
    out.push(pmm);
    if l_max == m {
        return out;
    }
    out.push(x * (2 * m + 1) as f64 * pmm);
    for l in (m + 2)..=l_max {
        let a = x * (2 * l - 1) as f64 * out[l - m - 1];
        let b = (l + m - 1) as f64 * out[l - m - 2];
        out.push((a - b) / (l - m) as f64);
    }
    out
}

/// Spherical harmonic Y_l^m(θ, φ) = √((2l+1)/(4π) · (l−m)!/(l+m)!)
/// P_l^m(cos θ) e^{imφ}, extended to m < 0 through
/// P_l^{−m} = (−1)^m (l−m)!/(l+m)! P_l^m.
///
/// Errors with a domain diagnostic when |m| > l.
pub fn spherical_harmonic(l: usize, m: i64, dir: SphericalDirection) -> Result<Complex64> {
    let m_abs = m.unsigned_abs() as usize;
    if m_abs > l {
        return Err(Error::Domain {
            name: "spherical harmonic order m",
            value: m as f64,
            requirement: "|m| ≤ l",
        });
    }
    let plm = *legendre_column(l, m_abs, dir.theta.cos())
        .last()
        .expect("column is nonempty");
    let ratio = factorial(l - m_abs) / factorial(l + m_abs);
    let norm = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * ratio).sqrt();
    let phase = Complex64::from_polar(1.0, m as f64 * dir.phi);
    let value = norm * plm * phase;
    // P_l^{−m} = (−1)^m (l−m)!/(l+m)! P_l^m folds into the normalization:
    // relative to the |m| evaluation only the sign (−1)^m and the conjugated
    // phase remain, and the phase is already handled by m in `phase`.
    if m < 0 && m_abs % 2 == 1 {
        Ok(-value)
    } else {
        Ok(value)
    }
}

/// Coupling constant √((l−m)(l+m) / ((2l−1)(2l+1))) from the spherical-
/// harmonic recurrence cos θ · Y_l^m = c_{l+1,m} Y_{l+1}^m + c_{l,m} Y_{l−1}^m.
fn costheta_coupling(l: usize, m: i64) -> f64 {
    let l = l as f64;
    let m = m as f64;
    (((l - m) * (l + m)) / ((2.0 * l - 1.0) * (2.0 * l + 1.0))).sqrt()
}

/// Solid harmonics R_l^m(v) := |v|^l Y_l^m(v/|v|) for 0 ≤ m ≤ l ≤ l_max,
/// evaluated as polynomials in v — finite at v = 0 by construction.
///
/// Recurrences (the Y recurrences multiplied through by |v|^l):
///   R₀⁰ = 1/√(4π)
///   R_l^l = −√((2l+1)/(2l)) (v₁ + i v₂) R_{l−1}^{l−1}
///   R_{l+1}^m = (v₃ R_l^m − c_{l,m} |v|² R_{l−1}^m) / c_{l+1,m}
/// Returned as `r[l][m]`; negative orders follow from
/// R_l^{−m} = (−1)^m conj(R_l^m).
fn solid_harmonics(l_max: usize, v: Point3) -> Vec<Vec<Complex64>> {
    let mut r: Vec<Vec<Complex64>> = Vec::with_capacity(l_max + 1);
    r.push(vec![Complex64::new(
        1.0 / (4.0 * std::f64::consts::PI).sqrt(),
        0.0,
    )]);
    if l_max == 0 {
        return r;
    }
    let xy = Complex64::new(v.v1, v.v2);
    let r2 = v.norm_sq();
    for l in 1..=l_max {
        let mut row = Vec::with_capacity(l + 1);
        for (m, &prev) in r[l - 1].iter().enumerate() {
            let lower = if l >= 2 && m <= l - 2 {
                costheta_coupling(l - 1, m as i64) * r2 * r[l - 2][m]
            } else {
                Complex64::ZERO
            };
            row.push((v.v3 * prev - lower) / costheta_coupling(l, m as i64));
        }
        let diag = -((2 * l + 1) as f64 / (2 * l) as f64).sqrt() * xy * r[l - 1][l - 1];
        row.push(diag);
        r.push(row);
    }
    r
}

/// Normalization constant N_{l,n} = √(2^{1−l} π^{3/2} n! / Γ(n + l + 3/2)).
fn burnett_normalization(l: usize, n: usize) -> f64 {
    let num = 2f64.powi(1 - l as i32) * std::f64::consts::PI.powf(1.5) * factorial(n);
    (num / gamma(n as f64 + l as f64 + 1.5)).sqrt()
}

/// Burnett polynomial B_{(l,m,n)}(v) = N_{l,n} L_n^{(l+1/2)}(|v|²/2) · |v|^l
/// Y_l^m(v/|v|), with the radial–angular product evaluated in solid-harmonic
/// polynomial form.
pub fn burnett_eval(idx: BurnettIndex, v: Point3) -> Complex64 {
    let (l, m, n) = (idx.l(), idx.m(), idx.n());
    let m_abs = m.unsigned_abs() as usize;
    let solid = solid_harmonics(l, v)[l][m_abs];
    let solid = if m < 0 {
        let c = solid.conj();
        if m_abs % 2 == 1 {
            -c
        } else {
            c
        }
    } else {
        solid
    };
    let radial = laguerre_eval(n, l as f64 + 0.5, 0.5 * v.norm_sq());
    burnett_normalization(l, n) * radial * solid
}
