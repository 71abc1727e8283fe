//! Hermite-Galerkin coefficients of the Landau collision operator.
//!
//! For the spatially homogeneous Landau (Fokker-Planck-Landau) equation with
//! an inverse-power-law interaction, the collision kernel is |g|^{γ+2} Π(g),
//! where g is the relative velocity, Π the projector orthogonal to g, and
//! γ ∈ (−5, 1] sweeps from hard interactions down to very soft ones (γ = −3
//! is the Coulomb case).  Expanding the distribution in probabilists' Hermite
//! functions H^α(v) M(v) turns the operator into a constant quadratic form:
//! df_α/dt = Σ_{λ,κ} A_α^{λ,κ} f_λ f_κ.  This module evaluates the tensor A
//! in closed form — every entry is a finite combination of Gamma-function
//! values, so no velocity grid or cutoff is involved and the singularity of
//! soft kernels at g = 0 is handled analytically.
//!
//! The evaluation chain, bottom to top:
//!
//! * [`coeff_a`] — separation coefficients of Hermite products under the
//!   pair change of variables (v, v*) ↦ (centre, relative velocity);
//! * [`coeff_eta`] — ladder couplings of spherical harmonics;
//! * [`coeff_k`] — radial cross integrals of generalized Laguerre
//!   polynomials against x^μ e^{−x};
//! * [`coeff_f`] — angular integrals ∫ n_s n_t Y Y dn over the unit sphere;
//! * [`coeff_g`] — the singular pair integrals
//!   G_st(γ; p, q) = ∫ |g|^γ g_s g_t H^p(g) H^q(g) M(g) dg, assembled from
//!   the previous three through the spherical Burnett expansion;
//! * [`coeff_b_gamma`] — their transverse-projector contraction;
//! * [`coeff_collision`] / [`build_tensor`] — assembled entries A_α^{λ,κ}
//!   and the precomputed sparse tensor with binary cache persistence.
//!
//! Two closed-form conventions are easy to get wrong, so both are pinned by
//! independent quadrature oracles in the test suite (see [`crate::validate`]):
//! the power of two in front of G (checked against direct radial-spherical
//! quadrature at several γ) and the power 2^{(γ+3−|α|)/2} in front of
//! A_α^{λ,κ} (checked against a six-dimensional quadrature oracle at γ = −1,
//! where a wrong exponent produces a non-unit multiplicative error).

use crate::hermite_burnett::ConversionTable;
use crate::index_space::{IndexSet, MultiIndex};
use crate::numeric::{binomial_real, factorial, gamma as gamma_fn};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::path::Path;

/// Parameters of the inverse-power-law collision kernel |g|^{γ+2} Π(g).
///
/// `gamma` is the velocity exponent (γ > −5 keeps the pair integrals
/// convergent; γ = −3 is the Coulomb case) and `lambda` the positive overall
/// collision strength multiplying the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    gamma: f64,
    lambda: f64,
}

impl KernelParams {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= -5.0 {
            return Err(Error::Domain {
                name: "kernel exponent gamma",
                value: gamma,
                requirement: "finite and > -5",
            });
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain {
                name: "collision strength lambda",
                value: lambda,
                requirement: "finite and > 0",
            });
        }
        Ok(KernelParams { gamma, lambda })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// One-dimensional separation coefficient of a Hermite product.
///
/// Writing a colliding pair of scalar velocities as v = h + g/2 and
/// v* = h − g/2, products of probabilists' Hermite polynomials separate in
/// the pair variables:
///
/// ```text
/// He_λ(v) He_κ(v*) = Σ_{p+q = λ+κ} a_{pq}^{λκ} He_p(√2 h) He_q(g/√2),
/// ```
///
/// and this function returns a_{pq}^{λκ}.  The coefficient vanishes unless
/// p + q = λ + κ; on that support it equals
///
/// ```text
/// 2^{-(p+q)/2} λ! κ! Σ_s (−1)^{q−λ+s} / ( s! (λ−s)! (p−s)! (q−λ+s)! )
/// ```
///
/// with s running over max(0, p−κ) ..= min(p, λ).  Three-dimensional
/// coefficients are products of this one over the axes.
pub fn coeff_a(p: usize, q: usize, lambda: usize, kappa: usize) -> f64 {
    if p + q != lambda + kappa {
        return 0.0;
    }
    let lo = p.saturating_sub(kappa);
    let hi = p.min(lambda);
    if lo > hi {
        return 0.0;
    }
    let mut sum = 0.0;
    for s in lo..=hi {
        // q − λ + s ≥ 0 on this range because p + q = λ + κ forces λ − q = p − κ ≤ lo.
        let d = q + s - lambda;
        let term = 1.0 / (factorial(s) * factorial(lambda - s) * factorial(p - s) * factorial(d));
        sum += if d % 2 == 0 { term } else { -term };
    }
    sum * factorial(lambda) * factorial(kappa) * SQRT_2.powi(-((p + q) as i32))
}

/// Ladder coupling η^μ_{l,m} between spherical harmonics of adjacent degree.
///
/// The couplings appear in cos θ Y_l^m = η^0_{l+1,m} Y_{l+1}^m + η^0_{l,m} Y_{l−1}^m
/// and in the analogous sin θ e^{±iφ} ladders for μ = ±1:
///
/// ```text
/// μ =  0:  η² = (l−m)(l+m)     / ( (2l−1)(2l+1) )
/// μ = +1:  η² = (l+m+1)(l+m)   / ( 2 (2l−1)(2l+1) )
/// μ = −1:  η² = (l−m)(l−m+1)   / ( 2 (2l−1)(2l+1) )
/// ```
///
/// `l` may be negative: the rational radicand is evaluated by direct
/// substitution, which is exactly what the downward couplings η^μ_{−l,m}
/// require.  A zero numerator yields 0 regardless of the denominator's sign;
/// a strictly negative radicand is a domain error.
pub fn coeff_eta(l: i64, m: i64, mu: i64) -> Result<f64> {
    let num = match mu {
        0 => (l - m) * (l + m),
        1 => (l + m + 1) * (l + m),
        -1 => (l - m) * (l - m + 1),
        _ => {
            return Err(Error::InvalidInput(format!(
                "ladder shift mu must be -1, 0 or 1, got {mu}"
            )))
        }
    };
    if num == 0 {
        return Ok(0.0);
    }
    let mut den = (2 * l - 1) * (2 * l + 1);
    if mu != 0 {
        den *= 2;
    }
    let radicand = num as f64 / den as f64;
    if radicand < 0.0 {
        return Err(Error::Domain {
            name: "ladder coupling radicand",
            value: radicand,
            requirement: ">= 0",
        });
    }
    Ok(radicand.sqrt())
}

/// Radial cross integral of two generalized Laguerre polynomials,
///
/// ```text
/// K(μ, a, c, m, n) = ∫_0^∞ x^μ L_m^{(a)}(x) L_n^{(c)}(x) e^{−x} dx
///                  = (−1)^{m+n} Γ(μ+1) Σ_{i=0}^{min(m,n)}
///                    C(μ−a, m−i) C(μ−c, n−i) C(i+μ, i),
/// ```
///
/// where C(x, k) is the generalized binomial coefficient (falling factorial
/// over k!).  Requires μ > −1 for integrability at the origin.
pub fn coeff_k(mu: f64, a: f64, c: f64, m: usize, n: usize) -> Result<f64> {
    if mu.is_nan() || mu <= -1.0 {
        return Err(Error::Domain {
            name: "radial cross-integral exponent mu",
            value: mu,
            requirement: "> -1 (integrability at the origin)",
        });
    }
    let mut sum = 0.0;
    for i in 0..=m.min(n) {
        sum += binomial_real(mu - a, m - i)
            * binomial_real(mu - c, n - i)
            * binomial_real(i as f64 + mu, i);
    }
    let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * gamma_fn(mu + 1.0) * sum)
}

/// η^0 at non-negative degree arguments never has a negative radicand:
/// the numerator (l−m)(l+m) is non-negative whenever |m| ≤ l and vanishes
/// otherwise before the denominator sign can matter.
fn eta_unwrap(l: i64, m: i64, mu: i64) -> f64 {
    coeff_eta(l, m, mu).expect("ladder radicands of valid harmonic couplings are non-negative")
}

/// Closed form of F_33 = ∫ n_3 n_3 Y_{l1}^{m1} Y_{l2}^{m2} dn.
///
/// Both cos θ factors are expanded through the η^0 ladder and the resulting
/// harmonics paired by ∫ Y_a^{m} Y_b^{m'} dn = (−1)^{m'} δ_{ab} δ_{m,−m'}.
fn f33(l1: usize, m1: i64, l2: usize, m2: i64) -> f64 {
    if m1 + m2 != 0 {
        return 0.0;
    }
    let (il1, il2) = (l1 as i64, l2 as i64);
    let up1 = eta_unwrap(il1 + 1, m1, 0);
    let dn1 = eta_unwrap(il1, m1, 0);
    let up2 = eta_unwrap(il2 + 1, m2, 0);
    let dn2 = eta_unwrap(il2, m2, 0);
    let mut total = 0.0;
    if l1 == l2 {
        total += up1 * up2 + dn1 * dn2;
    }
    if l2 == l1 + 2 {
        total += up1 * dn2;
    }
    if l1 == l2 + 2 {
        total += dn1 * up2;
    }
    if m2.rem_euclid(2) == 1 {
        -total
    } else {
        total
    }
}

/// Closed form of F_13 = ∫ n_1 n_3 Y_{l1}^{m1} Y_{l2}^{m2} dn.
///
/// n_1 = (sin θ e^{iφ} + sin θ e^{−iφ})/2 expands through the η^{±1}
/// ladders, n_3 through η^0, and the products are paired as in [`f33`].
fn f13(l1: usize, m1: i64, l2: usize, m2: i64) -> f64 {
    let (il1, il2) = (l1 as i64, l2 as i64);
    let mut total = 0.0;
    for mu in [1i64, -1] {
        if m1 + mu + m2 != 0 {
            continue;
        }
        let w = -(mu as f64) * FRAC_1_SQRT_2;
        let up1 = w * eta_unwrap(il1 + 1, m1, mu);
        let dn1 = -w * eta_unwrap(-il1, m1, mu);
        let up2 = eta_unwrap(il2 + 1, m2, 0);
        let dn2 = eta_unwrap(il2, m2, 0);
        if l1 == l2 {
            total += up1 * up2 + dn1 * dn2;
        }
        if l2 == l1 + 2 {
            total += up1 * dn2;
        }
        if l1 == l2 + 2 {
            total += dn1 * up2;
        }
    }
    if m2.rem_euclid(2) == 1 {
        -total
    } else {
        total
    }
}

/// Angular pair integral F_st(l1, m1, l2, m2) = ∫_{S²} n_s n_t Y_{l1}^{m1}(n) Y_{l2}^{m2}(n) dn
/// (no conjugation on either harmonic).
///
/// Only the axis pairs (s, t) = (3, 3) and (1, 3) are implemented in closed
/// form: every other component of the tensor ∫ n ⊗ n Y Y follows from axis
/// permutations at the level of the full pair integrals (see [`coeff_g`]),
/// so no other pair is ever evaluated directly.  Harmonic orders must
/// satisfy |m| ≤ l.  The value is real; the return type is complex because
/// the surrounding Burnett sums are complex.
pub fn coeff_f(s: usize, t: usize, l1: usize, m1: i64, l2: usize, m2: i64) -> Result<Complex64> {
    if m1.unsigned_abs() as usize > l1 {
        return Err(Error::Domain {
            name: "harmonic order m1",
            value: m1 as f64,
            requirement: "|m1| <= l1",
        });
    }
    if m2.unsigned_abs() as usize > l2 {
        return Err(Error::Domain {
            name: "harmonic order m2",
            value: m2 as f64,
            requirement: "|m2| <= l2",
        });
    }
    match (s, t) {
        (3, 3) => Ok(Complex64::new(f33(l1, m1, l2, m2), 0.0)),
        (1, 3) => Ok(Complex64::new(f13(l1, m1, l2, m2), 0.0)),
        _ => Err(Error::InvalidInput(format!(
            "closed-form angular integrals cover (s,t) in {{(3,3),(1,3)}}, got ({s},{t})"
        ))),
    }
}

/// Normalization pairing of two Burnett radial parts:
/// D = sqrt( n1! n2! / ( Γ(n1+l1+3/2) Γ(n2+l2+3/2) ) ).
fn d_factor(l1: usize, n1: usize, l2: usize, n2: usize) -> f64 {
    (factorial(n1) * factorial(n2)
        / (gamma_fn(n1 as f64 + l1 as f64 + 1.5) * gamma_fn(n2 as f64 + l2 as f64 + 1.5)))
    .sqrt()
}

const IDENTITY: [usize; 3] = [0, 1, 2];
const SWAP12: [usize; 3] = [1, 0, 2];
const SWAP13: [usize; 3] = [2, 1, 0];
const SWAP23: [usize; 3] = [0, 2, 1];

/// Reduce the axis pair (s, t) of G_st to one of the two implemented base
/// pairs by an axis transposition: returns (base, permutation) with base 0
/// meaning (3, 3) and base 1 meaning (1, 3).  G is symmetric under s ↔ t and
/// invariant under simultaneous permutation of its axes and both of its
/// multi-indices, which makes the six distinct pairs collapse onto two.
fn dispatch_axes(s: usize, t: usize) -> Result<(usize, [usize; 3])> {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    match (lo, hi) {
        (3, 3) => Ok((0, IDENTITY)),
        (1, 1) => Ok((0, SWAP13)),
        (2, 2) => Ok((0, SWAP23)),
        (1, 3) => Ok((1, IDENTITY)),
        (1, 2) => Ok((1, SWAP23)),
        (2, 3) => Ok((1, SWAP12)),
        _ => Err(Error::InvalidInput(format!(
            "velocity axes must lie in 1..=3, got ({s},{t})"
        ))),
    }
}

/// Per-axis parity of the integrand of G: the Gaussian and |g|^γ are even,
/// so the integral vanishes unless p + q + e_s + e_t is componentwise even.
/// `base` 0 adds e_3 + e_3 (even), base 1 adds e_1 + e_3.
fn g_parity_vanishes(base: usize, p: MultiIndex, q: MultiIndex) -> bool {
    let mask = p.parity_mask() ^ q.parity_mask();
    match base {
        0 => mask != 0,
        _ => mask != 0b101,
    }
}

/// Core Burnett-expansion sum for a base-pair G, with the radial integrals
/// supplied by `kprov(l1, l2, n1, n2)`.  The value of the integral is real;
/// the expansion is complex, so the imaginary part must cancel — its
/// residue is checked against 1e−10 relative to the accumulated term
/// magnitude (never assumed zero).
fn g_sum(
    gamma: f64,
    base: usize,
    p: MultiIndex,
    q: MultiIndex,
    conv: &ConversionTable,
    kprov: &dyn Fn(usize, usize, usize, usize) -> Result<f64>,
) -> Result<f64> {
    let row_p = conv.row(p)?;
    let row_q = conv.row(q)?;
    let labels_p = conv.labels(p.degree());
    let labels_q = conv.labels(q.degree());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for (ip, &cp) in row_p.iter().enumerate() {
        if cp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let bp = labels_p[ip];
        let (l1, m1, n1) = (bp.l(), bp.m(), bp.n());
        for (iq, &cq) in row_q.iter().enumerate() {
            if cq == Complex64::new(0.0, 0.0) {
                continue;
            }
            let bq = labels_q[iq];
            let (l2, m2, n2) = (bq.l(), bq.m(), bq.n());
            let f = if base == 0 {
                f33(l1, m1, l2, m2)
            } else {
                f13(l1, m1, l2, m2)
            };
            if f == 0.0 {
                continue;
            }
            let k = kprov(l1, l2, n1, n2)?;
            // The table stores C = ∫ B H M; the expansion coefficients of H
            // in the Burnett basis are the conjugates.
            let term = cp.conj() * cq.conj() * (d_factor(l1, n1, l2, n2) * k * f);
            acc += term;
            scale += term.norm();
        }
    }
    if acc.im.abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "pair integral over ({p}, {q}) kept an imaginary residue {:.3e} at term scale {:.3e}",
            acc.im, scale
        )));
    }
    Ok(2f64.powf(0.5 * (gamma + 2.0)) * acc.re)
}

/// Singular pair integral G_st(γ; p, q) = ∫ |g|^γ g_s g_t H^p(g) H^q(g) M(g) dg.
///
/// Evaluated in closed form by expanding both Hermite polynomials in the
/// spherical Burnett basis, which separates the integral into the radial
/// factors [`coeff_k`] and the angular factors [`coeff_f`]:
///
/// ```text
/// G_st = 2^{(γ+2)/2} Σ_{p̂, q̂}  c_{p̂}^p c_{q̂}^q D K( (γ+l1+l2+3)/2, l1+½, l2+½, n1, n2 )
///                               F_st(l1, m1, l2, m2),
/// ```
///
/// with p̂ = (l1, m1, n1), q̂ = (l2, m2, n2) running over the Burnett indices
/// of degrees |p| and |q|.  Axis pairs outside {(3,3), (1,3)} are reduced to
/// those two by permuting the axes of both multi-indices; integrand parity
/// short-circuits vanishing entries.  The conversion table must cover
/// degrees max(|p|, |q|).
pub fn coeff_g(
    params: &KernelParams,
    s: usize,
    t: usize,
    p: MultiIndex,
    q: MultiIndex,
    conv: &ConversionTable,
) -> Result<f64> {
    let (base, perm) = dispatch_axes(s, t)?;
    let (pp, qq) = (p.permuted(perm), q.permuted(perm));
    if g_parity_vanishes(base, pp, qq) {
        return Ok(0.0);
    }
    let gamma = params.gamma();
    let kprov = move |l1: usize, l2: usize, n1: usize, n2: usize| {
        coeff_k(
            0.5 * (gamma + (l1 + l2) as f64 + 3.0),
            l1 as f64 + 0.5,
            l2 as f64 + 0.5,
            n1,
            n2,
        )
    };
    g_sum(gamma, base, pp, qq, conv, &kprov)
}

/// Precomputed radial cross integrals on the (l1, n1, l2, n2) grid needed by
/// a [`GTable`] fill; K does not depend on the angular orders, so this cuts
/// the dominant cost of the fill.
struct KGrid {
    n1n: usize,
    l2n: usize,
    n2n: usize,
    data: Vec<f64>,
}

impl KGrid {
    fn build(gamma: f64, p_max: usize, q_max: usize) -> Result<KGrid> {
        let (l1n, n1n) = (p_max + 1, p_max / 2 + 1);
        let (l2n, n2n) = (q_max + 1, q_max / 2 + 1);
        let mut data = vec![0.0; l1n * n1n * l2n * n2n];
        for l1 in 0..l1n {
            for n1 in 0..n1n {
                if l1 + 2 * n1 > p_max {
                    continue;
                }
                for l2 in 0..l2n {
                    for n2 in 0..n2n {
                        if l2 + 2 * n2 > q_max {
                            continue;
                        }
                        let idx = ((l1 * n1n + n1) * l2n + l2) * n2n + n2;
                        data[idx] = coeff_k(
                            0.5 * (gamma + (l1 + l2) as f64 + 3.0),
                            l1 as f64 + 0.5,
                            l2 as f64 + 0.5,
                            n1,
                            n2,
                        )?;
                    }
                }
            }
        }
        Ok(KGrid {
            n1n,
            l2n,
            n2n,
            data,
        })
    }

    fn get(&self, l1: usize, l2: usize, n1: usize, n2: usize) -> Result<f64> {
        Ok(self.data[((l1 * self.n1n + n1) * self.l2n + l2) * self.n2n + n2])
    }
}

/// Dense precomputed table of the pair integrals G_st(γ; p, q).
///
/// Only the two base axis pairs (3, 3) and (1, 3) are stored; [`GTable::get`]
/// serves every other pair through axis permutation and the s ↔ t and p ↔ q
/// symmetries.  The first argument ranges over all degrees ≤ `p_max`, the
/// second over degrees ≤ `q_max` (the collision-tensor assembly pairs a
/// low-degree index with one of up to twice the truncation degree, hence the
/// asymmetric bounds).  Entries killed by integrand parity are stored as
/// exact zeros and never computed.
pub struct GTable {
    gamma: f64,
    p_max: usize,
    q_max: usize,
    nq: usize,
    base: [Vec<f64>; 2],
}

impl GTable {
    /// Fill the table for the given kernel.  The conversion table must cover
    /// degree max(`p_max`, `q_max`).  The fill is parallel and deterministic.
    pub fn build(
        params: &KernelParams,
        p_max: usize,
        q_max: usize,
        conv: &ConversionTable,
    ) -> Result<GTable> {
        let need = p_max.max(q_max);
        if conv.max_degree() < need {
            return Err(Error::Capacity(format!(
                "conversion table covers degree {} but the pair-integral table needs {need}",
                conv.max_degree()
            )));
        }
        let gamma = params.gamma();
        let kgrid = KGrid::build(gamma, p_max, q_max)?;
        let nq = IndexSet::size_for(q_max);
        let pset = IndexSet::new(p_max);
        let qset = IndexSet::new(q_max);
        let mut base: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (b, slot) in base.iter_mut().enumerate() {
            let rows: Result<Vec<Vec<f64>>> = pset
                .entries()
                .par_iter()
                .map(|&p| {
                    let mut row = vec![0.0; nq];
                    for &q in qset.entries() {
                        if g_parity_vanishes(b, p, q) {
                            continue;
                        }
                        row[q.graded_rank()] = g_sum(gamma, b, p, q, conv, &|l1, l2, n1, n2| {
                            kgrid.get(l1, l2, n1, n2)
                        })?;
                    }
                    Ok(row)
                })
                .collect();
            *slot = rows?.concat();
        }
        Ok(GTable {
            gamma,
            p_max,
            q_max,
            nq,
            base,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Degree bound of the first (smaller) argument.
    pub fn p_degree_limit(&self) -> usize {
        self.p_max
    }

    /// Degree bound of the second (larger) argument.
    pub fn q_degree_limit(&self) -> usize {
        self.q_max
    }

    /// Table lookup of G_st(γ; p, q) for any axis pair, using the same axis
    /// reduction as [`coeff_g`] plus the p ↔ q symmetry when only one
    /// ordering fits the table bounds.
    pub fn get(&self, s: usize, t: usize, p: MultiIndex, q: MultiIndex) -> Result<f64> {
        let (b, perm) = dispatch_axes(s, t)?;
        let (mut first, mut second) = (p.permuted(perm), q.permuted(perm));
        if first.degree() > self.p_max {
            std::mem::swap(&mut first, &mut second);
        }
        if first.degree() > self.p_max || second.degree() > self.q_max {
            return Err(Error::Capacity(format!(
                "pair integral at ({p}, {q}) exceeds table bounds (degrees <= {}, <= {})",
                self.p_max, self.q_max
            )));
        }
        Ok(self.base[b][first.graded_rank() * self.nq + second.graded_rank()])
    }
}

/// Transverse-projector contraction of the pair integrals,
/// B_p^q(γ; s, t) = −G_st(γ; p, q) + δ_st Σ_r G_rr(γ; p, q),
/// i.e. the projection of |g|^γ (δ_st |g|² − g_s g_t) against H^p H^q M.
/// Direct evaluation; the tensor assembly uses the tabulated variant.
pub fn coeff_b_gamma(
    params: &KernelParams,
    s: usize,
    t: usize,
    p: MultiIndex,
    q: MultiIndex,
    conv: &ConversionTable,
) -> Result<f64> {
    let mut val = -coeff_g(params, s, t, p, q, conv)?;
    if s == t {
        for r in 1..=3 {
            val += coeff_g(params, r, r, p, q, conv)?;
        }
    }
    Ok(val)
}

fn b_from_table(table: &GTable, s: usize, t: usize, p: MultiIndex, q: MultiIndex) -> Result<f64> {
    let mut val = -table.get(s, t, p, q)?;
    if s == t {
        for r in 1..=3 {
            val += table.get(r, r, p, q)?;
        }
    }
    Ok(val)
}

/// Memoized one-dimensional [`coeff_a`] values on the index ranges a tensor
/// assembly touches: p ≤ m0, q ≤ 2 m0 + 1, λ and κ ≤ m0 + 1 per axis.
struct ATable {
    nq: usize,
    nl: usize,
    nk: usize,
    data: Vec<f64>,
}

impl ATable {
    fn for_truncation(m0: usize) -> ATable {
        let np = m0 + 1;
        let nq = 2 * m0 + 2;
        let nl = m0 + 2;
        let nk = m0 + 2;
        let mut data = vec![0.0; np * nq * nl * nk];
        for p in 0..np {
            for q in 0..nq {
                for l in 0..nl {
                    for k in 0..nk {
                        data[((p * nq + q) * nl + l) * nk + k] = coeff_a(p, q, l, k);
                    }
                }
            }
        }
        ATable { nq, nl, nk, data }
    }

    #[inline]
    fn one(&self, p: usize, q: usize, l: usize, k: usize) -> f64 {
        self.data[((p * self.nq + q) * self.nl + l) * self.nk + k]
    }

    /// Componentwise product of one-dimensional coefficients — the
    /// three-dimensional a_{p,r}^{x,y}.
    #[inline]
    fn product(&self, p: MultiIndex, r: MultiIndex, x: MultiIndex, y: MultiIndex) -> f64 {
        let mut v = 1.0;
        for axis in 0..3 {
            v *= self.one(
                p.component(axis),
                r.component(axis),
                x.component(axis),
                y.component(axis),
            );
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }
}

/// Assembled collision-tensor entry with the G values taken from a table.
fn collision_entry(
    params: &KernelParams,
    alpha: MultiIndex,
    lambda: MultiIndex,
    kappa: MultiIndex,
    table: &GTable,
    amemo: &ATable,
) -> Result<f64> {
    // Componentwise parity: every surviving term requires α + λ + κ even in
    // each axis, inherited from the parity of the pair integrals.
    if alpha.parity_mask() ^ lambda.parity_mask() ^ kappa.parity_mask() != 0 {
        return Ok(0.0);
    }
    if alpha.degree() == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for s in 0..3 {
        if alpha.component(s) == 0 {
            continue;
        }
        let beta = alpha
            .checked_sub(MultiIndex::unit(s))
            .expect("axis was checked non-zero");
        for t in 0..3 {
            let kappa_t = kappa + MultiIndex::unit(t);
            let target = lambda + kappa_t;
            let b1 = beta.component(0).min(target.component(0));
            let b2 = beta.component(1).min(target.component(1));
            let b3 = beta.component(2).min(target.component(2));
            for p1 in 0..=b1 {
                for p2 in 0..=b2 {
                    for p3 in 0..=b3 {
                        let p = MultiIndex::new(p1, p2, p3);
                        let q = beta.checked_sub(p).expect("p <= beta by construction");
                        let r = target.checked_sub(p).expect("p <= target by construction");
                        let da = amemo.product(p, r, kappa_t, lambda)
                            - amemo.product(p, r, lambda, kappa_t);
                        if da == 0.0 {
                            continue;
                        }
                        let b = b_from_table(table, s + 1, t + 1, q, r)?;
                        if b == 0.0 {
                            continue;
                        }
                        total += da * b / q.factorial();
                    }
                }
            }
        }
    }
    Ok(2f64.powf(0.5 * (params.gamma() + 3.0 - alpha.degree() as f64)) * params.lambda() * total)
}

/// Collision-tensor entry A_α^{λ,κ} of the Hermite-Galerkin Landau operator:
///
/// ```text
/// A_α^{λκ} = 2^{(γ+3−|α|)/2} Λ Σ_{s: α_s>0} Σ_{t=1..3} Σ_{p ≤ min(α−e_s, λ+κ+e_t)}
///            (1/q!) [ a_{p,r}^{κ+e_t,λ} − a_{p,r}^{λ,κ+e_t} ] B_r^q(γ; s, t),
/// ```
///
/// with q = α − e_s − p and r = λ + κ + e_t − p (all componentwise), the
/// three-dimensional a products of [`coeff_a`], and B from [`coeff_b_gamma`].
/// Entries with α + λ + κ odd in any component vanish identically, as do all
/// entries with α = 0 (mass conservation is structural).  The supplied
/// [`GTable`] must cover first degrees |α| − 1 and second degrees
/// |λ| + |κ| + 1.
///
/// Two details are easy to derive with the wrong twist and are therefore
/// pinned against the six-dimensional quadrature counterpart
/// ([`crate::validate::oracle_collision_entry`]) at γ = 0 and γ = −1, where
/// the second exponent breaks the tie that γ = 0 cannot: the prefactor
/// exponent is (γ + 3 − |α|)/2 — not (γ/2 + 3 − |α|)/2, which double-counts
/// the 2^{γ/2} already absorbed by the |g| = √2 u radial substitution — and
/// the separation difference orders its superscripts exactly as written
/// above, (κ+e_t, λ) first.
pub fn coeff_collision(
    params: &KernelParams,
    alpha: MultiIndex,
    lambda: MultiIndex,
    kappa: MultiIndex,
    table: &GTable,
) -> Result<f64> {
    let m_like = alpha
        .degree()
        .max(lambda.degree())
        .max(kappa.degree())
        .max(2);
    let amemo = ATable::for_truncation(m_like);
    collision_entry(params, alpha, lambda, kappa, table, &amemo)
}

/// Entries with magnitude below this threshold are dropped from the sparse
/// tensor; they sit at the level of accumulated roundoff of the closed-form
/// evaluation and far below any physically meaningful coupling.
pub const DROP_THRESHOLD: f64 = 1e-14;

const CACHE_MAGIC: [u8; 4] = *b"FPLC";
const CACHE_VERSION: u32 = 1;
/// Index-ordering tag stored in the cache header: 1 = graded lexicographic.
const ORDERING_GRADED_LEX: u32 = 1;

/// Sparse precomputed collision tensor over the graded index set I_{M0}.
///
/// Rows are indexed by the graded rank of α; each row holds the ordered
/// pairs (rank λ, rank κ) with their values, sorted lexicographically.  The
/// quadratic collision model contracts a row against f_λ f_κ.
pub struct CollisionTensor {
    params: KernelParams,
    m0: usize,
    offsets: Vec<usize>,
    pairs: Vec<(u32, u32)>,
    values: Vec<f64>,
}

impl std::fmt::Debug for CollisionTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CollisionTensor")
            .field("gamma", &self.params.gamma())
            .field("lambda", &self.params.lambda())
            .field("m0", &self.m0)
            .field("entries", &self.values.len())
            .finish()
    }
}

impl CollisionTensor {
    /// Kernel parameters the tensor was built for.
    pub fn params(&self) -> KernelParams {
        self.params
    }

    /// Truncation degree M0 of the index set.
    pub fn m0(&self) -> usize {
        self.m0
    }

    /// Number of stored (α, λ, κ) entries.
    pub fn entry_count(&self) -> usize {
        self.values.len()
    }

    /// Number of rows, i.e. the size of I_{M0}.
    pub fn row_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// The (λ, κ) rank pairs and values of row α (by graded rank).
    pub fn row(&self, alpha_rank: usize) -> (&[(u32, u32)], &[f64]) {
        let lo = self.offsets[alpha_rank];
        let hi = self.offsets[alpha_rank + 1];
        (&self.pairs[lo..hi], &self.values[lo..hi])
    }

    /// Single entry lookup by graded ranks; absent entries are zero.
    pub fn value(&self, alpha_rank: usize, lambda_rank: usize, kappa_rank: usize) -> f64 {
        let (pairs, values) = self.row(alpha_rank);
        match pairs.binary_search(&(lambda_rank as u32, kappa_rank as u32)) {
            Ok(i) => values[i],
            Err(_) => 0.0,
        }
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Assemble a tensor from raw parts, validating the sparse layout:
    /// offsets must start at 0, increase monotonically to the data length,
    /// cover exactly |I_{M0}| rows, and every row's pairs must be strictly
    /// increasing with ranks inside I_{M0}.  Public so that tests can inject
    /// perturbed tensors and so the cache loader shares one validated path.
    pub fn from_parts(
        params: KernelParams,
        m0: usize,
        offsets: Vec<usize>,
        pairs: Vec<(u32, u32)>,
        values: Vec<f64>,
    ) -> Result<CollisionTensor> {
        if m0 < 2 {
            return Err(Error::InvalidInput(format!(
                "collision tensor truncation degree must be at least 2, got {m0}"
            )));
        }
        let n = IndexSet::size_for(m0);
        if offsets.len() != n + 1 || offsets.first() != Some(&0) {
            return Err(Error::InvalidInput(format!(
                "offset table must have {} entries starting at 0",
                n + 1
            )));
        }
        if pairs.len() != values.len() || *offsets.last().expect("non-empty") != values.len() {
            return Err(Error::InvalidInput(
                "offset table does not cover the entry arrays".into(),
            ));
        }
        for w in offsets.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidInput("offsets must be monotone".into()));
            }
        }
        for row in 0..n {
            let slice = &pairs[offsets[row]..offsets[row + 1]];
            for w in slice.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::InvalidInput(format!(
                        "row {row} pairs are not strictly increasing"
                    )));
                }
            }
            if let Some(&(l, k)) = slice.last() {
                if l as usize >= n || k as usize >= n {
                    return Err(Error::InvalidInput(format!(
                        "row {row} references ranks outside the index set"
                    )));
                }
            }
        }
        Ok(CollisionTensor {
            params,
            m0,
            offsets,
            pairs,
            values,
        })
    }
}

/// One assembled tensor row: the surviving (λ, κ) rank pairs and their values.
type SparseRow = (Vec<(u32, u32)>, Vec<f64>);

/// Precompute the full collision tensor over I_{M0}.
///
/// Builds the pair-integral table (first degrees ≤ M0 − 1, second degrees
/// ≤ 2 M0 + 1) and assembles every entry A_α^{λ,κ} with α, λ, κ ∈ I_{M0},
/// dropping magnitudes below [`DROP_THRESHOLD`].  The assembly is parallel
/// over α but deterministic: two builds of the same parameters produce
/// bitwise-identical tensors.  Requires M0 ≥ 2 and a conversion table
/// covering degree 2 M0 + 1.
pub fn build_tensor(
    params: &KernelParams,
    m0: usize,
    conv: &ConversionTable,
) -> Result<CollisionTensor> {
    if m0 < 2 {
        return Err(Error::InvalidInput(format!(
            "collision tensor truncation degree must be at least 2, got {m0}"
        )));
    }
    let need = 2 * m0 + 1;
    if conv.max_degree() < need {
        return Err(Error::Capacity(format!(
            "conversion table covers degree {} but truncation {m0} needs {need}",
            conv.max_degree()
        )));
    }
    let table = GTable::build(params, m0 - 1, need, conv)?;
    let amemo = ATable::for_truncation(m0);
    let set = IndexSet::new(m0);
    let rows: Result<Vec<SparseRow>> = set
        .entries()
        .par_iter()
        .map(|&alpha| {
            let mut row_pairs = Vec::new();
            let mut row_values = Vec::new();
            let apar = alpha.parity_mask();
            for &lam in set.entries() {
                let lpar = apar ^ lam.parity_mask();
                for &kap in set.entries() {
                    if lpar ^ kap.parity_mask() != 0 {
                        continue;
                    }
                    let v = collision_entry(params, alpha, lam, kap, &table, &amemo)?;
                    if v.abs() >= DROP_THRESHOLD {
                        row_pairs.push((lam.graded_rank() as u32, kap.graded_rank() as u32));
                        row_values.push(v);
                    }
                }
            }
            Ok((row_pairs, row_values))
        })
        .collect();
    let rows = rows?;
    let total = rows.iter().map(|r| r.1.len()).sum();
    let mut offsets = Vec::with_capacity(set.entries().len() + 1);
    let mut pairs = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total);
    offsets.push(0);
    for (rp, rv) in rows {
        pairs.extend_from_slice(&rp);
        values.extend_from_slice(&rv);
        offsets.push(pairs.len());
    }
    Ok(CollisionTensor {
        params: *params,
        m0,
        offsets,
        pairs,
        values,
    })
}

/// Expected header fields when loading a cached tensor; a disagreement in
/// any field is a compatibility error naming the field.
#[derive(Debug, Clone, Copy)]
pub struct CacheExpectation {
    pub gamma: f64,
    pub lambda: f64,
    pub m0: usize,
}

const CRC64: crc::Crc<u64> = crc::Crc::<u64>::new(&crc::CRC_64_XZ);
const CACHE_HEADER_LEN: usize = 40;
const CACHE_ENTRY_LEN: usize = 20;

/// Serialize a tensor to the binary cache format.
///
/// Little-endian layout: magic "FPLC", format version (u32), γ (f64),
/// Λ (f64), M0 (u32), index-ordering tag (u32, 1 = graded lexicographic),
/// entry count (u64), then one (rank α: u32, rank λ: u32, rank κ: u32,
/// value: f64) record per entry in storage order, and finally the CRC-64/XZ
/// checksum (u64) of all preceding bytes.  Round-trips bitwise.
pub fn save_tensor(tensor: &CollisionTensor, dest: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(CACHE_HEADER_LEN + CACHE_ENTRY_LEN * tensor.entry_count() + 8);
    buf.extend_from_slice(&CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&tensor.params.gamma().to_le_bytes());
    buf.extend_from_slice(&tensor.params.lambda().to_le_bytes());
    buf.extend_from_slice(&(tensor.m0 as u32).to_le_bytes());
    buf.extend_from_slice(&ORDERING_GRADED_LEX.to_le_bytes());
    buf.extend_from_slice(&(tensor.entry_count() as u64).to_le_bytes());
    for alpha_rank in 0..tensor.row_count() {
        let (pairs, values) = tensor.row(alpha_rank);
        for (&(l, k), &v) in pairs.iter().zip(values) {
            buf.extend_from_slice(&(alpha_rank as u32).to_le_bytes());
            buf.extend_from_slice(&l.to_le_bytes());
            buf.extend_from_slice(&k.to_le_bytes());
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = CRC64.checksum(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    std::fs::write(dest, &buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out: [u8; N] = self.bytes[self.at..self.at + N]
            .try_into()
            .expect("length checked by caller");
        self.at += N;
        out
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take::<4>())
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take::<8>())
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take::<8>())
    }
}

/// Load a tensor from the binary cache format written by [`save_tensor`].
///
/// Validates magic, version, checksum and structural integrity, returning a
/// format error on any disagreement; if `expected` is given, the header's
/// γ, Λ and M0 must match it exactly (the values compare bit-for-bit, which
/// is the right notion for parameters that originate from identical decimal
/// parses), otherwise a compatibility error names the offending field.
pub fn load_tensor(source: &Path, expected: Option<&CacheExpectation>) -> Result<CollisionTensor> {
    let raw = std::fs::read(source)?;
    if raw.len() < CACHE_HEADER_LEN + 8 {
        return Err(Error::Format(
            "coefficient cache is shorter than its fixed header".into(),
        ));
    }
    let (body, tail) = raw.split_at(raw.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("split at 8"));
    if CRC64.checksum(body) != stored {
        return Err(Error::Format(
            "coefficient cache checksum mismatch (corrupt or truncated file)".into(),
        ));
    }
    let mut cur = Cursor { bytes: body, at: 0 };
    if cur.take::<4>() != CACHE_MAGIC {
        return Err(Error::Format("not a coefficient cache (bad magic)".into()));
    }
    let version = cur.u32();
    if version != CACHE_VERSION {
        return Err(Error::Format(format!(
            "unsupported coefficient cache version {version} (expected {CACHE_VERSION})"
        )));
    }
    let gamma = cur.f64();
    let lambda = cur.f64();
    let m0 = cur.u32() as usize;
    let ordering = cur.u32();
    if ordering != ORDERING_GRADED_LEX {
        return Err(Error::Format(format!(
            "unsupported index ordering tag {ordering}"
        )));
    }
    let count = cur.u64() as usize;
    if body.len() != CACHE_HEADER_LEN + count * CACHE_ENTRY_LEN {
        return Err(Error::Format(format!(
            "coefficient cache length does not match its entry count {count}"
        )));
    }
    if let Some(exp) = expected {
        if exp.gamma.to_bits() != gamma.to_bits() {
            return Err(Error::Mismatch {
                field: "gamma",
                expected: format!("{}", exp.gamma),
                found: format!("{gamma}"),
            });
        }
        if exp.lambda.to_bits() != lambda.to_bits() {
            return Err(Error::Mismatch {
                field: "lambda",
                expected: format!("{}", exp.lambda),
                found: format!("{lambda}"),
            });
        }
        if exp.m0 != m0 {
            return Err(Error::Mismatch {
                field: "m0",
                expected: format!("{}", exp.m0),
                found: format!("{m0}"),
            });
        }
    }
    let params = KernelParams::new(gamma, lambda)
        .map_err(|e| Error::Format(format!("cache header: {e}")))?;
    if m0 < 2 {
        return Err(Error::Format(format!(
            "cache header truncation degree {m0} is below the minimum of 2"
        )));
    }
    let n = IndexSet::size_for(m0);
    let mut offsets = vec![0usize; n + 1];
    let mut pairs = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    let mut prev_alpha = 0u32;
    for _ in 0..count {
        let a = cur.u32();
        let l = cur.u32();
        let k = cur.u32();
        let v = cur.f64();
        if a < prev_alpha || a as usize >= n {
            return Err(Error::Format(
                "coefficient cache rows are out of order or out of range".into(),
            ));
        }
        prev_alpha = a;
        pairs.push((l, k));
        values.push(v);
        offsets[a as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    CollisionTensor::from_parts(params, m0, offsets, pairs, values)
        .map_err(|e| Error::Format(format!("coefficient cache structure: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_functions::{hermite_1d, spherical_harmonic};
    use crate::hermite_burnett::build_conversion;
    use crate::quadrature::{power_weighted_integral, radial_singular_integral, sphere_rule};
    use approx::assert_abs_diff_eq;
    use std::sync::LazyLock;

    static CONV: LazyLock<ConversionTable> =
        LazyLock::new(|| build_conversion(8).expect("conversion table"));

    fn params(gamma: f64) -> KernelParams {
        KernelParams::new(gamma, 1.0).expect("valid test parameters")
    }

    #[test]
    fn kernel_params_are_validated() {
        assert!(KernelParams::new(-5.0, 1.0).is_err());
        assert!(KernelParams::new(f64::NAN, 1.0).is_err());
        assert!(KernelParams::new(0.0, 0.0).is_err());
        assert!(KernelParams::new(0.0, -1.0).is_err());
        assert!(KernelParams::new(-4.9, 2.0).is_ok());
    }

    #[test]
    fn separation_coefficients_match_known_values() {
        let s = FRAC_1_SQRT_2;
        assert_abs_diff_eq!(coeff_a(0, 0, 0, 0), 1.0);
        assert_abs_diff_eq!(coeff_a(1, 0, 1, 0), s);
        assert_abs_diff_eq!(coeff_a(0, 1, 1, 0), s);
        assert_abs_diff_eq!(coeff_a(1, 0, 0, 1), s);
        assert_abs_diff_eq!(coeff_a(0, 1, 0, 1), -s);
        assert_abs_diff_eq!(coeff_a(2, 0, 1, 1), 0.5);
        assert_abs_diff_eq!(coeff_a(0, 2, 1, 1), -0.5);
        assert_abs_diff_eq!(coeff_a(1, 1, 1, 1), 0.0);
        // Degree bookkeeping: off-support coefficients vanish.
        assert_eq!(coeff_a(1, 0, 0, 0), 0.0);
        assert_eq!(coeff_a(2, 1, 1, 0), 0.0);
    }

    #[test]
    fn separation_coefficients_collapse_for_kappa_zero() {
        // For κ = 0 a single term survives: a_{pq}^{λ0} = 2^{−λ/2} λ!/(p! q!).
        for lam in 0..=6usize {
            for p in 0..=lam {
                let q = lam - p;
                let expect =
                    SQRT_2.powi(-(lam as i32)) * factorial(lam) / (factorial(p) * factorial(q));
                assert_abs_diff_eq!(coeff_a(p, q, lam, 0), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn separation_coefficients_reproduce_pair_products() {
        // Evaluate both sides of the separation identity at scalar sample
        // points: He_λ(v) He_κ(v*) = Σ a_{pq}^{λκ} He_p(√2 h) He_q(g/√2).
        let points = [(0.7, -1.3), (1.9, 0.4), (-0.6, -0.2), (2.2, 1.7)];
        for lam in 0..=4usize {
            for kap in 0..=4usize {
                for &(v, vstar) in &points {
                    let h = 0.5 * (v + vstar);
                    let g = v - vstar;
                    let lhs = hermite_1d(lam, v) * hermite_1d(kap, vstar);
                    let mut rhs = 0.0;
                    for p in 0..=(lam + kap) {
                        let q = lam + kap - p;
                        rhs += coeff_a(p, q, lam, kap)
                            * hermite_1d(p, SQRT_2 * h)
                            * hermite_1d(q, g * FRAC_1_SQRT_2);
                    }
                    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * (1.0 + lhs.abs()));
                }
            }
        }
    }

    #[test]
    fn ladder_couplings_match_known_values() {
        assert_abs_diff_eq!(coeff_eta(1, 0, 0).unwrap(), 1.0 / 3f64.sqrt());
        assert_abs_diff_eq!(coeff_eta(1, 1, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(coeff_eta(1, 0, 1).unwrap(), 1.0 / 3f64.sqrt());
        assert_abs_diff_eq!(coeff_eta(2, 0, 0).unwrap(), (4.0f64 / 15.0).sqrt());
        // Direct substitution at negated degree equals the closed forms the
        // downward ladder needs.
        for l in 1..=5i64 {
            for m in -l..=l {
                assert_abs_diff_eq!(
                    coeff_eta(-l, m, 0).unwrap(),
                    coeff_eta(l, m, 0).unwrap(),
                    epsilon = 1e-15
                );
                let direct = coeff_eta(-l, m, 1).unwrap();
                let expect = (((l - m) * (l - m - 1)) as f64
                    / (2 * (2 * l - 1) * (2 * l + 1)) as f64)
                    .max(0.0)
                    .sqrt();
                assert_abs_diff_eq!(direct, expect, epsilon = 1e-15);
            }
        }
        // Radicand sign: reachable only off the harmonic triangle.
        assert!(matches!(coeff_eta(0, 1, 1), Err(Error::Domain { .. })));
        assert!(coeff_eta(1, 0, 2).is_err());
    }

    #[test]
    fn radial_cross_integrals_match_quadrature() {
        // Closed form against direct ∫ x^μ L_m^{(a)} L_n^{(c)} e^{−x} dx.
        for &mu in &[0.5, 1.0, 2.5, 3.5] {
            for &a in &[0.5, 1.5] {
                for &c in &[0.5, 2.5] {
                    for m in 0..=3usize {
                        for n in 0..=3usize {
                            let closed = coeff_k(mu, a, c, m, n).unwrap();
                            let quad = power_weighted_integral(mu, |x| {
                                crate::basis_functions::laguerre_eval(m, a, x)
                                    * crate::basis_functions::laguerre_eval(n, c, x)
                            });
                            assert_abs_diff_eq!(
                                closed,
                                quad,
                                epsilon = 1e-9 * (1.0 + closed.abs())
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn radial_cross_integral_known_values() {
        assert_abs_diff_eq!(coeff_k(1.0, 0.5, 0.5, 1, 0).unwrap(), -0.5, epsilon = 1e-14);
        for &mu in &[0.2, 1.0, 4.5] {
            assert_abs_diff_eq!(
                coeff_k(mu, 0.7, 1.9, 0, 0).unwrap(),
                gamma_fn(mu + 1.0),
                epsilon = 1e-12 * gamma_fn(mu + 1.0)
            );
        }
        assert!(coeff_k(-1.0, 0.5, 0.5, 0, 0).is_err());
        assert!(coeff_k(-1.5, 0.5, 0.5, 2, 2).is_err());
    }

    #[test]
    fn angular_integrals_match_known_values() {
        let f = |s, t, l1, m1, l2, m2| coeff_f(s, t, l1, m1, l2, m2).unwrap().re;
        assert_abs_diff_eq!(f(3, 3, 0, 0, 0, 0), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f(3, 3, 1, 0, 1, 0), 3.0 / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f(1, 3, 0, 0, 0, 0), 0.0);
        assert_abs_diff_eq!(f(1, 3, 1, 0, 1, 1), -1.0 / (5.0 * SQRT_2), epsilon = 1e-15);
        assert!(coeff_f(2, 3, 0, 0, 0, 0).is_err());
        assert!(coeff_f(3, 3, 1, 2, 0, 0).is_err());
    }

    #[test]
    fn angular_integrals_match_sphere_quadrature() {
        let rule = sphere_rule(10);
        for &(s, t) in &[(3usize, 3usize), (1, 3)] {
            for l1 in 0..=3usize {
                for m1 in -(l1 as i64)..=(l1 as i64) {
                    for l2 in 0..=3usize {
                        for m2 in -(l2 as i64)..=(l2 as i64) {
                            let closed = coeff_f(s, t, l1, m1, l2, m2).unwrap();
                            let quad: Complex64 = rule
                                .nodes
                                .iter()
                                .map(|node| {
                                    let ns = node.unit.component(s - 1);
                                    let nt = node.unit.component(t - 1);
                                    spherical_harmonic(l1, m1, node.direction).unwrap()
                                        * spherical_harmonic(l2, m2, node.direction).unwrap()
                                        * (ns * nt * node.weight)
                                })
                                .sum();
                            assert_abs_diff_eq!(closed.re, quad.re, epsilon = 1e-10);
                            assert_abs_diff_eq!(closed.im, 0.0, epsilon = 1e-15);
                            assert_abs_diff_eq!(quad.im, 0.0, epsilon = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pair_integrals_match_gaussian_anchors() {
        // γ = 0 reduces G to pure Gaussian moments.
        let pr = params(0.0);
        let zero = MultiIndex::ZERO;
        for s in 1..=3usize {
            for t in 1..=3usize {
                let expect = if s == t { 1.0 } else { 0.0 };
                let g = coeff_g(&pr, s, t, zero, zero, &CONV).unwrap();
                assert_abs_diff_eq!(g, expect, epsilon = 1e-12);
            }
        }
        let e1 = MultiIndex::unit(0);
        let e3 = MultiIndex::unit(2);
        assert_abs_diff_eq!(
            coeff_g(&pr, 3, 3, e3, e3, &CONV).unwrap(),
            3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            coeff_g(&pr, 3, 3, e1, e1, &CONV).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            coeff_g(&pr, 1, 3, e1, e3, &CONV).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // ∫ |g|^{−2} g_3² M dg = 1/3.
        assert_abs_diff_eq!(
            coeff_g(&params(-2.0), 3, 3, zero, zero, &CONV).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pair_integral_matches_radial_quadrature_at_soft_exponent() {
        // G_33(γ; 0, 0) = (2π)^{−3/2} (4π/3) ∫ r^{γ+2+2} e^{−r²/2} dr.
        for &gamma in &[-1.0, -3.0, -4.5] {
            let radial = radial_singular_integral(gamma, 2, |_| 1.0).unwrap();
            let expect =
                radial * 4.0 * std::f64::consts::PI / 3.0 / (2.0 * std::f64::consts::PI).powf(1.5);
            let g = coeff_g(
                &params(gamma),
                3,
                3,
                MultiIndex::ZERO,
                MultiIndex::ZERO,
                &CONV,
            )
            .unwrap();
            assert_abs_diff_eq!(g, expect, epsilon = 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn pair_integrals_vanish_by_parity() {
        let pr = params(-1.0);
        let e1 = MultiIndex::unit(0);
        let e3 = MultiIndex::unit(2);
        assert_eq!(
            coeff_g(&pr, 3, 3, e1, MultiIndex::ZERO, &CONV).unwrap(),
            0.0
        );
        assert_eq!(coeff_g(&pr, 1, 3, e3, e3, &CONV).unwrap(), 0.0);
    }

    #[test]
    fn pair_integrals_are_symmetric_in_their_indices() {
        let pr = params(-2.5);
        let cases = [
            (MultiIndex::new(2, 0, 0), MultiIndex::new(0, 0, 2)),
            (MultiIndex::new(1, 1, 0), MultiIndex::new(1, 1, 2)),
            (MultiIndex::new(0, 1, 1), MultiIndex::new(2, 1, 1)),
        ];
        for &(p, q) in &cases {
            for &(s, t) in &[(3, 3), (1, 3), (2, 2), (1, 2)] {
                let a = coeff_g(&pr, s, t, p, q, &CONV).unwrap();
                let b = coeff_g(&pr, s, t, q, p, &CONV).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-11 * (1.0 + a.abs()));
                let c = coeff_g(&pr, t, s, p, q, &CONV).unwrap();
                assert_eq!(a.to_bits(), c.to_bits());
            }
        }
    }

    #[test]
    fn permutation_dispatch_is_coherent() {
        // Permuting axes and indices together must be a no-op, exactly.
        let pr = params(-1.0);
        let p = MultiIndex::new(1, 0, 1);
        let q = MultiIndex::new(1, 2, 1);
        let direct = coeff_g(&pr, 2, 2, p, q, &CONV).unwrap();
        let via_swap = coeff_g(&pr, 3, 3, p.permuted(SWAP23), q.permuted(SWAP23), &CONV).unwrap();
        assert_eq!(direct.to_bits(), via_swap.to_bits());
        let direct13 = coeff_g(&pr, 2, 3, p, q, &CONV).unwrap();
        let via_swap13 = coeff_g(&pr, 1, 3, p.permuted(SWAP12), q.permuted(SWAP12), &CONV).unwrap();
        assert_eq!(direct13.to_bits(), via_swap13.to_bits());
    }

    #[test]
    fn pair_integral_table_agrees_with_direct_evaluation() {
        let pr = params(-3.0);
        let table = GTable::build(&pr, 2, 4, &CONV).unwrap();
        let pset = IndexSet::new(2);
        let qset = IndexSet::new(4);
        for &p in pset.entries() {
            for &q in qset.entries() {
                for &(s, t) in &[(3, 3), (1, 3), (2, 2), (1, 2), (2, 3), (1, 1)] {
                    let direct = coeff_g(&pr, s, t, p, q, &CONV).unwrap();
                    let tabled = table.get(s, t, p, q).unwrap();
                    assert_eq!(direct.to_bits(), tabled.to_bits());
                }
            }
        }
        // Oversized first argument falls back to the p ↔ q symmetry...
        let big = MultiIndex::new(2, 1, 1);
        let small = MultiIndex::new(1, 1, 0);
        assert_eq!(
            table.get(3, 3, big, small).unwrap().to_bits(),
            table.get(3, 3, small, big).unwrap().to_bits()
        );
        // ...and both arguments oversized is a capacity error.
        assert!(matches!(table.get(3, 3, big, big), Err(Error::Capacity(_))));
        assert!(table.get(4, 3, small, small).is_err());
    }

    #[test]
    fn projector_contraction_has_known_value() {
        // B_0^0(0; s, t) = −G_st + δ_st ΣG_rr = −δ_st + 3 δ_st ... = 2 δ_st at γ = 0.
        let pr = params(0.0);
        let zero = MultiIndex::ZERO;
        assert_abs_diff_eq!(
            coeff_b_gamma(&pr, 3, 3, zero, zero, &CONV).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            coeff_b_gamma(&pr, 1, 3, zero, zero, &CONV).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let table = GTable::build(&pr, 1, 2, &CONV).unwrap();
        assert_abs_diff_eq!(
            b_from_table(&table, 2, 2, zero, zero).unwrap(),
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn collision_entries_vanish_on_maxwellian_pair() {
        // A_α^{0,0} = 0: the Maxwellian is a fixed point, and the
        // cancellation is analytic, so the closed form must produce zeros at
        // roundoff level.
        let pr = params(-2.5);
        let table = GTable::build(&pr, 3, 7, &CONV).unwrap();
        let set = IndexSet::new(4);
        for &alpha in set.entries() {
            let a =
                coeff_collision(&pr, alpha, MultiIndex::ZERO, MultiIndex::ZERO, &table).unwrap();
            assert_abs_diff_eq!(a, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn collision_entries_conserve_invariants() {
        let pr = params(-1.0);
        let table = GTable::build(&pr, 3, 7, &CONV).unwrap();
        let set = IndexSet::new(3);
        for &lam in set.entries() {
            for &kap in set.entries() {
                // Mass: the α = 0 row is structurally empty.
                let a0 = coeff_collision(&pr, MultiIndex::ZERO, lam, kap, &table).unwrap();
                assert_eq!(a0, 0.0);
                // Momentum: symmetrized first-order rows vanish.
                for axis in 0..3 {
                    let e = MultiIndex::unit(axis);
                    let fwd = coeff_collision(&pr, e, lam, kap, &table).unwrap();
                    let bwd = coeff_collision(&pr, e, kap, lam, &table).unwrap();
                    assert_abs_diff_eq!(fwd + bwd, 0.0, epsilon = 1e-12);
                }
                // Energy: the symmetrized trace of second-order rows vanishes.
                let mut trace = 0.0;
                for axis in 0..3 {
                    let e2 = MultiIndex::unit(axis) + MultiIndex::unit(axis);
                    trace += coeff_collision(&pr, e2, lam, kap, &table).unwrap();
                    trace += coeff_collision(&pr, e2, kap, lam, &table).unwrap();
                }
                assert_abs_diff_eq!(trace, 0.0, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn collision_entry_is_linear_in_strength() {
        let weak = KernelParams::new(-1.0, 1.0).unwrap();
        let strong = KernelParams::new(-1.0, 2.0).unwrap();
        let table = GTable::build(&weak, 3, 7, &CONV).unwrap();
        let alpha = MultiIndex::new(2, 0, 0);
        let lam = MultiIndex::new(0, 2, 0);
        let kap = MultiIndex::new(0, 0, 0);
        let a1 = coeff_collision(&weak, alpha, lam, kap, &table).unwrap();
        let a2 = coeff_collision(&strong, alpha, lam, kap, &table).unwrap();
        assert_eq!((2.0 * a1).to_bits(), a2.to_bits());
        assert!(a1 != 0.0, "chosen entry should be non-trivial");
    }

    #[test]
    fn tensor_matches_direct_entries() {
        let pr = params(-0.5);
        let conv = build_conversion(7).unwrap();
        let m0 = 3;
        let tensor = build_tensor(&pr, m0, &conv).unwrap();
        let table = GTable::build(&pr, m0 - 1, 2 * m0 + 1, &conv).unwrap();
        let set = IndexSet::new(m0);
        let mut seen = 0usize;
        for &alpha in set.entries() {
            for &lam in set.entries() {
                for &kap in set.entries() {
                    let direct = coeff_collision(&pr, alpha, lam, kap, &table).unwrap();
                    let stored =
                        tensor.value(alpha.graded_rank(), lam.graded_rank(), kap.graded_rank());
                    if direct.abs() >= DROP_THRESHOLD {
                        assert_eq!(direct.to_bits(), stored.to_bits());
                        seen += 1;
                    } else {
                        assert_eq!(stored, 0.0);
                    }
                }
            }
        }
        assert_eq!(seen, tensor.entry_count());
        assert!(seen > 100, "tensor should be well populated, got {seen}");
    }

    #[test]
    fn tensor_build_is_deterministic() {
        let pr = params(-3.0);
        let conv = build_conversion(5).unwrap();
        let a = build_tensor(&pr, 2, &conv).unwrap();
        let b = build_tensor(&pr, 2, &conv).unwrap();
        assert_eq!(a.offsets(), b.offsets());
        assert_eq!(a.pairs(), b.pairs());
        let bits = |t: &CollisionTensor| t.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn tensor_build_validates_inputs() {
        let pr = params(0.0);
        let conv = build_conversion(5).unwrap();
        assert!(matches!(
            build_tensor(&pr, 1, &conv),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            build_tensor(&pr, 3, &conv),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn cache_round_trips_bitwise() {
        let pr = params(-3.0);
        let conv = build_conversion(5).unwrap();
        let tensor = build_tensor(&pr, 2, &conv).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tensor.fplc");
        save_tensor(&tensor, &path).unwrap();
        let loaded = load_tensor(
            &path,
            Some(&CacheExpectation {
                gamma: -3.0,
                lambda: 1.0,
                m0: 2,
            }),
        )
        .unwrap();
        assert_eq!(tensor.m0(), loaded.m0());
        assert_eq!(tensor.params(), loaded.params());
        assert_eq!(tensor.offsets(), loaded.offsets());
        assert_eq!(tensor.pairs(), loaded.pairs());
        let bits = |t: &CollisionTensor| t.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&tensor), bits(&loaded));
        // Saving the loaded tensor reproduces the file bytes exactly.
        let path2 = dir.path().join("tensor2.fplc");
        save_tensor(&loaded, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn cache_rejects_mismatched_expectations() {
        let pr = params(-3.0);
        let conv = build_conversion(5).unwrap();
        let tensor = build_tensor(&pr, 2, &conv).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tensor.fplc");
        save_tensor(&tensor, &path).unwrap();
        let err = load_tensor(
            &path,
            Some(&CacheExpectation {
                gamma: -2.5,
                lambda: 1.0,
                m0: 2,
            }),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Mismatch { field: "gamma", .. }));
        let err = load_tensor(
            &path,
            Some(&CacheExpectation {
                gamma: -3.0,
                lambda: 2.0,
                m0: 2,
            }),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Mismatch {
                field: "lambda",
                ..
            }
        ));
        let err = load_tensor(
            &path,
            Some(&CacheExpectation {
                gamma: -3.0,
                lambda: 1.0,
                m0: 3,
            }),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Mismatch { field: "m0", .. }));
    }

    #[test]
    fn cache_rejects_corruption() {
        let pr = params(-3.0);
        let conv = build_conversion(5).unwrap();
        let tensor = build_tensor(&pr, 2, &conv).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tensor.fplc");
        save_tensor(&tensor, &path).unwrap();
        let clean = std::fs::read(&path).unwrap();

        let mut flipped = clean.clone();
        flipped[CACHE_HEADER_LEN + 5] ^= 0x40;
        let bad = dir.path().join("flipped.fplc");
        std::fs::write(&bad, &flipped).unwrap();
        assert!(matches!(load_tensor(&bad, None), Err(Error::Format(_))));

        let truncated = dir.path().join("truncated.fplc");
        std::fs::write(&truncated, &clean[..clean.len() - 13]).unwrap();
        assert!(matches!(
            load_tensor(&truncated, None),
            Err(Error::Format(_))
        ));

        let mut wrong_magic = clean.clone();
        wrong_magic[0] = b'X';
        let magic = dir.path().join("magic.fplc");
        std::fs::write(&magic, &wrong_magic).unwrap();
        assert!(matches!(load_tensor(&magic, None), Err(Error::Format(_))));

        assert!(matches!(
            load_tensor(&dir.path().join("missing.fplc"), None),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn from_parts_validates_layout() {
        let pr = params(-3.0);
        let n = IndexSet::size_for(2);
        // Valid empty tensor.
        let empty = CollisionTensor::from_parts(pr, 2, vec![0; n + 1], vec![], vec![]);
        assert!(empty.is_ok());
        // Bad offsets length.
        assert!(CollisionTensor::from_parts(pr, 2, vec![0; n], vec![], vec![]).is_err());
        // Non-monotone offsets.
        let mut offs = vec![0; n + 1];
        offs[1] = 1;
        assert!(CollisionTensor::from_parts(pr, 2, offs, vec![], vec![]).is_err());
        // Out-of-range rank.
        let mut offs = vec![0; n + 1];
        for o in offs.iter_mut().skip(1) {
            *o = 1;
        }
        assert!(CollisionTensor::from_parts(pr, 2, offs, vec![(0, n as u32)], vec![1.0]).is_err());
        assert!(CollisionTensor::from_parts(pr, 1, vec![0], vec![], vec![]).is_err());
    }
}
