//! Brute-force verification suite behind `fpl validate`.
//!
//! Every closed-form coefficient in [`crate::collision_kernel`] and
//! [`crate::hermite_burnett`] has an independent quadrature counterpart
//! here, built from nothing but the defining integrals and the rules in
//! [`crate::quadrature`]: tensorized Gauss–Hermite for Gaussian-weighted
//! polynomial integrals, a product sphere rule for angular factors, and the
//! tanh-sinh radial integrator for the |g|^γ singularity.  The suite
//! compares the two paths and reports the worst error per check, together
//! with structural invariants of the assembled tensor (conservation rows,
//! Maxwellian fixed point, Gram identity of the basis conversion).
//!
//! The oracles are deliberately slow and simple — they exist to catch sign,
//! ordering, and prefactor mistakes in the fast closed forms, so they share
//! no code with them beyond the basis evaluators.

use rayon::prelude::*;

use num_complex::Complex64;

use crate::basis_functions::{burnett_eval, hermite_eval, hermite_values, Point3};
use crate::collision_kernel::{
    build_tensor, coeff_collision, coeff_g, coeff_k, CollisionTensor, GTable, KernelParams,
};
use crate::collision_models::{hybrid_rhs, linear_rhs, quadratic_rhs, SpectralState};
use crate::hermite_burnett::{build_conversion, ConversionTable};
use crate::index_space::{multi_indices_of_degree, BurnettIndex, IndexSet, MultiIndex};
use crate::quadrature::{
    gauss_hermite_rule, power_weighted_integral, radial_singular_integral, sphere_rule,
};
use crate::{Error, Result};

/// Depth of the verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Small degree budgets and two kernel exponents; under a minute.
    Fast,
    /// Full degree budgets and five kernel exponents; several minutes.
    Full,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Level> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::InvalidInput(format!(
                "unknown validation level {other:?}, expected \"fast\" or \"full\""
            ))),
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Level::Fast => "fast",
            Level::Full => "full",
        })
    }
}

/// Outcome of one check: the worst measured error against its tolerance.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: String, max_error: f64, tolerance: f64) -> CheckReport {
        CheckReport {
            name,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }
}

/// Symmetric relative gap |a − b| / max(|a|, |b|), treating everything below
/// 1e−10 in magnitude as an exact zero match (the coefficients pruned from
/// the tensor live far below that).
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale <= 1e-10 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Quadrature counterpart of [`coeff_g`]: evaluates
/// ∫ |g|^γ g_s g_t H^p(g) H^q(g) M(g) dg in polar form — tanh-sinh in the
/// radius against the exact power weight, a product rule on the sphere —
/// with no Burnett machinery involved.  `s`, `t` are 1-based axes.
pub fn oracle_pair_integral(
    params: &KernelParams,
    s: usize,
    t: usize,
    p: MultiIndex,
    q: MultiIndex,
) -> Result<f64> {
    if !(1..=3).contains(&s) || !(1..=3).contains(&t) {
        return Err(Error::InvalidInput(format!(
            "axis labels must lie in 1..=3, got ({s}, {t})"
        )));
    }
    let sphere = sphere_rule(p.degree() + q.degree() + 2);
    let radial = radial_singular_integral(params.gamma(), 2, |r| {
        sphere.integrate(|node| {
            let g = Point3::new(
                r * node.unit.component(0),
                r * node.unit.component(1),
                r * node.unit.component(2),
            );
            node.unit.component(s - 1)
                * node.unit.component(t - 1)
                * hermite_eval(p, g)
                * hermite_eval(q, g)
        })
    })?;
    Ok(radial / (2.0 * std::f64::consts::PI).powf(1.5))
}

/// Quadrature counterpart of [`coeff_collision`], from the integral the
/// closed form is derived from.  Integrating the collision operator's
/// projection by parts once (the gradient lands on H^α M and steps the index
/// up) leaves
///
/// ```text
/// A_α^{λ,κ} = Σ_{s,t} Λ/(α−e_s)! ∬ |g|^γ (|g|²δ_st − g_s g_t) H^{α−e_s}(v)
///             M(v) M(v*) [H^λ(v*) H^{κ+e_t}(v) − H^λ(v) H^{κ+e_t}(v*)] dv dv*,
/// ```
///
/// with g = v − v* and the s-sum over α_s ≥ 1.  In mass-center coordinates
/// v = h + g/2, v* = h − g/2 the Gaussian factors split as
/// e^{−|h|²} e^{−|g|²/4}, so the oracle tensorizes Gauss–Hermite over h,
/// uses a product sphere rule for ĝ, and hands the radial direction —
/// substituted to the e^{−u²/2} weight via |g| = √2 u — to the singular
/// integrator.  Every factor is exact for the polynomial integrand except
/// the radial part, which carries ~1e−12 relative error.
pub fn oracle_collision_entry(
    params: &KernelParams,
    alpha: MultiIndex,
    lambda: MultiIndex,
    kappa: MultiIndex,
) -> Result<f64> {
    let reduced: Vec<(usize, f64)> = (0..3)
        .filter(|&s| alpha.component(s) >= 1)
        .map(|s| {
            let shifted = alpha
                .checked_sub(MultiIndex::unit(s))
                .expect("component checked");
            (s, 1.0 / shifted.factorial())
        })
        .collect();
    if reduced.is_empty() {
        return Ok(0.0);
    }
    let degree_sum = alpha.degree() + lambda.degree() + kappa.degree();
    // Highest 1-D Hermite degree that appears: components of α − e_s, λ,
    // and κ + e_t.
    let axis_cap = (0..3)
        .map(|i| {
            alpha
                .component(i)
                .max(lambda.component(i))
                .max(kappa.component(i) + 1)
        })
        .max()
        .unwrap();

    // ∫ e^{−|h|²} f(h) dh = π^{3/2} Σ (w_i w_j w_k) f(x/√2) per axis.
    let gh = gauss_hermite_rule(degree_sum / 2 + 1);
    let mut h_nodes: Vec<(Point3, f64)> = Vec::new();
    for (&xi, &wi) in gh.nodes.iter().zip(&gh.weights) {
        for (&xj, &wj) in gh.nodes.iter().zip(&gh.weights) {
            for (&xk, &wk) in gh.nodes.iter().zip(&gh.weights) {
                let h = Point3::new(
                    xi * std::f64::consts::FRAC_1_SQRT_2,
                    xj * std::f64::consts::FRAC_1_SQRT_2,
                    xk * std::f64::consts::FRAC_1_SQRT_2,
                );
                h_nodes.push((h, wi * wj * wk));
            }
        }
    }
    let sphere = sphere_rule(degree_sum + 2);

    // Σ_{s,t} (δ_st − n_s n_t)/(α−e_s)! H^{α−e_s}(v) [H^λ(v*)H^{κ+e_t}(v)
    //                                                 − H^λ(v)H^{κ+e_t}(v*)].
    let summand = |h: Point3, g: Point3, unit: Point3| -> f64 {
        let v = Point3::new(
            h.component(0) + 0.5 * g.component(0),
            h.component(1) + 0.5 * g.component(1),
            h.component(2) + 0.5 * g.component(2),
        );
        let w = Point3::new(
            h.component(0) - 0.5 * g.component(0),
            h.component(1) - 0.5 * g.component(1),
            h.component(2) - 0.5 * g.component(2),
        );
        let hv: [Vec<f64>; 3] = std::array::from_fn(|i| hermite_values(axis_cap, v.component(i)));
        let hw: [Vec<f64>; 3] = std::array::from_fn(|i| hermite_values(axis_cap, w.component(i)));
        let eval = |table: &[Vec<f64>; 3], idx: MultiIndex| -> f64 {
            (0..3).map(|i| table[i][idx.component(i)]).product()
        };
        let lam_v = eval(&hv, lambda);
        let lam_w = eval(&hw, lambda);
        let mut total = 0.0;
        for &(s, inv_fact) in &reduced {
            let head = inv_fact * eval(&hv, alpha.checked_sub(MultiIndex::unit(s)).unwrap());
            for t in 0..3 {
                let delta = if s == t { 1.0 } else { 0.0 };
                let projector = delta - unit.component(s) * unit.component(t);
                if projector == 0.0 {
                    continue;
                }
                let stepped = kappa + MultiIndex::unit(t);
                let bracket = lam_w * eval(&hv, stepped) - lam_v * eval(&hw, stepped);
                total += projector * head * bracket;
            }
        }
        total
    };

    let radial = radial_singular_integral(params.gamma(), 2, |u| {
        let scale = std::f64::consts::SQRT_2 * u;
        h_nodes
            .iter()
            .map(|&(h, wh)| {
                wh * sphere.integrate(|node| {
                    let g = Point3::new(
                        scale * node.unit.component(0),
                        scale * node.unit.component(1),
                        scale * node.unit.component(2),
                    );
                    summand(h, g, node.unit)
                })
            })
            .sum()
    })?;
    // Λ (2π)^{−3} · 2^{(γ+5)/2} (radial substitution) · π^{3/2} (h weights).
    let prefactor = params.lambda() * 2.0_f64.powf(0.5 * (params.gamma() + 5.0))
        / (8.0 * std::f64::consts::PI.powf(1.5));
    Ok(prefactor * radial)
}

/// Quadrature counterpart of a conversion-table entry: the projection
/// ∫ B_{α̂}(v) H^α(v) M(v) dv by tensorized Gauss–Hermite, exact for the
/// polynomial integrand.
pub fn oracle_conversion_entry(alpha: MultiIndex, hat: BurnettIndex) -> Complex64 {
    let gh = gauss_hermite_rule((alpha.degree() + hat.degree()) / 2 + 2);
    let mut total = Complex64::ZERO;
    for (&xi, &wi) in gh.nodes.iter().zip(&gh.weights) {
        for (&xj, &wj) in gh.nodes.iter().zip(&gh.weights) {
            for (&xk, &wk) in gh.nodes.iter().zip(&gh.weights) {
                let v = Point3::new(xi, xj, xk);
                total += wi * wj * wk * burnett_eval(hat, v) * hermite_eval(alpha, v);
            }
        }
    }
    total
}

/// Worst violation of the conservation structure of an assembled tensor:
/// the mass row must be empty, the symmetrized momentum rows must vanish,
/// and the energy rows must cancel in their degree-2 trace.
pub fn tensor_conservation_defect(tensor: &CollisionTensor) -> f64 {
    let mut defect: f64 = 0.0;
    let (_, mass_values) = tensor.row(0);
    for &v in mass_values {
        defect = defect.max(v.abs());
    }
    let symmetrized_max = |ranks: &[usize]| -> f64 {
        let mut sums: std::collections::HashMap<(u32, u32), f64> = std::collections::HashMap::new();
        for &rank in ranks {
            let (pairs, values) = tensor.row(rank);
            for (&(lam, kap), &v) in pairs.iter().zip(values) {
                *sums.entry((lam.min(kap), lam.max(kap))).or_insert(0.0) += v;
            }
        }
        sums.values().fold(0.0, |acc: f64, &v| acc.max(v.abs()))
    };
    for axis in 0..3 {
        let rank = MultiIndex::unit(axis).graded_rank();
        defect = defect.max(symmetrized_max(&[rank]));
    }
    let energy_ranks: Vec<usize> = (0..3)
        .map(|axis| (MultiIndex::unit(axis) + MultiIndex::unit(axis)).graded_rank())
        .collect();
    defect.max(symmetrized_max(&energy_ranks))
}

/// Gram identity of the conversion table: Σ_{α̂} C_{α̂}^α conj(C_{α̂}^β)
/// = δ_{αβ} α! within each degree, residuals scaled by √(α! β!).
fn check_gram(conv: &ConversionTable, max_degree: usize) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for d in 0..=max_degree {
        let indices = multi_indices_of_degree(d);
        for &a in &indices {
            let row_a = conv.row(a)?;
            for &b in &indices {
                let row_b = conv.row(b)?;
                let gram: Complex64 = row_a.iter().zip(row_b).map(|(x, y)| x * y.conj()).sum();
                let target = if a == b { a.factorial() } else { 0.0 };
                let residual = (gram - target).norm() / (a.factorial() * b.factorial()).sqrt();
                worst = worst.max(residual);
            }
        }
    }
    Ok(CheckReport::new(
        format!("conversion Gram identity (degrees ≤ {max_degree})"),
        worst,
        1e-10,
    ))
}

/// Every conversion entry against its defining integral.
fn check_conversion_oracle(conv: &ConversionTable, max_degree: usize) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for d in 0..=max_degree {
        let labels = conv.labels(d).to_vec();
        for &alpha in &multi_indices_of_degree(d) {
            let errors: Vec<f64> = labels
                .par_iter()
                .map(|&hat| {
                    let table = conv.entry(alpha, hat)?;
                    Ok((table - oracle_conversion_entry(alpha, hat)).norm())
                })
                .collect::<Result<_>>()?;
            worst = errors.into_iter().fold(worst, f64::max);
        }
    }
    Ok(CheckReport::new(
        format!("conversion entries vs quadrature (degrees ≤ {max_degree})"),
        worst,
        1e-8,
    ))
}

/// Closed-form Laguerre cross integrals against direct quadrature of
/// ∫ x^μ L_m^{(a)} L_n^{(c)} e^{−x} dx.
fn check_laguerre_cross() -> Result<CheckReport> {
    use crate::basis_functions::laguerre_eval;
    let mut worst: f64 = 0.0;
    for &mu in &[0.5, 1.5, 2.0, 3.25] {
        for &a in &[0.5, 1.5, 2.5] {
            for &c in &[0.5, 1.5] {
                for m in 0..4 {
                    for n in 0..4 {
                        let closed = coeff_k(mu, a, c, m, n)?;
                        let direct = power_weighted_integral(mu, |x| {
                            laguerre_eval(m, a, x) * laguerre_eval(n, c, x)
                        });
                        worst = worst.max(relative_gap(closed, direct));
                    }
                }
            }
        }
    }
    Ok(CheckReport::new(
        "Laguerre cross integrals vs quadrature".to_string(),
        worst,
        1e-10,
    ))
}

/// All pair integrals of both base axis pairs up to a degree budget against
/// the polar quadrature oracle.
fn check_pair_integrals(
    gamma: f64,
    max_degree: usize,
    conv: &ConversionTable,
) -> Result<CheckReport> {
    let params = KernelParams::new(gamma, 1.0)?;
    let set = IndexSet::new(max_degree);
    let mut jobs: Vec<(usize, usize, MultiIndex, MultiIndex)> = Vec::new();
    for (i, &p) in set.entries().iter().enumerate() {
        for &q in &set.entries()[i..] {
            for &(s, t) in &[(3, 3), (1, 3)] {
                // Integrand parity: odd components integrate to zero on both
                // paths; checking them would only compare 0 with 0.
                let shift = MultiIndex::unit(s - 1) + MultiIndex::unit(t - 1);
                if (p + q + shift).parity_mask() != 0 {
                    continue;
                }
                jobs.push((s, t, p, q));
            }
        }
    }
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(s, t, p, q)| {
            let closed = coeff_g(&params, s, t, p, q, conv)?;
            let direct = oracle_pair_integral(&params, s, t, p, q)?;
            Ok(relative_gap(closed, direct))
        })
        .collect::<Result<_>>()?;
    Ok(CheckReport::new(
        format!("pair integrals vs quadrature (γ = {gamma}, degrees ≤ {max_degree})"),
        errors.into_iter().fold(0.0, f64::max),
        1e-6,
    ))
}

/// Collision entries for all index triples within the budget against the
/// six-dimensional quadrature oracle.  This is the check that pins the
/// global prefactor exponent and the ordering of the separation
/// coefficients, which the γ = 0 case alone cannot distinguish.
fn check_collision_entries(
    gamma: f64,
    total_degree_cap: usize,
    conv: &ConversionTable,
) -> Result<CheckReport> {
    let params = KernelParams::new(gamma, 1.0)?;
    let set = IndexSet::new(2);
    let table = GTable::build(&params, 1, 5, conv)?;
    let mut triples: Vec<(MultiIndex, MultiIndex, MultiIndex)> = Vec::new();
    for &alpha in set.entries() {
        if alpha.degree() == 0 {
            continue;
        }
        for &lambda in set.entries() {
            for &kappa in set.entries() {
                if (alpha + lambda + kappa).parity_mask() != 0 {
                    continue;
                }
                if alpha.degree() + lambda.degree() + kappa.degree() > total_degree_cap {
                    continue;
                }
                triples.push((alpha, lambda, kappa));
            }
        }
    }
    let errors: Vec<f64> = triples
        .par_iter()
        .map(|&(alpha, lambda, kappa)| {
            let closed = coeff_collision(&params, alpha, lambda, kappa, &table)?;
            let direct = oracle_collision_entry(&params, alpha, lambda, kappa)?;
            Ok(relative_gap(closed, direct))
        })
        .collect::<Result<_>>()?;
    Ok(CheckReport::new(
        format!(
            "collision entries vs 6-D quadrature (γ = {gamma}, {} triples)",
            triples.len()
        ),
        errors.into_iter().fold(0.0, f64::max),
        1e-6,
    ))
}

/// Conservation rows and the Maxwellian fixed point of an assembled tensor.
fn check_tensor_invariants(
    gamma: f64,
    m0: usize,
    conv: &ConversionTable,
    reports: &mut Vec<CheckReport>,
) -> Result<()> {
    let params = KernelParams::new(gamma, 1.0)?;
    let tensor = build_tensor(&params, m0, conv)?;
    reports.push(CheckReport::new(
        format!("tensor conservation rows (γ = {gamma}, M0 = {m0})"),
        tensor_conservation_defect(&tensor),
        1e-10,
    ));
    let state = SpectralState::maxwellian(m0 + 2);
    let sup = |v: Vec<f64>| v.into_iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
    let quad = sup(quadratic_rhs(&tensor, &state)?);
    let lin = sup(linear_rhs(&state));
    let hyb = sup(hybrid_rhs(&tensor, &state)?);
    reports.push(CheckReport::new(
        format!("Maxwellian fixed point, all models (γ = {gamma}, M0 = {m0})"),
        quad.max(lin).max(hyb),
        1e-12,
    ));
    Ok(())
}

/// Run the whole suite at the requested depth.  Reports come back in a
/// stable order; a report with `passed == false` is a genuine finding, not
/// an error — errors are reserved for checks that could not run at all.
pub fn run_suite(level: Level) -> Result<Vec<CheckReport>> {
    struct Budget {
        gram_degree: usize,
        conversion_degree: usize,
        pair_degree: usize,
        pair_gammas: &'static [f64],
        entry_gammas: &'static [f64],
        entry_cap: usize,
        tensor_gammas: &'static [f64],
        tensor_m0: usize,
    }
    let budget = match level {
        Level::Fast => Budget {
            gram_degree: 6,
            conversion_degree: 3,
            pair_degree: 3,
            pair_gammas: &[0.0, -3.0],
            entry_gammas: &[0.0],
            entry_cap: 4,
            tensor_gammas: &[-3.0],
            tensor_m0: 3,
        },
        Level::Full => Budget {
            gram_degree: 10,
            conversion_degree: 5,
            pair_degree: 5,
            pair_gammas: &[0.0, -1.0, -2.5, -3.0, -4.5],
            entry_gammas: &[0.0, -1.0],
            entry_cap: 6,
            tensor_gammas: &[0.0, -3.0, -4.9],
            tensor_m0: 5,
        },
    };
    let conv_degree = budget
        .gram_degree
        .max(budget.pair_degree)
        .max(2 * budget.tensor_m0 + 1);
    let conv = build_conversion(conv_degree)?;

    let mut reports = Vec::new();
    reports.push(check_gram(&conv, budget.gram_degree)?);
    reports.push(check_conversion_oracle(&conv, budget.conversion_degree)?);
    reports.push(check_laguerre_cross()?);
    for &gamma in budget.pair_gammas {
        reports.push(check_pair_integrals(gamma, budget.pair_degree, &conv)?);
    }
    for &gamma in budget.entry_gammas {
        reports.push(check_collision_entries(gamma, budget.entry_cap, &conv)?);
    }
    for &gamma in budget.tensor_gammas {
        check_tensor_invariants(gamma, budget.tensor_m0, &conv, &mut reports)?;
    }
    Ok(reports)
}
