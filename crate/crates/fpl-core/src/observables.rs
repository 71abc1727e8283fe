//! Macroscopic moments, marginal distributions, and initial-state projection.
//!
//! Because the expansion weight is the global Maxwellian, the low-order
//! macroscopic quantities are linear combinations of a handful of spectral
//! coefficients — no quadrature is involved in reading them off:
//!
//! ```text
//! ρ = f₀,   uᵢ = f_{eᵢ}/f₀,   θ = 1 + 2 Σᵢ f_{2eᵢ} / (3 f₀),
//! σᵢⱼ = (1+δᵢⱼ) f_{eᵢ+eⱼ},   qⱼ = 2 f_{3eⱼ} + Σ_k f_{2e_k+eⱼ}.
//! ```
//!
//! These read the raw velocity moments about the origin; for the normalized
//! states evolved here (u = 0) they coincide with the centered ones, σ is
//! traceless, and θ is the temperature.
//!
//! Marginals integrate the reconstruction over the trailing axes; Hermite
//! orthogonality against 1 kills every mode with a nonzero trailing index,
//! so a 1-D marginal touches only the (n,0,0) coefficients and a 2-D one
//! only (a,b,0).
//!
//! Projection inverts the expansion for a given pointwise density via
//! orthogonality, f_α = (1/α!) ∫ f(v) H^α(v) dv, evaluated with a tensorized
//! Gauss–Hermite rule whose nodes are scaled to the width of the density.

use rayon::prelude::*;

use crate::basis_functions::{hermite_values, maxwellian_1d, Point3};
use crate::collision_models::SpectralState;
use crate::index_space::{IndexSet, MultiIndex};
use crate::quadrature::gauss_hermite_rule;
use crate::{Error, Result};

/// Velocity moments of a spectral state.  Fields beyond the density are
/// `None` when the truncation degree is too low to carry them (u needs
/// M ≥ 1, θ and σ need M ≥ 2, q needs M ≥ 3) — an explicit flag rather than
/// a silent zero.
///
/// The ratios u and θ divide by ρ = f₀ and are meaningless for states with
/// zero density (they come out non-finite).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    /// Density ρ = f₀.
    pub rho: f64,
    /// Bulk velocity uᵢ = f_{eᵢ}/f₀.
    pub u: Option<[f64; 3]>,
    /// Temperature θ = 1 + 2Σf_{2eᵢ}/(3f₀) (about the origin).
    pub theta: Option<f64>,
    /// Stress tensor σᵢⱼ = (1+δᵢⱼ)f_{eᵢ+eⱼ}; symmetric, and traceless for
    /// normalized states (Σf_{2eᵢ} = 0).
    pub sigma: Option<[[f64; 3]; 3]>,
    /// Heat flux qⱼ = 2f_{3eⱼ} + Σ_k f_{2e_k+eⱼ}.
    pub q: Option<[f64; 3]>,
}

/// Read the macroscopic moments off a state's coefficients.
pub fn moments(state: &SpectralState) -> Moments {
    let m = state.degree();
    let c = |alpha: MultiIndex| state.coeffs()[alpha.graded_rank()];
    let e = |i: usize| MultiIndex::unit(i);
    let rho = state.coeffs()[0];
    let u = (m >= 1).then(|| std::array::from_fn(|i| c(e(i)) / rho));
    let theta = (m >= 2).then(|| {
        let second: f64 = (0..3).map(|i| c(e(i) + e(i))).sum();
        1.0 + 2.0 * second / (3.0 * rho)
    });
    let sigma = (m >= 2).then(|| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let kr = if i == j { 1.0 } else { 0.0 };
                (1.0 + kr) * c(e(i) + e(j))
            })
        })
    });
    let q = (m >= 3).then(|| {
        std::array::from_fn(|j| {
            let third = 2.0 * c(e(j) + e(j) + e(j));
            let mixed: f64 = (0..3).map(|k| c(e(k) + e(k) + e(j))).sum();
            third + mixed
        })
    });
    Moments {
        rho,
        u,
        theta,
        sigma,
        q,
    }
}

/// The 1-D marginal g(v₁) = ∫∫ f dv₂ dv₃ = Σ_n f_{(n,0,0)} He_n(v₁) ·
/// (2π)^{−1/2} e^{−v₁²/2}, evaluated on a grid.
pub fn marginal_1d(state: &SpectralState, grid: &[f64]) -> Vec<f64> {
    let m = state.degree();
    let axis_coeffs: Vec<f64> = (0..=m)
        .map(|n| state.coeffs()[MultiIndex::new(n, 0, 0).graded_rank()])
        .collect();
    grid.par_iter()
        .map(|&x| {
            let he = hermite_values(m, x);
            let series: f64 = axis_coeffs.iter().zip(&he).map(|(f, h)| f * h).sum();
            series * maxwellian_1d(x)
        })
        .collect()
}

/// The 2-D marginal h(v₁, v₂) = ∫ f dv₃ = Σ_{a,b} f_{(a,b,0)} He_a(v₁)
/// He_b(v₂) · (2π)^{−1} e^{−(v₁²+v₂²)/2} on the tensor grid
/// `grid1 × grid2`; entry `[i][j]` is h(grid1[i], grid2[j]).
pub fn marginal_2d(state: &SpectralState, grid1: &[f64], grid2: &[f64]) -> Vec<Vec<f64>> {
    let m = state.degree();
    let plane_coeffs: Vec<(usize, usize, f64)> = IndexSet::new(m)
        .entries()
        .iter()
        .filter(|alpha| alpha.component(2) == 0)
        .map(|alpha| {
            let c = alpha.components();
            (c[0], c[1], state.coeffs()[alpha.graded_rank()])
        })
        .collect();
    grid1
        .par_iter()
        .map(|&x| {
            let hx = hermite_values(m, x);
            grid2
                .iter()
                .map(|&y| {
                    let hy = hermite_values(m, y);
                    let series: f64 = plane_coeffs
                        .iter()
                        .map(|&(a, b, f)| f * hx[a] * hy[b])
                        .sum();
                    series * maxwellian_1d(x) * maxwellian_1d(y)
                })
                .collect()
        })
        .collect()
}

/// Default tolerance below which a projected state counts as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Quadrature moments of the *input density* measured during projection,
/// independent of the truncation degree.  `theta` here is centered — the
/// temperature about the measured bulk velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionReport {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
}

impl ProjectionReport {
    /// Whether the density was normalized (ρ = 1, u = 0, θ = 1) within
    /// [`NORMALIZATION_TOL`].  Callers should warn with the measured values
    /// when this is false.
    pub fn is_normalized(&self) -> bool {
        (self.rho - 1.0).abs() <= NORMALIZATION_TOL
            && self.u.iter().all(|&c| c.abs() <= NORMALIZATION_TOL)
            && (self.theta - 1.0).abs() <= NORMALIZATION_TOL
    }
}

/// Project a pointwise density onto the Hermite basis:
/// f_α = (1/α!) ∫ f(v) H^α(v) dv.
///
/// The integral runs over a tensorized Gauss–Hermite rule with nodes scaled
/// by `scale` (pick it near the density's standard deviation; 1 for
/// unit-temperature data).  With x the standard nodes and w the weights,
///
/// ```text
/// ∫ f H^α dv = scale³ (2π)^{3/2} Σ_{ijk} wᵢwⱼw_k e^{|x|²/2} f(scale·x) H^α(scale·x),
/// ```
///
/// exact whenever f(scale·x) e^{|x|²/2} is a polynomial within the rule's
/// degree.  `nodes` overrides the per-axis node count (default 2M+8, which
/// integrates the degree-2M Gram matrix exactly with margin for the
/// envelope); it must be at least M+1.
///
/// The returned report carries the density's quadrature moments so callers
/// can detect unnormalized input; the projection itself is not rescaled.
pub fn project_initial(
    density: impl Fn(Point3) -> f64 + Sync,
    m: usize,
    scale: f64,
    nodes: Option<usize>,
) -> Result<(SpectralState, ProjectionReport)> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Domain {
            name: "scale",
            value: scale,
            requirement: "finite and positive",
        });
    }
    let n = nodes.unwrap_or(2 * m + 8);
    if n < m + 1 {
        return Err(Error::InvalidInput(format!(
            "{n} nodes per axis cannot resolve degree {m}; need at least {}",
            m + 1
        )));
    }
    let rule = gauss_hermite_rule(n);
    // Per-axis tables: scaled node positions, Hermite values there, and the
    // weight with the Gaussian divided back out (w e^{x²/2}).
    let pos: Vec<f64> = rule.nodes.iter().map(|&x| scale * x).collect();
    let herm: Vec<Vec<f64>> = pos.iter().map(|&v| hermite_values(m, v)).collect();
    let bare: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * (0.5 * x * x).exp())
        .collect();
    let prefactor = scale.powi(3) * (2.0 * std::f64::consts::PI).powf(1.5);

    // Evaluate the density once per grid node, fused with the bare weights.
    let field: Vec<f64> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            let v = Point3::new(pos[i], pos[j], pos[k]);
            bare[i] * bare[j] * bare[k] * density(v)
        })
        .collect();

    let set = IndexSet::new(m);
    let coeffs: Vec<f64> = set
        .entries()
        .par_iter()
        .map(|alpha| {
            let c = alpha.components();
            let mut total = 0.0;
            for i in 0..n {
                let hi = herm[i][c[0]];
                for j in 0..n {
                    let hij = hi * herm[j][c[1]];
                    let row = &field[(i * n + j) * n..(i * n + j + 1) * n];
                    let mut inner = 0.0;
                    for (k, &w) in row.iter().enumerate() {
                        inner += w * herm[k][c[2]];
                    }
                    total += hij * inner;
                }
            }
            prefactor * total / alpha.factorial()
        })
        .collect();

    // Quadrature moments of the raw density (same grid, no truncation).
    let mut sums = [0.0; 5]; // mass, v1, v2, v3, |v|²
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let w = field[(i * n + j) * n + k];
                let v = [pos[i], pos[j], pos[k]];
                sums[0] += w;
                for (s, &vc) in sums[1..4].iter_mut().zip(&v) {
                    *s += w * vc;
                }
                sums[4] += w * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            }
        }
    }
    let rho = prefactor * sums[0];
    let u = std::array::from_fn(|i| prefactor * sums[1 + i] / rho);
    let second = prefactor * sums[4] / rho;
    let report = ProjectionReport {
        rho,
        u,
        theta: (second - u.iter().map(|c| c * c).sum::<f64>()) / 3.0,
    };
    Ok((SpectralState::new(m, coeffs, 0.0)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_functions::maxwellian;

    /// Hermite coefficients of a unit-temperature Maxwellian drifting at
    /// `u0`: the generating function e^{u·v − |u|²/2} gives f_α = u0^α/α!.
    fn drifting_maxwellian_state(m: usize, u0: [f64; 3]) -> SpectralState {
        let mut state = SpectralState::zero(m);
        let set = IndexSet::new(m);
        for (rank, alpha) in set.entries().iter().enumerate() {
            let c = alpha.components();
            let num: f64 = (0..3).map(|i| u0[i].powi(c[i] as i32)).product();
            state.coeffs_mut()[rank] = num / alpha.factorial();
        }
        state
    }

    fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        let step = (hi - lo) / (count - 1) as f64;
        (0..count).map(|i| lo + step * i as f64).collect()
    }

    fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
        grid.windows(2)
            .zip(values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    #[test]
    fn maxwellian_moments_are_exactly_at_equilibrium() {
        let m = moments(&SpectralState::maxwellian(3));
        assert_eq!(m.rho, 1.0);
        assert_eq!(m.u.unwrap(), [0.0; 3]);
        assert_eq!(m.theta.unwrap(), 1.0);
        assert_eq!(m.sigma.unwrap(), [[0.0; 3]; 3]);
        assert_eq!(m.q.unwrap(), [0.0; 3]);
    }

    #[test]
    fn drifting_maxwellian_moments_follow_gaussian_algebra() {
        let u0 = [0.3, -0.2, 0.1];
        let state = drifting_maxwellian_state(4, u0);
        let m = moments(&state);
        let speed_sq: f64 = u0.iter().map(|c| c * c).sum();
        assert!((m.rho - 1.0).abs() < 1e-15);
        for (ui, u0i) in m.u.unwrap().iter().zip(u0) {
            assert!((ui - u0i).abs() < 1e-14);
        }
        // θ about the origin picks up the kinetic part of the drift.
        assert!((m.theta.unwrap() - (1.0 + speed_sq / 3.0)).abs() < 1e-14);
        let sigma = m.sigma.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((sigma[i][j] - sigma[j][i]).abs() < 1e-15, "σ symmetric");
                assert!((sigma[i][j] - u0[i] * u0[j]).abs() < 1e-14);
            }
        }
        // With f_α = u0^α/α! the cubic terms cancel: q_j = |u0|² u0_j / 2.
        for (qj, u0j) in m.q.unwrap().iter().zip(u0) {
            let expected = 0.5 * speed_sq * u0j;
            assert!((qj - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn stress_reads_the_cross_coefficient_directly() {
        let mut state = SpectralState::maxwellian(2);
        state
            .set_coeff(MultiIndex::new(1, 1, 0), 0.1)
            .expect("in range");
        let sigma = moments(&state).sigma.unwrap();
        assert_eq!(sigma[0][1], 0.1);
        assert_eq!(sigma[1][0], 0.1);
        let trace = sigma[0][0] + sigma[1][1] + sigma[2][2];
        assert!(trace.abs() < 1e-12, "normalized state keeps σ traceless");
    }

    #[test]
    fn moment_availability_tracks_the_truncation_degree() {
        let m0 = moments(&SpectralState::maxwellian(0));
        assert!(m0.u.is_none() && m0.theta.is_none() && m0.sigma.is_none() && m0.q.is_none());
        let m1 = moments(&SpectralState::maxwellian(1));
        assert!(m1.u.is_some() && m1.theta.is_none());
        let m2 = moments(&SpectralState::maxwellian(2));
        assert!(m2.theta.is_some() && m2.sigma.is_some() && m2.q.is_none());
        assert!(moments(&SpectralState::maxwellian(3)).q.is_some());
    }

    #[test]
    fn maxwellian_marginals_are_gaussian_pointwise() {
        let state = SpectralState::maxwellian(5);
        let g1 = grid(-4.0, 4.0, 33);
        for (x, g) in g1.iter().zip(marginal_1d(&state, &g1)) {
            assert!((g - maxwellian_1d(*x)).abs() < 1e-15);
        }
        let h = marginal_2d(&state, &g1, &g1);
        for (i, x) in g1.iter().enumerate() {
            for (j, y) in g1.iter().enumerate() {
                assert!((h[i][j] - maxwellian_1d(*x) * maxwellian_1d(*y)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn marginals_integrate_back_to_the_density() {
        let state = drifting_maxwellian_state(5, [0.4, -0.3, 0.2]);
        let g1 = grid(-8.0, 8.0, 801);
        let g = marginal_1d(&state, &g1);
        assert!((trapezoid(&g1, &g) - 1.0).abs() < 1e-6);
        // Reducing the 2-D marginal over v₂ must recover the 1-D one.
        let h = marginal_2d(&state, &g1, &g1);
        for (i, gi) in g.iter().enumerate().step_by(100) {
            let reduced = trapezoid(&g1, &h[i]);
            assert!((reduced - gi).abs() < 1e-6, "at v1 = {}", g1[i]);
        }
    }

    #[test]
    fn projection_recovers_the_maxwellian_exactly() {
        let (state, report) = project_initial(maxwellian, 4, 1.0, None).unwrap();
        assert!((state.coeffs()[0] - 1.0).abs() < 1e-12);
        for &c in &state.coeffs()[1..] {
            assert!(c.abs() < 1e-12);
        }
        assert!(report.is_normalized());
        assert!((report.rho - 1.0).abs() < 1e-12);
        assert!((report.theta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_recovers_drifting_maxwellian_coefficients() {
        let u0 = [0.3, -0.2, 0.1];
        let density = move |v: Point3| {
            let d = Point3::new(
                v.component(0) - u0[0],
                v.component(1) - u0[1],
                v.component(2) - u0[2],
            );
            maxwellian(d)
        };
        let (state, report) = project_initial(density, 5, 1.0, None).unwrap();
        let exact = drifting_maxwellian_state(5, u0);
        for (a, b) in state.coeffs().iter().zip(exact.coeffs()) {
            assert!((a - b).abs() < 1e-10, "coefficient {a} vs {b}");
        }
        assert!((report.rho - 1.0).abs() < 1e-12);
        for (ri, u0i) in report.u.iter().zip(u0) {
            assert!((ri - u0i).abs() < 1e-12);
        }
        // The report's θ is centered: exactly 1 despite the drift.
        assert!((report.theta - 1.0).abs() < 1e-12);
        assert!(!report.is_normalized(), "drift must be flagged");
    }

    #[test]
    fn projected_moments_match_the_quadrature_report() {
        // Asymmetric two-Gaussian mixture: nothing cancels by symmetry.
        let density = |v: Point3| {
            let a = Point3::new(v.component(0) - 0.5, v.component(1), v.component(2));
            let b = Point3::new(v.component(0) + 0.3, v.component(1) - 0.4, v.component(2));
            0.6 * maxwellian(a) + 0.4 * maxwellian(b)
        };
        let (state, report) = project_initial(density, 4, 1.0, None).unwrap();
        let m = moments(&state);
        assert!((m.rho - report.rho).abs() < 1e-8);
        let u = m.u.unwrap();
        let speed_sq: f64 = report.u.iter().map(|c| c * c).sum();
        for (ui, ri) in u.iter().zip(report.u) {
            assert!((ui - ri).abs() < 1e-8);
        }
        // Coefficient θ is about the origin; the report's is centered.
        let theta_origin = report.theta + speed_sq / 3.0;
        assert!((m.theta.unwrap() - theta_origin).abs() < 1e-8);
    }

    #[test]
    fn projection_is_linear_in_the_density() {
        let f = |v: Point3| maxwellian(v);
        let g = |v: Point3| {
            let d = Point3::new(v.component(0) - 0.4, v.component(1), v.component(2));
            maxwellian(d)
        };
        let combo = |v: Point3| 0.7 * f(v) - 0.2 * g(v);
        let (sf, _) = project_initial(f, 3, 1.0, None).unwrap();
        let (sg, _) = project_initial(g, 3, 1.0, None).unwrap();
        let (sc, _) = project_initial(combo, 3, 1.0, None).unwrap();
        for ((a, b), c) in sf.coeffs().iter().zip(sg.coeffs()).zip(sc.coeffs()) {
            assert!((0.7 * a - 0.2 * b - c).abs() < 1e-13);
        }
    }

    #[test]
    fn projection_flags_unnormalized_densities() {
        let (_, report) = project_initial(|v| 2.0 * maxwellian(v), 2, 1.0, None).unwrap();
        assert!((report.rho - 2.0).abs() < 1e-10);
        assert!(!report.is_normalized());
    }

    #[test]
    fn projection_guards_its_quadrature_parameters() {
        assert!(matches!(
            project_initial(maxwellian, 4, 0.0, None),
            Err(Error::Domain { name: "scale", .. })
        ));
        assert!(matches!(
            project_initial(maxwellian, 4, 1.0, Some(3)),
            Err(Error::InvalidInput(_))
        ));
    }
}
