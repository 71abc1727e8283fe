//! The three benchmark initial conditions and their analytic references.
//!
//! * **BKW** — the Bobylev–Krook–Wu self-similar solution for Maxwellian
//!   interactions (γ = 0).  Both the density and every spectral coefficient
//!   are known in closed form for all times, which makes it the canonical
//!   end-to-end accuracy benchmark: with τ(t) = 1 − 0.4 e^{−4t},
//!
//!   ```text
//!   f(t,v) = (2πτ)^{−3/2} e^{−|v|²/(2τ)} [1 + (1−τ)/τ (|v|²/(2τ) − 3/2)],
//!   f_α(t) = [−0.2 e^{−4t}]^{|α|/2} (1 − |α|/2) / Π_i (α_i/2)!   (α all even).
//!   ```
//!
//! * **Bi-Gaussian** — two unit-mass/2 bumps of variance 1/2 centered at
//!   ∓√(3/2) on the first axis; normalized (ρ = 1, u = 0, θ = 1) with the
//!   anisotropy carried by the stress: σ₁₁ = 1, σ₂₂ = σ₃₃ = −1/2.
//!
//! * **Rosenbluth** — the isotropic shell A e^{−(B|v|−1)²}.  The constants
//!   are pinned by ρ = θ = 1: a bisection on B drives the radial-quadrature
//!   temperature to one, then A normalizes the mass.  (The resulting values
//!   agree with closed forms in erf(1) and 1/e — see the tests.)  Because
//!   |v| has a conical point at the origin, the shell's Hermite coefficients
//!   are computed on a radial × spherical grid, which never integrates
//!   across the kink, instead of the generic tensorized projection.

use std::f64::consts::PI;
use std::sync::LazyLock;

use serde::Deserialize;

use crate::basis_functions::{hermite_values, Point3};
use crate::collision_models::SpectralState;
use crate::index_space::IndexSet;
use crate::numeric::factorial;
use crate::observables::{project_initial, ProjectionReport};
use crate::quadrature::{gauss_legendre_rule, sphere_rule};
use crate::{Error, Result};

/// A benchmark initial condition.  The ids `bkw`, `bigaussian`, and
/// `rosenbluth` are stable strings used by the CLI configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Bkw,
    #[serde(rename = "bigaussian")]
    BiGaussian,
    Rosenbluth,
}

impl Scenario {
    /// The stable configuration id.
    pub fn id(self) -> &'static str {
        match self {
            Scenario::Bkw => "bkw",
            Scenario::BiGaussian => "bigaussian",
            Scenario::Rosenbluth => "rosenbluth",
        }
    }

    /// Parse a configuration id.
    pub fn from_id(id: &str) -> Result<Scenario> {
        match id {
            "bkw" => Ok(Scenario::Bkw),
            "bigaussian" => Ok(Scenario::BiGaussian),
            "rosenbluth" => Ok(Scenario::Rosenbluth),
            other => Err(Error::InvalidInput(format!(
                "unknown scenario '{other}' (expected bkw, bigaussian, or rosenbluth)"
            ))),
        }
    }

    /// The pointwise initial density.
    pub fn density(self, v: Point3) -> f64 {
        match self {
            Scenario::Bkw => bkw_density(0.0, v),
            Scenario::BiGaussian => bigaussian_density(v),
            Scenario::Rosenbluth => rosenbluth_density(v),
        }
    }

    /// Node scale for the generic tensorized projection: roughly the
    /// per-axis standard deviation of the density (the BKW datum is a
    /// width-√0.6 Gaussian times a polynomial, the bi-Gaussian bumps have
    /// width 1/√2, the shell is of unit temperature overall).
    pub fn projection_scale(self) -> f64 {
        match self {
            Scenario::Bkw => 0.6f64.sqrt(),
            Scenario::BiGaussian => std::f64::consts::FRAC_1_SQRT_2,
            Scenario::Rosenbluth => 1.0,
        }
    }

    /// The initial spectral state over I_M, with the measured density
    /// moments.  BKW uses its analytic coefficient law, the bi-Gaussian the
    /// generic projection, and the Rosenbluth shell the radial × spherical
    /// path (see the module docs).
    pub fn initial_state(self, m: usize) -> Result<(SpectralState, ProjectionReport)> {
        match self {
            Scenario::Bkw => {
                // The law is exactly normalized: f₀ = 1 and the degree-2
                // coefficients vanish identically at every time.
                let report = ProjectionReport {
                    rho: 1.0,
                    u: [0.0; 3],
                    theta: 1.0,
                };
                Ok((bkw_coefficients(0.0, m), report))
            }
            Scenario::BiGaussian => {
                project_initial(bigaussian_density, m, self.projection_scale(), None)
            }
            Scenario::Rosenbluth => rosenbluth_initial_state(m),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scenario> {
        Scenario::from_id(s)
    }
}

/// The BKW density at time t (τ = 1 − 0.4 e^{−4t}).
pub fn bkw_density(t: f64, v: Point3) -> f64 {
    let tau = 1.0 - 0.4 * (-4.0 * t).exp();
    let r2 = v.norm_sq();
    let gauss = (2.0 * PI * tau).powf(-1.5) * (-0.5 * r2 / tau).exp();
    gauss * (1.0 + (1.0 - tau) / tau * (0.5 * r2 / tau - 1.5))
}

/// The BKW 1-D marginal ∫∫ f dv₂ dv₃ in closed form: integrating the
/// density over two axes replaces the bracket's 3/2 by 1/2.
pub fn bkw_marginal_1d(t: f64, v1: f64) -> f64 {
    let tau = 1.0 - 0.4 * (-4.0 * t).exp();
    let gauss = (2.0 * PI * tau).powf(-0.5) * (-0.5 * v1 * v1 / tau).exp();
    gauss * (1.0 + (1.0 - tau) / tau * (0.5 * v1 * v1 / tau - 0.5))
}

/// The exact BKW spectral coefficients at time t over I_M:
/// f_α = [−0.2 e^{−4t}]^{|α|/2} (1 − |α|/2) / Π (α_i/2)! on all-even α,
/// zero otherwise (in particular for every 1 ≤ |α| ≤ 3).
pub fn bkw_coefficients(t: f64, m: usize) -> SpectralState {
    let beta = -0.2 * (-4.0 * t).exp();
    let mut state = SpectralState::zero(m);
    let set = IndexSet::new(m);
    for (rank, alpha) in set.entries().iter().enumerate() {
        let c = alpha.components();
        if c.iter().any(|&a| a % 2 == 1) {
            continue;
        }
        let half = alpha.degree() / 2;
        let denom: f64 = c.iter().map(|&a| factorial(a / 2)).product();
        state.coeffs_mut()[rank] = beta.powi(half as i32) * (1.0 - half as f64) / denom;
    }
    state
}

/// The bi-Gaussian density: two variance-1/2 Gaussian bumps at ∓√(3/2) e₁,
///
/// ```text
/// f(v) = 1/(2π^{3/2}) [e^{−(v₁+√(3/2))² − v₂² − v₃²} + e^{−(v₁−√(3/2))² − v₂² − v₃²}].
/// ```
pub fn bigaussian_density(v: Point3) -> f64 {
    let a = 1.5f64.sqrt();
    let tail = v.component(1) * v.component(1) + v.component(2) * v.component(2);
    let plus = (v.component(0) + a).powi(2);
    let minus = (v.component(0) - a).powi(2);
    ((-(plus + tail)).exp() + (-(minus + tail)).exp()) / (2.0 * PI.powf(1.5))
}

/// The radial moment ∫₀^∞ r^k e^{−(Br−1)²} dr by Gauss–Legendre quadrature
/// (the integrand is smooth and supported in r ≲ (1+12)/B).
fn shell_radial_moment(b: f64, k: i32) -> f64 {
    let upper = 13.0 / b;
    let rule = gauss_legendre_rule(200);
    let half = 0.5 * upper;
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let r = half * (x + 1.0);
            w * half * r.powi(k) * (-(b * r - 1.0).powi(2)).exp()
        })
        .sum()
}

/// Rosenbluth shell constants (A, B) for f = A e^{−(B|v|−1)²}, determined
/// by enforcing ρ = 1 and θ = 1: the temperature m₄(B)/(3 m₂(B)) of the
/// unnormalized shell is strictly decreasing in B, so a bisection pins B,
/// and A = 1/(4π m₂(B)) then normalizes the mass.
pub fn rosenbluth_constants() -> Result<(f64, f64)> {
    SHELL_CONSTANTS.clone().map_err(Error::Config)
}

static SHELL_CONSTANTS: LazyLock<std::result::Result<(f64, f64), String>> = LazyLock::new(|| {
    let temperature = |b: f64| shell_radial_moment(b, 4) / (3.0 * shell_radial_moment(b, 2));
    let (mut lo, mut hi) = (0.2, 5.0);
    let (f_lo, f_hi) = (temperature(lo) - 1.0, temperature(hi) - 1.0);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(format!(
            "shell temperature does not straddle 1 on [{lo}, {hi}]: {f_lo:.3e}, {f_hi:.3e}"
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if temperature(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    if !b.is_finite() || (temperature(b) - 1.0).abs() > 1e-12 {
        return Err(format!("shell temperature bisection stalled at B = {b}"));
    }
    Ok((1.0 / (4.0 * PI * shell_radial_moment(b, 2)), b))
});

/// The Rosenbluth shell density A e^{−(B|v|−1)²} with the normalized
/// constants of [`rosenbluth_constants`].
pub fn rosenbluth_density(v: Point3) -> f64 {
    let (a, b) = SHELL_CONSTANTS
        .as_ref()
        .expect("shell bisection on a fixed straddling bracket cannot fail");
    a * (-(b * v.norm() - 1.0).powi(2)).exp()
}

/// Project the shell on a radial × spherical grid: for a radial density,
/// f_α = (1/α!) ∫₀^∞ f(r) r² [∮ H^α(r n̂) dΩ] dr, with the sphere factor
/// integrated exactly by a rule of the truncation's polynomial order and
/// the radial factor by the same Gauss–Legendre rule as the normalization.
/// Odd-parity coefficients vanish identically and are skipped.
fn rosenbluth_initial_state(m: usize) -> Result<(SpectralState, ProjectionReport)> {
    let (a, b) = rosenbluth_constants()?;
    let sphere = sphere_rule(m.max(1));
    let radial = gauss_legendre_rule(200);
    let upper = 13.0 / b;
    let half = 0.5 * upper;

    let set = IndexSet::new(m);
    let mut sums = vec![0.0f64; set.entries().len()];
    let (mut mass, mut second) = (0.0f64, 0.0f64);
    for (&x, &w) in radial.nodes.iter().zip(&radial.weights) {
        let r = half * (x + 1.0);
        let shell = w * half * r * r * a * (-(b * r - 1.0).powi(2)).exp();
        mass += shell;
        second += shell * r * r;
        // Sphere average of H^α(r n̂) for every α at this radius.
        for node in &sphere.nodes {
            let v = Point3::new(
                r * node.unit.component(0),
                r * node.unit.component(1),
                r * node.unit.component(2),
            );
            let he: [Vec<f64>; 3] =
                std::array::from_fn(|axis| hermite_values(m, v.component(axis)));
            let weight = shell * node.weight;
            for (rank, alpha) in set.entries().iter().enumerate() {
                let c = alpha.components();
                if c.iter().any(|&n| n % 2 == 1) {
                    continue;
                }
                sums[rank] += weight * he[0][c[0]] * he[1][c[1]] * he[2][c[2]];
            }
        }
    }
    for (rank, alpha) in set.entries().iter().enumerate() {
        sums[rank] /= alpha.factorial();
    }
    let rho = 4.0 * PI * mass;
    let report = ProjectionReport {
        rho,
        u: [0.0; 3],
        theta: 4.0 * PI * second / (3.0 * rho),
    };
    Ok((SpectralState::new(m, sums, 0.0)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_functions::maxwellian;
    use crate::index_space::MultiIndex;
    use crate::observables::{marginal_1d, moments};
    use statrs::function::erf::erf;

    #[test]
    fn bkw_coefficients_match_the_printed_anchors() {
        let state = bkw_coefficients(0.0, 6);
        assert_eq!(state.coeffs()[0], 1.0);
        let c = |a, b, c| state.coeffs()[MultiIndex::new(a, b, c).graded_rank()];
        assert!((c(4, 0, 0) + 0.02).abs() < 1e-16);
        assert!((c(2, 2, 0) + 0.04).abs() < 1e-16);
        for t in [0.0, 0.3] {
            let state = bkw_coefficients(t, 6);
            let set = IndexSet::new(6);
            for (rank, alpha) in set.entries().iter().enumerate() {
                if (1..=3).contains(&alpha.degree()) {
                    assert_eq!(state.coeffs()[rank], 0.0, "low orders stay zero");
                }
            }
            state.check_normalized(1e-15).unwrap();
        }
    }

    #[test]
    fn bkw_density_anchors() {
        // At t = 0 the bracket vanishes at the origin: 1 + (0.4/0.6)(−3/2) = 0.
        assert!(bkw_density(0.0, Point3::new(0.0, 0.0, 0.0)).abs() < 1e-16);
        // In the long-time limit the density relaxes to the Maxwellian.
        for &v in &[
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, -0.5, 0.25),
            Point3::new(-2.0, 1.0, 0.5),
        ] {
            assert!((bkw_density(10.0, v) - maxwellian(v)).abs() < 1e-12);
        }
    }

    #[test]
    fn bkw_projection_matches_the_coefficient_law() {
        let scale = Scenario::Bkw.projection_scale();
        let (projected, report) = project_initial(|v| bkw_density(0.0, v), 8, scale, None).unwrap();
        assert!(report.is_normalized());
        assert!((report.rho - 1.0).abs() < 1e-10);
        let exact = bkw_coefficients(0.0, 8);
        for (rank, (a, b)) in projected.coeffs().iter().zip(exact.coeffs()).enumerate() {
            assert!(
                (a - b).abs() < 1e-8,
                "coefficient rank {rank}: projected {a}, analytic {b}"
            );
        }
    }

    #[test]
    fn bkw_marginal_matches_the_coefficient_series() {
        let grid: Vec<f64> = (0..101).map(|i| -5.0 + 0.1 * i as f64).collect();
        let max_err = |t: f64, m: usize| {
            let series = marginal_1d(&bkw_coefficients(t, m), &grid);
            grid.iter()
                .zip(series)
                .map(|(x, s)| (s - bkw_marginal_1d(t, *x)).abs())
                .fold(0.0f64, f64::max)
        };
        // At t = 0 the coefficient series converges geometrically but
        // slowly: each even degree shrinks the tail by |β|√((n+1)(n+2))
        // /(n/2+1) ≈ 0.4, and the √(n!) envelope of He_n·M makes the first
        // neglected term the whole story.  Measured truncation: 6.3e−4 at
        // M = 15 down to 6.1e−7 at M = 30.
        let ladder: Vec<f64> = [15, 20, 24, 30].iter().map(|&m| max_err(0.0, m)).collect();
        assert!(ladder[0] < 1e-3, "M = 15 truncation {:.3e}", ladder[0]);
        assert!(ladder[3] < 1e-6, "M = 30 truncation {:.3e}", ladder[3]);
        for pair in ladder.windows(2) {
            assert!(pair[1] < 0.5 * pair[0], "series must converge: {ladder:?}");
        }
        // Half a time unit in, β has decayed by e^{−2} and the series is
        // sharp already at M = 15.
        assert!(max_err(0.5, 15) < 1e-9);
    }

    #[test]
    fn bigaussian_state_carries_the_expected_stress() {
        let (state, report) = Scenario::BiGaussian.initial_state(6).unwrap();
        assert!(report.is_normalized());
        assert!((report.rho - 1.0).abs() < 1e-10);
        assert!((report.theta - 1.0).abs() < 1e-10);
        state.check_normalized(1e-10).unwrap();
        let m = moments(&state);
        let sigma = m.sigma.unwrap();
        assert!((sigma[0][0] - 1.0).abs() < 1e-10);
        assert!((sigma[1][1] + 0.5).abs() < 1e-10);
        assert!((sigma[2][2] + 0.5).abs() < 1e-10);
        for (i, row) in sigma.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                if i != j {
                    assert!(s.abs() < 1e-12, "off-diagonal stress σ{i}{j} = {s}");
                }
            }
        }
        for q in m.q.unwrap() {
            assert!(q.abs() < 1e-12, "even density has no heat flux, got {q}");
        }
    }

    #[test]
    fn rosenbluth_constants_match_their_closed_forms() {
        let (a, b) = rosenbluth_constants().unwrap();
        // Moments of the shell in closed form: with u = Br − 1,
        // I_k = ∫_{−1}^∞ (u+1)^k e^{−u²} du expands into erf(1) and 1/e.
        let plateau = 1.0 + erf(1.0);
        let i2 = 0.75 * PI.sqrt() * plateau + 0.5 * (-1.0f64).exp();
        let i4 = (19.0 / 8.0) * PI.sqrt() * plateau + 1.75 * (-1.0f64).exp();
        let b_exact = (i4 / (3.0 * i2)).sqrt();
        let a_exact = b_exact.powi(3) / (4.0 * PI * i2);
        assert!((b - b_exact).abs() < 1e-10 * b_exact);
        assert!((a - a_exact).abs() < 1e-10 * a_exact);
    }

    #[test]
    fn shell_constant_parenthesizations_are_adjudicated() {
        // Two readings of the printed constants a = π(3√π(erf(1) + 1 + 2/e)
        // (unbalanced) and b = π(9.5√π(erf(1)+1) + 7/e), feeding
        // B = √(b/3)/√a and A = (b/3)^{3/2}/a^{5/2}.
        let (a_num, b_num) = rosenbluth_constants().unwrap();
        let plateau = 1.0 + erf(1.0);
        let inv_e = (-1.0f64).exp();
        // Reading 1: the inner parenthesis closes after erf(1)+1, and 2/e
        // joins the outer sum — the shape that matches b's.
        let cap_a1 = PI * (3.0 * PI.sqrt() * plateau + 2.0 * inv_e);
        // Reading 2: the 2/e rides inside with erf(1)+1 and a closing
        // parenthesis is missing at the end.
        let cap_a2 = PI * 3.0 * PI.sqrt() * (plateau + 2.0 * inv_e);
        let cap_b = PI * (9.5 * PI.sqrt() * plateau + 7.0 * inv_e);
        let from = |cap_a: f64| {
            let b = (cap_b / 3.0).sqrt() / cap_a.sqrt();
            ((cap_b / 3.0).powf(1.5) / cap_a.powf(2.5), b)
        };
        let (a1, b1) = from(cap_a1);
        let (a2, b2) = from(cap_a2);
        assert!(
            (a1 - a_num).abs() < 1e-10 && (b1 - b_num).abs() < 1e-10,
            "reading 1 should reproduce the normalized constants: \
             ({a1}, {b1}) vs ({a_num}, {b_num})"
        );
        assert!(
            (a2 - a_num).abs() > 1e-3 && (b2 - b_num).abs() > 1e-3,
            "reading 2 is inconsistent with ρ = θ = 1: ({a2}, {b2})"
        );
    }

    #[test]
    fn rosenbluth_state_is_normalized_and_isotropic() {
        let (state, report) = Scenario::Rosenbluth.initial_state(9).unwrap();
        assert!((report.rho - 1.0).abs() < 1e-10);
        assert!((report.theta - 1.0).abs() < 1e-10);
        state.check_normalized(1e-10).unwrap();
        let m = moments(&state);
        for row in m.sigma.unwrap() {
            for s in row {
                assert!(s.abs() < 1e-12, "isotropic shell has no stress, got {s}");
            }
        }
        for q in m.q.unwrap() {
            assert!(q.abs() < 1e-12, "isotropic shell has no heat flux, got {q}");
        }
        // Odd-parity coefficients vanish identically.
        let set = IndexSet::new(9);
        for (rank, alpha) in set.entries().iter().enumerate() {
            if alpha.components().iter().any(|&c| c % 2 == 1) {
                assert_eq!(state.coeffs()[rank], 0.0);
            }
        }
    }

    #[test]
    fn shell_radial_projection_agrees_with_the_generic_path() {
        // The conical point of |v| at the origin limits the tensorized
        // Gauss–Hermite rule to O(n⁻²) convergence (measured: 2.7e−4 at 24
        // nodes, 1.7e−5 at 96), which is exactly why the scenario uses the
        // radial × spherical path.  What the generic rule does confirm is
        // the limit: its error against the radial coefficients must shrink
        // at the algebraic rate toward zero.
        let (radial, _) = Scenario::Rosenbluth.initial_state(6).unwrap();
        let deviation = |nodes: usize| {
            let (generic, _) = project_initial(rosenbluth_density, 6, 1.0, Some(nodes)).unwrap();
            generic
                .coeffs()
                .iter()
                .zip(radial.coeffs())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        let (coarse, fine) = (deviation(24), deviation(96));
        assert!(
            fine < 1e-4,
            "generic path should be within 1e−4 by 96 nodes"
        );
        let rate = coarse / fine;
        assert!(
            (8.0..40.0).contains(&rate),
            "quadrupling the nodes should cut the error ≈16×, got {rate:.1} \
             ({coarse:.3e} → {fine:.3e})"
        );
    }

    #[test]
    fn scenario_ids_round_trip() {
        for scenario in [Scenario::Bkw, Scenario::BiGaussian, Scenario::Rosenbluth] {
            assert_eq!(Scenario::from_id(scenario.id()).unwrap(), scenario);
            assert_eq!(scenario.id().parse::<Scenario>().unwrap(), scenario);
            let toml = format!("scenario = \"{}\"", scenario.id());
            #[derive(Deserialize)]
            struct Probe {
                scenario: Scenario,
            }
            let probe: Probe = toml::from_str(&toml).unwrap();
            assert_eq!(probe.scenario, scenario);
        }
        assert!(Scenario::from_id("maxwell").is_err());
    }

    #[test]
    fn scenario_densities_are_nonnegative_on_a_grid() {
        for scenario in [Scenario::Bkw, Scenario::BiGaussian, Scenario::Rosenbluth] {
            for i in 0..9 {
                for j in 0..9 {
                    for k in 0..9 {
                        let v = Point3::new(-4.0 + i as f64, -4.0 + j as f64, -4.0 + k as f64);
                        let f = scenario.density(v);
                        assert!(f >= -1e-15, "{scenario} density at {v:?} is {f}");
                    }
                }
            }
        }
    }
}
