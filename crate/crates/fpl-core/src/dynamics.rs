//! Fixed-step time integration of the coefficient ODE system.
//!
//! The integrator is the classical fourth-order Runge–Kutta scheme with a
//! fixed step (default Δt = 0.01) — no adaptivity, so a run is reproducible
//! bit-for-bit on a platform given the same tensor and initial state.  The
//! right-hand side is passed as a closure, which lets the same driver evolve
//! the quadratic, linear, and hybrid models (and lets tests compose their
//! own).
//!
//! [`evolve`] integrates to t_end, recording the macroscopic moments at
//! every step (the t = 0 row first) and full coefficient snapshots at
//! requested times.  Snapshot times snap to the nearest completed step
//! rather than interpolating — at Δt = 0.01 the placement error is at most
//! half a step.

use std::path::PathBuf;

use crate::collision_models::{RhsVector, SpectralState};
use crate::observables::{moments, Moments};
use crate::scenarios::Scenario;
use crate::{Error, Result};

/// A complete run description: scenario, kernel, truncations, integrator
/// grid, and artifact paths.  This is the domain-level mirror of the CLI's
/// configuration file (see [`crate::cli`]).
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Kernel exponent γ ∈ (−5, ∞).
    pub gamma: f64,
    /// Kernel strength Λ > 0.
    pub lambda: f64,
    /// State truncation degree M.
    pub m: usize,
    /// Quadratic truncation degree M₀ ≤ M (equality runs the pure
    /// quadratic model; a strict gap runs the hybrid model).
    pub m0: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Times at which full coefficient snapshots (and marginal files) are
    /// recorded; snapped to the nearest step, clamped to [0, t_end].
    pub snapshots: Vec<f64>,
    /// Path of the precomputed coefficient cache.
    pub cache: PathBuf,
    /// Directory receiving moments.csv and the marginal files.
    pub outdir: PathBuf,
}

impl RunConfig {
    /// Check the numeric invariants: Δt > 0, t_end ≥ 0, M ≥ M₀ ≥ 2, and
    /// finite nonnegative snapshot times.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain {
                name: "dt",
                value: self.dt,
                requirement: "finite and positive",
            });
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Domain {
                name: "t_end",
                value: self.t_end,
                requirement: "finite and nonnegative",
            });
        }
        if self.m0 < 2 || self.m < self.m0 {
            return Err(Error::Config(format!(
                "truncations must satisfy M ≥ M0 ≥ 2, got M = {}, M0 = {}",
                self.m, self.m0
            )));
        }
        for &s in &self.snapshots {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Domain {
                    name: "snapshot time",
                    value: s,
                    requirement: "finite and nonnegative",
                });
            }
        }
        Ok(())
    }
}

/// The record of one run: per-step times and moments (starting with the
/// initial row), full states at the requested snapshot times, and the final
/// state.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// t_k = t₀ + k Δt for every completed step, including k = 0.
    pub times: Vec<f64>,
    /// Macroscopic moments at each entry of `times`.
    pub moments: Vec<Moments>,
    /// (time, state) pairs at the requested snapshot steps, in time order.
    pub snapshots: Vec<(f64, SpectralState)>,
    /// The state after the last step.
    pub final_state: SpectralState,
}

/// Maximum drift of the conserved moments over a trajectory, relative to
/// its initial row.  Conservation is exact at the level of the right-hand
/// side, so these measure integrator roundoff only.
#[derive(Clone, Copy, Debug)]
pub struct ConservationDrift {
    pub rho: f64,
    pub velocity: f64,
    pub theta: f64,
}

impl Trajectory {
    /// Measure the conserved-moment drift against the first recorded row.
    pub fn conservation_drift(&self) -> ConservationDrift {
        let first = &self.moments[0];
        let mut drift = ConservationDrift {
            rho: 0.0,
            velocity: 0.0,
            theta: 0.0,
        };
        for row in &self.moments {
            drift.rho = drift.rho.max((row.rho - first.rho).abs());
            if let (Some(u), Some(u0)) = (row.u, first.u) {
                for (a, b) in u.iter().zip(&u0) {
                    drift.velocity = drift.velocity.max((a - b).abs());
                }
            }
            if let (Some(t), Some(t0)) = (row.theta, first.theta) {
                drift.theta = drift.theta.max((t - t0).abs());
            }
        }
        drift
    }
}

/// One classical Runge–Kutta step of size Δt.
///
/// The right-hand side must return a vector aligned with the state's
/// coefficients.  The stage states carry intermediate times for closures
/// that care, though the collision models are autonomous.  A non-finite
/// result is reported as [`Error::NonFinite`] at the step's target time.
pub fn rk4_step(
    state: &SpectralState,
    dt: f64,
    mut rhs: impl FnMut(&SpectralState) -> Result<RhsVector>,
) -> Result<SpectralState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain {
            name: "dt",
            value: dt,
            requirement: "finite and positive",
        });
    }
    let n = state.coeffs().len();
    let target = state.time() + dt;
    let mut stage = state.clone();
    let advance = |base: &SpectralState, k: &RhsVector, h: f64, t: f64| -> Result<SpectralState> {
        if k.len() != n {
            return Err(Error::InvalidInput(format!(
                "right-hand side returned {} entries for a state of {n}",
                k.len()
            )));
        }
        let mut next = base.clone();
        for (c, dk) in next.coeffs_mut().iter_mut().zip(k) {
            *c += h * dk;
        }
        next.set_time(t);
        Ok(next)
    };

    let k1 = rhs(&stage)?;
    stage = advance(state, &k1, 0.5 * dt, state.time() + 0.5 * dt)?;
    let k2 = rhs(&stage)?;
    stage = advance(state, &k2, 0.5 * dt, state.time() + 0.5 * dt)?;
    let k3 = rhs(&stage)?;
    stage = advance(state, &k3, dt, target)?;
    let k4 = rhs(&stage)?;
    if k4.len() != n {
        return Err(Error::InvalidInput(format!(
            "right-hand side returned {} entries for a state of {n}",
            k4.len()
        )));
    }

    let mut next = state.clone();
    let sixth = dt / 6.0;
    for (i, c) in next.coeffs_mut().iter_mut().enumerate() {
        *c += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    next.set_time(target);
    if next.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite { time: target });
    }
    Ok(next)
}

/// Integrate from `initial` to t₀ + t_end with fixed steps of Δt, recording
/// moments every step and full snapshots at `snapshot_times` (interpreted on
/// the same absolute time axis, snapped to the nearest step).  The number of
/// steps is round(t_end/Δt), so a t_end that is not a multiple of Δt lands
/// on the nearest grid point.  A non-finite state aborts the run as
/// [`Error::Blowup`] with the offending step index.
pub fn evolve(
    initial: &SpectralState,
    dt: f64,
    t_end: f64,
    snapshot_times: &[f64],
    mut rhs: impl FnMut(&SpectralState) -> Result<RhsVector>,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain {
            name: "dt",
            value: dt,
            requirement: "finite and positive",
        });
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Domain {
            name: "t_end",
            value: t_end,
            requirement: "finite and nonnegative",
        });
    }
    let steps = (t_end / dt).round() as usize;
    let t0 = initial.time();
    let snap_steps: std::collections::BTreeSet<usize> = snapshot_times
        .iter()
        .map(|&s| (((s - t0) / dt).round().max(0.0) as usize).min(steps))
        .collect();

    let mut state = initial.clone();
    let mut trajectory = Trajectory {
        times: Vec::with_capacity(steps + 1),
        moments: Vec::with_capacity(steps + 1),
        snapshots: Vec::with_capacity(snap_steps.len()),
        final_state: state.clone(),
    };
    for k in 0..=steps {
        let t = t0 + k as f64 * dt;
        state.set_time(t);
        trajectory.times.push(t);
        trajectory.moments.push(moments(&state));
        if snap_steps.contains(&k) {
            trajectory.snapshots.push((t, state.clone()));
        }
        if k < steps {
            state = rk4_step(&state, dt, &mut rhs).map_err(|e| match e {
                Error::NonFinite { time } => Error::Blowup { step: k + 1, time },
                other => other,
            })?;
        }
    }
    trajectory.final_state = state;
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use std::sync::LazyLock;

    use super::*;
    use crate::collision_kernel::{build_tensor, CollisionTensor, KernelParams};
    use crate::collision_models::{linear_rhs, quadratic_rhs};
    use crate::hermite_burnett::build_conversion;
    use crate::index_space::{IndexSet, MultiIndex};
    use crate::scenarios::bkw_coefficients;

    fn tensor_for(gamma: f64, m0: usize) -> CollisionTensor {
        let params = KernelParams::new(gamma, 1.0).expect("valid params");
        let conv = build_conversion(2 * m0 + 1).expect("conversion table");
        build_tensor(&params, m0, &conv).expect("tensor build")
    }

    static SOFT_TENSOR: LazyLock<CollisionTensor> = LazyLock::new(|| tensor_for(-1.0, 3));
    static BKW_TENSOR: LazyLock<CollisionTensor> = LazyLock::new(|| tensor_for(0.0, 5));

    fn crowded_state(m: usize) -> SpectralState {
        let mut state = SpectralState::maxwellian(m);
        let set = IndexSet::new(m);
        for (rank, alpha) in set.entries().iter().enumerate() {
            if alpha.degree() < 3 {
                continue;
            }
            let c = alpha.components();
            let wobble =
                (1.0 + c[0] as f64).sin() * (2.0 + c[1] as f64).cos() + 0.3 * (c[2] as f64).sin();
            state.coeffs_mut()[rank] = 0.05 * wobble / (1.0 + alpha.degree() as f64);
        }
        state
    }

    fn max_abs_diff(a: &SpectralState, b: &SpectralState) -> f64 {
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn one_step_applies_the_degree_four_taylor_polynomial() {
        let mut state = SpectralState::zero(1);
        state.set_coeff(MultiIndex::new(1, 0, 0), 1.0).unwrap();
        let next = rk4_step(&state, 0.01, |s| Ok(linear_rhs(s))).unwrap();
        let x: f64 = -0.02;
        let taylor = 1.0 + x + x * x / 2.0 + x.powi(3) / 6.0 + x.powi(4) / 24.0;
        let got = next.coeff(MultiIndex::new(1, 0, 0)).unwrap();
        assert!((got - taylor).abs() < 1e-15 * taylor.abs());
        assert!((got - x.exp()).abs() < 1e-10, "fourth order leaves < 1e−10");
        assert_eq!(next.time(), 0.01);
    }

    #[test]
    fn zero_rhs_leaves_the_state_unchanged() {
        let state = crowded_state(3);
        let next = rk4_step(&state, 0.5, |s| Ok(vec![0.0; s.coeffs().len()])).unwrap();
        assert_eq!(next.coeffs(), state.coeffs());
    }

    #[test]
    fn richardson_halving_shows_fifth_order_local_error() {
        let state = crowded_state(3);
        let rhs = |s: &SpectralState| quadratic_rhs(&SOFT_TENSOR, s);
        let local = |dt: f64| {
            let one = rk4_step(&state, dt, rhs).unwrap();
            let half = rk4_step(&rk4_step(&state, dt / 2.0, rhs).unwrap(), dt / 2.0, rhs).unwrap();
            max_abs_diff(&one, &half)
        };
        let ratio = local(0.02) / local(0.01);
        assert!(
            (20.0..48.0).contains(&ratio),
            "halving Δt should cut the one-step defect ≈32×, got {ratio:.1}"
        );
    }

    #[test]
    fn the_integrator_is_fourth_order_on_the_bkw_benchmark() {
        let initial = bkw_coefficients(0.0, 5);
        let rhs = |s: &SpectralState| quadratic_rhs(&BKW_TENSOR, s);
        let t_end = 0.2;
        let run = |dt: f64| evolve(&initial, dt, t_end, &[], rhs).unwrap().final_state;
        let reference = run(0.0025);
        let errors: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&dt| max_abs_diff(&run(dt), &reference))
            .collect();
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(
                (11.0..23.0).contains(&ratio),
                "halving Δt should cut the global error ≈16×, got {ratio:.1} from {errors:?}"
            );
        }
    }

    #[test]
    fn pure_linear_decay_is_integrated_to_high_accuracy() {
        let initial = crowded_state(4);
        let run = evolve(&initial, 0.01, 1.0, &[], |s| Ok(linear_rhs(s))).unwrap();
        let set = IndexSet::new(4);
        for (rank, alpha) in set.entries().iter().enumerate() {
            let exact = initial.coeffs()[rank] * (-2.0 * alpha.degree() as f64).exp();
            let got = run.final_state.coeffs()[rank];
            assert!(
                (got - exact).abs() < 1e-8,
                "mode {alpha} decayed to {got}, expected {exact}"
            );
        }
        assert_eq!(run.times.len(), 101);
        assert!((run.final_state.time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolve_records_moments_and_snaps_snapshots_to_the_grid() {
        let initial = crowded_state(3);
        let run = evolve(&initial, 0.1, 0.3, &[0.0, 0.12, 0.3, 0.55], |s| {
            Ok(linear_rhs(s))
        })
        .unwrap();
        let expected_times = [0.0, 0.1, 0.2, 0.30000000000000004];
        assert_eq!(run.times.len(), 4);
        for (t, e) in run.times.iter().zip(expected_times) {
            assert!((t - e).abs() < 1e-15);
        }
        assert_eq!(run.moments.len(), 4);
        // 0.12 snaps to step 1, 0.55 clamps to the last step, joining 0.3.
        let snap_times: Vec<f64> = run.snapshots.iter().map(|(t, _)| *t).collect();
        assert_eq!(snap_times.len(), 3);
        assert!((snap_times[0] - 0.0).abs() < 1e-15);
        assert!((snap_times[1] - 0.1).abs() < 1e-15);
        assert!((snap_times[2] - 0.3).abs() < 1e-14);
        // The first moments row is the initial state's.
        assert_eq!(run.moments[0].rho, initial.coeffs()[0]);
    }

    #[test]
    fn zero_horizon_yields_only_the_initial_row() {
        let initial = crowded_state(3);
        let run = evolve(&initial, 0.01, 0.0, &[0.0], |s| Ok(linear_rhs(s))).unwrap();
        assert_eq!(run.times, vec![0.0]);
        assert_eq!(run.moments.len(), 1);
        assert_eq!(run.snapshots.len(), 1);
        assert_eq!(run.snapshots[0].1.coeffs(), initial.coeffs());
        assert_eq!(run.final_state.coeffs(), initial.coeffs());
    }

    #[test]
    fn conserved_moments_drift_only_at_roundoff_level() {
        let initial = crowded_state(3);
        let run = evolve(&initial, 0.01, 0.5, &[], |s| quadratic_rhs(&SOFT_TENSOR, s)).unwrap();
        let drift = run.conservation_drift();
        assert!(drift.rho < 1e-12, "density drift {:.3e}", drift.rho);
        assert!(
            drift.velocity < 1e-12,
            "velocity drift {:.3e}",
            drift.velocity
        );
        assert!(drift.theta < 1e-12, "temperature drift {:.3e}", drift.theta);
    }

    #[test]
    fn blowups_and_shape_errors_are_reported() {
        let initial = crowded_state(2);
        let err = evolve(&initial, 0.01, 1.0, &[], |s| {
            Ok(vec![f64::NAN; s.coeffs().len()])
        })
        .unwrap_err();
        match err {
            Error::Blowup { step, time } => {
                assert_eq!(step, 1);
                assert!((time - 0.01).abs() < 1e-15);
            }
            other => panic!("expected a blowup, got {other:?}"),
        }
        assert!(matches!(
            rk4_step(&initial, 0.01, |_| Ok(vec![0.0; 2])),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            rk4_step(&initial, -0.1, |s| Ok(linear_rhs(s))),
            Err(Error::Domain { name: "dt", .. })
        ));
    }

    #[test]
    fn run_config_validation_guards_the_numeric_invariants() {
        let base = RunConfig {
            scenario: Scenario::Bkw,
            gamma: 0.0,
            lambda: 1.0,
            m: 9,
            m0: 5,
            dt: 0.01,
            t_end: 1.0,
            snapshots: vec![0.0, 0.5],
            cache: PathBuf::from("cache.bin"),
            outdir: PathBuf::from("out"),
        };
        base.validate().unwrap();
        // Equality of the truncations (pure quadratic model) is allowed.
        let mut equal = base.clone();
        equal.m0 = 9;
        equal.validate().unwrap();
        let mut bad = base.clone();
        bad.dt = 0.0;
        assert!(bad.validate().is_err());
        bad = base.clone();
        bad.t_end = f64::NAN;
        assert!(bad.validate().is_err());
        bad = base.clone();
        bad.m0 = 1;
        assert!(bad.validate().is_err());
        bad = base.clone();
        bad.m = 4;
        assert!(bad.validate().is_err());
        bad = base.clone();
        bad.snapshots = vec![-0.5];
        assert!(bad.validate().is_err());
    }
}
