//! Right-hand sides of the coefficient ODE system.
//!
//! With the distribution expanded as f = Σ_α f_α H^α M, the collision
//! operator becomes a bilinear form in the coefficient vector.  Three models
//! are provided:
//!
//! * the full *quadratic* Galerkin operator truncated at degree M₀,
//!   Q_α = Σ_{λ,κ ∈ I_{M₀}} A_α^{λ,κ} f_λ f_κ, contracted from the
//!   precomputed sparse tensor of [`crate::collision_kernel`];
//! * the *linear* Fokker–Planck operator, which is diagonal in the Hermite
//!   basis with eigenvalue −(D−1)|α| = −2|α| in three dimensions;
//! * the *hybrid* model: quadratic on the resolved degrees ≤ M₀ and linear
//!   on the tail degrees M₀ < |α| ≤ M, combining the accuracy of the former
//!   with the O(|I_M|) cost of the latter where coefficients are small.
//!
//! All three share the conservation structure of the continuous operator:
//! the entries at α ∈ {0, e₁, e₂, e₃} vanish and Σᵢ rhs_{2eᵢ} = 0, so mass,
//! momentum, and energy are invariant at the level of the right-hand side
//! (the invariant indices all lie in I_{M₀} because M₀ ≥ 2).

use rayon::prelude::*;

use crate::collision_kernel::CollisionTensor;
use crate::index_space::{IndexSet, MultiIndex};
use crate::{Error, Result};

/// Spectral coefficients f_α over the graded index set I_M, together with
/// the simulation time they belong to.
///
/// The coefficient vector is dense in the graded-lexicographic rank order of
/// [`crate::index_space`]; thanks to the prefix property of that order the
/// first |I_{M'}| entries of a degree-M state are exactly its restriction to
/// I_{M'} for any M' ≤ M.
///
/// A state normalized to unit density, zero bulk velocity, and unit
/// temperature has f₀ = 1, f_{eᵢ} = 0, and Σᵢ f_{2eᵢ} = 0; the scenario
/// constructors enforce this (see [`SpectralState::check_normalized`]) and
/// evolution preserves it up to integrator roundoff.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    m: usize,
    coeffs: Vec<f64>,
    t: f64,
}

impl SpectralState {
    /// Wrap a coefficient vector over I_M at time `t`.  The vector length
    /// must be exactly |I_M| = (M+1)(M+2)(M+3)/6.
    pub fn new(m: usize, coeffs: Vec<f64>, t: f64) -> Result<SpectralState> {
        let expected = IndexSet::size_for(m);
        if coeffs.len() != expected {
            return Err(Error::InvalidInput(format!(
                "state of degree {m} needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(SpectralState { m, coeffs, t })
    }

    /// The zero state over I_M at time 0.
    pub fn zero(m: usize) -> SpectralState {
        SpectralState {
            m,
            coeffs: vec![0.0; IndexSet::size_for(m)],
            t: 0.0,
        }
    }

    /// The global Maxwellian: f₀ = 1 and every other coefficient zero.
    pub fn maxwellian(m: usize) -> SpectralState {
        let mut state = SpectralState::zero(m);
        state.coeffs[0] = 1.0;
        state
    }

    /// Truncation degree M.
    pub fn degree(&self) -> usize {
        self.m
    }

    /// Simulation time the coefficients belong to.
    pub fn time(&self) -> f64 {
        self.t
    }

    /// Overwrite the simulation time (used by the integrator).
    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    /// The dense coefficient vector in graded-lexicographic rank order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mutable access to the coefficient vector.
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// The coefficient f_α, or an error if |α| exceeds the truncation.
    pub fn coeff(&self, alpha: MultiIndex) -> Result<f64> {
        if alpha.degree() > self.m {
            return Err(Error::IndexNotFound {
                index: alpha,
                degree: alpha.degree(),
                max_degree: self.m,
            });
        }
        Ok(self.coeffs[alpha.graded_rank()])
    }

    /// Set the coefficient f_α, or an error if |α| exceeds the truncation.
    pub fn set_coeff(&mut self, alpha: MultiIndex, value: f64) -> Result<()> {
        if alpha.degree() > self.m {
            return Err(Error::IndexNotFound {
                index: alpha,
                degree: alpha.degree(),
                max_degree: self.m,
            });
        }
        self.coeffs[alpha.graded_rank()] = value;
        Ok(())
    }

    /// The restriction of the coefficient vector to I_{M₀} (a prefix slice).
    /// Requires M₀ ≤ M.
    pub fn prefix(&self, m0: usize) -> Result<&[f64]> {
        if m0 > self.m {
            return Err(Error::InvalidInput(format!(
                "cannot restrict a degree-{} state to degree {m0}",
                self.m
            )));
        }
        Ok(&self.coeffs[..IndexSet::size_for(m0)])
    }

    /// Verify the unit-density / zero-velocity / unit-temperature
    /// normalization: |f₀ − 1|, |f_{eᵢ}|, |Σᵢ f_{2eᵢ}| ≤ `tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let rho_dev = (self.coeffs[0] - 1.0).abs();
        let mut vel_dev: f64 = 0.0;
        let mut energy_dev = 0.0;
        for axis in 0..3 {
            vel_dev = vel_dev.max(self.coeff(MultiIndex::unit(axis))?.abs());
            let two = MultiIndex::unit(axis) + MultiIndex::unit(axis);
            energy_dev += self.coeff(two)?;
        }
        if rho_dev > tol || vel_dev > tol || energy_dev.abs() > tol {
            return Err(Error::Inconsistent(format!(
                "state is not normalized: |f_0 - 1| = {rho_dev:.3e}, \
                 max |f_(e_i)| = {vel_dev:.3e}, |Σ f_(2e_i)| = {:.3e} (tol {tol:.1e})",
                energy_dev.abs()
            )));
        }
        Ok(())
    }
}

/// A dense right-hand-side vector, aligned with the coefficient vector of
/// the state it was computed from (over I_{M₀} for [`quadratic_rhs`], over
/// I_M for [`linear_rhs`] and [`hybrid_rhs`]).
pub type RhsVector = Vec<f64>;

/// The full quadratic Galerkin right-hand side over I_{M₀},
///
/// ```text
/// Q_α = Σ_{λ,κ ∈ I_{M₀}} A_α^{λ,κ} f_λ f_κ ,
/// ```
///
/// contracted by gathering the tensor's sparse rows.  The state may have any
/// degree M ≥ M₀; only its I_{M₀} prefix enters.  Entries are computed in
/// parallel, each as a sequential gather, so the result is deterministic.
pub fn quadratic_rhs(tensor: &CollisionTensor, state: &SpectralState) -> Result<RhsVector> {
    if state.degree() < tensor.m0() {
        return Err(Error::Config(format!(
            "state of degree {} cannot drive a tensor truncated at {}",
            state.degree(),
            tensor.m0()
        )));
    }
    let f = state.prefix(tensor.m0())?;
    let rhs = (0..tensor.row_count())
        .into_par_iter()
        .map(|rank| {
            let (pairs, values) = tensor.row(rank);
            let mut total = 0.0;
            for (&(lam, kap), &a) in pairs.iter().zip(values) {
                total += a * f[lam as usize] * f[kap as usize];
            }
            total
        })
        .collect();
    Ok(rhs)
}

/// The linear Fokker–Planck right-hand side over I_M: the operator is
/// diagonal in the Hermite basis, with entry −(D−1)|α| f_α = −2|α| f_α in
/// three dimensions.
pub fn linear_rhs(state: &SpectralState) -> RhsVector {
    let mut rhs = Vec::with_capacity(state.coeffs().len());
    let mut start = 0;
    for degree in 0..=state.degree() {
        let block = (degree + 1) * (degree + 2) / 2;
        let rate = -2.0 * degree as f64;
        rhs.extend(
            state.coeffs()[start..start + block]
                .iter()
                .map(|f| rate * f),
        );
        start += block;
    }
    rhs
}

/// The hybrid right-hand side over I_M: quadratic entries for |α| ≤ M₀
/// (same code path as [`quadratic_rhs`], so the resolved degrees agree
/// exactly), linear entries −2|α| f_α for M₀ < |α| ≤ M.  Requires a strict
/// truncation gap M > M₀; with M = M₀ there is no tail to model and
/// [`quadratic_rhs`] should be used directly.
pub fn hybrid_rhs(tensor: &CollisionTensor, state: &SpectralState) -> Result<RhsVector> {
    if state.degree() <= tensor.m0() {
        return Err(Error::Config(format!(
            "hybrid model needs M > M0, got M = {} with M0 = {}",
            state.degree(),
            tensor.m0()
        )));
    }
    let mut rhs = quadratic_rhs(tensor, state)?;
    rhs.reserve(state.coeffs().len() - rhs.len());
    let mut start = IndexSet::size_for(tensor.m0());
    for degree in tensor.m0() + 1..=state.degree() {
        let block = (degree + 1) * (degree + 2) / 2;
        let rate = -2.0 * degree as f64;
        rhs.extend(
            state.coeffs()[start..start + block]
                .iter()
                .map(|f| rate * f),
        );
        start += block;
    }
    Ok(rhs)
}
