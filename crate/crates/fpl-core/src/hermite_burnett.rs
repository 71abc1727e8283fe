//! Change of basis between Cartesian Hermite and spherical Burnett functions.
//!
//! Per polynomial degree d, the probabilists' Hermite polynomials H^α with
//! |α| = d and the Burnett functions B_{(l,m,n)} with l + 2n = d span the
//! same space — the space of degree-d polynomials orthogonal (under the
//! Gaussian weight M) to every lower degree.  The collision integrals
//! separate in the spherical Burnett form while the rest of the solver works
//! with Hermite coefficients, so the bridge between the two is needed up to
//! twice the truncation degree.
//!
//! [`ConversionTable`] stores, degree by degree, the pairing integrals
//!
//! ```text
//! C_{α̂}^α = ∫ B_{α̂}(v) H^α(v) M(v) dv            (no conjugation),
//! ```
//!
//! from which the expansion of a real Hermite polynomial reads
//! H^α = Σ_{α̂} conj(C_{α̂}^α) B_{α̂}.  The table is built by a forward
//! recursion: multiplying a degree-d expansion by a velocity component v_s
//! shifts Burnett indices up and down one degree through the spherical
//! ladder couplings, and the Hermite recurrence H^{β+e_s} = v_s H^β − β_s
//! H^{β−e_s} then yields every degree-(d+1) row.  The recursion is
//! overdetermined in two independent ways — the degree-(d−1) part must
//! reproduce the known lower rows, and any axis with α_s > 0 must produce
//! the same row — and both consistencies are asserted at build time rather
//! than assumed, so a defect in the ladder coefficients cannot propagate
//! silently.

use crate::collision_kernel::coeff_eta;
use crate::index_space::{
    burnett_count_of_degree, burnett_indices_of_degree, multi_indices_of_degree, BurnettIndex,
    MultiIndex,
};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pairing integrals C_{α̂}^α = ∫ B_{α̂} H^α M dv for all |α| = l + 2n up to
/// a maximum degree, stored as one dense complex matrix per degree (the
/// integrals vanish identically across degrees).
pub struct ConversionTable {
    max_degree: usize,
    labels: Vec<Vec<BurnettIndex>>,
    /// blocks[d] is row-major: row = position of α within degree d,
    /// column = position of α̂ within degree d.
    blocks: Vec<Vec<Complex64>>,
}

impl ConversionTable {
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Burnett indices of one degree, in storage (column) order.
    /// Panics if `degree` exceeds the table; gate on [`Self::max_degree`].
    pub fn labels(&self, degree: usize) -> &[BurnettIndex] {
        assert!(
            degree <= self.max_degree,
            "conversion table covers degree {}, requested labels of degree {degree}",
            self.max_degree
        );
        &self.labels[degree]
    }

    /// The row of C values for one Hermite index, over [`Self::labels`] of
    /// the same degree.
    pub fn row(&self, alpha: MultiIndex) -> Result<&[Complex64]> {
        let d = alpha.degree();
        if d > self.max_degree {
            return Err(Error::Capacity(format!(
                "conversion table covers degree {}, requested row of {alpha} (degree {d})",
                self.max_degree
            )));
        }
        let width = burnett_count_of_degree(d);
        let pos = alpha.rank_in_degree();
        Ok(&self.blocks[d][pos * width..(pos + 1) * width])
    }

    /// Single pairing integral.  Mixed-degree pairs are exactly zero by
    /// orthogonality; degrees beyond the table are a capacity error.
    pub fn entry(&self, alpha: MultiIndex, hat: BurnettIndex) -> Result<Complex64> {
        if hat.degree() != alpha.degree() {
            if alpha.degree().max(hat.degree()) > self.max_degree {
                return Err(Error::Capacity(format!(
                    "conversion table covers degree {}, requested ({alpha}, {hat})",
                    self.max_degree
                )));
            }
            return Ok(ZERO);
        }
        Ok(self.row(alpha)?[hat.position_in_degree()])
    }
}

/// The four-target ladder action of the component operators
/// S_{−1} = (v₁ − i v₂)/2, S_0 = v₃, S_{+1} = −(v₁ + i v₂)/2 on a Burnett
/// function, routed into the accumulating degree-(d+1) and degree-(d−1)
/// rows.  All coefficients are real; `weight` carries the complex factor of
/// the velocity-component decomposition.
fn push_ladder_targets(
    mu: i64,
    b: BurnettIndex,
    weight: Complex64,
    up: &mut [Complex64],
    down: &mut [Complex64],
) -> Result<()> {
    let (l, m, n) = (b.l(), b.m(), b.n());
    let il = l as i64;
    let pref = if mu == 0 { 1.0 } else { FRAC_1_SQRT_2 };
    let sign = if mu == 0 { 1.0 } else { -1.0 };
    let e_up = coeff_eta(il + 1, m, mu)?;
    let e_dn = coeff_eta(-il, m, mu)?;
    let m2 = m + mu;
    if e_up != 0.0 {
        let target = BurnettIndex::new(l + 1, m2, n)?;
        up[target.position_in_degree()] +=
            weight * (pref * ((2 * (l + n) + 3) as f64).sqrt() * e_up);
        if n > 0 {
            let target = BurnettIndex::new(l + 1, m2, n - 1)?;
            down[target.position_in_degree()] -= weight * (pref * ((2 * n) as f64).sqrt() * e_up);
        }
    }
    if e_dn != 0.0 && l >= 1 {
        let target = BurnettIndex::new(l - 1, m2, n)?;
        down[target.position_in_degree()] +=
            weight * (sign * pref * ((2 * (n + l) + 1) as f64).sqrt() * e_dn);
        let target = BurnettIndex::new(l - 1, m2, n + 1)?;
        up[target.position_in_degree()] -=
            weight * (sign * pref * ((2 * (n + 1)) as f64).sqrt() * e_dn);
    }
    Ok(())
}

/// Multiply a degree-`src_degree` Burnett expansion by the velocity
/// component `axis` (0-based), returning its degree-(d+1) and degree-(d−1)
/// parts: v₁ = S_{−1} − S_{+1}, v₂ = i (S_{−1} + S_{+1}), v₃ = S_0.
fn apply_velocity_axis(
    axis: usize,
    row: &[Complex64],
    labels: &[BurnettIndex],
    src_degree: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let parts: &[(i64, Complex64)] = match axis {
        0 => &[
            (-1, Complex64::new(1.0, 0.0)),
            (1, Complex64::new(-1.0, 0.0)),
        ],
        1 => &[
            (-1, Complex64::new(0.0, 1.0)),
            (1, Complex64::new(0.0, 1.0)),
        ],
        _ => &[(0, Complex64::new(1.0, 0.0))],
    };
    let mut up = vec![ZERO; burnett_count_of_degree(src_degree + 1)];
    let mut down = vec![
        ZERO;
        if src_degree == 0 {
            0
        } else {
            burnett_count_of_degree(src_degree - 1)
        }
    ];
    for (pos, &c) in row.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        for &(mu, w) in parts {
            push_ladder_targets(mu, labels[pos], w * c, &mut up, &mut down)?;
        }
    }
    Ok((up, down))
}

fn block_row(block: &[Complex64], width: usize, pos: usize) -> &[Complex64] {
    &block[pos * width..(pos + 1) * width]
}

fn max_norm(row: &[Complex64]) -> f64 {
    row.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One step of the forward recursion: the expansion row of H^α obtained by
/// raising the expansion of H^{α − e_axis}, together with the consistency
/// check that the degree-(d−2) part of the product cancels against the
/// known lower rows.
fn raise_row(
    alpha: MultiIndex,
    axis: usize,
    cblocks: &[Vec<Complex64>],
    labels: &[Vec<BurnettIndex>],
) -> Result<Vec<Complex64>> {
    let d = alpha.degree();
    let beta = alpha
        .checked_sub(MultiIndex::unit(axis))
        .expect("axis was checked non-zero");
    let prev_width = burnett_count_of_degree(d - 1);
    let brow = block_row(&cblocks[d - 1], prev_width, beta.rank_in_degree());
    let (up, down) = apply_velocity_axis(axis, brow, &labels[d - 1], d - 1)?;
    // v_axis H^β = H^α + β_axis H^{β − e_axis}: the down part must equal the
    // known degree-(d−2) row scaled by β_axis (or vanish when β_axis = 0).
    // The residual is rounding noise from cancelling entries the size of the
    // raised row, so it is measured against that magnitude — row entries grow
    // like √(α!) and dwarf any absolute yardstick beyond degree ~14.
    let mut residual = 0.0f64;
    let mut scale = max_norm(&up).max(max_norm(brow));
    if d >= 2 {
        let bs = beta.component(axis);
        if bs > 0 {
            let lower = beta
                .checked_sub(MultiIndex::unit(axis))
                .expect("component is positive");
            let lower_width = burnett_count_of_degree(d - 2);
            let lrow = block_row(&cblocks[d - 2], lower_width, lower.rank_in_degree());
            scale = scale.max(max_norm(lrow) * bs as f64);
            for (got, want) in down.iter().zip(lrow) {
                residual = residual.max((got - want * bs as f64).norm());
            }
        } else {
            residual = max_norm(&down);
        }
    }
    if residual > 1e-10 * scale.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "ladder recursion for {alpha} along axis {} left residual {residual:.3e} at scale {scale:.3e}",
            axis + 1
        )));
    }
    Ok(up)
}

/// Build the conversion table for all degrees up to `max_degree`.
///
/// Deterministic; the recursion verifies every row against the redundant
/// lower-degree cancellation and against every alternative raising axis, so
/// the table is internally consistent to 1e−10 (relative to row magnitude)
/// by construction.
pub fn build_conversion(max_degree: usize) -> Result<ConversionTable> {
    let labels: Vec<Vec<BurnettIndex>> = (0..=max_degree).map(burnett_indices_of_degree).collect();
    let mut cblocks: Vec<Vec<Complex64>> = Vec::with_capacity(max_degree + 1);
    cblocks.push(vec![Complex64::new(1.0, 0.0)]);
    for d in 1..=max_degree {
        let width = burnett_count_of_degree(d);
        let indices = multi_indices_of_degree(d);
        let mut block = vec![ZERO; indices.len() * width];
        for (pos, &alpha) in indices.iter().enumerate() {
            let mut chosen: Option<Vec<Complex64>> = None;
            for axis in 0..3 {
                if alpha.component(axis) == 0 {
                    continue;
                }
                let row = raise_row(alpha, axis, &cblocks, &labels)?;
                match &chosen {
                    None => chosen = Some(row),
                    Some(reference) => {
                        let scale = max_norm(reference).max(1.0);
                        for (a, b) in reference.iter().zip(&row) {
                            if (a - b).norm() > 1e-10 * scale {
                                return Err(Error::Inconsistent(format!(
                                    "raising axes disagree on the expansion of {alpha} \
                                     (difference {:.3e} at scale {scale:.3e})",
                                    (a - b).norm()
                                )));
                            }
                        }
                    }
                }
            }
            let row = chosen.expect("every index of degree >= 1 has a positive component");
            block[pos * width..(pos + 1) * width].copy_from_slice(&row);
        }
        cblocks.push(block);
    }
    // The recursion naturally produces the expansion coefficients c (from
    // H^α = Σ c B); the stored pairing integrals are their conjugates.
    let blocks = cblocks
        .into_iter()
        .map(|b| b.into_iter().map(|z| z.conj()).collect())
        .collect();
    Ok(ConversionTable {
        max_degree,
        labels,
        blocks,
    })
}

/// Convert the Hermite coefficients of one degree into Burnett coefficients:
/// given f restricted to degree d as (f_α), returns (f̂_{α̂}) with
/// f̂_{α̂} = Σ_α f_α conj(C_{α̂}^α), both in the storage orders of
/// [`multi_indices_of_degree`] and [`ConversionTable::labels`].
pub fn convert_hermite_to_burnett(
    table: &ConversionTable,
    degree: usize,
    hermite: &[f64],
) -> Result<Vec<Complex64>> {
    if degree > table.max_degree() {
        return Err(Error::Capacity(format!(
            "conversion table covers degree {}, requested degree {degree}",
            table.max_degree()
        )));
    }
    let width = burnett_count_of_degree(degree);
    if hermite.len() != width {
        return Err(Error::InvalidInput(format!(
            "degree {degree} has {width} coefficients, got {}",
            hermite.len()
        )));
    }
    let mut out = vec![ZERO; width];
    for (pos, &f) in hermite.iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        let row = block_row(&table.blocks[degree], width, pos);
        for (o, &c) in out.iter_mut().zip(row) {
            *o += c.conj() * f;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_functions::{burnett_eval, hermite_eval, Point3};
    use crate::index_space::IndexSet;
    use crate::quadrature::gauss_hermite_rule;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn c(table: &ConversionTable, a: (usize, usize, usize), b: (usize, i64, usize)) -> Complex64 {
        table
            .entry(
                MultiIndex::new(a.0, a.1, a.2),
                BurnettIndex::new(b.0, b.1, b.2).unwrap(),
            )
            .unwrap()
    }

    #[test]
    fn low_degree_entries_match_closed_forms() {
        let table = build_conversion(2).unwrap();
        assert_abs_diff_eq!(c(&table, (0, 0, 0), (0, 0, 0)).re, 1.0, epsilon = 1e-14);
        // H^{e3} = B_{(1,0,0)}.
        assert_abs_diff_eq!(c(&table, (0, 0, 1), (1, 0, 0)).re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c(&table, (0, 0, 1), (1, 0, 0)).im, 0.0, epsilon = 1e-14);
        // H^{e1} = (B_{(1,−1,0)} − B_{(1,1,0)})/√2.
        assert_abs_diff_eq!(
            c(&table, (1, 0, 0), (1, -1, 0)).re,
            1.0 / SQRT_2,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            c(&table, (1, 0, 0), (1, 1, 0)).re,
            -1.0 / SQRT_2,
            epsilon = 1e-14
        );
        // H^{e2} pairs to −i/√2 on both m = ±1 (the pairing has no
        // conjugation, so both integrals carry the same sign of i).
        for m in [-1i64, 1] {
            let z = c(&table, (0, 1, 0), (1, m, 0));
            assert_abs_diff_eq!(z.re, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(z.im, -1.0 / SQRT_2, epsilon = 1e-14);
        }
        // Cross-degree entries vanish identically.
        assert_eq!(
            table
                .entry(
                    MultiIndex::new(0, 0, 2),
                    BurnettIndex::new(1, 0, 0).unwrap()
                )
                .unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn entries_match_direct_quadrature() {
        // C_{α̂}^α = ∫ B_{α̂} H^α M dv on a tensor Gauss-Hermite grid, which
        // is exact for these polynomial integrands.
        let table = build_conversion(3).unwrap();
        let rule = gauss_hermite_rule(8);
        for d in 0..=3usize {
            let hats = burnett_indices_of_degree(d);
            for alpha in multi_indices_of_degree(d) {
                for &hat in &hats {
                    let mut quad = Complex64::new(0.0, 0.0);
                    for (&x1, &w1) in rule.nodes.iter().zip(&rule.weights) {
                        for (&x2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                            for (&x3, &w3) in rule.nodes.iter().zip(&rule.weights) {
                                let v = Point3::new(x1, x2, x3);
                                quad +=
                                    burnett_eval(hat, v) * hermite_eval(alpha, v) * (w1 * w2 * w3);
                            }
                        }
                    }
                    let stored = table.entry(alpha, hat).unwrap();
                    assert_abs_diff_eq!(stored.re, quad.re, epsilon = 1e-10);
                    assert_abs_diff_eq!(stored.im, quad.im, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn rows_satisfy_the_gram_identity() {
        // Σ_{α̂} C_{α̂}^α conj(C_{α̂}^β) = δ_{αβ} α!, checked in normalized
        // form so the tolerance is meaningful at every degree.
        let table = build_conversion(10).unwrap();
        for d in 0..=10usize {
            let indices = multi_indices_of_degree(d);
            for &a in &indices {
                let ra = table.row(a).unwrap();
                for &b in &indices {
                    let rb = table.row(b).unwrap();
                    let dot: Complex64 = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum();
                    if a == b {
                        let fact = a.factorial();
                        assert_abs_diff_eq!(dot.re / fact, 1.0, epsilon = 1e-10);
                        assert_abs_diff_eq!(dot.im / fact, 0.0, epsilon = 1e-10);
                    } else {
                        let norm = (a.factorial() * b.factorial()).sqrt();
                        assert_abs_diff_eq!(dot.norm() / norm, 0.0, epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn conversion_reconstructs_pointwise_values() {
        let table = build_conversion(4).unwrap();
        let points = [
            Point3::new(0.3, -0.7, 1.1),
            Point3::new(1.4, 0.2, -0.5),
            Point3::new(-1.9, 0.8, 0.6),
        ];
        for d in 0..=4usize {
            let indices = multi_indices_of_degree(d);
            // A fixed, non-symmetric coefficient vector.
            let coeffs: Vec<f64> = (0..indices.len())
                .map(|i| 0.25 + 0.5 * i as f64 - 0.1 * (i as f64).powi(2))
                .collect();
            let hats = convert_hermite_to_burnett(&table, d, &coeffs).unwrap();
            let labels = table.labels(d);
            for &v in &points {
                let hermite_side: f64 = indices
                    .iter()
                    .zip(&coeffs)
                    .map(|(&a, &f)| f * hermite_eval(a, v))
                    .sum();
                let burnett_side: Complex64 = labels
                    .iter()
                    .zip(&hats)
                    .map(|(&hat, &fh)| burnett_eval(hat, v) * fh)
                    .sum();
                assert_abs_diff_eq!(burnett_side.im, 0.0, epsilon = 1e-10);
                assert_abs_diff_eq!(hermite_side, burnett_side.re, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn capacity_and_shape_errors() {
        let table = build_conversion(3).unwrap();
        assert!(table.row(MultiIndex::new(2, 2, 0)).is_err());
        assert!(matches!(
            table.entry(
                MultiIndex::new(4, 0, 0),
                BurnettIndex::new(1, 0, 0).unwrap()
            ),
            Err(crate::Error::Capacity(_))
        ));
        assert!(convert_hermite_to_burnett(&table, 4, &[0.0; 15]).is_err());
        assert!(matches!(
            convert_hermite_to_burnett(&table, 2, &[1.0; 4]),
            Err(crate::Error::InvalidInput(_))
        ));
    }

    #[test]
    fn build_is_deterministic() {
        let a = build_conversion(6).unwrap();
        let b = build_conversion(6).unwrap();
        for d in 0..=6usize {
            for alpha in multi_indices_of_degree(d) {
                let ra = a.row(alpha).unwrap();
                let rb = b.row(alpha).unwrap();
                for (x, y) in ra.iter().zip(rb) {
                    assert_eq!(x.re.to_bits(), y.re.to_bits());
                    assert_eq!(x.im.to_bits(), y.im.to_bits());
                }
            }
        }
    }

    #[test]
    fn table_sizes_track_the_index_space() {
        let table = build_conversion(7).unwrap();
        assert_eq!(table.max_degree(), 7);
        for d in 0..=7usize {
            assert_eq!(table.labels(d).len(), burnett_count_of_degree(d));
            assert_eq!(multi_indices_of_degree(d).len(), burnett_count_of_degree(d));
        }
        // Index-set sizing sanity used throughout the solver.
        assert_eq!(IndexSet::size_for(7), (8 * 9 * 10) / 6);
    }
}
