//! Small shared numeric helpers (factorials, generalized binomials).

use std::sync::OnceLock;

/// Largest n with n! representable in f64 (171! overflows).
pub(crate) const MAX_FACTORIAL: usize = 170;

fn factorial_table() -> &'static [f64; MAX_FACTORIAL + 1] {
    static TABLE: OnceLock<[f64; MAX_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_FACTORIAL + 1];
        for n in 1..=MAX_FACTORIAL {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

/// n! as f64.  Exact for n ≤ 22, correctly rounded beyond.
///
/// Panics for n > 170 (not representable); callers work with polynomial
/// degrees far below that bound.
pub(crate) fn factorial(n: usize) -> f64 {
    factorial_table()[n]
}

/// Generalized binomial coefficient binom(x, k) = x(x−1)…(x−k+1)/k! for
/// real upper argument, via the falling factorial.
pub(crate) fn binomial_real(x: f64, k: usize) -> f64 {
    let mut num = 1.0;
    for j in 0..k {
        num *= x - j as f64;
    }
    num / factorial(k)
}

/// Γ(x) for x > 0 on the moderate ranges used here.
pub(crate) fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}
