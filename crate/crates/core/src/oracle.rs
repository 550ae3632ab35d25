//! Brute-force ground truth by monomial counting.
//!
//! Nothing here touches the sector machinery: sections of `O(a)` on `P(w)` are
//! the monomials of weighted degree `a`, and invariant sections on a cyclic
//! quotient are the monomials whose character vanishes.

use crate::error::{Error, Result};

fn count_rec(weights: &[u64], remaining: u64) -> u64 {
    match weights {
        [] => u64::from(remaining == 0),
        [w] => u64::from(remaining % w == 0),
        [w, rest @ ..] => (0..=remaining / w).map(|e| count_rec(rest, remaining - e * w)).sum(),
    }
}

/// `#{alpha >= 0 : sum alpha_i w_i = a}`.
pub fn count_weighted_monomials(weights: &[u64], a: i64) -> Result<u64> {
    if a < 0 {
        return Err(Error::OracleUndefined(a));
    }
    Ok(count_rec(weights, a as u64))
}

/// `chi(P(w), O(a))` for any integer `a`: sections in degree `a` plus, through Serre
/// duality with `K = O(-sum w)`, the top cohomology counted in degree `-a - sum w`.
pub fn weighted_euler(weights: &[u64], a: i64) -> i64 {
    let n = weights.len() as i64 - 1;
    let total: i64 = weights.iter().map(|&w| w as i64).sum();
    let h0 = count_rec(weights, a.max(0) as u64) as i64 * i64::from(a >= 0);
    let dual = -a - total;
    let hn = if dual >= 0 { count_rec(weights, dual as u64) as i64 } else { 0 };
    h0 + if n % 2 == 0 { hn } else { -hn }
}

/// Degree-`a` monomials `x^alpha` on `P^n` with `sum alpha_i t_i + shift = 0 mod m`.
pub fn count_invariant_monomials(order: u64, action: &[u64], a: i64, shift: i64) -> Result<u64> {
    if a < 0 {
        return Err(Error::OracleUndefined(a));
    }
    fn rec(action: &[u64], remaining: u64, acc: u64, m: u64) -> u64 {
        match action {
            [] => u64::from(remaining == 0 && acc % m == 0),
            [t, rest @ ..] => (0..=remaining)
                .map(|e| rec(rest, remaining - e, (acc + e * t) % m, m))
                .sum(),
        }
    }
    let start = shift.rem_euclid(order as i64) as u64;
    Ok(rec(action, a as u64, start, order))
}

/// `chi(Y, O(a)) - chi(Y, O(a - d))`: the Euler characteristic of `O(a)` on a
/// hypersurface of degree `d`.
pub fn hypersurface_difference(weights: &[u64], d: i64, a: i64) -> i64 {
    weighted_euler(weights, a) - weighted_euler(weights, a - d)
}

/// `chi(Y, O(a) * prod_j (1 - O(-d_j)))` by inclusion-exclusion over subsets of degrees.
pub fn complete_intersection_euler(weights: &[u64], degrees: &[i64], a: i64) -> i64 {
    (0u32..1 << degrees.len())
        .map(|mask| {
            let shift: i64 = (0..degrees.len())
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| degrees[j])
                .sum();
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            sign * weighted_euler(weights, a - shift)
        })
        .sum()
}

/// `C(n, k)` for `n >= 0`, `0 <= k`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}
