//! The precision-inflation table.
//!
//! Every slack constant that converts a requested output precision into the
//! precisions of intermediate queries lives here, so the error budgets can
//! be audited in one place. All slacks are in bits: a slack of `k` at
//! output precision `n` means intermediate work happens at `n + k`.

use crate::dyadic::Dyadic;

/// Each operand of an addition or subtraction is queried one bit finer.
pub const ADD_ARG: u32 = 1;

/// Extra bits beyond the magnitude bound in a multiplication
/// (bounds come from querying at precision 0 and inflating by 1).
pub const MUL_GUARD: u32 = 3;

/// A square root at output precision `n` queries its argument at `2n + 2`,
/// using `|sqrt a - sqrt b| <= sqrt|a - b|`.
pub fn sqrt_arg(n: u32) -> u32 {
    2 * n + 2
}

/// Slack of the strict-order probe: stage `s` compares queries at
/// precision `s` against a gap of `2^(-s+1)`.
pub fn lt_gap(stage: u64) -> Dyadic {
    Dyadic::pow2(1 - stage_prec(stage) as i64)
}

/// Stages are clamped into the precision range.
pub fn stage_prec(stage: u64) -> u32 {
    stage.min(u32::MAX as u64) as u32
}

/// Bound collapse required of `real_from_bounds` at output precision `n`.
pub fn bounds_gap(n: u32) -> Dyadic {
    Dyadic::pow2(1 - (n as i64))
}

/// Per-coordinate precision of a vector query at Euclidean precision `n`.
pub fn vec_coord(n: u32, dim: usize) -> u32 {
    n + ceil_log2_usize(dim) + 1
}

/// Truncation index of a weighted map series: `n + ceil(log2 B) + 2`
/// terms, where `B` bounds the norms over the domain.
pub fn series_cutoff(n: u32, norm_bound: &Dyadic) -> u32 {
    let lb = norm_bound.ceil_log2().unwrap_or(0).max(0) as u32;
    n + lb + 2
}

/// Term `k` of a weighted map series is evaluated at `n + k + 2`.
pub fn series_term(n: u32, k: u32) -> u32 {
    n + k + 2
}

/// Prefix length and per-coordinate precision of a strong cube embedding.
pub fn cube_prefix(n: u32) -> (u32, u32) {
    let coords = n + 2; // indices 0..=n+1
    (coords, 2 * n + 2 + ceil_log2_usize(coords as usize))
}

/// Smallest `k` with `m <= 2^k`.
pub fn ceil_log2_usize(m: usize) -> u32 {
    debug_assert!(m > 0);
    (usize::BITS - (m - 1).leading_zeros()).min(u32::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2_usize(1), 0);
        assert_eq!(ceil_log2_usize(2), 1);
        assert_eq!(ceil_log2_usize(3), 2);
        assert_eq!(ceil_log2_usize(4), 2);
        assert_eq!(ceil_log2_usize(5), 3);
    }

    #[test]
    fn vec_coord_covers_euclidean_error(/* dim * 2^-2(n+ceil+1) <= 2^-2n */) {
        for dim in 1..=8usize {
            for n in 0..=10u32 {
                let per = vec_coord(n, dim);
                // dim * (2^-per)^2 <= (2^-n)^2
                let lhs = Dyadic::from_int(dim as i64)
                    .scale_pow2(-2 * (per as i64));
                let rhs = Dyadic::pow2(-2 * (n as i64));
                assert!(lhs <= rhs, "dim {dim} n {n}");
            }
        }
    }
}
