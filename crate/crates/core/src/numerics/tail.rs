//! One-dimensional odd-power tails `Σ_{m>M} (2m−1)^(−k)`.
//!
//! The summand `(2x−1)^(−k)` is completely monotone on `x > 1/2`, so after
//! summing directly up to a cutoff the Euler–Maclaurin remainder following the
//! `B_{2p}` term is bounded by the magnitude of the first omitted term. The
//! result is intersected with the integral-comparison bracket.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::constants::bernoulli_even;
use super::constants::factorial;
use super::enclosure::Enclosure;
use crate::error::TvError;

/// Parameters of one rung of the precision ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rung {
    /// Requested precision in bits.
    pub bits: u32,
    /// Fixed-point precision used internally.
    pub work_prec: u32,
    /// Summation index at which the asymptotic expansion takes over.
    pub cutoff: u64,
    /// Truncation order of the asymptotic expansion in `1/a`.
    pub order: usize,
}

impl Rung {
    pub fn for_bits(bits: u32) -> Self {
        let order = ((bits + 32) / 6 + 4) as usize;
        Self {
            bits,
            work_prec: bits + 64,
            cutoff: 16 * order as u64,
            order,
        }
    }
}

/// Integral-comparison bracket for `Σ_{m>M} (2m−1)^(−k)`, `k >= 2`.
pub fn coarse_tail_bounds(k: u32, m: u64, prec: u32) -> Result<Enclosure, TvError> {
    check_exponent(k)?;
    if m == 0 {
        return Ok(coarse_tail_bounds(k, 1, prec)?.add(&Enclosure::one(prec)));
    }
    let den_factor = BigInt::from(2 * (k - 1));
    let lower_base = BigInt::from(2 * m + 1).pow(k - 1);
    let upper_base = BigInt::from(2 * m - 1).pow(k - 1);
    let lo = Enclosure::from_ratio(&BigInt::one(), &(lower_base * &den_factor), prec);
    let hi = Enclosure::from_ratio(&BigInt::one(), &(upper_base * &den_factor), prec);
    Ok(lo.hull(&hi))
}

fn check_exponent(k: u32) -> Result<(), TvError> {
    if k <= 1 {
        return Err(TvError::Divergent(format!(
            "Σ (2m−1)^(−{k}) diverges; the exponent must be at least 2"
        )));
    }
    Ok(())
}

/// Enclosure of `(2m−1)^(−k)`.
pub fn odd_power(k: u32, m: u64, prec: u32) -> Enclosure {
    let base = BigInt::from(2 * m - 1).pow(k);
    Enclosure::from_ratio(&BigInt::one(), &base, prec)
}

/// `Σ_{m>cut} (2m−1)^(−k)` by Euler–Maclaurin at `a = cut + 1/2`, `cut >= 1`.
///
/// With `u = 2·cut + 1` the expansion reads
/// `u^(1−k)/(2(k−1)) + u^(−k)/2 + Σ_j B_{2j}/(2j)! (k)_{2j−1} 2^(2j−1) u^(−(k+2j−1))`.
pub(crate) fn euler_maclaurin_tail(k: u32, cut: u64, prec: u32) -> Enclosure {
    debug_assert!(k >= 2 && cut >= 1);
    let u = BigInt::from(2 * cut + 1);
    let one = BigInt::one();
    let mut sum = Enclosure::from_ratio(&one, &(u.pow(k - 1) * BigInt::from(2 * (k - 1))), prec)
        .add(&Enclosure::from_ratio(&one, &(u.pow(k) * 2), prec));
    // rising = (k)_{2j−1}
    let mut rising = BigInt::from(k);
    let mut upow = u.pow(k + 1);
    let u2 = &u * &u;
    let max_terms = 4 * prec as usize + 8;
    for j in 1..=max_terms {
        let (bn, bd) = bernoulli_even(j);
        let num = &bn * &rising * (BigInt::one() << (2 * j - 1));
        let den = bd * factorial(2 * j as u64) * &upow;
        let term = Enclosure::from_ratio(&num, &den, prec);
        if term.mag_mantissa() <= one || j == max_terms {
            // Completely monotone summand: the remainder is no larger than
            // this first omitted term.
            return sum.pm(&term);
        }
        sum = sum.add(&term);
        rising *= BigInt::from((k as usize + 2 * j - 1) * (k as usize + 2 * j));
        upow *= &u2;
    }
    unreachable!("loop returns at max_terms")
}

/// Enclosure of `Σ_{m>M} (2m−1)^(−k)` at the given precision.
///
/// Width shrinks geometrically with `bits`; fails for `k <= 1`.
pub fn odd_power_tail(k: u32, m: u64, bits: u32) -> Result<Enclosure, TvError> {
    check_exponent(k)?;
    if bits < 16 {
        return Err(TvError::InvalidArgument(format!(
            "precision must be at least 16 bits, got {bits}"
        )));
    }
    let rung = Rung::for_bits(bits);
    Ok(odd_power_tail_at(k, m, &rung))
}

pub(crate) fn odd_power_tail_at(k: u32, m: u64, rung: &Rung) -> Enclosure {
    let w = rung.work_prec;
    let cut = rung.cutoff.max(m).max(1);
    let mut direct = Enclosure::zero(w);
    for i in (m + 1)..=cut {
        direct = direct.add(&odd_power(k, i, w));
    }
    let em = euler_maclaurin_tail(k, cut, w);
    let value = direct.add(&em);
    match coarse_tail_bounds(k, m, w) {
        Ok(bracket) => value.intersect(&bracket).unwrap_or(value),
        Err(_) => value,
    }
}

/// Exact sum `Σ_{lo < m <= hi} (2m−1)^(−k)` enclosed at `prec` bits.
pub fn odd_power_partial(k: u32, lo: u64, hi: u64, prec: u32) -> Enclosure {
    let mut s = Enclosure::zero(prec);
    for m in (lo + 1)..=hi {
        s = s.add(&odd_power(k, m, prec));
    }
    if s.is_point() && s.lo_mantissa().is_zero() {
        return Enclosure::zero(prec);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::constants::const_pi;

    #[test]
    fn t2_is_pi_squared_over_eight() {
        let t = odd_power_tail(2, 0, 128).unwrap();
        let pi = const_pi(160).unwrap();
        let want = pi.square().div_u64(8);
        assert!(t.overlaps(&want));
        assert!(t.width_at_most(1e-35));
    }

    #[test]
    fn t2_tail_one_is_pi_squared_over_eight_minus_one() {
        let t = odd_power_tail(2, 1, 96).unwrap();
        let want = const_pi(128).unwrap().square().div_u64(8).sub(&Enclosure::one(128));
        assert!(t.overlaps(&want));
    }

    #[test]
    fn t4_is_pi_fourth_over_96() {
        let t = odd_power_tail(4, 0, 96).unwrap();
        let want = const_pi(128).unwrap().powi(4).div_u64(96);
        assert!(t.overlaps(&want));
        // direct summation oracle: partial sum plus integral bracket
        let p = 80;
        let partial = odd_power_partial(4, 0, 2000, p);
        let rest = coarse_tail_bounds(4, 2000, p).unwrap();
        assert!(partial.add(&rest).overlaps(&t));
    }

    #[test]
    fn divergent_exponents_rejected() {
        assert!(matches!(odd_power_tail(1, 0, 64), Err(TvError::Divergent(_))));
        assert!(matches!(odd_power_tail(0, 3, 64), Err(TvError::Divergent(_))));
    }

    #[test]
    fn large_offsets_skip_direct_summation() {
        let t = odd_power_tail(3, 1_000_000, 64).unwrap();
        let c = coarse_tail_bounds(3, 1_000_000, 128).unwrap();
        assert!(c.contains(&t.with_prec(128)) || c.overlaps(&t));
        assert!(t.lo_f64() > 0.0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn telescoping_step(k in 2u32..9, m in 0u64..400) {
            let a = odd_power_tail(k, m, 64).unwrap();
            let b = odd_power_tail(k, m + 1, 64).unwrap();
            let term = odd_power(k, m + 1, a.prec());
            proptest::prop_assert!(b.add(&term).overlaps(&a));
            proptest::prop_assert!(b.certainly_lt(&a));
        }

        #[test]
        fn inside_coarse_bracket_and_nested(k in 2u32..12, m in 0u64..5000) {
            let a = odd_power_tail(k, m, 64).unwrap();
            let b = odd_power_tail(k, m, 128).unwrap();
            let c = coarse_tail_bounds(k, m, 200).unwrap();
            proptest::prop_assert!(a.overlaps(&b));
            proptest::prop_assert!(c.overlaps(&b));
        }
    }
}
