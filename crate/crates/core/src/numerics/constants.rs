//! π, Catalan's constant, Euler (secant) numbers and Bernoulli numbers.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::enclosure::Enclosure;
use crate::error::TvError;

const GUARD_BITS: u32 = 32;

fn check_precision(bits: u32) -> Result<(), TvError> {
    if bits < 16 {
        return Err(TvError::InvalidArgument(format!(
            "precision must be at least 16 bits, got {bits}"
        )));
    }
    Ok(())
}

/// `arctan(1/x)` for an integer `x >= 2`, by the alternating Gregory series.
fn arctan_inv(x: u64, prec: u32) -> Enclosure {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut pow = BigInt::from(x);
    let mut sum = Enclosure::zero(prec);
    let mut n: u64 = 0;
    loop {
        let den = &pow * BigInt::from(2 * n + 1);
        let term = Enclosure::from_ratio(&BigInt::one(), &den, prec);
        if term.hi_mantissa() <= &BigInt::one() {
            // Partial sums bracket the limit; the next term bounds the rest.
            return sum.widen_mantissa(&BigInt::from(2));
        }
        sum = if n % 2 == 0 { sum.add(&term) } else { sum.sub(&term) };
        pow *= &x2;
        n += 1;
    }
}

/// Enclosure of π with width at most `2^(4 - bits)`.
pub fn const_pi(bits: u32) -> Result<Enclosure, TvError> {
    check_precision(bits)?;
    static CACHE: OnceLock<RwLock<Option<Enclosure>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(None));
    if let Some(c) = cache.read().ok().and_then(|g| g.clone()) {
        if c.prec() >= bits + GUARD_BITS {
            return Ok(c.with_prec(bits));
        }
    }
    let w = bits + GUARD_BITS;
    // Machin: π = 16 arctan(1/5) − 4 arctan(1/239).
    let pi = arctan_inv(5, w)
        .mul_u64(16)
        .sub(&arctan_inv(239, w).mul_u64(4));
    if let Ok(mut g) = cache.write() {
        *g = Some(pi.clone());
    }
    Ok(pi.with_prec(bits))
}

/// Square root of a positive integer, enclosed at `prec` bits.
fn sqrt_int(n: u64, prec: u32) -> Enclosure {
    let scaled = BigInt::from(n) << (2 * prec);
    let r = scaled.sqrt();
    let hi = if &r * &r == scaled { r.clone() } else { &r + 1 };
    Enclosure::from_mantissas(r, hi, prec)
}

/// Enclosure of Catalan's constant `G = Σ (−1)^j/(2j+1)²` with width at most
/// `2^(4 - bits)`.
///
/// Uses `G = (3/8) Σ 1/(C(2n,n)(2n+1)²) + (π/8) ln(2+√3)` with
/// `ln(2+√3) = (2/√3) Σ 3^(-n)/(2n+1)`.
pub fn const_catalan(bits: u32) -> Result<Enclosure, TvError> {
    check_precision(bits)?;
    let w = bits + GUARD_BITS;
    let one = BigInt::one();

    // Central-binomial series; successive term ratio is at most 1/2, so the
    // tail after the first omitted term t is below 2t.
    let mut s1 = Enclosure::zero(w);
    let mut binom = BigInt::one();
    let mut n: u64 = 0;
    loop {
        let odd = BigInt::from(2 * n + 1);
        let den = &binom * &odd * &odd;
        let term = Enclosure::from_ratio(&one, &den, w);
        if term.hi_mantissa() <= &one {
            s1 = Enclosure::from_mantissas(
                s1.lo_mantissa().clone(),
                s1.hi_mantissa() + BigInt::from(2),
                w,
            );
            break;
        }
        s1 = s1.add(&term);
        // C(2n+2, n+1) = C(2n, n) (2n+1)(2n+2) / (n+1)^2
        binom = binom * BigInt::from((2 * n + 1) * (2 * n + 2)) / BigInt::from((n + 1) * (n + 1));
        n += 1;
    }

    // Σ 3^(-n)/(2n+1): tail after N terms is below 3^(-N)/(2N+1) · 3/2.
    let mut s2 = Enclosure::zero(w);
    let mut p3 = BigInt::one();
    let mut n: u64 = 0;
    loop {
        let den = &p3 * BigInt::from(2 * n + 1);
        let term = Enclosure::from_ratio(&one, &den, w);
        if term.hi_mantissa() <= &one {
            s2 = Enclosure::from_mantissas(
                s2.lo_mantissa().clone(),
                s2.hi_mantissa() + BigInt::from(2),
                w,
            );
            break;
        }
        s2 = s2.add(&term);
        p3 *= 3;
        n += 1;
    }
    let inv_sqrt3 = sqrt_int(3, w).div_u64(3);
    let log_term = s2.mul(&inv_sqrt3).mul_u64(2);
    let pi = const_pi(w)?;
    let g = s1
        .mul_u64(3)
        .div_u64(8)
        .add(&pi.mul(&log_term).div_u64(8));
    Ok(g.with_prec(bits))
}

/// Euler numbers `E_0, E_2, …, E_max` from `Σ_k C(2n, 2k) E_{2k} = 0`.
pub fn euler_numbers(max_even_index: u32) -> Result<Vec<BigInt>, TvError> {
    if max_even_index % 2 != 0 {
        return Err(TvError::InvalidArgument(format!(
            "Euler numbers are indexed by even integers, got {max_even_index}"
        )));
    }
    let count = (max_even_index / 2) as usize + 1;
    let mut e: Vec<BigInt> = Vec::with_capacity(count);
    e.push(BigInt::one());
    for n in 1..count {
        let two_n = 2 * n as u64;
        let mut acc = BigInt::zero();
        for (k, ek) in e.iter().enumerate() {
            acc += binomial(two_n, 2 * k as u64) * ek;
        }
        e.push(-acc);
    }
    Ok(e)
}

pub(crate) fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

pub(crate) fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Tangent numbers `T_1..T_n` (1, 2, 16, 272, …), cached and grown on demand.
fn tangent_numbers(n: usize) -> Vec<BigInt> {
    static CACHE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(Vec::new()));
    if let Ok(g) = cache.read() {
        if g.len() >= n {
            return g[..n].to_vec();
        }
    }
    // Brent–Harvey in-place recurrence.
    let size = n.max(8);
    let mut t: Vec<BigInt> = vec![BigInt::zero(); size + 1];
    t[1] = BigInt::one();
    for k in 2..=size {
        t[k] = &t[k - 1] * BigInt::from(k - 1);
    }
    for k in 2..=size {
        for j in k..=size {
            t[j] = &t[j - 1] * BigInt::from(j - k) + &t[j] * BigInt::from(j - k + 2);
        }
    }
    let out: Vec<BigInt> = t.into_iter().skip(1).collect();
    if let Ok(mut g) = cache.write() {
        if g.len() < out.len() {
            *g = out.clone();
        }
    }
    out[..n].to_vec()
}

/// `B_{2j}` as an exact fraction `(numerator, denominator)`, `j >= 1`.
pub fn bernoulli_even(j: usize) -> (BigInt, BigInt) {
    assert!(j >= 1);
    let t = tangent_numbers(j);
    let four_j = BigInt::one() << (2 * j);
    let num = &t[j - 1] * BigInt::from(2 * j);
    let den = &four_j * (&four_j - 1);
    let num = if j % 2 == 1 { num } else { -num };
    let g = num_integer::Integer::gcd(&num, &den);
    (num / &g, den / g)
}

/// `|B_{2j}| / (2j)!` enclosed at `prec` bits, for `j >= 1`.
pub fn bernoulli_over_factorial(j: usize, prec: u32) -> Enclosure {
    let (n, d) = bernoulli_even(j);
    Enclosure::from_ratio(&n.abs(), &(d * factorial(2 * j as u64)), prec)
}
