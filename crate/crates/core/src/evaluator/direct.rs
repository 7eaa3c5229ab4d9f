//! Truncated nested summation with a crude but rigorous bound on the rest.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::TvError;
use crate::indices::ValueSpec;
use crate::numerics::Enclosure;

/// Enclosure of `t(k)_n` from the exact sum over `n < m_d < … < m_1 <= M`
/// plus an over-estimate of the region `m_1 > M`.
///
/// The inner sums satisfy `S_2(m) <= h(m)^(d−1)/(d−1)!` with
/// `h(m) <= 1 + ln(2m−1)/2`, and the outer sum over `m_1 > M` is bounded by
/// the integral of `(2x−1)^(−k_1) (1 + ln(2x−1)/2)^(d−1)`, which is
/// decreasing once `ln(2M−1) > (d−1)/k_1 − 2`.
pub fn eval_direct(spec: &ValueSpec, m_max: u64, bits: u32) -> Result<Enclosure, TvError> {
    let k = spec.index.exponents();
    if !spec.index.is_admissible() {
        return Err(TvError::invalid(format!("index ({}) is not admissible", spec.index)));
    }
    if bits < 16 {
        return Err(TvError::invalid(format!("precision must be at least 16 bits, got {bits}")));
    }
    if k.is_empty() {
        return Ok(Enclosure::one(bits));
    }
    let n = spec.tail_offset;
    let d = k.len() as u64;
    if m_max < d + n || m_max == 0 {
        return Err(TvError::invalid(format!(
            "truncation point {m_max} must be at least depth + tail offset = {}",
            d + n
        )));
    }
    let rest = discarded_bound(k[0], k.len() - 1, m_max)?;
    let partial = if bits <= 60 {
        match kernel_u128(k, n, m_max, bits) {
            Some(e) => e,
            None => kernel_big(k, n, m_max, bits),
        }
    } else {
        kernel_big(k, n, m_max, bits)
    };
    let rest = Enclosure::from_f64_bounds(0.0, rest, bits)?;
    Ok(partial.add(&rest))
}

/// Upper bound on `Σ_{m>M} (2m−1)^(−k) h(m)^q / q!`.
fn discarded_bound(k: u32, q: usize, m_max: u64) -> Result<f64, TvError> {
    let u = (2 * m_max - 1) as f64;
    let ln_u = u.ln();
    let s_lo = ln_u * (1.0 - 1e-14);
    let s_hi = ln_u * (1.0 + 1e-14) + 1e-300;
    let c = (k - 1) as f64;
    if q > 0 && s_lo <= q as f64 / k as f64 - 2.0 {
        return Err(TvError::invalid(format!(
            "truncation point {m_max} too small for a monotone tail bound at depth {}",
            q + 1
        )));
    }
    // (1/2) e^(−c s0) Σ_j q!/(q−j)! (1/2)^j (1 + s0/2)^(q−j) / c^(j+1), divided by q!.
    let base = 1.0 + s_hi / 2.0;
    let mut sum = 0.0f64;
    let mut falling = 1.0f64;
    for j in 0..=q {
        sum += falling * 0.5f64.powi(j as i32) * base.powi((q - j) as i32) / c.powi(j as i32 + 1);
        falling *= (q - j) as f64;
    }
    let q_fact: f64 = (1..=q).map(|i| i as f64).product();
    let log_bound = -c * s_lo + (0.5 * sum / q_fact).ln();
    let slack = 1e-9 * log_bound.abs() + 1e-9;
    Ok((log_bound + slack).max(-700.0).exp())
}

fn kernel_big(k: &[u32], n: u64, m_max: u64, bits: u32) -> Enclosure {
    let d = k.len();
    let one = BigInt::one() << bits;
    let mut lo = vec![BigInt::zero(); d + 1];
    let mut hi = vec![BigInt::zero(); d + 1];
    lo[d] = one.clone();
    hi[d] = one.clone();
    for m in (n + 1)..=m_max {
        let base = BigInt::from(2 * m - 1);
        for j in 0..d {
            let p = base.pow(k[j]);
            let wl = &one / &p;
            let wh = (&one + &p - 1u32) / &p;
            let il = (&wl * &lo[j + 1]) >> bits;
            let ih = (&wh * &hi[j + 1] + &one - 1u32) >> bits;
            lo[j] += il;
            hi[j] += ih;
        }
    }
    Enclosure::from_mantissas(lo[0].clone(), hi[0].clone(), bits)
}

/// Fixed-point kernel in machine integers; `None` on overflow.
fn kernel_u128(k: &[u32], n: u64, m_max: u64, bits: u32) -> Option<Enclosure> {
    let d = k.len();
    let one: u128 = 1u128 << bits;
    let mut lo = vec![0u128; d + 1];
    let mut hi = vec![0u128; d + 1];
    lo[d] = one;
    hi[d] = one;
    for m in (n + 1)..=m_max {
        let base = (2 * m - 1) as u128;
        for j in 0..d {
            let (wl, wh) = match base.checked_pow(k[j]) {
                Some(p) => (one / p, one.div_ceil(p)),
                None => (0, 1),
            };
            let il = wl.checked_mul(lo[j + 1])? >> bits;
            let ih = wh.checked_mul(hi[j + 1])?.div_ceil(one);
            lo[j] = lo[j].checked_add(il)?;
            hi[j] = hi[j].checked_add(ih)?;
        }
    }
    Some(Enclosure::from_mantissas(
        BigInt::from(lo[0]),
        BigInt::from(hi[0]),
        bits,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::parse_spec;
    use crate::numerics::{const_pi, odd_power_partial};

    #[test]
    fn empty_index_exact() {
        let v = eval_direct(&parse_spec("tail:3:empty").unwrap(), 10, 64).unwrap();
        assert_eq!(v, Enclosure::one(64));
    }

    #[test]
    fn t2_at_one_thousand() {
        let v = eval_direct(&parse_spec("2").unwrap(), 1000, 64).unwrap();
        assert!(v.width_at_most(1e-3));
        assert!(v.overlaps(&const_pi(128).unwrap().square().div_u64(8)));
    }

    #[test]
    fn kernels_agree() {
        let s = parse_spec("tail:1:3,1,2").unwrap();
        let a = kernel_u128(s.index.exponents(), 1, 3000, 56).unwrap();
        let b = kernel_big(s.index.exponents(), 1, 3000, 56);
        assert_eq!(a, b);
    }

    #[test]
    fn nested_truncations_overlap() {
        let s = parse_spec("2,1").unwrap();
        let a = eval_direct(&s, 100_000, 56).unwrap();
        let b = eval_direct(&s, 200_000, 56).unwrap();
        assert!(a.width_at_most(1e-4));
        assert!(a.overlaps(&b));
    }

    #[test]
    fn rejects_small_truncation() {
        assert!(eval_direct(&parse_spec("tail:5:2,1").unwrap(), 6, 64).is_err());
        assert!(eval_direct(&parse_spec("2,1,1,1,1,1,1,1,1,1,1,1,1").unwrap(), 13, 64).is_err());
    }

    #[test]
    fn discarded_bound_covers_computed_differences() {
        // The rest beyond M must dominate the increment from M to 4M.
        for s in ["2", "2,1", "3,1,1", "2,2,1"] {
            let spec = parse_spec(s).unwrap();
            let k = spec.index.exponents();
            let m = 200;
            let near = kernel_big(k, 0, m, 96);
            let far = kernel_big(k, 0, 4 * m, 96);
            let bound = discarded_bound(k[0], k.len() - 1, m).unwrap();
            assert!(far.sub(&near).hi_f64() <= bound, "{s}");
        }
        let k2 = odd_power_partial(2, 200, 800, 96);
        assert!(k2.hi_f64() <= discarded_bound(2, 0, 200).unwrap());
    }
}
