//! Dyadic fixed-point interval arithmetic.
//!
//! An [`Enclosure`] stores two integer mantissas at a common binary scale:
//! the interval is `[lo / 2^prec, hi / 2^prec]`. Every operation rounds the
//! lower endpoint toward negative infinity and the upper endpoint toward
//! positive infinity, so the exact result of the operation applied to any
//! points of the operands stays inside the returned interval.
//!
//! The scale is absolute, not relative: an enclosure at `prec` bits has
//! rounding granularity `2^-prec` whatever its magnitude. Callers that chain
//! many products keep intermediate magnitudes moderate.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::TvError;

/// `floor(x / 2^s)`.
pub(crate) fn floor_shr(x: &BigInt, s: u32) -> BigInt {
    if x.is_negative() {
        -ceil_shr_nonneg(&-x, s)
    } else {
        x >> s
    }
}

/// `ceil(x / 2^s)`.
pub(crate) fn ceil_shr(x: &BigInt, s: u32) -> BigInt {
    if x.is_negative() {
        -(&-x >> s)
    } else {
        ceil_shr_nonneg(x, s)
    }
}

fn ceil_shr_nonneg(x: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    let q = x >> s;
    if &q << s == *x {
        q
    } else {
        q + 1
    }
}

pub(crate) fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

pub(crate) fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -(-a).div_floor(b)
}

/// Exact decomposition `x = m * 2^e` of a finite double.
pub(crate) fn dyadic_from_f64(x: f64) -> Option<(BigInt, i32)> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some((BigInt::zero(), 0));
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & 0x000f_ffff_ffff_ffff;
    let (mant, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    Some((BigInt::from(mant) * sign, exp))
}

/// Number of decimal digits that resolve one unit at `prec` bits.
pub fn decimal_digits_for(prec: u32) -> usize {
    (f64::from(prec) * std::f64::consts::LOG10_2).ceil() as usize + 2
}

/// A closed interval `[lo, hi] * 2^-prec` that is guaranteed to contain an
/// exact real value.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Enclosure {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

impl Enclosure {
    /// Builds an enclosure from raw mantissas.
    ///
    /// Panics if `lo > hi`.
    pub fn from_mantissas(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Self { lo, hi, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_mantissas(BigInt::zero(), BigInt::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_int(1, prec)
    }

    pub fn from_int(n: i64, prec: u32) -> Self {
        Self::from_bigint(&BigInt::from(n), prec)
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Self {
        let m = n << prec;
        Self::from_mantissas(m.clone(), m, prec)
    }

    /// Enclosure of `num / den`; `den` must be nonzero.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "division by zero");
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        let scaled = num << prec;
        Self::from_mantissas(div_floor(&scaled, &den), div_ceil(&scaled, &den), prec)
    }

    /// Tightest enclosure of a finite double at `prec` bits.
    pub fn from_f64(x: f64, prec: u32) -> Result<Self, TvError> {
        let (m, e) = dyadic_from_f64(x)
            .ok_or_else(|| TvError::InvalidArgument(format!("non-finite value {x}")))?;
        Ok(Self::from_dyadic(&m, e, prec))
    }

    /// Enclosure of `m * 2^e`.
    pub fn from_dyadic(m: &BigInt, e: i32, prec: u32) -> Self {
        let shift = e + prec as i32;
        if shift >= 0 {
            let v = m << shift as u32;
            Self::from_mantissas(v.clone(), v, prec)
        } else {
            let s = (-shift) as u32;
            Self::from_mantissas(floor_shr(m, s), ceil_shr(m, s), prec)
        }
    }

    /// Hull of two points given as doubles, rounded outward.
    pub fn from_f64_bounds(lo: f64, hi: f64, prec: u32) -> Result<Self, TvError> {
        if !(lo <= hi) {
            return Err(TvError::InvalidArgument(format!(
                "interval bounds out of order: [{lo}, {hi}]"
            )));
        }
        let a = Self::from_f64(lo, prec)?;
        let b = Self::from_f64(hi, prec)?;
        Ok(a.hull(&b))
    }

    /// Parses outward-rounded decimal bounds such as `"0.2337"`.
    pub fn from_decimal_bounds(lo: &str, hi: &str, prec: u32) -> Result<Self, TvError> {
        let (ln, ld) = parse_decimal(lo)?;
        let (hn, hd) = parse_decimal(hi)?;
        let lo = div_floor(&(ln << prec), &ld);
        let hi = div_ceil(&(hn << prec), &hd);
        if lo > hi {
            return Err(TvError::InvalidArgument(format!(
                "decimal bounds out of order: [{lo}, {hi}]"
            )));
        }
        Ok(Self::from_mantissas(lo, hi, prec))
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lo_mantissa(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_mantissa(&self) -> &BigInt {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Re-expresses the enclosure at another scale, rounding outward.
    pub fn with_prec(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let s = prec - self.prec;
                Self::from_mantissas(&self.lo << s, &self.hi << s, prec)
            }
            Ordering::Less => {
                let s = self.prec - prec;
                Self::from_mantissas(floor_shr(&self.lo, s), ceil_shr(&self.hi, s), prec)
            }
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let p = self.prec.max(other.prec);
        (self.with_prec(p), other.with_prec(p))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.prec == other.prec {
            return Self::from_mantissas(&self.lo + &other.lo, &self.hi + &other.hi, self.prec);
        }
        let (a, b) = self.aligned(other);
        a.add(&b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self::from_mantissas(-&self.hi, -&self.lo, self.prec)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.prec != other.prec {
            let (a, b) = self.aligned(other);
            return a.mul(&b);
        }
        let p = self.prec;
        let (lo, hi) = if !self.lo.is_negative() && !other.lo.is_negative() {
            (&self.lo * &other.lo, &self.hi * &other.hi)
        } else {
            let cands = [
                &self.lo * &other.lo,
                &self.lo * &other.hi,
                &self.hi * &other.lo,
                &self.hi * &other.hi,
            ];
            let lo = cands.iter().min().cloned().unwrap_or_default();
            let hi = cands.iter().max().cloned().unwrap_or_default();
            (lo, hi)
        };
        Self::from_mantissas(floor_shr(&lo, p), ceil_shr(&hi, p), p)
    }

    /// Exact product with an integer.
    pub fn mul_int(&self, n: &BigInt) -> Self {
        if n.is_negative() {
            Self::from_mantissas(&self.hi * n, &self.lo * n, self.prec)
        } else {
            Self::from_mantissas(&self.lo * n, &self.hi * n, self.prec)
        }
    }

    pub fn mul_u64(&self, n: u64) -> Self {
        self.mul_int(&BigInt::from(n))
    }

    /// Quotient by a nonzero integer, rounded outward.
    pub fn div_int(&self, n: &BigInt) -> Self {
        assert!(!n.is_zero(), "division by zero");
        if n.is_negative() {
            return self.neg().div_int(&-n);
        }
        Self::from_mantissas(div_floor(&self.lo, n), div_ceil(&self.hi, n), self.prec)
    }

    pub fn div_u64(&self, n: u64) -> Self {
        self.div_int(&BigInt::from(n))
    }

    /// Multiplies by `2^e` (exact for `e >= 0`).
    pub fn mul_pow2(&self, e: i32) -> Self {
        if e >= 0 {
            Self::from_mantissas(&self.lo << e as u32, &self.hi << e as u32, self.prec)
        } else {
            let s = (-e) as u32;
            Self::from_mantissas(floor_shr(&self.lo, s), ceil_shr(&self.hi, s), self.prec)
        }
    }

    /// `1 / self`; fails when the enclosure contains zero.
    pub fn recip(&self) -> Result<Self, TvError> {
        if self.contains_zero() {
            return Err(TvError::InvalidArgument(
                "reciprocal of an enclosure containing zero".into(),
            ));
        }
        let p = self.prec;
        let one = BigInt::one() << (2 * p);
        // 1/x is decreasing on each sign branch.
        Ok(Self::from_mantissas(
            div_floor(&one, &self.hi),
            div_ceil(&one, &self.lo),
            p,
        ))
    }

    pub fn div(&self, other: &Self) -> Result<Self, TvError> {
        let (a, b) = self.aligned(other);
        Ok(a.mul(&b.recip()?))
    }

    pub fn square(&self) -> Self {
        if self.contains_zero() {
            let m = self.mag_mantissa();
            let hi = ceil_shr(&(&m * &m), self.prec);
            Self::from_mantissas(BigInt::zero(), hi, self.prec)
        } else {
            let a = self.abs();
            a.mul(&a)
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::one(self.prec);
        let mut base = self.clone();
        let mut e = n;
        let odd_power_sign_matters = self.lo.is_negative();
        if odd_power_sign_matters {
            let r = self.abs().powi(n);
            if n % 2 == 0 {
                if self.contains_zero() {
                    return Self::from_mantissas(BigInt::zero(), r.hi, r.prec);
                }
                return r;
            }
            if self.hi.is_negative() {
                return r.neg();
            }
            // Straddles zero with odd exponent: monotone increasing.
            let lo = Self::from_mantissas(self.lo.clone(), self.lo.clone(), self.prec).powi(n);
            let hi = Self::from_mantissas(self.hi.clone(), self.hi.clone(), self.prec).powi(n);
            return Self::from_mantissas(lo.lo, hi.hi, self.prec);
        }
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Self::from_mantissas(BigInt::zero(), self.mag_mantissa(), self.prec)
        }
    }

    /// `max(|lo|, |hi|)` as a mantissa at this precision.
    pub fn mag_mantissa(&self) -> BigInt {
        self.lo.abs().max(self.hi.abs())
    }

    /// Upper bound on `|x|` for every point of the enclosure, as a degenerate
    /// enclosure-free mantissa pair `[0, mag]`.
    pub fn mag(&self) -> Self {
        Self::from_mantissas(BigInt::zero(), self.mag_mantissa(), self.prec)
    }

    /// Widens symmetrically by `r * 2^-prec` with `r >= 0`.
    pub fn widen_mantissa(&self, r: &BigInt) -> Self {
        debug_assert!(!r.is_negative());
        Self::from_mantissas(&self.lo - r, &self.hi + r, self.prec)
    }

    /// Adds `[-e, e]` where `e` is any nonnegative enclosure (its upper end is used).
    pub fn pm(&self, err: &Self) -> Self {
        let e = err.with_prec(self.prec);
        let r = e.hi.abs().max(e.lo.abs());
        self.widen_mantissa(&r)
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn width_mantissa(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn width(&self) -> Self {
        let w = self.width_mantissa();
        Self::from_mantissas(w.clone(), w, self.prec)
    }

    /// Approximate width as a double, rounded up.
    pub fn width_f64(&self) -> f64 {
        let w = self.width_mantissa();
        if w.is_zero() {
            return 0.0;
        }
        let v = mantissa_to_f64(&w, self.prec);
        v.next_up()
    }

    /// Whether the width is certainly at most `target`.
    pub fn width_at_most(&self, target: f64) -> bool {
        match dyadic_from_f64(target) {
            Some((m, e)) if target >= 0.0 => {
                let w = self.width_mantissa();
                // w * 2^-prec <= m * 2^e
                let shift = e + self.prec as i32;
                if shift >= 0 {
                    w <= (m << shift as u32)
                } else {
                    (w << (-shift) as u32) <= m
                }
            }
            _ => target.is_infinite() && target > 0.0,
        }
    }

    pub fn hull(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let lo = a.lo.min(b.lo.clone());
        let hi = a.hi.max(b.hi);
        Self::from_mantissas(lo, hi, a.prec)
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (a, b) = self.aligned(other);
        let lo = a.lo.max(b.lo);
        let hi = a.hi.min(b.hi);
        (lo <= hi).then(|| Self::from_mantissas(lo, hi, a.prec))
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        let (a, b) = self.aligned(other);
        a.lo <= b.hi && b.lo <= a.hi
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains(&self, other: &Self) -> bool {
        let (a, b) = self.aligned(other);
        a.lo <= b.lo && b.hi <= a.hi
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn certainly_lt(&self, other: &Self) -> bool {
        let (a, b) = self.aligned(other);
        a.hi < b.lo
    }

    pub fn certainly_gt(&self, other: &Self) -> bool {
        other.certainly_lt(self)
    }

    /// Certified ordering against another enclosure; `None` when they overlap.
    pub fn certified_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.certainly_lt(other) {
            Some(Ordering::Less)
        } else if self.certainly_gt(other) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Positive lower bound on the distance to a disjoint enclosure.
    pub fn gap_to(&self, other: &Self) -> Option<Self> {
        let (a, b) = self.aligned(other);
        let g = if a.hi < b.lo {
            &b.lo - &a.hi
        } else if b.hi < a.lo {
            &a.lo - &b.hi
        } else {
            return None;
        };
        Some(Self::from_mantissas(g.clone(), g, a.prec))
    }

    /// Lower endpoint as a double, rounded down.
    pub fn lo_f64(&self) -> f64 {
        mantissa_to_f64(&self.lo, self.prec).next_down()
    }

    /// Upper endpoint as a double, rounded up.
    pub fn hi_f64(&self) -> f64 {
        mantissa_to_f64(&self.hi, self.prec).next_up()
    }

    pub fn mid_f64(&self) -> f64 {
        mantissa_to_f64(&(&self.lo + &self.hi), self.prec + 1)
    }

    /// Lower endpoint as an exact point enclosure.
    pub fn lower(&self) -> Self {
        Self::from_mantissas(self.lo.clone(), self.lo.clone(), self.prec)
    }

    pub fn upper(&self) -> Self {
        Self::from_mantissas(self.hi.clone(), self.hi.clone(), self.prec)
    }

    /// Outward-rounded decimal bounds with `digits` fractional digits.
    pub fn to_decimal_bounds(&self, digits: usize) -> (String, String) {
        let scale = num_traits::pow(BigInt::from(10u32), digits);
        let lo = floor_shr(&(&self.lo * &scale), self.prec);
        let hi = ceil_shr(&(&self.hi * &scale), self.prec);
        (format_fixed(&lo, digits), format_fixed(&hi, digits))
    }

    /// Outward-rounded decimal bounds resolving the working precision.
    pub fn to_decimal_default(&self) -> (String, String) {
        self.to_decimal_bounds(decimal_digits_for(self.prec))
    }
}

fn mantissa_to_f64(m: &BigInt, prec: u32) -> f64 {
    let bits = m.bits();
    if bits <= 1000 {
        m.to_f64().unwrap_or(0.0) * 2f64.powi(-(prec as i32))
    } else {
        let s = bits - 900;
        let top = (m >> s).to_f64().unwrap_or(0.0);
        top * 2f64.powi(s as i32 - prec as i32)
    }
}

fn format_fixed(n: &BigInt, digits: usize) -> String {
    let neg = n.sign() == Sign::Minus;
    let s = n.abs().to_string();
    let body = if digits == 0 {
        s
    } else if s.len() > digits {
        let (int, frac) = s.split_at(s.len() - digits);
        format!("{int}.{frac}")
    } else {
        format!("0.{}{}", "0".repeat(digits - s.len()), s)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Parses a plain or scientific decimal into an exact fraction `num / den`.
pub(crate) fn parse_decimal(text: &str) -> Result<(BigInt, BigInt), TvError> {
    let bad = || TvError::Parse {
        token: text.to_string(),
        reason: "not a decimal number".into(),
    };
    let t = text.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let e = exp - frac.len() as i32;
    let ten = BigInt::from(10u32);
    if e >= 0 {
        Ok((num * num_traits::pow(ten, e as usize), BigInt::one()))
    } else {
        Ok((num, num_traits::pow(ten, (-e) as usize)))
    }
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_decimal_bounds(24);
        write!(f, "Enclosure[{lo}, {hi}]@{}", self.prec)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        let (lo, hi) = self.to_decimal_bounds(digits);
        write!(f, "[{lo}, {hi}]")
    }
}

/// Wire form: decimal strings rounded outward, plus the working precision.
#[derive(Serialize, Deserialize)]
struct EnclosureWire {
    lo: String,
    hi: String,
    precision_bits: u32,
}

impl Serialize for Enclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (lo, hi) = self.to_decimal_default();
        EnclosureWire {
            lo,
            hi,
            precision_bits: self.prec,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Enclosure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = EnclosureWire::deserialize(d)?;
        Enclosure::from_decimal_bounds(&w.lo, &w.hi, w.precision_bits)
            .map_err(serde::de::Error::custom)
    }
}
