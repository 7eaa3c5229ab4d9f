//! Accelerated evaluation of `t(k)_n` for depth ≥ 2.
//!
//! Pick a cutoff `N >= n` and split the summation domain by how many
//! variables exceed `N`:
//!
//! `t(k)_n = Σ_{j=0}^{d} t(k_1..k_j)_N · P_N(k_{j+1}..k_d; n)`
//!
//! where `P_N` is the finite nested sum over `N >= m_{j+1} > … > m_d > n`.
//! The finite parts come from one dynamic program. Each prefix tail
//! `t(k_1..k_j)_N` is the value at `a = A = N + 1/2` of
//! `F_j(a) = Σ_{i>=0} (2(a+i))^(−k_j) F_{j−1}(a+i+1)`, `F_0 = 1`, and `F_j` is
//! carried as a truncated expansion in `x = A/a ∈ (0, 1]`
//!
//! `F(a) = Σ_{r<ρ} d_r x^r + θ E x^ρ`, `|θ| <= 1`, valid for every `a >= A`.
//!
//! One level is a shift `a → a+1`, a multiplication by `(2a)^(−k)`, and a
//! summation over `a + Z_{>=0}` by the Euler–Maclaurin expansion of the
//! Hurwitz zeta function. Every truncation is charged to `E`: the shift by the
//! Lagrange remainder of `(1+y)^(−r)`, the summation by the first omitted
//! Bernoulli term (the summands `x^q` are completely monotone in `a`).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::TvError;
use crate::numerics::{bernoulli_even, Enclosure, Rung};

/// Truncated expansion of a prefix-tail function in `x = A/a`.
#[derive(Clone, Debug)]
struct Expansion {
    coef: Vec<Enclosure>,
    err: Enclosure,
}

struct Ctx {
    prec: u32,
    max_order: usize,
    /// `2N + 1 = 2A`.
    two_a: BigInt,
}

impl Ctx {
    fn zero(&self) -> Enclosure {
        Enclosure::zero(self.prec)
    }
}

impl Expansion {
    fn one(ctx: &Ctx) -> Self {
        let mut coef = vec![ctx.zero(); ctx.max_order];
        coef[0] = Enclosure::one(ctx.prec);
        Self {
            coef,
            err: ctx.zero(),
        }
    }

    fn order(&self) -> usize {
        self.coef.len()
    }

    /// `F(a + 1)` re-expanded in `x = A/a`.
    fn shift(&self, ctx: &Ctx) -> Self {
        let rho = self.order();
        let mut coef = vec![ctx.zero(); rho];
        let mut err = self.err.clone();
        for (r, d) in self.coef.iter().enumerate() {
            if d.is_point() && d.lo_mantissa().is_zero() {
                continue;
            }
            if r == 0 {
                coef[0] = coef[0].add(d);
                continue;
            }
            // e_s = C(r+s−1, s) A^(−s), e_{s+1} = e_s (r+s) / ((s+1) A)
            let mut e = Enclosure::one(ctx.prec);
            for s in 0..(rho - r) {
                let term = if s % 2 == 0 { d.mul(&e) } else { d.mul(&e).neg() };
                coef[r + s] = coef[r + s].add(&term);
                e = step_binomial(&e, r, s, ctx);
            }
            err = err.add(&d.mag().mul(&e));
        }
        Self { coef, err }
    }

    /// Multiplies by `(2a)^(−k) = (2A)^(−k) x^k`.
    fn mul_power(&self, k: u32, ctx: &Ctx) -> Self {
        let den = ctx.two_a.pow(k);
        let k = k as usize;
        let new_order = (self.order() + k).min(ctx.max_order);
        let mut coef = vec![ctx.zero(); new_order];
        let mut err = self.err.div_int(&den);
        for (r, d) in self.coef.iter().enumerate() {
            let v = d.div_int(&den);
            if r + k < new_order {
                coef[r + k] = v;
            } else {
                err = err.add(&v.mag());
            }
        }
        Self { coef, err }
    }

    /// `Σ_{i>=0} F(a + i)`.
    fn summed(&self, ctx: &Ctx) -> Result<Self, TvError> {
        let rho = self.order();
        if rho < 2 {
            return Err(TvError::invalid("expansion order too small to sum"));
        }
        for q in 0..2 {
            let d = &self.coef[q];
            if !(d.is_point() && d.lo_mantissa().is_zero()) {
                return Err(TvError::Divergent(format!(
                    "summing a term of order {q} in 1/a"
                )));
            }
        }
        let new_order = rho - 1;
        let mut coef = vec![ctx.zero(); new_order];
        // Σ_i E x_i^ρ <= E (x^ρ + A x^(ρ−1)/(ρ−1)) <= E (1 + A/(ρ−1)) x^(ρ−1).
        let grow = BigInt::from(2 * (rho - 1)) + &ctx.two_a;
        let mut err = self
            .err
            .mul_int(&grow)
            .div_int(&BigInt::from(2 * (rho - 1)));
        let mut add = |o: usize, v: Enclosure, err: &mut Enclosure| {
            if o < new_order {
                coef[o] = coef[o].add(&v);
            } else {
                *err = err.add(&v.mag());
            }
        };
        for q in 2..rho {
            let d = &self.coef[q];
            if d.is_point() && d.lo_mantissa().is_zero() {
                continue;
            }
            // A^q ζ(q, a) = A x^(q−1)/(q−1) + x^q/2 + Σ_j f_j x^(q+2j−1)
            let lead = d.mul_int(&ctx.two_a).div_u64(2 * (q as u64 - 1));
            add(q - 1, lead, &mut err);
            add(q, d.div_u64(2), &mut err);
            // f_1 = B_2/2! · q / A = q / (6 (2N+1))
            let mut f = Enclosure::from_ratio(
                &BigInt::from(q),
                &(BigInt::from(6) * &ctx.two_a),
                ctx.prec,
            );
            let mut j = 1usize;
            loop {
                let o = q + 2 * j - 1;
                let v = d.mul(&f);
                if o >= new_order {
                    err = err.add(&v.mag());
                    break;
                }
                add(o, v, &mut err);
                f = step_bernoulli(&f, q, j, ctx);
                j += 1;
            }
        }
        Ok(Self { coef, err })
    }

    /// Value at `a = A`, i.e. `x = 1`.
    fn at_start(&self, ctx: &Ctx) -> Enclosure {
        let mut s = ctx.zero();
        for d in &self.coef {
            s = s.add(d);
        }
        s.pm(&self.err)
    }
}

fn step_binomial(e: &Enclosure, r: usize, s: usize, ctx: &Ctx) -> Enclosure {
    // A^(−1) = 2 / (2N+1)
    e.mul_u64(2 * (r + s) as u64)
        .div_int(&(BigInt::from(s as u64 + 1) * &ctx.two_a))
}

/// `f_{j+1} = f_j · (B_{2j+2}/(2j+2)!)/(B_{2j}/(2j)!) · (q+2j−1)(q+2j) / A²`.
fn step_bernoulli(f: &Enclosure, q: usize, j: usize, ctx: &Ctx) -> Enclosure {
    let (n0, d0) = bernoulli_even(j);
    let (n1, d1) = bernoulli_even(j + 1);
    let num = n1 * d0 * BigInt::from(((q + 2 * j - 1) * (q + 2 * j) * 4) as u64);
    let den = d1 * n0 * BigInt::from(((2 * j + 1) * (2 * j + 2)) as u64) * &ctx.two_a * &ctx.two_a;
    f.mul_int(&num).div_int(&den)
}

/// Odd-power weights `(2m−1)^(−k)` for `lo < m <= hi`, indexed by `m − lo − 1`.
fn weights(k: u32, lo: u64, hi: u64, prec: u32) -> Vec<Enclosure> {
    let one = BigInt::one();
    ((lo + 1)..=hi)
        .map(|m| Enclosure::from_ratio(&one, &BigInt::from(2 * m - 1).pow(k), prec))
        .collect()
}

/// `P_N(k_{j+1}..k_d; n)` for every `j = 0..=d`.
fn finite_parts(k: &[u32], n: u64, cut: u64, prec: u32) -> Vec<Enclosure> {
    let d = k.len();
    // v[j] = Σ over cut >= m_{j+1} > … > m_d > n restricted to m_{j+1} <= m.
    let mut v = vec![Enclosure::zero(prec); d + 1];
    v[d] = Enclosure::one(prec);
    if cut <= n {
        return v;
    }
    let mut cache: Vec<(u32, Vec<Enclosure>)> = Vec::new();
    for &e in k {
        if !cache.iter().any(|(x, _)| *x == e) {
            cache.push((e, weights(e, n, cut, prec)));
        }
    }
    let w_of = |e: u32| &cache.iter().find(|(x, _)| *x == e).expect("cached").1;
    for idx in 0..(cut - n) as usize {
        // Outermost first so v[j+1] still holds its value at m − 1.
        for j in 0..d {
            let w = &w_of(k[j])[idx];
            let inc = w.mul(&v[j + 1]);
            v[j] = v[j].add(&inc);
        }
    }
    v
}

/// `t(k)_n` at one rung of the precision ladder; `k` admissible, depth ≥ 1.
pub(crate) fn eval_series(k: &[u32], n: u64, rung: &Rung, max_terms: u64) -> Result<Enclosure, TvError> {
    debug_assert!(!k.is_empty() && k[0] >= 2);
    let prec = rung.work_prec;
    let cut = rung.cutoff.min(max_terms).max(n).max(1);
    let ctx = Ctx {
        prec,
        max_order: rung.order.max(k.iter().map(|&e| e as usize).max().unwrap_or(2) + 2),
        two_a: BigInt::from(2 * cut + 1),
    };
    let parts = finite_parts(k, n, cut, prec);
    let mut total = parts[0].clone();
    let mut model = Expansion::one(&ctx);
    for (j, &e) in k.iter().enumerate() {
        let base = if j == 0 { model.clone() } else { model.shift(&ctx) };
        model = base.mul_power(e, &ctx).summed(&ctx)?;
        let prefix_tail = model.at_start(&ctx);
        total = total.add(&prefix_tail.mul(&parts[j + 1]));
    }
    Ok(total.with_prec(rung.bits + 8))
}
