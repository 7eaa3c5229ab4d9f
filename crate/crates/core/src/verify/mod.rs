//! Verification scans: closed forms, the even-argument sum formula, the
//! Catalan partial sums, the tail recurrence, the descending chain, limits of
//! `t(k, n)`, and the conjectural structure of bands.
//!
//! Every scan returns a [`ScanReport`] whose findings carry the enclosures
//! that decided them, so a report can be replayed.

mod report;

pub use report::{Finding, FindingVerdict, ScanReport, ScanStatus};

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::TvError;
use crate::indices::{enumerate_admissible, enumerate_up_to, MultiIndex, ValueSpec};
use crate::numerics::{binomial, const_catalan, const_pi, euler_numbers, factorial, Enclosure};
use crate::order::{Certifier, Verdict};

/// Upper bound on `2G − Σ_{j<=12} t(2,{1}_{j−1})`, measured once and frozen.
pub const CATALAN_GAP_12_BOUND: f64 = 2.5e-4;

const CONST_BITS: u32 = 256;

fn full(k: &MultiIndex) -> ValueSpec {
    ValueSpec {
        index: k.clone(),
        tail_offset: 0,
    }
}

fn tail(k: &MultiIndex) -> ValueSpec {
    ValueSpec {
        index: k.clone(),
        tail_offset: 1,
    }
}

fn error_finding(indices: Vec<String>, e: &TvError) -> Finding {
    let partial = match e {
        TvError::BudgetExceeded { partial, .. } => Some(partial.clone()),
        _ => None,
    };
    let f = Finding::new(indices, FindingVerdict::Unresolved).detail(e.to_string());
    match partial {
        Some(p) => f.with("partial", &p),
        None => f,
    }
}

/// Checks a computed enclosure against a closed form: overlap required,
/// and the computed width must not exceed `tol`.
fn containment(indices: Vec<String>, got: &Enclosure, want: &Enclosure, tol: f64) -> Finding {
    let verdict = if !got.overlaps(want) {
        FindingVerdict::Violation
    } else if got.width_at_most(tol) {
        FindingVerdict::Pass
    } else {
        FindingVerdict::Unresolved
    };
    Finding::new(indices, verdict)
        .with("computed", got)
        .with("closed_form", want)
}

/// `t({2}_n)`, `t({4}_n)`, `t({6}_n)` against their closed forms in π.
pub fn verify_repeated(cert: &Certifier, n_max: usize, tol: f64) -> Result<ScanReport, TvError> {
    if n_max == 0 {
        return Err(TvError::invalid("n_max must be at least 1"));
    }
    let pi = const_pi(CONST_BITS)?;
    let mut report = ScanReport::new("repeated").param("n_max", n_max).param("tol", tol);
    let cases: Vec<(u32, usize)> = (1..=n_max).flat_map(|n| [2, 4, 6].map(|b| (b, n))).collect();
    let findings: Vec<Finding> = cases
        .par_iter()
        .map(|&(base, n)| {
            let k = MultiIndex::repeated(base, n);
            let n64 = n as u64;
            let want = match base {
                // π^(2n) / ((2n)! 2^(2n))
                2 => pi.powi(2 * n as u32).div_int(&(factorial(2 * n64) << (2 * n))),
                // π^(4n) / ((4n)! 2^(2n))
                4 => pi.powi(4 * n as u32).div_int(&(factorial(4 * n64) << (2 * n))),
                // 3 π^(6n) / ((6n)! 4)
                _ => pi.powi(6 * n as u32).mul_u64(3).div_int(&(factorial(6 * n64) * 4)),
            };
            match cert.narrow(&full(&k), tol) {
                Ok(got) => containment(vec![k.to_string()], &got, &want, tol),
                Err(e) => error_finding(vec![k.to_string()], &e),
            }
        })
        .collect();
    for f in findings {
        report.push(f);
    }
    Ok(report.finish())
}

/// Compositions of `n` into exactly `d` positive parts, in lexicographic order.
fn compositions_into(n: u32, d: usize) -> Vec<Vec<u32>> {
    fn go(n: u32, d: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if d == 0 {
            if n == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for first in 1..=n.saturating_sub(d as u32 - 1) {
            prefix.push(first);
            go(n - first, d - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, d, &mut Vec::new(), &mut out);
    out
}

/// Sum of `t` over even-argument indices of weight `2n` and depth `d` against
/// `(−1)^(n−d) π^(2n) / (4^n (2n)!) Σ_l C(n−l, d) C(2n, 2l) E_{2l}`.
pub fn verify_sum_formula(cert: &Certifier, n_max: usize, tol: f64) -> Result<ScanReport, TvError> {
    if n_max == 0 {
        return Err(TvError::invalid("n_max must be at least 1"));
    }
    let pi = const_pi(CONST_BITS)?;
    let euler = euler_numbers(2 * n_max as u32)?;
    let mut report = ScanReport::new("sum_formula").param("n_max", n_max).param("tol", tol);
    for n in 1..=n_max {
        for d in 1..=n {
            let indices: Vec<MultiIndex> = compositions_into(n as u32, d)
                .into_iter()
                .map(|c| MultiIndex::from(&c.iter().map(|e| 2 * e).collect::<Vec<_>>()[..]))
                .collect();
            let per_term = tol / (2.0 * indices.len() as f64);
            let parts: Result<Vec<Enclosure>, TvError> =
                indices.par_iter().map(|k| cert.narrow(&full(k), per_term)).collect();
            let names: Vec<String> = indices.iter().map(|k| k.to_string()).collect();
            let sum = match parts {
                Ok(p) => p.iter().skip(1).fold(p[0].clone(), |acc, x| acc.add(x)),
                Err(e) => {
                    report.push(error_finding(names, &e));
                    continue;
                }
            };
            let mut s = BigInt::zero();
            for l in 0..=(n - d) {
                s += binomial((n - l) as u64, d as u64) * binomial(2 * n as u64, 2 * l as u64) * &euler[l];
            }
            if (n - d) % 2 == 1 {
                s = -s;
            }
            let want = pi
                .powi(2 * n as u32)
                .mul_int(&s)
                .div_int(&(factorial(2 * n as u64) << (2 * n)));
            let f = containment(names, &sum, &want, tol).detail(format!("n={n} d={d}"));
            report.push(f);
        }
    }
    Ok(report.finish())
}

/// Partial sums `S_J = Σ_{j<=J} t(2,{1}_{j−1})` approaching `2G`.
///
/// With `gap_bound = Some((J, b))` the gap `2G − S_J` must also be below `b`.
pub fn verify_catalan(
    cert: &Certifier,
    j_max: usize,
    gap_bound: Option<(usize, f64)>,
) -> Result<ScanReport, TvError> {
    if j_max == 0 {
        return Err(TvError::invalid("J_max must be at least 1"));
    }
    let two_g = const_catalan(CONST_BITS)?.mul_u64(2);
    let mut report = ScanReport::new("catalan").param("j_max", j_max);
    if let Some((j, b)) = gap_bound {
        report = report.param("gap_bound_index", j).param("gap_bound", b);
    }
    let terms: Result<Vec<Enclosure>, TvError> = (1..=j_max)
        .into_par_iter()
        .map(|j| cert.narrow(&full(&MultiIndex::two_ones(j)), 1e-30))
        .collect();
    let terms = terms?;
    let zero = Enclosure::zero(CONST_BITS);
    let mut s = Enclosure::zero(CONST_BITS);
    let mut prev_gap: Option<Enclosure> = None;
    for (i, t) in terms.iter().enumerate() {
        let j = i + 1;
        let name = MultiIndex::two_ones(j).to_string();
        s = s.add(t);
        let gap = two_g.sub(&s);
        // S_J increasing and gap decreasing both reduce to the term being positive.
        let mut ok = t.certainly_gt(&zero) && gap.certainly_gt(&zero);
        let mut detail = format!("J={j}");
        if let Some(p) = &prev_gap {
            ok &= gap.certainly_lt(p);
        }
        if let Some((jb, b)) = gap_bound {
            if jb == j {
                let bound = Enclosure::from_f64(b, CONST_BITS)?;
                ok &= gap.certainly_lt(&bound);
                detail.push_str(&format!(" gap<{b:e}"));
            }
        }
        let verdict = if ok {
            FindingVerdict::Pass
        } else if gap.certainly_lt(&zero) || t.certainly_lt(&zero) {
            FindingVerdict::Violation
        } else {
            FindingVerdict::Unresolved
        };
        report.push(
            Finding::new(vec![name], verdict)
                .with("term", t)
                .with("partial_sum", &s)
                .with("gap", &gap)
                .detail(detail),
        );
        prev_gap = Some(gap);
    }
    report = report.param("gap_at_j_max", format!("{:e}", prev_gap.map(|g| g.hi_f64()).unwrap_or(0.0)));
    Ok(report.finish())
}

/// `t(k) = t(k)_1 + t(k_1..k_{d−1})_1` for every admissible index of weight at
/// most `weight_max`.
pub fn verify_tail_recurrence(cert: &Certifier, weight_max: u32, tol: f64) -> Result<ScanReport, TvError> {
    if weight_max < 2 {
        return Err(TvError::invalid("weight_max must be at least 2"));
    }
    let mut report = ScanReport::new("tail_recurrence")
        .param("weight_max", weight_max)
        .param("tol", tol);
    let mut all = Vec::new();
    for w in 2..=weight_max {
        all.extend(enumerate_admissible(w)?);
    }
    let each = tol / 4.0;
    let findings: Vec<Finding> = all
        .par_iter()
        .map(|k| {
            let run = || -> Result<Finding, TvError> {
                let a = cert.narrow(&full(k), each)?;
                let b = cert.narrow(&tail(k), each)?;
                let c = cert.narrow(&tail(&k.drop_last()), each)?;
                let rhs = b.add(&c);
                let combined = a.width_f64() + rhs.width_f64();
                let verdict = if !a.overlaps(&rhs) {
                    FindingVerdict::Violation
                } else if combined <= tol {
                    FindingVerdict::Pass
                } else {
                    FindingVerdict::Unresolved
                };
                Ok(Finding::new(vec![k.to_string()], verdict)
                    .with("full", &a)
                    .with("tail", &b)
                    .with("prefix_tail", &c))
            };
            run().unwrap_or_else(|e| error_finding(vec![k.to_string()], &e))
        })
        .collect();
    for f in findings {
        report.push(f);
    }
    let two = MultiIndex::from(&[2u32][..]);
    let t21 = cert.narrow(&tail(&two), 1e-20)?;
    report.push(
        Finding::new(vec![tail(&two).to_string()], FindingVerdict::Note)
            .with("value", &t21)
            .detail(format!("t(2)_1 = pi^2/8 - 1 = {:.6}, not 0.232", t21.mid_f64())),
    );
    Ok(report.finish())
}

/// The descending chain
/// `t(2) > t(3) > … > t(∅)_1 > t(2,1) > t(2,2) > … > t(2)_1 > …`:
/// block `b` lists `t(p, e)` for the first `per_block` exponents `e`
/// followed by `β_b = t(p)_1`, where `p` generates `β_b`.
pub fn verify_chain(cert: &Certifier, block_count: usize, per_block: usize) -> Result<ScanReport, TvError> {
    if block_count == 0 || per_block == 0 {
        return Err(TvError::invalid("block_count and per_block must be positive"));
    }
    let mut report = ScanReport::new("chain")
        .param("block_count", block_count)
        .param("per_block", per_block);
    let table = cert.beta_table(block_count)?;
    let mut chain: Vec<ValueSpec> = Vec::new();
    for entry in &table {
        let p = &entry.source;
        let first = if p.is_empty() { 2 } else { 1 };
        for e in first..first + per_block as u32 {
            chain.push(full(&p.push(e)));
        }
        chain.push(tail(p));
    }
    report = report.param(
        "chain",
        chain.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" > "),
    );
    let outcomes: Result<Vec<_>, TvError> = chain
        .par_windows(2)
        .map(|w| cert.compare(&w[0], &w[1]).map(|o| (w[0].clone(), w[1].clone(), o)))
        .collect();
    for (a, b, o) in outcomes? {
        let verdict = match o.verdict {
            Verdict::Greater => FindingVerdict::Pass,
            Verdict::Less => FindingVerdict::Violation,
            Verdict::Unresolved => FindingVerdict::Unresolved,
        };
        let ea = cert.value(&a)?;
        let eb = cert.value(&b)?;
        report.push(
            Finding::new(vec![a.to_string(), b.to_string()], verdict)
                .with("left", &ea)
                .with("right", &eb)
                .detail(format!("separation {:e} at {} bits", o.separation, o.bits_used)),
        );
    }
    Ok(report.finish())
}

/// `t(k, n)` decreasing in `n` with `0 <= t(k, n) − t(k)_1 <= 3^(−n) C`.
///
/// `t(k, n) − t(k)_1` is the part of `t(k, n)` with the appended variable at
/// least 2, hence `C = 3^(n₀) t(k, n₀)_1` works for `n >= n₀`; `n₀` is the
/// first admissible appended exponent.
pub fn verify_limits(cert: &Certifier, k: &MultiIndex, n_max: u32) -> Result<ScanReport, TvError> {
    if !k.is_admissible() {
        return Err(TvError::invalid(format!("index ({k}) is not admissible")));
    }
    if n_max < 3 {
        return Err(TvError::invalid("n_max must be at least 3"));
    }
    let n0 = if k.is_empty() { 2 } else { 1 };
    let width = 1e-30;
    let limit = cert.narrow(&tail(k), width)?;
    let base = cert.narrow(&tail(&k.push(n0)), width)?;
    // small relative margin absorbs the enclosure widths at n = n₀
    let c = base
        .upper()
        .mul_int(&BigInt::from(3u32).pow(n0))
        .mul_u64(1025)
        .div_u64(1024)
        .upper();
    let mut report = ScanReport::new("limits")
        .param("index", k.to_string())
        .param("n_max", n_max)
        .param("constant", format!("{:e}", c.hi_f64()));
    let values: Result<Vec<Enclosure>, TvError> = (n0..=n_max)
        .into_par_iter()
        .map(|n| cert.narrow(&full(&k.push(n)), width))
        .collect();
    let values = values?;
    for (i, v) in values.iter().enumerate() {
        let n = n0 + i as u32;
        let kn = k.push(n);
        let diff = v.sub(&limit);
        let bound = c.div_int(&BigInt::from(3u32).pow(n)).upper();
        let mut ok = diff.certainly_lt(&bound);
        ok &= diff.certainly_gt(&Enclosure::zero(diff.prec()));
        if let Some(next) = values.get(i + 1) {
            ok &= v.certainly_gt(next);
        }
        let ratio = diff.mul_int(&BigInt::from(3u32).pow(n));
        let verdict = if ok {
            FindingVerdict::Pass
        } else if diff.certainly_gt(&bound) || values.get(i + 1).is_some_and(|nx| v.certainly_lt(nx)) {
            FindingVerdict::Violation
        } else {
            FindingVerdict::Unresolved
        };
        report.push(
            Finding::new(vec![kn.to_string()], verdict)
                .with("value", v)
                .with("excess_over_limit", &diff)
                .with("bound", &bound)
                .detail(format!("ratio·3^n = {:.12}", ratio.mid_f64())),
        );
    }
    Ok(report.finish())
}

/// Members of `P_r = {(k, n) : k ∈ I_r, t(k, n) >= β_{r−1}}` for `r <= r_max`.
///
/// `I_r` is the generator of `β_r` from the certified β-table (the table
/// fails on any unresolved tie, so no other generator can hide). Findings
/// list members only; an empty list means every scanned `P_r` is empty.
pub fn scan_p_sets(cert: &Certifier, r_max: usize, n_max: u32) -> Result<ScanReport, TvError> {
    if r_max == 0 || n_max == 0 {
        return Err(TvError::invalid("r_max and n_max must be positive"));
    }
    let table = cert.beta_table(r_max)?;
    let mut report = ScanReport::new("p_sets").param("r_max", r_max).param("n_max", n_max);
    for r in 2..=r_max {
        let k = &table[r - 1].source;
        let upper = tail(&table[r - 2].source);
        for n in 1..=n_max {
            let kn = k.push(n);
            if !kn.is_admissible() {
                continue;
            }
            let o = cert.compare(&full(&kn), &upper)?;
            let verdict = match o.verdict {
                Verdict::Less => continue,
                Verdict::Greater => FindingVerdict::Violation,
                Verdict::Unresolved => FindingVerdict::Unresolved,
            };
            report.push(
                Finding::new(vec![kn.to_string(), upper.to_string()], verdict)
                    .with("value", &cert.value(&full(&kn))?)
                    .with("beta_prev", &cert.value(&upper)?)
                    .detail(format!("member of P_{r}")),
            );
        }
    }
    Ok(report.finish())
}

/// Pairwise separation of the tails `t(k)_1`, `1 <= weight(k) <= weight_max`.
pub fn scan_tail_collisions(cert: &Certifier, weight_max: u32, resolution: f64) -> Result<ScanReport, TvError> {
    if weight_max < 2 {
        return Err(TvError::invalid("weight_max must be at least 2"));
    }
    let indices: Vec<MultiIndex> = enumerate_up_to(weight_max).into_iter().filter(|k| !k.is_empty()).collect();
    let mut report = ScanReport::new("tail_collisions")
        .param("weight_max", weight_max)
        .param("resolution", resolution)
        .param("tails", indices.len());
    let values: Vec<Result<Enclosure, TvError>> =
        indices.par_iter().map(|k| cert.narrow(&tail(k), resolution)).collect();
    let mut closest: Option<(usize, usize, Enclosure)> = None;
    for i in 0..indices.len() {
        for j in (i + 1)..indices.len() {
            let (a, b) = match (&values[i], &values[j]) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    report.push(error_finding(vec![indices[i].to_string(), indices[j].to_string()], e));
                    continue;
                }
            };
            match a.gap_to(b) {
                Some(gap) => {
                    if closest.as_ref().is_none_or(|(_, _, g)| gap.certainly_lt(g)) {
                        closest = Some((i, j, gap));
                    }
                }
                None => report.push(
                    Finding::new(
                        vec![tail(&indices[i]).to_string(), tail(&indices[j]).to_string()],
                        FindingVerdict::Unresolved,
                    )
                    .with("a", a)
                    .with("b", b),
                ),
            }
        }
    }
    if let Some((i, j, gap)) = closest {
        report.push(
            Finding::new(
                vec![tail(&indices[i]).to_string(), tail(&indices[j]).to_string()],
                FindingVerdict::Note,
            )
            .with("separation", &gap)
            .detail("closest pair"),
        );
    }
    Ok(report.finish())
}

/// Compares `Φ(t(k, n))` against `(m, n)` under two readings of `m`:
/// A, the rank of `t(k)_1` among the tails; B, `min{r : t(k) > β_r}`.
///
/// A reading-A mismatch is a violation. For `k = ∅` the value `t(1) = ∞` is
/// conventionally placed at `(1, 1)`, so `(1, n − 1)` is accepted and noted.
/// Reading B is recorded without affecting the status.
pub fn check_phi_conjecture(
    cert: &Certifier,
    weight_max: u32,
    n_max: u32,
    total_weight_max: u32,
) -> Result<ScanReport, TvError> {
    if n_max == 0 {
        return Err(TvError::invalid("n_max must be positive"));
    }
    let mut report = ScanReport::new("phi_conjecture")
        .param("weight_max", weight_max)
        .param("n_max", n_max)
        .param("total_weight_max", total_weight_max);
    for k in enumerate_up_to(weight_max) {
        let rank = cert.rank_of_tail(&k)?;
        let literal = literal_m(cert, &k)?;
        for n in 1..=n_max {
            let kn = k.push(n);
            if !kn.is_admissible() || kn.weight() > total_weight_max {
                continue;
            }
            let phi = cert.phi(&kn)?;
            let n_us = n as usize;
            let agree_a = phi.band == rank && phi.position == n_us;
            let agree_b = phi.band == literal && phi.position == n_us;
            let shifted = k.is_empty() && phi.band == 1 && phi.position + 1 == n_us;
            let verdict = if agree_a {
                FindingVerdict::Pass
            } else if shifted {
                FindingVerdict::Note
            } else {
                FindingVerdict::Violation
            };
            let mut detail = format!(
                "phi={phi} reading_a=({rank}, {n}) reading_b=({literal}, {n}) a:{} b:{}",
                if agree_a { "agree" } else { "disagree" },
                if agree_b { "agree" } else { "disagree" }
            );
            if shifted {
                detail.push_str(" (t(1)=∞ occupies (1, 1))");
            }
            report.push(Finding::new(vec![kn.to_string()], verdict).detail(detail));
        }
    }
    Ok(report.finish())
}

/// `min{r : t(k) > β_r}`; an exact tie (only `t(∅) = β_1 = 1`) is not `>`.
fn literal_m(cert: &Certifier, k: &MultiIndex) -> Result<usize, TvError> {
    let value = full(k);
    for r in 1.. {
        let beta = cert.beta(r)?;
        let b = tail(&beta.source);
        let o = cert.compare(&value, &b)?;
        match o.verdict {
            Verdict::Greater => return Ok(r),
            Verdict::Less => {}
            Verdict::Unresolved => {
                let x = cert.value(&value)?;
                if !(x.is_point() && x == cert.value(&b)?) {
                    return Err(TvError::Frontier {
                        node: k.to_string(),
                        threshold: b.to_string(),
                    });
                }
            }
        }
    }
    unreachable!("β_r tends to zero")
}

#[cfg(test)]
mod tests;
