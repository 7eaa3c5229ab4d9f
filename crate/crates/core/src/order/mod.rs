//! Certified ordering of t-values and tails.
//!
//! The tails `t(k)_1` listed in decreasing order form the β-sequence
//! `β_1 = 1 > β_2 = t(2)_1 > …`. The full values between two consecutive
//! members, `β_{i−1} >= t(k) > β_i`, form band `i`, and `Φ(t(k)) = (i, j)`
//! locates a value as the `j`-th largest element of its band.
//!
//! Every search here is a branch-and-bound over exponents: increasing any
//! exponent decreases the value, so a node whose smallest-exponent
//! completion is already below the threshold closes its branch. Depths are
//! bounded by the convergent sums `Σ_d t(2,{1}_{d−1}) = 2G` and
//! `Σ_d t(2,{1}_{d−1})_1 = (2G−1)/2`.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::TvError;
use crate::evaluator::eval_at;
use crate::indices::{MultiIndex, ValueSpec};
use crate::numerics::{const_catalan, Enclosure, PrecisionBudget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Less,
    Greater,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub verdict: Verdict,
    /// Certified lower bound on `|a − b|`; zero when unresolved.
    pub separation: f64,
    pub bits_used: u32,
}

impl ComparisonOutcome {
    fn unresolved(bits_used: u32) -> Self {
        Self {
            verdict: Verdict::Unresolved,
            separation: 0.0,
            bits_used,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEntry {
    pub rank: usize,
    pub source: MultiIndex,
    pub value: Enclosure,
}

/// Band index and position within the band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhiCoord {
    pub band: usize,
    pub position: usize,
}

impl std::fmt::Display for PhiCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.band, self.position)
    }
}

/// Memoizing context for certified queries under one budget.
///
/// Enclosures, the β-table and band enumerations are cached; all methods take
/// `&self` and the type is `Sync`.
pub struct Certifier {
    budget: PrecisionBudget,
    memo: Mutex<HashMap<ValueSpec, (u32, Enclosure)>>,
    beta: Mutex<Vec<BetaEntry>>,
    bands: Mutex<HashMap<usize, (Enclosure, Vec<MultiIndex>)>>,
    ranks: Mutex<HashMap<MultiIndex, usize>>,
    seed: u64,
}

fn tail_of(k: &MultiIndex) -> ValueSpec {
    ValueSpec {
        index: k.clone(),
        tail_offset: 1,
    }
}

fn full_of(k: &MultiIndex) -> ValueSpec {
    ValueSpec {
        index: k.clone(),
        tail_offset: 0,
    }
}

fn completion(prefix: &[u32], depth: usize) -> MultiIndex {
    let mut v = prefix.to_vec();
    v.resize(depth, 1);
    MultiIndex::from(&v[..])
}

fn shrink_point(x: &Enclosure, rel_bits: u32) -> Enclosure {
    // lo − |lo|·2^(−rel_bits), as an exact point
    let lo = x.lower();
    let delta = lo.abs().mul_pow2(-(rel_bits as i32)).upper();
    let p = lo.sub(&delta).lower();
    Enclosure::from_mantissas(p.lo_mantissa().clone(), p.lo_mantissa().clone(), p.prec())
}

impl Certifier {
    pub fn new(budget: PrecisionBudget) -> Self {
        Self {
            budget,
            memo: Mutex::new(HashMap::new()),
            beta: Mutex::new(Vec::new()),
            bands: Mutex::new(HashMap::new()),
            ranks: Mutex::new(HashMap::new()),
            seed: 0x7476_616c_7565_73,
        }
    }

    pub fn budget(&self) -> &PrecisionBudget {
        &self.budget
    }

    /// Enclosure of `spec` at no less than `bits` of precision.
    pub fn enclosure(&self, spec: &ValueSpec, bits: u32) -> Result<Enclosure, TvError> {
        if let Some((b, e)) = self.memo.lock().expect("memo lock").get(spec) {
            if *b >= bits {
                return Ok(e.clone());
            }
        }
        let e = eval_at(spec, bits, self.budget.max_terms)?;
        self.memo
            .lock()
            .expect("memo lock")
            .insert(spec.clone(), (bits, e.clone()));
        Ok(e)
    }

    /// Enclosure of width at most `width`, climbing the ladder as needed.
    pub fn narrow(&self, spec: &ValueSpec, width: f64) -> Result<Enclosure, TvError> {
        let needed = (-width.log2()).max(0.0) as u32;
        let ladder = self.budget.ladder();
        let mut last = None;
        for (i, &bits) in ladder.iter().enumerate() {
            if bits < needed && i + 1 < ladder.len() {
                continue;
            }
            let e = self.enclosure(spec, bits)?;
            if e.width_at_most(width) {
                return Ok(e);
            }
            last = Some((e, bits));
        }
        let (partial, bits) = last.expect("ladder is never empty");
        Err(TvError::BudgetExceeded {
            width: partial.width_f64(),
            partial,
            bits,
        })
    }

    /// Enclosure at the budget's starting precision.
    pub fn value(&self, spec: &ValueSpec) -> Result<Enclosure, TvError> {
        self.enclosure(spec, self.budget.start_bits)
    }

    pub fn compare(&self, a: &ValueSpec, b: &ValueSpec) -> Result<ComparisonOutcome, TvError> {
        if a == b {
            return Ok(ComparisonOutcome::unresolved(0));
        }
        let mut bits_used = 0;
        for bits in self.budget.ladder() {
            let ea = self.enclosure(a, bits)?;
            let eb = self.enclosure(b, bits)?;
            bits_used = bits;
            if let Some(out) = resolve(&ea, &eb, bits) {
                return Ok(out);
            }
            if ea.is_point() && eb.is_point() {
                break;
            }
        }
        Ok(ComparisonOutcome::unresolved(bits_used))
    }

    /// Compares a value against a fixed enclosure (typically a point).
    pub fn compare_to(&self, a: &ValueSpec, x: &Enclosure) -> Result<ComparisonOutcome, TvError> {
        let mut bits_used = 0;
        for bits in self.budget.ladder() {
            let ea = self.enclosure(a, bits)?;
            bits_used = bits;
            if let Some(out) = resolve(&ea, x, bits) {
                return Ok(out);
            }
            if ea.is_point() {
                break;
            }
        }
        Ok(ComparisonOutcome::unresolved(bits_used))
    }

    /// Admissible `k` (the empty index included) with `t(k)_1 > threshold`,
    /// in canonical order.
    pub fn tails_above(&self, threshold: &Enclosure) -> Result<Vec<MultiIndex>, TvError> {
        if !threshold.certainly_gt(&Enclosure::zero(threshold.prec())) {
            return Err(TvError::invalid("threshold must be positive"));
        }
        let mut out = Vec::new();
        let one = Enclosure::one(threshold.prec());
        if one.certainly_gt(threshold) {
            out.push(MultiIndex::empty());
        } else if one.overlaps(threshold) && !threshold.is_point() {
            return Err(frontier("tail:1:empty", threshold));
        }
        let g = const_catalan(128)?;
        // Σ_{d>=1} t(2,{1}_{d−1})_1 = (2G − 1)/2
        let mut remaining = g.mul_u64(2).sub(&Enclosure::one(128)).div_u64(2);
        for depth in 1.. {
            if remaining.certainly_lt(threshold) {
                break;
            }
            let top = MultiIndex::two_ones(depth);
            let v = self.value(&tail_of(&top))?;
            remaining = remaining.sub(&v.lower());
            match self.compare_to(&tail_of(&top), threshold)?.verdict {
                Verdict::Less => continue,
                Verdict::Unresolved => return Err(frontier(&tail_of(&top).to_string(), threshold)),
                Verdict::Greater => {}
            }
            let mut prefix = Vec::with_capacity(depth);
            self.tails_dfs(&mut prefix, depth, threshold, &mut out)?;
        }
        out.sort_by(|a, b| a.depth().cmp(&b.depth()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    fn tails_dfs(
        &self,
        prefix: &mut Vec<u32>,
        depth: usize,
        threshold: &Enclosure,
        out: &mut Vec<MultiIndex>,
    ) -> Result<(), TvError> {
        let pos = prefix.len();
        let start = if pos == 0 { 2 } else { 1 };
        for e in start.. {
            prefix.push(e);
            let node = completion(prefix, depth);
            let spec = tail_of(&node);
            let verdict = self.compare_to(&spec, threshold)?.verdict;
            let step = match verdict {
                Verdict::Less => None,
                Verdict::Unresolved => {
                    prefix.pop();
                    return Err(frontier(&spec.to_string(), threshold));
                }
                Verdict::Greater if pos + 1 == depth => {
                    out.push(node);
                    Some(Ok(()))
                }
                Verdict::Greater => Some(self.tails_dfs(prefix, depth, threshold, out)),
            };
            prefix.pop();
            match step {
                None => break,
                Some(r) => r?,
            }
        }
        Ok(())
    }

    /// Sorts into certified strictly decreasing order of the given values.
    fn sort_decreasing(&self, items: Vec<(MultiIndex, ValueSpec)>) -> Result<Vec<(MultiIndex, ValueSpec)>, TvError> {
        let mut sorted: Vec<(MultiIndex, ValueSpec)> = Vec::with_capacity(items.len());
        for item in items {
            let (mut lo, mut hi) = (0usize, sorted.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                match self.compare(&item.1, &sorted[mid].1)?.verdict {
                    Verdict::Greater => hi = mid,
                    Verdict::Less => lo = mid + 1,
                    Verdict::Unresolved => {
                        return Err(TvError::Collision {
                            a: item.1.to_string(),
                            b: sorted[mid].1.to_string(),
                        })
                    }
                }
            }
            sorted.insert(lo, item);
        }
        Ok(sorted)
    }

    /// The `count` largest tail values with their generating indices.
    pub fn beta_table(&self, count: usize) -> Result<Vec<BetaEntry>, TvError> {
        if count == 0 {
            return Err(TvError::invalid("count must be positive"));
        }
        {
            let cached = self.beta.lock().expect("beta lock");
            if cached.len() >= count {
                return Ok(cached[..count].to_vec());
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let prec = 64;
        let mut threshold = Enclosure::one(prec).mul_pow2(-1);
        let mut frontier_hits = 0;
        let found = loop {
            match self.tails_above(&threshold) {
                Ok(list) if list.len() >= count => break list,
                Ok(_) => threshold = threshold.mul_pow2(-1),
                Err(TvError::Frontier { .. }) => {
                    frontier_hits += 1;
                    threshold = if frontier_hits >= 2 {
                        // random dyadic factor in [1/2, 1)
                        let m: u32 = rng.gen_range(1u32 << 15..1u32 << 16);
                        threshold.mul_int(&BigInt::from(m)).mul_pow2(-16)
                    } else {
                        threshold.mul_pow2(-1)
                    };
                }
                Err(e) => return Err(e),
            }
            log::debug!("beta table: lowering threshold to {}", threshold.mid_f64());
        };
        let items = found.into_iter().map(|k| (k.clone(), tail_of(&k))).collect();
        let sorted = self.sort_decreasing(items)?;
        let mut entries = Vec::with_capacity(sorted.len());
        for (r, (k, spec)) in sorted.into_iter().enumerate() {
            entries.push(BetaEntry {
                rank: r + 1,
                value: self.value(&spec)?,
                source: k,
            });
        }
        let mut cached = self.beta.lock().expect("beta lock");
        if cached.len() < entries.len() {
            *cached = entries;
        }
        Ok(cached[..count].to_vec())
    }

    /// Entry `r` (1-based) of the β-table, extending the table as needed.
    pub fn beta(&self, r: usize) -> Result<BetaEntry, TvError> {
        let have = self.beta.lock().expect("beta lock").len();
        let want = if r <= have { r } else { r.max(2 * have) };
        Ok(self.beta_table(want)?[r - 1].clone())
    }

    /// The rank `r` with `β_r = t(k)_1`: one plus the number of tails above.
    pub fn rank_of_tail(&self, k: &MultiIndex) -> Result<usize, TvError> {
        if !k.is_admissible() {
            return Err(TvError::invalid(format!("index ({k}) is not admissible")));
        }
        if let Some(r) = self.ranks.lock().expect("rank lock").get(k) {
            return Ok(*r);
        }
        let spec = tail_of(k);
        let v = self.value(&spec)?;
        let mut rel_bits = 24;
        let list = loop {
            let threshold = shrink_point(&v, rel_bits);
            match self.tails_above(&threshold) {
                Ok(list) => break list,
                Err(TvError::Frontier { .. }) if rel_bits < 48 => rel_bits += 7,
                Err(e) => return Err(e),
            }
        };
        if !list.contains(k) {
            return Err(TvError::invalid(format!(
                "tail of ({k}) missing from its own enumeration"
            )));
        }
        let mut rank = 1;
        for l in list.iter().filter(|l| *l != k) {
            match self.compare(&tail_of(l), &spec)?.verdict {
                Verdict::Greater => rank += 1,
                Verdict::Less => {}
                Verdict::Unresolved => {
                    return Err(TvError::Collision {
                        a: tail_of(l).to_string(),
                        b: spec.to_string(),
                    })
                }
            }
        }
        self.ranks.lock().expect("rank lock").insert(k.clone(), rank);
        Ok(rank)
    }

    /// Admissible `k` with `β_{i−1} >= t(k) >= alpha`, in decreasing order.
    ///
    /// `alpha` is taken at its lower endpoint and must lie certainly above
    /// `β_i`.
    pub fn band_prefix(&self, i: usize, alpha: &Enclosure) -> Result<Vec<MultiIndex>, TvError> {
        if i == 0 {
            return Err(TvError::invalid("band index must be positive"));
        }
        let alpha = alpha.lower();
        let beta_i = self.beta(i)?;
        match self.compare_to(&tail_of(&beta_i.source), &alpha)?.verdict {
            Verdict::Less => {}
            Verdict::Greater => {
                return Err(TvError::invalid(format!(
                    "alpha must exceed β_{i} = t({})_1",
                    beta_i.source
                )))
            }
            Verdict::Unresolved => {
                return Err(TvError::Band {
                    node: format!("β_{i} against alpha"),
                })
            }
        }
        let upper = if i >= 2 { Some(self.beta(i - 1)?) } else { None };
        let g = const_catalan(128)?;
        // Σ_{d>=1} t(2,{1}_{d−1}) = 2G
        let mut remaining = g.mul_u64(2);
        let mut found = Vec::new();
        for depth in 1.. {
            if remaining.certainly_lt(&alpha) {
                break;
            }
            let top = full_of(&MultiIndex::two_ones(depth));
            remaining = remaining.sub(&self.value(&top)?.lower());
            match self.compare_to(&top, &alpha)?.verdict {
                Verdict::Less => continue,
                Verdict::Unresolved => return Err(TvError::Band { node: top.to_string() }),
                Verdict::Greater => {}
            }
            let mut prefix = Vec::with_capacity(depth);
            self.band_dfs(&mut prefix, depth, &alpha, upper.as_ref(), &mut found)?;
        }
        let items = found.into_iter().map(|k| (k.clone(), full_of(&k))).collect();
        Ok(self
            .sort_decreasing(items)?
            .into_iter()
            .map(|(k, _)| k)
            .collect())
    }

    fn band_dfs(
        &self,
        prefix: &mut Vec<u32>,
        depth: usize,
        alpha: &Enclosure,
        upper: Option<&BetaEntry>,
        out: &mut Vec<MultiIndex>,
    ) -> Result<(), TvError> {
        let pos = prefix.len();
        let start = if pos == 0 { 2 } else { 1 };
        if pos + 1 == depth {
            // t(prefix, e) decreases to t(prefix)_1 as e grows; if that limit
            // is at or above β_{i−1} the whole branch lies above the band.
            if let Some(up) = upper {
                let p = MultiIndex::from(&prefix[..]);
                if p == up.source {
                    return Ok(());
                }
                match self.compare(&tail_of(&p), &tail_of(&up.source))?.verdict {
                    Verdict::Greater => return Ok(()),
                    Verdict::Less => {}
                    Verdict::Unresolved => {
                        return Err(TvError::Band {
                            node: tail_of(&p).to_string(),
                        })
                    }
                }
            }
            for e in start.. {
                let k = MultiIndex::from(&prefix[..]).push(e);
                let spec = full_of(&k);
                match self.compare_to(&spec, alpha)?.verdict {
                    Verdict::Less => break,
                    Verdict::Unresolved => return Err(TvError::Band { node: spec.to_string() }),
                    Verdict::Greater => {}
                }
                if let Some(up) = upper {
                    match self.compare(&spec, &tail_of(&up.source))?.verdict {
                        Verdict::Greater => continue,
                        Verdict::Less => {}
                        Verdict::Unresolved => {
                            return Err(TvError::Band { node: spec.to_string() })
                        }
                    }
                }
                out.push(k);
            }
            return Ok(());
        }
        for e in start.. {
            prefix.push(e);
            let spec = full_of(&completion(prefix, depth));
            let verdict = self.compare_to(&spec, alpha)?.verdict;
            let step = match verdict {
                Verdict::Less => None,
                Verdict::Unresolved => Some(Err(TvError::Band { node: spec.to_string() })),
                Verdict::Greater => Some(self.band_dfs(prefix, depth, alpha, upper, out)),
            };
            prefix.pop();
            match step {
                None => break,
                Some(r) => r?,
            }
        }
        Ok(())
    }

    /// Band of `t(k)`: the least `r` with `t(k) > β_r`.
    pub fn band_of(&self, k: &MultiIndex) -> Result<usize, TvError> {
        let spec = full_of(k);
        for r in 1.. {
            let b = self.beta(r)?;
            match self.compare(&spec, &tail_of(&b.source))?.verdict {
                Verdict::Greater => return Ok(r),
                Verdict::Less => {}
                Verdict::Unresolved => {
                    return Err(TvError::Collision {
                        a: spec.to_string(),
                        b: tail_of(&b.source).to_string(),
                    })
                }
            }
        }
        unreachable!("band search is unbounded")
    }

    /// `Φ(t(k)) = (i, j)`: band index and position within the band.
    pub fn phi(&self, k: &MultiIndex) -> Result<PhiCoord, TvError> {
        if k.is_empty() || !k.is_admissible() {
            return Err(TvError::invalid(format!(
                "Φ needs a nonempty admissible index, got ({k})"
            )));
        }
        let band = self.band_of(k)?;
        let spec = full_of(k);
        let v = self.value(&spec)?;
        let beta = self.value(&tail_of(&self.beta(band)?.source))?;
        // alpha strictly between β_band and t(k), close to t(k)
        let gap_half = v.lower().sub(&beta.upper()).mul_pow2(-1);
        let near = v.lower().abs().mul_pow2(-40);
        let step = if gap_half.certainly_lt(&near) { gap_half } else { near };
        let alpha = v.lower().sub(&step.upper()).lower();

        let cached = {
            let bands = self.bands.lock().expect("band lock");
            bands
                .get(&band)
                .filter(|(a, _)| !a.certainly_gt(&alpha))
                .map(|(_, list)| list.clone())
        };
        let list = match cached {
            Some(list) if list.contains(k) => list,
            _ => {
                let list = self.band_prefix(band, &alpha)?;
                let mut bands = self.bands.lock().expect("band lock");
                let replace = bands
                    .get(&band)
                    .is_none_or(|(a, _)| a.certainly_gt(&alpha));
                if replace {
                    bands.insert(band, (alpha.clone(), list.clone()));
                }
                list
            }
        };
        if !list.contains(k) {
            return Err(TvError::Band {
                node: format!("{spec} missing from band {band}"),
            });
        }
        let mut position = 1;
        for l in list.iter().filter(|l| *l != k) {
            match self.compare(&full_of(l), &spec)?.verdict {
                Verdict::Greater => position += 1,
                Verdict::Less => {}
                Verdict::Unresolved => {
                    return Err(TvError::Collision {
                        a: full_of(l).to_string(),
                        b: spec.to_string(),
                    })
                }
            }
        }
        Ok(PhiCoord { band, position })
    }
}

fn resolve(a: &Enclosure, b: &Enclosure, bits: u32) -> Option<ComparisonOutcome> {
    let (verdict, gap) = if a.certainly_gt(b) {
        (Verdict::Greater, a.lower().sub(&b.upper()))
    } else if a.certainly_lt(b) {
        (Verdict::Less, b.lower().sub(&a.upper()))
    } else {
        return None;
    };
    let separation = gap.lo_f64().max(f64::MIN_POSITIVE);
    Some(ComparisonOutcome {
        verdict,
        separation,
        bits_used: bits,
    })
}

fn frontier(node: &str, threshold: &Enclosure) -> TvError {
    TvError::Frontier {
        node: node.to_string(),
        threshold: format!("{:e}", threshold.mid_f64()),
    }
}

/// Certified comparison of two values under a fresh budget.
pub fn compare(a: &ValueSpec, b: &ValueSpec, budget: &PrecisionBudget) -> Result<ComparisonOutcome, TvError> {
    Certifier::new(*budget).compare(a, b)
}

/// Admissible `k` with `t(k)_1 > threshold`.
pub fn enumerate_tails_above(threshold: f64, budget: &PrecisionBudget) -> Result<Vec<MultiIndex>, TvError> {
    let t = Enclosure::from_f64(threshold, 128)?;
    Certifier::new(*budget).tails_above(&t)
}

pub fn beta_table(count: usize, budget: &PrecisionBudget) -> Result<Vec<BetaEntry>, TvError> {
    Certifier::new(*budget).beta_table(count)
}

pub fn rank_of_tail(k: &MultiIndex, budget: &PrecisionBudget) -> Result<usize, TvError> {
    Certifier::new(*budget).rank_of_tail(k)
}

pub fn band_prefix(i: usize, alpha: &Enclosure, budget: &PrecisionBudget) -> Result<Vec<MultiIndex>, TvError> {
    Certifier::new(*budget).band_prefix(i, alpha)
}

pub fn phi(k: &MultiIndex, budget: &PrecisionBudget) -> Result<PhiCoord, TvError> {
    Certifier::new(*budget).phi(k)
}
