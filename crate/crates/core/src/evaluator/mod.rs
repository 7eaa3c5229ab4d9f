//! Certified evaluation of `t(k)_n`.
//!
//! [`eval_direct`] sums the truncated series and bounds the discarded region
//! crudely; it is slow but simple and serves as the oracle. [`eval`] uses the
//! accelerated expansion in `series` and climbs the precision ladder until the
//! requested width is met.

mod direct;
mod series;

pub use direct::eval_direct;

use serde::{Deserialize, Serialize};

use crate::error::TvError;
use crate::indices::ValueSpec;
use crate::numerics::{odd_power_tail_at, Enclosure, PrecisionBudget, Rung};

/// Default target width of an evaluation.
pub const DEFAULT_TARGET_WIDTH: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub spec: ValueSpec,
    pub target_width: f64,
    pub budget: PrecisionBudget,
}

impl EvalRequest {
    pub fn new(spec: ValueSpec, target_width: f64, budget: PrecisionBudget) -> Result<Self, TvError> {
        if !(target_width > 0.0 && target_width.is_finite()) {
            return Err(TvError::invalid(format!(
                "target width must be a positive real, got {target_width}"
            )));
        }
        budget.validate()?;
        Ok(Self {
            spec,
            target_width,
            budget,
        })
    }

    pub fn with_defaults(spec: ValueSpec) -> Self {
        Self {
            spec,
            target_width: DEFAULT_TARGET_WIDTH,
            budget: PrecisionBudget::default(),
        }
    }
}

/// Enclosure of `t(k)_n` with width at most the requested target.
///
/// Fails with [`TvError::BudgetExceeded`], carrying the best enclosure found,
/// when the ladder tops out first.
pub fn eval(request: &EvalRequest) -> Result<Enclosure, TvError> {
    let EvalRequest {
        spec,
        target_width,
        budget,
    } = request;
    check_spec(spec)?;
    budget.validate()?;
    if spec.index.is_empty() {
        return Ok(Enclosure::one(budget.start_bits));
    }
    // Rungs whose nominal resolution cannot reach the target are skipped.
    let needed = (-target_width.log2()).max(0.0) as u32;
    let ladder = budget.ladder();
    let mut last = None;
    for (i, &bits) in ladder.iter().enumerate() {
        if bits < needed && i + 1 < ladder.len() {
            continue;
        }
        let enc = eval_at(spec, bits, budget.max_terms)?;
        if enc.width_at_most(*target_width) {
            return Ok(enc);
        }
        last = Some((enc, bits));
    }
    let (partial, bits) = last.expect("ladder is never empty");
    Err(TvError::BudgetExceeded {
        width: partial.width_f64(),
        partial,
        bits,
    })
}

/// Enclosure of `t(k)_n` from a single rung of the ladder.
pub fn eval_at(spec: &ValueSpec, bits: u32, max_terms: u64) -> Result<Enclosure, TvError> {
    check_spec(spec)?;
    if bits < 16 {
        return Err(TvError::invalid(format!(
            "precision must be at least 16 bits, got {bits}"
        )));
    }
    let k = spec.index.exponents();
    if k.is_empty() {
        return Ok(Enclosure::one(bits));
    }
    let rung = Rung::for_bits(bits);
    if k.len() == 1 {
        let mut r = rung;
        r.cutoff = r.cutoff.min(max_terms);
        return Ok(odd_power_tail_at(k[0], spec.tail_offset, &r).with_prec(bits + 8));
    }
    series::eval_series(k, spec.tail_offset, &rung, max_terms)
}

fn check_spec(spec: &ValueSpec) -> Result<(), TvError> {
    if !spec.index.is_admissible() {
        return Err(TvError::Divergent(format!(
            "t({}) diverges: the first exponent must be at least 2",
            spec.index
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::{parse_spec, MultiIndex};
    use crate::numerics::const_pi;

    fn spec(s: &str) -> ValueSpec {
        parse_spec(s).unwrap()
    }

    fn eval_width(s: &str, w: f64) -> Enclosure {
        let r = EvalRequest::new(spec(s), w, PrecisionBudget::default()).unwrap();
        eval(&r).unwrap()
    }

    #[test]
    fn t2_to_thirty_digits() {
        let v = eval_width("2", 1e-30);
        assert!(v.width_at_most(1e-30));
        assert!(v.overlaps(&const_pi(200).unwrap().square().div_u64(8)));
    }

    #[test]
    fn reference_values() {
        let pi = const_pi(200).unwrap();
        let one = Enclosure::one(200);
        assert!(eval_width("2,2", 1e-20).overlaps(&pi.powi(4).div_u64(384)));
        assert!(eval_width("tail:1:2", 1e-20).overlaps(&pi.square().div_u64(8).sub(&one)));
        assert!(eval_width("4", 1e-20).overlaps(&pi.powi(4).div_u64(96)));
    }

    #[test]
    fn empty_index_is_exactly_one() {
        for n in [0, 1, 7] {
            let v = eval_width(&format!("tail:{n}:empty"), 1e-30);
            assert!(v.is_point());
            assert_eq!(v, Enclosure::one(v.prec()));
        }
    }

    #[test]
    fn budget_exceeded_carries_partial() {
        let b = PrecisionBudget::new(64, 64, 1000).unwrap();
        let r = EvalRequest::new(spec("2,1"), 1e-40, b).unwrap();
        match eval(&r) {
            Err(TvError::BudgetExceeded { partial, bits, .. }) => {
                assert_eq!(bits, 64);
                assert!(partial.overlaps(&eval_width("2,1", 1e-20)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inadmissible_is_divergent() {
        let s = ValueSpec {
            index: MultiIndex::new(vec![1, 2]).unwrap(),
            tail_offset: 0,
        };
        assert!(matches!(eval(&EvalRequest::with_defaults(s)), Err(TvError::Divergent(_))));
    }

    #[test]
    fn deterministic() {
        let a = eval_width("3,1,2", 1e-25);
        let b = eval_width("3,1,2", 1e-25);
        assert_eq!(a.lo_mantissa(), b.lo_mantissa());
        assert_eq!(a.hi_mantissa(), b.hi_mantissa());
    }

    #[test]
    fn tail_recurrence_small() {
        for s in ["2", "2,1", "3,2", "2,1,1,3"] {
            let k: MultiIndex = s.parse().unwrap();
            let full = eval_width(s, 1e-25);
            let tail = eval_width(&format!("tail:1:{s}"), 1e-25);
            let pre = eval_width(&format!("tail:1:{}", k.drop_last()), 1e-25);
            assert!(full.overlaps(&tail.add(&pre)), "{s}");
        }
    }

    #[test]
    fn large_offsets() {
        let v = eval_width("tail:1000000:2,1", 1e-30);
        assert!(v.lo_f64() > 0.0);
        let w = eval_width("tail:999999:2,1", 1e-30);
        assert!(v.certainly_lt(&w));
    }
}
