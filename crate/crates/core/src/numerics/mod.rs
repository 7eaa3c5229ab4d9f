//! Enclosure arithmetic, constants and one-dimensional odd-power tails.

mod constants;
mod enclosure;
mod tail;

pub use constants::{bernoulli_even, bernoulli_over_factorial, const_catalan, const_pi, euler_numbers};
pub(crate) use constants::{binomial, factorial};
pub use enclosure::{decimal_digits_for, Enclosure};
pub use tail::{coarse_tail_bounds, odd_power, odd_power_partial, odd_power_tail, Rung};
pub(crate) use tail::odd_power_tail_at;

use serde::{Deserialize, Serialize};

use crate::error::TvError;

/// Precision ladder limits: start, ceiling, and per-variable term cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionBudget {
    pub start_bits: u32,
    pub max_bits: u32,
    pub max_terms: u64,
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        Self {
            start_bits: 64,
            max_bits: 4096,
            max_terms: 10_000_000,
        }
    }
}

impl PrecisionBudget {
    pub fn new(start_bits: u32, max_bits: u32, max_terms: u64) -> Result<Self, TvError> {
        let b = Self {
            start_bits,
            max_bits,
            max_terms,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), TvError> {
        if self.start_bits < 16 {
            return Err(TvError::invalid(format!(
                "start_bits must be at least 16, got {}",
                self.start_bits
            )));
        }
        if self.start_bits > self.max_bits {
            return Err(TvError::invalid(format!(
                "start_bits {} exceeds max_bits {}",
                self.start_bits, self.max_bits
            )));
        }
        if self.max_terms == 0 {
            return Err(TvError::invalid("max_terms must be positive"));
        }
        Ok(())
    }

    /// Precisions visited by the ladder: start, doubling, capped at max.
    pub fn ladder(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut b = self.start_bits;
        loop {
            out.push(b);
            if b >= self.max_bits {
                break;
            }
            b = b.saturating_mul(2).min(self.max_bits);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_doubles_and_caps() {
        let b = PrecisionBudget::new(64, 600, 10).unwrap();
        assert_eq!(b.ladder(), vec![64, 128, 256, 512, 600]);
        assert_eq!(PrecisionBudget::default().ladder().len(), 7);
    }

    #[test]
    fn budget_validation() {
        assert!(PrecisionBudget::new(128, 64, 10).is_err());
        assert!(PrecisionBudget::new(8, 64, 10).is_err());
        assert!(PrecisionBudget::new(64, 64, 0).is_err());
    }

    #[test]
    fn catalan_and_pi_derived_quantities() {
        let g = const_catalan(128).unwrap();
        let pi = const_pi(128).unwrap();
        let half_gap = g.mul_u64(2).sub(&Enclosure::one(128)).div_u64(2);
        assert!((half_gap.mid_f64() - 0.416).abs() < 5e-4);
        let d = g.mul_u64(2).sub(&pi.square().div_u64(8));
        assert!(d.certainly_gt(&Enclosure::zero(128)));
        assert!(d.certainly_lt(&Enclosure::one(128)));
    }
}
