//! Exact-rational rerun of the roof combinatorics.
//!
//! Roof values are given as integer numerators over one common denominator,
//! so stopping sums, interval endpoints, and threshold comparisons are exact
//! integer arithmetic. This is the arbiter for boundary ties that floating
//! point cannot classify.

use super::engine::{self, PairTable};
use crate::error::{Error, Result};
use crate::symbolic::{Orientation, Word};
use serde::{Deserialize, Serialize};

/// Roof with pair values `num[γ]/den`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactRoof {
    pub k: usize,
    pub den: i128,
    /// `num[γ₀·k + γ₁]`, all strictly positive.
    pub num: Vec<i128>,
}

/// Rational `num/den` interval endpoint pair over the roof's denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactInterval {
    pub lo_num: i128,
    pub hi_num: i128,
}

impl ExactInterval {
    pub fn is_empty(&self) -> bool {
        self.lo_num >= self.hi_num
    }
    pub fn len_num(&self) -> i128 {
        (self.hi_num - self.lo_num).max(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactAdaptedAtom {
    pub gamma: Word,
    pub k: usize,
    pub k_prime: usize,
    pub p: usize,
    pub interval: ExactInterval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactRefinedAtom {
    pub alpha: Word,
    pub interval: ExactInterval,
}

impl ExactRoof {
    pub fn new(k: usize, den: i128, num: Vec<i128>) -> Result<Self> {
        if den <= 0 {
            return Err(Error::domain("denominator must be positive"));
        }
        if num.len() != k * k {
            return Err(Error::domain(format!(
                "need {k}×{k} numerators, got {}",
                num.len()
            )));
        }
        if num.iter().any(|&n| n <= 0) {
            return Err(Error::domain("roof numerators must be strictly positive"));
        }
        Ok(ExactRoof { k, den, num })
    }

    fn table(&self, orientation: Orientation) -> PairTable<'_, i128> {
        PairTable {
            k: self.k,
            values: &self.num,
            transposed: orientation == Orientation::Backward,
        }
    }

    pub fn max_num(&self) -> i128 {
        *self.num.iter().max().unwrap()
    }

    pub fn min_num(&self) -> i128 {
        *self.num.iter().min().unwrap()
    }

    pub fn as_f64(&self) -> super::RoofFunction {
        let values = self
            .num
            .iter()
            .map(|&n| n as f64 / self.den as f64)
            .collect();
        super::RoofFunction::from_values(1.0, self.k, values).expect("positive values")
    }

    /// Stopping time at rational threshold `t_num/den`.
    pub fn stopping_time(&self, stream: &[u8], t_num: i128) -> Result<usize> {
        if t_num < 2 * self.max_num() {
            return Err(Error::domain("threshold below 2·max roof value"));
        }
        engine::stopping_index(&self.table(Orientation::Forward), stream, t_num)
    }

    /// Index family at rational threshold `t_num/den`.
    pub fn index_family(
        &self,
        t_num: i128,
        orientation: Orientation,
        cap: usize,
    ) -> Result<Vec<Word>> {
        if t_num < 2 * self.max_num() {
            return Err(Error::domain("threshold below 2·max roof value"));
        }
        Ok(engine::enumerate_family(&self.table(orientation), t_num, cap)?
            .into_iter()
            .map(|d| Word::from_digits(d, orientation))
            .collect())
    }

    pub fn k_prime(&self, alpha: &Word, t_num: i128) -> Result<usize> {
        engine::k_prime_of(&self.table(Orientation::Forward), &alpha.digits(), t_num)
    }

    pub fn family_k(&self, alpha: &Word, t_num: i128) -> Result<usize> {
        engine::family_k(&self.table(Orientation::Forward), &alpha.digits(), t_num)
    }

    /// Exact stopping-window check `k − k' ≤ b₀/a₀ + 1`, cross-multiplied.
    pub fn window_bound_holds(&self, k: usize, k_prime: usize) -> bool {
        let gap = k as i128 - k_prime as i128;
        (gap - 1) * self.min_num() <= self.max_num()
    }

    /// Adapted partition at threshold 1 (numerator = den).
    pub fn adapted_partition(&self, cap: usize) -> Result<Vec<ExactAdaptedAtom>> {
        if self.max_num() > self.den {
            return Err(Error::config("adapted partition needs max roof value ≤ 1"));
        }
        let atoms = engine::adapted_atoms(&self.table(Orientation::Forward), self.den, cap)?;
        Ok(atoms
            .into_iter()
            .map(|a| ExactAdaptedAtom {
                gamma: Word::forward(a.digits),
                k: a.k,
                k_prime: a.k_prime,
                p: a.p,
                interval: ExactInterval {
                    lo_num: a.lo,
                    hi_num: a.hi,
                },
            })
            .collect())
    }

    /// Refinement of the adapted partition at level `n`.
    pub fn refine(&self, n: usize, cap: usize) -> Result<Vec<ExactRefinedAtom>> {
        if self.max_num() > self.den {
            return Err(Error::config("refinement needs max roof value ≤ 1"));
        }
        let atoms = engine::refine(&self.table(Orientation::Forward), self.den, n, cap)?;
        Ok(atoms
            .into_iter()
            .map(|a| ExactRefinedAtom {
                alpha: Word::forward(a.digits),
                interval: ExactInterval {
                    lo_num: a.lo,
                    hi_num: a.hi,
                },
            })
            .collect())
    }

    /// Roof sum numerator of a full forward word.
    pub fn roof_sum_num(&self, alpha: &Word) -> i128 {
        engine::roof_sum(&self.table(Orientation::Forward), &alpha.digits())
    }
}
