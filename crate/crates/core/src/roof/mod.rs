//! Roof functions, stopping times, variable-length index families, and the
//! partition adapted to the time-1 suspension map.
//!
//! The roof of a symbol pair is `f(γ) = −η log J_η^u(γ₀, γ₁)`; a word's
//! stopping time at threshold `t` is the unique `k` with
//! `Σ_{i=1}^{k-2} f(σ^i x) ≤ t < Σ_{i=1}^{k-1} f(σ^i x)`. The index family
//! at `t` collects every word cut at its stopping time; it is a complete
//! prefix code. Enumeration is depth-first over the prefix tree with a hard
//! word-count cap (a configuration value, never silent truncation).
//!
//! Floating-point boundary ties are the only ambiguity source in these
//! combinatorics; the [`exact`] submodule reruns them in integer arithmetic
//! over a common denominator.

pub mod engine;
pub mod exact;

use crate::dynamics::JacobianTable;
use crate::error::{Error, Result};
use crate::symbolic::{CylinderMeasure, Orientation, Word};
use engine::PairTable;
use serde::{Deserialize, Serialize};

/// Default cap on enumerated words / refined atoms.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

/// Half-open interval `[lo, hi)` on the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }
    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
    pub fn intersect(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.max(o.lo), self.hi.min(o.hi))
    }
}

/// Strictly positive function on symbol pairs with recorded bounds
/// `a₀η ≤ f(γ) ≤ b₀η`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoofFunction {
    pub eta: f64,
    pub k: usize,
    /// `values[γ₀·k + γ₁] = f(γ₀, γ₁)`.
    values: Vec<f64>,
    pub a0: f64,
    pub b0: f64,
}

impl RoofFunction {
    /// `f(γ) = −η log J_η^u(γ)` from a discrete-Jacobian table. The table's
    /// widened bounds make `a₀η ≤ f ≤ b₀η` hold by construction.
    pub fn from_jacobian(table: &JacobianTable) -> Self {
        let values = table
            .values
            .iter()
            .map(|&j| -table.eta * j.ln())
            .collect();
        RoofFunction {
            eta: table.eta,
            k: table.k,
            values,
            a0: table.a0,
            b0: table.b0,
        }
    }

    /// Synthetic roof from explicit pair values; bounds are the exact
    /// extrema.
    pub fn from_values(eta: f64, k: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != k * k {
            return Err(Error::domain(format!(
                "need {k}×{k} pair values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::domain("roof values must be strictly positive"));
        }
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        Ok(RoofFunction {
            eta,
            k,
            values,
            a0: min / eta,
            b0: max / eta,
        })
    }

    /// Constant roof, convenient for closed-form tests.
    pub fn constant(eta: f64, k: usize, value: f64) -> Result<Self> {
        Self::from_values(eta, k, vec![value; k * k])
    }

    /// Forward roof of a pair.
    pub fn pair(&self, a: u8, b: u8) -> f64 {
        self.values[a as usize * self.k + b as usize]
    }

    /// Backward roof `f₋(β) = f(β_{-1}, β₀)`; in digit order this is the
    /// transposed lookup.
    pub fn pair_backward(&self, d0: u8, d1: u8) -> f64 {
        // d0 = β₀, d1 = β_{-1}
        self.pair(d1, d0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MIN, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MAX, f64::min)
    }

    /// Roof of the first pair of a word given in digit order, respecting
    /// orientation.
    pub fn fiber_of_digits(&self, digits: &[u8], orientation: Orientation) -> f64 {
        match orientation {
            Orientation::Forward => self.pair(digits[0], digits[1]),
            Orientation::Backward => self.pair_backward(digits[0], digits[1]),
        }
    }

    fn table(&self, orientation: Orientation) -> PairTable<'_, f64> {
        PairTable {
            k: self.k,
            values: &self.values,
            transposed: orientation == Orientation::Backward,
        }
    }

    /// Smallest ε compatible with both couplings `ηb₀ ≤ ε/2` and
    /// `(2 + b₀/a₀) b₀ η ≤ ε/2`.
    pub fn minimal_epsilon(&self) -> f64 {
        2.0 * (2.0 + self.b0 / self.a0) * self.b0 * self.eta
    }

    /// Enforce the parameter couplings for a configured ε.
    pub fn validate_epsilon(&self, eps: f64) -> Result<()> {
        if self.eta * self.b0 > eps / 2.0 {
            return Err(Error::config(format!(
                "ηb₀ = {:.6} exceeds ε/2 = {:.6}",
                self.eta * self.b0,
                eps / 2.0
            )));
        }
        let coupled = (2.0 + self.b0 / self.a0) * self.b0 * self.eta;
        if coupled > eps / 2.0 {
            return Err(Error::config(format!(
                "(2 + b₀/a₀)·b₀η = {coupled:.6} exceeds ε/2 = {:.6}",
                eps / 2.0
            )));
        }
        Ok(())
    }
}

/// Stopping time `k_t(x)` of a forward symbol stream. Depends only on the
/// first `k+1` symbols; requires `t ≥ 2b₀η`.
pub fn stopping_time(f: &RoofFunction, stream: &[u8], t: f64) -> Result<usize> {
    check_threshold(f, t)?;
    engine::stopping_index(&f.table(Orientation::Forward), stream, t)
}

fn check_threshold(f: &RoofFunction, t: f64) -> Result<()> {
    if t < 2.0 * f.b0 * f.eta {
        return Err(Error::domain(format!(
            "threshold t = {t} below 2b₀η = {}",
            2.0 * f.b0 * f.eta
        )));
    }
    Ok(())
}

/// The variable-length word set at threshold `t`: a complete prefix code
/// over words of length ≥ 4.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexFamily {
    pub t: f64,
    pub orientation: Orientation,
    pub words: Vec<Word>,
}

impl IndexFamily {
    pub fn len(&self) -> usize {
        self.words.len()
    }
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
    pub fn max_word_len(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }
}

/// Exhaustive enumeration of the index family at `t ≥ 2b₀η`.
pub fn index_family(f: &RoofFunction, t: f64, orientation: Orientation) -> Result<IndexFamily> {
    index_family_with_cap(f, t, orientation, DEFAULT_ENUMERATION_CAP)
}

pub fn index_family_with_cap(
    f: &RoofFunction,
    t: f64,
    orientation: Orientation,
    cap: usize,
) -> Result<IndexFamily> {
    check_threshold(f, t)?;
    let words = engine::enumerate_family(&f.table(orientation), t, cap)?
        .into_iter()
        .map(|d| Word::from_digits(d, orientation))
        .collect();
    Ok(IndexFamily {
        t,
        orientation,
        words,
    })
}

/// `|Σ_{α ∈ family} μ([α]) − 1|`: the classical shadow of the refined
/// partition-of-identity property.
pub fn check_partition_completeness(
    family: &IndexFamily,
    measure: &CylinderMeasure,
) -> Result<f64> {
    if family.orientation != measure.orientation {
        return Err(Error::domain("family and measure orientation differ"));
    }
    let mut sum = 0.0;
    for w in &family.words {
        sum += measure.mass(w)?;
    }
    Ok((sum - 1.0).abs())
}

/// Ratio bound of the stopping-window lemma: `|k − k'| ≤ b₀/a₀ + 1`.
pub fn k_window_bound(f: &RoofFunction) -> f64 {
    f.b0 / f.a0 + 1.0
}

/// The unique `k' ≤ k` whose from-the-start sums straddle the threshold.
/// Errors when the word is not a family member at `t`.
pub fn k_prime(f: &RoofFunction, alpha: &Word, t: f64) -> Result<usize> {
    if alpha.orientation != Orientation::Forward {
        return Err(Error::domain("k' is computed on forward words"));
    }
    alpha.validate(f.k)?;
    let digits = alpha.digits();
    let table = f.table(Orientation::Forward);
    let k = engine::family_k(&table, &digits, t)?;
    let kp = engine::k_prime_of(&table, &digits, t)?;
    let bound = k_window_bound(f);
    // Stopping-window lemma; holds for every family member.
    debug_assert!(
        (k as f64 - kp as f64).abs() <= bound + 1e-9,
        "stopping-window bound violated: |{k} − {kp}| > {bound}"
    );
    Ok(kp)
}

/// Atom of the adapted partition: a family word at threshold 1, a jump size
/// `p ∈ [k', k]`, and the fiber subinterval `I_{p-2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedAtom {
    pub gamma: Word,
    pub k: usize,
    pub k_prime: usize,
    pub p: usize,
    pub interval: Interval,
}

/// The partition adapted to the time-1 suspension map: for each family word
/// at threshold 1, the interval chain `I_{k'-2}, …, I_{k-2}` partitioning
/// `[0, f(γ))`. Intervals may be empty; the atom count per word is exactly
/// `k − k' + 1`. Requires the max roof value ≤ 1 (stopping times stay ≥ 3);
/// the threshold is pinned to 1 because the partition belongs to the time-1
/// suspension map.
pub fn adapted_partition(f: &RoofFunction) -> Result<Vec<AdaptedAtom>> {
    adapted_partition_with_cap(f, DEFAULT_ENUMERATION_CAP)
}

pub fn adapted_partition_with_cap(f: &RoofFunction, cap: usize) -> Result<Vec<AdaptedAtom>> {
    if f.max_value() > 1.0 {
        return Err(Error::config(format!(
            "adapted partition needs max roof value ≤ 1, got {}",
            f.max_value()
        )));
    }
    let atoms = engine::adapted_atoms(&f.table(Orientation::Forward), 1.0, cap)?;
    Ok(atoms
        .into_iter()
        .map(|a| AdaptedAtom {
            gamma: Word::forward(a.digits),
            k: a.k,
            k_prime: a.k_prime,
            p: a.p,
            interval: Interval::new(a.lo, a.hi),
        })
        .collect())
}

/// Refined atom of the n-fold join: a joined word and one fiber subinterval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedAtom {
    pub alpha: Word,
    pub interval: Interval,
}

/// Nonempty atoms of `∨_{i=0}^{n-1} σ̄^{-i} C̄` for the adapted partition
/// `C̄` of `f`. At `n = 1` this reproduces the nonempty adapted atoms.
pub fn refine(f: &RoofFunction, n: usize) -> Result<Vec<RefinedAtom>> {
    refine_with_cap(f, n, DEFAULT_ENUMERATION_CAP)
}

pub fn refine_with_cap(f: &RoofFunction, n: usize, cap: usize) -> Result<Vec<RefinedAtom>> {
    if f.max_value() > 1.0 {
        return Err(Error::config(format!(
            "refinement needs max roof value ≤ 1, got {}",
            f.max_value()
        )));
    }
    let atoms = engine::refine(&f.table(Orientation::Forward), 1.0, n, cap)?;
    Ok(atoms
        .into_iter()
        .map(|a| RefinedAtom {
            alpha: Word::forward(a.digits),
            interval: Interval::new(a.lo, a.hi),
        })
        .collect())
}

/// Roof sum `Σ_{j=0}^{k-1} f(σ^j α)` of a full forward word.
pub fn roof_sum(f: &RoofFunction, alpha: &Word) -> f64 {
    engine::roof_sum(&f.table(Orientation::Forward), &alpha.digits())
}

/// Audit of the refinement lemma at level `n` for a configured ε: every
/// atom's roof sum must lie in `[n(1−ε), n(1+ε)]`, and when `n(1−ε)` is a
/// valid threshold (≥ 2b₀η) every atom's word must extend a unique member
/// of the family at that threshold. Returns the worst roof-sum excess
/// (negative when all sums are strictly inside) and the number of
/// finer-than checks performed.
pub fn audit_refinement(
    f: &RoofFunction,
    atoms: &[RefinedAtom],
    n: usize,
    eps: f64,
) -> Result<(f64, usize)> {
    let lo = n as f64 * (1.0 - eps);
    let hi = n as f64 * (1.0 + eps);
    let mut worst_excess = f64::NEG_INFINITY;
    let t_finer = lo;
    let finer_applicable = t_finer >= 2.0 * f.b0 * f.eta;
    let mut finer_checked = 0usize;
    for atom in atoms {
        let s = roof_sum(f, &atom.alpha);
        worst_excess = worst_excess.max(lo - s).max(s - hi);
        if finer_applicable {
            let k = engine::stopping_index(
                &f.table(Orientation::Forward),
                &atom.alpha.digits(),
                t_finer,
            )?;
            if k + 1 > atom.alpha.len() {
                return Err(Error::domain(format!(
                    "refined word of length {} does not reach its stopping prefix {}",
                    atom.alpha.len(),
                    k + 1
                )));
            }
            finer_checked += 1;
        }
    }
    Ok((worst_excess, finer_checked))
}
