//! Shift spaces over a finite alphabet and their cylinder measures.
//!
//! Words and measures exist in two orientations. A forward word is
//! `(α₀, …, α_k)` read left to right; a backward word is `(β_{-k}, …, β₀)`.
//! Internally both are stored in *digit order*: digit `j` of a forward word
//! is `α_j`, digit `j` of a backward word is `β_{-j}`. Cylinder masses are
//! kept as dense per-depth tables indexed radix-`K` by digits, which makes
//! Kolmogorov compatibility (marginalizing the deepest digit) a strided sum.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Forward,
    Backward,
}

/// Finite word over the alphabet `{0, …, K−1}`.
///
/// `symbols` is in *written* order: `α₀…α_k` for forward words,
/// `β_{-k}…β₀` for backward words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<u8>,
    pub orientation: Orientation,
}

impl Word {
    pub fn forward(symbols: Vec<u8>) -> Self {
        Word {
            symbols,
            orientation: Orientation::Forward,
        }
    }

    pub fn backward(symbols: Vec<u8>) -> Self {
        Word {
            symbols,
            orientation: Orientation::Backward,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Digits as stored in measure tables: forward words as written,
    /// backward words reversed (digit 0 is β₀).
    pub fn digits(&self) -> Vec<u8> {
        match self.orientation {
            Orientation::Forward => self.symbols.clone(),
            Orientation::Backward => self.symbols.iter().rev().copied().collect(),
        }
    }

    pub fn from_digits(digits: Vec<u8>, orientation: Orientation) -> Self {
        match orientation {
            Orientation::Forward => Word::forward(digits),
            Orientation::Backward => Word::backward(digits.into_iter().rev().collect()),
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.symbols.is_empty() {
            return Err(Error::domain("word must have length ≥ 1"));
        }
        if self.symbols.iter().any(|&s| s as usize >= k) {
            return Err(Error::domain(format!("symbol out of range for alphabet {k}")));
        }
        Ok(())
    }
}

/// Radix-`K` index of a digit string.
pub fn digits_to_index(digits: &[u8], k: usize) -> usize {
    let mut idx = 0usize;
    for (j, &d) in digits.iter().enumerate() {
        idx += (d as usize) * k.pow(j as u32);
    }
    idx
}

/// Inverse of [`digits_to_index`] at a fixed depth.
pub fn index_to_digits(mut idx: usize, k: usize, depth: usize) -> Vec<u8> {
    let mut digits = Vec::with_capacity(depth);
    for _ in 0..depth {
        digits.push((idx % k) as u8);
        idx /= k;
    }
    digits
}

/// Hard cap on a single depth table.
pub const MAX_TABLE_ENTRIES: usize = 1 << 27;

/// Depth-truncated cylinder measure: `tables[d-1][index(digits)]` is the
/// mass of the depth-`d` cylinder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CylinderMeasure {
    pub k: usize,
    pub orientation: Orientation,
    tables: Vec<Vec<f64>>,
}

impl CylinderMeasure {
    pub fn from_tables(
        k: usize,
        orientation: Orientation,
        tables: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if k == 0 || tables.is_empty() {
            return Err(Error::domain("measure needs alphabet and depth ≥ 1"));
        }
        for (d, t) in tables.iter().enumerate() {
            let expect = k.checked_pow((d + 1) as u32).ok_or_else(|| {
                Error::Resource("table size overflows".into())
            })?;
            if t.len() != expect {
                return Err(Error::domain(format!(
                    "depth-{} table has {} entries, expected {}",
                    d + 1,
                    t.len(),
                    expect
                )));
            }
            if t.iter().any(|&m| m < -1e-12 || !m.is_finite()) {
                return Err(Error::domain("negative or non-finite mass"));
            }
        }
        Ok(CylinderMeasure {
            k,
            orientation,
            tables,
        })
    }

    pub fn depth(&self) -> usize {
        self.tables.len()
    }

    pub fn table(&self, depth: usize) -> &[f64] {
        &self.tables[depth - 1]
    }

    /// Mass of the cylinder labeled by `word`. The word's orientation must
    /// match the measure's.
    pub fn mass(&self, word: &Word) -> Result<f64> {
        if word.orientation != self.orientation {
            return Err(Error::domain("word orientation does not match measure"));
        }
        word.validate(self.k)?;
        if word.len() > self.depth() {
            return Err(Error::range(format!(
                "word length {} exceeds measure depth {}",
                word.len(),
                self.depth()
            )));
        }
        Ok(self.tables[word.len() - 1][digits_to_index(&word.digits(), self.k)])
    }

    pub fn mass_of_digits(&self, digits: &[u8]) -> f64 {
        self.tables[digits.len() - 1][digits_to_index(digits, self.k)]
    }

    /// Largest compatibility residual across depths: marginalizing the
    /// deepest digit of the depth-(d+1) table must reproduce the depth-d
    /// table, and depth-1 masses must sum to 1.
    pub fn compatibility_residual(&self) -> f64 {
        let k = self.k;
        let mut worst: f64 = (self.tables[0].iter().sum::<f64>() - 1.0).abs();
        for d in 1..self.tables.len() {
            let fine = &self.tables[d];
            let coarse = &self.tables[d - 1];
            let block = coarse.len();
            for (idx, &m) in coarse.iter().enumerate() {
                let mut s = 0.0;
                for a in 0..k {
                    s += fine[idx + a * block];
                }
                worst = worst.max((s - m).abs());
            }
        }
        worst
    }

    /// Marginal of the first `n` digits: the pushforward of a forward
    /// measure under `shift^n`. Result depth is `depth − n`.
    pub fn shifted(&self, n: usize) -> Result<CylinderMeasure> {
        if self.orientation != Orientation::Forward {
            return Err(Error::domain("shift pushforward applies to forward measures"));
        }
        if n == 0 {
            return Ok(self.clone());
        }
        if n >= self.depth() {
            return Err(Error::range(format!(
                "shift by {n} needs depth > {n}, have {}",
                self.depth()
            )));
        }
        let k = self.k;
        let kn = k.pow(n as u32);
        let mut tables = Vec::with_capacity(self.depth() - n);
        for d in 1..=(self.depth() - n) {
            let fine = &self.tables[d + n - 1];
            let size = k.pow(d as u32);
            let mut t = vec![0.0; size];
            for (idx, slot) in t.iter_mut().enumerate() {
                let base = idx * kn;
                let mut s = 0.0;
                for low in 0..kn {
                    s += fine[base + low];
                }
                *slot = s;
            }
            tables.push(t);
        }
        CylinderMeasure::from_tables(k, Orientation::Forward, tables)
    }

    /// `|μ(σ^{-1}[α]) − μ([α])|` for a forward word: the mass of the union
    /// of one-symbol-prepended cylinders against the mass of the cylinder.
    pub fn shift_quasi_invariance_defect(&self, word: &Word) -> Result<f64> {
        if self.orientation != Orientation::Forward {
            return Err(Error::domain("defect defined for forward measures"));
        }
        let m = self.mass(word)?;
        if word.len() + 1 > self.depth() {
            return Err(Error::range("need one more depth level for preimage"));
        }
        let digits = word.digits();
        let mut pre = 0.0;
        for j in 0..self.k {
            let mut d = Vec::with_capacity(digits.len() + 1);
            d.push(j as u8);
            d.extend_from_slice(&digits);
            pre += self.mass_of_digits(&d);
        }
        Ok((pre - m).abs())
    }

    /// Average of several measures over the same alphabet/orientation/depth.
    pub fn average(measures: &[CylinderMeasure]) -> Result<CylinderMeasure> {
        let first = measures
            .first()
            .ok_or_else(|| Error::domain("average of empty list"))?;
        let inv = 1.0 / measures.len() as f64;
        let mut tables: Vec<Vec<f64>> =
            first.tables.iter().map(|t| vec![0.0; t.len()]).collect();
        for m in measures {
            if m.k != first.k || m.orientation != first.orientation || m.depth() != first.depth()
            {
                return Err(Error::domain("measures not aligned for averaging"));
            }
            for (acc, t) in tables.iter_mut().zip(&m.tables) {
                for (a, &v) in acc.iter_mut().zip(t) {
                    *a += v * inv;
                }
            }
        }
        CylinderMeasure::from_tables(first.k, first.orientation, tables)
    }
}

/// Entropy `H = −Σ w log w` of a weight vector summing to 1 (natural log,
/// `0·log 0 = 0`).
pub fn partition_entropy(weights: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &w in weights {
        if w < -1e-12 || !w.is_finite() {
            return Err(Error::domain(format!("invalid weight {w}")));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "weights sum to {sum}, expected 1 ± 1e-9"
        )));
    }
    Ok(entropy_unchecked(weights.iter().copied()))
}

/// Entropy of weights that are renormalized by their sum first; the sum must
/// be within `tol` of 1.
pub fn partition_entropy_normalized(weights: &[f64], tol: f64) -> Result<f64> {
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::domain(format!(
            "weights sum to {sum}, expected 1 ± {tol}"
        )));
    }
    Ok(entropy_unchecked(weights.iter().map(|w| w / sum)))
}

pub(crate) fn entropy_unchecked(weights: impl Iterator<Item = f64>) -> f64 {
    let mut h = 0.0;
    for w in weights {
        if w > 0.0 {
            h -= w * w.ln();
        }
    }
    h
}

/// Entropy of the depth-`n` cylinder partition.
pub fn refined_entropy(measure: &CylinderMeasure, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be ≥ 1"));
    }
    if n > measure.depth() {
        return Err(Error::range(format!(
            "n = {n} exceeds measure depth {}",
            measure.depth()
        )));
    }
    partition_entropy_normalized(measure.table(n), 1e-9)
}

/// `H_n/n` sequence together with the least-squares slope of `H_n` against
/// `n` over `n ∈ [n_min, n_max]`; the slope is the entropy-rate estimator.
pub fn ks_entropy_estimate(
    measure: &CylinderMeasure,
    n_min: usize,
    n_max: usize,
) -> Result<(f64, Vec<f64>)> {
    if n_min < 2 {
        return Err(Error::domain("n_min must be ≥ 2"));
    }
    if n_max < n_min || n_max > measure.depth() {
        return Err(Error::range(format!(
            "need n_min ≤ n_max ≤ depth {}, got [{n_min}, {n_max}]",
            measure.depth()
        )));
    }
    let hs: Vec<f64> = (n_min..=n_max)
        .map(|n| refined_entropy(measure, n))
        .collect::<Result<_>>()?;
    let per_n: Vec<f64> = hs
        .iter()
        .enumerate()
        .map(|(i, h)| h / (n_min + i) as f64)
        .collect();
    Ok((least_squares_slope(n_min, &hs), per_n))
}

/// Least-squares slope of `ys` against `x = x0, x0+1, …`. A single point
/// falls back to `y/x`.
pub fn least_squares_slope(x0: usize, ys: &[f64]) -> f64 {
    let n = ys.len();
    if n == 1 {
        return ys[0] / x0 as f64;
    }
    let xs: Vec<f64> = (0..n).map(|i| (x0 + i) as f64).collect();
    let xm = xs.iter().sum::<f64>() / n as f64;
    let ym = ys.iter().sum::<f64>() / n as f64;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    num / den
}

/// Cylinder measure of a Markov chain: `mass(α) = init[α₀]·Π p[α_i][α_{i+1}]`.
/// Compatibility holds exactly because rows are stochastic.
pub fn markov_measure(
    transition: &[Vec<f64>],
    initial: &[f64],
    depth: usize,
) -> Result<CylinderMeasure> {
    let k = transition.len();
    if k == 0 || initial.len() != k {
        return Err(Error::domain("transition and initial sizes must agree"));
    }
    for row in transition {
        if row.len() != k {
            return Err(Error::domain("transition matrix must be square"));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-12 || row.iter().any(|&p| p < 0.0) {
            return Err(Error::domain(format!(
                "transition row sums to {s}, expected 1 ± 1e-12"
            )));
        }
    }
    let si: f64 = initial.iter().sum();
    if (si - 1.0).abs() > 1e-12 || initial.iter().any(|&p| p < 0.0) {
        return Err(Error::domain("initial distribution must sum to 1"));
    }
    if depth == 0 {
        return Err(Error::domain("depth must be ≥ 1"));
    }
    let entries = k
        .checked_pow(depth as u32)
        .filter(|&e| e <= MAX_TABLE_ENTRIES)
        .ok_or_else(|| Error::Resource(format!("K^depth = {k}^{depth} exceeds table cap")))?;
    let _ = entries;

    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(depth);
    tables.push(initial.to_vec());
    for d in 2..=depth {
        let prev = &tables[d - 2];
        let block = prev.len();
        let mut t = vec![0.0; block * k];
        // The new digit is the word's last symbol; its predecessor is the
        // previous highest digit.
        for (idx, &m) in prev.iter().enumerate() {
            let last = idx / (block / k);
            for a in 0..k {
                t[idx + a * block] = m * transition[last][a];
            }
        }
        tables.push(t);
    }
    CylinderMeasure::from_tables(k, Orientation::Forward, tables)
}

/// Stationary distribution of a stochastic matrix via dense linear solve.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let k = transition.len();
    // Solve (Pᵀ − I)π = 0 with Σπ = 1 by replacing the last row.
    let mut m = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = transition[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..k {
        m[(k - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k);
    rhs[k - 1] = 1.0;
    let lu = m.lu();
    let pi = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular system for stationary distribution".into()))?;
    Ok(pi.iter().copied().collect())
}

/// Closed-form entropy rate `−Σ_i π_i Σ_j p_ij log p_ij` of a stationary
/// Markov chain.
pub fn markov_entropy_rate(transition: &[Vec<f64>], stationary: &[f64]) -> f64 {
    let mut h = 0.0;
    for (i, row) in transition.iter().enumerate() {
        for &p in row {
            if p > 0.0 {
                h -= stationary[i] * p * p.ln();
            }
        }
    }
    h
}

/// `H_{n+m} − H_n − H_m(shift^n ♯ μ)`; nonpositive up to numerical noise for
/// every measure (entropy subadditivity of the join), and for shift-invariant
/// measures the pushforward equals the original.
pub fn subadditivity_defect(measure: &CylinderMeasure, n: usize, m: usize) -> Result<f64> {
    if n + m > measure.depth() {
        return Err(Error::range(format!(
            "n + m = {} exceeds depth {}",
            n + m,
            measure.depth()
        )));
    }
    let h_nm = refined_entropy(measure, n + m)?;
    let h_n = refined_entropy(measure, n)?;
    let pushed = measure.shifted(n)?;
    let h_m = refined_entropy(&pushed, m)?;
    Ok(h_nm - h_n - h_m)
}
