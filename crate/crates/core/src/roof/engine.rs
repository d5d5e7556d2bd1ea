//! Generic enumeration engine shared by the floating-point and
//! exact-rational roof arithmetic.
//!
//! Conventions (digit order, see [`crate::symbolic`]): a word is a digit
//! string `d₀ d₁ … d_k`; its roof terms are `f(d_i, d_{i+1})` (transposed
//! lookup for backward words). Stopping sums start at term index 1:
//! a word belongs to the index family at threshold `t` when
//! `Σ_{i=1}^{k-2} f_i ≤ t < Σ_{i=1}^{k-1} f_i` and `|word| = k+1`.
//!
//! Every stopping decision accumulates the tail sum `Σ_{i≥1} f_i` directly,
//! term by term in increasing order. Computing the same sum as a difference
//! of prefix sums rounds differently in floating point and can flip
//! boundary ties between code paths, so it is never done here.

use crate::error::{Error, Result};

/// Scalar the engine sums and compares. `f64` for production roofs,
/// `i128` numerators over a common denominator for the exact mode.
pub trait RoofScalar: Copy + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
}

impl RoofScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
}

impl RoofScalar for i128 {
    fn zero() -> Self {
        0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
}

/// Pair-value table with optional transposed lookup (backward orientation).
#[derive(Clone, Copy)]
pub struct PairTable<'a, V> {
    pub k: usize,
    pub values: &'a [V],
    pub transposed: bool,
}

impl<'a, V: RoofScalar> PairTable<'a, V> {
    pub fn pair(&self, a: u8, b: u8) -> V {
        if self.transposed {
            self.values[b as usize * self.k + a as usize]
        } else {
            self.values[a as usize * self.k + b as usize]
        }
    }

    fn max_value(&self) -> V {
        let mut m = self.values[0];
        for &v in self.values {
            if m < v {
                m = v;
            }
        }
        m
    }
}

/// Unique `k` with `Σ_{i=1}^{k-2} f_i ≤ t < Σ_{i=1}^{k-1} f_i` for the given
/// digit stream; depends only on the first `k+1` digits.
pub fn stopping_index<V: RoofScalar>(table: &PairTable<V>, digits: &[u8], t: V) -> Result<usize> {
    if t < table.max_value() {
        return Err(Error::domain(
            "threshold below the largest roof value; stopping index may dip below 3",
        ));
    }
    let mut tail = V::zero();
    let mut i = 1usize;
    loop {
        if i + 1 >= digits.len() {
            let deficit = deficit_estimate(table, tail, t);
            return Err(Error::NeedsMoreSymbols {
                deficit,
                context: format!(
                    "stopping sum {tail:?} has not passed t = {t:?} within {} symbols",
                    digits.len()
                ),
            });
        }
        tail = tail.add(table.pair(digits[i], digits[i + 1]));
        if t < tail {
            let k = i + 1;
            debug_assert!(k >= 3, "stopping index below 3 despite threshold guard");
            return Ok(k);
        }
        i += 1;
    }
}

fn deficit_estimate<V: RoofScalar>(table: &PairTable<V>, tail: V, t: V) -> usize {
    // Lower bound: with every future term at the maximum roof value,
    // how many more symbols until the sum can first exceed t.
    let step = table.max_value();
    let mut s = tail;
    let mut extra = 0usize;
    while !(t < s) {
        s = s.add(step);
        extra += 1;
        if extra > 1_000_000 {
            break;
        }
    }
    extra
}

/// One atom of the partition adapted to the time-`t` suspension map:
/// a family word, a jump size `p ∈ [k', k]`, and the fiber subinterval
/// `I_{p-2}` (possibly empty).
#[derive(Debug, Clone, PartialEq)]
pub struct EngineAtom<V> {
    pub digits: Vec<u8>,
    pub k: usize,
    pub k_prime: usize,
    pub p: usize,
    pub lo: V,
    pub hi: V,
}

/// Refined atom: a joined word together with a single fiber subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineRefined<V> {
    pub digits: Vec<u8>,
    pub lo: V,
    pub hi: V,
}

/// Exhaustively enumerate the index family at threshold `t`: every digit
/// string, extended until its stopping condition triggers.
pub fn enumerate_family<V: RoofScalar>(
    table: &PairTable<V>,
    t: V,
    cap: usize,
) -> Result<Vec<Vec<u8>>> {
    if t < table.max_value() {
        return Err(Error::domain(
            "threshold below the largest roof value; family is not well formed",
        ));
    }
    let mut out = Vec::new();
    let mut digits: Vec<u8> = Vec::new();
    fn dfs<V: RoofScalar>(
        table: &PairTable<V>,
        t: V,
        digits: &mut Vec<u8>,
        tail: V,
        out: &mut Vec<Vec<u8>>,
        cap: usize,
    ) -> Result<()> {
        for a in 0..table.k as u8 {
            digits.push(a);
            let len = digits.len();
            // The pair (d₀, d₁) does not enter the stopping sum.
            let new_tail = if len >= 3 {
                tail.add(table.pair(digits[len - 2], digits[len - 1]))
            } else {
                tail
            };
            if len >= 3 && t < new_tail {
                if out.len() >= cap {
                    digits.pop();
                    return Err(Error::Resource(format!(
                        "index family exceeds cap of {cap} words"
                    )));
                }
                out.push(digits.clone());
            } else {
                dfs(table, t, digits, new_tail, out, cap)?;
            }
            digits.pop();
        }
        Ok(())
    }
    dfs(table, t, &mut digits, V::zero(), &mut out, cap)?;
    Ok(out)
}

/// Tail sums `S_j = Σ_{i=1}^{j} f_i` of a word, `S_0 = 0`, accumulated in
/// canonical order.
fn tail_sums<V: RoofScalar>(table: &PairTable<V>, digits: &[u8]) -> Vec<V> {
    let mut s = Vec::with_capacity(digits.len());
    s.push(V::zero());
    for i in 1..digits.len().saturating_sub(1) {
        let last = *s.last().unwrap();
        s.push(last.add(table.pair(digits[i], digits[i + 1])));
    }
    s
}

/// From-the-start sums `T_j = Σ_{i=0}^{j-1} f_i`, `T_0 = 0`.
fn start_sums<V: RoofScalar>(table: &PairTable<V>, digits: &[u8]) -> Vec<V> {
    let mut p = Vec::with_capacity(digits.len());
    p.push(V::zero());
    for i in 0..digits.len() - 1 {
        let last = *p.last().unwrap();
        p.push(last.add(table.pair(digits[i], digits[i + 1])));
    }
    p
}

/// Check family membership of a word at threshold `t` and return `k`.
pub fn family_k<V: RoofScalar>(table: &PairTable<V>, digits: &[u8], t: V) -> Result<usize> {
    if digits.len() < 4 {
        return Err(Error::domain("family words have length ≥ 4"));
    }
    let k = digits.len() - 1;
    let s = tail_sums(table, digits);
    if !(s[k - 2] <= t && t < s[k - 1]) {
        return Err(Error::domain(format!(
            "word is not a member of the family at t = {t:?}"
        )));
    }
    Ok(k)
}

/// Unique `k'` with `T_{k'-1} ≤ t < T_{k'}`, i.e. the first `j` with
/// `T_j > t`. Requires family membership.
pub fn k_prime_of<V: RoofScalar>(table: &PairTable<V>, digits: &[u8], t: V) -> Result<usize> {
    let k = family_k(table, digits, t)?;
    let p = start_sums(table, digits);
    for j in 1..=k {
        if t < p[j] {
            return Ok(j);
        }
    }
    // Family membership forces T_k ≥ f₀ + S_{k-1} > t.
    Err(Error::domain(format!(
        "start sums never pass threshold for a family member (k = {k})"
    )))
}

fn clamp_interval<V: RoofScalar>(lo: V, hi: V, fiber: V) -> (V, V) {
    let zero = V::zero();
    let l = if lo < zero { zero } else { lo };
    let h = if fiber < hi { fiber } else { hi };
    (l, h)
}

/// `k'` and the interval chain of one family word from its start sums.
fn atom_chain<V: RoofScalar>(start: &[V], t: V, fiber: V, k: usize) -> (usize, Vec<(V, V)>) {
    let mut kp = k;
    for (j, &tj) in start.iter().enumerate().take(k + 1).skip(1) {
        if t < tj {
            kp = j;
            break;
        }
    }
    let intervals = (kp..=k)
        .map(|p| clamp_interval(start[p - 1].sub(t), start[p].sub(t), fiber))
        .collect();
    (kp, intervals)
}

/// All atoms `(γ, p, I_{p-2}(γ))` for `γ` in the family at threshold `t`,
/// `p ∈ [k'(γ), k(γ)]`. Interval boundaries are `T_{p-1} − t` and `T_p − t`
/// clamped into `[0, f(γ₀,γ₁)]`; empty intervals are kept so the atom count
/// per word is exactly `k − k' + 1`.
pub fn adapted_atoms<V: RoofScalar>(
    table: &PairTable<V>,
    t: V,
    cap: usize,
) -> Result<Vec<EngineAtom<V>>> {
    let words = enumerate_family(table, t, cap)?;
    let mut atoms = Vec::new();
    for digits in words {
        let k = digits.len() - 1;
        let start = start_sums(table, &digits);
        let fiber = table.pair(digits[0], digits[1]);
        let (kp, intervals) = atom_chain(&start, t, fiber, k);
        for (offset, (lo, hi)) in intervals.into_iter().enumerate() {
            atoms.push(EngineAtom {
                digits: digits.clone(),
                k,
                k_prime: kp,
                p: kp + offset,
                lo,
                hi,
            });
        }
    }
    Ok(atoms)
}

struct RefineCtx<'a, V> {
    table: &'a PairTable<'a, V>,
    t: V,
    n: usize,
    cap: usize,
    out: Vec<EngineRefined<V>>,
}

/// Nonempty atoms of the n-fold join `∨_{i=0}^{n-1} σ̄^{-i} C̄` of the
/// adapted partition under the time-`t` suspension map. Each atom is a
/// joined word with a single fiber subinterval of `[0, f(w₀,w₁))`.
///
/// The recursion walks chains `(γ_i, p_i)`: after step `i` the joined word
/// has been consumed up to offset `q = p₀+…+p_{i-1} − i`, and the
/// constraint from step `i` is `i·t + s − P_q ∈ I_{p_i-2}(γ_i)` for the
/// fiber coordinate `s`, where `P_q` accumulates the jumped roof terms.
/// Empty intersections prune the subtree.
pub fn refine<V: RoofScalar>(
    table: &PairTable<V>,
    t: V,
    n: usize,
    cap: usize,
) -> Result<Vec<EngineRefined<V>>> {
    if n == 0 {
        return Err(Error::domain("refinement level n must be ≥ 1"));
    }
    if t < table.max_value() {
        return Err(Error::domain(
            "threshold below the largest roof value; partition is not well formed",
        ));
    }
    let mut ctx = RefineCtx {
        table,
        t,
        n,
        cap,
        out: Vec::new(),
    };
    for d0 in 0..table.k as u8 {
        for d1 in 0..table.k as u8 {
            let mut word = vec![d0, d1];
            let fiber = table.pair(d0, d1);
            grow_gamma(
                &mut ctx,
                &mut word,
                0,
                0,
                V::zero(),
                V::zero(),
                (V::zero(), fiber),
            )?;
        }
    }
    Ok(ctx.out)
}

/// Extend the family word pending at offset `q` until its stopping
/// condition triggers, then branch over jump sizes; at `level == n`, emit.
///
/// `p_q` is the accumulated roof sum of the jumped-over terms, `offset` is
/// `level · t`, and `band` is the surviving fiber interval.
#[allow(clippy::too_many_arguments)]
fn grow_gamma<V: RoofScalar>(
    ctx: &mut RefineCtx<V>,
    word: &mut Vec<u8>,
    level: usize,
    q: usize,
    p_q: V,
    offset: V,
    band: (V, V),
) -> Result<()> {
    if level == ctx.n {
        if ctx.out.len() >= ctx.cap {
            return Err(Error::Resource(format!(
                "refined partition exceeds cap of {} atoms",
                ctx.cap
            )));
        }
        ctx.out.push(EngineRefined {
            digits: word.clone(),
            lo: band.0,
            hi: band.1,
        });
        return Ok(());
    }

    // γ-local sums over word[q..], accumulated in canonical order.
    let gamma = &word[q..];
    let start = start_sums(ctx.table, gamma);
    let tail = tail_sums(ctx.table, gamma);
    let have_terms = gamma.len() - 1;

    // Completion: tail over terms 1..=j exceeds t at j = k − 1.
    if have_terms >= 2 && ctx.t < tail[have_terms - 1] {
        let k = have_terms;
        let fiber = ctx.table.pair(gamma[0], gamma[1]);
        let (_kp, intervals) = atom_chain(&start, ctx.t, fiber, k);
        let kp = _kp;
        for (off, (lo, hi)) in intervals.into_iter().enumerate() {
            let p = kp + off;
            if !(lo < hi) {
                continue;
            }
            // Fiber constraint: s ∈ [lo, hi) + P_q − level·t.
            let shift = p_q.sub(offset);
            let c = (lo.add(shift), hi.add(shift));
            let next = (
                if band.0 < c.0 { c.0 } else { band.0 },
                if c.1 < band.1 { c.1 } else { band.1 },
            );
            if !(next.0 < next.1) {
                continue;
            }
            grow_gamma(
                ctx,
                word,
                level + 1,
                q + p - 1,
                p_q.add(start[p - 1]),
                offset.add(ctx.t),
                next,
            )?;
        }
        return Ok(());
    }

    for a in 0..ctx.table.k as u8 {
        word.push(a);
        grow_gamma(ctx, word, level, q, p_q, offset, band)?;
        word.pop();
    }
    Ok(())
}

/// Roof sum `Σ_{j=0}^{k-1} f(σ^j w) = T_k` of a full word (length `k+1`).
pub fn roof_sum<V: RoofScalar>(table: &PairTable<V>, digits: &[u8]) -> V {
    *start_sums(table, digits).last().unwrap()
}
