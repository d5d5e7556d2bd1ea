//! Finite-dimensional quantization layer.
//!
//! The N-dimensional state space plays the role of the half-density space
//! over the torus, with `ħ = 1/(2πN)`; one application of the quantized map
//! is one η-step of time, so the operator `A(t) = U^{-t} A U^t` evolves in
//! integer steps. Words over the cover alphabet index the refined operator
//! products `τ_α` (forward) and `π_β` (backward, with its first two factors
//! swapped), which form partitions of identity over any stopping-time
//! family; their norms against a state give the cylinder measures of
//! [`measure`], and the entropic uncertainty principle lower-bounds the sum
//! of the two quantum entropies by `−2 log c` with
//! `c = max ‖τ_α U π_β* O_β‖`.

pub mod eigen;
pub mod measure;
pub mod observable;
pub mod partition;
pub mod propagator;

use crate::error::{Error, Result};
use crate::linalg::{identity, op_norm, CMat, CVec};
use crate::roof::{IndexFamily, RoofFunction};
use crate::symbolic::{entropy_unchecked, Orientation};
use partition::QuantumPartition;
use rayon::prelude::*;

/// State space marker: dimension and the induced Planck constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantSpace {
    pub n: usize,
}

impl QuantSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("dimension must be ≥ 2"));
        }
        Ok(QuantSpace { n })
    }

    /// `ħ = 1/(2πN)`.
    pub fn hbar(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.n as f64)
    }
}

/// `A(t) = U^{-t} A U^t`; `t` may be negative.
pub fn evolve(u: &CMat, a: &CMat, t: i64) -> CMat {
    let mut out = a.clone();
    let u_inv = u.adjoint();
    for _ in 0..t.unsigned_abs() {
        out = if t >= 0 {
            &u_inv * out * u
        } else {
            u * out * &u_inv
        };
    }
    out
}

/// `τ_α = P_{α_k}(kη)···P_{α_1}(η)P_{α_0}` for a forward word.
pub fn tau(
    partition: &QuantumPartition,
    u: &CMat,
    alpha: &[u8],
    eta_steps: usize,
) -> Result<CMat> {
    if alpha.is_empty() {
        return Err(Error::domain("word must be nonempty"));
    }
    Ok(measure::tau_op(partition, u, alpha, eta_steps))
}

/// `π_β = P_{β_{-k}}(−kη)···P_{β_{-2}}(−2η)P_{β_0}P_{β_{-1}}(−η)` for a
/// backward word given in digit order `(β₀, β_{-1}, …)`.
pub fn pi(
    partition: &QuantumPartition,
    u: &CMat,
    beta_digits: &[u8],
    eta_steps: usize,
) -> Result<CMat> {
    if beta_digits.is_empty() {
        return Err(Error::domain("word must be nonempty"));
    }
    Ok(measure::pi_op(partition, u, beta_digits, eta_steps))
}

/// τ operators of a whole forward family.
pub fn tau_family(
    partition: &QuantumPartition,
    u: &CMat,
    family: &IndexFamily,
) -> Result<Vec<CMat>> {
    if family.orientation != Orientation::Forward {
        return Err(Error::domain("tau family takes a forward index family"));
    }
    family
        .words
        .par_iter()
        .map(|w| tau(partition, u, &w.digits(), 1))
        .collect()
}

/// π operators of a whole backward family.
pub fn pi_family(
    partition: &QuantumPartition,
    u: &CMat,
    family: &IndexFamily,
) -> Result<Vec<CMat>> {
    if family.orientation != Orientation::Backward {
        return Err(Error::domain("pi family takes a backward index family"));
    }
    family
        .words
        .par_iter()
        .map(|w| pi(partition, u, &w.digits(), 1))
        .collect()
}

/// `‖Σ_{α ∈ I(t)} τ_α*τ_α − Id‖₂` by direct summation over the family
/// prefix tree: `τ*τ = W*W` with `W ← P_c·U·W`, so each tree edge costs one
/// dense product. Backward orientation sums `π*π` the same way.
pub fn refined_identity_residual(
    partition: &QuantumPartition,
    u: &CMat,
    f: &RoofFunction,
    t: f64,
    orientation: Orientation,
) -> Result<f64> {
    if t < 2.0 * f.b0 * f.eta {
        return Err(Error::domain(format!(
            "threshold {t} below 2b₀η = {}",
            2.0 * f.b0 * f.eta
        )));
    }
    let n = partition.dim;
    let k = partition.k;
    if k != f.k {
        return Err(Error::domain("partition and roof alphabets differ"));
    }
    let u_inv = u.adjoint();

    struct Ctx<'a> {
        partition: &'a QuantumPartition,
        f: &'a RoofFunction,
        t: f64,
        step: CMat,
        backward: bool,
    }
    fn descend(ctx: &Ctx<'_>, digits: &mut Vec<u8>, w: &CMat, tail: f64, acc: &mut CMat) {
        let advance = &ctx.step * w;
        for c in 0..ctx.partition.k as u8 {
            digits.push(c);
            let mut child = advance.clone();
            ctx.partition.apply_mat(c as usize, &mut child);
            let len = digits.len();
            let new_tail = if len >= 3 {
                let (a, b) = (digits[len - 2], digits[len - 1]);
                tail + if ctx.backward {
                    ctx.f.pair(b, a)
                } else {
                    ctx.f.pair(a, b)
                }
            } else {
                tail
            };
            if len >= 3 && ctx.t < new_tail {
                *acc += child.adjoint() * &child;
            } else {
                descend(ctx, digits, &child, new_tail, acc);
            }
            digits.pop();
        }
    }

    let mut acc = CMat::zeros(n, n);
    match orientation {
        Orientation::Forward => {
            let ctx = Ctx {
                partition,
                f,
                t,
                step: u.clone(),
                backward: false,
            };
            for c in 0..k as u8 {
                let mut w = identity(n);
                partition.apply_mat(c as usize, &mut w);
                let mut digits = vec![c];
                descend(&ctx, &mut digits, &w, 0.0, &mut acc);
            }
        }
        Orientation::Backward => {
            let ctx = Ctx {
                partition,
                f,
                t,
                step: u_inv.clone(),
                backward: true,
            };
            // Depth-2 seeds with the swapped leading pair (graded M₁).
            for d0 in 0..k as u8 {
                for d1 in 0..k as u8 {
                    let mut m = u_inv.clone();
                    partition.apply_mat(d1 as usize, &mut m);
                    m = u * m;
                    partition.apply_mat(d0 as usize, &mut m);
                    m = &u_inv * m;
                    let mut digits = vec![d0, d1];
                    descend(&ctx, &mut digits, &m, 0.0, &mut acc);
                }
            }
        }
    }
    Ok(op_norm(&(acc - identity(n))))
}

/// Quantum entropy `h = −Σ ‖τ_α ψ‖² log ‖τ_α ψ‖²` of a normalized state
/// against a family of operators forming a partition of identity; weights
/// are renormalized by their sum, which must be `1 ± residual_tol`.
pub fn quantum_entropy(ops: &[CMat], psi: &CVec, residual_tol: f64) -> Result<f64> {
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!(
            "state norm {} is not 1 ± 1e-10",
            psi.norm()
        )));
    }
    let weights: Vec<f64> = ops.iter().map(|op| (op * psi).norm_squared()).collect();
    quantum_entropy_from_weights(&weights, residual_tol)
}

/// Entropy from precomputed weights `‖τ_α ψ‖²`.
pub fn quantum_entropy_from_weights(weights: &[f64], residual_tol: f64) -> Result<f64> {
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > residual_tol {
        return Err(Error::domain(format!(
            "weights sum to {sum}, expected 1 ± {residual_tol}"
        )));
    }
    Ok(entropy_unchecked(weights.iter().map(|w| w / sum)))
}

/// `c_O(U) = max_{α,β} ‖τ_α U π_β* O_β‖₂`; `O_β = Id` when no cutoffs are
/// supplied.
pub fn c_norm(taus: &[CMat], pis: &[CMat], u: &CMat, cutoffs: Option<&[CMat]>) -> Result<f64> {
    if taus.is_empty() || pis.is_empty() {
        return Err(Error::domain("families must be nonempty"));
    }
    if let Some(os) = cutoffs {
        if os.len() != pis.len() {
            return Err(Error::domain("one cutoff per π operator required"));
        }
    }
    let rights: Vec<CMat> = pis
        .par_iter()
        .enumerate()
        .map(|(b, pi)| {
            let mut r = u * pi.adjoint();
            if let Some(os) = cutoffs {
                r = r * &os[b];
            }
            r
        })
        .collect();
    let best = taus
        .par_iter()
        .map(|t| {
            rights
                .iter()
                .map(|r| op_norm(&(t * r)))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0f64, f64::max);
    Ok(best)
}

/// Both sides of the entropic uncertainty inequality
/// `h_τ(Uψ) + h_π(ψ) ≥ −2 log(c_O(U) + 𝒩δ′)`.
#[derive(Debug, Clone)]
pub struct EupCheck {
    pub h_tau: f64,
    pub h_pi: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub c: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Verify the cutoff precondition `‖(Id−O_β)π_βψ‖ ≤ δ′` for every β, then
/// evaluate both sides. With no cutoffs and `δ′ = 0` this is the bare
/// uncertainty bound.
pub fn eup_check(
    taus: &[CMat],
    pis: &[CMat],
    u: &CMat,
    cutoffs: Option<&[CMat]>,
    delta_prime: f64,
    psi: &CVec,
) -> Result<EupCheck> {
    if let Some(os) = cutoffs {
        let n = psi.len();
        for (b, (pi, o)) in pis.iter().zip(os).enumerate() {
            let dev = ((identity(n) - o) * (pi * psi)).norm();
            if dev > delta_prime + 1e-12 {
                return Err(Error::domain(format!(
                    "cutoff precondition fails at β = {b}: ‖(Id−O)πψ‖ = {dev:.3e} > δ' = {delta_prime:.3e}"
                )));
            }
        }
    }
    let c = c_norm(taus, pis, u, cutoffs)?;
    let cardinality = taus.len().max(pis.len()) as f64;
    let u_psi = u * psi;
    let h_tau = quantum_entropy(taus, &u_psi, 1e-8)?;
    let h_pi = quantum_entropy(pis, psi, 1e-8)?;
    let lhs = h_tau + h_pi;
    let rhs = -2.0 * (c + cardinality * delta_prime).ln();
    Ok(EupCheck {
        h_tau,
        h_pi,
        lhs,
        rhs,
        c,
        slack: lhs - rhs,
        holds: lhs >= rhs - 1e-9,
    })
}

/// Relative localized-commutator norm
/// `‖[P_{γ_k}(kη), P_{γ_0}]·P_{γ_{k-1}}((k-1)η)···P_{γ_1}(η)‖ / ‖P_{γ_{k-1}}···P_{γ_1}(η)‖`
/// for a forward word whose roof sum must stay below the horizon cap.
pub fn commutator_defect(
    partition: &QuantumPartition,
    u: &CMat,
    gamma: &[u8],
    f: &RoofFunction,
    horizon: f64,
) -> Result<f64> {
    if gamma.is_empty() {
        return Err(Error::domain("word must be nonempty"));
    }
    let k = gamma.len() - 1;
    if k == 0 {
        // Same-basis multipliers commute.
        return Ok(0.0);
    }
    let roof_sum: f64 = (0..k).map(|j| f.pair(gamma[j], gamma[j + 1])).sum();
    if roof_sum > horizon {
        return Err(Error::range(format!(
            "word roof sum {roof_sum:.6} exceeds the horizon cap {horizon:.6}"
        )));
    }
    let n = partition.dim;
    // mid = P_{γ_{k-1}}((k-1)η)···P_{γ_1}(η) = U^{-(k-1)}·X with X built by
    // X ← P_{γ_j}·U·X from X₁ = P_{γ_1}·U.
    let mid = if k == 1 {
        identity(n)
    } else {
        let mut x = u.clone();
        partition.apply_mat(gamma[1] as usize, &mut x);
        for j in 2..k {
            let mut next = u * x;
            partition.apply_mat(gamma[j] as usize, &mut next);
            x = next;
        }
        crate::linalg::int_power(&u.adjoint(), None, (k - 1) as i64) * x
    };
    let p0 = partition.op(gamma[0] as usize);
    let pk = evolve(u, &partition.op(gamma[k] as usize), k as i64);
    let bracket = &pk * &p0 - &p0 * &pk;
    let denom = op_norm(&mid);
    if denom < 1e-14 {
        return Err(Error::Numeric("localizer norm vanished".into()));
    }
    Ok(op_norm(&(bracket * mid)) / denom)
}

#[cfg(test)]
mod tests;
