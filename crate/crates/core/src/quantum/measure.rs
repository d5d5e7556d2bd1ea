//! Cylinder measures induced by a state under a quantum partition.
//!
//! Forward masses are `μ([α₀,…,α_k]) = ‖P_{α_k}(kη)···P_{α₀}ψ‖²`; backward
//! masses use the negative-time operators with the first two factors
//! swapped, `‖P_{β_{-k}}(−kη)···P_{β_0}P_{β_{-1}}(−η)ψ‖²`, and the depth-1
//! backward table is the marginal of the depth-2 table (the only choice
//! compatible with Kolmogorov consistency). Because `P(jη) = U^{-j}P U^j`,
//! the whole table comes from one prefix-tree recursion: forward
//! `w ← P_c·U·w`, backward `w ← P_c·U^{-1}·w`, with norms preserved by the
//! dropped unitary factors.

use super::partition::QuantumPartition;
use crate::error::{Error, Result};
use crate::linalg::{C64, CMat, CVec};
use crate::symbolic::{CylinderMeasure, Orientation};

/// Cylinder measure from a state, plus how far the state is from being an
/// eigenvector of `U` (backward-time compatibility degrades for
/// non-eigenvectors, so a large residual sets the warning flag).
#[derive(Debug, Clone)]
pub struct StateMeasure {
    pub measure: CylinderMeasure,
    pub eigen_residual: f64,
    pub warn_not_eigenvector: bool,
}

/// Residual above which the non-eigenvector warning is set.
pub const EIGENVECTOR_WARN_TOL: f64 = 1e-8;

pub fn cylinder_measure_from_state(
    psi: &CVec,
    partition: &QuantumPartition,
    u: &CMat,
    eta_steps: usize,
    depth: usize,
    orientation: Orientation,
) -> Result<StateMeasure> {
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!(
            "state norm {} is not 1 ± 1e-10",
            psi.norm()
        )));
    }
    if depth == 0 {
        return Err(Error::domain("depth must be ≥ 1"));
    }
    if eta_steps == 0 {
        return Err(Error::domain("eta_steps must be ≥ 1"));
    }
    let k = partition.k;
    let step = crate::linalg::int_power(u, None, eta_steps as i64);
    let eigen_residual = {
        let up = &step * psi;
        let rayleigh: C64 = psi.dotc(&up);
        let modulus = rayleigh.norm().max(1e-300);
        (up - psi * (rayleigh / C64::new(modulus, 0.0))).norm()
    };

    let tables = match orientation {
        Orientation::Forward => forward_tables(psi, partition, &step, depth),
        Orientation::Backward => backward_tables(psi, partition, &step, depth),
    };
    let measure = CylinderMeasure::from_tables(k, orientation, tables)?;
    Ok(StateMeasure {
        measure,
        eigen_residual,
        warn_not_eigenvector: eigen_residual > EIGENVECTOR_WARN_TOL,
    })
}

fn forward_tables(
    psi: &CVec,
    partition: &QuantumPartition,
    u: &CMat,
    depth: usize,
) -> Vec<Vec<f64>> {
    let k = partition.k;
    let mut tables: Vec<Vec<f64>> = (1..=depth).map(|d| vec![0.0; k.pow(d as u32)]).collect();
    // Node (digits d₀..d_j, vector w_j = U^j τ-prefix ψ); children append
    // the next symbol: w ← P_c (U w).
    struct Ctx<'a> {
        partition: &'a QuantumPartition,
        u: &'a CMat,
        depth: usize,
        k: usize,
    }
    fn descend(ctx: &Ctx<'_>, tables: &mut [Vec<f64>], w: &CVec, idx: usize, d: usize) {
        let advanced = if d == 0 { w.clone() } else { ctx.u * w };
        for c in 0..ctx.k {
            let mut child = advanced.clone();
            ctx.partition.apply(c, &mut child);
            let child_idx = idx + c * ctx.k.pow(d as u32);
            tables[d][child_idx] = child.norm_squared();
            if d + 1 < ctx.depth {
                descend(ctx, tables, &child, child_idx, d + 1);
            }
        }
    }
    let ctx = Ctx {
        partition,
        u,
        depth,
        k,
    };
    descend(&ctx, &mut tables, psi, 0, 0);
    tables
}

fn backward_tables(
    psi: &CVec,
    partition: &QuantumPartition,
    u: &CMat,
    depth: usize,
) -> Vec<Vec<f64>> {
    let k = partition.k;
    let u_inv = u.adjoint();
    let mut tables: Vec<Vec<f64>> = (1..=depth).map(|d| vec![0.0; k.pow(d as u32)]).collect();
    // Depth-2 seeds: digits (d₀, d₁) = (β₀, β_{-1});
    // w = U^{-1} P_{β₀} U P_{β_{-1}} U^{-1} ψ, then w ← P_c U^{-1} w for
    // each earlier symbol.
    struct Ctx<'a> {
        partition: &'a QuantumPartition,
        u_inv: &'a CMat,
        depth: usize,
        k: usize,
    }
    fn descend(ctx: &Ctx<'_>, tables: &mut [Vec<f64>], w: &CVec, idx: usize, d: usize) {
        let advanced = ctx.u_inv * w;
        for c in 0..ctx.k {
            let mut child = advanced.clone();
            ctx.partition.apply(c, &mut child);
            let child_idx = idx + c * ctx.k.pow(d as u32);
            tables[d][child_idx] = child.norm_squared();
            if d + 1 < ctx.depth {
                descend(ctx, tables, &child, child_idx, d + 1);
            }
        }
    }
    let ctx = Ctx {
        partition,
        u_inv: &u_inv,
        depth,
        k,
    };
    let back = &u_inv * psi;
    for d1 in 0..k {
        // d1 = β_{-1}
        let mut v = back.clone();
        partition.apply(d1, &mut v);
        let v = u * v;
        for d0 in 0..k {
            // d0 = β₀
            let mut w = v.clone();
            partition.apply(d0, &mut w);
            let idx = d0 + d1 * k;
            tables[1][idx] = w.norm_squared();
            if depth > 2 {
                // Seed the recursion at the graded vector w₁ = U^{-1} v₁.
                let w1 = &u_inv * w;
                descend(&ctx, &mut tables, &w1, idx, 2);
            }
        }
    }
    // Depth-1 backward masses: marginal over β_{-1} (digit 1).
    for d0 in 0..k {
        tables[0][d0] = (0..k).map(|d1| tables[1][d0 + d1 * k]).sum();
    }
    tables
}

/// Matrix `W_α = P_{α_k} U P_{α_{k-1}} ··· U P_{α₀}` with
/// `τ_α = U^{-k} W_α`; norms and products `τ*τ` only need `W`.
pub fn tau_w_matrix(partition: &QuantumPartition, u: &CMat, digits: &[u8]) -> CMat {
    let mut w = CMat::identity(partition.dim, partition.dim);
    partition.apply_mat(digits[0] as usize, &mut w);
    for &c in &digits[1..] {
        let mut next = u * w;
        partition.apply_mat(c as usize, &mut next);
        w = next;
    }
    w
}

/// Full τ operator `U^{-k} W_α` for a forward word.
pub fn tau_op(partition: &QuantumPartition, u: &CMat, digits: &[u8], eta_steps: usize) -> CMat {
    let step = crate::linalg::int_power(u, None, eta_steps as i64);
    let w = tau_w_matrix(partition, &step, digits);
    let k = digits.len() - 1;
    let u_inv_k = crate::linalg::int_power(&step.adjoint(), None, k as i64);
    u_inv_k * w
}

/// Matrix `M_β` with `π_β = U^k M_β`, built over backward digits
/// `(d₀, d₁, …) = (β₀, β_{-1}, …)`: the seed is
/// `M₁ = U^{-1} P_{β₀} U P_{β_{-1}} U^{-1}` and each earlier symbol
/// prepends `M ← P_c U^{-1} M`.
pub fn pi_m_matrix(partition: &QuantumPartition, u: &CMat, digits: &[u8]) -> CMat {
    let n = partition.dim;
    let u_inv = u.adjoint();
    if digits.len() == 1 {
        let mut m = CMat::identity(n, n);
        partition.apply_mat(digits[0] as usize, &mut m);
        return m;
    }
    let mut m = u_inv.clone();
    partition.apply_mat(digits[1] as usize, &mut m);
    m = u * m;
    partition.apply_mat(digits[0] as usize, &mut m);
    m = &u_inv * m;
    for &c in &digits[2..] {
        let mut next = &u_inv * m;
        partition.apply_mat(c as usize, &mut next);
        m = next;
    }
    m
}

/// Full π operator for a backward word given as digits `(β₀, β_{-1}, …)`.
pub fn pi_op(partition: &QuantumPartition, u: &CMat, digits: &[u8], eta_steps: usize) -> CMat {
    let step = crate::linalg::int_power(u, None, eta_steps as i64);
    let m = pi_m_matrix(partition, &step, digits);
    let k = digits.len() - 1;
    let u_k = crate::linalg::int_power(&step, None, k as i64);
    u_k * m
}
