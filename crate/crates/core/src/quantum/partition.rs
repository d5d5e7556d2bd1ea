//! Smooth quantum partitions of identity from a position cover.
//!
//! Each cell indicator is smoothed across its edges with a quintic
//! smoothstep of width `smoothing`; adjacent ramps telescope, so
//! `Σ_i g_i(x) = 1` pointwise, and the multipliers `P_i = √g_i` satisfy
//! `Σ P_i² = 1` exactly as functions. Operators are multiplication by
//! `P_i(j/N)` in the position basis, each supported in its halo.

use crate::dynamics::Cover;
use crate::error::{Error, Result};
use crate::linalg::{identity, op_norm, C64, CMat};

/// Family of K diagonal multipliers with `‖Σ P_i*P_i − Id‖₂` recorded.
#[derive(Debug, Clone)]
pub struct QuantumPartition {
    pub k: usize,
    pub dim: usize,
    /// `weights[i][j] = P_i(j/N)`.
    pub weights: Vec<Vec<f64>>,
    pub completeness_residual: f64,
}

fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (u * (6.0 * u - 15.0) + 10.0)
    }
}

/// Signed circle displacement of `x` from `e`, in `(−1/2, 1/2]`.
fn signed_dist(x: f64, e: f64) -> f64 {
    let d = x - e;
    let d = d - d.floor();
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Smoothed indicator of a strip `[l, r)`: 1 deep inside, ramping across
/// width `w` around each edge. With `w < width/2` at most one ramp is away
/// from 1 near any point, and opposite ramps of adjacent strips telescope.
fn cell_bump(x: f64, l: f64, width: f64, w: f64) -> f64 {
    let rise = smoothstep(signed_dist(x, l) / w + 0.5);
    let fall = smoothstep(-signed_dist(x, l + width) / w + 0.5);
    rise * fall
}

/// Build the smooth partition of identity over a strip cover.
pub fn smooth_partition(cover: &Cover, smoothing: f64, dim: usize) -> Result<QuantumPartition> {
    let k = cover.k();
    if dim < 2 {
        return Err(Error::domain("dimension must be ≥ 2"));
    }
    let min_width = cover
        .cells
        .iter()
        .map(|c| c.width)
        .fold(f64::INFINITY, f64::min);
    if smoothing <= 0.0 || smoothing >= min_width / 4.0 {
        return Err(Error::config(format!(
            "smoothing {smoothing} must lie in (0, {});",
            min_width / 4.0
        )));
    }
    // Supports must stay inside the halos.
    for (cell, halo) in cover.cells.iter().zip(&cover.halos) {
        let pad_l = signed_dist(cell.start, halo.start);
        let pad_r = halo.width - cell.width - pad_l;
        if pad_l < smoothing / 2.0 || pad_r < smoothing / 2.0 {
            return Err(Error::config(
                "halo padding below smoothing/2: multiplier would leak outside its halo".into(),
            ));
        }
    }

    let mut weights = Vec::with_capacity(k);
    for _ in 0..k {
        weights.push(vec![0.0; dim]);
    }
    let mut worst = 0.0f64;
    for j in 0..dim {
        let x = j as f64 / dim as f64;
        let mut total = 0.0;
        for (i, cell) in cover.cells.iter().enumerate() {
            let g = if k == 1 {
                1.0
            } else {
                cell_bump(x, cell.start, cell.width, smoothing)
            };
            weights[i][j] = g;
            total += g;
        }
        worst = worst.max((total - 1.0).abs());
        // P_i = √g_i.
        for w in weights.iter_mut() {
            w[j] = (w[j] / total).sqrt();
        }
    }
    if worst > 1e-10 {
        return Err(Error::Numeric(format!(
            "smoothed indicators sum to 1 ± {worst:.3e}, exceeding 1e-10"
        )));
    }

    let part = QuantumPartition {
        k,
        dim,
        weights,
        completeness_residual: worst,
    };
    Ok(part)
}

impl QuantumPartition {
    /// Dense operator for cell `i` (diagonal multiplication).
    pub fn op(&self, i: usize) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            m[(j, j)] = C64::new(self.weights[i][j], 0.0);
        }
        m
    }

    pub fn ops(&self) -> Vec<CMat> {
        (0..self.k).map(|i| self.op(i)).collect()
    }

    /// In-place diagonal multiplication `v ← P_i v`.
    pub fn apply(&self, i: usize, v: &mut crate::linalg::CVec) {
        for (x, &w) in v.iter_mut().zip(&self.weights[i]) {
            *x *= w;
        }
    }

    /// In-place row scaling `M ← P_i M`.
    pub fn apply_mat(&self, i: usize, m: &mut CMat) {
        for j in 0..self.dim {
            let w = C64::new(self.weights[i][j], 0.0);
            for c in 0..self.dim {
                m[(j, c)] *= w;
            }
        }
    }

    /// `‖Σ P_i*P_i − Id‖₂` recomputed from the dense operators.
    pub fn operator_residual(&self) -> f64 {
        let mut s = CMat::zeros(self.dim, self.dim);
        for i in 0..self.k {
            let p = self.op(i);
            s += p.adjoint() * p;
        }
        op_norm(&(s - identity(self.dim)))
    }

    /// Projective partition from the standard basis (sharp position bins
    /// split evenly), useful for discrete-Fourier sanity checks.
    pub fn projective_bins(k: usize, dim: usize) -> Result<QuantumPartition> {
        if k == 0 || dim % k != 0 {
            return Err(Error::domain("k must divide the dimension"));
        }
        let mut weights = vec![vec![0.0; dim]; k];
        let per = dim / k;
        for j in 0..dim {
            weights[j / per][j] = 1.0;
        }
        Ok(QuantumPartition {
            k,
            dim,
            weights,
            completeness_residual: 0.0,
        })
    }
}
