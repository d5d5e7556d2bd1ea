//! Classical Anosov torus maps.
//!
//! A map here is either a hyperbolic element of SL(2,Z) acting on the torus
//! or such a matrix composed with a small trigonometric shear kick (which
//! keeps the map exactly area-preserving while making the unstable Jacobian
//! non-constant). The module computes tangent cocycles, unstable directions
//! by backward-orbit power iteration, unstable Jacobians, Lyapunov
//! exponents, and the per-cell-pair discrete Jacobian over a cover.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default backward-orbit length for unstable-direction power iteration.
pub const DEFAULT_COCYCLE_ITERS: usize = 64;

/// Point on the unit torus, both coordinates always reduced to `[0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

fn reduce(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint {
            x: reduce(x),
            y: reduce(y),
        }
    }
}

/// 2×2 integer matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMat2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMat2 { a, b, c, d }
    }

    pub fn from_rows(rows: [[i64; 2]; 2]) -> Self {
        IntMat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    /// Inverse, valid when `det == 1`.
    pub fn inverse(&self) -> IntMat2 {
        IntMat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn mul(&self, o: &IntMat2) -> IntMat2 {
        IntMat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Leading eigenvalue `(|tr| + sqrt(tr² − 4))/2` of a hyperbolic
    /// unimodular matrix.
    pub fn leading_eigenvalue(&self) -> f64 {
        let t = self.trace() as f64;
        (t.abs() + (t * t - 4.0).sqrt()) / 2.0
    }
}

/// Trigonometric polynomial `V(x) = Σ_m c_m cos(2πmx) + s_m sin(2πmx)`,
/// used as the kick potential of a perturbed map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    /// `(mode, cos coefficient, sin coefficient)` triples, mode ≥ 1.
    pub modes: Vec<(u32, f64, f64)>,
}

impl TrigPoly {
    pub fn new(modes: Vec<(u32, f64, f64)>) -> Self {
        TrigPoly { modes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.modes
            .iter()
            .map(|&(m, c, s)| {
                let a = two_pi * m as f64 * x;
                c * a.cos() + s * a.sin()
            })
            .sum()
    }

    /// First derivative `V'(x)`.
    pub fn deriv(&self, x: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.modes
            .iter()
            .map(|&(m, c, s)| {
                let w = two_pi * m as f64;
                let a = w * x;
                -c * w * a.sin() + s * w * a.cos()
            })
            .sum()
    }

    /// Second derivative `V''(x)`.
    pub fn second_deriv(&self, x: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.modes
            .iter()
            .map(|&(m, c, s)| {
                let w = two_pi * m as f64;
                let a = w * x;
                -c * w * w * a.cos() - s * w * w * a.sin()
            })
            .sum()
    }

    /// Upper bound on `|V''|`: Σ (2πm)² (|c|+|s|).
    pub fn second_deriv_bound(&self) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.modes
            .iter()
            .map(|&(m, c, s)| {
                let w = two_pi * m as f64;
                w * w * (c.abs() + s.abs())
            })
            .sum()
    }
}

/// Fraction of the hyperbolicity gap the shear kick is allowed to consume.
pub const HYPERBOLICITY_MARGIN: f64 = 0.05;

/// Hyperbolic torus map: a unimodular integer matrix, optionally composed
/// with the shear kick `(x, y) ↦ (x, y + amp·V'(x))` applied before the
/// matrix. Both factors are exactly area-preserving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TorusMap {
    Linear { matrix: IntMat2 },
    Perturbed {
        base: IntMat2,
        kick: TrigPoly,
        amplitude: f64,
    },
}

impl TorusMap {
    /// Linear hyperbolic map; rejects `det ≠ 1` and `|trace| ≤ 2`.
    pub fn linear(matrix: IntMat2) -> Result<Self> {
        if matrix.det() != 1 {
            return Err(Error::domain(format!(
                "matrix must have determinant +1, got {}",
                matrix.det()
            )));
        }
        if matrix.trace().abs() <= 2 {
            return Err(Error::NotHyperbolic(format!(
                "|trace| = {} ≤ 2, map is not hyperbolic",
                matrix.trace().abs()
            )));
        }
        Ok(TorusMap::Linear { matrix })
    }

    /// Perturbed map; the kick amplitude must stay below the configured
    /// fraction of the hyperbolicity gap so the Anosov property persists.
    pub fn perturbed(base: IntMat2, kick: TrigPoly, amplitude: f64) -> Result<Self> {
        let linear = TorusMap::linear(base)?;
        let gap = (base.trace().abs() - 2) as f64;
        let shear_bound = amplitude.abs() * kick.second_deriv_bound() * (base.b.abs().max(1)) as f64;
        if shear_bound > HYPERBOLICITY_MARGIN * gap {
            return Err(Error::config(format!(
                "kick strength {:.3e} exceeds {:.0}% of the hyperbolicity gap {:.3e}",
                shear_bound,
                HYPERBOLICITY_MARGIN * 100.0,
                gap
            )));
        }
        drop(linear);
        Ok(TorusMap::Perturbed {
            base,
            kick,
            amplitude,
        })
    }

    pub fn base_matrix(&self) -> IntMat2 {
        match self {
            TorusMap::Linear { matrix } => *matrix,
            TorusMap::Perturbed { base, .. } => *base,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, TorusMap::Linear { .. })
    }
}

/// Forward application, reduced mod 1.
pub fn apply(map: &TorusMap, p: TorusPoint) -> TorusPoint {
    match map {
        TorusMap::Linear { matrix: m } => TorusPoint::new(
            m.a as f64 * p.x + m.b as f64 * p.y,
            m.c as f64 * p.x + m.d as f64 * p.y,
        ),
        TorusMap::Perturbed {
            base: m,
            kick,
            amplitude,
        } => {
            let y = p.y + amplitude * kick.deriv(p.x);
            TorusPoint::new(
                m.a as f64 * p.x + m.b as f64 * y,
                m.c as f64 * p.x + m.d as f64 * y,
            )
        }
    }
}

/// Inverse application, reduced mod 1.
pub fn apply_inverse(map: &TorusMap, p: TorusPoint) -> TorusPoint {
    match map {
        TorusMap::Linear { matrix: m } => {
            let inv = m.inverse();
            TorusPoint::new(
                inv.a as f64 * p.x + inv.b as f64 * p.y,
                inv.c as f64 * p.x + inv.d as f64 * p.y,
            )
        }
        TorusMap::Perturbed {
            base: m,
            kick,
            amplitude,
        } => {
            let inv = m.inverse();
            // Undo the matrix exactly (the intermediate y need not be reduced).
            let x = inv.a as f64 * p.x + inv.b as f64 * p.y;
            let ym = inv.c as f64 * p.x + inv.d as f64 * p.y;
            let xr = reduce(x);
            TorusPoint::new(xr, ym - amplitude * kick.deriv(xr))
        }
    }
}

/// Jacobian matrix of the map at `p`, row major. Determinant is exactly 1
/// (product of a shear and a unimodular matrix).
pub fn tangent(map: &TorusMap, p: TorusPoint) -> [[f64; 2]; 2] {
    match map {
        TorusMap::Linear { matrix: m } => [
            [m.a as f64, m.b as f64],
            [m.c as f64, m.d as f64],
        ],
        TorusMap::Perturbed {
            base: m,
            kick,
            amplitude,
        } => {
            let kappa = amplitude * kick.second_deriv(p.x);
            // d(A ∘ S) = A · [[1,0],[κ,1]]
            [
                [m.a as f64 + m.b as f64 * kappa, m.b as f64],
                [m.c as f64 + m.d as f64 * kappa, m.d as f64],
            ]
        }
    }
}

fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn sign_normalize(v: [f64; 2]) -> [f64; 2] {
    let n = norm2(v);
    let mut u = [v[0] / n, v[1] / n];
    let lead = if u[0].abs() > 1e-14 { u[0] } else { u[1] };
    if lead < 0.0 {
        u = [-u[0], -u[1]];
    }
    u
}

/// Minimal average log-growth per step required by the hyperbolicity test.
const MIN_GROWTH: f64 = 1e-3;

/// Unit vector approximating the unstable direction `E^u(p)`, obtained by
/// pulling the base point `iterations` steps backward and pushing a generic
/// vector forward through the tangent cocycle. Sign-normalized so the first
/// component well away from zero is positive.
pub fn unstable_direction(map: &TorusMap, p: TorusPoint, iterations: usize) -> Result<[f64; 2]> {
    if iterations == 0 {
        return Err(Error::domain("iterations must be ≥ 1"));
    }
    // Store the backward orbit and push the cocycle through the stored
    // points, so the iteration ends exactly at p. Inaccuracy in the early
    // (deep) points decays at the stable/unstable gap rate.
    let mut orbit = Vec::with_capacity(iterations + 1);
    orbit.push(p);
    for i in 0..iterations {
        orbit.push(apply_inverse(map, orbit[i]));
    }
    // Generic seed direction (irrational slope avoids exact alignment with
    // the stable direction of an integer matrix).
    let mut v = [1.0, 0.732_050_807_568_877_3];
    let mut log_growth = 0.0;
    for q in orbit.iter().skip(1).rev() {
        let dv = mat_vec(&tangent(map, *q), v);
        let n = norm2(dv);
        log_growth += n.ln();
        v = [dv[0] / n, dv[1] / n];
    }
    if log_growth / iterations as f64 <= MIN_GROWTH {
        return Err(Error::NotHyperbolic(format!(
            "cocycle growth rate {:.3e} per step fails the hyperbolicity test",
            log_growth / iterations as f64
        )));
    }
    Ok(sign_normalize(v))
}

/// Unstable Jacobian `J^u(p)`: the contraction factor of the inverse
/// tangent map along the unstable line at the image point, computed as
/// `1/‖dg(p)·e_u(p)‖`. Lies in `(0,1)` for hyperbolic maps.
pub fn unstable_jacobian(map: &TorusMap, p: TorusPoint) -> Result<f64> {
    unstable_jacobian_with_iters(map, p, DEFAULT_COCYCLE_ITERS)
}

pub fn unstable_jacobian_with_iters(
    map: &TorusMap,
    p: TorusPoint,
    iterations: usize,
) -> Result<f64> {
    let e_u = unstable_direction(map, p, iterations)?;
    let expansion = norm2(mat_vec(&tangent(map, p), e_u));
    Ok(1.0 / expansion)
}

/// Ensemble-averaged upper Lyapunov exponent along forward orbits.
pub fn lyapunov_exponent(map: &TorusMap, seeds: &[TorusPoint], steps: usize) -> Result<f64> {
    if steps < 100 {
        return Err(Error::domain("steps must be ≥ 100"));
    }
    if seeds.is_empty() {
        return Err(Error::domain("at least one seed point required"));
    }
    let mut total = 0.0;
    for &seed in seeds {
        // Start from a vector already aligned with E^u(seed); the average
        // then carries no alignment transient, and each step contributes
        // exactly the unstable expansion −log J^u at the current point.
        let mut v = unstable_direction(map, seed, DEFAULT_COCYCLE_ITERS)?;
        let mut p = seed;
        let mut acc = 0.0;
        for _ in 0..steps {
            let dv = mat_vec(&tangent(map, p), v);
            let n = norm2(dv);
            acc += n.ln();
            v = [dv[0] / n, dv[1] / n];
            p = apply(map, p);
        }
        total += acc / steps as f64;
    }
    let chi = total / seeds.len() as f64;
    if chi <= MIN_GROWTH {
        return Err(Error::NotHyperbolic(format!(
            "Lyapunov estimate {chi:.3e} fails the hyperbolicity test"
        )));
    }
    Ok(chi)
}

/// Half-open interval on the circle, possibly wrapping past 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleInterval {
    pub start: f64,
    pub width: f64,
}

impl CircleInterval {
    pub fn contains(&self, x: f64) -> bool {
        let d = reduce(x - self.start);
        d < self.width
    }
}

/// Position cover of the torus: `K` strip cells `O_i = [s_i, s_{i+1}) × [0,1)`
/// with enlarged halo strips `Ω_i ⊋ O_i`, plus the time step `η` the pair
/// cells `U_γ = Ω_{γ₀} ∩ g^{-η} Ω_{γ₁}` refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub cells: Vec<CircleInterval>,
    pub halos: Vec<CircleInterval>,
    pub eta: f64,
}

impl Cover {
    /// `K` equal vertical strips with halos enlarged by `halo_pad` on each
    /// side.
    pub fn strips(k: usize, halo_pad: f64, eta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("cover needs at least one cell"));
        }
        if eta <= 0.0 {
            return Err(Error::domain("eta must be positive"));
        }
        let w = 1.0 / k as f64;
        if halo_pad <= 0.0 || 2.0 * halo_pad >= w {
            return Err(Error::config(format!(
                "halo padding {halo_pad} must lie in (0, {})",
                w / 2.0
            )));
        }
        let cells = (0..k)
            .map(|i| CircleInterval {
                start: i as f64 * w,
                width: w,
            })
            .collect();
        let halos = (0..k)
            .map(|i| CircleInterval {
                start: reduce(i as f64 * w - halo_pad),
                width: (w + 2.0 * halo_pad).min(1.0),
            })
            .collect();
        Ok(Cover {
            cells,
            halos,
            eta,
        })
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    /// Index of the cell containing `x` (cells partition the circle).
    pub fn cell_of(&self, p: TorusPoint) -> usize {
        for (i, c) in self.cells.iter().enumerate() {
            if c.contains(p.x) {
                return i;
            }
        }
        // Reduction guarantees x ∈ [0,1) and the strips tile it.
        self.cells.len() - 1
    }

    /// Sampling check that cells tile the torus and each halo contains its
    /// cell: every grid point must land in exactly one cell and in that
    /// cell's halo.
    pub fn validate(&self, samples: usize) -> Result<()> {
        for i in 0..samples {
            let x = (i as f64 + 0.5) / samples as f64;
            let hits: Vec<usize> = (0..self.k())
                .filter(|&j| self.cells[j].contains(x))
                .collect();
            if hits.len() != 1 {
                return Err(Error::config(format!(
                    "x = {x} lies in {} cells",
                    hits.len()
                )));
            }
            if !self.halos[hits[0]].contains(x) {
                return Err(Error::config(format!(
                    "halo {} does not contain its cell point {x}",
                    hits[0]
                )));
            }
        }
        Ok(())
    }
}

/// Multiplicative widening applied to the sampled extrema of `−log J^u`
/// when recording the `a₀`/`b₀` bounds.
pub const JACOBIAN_SAFETY_MARGIN: f64 = 0.01;

/// Per-pair discrete Jacobian `J_η^u(γ) = sup{J^u(ρ) : ρ ∈ U_γ}` with the
/// recorded bounds `a₀ ≤ −log J_η^u ≤ b₀`. Pairs whose cell `U_γ` met no
/// sample carry `e^{−b₀}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JacobianTable {
    pub k: usize,
    pub eta: f64,
    /// `values[γ0 * k + γ1] = J_η^u(γ0, γ1)`.
    pub values: Vec<f64>,
    /// Which pairs had a nonempty sampled `U_γ`.
    pub nonempty: Vec<bool>,
    pub a0: f64,
    pub b0: f64,
}

impl JacobianTable {
    pub fn value(&self, g0: usize, g1: usize) -> f64 {
        self.values[g0 * self.k + g1]
    }

    /// `e^{−b₀}`, the value used for empty pairs.
    pub fn empty_default(&self) -> f64 {
        (-self.b0).exp()
    }
}

/// Sample `J^u` over each pair cell `U_γ = Ω_{γ₀} ∩ g^{-1}Ω_{γ₁}` on a grid
/// of `grid_density` points per halo side and record per-pair suprema.
pub fn discrete_jacobian(
    map: &TorusMap,
    cover: &Cover,
    grid_density: usize,
) -> Result<JacobianTable> {
    if grid_density < 8 {
        return Err(Error::domain("grid_density must be ≥ 8 per cell side"));
    }
    let k = cover.k();
    let mut sup: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut min_nlj = f64::INFINITY;
    let mut max_nlj = f64::NEG_INFINITY;

    for g0 in 0..k {
        let halo = cover.halos[g0];
        for ix in 0..grid_density {
            let x = reduce(halo.start + (ix as f64 + 0.5) / grid_density as f64 * halo.width);
            for iy in 0..grid_density {
                let y = (iy as f64 + 0.5) / grid_density as f64;
                let p = TorusPoint::new(x, y);
                let image = apply(map, p);
                for g1 in 0..k {
                    if !cover.halos[g1].contains(image.x) {
                        continue;
                    }
                    let j = unstable_jacobian(map, p)?;
                    let nlj = -j.ln();
                    min_nlj = min_nlj.min(nlj);
                    max_nlj = max_nlj.max(nlj);
                    sup.entry((g0, g1))
                        .and_modify(|v| *v = v.max(j))
                        .or_insert(j);
                }
            }
        }
    }

    if sup.is_empty() {
        return Err(Error::domain("no pair cell received any sample"));
    }
    let a0 = min_nlj * (1.0 - JACOBIAN_SAFETY_MARGIN);
    let b0 = max_nlj * (1.0 + JACOBIAN_SAFETY_MARGIN);
    let empty = (-b0).exp();
    let mut values = vec![empty; k * k];
    let mut nonempty = vec![false; k * k];
    for ((g0, g1), v) in sup {
        values[g0 * k + g1] = v;
        nonempty[g0 * k + g1] = true;
    }
    Ok(JacobianTable {
        k,
        eta: cover.eta,
        values,
        nonempty,
        a0,
        b0,
    })
}
