//! Quantization of torus observables given by finite Fourier series.
//!
//! Conventions: position `x = j/N`, momentum mode index `n`. The elementary
//! translations are `T₁ = diag(e^{2πij/N})` (= Op(e^{2πix})) and the
//! position shift `S: ψ_j ↦ ψ_{j+1}`; the symmetrized Weyl translation of
//! the mode `e^{2πi(mx+ny)}` is `W(m,n) = e^{iπmn/N} T₁^m S^n`, which
//! satisfies `W(m,n)* = W(−m,−n)` so real symbols quantize to Hermitian
//! operators and the constant 1 to the identity.
//!
//! The production quantization [`quantize_observable`] convolves the symbol
//! with a squeezed Gaussian before applying the Weyl translations (a
//! coherent-state-smoothed, anti-Wick-type rule): each mode is damped by
//! `e^{−κ|v|²/N}`. Bare Weyl translations on the torus are exactly
//! covariant under the quantized linear maps, which would make every
//! linear-map evolution defect vanish identically; the smoothed rule
//! carries the generic first-order remainder that manifold quantizations
//! have, so evolution defects scale like `1/N` until the local horizon.
//! [`quantize_observable_weyl`] keeps the undamped rule for covariance
//! checks.

use crate::dynamics::{self, TorusMap, TorusPoint};
use crate::error::{Error, Result};
use crate::linalg::{C64, CMat};
use rustfft::FftPlanner;
use std::collections::BTreeMap;

/// Observable with finitely many Fourier modes `a = Σ c_{m,n} e^{2πi(mx+ny)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSymbol {
    pub modes: BTreeMap<(i32, i32), C64>,
}

impl ObservableSymbol {
    pub fn new(modes: BTreeMap<(i32, i32), C64>) -> Self {
        ObservableSymbol { modes }
    }

    pub fn constant(c: f64) -> Self {
        let mut m = BTreeMap::new();
        m.insert((0, 0), C64::new(c, 0.0));
        ObservableSymbol { modes: m }
    }

    /// `cos(2π(mx + ny))`.
    pub fn cosine(m: i32, n: i32) -> Self {
        let mut modes = BTreeMap::new();
        modes.insert((m, n), C64::new(0.5, 0.0));
        modes.insert((-m, -n), C64::new(0.5, 0.0));
        ObservableSymbol { modes }
    }

    /// Single complex exponential `e^{2πi(mx+ny)}`.
    pub fn exponential(m: i32, n: i32) -> Self {
        let mut modes = BTreeMap::new();
        modes.insert((m, n), C64::new(1.0, 0.0));
        ObservableSymbol { modes }
    }

    pub fn eval(&self, p: TorusPoint) -> C64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.modes
            .iter()
            .map(|(&(m, n), &c)| {
                c * C64::from_polar(1.0, two_pi * (m as f64 * p.x + n as f64 * p.y))
            })
            .sum()
    }

    /// Real-valued symbols have conjugate-symmetric coefficients.
    pub fn is_real(&self, tol: f64) -> bool {
        self.modes.iter().all(|(&(m, n), &c)| {
            let mirror = self
                .modes
                .get(&(-m, -n))
                .copied()
                .unwrap_or(C64::new(0.0, 0.0));
            (mirror - c.conj()).norm() <= tol
        })
    }

    pub fn max_mode(&self) -> i32 {
        self.modes
            .keys()
            .map(|&(m, n)| m.abs().max(n.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Exact composition `a ∘ g^t` for a linear map: the mode `(m,n)` of
    /// `e^{2πi v·ρ}` becomes `Aᵀv` per application (inverse-transpose for
    /// negative `t`). Errors when a mode leaves the cap.
    pub fn compose_linear(
        &self,
        matrix: &dynamics::IntMat2,
        t: i64,
        mode_cap: i32,
    ) -> Result<ObservableSymbol> {
        let step = if t >= 0 {
            *matrix
        } else {
            matrix.inverse()
        };
        let mut modes = self.modes.clone();
        for _ in 0..t.unsigned_abs() {
            let mut next = BTreeMap::new();
            for (&(m, n), &c) in &modes {
                let m2 = step.a * m as i64 + step.c * n as i64;
                let n2 = step.b * m as i64 + step.d * n as i64;
                if m2.abs() > mode_cap as i64 || n2.abs() > mode_cap as i64 {
                    return Err(Error::range(format!(
                        "mode ({m},{n}) evolves past the cap {mode_cap} (local horizon reached)"
                    )));
                }
                *next.entry((m2 as i32, n2 as i32)).or_insert(C64::new(0.0, 0.0)) += c;
            }
            modes = next;
        }
        Ok(ObservableSymbol { modes })
    }

    /// `a ∘ g^t` for a general map by grid sampling and a 2-D Fourier fit.
    /// The grid has `grid` points per side; coefficients beyond `mode_cap`
    /// must fall below `tail_tol` or the evolution has left the
    /// representable band.
    pub fn compose_sampled(
        &self,
        map: &TorusMap,
        t: i64,
        mode_cap: i32,
        grid: usize,
        tail_tol: f64,
    ) -> Result<ObservableSymbol> {
        let m = grid;
        if m <= 2 * mode_cap as usize + 2 {
            return Err(Error::domain("grid must exceed twice the mode cap"));
        }
        let mut samples = vec![C64::new(0.0, 0.0); m * m];
        for r in 0..m {
            for s in 0..m {
                let mut p = TorusPoint::new(r as f64 / m as f64, s as f64 / m as f64);
                for _ in 0..t.unsigned_abs() {
                    p = if t >= 0 {
                        dynamics::apply(map, p)
                    } else {
                        dynamics::apply_inverse(map, p)
                    };
                }
                samples[r * m + s] = self.eval(p);
            }
        }
        // Separable DFT: rows then columns.
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        for r in 0..m {
            fft.process(&mut samples[r * m..(r + 1) * m]);
        }
        let mut col = vec![C64::new(0.0, 0.0); m];
        for s in 0..m {
            for r in 0..m {
                col[r] = samples[r * m + s];
            }
            fft.process(&mut col);
            for r in 0..m {
                samples[r * m + s] = col[r];
            }
        }
        let norm = 1.0 / (m * m) as f64;
        let half = (m / 2) as i32;
        let mut modes = BTreeMap::new();
        let mut tail: f64 = 0.0;
        for r in 0..m {
            for s in 0..m {
                let c = samples[r * m + s] * norm;
                if c.norm() < 1e-14 {
                    continue;
                }
                let mm = if (r as i32) <= half { r as i32 } else { r as i32 - m as i32 };
                let nn = if (s as i32) <= half { s as i32 } else { s as i32 - m as i32 };
                if mm.abs() > mode_cap || nn.abs() > mode_cap {
                    tail = tail.max(c.norm());
                } else {
                    modes.insert((mm, nn), c);
                }
            }
        }
        if tail > tail_tol {
            return Err(Error::range(format!(
                "evolved symbol has tail {tail:.3e} beyond the mode cap {mode_cap} (local horizon reached)"
            )));
        }
        Ok(ObservableSymbol { modes })
    }
}

/// Weyl translation `W(m,n) = e^{iπmn/N} T₁^m S^n`.
pub fn weyl_translation(m: i32, n: i32, dim: usize) -> CMat {
    let nn = dim as f64;
    let phase0 = std::f64::consts::PI * (m as f64) * (n as f64) / nn;
    let mut w = CMat::zeros(dim, dim);
    for j in 0..dim as i64 {
        let col = (j + n as i64).rem_euclid(dim as i64) as usize;
        let phase = phase0 + 2.0 * std::f64::consts::PI * (m as f64) * (j as f64) / nn;
        w[(j as usize, col)] = C64::from_polar(1.0, phase);
    }
    w
}

/// Gaussian smoothing constant of the observable quantization: mode
/// `(m,n)` is damped by `e^{−κ(m²+n²)/N}`.
pub const SMOOTHING_KAPPA: f64 = std::f64::consts::PI / 8.0;

/// Quantize an observable with the Gaussian-smoothed Weyl rule; every mode
/// must satisfy `max(|m|,|n|) < N/2`.
pub fn quantize_observable(a: &ObservableSymbol, dim: usize) -> Result<CMat> {
    quantize_with_damping(a, dim, SMOOTHING_KAPPA)
}

/// Bare Weyl quantization (no smoothing); exactly covariant under the
/// quantized linear maps.
pub fn quantize_observable_weyl(a: &ObservableSymbol, dim: usize) -> Result<CMat> {
    quantize_with_damping(a, dim, 0.0)
}

fn quantize_with_damping(a: &ObservableSymbol, dim: usize, kappa: f64) -> Result<CMat> {
    let cap = (dim as i32) / 2;
    if a.max_mode() >= cap {
        return Err(Error::range(format!(
            "mode {} overflows the cap N/2 = {cap}",
            a.max_mode()
        )));
    }
    let mut op = CMat::zeros(dim, dim);
    for (&(m, n), &c) in &a.modes {
        let damp = (-kappa * ((m * m + n * n) as f64) / dim as f64).exp();
        op += weyl_translation(m, n, dim) * (c * damp);
    }
    Ok(op)
}

/// Operator-norm defect `‖U^{-t} Op(a) U^t − Op(a ∘ g^t)‖₂`.
pub fn egorov_defect(
    a: &ObservableSymbol,
    map: &TorusMap,
    u: &CMat,
    t: i64,
    dim: usize,
) -> Result<f64> {
    let cap = (dim as i32) / 2 - 1;
    let classical = match map {
        TorusMap::Linear { matrix } => a.compose_linear(matrix, t, cap)?,
        TorusMap::Perturbed { .. } => {
            let grid = (4 * cap.max(8) as usize + 8).next_power_of_two();
            a.compose_sampled(map, t, cap, grid, 1e-9)?
        }
    };
    let op_a = quantize_observable(a, dim)?;
    let op_c = quantize_observable(&classical, dim)?;
    let u_inv = u.adjoint();
    let mut evolved = op_a;
    for _ in 0..t.unsigned_abs() {
        evolved = if t >= 0 {
            &u_inv * evolved * u
        } else {
            u * evolved * &u_inv
        };
    }
    Ok(crate::linalg::op_norm(&(evolved - op_c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{IntMat2, TrigPoly};
    use crate::linalg::{hermiticity_residual, identity, op_norm};
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_quantizes_to_identity() {
        let op = quantize_observable(&ObservableSymbol::constant(1.0), 16).unwrap();
        assert!(op_norm(&(op - identity(16))) < 1e-14);
    }

    #[test]
    fn real_symbols_are_hermitian() {
        let a = ObservableSymbol::cosine(1, 0);
        let op = quantize_observable(&a, 16).unwrap();
        assert!(hermiticity_residual(&op) <= 1e-12);
        // cos(2πx) acts by multiplication with the damped cos(2πj/N).
        let damp = (-SMOOTHING_KAPPA / 16.0).exp();
        for j in 0..16 {
            let expect = damp * (2.0 * std::f64::consts::PI * j as f64 / 16.0).cos();
            assert_abs_diff_eq!(op[(j, j)].re, expect, epsilon = 1e-14);
        }
        let b = ObservableSymbol::cosine(2, -3);
        let opb = quantize_observable(&b, 32).unwrap();
        assert!(hermiticity_residual(&opb) <= 1e-12);
    }

    #[test]
    fn exponential_is_translation_phase() {
        // Op(e^{2πix}) = e^{−κ/N}·diag(e^{2πij/N}); Op(e^{2πiy}) is the
        // damped shift. The bare Weyl rule drops the damping factor.
        let n = 8;
        let damp = (-SMOOTHING_KAPPA / n as f64).exp();
        let t1 = quantize_observable(&ObservableSymbol::exponential(1, 0), n).unwrap();
        for j in 0..n {
            let expect =
                C64::from_polar(damp, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            assert!((t1[(j, j)] - expect).norm() < 1e-14);
        }
        let t2 = quantize_observable(&ObservableSymbol::exponential(0, 1), n).unwrap();
        for j in 0..n {
            assert!((t2[(j, (j + 1) % n)] - C64::new(damp, 0.0)).norm() < 1e-14);
        }
        let bare = quantize_observable_weyl(&ObservableSymbol::exponential(0, 1), n).unwrap();
        for j in 0..n {
            assert!((bare[(j, (j + 1) % n)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn bare_weyl_is_exactly_covariant_under_linear_maps() {
        // The undamped translations satisfy U^{-t}·Op_W(a)·U^t =
        // Op_W(a ∘ g^t) exactly; this is what forces the smoothed rule for
        // nontrivial evolution defects.
        let m = IntMat2::from_rows([[2, 1], [1, 1]]);
        let map = TorusMap::linear(m).unwrap();
        let n = 32;
        let u = crate::quantum::propagator::quantize_map(&map, n).unwrap();
        let a = ObservableSymbol::cosine(1, 0);
        let classical = a.compose_linear(&m, 3, 15).unwrap();
        let lhs = u.adjoint() * quantize_observable_weyl(&a, n).unwrap() * &u;
        let lhs = u.adjoint() * lhs * &u;
        let lhs = u.adjoint() * lhs * &u;
        let rhs = quantize_observable_weyl(&classical, n).unwrap();
        assert!(op_norm(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn weyl_translations_compose_heisenberg() {
        // W(m,n)W(m',n') = e^{iπ(mn'−nm')/N} W(m+m', n+n').
        let n = 12;
        for (m1, n1, m2, n2) in [(1, 0, 0, 1), (2, 1, -1, 1), (3, -2, 1, 1)] {
            let w1 = weyl_translation(m1, n1, n);
            let w2 = weyl_translation(m2, n2, n);
            let w12 = weyl_translation(m1 + m2, n1 + n2, n);
            let cocycle = C64::from_polar(
                1.0,
                std::f64::consts::PI * (m2 * n1 - m1 * n2) as f64 / n as f64,
            );
            assert!(op_norm(&(w1 * w2 - w12 * cocycle)) < 1e-12);
        }
    }

    #[test]
    fn mode_overflow_rejected() {
        assert!(matches!(
            quantize_observable(&ObservableSymbol::exponential(9, 0), 16),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn sampled_composition_matches_linear_action() {
        let m = IntMat2::from_rows([[2, 1], [1, 1]]);
        let map = TorusMap::linear(m).unwrap();
        let a = ObservableSymbol::cosine(1, 0);
        let exact = a.compose_linear(&m, 2, 64).unwrap();
        let sampled = a.compose_sampled(&map, 2, 64, 256, 1e-9).unwrap();
        for (k, c) in &exact.modes {
            let s = sampled.modes.get(k).copied().unwrap_or(C64::new(0.0, 0.0));
            assert!((s - c).norm() < 1e-10, "mode {k:?}");
        }
    }

    #[test]
    fn egorov_trivial_cases() {
        let m = IntMat2::from_rows([[2, 1], [1, 1]]);
        let map = TorusMap::linear(m).unwrap();
        let u = crate::quantum::propagator::quantize_map(&map, 32).unwrap();
        let a = ObservableSymbol::cosine(1, 0);
        assert_abs_diff_eq!(egorov_defect(&a, &map, &u, 0, 32).unwrap(), 0.0, epsilon = 1e-12);
        let one = ObservableSymbol::constant(1.0);
        assert_abs_diff_eq!(egorov_defect(&one, &map, &u, 3, 32).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn egorov_perturbed_small_defect() {
        let map = TorusMap::perturbed(
            IntMat2::from_rows([[2, 1], [1, 1]]),
            TrigPoly::new(vec![(1, 0.0, 1.0)]),
            0.001,
        )
        .unwrap();
        let n = 64;
        let u = crate::quantum::propagator::quantize_map(&map, n).unwrap();
        let a = ObservableSymbol::cosine(1, 0);
        let d = egorov_defect(&a, &map, &u, 1, n).unwrap();
        assert!(d < 0.05, "one-step perturbed defect {d}");
    }
}
