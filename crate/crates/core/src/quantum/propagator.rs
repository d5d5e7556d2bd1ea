//! Unitary propagators on the N-dimensional torus Hilbert space.
//!
//! With `ħ = 1/(2πN)`, a hyperbolic `A = [[a,b],[c,d]] ∈ SL(2,Z)` quantizes
//! to the quadratic-Gauss-sum kernel
//!
//! `U_{kj} = (N|b|)^{-1/2} e^{iφ} Σ_{s<|b|} exp(iπ(a j² − 2j(k+sN) + d(k+sN)²)/(Nb))`
//!
//! for `b ≠ 0`, which is well defined and unitary when `Nab` and `Ncd` are
//! even; `b = 0` maps are diagonal shears (times the parity operator for
//! trace < 0). A perturbed map multiplies by the kick propagator
//! `exp(2πiN·amp·V(x))` before the linear part, mirroring the classical
//! composition.

use crate::dynamics::{IntMat2, TorusMap};
use crate::error::{Error, Result};
use crate::linalg::{identity, op_norm, unitarity_residual, C64, CMat};

/// Parity/compatibility condition of the kernel quantization.
pub fn parity_compatible(a: &IntMat2, n: usize) -> bool {
    let n = n as i64;
    (n * a.a * a.b) % 2 == 0 && (n * a.c * a.d) % 2 == 0
}

/// Quantize a unimodular integer matrix on the N-dimensional space.
/// Errors when `det ≠ 1`, the parity condition fails, or (for `b ≠ 0`)
/// `gcd(b, N) > 1`, where the kernel sum is not unitary.
pub fn quantize_cat(a: &IntMat2, n: usize) -> Result<CMat> {
    if n < 2 {
        return Err(Error::domain("dimension must be ≥ 2"));
    }
    if a.det() != 1 {
        return Err(Error::domain(format!("determinant must be +1, got {}", a.det())));
    }
    if !parity_compatible(a, n) {
        return Err(Error::config(format!(
            "parity condition fails: N·a·b = {} and N·c·d = {} must both be even",
            n as i64 * a.a * a.b,
            n as i64 * a.c * a.d
        )));
    }
    let u = if a.b != 0 {
        if gcd(a.b.unsigned_abs(), n as u64) != 1 {
            return Err(Error::config(format!(
                "kernel quantization needs gcd(b, N) = 1, got gcd({}, {n}) ≠ 1",
                a.b
            )));
        }
        kernel_propagator(a, n)
    } else {
        // b = 0 and det = 1 force a = d = ±1: a (possibly reflected) shear.
        shear_propagator(a, n)?
    };
    let residual = unitarity_residual(&u);
    if residual > 1e-10 {
        return Err(Error::Numeric(format!(
            "propagator unitarity residual {residual:.3e} exceeds 1e-10"
        )));
    }
    Ok(u)
}

fn gcd(mut x: u64, mut y: u64) -> u64 {
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    x
}

fn kernel_propagator(a: &IntMat2, n: usize) -> CMat {
    let nn = n as f64;
    let b = a.b as f64;
    let branches = a.b.unsigned_abs();
    let scale = 1.0 / (nn * b.abs()).sqrt();
    // Global phase convention: e^{-iπ/4·sgn(b)} makes the identity-like
    // limits come out with unit phase; any global phase is admissible.
    let global = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4 * b.signum());
    CMat::from_fn(n, n, |k, j| {
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..branches {
            let kk = k as f64 + (s as f64) * nn;
            let phase = std::f64::consts::PI / (nn * b)
                * (a.a as f64 * (j as f64) * (j as f64) - 2.0 * (j as f64) * kk
                    + a.d as f64 * kk * kk);
            acc += C64::from_polar(1.0, phase);
        }
        global * acc * scale
    })
}

fn shear_propagator(a: &IntMat2, n: usize) -> Result<CMat> {
    let (sign, c) = if a.a == 1 && a.d == 1 {
        (1i64, a.c)
    } else if a.a == -1 && a.d == -1 {
        (-1, -a.c)
    } else {
        return Err(Error::domain("b = 0 with det 1 requires a = d = ±1"));
    };
    // Shear (x, y) ↦ (x, y + cx): diagonal phases exp(iπ c j²/N).
    let nn = n as f64;
    let mut u = CMat::zeros(n, n);
    for j in 0..n {
        let phase = std::f64::consts::PI * c as f64 * (j * j) as f64 / nn;
        u[(j, j)] = C64::from_polar(1.0, phase);
    }
    if sign < 0 {
        // −Id factor: position parity ψ(x) ↦ ψ(−x).
        let mut p = CMat::zeros(n, n);
        for j in 0..n {
            p[((n - j) % n, j)] = C64::new(1.0, 0.0);
        }
        u = p * u;
    }
    Ok(u)
}

/// Quantize a torus map: kernel/shear propagator for the linear part,
/// composed with the kick propagator `exp(−2πiN·amp·V(x_j))` for perturbed
/// maps (kick applied first, matching the classical composition).
pub fn quantize_map(map: &TorusMap, n: usize) -> Result<CMat> {
    match map {
        TorusMap::Linear { matrix } => quantize_cat(matrix, n),
        TorusMap::Perturbed {
            base,
            kick,
            amplitude,
        } => {
            let ua = quantize_cat(base, n)?;
            let mut uk = CMat::zeros(n, n);
            for j in 0..n {
                let x = j as f64 / n as f64;
                // Sign fixed by U^{-1} S U = diag(e^{2πi·amp·V'}) S, the
                // quantum image of the classical momentum kick.
                let phase = 2.0 * std::f64::consts::PI * n as f64 * amplitude * kick.eval(x);
                uk[(j, j)] = C64::from_polar(1.0, phase);
            }
            Ok(ua * uk)
        }
    }
}

/// `‖U(A)·U(B) − e^{iθ}·U(AB)‖₂` minimized over the fitted global phase
/// (taken from the largest entry of the product pair).
pub fn composition_defect(u_ab: &CMat, u_a: &CMat, u_b: &CMat) -> f64 {
    let prod = u_a * u_b;
    // Fit the phase on the largest-magnitude entry of U(AB).
    let mut best = (0usize, 0usize);
    let mut mag = 0.0;
    for k in 0..u_ab.nrows() {
        for j in 0..u_ab.ncols() {
            if u_ab[(k, j)].norm() > mag {
                mag = u_ab[(k, j)].norm();
                best = (k, j);
            }
        }
    }
    let phase = prod[best] / u_ab[best];
    let phase = phase / C64::new(phase.norm(), 0.0);
    op_norm(&(prod - u_ab * phase))
}

/// `U = Id` up to global phase.
pub fn is_identity_up_to_phase(u: &CMat, tol: f64) -> bool {
    let n = u.nrows();
    let phase = u[(0, 0)];
    if phase.norm() < 1e-12 {
        return false;
    }
    let phase = phase / C64::new(phase.norm(), 0.0);
    op_norm(&(u / phase - identity(n))) < tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TrigPoly;
    use crate::linalg::dft;

    fn cat_matrix() -> IntMat2 {
        IntMat2::from_rows([[2, 1], [1, 1]])
    }

    #[test]
    fn identity_quantizes_to_identity_phase() {
        let u = quantize_cat(&IntMat2::from_rows([[1, 0], [0, 1]]), 16).unwrap();
        assert!(is_identity_up_to_phase(&u, 1e-12));
    }

    #[test]
    fn cat_propagator_unitary() {
        for n in [8, 32, 64] {
            let u = quantize_cat(&cat_matrix(), n).unwrap();
            assert!(unitarity_residual(&u) <= 1e-10, "N = {n}");
        }
    }

    #[test]
    fn parity_rejection() {
        // [[2,1],[1,1]] has c·d odd: odd N violates the parity condition.
        assert!(matches!(
            quantize_cat(&cat_matrix(), 15),
            Err(Error::Config(_))
        ));
        assert!(quantize_cat(&cat_matrix(), 16).is_ok());
    }

    #[test]
    fn composition_exact_for_shear_pairs() {
        let n = 32;
        let s1 = IntMat2::from_rows([[1, 0], [2, 1]]);
        let s2 = IntMat2::from_rows([[1, 0], [4, 1]]);
        let u1 = quantize_cat(&s1, n).unwrap();
        let u2 = quantize_cat(&s2, n).unwrap();
        let u12 = quantize_cat(&s1.mul(&s2), n).unwrap();
        assert!(composition_defect(&u12, &u1, &u2) <= 1e-8);
        // Shear × cat as well.
        let cat = cat_matrix();
        let uc = quantize_cat(&cat, n).unwrap();
        let usc = quantize_cat(&s1.mul(&cat), n).unwrap();
        assert!(composition_defect(&usc, &u1, &uc) <= 1e-8);
    }

    #[test]
    fn dft_is_quantized_inverse_rotation() {
        // The DFT matches the quantization of [[0,−1],[1,0]]⁻¹-type maps up
        // to phase only in even dimensions; just check unitarity and the
        // fourth-power identity here.
        let f = dft(12);
        assert!(unitarity_residual(&f) < 1e-12);
        let f4 = &f * &f * &f * &f;
        assert!(is_identity_up_to_phase(&f4, 1e-10));
    }

    #[test]
    fn perturbed_propagator_unitary() {
        let map = TorusMap::perturbed(
            cat_matrix(),
            TrigPoly::new(vec![(1, 0.0, 1.0)]),
            0.001,
        )
        .unwrap();
        let u = quantize_map(&map, 32).unwrap();
        assert!(unitarity_residual(&u) <= 1e-10);
    }
}
