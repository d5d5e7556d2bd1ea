//! Dense complex linear algebra helpers used by the quantum layer.
//!
//! Everything here is plain `nalgebra` with a few conventions fixed once:
//! operator 2-norms go through the Hermitian eigendecomposition of `M* M`
//! (more robust than complex SVD for our matrix sizes), and unitary
//! eigendecompositions go through simultaneous diagonalization of the
//! Hermitian and anti-Hermitian parts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Identity matrix of size `n`.
pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Conjugate transpose.
pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

/// Operator 2-norm (largest singular value) via the largest eigenvalue of
/// the Hermitian matrix `M* M`.
pub fn op_norm(m: &CMat) -> f64 {
    let gram = m.adjoint() * m;
    let eigs = gram.symmetric_eigenvalues();
    eigs.iter().fold(0.0f64, |acc, &x| acc.max(x)).max(0.0).sqrt()
}

/// Frobenius norm.
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖U* U − Id‖₂`, the unitarity residual.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    op_norm(&(u.adjoint() * u - identity(n)))
}

/// `‖M − M*‖₂`, the Hermiticity residual.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    op_norm(&(m - m.adjoint()))
}

/// Discrete Fourier transform, `F_{kj} = N^{-1/2} e^{-2πi kj/N}`.
pub fn dft(n: usize) -> CMat {
    let scale = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |k, j| {
        let phase = -2.0 * std::f64::consts::PI * (k as f64) * (j as f64) / (n as f64);
        C64::from_polar(scale, phase)
    })
}

/// Integer matrix power of a square complex matrix; `t` may be negative when
/// `inv` is supplied.
pub fn int_power(m: &CMat, inv: Option<&CMat>, t: i64) -> CMat {
    let n = m.nrows();
    let base = if t >= 0 {
        m.clone()
    } else {
        inv.expect("negative power requires an inverse").clone()
    };
    let mut acc = identity(n);
    for _ in 0..t.unsigned_abs() {
        acc = &base * &acc;
    }
    acc
}

/// Normalize a vector to unit norm; errors on the zero vector.
pub fn normalize(v: &CVec) -> Option<CVec> {
    let n = v.norm();
    if n == 0.0 {
        None
    } else {
        Some(v / C64::new(n, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_eigendecomposition_probe() {
        let n = 6;
        let m = CMat::from_fn(n, n, |i, j| {
            C64::new(
                (i as f64 * 1.3 + j as f64 * 0.7).sin(),
                (i as f64 - j as f64) * 0.31,
            )
        });
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let se = h.clone().symmetric_eigen();
        let mut worst = 0.0f64;
        for k in 0..n {
            let v = se.eigenvectors.column(k).into_owned();
            let r = (&h * &v) - &v * C64::new(se.eigenvalues[k], 0.0);
            worst = worst.max(r.norm());
        }
        assert!(worst < 1e-12, "residual {worst:.3e}");
        // values-only path agrees
        let mut a = se.eigenvalues.as_slice().to_vec();
        let mut b = h.symmetric_eigenvalues().as_slice().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn op_norm_and_dft_sanity() {
        let f = dft(4);
        assert!(unitarity_residual(&f) < 1e-14);
        assert!((op_norm(&f) - 1.0).abs() < 1e-12);
        // F^4 = Id for the DFT.
        let f4 = &f * &f * &f * &f;
        assert!(op_norm(&(f4 - identity(4))) < 1e-12);
    }
}
