//! Dense eigendecomposition of unitary matrices.
//!
//! A unitary is normal, so its Hermitian part `(U+U*)/2` and anti-Hermitian
//! part `(U−U*)/(2i)` commute and diagonalize simultaneously: eigenvectors
//! come from the Hermitian eigendecomposition of the first, refined inside
//! each eigenvalue cluster by the restriction of the second (which
//! separates the `±θ` pairs that share a cosine). Output is sorted by
//! eigenphase in `(−π, π]`, then by index.

use crate::error::{Error, Result};
use crate::linalg::{C64, CMat, CVec};

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub phase: f64,
    pub vector: CVec,
    pub residual: f64,
}

/// Cosine clusters within this tolerance are refined together.
const CLUSTER_TOL: f64 = 1e-6;

/// Required worst-case residual `‖Uv − e^{iθ}v‖`.
const RESIDUAL_TOL: f64 = 1e-8;

pub fn eigensystem(u: &CMat) -> Result<Vec<EigenPair>> {
    let n = u.nrows();
    let half = C64::new(0.5, 0.0);
    let herm = (u + u.adjoint()) * half;
    let anti = (u - u.adjoint()) * C64::new(0.0, -0.5);

    let se = herm.clone().symmetric_eigen();
    // Sort the cosine spectrum so clusters are contiguous apply the
    // permutation to the eigenvector columns.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));

    let mut vectors: Vec<CVec> = Vec::with_capacity(n);
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(n);
    for &i in &order {
        vectors.push(se.eigenvectors.column(i).into_owned());
    }
    let cosines: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();

    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && (cosines[end] - cosines[end - 1]).abs() <= CLUSTER_TOL {
            end += 1;
        }
        let size = end - start;
        if size == 1 {
            pairs.push(make_pair(u, vectors[start].clone())?);
        } else {
            // Restrict the anti-Hermitian part to the cluster and
            // rediagonalize: sines separate the ±θ pair.
            let mut basis = CMat::zeros(n, size);
            for (col, v) in vectors[start..end].iter().enumerate() {
                basis.set_column(col, v);
            }
            let small = basis.adjoint() * &anti * &basis;
            let sub = small.symmetric_eigen();
            let rotated = &basis * sub.eigenvectors;
            for col in 0..size {
                pairs.push(make_pair(u, rotated.column(col).into_owned())?);
            }
        }
        start = end;
    }

    pairs.sort_by(|a, b| {
        a.phase
            .total_cmp(&b.phase)
            .then(a.residual.total_cmp(&b.residual))
    });
    Ok(pairs)
}

fn make_pair(u: &CMat, v: CVec) -> Result<EigenPair> {
    let uv = u * &v;
    let rayleigh: C64 = v.dotc(&uv);
    let modulus = rayleigh.norm();
    if modulus < 1e-12 {
        return Err(Error::Numeric("vanishing Rayleigh quotient".into()));
    }
    let lambda = rayleigh / C64::new(modulus, 0.0);
    let residual = (uv - &v * lambda).norm();
    if residual > RESIDUAL_TOL {
        return Err(Error::Numeric(format!(
            "eigenpair residual {residual:.3e} exceeds {RESIDUAL_TOL:.1e}"
        )));
    }
    Ok(EigenPair {
        phase: lambda.im.atan2(lambda.re),
        vector: v,
        residual,
    })
}

/// Count of eigenphase multiplicities (clusters at `tol`), largest first.
pub fn degeneracy_profile(pairs: &[EigenPair], tol: f64) -> Vec<usize> {
    let mut phases: Vec<f64> = pairs.iter().map(|p| p.phase).collect();
    phases.sort_by(f64::total_cmp);
    let mut counts = Vec::new();
    let mut run = 1usize;
    for w in phases.windows(2) {
        if (w[1] - w[0]).abs() <= tol {
            run += 1;
        } else {
            counts.push(run);
            run = 1;
        }
    }
    counts.push(run);
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{IntMat2, TorusMap};
    use crate::linalg::{dft, identity};
    use crate::quantum::propagator::quantize_map;

    #[test]
    fn identity_has_zero_phases() {
        let pairs = eigensystem(&identity(6)).unwrap();
        for p in &pairs {
            assert!(p.phase.abs() < 1e-12);
            assert!(p.residual < 1e-12);
        }
    }

    #[test]
    fn dft4_has_fourth_root_spectrum() {
        // F⁴ = Id: eigenphases lie in {0, ±π/2, π}.
        let pairs = eigensystem(&dft(4)).unwrap();
        for p in &pairs {
            let q = p.phase / (std::f64::consts::FRAC_PI_2);
            assert!(
                (q - q.round()).abs() < 1e-9,
                "phase {} not a quarter turn",
                p.phase
            );
        }
    }

    #[test]
    fn cat_map_spectrum_orthonormal_with_degeneracies() {
        // N = 32 is a short quantum period for this map: large degeneracies,
        // basis still orthonormal and residuals small.
        let map = TorusMap::linear(IntMat2::from_rows([[2, 1], [1, 1]])).unwrap();
        let u = quantize_map(&map, 32).unwrap();
        let pairs = eigensystem(&u).unwrap();
        assert_eq!(pairs.len(), 32);
        for p in &pairs {
            assert!(p.residual <= 1e-8);
        }
        // Gram-matrix check.
        for a in 0..pairs.len() {
            for b in 0..pairs.len() {
                let g: C64 = pairs[a].vector.dotc(&pairs[b].vector);
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (g - C64::new(expect, 0.0)).norm() < 1e-8,
                    "Gram entry ({a},{b}) = {g}"
                );
            }
        }
        let profile = degeneracy_profile(&pairs, 1e-8);
        assert!(profile[0] >= 2, "expected spectral degeneracy, got {profile:?}");
    }
}
