use super::measure::{cylinder_measure_from_state, tau_op, pi_op};
use super::partition::{smooth_partition, QuantumPartition};
use super::propagator::quantize_map;
use super::*;
use crate::dynamics::{discrete_jacobian, Cover, IntMat2, TorusMap};
use crate::linalg::{dft, fro_norm, C64};
use crate::roof::{index_family, RoofFunction};
use crate::symbolic::Word;
use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cat_map() -> TorusMap {
    TorusMap::linear(IntMat2::from_rows([[2, 1], [1, 1]])).unwrap()
}

fn setup(n: usize, k: usize) -> (CMat, QuantumPartition, RoofFunction) {
    let map = cat_map();
    let u = quantize_map(&map, n).unwrap();
    let cover = Cover::strips(k, 0.04, 1.0).unwrap();
    let part = smooth_partition(&cover, 0.05, n).unwrap();
    let table = discrete_jacobian(&map, &cover, 16).unwrap();
    let f = RoofFunction::from_jacobian(&table);
    (u, part, f)
}

fn random_state(n: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVec::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    &v / C64::new(v.norm(), 0.0)
}

#[test]
fn evolve_basics_and_group_law() {
    let (u, part, _) = setup(16, 2);
    let a = part.op(0);
    assert!(op_norm(&(evolve(&u, &a, 0) - &a)) < 1e-14);
    assert!(op_norm(&(evolve(&u, &identity(16), 5) - identity(16))) < 1e-10);
    // A(t+s) = (A(t))(s); norm preserved.
    let at = evolve(&u, &a, 3);
    let ats = evolve(&u, &at, 2);
    let direct = evolve(&u, &a, 5);
    assert!(op_norm(&(ats - direct)) < 1e-10);
    assert_abs_diff_eq!(op_norm(&evolve(&u, &a, 4)), op_norm(&a), epsilon = 1e-10);
}

#[test]
fn tau_and_pi_match_their_definitions() {
    let (u, part, _) = setup(16, 2);
    // Single letter: τ = P_i, π = P_i.
    assert!(op_norm(&(tau(&part, &u, &[1], 1).unwrap() - part.op(1))) < 1e-13);
    assert!(op_norm(&(pi(&part, &u, &[1], 1).unwrap() - part.op(1))) < 1e-13);
    // Word (i,j): τ = P_j(η)·P_i.
    let direct = evolve(&u, &part.op(1), 1) * part.op(0);
    assert!(op_norm(&(tau(&part, &u, &[0, 1], 1).unwrap() - direct)) < 1e-12);
    // Backward digits (β₀, β₋₁) = (0, 1): π = P_{β₀}·P_{β₋₁}(−η).
    let direct = part.op(0) * evolve(&u, &part.op(1), -1);
    assert!(op_norm(&(pi(&part, &u, &[0, 1], 1).unwrap() - direct)) < 1e-12);
    // Length 4: τ = P_{α₃}(3η)P_{α₂}(2η)P_{α₁}(η)P_{α₀}.
    let word = [0u8, 1, 1, 0];
    let direct = evolve(&u, &part.op(0), 3)
        * evolve(&u, &part.op(1), 2)
        * evolve(&u, &part.op(1), 1)
        * part.op(0);
    assert!(op_norm(&(tau(&part, &u, &word, 1).unwrap() - direct)) < 1e-12);
    // Backward length 4, digits (β₀,β₋₁,β₋₂,β₋₃) = (0,1,1,0):
    // π = P_{β₋₃}(−3η)P_{β₋₂}(−2η)P_{β₀}P_{β₋₁}(−η).
    let direct = evolve(&u, &part.op(0), -3)
        * evolve(&u, &part.op(1), -2)
        * part.op(0)
        * evolve(&u, &part.op(1), -1);
    assert!(op_norm(&(pi(&part, &u, &[0, 1, 1, 0], 1).unwrap() - direct)) < 1e-12);
    // τ norms stay ≤ 1 + tolerance.
    assert!(op_norm(&tau(&part, &u, &word, 1).unwrap()) <= 1.0 + 1e-10);
}

#[test]
fn state_measure_matches_operator_norms() {
    let (u, part, _) = setup(16, 2);
    let psi = random_state(16, 3);
    let fwd = cylinder_measure_from_state(&psi, &part, &u, 1, 4, crate::symbolic::Orientation::Forward)
        .unwrap();
    let bwd =
        cylinder_measure_from_state(&psi, &part, &u, 1, 4, crate::symbolic::Orientation::Backward)
            .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..12 {
        let len = rng.gen_range(2..=4usize);
        let digits: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2u8)).collect();
        let t = tau_op(&part, &u, &digits, 1);
        assert_abs_diff_eq!(
            fwd.measure.mass_of_digits(&digits),
            (t * &psi).norm_squared(),
            epsilon = 1e-12
        );
        let p = pi_op(&part, &u, &digits, 1);
        assert_abs_diff_eq!(
            bwd.measure.mass_of_digits(&digits),
            (p * &psi).norm_squared(),
            epsilon = 1e-12
        );
    }
}

#[test]
fn eigenvector_measures_are_compatible() {
    let (u, part, _) = setup(32, 3);
    let pairs = eigen::eigensystem(&u).unwrap();
    for pair in pairs.iter().step_by(11) {
        for orientation in [
            crate::symbolic::Orientation::Forward,
            crate::symbolic::Orientation::Backward,
        ] {
            let sm =
                cylinder_measure_from_state(&pair.vector, &part, &u, 1, 5, orientation).unwrap();
            assert!(!sm.warn_not_eigenvector, "eigenvector flagged");
            let residual = sm.measure.compatibility_residual();
            assert!(
                residual <= 1e-9,
                "{orientation:?} compatibility residual {residual:.3e}"
            );
        }
    }
    // Depth-1 masses sum to 1 for arbitrary states too.
    let psi = random_state(32, 5);
    let sm = cylinder_measure_from_state(
        &psi,
        &part,
        &u,
        1,
        3,
        crate::symbolic::Orientation::Forward,
    )
    .unwrap();
    let s: f64 = sm.measure.table(1).iter().sum();
    assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
}

#[test]
fn trivial_partition_gives_unit_mass() {
    let n = 12;
    let map = cat_map();
    let u = quantize_map(&map, n).unwrap();
    let part = QuantumPartition {
        k: 1,
        dim: n,
        weights: vec![vec![1.0; n]],
        completeness_residual: 0.0,
    };
    let psi = random_state(n, 1);
    let sm = cylinder_measure_from_state(
        &psi,
        &part,
        &u,
        1,
        4,
        crate::symbolic::Orientation::Forward,
    )
    .unwrap();
    for d in 1..=4 {
        assert_abs_diff_eq!(
            sm.measure.mass(&Word::forward(vec![0; d])).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }
}

#[test]
fn refined_partition_identity_both_orientations() {
    let (u, part, f) = setup(32, 2);
    let t = 3.0 * 2.0 * f.b0 * f.eta;
    for orientation in [
        crate::symbolic::Orientation::Forward,
        crate::symbolic::Orientation::Backward,
    ] {
        let r = refined_identity_residual(&part, &u, &f, t, orientation).unwrap();
        assert!(r <= 1e-8, "{orientation:?} residual {r:.3e}");
    }
}

#[test]
fn quantum_entropy_projective_cases() {
    let n = 16;
    let part = QuantumPartition::projective_bins(n, n).unwrap();
    let ops = part.ops();
    // Basis state: entropy 0.
    let mut e0 = CVec::zeros(n);
    e0[0] = C64::new(1.0, 0.0);
    assert_abs_diff_eq!(quantum_entropy(&ops, &e0, 1e-10).unwrap(), 0.0, epsilon = 1e-12);
    // Flat DFT column: entropy log N.
    let f = dft(n);
    let flat = f.column(1).into_owned();
    assert_abs_diff_eq!(
        quantum_entropy(&ops, &flat, 1e-10).unwrap(),
        (n as f64).ln(),
        epsilon = 1e-10
    );
    // Max-entropy bound for random states and the strip partition.
    let (_, strip_part, _) = setup(16, 3);
    let sops = strip_part.ops();
    for seed in 0..5 {
        let psi = random_state(n, 100 + seed);
        let h = quantum_entropy(&sops, &psi, 1e-8).unwrap();
        assert!(h >= 0.0 && h <= (sops.len() as f64).ln() + 1e-9);
    }
}

#[test]
fn c_norm_cases() {
    let n = 4;
    let f = dft(n);
    // Singleton partitions {Id}, {Id}: c = ‖U‖ = 1.
    let id = vec![identity(n)];
    assert_abs_diff_eq!(c_norm(&id, &id, &f, None).unwrap(), 1.0, epsilon = 1e-12);
    // Position projectors against position projectors under the DFT:
    // c = max |F_{jk}| = 1/√N = 0.5 at N = 4.
    let proj = QuantumPartition::projective_bins(n, n).unwrap().ops();
    assert_abs_diff_eq!(c_norm(&proj, &proj, &f, None).unwrap(), 0.5, epsilon = 1e-12);
    // A contraction cutoff never increases c.
    let cutoff: Vec<CMat> = (0..n).map(|_| identity(n) * C64::new(0.7, 0.0)).collect();
    let with = c_norm(&proj, &proj, &f, Some(&cutoff)).unwrap();
    assert!(with <= 0.5 + 1e-12);
}

#[test]
fn eup_equality_for_dft_basis_states() {
    let n = 4;
    let f = dft(n);
    let proj = QuantumPartition::projective_bins(n, n).unwrap().ops();
    let mut e0 = CVec::zeros(n);
    e0[0] = C64::new(1.0, 0.0);
    let chk = eup_check(&proj, &proj, &f, None, 0.0, &e0).unwrap();
    assert_abs_diff_eq!(chk.lhs, (n as f64).ln(), epsilon = 1e-10);
    assert_abs_diff_eq!(chk.rhs, (n as f64).ln(), epsilon = 1e-12);
    assert!(chk.holds);
    assert!(chk.slack.abs() < 1e-9);
}

#[test]
fn maassen_uffink_sanity_random_states() {
    // Position bins against the DFT: h_τ(Fψ) + h_π(ψ) ≥ log N for every
    // unit state.
    for n in [8usize, 16, 32] {
        let f = dft(n);
        let proj = QuantumPartition::projective_bins(n, n).unwrap().ops();
        for seed in 0..200u64 {
            let psi = random_state(n, 1000 * n as u64 + seed);
            let chk = eup_check(&proj, &proj, &f, None, 0.0, &psi).unwrap();
            assert!(
                chk.lhs >= (n as f64).ln() - 1e-9,
                "N = {n}, seed {seed}: lhs {} < log N",
                chk.lhs
            );
        }
    }
}

#[test]
fn commutator_defect_cases() {
    let (u, part, f) = setup(32, 2);
    // Single letter: trivially zero.
    assert_abs_diff_eq!(
        commutator_defect(&part, &u, &[0], &f, 10.0).unwrap(),
        0.0,
        epsilon = 1e-12
    );
    // Cap exceeded.
    let long = vec![0u8; 40];
    assert!(matches!(
        commutator_defect(&part, &u, &long, &f, 1.0),
        Err(Error::Range(_))
    ));
    // Admissible word: decreasing defect across N (recorded scaling).
    let word = [0u8, 1, 0, 1];
    let mut prev = f64::INFINITY;
    for n in [32usize, 64, 128] {
        let map = cat_map();
        let u = quantize_map(&map, n).unwrap();
        let cover = Cover::strips(2, 0.04, 1.0).unwrap();
        let part = smooth_partition(&cover, 0.05, n).unwrap();
        let d = commutator_defect(&part, &u, &word, &f, 10.0).unwrap();
        assert!(d < prev, "defect not decreasing at N = {n}: {d} ≥ {prev}");
        prev = d;
    }
}

#[test]
fn tau_family_completeness_small() {
    let (u, part, f) = setup(16, 2);
    let t = 2.0 * f.b0 * f.eta;
    let fam = index_family(&f, t, crate::symbolic::Orientation::Forward).unwrap();
    let taus = tau_family(&part, &u, &fam).unwrap();
    let mut acc = CMat::zeros(16, 16);
    for op in &taus {
        acc += op.adjoint() * op;
    }
    assert!(op_norm(&(acc - identity(16))) <= 1e-8);
    // Frobenius sanity: completeness is not an artifact of cancellation.
    assert!(fro_norm(&acc) > 1.0);
}
