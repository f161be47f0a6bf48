mod common;

use common::*;
use macrolab::ensembles::{haar_random_state, random_symmetric_state, RngStream};
use macrolab::geometric::{geometric_entanglement, GeomConfig};
use macrolab::macroscopicity::{macroscopicity_exact, OptimizerConfig};
use macrolab::observables::{
    build_vcm, pauli_expectation, two_site_moments, additive_variance, Axis, SpinOrientation,
};
use macrolab::{PureState, SymmetricState};

#[test]
fn pauli_moments_match_explicit_operators() {
    let mut rng = RngStream::new(1);
    for n in [2, 3, 4] {
        let paulis = Paulis::new(n);
        for _ in 0..5 {
            let s = haar_random_state(n, &mut rng).unwrap();
            let psi = vector(&s);
            for j in 0..n {
                for (g, axis) in Axis::ALL.iter().enumerate() {
                    let want = expectation(&psi, paulis.get(j, g)).re;
                    assert!((pauli_expectation(&s, j, *axis).unwrap() - want).abs() < 1e-12);
                }
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    let m = two_site_moments(&s, j, k).unwrap();
                    for g in 0..3 {
                        for b in 0..3 {
                            let want = expectation(&psi, &(paulis.get(j, g) * paulis.get(k, b))).re;
                            assert!((m[g][b] - want).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn vcm_entries_match_explicit_covariances() {
    let mut rng = RngStream::new(2);
    let n = 3;
    let paulis = Paulis::new(n);
    let s = haar_random_state(n, &mut rng).unwrap();
    let psi = vector(&s);
    let v = build_vcm(&s).unwrap();
    for k in 0..n {
        for j in 0..n {
            for (g, ag) in Axis::ALL.iter().enumerate() {
                for (b, ab) in Axis::ALL.iter().enumerate() {
                    let (x, y) = (paulis.get(k, g), paulis.get(j, b));
                    let sym = expectation(&psi, &(x * y + y * x)).re / 2.0;
                    let want = sym - expectation(&psi, x).re * expectation(&psi, y).re;
                    assert!((v.entry(k, *ag, j, *ab) - want).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn additive_variance_matches_operator_variance() {
    let mut rng = RngStream::new(3);
    let n = 3;
    let paulis = Paulis::new(n);
    for _ in 0..10 {
        let s = haar_random_state(n, &mut rng).unwrap();
        let dirs: Vec<[f64; 3]> = (0..n).map(|_| rng.unit_vector3()).collect();
        let alpha = SpinOrientation::strict(dirs.clone()).unwrap();
        let want = paulis.variance(&vector(&s), &dirs);
        assert!((additive_variance(&s, &alpha).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn m_tilde_matches_brute_force_for_small_n() {
    let mut rng = RngStream::new(4);
    let cfg = OptimizerConfig::default();
    for n in [1, 2, 3] {
        for _ in 0..4 {
            let s = haar_random_state(n, &mut rng).unwrap();
            let got = macroscopicity_exact(&s, &cfg).unwrap().m_tilde;
            let want = m_tilde_oracle(&s);
            assert!((got - want).abs() < 1e-5, "n={n}: {got} vs {want}");
        }
    }
    let ghz3 = SymmetricState::ghz(3).unwrap().to_dense().unwrap();
    assert!((m_tilde_oracle(&ghz3) - 9.0).abs() < 1e-5);
    let w3 = SymmetricState::dicke(3, 1).unwrap().to_dense().unwrap();
    assert!((macroscopicity_exact(&w3, &cfg).unwrap().m_tilde - m_tilde_oracle(&w3)).abs() < 1e-5);
}

#[test]
fn two_qubit_geometric_matches_svd_and_grid() {
    let mut rng = RngStream::new(5);
    let cfg = GeomConfig::default();
    for _ in 0..5 {
        let s = haar_random_state(2, &mut rng).unwrap();
        let svd = eta_two_qubit_svd(&s);
        let grid = eta_grid_n2(&s);
        let got = geometric_entanglement(&s, &cfg).unwrap();
        assert!((got.eta - svd).abs() < 1e-10, "{} vs svd {svd}", got.eta);
        assert!((got.e_g + grid.log2()).abs() < 1e-4);
    }
    let bell = PureState::bell_psi_minus();
    assert!((geometric_entanglement(&bell, &cfg).unwrap().e_g - 1.0).abs() < 1e-12);
}

#[test]
fn three_qubit_geometric_matches_grid() {
    let mut rng = RngStream::new(6);
    let cfg = GeomConfig::default();
    for _ in 0..4 {
        let s = haar_random_state(3, &mut rng).unwrap();
        let want = -eta_grid_n3(&s).log2();
        let got = geometric_entanglement(&s, &cfg).unwrap().e_g;
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    }
}

#[test]
fn w3_overlap_from_uniform_grid() {
    let w3 = SymmetricState::dicke(3, 1).unwrap().to_dense().unwrap();
    let eta = eta_uniform_grid(&w3, 128);
    assert!((eta - 4.0 / 9.0).abs() < 1e-8);
    let got = geometric_entanglement(&w3, &GeomConfig::default()).unwrap();
    assert!((got.e_g + eta.log2()).abs() < 1e-4);
}

#[test]
fn symmetric_three_qubit_geometric_matches_grid() {
    let mut rng = RngStream::new(7);
    for _ in 0..3 {
        let s = random_symmetric_state(3, &mut rng).unwrap();
        let d = s.to_dense().unwrap();
        let want = -eta_grid_n3(&d).log2();
        let sym = macrolab::geometric::geometric_entanglement_symmetric(&s, &GeomConfig::default()).unwrap();
        assert!((sym.e_g - want).abs() < 1e-4, "{} vs {want}", sym.e_g);
    }
}
