mod common;

use common::{max_entry_diff, oracle_deviations, DenseOracle};
use diraclap::clifford::build_clifford;
use diraclap::grid::{Grid, GridSpec};

const TOL: f64 = 1e-10;

fn oracle(length: f64) -> DenseOracle {
    let grid = Grid::new(GridSpec::new(2, 8, length).unwrap()).unwrap();
    DenseOracle::new(&grid, &build_clifford(2).unwrap())
}

#[test]
fn fft_operators_match_dense_assembly() {
    for length in [4.0, 8.0] {
        let o = oracle(length);
        for (lambda, mu) in [(0.7, 0.5), (-1.3, 0.25), (0.0, 1.0)] {
            for (name, dev) in oracle_deviations(&o, lambda, mu) {
                assert!(dev < TOL, "{name} at L={length}, z={lambda}+i{mu}: {dev:e}");
            }
        }
    }
}

#[test]
fn regularized_resolvent_matches_dense_assembly() {
    let o = oracle(8.0);
    let lib = o.library("G(l,mu,eps)", &[("l", 0.4), ("mu", 0.3), ("eps", 0.6)]);
    assert!(max_entry_diff(&lib, &o.resolvent(0.4, 0.3, 0.6, 1.0)) < TOL);
    let lib = o.library("Gm(l,mu,eps)", &[("l", 0.4), ("mu", 0.3), ("eps", 0.6)]);
    assert!(max_entry_diff(&lib, &o.resolvent(0.4, 0.3, 0.6, -1.0)) < TOL);
}

#[test]
fn dense_references_are_consistent() {
    let o = oracle(8.0);
    let h0 = o.h0();
    let a = o.conjugate();
    assert!(max_entry_diff(&h0, &h0.adjoint()) < 1e-12);
    assert!(max_entry_diff(&a, &a.adjoint()) < 1e-12);
    let gp = o.resolvent(0.7, 0.5, 0.0, 1.0);
    let gm = o.resolvent(0.7, 0.5, 0.0, -1.0);
    assert!(max_entry_diff(&gp.adjoint(), &gm) < 1e-12);
}
