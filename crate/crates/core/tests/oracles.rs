//! Library kernels against the reference computations in `common`.

mod common;

use std::f64::consts::PI;

use common::{M, V};
use num_complex::Complex64;
use qthermo::correlations::{classical_correlation, diagonal_discord, mutual_information};
use qthermo::linalg::{partial_trace, von_neumann_entropy};
use qthermo::measurement::Bipartition;
use qthermo::models::{build_two_qubit, random_model, TwoQubitXYZParams};
use qthermo::sweep::figures::generate_figure;
use qthermo::sweep::{Cell, Table};
use qthermo::thermometry::local_qfi;
use qthermo::{DerivativePolicy, SubsystemLayout, ThermalModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().fold(0.0, |m: f64, z| m.max(z.norm()))
}

fn fig2a() -> std::sync::Arc<ThermalModel> {
    ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(3.0, 1.0, 1.0, 1.0, 2.0)).unwrap())
}

fn dephase_a(rho: &M, basis: &[V]) -> M {
    basis.iter().fold(M::zeros(4, 4), |acc, v| {
        let p = common::kron(&(v * v.adjoint()), &M::identity(2, 2));
        acc + &p * rho * &p
    })
}

/// `S(ρ_B) − Σ p S(ρ_{B|±n})` for the Bloch direction `(θ, φ)` on qubit A.
fn bloch_information(rho: &M, theta: f64, phi: f64) -> f64 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let up = V::from_vec(vec![Complex64::from(c), Complex64::from_polar(s, phi)]);
    let down = V::from_vec(vec![-Complex64::from_polar(s, -phi), Complex64::from(c)]);
    let sb = common::entropy(&common::partial_trace_qubits(rho, 2, &[1]));
    let mut cond = 0.0;
    for v in [up, down] {
        let p = common::kron(&(&v * v.adjoint()), &M::identity(2, 2));
        let block = common::partial_trace_qubits(&(&p * rho * &p), 2, &[1]);
        let w = block.trace().re;
        if w > 1e-14 {
            cond += w * common::entropy(&(block / Complex64::from(w)));
        }
    }
    sb - cond
}

#[test]
fn gibbs_state_matches_taylor_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let m = ThermalModel::new(random_model(&SubsystemLayout::qubits(n), &mut rng).unwrap());
        let h = m.hamiltonian().total().matrix().clone();
        for t in [0.05, 0.7, 30.0] {
            let lib = m.gibbs(t).unwrap().state().matrix().clone();
            assert!(max_diff(&lib, &common::gibbs(&h, t)) < 1e-12, "n={n} T={t}");
        }
    }
}

#[test]
fn partial_trace_matches_index_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = ThermalModel::new(random_model(&SubsystemLayout::qubits(3), &mut rng).unwrap());
    let rho = m.gibbs(0.4).unwrap().state().clone();
    for keep in [vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]] {
        let lib = partial_trace(&rho, &keep).unwrap();
        let oracle = common::partial_trace_qubits(rho.matrix(), 3, &keep);
        assert!(max_diff(lib.matrix(), &oracle) < 1e-14, "keep {keep:?}");
    }
}

#[test]
fn entropies_and_mutual_information() {
    let rho = fig2a().gibbs(0.8).unwrap().state().clone();
    let s = von_neumann_entropy(&rho).unwrap();
    assert!((s - common::entropy(rho.matrix())).abs() < 1e-13);
    let oracle = common::entropy(&common::partial_trace_qubits(rho.matrix(), 2, &[0]))
        + common::entropy(&common::partial_trace_qubits(rho.matrix(), 2, &[1]))
        - s;
    let lib = mutual_information(&rho, &Bipartition::site(0)).unwrap();
    assert!((lib - oracle).abs() < 1e-13, "{lib} vs {oracle}");
}

#[test]
fn diagonal_discord_matches_explicit_dephasing() {
    for t in [0.3, 1.0, 5.0] {
        let rho = fig2a().gibbs(t).unwrap().state().clone();
        let rho_a = common::partial_trace_qubits(rho.matrix(), 2, &[0]);
        let eig = nalgebra::SymmetricEigen::new(rho_a);
        let basis: Vec<V> = (0..2).map(|k| eig.eigenvectors.column(k).into_owned()).collect();
        let oracle = common::entropy(&dephase_a(rho.matrix(), &basis)) - common::entropy(rho.matrix());
        let lib = diagonal_discord(&rho, &Bipartition::site(0)).unwrap();
        assert!((lib - oracle).abs() < 1e-12, "T={t}: {lib} vs {oracle}");
    }
}

#[test]
fn classical_correlation_beats_dense_grid() {
    let rho = fig2a().gibbs(0.5).unwrap().state().clone();
    let n = 512;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        for k in 0..n {
            let (theta, phi) = (PI * i as f64 / n as f64, 2.0 * PI * k as f64 / n as f64);
            best = best.max(bloch_information(rho.matrix(), theta, phi));
        }
    }
    let lib = classical_correlation(&rho, &Bipartition::site(0)).unwrap();
    assert!(lib >= best - 1e-12, "optimizer {lib} below grid {best}");
    assert!(lib - best < 1e-4, "optimizer {lib} far above grid {best}");
}

#[test]
fn local_qfi_matches_sld_formula() {
    let m = fig2a();
    let h = m.hamiltonian().total().matrix().clone();
    for t in [0.5, 2.0] {
        let reduced = |s: f64| common::partial_trace_qubits(&common::gibbs(&h, s), 2, &[1]);
        let flat = |s: f64| reduced(s).iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>();
        let d = common::derivative(flat, t);
        let dr = M::from_iterator(2, 2, d.chunks(2).map(|c| Complex64::new(c[0], c[1])));
        let eig = nalgebra::SymmetricEigen::new(reduced(t));
        let dm = eig.eigenvectors.adjoint() * &dr * &eig.eigenvectors;
        let mut oracle = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                oracle += 2.0 * dm[(i, j)].norm_sqr() / (eig.eigenvalues[i] + eig.eigenvalues[j]);
            }
        }
        let lib = local_qfi(&m.gibbs(t).unwrap(), 1, &DerivativePolicy::default()).unwrap();
        assert!(common::rel(lib, oracle) < 1e-8, "T={t}: {lib} vs {oracle}");
    }
}

#[test]
fn fig2a_matches_golden_csv() {
    let golden = Table::read_csv(&include_bytes!("golden/fig2a.csv")[..]).unwrap();
    let fresh = generate_figure("fig2a", 1).unwrap();
    assert_eq!(fresh.columns, golden.columns);
    assert_eq!(fresh.rows.len(), 200);
    for (r, (a, b)) in fresh.rows.iter().zip(&golden.rows).enumerate() {
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            match (x, y) {
                (Cell::Num(x), Cell::Num(y)) => {
                    let tol = 1e-9 * x.abs().max(y.abs()) + 1e-15;
                    assert!((x - y).abs() <= tol, "row {r} column {}: {x} vs {y}", fresh.columns[k]);
                }
                _ => assert_eq!(x, y, "row {r} column {}", fresh.columns[k]),
            }
        }
    }
}
