//! Entropic correlations of bipartite and multipartite states: mutual
//! information, classical correlation, quantum discord, and diagonal discord.

use std::sync::Arc;

use crate::derivative::{central_derivative, DerivativePolicy};
use crate::error::{Error, Result};
use crate::linalg::{
    eigh_unchecked, group_ties, negentropy_of_spectrum, partial_trace, von_neumann_entropy, CMatrix, DensityMatrix,
    SubsystemLayout,
};
use crate::measurement::{
    resolve_degenerate_blocks, BipartiteMatrix, Bipartition, BlochMeasurement, DegeneracyInfo,
    ProjectorSet, MIN_PROBABILITY,
};
use crate::optimize::{minimize_on_sphere, GridRefineOptions, SphereOptimum};
use crate::thermometry::{GreedyPath, ThermalModel, TIE_TOLERANCE};

/// `I_AB = S_A + S_B − S_AB`.
pub fn mutual_information(rho: &DensityMatrix, split: &Bipartition) -> Result<f64> {
    split.check(rho.layout())?;
    let b = split.b(rho.layout());
    // deficits `ln d − S`; the `ln d` parts cancel because d = d_A d_B
    let deficit = |r: &DensityMatrix| negentropy_of_spectrum(&r.eigh().eigenvalues, r.dim());
    let na = deficit(&partial_trace(rho, split.a())?)?;
    let nb = deficit(&partial_trace(rho, &b)?)?;
    Ok(deficit(rho)? - na - nb)
}

/// `S_{B|{Π_j}} = Σ_j p_j S(ρ_{B|Π_j})` for projectors acting on `split.a()`.
pub fn conditional_entropy_after_measurement(
    rho: &DensityMatrix,
    split: &Bipartition,
    projs: &ProjectorSet,
) -> Result<f64> {
    let bm = BipartiteMatrix::from_state(rho, split)?;
    if projs.dim() != bm.d_a {
        return Err(Error::Usage(format!(
            "projectors of dimension {} on subsystem of dimension {}",
            projs.dim(),
            bm.d_a
        )));
    }
    bm.conditional_entropy(projs.basis())
}

/// Optimal projective measurement on a qubit for `J_{B|A}`.
#[derive(Clone, Debug)]
pub struct ClassicalCorrelation {
    pub value: f64,
    pub measurement: BlochMeasurement,
    /// Minimal conditional entropy `min S_{B|{Π_j}}`.
    pub conditional_entropy: f64,
    pub optimum: SphereOptimum,
}

fn qubit_side(bm: &BipartiteMatrix) -> Result<()> {
    if bm.d_a != 2 {
        return Err(Error::UnsupportedOptimization(format!(
            "measurement optimization needs a qubit on the measured side, got dimension {}",
            bm.d_a
        )));
    }
    Ok(())
}

/// `J_{B|A} = S_B − min S_{B|{Π_j}}` over Bloch-sphere projective measurements.
/// The eigenbasis of `ρ_A` is scored alongside the grid, so the result never
/// exceeds what that basis gives.
pub fn classical_correlation_detail(
    rho: &DensityMatrix,
    split: &Bipartition,
    opts: &GridRefineOptions,
) -> Result<ClassicalCorrelation> {
    let bm = BipartiteMatrix::from_state(rho, split)?;
    qubit_side(&bm)?;
    let eig = eigh_unchecked(&bm.reduced_a());
    let start = BlochMeasurement::from_vector(&eig.vector(0));
    let objective = |theta: f64, phi: f64| {
        bm.conditional_entropy(&BlochMeasurement::new(theta, phi).basis())
            .unwrap_or(f64::INFINITY)
    };
    let optimum = minimize_on_sphere(objective, opts, &[(start.theta, start.phi)]);
    let measurement = BlochMeasurement::new(optimum.theta, optimum.phi);
    Ok(ClassicalCorrelation {
        value: bm.information_gain(&measurement.basis())?,
        measurement,
        conditional_entropy: optimum.value,
        optimum,
    })
}

pub fn classical_correlation(rho: &DensityMatrix, split: &Bipartition) -> Result<f64> {
    Ok(classical_correlation_detail(rho, split, &GridRefineOptions::default())?.value)
}

/// `D_{A→B} = I_AB − J_{B|A}`.
pub fn quantum_discord(rho: &DensityMatrix, split: &Bipartition) -> Result<f64> {
    Ok(mutual_information(rho, split)? - classical_correlation(rho, split)?)
}

/// `𝒟_{A→B}` with the dephasing basis that realizes it.
#[derive(Clone, Debug)]
pub struct DiagonalDiscord {
    pub value: f64,
    /// Columns are the eigenbasis of `ρ_A` after tie resolution.
    pub basis: CMatrix,
    pub degeneracy: DegeneracyInfo,
}

/// Eigenbasis of the A-marginal of `bm`; eigenvalue ties within
/// [`TIE_TOLERANCE`] are rotated to minimize the dephased entropy.
pub(crate) fn marginal_eigenbasis(
    bm: &BipartiteMatrix,
    opts: &GridRefineOptions,
) -> Result<(CMatrix, DegeneracyInfo)> {
    let eig = eigh_unchecked(&bm.reduced_a());
    let blocks: Vec<_> = group_ties(&eig.eigenvalues, TIE_TOLERANCE)
        .into_iter()
        .filter(|b| b.len() >= 2)
        .collect();
    resolve_degenerate_blocks(eig.eigenvectors, &blocks, bm, opts)
}

/// `S(π_A(ρ)) − S(ρ)` for the dephasing `π_A` in a given orthonormal basis of A.
pub fn dephased_discord(rho: &DensityMatrix, split: &Bipartition, basis: &CMatrix) -> Result<f64> {
    let bm = BipartiteMatrix::from_state(rho, split)?;
    bm.dephasing_entropy_gain(basis)
}

pub fn diagonal_discord_detail(rho: &DensityMatrix, split: &Bipartition) -> Result<DiagonalDiscord> {
    let bm = BipartiteMatrix::from_state(rho, split)?;
    let (basis, degeneracy) = marginal_eigenbasis(&bm, &GridRefineOptions::default())?;
    let value = bm.dephasing_entropy_gain(&basis)?;
    Ok(DiagonalDiscord { value, basis, degeneracy })
}

/// `𝒟_{A→B} = inf S(π_A(ρ)) − S(ρ)` with `π_A` the dephasing in the eigenbasis of `ρ_A`.
pub fn diagonal_discord(rho: &DensityMatrix, split: &Bipartition) -> Result<f64> {
    Ok(diagonal_discord_detail(rho, split)?.value)
}

/// `Σ_j (Π_j ⊗ I) ρ (Π_j ⊗ I)` in the original subsystem order, with `Π_j`
/// the projectors onto the columns of `basis` on `site`.
pub fn dephase(rho: &CMatrix, layout: &SubsystemLayout, site: usize, basis: &CMatrix) -> Result<CMatrix> {
    layout.check_sites(&[site])?;
    let d = layout.dims()[site];
    if basis.nrows() != d {
        return Err(Error::Usage(format!("basis of dimension {} on site of dimension {d}", basis.nrows())));
    }
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for j in 0..basis.ncols() {
        let v = basis.column(j);
        let p_local = v * v.adjoint();
        let p = crate::linalg::HermitianOperator::embed(
            &crate::linalg::HermitianOperator::new(p_local, layout.select(&[site])?)?,
            layout,
            site,
        )?;
        out += p.matrix() * rho * p.matrix();
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct DiscordReport {
    pub mutual_information: f64,
    pub classical_correlation: f64,
    pub quantum_discord: f64,
    pub diagonal_discord: f64,
    pub optimizer: SphereOptimum,
    pub degeneracy: DegeneracyInfo,
}

pub fn discord_report(rho: &DensityMatrix, split: &Bipartition) -> Result<DiscordReport> {
    let i = mutual_information(rho, split)?;
    let j = classical_correlation_detail(rho, split, &GridRefineOptions::default())?;
    let dd = diagonal_discord_detail(rho, split)?;
    Ok(DiscordReport {
        mutual_information: i,
        classical_correlation: j.value,
        quantum_discord: i - j.value,
        diagonal_discord: dd.value,
        optimizer: j.optimum,
        degeneracy: dd.degeneracy,
    })
}

/// Dephasing basis used at one node of the sequential tree.
#[derive(Clone, Debug)]
pub struct FrozenBasis {
    /// `(site, outcome)` of the earlier measurements leading here.
    pub prior: Vec<(usize, usize)>,
    pub site: usize,
    pub basis: CMatrix,
}

/// Sequential diagonal discord along a path.
#[derive(Clone, Debug)]
pub struct SequentialDiscord {
    pub total: f64,
    /// Outcome-averaged conditional diagonal discord of each step `k < N`.
    pub step_terms: Vec<f64>,
    pub bases: Vec<FrozenBasis>,
    /// True when some node had a tied marginal spectrum and its basis came from
    /// the infimum over rotations.
    pub degenerate: bool,
}

/// `𝒟_{σ_{1:N}} = Σ_{k<N} Σ_M P(M_{1:k−1}) 𝒟_{σ_k → σ_{k+1:N} | M_{1:k−1}}`, with
/// every conditioning done on eigenbasis outcomes of the earlier marginals.
pub fn multipartite_diagonal_discord_detail(
    rho: &DensityMatrix,
    path: &GreedyPath,
) -> Result<SequentialDiscord> {
    sequential(rho, path, None)
}

pub fn multipartite_diagonal_discord(rho: &DensityMatrix, path: &GreedyPath) -> Result<f64> {
    Ok(sequential(rho, path, None)?.total)
}

/// Sequential diagonal discord with the dephasing bases taken from `frozen`
/// wherever a node matches; other nodes are diagonalized afresh.
pub fn multipartite_with_bases(
    rho: &DensityMatrix,
    path: &GreedyPath,
    frozen: &[FrozenBasis],
) -> Result<f64> {
    Ok(sequential(rho, path, Some(frozen))?.total)
}

fn sequential(
    rho: &DensityMatrix,
    path: &GreedyPath,
    frozen: Option<&[FrozenBasis]>,
) -> Result<SequentialDiscord> {
    path.check(rho.layout())?;
    let mut acc = SequentialDiscord {
        total: 0.0,
        step_terms: vec![0.0; path.len() - 1],
        bases: Vec::new(),
        degenerate: false,
    };
    let remaining: Vec<usize> = (0..path.len()).collect();
    visit(rho, &remaining, path, frozen, &mut Vec::new(), 1.0, &mut acc)?;
    acc.total = acc.step_terms.iter().sum();
    Ok(acc)
}

fn visit(
    state: &DensityMatrix,
    remaining: &[usize],
    path: &GreedyPath,
    frozen: Option<&[FrozenBasis]>,
    labels: &mut Vec<(usize, usize)>,
    weight: f64,
    acc: &mut SequentialDiscord,
) -> Result<()> {
    let k = labels.len();
    if k + 1 >= path.len() {
        return Ok(());
    }
    let site = path.sites()[k];
    let idx = remaining.iter().position(|&s| s == site).expect("path site remains");
    let bm = BipartiteMatrix::from_state(state, &Bipartition::site(idx))?;
    let given = frozen.and_then(|f| f.iter().find(|b| b.prior == *labels && b.site == site));
    let basis = match given {
        Some(b) => b.basis.clone(),
        None => {
            let (basis, info) = marginal_eigenbasis(&bm, &GridRefineOptions::default())?;
            acc.degenerate |= info.any();
            basis
        }
    };
    let term = bm.dephasing_entropy_gain(&basis)?;
    acc.step_terms[k] += weight * term;
    acc.bases.push(FrozenBasis { prior: labels.clone(), site, basis: basis.clone() });

    let rest: Vec<usize> = remaining.iter().copied().filter(|&s| s != site).collect();
    for j in 0..basis.ncols() {
        let block = bm.sandwich(&basis.column(j).into_owned());
        let p = block.trace().re;
        if p < MIN_PROBABILITY {
            continue;
        }
        let child = DensityMatrix::from_matrix_unchecked(&block, bm.layout_b.clone());
        labels.push((site, j));
        visit(&child, &rest, path, frozen, labels, weight * p, acc)?;
        labels.pop();
    }
    Ok(())
}

/// `Σ_k S(ρ_k) − S(ρ)`. Agrees with the sequential diagonal discord only when
/// every conditional marginal is diagonal in one shared basis per site and
/// the marginals carry no classical correlations; both are reported so the
/// difference can be inspected.
pub fn total_correlation(rho: &DensityMatrix) -> Result<f64> {
    let mut s = -von_neumann_entropy(rho)?;
    for k in 0..rho.layout().len() {
        s += von_neumann_entropy(&partial_trace(rho, &[k])?)?;
    }
    Ok(s)
}

/// `−(1/T) ∂_T 𝒟_σ(T)` for the Gibbs family of `model`.
///
/// When tie resolution was needed at `T`, the bases found there are held
/// fixed while differencing: the derivative of an infimum equals the partial
/// derivative at its minimizer, and the optimizer's own tolerance would
/// otherwise be amplified by `1/h`.
pub fn discord_temperature_derivative(
    model: &Arc<ThermalModel>,
    path: &GreedyPath,
    t: f64,
    policy: &DerivativePolicy,
) -> Result<f64> {
    let center = multipartite_diagonal_discord_detail(model.gibbs(t)?.state(), path)?;
    let d = if center.degenerate {
        central_derivative(
            |s| multipartite_with_bases(model.gibbs(s)?.state(), path, &center.bases),
            t,
            policy,
        )?
    } else {
        central_derivative(|s| multipartite_diagonal_discord(model.gibbs(s)?.state(), path), t, policy)?
    };
    Ok(-d.value / t)
}

/// `−(1/T) ∂_T I_AB(T)`.
pub fn mutual_information_derivative(
    model: &Arc<ThermalModel>,
    split: &Bipartition,
    t: f64,
    policy: &DerivativePolicy,
) -> Result<f64> {
    crate::derivative::minus_inv_t_derivative(|s| mutual_information(model.gibbs(s)?.state(), split), t, policy)
}

/// `−(1/T) ∂_T J_{B|A}(T)`, differenced with the optimal measurement at `T`
/// held fixed (the minimizer's first-order variation drops out).
pub fn classical_correlation_derivative(
    model: &Arc<ThermalModel>,
    split: &Bipartition,
    t: f64,
    policy: &DerivativePolicy,
) -> Result<f64> {
    let best = classical_correlation_detail(model.gibbs(t)?.state(), split, &GridRefineOptions::default())?;
    let basis = best.measurement.basis();
    let j_at = |s: f64| -> Result<f64> {
        let e = model.gibbs(s)?;
        let bm = BipartiteMatrix::from_state(e.state(), split)?;
        bm.information_gain(&basis)
    };
    crate::derivative::minus_inv_t_derivative(j_at, t, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, max_abs, tensor_product_states, CVector};
    use crate::models::{build_chain, build_two_qubit, ChainParams, TwoQubitXYZParams};

    fn bell() -> DensityMatrix {
        let mut psi = CVector::zeros(4);
        psi[0] = c(1.0);
        psi[3] = c(1.0);
        DensityMatrix::pure(&psi, SubsystemLayout::qubits(2)).unwrap()
    }

    fn product() -> DensityMatrix {
        let a = DensityMatrix::new(
            CMatrix::from_row_slice(2, 2, &[c(0.7), num_complex::Complex64::new(0.1, 0.2), num_complex::Complex64::new(0.1, -0.2), c(0.3)]),
            SubsystemLayout::qubits(1),
        )
        .unwrap();
        let b = DensityMatrix::new(
            CMatrix::from_row_slice(2, 2, &[c(0.4), c(0.15), c(0.15), c(0.6)]),
            SubsystemLayout::qubits(1),
        )
        .unwrap();
        tensor_product_states(&a, &b)
    }

    fn split() -> Bipartition {
        Bipartition::site(0)
    }

    #[test]
    fn product_state_has_no_correlations() {
        let r = discord_report(&product(), &split()).unwrap();
        assert!(r.mutual_information.abs() < 1e-12);
        assert!(r.classical_correlation.abs() < 1e-10);
        assert!(r.quantum_discord.abs() < 1e-10);
        assert!(r.diagonal_discord.abs() < 1e-12);
    }

    #[test]
    fn bell_state_correlations() {
        let ln2 = 2.0_f64.ln();
        let r = discord_report(&bell(), &split()).unwrap();
        assert!((r.mutual_information - 2.0 * ln2).abs() < 1e-12);
        assert!((r.classical_correlation - ln2).abs() < 1e-10);
        assert!((r.quantum_discord - ln2).abs() < 1e-10);
        assert!((r.diagonal_discord - ln2).abs() < 1e-10);
        let h = conditional_entropy_after_measurement(&bell(), &split(), &ProjectorSet::computational(2)).unwrap();
        assert!(h.abs() < 1e-14);
    }

    #[test]
    fn product_conditional_entropy_is_marginal_entropy() {
        let sb = von_neumann_entropy(&partial_trace(&product(), &[1]).unwrap()).unwrap();
        for (t, p) in [(0.0, 0.0), (1.0, 2.0), (2.5, 4.0)] {
            let h = conditional_entropy_after_measurement(&product(), &split(), &BlochMeasurement::new(t, p).projectors())
                .unwrap();
            assert!((h - sb).abs() < 1e-12);
        }
    }

    #[test]
    fn qutrit_measured_side_rejected() {
        let st = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![3, 2]).unwrap());
        assert!(matches!(classical_correlation(&st, &split()), Err(Error::UnsupportedOptimization(_))));
        // diagonal discord has no optimization and still works
        assert!(diagonal_discord(&st, &split()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dephasing_is_idempotent_and_commutes_across_sites() {
        let m = ThermalModel::new(build_chain(&ChainParams { n: 3, b: 1.0, j: 1.0, alpha: 0.3 }).unwrap());
        let e = m.gibbs(0.8).unwrap();
        let lay = e.state().layout().clone();
        let b0 = BlochMeasurement::new(0.4, 1.0).basis();
        let b2 = BlochMeasurement::new(1.3, 2.5).basis();
        let once = dephase(e.state().matrix(), &lay, 0, &b0).unwrap();
        let twice = dephase(&once, &lay, 0, &b0).unwrap();
        assert!(max_abs(&(once.clone() - twice)) < 1e-12);
        let ab = dephase(&once, &lay, 2, &b2).unwrap();
        let ba = dephase(&dephase(e.state().matrix(), &lay, 2, &b2).unwrap(), &lay, 0, &b0).unwrap();
        assert!(max_abs(&(ab - ba)) < 1e-12);
        let s = von_neumann_entropy(e.state()).unwrap();
        let sd = crate::linalg::block_entropy(&once).unwrap();
        assert!(sd >= s - 1e-10);
    }

    #[test]
    fn ising_state_is_classical() {
        let m = ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(0.5, 1.0, 0.0, 0.0, 1.5)).unwrap());
        for t in [0.5, 2.0, 10.0] {
            let st = m.gibbs(t).unwrap();
            assert!(quantum_discord(st.state(), &split()).unwrap().abs() < 1e-10);
            assert!(diagonal_discord(st.state(), &split()).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn discord_bounded_by_diagonal_discord_and_mutual_information() {
        let m = ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(3.0, 1.0, 1.0, 1.0, 2.0)).unwrap());
        for t in [0.3, 1.0, 2.0, 5.0] {
            let r = discord_report(m.gibbs(t).unwrap().state(), &split()).unwrap();
            assert!(r.quantum_discord >= -1e-8);
            assert!(r.quantum_discord <= r.diagonal_discord + 1e-8);
            assert!(r.diagonal_discord <= r.mutual_information + 1e-8);
        }
    }

    #[test]
    fn two_site_sequential_equals_bipartite() {
        let m = ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(3.0, 1.0, 1.0, 1.0, 2.0)).unwrap());
        let e = m.gibbs(1.3).unwrap();
        let seq = multipartite_diagonal_discord(e.state(), &GreedyPath::parse("12").unwrap()).unwrap();
        assert!((seq - diagonal_discord(e.state(), &split()).unwrap()).abs() < 1e-14);
        let rev = multipartite_diagonal_discord(e.state(), &GreedyPath::parse("21").unwrap()).unwrap();
        assert!((rev - diagonal_discord(e.state(), &Bipartition::site(1)).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn product_chain_state_has_zero_sequential_discord() {
        let a = product();
        let st = tensor_product_states(&a, &partial_trace(&a, &[0]).unwrap());
        let path = GreedyPath::identity(3).unwrap();
        assert!(multipartite_diagonal_discord(&st, &path).unwrap().abs() < 1e-12);
        assert!(total_correlation(&st).unwrap().abs() < 1e-12);
    }

    #[test]
    fn chain_paths_132_and_213_agree() {
        let m = ThermalModel::new(build_chain(&ChainParams { n: 3, b: 1.0, j: 1.0, alpha: 0.3 }).unwrap());
        let e = m.gibbs(1.0).unwrap();
        let a = multipartite_diagonal_discord(e.state(), &GreedyPath::parse("132").unwrap()).unwrap();
        let b = multipartite_diagonal_discord(e.state(), &GreedyPath::parse("213").unwrap()).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        assert!(a > 0.0);
    }

    #[test]
    fn frozen_bases_reproduce_value() {
        let m = ThermalModel::new(build_chain(&ChainParams { n: 3, b: 1.0, j: 1.0, alpha: 0.3 }).unwrap());
        let e = m.gibbs(1.0).unwrap();
        let path = GreedyPath::identity(3).unwrap();
        let d = multipartite_diagonal_discord_detail(e.state(), &path).unwrap();
        let again = multipartite_with_bases(e.state(), &path, &d.bases).unwrap();
        assert_eq!(d.total, again);
    }

    #[test]
    fn dephased_discord_is_nonnegative_for_any_basis() {
        let st = kron(&bell().matrix().scale(0.6), &CMatrix::identity(1, 1)) + CMatrix::identity(4, 4).scale(0.1);
        let st = DensityMatrix::new(st, SubsystemLayout::qubits(2)).unwrap();
        for (t, p) in [(0.2, 0.0), (1.0, 1.0), (2.0, 3.0)] {
            assert!(dephased_discord(&st, &split(), &BlochMeasurement::new(t, p).basis()).unwrap() >= -1e-12);
        }
    }
}
