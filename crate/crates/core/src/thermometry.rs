//! Gibbs states and the Fisher informations of temperature estimation: global,
//! local, and greedy sequential (LOCC) schemes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::derivative::{central_derivative, DerivativePolicy};
use crate::error::{Error, Result};
use crate::linalg::{
    fidelity, group_ties, hermitize, partial_trace, partial_trace_matrix, CMatrix, CVector,
    DensityMatrix, EigenDecomposition, HermitianOperator, SubsystemLayout,
};
use crate::measurement::{
    conditional_state, resolve_degenerate_blocks, BipartiteMatrix, Bipartition, DegeneracyInfo,
    ProjectorSet, MIN_PROBABILITY,
};
use crate::models::PartitionedHamiltonian;
use crate::optimize::GridRefineOptions;

/// Eigenvalue pairs with `λ_i + λ_j` at or below this are excluded from the SLD sum.
pub const QFI_CUTOFF: f64 = 1e-12;
/// Gap below which eigenvalues are treated as degenerate when picking a measurement.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// A Hamiltonian together with its spectrum, ready to be thermalized at any `T`.
#[derive(Clone, Debug)]
pub struct ThermalModel {
    hamiltonian: PartitionedHamiltonian,
    spectrum: EigenDecomposition,
}

impl ThermalModel {
    pub fn new(hamiltonian: PartitionedHamiltonian) -> Arc<Self> {
        let spectrum = hamiltonian.total().eigh();
        Arc::new(Self { hamiltonian, spectrum })
    }

    pub fn hamiltonian(&self) -> &PartitionedHamiltonian {
        &self.hamiltonian
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.hamiltonian.layout()
    }

    pub fn spectrum(&self) -> &EigenDecomposition {
        &self.spectrum
    }

    /// Spectral norm `‖H‖`.
    pub fn energy_scale(&self) -> f64 {
        self.spectrum.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Variance of the eigenvalues with uniform weights, `δh²`.
    pub fn spectral_variance(&self) -> f64 {
        let e = &self.spectrum.eigenvalues;
        let n = e.len() as f64;
        let mean = e.iter().sum::<f64>() / n;
        e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
    }

    /// Boltzmann populations of the energy eigenstates and `ln Z`.
    pub fn populations(&self, t: f64) -> Result<(Vec<f64>, f64)> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("temperature must be positive and finite, got {t}")));
        }
        let e = &self.spectrum.eigenvalues;
        let e0 = e[0];
        let mut w: Vec<f64> = e.iter().map(|v| (-(v - e0) / t).exp()).collect();
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= z);
        Ok((w, -e0 / t + z.ln()))
    }

    pub fn gibbs_matrix(&self, t: f64) -> Result<CMatrix> {
        let (w, _) = self.populations(t)?;
        let mut scaled = self.spectrum.eigenvectors.clone();
        for (k, wk) in w.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*wk);
        }
        Ok(hermitize(&(scaled * self.spectrum.eigenvectors.adjoint())))
    }

    pub fn gibbs(self: &Arc<Self>, t: f64) -> Result<GibbsEnsemble> {
        let (populations, log_partition) = self.populations(t)?;
        let m = self.gibbs_matrix(t)?;
        Ok(GibbsEnsemble {
            model: Arc::clone(self),
            temperature: t,
            state: DensityMatrix::from_matrix_unchecked(&m, self.layout().clone()),
            log_partition,
            populations,
        })
    }
}

/// `ρ = e^{−H/T}/Z` with its model and `ln Z`.
#[derive(Clone, Debug)]
pub struct GibbsEnsemble {
    model: Arc<ThermalModel>,
    temperature: f64,
    state: DensityMatrix,
    log_partition: f64,
    populations: Vec<f64>,
}

impl GibbsEnsemble {
    pub fn model(&self) -> &Arc<ThermalModel> {
        &self.model
    }

    pub fn hamiltonian(&self) -> &PartitionedHamiltonian {
        self.model.hamiltonian()
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Populations of the energy eigenstates, ascending energy.
    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn at(&self, t: f64) -> Result<GibbsEnsemble> {
        self.model.gibbs(t)
    }

    /// Probability and post-measurement state of the rest of the system after
    /// projecting `split.a()` onto `v`.
    pub fn conditional_state(
        &self,
        split: &Bipartition,
        v: &CVector,
    ) -> Result<Option<(f64, DensityMatrix)>> {
        conditional_state(&self.state, split, v)
    }
}

pub fn gibbs(model: &PartitionedHamiltonian, t: f64) -> Result<GibbsEnsemble> {
    ThermalModel::new(model.clone()).gibbs(t)
}

/// `C = (⟨H²⟩ − ⟨H⟩²)/T²`, evaluated on the spectrum.
pub fn heat_capacity(ens: &GibbsEnsemble) -> f64 {
    let e = &ens.model.spectrum.eigenvalues;
    let p = &ens.populations;
    let mean: f64 = e.iter().zip(p).map(|(e, p)| e * p).sum();
    let var: f64 = e.iter().zip(p).map(|(e, p)| p * (e - mean).powi(2)).sum();
    var / (ens.temperature * ens.temperature)
}

/// QFI of the Gibbs family, `F = C/T²`.
pub fn qfi_gibbs(ens: &GibbsEnsemble) -> f64 {
    heat_capacity(ens) / (ens.temperature * ens.temperature)
}

/// A temperature-parametrized family of states.
pub trait StateFamily {
    fn state_at(&self, t: f64) -> Result<DensityMatrix>;
}

impl<F> StateFamily for F
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        self(t)
    }
}

/// State and its temperature derivative at one point.
pub fn state_and_derivative(
    family: &impl StateFamily,
    t: f64,
    policy: &DerivativePolicy,
) -> Result<(DensityMatrix, CMatrix)> {
    let state = family.state_at(t)?;
    let d = central_derivative(|s| Ok(family.state_at(s)?.matrix().clone()), t, policy)?;
    Ok((state, hermitize(&d.value)))
}

/// Symmetric logarithmic derivative `L` solving `∂ρ = ½(Lρ + ρL)` and the
/// QFI `Tr[ρ L²]`.
#[derive(Clone, Debug)]
pub struct Sld {
    pub operator: CMatrix,
    pub qfi: f64,
}

pub fn sld(state: &DensityMatrix, derivative: &CMatrix) -> Result<Sld> {
    let eig = state.eigh();
    let v = &eig.eigenvectors;
    let d_eig = v.adjoint() * derivative * v;
    let n = state.dim();
    let mut l = CMatrix::zeros(n, n);
    let mut qfi = 0.0;
    let mut any = false;
    for i in 0..n {
        for j in 0..n {
            let s = eig.eigenvalues[i] + eig.eigenvalues[j];
            if s > QFI_CUTOFF {
                any = true;
                l[(i, j)] = d_eig[(i, j)].scale(2.0 / s);
                qfi += 2.0 * d_eig[(i, j)].norm_sqr() / s;
            }
        }
    }
    if !any {
        return Err(Error::DegenerateFamily { cutoff: QFI_CUTOFF });
    }
    Ok(Sld { operator: hermitize(&(v * l * v.adjoint())), qfi })
}

/// `F = 2 Σ_{λ_i+λ_j > τ} |⟨i|∂_T ρ|j⟩|² / (λ_i + λ_j)` with a finite-difference `∂_T ρ`.
pub fn qfi_general(family: &impl StateFamily, t: f64, policy: &DerivativePolicy) -> Result<f64> {
    let (state, d) = state_and_derivative(family, t, policy)?;
    Ok(sld(&state, &d)?.qfi)
}

/// QFI from the curvature of the fidelity,
/// `−2 (𝔽(T,T+ε) − 2𝔽(T,T) + 𝔽(T,T−ε)) / ε²`, extrapolated once in `ε`.
/// Independent of the SLD route; used as a cross-check.
pub fn qfi_from_fidelity(family: &impl StateFamily, t: f64, relative_eps: f64) -> Result<f64> {
    let center = family.state_at(t)?;
    let f0 = fidelity(&center, &center)?;
    let second = |eps: f64| -> Result<f64> {
        let up = fidelity(&center, &family.state_at(t + eps)?)?;
        let down = fidelity(&center, &family.state_at(t - eps)?)?;
        Ok(-2.0 * (up - 2.0 * f0 + down) / (eps * eps))
    };
    let eps = relative_eps * t;
    let coarse = second(eps)?;
    let fine = second(0.5 * eps)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `Σ_x (∂_T p_x)² / p_x`, skipping outcomes with `p_x < 1e-14`.
pub fn classical_fisher(
    p_of_t: impl Fn(f64) -> Result<Vec<f64>>,
    t: f64,
    policy: &DerivativePolicy,
) -> Result<f64> {
    let p = p_of_t(t)?;
    let dp = central_derivative(&p_of_t, t, policy)?.value;
    Ok(fisher_sum(&p, &dp))
}

fn fisher_sum(p: &[f64], dp: &[f64]) -> f64 {
    p.iter()
        .zip(dp)
        .filter(|(p, _)| **p >= MIN_PROBABILITY)
        .map(|(p, d)| d * d / p)
        .sum()
}

/// Reduced Gibbs state of `sites` as a function of temperature.
pub fn reduced_family<'a>(
    model: &'a Arc<ThermalModel>,
    sites: &[usize],
) -> impl Fn(f64) -> Result<DensityMatrix> + 'a {
    let sites = sites.to_vec();
    move |t| partial_trace(model.gibbs(t)?.state(), &sites)
}

/// `F_k(T) = F(T, ρ_k)`.
pub fn local_qfi(ens: &GibbsEnsemble, site: usize, policy: &DerivativePolicy) -> Result<f64> {
    ens.model.layout().check_sites(&[site])?;
    qfi_general(&reduced_family(&ens.model, &[site]), ens.temperature, policy)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementMode {
    /// Eigenprojectors of the SLD of the (conditional) reduced state.
    #[default]
    SldEigenbasis,
    /// Eigenprojectors of the (conditional) reduced state itself.
    ReducedStateEigenbasis,
}

impl MeasurementMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasurementMode::SldEigenbasis => "sld_eigenbasis",
            MeasurementMode::ReducedStateEigenbasis => "reduced_state_eigenbasis",
        }
    }
}

impl std::str::FromStr for MeasurementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sld_eigenbasis" | "sld" => Ok(MeasurementMode::SldEigenbasis),
            "reduced_state_eigenbasis" | "reduced" => Ok(MeasurementMode::ReducedStateEigenbasis),
            other => Err(Error::Usage(format!("unknown measurement mode {other:?}"))),
        }
    }
}

/// A chosen local measurement plus how eigenvalue ties were settled.
#[derive(Clone, Debug)]
pub struct LocalMeasurement {
    pub projectors: ProjectorSet,
    pub degeneracy: DegeneracyInfo,
}

/// Picks the projectors for one greedy step.
///
/// Ties in the primary operator (SLD or reduced state) within
/// [`TIE_TOLERANCE`] are split by diagonalizing `∂_T ρ_site` inside the tie;
/// any remaining two-dimensional tie is rotated to minimize the conditional
/// entropy of the unmeasured part.
pub(crate) fn choose_measurement(
    reduced: &DensityMatrix,
    d_reduced: &CMatrix,
    joint: &BipartiteMatrix,
    mode: MeasurementMode,
) -> Result<LocalMeasurement> {
    let primary = match mode {
        MeasurementMode::SldEigenbasis => sld(reduced, d_reduced)?.operator,
        MeasurementMode::ReducedStateEigenbasis => reduced.matrix().clone(),
    };
    let eig = crate::linalg::eigh_unchecked(&hermitize(&primary));
    let mut basis = eig.eigenvectors.clone();
    let mut residual_blocks = Vec::new();
    for block in group_ties(&eig.eigenvalues, TIE_TOLERANCE) {
        if block.len() < 2 {
            continue;
        }
        let sub = basis.columns(block.start, block.len()).into_owned();
        let inner = hermitize(&(sub.adjoint() * d_reduced * &sub));
        let inner_eig = crate::linalg::eigh_unchecked(&inner);
        let rotated = &sub * &inner_eig.eigenvectors;
        for (k, col) in rotated.column_iter().enumerate() {
            basis.set_column(block.start + k, &col);
        }
        for tie in group_ties(&inner_eig.eigenvalues, TIE_TOLERANCE) {
            if tie.len() >= 2 {
                residual_blocks.push(block.start + tie.start..block.start + tie.end);
            }
        }
    }
    let (basis, degeneracy) =
        resolve_degenerate_blocks(basis, &residual_blocks, joint, &GridRefineOptions::default())?;
    Ok(LocalMeasurement { projectors: ProjectorSet::from_basis(basis)?, degeneracy })
}

/// Optimal local measurement on `site` for the unconditioned Gibbs state.
pub fn optimal_local_measurement(
    ens: &GibbsEnsemble,
    site: usize,
    mode: MeasurementMode,
    policy: &DerivativePolicy,
) -> Result<LocalMeasurement> {
    ens.model.layout().check_sites(&[site])?;
    let (reduced, d_reduced) =
        state_and_derivative(&reduced_family(&ens.model, &[site]), ens.temperature, policy)?;
    let joint = BipartiteMatrix::from_state(ens.state(), &Bipartition::site(site))?;
    choose_measurement(&reduced, &d_reduced, &joint, mode)
}

/// Measurement order `σ_{1:N}` of the greedy scheme (0-based sites).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GreedyPath(Vec<usize>);

impl GreedyPath {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &s in &order {
            if s >= n || seen[s] {
                return Err(Error::Usage(format!("{order:?} is not a permutation of 0..{n}")));
            }
            seen[s] = true;
        }
        if n < 2 {
            return Err(Error::Usage("greedy path needs at least two subsystems".into()));
        }
        Ok(Self(order))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    /// Parses 1-based site labels, e.g. `"132"` or `"1,3,2"`.
    pub fn parse(label: &str) -> Result<Self> {
        let parts: Vec<&str> = if label.contains(',') {
            label.split(',').map(str::trim).collect()
        } else {
            label.trim().split("").filter(|s| !s.is_empty()).collect()
        };
        let order = parts
            .iter()
            .map(|p| match p.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(Error::Usage(format!("bad site label {p:?} in path {label:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(order)
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based label; digits are concatenated when every site is below 10.
    pub fn label(&self) -> String {
        if self.0.len() < 10 {
            self.0.iter().map(|s| (s + 1).to_string()).collect()
        } else {
            self.0.iter().map(|s| (s + 1).to_string()).collect::<Vec<_>>().join(",")
        }
    }

    pub fn check(&self, layout: &SubsystemLayout) -> Result<()> {
        if self.0.len() != layout.len() {
            return Err(Error::Usage(format!(
                "path {} has {} sites, model has {}",
                self.label(),
                self.0.len(),
                layout.len()
            )));
        }
        Ok(())
    }
}

/// One measurement in the greedy tree, conditioned on earlier outcomes.
#[derive(Clone, Debug)]
pub struct SchemeStep {
    /// `(site, outcome index)` of every earlier measurement, in path order.
    pub prior: Vec<(usize, usize)>,
    pub site: usize,
    pub projectors: ProjectorSet,
    /// `P(prior outcomes)` at the evaluation temperature.
    pub weight: f64,
    pub degeneracy: DegeneracyInfo,
}

/// Frozen feed-forward measurement tree used by the greedy scheme.
#[derive(Clone, Debug)]
pub struct MeasurementScheme {
    pub mode: MeasurementMode,
    pub path: GreedyPath,
    pub steps: Vec<SchemeStep>,
}

impl MeasurementScheme {
    pub fn step(&self, prior: &[(usize, usize)]) -> Option<&SchemeStep> {
        self.steps.iter().find(|s| s.prior == prior)
    }
}

#[derive(Clone, Debug)]
pub struct GreedyBreakdown {
    /// `F_{σ_k|σ_{1:k−1}}` for each step `k`; the last entry is the averaged QFI
    /// of the final conditional state.
    pub step_terms: Vec<f64>,
    pub total: f64,
    pub scheme: MeasurementScheme,
}

/// Unnormalized state of the sites left after projecting `prior` (original
/// site indices) onto the given vectors, and the remaining layout.
pub(crate) fn project_out(
    full: &CMatrix,
    layout: &SubsystemLayout,
    prior: &[(usize, CVector)],
) -> Result<(CMatrix, SubsystemLayout)> {
    let mut remaining: Vec<usize> = (0..layout.len()).collect();
    let mut m = full.clone();
    let mut lay = layout.clone();
    for (site, v) in prior {
        let idx = remaining
            .iter()
            .position(|s| s == site)
            .ok_or_else(|| Error::Usage(format!("site {site} measured twice")))?;
        let bm = BipartiteMatrix::new(&m, &lay, &Bipartition::site(idx))?;
        m = bm.sandwich(v);
        lay = bm.layout_b;
        remaining.remove(idx);
    }
    Ok((m, lay))
}

/// LOCC QFI of the greedy sequential scheme along `path`.
///
/// Each intermediate step contributes the classical Fisher information of its
/// outcome distribution (projectors frozen at the evaluation temperature and
/// conditioned on every earlier outcome); the last subsystem contributes the
/// QFI of its conditional state. Conditional terms are averaged with the
/// outcome probabilities at the evaluation temperature.
pub fn greedy_locc(
    ens: &GibbsEnsemble,
    path: &GreedyPath,
    mode: MeasurementMode,
    policy: &DerivativePolicy,
) -> Result<GreedyBreakdown> {
    let layout = ens.model.layout().clone();
    path.check(&layout)?;
    let mut walker = GreedyWalker {
        model: &ens.model,
        t: ens.temperature,
        path,
        mode,
        policy,
        terms: vec![0.0; path.len()],
        steps: Vec::new(),
    };
    walker.visit(&mut Vec::new(), &mut Vec::new(), 1.0)?;
    let total = walker.terms.iter().sum();
    Ok(GreedyBreakdown {
        step_terms: walker.terms,
        total,
        scheme: MeasurementScheme { mode, path: path.clone(), steps: walker.steps },
    })
}

struct GreedyWalker<'a> {
    model: &'a Arc<ThermalModel>,
    t: f64,
    path: &'a GreedyPath,
    mode: MeasurementMode,
    policy: &'a DerivativePolicy,
    terms: Vec<f64>,
    steps: Vec<SchemeStep>,
}

impl GreedyWalker<'_> {
    fn visit(
        &mut self,
        prior: &mut Vec<(usize, CVector)>,
        labels: &mut Vec<(usize, usize)>,
        weight: f64,
    ) -> Result<()> {
        let k = prior.len();
        let site = self.path.sites()[k];
        let model = self.model;
        let layout = model.layout().clone();
        let frozen = prior.clone();
        let family = move |t: f64| -> Result<DensityMatrix> {
            let (m, lay) = project_out(&model.gibbs_matrix(t)?, &layout, &frozen)?;
            let p = m.trace().re;
            if p < MIN_PROBABILITY {
                return Err(Error::Domain(format!("conditioning outcome vanishes at T = {t}")));
            }
            Ok(DensityMatrix::from_matrix_unchecked(&m, lay))
        };
        let (joint, d_joint) = state_and_derivative(&family, self.t, self.policy)?;

        // position of `site` among the remaining (ascending) sites
        let mut remaining: Vec<usize> = (0..model.layout().len()).collect();
        remaining.retain(|s| !prior.iter().any(|(p, _)| p == s));
        let idx = remaining.iter().position(|&s| s == site).expect("path site remains");

        if k + 1 == self.path.len() {
            let s = sld(&joint, &d_joint)?;
            self.terms[k] += weight * s.qfi;
            let eig = crate::linalg::eigh_unchecked(&s.operator);
            self.steps.push(SchemeStep {
                prior: labels.clone(),
                site,
                projectors: ProjectorSet::from_basis(eig.eigenvectors)?,
                weight,
                degeneracy: DegeneracyInfo::default(),
            });
            return Ok(());
        }

        let reduced_m = partial_trace_matrix(joint.matrix(), joint.layout(), &[idx])?;
        let reduced = DensityMatrix::from_matrix_unchecked(&reduced_m, joint.layout().select(&[idx])?);
        let d_reduced = hermitize(&partial_trace_matrix(&d_joint, joint.layout(), &[idx])?);
        let bm = BipartiteMatrix::from_state(&joint, &Bipartition::site(idx))?;
        let choice = choose_measurement(&reduced, &d_reduced, &bm, self.mode)?;

        let n_out = choice.projectors.len();
        let mut p = Vec::with_capacity(n_out);
        let mut dp = Vec::with_capacity(n_out);
        for x in 0..n_out {
            let proj = choice.projectors.projector(x);
            p.push((&proj * reduced.matrix()).trace().re);
            dp.push((&proj * &d_reduced).trace().re);
        }
        self.terms[k] += weight * fisher_sum(&p, &dp);
        self.steps.push(SchemeStep {
            prior: labels.clone(),
            site,
            projectors: choice.projectors.clone(),
            weight,
            degeneracy: choice.degeneracy,
        });

        for x in 0..n_out {
            if p[x] < MIN_PROBABILITY {
                continue;
            }
            prior.push((site, choice.projectors.vector(x)));
            labels.push((site, x));
            self.visit(prior, labels, weight * p[x])?;
            prior.pop();
            labels.pop();
        }
        Ok(())
    }
}

/// Probabilities of every complete outcome string of a frozen scheme for
/// the Gibbs state at `t`, in depth-first outcome order. A branch that was
/// pruned when the scheme was built (probability below `1e-14`) appears as a
/// single aggregated outcome.
pub fn scheme_outcome_probabilities(
    model: &ThermalModel,
    scheme: &MeasurementScheme,
    t: f64,
) -> Result<Vec<f64>> {
    let rho = model.gibbs_matrix(t)?;
    let mut out = Vec::new();
    scheme_leaves(&rho, model.layout(), scheme, &mut Vec::new(), &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn scheme_leaves(
    rho: &CMatrix,
    layout: &SubsystemLayout,
    scheme: &MeasurementScheme,
    prior: &mut Vec<(usize, CVector)>,
    labels: &mut Vec<(usize, usize)>,
    out: &mut Vec<f64>,
) -> Result<()> {
    let Some(step) = scheme.step(labels) else {
        let (m, _) = project_out(rho, layout, prior)?;
        out.push(m.trace().re);
        return Ok(());
    };
    for x in 0..step.projectors.len() {
        prior.push((step.site, step.projectors.vector(x)));
        labels.push((step.site, x));
        if labels.len() == scheme.path.len() {
            let (site, v) = prior.pop().expect("leaf has a last outcome");
            let (m, _) = project_out(rho, layout, prior)?;
            debug_assert_eq!(m.nrows(), v.len(), "site {site} is the only one left");
            out.push((v.adjoint() * &m * &v)[(0, 0)].re);
            prior.push((site, v));
        } else {
            scheme_leaves(rho, layout, scheme, prior, labels, out)?;
        }
        prior.pop();
        labels.pop();
    }
    Ok(())
}

pub fn greedy_locc_qfi(
    ens: &GibbsEnsemble,
    path: &GreedyPath,
    mode: MeasurementMode,
    policy: &DerivativePolicy,
) -> Result<f64> {
    Ok(greedy_locc(ens, path, mode, policy)?.total)
}

/// `ΔF = F_global − F_LOCC`. May be slightly negative from differencing noise.
pub fn precision_loss(
    ens: &GibbsEnsemble,
    path: &GreedyPath,
    mode: MeasurementMode,
    policy: &DerivativePolicy,
) -> Result<f64> {
    Ok(qfi_gibbs(ens) - greedy_locc_qfi(ens, path, mode, policy)?)
}

/// Local operator on `site` embedded in the model layout; helper for callers
/// that build observables.
pub fn embed_local(model: &ThermalModel, op: &HermitianOperator, site: usize) -> Result<HermitianOperator> {
    HermitianOperator::embed(op, model.layout(), site)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs};
    use crate::models::{build_chain, build_two_qubit, ChainParams, PauliModel, TwoQubitXYZParams};

    fn policy() -> DerivativePolicy {
        DerivativePolicy::default()
    }

    fn fig2a() -> Arc<ThermalModel> {
        ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(3.0, 1.0, 1.0, 1.0, 2.0)).unwrap())
    }

    fn single_qubit(b: f64) -> Arc<ThermalModel> {
        // ½ B Z on one qubit of a product pair (second qubit idle)
        ThermalModel::new(PauliModel::new().term(0.5 * b, "ZI").unwrap().build().unwrap())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn zero_hamiltonian_is_maximally_mixed() {
        let m = ThermalModel::new(PauliModel::new().term(0.0, "ZI").unwrap().build().unwrap());
        for t in [0.1, 1.0, 30.0] {
            let e = m.gibbs(t).unwrap();
            assert!(max_abs(&(e.state().matrix() - CMatrix::identity(4, 4).scale(0.25))) < 1e-15);
            assert_eq!(heat_capacity(&e), 0.0);
            assert_eq!(qfi_gibbs(&e), 0.0);
        }
    }

    #[test]
    fn nonpositive_temperature_rejected() {
        assert!(matches!(fig2a().gibbs(0.0), Err(Error::Domain(_))));
        assert!(matches!(fig2a().gibbs(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn single_qubit_gibbs_state_and_qfi() {
        let (b, t) = (1.3, 0.7);
        let e = single_qubit(b).gibbs(t).unwrap();
        let a = partial_trace(e.state(), &[0]).unwrap();
        let x = b / (2.0 * t);
        assert!((a.matrix()[(0, 0)].re - (-x).exp() / (2.0 * x.cosh())).abs() < 1e-15);
        assert!((a.matrix()[(1, 1)].re - x.exp() / (2.0 * x.cosh())).abs() < 1e-15);
        let sech2 = 1.0 / x.cosh().powi(2);
        assert!(rel(heat_capacity(&e), x * x * sech2) < 1e-13);
        assert!(rel(qfi_gibbs(&e), (b / 2.0).powi(2) * sech2 / t.powi(4)) < 1e-13);
    }

    #[test]
    fn log_partition_consistent_with_spectrum() {
        let m = fig2a();
        let e = m.gibbs(0.3).unwrap();
        let z: f64 = m.spectrum().eigenvalues.iter().map(|v| (-v / 0.3).exp()).sum();
        assert!((e.log_partition() - z.ln()).abs() < 1e-12);
    }

    #[test]
    fn fig2a_gibbs_state_is_x_shaped_and_matches_exponentiation() {
        let m = fig2a();
        let e = m.gibbs(1.0).unwrap();
        let s = e.state().matrix();
        for i in 0..4 {
            for j in 0..4 {
                if i != j && i + j != 3 {
                    assert!(s[(i, j)].norm() < 1e-15, "({i},{j}) = {}", s[(i, j)]);
                }
            }
        }
        // independent route: scaling-and-squaring Taylor exponential of −H
        let h = m.hamiltonian().total().matrix().clone();
        let mut a = h.scale(-1.0 / 1024.0);
        let mut expm = CMatrix::identity(4, 4);
        let mut term = CMatrix::identity(4, 4);
        for k in 1..20 {
            term = &term * &a / c(k as f64);
            expm += &term;
        }
        for _ in 0..10 {
            expm = &expm * &expm;
        }
        a = expm.unscale(expm.trace().re);
        assert!(max_abs(&(a - s)) < 1e-12);
    }

    #[test]
    fn heat_capacity_matches_energy_derivative() {
        let m = fig2a();
        let t = 2.0;
        let energy = |t: f64| -> Result<f64> {
            let e = m.gibbs(t)?;
            Ok(e.state().expectation(m.hamiltonian().total().matrix()))
        };
        let d = central_derivative(energy, t, &DerivativePolicy { relative_step: 1e-3, richardson: true })
            .unwrap();
        let cap = heat_capacity(&m.gibbs(t).unwrap());
        assert!(cap > 0.0);
        assert!(rel(d.value, cap) < 1e-9, "{} vs {}", d.value, cap);
    }

    #[test]
    fn qfi_general_agrees_with_gibbs_formula() {
        let m = fig2a();
        for t in [0.5, 2.0, 10.0] {
            let e = m.gibbs(t).unwrap();
            let general = qfi_general(&|s: f64| Ok(m.gibbs(s)?.state().clone()), t, &policy()).unwrap();
            assert!(rel(general, qfi_gibbs(&e)) < 1e-8, "T={t}: {general} vs {}", qfi_gibbs(&e));
        }
    }

    #[test]
    fn constant_family_has_zero_qfi() {
        let st = DensityMatrix::maximally_mixed(SubsystemLayout::qubits(2));
        let f = qfi_general(&|_t: f64| Ok(st.clone()), 1.0, &policy()).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn fidelity_curvature_matches_sld_qfi_on_reduced_state() {
        let m = fig2a();
        let fam = reduced_family(&m, &[0]);
        let sld_route = qfi_general(&fam, 2.0, &policy()).unwrap();
        let fid_route = qfi_from_fidelity(&fam, 2.0, 1e-2).unwrap();
        assert!(rel(sld_route, fid_route) < 1e-6, "{sld_route} vs {fid_route}");
        assert!(sld_route > 0.0);
    }

    #[test]
    fn local_qfi_bounded_by_global() {
        let m = fig2a();
        let e = m.gibbs(2.0).unwrap();
        let fa = local_qfi(&e, 0, &policy()).unwrap();
        assert!(fa > 0.0 && fa <= qfi_gibbs(&e) + 1e-8);
    }

    #[test]
    fn product_model_local_qfi_is_factor_qfi() {
        let m = ThermalModel::new(
            PauliModel::new().term(0.8, "ZI").unwrap().term(-0.3, "IX").unwrap().build().unwrap(),
        );
        let e = m.gibbs(0.9).unwrap();
        let fa = local_qfi(&e, 0, &policy()).unwrap();
        let x: f64 = 0.8 / 0.9;
        let factor = 0.8_f64.powi(2) / x.cosh().powi(2) / 0.9_f64.powi(4);
        assert!(rel(fa, factor) < 1e-9);
    }

    #[test]
    fn classical_fisher_of_populations_equals_qfi() {
        let (b, t) = (1.7, 0.8);
        let sigma = |t: f64| 1.0 / (1.0 + (b / t).exp());
        let f = classical_fisher(|t| Ok(vec![sigma(t), 1.0 - sigma(t)]), t, &policy()).unwrap();
        let e = single_qubit(b).gibbs(t).unwrap();
        assert!(rel(f, qfi_gibbs(&e)) < 1e-9);
        let flat = classical_fisher(|_| Ok(vec![0.3, 0.7]), t, &policy()).unwrap();
        assert_eq!(flat, 0.0);
    }

    #[test]
    fn sld_measurement_attains_local_qfi() {
        let m = fig2a();
        let e = m.gibbs(1.5).unwrap();
        let choice = optimal_local_measurement(&e, 0, MeasurementMode::SldEigenbasis, &policy()).unwrap();
        let fam = reduced_family(&m, &[0]);
        let proj = choice.projectors.clone();
        let f = classical_fisher(
            |t| {
                let r = fam(t)?;
                Ok((0..proj.len()).map(|x| (proj.projector(x) * r.matrix()).trace().re).collect())
            },
            1.5,
            &policy(),
        )
        .unwrap();
        let fa = local_qfi(&e, 0, &policy()).unwrap();
        assert!(rel(f, fa) < 1e-6);
    }

    #[test]
    fn product_hamiltonian_has_no_precision_loss() {
        let m = ThermalModel::new(
            PauliModel::new().term(0.8, "ZI").unwrap().term(-0.3, "IX").unwrap().build().unwrap(),
        );
        let path = GreedyPath::identity(2).unwrap();
        for mode in [MeasurementMode::SldEigenbasis, MeasurementMode::ReducedStateEigenbasis] {
            let e = m.gibbs(0.6).unwrap();
            let loss = precision_loss(&e, &path, mode, &policy()).unwrap();
            assert!(loss.abs() < 1e-9, "{mode:?}: {loss}");
        }
    }

    #[test]
    fn ising_model_has_no_precision_loss() {
        let m = ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(0.7, -0.4, 0.0, 0.0, 1.3)).unwrap());
        let path = GreedyPath::identity(2).unwrap();
        for t in [0.5, 2.0, 10.0] {
            let e = m.gibbs(t).unwrap();
            let loss = precision_loss(&e, &path, MeasurementMode::SldEigenbasis, &policy()).unwrap();
            assert!(loss.abs() < 1e-10, "T={t}: {loss}");
        }
    }

    #[test]
    fn sech_squared_exact_loss() {
        let (jx, jz) = (1.0, 2.0);
        let m = ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(0.0, 0.0, jx, 0.0, jz)).unwrap());
        let path = GreedyPath::identity(2).unwrap();
        for t in [0.5, 2.0, 10.0] {
            let e = m.gibbs(t).unwrap();
            let loss = precision_loss(&e, &path, MeasurementMode::SldEigenbasis, &policy()).unwrap();
            let exact = jx * jx / (jx / (2.0 * t)).cosh().powi(2) / (4.0 * t.powi(4));
            assert!(rel(loss, exact) < 1e-6, "T={t}: {loss} vs {exact}");
        }
    }

    #[test]
    fn chain_paths_132_and_213_agree() {
        let m = ThermalModel::new(build_chain(&ChainParams { n: 3, b: 1.0, j: 1.0, alpha: 0.3 }).unwrap());
        let e = m.gibbs(1.0).unwrap();
        let a = precision_loss(&e, &GreedyPath::parse("132").unwrap(), MeasurementMode::SldEigenbasis, &policy())
            .unwrap();
        let b = precision_loss(&e, &GreedyPath::parse("213").unwrap(), MeasurementMode::SldEigenbasis, &policy())
            .unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        assert!(a > 0.0);
    }

    #[test]
    fn joint_outcome_fisher_equals_greedy_total() {
        let m = fig2a();
        let e = m.gibbs(2.0).unwrap();
        let g = greedy_locc(&e, &GreedyPath::identity(2).unwrap(), MeasurementMode::SldEigenbasis, &policy())
            .unwrap();
        let p = scheme_outcome_probabilities(&m, &g.scheme, 2.0).unwrap();
        assert_eq!(p.len(), 4);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let f = classical_fisher(|t| scheme_outcome_probabilities(&m, &g.scheme, t), 2.0, &policy()).unwrap();
        assert!(rel(f, g.total) < 1e-8, "{f} vs {}", g.total);
    }

    #[test]
    fn path_parsing() {
        assert_eq!(GreedyPath::parse("132").unwrap().sites(), &[0, 2, 1]);
        assert_eq!(GreedyPath::parse("2,1").unwrap().sites(), &[1, 0]);
        assert_eq!(GreedyPath::parse("231").unwrap().label(), "231");
        assert!(GreedyPath::parse("112").is_err());
        assert!(GreedyPath::parse("104").is_err());
        assert!(GreedyPath::parse("1").is_err());
    }

    #[test]
    fn greedy_scheme_records_every_branch() {
        let m = ThermalModel::new(build_chain(&ChainParams { n: 3, b: 1.0, j: 1.0, alpha: 0.3 }).unwrap());
        let e = m.gibbs(2.0).unwrap();
        let g = greedy_locc(&e, &GreedyPath::identity(3).unwrap(), MeasurementMode::SldEigenbasis, &policy())
            .unwrap();
        // 1 root + 2 second-step + 4 final measurements
        assert_eq!(g.scheme.steps.len(), 7);
        let weights: f64 = g.scheme.steps.iter().filter(|s| s.prior.len() == 2).map(|s| s.weight).sum();
        assert!((weights - 1.0).abs() < 1e-12);
        assert!(g.total <= qfi_gibbs(&e) + 1e-8);
    }
}
