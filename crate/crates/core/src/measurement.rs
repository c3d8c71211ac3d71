//! Rank-one projective measurements on a subsystem and the post-measurement
//! states they induce.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::optimize::{minimize_on_sphere, GridRefineOptions};
use crate::linalg::{
    block_entropy, block_negentropy, max_abs, permute_subsystems, CMatrix, CVector, DensityMatrix, SubsystemLayout,
};

/// Outcomes with probability below this are dropped (zero weight).
pub const MIN_PROBABILITY: f64 = 1e-14;

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Complete set of orthogonal rank-one projectors `|v_j⟩⟨v_j|`, stored as the
/// orthonormal basis `{v_j}` (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorSet {
    basis: CMatrix,
}

impl ProjectorSet {
    pub fn from_basis(basis: CMatrix) -> Result<Self> {
        if !basis.is_square() || basis.nrows() < 2 {
            return Err(Error::InvariantViolation("projector basis must be square, d >= 2".into()));
        }
        let d = basis.nrows();
        let gram = basis.adjoint() * &basis;
        let dev = max_abs(&(gram - CMatrix::identity(d, d)));
        if dev > ORTHONORMAL_TOL {
            return Err(Error::InvariantViolation(format!(
                "projector basis not orthonormal (deviation {dev:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub fn computational(d: usize) -> Self {
        Self { basis: CMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn len(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.ncols() == 0
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn vector(&self, j: usize) -> CVector {
        self.basis.column(j).into_owned()
    }

    pub fn projector(&self, j: usize) -> CMatrix {
        let v = self.vector(j);
        &v * v.adjoint()
    }

    /// `‖Σ_j Π_j − I‖_max`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        for j in 0..self.len() {
            sum += self.projector(j);
        }
        max_abs(&(sum - CMatrix::identity(d, d)))
    }

    /// `max_{i,j} ‖Π_i Π_j − δ_ij Π_i‖_max`.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.len() {
            let pi = self.projector(i);
            for j in 0..self.len() {
                let pj = self.projector(j);
                let target = if i == j { pi.clone() } else { CMatrix::zeros(self.dim(), self.dim()) };
                worst = worst.max(max_abs(&(&pi * &pj - target)));
            }
        }
        worst
    }
}

/// Qubit measurement along the Bloch direction `n(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochMeasurement {
    pub theta: f64,
    pub phi: f64,
}

impl BlochMeasurement {
    /// Angles are reduced to `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(2.0 * PI);
        let mut phi = phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        Self { theta, phi: phi.rem_euclid(2.0 * PI) }
    }

    /// Basis `{|n+⟩, |n−⟩}`.
    pub fn basis(&self) -> CMatrix {
        rotated_pair(&unit(2, 0), &unit(2, 1), self.theta, self.phi)
    }

    pub fn projectors(&self) -> ProjectorSet {
        ProjectorSet { basis: self.basis() }
    }

    /// Bloch angles of a qubit basis' first vector.
    pub fn from_vector(v: &CVector) -> Self {
        let a = v[0].norm();
        let b = v[1].norm();
        let theta = 2.0 * b.atan2(a);
        let phi = if a > 0.0 && b > 0.0 { (v[1] / v[0]).arg() } else { 0.0 };
        Self::new(theta, phi)
    }
}

fn unit(d: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Orthonormal pair `u0 = cos(θ/2) v0 + e^{iφ} sin(θ/2) v1`,
/// `u1 = −e^{−iφ} sin(θ/2) v0 + cos(θ/2) v1`, as two columns.
pub(crate) fn rotated_pair(v0: &CVector, v1: &CVector, theta: f64, phi: f64) -> CMatrix {
    let c = (0.5 * theta).cos();
    let s = (0.5 * theta).sin();
    let e = Complex64::from_polar(1.0, phi);
    let u0 = v0.scale(c) + v1 * (e * s);
    let u1 = v0 * (-e.conj() * s) + v1.scale(c);
    CMatrix::from_columns(&[u0, u1])
}

/// Split of a layout into a measured part `A` and the rest `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    a: Vec<usize>,
}

impl Bipartition {
    pub fn new(a: Vec<usize>) -> Self {
        Self { a }
    }

    /// `A = {site}`.
    pub fn site(site: usize) -> Self {
        Self { a: vec![site] }
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self, layout: &SubsystemLayout) -> Vec<usize> {
        layout.complement(&self.a)
    }

    pub fn check(&self, layout: &SubsystemLayout) -> Result<()> {
        layout.check_sites(&self.a)?;
        if self.a.len() == layout.len() {
            return Err(Error::Usage("bipartition leaves B empty".into()));
        }
        Ok(())
    }
}

/// An operator rearranged as `A ⊗ B` (A first).
#[derive(Clone, Debug)]
pub struct BipartiteMatrix {
    pub matrix: CMatrix,
    pub d_a: usize,
    pub d_b: usize,
    pub layout_a: SubsystemLayout,
    pub layout_b: SubsystemLayout,
}

impl BipartiteMatrix {
    pub fn new(m: &CMatrix, layout: &SubsystemLayout, split: &Bipartition) -> Result<Self> {
        split.check(layout)?;
        let b_sites = split.b(layout);
        let order: Vec<usize> = split.a.iter().chain(b_sites.iter()).copied().collect();
        let layout_a = layout.select(&split.a)?;
        let layout_b = layout.select(&b_sites)?;
        let matrix = if order.iter().enumerate().all(|(k, &s)| k == s) {
            m.clone()
        } else {
            permute_subsystems(m, layout, &order)?.0
        };
        Ok(Self {
            matrix,
            d_a: layout_a.total_dim(),
            d_b: layout_b.total_dim(),
            layout_a,
            layout_b,
        })
    }

    pub fn from_state(rho: &DensityMatrix, split: &Bipartition) -> Result<Self> {
        Self::new(rho.matrix(), rho.layout(), split)
    }

    /// `⟨v|_A M |v⟩_A`, an unnormalized operator on B.
    pub fn sandwich(&self, v: &CVector) -> CMatrix {
        let (da, db) = (self.d_a, self.d_b);
        let mut out = CMatrix::zeros(db, db);
        for a in 0..da {
            let ca = v[a].conj();
            if ca == Complex64::new(0.0, 0.0) {
                continue;
            }
            for a2 in 0..da {
                let w = ca * v[a2];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..db {
                    for b2 in 0..db {
                        out[(b, b2)] += w * self.matrix[(a * db + b, a2 * db + b2)];
                    }
                }
            }
        }
        out
    }

    pub fn reduced_a(&self) -> CMatrix {
        let (da, db) = (self.d_a, self.d_b);
        let mut out = CMatrix::zeros(da, da);
        for a in 0..da {
            for a2 in 0..da {
                for b in 0..db {
                    out[(a, a2)] += self.matrix[(a * db + b, a2 * db + b)];
                }
            }
        }
        out
    }

    pub fn reduced_b(&self) -> CMatrix {
        let (da, db) = (self.d_a, self.d_b);
        let mut out = CMatrix::zeros(db, db);
        for a in 0..da {
            for b in 0..db {
                for b2 in 0..db {
                    out[(b, b2)] += self.matrix[(a * db + b, a * db + b2)];
                }
            }
        }
        out
    }

    /// `Σ_j S(⟨v_j|ρ|v_j⟩)` over unnormalized blocks, which equals the entropy
    /// of the dephased state `Σ_j (Π_j⊗I) ρ (Π_j⊗I)`.
    pub fn dephased_entropy(&self, basis: &CMatrix) -> Result<f64> {
        let mut s = 0.0;
        for j in 0..basis.ncols() {
            let v = basis.column(j).into_owned();
            s += block_entropy(&self.sandwich(&v))?;
        }
        Ok(s)
    }

    /// `S(π_A(ρ)) − S(ρ)` for a unit-trace `ρ`, evaluated as a difference of
    /// entropy deficits. The `ln d` parts cancel exactly, which keeps the
    /// round-off far below the value when `ρ` is close to maximally mixed.
    pub fn dephasing_entropy_gain(&self, basis: &CMatrix) -> Result<f64> {
        let d = self.d_a * self.d_b;
        let mut s = block_negentropy(&self.matrix, d)?;
        for j in 0..basis.ncols() {
            let v = basis.column(j).into_owned();
            s -= block_negentropy(&self.sandwich(&v), d)?;
        }
        Ok(s)
    }

    /// `S(ρ_B) − Σ_j p_j S(ρ_{B|j})` for a unit-trace `ρ`, evaluated as a
    /// difference of entropy deficits like [`Self::dephasing_entropy_gain`].
    pub fn information_gain(&self, basis: &CMatrix) -> Result<f64> {
        let mut s = -block_negentropy(&self.reduced_b(), self.d_b)?;
        for j in 0..basis.ncols() {
            let v = basis.column(j).into_owned();
            let block = self.sandwich(&v);
            let p = block.trace().re;
            if p < MIN_PROBABILITY {
                continue;
            }
            s += p * block_negentropy(&block.unscale(p), self.d_b)?;
        }
        Ok(s)
    }

    /// `Σ_j p_j S(ρ_{B|j})`, zero-probability outcomes dropped.
    pub fn conditional_entropy(&self, basis: &CMatrix) -> Result<f64> {
        let mut s = 0.0;
        for j in 0..basis.ncols() {
            let v = basis.column(j).into_owned();
            let block = self.sandwich(&v);
            let p = block.trace().re;
            if p < MIN_PROBABILITY {
                continue;
            }
            s += p * block_entropy(&block.unscale(p))?;
        }
        Ok(s)
    }
}

/// Probability and normalized post-measurement state of B for outcome `v` on A.
/// Returns `None` when the probability is below [`MIN_PROBABILITY`].
pub fn conditional_state(
    rho: &DensityMatrix,
    split: &Bipartition,
    v: &CVector,
) -> Result<Option<(f64, DensityMatrix)>> {
    let bm = BipartiteMatrix::from_state(rho, split)?;
    if v.len() != bm.d_a {
        return Err(Error::Usage(format!(
            "projector vector of length {} on subsystem of dimension {}",
            v.len(),
            bm.d_a
        )));
    }
    let block = bm.sandwich(v);
    let p = block.trace().re;
    if p < MIN_PROBABILITY {
        return Ok(None);
    }
    Ok(Some((p, DensityMatrix::from_matrix_unchecked(&block, bm.layout_b))))
}

/// Outcome of fixing the basis inside degenerate eigenspaces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DegeneracyInfo {
    /// Two-dimensional blocks rotated to minimize the conditional entropy of B.
    pub rotated_blocks: usize,
    /// Blocks of dimension > 2, left in the eigensolver's basis.
    pub unresolved_blocks: usize,
}

impl DegeneracyInfo {
    pub fn any(&self) -> bool {
        self.rotated_blocks + self.unresolved_blocks > 0
    }
}

/// Within each two-dimensional block of columns of `basis`, rotates the pair
/// (Bloch parametrization of the block) to minimize `Σ_j p_j S(ρ_{B|j})`.
/// Outside the blocks, and within any dephasing-invariant quantity, the
/// choice is irrelevant; inside a block it is the infimum over the eigenbasis
/// ambiguity.
pub fn resolve_degenerate_blocks(
    mut basis: CMatrix,
    blocks: &[std::ops::Range<usize>],
    joint: &BipartiteMatrix,
    opts: &GridRefineOptions,
) -> Result<(CMatrix, DegeneracyInfo)> {
    let mut info = DegeneracyInfo::default();
    for block in blocks.iter().filter(|b| b.len() >= 2) {
        if block.len() > 2 {
            info.unresolved_blocks += 1;
            continue;
        }
        let (i0, i1) = (block.start, block.start + 1);
        let v0 = basis.column(i0).into_owned();
        let v1 = basis.column(i1).into_owned();
        let trial = |theta: f64, phi: f64| -> CMatrix {
            let mut b = basis.clone();
            let pair = rotated_pair(&v0, &v1, theta, phi);
            b.set_column(i0, &pair.column(0));
            b.set_column(i1, &pair.column(1));
            b
        };
        // conditional entropies are bounded by ln d_B; failures are pushed to +inf
        let objective = |theta: f64, phi: f64| {
            joint.conditional_entropy(&trial(theta, phi)).unwrap_or(f64::INFINITY)
        };
        let best = minimize_on_sphere(objective, opts, &[]);
        basis = trial(best.theta, best.phi);
        info.rotated_blocks += 1;
    }
    Ok((basis, info))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, tensor_product_states};

    fn bell() -> DensityMatrix {
        let mut psi = CVector::zeros(4);
        psi[0] = c(1.0);
        psi[3] = c(1.0);
        DensityMatrix::pure(&psi, SubsystemLayout::qubits(2)).unwrap()
    }

    #[test]
    fn bloch_projectors_are_complete_and_orthogonal() {
        for (t, p) in [(0.0, 0.0), (0.3, 1.2), (PI / 2.0, 0.0), (2.9, 5.5)] {
            let set = BlochMeasurement::new(t, p).projectors();
            assert!(set.completeness_residual() < 1e-12);
            assert!(set.orthogonality_residual() < 1e-12);
        }
    }

    #[test]
    fn bloch_round_trip_through_vector() {
        let m = BlochMeasurement::new(1.1, 4.0);
        let back = BlochMeasurement::from_vector(&m.basis().column(0).into_owned());
        assert!((back.theta - m.theta).abs() < 1e-12 && (back.phi - m.phi).abs() < 1e-12);
        let wrapped = BlochMeasurement::new(-0.5, 0.0);
        assert!((wrapped.theta - 0.5).abs() < 1e-15 && (wrapped.phi - PI).abs() < 1e-15);
    }

    #[test]
    fn bell_conditional_states() {
        let (p, st) = conditional_state(&bell(), &Bipartition::site(0), &unit(2, 0)).unwrap().unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((st.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(st.matrix()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn product_conditional_states_equal_marginal() {
        let ra = DensityMatrix::new(
            CMatrix::from_row_slice(2, 2, &[c(0.6), Complex64::new(0.2, 0.1), Complex64::new(0.2, -0.1), c(0.4)]),
            SubsystemLayout::qubits(1),
        )
        .unwrap();
        let rb = DensityMatrix::new(
            CMatrix::from_row_slice(2, 2, &[c(0.3), c(0.1), c(0.1), c(0.7)]),
            SubsystemLayout::qubits(1),
        )
        .unwrap();
        let ab = tensor_product_states(&ra, &rb);
        let m = BlochMeasurement::new(0.7, 2.0);
        let mut total = 0.0;
        for j in 0..2 {
            let (p, st) = conditional_state(&ab, &Bipartition::site(0), &m.projectors().vector(j))
                .unwrap()
                .unwrap();
            total += p;
            assert!(max_abs(&(st.matrix() - rb.matrix())) < 1e-14);
        }
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_probability_outcome_is_dropped() {
        let mut psi = CVector::zeros(4);
        psi[0] = c(1.0);
        let s = DensityMatrix::pure(&psi, SubsystemLayout::qubits(2)).unwrap();
        assert!(conditional_state(&s, &Bipartition::site(0), &unit(2, 1)).unwrap().is_none());
    }

    #[test]
    fn bipartite_view_of_second_site() {
        // measuring site 1 of |01⟩ gives outcome 1 with certainty and leaves |0⟩
        let mut psi = CVector::zeros(4);
        psi[1] = c(1.0);
        let s = DensityMatrix::pure(&psi, SubsystemLayout::qubits(2)).unwrap();
        let (p, st) = conditional_state(&s, &Bipartition::site(1), &unit(2, 1)).unwrap().unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!((st.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dephased_entropy_matches_direct_dephasing() {
        let m = kron(
            &CMatrix::from_row_slice(2, 2, &[c(0.6), c(0.3), c(0.3), c(0.4)]),
            &CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.2), c(0.2), c(0.5)]),
        );
        let layout = SubsystemLayout::qubits(2);
        let bm = BipartiteMatrix::new(&m, &layout, &Bipartition::site(0)).unwrap();
        let basis = BlochMeasurement::new(0.4, 0.9).basis();
        let mut deph = CMatrix::zeros(4, 4);
        for j in 0..2 {
            let v = basis.column(j).into_owned();
            let p = kron(&(&v * v.adjoint()), &CMatrix::identity(2, 2));
            deph += &p * &m * &p;
        }
        let direct = crate::linalg::block_entropy(&deph).unwrap();
        assert!((bm.dephased_entropy(&basis).unwrap() - direct).abs() < 1e-13);
    }
}
