//! Dense Hermitian linear algebra on small tensor-product Hilbert spaces.
//!
//! Every operator carries a [`SubsystemLayout`]: the ordered local dimensions
//! of the factors it acts on. Index conventions are big-endian, i.e. the first
//! subsystem is the most significant digit, matching `kron(a, b)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative Hermiticity tolerance, scaled by `max(1, ‖M‖_max)`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-POSITIVITY_TOL, 0)` are clamped to zero.
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvariantViolation("layout needs at least one subsystem".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvariantViolation(format!("local dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        assert!(n > 0, "need at least one qubit");
        Self { dims: vec![2; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &SubsystemLayout) -> SubsystemLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SubsystemLayout { dims }
    }

    /// Layout of the listed subsystems, in the listed order.
    pub fn select(&self, sites: &[usize]) -> Result<SubsystemLayout> {
        self.check_sites(sites)?;
        SubsystemLayout::new(sites.iter().map(|&s| self.dims[s]).collect())
    }

    /// Sites not in `sites`, ascending.
    pub fn complement(&self, sites: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|s| !sites.contains(s)).collect()
    }

    pub fn check_sites(&self, sites: &[usize]) -> Result<()> {
        if sites.is_empty() {
            return Err(Error::Usage("empty subsystem set".into()));
        }
        for (i, &s) in sites.iter().enumerate() {
            if s >= self.len() {
                return Err(Error::Usage(format!(
                    "subsystem {s} out of range for {} subsystems",
                    self.len()
                )));
            }
            if sites[..i].contains(&s) {
                return Err(Error::Usage(format!("subsystem {s} listed twice")));
            }
        }
        Ok(())
    }

    fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = index % d;
            index /= d;
        }
        out
    }

    fn compose(&self, sites: &[usize], digits: &[usize]) -> usize {
        sites.iter().fold(0, |acc, &s| acc * self.dims[s] + digits[s])
    }
}

/// Square complex Hermitian matrix on a declared layout.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    layout: SubsystemLayout,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        check_shape(&matrix, &layout)?;
        check_hermitian(&matrix)?;
        Ok(Self { matrix: hermitize(&matrix), layout })
    }

    /// Takes the Hermitian part of `matrix` without validating it.
    pub(crate) fn from_hermitian_part(matrix: &CMatrix, layout: SubsystemLayout) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        Self { matrix: hermitize(matrix), layout }
    }

    pub fn zeros(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self { matrix: CMatrix::zeros(d, d), layout }
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self { matrix: CMatrix::identity(d, d), layout }
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[f64], layout: SubsystemLayout) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        Self::new(m, layout)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigh()
            .eigenvalues
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn eigh(&self) -> EigenDecomposition {
        eigh_unchecked(&self.matrix)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { matrix: self.matrix.scale(c), layout: self.layout.clone() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::Usage("adding operators with different layouts".into()));
        }
        Ok(Self { matrix: &self.matrix + &other.matrix, layout: self.layout.clone() })
    }

    /// `‖[self, other]‖_max`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        max_abs(&c)
    }

    /// Embeds an operator acting on subsystem `site` into `layout` (identity elsewhere).
    pub fn embed(local: &HermitianOperator, layout: &SubsystemLayout, site: usize) -> Result<Self> {
        layout.check_sites(&[site])?;
        if local.dim() != layout.dims()[site] {
            return Err(Error::Usage(format!(
                "local operator of dimension {} does not fit subsystem {site} of dimension {}",
                local.dim(),
                layout.dims()[site]
            )));
        }
        let mut m = CMatrix::identity(1, 1);
        for (k, &d) in layout.dims().iter().enumerate() {
            let factor = if k == site { local.matrix.clone() } else { CMatrix::identity(d, d) };
            m = kron(&m, &factor);
        }
        Ok(Self { matrix: m, layout: layout.clone() })
    }
}

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    layout: SubsystemLayout,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        check_shape(&matrix, &layout)?;
        check_hermitian(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvariantViolation(format!("trace {tr} differs from 1")));
        }
        let m = hermitize(&matrix);
        let min = eigh_unchecked(&m).eigenvalues[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvariantViolation(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix: m, layout })
    }

    /// Hermitizes and renormalizes; callers guarantee positivity.
    pub(crate) fn from_matrix_unchecked(matrix: &CMatrix, layout: SubsystemLayout) -> Self {
        let m = hermitize(matrix);
        let tr = m.trace().re;
        Self { matrix: m.unscale(tr), layout }
    }

    pub fn pure(psi: &CVector, layout: SubsystemLayout) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Self::new(&v * v.adjoint(), layout)
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self { matrix: CMatrix::identity(d, d).unscale(d as f64), layout }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigh(&self) -> EigenDecomposition {
        eigh_unchecked(&self.matrix)
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator { matrix: self.matrix.clone(), layout: self.layout.clone() }
    }

    /// `Tr[ρ O]`, real part.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (&self.matrix * op).trace().re
    }
}

/// Eigenvalues ascending, eigenvectors as orthonormal columns in matching order.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        self.with_spectrum(|v| v)
    }

    /// `V f(Λ) V†`.
    pub fn with_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let fk = f(lam);
            scaled.column_mut(k).scale_mut(fk);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// Groups consecutive eigenvalues whose gaps are at most `tol`.
    pub fn degenerate_blocks(&self, tol: f64) -> Vec<std::ops::Range<usize>> {
        group_ties(&self.eigenvalues, tol)
    }
}

pub(crate) fn group_ties(sorted: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] > tol {
            blocks.push(start..k);
            start = k;
        }
    }
    blocks
}

pub fn eigh(op: &HermitianOperator) -> Result<EigenDecomposition> {
    check_hermitian(op.matrix())?;
    Ok(op.eigh())
}

/// Eigendecomposition of a raw matrix, checking Hermiticity first.
pub fn eigh_matrix(m: &CMatrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::InvariantViolation("matrix is not square".into()));
    }
    check_hermitian(m)?;
    Ok(eigh_unchecked(&hermitize(m)))
}

pub(crate) fn eigh_unchecked(m: &CMatrix) -> EigenDecomposition {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    EigenDecomposition { eigenvalues, eigenvectors }
}

/// Spectral calculus `V f(Λ) V†`. Non-finite `f` values are domain errors.
pub fn matrix_function(
    op: &HermitianOperator,
    f: impl Fn(f64) -> f64,
) -> Result<HermitianOperator> {
    let eig = op.eigh();
    let mut values = Vec::with_capacity(eig.eigenvalues.len());
    for &lam in &eig.eigenvalues {
        let v = f(lam);
        if !v.is_finite() {
            return Err(Error::Domain(format!("function undefined at eigenvalue {lam}")));
        }
        values.push(v);
    }
    let mut scaled = eig.eigenvectors.clone();
    for (k, v) in values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*v);
    }
    let m = scaled * eig.eigenvectors.adjoint();
    Ok(HermitianOperator::from_hermitian_part(&m, op.layout().clone()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        matrix: kron(&a.matrix, &b.matrix),
        layout: a.layout.concat(&b.layout),
    }
}

pub fn tensor_product_states(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix { matrix: kron(&a.matrix, &b.matrix), layout: a.layout.concat(&b.layout) }
}

/// Partial trace of an arbitrary (not necessarily positive) operator.
/// Kept subsystems appear in ascending order.
pub fn partial_trace_matrix(m: &CMatrix, layout: &SubsystemLayout, keep: &[usize]) -> Result<CMatrix> {
    layout.check_sites(keep)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced = layout.complement(&kept);
    let d = layout.total_dim();
    let dk: usize = kept.iter().map(|&s| layout.dims()[s]).product();
    let idx: Vec<(usize, usize)> = (0..d)
        .map(|i| {
            let digits = layout.digits(i);
            (layout.compose(&kept, &digits), layout.compose(&traced, &digits))
        })
        .collect();
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..d {
        for j in 0..d {
            if idx[i].1 == idx[j].1 {
                out[(idx[i].0, idx[j].0)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(&rho.matrix, &rho.layout, keep)?;
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    let layout = rho.layout.select(&kept)?;
    Ok(DensityMatrix { matrix: hermitize(&m), layout })
}

/// Reorders tensor factors so that new factor `k` is old factor `order[k]`.
pub fn permute_subsystems(
    m: &CMatrix,
    layout: &SubsystemLayout,
    order: &[usize],
) -> Result<(CMatrix, SubsystemLayout)> {
    if order.len() != layout.len() {
        return Err(Error::Usage("permutation must list every subsystem".into()));
    }
    layout.check_sites(order)?;
    let d = layout.total_dim();
    let new_index: Vec<usize> = (0..d).map(|i| layout.compose(order, &layout.digits(i))).collect();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(new_index[i], new_index[j])] = m[(i, j)];
        }
    }
    Ok((out, layout.select(order)?))
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_spectrum(&rho.eigh().eigenvalues)
}

/// `-Σ λ ln λ` with `0 ln 0 = 0`; eigenvalues in `[-1e-10, 0)` are clamped.
/// Does not require the spectrum to be normalized.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &lam in eigenvalues {
        if lam < -POSITIVITY_TOL {
            return Err(Error::InvariantViolation(format!("negative eigenvalue {lam:e}")));
        }
        if lam > 0.0 {
            s -= lam * lam.ln();
        }
    }
    Ok(s.max(0.0))
}

/// Entropy deficit `ln d − S` of a spectrum of `d` eigenvalues summing to one,
/// as `Σ [λ ln(dλ) − (λ − 1/d)]`. The subtracted term sums to zero, and each
/// summand is second order in `λ − 1/d`, so eigenvalue round-off barely
/// enters near the maximally mixed state. Block spectra whose union has `d`
/// entries and unit total may be passed piecewise.
pub(crate) fn negentropy_of_spectrum(eigenvalues: &[f64], d: usize) -> Result<f64> {
    let d = d as f64;
    let mut s = 0.0;
    for &lam in eigenvalues {
        if lam < -POSITIVITY_TOL {
            return Err(Error::InvariantViolation(format!("negative eigenvalue {lam:e}")));
        }
        let x = d * lam.max(0.0) - 1.0;
        s += if x > -1.0 { (1.0 + x) * x.ln_1p() - x } else { 1.0 };
    }
    Ok(s / d)
}

pub(crate) fn block_negentropy(m: &CMatrix, d: usize) -> Result<f64> {
    negentropy_of_spectrum(&eigh_unchecked(&hermitize(m)).eigenvalues, d)
}

/// Entropy contribution `-Tr[M ln M]` of an unnormalized positive block.
pub(crate) fn block_entropy(m: &CMatrix) -> Result<f64> {
    entropy_of_spectrum(&eigh_unchecked(&hermitize(m)).eigenvalues)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Usage(format!(
            "fidelity between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sqrt_rho = rho.eigh().with_spectrum(|v| v.max(0.0).sqrt());
    let inner = hermitize(&(&sqrt_rho * sigma.matrix() * &sqrt_rho));
    let root_trace: f64 = eigh_unchecked(&inner)
        .eigenvalues
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn check_shape(m: &CMatrix, layout: &SubsystemLayout) -> Result<()> {
    if !m.is_square() || m.nrows() != layout.total_dim() {
        return Err(Error::InvariantViolation(format!(
            "matrix {}x{} does not match layout {:?}",
            m.nrows(),
            m.ncols(),
            layout.dims()
        )));
    }
    Ok(())
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let dev = max_abs(&(m - m.adjoint()));
    let scale = max_abs(m).max(1.0);
    if dev > HERMITICITY_TOL * scale {
        return Err(Error::InvariantViolation(format!("not Hermitian: max|M - M†| = {dev:e}")));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
