//! Spin Hamiltonians with an explicit local/interaction split
//! `H = Σ_k H_k + H_int`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    kron, max_abs, partial_trace_matrix, CMatrix, HermitianOperator, SubsystemLayout,
};

/// Largest Hilbert-space dimension the chain builder accepts by default.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 12;

pub mod pauli {
    use super::CMatrix;
    use num_complex::Complex64;

    const O: Complex64 = Complex64::new(0.0, 0.0);
    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const I: Complex64 = Complex64::new(0.0, 1.0);

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[O, ONE, ONE, O])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[O, -I, I, O])
    }

    /// `Z = diag(1, -1)`.
    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, O, O, -ONE])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => pauli::identity(),
            Pauli::X => pauli::x(),
            Pauli::Y => pauli::y(),
            Pauli::Z => pauli::z(),
        }
    }

    fn parse(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Usage(format!("unknown Pauli letter {other:?}"))),
        }
    }
}

/// Kronecker product of single-qubit Paulis, first letter = most significant qubit.
pub fn pauli_string(ops: &[Pauli]) -> CMatrix {
    ops.iter().fold(CMatrix::identity(1, 1), |acc, p| kron(&acc, &p.matrix()))
}

/// `H = Σ_k H_k + H_int` with each `H_k` supported on subsystem `k` only.
#[derive(Clone, Debug)]
pub struct PartitionedHamiltonian {
    total: HermitianOperator,
    local_terms: Vec<HermitianOperator>,
    interaction: HermitianOperator,
}

impl PartitionedHamiltonian {
    pub fn new(local_terms: Vec<HermitianOperator>, interaction: HermitianOperator) -> Result<Self> {
        let layout = interaction.layout().clone();
        if local_terms.len() != layout.len() {
            return Err(Error::InvariantViolation(format!(
                "{} local terms for {} subsystems",
                local_terms.len(),
                layout.len()
            )));
        }
        let mut total = interaction.clone();
        for (site, term) in local_terms.iter().enumerate() {
            if term.layout() != &layout {
                return Err(Error::InvariantViolation("local term layout mismatch".into()));
            }
            let restricted = restrict_to_site(term, site)?;
            let embedded = HermitianOperator::embed(&restricted, &layout, site)?;
            let dev = max_abs(&(embedded.matrix() - term.matrix()));
            if dev > 1e-12 * term.max_abs().max(1.0) {
                return Err(Error::InvariantViolation(format!(
                    "local term {site} acts outside its subsystem (deviation {dev:e})"
                )));
            }
            total = total.try_add(term)?;
        }
        Ok(Self { total, local_terms, interaction })
    }

    /// Canonical split of an arbitrary Hamiltonian: each local term is the
    /// traceless single-site marginal, the interaction is the remainder.
    pub fn from_total(total: HermitianOperator) -> Result<Self> {
        let layout = total.layout().clone();
        let mut local_terms = Vec::with_capacity(layout.len());
        let mut rest = total.matrix().clone();
        for site in 0..layout.len() {
            let mut local = restrict_to_site(&total, site)?;
            let d = local.dim() as f64;
            let shift = local.trace() / d;
            local = local.try_add(&HermitianOperator::identity(local.layout().clone()).scale(-shift))?;
            let embedded = HermitianOperator::embed(&local, &layout, site)?;
            rest -= embedded.matrix();
            local_terms.push(embedded);
        }
        let interaction = HermitianOperator::from_hermitian_part(&rest, layout);
        Self::new(local_terms, interaction)
    }

    pub fn total(&self) -> &HermitianOperator {
        &self.total
    }

    pub fn local_terms(&self) -> &[HermitianOperator] {
        &self.local_terms
    }

    pub fn interaction(&self) -> &HermitianOperator {
        &self.interaction
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.total.layout()
    }

    pub fn dim(&self) -> usize {
        self.total.dim()
    }

    /// `‖Σ local + interaction − total‖_max`.
    pub fn recomposition_residual(&self) -> f64 {
        let mut m = self.interaction.matrix().clone();
        for t in &self.local_terms {
            m += t.matrix();
        }
        max_abs(&(m - self.total.matrix()))
    }
}

/// `Tr_rest(op) / d_rest` as an operator on `site` alone.
fn restrict_to_site(op: &HermitianOperator, site: usize) -> Result<HermitianOperator> {
    let layout = op.layout();
    let d_rest = (layout.total_dim() / layout.dims()[site]) as f64;
    let m = partial_trace_matrix(op.matrix(), layout, &[site])?.unscale(d_rest);
    Ok(HermitianOperator::from_hermitian_part(&m, layout.select(&[site])?))
}

/// `H = ½(B1 Z_A + B2 Z_B + Jx X_A X_B + Jy Y_A Y_B + Jz Z_A Z_B)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitXYZParams {
    pub b1: f64,
    pub b2: f64,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl TwoQubitXYZParams {
    pub fn new(b1: f64, b2: f64, jx: f64, jy: f64, jz: f64) -> Self {
        Self { b1, b2, jx, jy, jz }
    }

    fn check(&self) -> Result<()> {
        let all = [self.b1, self.b2, self.jx, self.jy, self.jz];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain(format!("non-finite parameter in {self:?}")))
        }
    }
}

pub fn build_two_qubit(p: &TwoQubitXYZParams) -> Result<PartitionedHamiltonian> {
    p.check()?;
    let layout = SubsystemLayout::qubits(2);
    let ha = pauli_string(&[Pauli::Z, Pauli::I]).scale(0.5 * p.b1);
    let hb = pauli_string(&[Pauli::I, Pauli::Z]).scale(0.5 * p.b2);
    let hab = pauli_string(&[Pauli::X, Pauli::X]).scale(0.5 * p.jx)
        + pauli_string(&[Pauli::Y, Pauli::Y]).scale(0.5 * p.jy)
        + pauli_string(&[Pauli::Z, Pauli::Z]).scale(0.5 * p.jz);
    PartitionedHamiltonian::new(
        vec![
            HermitianOperator::new(ha, layout.clone())?,
            HermitianOperator::new(hb, layout.clone())?,
        ],
        HermitianOperator::new(hab, layout)?,
    )
}

/// Open nearest-neighbour chain
/// `H = (B/2) Σ_k Z_k + (J/2) Σ_k (X_k X_{k+1} + Y_k Y_{k+1} + α Z_k Z_{k+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n: usize,
    pub b: f64,
    pub j: f64,
    pub alpha: f64,
}

pub fn build_chain(p: &ChainParams) -> Result<PartitionedHamiltonian> {
    build_chain_with_cap(p, DEFAULT_DIMENSION_CAP)
}

pub fn build_chain_with_cap(p: &ChainParams, cap: usize) -> Result<PartitionedHamiltonian> {
    if p.n < 2 {
        return Err(Error::Domain(format!("chain needs N >= 2, got {}", p.n)));
    }
    if ![p.b, p.j, p.alpha].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain(format!("non-finite parameter in {p:?}")));
    }
    if p.n >= usize::BITS as usize || (1usize << p.n) > cap {
        return Err(Error::Resource(format!("2^{} exceeds dimension cap {cap}", p.n)));
    }
    let layout = SubsystemLayout::qubits(p.n);
    let string_at = |sites: &[(usize, Pauli)]| {
        let mut ops = vec![Pauli::I; p.n];
        for &(s, op) in sites {
            ops[s] = op;
        }
        pauli_string(&ops)
    };
    let mut locals = Vec::with_capacity(p.n);
    for k in 0..p.n {
        locals.push(HermitianOperator::new(
            string_at(&[(k, Pauli::Z)]).scale(0.5 * p.b),
            layout.clone(),
        )?);
    }
    let d = layout.total_dim();
    let mut inter = CMatrix::zeros(d, d);
    for k in 0..p.n - 1 {
        inter += string_at(&[(k, Pauli::X), (k + 1, Pauli::X)]).scale(0.5 * p.j);
        inter += string_at(&[(k, Pauli::Y), (k + 1, Pauli::Y)]).scale(0.5 * p.j);
        inter += string_at(&[(k, Pauli::Z), (k + 1, Pauli::Z)]).scale(0.5 * p.j * p.alpha);
    }
    PartitionedHamiltonian::new(locals, HermitianOperator::new(inter, layout)?)
}

/// `H = ½((J+λ) X_A X_B + (J−λ) Y_A Y_B + Jz Z_A Z_B)`.
pub fn build_appendix_e(j: f64, lambda: f64, jz: f64) -> Result<PartitionedHamiltonian> {
    build_two_qubit(&TwoQubitXYZParams::new(0.0, 0.0, j + lambda, j - lambda, jz))
}

/// Arbitrary qubit Hamiltonian given as a sum of weighted Pauli strings.
///
/// Strings with a single non-identity letter become local terms; everything
/// else (including the identity string) goes to the interaction.
#[derive(Clone, Debug, Default)]
pub struct PauliModel {
    terms: Vec<(f64, Vec<Pauli>)>,
}

impl PauliModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, coefficient: f64, string: &str) -> Result<Self> {
        let ops = string.chars().map(Pauli::parse).collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::Usage("empty Pauli string".into()));
        }
        if let Some((_, first)) = self.terms.first() {
            if first.len() != ops.len() {
                return Err(Error::Usage(format!(
                    "Pauli string {string:?} has {} sites, expected {}",
                    ops.len(),
                    first.len()
                )));
            }
        }
        self.terms.push((coefficient, ops));
        Ok(self)
    }

    pub fn build(&self) -> Result<PartitionedHamiltonian> {
        let n = match self.terms.first() {
            Some((_, ops)) => ops.len(),
            None => return Err(Error::Usage("Pauli model without terms".into())),
        };
        let layout = SubsystemLayout::qubits(n);
        let d = layout.total_dim();
        let mut locals = vec![CMatrix::zeros(d, d); n];
        let mut inter = CMatrix::zeros(d, d);
        for (coef, ops) in &self.terms {
            let m = pauli_string(ops).scale(*coef);
            let support: Vec<usize> = (0..n).filter(|&k| ops[k] != Pauli::I).collect();
            match support.as_slice() {
                [site] => locals[*site] += m,
                _ => inter += m,
            }
        }
        let locals = locals
            .into_iter()
            .map(|m| HermitianOperator::new(m, layout.clone()))
            .collect::<Result<Vec<_>>>()?;
        PartitionedHamiltonian::new(locals, HermitianOperator::new(inter, layout)?)
    }
}

/// Hermitian matrix with i.i.d. complex Gaussian entries (GUE-like), scaled
/// to unit spectral norm.
pub fn random_hermitian<R: Rng + ?Sized>(layout: &SubsystemLayout, rng: &mut R) -> HermitianOperator {
    let d = layout.total_dim();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = num_complex::Complex64::new(re, im);
        }
    }
    let h = HermitianOperator::from_hermitian_part(&m, layout.clone());
    let norm = h.spectral_norm();
    h.scale(1.0 / norm)
}

pub fn random_model<R: Rng + ?Sized>(layout: &SubsystemLayout, rng: &mut R) -> Result<PartitionedHamiltonian> {
    PartitionedHamiltonian::from_total(random_hermitian(layout, rng))
}
