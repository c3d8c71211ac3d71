//! Reference computations shared by the integration tests. Nothing here calls
//! the library's spectral code: Gibbs states come from a scaled Taylor series,
//! derivatives from a five-point stencil, and partial traces from explicit
//! index loops.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;
pub type V = DVector<Complex64>;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// `e^{−H/T}/Z` by scaling and squaring a degree-18 Taylor polynomial.
pub fn gibbs(h: &M, t: f64) -> M {
    let n = h.nrows();
    let a = h.map(|z| -z / t);
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let a = a.unscale(2f64.powi(squarings));
    let mut term = M::identity(n, n);
    let mut sum = M::identity(n, n);
    for k in 1..=18 {
        term = &term * &a / Complex64::from(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    let tr = sum.trace();
    sum / tr
}

/// `⟨H²⟩ − ⟨H⟩²` in the Gibbs state, from traces only.
pub fn energy_variance(h: &M, t: f64) -> f64 {
    let rho = gibbs(h, t);
    let e1 = (&rho * h).trace().re;
    let e2 = (&rho * h * h).trace().re;
    e2 - e1 * e1
}

/// Five-point central difference with step `1e-3·t`.
pub fn derivative(f: impl Fn(f64) -> Vec<f64>, t: f64) -> Vec<f64> {
    let h = 1e-3 * t;
    let (a, b, c, d) = (f(t + 2.0 * h), f(t + h), f(t - h), f(t - 2.0 * h));
    (0..a.len()).map(|k| (-a[k] + 8.0 * b[k] - 8.0 * c[k] + d[k]) / (12.0 * h)).collect()
}

/// `Σ_x (∂_T p_x)² / p_x`.
pub fn fisher(p: impl Fn(f64) -> Vec<f64>, t: f64) -> f64 {
    let p0 = p(t);
    let dp = derivative(&p, t);
    p0.iter().zip(&dp).filter(|(p, _)| **p > 1e-14).map(|(p, d)| d * d / p).sum()
}

pub fn kron(a: &M, b: &M) -> M {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    M::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn kron_vec(a: &V, b: &V) -> V {
    V::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

/// Reduced matrix on `keep` (ascending) of an operator on qubits, big-endian.
pub fn partial_trace_qubits(m: &M, n: usize, keep: &[usize]) -> M {
    let d = 1usize << keep.len();
    let mut out = M::zeros(d, d);
    let bit = |idx: usize, site: usize| (idx >> (n - 1 - site)) & 1;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let traced_equal = (0..n).filter(|s| !keep.contains(s)).all(|s| bit(i, s) == bit(j, s));
            if !traced_equal {
                continue;
            }
            let sub = |idx: usize| keep.iter().fold(0, |acc, &s| (acc << 1) | bit(idx, s));
            out[(sub(i), sub(j))] += m[(i, j)];
        }
    }
    out
}

pub fn entropy(m: &M) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    eig.eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum()
}

pub fn pauli(c: char) -> M {
    let (o, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    let z = Complex64::new(0.0, 0.0);
    match c {
        'I' => M::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => M::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => M::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => M::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("not a Pauli letter: {c}"),
    }
}

pub fn pauli_string(s: &str) -> M {
    let mut chars = s.chars();
    let first = pauli(chars.next().expect("non-empty"));
    chars.fold(first, |acc, c| kron(&acc, &pauli(c)))
}

/// `½(B₁ Z₁ + B₂ Z₂ + Jx XX + Jy YY + Jz ZZ)` from Pauli strings.
pub fn xyz(b1: f64, b2: f64, jx: f64, jy: f64, jz: f64) -> M {
    let terms = [(b1, "ZI"), (b2, "IZ"), (jx, "XX"), (jy, "YY"), (jz, "ZZ")];
    terms.iter().fold(M::zeros(4, 4), |acc, (c, s)| acc + pauli_string(s) * Complex64::from(0.5 * c))
}

/// Open three-site chain `½[B Σ Z_k + J Σ (X X + Y Y + α Z Z)]` on neighbours.
pub fn chain3(b: f64, j: f64, alpha: f64) -> M {
    let mut h = M::zeros(8, 8);
    for (coef, s) in [
        (b, "ZII"),
        (b, "IZI"),
        (b, "IIZ"),
        (j, "XXI"),
        (j, "YYI"),
        (j * alpha, "ZZI"),
        (j, "IXX"),
        (j, "IYY"),
        (j * alpha, "IZZ"),
    ] {
        h += pauli_string(s) * Complex64::from(0.5 * coef);
    }
    h
}

pub fn sech2_closed_form(jx: f64, t: f64) -> f64 {
    let c = (jx / (2.0 * t)).cosh();
    jx * jx / (4.0 * t.powi(4) * c * c)
}
