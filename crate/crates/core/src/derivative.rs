//! Central finite differences in temperature with one Richardson step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMatrix};

/// Step policy for every `∂_T` in the crate: `h = relative_step · T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DerivativePolicy {
    pub relative_step: f64,
    pub richardson: bool,
}

impl Default for DerivativePolicy {
    fn default() -> Self {
        Self { relative_step: 1e-3, richardson: true }
    }
}

impl DerivativePolicy {
    pub fn step(&self, t: f64) -> f64 {
        self.relative_step * t
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_step > 0.0 && self.relative_step < 0.5) {
            return Err(Error::Config(format!(
                "relative derivative step {} outside (0, 0.5)",
                self.relative_step
            )));
        }
        Ok(())
    }
}

/// Values that can be linearly combined by a difference stencil.
pub trait Stencil: Sized {
    fn combine(terms: &[(f64, &Self)]) -> Self;
    fn magnitude(&self) -> f64;
}

impl Stencil for f64 {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(c, v)| c * **v).sum()
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Stencil for Vec<f64> {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let n = terms[0].1.len();
        (0..n).map(|i| terms.iter().map(|(c, v)| c * v[i]).sum()).collect()
    }

    fn magnitude(&self) -> f64 {
        self.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Stencil for CMatrix {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out = terms[0].1.scale(terms[0].0);
        for (c, m) in &terms[1..] {
            out += m.scale(*c);
        }
        out
    }

    fn magnitude(&self) -> f64 {
        max_abs(self)
    }
}

#[derive(Clone, Debug)]
pub struct Derivative<V> {
    pub value: V,
    /// `‖D(h/2) − D(h)‖ / 3`, the leading truncation error of the half-step
    /// difference; the extrapolated value is normally far more accurate.
    pub error_estimate: f64,
}

pub fn central_derivative<V: Stencil>(
    f: impl Fn(f64) -> Result<V>,
    t: f64,
    policy: &DerivativePolicy,
) -> Result<Derivative<V>> {
    let h = policy.step(t);
    if !(h > 0.0) || t - h <= 0.0 {
        return Err(Error::Domain(format!("cannot difference at T = {t} with step {h}")));
    }
    let diff = |h: f64| -> Result<V> {
        let up = f(t + h)?;
        let down = f(t - h)?;
        let inv = 0.5 / h;
        Ok(V::combine(&[(inv, &up), (-inv, &down)]))
    };
    let coarse = diff(h)?;
    if !policy.richardson {
        return Ok(Derivative { value: coarse, error_estimate: f64::NAN });
    }
    let fine = diff(0.5 * h)?;
    let error_estimate = V::combine(&[(1.0 / 3.0, &fine), (-1.0 / 3.0, &coarse)]).magnitude();
    let value = V::combine(&[(4.0 / 3.0, &fine), (-1.0 / 3.0, &coarse)]);
    Ok(Derivative { value, error_estimate })
}

/// `-(1/T) ∂_T f(T)`, the form in which entropic quantities are compared with
/// Fisher informations.
pub fn minus_inv_t_derivative(
    f: impl Fn(f64) -> Result<f64>,
    t: f64,
    policy: &DerivativePolicy,
) -> Result<f64> {
    Ok(-central_derivative(f, t, policy)?.value / t)
}
