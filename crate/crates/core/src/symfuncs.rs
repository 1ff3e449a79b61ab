//! Elementary symmetric polynomials of nonnegative reals, their deflations,
//! and exact binomial coefficients.
//!
//! Everything is evaluated with the one-value-at-a-time recurrence
//! `e_l ← e_l + g·e_{l-1}` on ascending-sorted input. With nonnegative input
//! every step adds nonnegative terms, so there is no cancellation, and the
//! sort makes the result independent of the caller's ordering down to the bit.
//! Deflations are recomputed from the reduced list rather than divided out.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymTable {
    /// Inputs, sorted ascending.
    pub values: Vec<f64>,
    /// `esp[l]` is the degree-`l` elementary symmetric polynomial, `0 ≤ l ≤ N`.
    pub esp: Vec<f64>,
}

impl SymTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `e_l`, with the convention `e_l = 0` for `l > N`.
    pub fn get(&self, l: usize) -> f64 {
        self.esp.get(l).copied().unwrap_or(0.0)
    }
}

fn validate(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        Some(v) => Err(Error::InvalidInput(format!(
            "symmetric polynomial inputs must be finite and nonnegative, got {v}"
        ))),
        None => Ok(()),
    }
}

fn recurrence(mut values: Vec<f64>) -> SymTable {
    values.sort_by(|a, b| a.total_cmp(b));
    let mut esp = vec![0.0; values.len() + 1];
    esp[0] = 1.0;
    for (m, &g) in values.iter().enumerate() {
        for l in (1..=m + 1).rev() {
            esp[l] += g * esp[l - 1];
        }
    }
    SymTable { values, esp }
}

pub fn elem_sym(values: &[f64]) -> Result<SymTable> {
    validate(values)?;
    Ok(recurrence(values.to_vec()))
}

/// Symmetric polynomials of `values` with the entries at the (0-based)
/// `excluded` positions set to zero, i.e. of the reduced list.
pub fn elem_sym_excluding(values: &[f64], excluded: &[usize]) -> Result<SymTable> {
    validate(values)?;
    if let Some(&index) = excluded.iter().find(|&&i| i >= values.len()) {
        return Err(Error::IndexOutOfRange { index, len: values.len() });
    }
    let kept = values
        .iter()
        .enumerate()
        .filter(|(i, _)| !excluded.contains(i))
        .map(|(_, &v)| v)
        .collect();
    Ok(recurrence(kept))
}

/// Exact `C(n, k)` for `n ≤ 64`.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n || n > 64 {
        return Err(Error::Binomial { n, k });
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1): acc is C(n, i).
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    Ok(acc as u64)
}
