//! Truncated Taylor series ("jets") in one real variable.
//!
//! A jet of order `K` carries the Taylor coefficients `c_0..=c_K` of a
//! function about an expansion point that the caller keeps track of; the
//! `k`-th derivative there is `k!·c_k`. Arithmetic is exact up to truncation,
//! so higher derivatives of rational expressions come out without finite
//! differences or symbolic algebra.

use std::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    /// The identity function expanded about `value`.
    pub fn var(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        if order > 0 {
            coeffs[1] = 1.0;
        }
        Jet { coeffs }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        fact * self.coeffs[k]
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet { coeffs: self.coeffs.iter().map(|x| c * x).collect() }
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    fn check_order(&self, other: &Jet) {
        assert_eq!(self.order(), other.order(), "jet orders differ");
    }

    /// Quotient by series inversion; fails if `rhs` vanishes at the point.
    pub fn div(&self, rhs: &Jet) -> Result<Jet> {
        self.check_order(rhs);
        let b0 = rhs.coeffs[0];
        if b0 == 0.0 {
            return Err(Error::JetDivisionByZero);
        }
        let k = self.order();
        let mut q = vec![0.0; k + 1];
        for n in 0..=k {
            let mut acc = self.coeffs[n];
            for j in 1..=n {
                acc -= rhs.coeffs[j] * q[n - j];
            }
            q[n] = acc / b0;
        }
        Ok(Jet { coeffs: q })
    }

    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(1.0, self.order()).div(self)
    }

    /// Integer power by repeated squaring; negative powers invert first.
    pub fn powi(&self, p: i32) -> Result<Jet> {
        let mut base = if p < 0 { self.recip()? } else { self.clone() };
        let mut e = p.unsigned_abs();
        let mut acc = Jet::constant(1.0, self.order());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_order(rhs);
        Jet { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_order(rhs);
        Jet { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Truncated Cauchy product.
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_order(rhs);
        let k = self.order();
        let (a, b) = (&self.coeffs, &rhs.coeffs);
        // Terms j and n−j are paired so that swapping the operands only swaps
        // the two summands of each pair: the product commutes to the bit.
        let coeffs = (0..=k)
            .map(|n| {
                let mut acc = 0.0;
                for j in 0..n.div_ceil(2) {
                    acc += a[j] * b[n - j] + a[n - j] * b[j];
                }
                if n % 2 == 0 {
                    acc += a[n / 2] * b[n / 2];
                }
                acc
            })
            .collect();
        Jet { coeffs }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);
