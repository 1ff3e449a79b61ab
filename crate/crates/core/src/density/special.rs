//! Closed-form profiles for two degenerate families, each normalized
//! numerically to unit mass on its support.

use super::{density_quad_options, integrate_fallible};
use crate::{Error, Result};

/// `G = diag(g₁, g, …, g)`: a rank-one deviation from a scaled unitary.
#[derive(Clone, Copy, Debug)]
pub struct RankOneProfile {
    g1: f64,
    g: f64,
    n: usize,
    scale: f64,
}

impl RankOneProfile {
    pub fn new(g1: f64, g: f64, n: usize) -> Result<Self> {
        if !(g1 >= 0.0 && g1 < g && g.is_finite()) {
            return Err(Error::InvalidInput(format!("rank-one profile needs 0 ≤ g1 < g, got g1={g1}, g={g}")));
        }
        if n < 2 {
            return Err(Error::InvalidInput("rank-one profile needs N ≥ 2".into()));
        }
        let mut p = RankOneProfile { g1, g, n, scale: 1.0 };
        let mass = integrate_fallible(|s| Ok(p.shape(s)), g1, g, &[], density_quad_options())?;
        p.scale = 1.0 / mass;
        Ok(p)
    }

    /// The unnormalized closed form
    /// `(s−g₁)^{N−2} / ((g−g₁)^{N−1} s^N) · [(N−1)(s^N + g^{N−1}g₁) + Σ_k ((N−2−k)g + k g₁) g^k s^{N−1−k}]`,
    /// with the bracket divided through by `s^N` to keep powers bounded.
    pub fn shape(&self, s: f64) -> f64 {
        if s <= self.g1 || s >= self.g {
            return 0.0;
        }
        let (g1, g, n) = (self.g1, self.g, self.n);
        let nf = n as f64;
        let mut bracket = (nf - 1.0) * (1.0 + (g / s).powi(n as i32 - 1) * (g1 / s));
        for k in 0..=n - 2 {
            let kf = k as f64;
            bracket += ((nf - 2.0 - kf) * g + kf * g1) * (g / s).powi(k as i32) / s;
        }
        ((s - g1) / (g - g1)).powi(n as i32 - 2) / (g - g1) * bracket
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.scale * self.shape(s)
    }

    /// Factor applied to [`shape`](Self::shape) to reach unit mass.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

pub fn psi_rank_one(g1: f64, g: f64, n: usize, s: f64) -> Result<f64> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::InvalidInput(format!("|z|² must be positive, got {s}")));
    }
    Ok(RankOneProfile::new(g1, g, n)?.eval(s))
}

/// `G = diag(0·I_M, I_{N−M})`: eigenvalues of an `(N−M)×(N−M)` truncation of a
/// Haar unitary. Shape `(1−s)^{M−1} (d/ds)^M (1 + s + … + s^{N−1})`.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedProfile {
    m: usize,
    n: usize,
    scale: f64,
}

impl TruncatedProfile {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::InvalidInput(format!("truncated profile needs 1 ≤ M < N, got M={m}, N={n}")));
        }
        let mut p = TruncatedProfile { m, n, scale: 1.0 };
        let mass = integrate_fallible(|s| Ok(p.shape(s)), 0.0, 1.0, &[], density_quad_options())?;
        p.scale = 1.0 / mass;
        Ok(p)
    }

    pub fn shape(&self, s: f64) -> f64 {
        if !(0.0..1.0).contains(&s) {
            return 0.0;
        }
        // (d/ds)^M s^j = j!/(j−M)! s^{j−M}
        let mut poly = 0.0;
        for j in (self.m..self.n).rev() {
            let falling: f64 = ((j - self.m + 1)..=j).map(|x| x as f64).product();
            poly = poly * s + falling;
        }
        (1.0 - s).powi(self.m as i32 - 1) * poly
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.scale * self.shape(s)
    }
}

pub fn psi_truncated(m: usize, n: usize, s: f64) -> Result<f64> {
    Ok(TruncatedProfile::new(m, n)?.eval(s))
}
