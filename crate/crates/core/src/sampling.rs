//! Seedable Haar-unitary sampling and the model matrices `A = U√G`.
//!
//! Every random draw comes from an [`RngStream`] addressed by `(seed,
//! stream_id)`. The stream id selects an independent ChaCha20 keystream, so
//! a Monte Carlo run that gives sample `k` the stream `k` produces the same
//! matrices no matter how samples are spread over threads.
//!
//! Haar unitaries come from the QR factorization of a complex Ginibre
//! matrix. The raw `Q` factor of a QR routine is **not** Haar distributed:
//! its column phases inherit the sign convention of the factorization.
//! Rescaling column `j` of `Q` by the phase of `R_jj` (so that `R` gets a
//! positive real diagonal) makes the factorization unique and the resulting
//! `Q` exactly Haar.

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal, StandardUniform};

use crate::density::SingularSpectrum;
use crate::matrix::ComplexMatrix;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        StandardUniform.sample(&mut self.rng)
    }

    /// Two independent standard normals.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        (StandardNormal.sample(&mut self.rng), StandardNormal.sample(&mut self.rng))
    }
}

/// Entries with independent standard normal real and imaginary parts.
pub fn gaussian_matrix(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let (re, im) = rng.normal_pair();
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    m
}

/// Householder QR; returns the explicit `Q` and the diagonal of `R`.
fn qr_q_and_rdiag(a: &ComplexMatrix) -> (ComplexMatrix, Vec<Complex64>) {
    let n = a.n();
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut rdiag = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let norm = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let alpha = r[(k, k)];
        let phase = if alpha.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { alpha / alpha.norm() };
        let beta = -phase * norm;
        let mut v: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= beta;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if k + 1 == n || vnorm2 == 0.0 {
            rdiag[k] = r[(k, k)];
            reflectors.push(Vec::new());
            continue;
        }
        // H = I − 2 v vᴴ / (vᴴv)
        for j in k..n {
            let dot: Complex64 = (k..n).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            let f = dot * (2.0 / vnorm2);
            for i in k..n {
                r[(i, j)] -= v[i - k] * f;
            }
        }
        rdiag[k] = beta;
        let scale = (2.0 / vnorm2).sqrt();
        reflectors.push(v.into_iter().map(|z| z * scale).collect());
    }
    // Q = H_0 H_1 … H_{n−1} applied to the identity from the right-most factor.
    let mut q = ComplexMatrix::identity(n);
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let dot: Complex64 = (k..n).map(|i| v[i - k].conj() * q[(i, j)]).sum();
            for i in k..n {
                q[(i, j)] -= v[i - k] * dot;
            }
        }
    }
    (q, rdiag)
}

/// Haar-distributed unitary: phase-corrected QR of a Ginibre matrix.
pub fn haar_unitary(n: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    for _attempt in 0..2 {
        let z = gaussian_matrix(n, rng);
        let (q, rdiag) = qr_q_and_rdiag(&z);
        let floor = 1e-13 * z.frobenius_norm();
        if rdiag.iter().any(|d| d.norm() <= floor) {
            continue;
        }
        let mut u = q;
        for (j, d) in rdiag.iter().enumerate() {
            let ph = d / d.norm();
            for i in 0..n {
                u[(i, j)] *= ph;
            }
        }
        return Ok(u);
    }
    Err(Error::SingularDraw)
}

/// `A = U·diag(√g_i)` with `U` Haar on `U(N)`.
pub fn model_matrix(spec: &SingularSpectrum, rng: &mut RngStream) -> Result<ComplexMatrix> {
    let u = haar_unitary(spec.n(), rng)?;
    let roots: Vec<f64> = spec.values().iter().map(|g| g.sqrt()).collect();
    Ok(u.scale_columns(&roots))
}
