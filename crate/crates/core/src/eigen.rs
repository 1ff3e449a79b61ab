//! Eigenvalues of general dense complex matrices.
//!
//! Pipeline: power-of-two balancing, Householder reduction to upper
//! Hessenberg form, then single-shift complex QR iteration with Wilkinson
//! shifts (and an occasional exceptional shift) until the Hessenberg matrix
//! has deflated to triangular form. Eigenvectors are never formed.

use num_complex::Complex64;

use crate::density::SingularSpectrum;
use crate::matrix::ComplexMatrix;

/// Relative size below which a subdiagonal entry is set to zero.
pub const DEFLATION_EPS: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub values: Vec<Complex64>,
    /// QR sweeps performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Diagonal similarity `D⁻¹ A D` with power-of-two entries in `D`, chosen so
/// that off-diagonal row and column norms are within a factor 2 of each other.
/// Returns the balanced matrix and the diagonal of `D`.
pub fn balance(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.n();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                c += b[(j, i)].norm();
                r += b[(i, j)].norm();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
        if done {
            return (b, d);
        }
    }
}

/// Unitary similarity to upper Hessenberg form by Householder reflections.
pub fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.n();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = h[(k + 1, k)];
        let phase = if alpha.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { alpha / alpha.norm() };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let scale = (2.0 / vnorm2).sqrt();
        v.iter_mut().for_each(|z| *z *= scale);
        // H ← P H with P = I − v vᴴ acting on rows k+1..n
        for j in k..n {
            let dot: Complex64 = (k + 1..n).map(|i| v[i - k - 1].conj() * h[(i, j)]).sum();
            for i in k + 1..n {
                h[(i, j)] -= v[i - k - 1] * dot;
            }
        }
        // H ← H P on columns k+1..n
        for i in 0..n {
            let dot: Complex64 = (k + 1..n).map(|j| h[(i, j)] * v[j - k - 1]).sum();
            for j in k + 1..n {
                h[(i, j)] -= dot * v[j - k - 1].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Eigenvalue of the 2×2 matrix `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR sweep `H − μI = QR, H ← RQ + μI` on rows and
/// columns `lo..=hi` of `h`.
fn qr_sweep(h: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let norm = x.norm().hypot(y.norm());
        let (c, s) = if norm == 0.0 {
            (1.0, Complex64::new(0.0, 0.0))
        } else if x.norm() == 0.0 {
            (0.0, y.conj() / y.norm())
        } else {
            let unit = x / x.norm();
            (x.norm() / norm, unit * y.conj() / norm)
        };
        for j in k..=hi {
            let t1 = h[(k, j)];
            let t2 = h[(k + 1, j)];
            h[(k, j)] = t1 * c + s * t2;
            h[(k + 1, j)] = -s.conj() * t1 + t2 * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        for i in lo..=(k + 1).min(hi) {
            let t1 = h[(i, k)];
            let t2 = h[(i, k + 1)];
            h[(i, k)] = t1 * c + s.conj() * t2;
            h[(i, k + 1)] = -s * t1 + t2 * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

pub fn eigenvalues(a: &ComplexMatrix) -> EigenResult {
    let n = a.n();
    if n == 0 {
        return EigenResult { values: Vec::new(), iterations: 0, converged: true };
    }
    let (b, _) = balance(a);
    let mut h = hessenberg(&b);
    let norm = h.frobenius_norm();
    let tiny = f64::MIN_POSITIVE * n as f64 / f64::EPSILON;
    let cap = 100 * n;

    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut iterations = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            values[0] = h[(0, 0)];
            return EigenResult { values, iterations, converged: true };
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let threshold = if diag == 0.0 { DEFLATION_EPS * norm } else { DEFLATION_EPS * diag };
            if sub <= threshold.max(tiny) {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if iterations >= cap {
            for (i, v) in values.iter_mut().enumerate().take(hi + 1) {
                *v = h[(i, i)];
            }
            return EigenResult { values, iterations, converged: false };
        }
        let mu = if since_deflation > 0 && since_deflation % 10 == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, lo, hi, mu);
        iterations += 1;
        since_deflation += 1;
    }
}

/// All moduli lie in `[√g_min − 1e−8, √g_max + 1e−8]` (Weyl–Horn bound).
pub fn annulus_check(values: &[Complex64], spec: &SingularSpectrum) -> bool {
    let lo = spec.values()[0].sqrt() - 1e-8;
    let hi = spec.values()[spec.n() - 1].sqrt() + 1e-8;
    values.iter().all(|z| {
        let r = z.norm();
        r >= lo && r <= hi
    })
}
