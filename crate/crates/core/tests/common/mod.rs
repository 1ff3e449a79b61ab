#![allow(dead_code)]

use num_complex::Complex64;
use sv_density::density::SingularSpectrum;
use sv_density::sampling::RngStream;

/// Spectrum of `n` values drawn log-uniformly from `[lo, hi]`.
pub fn random_spectrum(rng: &mut RngStream, n: usize, lo: f64, hi: f64) -> SingularSpectrum {
    let (a, b) = (lo.ln(), hi.ln());
    let v: Vec<f64> = (0..n).map(|_| (a + (b - a) * rng.uniform()).exp()).collect();
    SingularSpectrum::new(&v).unwrap()
}

pub fn random_complex(rng: &mut RngStream) -> Complex64 {
    let (x, y) = rng.normal_pair();
    Complex64::new(x, y)
}

/// Largest distance after greedily pairing each expected value with its
/// nearest unused partner.
pub fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Roots of `z² + b z + c`.
pub fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * c).sqrt();
    // pick the sign that avoids cancellation, then use Vieta for the other root
    let q = if (-b + disc).norm() >= (-b - disc).norm() { -b + disc } else { -b - disc };
    let r1 = q / 2.0;
    let r2 = if r1.norm() > 0.0 { c / r1 } else { -b - r1 };
    [r1, r2]
}

/// Roots of `z³ + a z² + b z + c` by Cardano, each polished by Newton steps.
pub fn cubic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let u3 = if (-q / 2.0 + s).norm() >= (-q / 2.0 - s).norm() { -q / 2.0 + s } else { -q / 2.0 - s };
    let u = u3.powf(1.0 / 3.0);
    let omega = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let mut w = Complex64::new(1.0, 0.0);
    for r in roots.iter_mut() {
        let t = if u.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { w * u - p / (3.0 * w * u) };
        *r = t - a / 3.0;
        w *= omega;
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*r + a) * *r + b) * *r + c;
            let df = (3.0 * *r + 2.0 * a) * *r + b;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}
