//! Per-value building blocks of the density: `F_−`, `F_Δ` (closed sum and
//! integral representation) and the block terms used when several `g`
//! coincide.
//!
//! Indices are 0-based positions in the sorted spectrum.

use super::spectrum::{Block, SingularSpectrum};
use crate::jets::Jet;
use crate::quad::{self, QuadOptions};
use crate::sum::CompensatedSum;
use crate::symfuncs::{binomial, elem_sym, elem_sym_excluding};
use crate::{Error, Result};

/// A product kept as `mantissa · 2^exponent` so long chains of factors cannot
/// overflow or underflow. Rescaling by powers of two is exact.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ScaledProduct {
    mant: f64,
    exp: i32,
}

fn frexp(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, biased - 1022)
}

fn ldexp(m: f64, e: i32) -> f64 {
    // Split so neither factor overflows on its own.
    let half = e / 2;
    m * 2f64.powi(half) * 2f64.powi(e - half)
}

impl ScaledProduct {
    pub(crate) fn one() -> Self {
        ScaledProduct { mant: 1.0, exp: 0 }
    }

    fn renorm(&mut self) {
        let (m, e) = frexp(self.mant);
        self.mant = m;
        self.exp += e;
    }

    pub(crate) fn mul(&mut self, x: f64) {
        self.mant *= x;
        self.renorm();
    }

    pub(crate) fn div(&mut self, x: f64) {
        self.mant /= x;
        self.renorm();
    }

    pub(crate) fn times(&self, x: f64) -> f64 {
        let (m, e) = frexp(x);
        ldexp(self.mant * m, self.exp + e)
    }
}

fn binom_f64(n: usize, k: usize) -> Result<f64> {
    Ok(binomial(n as u64, k as u64)? as f64)
}

fn check_singleton(spec: &SingularSpectrum, i: usize) -> Result<()> {
    match spec.block_of(i) {
        None => Err(Error::IndexOutOfRange { index: i, len: spec.n() }),
        Some(b) if b.len > 1 => Err(Error::Degenerate),
        Some(_) => Ok(()),
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("|z|² must be positive and finite, got {s}")))
    }
}

/// `(g_i − s)^{N−2} / ∏'_j (g_i − g_j)` as a scaled product.
fn delta_prefactor(values: &[f64], i: usize, s: f64) -> ScaledProduct {
    let n = values.len();
    let gi = values[i];
    let mut p = ScaledProduct::one();
    if n >= 2 {
        for _ in 0..n - 2 {
            p.mul(gi - s);
        }
    } else {
        p.div(gi - s);
    }
    for (j, &gj) in values.iter().enumerate() {
        if j != i {
            p.div(gi - gj);
        }
    }
    p
}

/// `F_Δ(g_i)` from the closed sum over deflated symmetric polynomials, on an
/// explicit value list. `values[i]` must differ from every other entry.
pub(crate) fn delta_term(values: &[f64], i: usize, s: f64) -> Result<f64> {
    let n = values.len();
    let gi = values[i];
    // s^l_{[i]} |z|^{-2(l+1)} [l g_i + (N-1-l)|z|²] = e_l(g/s)_{[i]} [l g_i/s + N-1-l]
    let ratios: Vec<f64> = values.iter().map(|g| g / s).collect();
    let e = elem_sym_excluding(&ratios, &[i])?;
    let mut acc = CompensatedSum::new();
    for l in 0..n {
        let bracket = l as f64 * (gi / s) + (n - 1 - l) as f64;
        acc.add(e.get(l) / binom_f64(n - 1, l)? * bracket);
    }
    Ok(delta_prefactor(values, i, s).times(acc.value()))
}

/// `F_−(g_i)`, evaluated literally.
pub fn f_minus(spec: &SingularSpectrum, i: usize, s: f64) -> Result<f64> {
    check_s(s)?;
    check_singleton(spec, i)?;
    let values = spec.snapped();
    let n = values.len();
    let gi = values[i];
    let ratios: Vec<f64> = values.iter().map(|g| g / s).collect();
    let e = elem_sym_excluding(&ratios, &[i])?;
    let mut acc = CompensatedSum::new();
    for l in 1..n {
        acc.add(e.get(l) * l as f64 / binom_f64(n - 1, l)?);
    }
    let mut p = ScaledProduct::one();
    for _ in 0..n.saturating_sub(1) {
        p.mul(gi);
    }
    for (j, &gj) in values.iter().enumerate() {
        if j != i {
            p.div(gi - gj);
        }
    }
    p.div(s);
    Ok(-(n as f64) * p.times(acc.value()))
}

/// `F_Δ(g_i)` from the finite sum over deflated symmetric polynomials.
pub fn f_delta_sum(spec: &SingularSpectrum, i: usize, s: f64) -> Result<f64> {
    check_s(s)?;
    check_singleton(spec, i)?;
    delta_term(&spec.snapped(), i, s)
}

/// `F_Δ(g_i)` from its integral representation over `t ∈ [0, ∞)`, mapped to
/// `u ∈ [0, 1)` by `t = u/(1−u)`.
///
/// This route shares nothing with [`f_delta_sum`]: the determinant of the
/// diagonal matrix is a plain product and the prefactor is multiplied out
/// directly.
pub fn f_delta_quad(spec: &SingularSpectrum, i: usize, s: f64) -> Result<f64> {
    check_s(s)?;
    check_singleton(spec, i)?;
    let g = spec.snapped();
    let n = g.len();
    let nf = n as f64;
    let gi = g[i];
    // N dt/(1+t)^{N+2} det(1 + tG_{[i]}/s) [N − t + (g_i/s)(Nt − 1)], with
    // dt/(1+t)² = du and the remaining (1+t)^N spread over the N factors.
    let integrand = |u: f64| {
        let t = u / (1.0 - u);
        let inv = 1.0 - u; // 1/(1+t)
        let det: f64 = g
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &gj)| (1.0 + t * gj / s) * inv)
            .product();
        nf * det * (nf - t + (gi / s) * (nf * t - 1.0)) * inv
    };
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-13, max_subdivisions: 10_000 };
    let integral = quad::integrate(integrand, 0.0, 1.0, opts)?.value;
    let mut pref = (gi - s).powi(n as i32 - 2);
    for (j, &gj) in g.iter().enumerate() {
        if j != i {
            pref /= gi - gj;
        }
    }
    Ok(pref * integral)
}

fn find_block(spec: &SingularSpectrum, start: usize, mult: usize) -> Result<Block> {
    spec.blocks()
        .iter()
        .find(|b| b.start == start && b.len == mult + 1)
        .copied()
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "indices {start}..={} do not form a block of the spectrum",
                start + mult
            ))
        })
}

/// Jet evaluation of `f^{[k,i]}_n(g)` for the block starting at `start` with
/// degeneracy order `mult` (`mult + 1` equal entries).
///
/// The deflated symmetric polynomials drop positions `start..=start+n`; the
/// remaining block members stay at the block value and are constants for the
/// derivative. Only the explicit `g` dependence is carried by the jet.
pub fn f_kn(spec: &SingularSpectrum, start: usize, mult: usize, n: usize, g: &Jet, s: f64) -> Result<Jet> {
    check_s(s)?;
    let block = find_block(spec, start, mult)?;
    if n > mult {
        return Err(Error::InvalidInput(format!("n = {n} exceeds block order {mult}")));
    }
    if g.order() < mult - n {
        return Err(Error::JetOrder { have: g.order(), need: mult - n });
    }
    f_kn_unchecked(spec, &block, n, g, s)
}

fn f_kn_unchecked(spec: &SingularSpectrum, block: &Block, n: usize, g: &Jet, s: f64) -> Result<Jet> {
    let big_n = spec.n();
    let order = g.order();
    let mult = block.len - 1;
    let snapped = spec.snapped();
    let outside: Vec<f64> = snapped
        .iter()
        .enumerate()
        .filter(|(j, _)| !block.indices().contains(j))
        .map(|(_, &v)| v)
        .collect();

    let mut rest: Vec<f64> = vec![block.value / s; mult - n];
    rest.extend(outside.iter().map(|v| v / s));
    let e = elem_sym(&rest)?;

    // (g − s)^{N−2} / ∏_{j ∉ block} (g − g_j)
    let mut pref = g.add_scalar(-s).powi(big_n as i32 - 2)?;
    for &gj in &outside {
        pref = pref.div(&g.add_scalar(-gj))?;
    }

    // Σ_{l=n}^{N−1} e_{l−n}(rest/s) / C(N−1, l) · [l g/s + N−1−l]
    let mut series = Jet::constant(0.0, order);
    for l in n..big_n {
        let w = e.get(l - n) / binom_f64(big_n - 1, l)?;
        let bracket = g.scale(l as f64 / s).add_scalar((big_n - 1 - l) as f64);
        series = &series + &bracket.scale(w);
    }
    Ok((&pref * &series).scale(s.powi(-(n as i32))))
}

/// Block replacement for `Σ_{n=0}^{i} F_Δ(g_{k+n})` when the block's values
/// coincide: `Σ_n (−1)^n/(i−n)! · d^{i−n}/dg^{i−n} f^{[k,i]}_n(g)`.
pub fn f_delta_block(spec: &SingularSpectrum, block: &Block, s: f64) -> Result<f64> {
    Ok(block_sum(spec, block, s)?.value())
}

fn block_sum(spec: &SingularSpectrum, block: &Block, s: f64) -> Result<CompensatedSum> {
    check_s(s)?;
    let mult = block.len - 1;
    let g = Jet::var(block.value, mult);
    let mut acc = CompensatedSum::new();
    for n in 0..=mult {
        // (i−n)-th derivative / (i−n)! is just the Taylor coefficient.
        let fk = f_kn_unchecked(spec, block, n, &g, s)?;
        let c = fk.coeffs()[mult - n];
        acc.add(if n % 2 == 0 { c } else { -c });
    }
    Ok(acc)
}

/// Contribution of one block to `N·Ψ`: `F_Δ` for a single value, the block
/// formula otherwise. The second component is the absolute mass that went
/// into the value, a proxy for its rounding error; for a block it is the sum
/// of the magnitudes of the alternating series, which can exceed the result
/// by many orders when `s` is far from the block.
pub(crate) fn block_term(spec: &SingularSpectrum, snapped: &[f64], block: &Block, s: f64) -> Result<(f64, f64)> {
    if block.len == 1 {
        let t = delta_term(snapped, block.start, s)?;
        Ok((t, t.abs()))
    } else {
        let acc = block_sum(spec, block, s)?;
        Ok((acc.value(), acc.abs_total()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> SingularSpectrum {
        SingularSpectrum::new(v).unwrap()
    }

    #[test]
    fn scaled_product_survives_extreme_chains() {
        let mut p = ScaledProduct::one();
        for _ in 0..40 {
            p.mul(1e-9);
        }
        for _ in 0..40 {
            p.div(1e-9);
        }
        assert!((p.times(1.0) - 1.0).abs() < 1e-13);
        let mut q = ScaledProduct::one();
        for _ in 0..100 {
            q.mul(1e10);
        }
        for _ in 0..95 {
            q.div(1e10);
        }
        assert!((q.times(1.0) / 1e50 - 1.0).abs() < 1e-12);
        assert_eq!(frexp(0.75), (0.75, 0));
        assert_eq!(frexp(-6.0), (-0.75, 3));
        let (m, e) = frexp(5e-320);
        assert_eq!(ldexp(m, e), 5e-320);
    }

    #[test]
    fn f_minus_hand_values() {
        // −(1/(1−4))·N·g_1^{N−1}·s^1_{[1]}/|z|⁴ = (1/3)·2·1·(4/4)
        let sp = spec(&[1.0, 4.0]);
        assert!((f_minus(&sp, 0, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((f_minus(&sp, 1, 2.0).unwrap() + 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f_minus(&spec(&[3.0]), 0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn f_delta_hand_values() {
        let sp = spec(&[1.0, 4.0]);
        assert!((f_delta_sum(&sp, 1, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((f_delta_sum(&sp, 1, 4.0).unwrap() - 5.0 / 12.0).abs() < 1e-15);
        // N = 2 closed form (1 + g1 g2/s²)/(g2 − g1)
        for &(g1, g2, s) in &[(0.3, 2.0, 1.1), (1.0, 9.0, 0.2), (5.0, 6.0, 5.5)] {
            let v = f_delta_sum(&spec(&[g1, g2]), 1, s).unwrap();
            let expect = (1.0 + g1 * g2 / (s * s)) / (g2 - g1);
            assert!((v - expect).abs() < 1e-14 * expect.abs());
        }
    }

    #[test]
    fn integral_route_matches_hand_value() {
        // ∫ 2dt/(1+t)⁴ (1 + t/2)(3t) = 2, times 1/(4 − 1)
        let sp = spec(&[1.0, 4.0]);
        assert!((f_delta_quad(&sp, 1, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_routes_agree_on_odd_squares() {
        let sp = spec(&[1.0, 4.0, 9.0, 16.0, 25.0]);
        for &s in &[2.0, 7.0, 13.0, 20.0] {
            for i in 0..5 {
                let a = f_delta_sum(&sp, i, s).unwrap();
                let b = f_delta_quad(&sp, i, s).unwrap();
                assert!((a - b).abs() < 1e-8, "i={i} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn degenerate_index_rejected() {
        let sp = spec(&[1.0, 2.0, 2.0]);
        assert!(matches!(f_delta_sum(&sp, 1, 1.5), Err(Error::Degenerate)));
        assert!(matches!(f_minus(&sp, 2, 1.5), Err(Error::Degenerate)));
        assert!(f_delta_sum(&sp, 0, 1.5).is_ok());
        assert!(matches!(f_delta_sum(&sp, 3, 1.5), Err(Error::IndexOutOfRange { .. })));
        assert!(f_delta_sum(&sp, 0, 0.0).is_err());
    }

    #[test]
    fn block_of_one_is_the_plain_term() {
        let sp = spec(&[1.0, 2.0, 2.0, 5.0]);
        let s = 3.0;
        let j = f_kn(&sp, 3, 0, 0, &Jet::var(5.0, 0), s).unwrap();
        assert!((j.value() - f_delta_sum(&sp, 3, s).unwrap()).abs() < 1e-14);
        let b = sp.blocks()[2];
        assert!((f_delta_block(&sp, &b, s).unwrap() - f_delta_sum(&sp, 3, s).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn jet_derivative_matches_central_difference() {
        let sp = spec(&[1.0, 2.0, 2.0, 5.0]);
        let h = 1e-5;
        for &s in &[1.5, 3.0, 4.5] {
            let jet = f_kn(&sp, 1, 1, 0, &Jet::var(2.0, 1), s).unwrap();
            let plus = f_kn(&sp, 1, 1, 0, &Jet::var(2.0 + h, 1), s).unwrap().value();
            let minus = f_kn(&sp, 1, 1, 0, &Jet::var(2.0 - h, 1), s).unwrap().value();
            let fd = (plus - minus) / (2.0 * h);
            assert!((jet.derivative(1) - fd).abs() <= 1e-6 * fd.abs(), "s={s}");
        }
    }

    #[test]
    fn f_kn_argument_checks() {
        let sp = spec(&[1.0, 2.0, 2.0, 2.0, 5.0]);
        assert!(matches!(
            f_kn(&sp, 1, 2, 0, &Jet::var(2.0, 1), 1.5),
            Err(Error::JetOrder { have: 1, need: 2 })
        ));
        assert!(f_kn(&sp, 1, 2, 2, &Jet::var(2.0, 0), 1.5).is_ok());
        assert!(f_kn(&sp, 1, 1, 0, &Jet::var(2.0, 1), 1.5).is_err());
        assert!(f_kn(&sp, 1, 2, 3, &Jet::var(2.0, 3), 1.5).is_err());
    }

    #[test]
    fn last_f_kn_has_a_single_term() {
        // n = N − 1: only l = N − 1 survives, with e_0 = 1 and C(N−1, N−1) = 1.
        let sp = spec(&[3.0, 3.0, 3.0]);
        let s = 2.0;
        let x = 3.0;
        let j = f_kn(&sp, 0, 2, 2, &Jet::var(x, 0), s).unwrap();
        let expect = (x - s) * s.powi(-2) * (2.0 * x / s);
        assert!((j.value() - expect).abs() < 1e-15);
    }
}
