//! Mean eigenvalue density `Ψ(|z|²)` of `A = U√G`.
//!
//! For `s = |z|²` strictly between block values, `N·Ψ(s)` is the sum of the
//! block terms (`F_Δ` or its degenerate replacement) over the blocks lying
//! above `s`. The terms of *all* blocks sum to zero, so the same value is
//! minus the sum over the blocks below `s`; we evaluate whichever side has the
//! smaller absolute mass, which avoids the cancellation that otherwise sets in
//! when the spectrum spans several decades.
//!
//! Zero entries of `G` contribute an atom at the origin of weight `M/N`; a
//! spectrum that is a single positive block puts all its mass on the circle
//! `|z|² = g`. Both are reported outside the continuous part.

mod special;
mod spectrum;
mod terms;

use std::cell::RefCell;

pub use special::{psi_rank_one, psi_truncated, RankOneProfile, TruncatedProfile};
pub use spectrum::{parse_spectrum_text, Block, SingularSpectrum, CLUSTER_TOLERANCE};
pub use terms::{f_delta_block, f_delta_quad, f_delta_sum, f_kn, f_minus};

use crate::quad::{self, QuadOptions};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityValue {
    /// Continuous part `Ψ(s)`.
    pub continuous: f64,
    /// Weight of the point mass at the origin, `#{g_i = 0}/N`.
    pub atom_at_origin: f64,
}

/// Which one-sided limit to take when `s` coincides with a block value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Side {
    /// Mean of both one-sided limits.
    #[default]
    Average,
    /// Limit from below (`s → g⁻`).
    Below,
    /// Limit from above (`s → g⁺`).
    Above,
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("|z|² must be positive and finite, got {s}")))
    }
}

/// `N·Ψ(s)` where blocks flagged in `above` are the ones with value above `s`.
/// Each term carries its absolute mass; the side with less mass is summed.
fn continuous_from_terms(terms: &[(f64, f64)], above: &[bool]) -> f64 {
    let mut up = CompensatedSum::new();
    let mut down = CompensatedSum::new();
    let (mut up_mass, mut down_mass) = (0.0, 0.0);
    for (&(t, mass), &a) in terms.iter().zip(above) {
        if a {
            up.add(t);
            up_mass += mass;
        } else {
            down.add(t);
            down_mass += mass;
        }
    }
    if up_mass <= down_mass {
        up.value()
    } else {
        -down.value()
    }
}

pub fn psi_side(spec: &SingularSpectrum, s: f64, side: Side) -> Result<DensityValue> {
    check_s(s)?;
    let atom_at_origin = spec.atom_at_origin();
    let blocks = spec.blocks();
    let tol = |v: f64| spec.tolerance() * v.max(1.0);
    let at_boundary: Vec<bool> = blocks.iter().map(|b| (b.value - s).abs() <= tol(b.value)).collect();
    let strictly_above: Vec<bool> =
        blocks.iter().zip(&at_boundary).map(|(b, &at)| !at && b.value > s).collect();

    let outside = s > spec.max() + tol(spec.max()) || s < spec.min() - tol(spec.min());
    if outside || spec.ring_atom().is_some() {
        return Ok(DensityValue { continuous: 0.0, atom_at_origin });
    }

    let snapped = spec.snapped();
    let terms = blocks
        .iter()
        .map(|b| terms::block_term(spec, &snapped, b, s))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let n = spec.n() as f64;

    let from_below: Vec<bool> = strictly_above.iter().zip(&at_boundary).map(|(&a, &b)| a || b).collect();
    let continuous = if !at_boundary.iter().any(|&b| b) {
        continuous_from_terms(&terms, &strictly_above) / n
    } else {
        match side {
            Side::Below => continuous_from_terms(&terms, &from_below) / n,
            Side::Above => continuous_from_terms(&terms, &strictly_above) / n,
            Side::Average => {
                0.5 * (continuous_from_terms(&terms, &from_below) + continuous_from_terms(&terms, &strictly_above))
                    / n
            }
        }
    };
    Ok(DensityValue { continuous, atom_at_origin })
}

/// `Ψ(s)`; at a block value the two one-sided limits are averaged.
pub fn psi(spec: &SingularSpectrum, s: f64) -> Result<DensityValue> {
    psi_side(spec, s, Side::Average)
}

/// `(1/N) Σ_i F_σ(g_i)` with `F_+ = F_− + F_Δ` for `s > g_i`, evaluated exactly
/// as the sum is written. With that sign convention the result is `−Ψ(s)`;
/// kept as a diagnostic, [`psi`] is the canonical evaluator.
pub fn psi_sum_form(spec: &SingularSpectrum, s: f64) -> Result<f64> {
    check_s(s)?;
    if !spec.is_distinct() {
        return Err(Error::Degenerate);
    }
    let mut acc = CompensatedSum::new();
    for (i, &g) in spec.values().iter().enumerate() {
        acc.add(f_minus(spec, i, s)?);
        if s > g {
            acc.add(f_delta_sum(spec, i, s)?);
        }
    }
    Ok(acc.value() / spec.n() as f64)
}

/// Radial density `Ψ₁(r) = 2r·Ψ(r²)`, normalized so `∫Ψ₁ dr` is the
/// continuous mass.
pub fn psi_radial(spec: &SingularSpectrum, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive and finite, got {r}")));
    }
    Ok(2.0 * r * psi(spec, r * r)?.continuous)
}

pub(crate) fn density_quad_options() -> QuadOptions {
    QuadOptions { abs_tol: 1e-11, rel_tol: 1e-12, max_subdivisions: 10_000 }
}

/// Integrate `f` and surface the first evaluation error, if any.
pub(crate) fn integrate_fallible<F>(f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure = RefCell::new(None);
    let res = quad::integrate_with_breaks(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        breaks,
        opts,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(res?.value)
}

/// Continuous mass `∫Ψ(s) ds` over `[min g, max g]`, split at every block
/// value. Together with [`SingularSpectrum::atom_weight`] it should give 1.
pub fn normalization(spec: &SingularSpectrum) -> Result<f64> {
    if spec.ring_atom().is_some() {
        return Ok(0.0);
    }
    integrate_fallible(
        |s| Ok(psi(spec, s)?.continuous),
        spec.min(),
        spec.max(),
        &spec.breakpoints(),
        density_quad_options(),
    )
}

/// `∫Ψ₁(r) dr` over `[lo, hi]`, split at every `√g` inside the interval.
pub fn radial_mass(spec: &SingularSpectrum, lo: f64, hi: f64) -> Result<f64> {
    let lo = lo.max(spec.min().sqrt());
    let hi = hi.min(spec.max().sqrt());
    if hi <= lo || spec.ring_atom().is_some() {
        return Ok(0.0);
    }
    let breaks: Vec<f64> = spec.breakpoints().iter().map(|g| g.sqrt()).collect();
    let lo = if lo == 0.0 { f64::MIN_POSITIVE } else { lo };
    integrate_fallible(|r| psi_radial(spec, r), lo, hi, &breaks, density_quad_options())
}
