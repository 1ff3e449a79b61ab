//! Monte Carlo reproduction of the radial eigenvalue histogram and its
//! comparison with the analytic profile `Ψ₁`.

use std::ops::Range;

use crate::density::{radial_mass, SingularSpectrum};
use crate::eigen::{annulus_check, eigenvalues};
use crate::sampling::{model_matrix, RngStream};
use crate::{Error, Result};

/// Values this close (relatively) below a bin edge are counted in the bin that
/// starts at the edge, so that unit-modulus eigenvalues computed as
/// `1 − 1e−16` land with the exact ones.
const EDGE_SNAP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Moduli beyond the last edge.
    pub out_of_range: u64,
    pub n_samples: u64,
    pub n_matrix: usize,
    /// Samples dropped because the eigensolver hit its iteration cap.
    pub discarded: u64,
    /// Retained samples with a modulus outside the singular-value annulus.
    pub annulus_violations: u64,
    pub r_min: f64,
    pub r_max: f64,
}

impl RadialHistogram {
    /// Empty histogram with `bins` bins of width `width` starting at 0.
    pub fn new(width: f64, bins: usize, n_matrix: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || bins == 0 {
            return Err(Error::InvalidInput(format!("bad binning: width {width}, {bins} bins")));
        }
        Ok(Self {
            edges: (0..=bins).map(|k| k as f64 * width).collect(),
            counts: vec![0; bins],
            out_of_range: 0,
            n_samples: 0,
            n_matrix,
            discarded: 0,
            annulus_violations: 0,
            r_min: f64::INFINITY,
            r_max: 0.0,
        })
    }

    /// Binning used by [`run_mc`]: cover `[0, √g_max + 2w]`.
    pub fn for_spectrum(spec: &SingularSpectrum, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!("bin width must be positive, got {width}")));
        }
        let top = spec.max().sqrt() + 2.0 * width;
        Self::new(width, (top / width).ceil() as usize, spec.n())
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Index of the bin holding `r`, or `None` past the last edge.
    pub fn bin_index(&self, r: f64) -> Option<usize> {
        let x = r / self.width();
        let mut k = x.floor();
        if (k + 1.0 - x) <= EDGE_SNAP * (k + 1.0) {
            k += 1.0;
        }
        let k = k.max(0.0) as usize;
        (k < self.bins()).then_some(k)
    }

    pub fn record(&mut self, r: f64) {
        match self.bin_index(r) {
            Some(k) => self.counts[k] += 1,
            None => self.out_of_range += 1,
        }
        self.r_min = self.r_min.min(r);
        self.r_max = self.r_max.max(r);
    }

    /// Sum in another histogram over the same bins.
    pub fn merge(&mut self, other: &Self) {
        debug_assert_eq!(self.edges, other.edges);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.out_of_range += other.out_of_range;
        self.n_samples += other.n_samples;
        self.discarded += other.discarded;
        self.annulus_violations += other.annulus_violations;
        self.r_min = self.r_min.min(other.r_min);
        self.r_max = self.r_max.max(other.r_max);
    }

    /// Samples whose eigenvalues were binned.
    pub fn retained(&self) -> u64 {
        self.n_samples - self.discarded
    }

    /// Every eigenvalue of every retained sample is accounted for.
    pub fn is_conserved(&self) -> bool {
        self.total() + self.out_of_range == self.retained() * self.n_matrix as u64
    }
}

fn run_range(spec: &SingularSpectrum, samples: Range<u64>, seed: u64, template: &RadialHistogram) -> Result<RadialHistogram> {
    let mut hist = template.clone();
    for index in samples {
        hist.n_samples += 1;
        let mut rng = RngStream::new(seed, index);
        let a = match model_matrix(spec, &mut rng) {
            Ok(a) => a,
            Err(Error::SingularDraw) => {
                hist.discarded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let eig = eigenvalues(&a);
        if !eig.converged {
            hist.discarded += 1;
            continue;
        }
        if !annulus_check(&eig.values, spec) {
            hist.annulus_violations += 1;
        }
        for z in &eig.values {
            hist.record(z.norm());
        }
    }
    Ok(hist)
}

/// Sample `n_samples` matrices `U√G` and histogram the eigenvalue moduli.
///
/// Sample `k` always draws from stream `k` of `seed`, so the result does not
/// depend on `workers`.
pub fn run_mc(spec: &SingularSpectrum, n_samples: u64, bin_width: f64, seed: u64, workers: usize) -> Result<RadialHistogram> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidInput("need at least one worker".into()));
    }
    let template = RadialHistogram::for_spectrum(spec, bin_width)?;
    let workers = (workers as u64).min(n_samples);
    let chunk = n_samples.div_ceil(workers);
    let ranges: Vec<Range<u64>> =
        (0..workers).map(|w| (w * chunk).min(n_samples)..((w + 1) * chunk).min(n_samples)).collect();

    let partials: Vec<Result<RadialHistogram>> = if ranges.len() == 1 {
        vec![run_range(spec, 0..n_samples, seed, &template)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .iter()
                .cloned()
                .map(|r| {
                    let template = &template;
                    scope.spawn(move || run_range(spec, r, seed, template))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
        })
    };

    let mut hist = template;
    for part in partials {
        hist.merge(&part?);
    }
    Ok(hist)
}

/// Expected count per bin for `n_samples` retained samples, including the
/// atom at the origin and the ring atom of a flat spectrum.
pub fn expected_histogram(spec: &SingularSpectrum, edges: &[f64], n_samples: u64) -> Result<Vec<f64>> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::InvalidInput("bin edges must be strictly increasing".into()));
    }
    let total = n_samples as f64 * spec.n() as f64;
    let mut out = edges
        .windows(2)
        .map(|w| Ok(total * radial_mass(spec, w[0], w[1])?))
        .collect::<Result<Vec<f64>>>()?;
    let mut place_atom = |r: f64, weight: f64| {
        if let Some(k) = edges.windows(2).position(|w| r >= w[0] && r < w[1]) {
            out[k] += total * weight;
        }
    };
    if spec.atom_at_origin() > 0.0 {
        place_atom(0.0, spec.atom_at_origin());
    }
    if let Some(g) = spec.ring_atom() {
        place_atom(g.sqrt(), 1.0);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinComparison {
    pub lo: f64,
    pub hi: f64,
    pub observed: u64,
    pub expected: f64,
    /// `(observed − expected)/√expected`; `0` for an empty bin with nothing
    /// expected, infinite when counts appear where none are expected.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub bins: Vec<BinComparison>,
    pub chi_square: f64,
    pub dof: usize,
    pub tv_distance: f64,
    pub max_abs_z: f64,
    pub discarded: u64,
}

impl ComparisonReport {
    /// Share of bins with nonzero expectation whose `|z|` is at most `bound`.
    pub fn fraction_within(&self, bound: f64) -> f64 {
        let support: Vec<&BinComparison> = self.bins.iter().filter(|b| b.expected > 0.0).collect();
        if support.is_empty() {
            return 1.0;
        }
        support.iter().filter(|b| b.z.abs() <= bound).count() as f64 / support.len() as f64
    }
}

fn z_score(observed: f64, expected: f64) -> f64 {
    if expected > 0.0 {
        (observed - expected) / expected.sqrt()
    } else if observed == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Pearson statistic after merging adjacent bins until each group expects
/// at least 5 counts; a short tail joins the last full group.
fn chi_square(observed: &[u64], expected: &[f64]) -> (f64, usize) {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc.0 += o as f64;
        acc.1 += e;
        if acc.1 >= 5.0 {
            groups.push(acc);
            acc = (0.0, 0.0);
        }
    }
    match groups.last_mut() {
        Some(last) => {
            last.0 += acc.0;
            last.1 += acc.1;
        }
        None => groups.push(acc),
    }
    let chi = groups
        .iter()
        .map(|&(o, e)| match e > 0.0 {
            true => (o - e) * (o - e) / e,
            false if o == 0.0 => 0.0,
            false => f64::INFINITY,
        })
        .sum();
    (chi, groups.len().saturating_sub(1))
}

pub fn compare(hist: &RadialHistogram, expected: &[f64]) -> Result<ComparisonReport> {
    if expected.len() != hist.bins() {
        return Err(Error::InvalidInput(format!(
            "{} expected values for {} bins",
            expected.len(),
            hist.bins()
        )));
    }
    let obs_total = hist.total() as f64;
    if obs_total == 0.0 {
        return Err(Error::EmptyHistogram);
    }
    let exp_total: f64 = expected.iter().sum();

    let bins: Vec<BinComparison> = hist
        .edges
        .windows(2)
        .zip(hist.counts.iter().zip(expected))
        .map(|(w, (&o, &e))| BinComparison { lo: w[0], hi: w[1], observed: o, expected: e, z: z_score(o as f64, e) })
        .collect();
    let max_abs_z = bins.iter().map(|b| b.z.abs()).fold(0.0, f64::max);
    let tv_distance = 0.5
        * bins
            .iter()
            .map(|b| {
                let p = if exp_total > 0.0 { b.expected / exp_total } else { 0.0 };
                (b.observed as f64 / obs_total - p).abs()
            })
            .sum::<f64>();
    let (chi_square, dof) = chi_square(&hist.counts, expected);
    Ok(ComparisonReport { bins, chi_square, dof, tv_distance, max_abs_z, discarded: hist.discarded })
}
