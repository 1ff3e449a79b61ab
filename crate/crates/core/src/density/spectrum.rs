use std::fmt;

use crate::{Error, Result};

/// Default relative tolerance below which neighbouring `g` values are treated
/// as one degenerate block.
pub const CLUSTER_TOLERANCE: f64 = 1e-9;

/// A run of (numerically) equal values in the sorted spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    /// First index of the run in the sorted spectrum.
    pub start: usize,
    /// Number of entries; the degeneracy order used by the block formula is `len - 1`.
    pub len: usize,
    /// Common value used for every member.
    pub value: f64,
}

impl Block {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// The diagonal matrix `G`: squared singular values of `A`, sorted ascending and
/// grouped into blocks of equal values.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    g: Vec<f64>,
    blocks: Vec<Block>,
    tau: f64,
}

impl SingularSpectrum {
    pub fn new(values: &[f64]) -> Result<Self> {
        Self::with_tolerance(values, CLUSTER_TOLERANCE)
    }

    /// Values whose consecutive gaps are at most `tau·max(1, g)` are chained
    /// into one block. A block that starts at exactly zero keeps the value 0;
    /// any other block takes the mean of its members.
    pub fn with_tolerance(values: &[f64], tau: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("spectrum must contain at least one value".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "spectrum values must be finite and nonnegative, got {v}"
            )));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("bad cluster tolerance {tau}")));
        }
        let mut g: Vec<f64> = values.iter().map(|&v| if v == 0.0 { 0.0 } else { v }).collect();
        g.sort_by(|a, b| a.total_cmp(b));

        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=g.len() {
            let split = i == g.len() || g[i] - g[i - 1] > tau * g[i].max(1.0);
            if split {
                let members = &g[start..i];
                let value = if members[0] == 0.0 {
                    0.0
                } else {
                    members.iter().sum::<f64>() / members.len() as f64
                };
                blocks.push(Block { start, len: i - start, value });
                start = i;
            }
        }
        Ok(SingularSpectrum { g, blocks, tau })
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    /// Sorted values as given.
    pub fn values(&self) -> &[f64] {
        &self.g
    }

    /// Sorted values with every entry replaced by its block value.
    pub fn snapped(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.g.len()];
        for b in &self.blocks {
            out[b.indices()].fill(b.value);
        }
        out
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn tolerance(&self) -> f64 {
        self.tau
    }

    pub fn is_distinct(&self) -> bool {
        self.blocks.len() == self.g.len()
    }

    /// Block containing sorted index `i`.
    pub fn block_of(&self, i: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.indices().contains(&i))
    }

    pub fn min(&self) -> f64 {
        self.blocks[0].value
    }

    pub fn max(&self) -> f64 {
        self.blocks[self.blocks.len() - 1].value
    }

    pub fn zero_count(&self) -> usize {
        match self.blocks[0] {
            b if b.value == 0.0 => b.len,
            _ => 0,
        }
    }

    /// Weight of the eigenvalue atom at `z = 0` (one zero eigenvalue per zero `g`).
    pub fn atom_at_origin(&self) -> f64 {
        self.zero_count() as f64 / self.n() as f64
    }

    /// When every `g` equals the same positive value, `A` is a multiple of a
    /// Haar unitary and all eigenvalues sit on the circle `|z|² = g`. Returns
    /// that `g`; the atom then carries the full weight.
    pub fn ring_atom(&self) -> Option<f64> {
        match self.blocks.as_slice() {
            [only] if only.value > 0.0 => Some(only.value),
            _ => None,
        }
    }

    /// Weight not carried by the continuous part.
    pub fn atom_weight(&self) -> f64 {
        if self.ring_atom().is_some() {
            1.0
        } else {
            self.atom_at_origin()
        }
    }

    /// Spectrum of `c·G`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let v: Vec<f64> = self.g.iter().map(|g| g * c).collect();
        Self::with_tolerance(&v, self.tau)
    }

    /// Block values where the density can have a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.value).collect()
    }
}

impl fmt::Display for SingularSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.g.iter().map(|v| format!("{v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parse the plain-text spectrum format: one value per line, or an `re im`
/// pair whose modulus is taken. Blank lines and `#` comments are skipped.
pub fn parse_spectrum_text(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::InvalidInput(format!("line {}: {what}: {raw:?}", lineno + 1));
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad("not a number")))
            .collect::<Result<_>>()?;
        let g = match fields.as_slice() {
            [x] if *x >= 0.0 => *x,
            [_] => return Err(bad("negative value")),
            [re, im] => re.hypot(*im),
            _ => return Err(bad("expected one value or an `re im` pair")),
        };
        if !g.is_finite() {
            return Err(bad("non-finite value"));
        }
        out.push(g);
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("spectrum file has no values".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_groups() {
        let s = SingularSpectrum::new(&[5.0, 2.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 2.0, 5.0]);
        assert_eq!(
            s.blocks(),
            &[
                Block { start: 0, len: 1, value: 1.0 },
                Block { start: 1, len: 2, value: 2.0 },
                Block { start: 3, len: 1, value: 5.0 },
            ]
        );
        assert!(!s.is_distinct());
        assert_eq!(s.block_of(2).unwrap().start, 1);
    }

    #[test]
    fn near_equal_values_cluster() {
        let s = SingularSpectrum::new(&[3.0, 3.0 + 1e-12, 4.0]).unwrap();
        assert_eq!(s.blocks().len(), 2);
        assert_eq!(s.blocks()[0].len, 2);
        let s = SingularSpectrum::new(&[3.0, 3.0 + 1e-6, 4.0]).unwrap();
        assert!(s.is_distinct());
    }

    #[test]
    fn atoms() {
        let s = SingularSpectrum::new(&[0.0, 1.0]).unwrap();
        assert_eq!(s.atom_at_origin(), 0.5);
        assert_eq!(s.ring_atom(), None);
        let s = SingularSpectrum::new(&[0.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.atom_at_origin(), 0.6);
        assert_eq!(s.blocks()[0].value, 0.0);
        let s = SingularSpectrum::new(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.ring_atom(), Some(2.0));
        assert_eq!(s.atom_weight(), 1.0);
        assert_eq!(SingularSpectrum::new(&[7.0]).unwrap().ring_atom(), Some(7.0));
    }

    #[test]
    fn rejects_invalid() {
        assert!(SingularSpectrum::new(&[]).is_err());
        assert!(SingularSpectrum::new(&[1.0, -1.0]).is_err());
        assert!(SingularSpectrum::new(&[f64::NAN]).is_err());
    }

    #[test]
    fn parses_text_format() {
        let v = parse_spectrum_text("# G\n1\n\n4.0  # comment\n3 4\n").unwrap();
        assert_eq!(v, vec![1.0, 4.0, 5.0]);
        assert!(parse_spectrum_text("-1\n").is_err());
        assert!(parse_spectrum_text("1 2 3\n").is_err());
        assert!(parse_spectrum_text("abc\n").is_err());
        assert!(parse_spectrum_text("\n# nothing\n").is_err());
    }
}
