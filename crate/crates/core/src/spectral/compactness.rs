//! Finite-data surrogate for the compactness dichotomy.
//!
//! The verdict is a heuristic read of how fixed singular values move across
//! nested truncations; it certifies nothing about the infinite operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::family::TruncationFamily;
use crate::spectral::svd::singular_values;

/// Singular-value indices tracked across truncations.
pub const PROBES: [usize; 3] = [0, 5, 10];
/// Threshold for "large" singular values.
pub const LARGE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CompactConsistent,
    NoncompactWitness,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub level: u32,
    pub dims: (usize, usize),
    /// `s_k` for each probe index.
    pub probes: Vec<f64>,
    /// Number of singular values `≥ 0.5`.
    pub large_count: usize,
    /// Truncation gap bound at this level.
    pub gap_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactnessReport {
    pub verdict: Verdict,
    pub probe_indices: Vec<usize>,
    pub evidence: Vec<EvidenceRow>,
    /// Envelope bound on each probe singular value of the full operator.
    pub envelopes: Vec<f64>,
}

impl CompactnessReport {
    /// `level,s_0,s_5,s_10` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N");
        for k in &self.probe_indices {
            out.push_str(&format!(",s_{k}"));
        }
        out.push('\n');
        for row in &self.evidence {
            out.push_str(&row.level.to_string());
            for s in &row.probes {
                out.push_str(&format!(",{s:e}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn compactness_witness(family: &dyn TruncationFamily, levels: &[u32]) -> Result<CompactnessReport> {
    if levels.len() < 3 || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("need at least three strictly increasing truncation levels".into()));
    }
    let mut evidence = Vec::with_capacity(levels.len());
    for &level in levels {
        let m = family.matrix(level)?;
        let s = singular_values(&m)?;
        evidence.push(EvidenceRow {
            level,
            dims: m.shape(),
            probes: PROBES.iter().map(|&k| s.get(k).copied().unwrap_or(0.0)).collect(),
            large_count: s.iter().filter(|&&x| x >= LARGE).count(),
            gap_bound: family.truncation_gap(level),
        });
    }
    let envelopes: Vec<f64> = PROBES.iter().map(|&k| family.envelope(k)).collect();

    let counts_grow = evidence.windows(2).all(|w| w[1].large_count >= w[0].large_count)
        && evidence.last().unwrap().large_count > evidence[0].large_count;
    let persistent_probe = (0..PROBES.len()).any(|p| {
        evidence.windows(2).all(|w| w[1].probes[p] >= w[0].probes[p])
            && evidence.iter().all(|row| row.probes[p] >= LARGE)
    });

    let scale = evidence.iter().map(|r| r.probes[0]).fold(0.0, f64::max).max(1.0);
    let slack = 1e-12 * scale;
    let stabilizes = (0..PROBES.len())
        .all(|p| evidence.windows(2).all(|w| (w[1].probes[p] - w[0].probes[p]).abs() <= w[0].gap_bound + slack));
    let under_envelope = (0..PROBES.len())
        .all(|p| envelopes[p].is_finite() && evidence.last().unwrap().probes[p] <= envelopes[p] + slack);

    let verdict = if counts_grow && persistent_probe {
        Verdict::NoncompactWitness
    } else if stabilizes && under_envelope {
        Verdict::CompactConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(CompactnessReport { verdict, probe_indices: PROBES.to_vec(), evidence, envelopes })
}
