use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// One verifier trial: `margin >= 0` exactly when the inequality holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub model: String,
    pub n: usize,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub verifier: String,
    pub trials: usize,
    pub violations: usize,
    pub min_margin: f64,
}

impl VerificationSummary {
    pub fn from_rows(verifier: &str, rows: &[TrialRow]) -> Self {
        VerificationSummary {
            verifier: verifier.to_owned(),
            trials: rows.len(),
            violations: rows.iter().filter(|r| !r.holds).count(),
            min_margin: rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        }
    }
}

pub fn write_rows<W: Write>(rows: &[TrialRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
