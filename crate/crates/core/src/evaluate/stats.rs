use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

/// Two-tailed paired t-test. Returns 1 when all differences are zero and 0
/// when the differences are constant but non-zero.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InsufficientData("paired t-test needs at least two pairs".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if diffs.iter().all(|d| *d == 0.0) {
        return Ok(1.0);
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        log::warn!("paired differences have zero variance; reporting p = 0");
        return Ok(0.0);
    }
    let t = mean / (var / nf).sqrt();
    let dist =
        StudentsT::new(0.0, 1.0, nf - 1.0).map_err(|e| Error::InvalidArgument(format!("t distribution: {e}")))?;
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}
