use std::collections::BTreeMap;

use crate::{Error, NeedId, Result};

/// Highest judgment grade.
pub const MAX_GRADE: u8 = 4;

fn gain(grade: u8) -> f64 {
    f64::from((1u32 << grade) - 1)
}

fn discount(rank: usize) -> f64 {
    ((rank + 1) as f64).log2()
}

/// NDCG@k with exponential gain `2^g − 1`. Unjudged needs count as grade 0;
/// the ideal ordering is taken over the judged grades. Returns 0 when no
/// judged need has a positive grade.
pub fn ndcg_at_k(ranking: &[NeedId], grades: &BTreeMap<NeedId, u8>, k: usize) -> Result<f64> {
    if ranking.is_empty() {
        return Err(Error::InvalidArgument("empty ranking".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let dcg: f64 = ranking
        .iter()
        .take(k)
        .enumerate()
        .map(|(r, i)| gain(grades.get(i).copied().unwrap_or(0)) / discount(r + 1))
        .sum();
    let mut ideal: Vec<u8> = grades.values().copied().collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(r, g)| gain(*g) / discount(r + 1))
        .sum();
    if idcg == 0.0 {
        return Ok(0.0);
    }
    Ok(dcg / idcg)
}
