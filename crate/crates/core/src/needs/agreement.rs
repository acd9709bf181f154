//! Fleiss' kappa over synonym groupings.
//!
//! Every unordered pair of terms in the shared universe is an item, and each
//! assessor rates it "same group" or "different". Pairs nobody grouped are
//! unanimous "different" ratings, so only co-grouped pairs are enumerated.

use std::collections::{BTreeMap, BTreeSet};

use super::synonyms::AssessorGrouping;
use crate::{Error, Result};

pub fn fleiss_kappa(assessors: &[AssessorGrouping]) -> Result<f64> {
    let raters = assessors.len();
    if raters < 2 {
        return Err(Error::InsufficientData(
            "Fleiss' kappa needs at least two assessors".into(),
        ));
    }
    let universe: BTreeSet<&str> = assessors
        .iter()
        .flat_map(|a| a.groups.iter().flatten())
        .map(String::as_str)
        .collect();
    let t = universe.len();
    if t < 2 {
        return Err(Error::InsufficientData("fewer than two terms to compare".into()));
    }

    let mut same: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for a in assessors {
        let mut pairs = BTreeSet::new();
        for group in &a.groups {
            let members: BTreeSet<&str> = group.iter().map(String::as_str).collect();
            let members: Vec<&str> = members.into_iter().collect();
            for (i, u) in members.iter().enumerate() {
                for v in &members[i + 1..] {
                    pairs.insert((*u, *v));
                }
            }
        }
        for p in pairs {
            *same.entry(p).or_default() += 1;
        }
    }

    let n = raters as f64;
    let items = (t * (t - 1) / 2) as f64;
    let agreement = |s: f64| (s * s + (n - s) * (n - s) - n) / (n * (n - 1.0));

    let explicit = same.len() as f64;
    let mut p_sum = items - explicit; // unanimous "different" pairs agree fully
    let mut same_ratings = 0.0;
    for &s in same.values() {
        let s = s as f64;
        p_sum += agreement(s);
        same_ratings += s;
    }
    let p_bar = p_sum / items;
    let p_same = same_ratings / (items * n);
    let p_e = p_same * p_same + (1.0 - p_same) * (1.0 - p_same);
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}
