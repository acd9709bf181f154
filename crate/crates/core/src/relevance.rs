//! Relevance of information needs given an activity, `P(i|a)`, estimated
//! from relative need frequencies, optionally smoothed with the parent
//! activity for second-level categories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::needs::{NeedLexicon, TermCounts};
use crate::taxonomy::{ActivityTaxonomy, Level};
use crate::{tsv, ActivityId, Distribution, Error, NeedId, Result};

/// Need counts `n(i, a)` per activity. Level-1 rows include the counts of
/// their children.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedCounts {
    native: BTreeMap<ActivityId, BTreeMap<NeedId, u64>>,
    counts: BTreeMap<ActivityId, BTreeMap<NeedId, u64>>,
    totals: BTreeMap<ActivityId, u64>,
    beta: u64,
}

impl NeedCounts {
    /// Builds counts from per-activity observations, rolling second-level
    /// rows up into their parents.
    pub fn from_native(
        native: BTreeMap<ActivityId, BTreeMap<NeedId, u64>>,
        taxonomy: &ActivityTaxonomy,
    ) -> Result<Self> {
        let mut counts: BTreeMap<ActivityId, BTreeMap<NeedId, u64>> = BTreeMap::new();
        for (act, row) in &native {
            let level = taxonomy
                .level_of(act)
                .ok_or_else(|| Error::UnknownCategory(act.to_string()))?;
            let mut targets = vec![act.clone()];
            if level == Level::Second {
                targets.extend(taxonomy.parent(act).cloned());
            }
            for target in targets {
                let dst = counts.entry(target).or_default();
                for (need, n) in row {
                    *dst.entry(need.clone()).or_default() += n;
                }
            }
        }
        for row in counts.values_mut() {
            row.retain(|_, n| *n > 0);
        }
        let totals: BTreeMap<ActivityId, u64> = counts.iter().map(|(a, row)| (a.clone(), row.values().sum())).collect();
        let beta = taxonomy
            .at_level(Level::Second)
            .map(|a| totals.get(a).copied().unwrap_or(0))
            .sum();
        Ok(NeedCounts {
            native,
            counts,
            totals,
            beta,
        })
    }

    /// Maps every term count through the lexicon.
    pub fn from_term_counts(terms: &TermCounts, lexicon: &NeedLexicon, taxonomy: &ActivityTaxonomy) -> Result<Self> {
        let mut native: BTreeMap<ActivityId, BTreeMap<NeedId, u64>> = BTreeMap::new();
        for (act, row) in terms {
            for (term, n) in row {
                let need = lexicon
                    .need_of(term)
                    .ok_or_else(|| Error::InvalidArgument(format!("term `{term}` is not in the lexicon")))?;
                *native.entry(act.clone()).or_default().entry(need.clone()).or_default() += n;
            }
        }
        Self::from_native(native, taxonomy)
    }

    pub fn count(&self, a: &ActivityId, i: &NeedId) -> u64 {
        self.counts.get(a).and_then(|r| r.get(i)).copied().unwrap_or(0)
    }

    /// `Σ_i n(i, a)`.
    pub fn activity_total(&self, a: &ActivityId) -> u64 {
        self.totals.get(a).copied().unwrap_or(0)
    }

    /// Total count over all second-level activities.
    pub fn beta(&self) -> u64 {
        self.beta
    }

    pub fn row(&self, a: &ActivityId) -> Option<&BTreeMap<NeedId, u64>> {
        self.counts.get(a)
    }

    /// Observations as loaded, before roll-up.
    pub fn native(&self) -> &BTreeMap<ActivityId, BTreeMap<NeedId, u64>> {
        &self.native
    }

    /// Global need frequencies over the native observations.
    pub fn global_counts(&self) -> BTreeMap<NeedId, u64> {
        let mut out = BTreeMap::new();
        for row in self.native.values() {
            for (need, n) in row {
                *out.entry(need.clone()).or_default() += n;
            }
        }
        out
    }

    pub fn needs(&self) -> BTreeSet<NeedId> {
        self.counts.values().flat_map(|r| r.keys().cloned()).collect()
    }

    /// `category_id \t need_id \t count` over the native observations.
    pub fn to_tsv(&self) -> Result<String> {
        let mut out = String::new();
        for (act, row) in &self.native {
            for (need, n) in row {
                out.push_str(&tsv::join(&[act.as_str(), need.as_str(), &n.to_string()])?);
                out.push('\n');
            }
        }
        Ok(out)
    }

    pub fn parse(text: &str, file: &str, taxonomy: &ActivityTaxonomy) -> Result<Self> {
        let mut native: BTreeMap<ActivityId, BTreeMap<NeedId, u64>> = BTreeMap::new();
        for row in tsv::rows(text, 3, file)? {
            let n = row.fields[2]
                .parse::<u64>()
                .map_err(|_| Error::malformed(file, row.line, format!("bad count `{}`", row.fields[2])))?;
            *native
                .entry(row.fields[0].into())
                .or_default()
                .entry(row.fields[1].into())
                .or_default() += n;
        }
        Self::from_native(native, taxonomy)
    }

    pub fn load(path: &Path, taxonomy: &ActivityTaxonomy) -> Result<Self> {
        Self::parse(&tsv::read(path)?, &tsv::file_name(path), taxonomy)
    }
}

/// `P(i|a) = n(i,a) / Σ_i' n(i',a)`; needs with zero count are omitted.
pub fn need_relevance(counts: &NeedCounts, a: &ActivityId) -> Result<Distribution<NeedId>> {
    match counts.row(a) {
        Some(row) if counts.activity_total(a) > 0 => Ok(Distribution::from_counts(
            row.iter().map(|(i, n)| (i.clone(), *n as f64)),
        )),
        _ => Err(Error::NoNeeds(a.to_string())),
    }
}

/// How second-level relevance is interpolated with its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Smoothing {
    #[default]
    Off,
    /// `λ = β / (n + β)`.
    Inverse,
    /// `λ = n / (n + β)`, conventional Dirichlet weighting.
    Standard,
}

impl FromStr for Smoothing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(Smoothing::Off),
            "inverse" | "paper" => Ok(Smoothing::Inverse),
            "standard" => Ok(Smoothing::Standard),
            other => Err(Error::InvalidArgument(format!(
                "smoothing `{other}` is not one of off|inverse|standard"
            ))),
        }
    }
}

impl std::fmt::Display for Smoothing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Smoothing::Off => "off",
            Smoothing::Inverse => "inverse",
            Smoothing::Standard => "standard",
        })
    }
}

/// Interpolation weight on the second-level estimate for an activity with
/// `n` observations. [`Smoothing::Off`] keeps the raw estimate.
pub fn lambda(n: u64, beta: u64, smoothing: Smoothing) -> f64 {
    let (n, beta) = (n as f64, beta as f64);
    match smoothing {
        Smoothing::Off => 1.0,
        Smoothing::Inverse => beta / (n + beta),
        Smoothing::Standard => n / (n + beta),
    }
}

/// `P_H(i|a2) = λ P(i|a2) + (1 − λ) P(i|parent(a2))`. An activity without
/// observations gets its parent's distribution outright.
pub fn smoothed_relevance(
    counts: &NeedCounts,
    a_l2: &ActivityId,
    taxonomy: &ActivityTaxonomy,
    smoothing: Smoothing,
) -> Result<Distribution<NeedId>> {
    if taxonomy.level_of(a_l2) != Some(Level::Second) {
        return Err(Error::InvalidArgument(format!(
            "`{a_l2}` is not a second-level activity"
        )));
    }
    let parent = taxonomy.parent(a_l2).expect("level-2 activities have parents");
    let parent_dist = need_relevance(counts, parent)?;
    let n = counts.activity_total(a_l2);
    if n == 0 {
        return Ok(parent_dist);
    }
    let child = need_relevance(counts, a_l2)?;
    let lam = lambda(n, counts.beta(), smoothing);
    let mut out = Distribution::new();
    for (i, p) in child.iter() {
        out.add(i.clone(), lam * p);
    }
    if lam < 1.0 {
        for (i, p) in parent_dist.iter() {
            out.add(i.clone(), (1.0 - lam) * p);
        }
    }
    Ok(out)
}

/// Relevance lookup shared by the ranking models: raw distributions, or
/// smoothed ones for second-level activities when smoothing is on.
#[derive(Debug, Clone)]
pub struct RelevanceModel {
    counts: NeedCounts,
    taxonomy: ActivityTaxonomy,
    smoothing: Smoothing,
}

impl RelevanceModel {
    pub fn new(counts: NeedCounts, taxonomy: ActivityTaxonomy, smoothing: Smoothing) -> Self {
        RelevanceModel {
            counts,
            taxonomy,
            smoothing,
        }
    }

    pub fn counts(&self) -> &NeedCounts {
        &self.counts
    }

    pub fn taxonomy(&self) -> &ActivityTaxonomy {
        &self.taxonomy
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    /// `P(·|a)`, failing when nothing is known about `a`.
    pub fn distribution(&self, a: &ActivityId) -> Result<Distribution<NeedId>> {
        if !self.taxonomy.contains(a) {
            return Err(Error::UnknownActivity(a.to_string()));
        }
        if self.smoothing != Smoothing::Off && self.taxonomy.level_of(a) == Some(Level::Second) {
            return smoothed_relevance(&self.counts, a, &self.taxonomy, self.smoothing);
        }
        need_relevance(&self.counts, a)
    }

    /// Like [`RelevanceModel::distribution`], but activities without any
    /// observations yield an empty distribution.
    pub fn distribution_or_empty(&self, a: &ActivityId) -> Result<Distribution<NeedId>> {
        match self.distribution(a) {
            Err(Error::NoNeeds(_)) => Ok(Distribution::new()),
            other => other,
        }
    }

    /// `level \t category_id \t need_id \t probability` rows, most relevant
    /// first within each activity.
    pub fn to_tsv(&self) -> Result<String> {
        let mut out = String::new();
        for (act, info) in self.taxonomy.iter() {
            let dist = self.distribution_or_empty(act)?;
            for (need, p) in dist.ranked() {
                let _ = writeln!(out, "{}\t{act}\t{need}\t{p:.6}", info.level.number());
            }
        }
        Ok(out)
    }
}

/// `|top-k(predicted) ∩ truth| / |truth|`; `k = None` uses the whole list.
pub fn recall_at_k(predicted: &[NeedId], truth: &BTreeSet<NeedId>, k: Option<usize>) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("empty ground truth".into()));
    }
    let k = k.unwrap_or(predicted.len());
    let hits = predicted
        .iter()
        .take(k)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|i| truth.contains(*i))
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Jaccard coefficient of the top-`k` need sets of two distributions.
pub fn category_jaccard(a: &Distribution<NeedId>, b: &Distribution<NeedId>, k: usize) -> f64 {
    let ta: BTreeSet<NeedId> = a.top_k(k).into_iter().collect();
    let tb: BTreeSet<NeedId> = b.top_k(k).into_iter().collect();
    let union = ta.union(&tb).count();
    if union == 0 {
        return 0.0;
    }
    ta.intersection(&tb).count() as f64 / union as f64
}
