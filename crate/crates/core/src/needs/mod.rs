//! Mining canonical information needs from query suggestions.
//!
//! The pipeline runs: probe queries per venue ([`suggest`]), suffix
//! cleansing ([`cleanse`]), per-activity aggregation, synonym graph
//! construction and density-based clustering ([`synonyms`]), and finally
//! canonical labels ([`lexicon`]). [`agreement`] measures how consistently
//! assessors grouped synonyms.

pub mod agreement;
pub mod cleanse;
pub mod lexicon;
pub mod suggest;
pub mod synonyms;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::taxonomy::{ActivityTaxonomy, Level};
use crate::{tsv, ActivityId, Error, Result, VenueId};

pub use agreement::fleiss_kappa;
pub use cleanse::Cleanser;
pub use lexicon::{canonicalize, NeedLexicon};
pub use suggest::{fetch_suggestions, probe_queries, OfflineFileSource, SuggestionSource};
pub use synonyms::{build_synonym_graph, cluster_synonyms, AssessorGrouping, SynonymGraph};

/// Number of most frequent terms per category that go through synonym
/// normalization.
pub const DEFAULT_TOP_TERMS: usize = 100;

/// One cleansed suggestion suffix observed for a venue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuggestionRecord {
    pub venue_id: VenueId,
    pub activity: ActivityId,
    pub suffix: String,
}

/// Per-activity term counts `n(term, activity)`.
pub type TermCounts = BTreeMap<ActivityId, BTreeMap<String, u64>>;

pub fn aggregate_terms(records: &[SuggestionRecord]) -> TermCounts {
    let mut out = TermCounts::new();
    for r in records {
        *out.entry(r.activity.clone())
            .or_default()
            .entry(r.suffix.clone())
            .or_default() += 1;
    }
    out
}

/// Total count of every term across activities.
pub fn term_totals(counts: &TermCounts) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for row in counts.values() {
        for (term, n) in row {
            *out.entry(term.clone()).or_default() += n;
        }
    }
    out
}

/// Union over activities of each activity's `n` most frequent terms
/// (ties by term text).
pub fn top_terms(counts: &TermCounts, n: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for row in counts.values() {
        let mut terms: Vec<(&String, &u64)> = row.iter().collect();
        terms.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        out.extend(terms.into_iter().take(n).map(|(t, _)| t.clone()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategorySummary {
    pub activity: ActivityId,
    pub total: u64,
    pub unique: usize,
}

/// Suffix totals and distinct terms per top-level category, most frequent
/// first.
pub fn summarize_by_top_level(counts: &TermCounts, taxonomy: &ActivityTaxonomy) -> Vec<CategorySummary> {
    let mut per_top: BTreeMap<ActivityId, (u64, BTreeSet<&String>)> = BTreeMap::new();
    for (act, row) in counts {
        let Some(top) = taxonomy.at(act, Level::Top) else {
            continue;
        };
        let entry = per_top.entry(top).or_default();
        for (term, n) in row {
            entry.0 += n;
            entry.1.insert(term);
        }
    }
    let mut out: Vec<CategorySummary> = per_top
        .into_iter()
        .map(|(activity, (total, terms))| CategorySummary {
            activity,
            total,
            unique: terms.len(),
        })
        .collect();
    out.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.activity.cmp(&b.activity)));
    out
}

pub fn records_to_tsv(records: &[SuggestionRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&tsv::join(&[r.venue_id.as_str(), r.activity.as_str(), &r.suffix])?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses `suggestions.tsv`: `venue_id \t category_id \t suffix`.
pub fn parse_records(text: &str, file: &str) -> Result<Vec<SuggestionRecord>> {
    let mut out = Vec::new();
    for row in tsv::rows(text, 3, file)? {
        let suffix = row.fields[2].trim();
        if suffix.is_empty() {
            return Err(Error::malformed(file, row.line, "empty suffix"));
        }
        out.push(SuggestionRecord {
            venue_id: row.fields[0].into(),
            activity: row.fields[1].into(),
            suffix: suffix.to_owned(),
        });
    }
    Ok(out)
}

/// `category_id \t term \t count` rows, grouped by category.
pub fn term_counts_to_tsv(counts: &TermCounts) -> Result<String> {
    let mut out = String::new();
    for (act, row) in counts {
        for (term, n) in row {
            tsv::check_field(term)?;
            let _ = writeln!(out, "{act}\t{term}\t{n}");
        }
    }
    Ok(out)
}

pub fn parse_term_counts(text: &str, file: &str) -> Result<TermCounts> {
    let mut out = TermCounts::new();
    for row in tsv::rows(text, 3, file)? {
        let n = row.fields[2]
            .parse::<u64>()
            .map_err(|_| Error::malformed(file, row.line, format!("bad count `{}`", row.fields[2])))?;
        *out.entry(row.fields[0].into())
            .or_default()
            .entry(row.fields[1].to_owned())
            .or_default() += n;
    }
    Ok(out)
}

pub fn load_term_counts(path: &Path) -> Result<TermCounts> {
    parse_term_counts(&tsv::read(path)?, &tsv::file_name(path))
}
