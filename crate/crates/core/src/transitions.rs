//! First-order Markov model over activities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::sessions::Session;
use crate::taxonomy::{ActivityTaxonomy, Level};
use crate::{tsv, ActivityId, Distribution, Error, Result};

/// Raw transition counts `n(from -> to)`. Counts from disjoint session sets
/// can be merged in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionCounts {
    counts: BTreeMap<ActivityId, BTreeMap<ActivityId, u64>>,
}

impl TransitionCounts {
    pub fn add(&mut self, from: ActivityId, to: ActivityId, n: u64) {
        *self.counts.entry(from).or_default().entry(to).or_default() += n;
    }

    /// Counts the adjacent pairs of one session, lifted to `level`.
    pub fn add_session(&mut self, session: &Session, taxonomy: &ActivityTaxonomy, level: Level) -> Result<()> {
        let lifted = lift(session, taxonomy, level)?;
        for pair in lifted.windows(2) {
            self.add(pair[0].clone(), pair[1].clone(), 1);
        }
        Ok(())
    }

    pub fn merge(&mut self, other: TransitionCounts) {
        for (from, row) in other.counts {
            for (to, n) in row {
                self.add(from.clone(), to, n);
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().flat_map(|r| r.values()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ActivityId, &ActivityId, u64)> {
        self.counts
            .iter()
            .flat_map(|(f, row)| row.iter().map(move |(t, n)| (f, t, *n)))
    }
}

/// Session activities mapped onto `level`.
pub fn lift(session: &Session, taxonomy: &ActivityTaxonomy, level: Level) -> Result<Vec<ActivityId>> {
    session
        .activities()
        .map(|a| match taxonomy.at(a, level) {
            Some(id) => Ok(id),
            None if taxonomy.contains(a) => Err(Error::InvalidArgument(format!(
                "activity `{a}` cannot be expressed at level {}",
                level.number()
            ))),
            None => Err(Error::UnknownActivity(a.to_string())),
        })
        .collect()
}

/// Maximum-likelihood transition probabilities at one hierarchy level, with
/// the marginal next-activity distribution as backoff for unseen sources.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    level: Level,
    activities: BTreeSet<ActivityId>,
    counts: TransitionCounts,
    row_totals: BTreeMap<ActivityId, u64>,
    marginal: Distribution<ActivityId>,
}

impl TransitionModel {
    pub fn from_counts(counts: TransitionCounts, taxonomy: &ActivityTaxonomy, level: Level) -> Result<Self> {
        let activities: BTreeSet<ActivityId> = taxonomy.at_level(level).cloned().collect();
        for (from, to, _) in counts.iter() {
            for a in [from, to] {
                if !activities.contains(a) {
                    return Err(Error::UnknownActivity(a.to_string()));
                }
            }
        }
        if counts.total() == 0 {
            return Err(Error::InsufficientData("no transitions to fit".into()));
        }
        let row_totals = counts
            .counts
            .iter()
            .map(|(f, row)| (f.clone(), row.values().sum()))
            .collect();
        let mut incoming: BTreeMap<ActivityId, f64> = BTreeMap::new();
        for (_, to, n) in counts.iter() {
            *incoming.entry(to.clone()).or_default() += n as f64;
        }
        Ok(TransitionModel {
            level,
            activities,
            counts,
            row_totals,
            marginal: Distribution::from_counts(incoming),
        })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn activities(&self) -> &BTreeSet<ActivityId> {
        &self.activities
    }

    pub fn count(&self, from: &ActivityId, to: &ActivityId) -> u64 {
        self.counts
            .counts
            .get(from)
            .and_then(|r| r.get(to))
            .copied()
            .unwrap_or(0)
    }

    pub fn row_total(&self, from: &ActivityId) -> u64 {
        self.row_totals.get(from).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &TransitionCounts {
        &self.counts
    }

    pub fn marginal(&self) -> &Distribution<ActivityId> {
        &self.marginal
    }

    /// `P(to | from)` as the MLE row, without backoff.
    pub fn probability(&self, from: &ActivityId, to: &ActivityId) -> f64 {
        match self.row_total(from) {
            0 => 0.0,
            total => self.count(from, to) as f64 / total as f64,
        }
    }

    /// `P(· | last)`: the MLE row when `last` has been observed as a source,
    /// otherwise the marginal next-activity distribution.
    pub fn next_activity_dist(&self, last: &ActivityId) -> Result<Distribution<ActivityId>> {
        if !self.activities.contains(last) {
            return Err(Error::UnknownActivity(last.to_string()));
        }
        match self.counts.counts.get(last) {
            Some(row) => Ok(Distribution::from_counts(
                row.iter().map(|(to, n)| (to.clone(), *n as f64)),
            )),
            None => Ok(self.marginal.clone()),
        }
    }

    /// `level \t from \t to \t count \t probability` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (from, to, n) in self.counts.iter() {
            let p = self.probability(from, to);
            let _ = writeln!(out, "{}\t{from}\t{to}\t{n}\t{p:.6}", self.level.number());
        }
        out
    }
}

pub fn fit_transitions(train: &[Session], taxonomy: &ActivityTaxonomy, level: Level) -> Result<TransitionModel> {
    if train.is_empty() {
        return Err(Error::InsufficientData("empty training set".into()));
    }
    let mut counts = TransitionCounts::default();
    for s in train {
        counts.add_session(s, taxonomy, level)?;
    }
    TransitionModel::from_counts(counts, taxonomy, level)
}

/// Fraction of adjacent test pairs whose successor is among the `k` most
/// probable successors of its source (ties by activity id).
pub fn precision_at_k(model: &TransitionModel, test: &[Session], taxonomy: &ActivityTaxonomy, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut cache: BTreeMap<ActivityId, Vec<ActivityId>> = BTreeMap::new();
    let (mut hits, mut total) = (0usize, 0usize);
    for s in test {
        let lifted = lift(s, taxonomy, model.level)?;
        for pair in lifted.windows(2) {
            if !cache.contains_key(&pair[0]) {
                let top = model.next_activity_dist(&pair[0])?.top_k(k);
                cache.insert(pair[0].clone(), top);
            }
            total += 1;
            if cache[&pair[0]].contains(&pair[1]) {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::InsufficientData("no test transitions".into()));
    }
    Ok(hits as f64 / total as f64)
}

/// Reads a `transitions.tsv` export back into one model per level present.
/// Probabilities are recomputed from the counts.
pub fn parse_transitions(
    text: &str,
    file: &str,
    taxonomy: &ActivityTaxonomy,
) -> Result<BTreeMap<Level, TransitionModel>> {
    let mut per_level: BTreeMap<Level, TransitionCounts> = BTreeMap::new();
    for row in tsv::rows(text, 5, file)? {
        let f = &row.fields;
        let level = f[0]
            .parse::<u8>()
            .ok()
            .and_then(Level::from_number)
            .ok_or_else(|| Error::malformed(file, row.line, format!("bad level `{}`", f[0])))?;
        let n = f[3]
            .parse::<u64>()
            .map_err(|_| Error::malformed(file, row.line, format!("bad count `{}`", f[3])))?;
        f[4].parse::<f64>()
            .map_err(|_| Error::malformed(file, row.line, format!("bad probability `{}`", f[4])))?;
        per_level.entry(level).or_default().add(f[1].into(), f[2].into(), n);
    }
    per_level
        .into_iter()
        .map(|(level, counts)| Ok((level, TransitionModel::from_counts(counts, taxonomy, level)?)))
        .collect()
}

pub fn load_transitions(path: &Path, taxonomy: &ActivityTaxonomy) -> Result<BTreeMap<Level, TransitionModel>> {
    parse_transitions(&tsv::read(path)?, &tsv::file_name(path), taxonomy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sessions::SessionEvent;
    use chrono::{TimeZone, Utc};

    pub(crate) fn taxonomy() -> ActivityTaxonomy {
        ActivityTaxonomy::parse(
            "T\t\t1\tTop\nU\t\t1\tOther\nA\tT\t2\tA\nB\tT\t2\tB\nC\tU\t2\tC\nD\tU\t2\tD\n",
            "t",
        )
        .unwrap()
    }

    fn session(acts: &[&str]) -> Session {
        Session {
            user: "u".into(),
            events: acts
                .iter()
                .enumerate()
                .map(|(i, a)| SessionEvent {
                    ts: Utc.timestamp_opt(i as i64 * 60, 0).unwrap(),
                    venue: "v".into(),
                    activity: (*a).into(),
                })
                .collect(),
        }
    }

    #[test]
    fn mle_rows() {
        let t = taxonomy();
        let m = fit_transitions(
            &[session(&["A", "B"]), session(&["A", "B"]), session(&["A", "C"])],
            &t,
            Level::Second,
        )
        .unwrap();
        let row = m.next_activity_dist(&"A".into()).unwrap();
        assert_eq!(row.get(&"B".into()), 2.0 / 3.0);
        assert_eq!(row.get(&"C".into()), 1.0 / 3.0);
        assert!((row.sum() - 1.0).abs() < 1e-12);

        let single = fit_transitions(&[session(&["A", "B"])], &t, Level::Second).unwrap();
        assert_eq!(single.probability(&"A".into(), &"B".into()), 1.0);
    }

    #[test]
    fn backoff_and_unknown() {
        let t = taxonomy();
        let m = fit_transitions(&[session(&["A", "B", "B"]), session(&["A", "C"])], &t, Level::Second).unwrap();
        // D never appears as a source
        let d = m.next_activity_dist(&"D".into()).unwrap();
        assert_eq!(&d, m.marginal());
        assert_eq!(d.get(&"B".into()), 2.0 / 3.0);
        assert!(matches!(
            m.next_activity_dist(&"Z".into()),
            Err(Error::UnknownActivity(_))
        ));
        assert!(m.next_activity_dist(&"T".into()).is_err());
    }

    #[test]
    fn lifts_to_parent_and_counts_self_loops() {
        let t = taxonomy();
        let m = fit_transitions(&[session(&["A", "B", "C"])], &t, Level::Top).unwrap();
        assert_eq!(m.count(&"T".into(), &"T".into()), 1);
        assert_eq!(m.count(&"T".into(), &"U".into()), 1);
        assert_eq!(m.probability(&"T".into(), &"T".into()), 0.5);
    }

    #[test]
    fn empty_inputs() {
        let t = taxonomy();
        assert!(fit_transitions(&[], &t, Level::Second).is_err());
        assert!(fit_transitions(&[session(&["A"])], &t, Level::Second).is_err());
    }

    #[test]
    fn precision() {
        let t = taxonomy();
        let m = fit_transitions(&[session(&["A", "B", "C", "D"])], &t, Level::Second).unwrap();
        assert_eq!(precision_at_k(&m, &[session(&["A", "B", "C"])], &t, 1).unwrap(), 1.0);
        // D -> A: D backs off to the marginal {B, C, D} where A is absent
        assert_eq!(precision_at_k(&m, &[session(&["D", "A"])], &t, 5).unwrap(), 0.0);
        assert!(precision_at_k(&m, &[session(&["A"])], &t, 1).is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let t = taxonomy();
        let m = fit_transitions(&[session(&["A", "B", "A", "C"])], &t, Level::Second).unwrap();
        let text = m.to_tsv();
        assert!(text.contains("2\tA\tB\t1\t0.500000\n"));
        let back = parse_transitions(&text, "x", &t).unwrap();
        assert_eq!(back[&Level::Second], m);
    }
}
