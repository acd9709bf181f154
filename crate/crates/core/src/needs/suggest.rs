//! Probe queries and suggestion sources.

use std::collections::BTreeMap;
use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use crate::taxonomy::{Venue, VenueTable};
use crate::{tsv, Error, Result, VenueId};

/// Suggestions returned per query are capped at this many.
pub const MAX_SUGGESTIONS: usize = 10;

/// Anything that maps a query to a ranked list of full suggestion strings.
pub trait SuggestionSource {
    fn suggest(&self, query: &str) -> Result<Vec<String>>;
}

impl<S: SuggestionSource + ?Sized> SuggestionSource for &S {
    fn suggest(&self, query: &str) -> Result<Vec<String>> {
        (**self).suggest(query)
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// `name + " " + city`, whitespace-normalized and lowercased. Venues
/// without a name or city are skipped with a warning.
pub fn probe_query(venue: &Venue) -> Option<String> {
    if venue.name.trim().is_empty() || venue.city.trim().is_empty() {
        log::warn!("venue {} lacks a name or city, no probe query", venue.venue_id);
        return None;
    }
    Some(normalize(&format!("{} {}", venue.name, venue.city)))
}

pub fn probe_queries<'a, I>(venues: I) -> Vec<(VenueId, String)>
where
    I: IntoIterator<Item = &'a Venue>,
{
    venues
        .into_iter()
        .filter_map(|v| probe_query(v).map(|q| (v.venue_id.clone(), q)))
        .collect()
}

/// Keeps the completions among the first [`MAX_SUGGESTIONS`] suggestions,
/// i.e. those extending `probe` by at least one more word, and returns what
/// follows the probe. Reformulations and the probe itself are dropped.
pub fn completion_suffixes(probe: &str, suggestions: &[String]) -> Vec<String> {
    let probe = normalize(probe);
    let prefix = format!("{probe} ");
    suggestions
        .iter()
        .take(MAX_SUGGESTIONS)
        .filter_map(|s| {
            let s = normalize(s);
            s.strip_prefix(&prefix)
                .map(str::trim)
                .filter(|rest| !rest.is_empty())
                .map(str::to_owned)
        })
        .collect()
}

/// Queries `source` for `probe`, retrying transport failures up to
/// `max_retries` times. A query that keeps failing yields no suffixes.
pub fn fetch_suggestions<S: SuggestionSource + ?Sized>(source: &S, probe: &str, max_retries: usize) -> Vec<String> {
    let mut attempt = 0;
    loop {
        match source.suggest(probe) {
            Ok(list) => return completion_suffixes(probe, &list),
            Err(e) if attempt < max_retries => {
                attempt += 1;
                log::debug!("retrying {probe:?} after error: {e}");
            }
            Err(e) => {
                log::warn!("giving up on {probe:?} after {} attempt(s): {e}", attempt + 1);
                return Vec::new();
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FetchOptions {
    pub max_retries: usize,
    /// Queries per second; `None` or non-positive means unthrottled.
    pub rate_limit: Option<f64>,
}

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions {
            max_retries: 2,
            rate_limit: None,
        }
    }
}

/// Runs every probe through [`fetch_suggestions`], spacing requests to honor
/// the rate limit.
pub fn collect_suggestions<S: SuggestionSource + ?Sized>(
    source: &S,
    probes: &[(VenueId, String)],
    opts: FetchOptions,
) -> Vec<(VenueId, Vec<String>)> {
    let interval = opts
        .rate_limit
        .filter(|q| *q > 0.0)
        .map(|q| Duration::from_secs_f64(1.0 / q));
    let mut next_slot = Instant::now();
    probes
        .iter()
        .map(|(venue, probe)| {
            if let Some(iv) = interval {
                let now = Instant::now();
                if next_slot > now {
                    thread::sleep(next_slot - now);
                }
                next_slot = Instant::now() + iv;
            }
            (venue.clone(), fetch_suggestions(source, probe, opts.max_retries))
        })
        .collect()
}

/// Suggestions replayed from a `query \t suggestion` snapshot; lines for one
/// query keep their file order as the ranking.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OfflineFileSource {
    entries: BTreeMap<String, Vec<String>>,
    order: Vec<(String, String)>,
}

impl OfflineFileSource {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut src = OfflineFileSource::default();
        for row in tsv::rows(text, 2, file)? {
            src.push(row.fields[0], row.fields[1]);
        }
        Ok(src)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&tsv::read(path)?, &tsv::file_name(path))
    }

    pub fn push(&mut self, query: &str, suggestion: &str) {
        self.entries
            .entry(normalize(query))
            .or_default()
            .push(suggestion.to_owned());
        self.order.push((query.to_owned(), suggestion.to_owned()));
    }

    pub fn to_tsv(&self) -> Result<String> {
        let mut out = String::new();
        for (q, s) in &self.order {
            out.push_str(&tsv::join(&[q, s])?);
            out.push('\n');
        }
        Ok(out)
    }
}

impl SuggestionSource for OfflineFileSource {
    fn suggest(&self, query: &str) -> Result<Vec<String>> {
        Ok(self.entries.get(&normalize(query)).cloned().unwrap_or_default())
    }
}

/// Builds probes for the given venues (in order) and looks them up.
pub fn probe_venues<'a, S, I>(source: &S, venues: I, opts: FetchOptions) -> Vec<(VenueId, Vec<String>)>
where
    S: SuggestionSource + ?Sized,
    I: IntoIterator<Item = &'a Venue>,
{
    collect_suggestions(source, &probe_queries(venues), opts)
}

/// Resolves a list of venue ids against the table, failing on unknown ids.
pub fn venues_by_id<'a>(table: &'a VenueTable, ids: &[VenueId]) -> Result<Vec<&'a Venue>> {
    ids.iter()
        .map(|id| table.get(id).ok_or_else(|| Error::UnknownVenue(id.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn venue(name: &str, city: &str) -> Venue {
        Venue {
            venue_id: "v".into(),
            name: name.into(),
            city: city.into(),
            activity: "a".into(),
            country: "SG".into(),
        }
    }

    #[test]
    fn probe_format() {
        assert_eq!(
            probe_query(&venue("Marina Bay  Sands", "Singapore")).as_deref(),
            Some("marina bay sands singapore")
        );
        assert_eq!(probe_query(&venue("Marina Bay Sands", " ")), None);
        let venues: Vec<Venue> = (0..200).map(|i| venue(&format!("v{i}"), "x")).collect();
        assert_eq!(probe_queries(&venues).len(), 200);
    }

    #[test]
    fn suffix_extraction() {
        let probe = "marina bay sands singapore";
        let got = completion_suffixes(
            probe,
            &[
                "marina bay sands singapore".into(),
                "Marina Bay Sands Singapore Opening Hours".into(),
                "marina bay sands hotel".into(),
                "marina bay sands singaporean".into(),
            ],
        );
        assert_eq!(got, vec!["opening hours"]);
        let many: Vec<String> = (0..15).map(|i| format!("{probe} s{i}")).collect();
        assert_eq!(completion_suffixes(probe, &many).len(), MAX_SUGGESTIONS);
    }

    struct Flaky {
        failures: Cell<usize>,
    }

    impl SuggestionSource for Flaky {
        fn suggest(&self, query: &str) -> Result<Vec<String>> {
            if self.failures.get() > 0 {
                self.failures.set(self.failures.get() - 1);
                return Err(Error::Source("timeout".into()));
            }
            Ok(vec![format!("{query} map")])
        }
    }

    #[test]
    fn retries_then_gives_up() {
        let ok = Flaky { failures: Cell::new(2) };
        assert_eq!(fetch_suggestions(&ok, "x y", 2), vec!["map"]);
        let bad = Flaky { failures: Cell::new(3) };
        assert!(fetch_suggestions(&bad, "x y", 2).is_empty());
    }

    #[test]
    fn snapshot_round_trip() {
        let text = "a b\ta b map\na b\ta b hours\nc d\tc d menu\n";
        let src = OfflineFileSource::parse(text, "s").unwrap();
        assert_eq!(src.to_tsv().unwrap(), text);
        assert_eq!(fetch_suggestions(&src, "A  B", 0), vec!["map", "hours"]);
        assert!(fetch_suggestions(&src, "zz", 0).is_empty());
    }

    #[test]
    fn rate_limit_spaces_requests() {
        let src = OfflineFileSource::default();
        let probes: Vec<(VenueId, String)> = (0..3).map(|i| (VenueId::from("v"), format!("q{i}"))).collect();
        let start = Instant::now();
        collect_suggestions(
            &src,
            &probes,
            FetchOptions {
                max_retries: 0,
                rate_limit: Some(50.0),
            },
        );
        assert!(start.elapsed() >= Duration::from_millis(40));
    }
}
