//! Activity taxonomy, venue table and check-in log.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use crate::tsv;
use crate::{ActivityId, Error, Result, UserId, VenueId};

/// Countries whose venues are kept by the default English-language filter.
pub const ENGLISH_SPEAKING: [&str; 6] = ["US", "GB", "IE", "AU", "NZ", "ZA"];

/// Level in the two-level category hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Top = 1,
    Second = 2,
}

impl Level {
    pub fn from_number(n: u8) -> Option<Level> {
        match n {
            1 => Some(Level::Top),
            2 => Some(Level::Second),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activity {
    pub name: String,
    pub level: Level,
    pub parent: Option<ActivityId>,
}

/// Two-level category tree. Every level-2 activity has a level-1 parent;
/// level-1 activities have none.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivityTaxonomy {
    activities: BTreeMap<ActivityId, Activity>,
}

impl ActivityTaxonomy {
    /// Builds a taxonomy from `(id, parent, level, name)` rows, validating the
    /// tree shape.
    pub fn from_rows<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ActivityId, Option<ActivityId>, Level, String)>,
    {
        let mut activities = BTreeMap::new();
        for (id, parent, level, name) in rows {
            if name.trim().is_empty() {
                return Err(Error::InvalidArgument(format!("category `{id}` has an empty name")));
            }
            if activities.contains_key(&id) {
                return Err(Error::DuplicateId(id.to_string()));
            }
            activities.insert(id, Activity { name, level, parent });
        }
        for (id, act) in &activities {
            match (act.level, &act.parent) {
                (Level::Top, None) => {}
                (Level::Top, Some(p)) => {
                    return Err(Error::InvalidArgument(format!(
                        "level-1 category `{id}` must not have a parent (got `{p}`)"
                    )))
                }
                (Level::Second, None) => {
                    return Err(Error::OrphanParent {
                        child: id.to_string(),
                        parent: String::new(),
                    })
                }
                (Level::Second, Some(p)) => match activities.get(p) {
                    Some(parent) if parent.level == Level::Top => {}
                    _ => {
                        return Err(Error::OrphanParent {
                            child: id.to_string(),
                            parent: p.to_string(),
                        })
                    }
                },
            }
        }
        Ok(ActivityTaxonomy { activities })
    }

    pub fn get(&self, id: &ActivityId) -> Option<&Activity> {
        self.activities.get(id)
    }

    pub fn contains(&self, id: &ActivityId) -> bool {
        self.activities.contains_key(id)
    }

    pub fn level_of(&self, id: &ActivityId) -> Option<Level> {
        self.activities.get(id).map(|a| a.level)
    }

    pub fn parent(&self, id: &ActivityId) -> Option<&ActivityId> {
        self.activities.get(id).and_then(|a| a.parent.as_ref())
    }

    pub fn name(&self, id: &ActivityId) -> Option<&str> {
        self.activities.get(id).map(|a| a.name.as_str())
    }

    /// Activities at `level`, in id order.
    pub fn at_level(&self, level: Level) -> impl Iterator<Item = &ActivityId> {
        self.activities
            .iter()
            .filter(move |(_, a)| a.level == level)
            .map(|(id, _)| id)
    }

    pub fn children<'a>(&'a self, parent: &'a ActivityId) -> impl Iterator<Item = &'a ActivityId> {
        self.activities
            .iter()
            .filter(move |(_, a)| a.parent.as_ref() == Some(parent))
            .map(|(id, _)| id)
    }

    /// Maps `id` onto `level`: level-2 activities lift to their parent when
    /// `level` is [`Level::Top`]. Returns `None` for unknown ids or when a
    /// level-1 activity is asked for at level 2.
    pub fn at(&self, id: &ActivityId, level: Level) -> Option<ActivityId> {
        let act = self.activities.get(id)?;
        match (act.level, level) {
            (l, want) if l == want => Some(id.clone()),
            (Level::Second, Level::Top) => act.parent.clone(),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ActivityId, &Activity)> {
        self.activities.iter()
    }

    pub fn to_tsv(&self) -> Result<String> {
        let mut out = String::new();
        for (id, a) in &self.activities {
            let parent = a.parent.as_ref().map(|p| p.as_str()).unwrap_or("");
            let level = a.level.number().to_string();
            out.push_str(&tsv::join(&[id.as_str(), parent, &level, &a.name])?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for row in tsv::rows(text, 4, file)? {
            let f = &row.fields;
            if f[0].is_empty() {
                return Err(Error::malformed(file, row.line, "empty category_id"));
            }
            let level = f[2]
                .parse::<u8>()
                .ok()
                .and_then(Level::from_number)
                .ok_or_else(|| Error::malformed(file, row.line, format!("level `{}` outside {{1,2}}", f[2])))?;
            let parent = (!f[1].is_empty()).then(|| ActivityId::from(f[1]));
            rows.push((ActivityId::from(f[0]), parent, level, f[3].to_owned()));
        }
        Self::from_rows(rows)
    }
}

/// Reads `taxonomy.tsv`: `category_id \t parent_id \t level \t name`.
pub fn load_taxonomy(path: &Path) -> Result<ActivityTaxonomy> {
    ActivityTaxonomy::parse(&tsv::read(path)?, &tsv::file_name(path))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Venue {
    pub venue_id: VenueId,
    pub name: String,
    pub city: String,
    pub activity: ActivityId,
    pub country: String,
}

pub type VenueTable = BTreeMap<VenueId, Venue>;

pub fn parse_venues(
    text: &str,
    file: &str,
    taxonomy: &ActivityTaxonomy,
    countries: Option<&BTreeSet<String>>,
) -> Result<VenueTable> {
    let mut table = VenueTable::new();
    for row in tsv::rows(text, 5, file)? {
        let f = &row.fields;
        if f[0].is_empty() {
            return Err(Error::malformed(file, row.line, "empty venue_id"));
        }
        let activity = ActivityId::from(f[3]);
        if !taxonomy.contains(&activity) {
            return Err(Error::UnknownCategory(activity.to_string()));
        }
        let venue = Venue {
            venue_id: VenueId::from(f[0]),
            name: f[1].to_owned(),
            city: f[2].to_owned(),
            activity,
            country: f[4].to_owned(),
        };
        if table.contains_key(&venue.venue_id) {
            return Err(Error::DuplicateId(venue.venue_id.to_string()));
        }
        if countries.is_some_and(|c| !c.contains(&venue.country)) {
            continue;
        }
        table.insert(venue.venue_id.clone(), venue);
    }
    Ok(table)
}

/// Reads `venues.tsv`: `venue_id \t name \t city \t category_id \t country`.
/// When `countries` is given, only venues from those countries are kept.
pub fn load_venues(
    path: &Path,
    taxonomy: &ActivityTaxonomy,
    countries: Option<&BTreeSet<String>>,
) -> Result<VenueTable> {
    parse_venues(&tsv::read(path)?, &tsv::file_name(path), taxonomy, countries)
}

pub fn venues_to_tsv(venues: &VenueTable) -> Result<String> {
    let mut out = String::new();
    for v in venues.values() {
        out.push_str(&tsv::join(&[
            v.venue_id.as_str(),
            &v.name,
            &v.city,
            v.activity.as_str(),
            &v.country,
        ])?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckIn {
    pub user_id: UserId,
    pub venue_id: VenueId,
    pub timestamp: DateTime<Utc>,
    pub tz_offset: i32,
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s).ok().map(|t| t.with_timezone(&Utc))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_checkins(text: &str, file: &str) -> Result<Vec<CheckIn>> {
    let mut out = Vec::new();
    for row in tsv::rows(text, 4, file)? {
        let f = &row.fields;
        let timestamp = parse_timestamp(f[2])
            .ok_or_else(|| Error::malformed(file, row.line, format!("unparseable timestamp `{}`", f[2])))?;
        let tz_offset = f[3]
            .parse::<i32>()
            .map_err(|_| Error::malformed(file, row.line, format!("bad tz offset `{}`", f[3])))?;
        out.push(CheckIn {
            user_id: UserId::from(f[0]),
            venue_id: VenueId::from(f[1]),
            timestamp,
            tz_offset,
        });
    }
    Ok(out)
}

/// Reads `checkins.tsv`: `user_id \t venue_id \t timestamp \t tz_offset_minutes`.
pub fn load_checkins(path: &Path) -> Result<Vec<CheckIn>> {
    parse_checkins(&tsv::read(path)?, &tsv::file_name(path))
}

pub fn checkins_to_tsv(log: &[CheckIn]) -> Result<String> {
    let mut out = String::new();
    for c in log {
        let ts = format_timestamp(&c.timestamp);
        let tz = c.tz_offset.to_string();
        out.push_str(&tsv::join(&[c.user_id.as_str(), c.venue_id.as_str(), &ts, &tz])?);
        out.push('\n');
    }
    Ok(out)
}

/// The `k` most visited venues of every level-2 activity, by descending
/// check-in count with ties broken by venue id. Check-ins at venues absent
/// from `venues` are ignored.
pub fn top_venues_per_category(
    taxonomy: &ActivityTaxonomy,
    venues: &VenueTable,
    checkins: &[CheckIn],
    k: usize,
) -> BTreeMap<ActivityId, Vec<(VenueId, usize)>> {
    let mut counts: HashMap<&VenueId, usize> = HashMap::new();
    for c in checkins {
        if venues.contains_key(&c.venue_id) {
            *counts.entry(&c.venue_id).or_default() += 1;
        }
    }
    let mut per_cat: BTreeMap<ActivityId, Vec<(VenueId, usize)>> = taxonomy
        .at_level(Level::Second)
        .map(|a| (a.clone(), Vec::new()))
        .collect();
    for v in venues.values() {
        if let Some(list) = per_cat.get_mut(&v.activity) {
            let n = counts.get(&v.venue_id).copied().unwrap_or(0);
            list.push((v.venue_id.clone(), n));
        }
    }
    for list in per_cat.values_mut() {
        list.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        list.truncate(k);
    }
    per_cat
}

pub fn top_venues_to_tsv(top: &BTreeMap<ActivityId, Vec<(VenueId, usize)>>) -> String {
    let mut out = String::new();
    for (cat, list) in top {
        for (rank, (venue, n)) in list.iter().enumerate() {
            let _ = writeln!(out, "{cat}\t{}\t{venue}\t{n}", rank + 1);
        }
    }
    out
}

/// Parses the `category_id \t rank \t venue_id \t count` listing written by
/// [`top_venues_to_tsv`].
pub fn parse_top_venues(text: &str, file: &str) -> Result<BTreeMap<ActivityId, Vec<(VenueId, usize)>>> {
    let mut out: BTreeMap<ActivityId, Vec<(VenueId, usize)>> = BTreeMap::new();
    for row in tsv::rows(text, 4, file)? {
        let f = &row.fields;
        let n = f[3]
            .parse::<usize>()
            .map_err(|_| Error::malformed(file, row.line, format!("bad count `{}`", f[3])))?;
        out.entry(ActivityId::from(f[0]))
            .or_default()
            .push((VenueId::from(f[2]), n));
    }
    Ok(out)
}
