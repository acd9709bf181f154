//! Check-in deduplication, gap-bounded activity sessions and the
//! chronological train/test split.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::taxonomy::{format_timestamp, parse_timestamp, CheckIn, VenueTable};
use crate::{tsv, ActivityId, Error, Result, UserId, VenueId};

pub const DEFAULT_MAX_GAP_HOURS: i64 = 6;
pub const DEFAULT_DEDUP_WINDOW_MINUTES: i64 = 10;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone)]
pub struct DedupReport {
    pub log: Vec<CheckIn>,
    pub removed: usize,
}

impl DedupReport {
    pub fn removed_fraction(&self) -> f64 {
        let total = self.log.len() + self.removed;
        if total == 0 {
            0.0
        } else {
            self.removed as f64 / total as f64
        }
    }
}

/// Removes repeated check-ins of a user at the same venue: a check-in within
/// `window` (inclusive) of the last *kept* check-in for that (user, venue) is
/// dropped. Output is ordered by (timestamp, user, venue).
pub fn dedup_checkins(log: &[CheckIn], window: TimeDelta) -> Result<DedupReport> {
    if window <= TimeDelta::zero() {
        return Err(Error::InvalidArgument("dedup window must be positive".into()));
    }
    let mut order: Vec<&CheckIn> = log.iter().collect();
    order.sort_by(|a, b| (a.timestamp, &a.user_id, &a.venue_id).cmp(&(b.timestamp, &b.user_id, &b.venue_id)));
    let mut last_kept: HashMap<(&UserId, &VenueId), DateTime<Utc>> = HashMap::new();
    let mut kept = Vec::with_capacity(order.len());
    for c in order {
        let key = (&c.user_id, &c.venue_id);
        match last_kept.get(&key) {
            Some(prev) if c.timestamp - *prev <= window => continue,
            _ => {
                last_kept.insert(key, c.timestamp);
                kept.push(c.clone());
            }
        }
    }
    let removed = log.len() - kept.len();
    Ok(DedupReport { log: kept, removed })
}

/// A check-in joined with its venue's activity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityEvent {
    pub user: UserId,
    pub ts: DateTime<Utc>,
    pub venue: VenueId,
    pub activity: ActivityId,
}

/// Joins check-ins with the venue table. Check-ins at venues missing from
/// the table (e.g. removed by the country filter) are skipped and counted.
pub fn resolve_activities(log: &[CheckIn], venues: &VenueTable) -> (Vec<ActivityEvent>, usize) {
    let mut skipped = 0;
    let mut out = Vec::with_capacity(log.len());
    for c in log {
        match venues.get(&c.venue_id) {
            Some(v) => out.push(ActivityEvent {
                user: c.user_id.clone(),
                ts: c.timestamp,
                venue: c.venue_id.clone(),
                activity: v.activity.clone(),
            }),
            None => skipped += 1,
        }
    }
    (out, skipped)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionEvent {
    pub ts: DateTime<Utc>,
    pub venue: VenueId,
    pub activity: ActivityId,
}

/// A user's run of check-ins with no gap above the session threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub user: UserId,
    pub events: Vec<SessionEvent>,
}

impl Session {
    pub fn start(&self) -> DateTime<Utc> {
        self.events[0].ts
    }

    pub fn activities(&self) -> impl Iterator<Item = &ActivityId> {
        self.events.iter().map(|e| &e.activity)
    }

    fn sort_key(&self) -> (DateTime<Utc>, &UserId, &VenueId) {
        (self.start(), &self.user, &self.events[0].venue)
    }
}

/// Segments each user's events greedily: a new session starts whenever the
/// gap to the previous event exceeds `max_gap` (a gap equal to `max_gap`
/// stays in-session). Events are ordered by (timestamp, venue); sessions are
/// returned ordered by (user, start).
pub fn extract_sessions(events: &[ActivityEvent], max_gap: TimeDelta) -> Result<Vec<Session>> {
    if max_gap <= TimeDelta::zero() {
        return Err(Error::InvalidArgument("max gap must be positive".into()));
    }
    let mut per_user: BTreeMap<&UserId, Vec<&ActivityEvent>> = BTreeMap::new();
    for e in events {
        per_user.entry(&e.user).or_default().push(e);
    }
    let mut sessions = Vec::new();
    for (user, mut evs) in per_user {
        evs.sort_by(|a, b| (a.ts, &a.venue).cmp(&(b.ts, &b.venue)));
        let mut current: Vec<SessionEvent> = Vec::new();
        for e in evs {
            if let Some(last) = current.last() {
                if e.ts - last.ts > max_gap {
                    sessions.push(Session {
                        user: user.clone(),
                        events: std::mem::take(&mut current),
                    });
                }
            }
            current.push(SessionEvent {
                ts: e.ts,
                venue: e.venue.clone(),
                activity: e.activity.clone(),
            });
        }
        if !current.is_empty() {
            sessions.push(Session {
                user: user.clone(),
                events: current,
            });
        }
    }
    Ok(sessions)
}

/// Number of sessions assigned to training: `ceil(fraction * n)`, capped so
/// the test side keeps at least one session.
pub fn train_size(n: usize, fraction: f64) -> usize {
    // 1e-9 absorbs representation error such as 0.7 * 10 = 7.000000000000001.
    let raw = (fraction * n as f64 - 1e-9).ceil().max(1.0) as usize;
    raw.min(n - 1)
}

/// Splits sessions into chronologically earlier training and later test
/// sets. Sessions are atomic; ties on start time are broken by (user, first
/// venue).
pub fn chronological_split(sessions: &[Session], train_fraction: f64) -> Result<(Vec<Session>, Vec<Session>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    if sessions.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "cannot split {} session(s) into train and test",
            sessions.len()
        )));
    }
    let mut sorted: Vec<Session> = sessions.to_vec();
    sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let test = sorted.split_off(train_size(sessions.len(), train_fraction));
    Ok((sorted, test))
}

#[derive(Serialize, Deserialize)]
struct WireEvent {
    ts: String,
    venue: String,
    category: String,
}

#[derive(Serialize, Deserialize)]
struct WireSession {
    user: String,
    start: String,
    events: Vec<WireEvent>,
}

pub fn sessions_to_jsonl(sessions: &[Session]) -> Result<String> {
    let mut out = String::new();
    for s in sessions {
        let wire = WireSession {
            user: s.user.to_string(),
            start: format_timestamp(&s.start()),
            events: s
                .events
                .iter()
                .map(|e| WireEvent {
                    ts: format_timestamp(&e.ts),
                    venue: e.venue.to_string(),
                    category: e.activity.to_string(),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&wire)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_sessions_jsonl(text: &str, file: &str) -> Result<Vec<Session>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::malformed(file, idx + 1, msg);
        let wire: WireSession = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if wire.events.is_empty() {
            return Err(bad("session without events".into()));
        }
        let mut events = Vec::with_capacity(wire.events.len());
        for e in wire.events {
            let ts = parse_timestamp(&e.ts).ok_or_else(|| bad(format!("bad timestamp `{}`", e.ts)))?;
            events.push(SessionEvent {
                ts,
                venue: e.venue.into(),
                activity: e.category.into(),
            });
        }
        out.push(Session {
            user: wire.user.into(),
            events,
        });
    }
    Ok(out)
}

pub fn load_sessions(path: &Path) -> Result<Vec<Session>> {
    parse_sessions_jsonl(&tsv::read(path)?, &tsv::file_name(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn at(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_400_000_000 + secs, 0).unwrap()
    }

    fn ci(user: &str, venue: &str, secs: i64) -> CheckIn {
        CheckIn {
            user_id: user.into(),
            venue_id: venue.into(),
            timestamp: at(secs),
            tz_offset: 0,
        }
    }

    fn ev(user: &str, hours: f64, act: &str) -> ActivityEvent {
        ActivityEvent {
            user: user.into(),
            ts: at((hours * 3600.0) as i64),
            venue: format!("v-{act}").into(),
            activity: act.into(),
        }
    }

    #[test]
    fn dedup_window_edges() {
        let w = TimeDelta::minutes(10);
        let r = dedup_checkins(&[ci("u", "v", 0), ci("u", "v", 300)], w).unwrap();
        assert_eq!(r.log.len(), 1);
        assert_eq!(r.removed_fraction(), 0.5);
        let r = dedup_checkins(&[ci("u", "v", 0), ci("u", "v", 660)], w).unwrap();
        assert_eq!(r.log.len(), 2);
        // chained repeats are measured against the last kept check-in
        let r = dedup_checkins(&[ci("u", "v", 0), ci("u", "v", 400), ci("u", "v", 800)], w).unwrap();
        assert_eq!(r.log.len(), 2);
        assert!(dedup_checkins(&[], TimeDelta::zero()).is_err());
    }

    #[test]
    fn seven_hour_gap_splits() {
        let events = [ev("u", 0.0, "a"), ev("u", 5.0, "b"), ev("u", 12.0, "c")];
        let s = extract_sessions(&events, TimeDelta::hours(6)).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].events.len(), 2);
        assert_eq!(s[1].events.len(), 1);
    }

    #[test]
    fn exact_gap_is_inclusive() {
        let events = [ev("u", 0.0, "a"), ev("u", 6.0, "b")];
        let s = extract_sessions(&events, TimeDelta::hours(6)).unwrap();
        assert_eq!(s.len(), 1);
        assert!(extract_sessions(&[], TimeDelta::hours(6)).unwrap().is_empty());
    }

    fn sessions_at(starts: &[i64]) -> Vec<Session> {
        starts
            .iter()
            .map(|&h| Session {
                user: "u".into(),
                events: vec![SessionEvent {
                    ts: at(h * 3600),
                    venue: "v".into(),
                    activity: "a".into(),
                }],
            })
            .collect()
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = chronological_split(&sessions_at(&[9, 8, 7, 6, 5, 4, 3, 2, 1, 0]), 0.8).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        assert!(tr.iter().all(|s| s.start() <= te[0].start()));
        let (tr, te) = chronological_split(&sessions_at(&[0, 1, 2, 3, 4]), 0.5).unwrap();
        assert_eq!((tr.len(), te.len()), (3, 2));
        let (tr, _) = chronological_split(&sessions_at(&(0..10).collect::<Vec<_>>()), 0.7).unwrap();
        assert_eq!(tr.len(), 7);
        assert!(chronological_split(&sessions_at(&[0]), 0.8).is_err());
        assert!(chronological_split(&sessions_at(&[0, 1]), 1.0).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let events = [ev("u1", 0.0, "a"), ev("u1", 1.0, "b"), ev("u2", 3.0, "c")];
        let s = extract_sessions(&events, TimeDelta::hours(6)).unwrap();
        let text = sessions_to_jsonl(&s).unwrap();
        assert!(text.starts_with(r#"{"user":"u1","start":"2014-05-13T16:53:20Z","events":[{"ts""#));
        assert_eq!(parse_sessions_jsonl(&text, "s").unwrap(), s);
    }
}
