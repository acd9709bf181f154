mod common;

use chrono::TimeDelta;
use needcast_core::sessions::{
    chronological_split, dedup_checkins, extract_sessions, parse_sessions_jsonl, sessions_to_jsonl, train_size,
    ActivityEvent,
};
use needcast_core::taxonomy::CheckIn;
use needcast_core::{ActivityId, UserId, VenueId};
use rand::Rng;

/// Events with random gaps; a share of gaps sits exactly on `boundary`.
fn random_events(rng: &mut impl Rng, n: usize, boundary: TimeDelta) -> Vec<ActivityEvent> {
    let users = rng.gen_range(1..=8);
    let mut clock: Vec<_> = (0..users).map(|_| common::t0()).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.gen_range(0..users);
        let step = match rng.gen_range(0..10) {
            0 => boundary,
            1 => boundary + TimeDelta::seconds(1),
            2 => TimeDelta::zero(),
            _ => TimeDelta::minutes(rng.gen_range(1..=30 * 60)),
        };
        clock[u] += step;
        let v = rng.gen_range(0..5);
        out.push(ActivityEvent {
            user: UserId::from(format!("u{u}")),
            ts: clock[u],
            venue: VenueId::from(format!("v{v}")),
            activity: ActivityId::from(format!("a{v}")),
        });
    }
    // input order must not matter
    for i in (1..out.len()).rev() {
        out.swap(i, rng.gen_range(0..=i));
    }
    out
}

/// Assigns each event a session number = count of preceding oversized gaps,
/// then groups by (user, number).
fn gap_scan(events: &[ActivityEvent], gap: TimeDelta) -> Vec<(String, Vec<(i64, String)>)> {
    let mut users: Vec<&UserId> = events.iter().map(|e| &e.user).collect();
    users.sort();
    users.dedup();
    let mut out = Vec::new();
    for u in users {
        let mut evs: Vec<&ActivityEvent> = events.iter().filter(|e| &e.user == u).collect();
        evs.sort_by(|a, b| (a.ts, &a.venue).cmp(&(b.ts, &b.venue)));
        let mut ids = vec![0usize; evs.len()];
        for i in 1..evs.len() {
            ids[i] = ids[i - 1] + usize::from(evs[i].ts - evs[i - 1].ts > gap);
        }
        for sid in 0..=ids[ids.len() - 1] {
            let members = evs
                .iter()
                .zip(&ids)
                .filter(|(_, s)| **s == sid)
                .map(|(e, _)| (e.ts.timestamp(), e.venue.to_string()))
                .collect();
            out.push((u.to_string(), members));
        }
    }
    out
}

#[test]
fn extraction_matches_gap_scan() {
    let mut rng = common::rng(21);
    for hours in [1, 6, 24] {
        let gap = TimeDelta::hours(hours);
        for _ in 0..30 {
            let n = rng.gen_range(1..=500);
            let events = random_events(&mut rng, n, gap);
            let got: Vec<_> = extract_sessions(&events, gap)
                .unwrap()
                .into_iter()
                .map(|s| {
                    let evs = s
                        .events
                        .iter()
                        .map(|e| (e.ts.timestamp(), e.venue.to_string()))
                        .collect();
                    (s.user.to_string(), evs)
                })
                .collect();
            assert_eq!(got, gap_scan(&events, gap), "gap {hours}h");
        }
    }
}

#[test]
fn six_hour_gap_is_inclusive() {
    let mk = |mins: i64| ActivityEvent {
        user: "u".into(),
        ts: common::t0() + TimeDelta::minutes(mins),
        venue: "v".into(),
        activity: "a".into(),
    };
    let gap = TimeDelta::hours(6);
    assert_eq!(extract_sessions(&[mk(0), mk(360)], gap).unwrap().len(), 1);
    assert_eq!(extract_sessions(&[mk(0), mk(361)], gap).unwrap().len(), 2);
}

/// Quadratic reference: a check-in is kept unless some kept check-in of the
/// same user and venue lies within the window before it, the most recent
/// such kept one being decisive.
fn dedup_reference(log: &[CheckIn], window: TimeDelta) -> Vec<CheckIn> {
    let mut sorted = log.to_vec();
    sorted.sort_by(|a, b| (a.timestamp, &a.user_id, &a.venue_id).cmp(&(b.timestamp, &b.user_id, &b.venue_id)));
    let mut kept: Vec<CheckIn> = Vec::new();
    for c in sorted {
        let last = kept
            .iter()
            .filter(|k| k.user_id == c.user_id && k.venue_id == c.venue_id)
            .map(|k| k.timestamp)
            .max();
        if last.is_none_or(|t| c.timestamp - t > window) {
            kept.push(c);
        }
    }
    kept
}

#[test]
fn dedup_matches_quadratic_scan() {
    let mut rng = common::rng(22);
    let window = TimeDelta::minutes(10);
    for _ in 0..40 {
        let n = rng.gen_range(0..=300);
        let log: Vec<CheckIn> = (0..n)
            .map(|_| CheckIn {
                user_id: UserId::from(format!("u{}", rng.gen_range(0..3))),
                venue_id: VenueId::from(format!("v{}", rng.gen_range(0..3))),
                timestamp: common::t0() + TimeDelta::minutes(rng.gen_range(0..600)),
                tz_offset: 0,
            })
            .collect();
        let report = dedup_checkins(&log, window).unwrap();
        let expect = dedup_reference(&log, window);
        assert_eq!(report.log, expect);
        assert_eq!(report.removed, n - expect.len());
    }
}

#[test]
fn dedup_window_is_inclusive_and_chained_from_kept() {
    let mk = |mins: i64| CheckIn {
        user_id: "u".into(),
        venue_id: "v".into(),
        timestamp: common::t0() + TimeDelta::minutes(mins),
        tz_offset: 0,
    };
    // 10 is within the window of 0; 24 is within the window of the kept 15
    let report = dedup_checkins(&[mk(0), mk(10), mk(15), mk(24)], TimeDelta::minutes(10)).unwrap();
    let kept: Vec<i64> = report
        .log
        .iter()
        .map(|c| (c.timestamp - common::t0()).num_minutes())
        .collect();
    assert_eq!(kept, vec![0, 15]);
}

#[test]
fn split_is_chronological_and_sized() {
    let mut rng = common::rng(23);
    for _ in 0..30 {
        let n = rng.gen_range(10..=200);
        let events = random_events(&mut rng, n, TimeDelta::hours(6));
        let sessions = extract_sessions(&events, TimeDelta::hours(6)).unwrap();
        if sessions.len() < 2 {
            continue;
        }
        let frac = rng.gen_range(0.05..0.95);
        let (train, test) = chronological_split(&sessions, frac).unwrap();
        assert_eq!(train.len(), train_size(sessions.len(), frac));
        assert_eq!(train.len() + test.len(), sessions.len());
        assert!(!test.is_empty());
        let last_train = train.iter().map(|s| s.start()).max().unwrap();
        assert!(test.iter().all(|s| s.start() >= last_train));
    }
    assert_eq!(train_size(10, 0.8), 8);
    assert_eq!(train_size(10, 0.7), 7);
    assert_eq!(train_size(3, 0.99), 2);
}

#[test]
fn jsonl_round_trip() {
    let mut rng = common::rng(24);
    let events = random_events(&mut rng, 120, TimeDelta::hours(6));
    let sessions = extract_sessions(&events, TimeDelta::hours(6)).unwrap();
    let text = sessions_to_jsonl(&sessions).unwrap();
    assert_eq!(parse_sessions_jsonl(&text, "sessions.jsonl").unwrap(), sessions);
}
