#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{DateTime, TimeDelta, TimeZone, Utc};
use needcast_core::relevance::NeedCounts;
use needcast_core::sessions::{Session, SessionEvent};
use needcast_core::taxonomy::{ActivityTaxonomy, Level};
use needcast_core::{ActivityId, NeedId, UserId, VenueId};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

/// `n_top` parents `t0..`, and `n_second` children `s0..` assigned round-robin.
pub fn taxonomy(n_top: usize, n_second: usize) -> ActivityTaxonomy {
    let mut rows = Vec::new();
    for t in 0..n_top {
        rows.push((ActivityId::from(format!("t{t}")), None, Level::Top, format!("Top {t}")));
    }
    for s in 0..n_second {
        rows.push((
            ActivityId::from(format!("s{s}")),
            Some(ActivityId::from(format!("t{}", s % n_top))),
            Level::Second,
            format!("Second {s}"),
        ));
    }
    ActivityTaxonomy::from_rows(rows).unwrap()
}

pub fn second_level(tax: &ActivityTaxonomy) -> Vec<ActivityId> {
    tax.at_level(Level::Second).cloned().collect()
}

pub fn top_level(tax: &ActivityTaxonomy) -> Vec<ActivityId> {
    tax.at_level(Level::Top).cloned().collect()
}

/// Up to `max_users` users with a few sessions each over second-level
/// activities; at least one session has two events.
pub fn random_sessions(rng: &mut impl Rng, tax: &ActivityTaxonomy, max_users: usize) -> Vec<Session> {
    let acts = second_level(tax);
    loop {
        let mut out = Vec::new();
        for u in 0..rng.gen_range(1..=max_users) {
            let mut ts = t0() + TimeDelta::hours(rng.gen_range(0..48));
            for _ in 0..rng.gen_range(1..=4) {
                let events = (0..rng.gen_range(1..=6))
                    .map(|_| {
                        ts += TimeDelta::minutes(rng.gen_range(1..=120));
                        let activity = acts[rng.gen_range(0..acts.len())].clone();
                        SessionEvent {
                            ts,
                            venue: VenueId::from(format!("v_{activity}")),
                            activity,
                        }
                    })
                    .collect();
                out.push(Session {
                    user: UserId::from(format!("u{u}")),
                    events,
                });
                ts += TimeDelta::hours(12);
            }
        }
        if out.iter().any(|s| s.events.len() > 1) {
            return out;
        }
    }
}

/// Random native counts over `n_needs` needs `n0..` for every second-level
/// activity (a few rows left empty when `allow_empty`).
pub fn random_counts(rng: &mut impl Rng, tax: &ActivityTaxonomy, n_needs: usize, allow_empty: bool) -> NeedCounts {
    let mut native: BTreeMap<ActivityId, BTreeMap<NeedId, u64>> = BTreeMap::new();
    let acts = second_level(tax);
    for (idx, a) in acts.iter().enumerate() {
        if allow_empty && idx > 0 && rng.gen_bool(0.2) {
            continue;
        }
        let row = native.entry(a.clone()).or_default();
        while row.is_empty() {
            for i in 0..n_needs {
                if rng.gen_bool(0.4) {
                    row.insert(NeedId::from(format!("n{i:02}")), rng.gen_range(1..=20));
                }
            }
        }
    }
    NeedCounts::from_native(native, tax).unwrap()
}
