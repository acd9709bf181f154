mod common;

use std::collections::BTreeMap;

use needcast_core::evaluate::most_frequent_transitions;
use needcast_core::sessions::Session;
use needcast_core::taxonomy::{ActivityTaxonomy, Level};
use needcast_core::transitions::{fit_transitions, parse_transitions, precision_at_k};
use needcast_core::ActivityId;
use rand::Rng;

/// Every adjacent pair of every session, counted directly.
fn pair_counts(sessions: &[Session], tax: &ActivityTaxonomy, level: Level) -> BTreeMap<(ActivityId, ActivityId), u64> {
    let mut out = BTreeMap::new();
    for s in sessions {
        for i in 1..s.events.len() {
            let a = tax.at(&s.events[i - 1].activity, level).unwrap();
            let b = tax.at(&s.events[i].activity, level).unwrap();
            *out.entry((a, b)).or_insert(0) += 1;
        }
    }
    out
}

#[test]
fn mle_matches_pair_counting() {
    let mut rng = common::rng(11);
    for _ in 0..50 {
        let tax = common::taxonomy(rng.gen_range(1..=3), rng.gen_range(1..=8));
        let sessions = common::random_sessions(&mut rng, &tax, 10);
        for level in [Level::Top, Level::Second] {
            let model = fit_transitions(&sessions, &tax, level).unwrap();
            let pairs = pair_counts(&sessions, &tax, level);
            let acts: Vec<ActivityId> = tax.at_level(level).cloned().collect();
            for a in &acts {
                let row_total: u64 = pairs.iter().filter(|((f, _), _)| f == a).map(|(_, n)| n).sum();
                for b in &acts {
                    let n = pairs.get(&(a.clone(), b.clone())).copied().unwrap_or(0);
                    assert_eq!(model.count(a, b), n);
                    let expect = if row_total == 0 {
                        0.0
                    } else {
                        n as f64 / row_total as f64
                    };
                    assert_eq!(model.probability(a, b), expect, "{a}->{b}");
                }
                let dist = model.next_activity_dist(a).unwrap();
                assert!((dist.sum() - 1.0).abs() < 1e-12);
                if row_total == 0 {
                    assert_eq!(&dist, model.marginal(), "unseen source backs off to the marginal");
                }
            }
        }
    }
}

#[test]
fn export_round_trips() {
    let mut rng = common::rng(12);
    for _ in 0..10 {
        let tax = common::taxonomy(2, 5);
        let sessions = common::random_sessions(&mut rng, &tax, 6);
        let top = fit_transitions(&sessions, &tax, Level::Top).unwrap();
        let second = fit_transitions(&sessions, &tax, Level::Second).unwrap();
        let text = top.to_tsv() + &second.to_tsv();
        let back = parse_transitions(&text, "transitions.tsv", &tax).unwrap();
        assert_eq!(back[&Level::Top].counts(), top.counts());
        assert_eq!(back[&Level::Second].counts(), second.counts());
    }
}

#[test]
fn precision_matches_direct_count() {
    let mut rng = common::rng(13);
    for _ in 0..20 {
        let tax = common::taxonomy(2, 6);
        let train = common::random_sessions(&mut rng, &tax, 8);
        let test = common::random_sessions(&mut rng, &tax, 4);
        let model = fit_transitions(&train, &tax, Level::Second).unwrap();
        let k = rng.gen_range(1..=4);
        let (mut hits, mut total) = (0, 0);
        for (a, b) in pair_counts(&test, &tax, Level::Second)
            .into_iter()
            .flat_map(|(p, n)| std::iter::repeat_n(p, n as usize))
        {
            let top = model.next_activity_dist(&a).unwrap().top_k(k);
            total += 1;
            hits += usize::from(top.contains(&b));
        }
        let p = precision_at_k(&model, &test, &tax, k).unwrap();
        assert_eq!(p, hits as f64 / total as f64);
    }
}

#[test]
fn most_frequent_matches_tally_sort() {
    let mut rng = common::rng(14);
    for _ in 0..20 {
        let tax = common::taxonomy(3, 7);
        let sessions = common::random_sessions(&mut rng, &tax, 10);
        let mut ranked: Vec<_> = pair_counts(&sessions, &tax, Level::Second).into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let m = rng.gen_range(1..=60);
        let expect: Vec<_> = ranked.into_iter().take(m).map(|(p, _)| p).collect();
        assert_eq!(
            most_frequent_transitions(&sessions, &tax, m, Level::Second).unwrap(),
            expect
        );
    }
    let tax = common::taxonomy(9, 9);
    let sessions = common::random_sessions(&mut rng, &tax, 2);
    assert_eq!(
        most_frequent_transitions(&sessions, &tax, 100, Level::Top)
            .unwrap()
            .len(),
        81
    );
}
