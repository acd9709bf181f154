mod common;

use std::collections::{BTreeMap, BTreeSet};

use needcast_core::relevance::{lambda, need_relevance, smoothed_relevance, NeedCounts, RelevanceModel, Smoothing};
use needcast_core::taxonomy::Level;
use needcast_core::temporal::{compute_gamma, fit_temporal_scope, Scope, TemporalModel, TemporalVotes, Votes};
use needcast_core::{ActivityId, Error, NeedId};
use rand::Rng;

#[test]
fn lambda_is_half_when_count_equals_beta() {
    for beta in [1u64, 7, 1000, 123_456_789] {
        assert_eq!(lambda(beta, beta, Smoothing::Inverse), 0.5);
        assert_eq!(lambda(beta, beta, Smoothing::Standard), 0.5);
    }
    assert_eq!(lambda(3, 9, Smoothing::Off), 1.0);
    assert_eq!(lambda(1, 3, Smoothing::Inverse), 0.75);
    assert_eq!(lambda(1, 3, Smoothing::Standard), 0.25);
}

#[test]
fn smoothed_distributions_sum_to_one() {
    let mut rng = common::rng(41);
    for _ in 0..100 {
        let tax = common::taxonomy(rng.gen_range(1..=3), rng.gen_range(1..=8));
        let n_needs = rng.gen_range(1..=20);
        let counts = common::random_counts(&mut rng, &tax, n_needs, true);
        for a in common::second_level(&tax) {
            let parent = tax.parent(&a).unwrap();
            if counts.activity_total(parent) == 0 {
                continue;
            }
            for mode in [Smoothing::Inverse, Smoothing::Standard] {
                let d = smoothed_relevance(&counts, &a, &tax, mode).unwrap();
                assert!((d.sum() - 1.0).abs() < 1e-12, "{a} {mode}: {}", d.sum());
                // direct interpolation
                let n = counts.activity_total(&a);
                let lam = lambda(n, counts.beta(), mode);
                let pa = need_relevance(&counts, parent).unwrap();
                for i in counts.needs() {
                    let child = if n == 0 {
                        pa.get(&i)
                    } else {
                        counts.count(&a, &i) as f64 / n as f64
                    };
                    let want = if n == 0 {
                        pa.get(&i)
                    } else {
                        lam * child + (1.0 - lam) * pa.get(&i)
                    };
                    assert!((d.get(&i) - want).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn empty_second_level_returns_parent() {
    let tax = common::taxonomy(1, 2);
    let mut native: BTreeMap<ActivityId, BTreeMap<NeedId, u64>> = BTreeMap::new();
    native.entry("s0".into()).or_default().insert("menu".into(), 3);
    native.entry("s0".into()).or_default().insert("hours".into(), 1);
    let counts = NeedCounts::from_native(native, &tax).unwrap();
    let parent = need_relevance(&counts, &"t0".into()).unwrap();
    for mode in [Smoothing::Inverse, Smoothing::Standard] {
        assert_eq!(smoothed_relevance(&counts, &"s1".into(), &tax, mode).unwrap(), parent);
    }
    let model = RelevanceModel::new(counts.clone(), tax.clone(), Smoothing::Inverse);
    assert_eq!(model.distribution(&"s1".into()).unwrap(), parent);
    let raw = RelevanceModel::new(counts, tax, Smoothing::Off);
    assert!(matches!(raw.distribution(&"s1".into()), Err(Error::NoNeeds(_))));
}

#[test]
fn beta_counts_second_level_tokens() {
    let mut rng = common::rng(42);
    for _ in 0..20 {
        let tax = common::taxonomy(2, 6);
        let counts = common::random_counts(&mut rng, &tax, 10, true);
        let direct: u64 = counts.native().values().flat_map(|r| r.values()).sum();
        assert_eq!(counts.beta(), direct);
        for t in tax.at_level(Level::Top) {
            let kids: u64 = tax.children(t).map(|c| counts.activity_total(c)).sum();
            assert_eq!(counts.activity_total(t), kids);
        }
    }
}

#[test]
fn scopes_sum_to_one() {
    let mut rng = common::rng(43);
    let mut votes = TemporalVotes::new();
    for k in 0..300 {
        let mut v = Votes {
            pre: rng.gen_range(0..1000),
            peri: rng.gen_range(0..1000),
            post: rng.gen_range(0..1000),
        };
        if v.pre + v.peri + v.post == 0 {
            v.peri = 1;
        }
        votes.insert(
            (ActivityId::from(format!("a{}", k % 7)), NeedId::from(format!("n{k}"))),
            v,
        );
    }
    let model = fit_temporal_scope(&votes);
    assert_eq!(model.len(), votes.len());
    for (_, s) in model.iter() {
        assert!((s.pre + s.peri + s.post - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sensitivity_extremes() {
    assert_eq!(Scope::UNIFORM.sensitivity(), 0.0);
    let point = Scope {
        pre: 0.0,
        peri: 0.0,
        post: 1.0,
    };
    assert_eq!(point.sensitivity(), 2.0 / 9.0);
}

#[test]
fn gamma_extremes() {
    let needs: BTreeSet<NeedId> = ["map", "menu", "reviews"].into_iter().map(NeedId::from).collect();
    let acts: BTreeSet<ActivityId> = ["food", "shop"].into_iter().map(ActivityId::from).collect();
    let mut votes = TemporalVotes::new();
    for a in &acts {
        for i in &needs {
            votes.insert(
                (a.clone(), i.clone()),
                Votes {
                    pre: 0,
                    peri: 0,
                    post: 4,
                },
            );
        }
    }
    assert_eq!(compute_gamma(&fit_temporal_scope(&votes), &needs, &acts).unwrap(), 1.0);
    let empty = fit_temporal_scope(&TemporalVotes::new());
    assert!((compute_gamma(&empty, &needs, &acts).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(TemporalModel::default().len(), 0);
}
