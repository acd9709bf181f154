//! Ranking information needs for a user's last activity.
//!
//! * M0 ignores context and returns globally frequent needs.
//! * M1 sums need relevance over the likely next activities:
//!   `Σ_next P(i|next) P(next|last)`.
//! * M2 mixes M1 with the last activity's own needs:
//!   `γ P(i|last) + (1 − γ) M1(i)`.
//! * M3 weights each component by temporal scope:
//!   `P(post|i,last) P(i|last) + Σ_next P(pre|i,next) P(i|next) P(next|last)`.
//!
//! Scores are only materialized for needs in the support of the involved
//! relevance distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::relevance::{NeedCounts, RelevanceModel};
use crate::taxonomy::Level;
use crate::temporal::{inherit_scope, TemporalModel};
use crate::transitions::TransitionModel;
use crate::{ActivityId, Distribution, Error, NeedId, Result};

/// Number of cards a phone dashboard shows at once.
pub const DEFAULT_DASHBOARD_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    M0,
    M1,
    M2,
    M3,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::M0, ModelKind::M1, ModelKind::M2, ModelKind::M3];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::M0 => "m0",
            ModelKind::M1 => "m1",
            ModelKind::M2 => "m2",
            ModelKind::M3 => "m3",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m0" => Ok(ModelKind::M0),
            "m1" => Ok(ModelKind::M1),
            "m2" => Ok(ModelKind::M2),
            "m3" => Ok(ModelKind::M3),
            _ => Err(Error::InvalidArgument(format!("unknown model `{s}`"))),
        }
    }
}

/// Needs ordered by descending score, ties by need id.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedRanking {
    pub last_activity: ActivityId,
    pub model: ModelKind,
    pub entries: Vec<(NeedId, f64)>,
}

impl NeedRanking {
    /// Orders the non-zero scores of `scores`.
    pub fn from_scores(last_activity: ActivityId, model: ModelKind, scores: &Distribution<NeedId>) -> Self {
        let entries = scores.ranked().into_iter().filter(|(_, s)| *s > 0.0).collect();
        NeedRanking {
            last_activity,
            model,
            entries,
        }
    }

    pub fn ids(&self) -> Vec<NeedId> {
        self.entries.iter().map(|(i, _)| i.clone()).collect()
    }

    pub fn score(&self, need: &NeedId) -> f64 {
        self.entries
            .iter()
            .find(|(i, _)| i == need)
            .map(|(_, s)| *s)
            .unwrap_or(0.0)
    }

    /// Scores rescaled to sum to one, for display.
    pub fn normalized(&self) -> Vec<(NeedId, f64)> {
        let total: f64 = self.entries.iter().map(|(_, s)| s).sum();
        if total <= 0.0 {
            return self.entries.clone();
        }
        self.entries.iter().map(|(i, s)| (i.clone(), s / total)).collect()
    }
}

pub fn top_k(ranking: &NeedRanking, k: usize) -> Vec<NeedId> {
    ranking.entries.iter().take(k).map(|(i, _)| i.clone()).collect()
}

/// Global need frequency, independent of the last activity.
pub fn rank_m0(counts: &NeedCounts, last: &ActivityId) -> Result<NeedRanking> {
    let global = counts.global_counts();
    if global.values().all(|n| *n == 0) {
        return Err(Error::InsufficientData("empty need corpus".into()));
    }
    let dist = Distribution::from_counts(global.into_iter().map(|(i, n)| (i, n as f64)));
    Ok(NeedRanking::from_scores(last.clone(), ModelKind::M0, &dist))
}

fn expected_next(
    relevance: &RelevanceModel,
    transitions: &TransitionModel,
    last: &ActivityId,
    weight: impl Fn(&ActivityId, &NeedId) -> f64,
) -> Result<Distribution<NeedId>> {
    let next = transitions.next_activity_dist(last)?;
    let mut scores = Distribution::new();
    for (a_next, p_next) in next.iter() {
        for (need, p_need) in relevance.distribution_or_empty(a_next)?.iter() {
            let w = weight(a_next, need);
            scores.add(need.clone(), w * p_need * p_next);
        }
    }
    Ok(scores)
}

fn m1_scores(
    relevance: &RelevanceModel,
    transitions: &TransitionModel,
    last: &ActivityId,
) -> Result<Distribution<NeedId>> {
    expected_next(relevance, transitions, last, |_, _| 1.0)
}

pub fn rank_m1(relevance: &RelevanceModel, transitions: &TransitionModel, last: &ActivityId) -> Result<NeedRanking> {
    let scores = m1_scores(relevance, transitions, last)?;
    Ok(NeedRanking::from_scores(last.clone(), ModelKind::M1, &scores))
}

pub fn rank_m2(
    relevance: &RelevanceModel,
    transitions: &TransitionModel,
    last: &ActivityId,
    gamma: f64,
) -> Result<NeedRanking> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} outside [0, 1]")));
    }
    let m1 = m1_scores(relevance, transitions, last)?;
    let own = relevance.distribution_or_empty(last)?;
    let mut scores = Distribution::new();
    for (i, s) in m1.iter() {
        scores.add(i.clone(), (1.0 - gamma) * s);
    }
    for (i, p) in own.iter() {
        scores.add(i.clone(), gamma * p);
    }
    Ok(NeedRanking::from_scores(last.clone(), ModelKind::M2, &scores))
}

/// `temporal` must already resolve second-level pairs (see
/// [`inherit_scope`]).
pub fn rank_m3(
    relevance: &RelevanceModel,
    transitions: &TransitionModel,
    temporal: &TemporalModel,
    last: &ActivityId,
) -> Result<NeedRanking> {
    let mut scores = expected_next(relevance, transitions, last, |a_next, need| {
        temporal.scope(a_next, need).pre
    })?;
    for (i, p) in relevance.distribution_or_empty(last)?.iter() {
        scores.add(i.clone(), temporal.scope(last, i).post * p);
    }
    Ok(NeedRanking::from_scores(last.clone(), ModelKind::M3, &scores))
}

/// Fitted components bundled for ranking with any model at either level.
#[derive(Debug, Clone)]
pub struct Anticipator {
    relevance: RelevanceModel,
    transitions: BTreeMap<Level, TransitionModel>,
    temporal: TemporalModel,
    gamma: f64,
}

impl Anticipator {
    /// `temporal` is the scope model fitted on votes; second-level pairs
    /// inherit from their parents here.
    pub fn new(
        relevance: RelevanceModel,
        transitions: BTreeMap<Level, TransitionModel>,
        temporal: &TemporalModel,
        gamma: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("gamma {gamma} outside [0, 1]")));
        }
        let temporal = inherit_scope(temporal, relevance.taxonomy());
        Ok(Anticipator {
            relevance,
            transitions,
            temporal,
            gamma,
        })
    }

    pub fn relevance(&self) -> &RelevanceModel {
        &self.relevance
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn temporal(&self) -> &TemporalModel {
        &self.temporal
    }

    pub fn transitions(&self, level: Level) -> Result<&TransitionModel> {
        self.transitions
            .get(&level)
            .ok_or_else(|| Error::InsufficientData(format!("no transition model for level {}", level.number())))
    }

    pub fn rank(&self, model: ModelKind, last: &ActivityId) -> Result<NeedRanking> {
        let level = self
            .relevance
            .taxonomy()
            .level_of(last)
            .ok_or_else(|| Error::UnknownActivity(last.to_string()))?;
        if model == ModelKind::M0 {
            return rank_m0(self.relevance.counts(), last);
        }
        let trans = self.transitions(level)?;
        match model {
            ModelKind::M0 => unreachable!(),
            ModelKind::M1 => rank_m1(&self.relevance, trans, last),
            ModelKind::M2 => rank_m2(&self.relevance, trans, last, self.gamma),
            ModelKind::M3 => rank_m3(&self.relevance, trans, &self.temporal, last),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Card {
    pub need: String,
    pub label: String,
    pub score: f64,
}

/// One dashboard line: the top `k` cards for the last activity.
#[derive(Debug, Serialize)]
pub struct Dashboard {
    pub last_activity: String,
    pub model: String,
    pub k: usize,
    pub cards: Vec<Card>,
}

impl Dashboard {
    pub fn new(ranking: &NeedRanking, k: usize, label: impl Fn(&NeedId) -> String) -> Self {
        Dashboard {
            last_activity: ranking.last_activity.to_string(),
            model: ranking.model.to_string(),
            k,
            cards: ranking
                .entries
                .iter()
                .take(k)
                .map(|(i, s)| Card {
                    need: i.to_string(),
                    label: label(i),
                    score: *s,
                })
                .collect(),
        }
    }
}
