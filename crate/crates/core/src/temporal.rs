//! Temporal scope of information needs: the probability that a need is
//! relevant before (`pre`), during (`peri`) or after (`post`) an activity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::taxonomy::{ActivityTaxonomy, Level};
use crate::{tsv, ActivityId, Error, NeedId, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scope {
    pub pre: f64,
    pub peri: f64,
    pub post: f64,
}

impl Scope {
    pub const UNIFORM: Scope = Scope {
        pre: 1.0 / 3.0,
        peri: 1.0 / 3.0,
        post: 1.0 / 3.0,
    };

    pub fn from_votes(v: Votes) -> Option<Scope> {
        let total = (v.pre + v.peri + v.post) as f64;
        (total > 0.0).then(|| Scope {
            pre: v.pre as f64 / total,
            peri: v.peri as f64 / total,
            post: v.post as f64 / total,
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pre, self.peri, self.post]
    }

    /// Population variance of the three probabilities around 1/3, computed
    /// as `Σ (3p − 1)² / 27` so that point masses and the uniform scope come
    /// out exact.
    pub fn sensitivity(&self) -> f64 {
        self.as_array().iter().map(|p| (3.0 * p - 1.0).powi(2)).sum::<f64>() / 27.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Votes {
    pub pre: u64,
    pub peri: u64,
    pub post: u64,
}

/// Per-(activity, need) vote counts; every stored key has at least one vote.
pub type TemporalVotes = BTreeMap<(ActivityId, NeedId), Votes>;

/// Parses `category_id \t need_id \t pre \t peri \t post`.
pub fn parse_votes(text: &str, file: &str) -> Result<TemporalVotes> {
    let mut out = TemporalVotes::new();
    for row in tsv::rows(text, 5, file)? {
        let f = &row.fields;
        let mut n = [0u64; 3];
        for (slot, raw) in n.iter_mut().zip(&f[2..5]) {
            *slot = raw
                .parse()
                .map_err(|_| Error::malformed(file, row.line, format!("bad vote count `{raw}`")))?;
        }
        if n.iter().all(|c| *c == 0) {
            return Err(Error::malformed(
                file,
                row.line,
                format!("no votes for ({}, {})", f[0], f[1]),
            ));
        }
        let key = (ActivityId::from(f[0]), NeedId::from(f[1]));
        if out.contains_key(&key) {
            return Err(Error::malformed(
                file,
                row.line,
                format!("duplicate key ({}, {})", f[0], f[1]),
            ));
        }
        out.insert(
            key,
            Votes {
                pre: n[0],
                peri: n[1],
                post: n[2],
            },
        );
    }
    Ok(out)
}

pub fn load_votes(path: &Path) -> Result<TemporalVotes> {
    parse_votes(&tsv::read(path)?, &tsv::file_name(path))
}

/// Scope triples per (activity, need); pairs without an entry resolve to
/// [`Scope::UNIFORM`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TemporalModel {
    scopes: BTreeMap<(ActivityId, NeedId), Scope>,
}

impl TemporalModel {
    pub fn scope(&self, a: &ActivityId, i: &NeedId) -> Scope {
        self.stored(a, i).unwrap_or(Scope::UNIFORM)
    }

    pub fn stored(&self, a: &ActivityId, i: &NeedId) -> Option<Scope> {
        // tuple keys need owned lookups
        self.scopes.get(&(a.clone(), i.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.scopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scopes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(ActivityId, NeedId), &Scope)> {
        self.scopes.iter()
    }

    pub fn temporal_sensitivity(&self, i: &NeedId, a: &ActivityId) -> f64 {
        self.scope(a, i).sensitivity()
    }

    /// `category_id \t need_id \t pre \t peri \t post \t sensitivity`, with
    /// probabilities printed in shortest round-trip form.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ((a, i), s) in &self.scopes {
            let _ = writeln!(out, "{a}\t{i}\t{}\t{}\t{}\t{}", s.pre, s.peri, s.post, s.sensitivity());
        }
        out
    }

    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut scopes = BTreeMap::new();
        for row in tsv::rows(text, 6, file)? {
            let f = &row.fields;
            let mut p = [0.0f64; 3];
            for (slot, raw) in p.iter_mut().zip(&f[2..5]) {
                *slot = raw
                    .parse::<f64>()
                    .ok()
                    .filter(|v| (0.0..=1.0).contains(v))
                    .ok_or_else(|| Error::malformed(file, row.line, format!("bad probability `{raw}`")))?;
            }
            if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::malformed(file, row.line, "scope does not sum to 1"));
            }
            let scope = Scope {
                pre: p[0],
                peri: p[1],
                post: p[2],
            };
            scopes.insert((ActivityId::from(f[0]), NeedId::from(f[1])), scope);
        }
        Ok(TemporalModel { scopes })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&tsv::read(path)?, &tsv::file_name(path))
    }
}

pub fn fit_temporal_scope(votes: &TemporalVotes) -> TemporalModel {
    TemporalModel {
        scopes: votes
            .iter()
            .filter_map(|(k, v)| Scope::from_votes(*v).map(|s| (k.clone(), s)))
            .collect(),
    }
}

/// Copies every level-1 (activity, need) scope to the activity's children
/// that lack their own entry.
pub fn inherit_scope(model: &TemporalModel, taxonomy: &ActivityTaxonomy) -> TemporalModel {
    let mut scopes = model.scopes.clone();
    for ((a, i), s) in &model.scopes {
        if taxonomy.level_of(a) != Some(Level::Top) {
            continue;
        }
        for child in taxonomy.children(a) {
            scopes.entry((child.clone(), i.clone())).or_insert(*s);
        }
    }
    TemporalModel { scopes }
}

/// Average post-relevance over all (need, activity) pairs, with unvoted
/// pairs at the uniform default.
pub fn compute_gamma(
    model: &TemporalModel,
    needs: &BTreeSet<NeedId>,
    activities: &BTreeSet<ActivityId>,
) -> Result<f64> {
    if needs.is_empty() || activities.is_empty() {
        return Err(Error::InvalidArgument(
            "gamma needs at least one need and one activity".into(),
        ));
    }
    let sum: f64 = activities
        .iter()
        .flat_map(|a| needs.iter().map(move |i| model.scope(a, i).post))
        .sum();
    Ok(sum / (needs.len() * activities.len()) as f64)
}
