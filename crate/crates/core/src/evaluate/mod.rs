//! Evaluation over sampled activity transitions: for each transition the
//! candidate needs are the top needs of both activities, judged on a 0..4
//! scale, and each model's ranking for the source activity is scored with
//! NDCG.

mod ndcg;
mod stats;

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::anticipate::{Anticipator, ModelKind};
use crate::relevance::RelevanceModel;
use crate::sessions::Session;
use crate::taxonomy::{ActivityTaxonomy, Level};
use crate::transitions::lift;
use crate::{tsv, ActivityId, Error, NeedId, Result};

pub use ndcg::{ndcg_at_k, MAX_GRADE};
pub use stats::paired_t_test;

/// Needs taken from each side of a transition.
pub const DEFAULT_CANDIDATES: usize = 10;
/// Second-level transitions sampled from the test sessions.
pub const DEFAULT_SAMPLE: usize = 100;
pub const DEFAULT_NDCG_KS: [usize; 2] = [3, 5];

pub type Transition = (ActivityId, ActivityId);

/// Graded usefulness of needs during a transition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JudgmentSet {
    grades: BTreeMap<Transition, BTreeMap<NeedId, u8>>,
}

impl JudgmentSet {
    pub fn insert(&mut self, from: ActivityId, to: ActivityId, need: NeedId, grade: u8) -> Result<()> {
        if grade > MAX_GRADE {
            return Err(Error::InvalidArgument(format!("grade {grade} outside 0..={MAX_GRADE}")));
        }
        let row = self.grades.entry((from, to)).or_default();
        if row.contains_key(&need) {
            return Err(Error::DuplicateId(need.to_string()));
        }
        row.insert(need, grade);
        Ok(())
    }

    pub fn for_transition(&self, from: &ActivityId, to: &ActivityId) -> Option<&BTreeMap<NeedId, u8>> {
        self.grades.get(&(from.clone(), to.clone()))
    }

    pub fn len(&self) -> usize {
        self.grades.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    /// Parses `from_category \t to_category \t need_id \t grade`.
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut set = JudgmentSet::default();
        for row in tsv::rows(text, 4, file)? {
            let f = &row.fields;
            let grade = f[3]
                .parse::<u8>()
                .ok()
                .filter(|g| *g <= MAX_GRADE)
                .ok_or_else(|| Error::malformed(file, row.line, format!("grade `{}` outside 0..=4", f[3])))?;
            set.insert(f[0].into(), f[1].into(), f[2].into(), grade)
                .map_err(|e| Error::malformed(file, row.line, e.to_string()))?;
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&tsv::read(path)?, &tsv::file_name(path))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ((from, to), row) in &self.grades {
            for (need, g) in row {
                let _ = writeln!(out, "{from}\t{to}\t{need}\t{g}");
            }
        }
        out
    }
}

/// Union of the top-`n` needs of both activities.
pub fn candidate_needs(
    relevance: &RelevanceModel,
    from: &ActivityId,
    to: &ActivityId,
    n: usize,
) -> Result<BTreeSet<NeedId>> {
    let mut out: BTreeSet<NeedId> = relevance.distribution(from)?.top_k(n).into_iter().collect();
    out.extend(relevance.distribution(to)?.top_k(n));
    Ok(out)
}

/// At level 2, the `m` most frequent distinct transitions in the test
/// sessions (ties by (from, to)); at level 1, every ordered pair of
/// top-level activities.
pub fn most_frequent_transitions(
    test: &[Session],
    taxonomy: &ActivityTaxonomy,
    m: usize,
    level: Level,
) -> Result<Vec<Transition>> {
    if m == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if level == Level::Top {
        let tops: Vec<&ActivityId> = taxonomy.at_level(Level::Top).collect();
        if tops.is_empty() {
            return Err(Error::InsufficientData("no top-level activities".into()));
        }
        return Ok(tops
            .iter()
            .flat_map(|a| tops.iter().map(move |b| ((*a).clone(), (*b).clone())))
            .collect());
    }
    let mut tally: BTreeMap<Transition, usize> = BTreeMap::new();
    for s in test {
        for pair in lift(s, taxonomy, level)?.windows(2) {
            *tally.entry((pair[0].clone(), pair[1].clone())).or_default() += 1;
        }
    }
    if tally.is_empty() {
        return Err(Error::InsufficientData("no transitions in test sessions".into()));
    }
    let mut ranked: Vec<(Transition, usize)> = tally.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(m).map(|(t, _)| t).collect())
}

/// A model's ranking restricted to `candidates`, followed by the candidates
/// it did not score, in id order.
pub fn restrict_to_candidates(ranking: &[NeedId], candidates: &BTreeSet<NeedId>) -> Vec<NeedId> {
    let mut out: Vec<NeedId> = ranking.iter().filter(|i| candidates.contains(*i)).cloned().collect();
    let seen: BTreeSet<NeedId> = out.iter().cloned().collect();
    out.extend(candidates.iter().filter(|i| !seen.contains(*i)).cloned());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub model: ModelKind,
    pub k: usize,
    pub from: ActivityId,
    pub to: ActivityId,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedTest {
    pub k: usize,
    pub a: ModelKind,
    pub b: ModelKind,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResults {
    pub rows: Vec<EvalRow>,
    pub means: BTreeMap<(ModelKind, usize), f64>,
    pub tests: Vec<PairedTest>,
    /// Transitions skipped because an activity has no observed needs.
    pub skipped: usize,
    /// Candidate needs without a judgment (graded 0).
    pub unjudged: usize,
}

impl EvalResults {
    pub fn mean(&self, model: ModelKind, k: usize) -> Option<f64> {
        self.means.get(&(model, k)).copied()
    }

    pub fn scores(&self, model: ModelKind, k: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.model == model && r.k == k)
            .map(|r| r.ndcg)
            .collect()
    }

    /// Per-transition rows, then a summary of means and pairwise p-values.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("model\tk\ttransition_from\ttransition_to\tndcg\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{:.6}", r.model, r.k, r.from, r.to, r.ndcg);
        }
        out.push_str("\n# summary\nmodel\tk\tmean_ndcg\ttransitions\n");
        for ((model, k), mean) in &self.means {
            let n = self.scores(*model, *k).len();
            let _ = writeln!(out, "{model}\t{k}\t{mean:.4}\t{n}");
        }
        out.push_str("\n# paired t-test (two-tailed)\nk\tmodel_a\tmodel_b\tp_value\n");
        for t in &self.tests {
            let _ = writeln!(out, "{}\t{}\t{}\t{:.4}", t.k, t.a, t.b, t.p_value);
        }
        out
    }
}

/// Scores every model on every sampled transition at every cutoff.
pub fn run_eval(
    anticipator: &Anticipator,
    models: &[ModelKind],
    sample: &[Transition],
    judgments: &JudgmentSet,
    ks: &[usize],
    n_candidates: usize,
) -> Result<EvalResults> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty transition sample".into()));
    }
    if models.is_empty() || ks.is_empty() {
        return Err(Error::InvalidArgument("need at least one model and one cutoff".into()));
    }
    let relevance = anticipator.relevance();
    let mut per_model: BTreeMap<(ModelKind, usize), Vec<EvalRow>> = BTreeMap::new();
    let (mut skipped, mut unjudged) = (0, 0);
    let mut ranking_cache: BTreeMap<(ModelKind, &ActivityId), Vec<NeedId>> = BTreeMap::new();

    for (from, to) in sample {
        let candidates = match candidate_needs(relevance, from, to, n_candidates) {
            Ok(c) => c,
            Err(Error::NoNeeds(a)) => {
                log::warn!("skipping {from} -> {to}: no needs observed for {a}");
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let judged = judgments.for_transition(from, to);
        let mut grades = BTreeMap::new();
        for need in &candidates {
            match judged.and_then(|j| j.get(need)) {
                Some(g) => {
                    grades.insert(need.clone(), *g);
                }
                None => {
                    log::warn!("no judgment for {need} on {from} -> {to}; grading 0");
                    unjudged += 1;
                    grades.insert(need.clone(), 0);
                }
            }
        }
        for &model in models {
            if let Entry::Vacant(slot) = ranking_cache.entry((model, from)) {
                slot.insert(anticipator.rank(model, from)?.ids());
            }
            let ranking = restrict_to_candidates(&ranking_cache[&(model, from)], &candidates);
            for &k in ks {
                let ndcg = ndcg_at_k(&ranking, &grades, k)?;
                per_model.entry((model, k)).or_default().push(EvalRow {
                    model,
                    k,
                    from: from.clone(),
                    to: to.clone(),
                    ndcg,
                });
            }
        }
    }
    if per_model.is_empty() {
        return Err(Error::InsufficientData("every sampled transition was skipped".into()));
    }

    let means = per_model
        .iter()
        .map(|(key, rows)| (*key, rows.iter().map(|r| r.ndcg).sum::<f64>() / rows.len() as f64))
        .collect();
    let mut tests = Vec::new();
    let mut sorted_models: Vec<ModelKind> = models.to_vec();
    sorted_models.sort();
    sorted_models.dedup();
    for &k in ks {
        for (ai, &a) in sorted_models.iter().enumerate() {
            for &b in &sorted_models[ai + 1..] {
                let sa: Vec<f64> = per_model[&(a, k)].iter().map(|r| r.ndcg).collect();
                let sb: Vec<f64> = per_model[&(b, k)].iter().map(|r| r.ndcg).collect();
                if sa.len() < 2 {
                    continue;
                }
                tests.push(PairedTest {
                    k,
                    a,
                    b,
                    p_value: paired_t_test(&sa, &sb)?,
                });
            }
        }
    }
    Ok(EvalResults {
        rows: per_model.into_values().flatten().collect(),
        means,
        tests,
        skipped,
        unjudged,
    })
}
