//! One function per subcommand. Artifacts live in `work_dir`; reports go to
//! stdout, diagnostics to the log.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::TimeDelta;
use needcast_core::anticipate::{Anticipator, Dashboard, ModelKind};
use needcast_core::evaluate::{most_frequent_transitions, run_eval, JudgmentSet};
use needcast_core::needs::lexicon::parse_label_overrides;
use needcast_core::needs::suggest::{probe_venues, venues_by_id, FetchOptions};
use needcast_core::needs::synonyms::load_groupings;
use needcast_core::needs::{
    aggregate_terms, build_synonym_graph, canonicalize, cluster_synonyms, fleiss_kappa, load_term_counts,
    records_to_tsv, summarize_by_top_level, term_counts_to_tsv, term_totals, top_terms, AssessorGrouping, Cleanser,
    NeedLexicon, OfflineFileSource, SuggestionRecord, SuggestionSource,
};
use needcast_core::relevance::{NeedCounts, RelevanceModel};
use needcast_core::sessions::{
    chronological_split, dedup_checkins, extract_sessions, load_sessions, resolve_activities, sessions_to_jsonl,
    Session,
};
use needcast_core::taxonomy::{
    load_checkins, load_taxonomy, load_venues, parse_top_venues, top_venues_per_category, top_venues_to_tsv,
    venues_to_tsv, ActivityTaxonomy, CheckIn, Level, VenueTable,
};
use needcast_core::temporal::{compute_gamma, fit_temporal_scope, inherit_scope, load_votes, TemporalModel};
use needcast_core::transitions::{self, load_transitions, precision_at_k};
use needcast_core::{ActivityId, NeedId, VenueId};

use crate::config::{Gamma, PipelineConfig};
use crate::error::CliError;
use crate::http::HttpSource;

pub const VENUES_CLEAN: &str = "venues_clean.tsv";
pub const TOP_VENUES: &str = "top_venues.tsv";
pub const SESSIONS: &str = "sessions.jsonl";
pub const TRANSITIONS: &str = "transitions.tsv";
pub const SUGGESTIONS: &str = "suggestions.tsv";
pub const TERMS: &str = "terms.tsv";
pub const TERMS_SUMMARY: &str = "terms_summary.tsv";
pub const LEXICON: &str = "lexicon.json";
pub const NEED_COUNTS: &str = "need_counts.tsv";
pub const RELEVANCE: &str = "relevance.tsv";
pub const TEMPORAL: &str = "temporal.tsv";
pub const RESULTS: &str = "results.tsv";

const PRECISION_K: usize = 5;
const SUGGEST_TIMEOUT: Duration = Duration::from_secs(10);

/// Path of a configured input, which must exist.
fn input(cfg_value: &Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
    let path = cfg_value
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("config key `{key}` is not set")))?;
    require(path)?;
    Ok(path.clone())
}

/// Fails with a data error naming `path` when it is missing.
fn require(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Data(format!("missing input file {}", path.display())))
    }
}

fn artifact(cfg: &PipelineConfig, name: &str) -> Result<PathBuf, CliError> {
    let path = cfg.artifact(name);
    require(&path)?;
    Ok(path)
}

fn write(cfg: &PipelineConfig, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.work_dir)
        .map_err(|e| CliError::Internal(format!("{}: {e}", cfg.work_dir.display())))?;
    let path = cfg.artifact(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn taxonomy(cfg: &PipelineConfig) -> Result<ActivityTaxonomy, CliError> {
    Ok(load_taxonomy(&input(&cfg.taxonomy, "taxonomy")?)?)
}

fn nonempty_checkins(cfg: &PipelineConfig) -> Result<Vec<CheckIn>, CliError> {
    let path = input(&cfg.checkins, "checkins")?;
    let log = load_checkins(&path)?;
    if log.is_empty() {
        return Err(CliError::Data(format!("no check-ins in {}", path.display())));
    }
    Ok(log)
}

fn clean_venues(cfg: &PipelineConfig, tax: &ActivityTaxonomy) -> Result<VenueTable, CliError> {
    Ok(load_venues(&artifact(cfg, VENUES_CLEAN)?, tax, None)?)
}

fn minutes(m: f64) -> TimeDelta {
    TimeDelta::milliseconds((m * 60_000.0).round() as i64)
}

pub fn ingest(cfg: &PipelineConfig) -> Result<(), CliError> {
    let tax = taxonomy(cfg)?;
    let countries: BTreeSet<String> = cfg.countries.iter().cloned().collect();
    let filter = (!countries.is_empty()).then_some(&countries);
    let venues = load_venues(&input(&cfg.venues, "venues")?, &tax, filter)?;
    let log = nonempty_checkins(cfg)?;
    let top = top_venues_per_category(&tax, &venues, &log, cfg.top_venues);
    write(cfg, VENUES_CLEAN, &venues_to_tsv(&venues)?)?;
    write(cfg, TOP_VENUES, &top_venues_to_tsv(&top))?;
    let ranked: usize = top.values().map(Vec::len).sum();
    println!("activities\t{}", tax.len());
    println!("venues\t{}", venues.len());
    println!("checkins\t{}", log.len());
    println!("top_venues\t{ranked}");
    Ok(())
}

pub fn sessions(cfg: &PipelineConfig) -> Result<(), CliError> {
    let tax = taxonomy(cfg)?;
    let venues = clean_venues(cfg, &tax)?;
    let log = nonempty_checkins(cfg)?;
    let dedup = dedup_checkins(&log, minutes(cfg.dedup_window_minutes))?;
    let (events, skipped) = resolve_activities(&dedup.log, &venues);
    if skipped > 0 {
        log::warn!("{skipped} check-in(s) at unknown venues dropped");
    }
    let sessions = extract_sessions(&events, minutes(cfg.max_gap_hours * 60.0))?;
    if sessions.is_empty() {
        return Err(CliError::Data("no sessions: every check-in was dropped".into()));
    }
    write(cfg, SESSIONS, &sessions_to_jsonl(&sessions)?)?;
    let (train, test) = chronological_split(&sessions, cfg.train_fraction)?;
    println!("checkins\t{}", log.len());
    println!("duplicates_removed\t{}\t{:.4}", dedup.removed, dedup.removed_fraction());
    println!("unknown_venue\t{skipped}");
    println!("sessions\t{}", sessions.len());
    println!("train\t{}", train.len());
    println!("test\t{}", test.len());
    Ok(())
}

fn split_sessions(cfg: &PipelineConfig) -> Result<(Vec<Session>, Vec<Session>), CliError> {
    let all = load_sessions(&artifact(cfg, SESSIONS)?)?;
    Ok(chronological_split(&all, cfg.train_fraction)?)
}

pub fn fit_transitions(cfg: &PipelineConfig) -> Result<(), CliError> {
    let tax = taxonomy(cfg)?;
    let (train, test) = split_sessions(cfg)?;
    let mut out = String::new();
    let mut report = String::new();
    for level in [Level::Top, Level::Second] {
        let model = transitions::fit_transitions(&train, &tax, level)?;
        out.push_str(&model.to_tsv());
        match precision_at_k(&model, &test, &tax, PRECISION_K) {
            Ok(p) => {
                let _ = writeln!(report, "precision@{PRECISION_K}\tlevel{}\t{p:.4}", level.number());
            }
            Err(needcast_core::Error::InsufficientData(msg)) => log::warn!("level {}: {msg}", level.number()),
            Err(e) => return Err(e.into()),
        }
    }
    write(cfg, TRANSITIONS, &out)?;
    print!("{report}");
    Ok(())
}

fn suggestion_source(cfg: &PipelineConfig) -> Result<Box<dyn SuggestionSource>, CliError> {
    if let Some(path) = &cfg.suggestions_snapshot {
        require(path)?;
        return Ok(Box::new(OfflineFileSource::load(path)?));
    }
    if let Some(url) = &cfg.suggest_url {
        return Ok(Box::new(HttpSource::new(url, "q", SUGGEST_TIMEOUT)?));
    }
    Err(CliError::Usage(
        "build-needs needs `suggestions_snapshot` or `suggest_url`".into(),
    ))
}

pub fn build_needs(cfg: &PipelineConfig) -> Result<(), CliError> {
    let tax = taxonomy(cfg)?;
    let venues = clean_venues(cfg, &tax)?;
    let top_path = artifact(cfg, TOP_VENUES)?;
    let top = parse_top_venues(
        &std::fs::read_to_string(&top_path).map_err(|e| CliError::Internal(e.to_string()))?,
        TOP_VENUES,
    )?;
    let ids: Vec<VenueId> = top.values().flatten().map(|(v, _)| v.clone()).collect();
    let targets = venues_by_id(&venues, &ids)?;

    let cleanser = match &cfg.gazetteer {
        Some(path) => {
            require(path)?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Internal(e.to_string()))?;
            Cleanser::from_gazetteer_text(&text)
        }
        None => Cleanser::new(std::iter::empty::<&str>()),
    };
    let source = suggestion_source(cfg)?;
    let opts = FetchOptions {
        max_retries: cfg.max_retries,
        rate_limit: cfg.rate_limit,
    };
    let fetched = probe_venues(source.as_ref(), targets, opts);

    let mut records = Vec::new();
    let (mut raw, mut rejected) = (0usize, 0usize);
    for (venue_id, suffixes) in fetched {
        let activity = venues[&venue_id].activity.clone();
        for s in suffixes {
            raw += 1;
            match cleanser.cleanse(&s) {
                Some(suffix) => records.push(SuggestionRecord {
                    venue_id: venue_id.clone(),
                    activity: activity.clone(),
                    suffix,
                }),
                None => rejected += 1,
            }
        }
    }
    if records.is_empty() {
        return Err(CliError::Data("no suggestion suffixes survived cleansing".into()));
    }
    let counts = aggregate_terms(&records);
    let mut summary = String::from("category\ttotal\tunique\n");
    for s in summarize_by_top_level(&counts, &tax) {
        let _ = writeln!(summary, "{}\t{}\t{}", s.activity, s.total, s.unique);
    }
    write(cfg, SUGGESTIONS, &records_to_tsv(&records)?)?;
    write(cfg, TERMS, &term_counts_to_tsv(&counts)?)?;
    write(cfg, TERMS_SUMMARY, &summary)?;
    println!("probed_venues\t{}", ids.len());
    println!("suffixes\t{raw}");
    println!("rejected\t{rejected}");
    println!("distinct_terms\t{}", term_totals(&counts).len());
    Ok(())
}

/// Keeps only the given terms in every assessor's groups.
fn restrict_groupings(groupings: &[AssessorGrouping], keep: &BTreeSet<String>) -> Vec<AssessorGrouping> {
    groupings
        .iter()
        .map(|g| AssessorGrouping {
            assessor: g.assessor.clone(),
            groups: g
                .groups
                .iter()
                .map(|grp| grp.iter().filter(|t| keep.contains(*t)).cloned().collect::<Vec<_>>())
                .filter(|grp| !grp.is_empty())
                .collect(),
        })
        .collect()
}

pub fn normalize_needs(cfg: &PipelineConfig) -> Result<(), CliError> {
    let tax = taxonomy(cfg)?;
    let terms = load_term_counts(&artifact(cfg, TERMS)?)?;
    let totals = term_totals(&terms);
    let top = top_terms(&terms, cfg.top_terms);

    let mut clusters: Vec<BTreeSet<String>> = Vec::new();
    let mut kappa = None;
    if let Some(path) = &cfg.synonyms {
        require(path)?;
        let groupings = restrict_groupings(&load_groupings(path)?, &top);
        if groupings.len() >= 2 {
            kappa = Some(fleiss_kappa(&groupings)?);
        }
        let graph = build_synonym_graph(&groupings)?;
        clusters = cluster_synonyms(&graph, cfg.density_min, cfg.cp_min)?;
    } else {
        log::warn!("no synonym groupings configured; every term is its own need");
    }
    let covered: BTreeSet<String> = clusters.iter().flatten().cloned().collect();
    clusters.extend(
        totals
            .keys()
            .filter(|t| !covered.contains(*t))
            .map(|t| BTreeSet::from([t.clone()])),
    );
    let mut lexicon = canonicalize(&clusters, &totals)?;
    if let Some(path) = &cfg.label_overrides {
        require(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Internal(e.to_string()))?;
        lexicon.override_labels(&parse_label_overrides(&text, &path.display().to_string())?)?;
    }
    let counts = NeedCounts::from_term_counts(&terms, &lexicon, &tax)?;
    let relevance = RelevanceModel::new(counts.clone(), tax, cfg.smoothing);

    write(cfg, LEXICON, &lexicon.to_json()?)?;
    write(cfg, NEED_COUNTS, &counts.to_tsv()?)?;
    write(cfg, RELEVANCE, &relevance.to_tsv()?)?;
    println!("terms\t{}", totals.len());
    println!("clustered_terms\t{}", top.len());
    println!("needs\t{}", lexicon.len());
    match kappa {
        Some(k) => println!("fleiss_kappa\t{k:.4}"),
        None => println!("fleiss_kappa\tNA"),
    }
    Ok(())
}

fn gamma_from(temporal: &TemporalModel, lexicon: &NeedLexicon, tax: &ActivityTaxonomy) -> Result<f64, CliError> {
    let needs: BTreeSet<NeedId> = lexicon.ids().cloned().collect();
    let tops: BTreeSet<ActivityId> = tax.at_level(Level::Top).cloned().collect();
    Ok(compute_gamma(temporal, &needs, &tops)?)
}

pub fn fit_temporal(cfg: &PipelineConfig) -> Result<(), CliError> {
    let tax = taxonomy(cfg)?;
    let votes = load_votes(&input(&cfg.temporal_votes, "temporal_votes")?)?;
    for (a, _) in votes.keys() {
        if !tax.contains(a) {
            return Err(CliError::Data(format!("temporal votes name unknown category `{a}`")));
        }
    }
    let model = inherit_scope(&fit_temporal_scope(&votes), &tax);
    let lexicon = NeedLexicon::load(&artifact(cfg, LEXICON)?)?;
    let gamma = gamma_from(&model, &lexicon, &tax)?;
    write(cfg, TEMPORAL, &model.to_tsv())?;
    println!("scopes\t{}", model.len());
    println!("gamma\t{gamma:.4}");
    Ok(())
}

/// Loads every fitted artifact into a ready-to-rank bundle.
fn anticipator(cfg: &PipelineConfig) -> Result<(Anticipator, NeedLexicon), CliError> {
    let tax = taxonomy(cfg)?;
    let lexicon = NeedLexicon::load(&artifact(cfg, LEXICON)?)?;
    let counts = NeedCounts::load(&artifact(cfg, NEED_COUNTS)?, &tax)?;
    let transitions = load_transitions(&artifact(cfg, TRANSITIONS)?, &tax)?;
    let temporal = TemporalModel::load(&artifact(cfg, TEMPORAL)?)?;
    let gamma = match cfg.gamma {
        Gamma::Fixed(g) => g,
        Gamma::Auto => gamma_from(&temporal, &lexicon, &tax)?,
    };
    let relevance = RelevanceModel::new(counts, tax, cfg.smoothing);
    Ok((Anticipator::new(relevance, transitions, &temporal, gamma)?, lexicon))
}

fn parse_model(name: &str) -> Result<ModelKind, CliError> {
    name.parse()
        .map_err(|e: needcast_core::Error| CliError::Usage(e.to_string()))
}

pub fn rank(cfg: &PipelineConfig, last: &str, model: &str, k: usize) -> Result<(), CliError> {
    let model = parse_model(model)?;
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let (ant, lexicon) = anticipator(cfg)?;
    let ranking = ant.rank(model, &ActivityId::from(last))?;
    let dashboard = Dashboard::new(&ranking, k, |i| lexicon.label(i).unwrap_or(i.as_str()).to_owned());
    println!("{}", serde_json::to_string(&dashboard)?);
    Ok(())
}

pub fn evaluate(cfg: &PipelineConfig, models: &[String]) -> Result<(), CliError> {
    let models: Vec<ModelKind> = models
        .iter()
        .map(|m| parse_model(m.trim()))
        .collect::<Result<BTreeSet<_>, _>>()?
        .into_iter()
        .collect();
    let (ant, _) = anticipator(cfg)?;
    let (_, test) = split_sessions(cfg)?;
    let judgments = JudgmentSet::load(&input(&cfg.judgments, "judgments")?)?;
    let sample = most_frequent_transitions(&test, ant.relevance().taxonomy(), cfg.eval_sample, cfg.eval_level)?;
    let results = run_eval(&ant, &models, &sample, &judgments, &cfg.ndcg_ks, cfg.candidates)?;
    if results.skipped > 0 {
        log::warn!("{} transition(s) skipped for lack of needs", results.skipped);
    }
    write(cfg, RESULTS, &results.to_tsv())?;
    let mut summary = String::from("model\tk\tmean_ndcg\n");
    for ((model, k), mean) in &results.means {
        let _ = writeln!(summary, "{model}\t{k}\t{mean:.4}");
    }
    print!("{summary}");
    Ok(())
}
