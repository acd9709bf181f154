//! Canonical information needs and their synonym terms.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{tsv, Error, NeedId, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Need {
    pub id: NeedId,
    pub label: String,
    pub synonyms: BTreeSet<String>,
}

/// Disjoint synonym sets, one per need; every term maps to exactly one need.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeedLexicon {
    needs: BTreeMap<NeedId, Need>,
    term_to_need: BTreeMap<String, NeedId>,
}

#[derive(Serialize, Deserialize)]
struct WireLexicon {
    needs: Vec<Need>,
}

impl NeedLexicon {
    pub fn from_needs<I: IntoIterator<Item = Need>>(needs: I) -> Result<Self> {
        let mut lex = NeedLexicon::default();
        for need in needs {
            if !need.synonyms.contains(&need.label) {
                return Err(Error::InvalidArgument(format!(
                    "label `{}` of need `{}` is not among its synonyms",
                    need.label, need.id
                )));
            }
            for term in &need.synonyms {
                if let Some(other) = lex.term_to_need.insert(term.clone(), need.id.clone()) {
                    return Err(Error::InvalidArgument(format!(
                        "term `{term}` belongs to both `{other}` and `{}`",
                        need.id
                    )));
                }
            }
            if lex.needs.insert(need.id.clone(), need).is_some() {
                return Err(Error::DuplicateId(
                    lex.needs.keys().last().map(|k| k.to_string()).unwrap_or_default(),
                ));
            }
        }
        Ok(lex)
    }

    pub fn need_of(&self, term: &str) -> Option<&NeedId> {
        self.term_to_need.get(term)
    }

    pub fn get(&self, id: &NeedId) -> Option<&Need> {
        self.needs.get(id)
    }

    pub fn label(&self, id: &NeedId) -> Option<&str> {
        self.needs.get(id).map(|n| n.label.as_str())
    }

    pub fn needs(&self) -> impl Iterator<Item = &Need> {
        self.needs.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &NeedId> {
        self.needs.keys()
    }

    pub fn len(&self) -> usize {
        self.needs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.needs.is_empty()
    }

    /// Replaces display labels. The new label joins the need's synonym set
    /// and must not already belong to another need.
    pub fn override_labels(&mut self, overrides: &BTreeMap<NeedId, String>) -> Result<()> {
        for (id, label) in overrides {
            match self.term_to_need.get(label) {
                Some(owner) if owner != id => {
                    return Err(Error::InvalidArgument(format!(
                        "override label `{label}` for `{id}` is a synonym of `{owner}`"
                    )))
                }
                _ => {}
            }
            let need = self
                .needs
                .get_mut(id)
                .ok_or_else(|| Error::InvalidArgument(format!("override for unknown need `{id}`")))?;
            need.label = label.clone();
            need.synonyms.insert(label.clone());
            self.term_to_need.insert(label.clone(), id.clone());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = WireLexicon {
            needs: self.needs.values().cloned().collect(),
        };
        Ok(serde_json::to_string_pretty(&wire)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: WireLexicon = serde_json::from_str(text)?;
        Self::from_needs(wire.needs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&tsv::read(path)?)
    }
}

/// Turns each cluster into a need labelled (and identified) by its most
/// frequent term; ties go to the smaller term.
pub fn canonicalize(clusters: &[BTreeSet<String>], term_counts: &BTreeMap<String, u64>) -> Result<NeedLexicon> {
    let needs = clusters.iter().filter(|c| !c.is_empty()).map(|cluster| {
        let label = cluster
            .iter()
            .max_by(|a, b| {
                let ca = term_counts.get(*a).copied().unwrap_or(0);
                let cb = term_counts.get(*b).copied().unwrap_or(0);
                ca.cmp(&cb).then_with(|| b.cmp(a))
            })
            .expect("non-empty cluster")
            .clone();
        Need {
            id: NeedId::from(label.as_str()),
            label,
            synonyms: cluster.clone(),
        }
    });
    NeedLexicon::from_needs(needs)
}

/// `need_id \t label` override file.
pub fn parse_label_overrides(text: &str, file: &str) -> Result<BTreeMap<NeedId, String>> {
    let mut out = BTreeMap::new();
    for row in tsv::rows(text, 2, file)? {
        if row.fields[1].trim().is_empty() {
            return Err(Error::malformed(file, row.line, "empty label"));
        }
        out.insert(NeedId::from(row.fields[0]), row.fields[1].trim().to_owned());
    }
    Ok(out)
}
