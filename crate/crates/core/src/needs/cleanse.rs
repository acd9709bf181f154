//! Suffix cleansing: numbers, day/month names and place names are removed,
//! and anything of two characters or fewer is discarded.

use std::collections::BTreeSet;

const DAY_MONTH_EN: &str = include_str!("../../data/day_month_en.txt");

#[derive(Debug, Clone)]
pub struct Cleanser {
    stopwords: BTreeSet<String>,
    /// Gazetteer entries as token sequences.
    places: Vec<Vec<String>>,
}

impl Default for Cleanser {
    fn default() -> Self {
        Cleanser::new(std::iter::empty::<&str>())
    }
}

impl Cleanser {
    pub fn new<I, S>(gazetteer: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let stopwords = DAY_MONTH_EN
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect();
        let mut places: Vec<Vec<String>> = gazetteer
            .into_iter()
            .map(|p| tokens(p.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        // longest phrases first so "new york" wins over "york"
        places.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        places.dedup();
        Cleanser { stopwords, places }
    }

    /// Gazetteer file: one place name per line; blank lines and `#` comments
    /// are ignored.
    pub fn from_gazetteer_text(text: &str) -> Self {
        Cleanser::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn cleanse(&self, raw: &str) -> Option<String> {
        let mut toks: Vec<String> = tokens(raw)
            .into_iter()
            .filter(|t| !is_number(t) && !self.stopwords.contains(t))
            .collect();
        // removing one phrase can join the halves of another
        while self.strip_places(&mut toks) {}
        let out = toks.join(" ");
        (out.chars().count() > 2).then_some(out)
    }

    fn strip_places(&self, toks: &mut Vec<String>) -> bool {
        let mut changed = false;
        for place in &self.places {
            let mut i = 0;
            while i + place.len() <= toks.len() {
                if toks[i..i + place.len()] == place[..] {
                    toks.drain(i..i + place.len());
                    changed = true;
                } else {
                    i += 1;
                }
            }
        }
        changed
    }
}

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

fn is_number(tok: &str) -> bool {
    tok.chars().any(|c| c.is_ascii_digit())
        && tok
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | ':' | '/' | '-'))
}
