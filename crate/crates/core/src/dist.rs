//! Sparse discrete distributions with deterministic ranking.

use std::collections::BTreeMap;

/// A sparse mapping from outcomes to probabilities (or scores).
///
/// Outcomes absent from the map have probability zero. Iteration order is
/// the key order, so anything derived from a `Distribution` is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<K: Ord> {
    probs: BTreeMap<K, f64>,
}

impl<K: Ord> Default for Distribution<K> {
    fn default() -> Self {
        Distribution { probs: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> Distribution<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Normalizes non-negative weights into a distribution. Zero weights are
    /// dropped; an all-zero input yields an empty distribution.
    pub fn from_counts<I>(counts: I) -> Self
    where
        I: IntoIterator<Item = (K, f64)>,
    {
        let items: Vec<(K, f64)> = counts.into_iter().filter(|(_, w)| *w > 0.0).collect();
        let total: f64 = items.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Self::default();
        }
        Distribution {
            probs: items.into_iter().map(|(k, w)| (k, w / total)).collect(),
        }
    }

    pub fn from_map(probs: BTreeMap<K, f64>) -> Self {
        Distribution { probs }
    }

    pub fn get(&self, key: &K) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, key: K, value: f64) {
        *self.probs.entry(key).or_insert(0.0) += value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.probs.iter().map(|(k, p)| (k, *p))
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.probs.keys()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn as_map(&self) -> &BTreeMap<K, f64> {
        &self.probs
    }

    /// Entries sorted by value descending, ties broken by key ascending.
    pub fn ranked(&self) -> Vec<(K, f64)> {
        let mut v: Vec<(K, f64)> = self.probs.iter().map(|(k, p)| (k.clone(), *p)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// The first `k` keys of [`Distribution::ranked`].
    pub fn top_k(&self, k: usize) -> Vec<K> {
        self.ranked().into_iter().take(k).map(|(key, _)| key).collect()
    }
}

impl<K: Ord + Clone> FromIterator<(K, f64)> for Distribution<K> {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        let mut d = Distribution::new();
        for (k, v) in iter {
            d.add(k, v);
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_counts_normalizes_and_drops_zeros() {
        let d = Distribution::from_counts([("a", 3.0), ("b", 1.0), ("c", 0.0)]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.get(&"a"), 0.75);
        assert_eq!(d.get(&"c"), 0.0);
    }

    #[test]
    fn ranking_breaks_ties_by_key() {
        let d = Distribution::from_counts([("z", 1.0), ("b", 2.0), ("a", 1.0)]);
        assert_eq!(d.top_k(3), vec!["b", "a", "z"]);
        assert_eq!(d.top_k(10).len(), 3);
    }

    #[test]
    fn all_zero_counts_give_empty() {
        let d: Distribution<&str> = Distribution::from_counts([("a", 0.0)]);
        assert!(d.is_empty());
    }
}
