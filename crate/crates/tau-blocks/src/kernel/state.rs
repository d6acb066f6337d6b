use std::collections::BTreeMap;

use super::scalar::Scalar;

/// Sparse linear combination of basis monomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StateVector<K: Ord> {
    terms: BTreeMap<K, Scalar>,
}

impl<K: Ord> Default for StateVector<K> {
    fn default() -> Self {
        StateVector { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> StateVector<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(key: K) -> Self {
        let mut v = Self::new();
        v.add_term(key, Scalar::one());
        v
    }

    pub fn add_term(&mut self, key: K, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(key.clone()).or_default();
        *slot += &coeff;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_scaled(&mut self, other: &StateVector<K>, k: &Scalar) {
        if k.is_zero() {
            return;
        }
        for (key, c) in &other.terms {
            self.add_term(key.clone(), c * k);
        }
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        let mut v = Self::new();
        v.add_scaled(self, k);
        v
    }

    pub fn coeff(&self, key: &K) -> Scalar {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}
