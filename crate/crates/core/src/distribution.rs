//! Finitely supported sub-probability distributions with exact masses.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::rational::Rational;

/// A finitely supported map from outcomes to positive rationals.
///
/// Only strictly positive masses are stored. The total mass bound (≤ 1) is
/// not enforced on construction so that malformed inputs can be reported by
/// validation; see [`SubDistribution::is_sub_probability`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubDistribution<K: Ord> {
    masses: BTreeMap<K, Rational>,
}

impl<K: Ord> Default for SubDistribution<K> {
    fn default() -> Self {
        SubDistribution {
            masses: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> SubDistribution<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dirac(point: K) -> Self {
        let mut d = Self::new();
        d.add(point, Rational::one());
        d
    }

    /// Adds `mass` to `point`; zero contributions are ignored.
    pub fn add(&mut self, point: K, mass: Rational) {
        if mass.is_zero() {
            return;
        }
        let cancelled = {
            let entry = self.masses.entry(point.clone()).or_insert_with(Rational::zero);
            *entry += mass;
            entry.is_zero()
        };
        if cancelled {
            self.masses.remove(&point);
        }
    }

    pub fn remove(&mut self, point: &K) -> Rational {
        self.masses.remove(point).unwrap_or_else(Rational::zero)
    }

    pub fn get(&self, point: &K) -> Rational {
        self.masses.get(point).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.masses.values().fold(Rational::zero(), |acc, m| acc + m)
    }

    /// `1 - total`, the mass that goes nowhere.
    pub fn deficit(&self) -> Rational {
        Rational::one() - self.total()
    }

    pub fn is_sub_probability(&self) -> bool {
        self.masses.values().all(|m| *m > Rational::zero()) && self.total() <= Rational::one()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.masses.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.masses.keys()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        let mut out = Self::new();
        if factor.is_zero() {
            return out;
        }
        for (k, m) in &self.masses {
            out.add(k.clone(), m * factor);
        }
        out
    }

    /// Pointwise `self + weight * other`.
    pub fn add_scaled(&mut self, other: &Self, weight: &Rational) {
        if weight.is_zero() {
            return;
        }
        for (k, m) in &other.masses {
            self.add(k.clone(), m * weight);
        }
    }

    /// `e * self + (1 - e) * other`.
    pub fn mix(&self, weight: &Rational, other: &Self) -> Self {
        let mut out = self.scaled(weight);
        out.add_scaled(other, &(Rational::one() - weight));
        out
    }

    /// Applies `f` to every outcome, merging collisions.
    pub fn map_outcomes<J: Ord + Clone>(&self, mut f: impl FnMut(&K) -> J) -> SubDistribution<J> {
        let mut out = SubDistribution::new();
        for (k, m) in &self.masses {
            out.add(f(k), m.clone());
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<(K, Rational)> for SubDistribution<K> {
    fn from_iter<I: IntoIterator<Item = (K, Rational)>>(iter: I) -> Self {
        let mut d = Self::new();
        for (k, m) in iter {
            d.add(k, m);
        }
        d
    }
}
