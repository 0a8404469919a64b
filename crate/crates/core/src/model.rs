//! Domain vocabulary: houses, agents, preference lists, profiles, fractional
//! assignments and cardinal utilities.
//!
//! Houses and agents are plain 0-based indices everywhere inside the crate.
//! The text formats in [`crate::format`] shift them to 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// A strict ordering over a subset of the houses `0..houses`.
///
/// Lists shorter than `houses` are *partial*: an agent reporting one stops
/// eating once every listed house is gone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PreferenceList {
    order: Vec<usize>,
    houses: usize,
}

impl PreferenceList {
    pub fn new(order: Vec<usize>, houses: usize) -> Result<Self> {
        let mut seen = vec![false; houses];
        for &h in &order {
            if h >= houses {
                return Err(Error::InvalidList {
                    agent: 0,
                    message: format!("house {} out of range 1..={}", h + 1, houses),
                });
            }
            if std::mem::replace(&mut seen[h], true) {
                return Err(Error::InvalidList {
                    agent: 0,
                    message: format!("house {} listed twice", h + 1),
                });
            }
        }
        Ok(Self { order, houses })
    }

    /// `h_0, h_1, …, h_{m-1}`.
    pub fn identity(houses: usize) -> Self {
        Self {
            order: (0..houses).collect(),
            houses,
        }
    }

    pub fn empty(houses: usize) -> Self {
        Self {
            order: Vec::new(),
            houses,
        }
    }

    pub(crate) fn from_parts_unchecked(order: Vec<usize>, houses: usize) -> Self {
        debug_assert!(Self::new(order.clone(), houses).is_ok());
        Self { order, houses }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn house_count(&self) -> usize {
        self.houses
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.order.len() == self.houses
    }

    pub fn contains(&self, house: usize) -> bool {
        self.order.contains(&house)
    }

    pub fn position(&self, house: usize) -> Option<usize> {
        self.order.iter().position(|&h| h == house)
    }

    /// `rank[h]` is the 0-based position of `h`, or `usize::MAX` when unlisted.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![usize::MAX; self.houses];
        for (k, &h) in self.order.iter().enumerate() {
            rank[h] = k;
        }
        rank
    }

    /// This list followed by every unlisted house in `filler`'s order.
    pub fn completed_by(&self, filler: &PreferenceList) -> PreferenceList {
        let mut order = self.order.clone();
        let mut listed = vec![false; self.houses];
        for &h in &order {
            listed[h] = true;
        }
        order.extend(filler.order.iter().copied().filter(|&h| !listed[h]));
        order.extend((0..self.houses).filter(|&h| !listed[h] && !filler.contains(h)));
        Self::from_parts_unchecked(order, self.houses)
    }

    pub fn prefix(&self, len: usize) -> PreferenceList {
        Self::from_parts_unchecked(self.order[..len].to_vec(), self.houses)
    }
}

impl fmt::Display for PreferenceList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &h in &self.order {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}", h + 1)?;
        }
        Ok(())
    }
}

/// One preference list per agent over a common set of `m` houses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Profile {
    lists: Vec<PreferenceList>,
    houses: usize,
}

impl Profile {
    pub fn new(lists: Vec<PreferenceList>, houses: usize) -> Result<Self> {
        for (agent, list) in lists.iter().enumerate() {
            if list.house_count() != houses {
                return Err(Error::DimensionMismatch(format!(
                    "agent {} list is over {} houses, profile has {}",
                    agent + 1,
                    list.house_count(),
                    houses
                )));
            }
        }
        Ok(Self { lists, houses })
    }

    /// Builds a profile from 0-based house orders, validating each list.
    pub fn from_orders(orders: Vec<Vec<usize>>, houses: usize) -> Result<Self> {
        let lists = orders
            .into_iter()
            .enumerate()
            .map(|(agent, order)| {
                PreferenceList::new(order, houses).map_err(|e| match e {
                    Error::InvalidList { message, .. } => Error::InvalidList {
                        agent: agent + 1,
                        message,
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(lists, houses)
    }

    /// Same as [`Profile::from_orders`] but with 1-based house labels, the
    /// way houses are written down by hand.
    pub fn from_one_based(orders: &[&[usize]], houses: usize) -> Result<Self> {
        let orders = orders
            .iter()
            .enumerate()
            .map(|(agent, row)| {
                row.iter()
                    .map(|&h| {
                        h.checked_sub(1).ok_or_else(|| Error::InvalidList {
                            agent: agent + 1,
                            message: "house labels start at 1".into(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_orders(orders, houses)
    }

    pub fn agents(&self) -> usize {
        self.lists.len()
    }

    pub fn houses(&self) -> usize {
        self.houses
    }

    pub fn lists(&self) -> &[PreferenceList] {
        &self.lists
    }

    pub fn list(&self, agent: usize) -> &PreferenceList {
        &self.lists[agent]
    }

    pub fn is_complete(&self) -> bool {
        self.lists.iter().all(PreferenceList::is_complete)
    }

    pub fn check_agent(&self, agent: usize) -> Result<()> {
        if agent < self.agents() {
            Ok(())
        } else {
            Err(Error::AgentOutOfRange {
                agent,
                agents: self.agents(),
            })
        }
    }

    pub fn require_complete(&self) -> Result<()> {
        match self.lists.iter().position(|l| !l.is_complete()) {
            None => Ok(()),
            Some(agent) => Err(Error::IncompletePreference {
                agent: agent + 1,
                len: self.lists[agent].len(),
                houses: self.houses,
            }),
        }
    }

    /// The profile with `agent`'s list swapped for `list`.
    pub fn with_list(&self, agent: usize, list: PreferenceList) -> Profile {
        let mut lists = self.lists.clone();
        lists[agent] = list;
        Profile {
            lists,
            houses: self.houses,
        }
    }
}

/// An `n × m` matrix of house shares; row `i` is agent `i`'s allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment<S = Rational> {
    shares: Vec<Vec<S>>,
    houses: usize,
}

impl<S: Scalar> Assignment<S> {
    pub fn zeros(agents: usize, houses: usize) -> Self {
        Self {
            shares: vec![vec![S::zero(); houses]; agents],
            houses,
        }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let houses = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != houses) {
            return Err(Error::DimensionMismatch("ragged assignment rows".into()));
        }
        Ok(Self {
            shares: rows,
            houses,
        })
    }

    pub fn agents(&self) -> usize {
        self.shares.len()
    }

    pub fn houses(&self) -> usize {
        self.houses
    }

    pub fn row(&self, agent: usize) -> &[S] {
        &self.shares[agent]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.shares
    }

    pub fn get(&self, agent: usize, house: usize) -> &S {
        &self.shares[agent][house]
    }

    pub(crate) fn add(&mut self, agent: usize, house: usize, amount: &S) {
        let cell = &mut self.shares[agent][house];
        *cell = cell.clone() + amount.clone();
    }

    pub fn column_sum(&self, house: usize) -> S {
        self.shares
            .iter()
            .fold(S::zero(), |acc, row| acc + row[house].clone())
    }

    pub fn row_sum(&self, agent: usize) -> S {
        crate::scalar::sum(&self.shares[agent])
    }

    pub fn into_rows(self) -> Vec<Vec<S>> {
        self.shares
    }
}

/// Cardinal utilities: `value(i, h)` is agent `i`'s utility for house `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityProfile<S = Rational> {
    values: Vec<Vec<S>>,
    houses: usize,
}

impl<S: Scalar> UtilityProfile<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let houses = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != houses) {
            return Err(Error::DimensionMismatch("ragged utility rows".into()));
        }
        Ok(Self {
            values: rows,
            houses,
        })
    }

    pub fn agents(&self) -> usize {
        self.values.len()
    }

    pub fn houses(&self) -> usize {
        self.houses
    }

    pub fn row(&self, agent: usize) -> &[S] {
        &self.values[agent]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.values
    }

    /// Expected utility every agent obtains under `assignment`.
    pub fn expected_utilities(&self, assignment: &Assignment<S>) -> Vec<S> {
        (0..self.agents())
            .map(|i| crate::relations::eu_value(assignment.row(i), self.row(i)))
            .collect()
    }
}

/// Result of comparing two allocations of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComparisonOutcome {
    StrictlyPreferred,
    Equal,
    StrictlyDispreferred,
    Incomparable,
}

impl ComparisonOutcome {
    pub fn reverse(self) -> Self {
        match self {
            Self::StrictlyPreferred => Self::StrictlyDispreferred,
            Self::StrictlyDispreferred => Self::StrictlyPreferred,
            other => other,
        }
    }
}

/// A place where utilities disagree with the ordinal preference:
/// `better` is listed directly before `worse` but is not strictly more valuable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyViolation {
    pub agent: usize,
    pub better: usize,
    pub worse: usize,
}

/// Checks that each agent's utilities strictly decrease along their list.
/// Returns the first violation, if any.
pub fn check_utility_consistency<S: Scalar>(
    profile: &Profile,
    utilities: &UtilityProfile<S>,
) -> Result<Option<ConsistencyViolation>> {
    if profile.agents() != utilities.agents() || profile.houses() != utilities.houses() {
        return Err(Error::DimensionMismatch(format!(
            "profile is {}x{}, utilities are {}x{}",
            profile.agents(),
            profile.houses(),
            utilities.agents(),
            utilities.houses()
        )));
    }
    for (agent, list) in profile.lists().iter().enumerate() {
        let row = utilities.row(agent);
        for pair in list.order().windows(2) {
            if row[pair[0]] <= row[pair[1]] {
                return Ok(Some(ConsistencyViolation {
                    agent,
                    better: pair[0],
                    worse: pair[1],
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn list_validation() {
        assert!(PreferenceList::new(vec![0, 1, 2], 3).is_ok());
        assert!(PreferenceList::new(vec![0, 0], 3).is_err());
        assert!(PreferenceList::new(vec![3], 3).is_err());
        assert!(!PreferenceList::new(vec![1], 3).unwrap().is_complete());
    }

    #[test]
    fn completion_keeps_prefix() {
        let l = PreferenceList::new(vec![2, 0], 4).unwrap();
        let filled = l.completed_by(&PreferenceList::new(vec![3, 2, 1, 0], 4).unwrap());
        assert_eq!(filled.order(), &[2, 0, 3, 1]);
    }

    #[test]
    fn example_utilities_are_consistent() {
        let p = Profile::from_one_based(&[&[1, 2, 3]], 3).unwrap();
        let u = UtilityProfile::from_rows(vec![vec![rat(7, 1), rat(6, 1), rat(0, 1)]]).unwrap();
        assert_eq!(check_utility_consistency(&p, &u).unwrap(), None);
    }

    #[test]
    fn equal_utilities_violate_strictness() {
        let p = Profile::from_one_based(&[&[1, 2]], 2).unwrap();
        let u = UtilityProfile::from_rows(vec![vec![rat(1, 1), rat(1, 1)]]).unwrap();
        let v = check_utility_consistency(&p, &u).unwrap().unwrap();
        assert_eq!((v.agent, v.better, v.worse), (0, 0, 1));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = Profile::from_one_based(&[&[1, 2]], 2).unwrap();
        let u = UtilityProfile::from_rows(vec![vec![rat(1, 1)]]).unwrap();
        assert!(check_utility_consistency(&p, &u).is_err());
    }
}
