//! Half-house clones, order-preserving bisection and join, and the
//! alternation picking policy over clones.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Assignment, PreferenceList};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Half {
    First,
    Second,
}

/// One half of a house. Ordered lexicographically: `h1¹ < h1² < h2¹ < …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClonedHouse {
    pub house: usize,
    pub half: Half,
}

impl ClonedHouse {
    pub fn first(house: usize) -> Self {
        Self {
            house,
            half: Half::First,
        }
    }

    pub fn second(house: usize) -> Self {
        Self {
            house,
            half: Half::Second,
        }
    }

    pub fn sibling(self) -> Self {
        match self.half {
            Half::First => Self::second(self.house),
            Half::Second => Self::first(self.house),
        }
    }

    /// Position in the lexicographic clone order, `2h + (half - 1)`.
    pub fn index(self) -> usize {
        2 * self.house + usize::from(self.half == Half::Second)
    }

    pub fn from_index(index: usize) -> Self {
        if index.is_multiple_of(2) {
            Self::first(index / 2)
        } else {
            Self::second(index / 2)
        }
    }
}

impl fmt::Display for ClonedHouse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let half = match self.half {
            Half::First => 1,
            Half::Second => 2,
        };
        write!(f, "h{}^{}", self.house + 1, half)
    }
}

/// An ordering over distinct clones of `houses` houses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClonedPreference {
    order: Vec<ClonedHouse>,
    houses: usize,
}

impl ClonedPreference {
    pub fn new(order: Vec<ClonedHouse>, houses: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(order.len());
        for c in &order {
            if c.house >= houses || !seen.insert(*c) {
                return Err(Error::Precondition(format!(
                    "clone {c} is repeated or out of range"
                )));
            }
        }
        Ok(Self { order, houses })
    }

    pub fn order(&self) -> &[ClonedHouse] {
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
        self.order.len() == 2 * self.houses
    }

    /// Every house with both halves listed has them adjacent, first half first.
    pub fn has_consecutivity(&self) -> bool {
        let pos: HashMap<ClonedHouse, usize> = self
            .order
            .iter()
            .enumerate()
            .map(|(i, c)| (*c, i))
            .collect();
        self.order.iter().all(|c| {
            if c.half != Half::First {
                return true;
            }
            pos.get(&c.sibling()).is_none_or(|&j| j == pos[c] + 1)
        })
    }
}

/// Replaces each house by its two halves, first half first.
pub fn order_preserving_bisection(pref: &PreferenceList) -> ClonedPreference {
    let order = pref
        .order()
        .iter()
        .flat_map(|&h| [ClonedHouse::first(h), ClonedHouse::second(h)])
        .collect();
    ClonedPreference {
        order,
        houses: pref.house_count(),
    }
}

/// Element of a joined preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinedItem {
    Whole(usize),
    Half(ClonedHouse),
}

/// Merges adjacent sibling halves (first then second) into whole houses.
pub fn order_preserving_join(cloned: &ClonedPreference) -> Vec<JoinedItem> {
    let o = &cloned.order;
    let mut out = Vec::with_capacity(o.len() / 2);
    let mut i = 0;
    while i < o.len() {
        if o[i].half == Half::First && o.get(i + 1) == Some(&o[i].sibling()) {
            out.push(JoinedItem::Whole(o[i].house));
            i += 2;
        } else {
            out.push(JoinedItem::Half(o[i]));
            i += 1;
        }
    }
    out
}

/// The joined preference as a list of houses, or `None` if a stray half remains.
pub fn join_to_list(cloned: &ClonedPreference) -> Option<PreferenceList> {
    let houses = order_preserving_join(cloned)
        .into_iter()
        .map(|item| match item {
            JoinedItem::Whole(h) => Some(h),
            JoinedItem::Half(_) => None,
        })
        .collect::<Option<Vec<_>>>()?;
    PreferenceList::new(houses, cloned.houses).ok()
}

/// Round-by-round picks of a two-agent alternation; `picks1[k]` and
/// `picks2[k]` are taken in round `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PickSequence {
    pub picks1: Vec<ClonedHouse>,
    pub picks2: Vec<ClonedHouse>,
}

impl PickSequence {
    /// Each house split between the agents has its halves picked in one round.
    pub fn has_matching(&self) -> bool {
        let round2: HashMap<ClonedHouse, usize> = self
            .picks2
            .iter()
            .enumerate()
            .map(|(r, c)| (*c, r))
            .collect();
        self.picks1
            .iter()
            .enumerate()
            .all(|(r, c)| round2.get(&c.sibling()).is_none_or(|&r2| r2 == r))
    }

    /// House-level allocation with each clone worth one half.
    pub fn aggregate<S: Scalar>(&self, houses: usize) -> Assignment<S> {
        let half = S::ratio(1, 2);
        let mut a = Assignment::zeros(2, houses);
        for c in &self.picks1 {
            a.add(0, c.house, &half);
        }
        for c in &self.picks2 {
            a.add(1, c.house, &half);
        }
        a
    }
}

/// Alternating greedy picks over arbitrary items, agent 1 first. Each agent
/// takes their highest-ranked remaining item; an agent with nothing left on
/// their list passes, and the run ends when neither can pick.
pub(crate) fn alternate<T: Copy + Eq + std::hash::Hash>(
    list1: &[T],
    list2: &[T],
) -> (Vec<T>, Vec<T>) {
    let mut taken = HashSet::new();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    loop {
        while i < list1.len() && taken.contains(&list1[i]) {
            i += 1;
        }
        let x = list1.get(i).copied();
        if let Some(x) = x {
            taken.insert(x);
            a.push(x);
        }
        while j < list2.len() && taken.contains(&list2[j]) {
            j += 1;
        }
        let y = list2.get(j).copied();
        if let Some(y) = y {
            taken.insert(y);
            b.push(y);
        }
        if x.is_none() && y.is_none() {
            break;
        }
    }
    (a, b)
}

pub fn alternation_policy(pref1: &ClonedPreference, pref2: &ClonedPreference) -> PickSequence {
    let (picks1, picks2) = alternate(&pref1.order, &pref2.order);
    PickSequence { picks1, picks2 }
}
