//! Expected-utility best response for two agents.
//!
//! With two agents PS coincides with alternation over half-house clones, so
//! the problem reduces to choosing an optimal pick set, then turning that set
//! into a cloned preference whose halves sit together and joining it back.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::model::{PreferenceList, Profile};
use crate::scalar::Rational;

use super::clones::{
    alternation_policy, join_to_list, order_preserving_bisection, ClonedHouse, ClonedPreference,
    Half, PickSequence,
};
use super::kc::kc_best_response;

/// Intermediate stages of [`eu_best_response_2agents`], in the relabeled
/// house space where the opponent ranks houses by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoAgentResponse {
    pub report: PreferenceList,
    /// Optimal pick set in lexicographic clone order.
    pub pick_set: Vec<ClonedHouse>,
    /// Alternation picks realizing `pick_set`.
    pub picks: PickSequence,
    /// The repaired cloned preference that joins into `report`.
    pub repaired: ClonedPreference,
}

/// Turns agent 1's picks into a cloned report with the consecutivity
/// property that yields the same pick set under alternation against an
/// opponent picking in clone-index order.
pub fn repair_consecutivity(picks: &PickSequence, houses: usize) -> Result<ClonedPreference> {
    let round2: HashMap<ClonedHouse, usize> = picks
        .picks2
        .iter()
        .enumerate()
        .map(|(r, c)| (*c, r))
        .collect();
    let mut order = picks.picks1.clone();
    for c in picks.picks1.iter().copied() {
        if c.half != Half::First {
            continue;
        }
        let Some(&r2) = round2.get(&c.sibling()) else {
            continue;
        };
        let r1 = order.iter().position(|x| *x == c).expect("pick present");
        if r2 < r1 {
            return Err(Error::Precondition(format!(
                "{c} is picked in round {} after its sibling in round {}",
                r1 + 1,
                r2 + 1
            )));
        }
        order.remove(r1);
        order.insert(r2.min(order.len()), c);
    }

    let owned: HashSet<ClonedHouse> = order.iter().copied().collect();
    let mut out = Vec::with_capacity(2 * houses);
    for c in order {
        match (c.half, owned.contains(&c.sibling())) {
            (Half::First, false) => out.extend([c, c.sibling()]),
            (Half::Second, false) => out.extend([c.sibling(), c]),
            _ => out.push(c),
        }
    }
    for h in 0..houses {
        if !out.contains(&ClonedHouse::first(h)) {
            out.extend([ClonedHouse::first(h), ClonedHouse::second(h)]);
        }
    }
    ClonedPreference::new(out, houses)
}

fn relabeled(profile: &Profile, agent: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if profile.agents() != 2 {
        return Err(Error::AgentCount {
            expected: 2,
            actual: profile.agents(),
        });
    }
    profile.check_agent(agent)?;
    profile.require_complete()?;
    let opponent = profile.list(1 - agent).order().to_vec();
    let mut label = vec![0; profile.houses()];
    for (k, &h) in opponent.iter().enumerate() {
        label[h] = k;
    }
    let own = profile
        .list(agent)
        .order()
        .iter()
        .map(|&h| label[h])
        .collect();
    Ok((own, opponent))
}

/// As [`eu_best_response_2agents`], returning the intermediate stages.
pub fn eu_best_response_2agents_explained(
    profile: &Profile,
    agent: usize,
) -> Result<TwoAgentResponse> {
    let (own, back) = relabeled(profile, agent)?;
    let m = profile.houses();
    let own = PreferenceList::new(own, m)?;
    let cloned_own = order_preserving_bisection(&own);
    let cloned_opp = order_preserving_bisection(&PreferenceList::identity(m));

    let mut values = vec![Rational::from_integer(0.into()); 2 * m];
    for (r, c) in cloned_own.order().iter().enumerate() {
        values[c.index()] = Rational::from_integer(((2 * m - r) as i64).into());
    }
    let set: Vec<ClonedHouse> = kc_best_response(&values)?
        .into_iter()
        .map(ClonedHouse::from_index)
        .collect();

    let mut report = set.clone();
    report.extend(cloned_opp.order().iter().filter(|c| !set.contains(c)));
    let picks = alternation_policy(&ClonedPreference::new(report, m)?, &cloned_opp);
    let mut got = picks.picks1.clone();
    got.sort_unstable();
    if got != set {
        return Err(Error::Precondition(
            "alternation does not realize the pick set".into(),
        ));
    }

    let repaired = repair_consecutivity(&picks, m)?;
    let mut again = alternation_policy(&repaired, &cloned_opp).picks1;
    again.sort_unstable();
    if again != set {
        return Err(Error::Precondition(
            "repaired report changes the pick set".into(),
        ));
    }
    let joined = join_to_list(&repaired)
        .ok_or_else(|| Error::Precondition("repaired report lacks consecutivity".into()))?;
    let report = PreferenceList::new(joined.order().iter().map(|&h| back[h]).collect(), m)?;
    Ok(TwoAgentResponse {
        report,
        pick_set: set,
        picks,
        repaired,
    })
}

/// A report that maximizes `agent`'s expected utility against the other
/// agent's list for every utility function consistent with the agent's list
/// in `profile`.
pub fn eu_best_response_2agents(profile: &Profile, agent: usize) -> Result<PreferenceList> {
    Ok(eu_best_response_2agents_explained(profile, agent)?.report)
}
