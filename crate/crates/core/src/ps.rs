//! The Probabilistic Serial eating procedure.
//!
//! Every agent eats, at unit speed, the first house on their list that is not
//! yet exhausted. The simulation jumps from one exhaustion event to the next,
//! so a run has at most `m` stages and every time and share stays exact.

use crate::model::{Assignment, PreferenceList, Profile};
use crate::scalar::Scalar;

/// One interval of constant eating behaviour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage<S> {
    pub start: S,
    pub end: S,
    /// House each agent eats during the stage; `None` once an agent's list is used up.
    pub targets: Vec<Option<usize>>,
}

/// Stage-by-stage record of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EatingTrace<S> {
    pub stages: Vec<Stage<S>>,
    /// First time any agent eats the house; `None` if nobody ever does.
    pub eating_start: Vec<Option<S>>,
    /// Time the house is used up; `None` if it never is.
    pub exhausted_at: Vec<Option<S>>,
}

impl<S: Scalar> EatingTrace<S> {
    /// Time the last stage ends.
    pub fn end_time(&self) -> S {
        self.stages.last().map_or_else(S::zero, |s| s.end.clone())
    }
}

/// Core simulation over an arbitrary list accessor so callers can substitute
/// one agent's list without cloning the whole profile.
fn simulate<'a, S, F>(agents: usize, houses: usize, list_of: F) -> (Assignment<S>, EatingTrace<S>)
where
    S: Scalar,
    F: Fn(usize) -> &'a [usize],
{
    let mut remaining = vec![S::one(); houses];
    let mut exhausted = vec![false; houses];
    let mut cursor = vec![0usize; agents];
    let mut assignment = Assignment::zeros(agents, houses);
    let mut eating_start: Vec<Option<S>> = vec![None; houses];
    let mut exhausted_at: Vec<Option<S>> = vec![None; houses];
    let mut stages = Vec::new();
    let mut now = S::zero();
    let mut eaters = vec![0usize; houses];

    loop {
        let mut targets = Vec::with_capacity(agents);
        for (agent, pos) in cursor.iter_mut().enumerate() {
            let list = list_of(agent);
            while *pos < list.len() && exhausted[list[*pos]] {
                *pos += 1;
            }
            targets.push(list.get(*pos).copied());
        }
        eaters.iter_mut().for_each(|c| *c = 0);
        for &h in targets.iter().flatten() {
            eaters[h] += 1;
        }

        // Time until the first currently eaten house runs out.
        let mut step: Option<S> = None;
        let mut ratios: Vec<Option<S>> = vec![None; houses];
        for h in 0..houses {
            if eaters[h] == 0 {
                continue;
            }
            if eating_start[h].is_none() {
                eating_start[h] = Some(now.clone());
            }
            let r = remaining[h].clone() / S::from_count(eaters[h]);
            if step.as_ref().is_none_or(|s| r < *s) {
                step = Some(r.clone());
            }
            ratios[h] = Some(r);
        }
        let Some(step) = step else { break };

        let end = now.clone() + step.clone();
        for (agent, target) in targets.iter().enumerate() {
            if let Some(h) = *target {
                assignment.add(agent, h, &step);
            }
        }
        for h in 0..houses {
            match &ratios[h] {
                Some(r) if *r == step => {
                    remaining[h] = S::zero();
                    exhausted[h] = true;
                    exhausted_at[h] = Some(end.clone());
                }
                Some(_) => {
                    remaining[h] = remaining[h].clone() - step.clone() * S::from_count(eaters[h]);
                }
                None => {}
            }
        }
        stages.push(Stage {
            start: now,
            end: end.clone(),
            targets,
        });
        now = end;
    }

    (
        assignment,
        EatingTrace {
            stages,
            eating_start,
            exhausted_at,
        },
    )
}

/// Runs PS on the profile. Partial lists are honoured: an agent whose list is
/// used up stops eating and unlisted houses may stay partly unallocated.
pub fn run_ps<S: Scalar>(profile: &Profile) -> (Assignment<S>, EatingTrace<S>) {
    simulate(profile.agents(), profile.houses(), |i| {
        profile.list(i).order()
    })
}

/// Only the assignment.
pub fn ps_assignment<S: Scalar>(profile: &Profile) -> Assignment<S> {
    run_ps(profile).0
}

pub fn eating_start_times<S: Scalar>(profile: &Profile) -> Vec<Option<S>> {
    run_ps(profile).1.eating_start
}

/// PS with `agent`'s list replaced by `list`, everyone else unchanged.
pub fn ps_with_replaced_list<S: Scalar>(
    profile: &Profile,
    agent: usize,
    list: &PreferenceList,
) -> (Assignment<S>, EatingTrace<S>) {
    simulate(profile.agents(), profile.houses(), |i| {
        if i == agent {
            list.order()
        } else {
            profile.list(i).order()
        }
    })
}

/// Allocation row `agent` receives when reporting `list`.
pub fn share_row<S: Scalar>(profile: &Profile, agent: usize, list: &PreferenceList) -> Vec<S> {
    let (a, _) = ps_with_replaced_list::<S>(profile, agent, list);
    a.into_rows().swap_remove(agent)
}

/// Row sums for a complete profile: `m / n` each.
pub fn expected_row_total<S: Scalar>(profile: &Profile) -> S {
    if profile.agents() == 0 {
        return S::zero();
    }
    S::from_count(profile.houses()) / S::from_count(profile.agents())
}
