//! Downward-lexicographic best response for any number of agents.
//!
//! The agent's true preference `h_1 ≻ … ≻ h_m` is walked one house at a time.
//! `L_i` is the stingy best response restricted to the top `i` houses: it
//! keeps every share of `L_{i-1}` on the top `i - 1` houses, gets as much of
//! `h_i` as that allows, contains no house the agent receives nothing of, and
//! places each house as late as possible (ordering by eating start time).

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Assignment, PreferenceList, Profile};
use crate::ps::ps_with_replaced_list;
use crate::scalar::{is_partial, is_unit, Rational, Scalar};

/// Output of [`dl_best_response`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlBestResponse<S = Rational> {
    /// Complete report: the stingy list followed by the unlisted houses in
    /// true-preference order.
    pub report: PreferenceList,
    /// The final stingy list `L_m`; it may be partial.
    pub stingy: PreferenceList,
    /// `L_1, …, L_m`, one per prefix of the true preference.
    pub prefixes: Vec<PreferenceList>,
    /// PS outcome when the agent submits `report`.
    pub assignment: Assignment<S>,
}

fn cmp_est<S: Scalar>(a: &Option<S>, b: &Option<S>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(y).unwrap_or(Ordering::Equal),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

struct Oracle<'a> {
    profile: &'a Profile,
    agent: usize,
    rank: Vec<usize>,
}

impl<'a> Oracle<'a> {
    fn new(profile: &'a Profile, agent: usize) -> Self {
        Self {
            profile,
            agent,
            rank: profile.list(agent).ranks(),
        }
    }

    fn run<S: Scalar>(&self, list: &[usize]) -> (Vec<S>, Vec<Option<S>>) {
        let list = PreferenceList::from_parts_unchecked(list.to_vec(), self.profile.houses());
        let (a, trace) = ps_with_replaced_list::<S>(self.profile, self.agent, &list);
        (a.into_rows().swap_remove(self.agent), trace.eating_start)
    }

    /// The candidate whose eating starts first, ties to the truly preferred one.
    fn stingy_first<S: Scalar>(
        &self,
        est: &[Option<S>],
        candidates: impl Iterator<Item = usize>,
    ) -> Option<usize> {
        candidates.min_by(|&a, &b| cmp_est(&est[a], &est[b]).then(self.rank[a].cmp(&self.rank[b])))
    }

    fn stingy_order<S: Scalar>(&self, prefix: &[usize], candidates: &[usize]) -> Vec<usize> {
        let (_, est) = self.run::<S>(prefix);
        let mut out = candidates.to_vec();
        out.sort_by(|&a, &b| cmp_est(&est[a], &est[b]).then(self.rank[a].cmp(&self.rank[b])));
        out
    }

    /// `L_prev(1..q-1) ⊕ h_new`, completed by repeatedly appending the
    /// stingy-first remaining house of `L_prev`. Falls back to `L_prev` when
    /// the result gives the agent nothing of `h_new`.
    fn insert<S: Scalar>(&self, prev: &[usize], h_new: usize, q: usize) -> Vec<usize> {
        let mut list: Vec<usize> = prev[..q - 1].to_vec();
        list.push(h_new);
        while list.len() <= prev.len() {
            let (_, est) = self.run::<S>(&list);
            let next = self
                .stingy_first(&est, prev.iter().copied().filter(|h| !list.contains(h)))
                .expect("a house of the previous list remains");
            list.push(next);
        }
        let (row, _) = self.run::<S>(&list);
        if row[h_new].is_zero() {
            prev.to_vec()
        } else {
            list
        }
    }
}

fn validate(profile: &Profile, agent: usize) -> Result<()> {
    profile.check_agent(agent)?;
    profile.require_complete()
}

/// Orders `candidates` by eating start time when `agent` reports `prefix`,
/// ties broken by the agent's true preference (its list in `profile`).
/// Houses nobody starts eating come last.
pub fn stingy_ordering<S: Scalar>(
    profile: &Profile,
    agent: usize,
    prefix: &PreferenceList,
    candidates: &[usize],
) -> Result<Vec<usize>> {
    profile.check_agent(agent)?;
    Ok(Oracle::new(profile, agent).stingy_order::<S>(prefix.order(), candidates))
}

/// Inserts `h_new` at 1-based position `position` of `prev` and re-completes
/// the tail in stingy order. Returns `prev` unchanged if the agent would get
/// none of `h_new`.
pub fn insert_and_complete<S: Scalar>(
    prev: &PreferenceList,
    h_new: usize,
    position: usize,
    profile: &Profile,
    agent: usize,
) -> Result<PreferenceList> {
    profile.check_agent(agent)?;
    if position == 0 || position > prev.len() + 1 {
        return Err(Error::PositionOutOfRange {
            position,
            max: prev.len() + 1,
        });
    }
    if prev.contains(h_new) || h_new >= profile.houses() {
        return Err(Error::Precondition(format!(
            "house {} is already listed or out of range",
            h_new + 1
        )));
    }
    let list = Oracle::new(profile, agent).insert::<S>(prev.order(), h_new, position);
    Ok(PreferenceList::from_parts_unchecked(list, profile.houses()))
}

/// Computes a DL best response for `agent` against the other agents' lists.
/// The agent's own list in `profile` is taken as their true preference.
pub fn dl_best_response<S: Scalar>(profile: &Profile, agent: usize) -> Result<DlBestResponse<S>> {
    validate(profile, agent)?;
    let m = profile.houses();
    let truth = profile.list(agent).order().to_vec();
    let oracle = Oracle::new(profile, agent);

    let mut prefixes = Vec::with_capacity(m);
    let mut current: Vec<usize> = Vec::new();
    if let Some(&top) = truth.first() {
        current.push(top);
        prefixes.push(PreferenceList::from_parts_unchecked(current.clone(), m));
    }

    for i in 1..m {
        let h_new = truth[i];
        let covered = &truth[..i];
        let (prev_row, _) = oracle.run::<S>(&current);
        let prev_shares: Vec<S> = covered.iter().map(|&h| prev_row[h].clone()).collect();

        // Last 1-based position that is received fractionally; 0 if none.
        let p = current
            .iter()
            .rposition(|&h| is_partial(&prev_row[h]))
            .map_or(0, |k| k + 1);

        // worse[q]: inserting at q changes some share on the covered houses.
        let mut worse = vec![false; current.len() + 2];
        worse[p] = true;
        let mut q = p + 1;
        let chosen = loop {
            let candidate = oracle.insert::<S>(&current, h_new, q);
            let (row, _) = oracle.run::<S>(&candidate);
            let keeps = covered.iter().zip(&prev_shares).all(|(&h, s)| row[h] == *s);
            if !keeps {
                worse[q] = true;
                q += 1;
                continue;
            }
            worse[q] = false;
            let share = &row[h_new];
            if !is_unit(share) {
                // The previous position still gave all of h_new: prefer it.
                if q > p + 1 && !worse[q - 1] {
                    break oracle.insert::<S>(&current, h_new, q - 1);
                }
                break candidate;
            }
            // Full share: move later while some listed house would start first.
            let (_, est) = oracle.run::<S>(&candidate[..q - 1]);
            let later_first = candidate[q..]
                .iter()
                .any(|&h| cmp_est(&est[h], &est[h_new]) != Ordering::Greater);
            if later_first && q <= current.len() {
                q += 1;
            } else {
                break candidate;
            }
        };
        current = chosen;
        prefixes.push(PreferenceList::from_parts_unchecked(current.clone(), m));
    }

    let stingy = PreferenceList::from_parts_unchecked(current, m);
    let report = stingy.completed_by(profile.list(agent));
    let (assignment, _) = ps_with_replaced_list::<S>(profile, agent, &report);
    Ok(DlBestResponse {
        report,
        stingy,
        prefixes,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ten_house() -> Profile {
        Profile::from_one_based(
            &[
                &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
                &[8, 3, 5, 2, 10, 1, 6, 7, 4, 9],
                &[9, 4, 7, 1, 2, 6, 5, 3, 8, 10],
            ],
            10,
        )
        .unwrap()
    }

    fn six_house() -> Profile {
        Profile::from_one_based(&[&[1, 2, 3, 4, 5, 6], &[3, 6, 4, 5, 1, 2]], 6).unwrap()
    }

    fn one_based(l: &PreferenceList) -> Vec<usize> {
        l.order().iter().map(|h| h + 1).collect()
    }

    #[test]
    fn ten_house_example() {
        let br = dl_best_response::<Rational>(&ten_house(), 0).unwrap();
        assert_eq!(one_based(&br.stingy), vec![3, 2, 1, 6]);
        assert_eq!(&one_based(&br.report)[..4], &[3, 2, 1, 6]);
        assert_eq!(one_based(&br.prefixes[1]), vec![1, 2]);
        assert_eq!(one_based(&br.prefixes[2]), vec![3, 2, 1]);
    }

    #[test]
    fn ten_house_first_insertion_swaps_tail() {
        let p = ten_house();
        let l2 = PreferenceList::new(vec![0, 1], 10).unwrap();
        let l31 = insert_and_complete::<Rational>(&l2, 2, 1, &p, 0).unwrap();
        assert_eq!(one_based(&l31), vec![3, 2, 1]);
        let row = crate::ps::share_row::<Rational>(&p, 0, &l31);
        assert!(row[..3].iter().all(|x| *x == rat(1, 1)));
        let l32 = insert_and_complete::<Rational>(&l2, 2, 2, &p, 0).unwrap();
        assert_eq!(crate::ps::share_row::<Rational>(&p, 0, &l32)[2], rat(1, 2));
    }

    #[test]
    fn six_house_stingy_prefix() {
        let br = dl_best_response::<Rational>(&six_house(), 0).unwrap();
        assert_eq!(one_based(&br.prefixes[3]), vec![3, 1, 4, 2]);
        let row = br.assignment.row(0);
        assert_eq!(&row[..4], &[rat(1, 1), rat(1, 1), rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn stingy_ordering_of_two_agent_example() {
        let p = six_house();
        let prefix = PreferenceList::new(vec![2], 6).unwrap();
        let order = stingy_ordering::<Rational>(&p, 0, &prefix, &[0, 1, 3]).unwrap();
        assert_eq!(order[0], 3);
        assert!(stingy_ordering::<Rational>(&p, 0, &prefix, &[])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn stingy_ties_follow_true_preference() {
        // Nobody else exists, so nothing unlisted ever starts: all tie.
        let p = Profile::from_orders(vec![vec![2, 0, 1, 3]], 4).unwrap();
        let prefix = PreferenceList::new(vec![], 4).unwrap();
        let order = stingy_ordering::<Rational>(&p, 0, &prefix, &[3, 1, 0]).unwrap();
        assert_eq!(order, vec![0, 1, 3]);
    }

    #[test]
    fn insert_into_empty_list() {
        let p = six_house();
        let l = insert_and_complete::<Rational>(&PreferenceList::empty(6), 4, 1, &p, 0).unwrap();
        assert_eq!(l.order(), &[4]);
        assert!(matches!(
            insert_and_complete::<Rational>(&PreferenceList::empty(6), 4, 2, &p, 0),
            Err(Error::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn few_houses_means_truth() {
        let p = Profile::from_one_based(&[&[2, 1, 3], &[2, 3, 1], &[1, 2, 3]], 3).unwrap();
        let br = dl_best_response::<Rational>(&p, 0).unwrap();
        let (truthful, _) = crate::ps::run_ps::<Rational>(&p);
        assert_eq!(br.assignment.row(0), truthful.row(0));
    }

    #[test]
    fn six_house_fourth_prefix() {
        // Four agents, fourteen houses; "…" tails filled in ascending order.
        let m = 14;
        let fill = |head: &[usize]| -> Vec<usize> {
            let mut v: Vec<usize> = head.iter().map(|h| h - 1).collect();
            v.extend((0..m).filter(|h| !head.contains(&(h + 1))));
            v
        };
        let p = Profile::from_orders(
            vec![
                (0..m).collect(),
                fill(&[5, 6, 7, 2, 4, 14]),
                fill(&[1, 8, 9, 10, 3]),
                fill(&[1, 11, 12, 13]),
            ],
            m,
        )
        .unwrap();
        let br = dl_best_response::<Rational>(&p, 0).unwrap();
        let l4 = &br.prefixes[3];
        assert_eq!(one_based(l4), vec![1, 2, 4, 3]);
        let (a, _) = ps_with_replaced_list::<Rational>(&p, 0, l4);
        // Agent 2 reaches h4 only after it is gone.
        assert_eq!(*a.get(1, 3), rat(0, 1));
        assert_eq!(*a.get(1, 1), rat(0, 1));
        let (_, est2) = Oracle::new(&p, 0).run::<Rational>(&[0, 1]);
        let (_, est1) = Oracle::new(&p, 0).run::<Rational>(&[0]);
        assert!(est1[2] < est1[3]);
        assert!(est2[3] < est2[2]);
    }

    #[test]
    fn incomplete_opponent_rejected() {
        let p = Profile::from_orders(vec![vec![0, 1], vec![0]], 2).unwrap();
        assert!(dl_best_response::<Rational>(&p, 0).is_err());
    }
}
