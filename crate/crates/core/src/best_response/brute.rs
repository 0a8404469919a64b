//! Exhaustive search over complete reports.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ComparisonOutcome, PreferenceList, Profile};
use crate::ps::share_row;
use crate::relations::{dl_compare_unchecked, eu_value};
use crate::scalar::{Rational, Scalar};

pub const DEFAULT_BOUND: usize = 8;

/// What the searching agent maximizes.
#[derive(Debug, Clone, Copy)]
pub enum Objective<'a, S = Rational> {
    /// Downward lexicographic order along the agent's list in the profile.
    Dl,
    /// Expected utility with the given utility row.
    Eu(&'a [S]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceResult<S = Rational> {
    pub report: PreferenceList,
    pub allocation: Vec<S>,
}

struct Scorer<'a, S> {
    profile: &'a Profile,
    agent: usize,
    truth: &'a [usize],
    objective: Objective<'a, S>,
}

impl<S: Scalar> Scorer<'_, S> {
    fn row(&self, order: Vec<usize>) -> (PreferenceList, Vec<S>) {
        let list = PreferenceList::from_parts_unchecked(order, self.profile.houses());
        let row = share_row::<S>(self.profile, self.agent, &list);
        (list, row)
    }

    fn value(&self, row: &[S]) -> Option<S> {
        match self.objective {
            Objective::Dl => None,
            Objective::Eu(u) => Some(eu_value(row, u)),
        }
    }

    /// `a` strictly better than `b`.
    fn better(&self, a: &(Vec<S>, Option<S>), b: &(Vec<S>, Option<S>)) -> bool {
        match self.objective {
            Objective::Dl => {
                dl_compare_unchecked(&a.0, &b.0, self.truth) == ComparisonOutcome::StrictlyPreferred
            }
            Objective::Eu(_) => a.1 > b.1,
        }
    }
}

fn validate<S>(
    profile: &Profile,
    agent: usize,
    objective: &Objective<'_, S>,
    bound: usize,
) -> Result<()> {
    profile.check_agent(agent)?;
    profile.require_complete()?;
    if profile.houses() > bound {
        return Err(Error::BoundExceeded {
            houses: profile.houses(),
            bound,
        });
    }
    if let Objective::Eu(u) = objective {
        if u.len() != profile.houses() {
            return Err(Error::DimensionMismatch(format!(
                "utility row of length {} for {} houses",
                u.len(),
                profile.houses()
            )));
        }
    }
    Ok(())
}

type Best<S> = (PreferenceList, Vec<S>, Option<S>);

fn best_of<S: Scalar>(
    scorer: &Scorer<'_, S>,
    reports: impl Iterator<Item = Vec<usize>>,
) -> Option<Best<S>> {
    let mut best: Option<Best<S>> = None;
    for order in reports {
        let (list, row) = scorer.row(order);
        let value = scorer.value(&row);
        let cand = (row, value);
        let improves = match &best {
            None => true,
            Some((_, r, v)) => scorer.better(&cand, &(r.clone(), v.clone())),
        };
        if improves {
            best = Some((list, cand.0, cand.1));
        }
    }
    best
}

/// Best complete report for `agent`, the others fixed; among equally good
/// reports the lexicographically smallest wins. The agent's list in
/// `profile` is their true preference. Houses are split by the top-ranked
/// house and searched in parallel; the reduction keeps the earliest maximum,
/// so the result does not depend on scheduling.
pub fn brute_force_best_response<S: Scalar>(
    profile: &Profile,
    agent: usize,
    objective: Objective<'_, S>,
    bound: usize,
) -> Result<BruteForceResult<S>> {
    validate(profile, agent, &objective, bound)?;
    let m = profile.houses();
    let scorer = Scorer {
        profile,
        agent,
        truth: profile.list(agent).order(),
        objective,
    };
    if m == 0 {
        let (report, allocation) = scorer.row(Vec::new());
        return Ok(BruteForceResult { report, allocation });
    }
    let per_top: Vec<Best<S>> = (0..m)
        .into_par_iter()
        .map(|top| {
            let rest: Vec<usize> = (0..m).filter(|&h| h != top).collect();
            let reports = rest.iter().copied().permutations(m - 1).map(|tail| {
                let mut order = Vec::with_capacity(m);
                order.push(top);
                order.extend(tail);
                order
            });
            best_of(&scorer, reports).expect("at least one report")
        })
        .collect();
    let mut best: Option<Best<S>> = None;
    for cand in per_top {
        let improves = match &best {
            None => true,
            Some((_, r, v)) => {
                scorer.better(&(cand.1.clone(), cand.2.clone()), &(r.clone(), v.clone()))
            }
        };
        if improves {
            best = Some(cand);
        }
    }
    let (report, allocation, _) = best.expect("m > 0");
    Ok(BruteForceResult { report, allocation })
}

/// First complete report, in lexicographic order, that strictly beats
/// `baseline` for `agent`. Sequential so the scan can stop early.
pub fn find_improving_report<S: Scalar>(
    profile: &Profile,
    agent: usize,
    objective: Objective<'_, S>,
    baseline: &[S],
    bound: usize,
) -> Result<Option<BruteForceResult<S>>> {
    find_improving_deviation(
        profile,
        agent,
        profile.list(agent),
        objective,
        baseline,
        bound,
    )
}

/// As [`find_improving_report`], judging allocations by `truth` rather than
/// by the agent's (reported) list in `profile`.
pub fn find_improving_deviation<S: Scalar>(
    profile: &Profile,
    agent: usize,
    truth: &PreferenceList,
    objective: Objective<'_, S>,
    baseline: &[S],
    bound: usize,
) -> Result<Option<BruteForceResult<S>>> {
    validate(profile, agent, &objective, bound)?;
    let m = profile.houses();
    if truth.house_count() != m || !truth.is_complete() {
        return Err(Error::IncompletePreference {
            agent: agent + 1,
            len: truth.len(),
            houses: m,
        });
    }
    let scorer = Scorer {
        profile,
        agent,
        truth: truth.order(),
        objective,
    };
    let base = (baseline.to_vec(), scorer.value(baseline));
    for order in (0..m).permutations(m) {
        let (report, row) = scorer.row(order);
        let value = scorer.value(&row);
        if scorer.better(&(row.clone(), value), &base) {
            return Ok(Some(BruteForceResult {
                report,
                allocation: row,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ps::run_ps;
    use crate::scalar::rat;

    fn three_agent_profile() -> Profile {
        Profile::from_one_based(&[&[1, 2, 3], &[2, 1, 3], &[2, 3, 1]], 3).unwrap()
    }

    #[test]
    fn eu_manipulation_of_three_agent_profile() {
        let u = vec![rat(7, 1), rat(6, 1), rat(0, 1)];
        let r =
            brute_force_best_response(&three_agent_profile(), 0, Objective::Eu(&u), DEFAULT_BOUND)
                .unwrap();
        assert_eq!(r.report.order(), &[1, 0, 2]);
        assert_eq!(eu_value(&r.allocation, &u), rat(11, 2));
    }

    #[test]
    fn truth_is_dl_maximal_for_three_agents() {
        let p = three_agent_profile();
        let r = brute_force_best_response::<Rational>(&p, 0, Objective::Dl, DEFAULT_BOUND).unwrap();
        assert_eq!(r.allocation, run_ps::<Rational>(&p).0.row(0).to_vec());
        let none =
            find_improving_report::<Rational>(&p, 0, Objective::Dl, &r.allocation, DEFAULT_BOUND)
                .unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn single_house() {
        let p = Profile::from_orders(vec![vec![0], vec![0]], 1).unwrap();
        let r = brute_force_best_response::<Rational>(&p, 1, Objective::Dl, DEFAULT_BOUND).unwrap();
        assert_eq!(r.report.order(), &[0]);
        assert_eq!(r.allocation, vec![rat(1, 2)]);
    }

    #[test]
    fn bound_is_enforced() {
        let p = Profile::from_orders(vec![(0..4).collect()], 4).unwrap();
        assert_eq!(
            brute_force_best_response::<Rational>(&p, 0, Objective::Dl, 3),
            Err(Error::BoundExceeded {
                houses: 4,
                bound: 3
            })
        );
    }

    #[test]
    fn ties_resolve_to_smallest_report() {
        // A lone agent gets everything whatever they report.
        let p = Profile::from_orders(vec![vec![2, 1, 0]], 3).unwrap();
        let u = vec![rat(0, 1), rat(1, 1), rat(2, 1)];
        let r = brute_force_best_response(&p, 0, Objective::Eu(&u), DEFAULT_BOUND).unwrap();
        assert_eq!(r.report.order(), &[0, 1, 2]);
    }

    #[test]
    fn improving_report_found_for_three_agents() {
        let p = three_agent_profile();
        let u = vec![rat(7, 1), rat(6, 1), rat(0, 1)];
        let truthful = run_ps::<Rational>(&p).0.row(0).to_vec();
        let w = find_improving_report(&p, 0, Objective::Eu(&u), &truthful, DEFAULT_BOUND)
            .unwrap()
            .unwrap();
        assert_eq!(w.report.order(), &[1, 0, 2]);
    }
}
