//! Pure Nash equilibria of the PS reporting game.
//!
//! Two constructions for two agents (threat and crossout profiles), a
//! deviation search for arbitrary profiles, best-response dynamics with
//! cycle detection, and a text trace format for dynamics runs.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::best_response::clones::join_to_list;
use crate::best_response::{
    brute_force_best_response, dl_best_response, eu_best_response_2agents,
    find_improving_deviation, order_preserving_bisection, ClonedHouse, ClonedPreference, Objective,
};
use crate::error::{Error, Result};
use crate::format::{decimal_places, parse_profile, parse_rational, render_profile};
use crate::model::{
    check_utility_consistency, ComparisonOutcome, PreferenceList, Profile, UtilityProfile,
};
use crate::ps::{run_ps, share_row};
use crate::relations::{dl_compare_unchecked, eu_value};
use crate::scalar::{rat, to_fixed, Rational};

fn two_complete(profile: &Profile) -> Result<()> {
    if profile.agents() != 2 {
        return Err(Error::AgentCount {
            expected: 2,
            actual: profile.agents(),
        });
    }
    profile.require_complete()
}

/// Threat profile: each round both agents claim their top remaining house
/// and, if the tops differ, list the other agent's top right after it.
pub fn threat_profile(profile: &Profile) -> Result<Profile> {
    two_complete(profile)?;
    let m = profile.houses();
    let mut w1 = profile.list(0).order().to_vec();
    let mut w2 = profile.list(1).order().to_vec();
    let (mut q1, mut q2) = (Vec::with_capacity(m), Vec::with_capacity(m));
    while let (Some(&h), Some(&g)) = (w1.first(), w2.first()) {
        q1.push(h);
        q2.push(g);
        if h != g {
            q1.push(g);
            q2.push(h);
        }
        w1.retain(|&x| x != h && x != g);
        w2.retain(|&x| x != h && x != g);
    }
    Profile::from_orders(vec![q1, q2], m)
}

/// Extends a partial cloned pick list to a full cloned report: missing
/// siblings right after (or before) the owned half, then the remaining
/// houses in `tail_order` with both halves.
fn extend_with_siblings(
    picks: &[ClonedHouse],
    tail_order: &[usize],
    houses: usize,
) -> Vec<ClonedHouse> {
    let mut out = Vec::with_capacity(2 * houses);
    for &c in picks {
        if picks.contains(&c.sibling()) {
            out.push(c);
        } else {
            out.extend([ClonedHouse::first(c.house), ClonedHouse::second(c.house)]);
        }
    }
    for &h in tail_order {
        if !out.contains(&ClonedHouse::first(h)) {
            out.extend([ClonedHouse::first(h), ClonedHouse::second(h)]);
        }
    }
    out
}

/// Crossout profile: on the bisected lists, agents alternately hand their
/// least preferred remaining clone to the other agent's pick list (front
/// insertion), then the pick lists are completed and joined. The result is
/// not always an equilibrium; check it with [`is_nash_equilibrium`].
pub fn crossout_profile(profile: &Profile) -> Result<Profile> {
    two_complete(profile)?;
    let m = profile.houses();
    let mut w1 = order_preserving_bisection(profile.list(0)).order().to_vec();
    let mut w2 = order_preserving_bisection(profile.list(1)).order().to_vec();
    let (mut q1, mut q2): (Vec<ClonedHouse>, Vec<ClonedHouse>) = (Vec::new(), Vec::new());
    while let Some(&c) = w1.last() {
        q2.insert(0, c);
        w1.retain(|&x| x != c);
        w2.retain(|&x| x != c);
        let Some(&d) = w2.last() else { break };
        q1.insert(0, d);
        w1.retain(|&x| x != d);
        w2.retain(|&x| x != d);
    }
    let mut lists = Vec::with_capacity(2);
    for (agent, picks) in [(0, &q1), (1, &q2)] {
        let full = extend_with_siblings(picks, profile.list(agent).order(), m);
        let cloned = ClonedPreference::new(full, m)?;
        let joined = join_to_list(&cloned).ok_or_else(|| {
            Error::Precondition(format!(
                "crossout list of agent {} lacks consecutivity",
                agent + 1
            ))
        })?;
        lists.push(joined);
    }
    Profile::new(lists, m)
}

/// Preference relation used to judge deviations.
#[derive(Debug, Clone, Copy)]
pub enum Relation<'a> {
    Dl,
    Eu(&'a UtilityProfile),
}

/// How deviations are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeviationSearch {
    /// Every complete report, up to the house bound.
    #[default]
    Exhaustive,
    /// The polynomial best responses: DL for any number of agents, EU for two.
    Polynomial,
}

/// A strictly profitable unilateral deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationWitness {
    pub agent: usize,
    pub report: PreferenceList,
    pub before: Vec<Rational>,
    pub after: Vec<Rational>,
    /// Expected utilities before and after, for the EU relation.
    pub utilities: Option<(Rational, Rational)>,
}

fn improves(
    relation: &Relation<'_>,
    agent: usize,
    truth: &PreferenceList,
    after: &[Rational],
    before: &[Rational],
) -> bool {
    match relation {
        Relation::Dl => {
            dl_compare_unchecked(after, before, truth.order())
                == ComparisonOutcome::StrictlyPreferred
        }
        Relation::Eu(u) => eu_value(after, u.row(agent)) > eu_value(before, u.row(agent)),
    }
}

fn agent_deviation(
    reported: &Profile,
    truth: &Profile,
    relation: &Relation<'_>,
    search: DeviationSearch,
    bound: usize,
    agent: usize,
) -> Result<Option<DeviationWitness>> {
    let before = share_row::<Rational>(reported, agent, reported.list(agent));
    let true_list = truth.list(agent);
    let found = match search {
        DeviationSearch::Exhaustive => {
            let objective = match relation {
                Relation::Dl => Objective::Dl,
                Relation::Eu(u) => Objective::Eu(u.row(agent)),
            };
            find_improving_deviation(reported, agent, true_list, objective, &before, bound)?
                .map(|r| (r.report, r.allocation))
        }
        DeviationSearch::Polynomial => {
            let facing = reported.with_list(agent, true_list.clone());
            let report = match relation {
                Relation::Dl => dl_best_response::<Rational>(&facing, agent)?.report,
                Relation::Eu(_) if reported.agents() == 2 => {
                    eu_best_response_2agents(&facing, agent)?
                }
                Relation::Eu(_) => {
                    return Err(Error::Precondition(
                        "polynomial EU deviation search needs exactly two agents".into(),
                    ))
                }
            };
            let after = share_row::<Rational>(reported, agent, &report);
            improves(relation, agent, true_list, &after, &before).then_some((report, after))
        }
    };
    Ok(found.map(|(report, after)| {
        let utilities = match relation {
            Relation::Dl => None,
            Relation::Eu(u) => Some((
                eu_value(&before, u.row(agent)),
                eu_value(&after, u.row(agent)),
            )),
        };
        DeviationWitness {
            agent,
            report,
            before,
            after,
            utilities,
        }
    }))
}

fn check_truth(reported: &Profile, truth: &Profile, relation: &Relation<'_>) -> Result<()> {
    if reported.agents() != truth.agents() || reported.houses() != truth.houses() {
        return Err(Error::DimensionMismatch(format!(
            "reported profile is {}x{}, truth is {}x{}",
            reported.agents(),
            reported.houses(),
            truth.agents(),
            truth.houses()
        )));
    }
    truth.require_complete()?;
    reported.require_complete()?;
    if let Relation::Eu(u) = relation {
        if let Some(v) = check_utility_consistency(truth, u)? {
            return Err(Error::InconsistentUtilities { agent: v.agent + 1 });
        }
    }
    Ok(())
}

/// `None` if no agent has a strictly improving unilateral deviation, judged
/// by their true preference or utilities; otherwise the witness of the
/// lowest-indexed deviating agent. Agents are searched in parallel.
pub fn is_nash_equilibrium(
    reported: &Profile,
    truth: &Profile,
    relation: Relation<'_>,
    search: DeviationSearch,
    bound: usize,
) -> Result<Option<DeviationWitness>> {
    check_truth(reported, truth, &relation)?;
    let found: Vec<Result<Option<DeviationWitness>>> = (0..reported.agents())
        .into_par_iter()
        .map(|agent| agent_deviation(reported, truth, &relation, search, bound, agent))
        .collect();
    for r in found {
        if let Some(w) = r? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Which agent moves next in [`best_response_dynamics`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeviatorRule {
    /// Agents are tried cyclically, starting after the last deviator.
    Rotation,
    /// The lowest-indexed agent with an improving report.
    FirstFound,
    /// The given agents (0-based) in order.
    Scripted(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// No agent can improve.
    Equilibrium,
    MaxSteps,
    /// The latest profile repeats an earlier one.
    Cycle,
    ScriptExhausted,
    /// The scripted agent has no improving report.
    ScriptedAgentCannotImprove {
        agent: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsStep {
    pub profile: Profile,
    /// Agent whose change produced this profile; `None` for the start.
    pub deviator: Option<usize>,
    pub eu: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsTrace {
    /// The starting profile followed by one entry per deviation.
    pub steps: Vec<DynamicsStep>,
    /// `(first, repeat)` step indices of the first repeated profile.
    pub cycle: Option<(usize, usize)>,
    pub stop: StopReason,
}

impl DynamicsTrace {
    /// Number of deviations.
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn step_of(profile: Profile, deviator: Option<usize>, utilities: &UtilityProfile) -> DynamicsStep {
    let (a, _) = run_ps::<Rational>(&profile);
    let eu = utilities.expected_utilities(&a);
    DynamicsStep {
        profile,
        deviator,
        eu,
    }
}

/// EU-best report for `agent` if it strictly beats their current EU.
fn improve(
    profile: &Profile,
    agent: usize,
    utilities: &UtilityProfile,
    current: &Rational,
    bound: usize,
) -> Result<Option<PreferenceList>> {
    let best =
        brute_force_best_response(profile, agent, Objective::Eu(utilities.row(agent)), bound)?;
    Ok((eu_value(&best.allocation, utilities.row(agent)) > *current).then_some(best.report))
}

/// Repeated EU best responses (exhaustive search, earliest optimal report).
pub fn best_response_dynamics(
    start: &Profile,
    truth: &Profile,
    utilities: &UtilityProfile,
    rule: &DeviatorRule,
    max_steps: usize,
    bound: usize,
) -> Result<DynamicsTrace> {
    check_truth(start, truth, &Relation::Eu(utilities))?;
    let n = start.agents();
    let mut steps = vec![step_of(start.clone(), None, utilities)];
    let mut seen: HashMap<Profile, usize> = HashMap::from([(start.clone(), 0)]);
    let mut last: Option<usize> = None;

    let stop = loop {
        if steps.len() > max_steps {
            break StopReason::MaxSteps;
        }
        let cur = steps.last().expect("non-empty");
        let k = steps.len() - 1;
        let mv = match rule {
            DeviatorRule::Scripted(script) => {
                let Some(&agent) = script.get(k) else {
                    break StopReason::ScriptExhausted;
                };
                start.check_agent(agent)?;
                match improve(&cur.profile, agent, utilities, &cur.eu[agent], bound)? {
                    Some(r) => (agent, r),
                    None => break StopReason::ScriptedAgentCannotImprove { agent },
                }
            }
            DeviatorRule::Rotation | DeviatorRule::FirstFound => {
                let first = match (rule, last) {
                    (DeviatorRule::Rotation, Some(a)) => a + 1,
                    _ => 0,
                };
                let mut found = None;
                for off in 0..n {
                    let agent = (first + off) % n;
                    if let Some(r) = improve(&cur.profile, agent, utilities, &cur.eu[agent], bound)?
                    {
                        found = Some((agent, r));
                        break;
                    }
                }
                match found {
                    Some(x) => x,
                    None => break StopReason::Equilibrium,
                }
            }
        };
        let (agent, report) = mv;
        let next = cur.profile.with_list(agent, report);
        last = Some(agent);
        let idx = steps.len();
        let earlier = seen.get(&next).copied();
        seen.entry(next.clone()).or_insert(idx);
        steps.push(step_of(next, Some(agent), utilities));
        if let Some(e) = earlier {
            return Ok(DynamicsTrace {
                steps,
                cycle: Some((e, idx)),
                stop: StopReason::Cycle,
            });
        }
    };
    Ok(DynamicsTrace {
        steps,
        cycle: None,
        stop,
    })
}

/// One block of a trace file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub profile: Profile,
    /// 0-based agent from the `deviator=` annotation; `None` if absent or `-`.
    pub deviator: Option<usize>,
    /// Values from the `eu=` annotation with the number of printed decimals
    /// (`None` for exact fractions and integers).
    pub eu: Option<Vec<(Rational, Option<usize>)>>,
}

/// Renders a trace: one profile block per step separated by blank lines,
/// each preceded by `# step=K deviator=K eu=<exact,…> eu_decimal=<…>`.
pub fn render_trace(trace: &DynamicsTrace) -> String {
    let mut out = String::new();
    for (k, step) in trace.steps.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let dev = step
            .deviator
            .map_or_else(|| "-".to_string(), |a| (a + 1).to_string());
        let exact: Vec<String> = step.eu.iter().map(|x| x.to_string()).collect();
        let dec: Vec<String> = step.eu.iter().map(|x| to_fixed(x, 4)).collect();
        let _ = writeln!(
            out,
            "# step={k} deviator={dev} eu={} eu_decimal={}",
            exact.join(","),
            dec.join(",")
        );
        out.push_str(&render_profile(&step.profile));
    }
    out
}

fn annotation<'a>(block: &'a str, key: &str) -> Option<(usize, &'a str)> {
    block.lines().enumerate().find_map(|(i, l)| {
        let body = l.trim().strip_prefix('#')?;
        body.split_whitespace()
            .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
            .map(|v| (i, v))
    })
}

/// Parses a trace file. Blocks are separated by one or more blank lines.
pub fn parse_trace(text: &str) -> Result<Vec<TraceEntry>> {
    let mut blocks: Vec<(usize, String)> = Vec::new();
    let mut current: Option<(usize, String)> = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if let Some(b) = current.take() {
                blocks.push(b);
            }
            continue;
        }
        let b = current.get_or_insert_with(|| (i + 1, String::new()));
        b.1.push_str(line);
        b.1.push('\n');
    }
    blocks.extend(current);

    let mut entries = Vec::with_capacity(blocks.len());
    for (k, (first_line, block)) in blocks.iter().enumerate() {
        let bad = |msg: String| {
            Error::MalformedTrace(format!("block {} (line {first_line}): {msg}", k + 1))
        };
        let profile = parse_profile(block).map_err(|e| bad(e.to_string()))?;
        let deviator = match annotation(block, "deviator") {
            None | Some((_, "-")) => None,
            Some((_, v)) => {
                let a: usize = v.parse().map_err(|_| bad(format!("bad deviator `{v}`")))?;
                if a == 0 {
                    return Err(bad("deviators are 1-based".into()));
                }
                Some(a - 1)
            }
        };
        let eu = match annotation(block, "eu") {
            None => None,
            Some((_, v)) => Some(
                v.split(',')
                    .map(|t| {
                        parse_rational(t)
                            .map(|x| (x, decimal_places(t)))
                            .ok_or_else(|| bad(format!("bad EU value `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        entries.push(TraceEntry {
            profile,
            deviator,
            eu,
        });
    }
    Ok(entries)
}

/// Base tolerance for printed decimal EU values.
pub fn eu_tolerance() -> Rational {
    rat(1, 20_000)
}

/// Allowed gap between an exact value and a printed one: exact fractions
/// must match; decimals may differ by 5e-5 or by half a unit of their last
/// printed place, whichever is larger.
pub fn printed_tolerance(places: Option<usize>) -> Rational {
    match places {
        None => rat(0, 1),
        Some(p) => {
            let half_unit = Rational::new(
                1.into(),
                num_bigint::BigInt::from(2) * num_bigint::BigInt::from(10).pow(p as u32),
            );
            half_unit.max(eu_tolerance())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceViolation {
    /// A step changes no list or more than one list.
    NotSingleChange {
        step: usize,
        changed: Vec<usize>,
    },
    /// The annotated deviator is not the agent whose list changed.
    WrongDeviator {
        step: usize,
        annotated: usize,
        actual: usize,
    },
    /// The changing agent's exact EU does not strictly increase.
    NotImproving {
        step: usize,
        agent: usize,
        before: Rational,
        after: Rational,
    },
    /// A printed EU value is outside its tolerance.
    EuMismatch {
        step: usize,
        agent: usize,
        printed: Rational,
        exact: Rational,
    },
    /// With the strict check: the new report is not EU-optimal.
    NotBestResponse {
        step: usize,
        agent: usize,
    },
    DimensionMismatch {
        step: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceReport {
    pub violation: Option<TraceViolation>,
    /// `(first, repeat)` indices of the first repeated profile.
    pub cycle: Option<(usize, usize)>,
    /// Exact EU vectors per step.
    pub eu: Vec<Vec<Rational>>,
    /// `(step, agent)` of printed values that needed more than the base
    /// tolerance.
    pub relaxed: Vec<(usize, usize)>,
}

/// Checks a trace against the utilities: every transition changes exactly
/// one list and strictly raises that agent's exact EU, and every printed EU
/// value is within tolerance. With `strict`, each new report must also be
/// EU-optimal for its agent.
pub fn verify_dynamics_trace(
    entries: &[TraceEntry],
    truth: &Profile,
    utilities: &UtilityProfile,
    strict: bool,
    bound: usize,
) -> Result<TraceReport> {
    if entries.is_empty() {
        return Err(Error::MalformedTrace("empty trace".into()));
    }
    if let Some(v) = check_utility_consistency(truth, utilities)? {
        return Err(Error::InconsistentUtilities { agent: v.agent + 1 });
    }
    let mut report = TraceReport {
        violation: None,
        cycle: None,
        eu: Vec::with_capacity(entries.len()),
        relaxed: Vec::new(),
    };
    let mut seen: HashMap<&Profile, usize> = HashMap::new();
    let base = eu_tolerance();
    for (k, entry) in entries.iter().enumerate() {
        let p = &entry.profile;
        if p.agents() != truth.agents() || p.houses() != truth.houses() {
            report.violation = Some(TraceViolation::DimensionMismatch { step: k });
            return Ok(report);
        }
        let (a, _) = run_ps::<Rational>(p);
        let eu = utilities.expected_utilities(&a);

        if let Some(printed) = &entry.eu {
            if printed.len() != eu.len() {
                report.violation = Some(TraceViolation::DimensionMismatch { step: k });
                return Ok(report);
            }
            for (agent, ((value, places), exact)) in printed.iter().zip(&eu).enumerate() {
                let gap = if value > exact {
                    value - exact
                } else {
                    exact - value
                };
                if gap > printed_tolerance(*places) {
                    report.violation = Some(TraceViolation::EuMismatch {
                        step: k,
                        agent,
                        printed: value.clone(),
                        exact: exact.clone(),
                    });
                    report.eu.push(eu);
                    return Ok(report);
                }
                if places.is_some() && gap > base {
                    report.relaxed.push((k, agent));
                }
            }
        }

        if k > 0 {
            let prev = &entries[k - 1].profile;
            let changed: Vec<usize> = (0..p.agents())
                .filter(|&i| p.list(i) != prev.list(i))
                .collect();
            if changed.len() != 1 {
                report.violation = Some(TraceViolation::NotSingleChange { step: k, changed });
                return Ok(report);
            }
            let agent = changed[0];
            if let Some(d) = entry.deviator {
                if d != agent {
                    report.violation = Some(TraceViolation::WrongDeviator {
                        step: k,
                        annotated: d,
                        actual: agent,
                    });
                    return Ok(report);
                }
            }
            let before = &report.eu[k - 1][agent];
            if eu[agent] <= *before {
                report.violation = Some(TraceViolation::NotImproving {
                    step: k,
                    agent,
                    before: before.clone(),
                    after: eu[agent].clone(),
                });
                return Ok(report);
            }
            if strict {
                let best = brute_force_best_response(
                    prev,
                    agent,
                    Objective::Eu(utilities.row(agent)),
                    bound,
                )?;
                if eu_value(&best.allocation, utilities.row(agent)) != eu[agent] {
                    report.violation = Some(TraceViolation::NotBestResponse { step: k, agent });
                    return Ok(report);
                }
            }
        }
        if report.cycle.is_none() {
            if let Some(&e) = seen.get(p) {
                report.cycle = Some((e, k));
            }
        }
        seen.entry(p).or_insert(k);
        report.eu.push(eu);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::best_response::DEFAULT_BOUND;

    fn one_based(l: &PreferenceList) -> Vec<usize> {
        l.order().iter().map(|h| h + 1).collect()
    }

    fn four_house_pair() -> Profile {
        Profile::from_one_based(&[&[1, 2, 3, 4], &[2, 3, 1, 4]], 4).unwrap()
    }

    fn rows(p: &Profile) -> Vec<Vec<Rational>> {
        run_ps::<Rational>(p).0.into_rows()
    }

    fn r(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(a, b)| rat(a, b)).collect()
    }

    #[test]
    fn threat_profile_example() {
        let q = threat_profile(&four_house_pair()).unwrap();
        assert_eq!(one_based(q.list(0)), vec![1, 2, 3, 4]);
        assert_eq!(one_based(q.list(1)), vec![2, 1, 3, 4]);
        assert_eq!(
            rows(&q),
            vec![
                r(&[(1, 1), (0, 1), (1, 2), (1, 2)]),
                r(&[(0, 1), (1, 1), (1, 2), (1, 2)])
            ]
        );
        assert_eq!(rows(&q), rows(&four_house_pair()));
    }

    #[test]
    fn threat_profile_of_identical_lists() {
        let p = Profile::from_one_based(&[&[3, 1, 2], &[3, 1, 2]], 3).unwrap();
        assert_eq!(threat_profile(&p).unwrap(), p);
    }

    #[test]
    fn crossout_profile_example() {
        let q = crossout_profile(&four_house_pair()).unwrap();
        assert_eq!(one_based(q.list(0)), vec![2, 1, 4, 3]);
        assert_eq!(one_based(q.list(1)), vec![2, 3, 4, 1]);
        assert_eq!(
            rows(&q),
            vec![
                r(&[(1, 1), (1, 2), (0, 1), (1, 2)]),
                r(&[(0, 1), (1, 2), (1, 1), (1, 2)])
            ]
        );
        assert_ne!(q, threat_profile(&four_house_pair()).unwrap());
    }

    #[test]
    fn crossout_profile_admits_a_dl_deviation() {
        let truth = four_house_pair();
        let q = crossout_profile(&truth).unwrap();
        let w = is_nash_equilibrium(&q, &truth, Relation::Dl, DeviationSearch::Exhaustive, 8)
            .unwrap()
            .expect("agent 1 gains half of h3");
        assert_eq!(w.agent, 0);
        let listed = q.with_list(0, PreferenceList::new(vec![1, 2, 0, 3], 4).unwrap());
        assert_eq!(
            run_ps::<Rational>(&listed).0.row(0),
            r(&[(1, 1), (1, 2), (1, 2), (0, 1)]).as_slice()
        );
    }

    #[test]
    fn crossout_of_identical_lists() {
        let p = Profile::from_one_based(&[&[1, 2], &[1, 2]], 2).unwrap();
        let q = crossout_profile(&p).unwrap();
        assert_eq!(q, p);
        assert!(rows(&q).iter().flatten().all(|x| *x == rat(1, 2)));
    }

    #[test]
    fn constructions_need_two_agents() {
        let p = Profile::from_orders(vec![vec![0]], 1).unwrap();
        assert!(matches!(threat_profile(&p), Err(Error::AgentCount { .. })));
        assert!(matches!(
            crossout_profile(&p),
            Err(Error::AgentCount { .. })
        ));
    }

    #[test]
    fn truthful_four_house_pair_is_not_an_equilibrium() {
        let truth = four_house_pair();
        let w = is_nash_equilibrium(
            &truth,
            &truth,
            Relation::Dl,
            DeviationSearch::Exhaustive,
            DEFAULT_BOUND,
        )
        .unwrap()
        .expect("a deviation exists");
        assert!(
            dl_compare_unchecked(&w.after, &w.before, truth.list(w.agent).order())
                == ComparisonOutcome::StrictlyPreferred
        );
        let q = threat_profile(&truth).unwrap();
        for search in [DeviationSearch::Exhaustive, DeviationSearch::Polynomial] {
            assert_eq!(
                is_nash_equilibrium(&q, &truth, Relation::Dl, search, DEFAULT_BOUND).unwrap(),
                None
            );
        }
        let poly = is_nash_equilibrium(
            &truth,
            &truth,
            Relation::Dl,
            DeviationSearch::Polynomial,
            DEFAULT_BOUND,
        )
        .unwrap();
        assert!(poly.is_some());
    }

    #[test]
    fn single_agent_is_always_in_equilibrium() {
        let p = Profile::from_orders(vec![vec![1, 0, 2]], 3).unwrap();
        assert_eq!(
            is_nash_equilibrium(&p, &p, Relation::Dl, DeviationSearch::Exhaustive, 8).unwrap(),
            None
        );
    }

    fn cycle_instance() -> (Profile, UtilityProfile) {
        let p = Profile::from_one_based(
            &[
                &[2, 3, 1, 4, 6, 5],
                &[6, 5, 2, 1, 4, 3],
                &[3, 6, 2, 1, 5, 4],
            ],
            6,
        )
        .unwrap();
        let u = UtilityProfile::from_rows(
            [[3, 5, 4, 2, 0, 1], [2, 3, 0, 1, 4, 5], [2, 3, 5, 0, 1, 4]]
                .iter()
                .map(|row| row.iter().map(|&x| rat(x, 1)).collect())
                .collect(),
        )
        .unwrap();
        (p, u)
    }

    #[test]
    fn dynamics_first_steps_and_trace_round_trip() {
        let (p, u) = cycle_instance();
        let trace =
            best_response_dynamics(&p, &p, &u, &DeviatorRule::Scripted(vec![2, 0]), 10, 6).unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(trace.stop, StopReason::ScriptExhausted);
        assert_eq!(trace.steps[0].eu, r(&[(15, 2), (33, 4), (25, 4)]));
        assert_eq!(
            one_based(trace.steps[1].profile.list(2)),
            vec![6, 3, 1, 2, 4, 5]
        );
        let text = render_trace(&trace);
        let parsed = parse_trace(&text).unwrap();
        assert_eq!(parsed.len(), 3);
        assert_eq!(parsed[1].deviator, Some(2));
        let rep = verify_dynamics_trace(&parsed, &p, &u, true, 6).unwrap();
        assert_eq!(rep.violation, None);
        assert_eq!(rep.cycle, None);
    }

    #[test]
    fn dynamics_from_equilibrium_is_empty() {
        let truth = four_house_pair();
        let q = threat_profile(&truth).unwrap();
        let u = UtilityProfile::from_rows(vec![
            r(&[(4, 1), (3, 1), (2, 1), (1, 1)]),
            r(&[(2, 1), (4, 1), (3, 1), (1, 1)]),
        ])
        .unwrap();
        let w = is_nash_equilibrium(&q, &truth, Relation::Eu(&u), DeviationSearch::Exhaustive, 8)
            .unwrap();
        assert_eq!(w, None);
        let trace =
            best_response_dynamics(&q, &truth, &u, &DeviatorRule::FirstFound, 5, 8).unwrap();
        assert!(trace.is_empty());
        assert_eq!(trace.stop, StopReason::Equilibrium);
    }

    #[test]
    fn trace_with_two_changes_is_rejected() {
        let (p, u) = cycle_instance();
        let both = p
            .with_list(0, PreferenceList::new(vec![0, 1, 2, 3, 4, 5], 6).unwrap())
            .with_list(1, PreferenceList::new(vec![0, 1, 2, 3, 4, 5], 6).unwrap());
        let entries = vec![
            TraceEntry {
                profile: p.clone(),
                deviator: None,
                eu: None,
            },
            TraceEntry {
                profile: both,
                deviator: None,
                eu: None,
            },
        ];
        let rep = verify_dynamics_trace(&entries, &p, &u, false, 6).unwrap();
        assert_eq!(
            rep.violation,
            Some(TraceViolation::NotSingleChange {
                step: 1,
                changed: vec![0, 1]
            })
        );
    }

    #[test]
    fn non_improving_step_is_rejected() {
        let (p, u) = cycle_instance();
        // Agent 1 ranking their top house last cannot gain.
        let worse = p.with_list(0, PreferenceList::new(vec![2, 0, 3, 5, 4, 1], 6).unwrap());
        let entries = vec![
            TraceEntry {
                profile: p.clone(),
                deviator: None,
                eu: None,
            },
            TraceEntry {
                profile: worse,
                deviator: Some(0),
                eu: None,
            },
        ];
        let rep = verify_dynamics_trace(&entries, &p, &u, false, 6).unwrap();
        assert!(matches!(
            rep.violation,
            Some(TraceViolation::NotImproving {
                step: 1,
                agent: 0,
                ..
            })
        ));
    }

    #[test]
    fn printed_tolerances() {
        assert_eq!(printed_tolerance(None), rat(0, 1));
        assert_eq!(printed_tolerance(Some(4)), rat(1, 20_000));
        assert_eq!(printed_tolerance(Some(3)), rat(1, 2000));
        assert_eq!(printed_tolerance(Some(5)), rat(1, 20_000));
    }

    #[test]
    fn malformed_trace_reports_block() {
        let err = parse_trace("2 2\n1 2\n2 1\n\n# deviator=x\n2 2\n1 2\n2 1\n").unwrap_err();
        assert!(matches!(err, Error::MalformedTrace(m) if m.contains("block 2")));
        assert!(parse_trace("2 2\n1 2\n").is_err());
    }
}
