//! Monte-Carlo manipulability study.
//!
//! Every sample draws a profile and utilities from its own ChaCha8 stream,
//! seeded from `(seed, n, m, sample)`, so results do not depend on thread
//! count or scheduling.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::best_response::{find_improving_report, Objective};
use crate::error::{Error, Result};
use crate::model::{Profile, UtilityProfile};
use crate::nash::DeviationWitness;
use crate::ps::run_ps;
use crate::relations::eu_value;
use crate::scalar::{rational_from_f64, to_fixed, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrefModel {
    /// Impartial culture: uniform over all orders.
    Ic,
    /// Uniform over orders single-peaked on `h1 < … < hm`.
    Usp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UtilityModel {
    Random,
    Borda,
    Exp,
}

impl fmt::Display for PrefModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrefModel::Ic => "ic",
            PrefModel::Usp => "usp",
        })
    }
}

impl fmt::Display for UtilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UtilityModel::Random => "random",
            UtilityModel::Borda => "borda",
            UtilityModel::Exp => "exp",
        })
    }
}

impl FromStr for PrefModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(PrefModel::Ic),
            "usp" => Ok(PrefModel::Usp),
            _ => Err(Error::Config(format!("unknown preference model `{s}`"))),
        }
    }
}

impl FromStr for UtilityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(UtilityModel::Random),
            "borda" => Ok(UtilityModel::Borda),
            "exp" => Ok(UtilityModel::Exp),
            _ => Err(Error::Config(format!("unknown utility model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub pref_model: PrefModel,
    pub utility_model: UtilityModel,
    pub agents: RangeInclusive<usize>,
    pub houses: RangeInclusive<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Largest house count allowed for the exhaustive search.
    pub bound: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pref_model: PrefModel::Ic,
            utility_model: UtilityModel::Random,
            agents: 1..=5,
            houses: 1..=5,
            samples: 200,
            seed: 0,
            bound: 6,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        for (name, r) in [("agent", &self.agents), ("house", &self.houses)] {
            if r.is_empty() || *r.start() == 0 {
                return Err(Error::Config(format!(
                    "{name} range {}..{} must be non-empty and start at 1 or more",
                    r.start(),
                    r.end()
                )));
            }
        }
        if *self.houses.end() > self.bound {
            return Err(Error::BoundExceeded {
                houses: *self.houses.end(),
                bound: self.bound,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentRow {
    pub pref_model: PrefModel,
    pub utility_model: UtilityModel,
    pub n: usize,
    pub m: usize,
    pub samples: usize,
    pub manipulable: usize,
}

impl ExperimentRow {
    pub fn fraction(&self) -> Rational {
        Rational::new(BigInt::from(self.manipulable), BigInt::from(self.samples))
    }
}

pub const CSV_HEADER: &str = "pref_model,utility_model,n,m,samples,manipulable,fraction";

pub fn render_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.pref_model,
            r.utility_model,
            r.n,
            r.m,
            r.samples,
            r.manipulable,
            to_fixed(&r.fraction(), 6)
        ));
    }
    out
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one sample of one cell.
pub fn sample_rng(seed: u64, n: usize, m: usize, sample: usize) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for x in [n as u64, m as u64, sample as u64] {
        h = splitmix(h ^ x);
    }
    ChaCha8Rng::seed_from_u64(h)
}

pub fn gen_ic<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Profile {
    let orders = (0..n)
        .map(|_| {
            let mut v: Vec<usize> = (0..m).collect();
            v.shuffle(rng);
            v
        })
        .collect();
    Profile::from_orders(orders, m).expect("permutations are valid lists")
}

/// One single-peaked order, built from the bottom by taking either end of
/// the remaining axis interval with probability 1/2.
fn single_peaked_order<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<usize> {
    let mut worst_first = Vec::with_capacity(m);
    let (mut lo, mut hi) = (0usize, m);
    while hi - lo > 1 {
        if rng.gen_bool(0.5) {
            worst_first.push(lo);
            lo += 1;
        } else {
            hi -= 1;
            worst_first.push(hi);
        }
    }
    if m > 0 {
        worst_first.push(lo);
    }
    worst_first.reverse();
    worst_first
}

pub fn gen_usp<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Profile {
    let orders = (0..n).map(|_| single_peaked_order(m, rng)).collect();
    Profile::from_orders(orders, m).expect("single-peaked orders are valid lists")
}

/// True if every top segment of `order` is an interval of the axis.
pub fn is_single_peaked(order: &[usize]) -> bool {
    let (mut lo, mut hi) = (usize::MAX, 0usize);
    for (k, &h) in order.iter().enumerate() {
        lo = lo.min(h);
        hi = hi.max(h);
        if hi - lo != k {
            return false;
        }
    }
    true
}

fn rank_based(profile: &Profile, value: impl Fn(usize, usize) -> Rational) -> UtilityProfile {
    let m = profile.houses();
    let rows = profile
        .lists()
        .iter()
        .map(|l| {
            let mut row = vec![Rational::default(); m];
            for (k, &h) in l.order().iter().enumerate() {
                row[h] = value(k + 1, m);
            }
            row
        })
        .collect();
    UtilityProfile::from_rows(rows).expect("rectangular rows")
}

/// `m - k` for the house ranked `k`-th.
pub fn utilities_borda(profile: &Profile) -> UtilityProfile {
    rank_based(profile, |k, m| Rational::from_integer(BigInt::from(m - k)))
}

/// `2^(m-k)` for the house ranked `k`-th, except 0 for the last.
pub fn utilities_exp(profile: &Profile) -> UtilityProfile {
    rank_based(profile, |k, m| {
        if k == m {
            Rational::default()
        } else {
            Rational::from_integer(BigInt::from(2).pow((m - k) as u32))
        }
    })
}

/// Uniform draws sorted in decreasing order along each agent's list, taken
/// exactly as rationals and scaled so each row sums to `m`. Rows with tied
/// draws or a zero sum are redrawn.
pub fn utilities_random<R: Rng + ?Sized>(profile: &Profile, rng: &mut R) -> UtilityProfile {
    let m = profile.houses();
    let scale = Rational::from_integer(BigInt::from(m));
    let rows = profile
        .lists()
        .iter()
        .map(|l| loop {
            let mut draws: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
            draws.sort_by(|a, b| b.partial_cmp(a).expect("finite draws"));
            if draws.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let exact: Vec<Rational> = draws
                .iter()
                .map(|&x| rational_from_f64(x).expect("finite draw"))
                .collect();
            let total: Rational = exact.iter().cloned().sum();
            if total == Rational::default() {
                continue;
            }
            let mut row = vec![Rational::default(); m];
            for (k, &h) in l.order().iter().enumerate() {
                row[h] = &exact[k] * &scale / &total;
            }
            break row;
        })
        .collect();
    UtilityProfile::from_rows(rows).expect("rectangular rows")
}

/// Witness of the lowest-indexed agent who gains strictly by some complete
/// report when everyone else is truthful.
pub fn is_manipulable(
    truth: &Profile,
    utilities: &UtilityProfile,
    bound: usize,
) -> Result<Option<DeviationWitness>> {
    truth.require_complete()?;
    if truth.houses() > bound {
        return Err(Error::BoundExceeded {
            houses: truth.houses(),
            bound,
        });
    }
    let (a, _) = run_ps::<Rational>(truth);
    for agent in 0..truth.agents() {
        let u = utilities.row(agent);
        let before = a.row(agent);
        if let Some(r) = find_improving_report(truth, agent, Objective::Eu(u), before, bound)? {
            return Ok(Some(DeviationWitness {
                agent,
                utilities: Some((eu_value(before, u), eu_value(&r.allocation, u))),
                report: r.report,
                before: before.to_vec(),
                after: r.allocation,
            }));
        }
    }
    Ok(None)
}

/// Draws the profile and utilities of one sample.
pub fn draw_sample(
    config: &ExperimentConfig,
    n: usize,
    m: usize,
    sample: usize,
) -> (Profile, UtilityProfile) {
    let mut rng = sample_rng(config.seed, n, m, sample);
    let profile = match config.pref_model {
        PrefModel::Ic => gen_ic(n, m, &mut rng),
        PrefModel::Usp => gen_usp(n, m, &mut rng),
    };
    let utilities = match config.utility_model {
        UtilityModel::Random => utilities_random(&profile, &mut rng),
        UtilityModel::Borda => utilities_borda(&profile),
        UtilityModel::Exp => utilities_exp(&profile),
    };
    (profile, utilities)
}

/// One row per `(n, m)` cell, agents outer and houses inner. Runs on the
/// current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = config
        .agents
        .clone()
        .flat_map(|n| config.houses.clone().map(move |m| (n, m)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.samples).map(move |s| (c, s)))
        .collect();
    let hits: Vec<bool> = jobs
        .par_iter()
        .map(|&(c, s)| {
            let (n, m) = cells[c];
            let (profile, utilities) = draw_sample(config, n, m, s);
            is_manipulable(&profile, &utilities, config.bound).map(|w| w.is_some())
        })
        .collect::<Result<_>>()?;
    Ok(cells
        .iter()
        .enumerate()
        .map(|(c, &(n, m))| ExperimentRow {
            pref_model: config.pref_model,
            utility_model: config.utility_model,
            n,
            m,
            samples: config.samples,
            manipulable: hits[c * config.samples..(c + 1) * config.samples]
                .iter()
                .filter(|&&h| h)
                .count(),
        })
        .collect())
}
