use num_traits::{One, Zero};
use proptest::prelude::*;

use psstrat::best_response::{
    alternation_policy, dl_best_response, eu_best_response_2agents_explained, join_to_list,
    kc_best_response, order_preserving_bisection,
};
use psstrat::nash::threat_profile;
use psstrat::ps::{eating_start_times, share_row};
use psstrat::{rat, run_ps, sd_compare, ComparisonOutcome, PreferenceList, Profile, Rational};

/// Straightforward eating simulation used as an oracle for `run_ps`.
fn oracle_ps(lists: &[Vec<usize>], m: usize) -> Vec<Vec<Rational>> {
    let n = lists.len();
    let mut left = vec![Rational::one(); m];
    let mut shares = vec![vec![Rational::zero(); m]; n];
    loop {
        let targets: Vec<Option<usize>> = lists
            .iter()
            .map(|l| l.iter().copied().find(|&h| left[h] > Rational::zero()))
            .collect();
        let mut eaters = vec![0i64; m];
        for h in targets.iter().flatten() {
            eaters[*h] += 1;
        }
        let Some(dt) = (0..m)
            .filter(|&h| eaters[h] > 0)
            .map(|h| &left[h] / Rational::from_integer(eaters[h].into()))
            .min()
        else {
            return shares;
        };
        for (i, t) in targets.iter().enumerate() {
            if let Some(h) = *t {
                shares[i][h] += &dt;
                left[h] -= &dt;
            }
        }
    }
}

fn lists(
    max_n: usize,
    max_m: usize,
    partial: bool,
) -> impl Strategy<Value = (Vec<Vec<usize>>, usize)> {
    (1..=max_n, 1..=max_m).prop_flat_map(move |(n, m)| {
        let one =
            (Just((0..m).collect::<Vec<_>>()).prop_shuffle(), 0..=m).prop_map(move |(mut o, k)| {
                if partial {
                    o.truncate(k);
                }
                o
            });
        (proptest::collection::vec(one, n), Just(m))
    })
}

fn profile((orders, m): (Vec<Vec<usize>>, usize)) -> Profile {
    Profile::from_orders(orders, m).unwrap()
}

fn complete(max_n: usize, max_m: usize) -> impl Strategy<Value = Profile> {
    lists(max_n, max_m, false).prop_map(profile)
}

fn two_agents(max_m: usize) -> impl Strategy<Value = Profile> {
    (1..=max_m)
        .prop_flat_map(|m| {
            let v: Vec<usize> = (0..m).collect();
            (
                Just(v.clone()).prop_shuffle(),
                Just(v).prop_shuffle(),
                Just(m),
            )
        })
        .prop_map(|(a, b, m)| Profile::from_orders(vec![a, b], m).unwrap())
}

fn shares_of(profile: &Profile, agent: usize, list: &PreferenceList) -> Vec<Rational> {
    share_row::<Rational>(profile, agent, list)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ps_matches_oracle(input in lists(5, 7, true)) {
        let expected = oracle_ps(&input.0, input.1);
        let (a, _) = run_ps::<Rational>(&profile(input));
        prop_assert_eq!(a.rows(), expected.as_slice());
    }

    #[test]
    fn f64_engine_tracks_rational_engine(p in complete(5, 7)) {
        let exact = run_ps::<Rational>(&p).0;
        let approx = run_ps::<f64>(&p).0;
        for (r, f) in exact.rows().iter().flatten().zip(approx.rows().iter().flatten()) {
            let r = r.numer().to_string().parse::<f64>().unwrap()
                / r.denom().to_string().parse::<f64>().unwrap();
            prop_assert!((r - f).abs() < 1e-9);
        }
    }

    #[test]
    fn eating_start_defined_exactly_for_listed_houses(input in lists(4, 6, true)) {
        let listed: Vec<bool> = (0..input.1)
            .map(|h| input.0.iter().any(|l| l.contains(&h)))
            .collect();
        let est = eating_start_times::<Rational>(&profile(input));
        for (h, t) in est.iter().enumerate() {
            prop_assert_eq!(t.is_some(), listed[h]);
        }
    }

    #[test]
    fn two_agent_shares_are_halves(p in two_agents(8)) {
        let a = run_ps::<Rational>(&p).0;
        let allowed = [rat(0, 1), rat(1, 2), rat(1, 1)];
        prop_assert!(a.rows().iter().flatten().all(|x| allowed.contains(x)));
    }

    #[test]
    fn stingy_prefixes_keep_prefix_allocation(p in complete(4, 6)) {
        let br = dl_best_response::<Rational>(&p, 0).unwrap();
        let truth = p.list(0).order().to_vec();
        let full = br.assignment.row(0).to_vec();
        for (k, l) in br.prefixes.iter().enumerate() {
            let row = shares_of(&p, 0, l);
            for &h in &truth[..=k] {
                prop_assert_eq!(&row[h], &full[h]);
            }
        }
    }

    #[test]
    fn stingy_houses_before_a_fractional_one_are_preferred(p in complete(4, 6)) {
        let br = dl_best_response::<Rational>(&p, 0).unwrap();
        let rank = p.list(0).ranks();
        for l in &br.prefixes {
            let row = shares_of(&p, 0, l);
            for (pos, &h) in l.order().iter().enumerate() {
                if row[h] > Rational::zero() && row[h] < Rational::one() {
                    prop_assert!(l.order()[..pos].iter().all(|&g| rank[g] < rank[h]));
                }
            }
        }
    }

    #[test]
    fn stingy_prefixes_agree_up_to_fractional_house(p in complete(4, 6)) {
        let br = dl_best_response::<Rational>(&p, 0).unwrap();
        for pair in br.prefixes.windows(2) {
            let row = shares_of(&p, 0, &pair[0]);
            for (pos, &h) in pair[0].order().iter().enumerate() {
                if row[h] > Rational::zero() && row[h] < Rational::one() {
                    prop_assert_eq!(&pair[0].order()[..=pos], &pair[1].order()[..=pos]);
                }
            }
        }
    }

    #[test]
    fn stingy_whole_houses_follow_eating_start(p in complete(4, 6)) {
        let br = dl_best_response::<Rational>(&p, 0).unwrap();
        let rank = p.list(0).ranks();
        let l = &br.stingy;
        let row = shares_of(&p, 0, l);
        let order = l.order();
        for j in 0..order.len() {
            let prefix = PreferenceList::new(order[..j].to_vec(), p.houses()).unwrap();
            let est = eating_start_times::<Rational>(&p.with_list(0, prefix));
            for k in j + 1..order.len() {
                let (hj, hk) = (order[j], order[k]);
                if row[hj] == Rational::one() && row[hk] == Rational::one() {
                    let ok = match (&est[hj], &est[hk]) {
                        (Some(a), Some(b)) => a < b || (a == b && rank[hj] < rank[hk]),
                        (Some(_), None) => true,
                        (None, Some(_)) => false,
                        (None, None) => rank[hj] < rank[hk],
                    };
                    prop_assert!(ok, "{} before {} in {}", hj + 1, hk + 1, l);
                }
            }
        }
    }

    #[test]
    fn dl_best_response_is_not_sd_dominated(p in complete(3, 5)) {
        let br = dl_best_response::<Rational>(&p, 0).unwrap();
        let row = br.assignment.row(0).to_vec();
        let m = p.houses();
        let mut order: Vec<usize> = (0..m).collect();
        loop {
            let other = shares_of(&p, 0, &PreferenceList::new(order.clone(), m).unwrap());
            prop_assert_ne!(
                sd_compare(&other, &row, p.list(0)).unwrap(),
                ComparisonOutcome::StrictlyPreferred
            );
            if !next_permutation(&mut order) {
                break;
            }
        }
    }

    #[test]
    fn threat_profile_keeps_assignment(p in two_agents(7)) {
        let q = threat_profile(&p).unwrap();
        prop_assert_eq!(run_ps::<Rational>(&q).0, run_ps::<Rational>(&p).0);
    }

    #[test]
    fn eu_pipeline_report_is_consistent(p in two_agents(7)) {
        let r = eu_best_response_2agents_explained(&p, 0).unwrap();
        prop_assert!(r.repaired.has_consecutivity());
        let back = p.list(1).order();
        let joined = join_to_list(&r.repaired).unwrap();
        let mapped: Vec<usize> = joined.order().iter().map(|&k| back[k]).collect();
        prop_assert_eq!(mapped.as_slice(), r.report.order());
        let identity = order_preserving_bisection(&PreferenceList::identity(p.houses()));
        let alternation = alternation_policy(&r.repaired, &identity);
        prop_assert!(alternation.has_matching());
        let aggregate = alternation.aggregate::<Rational>(p.houses());
        let row = shares_of(&p, 0, &r.report);
        for (k, &h) in back.iter().enumerate() {
            prop_assert_eq!(&aggregate.row(0)[k], &row[h]);
        }
    }

    #[test]
    fn kc_picks_half_and_beats_every_alternation(
        seed in proptest::collection::vec(0u32..1000, 1..=3),
    ) {
        let k = seed.len();
        let values: Vec<Rational> = (0..2 * k)
            .map(|i| rat(((seed[i % k] as i64) * 7919 + (i as i64) * 104_729) % 100_003 + 1, 1))
            .collect();
        let mut uniq = values.clone();
        uniq.sort();
        uniq.dedup();
        prop_assume!(uniq.len() == values.len());
        let set = kc_best_response(&values).unwrap();
        prop_assert_eq!(set.len(), k);
        let kc_total: Rational = set.iter().map(|&i| values[i].clone()).sum();
        let opponent: Vec<usize> = (0..2 * k).collect();
        let mut order = opponent.clone();
        loop {
            let mut taken = vec![false; 2 * k];
            let (mut a, mut b) = (0, 0);
            let mut total = Rational::zero();
            for _ in 0..k {
                while taken[order[a]] { a += 1; }
                taken[order[a]] = true;
                total += &values[order[a]];
                while taken[opponent[b]] { b += 1; }
                taken[opponent[b]] = true;
            }
            prop_assert!(total <= kc_total);
            if !next_permutation(&mut order) { break; }
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
